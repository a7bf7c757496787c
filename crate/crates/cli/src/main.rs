use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cyclic_pursuit::control::ControlParams;
use cyclic_pursuit::geometry::{construct_circular_formation, construct_equally_spaced, FleetRelativeState, Rotation};
use cyclic_pursuit::harness::{
    bundled_scenario, run_scenario, run_sweep, spectrum_report, write_sweep_csv, OutputFormat, OutputPlan, Scenario,
    SweepSpec, BUNDLED,
};
use cyclic_pursuit::sim::{detect_convergence, simulate, vehicle_path_columns, write_trajectory_csv, write_trajectory_json};
use cyclic_pursuit::spectral::{implicit_charpoly, routh_hurwitz, stability_report_with, ReportOptions};
use cyclic_pursuit::{Error, ErrorKind};

#[derive(Debug, Parser)]
#[command(name = "pursuit-lab", version, about = "Cyclic pursuit of unicycles: simulation and stability analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a scenario and export the trajectory
    Simulate(RunArgs),
    /// Run a scenario with its convergence check and requested analyses
    Analyze(RunArgs),
    /// Eigenvalues of the full and reduced linearization at an equilibrium
    Spectrum(EquilibriumArgs),
    /// Implicit characteristic polynomial and its Routh table
    Charpoly(EquilibriumArgs),
    /// Stability verdict for a circular equilibrium
    Stability {
        #[command(flatten)]
        eq: EquilibriumArgs,
        /// Skip the closed-form routes and use the reduced-matrix eigenvalues
        #[arg(long)]
        generic: bool,
        /// Compare the reduced spectrum against the full linearization
        #[arg(long)]
        cross_check: bool,
    },
    /// Parameter sweep from a JSON sweep file
    Sweep {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// CSV output file; stdout when omitted
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Worker threads; rayon's default when omitted
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Bundled figure scenarios
    Scenarios {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Write one gnuplot `x y` file per vehicle
    Plot {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        seed: Option<u64>,
        /// Files are named `<PREFIX>.vehicle<i>.dat`
        #[arg(long, value_name = "PREFIX")]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum ScenarioAction {
    List,
    Show { name: String },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Scenario JSON file
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Name of a bundled scenario
    #[arg(long, value_name = "NAME")]
    scenario: Option<String>,
}

impl Source {
    fn load(&self, seed: Option<u64>) -> anyhow::Result<Scenario> {
        let mut s = match (&self.config, &self.scenario) {
            (Some(path), _) => Scenario::load(path).with_context(|| format!("loading {}", path.display()))?,
            (None, Some(name)) => bundled_scenario(name)?,
            (None, None) => unreachable!("clap enforces one source"),
        };
        if let Some(seed) = seed {
            s.sim = s.sim.with_seed(seed);
        }
        Ok(s)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Replace the seed of a random initial condition
    #[arg(long)]
    seed: Option<u64>,
    /// Output path prefix; the trajectory goes to stdout when omitted
    #[arg(long, value_name = "PREFIX")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Turn {
    Ccw,
    Cw,
}

#[derive(Debug, Args)]
struct EquilibriumArgs {
    /// Bearings in radians, comma separated; their sum must be a multiple of pi
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "equally_spaced")]
    bearings: Option<Vec<f64>>,
    /// Build an equally spaced fleet of this size instead
    #[arg(long, value_name = "N")]
    equally_spaced: Option<usize>,
    /// Rotation of an equally spaced fleet
    #[arg(long, value_enum, default_value = "ccw")]
    rotation: Turn,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 1.0)]
    v: f64,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    k: f64,
}

impl EquilibriumArgs {
    fn build(&self) -> anyhow::Result<(FleetRelativeState, ControlParams, Rotation)> {
        let bad = |e: Error| Error::Config(e.to_string());
        let params = ControlParams::new(self.v, self.k).map_err(bad)?;
        match (&self.bearings, self.equally_spaced) {
            (Some(b), _) => {
                let (xi, d) = construct_circular_formation(b, self.radius, self.v).map_err(bad)?;
                Ok((xi, params, d.rotation))
            }
            (None, Some(n)) => {
                let rotation = match self.rotation {
                    Turn::Ccw => Rotation::CounterClockwise,
                    Turn::Cw => Rotation::Clockwise,
                };
                Ok((construct_equally_spaced(n, self.radius, rotation).map_err(bad)?.1, params, rotation))
            }
            (None, None) => bail!(Error::Config("give --bearings or --equally-spaced".into())),
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn split_prefix(prefix: &Path) -> (PathBuf, String) {
    let dir = prefix.parent().map(Path::to_path_buf).unwrap_or_default();
    let name = prefix.file_name().map_or_else(|| "run".to_string(), |s| s.to_string_lossy().into_owned());
    (dir, name)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let scenario = args.source.load(args.seed)?;
            let traj = simulate(&scenario.sim)?;
            let conv = detect_convergence(&traj, scenario.convergence_tol, scenario.convergence_window);
            match &args.out {
                Some(prefix) => {
                    let ext = match args.format {
                        Format::Csv => "csv",
                        Format::Json => "json",
                    };
                    let mut name = prefix.as_os_str().to_owned();
                    name.push(format!(".{ext}"));
                    let path = PathBuf::from(name);
                    cyclic_pursuit::harness::write_trajectory(&traj, &path, args.format.into())?;
                    eprintln!("wrote {}", path.display());
                }
                None => {
                    let out = BufWriter::new(io::stdout().lock());
                    match args.format {
                        Format::Csv => write_trajectory_csv(&traj, out)?,
                        Format::Json => write_trajectory_json(&traj, out)?,
                    }
                }
            }
            match conv.formation {
                Some(d) => eprintln!(
                    "converged at t = {:.3}: radius {:.6}, {:?}, p = {}",
                    conv.settle_time.unwrap_or_default(),
                    d.radius,
                    d.rotation,
                    d.arrangement_p
                ),
                None => eprintln!("no circular formation detected (residuals {:?})", conv.final_residuals),
            }
        }
        Command::Analyze(args) => {
            let scenario = args.source.load(args.seed)?;
            let plan = args.out.as_deref().map(|p| {
                let (dir, prefix) = split_prefix(p);
                OutputPlan { dir, prefix: Some(prefix), format: args.format.into() }
            });
            let outcome = run_scenario(&scenario, plan.as_ref())?;
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            print_json(&outcome)?;
        }
        Command::Spectrum(eq) => {
            let (xi, params, _) = eq.build()?;
            print_json(&spectrum_report(&xi, &params)?)?;
        }
        Command::Charpoly(eq) => {
            let (xi, _, rotation) = eq.build()?;
            let cp = implicit_charpoly(&xi.bearings(), rotation)?;
            println!("P(l)  = {}", fmt_poly(&cp.coeffs));
            println!("P~(l) = {}", fmt_poly(&cp.reduced_coeffs));
            println!("z     = {:?}", cp.z_values);
            println!("remainder {:e}", cp.remainder);
            println!();
            println!("{}", routh_hurwitz(&cp.reduced_coeffs)?);
        }
        Command::Stability { eq, generic, cross_check } => {
            let (xi, params, _) = eq.build()?;
            let options = ReportOptions { force_generic: generic, cross_check_full: cross_check };
            let verdict = stability_report_with(&xi, &params, options)?;
            if let Some(table) = &verdict.routh {
                eprintln!("{table}");
            }
            print_json(&verdict)?;
        }
        Command::Sweep { config, out, threads } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut spec: SweepSpec = serde_json::from_str(&text).map_err(Error::from)?;
            if threads.is_some() {
                spec.threads = threads;
            }
            let rows = run_sweep(&spec)?;
            match out {
                Some(path) => write_sweep_csv(&rows, BufWriter::new(File::create(&path).map_err(Error::from)?))?,
                None => write_sweep_csv(&rows, io::stdout().lock())?,
            }
        }
        Command::Scenarios { action } => match action {
            ScenarioAction::List => {
                for (name, _) in BUNDLED {
                    let s = bundled_scenario(name)?;
                    println!("{name:<26} {}", s.description);
                }
            }
            ScenarioAction::Show { name } => {
                let name = name.trim_end_matches(".json");
                let (_, text) = BUNDLED
                    .iter()
                    .find(|(n, _)| *n == name)
                    .ok_or_else(|| Error::Config(format!("no bundled scenario named {name}")))?;
                print!("{text}");
            }
        },
        Command::Plot { source, seed, out } => {
            let scenario = source.load(seed)?;
            let traj = simulate(&scenario.sim)?;
            for i in 0..traj.n() {
                let Some(cols) = vehicle_path_columns(&traj, i) else {
                    bail!(Error::Config("plotting needs absolute poses; use an absolute or random start".into()));
                };
                let mut name = out.as_os_str().to_owned();
                name.push(format!(".vehicle{}.dat", i + 1));
                let path = PathBuf::from(name);
                std::fs::write(&path, cols).map_err(Error::from)?;
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn fmt_poly(coeffs: &[f64]) -> String {
    let d = coeffs.len().saturating_sub(1);
    coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| match d - i {
            0 => format!("{c:+.6}"),
            1 => format!("{c:+.6} l"),
            p => format!("{c:+.6} l^{p}"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()).map(Error::kind) {
        Some(ErrorKind::Config) | None => 2,
        Some(ErrorKind::Simulation) => 3,
        Some(ErrorKind::Analysis) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
