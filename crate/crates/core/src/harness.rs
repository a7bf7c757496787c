//! Scenario files, figure reproductions and parameter sweeps.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{ControlLaw, ControlParams};
use crate::error::{Error, Result};
use crate::geometry::{
    construct_circular_formation, to_absolute, AgentState, FleetRelativeState, FormationDescriptor,
};
use crate::linear::{linearize, reduce};
use crate::sim::{
    detect_convergence, simulate, write_trajectory_csv, write_trajectory_json, ConvergenceReport,
    InitialCondition, SimConfig, Trajectory, DEFAULT_TOL, DEFAULT_WINDOW,
};
use crate::spectral::{eigvals, implicit_charpoly, stability_report, CharPoly, StabilityVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    ConvergeCheck,
    Spectrum,
    Charpoly,
    StabilityReport,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub sim: SimConfig,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
    /// Prefix for output files, relative to the output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_prefix: Option<String>,
    #[serde(default = "default_tol")]
    pub convergence_tol: f64,
    #[serde(default = "default_window")]
    pub convergence_window: usize,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Scenario::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if !(self.convergence_tol > 0.0 && self.convergence_tol.is_finite()) {
            return Err(Error::Config(format!(
                "convergence_tol must be positive, got {}",
                self.convergence_tol
            )));
        }
        if self.convergence_window == 0 {
            return Err(Error::Config("convergence_window must be positive".into()));
        }
        let linear = self
            .analyses
            .iter()
            .any(|a| matches!(a, Analysis::Spectrum | Analysis::StabilityReport | Analysis::Charpoly));
        if linear && self.sim.law != ControlLaw::Main {
            return Err(Error::Config(
                "linear analyses are only available for the main control law".into(),
            ));
        }
        Ok(())
    }
}

/// Eigenvalues of the full and reduced linearizations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub full: Vec<Complex64>,
    pub reduced: Vec<Complex64>,
    pub angular_speed: f64,
}

pub fn spectrum_report(xi_bar: &FleetRelativeState, params: &ControlParams) -> Result<SpectrumReport> {
    let full = eigvals(&linearize(xi_bar, params)?.assembled)?;
    let red = reduce(xi_bar, params)?;
    Ok(SpectrumReport {
        full,
        reduced: eigvals(&red.assembled)?,
        angular_speed: 2.0 * params.v * red.sbar,
    })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AnalysisOutputs {
    pub spectrum: Option<SpectrumReport>,
    pub charpoly: Option<CharPoly>,
    pub stability: Option<StabilityVerdict>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioOutcome {
    pub name: String,
    #[serde(skip)]
    pub trajectory: Trajectory,
    pub convergence: ConvergenceReport,
    /// Exact equilibrium nearest to the detected formation.
    pub equilibrium: Option<FleetRelativeState>,
    pub analyses: AnalysisOutputs,
    pub files: Vec<PathBuf>,
}

/// Exact circular equilibrium with the detected radius and bearings, the
/// bearings rescaled so their sum is exactly `p pi`.
pub fn snap_to_equilibrium(d: &FormationDescriptor, speed: f64) -> Result<FleetRelativeState> {
    let target = d.rotation.sign() * d.arrangement_p as f64 * std::f64::consts::PI;
    let sum: f64 = d.bearings.iter().sum();
    let bearings: Vec<f64> = d.bearings.iter().map(|a| a * target / sum).collect();
    Ok(construct_circular_formation(&bearings, d.radius, speed)?.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

pub fn write_trajectory(traj: &Trajectory, path: &Path, format: OutputFormat) -> Result<()> {
    let out = BufWriter::new(File::create(path)?);
    match format {
        OutputFormat::Csv => write_trajectory_csv(traj, out),
        OutputFormat::Json => write_trajectory_json(traj, out),
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Where and how [`run_scenario`] writes its files.
#[derive(Clone, Debug)]
pub struct OutputPlan {
    pub dir: PathBuf,
    pub prefix: Option<String>,
    pub format: OutputFormat,
}

/// Simulates a scenario, checks convergence and runs the requested analyses
/// at the detected formation.
///
/// With an [`OutputPlan`], writes `<prefix>.csv` or `<prefix>.json`,
/// `<prefix>.convergence.json` and, if analyses were requested,
/// `<prefix>.analysis.json`.
pub fn run_scenario(scenario: &Scenario, output: Option<&OutputPlan>) -> Result<ScenarioOutcome> {
    scenario.validate()?;
    let trajectory = simulate(&scenario.sim)?;
    let convergence =
        detect_convergence(&trajectory, scenario.convergence_tol, scenario.convergence_window);

    let mut files = Vec::new();
    let base = output.map(|plan| {
        let prefix = plan
            .prefix
            .clone()
            .or_else(|| scenario.output_prefix.clone())
            .unwrap_or_else(|| scenario.name.clone());
        plan.dir.join(prefix)
    });
    if let (Some(plan), Some(base)) = (output, &base) {
        let ext = match plan.format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        };
        let path = with_suffix(base, ext);
        write_trajectory(&trajectory, &path, plan.format)?;
        files.push(path);
        let path = with_suffix(base, "convergence.json");
        write_json(&convergence, &path)?;
        files.push(path);
    }

    let wants_linear = scenario
        .analyses
        .iter()
        .any(|a| *a != Analysis::ConvergeCheck);
    let mut equilibrium = None;
    let mut analyses = AnalysisOutputs::default();
    if wants_linear {
        let d = convergence.formation.as_ref().ok_or_else(|| {
            Error::NotAFormation(format!(
                "scenario {} did not settle on a circular formation",
                scenario.name
            ))
        })?;
        let params = scenario.sim.params.with_gain(scenario.sim.gain_at(scenario.sim.t_end));
        let xi_bar = snap_to_equilibrium(d, params.v)?;
        for a in &scenario.analyses {
            match a {
                Analysis::ConvergeCheck => {}
                Analysis::Spectrum => analyses.spectrum = Some(spectrum_report(&xi_bar, &params)?),
                Analysis::Charpoly => {
                    analyses.charpoly = Some(implicit_charpoly(&xi_bar.bearings(), d.rotation)?)
                }
                Analysis::StabilityReport => {
                    analyses.stability = Some(stability_report(&xi_bar, &params)?)
                }
            }
        }
        equilibrium = Some(xi_bar);
        if let Some(base) = &base {
            let path = with_suffix(base, "analysis.json");
            write_json(&analyses, &path)?;
            files.push(path);
        }
    }

    Ok(ScenarioOutcome {
        name: scenario.name.clone(),
        trajectory,
        convergence,
        equilibrium,
        analyses,
        files,
    })
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    K,
    N,
    Seed,
    /// Uniform noise on the initial poses: positions by `value` times the
    /// largest link distance, headings by `value` radians.
    BearingPerturbation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: Scenario,
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    /// Seeds used for every value; the base scenario's own seed when empty.
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: SweepParameter,
    pub value: f64,
    pub runs: usize,
    pub converged: usize,
    pub convergence_rate: f64,
    /// Fraction of all runs that settled with arrangement index 1.
    pub regular_rate: f64,
    pub mean_settle_time: Option<f64>,
    /// Largest retained real part over the detected equilibria.
    pub max_re_lambda: Option<f64>,
    pub failures: usize,
    pub errors: Vec<String>,
}

struct RunResult {
    convergence: Option<ConvergenceReport>,
    max_re: Option<f64>,
    error: Option<String>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep value list is empty".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        if self.parameter == SweepParameter::N && !matches!(self.base.sim.init, InitialCondition::Random { .. }) {
            return Err(Error::Config("sweeping n needs a random initial condition".into()));
        }
        self.base.validate()
    }

    fn job_config(&self, value: f64, seed: Option<u64>) -> Result<SimConfig> {
        let mut sim = self.base.sim.clone();
        if let Some(seed) = seed {
            sim = sim.with_seed(seed);
        }
        match self.parameter {
            SweepParameter::K => {
                sim.params = ControlParams::new(sim.params.v, value)?;
            }
            SweepParameter::N => {
                if value < 2.0 || value.fract() != 0.0 {
                    return Err(Error::Config(format!("n must be an integer >= 2, got {value}")));
                }
                sim.n = value as usize;
            }
            SweepParameter::Seed => {
                if value < 0.0 || value.fract() != 0.0 {
                    return Err(Error::Config(format!("seed must be a nonnegative integer, got {value}")));
                }
                sim = sim.with_seed(value as u64);
            }
            SweepParameter::BearingPerturbation => {
                let poses = match &sim.init {
                    InitialCondition::Absolute(p) => p.clone(),
                    InitialCondition::Relative(xi) => {
                        to_absolute(xi, AgentState { x: 0.0, y: 0.0, theta: 0.0 })
                    }
                    InitialCondition::Random { side, seed } => {
                        InitialCondition::random_poses(sim.n, *side, *seed)
                    }
                };
                sim.init = InitialCondition::Absolute(perturb(&poses, value, seed.unwrap_or(0))?);
            }
        }
        sim.validate()?;
        Ok(sim)
    }

    fn run_one(&self, value: f64, seed: Option<u64>) -> RunResult {
        let outcome = (|| -> Result<(ConvergenceReport, Option<f64>)> {
            let sim = self.job_config(value, seed)?;
            let traj = simulate(&sim)?;
            let report = detect_convergence(&traj, self.base.convergence_tol, self.base.convergence_window);
            let max_re = match (&report.formation, sim.law) {
                (Some(d), ControlLaw::Main) => {
                    let params = sim.params.with_gain(sim.gain_at(sim.t_end));
                    snap_to_equilibrium(d, params.v)
                        .and_then(|xi| stability_report(&xi, &params))
                        .map(|v| v.max_real_part)
                        .ok()
                }
                _ => None,
            };
            Ok((report, max_re))
        })();
        match outcome {
            Ok((c, m)) => RunResult {
                convergence: Some(c),
                max_re: m,
                error: None,
            },
            Err(e) => RunResult {
                convergence: None,
                max_re: None,
                error: Some(e.to_string()),
            },
        }
    }
}

fn perturb(poses: &[AgentState], magnitude: f64, seed: u64) -> Result<Vec<AgentState>> {
    if magnitude < 0.0 {
        return Err(Error::Config(format!("perturbation must be nonnegative, got {magnitude}")));
    }
    let scale = crate::geometry::to_relative(poses)?.max_rho();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    poses
        .iter()
        .map(|q| {
            AgentState::new(
                q.x + magnitude * scale * rng.random_range(-1.0..1.0),
                q.y + magnitude * scale * rng.random_range(-1.0..1.0),
                q.theta + magnitude * rng.random_range(-1.0..1.0),
            )
        })
        .collect()
}

/// Runs every `(value, seed)` pair on a worker pool and aggregates one row
/// per value. Failed runs are counted in the row; the sweep continues.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let seeds: Vec<Option<u64>> = if spec.seeds.is_empty() || spec.parameter == SweepParameter::Seed {
        vec![None]
    } else {
        spec.seeds.iter().copied().map(Some).collect()
    };
    let jobs: Vec<(usize, f64, Option<u64>)> = spec
        .values
        .iter()
        .enumerate()
        .flat_map(|(i, &v)| seeds.iter().map(move |&s| (i, v, s)))
        .collect();
    let work = || -> Vec<(usize, RunResult)> {
        jobs.par_iter()
            .map(|&(i, v, s)| (i, spec.run_one(v, s)))
            .collect()
    };
    let results = match spec.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(work),
        None => work(),
    };

    Ok(spec
        .values
        .iter()
        .enumerate()
        .map(|(i, &value)| {
            let mine: Vec<&RunResult> = results.iter().filter(|r| r.0 == i).map(|r| &r.1).collect();
            let runs = mine.len();
            let settled: Vec<&ConvergenceReport> = mine
                .iter()
                .filter_map(|r| r.convergence.as_ref())
                .filter(|c| c.converged)
                .collect();
            let regular = settled
                .iter()
                .filter(|c| c.formation.as_ref().is_some_and(|d| d.arrangement_p == 1))
                .count();
            let settle: Vec<f64> = settled.iter().filter_map(|c| c.settle_time).collect();
            let max_re = mine
                .iter()
                .filter_map(|r| r.max_re)
                .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))));
            let errors: Vec<String> = mine.iter().filter_map(|r| r.error.clone()).collect();
            SweepRow {
                parameter: spec.parameter,
                value,
                runs,
                converged: settled.len(),
                convergence_rate: settled.len() as f64 / runs as f64,
                regular_rate: regular as f64 / runs as f64,
                mean_settle_time: (!settle.is_empty())
                    .then(|| settle.iter().sum::<f64>() / settle.len() as f64),
                max_re_lambda: max_re,
                failures: errors.len(),
                errors,
            }
        })
        .collect())
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(
        out,
        "parameter,value,runs,converged,convergence_rate,regular_rate,mean_settle_time,max_re_lambda,failures"
    )?;
    let opt = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
    for r in rows {
        let name = serde_json::to_value(r.parameter)?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            name.as_str().unwrap_or_default(),
            r.value,
            r.runs,
            r.converged,
            r.convergence_rate,
            r.regular_rate,
            opt(r.mean_settle_time),
            opt(r.max_re_lambda),
            r.failures
        )?;
    }
    Ok(())
}

/// Scenarios shipped with the crate, as `(name, json)`.
pub const BUNDLED: &[(&str, &str)] = &[
    ("fig_5vehicles", include_str!("../scenarios/fig_5vehicles.json")),
    ("fig_5vehicles_cw", include_str!("../scenarios/fig_5vehicles_cw.json")),
    ("fig_2vehicles_switch", include_str!("../scenarios/fig_2vehicles_switch.json")),
    ("fig_3vehicles", include_str!("../scenarios/fig_3vehicles.json")),
    ("fig_3vehicles_irregular", include_str!("../scenarios/fig_3vehicles_irregular.json")),
];

pub fn bundled_scenario(name: &str) -> Result<Scenario> {
    let name = name.trim_end_matches(".json");
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("no bundled scenario named {name}")))?;
    Scenario::from_json(text)
}
