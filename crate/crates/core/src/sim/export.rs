use std::io::Write;

use super::run::Trajectory;
use crate::error::Result;

/// Column names of the trajectory CSV.
pub fn csv_header(n: usize, with_absolute: bool) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    if with_absolute {
        for i in 1..=n {
            cols.extend([format!("x_{i}"), format!("y_{i}"), format!("theta_{i}")]);
        }
    }
    for i in 1..=n {
        cols.extend([format!("rho_{i}"), format!("alpha_{i}"), format!("beta_{i}")]);
    }
    cols.extend((1..=n).map(|i| format!("omega_{i}")));
    cols.extend(["g1", "g2", "g3"].map(String::from));
    cols
}

/// Writes one row per recorded snapshot. Floats use Rust's shortest
/// round-trip formatting, so output is reproducible byte for byte.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut out: W) -> Result<()> {
    let n = traj.n();
    writeln!(out, "{}", csv_header(n, traj.absolute.is_some()).join(","))?;
    for (idx, t) in traj.times.iter().enumerate() {
        let mut row = vec![t.to_string()];
        if let Some(abs) = &traj.absolute {
            for q in &abs[idx] {
                row.extend([q.x, q.y, q.theta].map(|x| x.to_string()));
            }
        }
        for l in &traj.relative[idx].links {
            row.extend([l.rho, l.alpha, l.beta].map(|x| x.to_string()));
        }
        row.extend(traj.controls[idx].iter().map(f64::to_string));
        let g = &traj.residuals[idx];
        row.extend([g.g1, g.g2, g.g3].map(|x| x.to_string()));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_trajectory_json<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, traj)?;
    Ok(())
}

/// Gnuplot-style `x y` columns for one vehicle; `None` without absolute poses.
pub fn vehicle_path_columns(traj: &Trajectory, vehicle: usize) -> Option<String> {
    let abs = traj.absolute.as_ref()?;
    let mut s = format!("# vehicle {}: x y\n", vehicle + 1);
    for poses in abs {
        let q = poses.get(vehicle)?;
        s.push_str(&format!("{} {}\n", q.x, q.y));
    }
    Some(s)
}
