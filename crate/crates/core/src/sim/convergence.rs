use serde::{Deserialize, Serialize};

use super::run::Trajectory;
use crate::geometry::{formation_residuals, is_circular_formation, FormationDescriptor, FormationResiduals};

pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_WINDOW: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub converged: bool,
    /// Descriptor of the last snapshot; present iff `converged`.
    pub formation: Option<FormationDescriptor>,
    /// Time of the first snapshot of the trailing run that matches the final
    /// formation in rotation, arrangement, radius and bearings.
    pub settle_time: Option<f64>,
    pub final_residuals: FormationResiduals,
}

fn matches(d: &Option<FormationDescriptor>, last: &FormationDescriptor, tol: f64) -> bool {
    let Some(d) = d else { return false };
    if d.rotation != last.rotation || d.arrangement_p != last.arrangement_p {
        return false;
    }
    let drift = d
        .bearings
        .iter()
        .zip(&last.bearings)
        .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
        .fold(0.0, f64::max);
    drift <= tol && (d.radius - last.radius).abs() <= tol * last.radius
}

/// Decides whether a trajectory has settled onto a circular formation.
pub fn detect_convergence(traj: &Trajectory, tol: f64, window: usize) -> ConvergenceReport {
    let descriptors: Vec<Option<FormationDescriptor>> = traj
        .relative
        .iter()
        .map(|xi| is_circular_formation(xi, tol, traj.speed))
        .collect();
    let final_residuals = traj
        .relative
        .last()
        .map(formation_residuals)
        .unwrap_or(FormationResiduals {
            bearing_closure: f64::INFINITY,
            angle_condition: f64::INFINITY,
            ratio_spread: f64::INFINITY,
        });
    let window = window.max(1);
    let m = descriptors.len();
    // Start of the trailing run of snapshots that agree with the last one.
    let start = match descriptors.last() {
        Some(Some(last)) => {
            let mut j = m - 1;
            while j > 0 && matches(&descriptors[j - 1], last, tol) {
                j -= 1;
            }
            Some(j)
        }
        _ => None,
    };
    let Some(settle) = start.filter(|&j| m - j >= window) else {
        return ConvergenceReport {
            converged: false,
            formation: None,
            settle_time: None,
            final_residuals,
        };
    };
    ConvergenceReport {
        converged: true,
        formation: descriptors[m - 1].clone(),
        settle_time: Some(traj.times[settle]),
        final_residuals,
    }
}
