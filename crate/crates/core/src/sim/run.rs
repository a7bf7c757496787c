use serde::{Deserialize, Serialize};

use super::config::{InitialCondition, SimConfig, RHO_MIN_FACTOR};
use super::integrator::{absolute_rhs, step_rk4};
use crate::control::{closed_loop_rhs_flat, omega, ControlParams};
use crate::error::{Error, Result};
use crate::geometry::{
    constraint_residuals, to_relative, AgentState, ConstraintResidual, FleetRelativeState,
};

/// Recorded snapshots of a simulation run. All lists have equal length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub speed: f64,
    pub times: Vec<f64>,
    /// Absolute poses; absent when the relative system was integrated directly.
    pub absolute: Option<Vec<Vec<AgentState>>>,
    pub relative: Vec<FleetRelativeState>,
    pub controls: Vec<Vec<f64>>,
    pub residuals: Vec<ConstraintResidual>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n(&self) -> usize {
        self.relative.first().map_or(0, FleetRelativeState::n)
    }

    /// Snapshots with `t <= t_max`.
    pub fn truncated(&self, t_max: f64) -> Trajectory {
        let m = self.times.iter().take_while(|&&t| t <= t_max).count();
        Trajectory {
            speed: self.speed,
            times: self.times[..m].to_vec(),
            absolute: self.absolute.as_ref().map(|a| a[..m].to_vec()),
            relative: self.relative[..m].to_vec(),
            controls: self.controls[..m].to_vec(),
            residuals: self.residuals[..m].to_vec(),
        }
    }
}

struct Recorder {
    traj: Trajectory,
}

impl Recorder {
    fn push(&mut self, t: f64, poses: Option<&[AgentState]>, xi: FleetRelativeState, w: Vec<f64>) {
        self.traj.times.push(t);
        if let (Some(all), Some(p)) = (self.traj.absolute.as_mut(), poses) {
            all.push(p.to_vec());
        }
        self.traj.residuals.push(constraint_residuals(&xi));
        self.traj.relative.push(xi);
        self.traj.controls.push(w);
    }
}

fn poses_from(state: &[f64]) -> Vec<AgentState> {
    state
        .chunks_exact(3)
        .map(|c| AgentState {
            x: c[0],
            y: c[1],
            theta: c[2],
        })
        .collect()
}

fn controls(xi: &FleetRelativeState, params: &ControlParams, config: &SimConfig) -> Result<Vec<f64>> {
    xi.links.iter().map(|l| omega(l, params, config.law)).collect()
}

fn guard(xi: &FleetRelativeState, t: f64, rho_min: f64) -> Result<()> {
    match xi.links.iter().enumerate().find(|(_, l)| l.rho < rho_min) {
        Some((i, l)) => Err(Error::Collision {
            time: t,
            link: i + 1,
            rho: l.rho,
            rho_min,
        }),
        None => Ok(()),
    }
}

/// Integrates the fleet with fixed-step RK4.
///
/// Absolute and random initial conditions integrate the unicycle poses and
/// recompute link coordinates at every stage; a relative initial condition
/// integrates the closed loop in link coordinates and wraps the angles after
/// each step.
pub fn simulate(config: &SimConfig) -> Result<Trajectory> {
    config.validate()?;
    match &config.init {
        InitialCondition::Absolute(poses) => simulate_absolute(config, poses.clone(), None),
        InitialCondition::Random { side, seed } => {
            let poses = InitialCondition::random_poses(config.n, *side, *seed);
            simulate_absolute(config, poses, Some(*side))
        }
        InitialCondition::Relative(xi) => simulate_relative(config, xi.clone()),
    }
}

fn step_count(config: &SimConfig) -> usize {
    (config.t_end / config.dt).round() as usize
}

fn simulate_absolute(
    config: &SimConfig,
    poses: Vec<AgentState>,
    side: Option<f64>,
) -> Result<Trajectory> {
    let v = config.params.v;
    let xi0 = to_relative(&poses)?;
    let rho_min = RHO_MIN_FACTOR * side.unwrap_or_else(|| xi0.max_rho());
    guard(&xi0, 0.0, rho_min)?;

    let rhs = |t: f64, s: &[f64]| -> Result<Vec<f64>> {
        let poses = poses_from(s);
        let xi = to_relative(&poses)?;
        let params = config.params.with_gain(config.gain_at(t));
        let mut out = Vec::with_capacity(s.len());
        for (q, link) in poses.iter().zip(&xi.links) {
            out.extend(absolute_rhs(q, omega(link, &params, config.law)?, v));
        }
        Ok(out)
    };

    let mut rec = Recorder {
        traj: Trajectory {
            speed: v,
            times: Vec::new(),
            absolute: Some(Vec::new()),
            relative: Vec::new(),
            controls: Vec::new(),
            residuals: Vec::new(),
        },
    };
    let w0 = controls(&xi0, &config.params.with_gain(config.gain_at(0.0)), config)?;
    rec.push(0.0, Some(&poses), xi0, w0);

    let steps = step_count(config);
    let mut state: Vec<f64> = poses.iter().flat_map(|q| [q.x, q.y, q.theta]).collect();
    for i in 0..steps {
        let t = i as f64 * config.dt;
        state = step_rk4(t, &state, config.dt, rhs)?;
        let t_next = (i + 1) as f64 * config.dt;
        let poses = poses_from(&state);
        let xi = to_relative(&poses).map_err(|_| Error::Collision {
            time: t_next,
            link: 0,
            rho: 0.0,
            rho_min,
        })?;
        guard(&xi, t_next, rho_min)?;
        if (i + 1) % config.record_stride == 0 || i + 1 == steps {
            let w = controls(&xi, &config.params.with_gain(config.gain_at(t_next)), config)?;
            rec.push(t_next, Some(&poses), xi, w);
        }
    }
    Ok(rec.traj)
}

fn simulate_relative(config: &SimConfig, xi0: FleetRelativeState) -> Result<Trajectory> {
    let rho_min = RHO_MIN_FACTOR * xi0.max_rho();
    guard(&xi0, 0.0, rho_min)?;
    let rhs = |t: f64, s: &[f64]| {
        closed_loop_rhs_flat(s, &config.params.with_gain(config.gain_at(t)), config.law)
    };

    let mut rec = Recorder {
        traj: Trajectory {
            speed: config.params.v,
            times: Vec::new(),
            absolute: None,
            relative: Vec::new(),
            controls: Vec::new(),
            residuals: Vec::new(),
        },
    };
    let w0 = controls(&xi0, &config.params.with_gain(config.gain_at(0.0)), config)?;
    let mut state = xi0.to_vec();
    rec.push(0.0, None, xi0, w0);

    let steps = step_count(config);
    for i in 0..steps {
        let t = i as f64 * config.dt;
        let next = step_rk4(t, &state, config.dt, rhs)?;
        let t_next = (i + 1) as f64 * config.dt;
        if let Some(j) = (0..config.n).find(|j| next[3 * j] < rho_min) {
            return Err(Error::Collision {
                time: t_next,
                link: j + 1,
                rho: next[3 * j],
                rho_min,
            });
        }
        let xi = FleetRelativeState::from_slice(&next)?;
        state = xi.to_vec();
        if (i + 1) % config.record_stride == 0 || i + 1 == steps {
            let w = controls(&xi, &config.params.with_gain(config.gain_at(t_next)), config)?;
            rec.push(t_next, None, xi, w);
        }
    }
    Ok(rec.traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::ControlLaw;
    use crate::geometry::{construct_circular_formation, construct_equally_spaced, Rotation};
    use std::f64::consts::PI;

    fn config(n: usize, k: f64, init: InitialCondition) -> SimConfig {
        SimConfig {
            n,
            params: ControlParams::new(1.0, k).unwrap(),
            law: ControlLaw::Main,
            dt: 1e-3,
            t_end: 1.0,
            init,
            record_stride: 100,
            k_schedule: None,
        }
    }

    #[test]
    fn records_every_stride_and_final() {
        let mut c = config(3, -2.0, InitialCondition::Random { side: 20.0, seed: 1 });
        c.t_end = 1.05;
        let traj = simulate(&c).unwrap();
        assert_eq!(traj.len(), 12);
        assert!((traj.times[11] - 1.05).abs() < 1e-12);
        assert_eq!(traj.absolute.as_ref().unwrap().len(), 12);
        assert_eq!(traj.controls.len(), 12);
        assert_eq!(traj.residuals.len(), 12);
    }

    #[test]
    fn one_step_on_circle_is_rigid_rotation() {
        let r = 3.0;
        let (poses, _) = construct_equally_spaced(4, r, Rotation::CounterClockwise).unwrap();
        let mut c = config(4, -2.0, InitialCondition::Absolute(poses.clone()));
        c.dt = 0.01;
        c.t_end = 0.01;
        c.record_stride = 1;
        let traj = simulate(&c).unwrap();
        let after = &traj.absolute.unwrap()[1];
        let turn = 0.01 / r;
        for (q0, q1) in poses.iter().zip(after) {
            let (s, cth) = turn.sin_cos();
            let x = cth * q0.x - s * q0.y;
            let y = s * q0.x + cth * q0.y;
            assert!((q1.x - x).abs() < 1e-10 && (q1.y - y).abs() < 1e-10);
            assert!((q1.theta - q0.theta - turn).abs() < 1e-10);
        }
    }

    #[test]
    fn relative_equilibrium_persists() {
        let (xi, _) = construct_circular_formation(&[0.6, 1.0, PI - 1.6], 2.0, 1.0).unwrap();
        let mut c = config(3, -2.0, InitialCondition::Relative(xi.clone()));
        c.t_end = 5.0;
        let traj = simulate(&c).unwrap();
        assert!(traj.absolute.is_none());
        let last = traj.relative.last().unwrap();
        for (a, b) in last.links.iter().zip(&xi.links) {
            assert!((a.rho - b.rho).abs() < 1e-9);
            assert!((a.alpha - b.alpha).abs() < 1e-9);
        }
    }

    #[test]
    fn collision_aborts() {
        // Two vehicles driving straight into each other.
        let poses = vec![
            AgentState::new(0.0, 0.0, 0.0).unwrap(),
            AgentState::new(1.0, 0.0, PI).unwrap(),
        ];
        let mut c = config(2, 0.0, InitialCondition::Absolute(poses));
        c.t_end = 2.0;
        assert!(matches!(simulate(&c), Err(Error::Collision { .. })));
    }

    #[test]
    fn truncation() {
        let c = config(3, -2.0, InitialCondition::Random { side: 20.0, seed: 2 });
        let traj = simulate(&c).unwrap();
        let head = traj.truncated(0.5);
        assert_eq!(head.len(), 6);
        assert_eq!(head.relative.len(), 6);
    }
}
