use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::control::{ControlLaw, ControlParams};
use crate::error::{Error, Result};
use crate::geometry::{AgentState, FleetRelativeState};

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_STRIDE: usize = 100;
pub const DEFAULT_BOX_SIDE: f64 = 20.0;
/// Collision guard as a fraction of the initial length scale.
pub const RHO_MIN_FACTOR: f64 = 1e-6;

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_stride() -> usize {
    DEFAULT_STRIDE
}

fn default_side() -> f64 {
    DEFAULT_BOX_SIDE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    Absolute(Vec<AgentState>),
    Relative(FleetRelativeState),
    /// Positions uniform in a square of side `side` centred at the origin,
    /// headings uniform in `[-pi, pi)`.
    Random {
        #[serde(default = "default_side")]
        side: f64,
        seed: u64,
    },
}

impl InitialCondition {
    pub fn random_poses(n: usize, side: f64, seed: u64) -> Vec<AgentState> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| AgentState {
                x: rng.random_range(-0.5..0.5) * side,
                y: rng.random_range(-0.5..0.5) * side,
                theta: rng.random_range(-PI..PI),
            })
            .collect()
    }
}

/// Piecewise-constant gain: each `(t, k)` entry applies from time `t` on.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GainSchedule(pub Vec<(f64, f64)>);

impl GainSchedule {
    pub fn gain_at(&self, t: f64, base: f64) -> f64 {
        self.0
            .iter()
            .take_while(|(start, _)| *start <= t)
            .last()
            .map_or(base, |&(_, k)| k)
    }

    pub fn validate(&self, t_end: f64) -> Result<()> {
        let mut last = 0.0;
        for &(t, k) in &self.0 {
            if !(t.is_finite() && k.is_finite()) {
                return Err(Error::Config("gain schedule entries must be finite".into()));
            }
            if t < 0.0 || t > t_end {
                return Err(Error::Config(format!(
                    "gain switch time {t} outside [0, {t_end}]"
                )));
            }
            if t < last {
                return Err(Error::Config("gain switch times must be nondecreasing".into()));
            }
            last = t;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub params: ControlParams,
    #[serde(default)]
    pub law: ControlLaw,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_end: f64,
    pub init: InitialCondition,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_schedule: Option<GainSchedule>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("n must be at least 2, got {}", self.n)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            return Err(Error::Config(format!(
                "t_end ({}) must be at least dt ({})",
                self.t_end, self.dt
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::Config("record_stride must be positive".into()));
        }
        if self.law == ControlLaw::Variant && self.n != 2 {
            return Err(Error::UnsupportedLaw(format!(
                "the variant law is only analysed for two vehicles, got {}",
                self.n
            )));
        }
        let count = match &self.init {
            InitialCondition::Absolute(poses) => poses.len(),
            InitialCondition::Relative(xi) => xi.n(),
            InitialCondition::Random { side, .. } => {
                if !(*side > 0.0 && side.is_finite()) {
                    return Err(Error::Config(format!("box side must be positive, got {side}")));
                }
                self.n
            }
        };
        if count != self.n {
            return Err(Error::Config(format!(
                "initial condition has {count} vehicles but n = {}",
                self.n
            )));
        }
        if let Some(schedule) = &self.k_schedule {
            schedule.validate(self.t_end)?;
        }
        Ok(())
    }

    pub fn gain_at(&self, t: f64) -> f64 {
        match &self.k_schedule {
            Some(s) => s.gain_at(t, self.params.k),
            None => self.params.k,
        }
    }

    /// Replaces the seed of a random initial condition; no effect otherwise.
    pub fn with_seed(mut self, seed: u64) -> Self {
        if let InitialCondition::Random { seed: s, .. } = &mut self.init {
            *s = seed;
        }
        self
    }
}
