//! Relative coordinates of a cyclic-pursuit fleet and the geometry of
//! circular formations.
//!
//! Vehicle `i` pursues vehicle `i + 1 (mod n)`. Link `i` is described by the
//! distance `rho` to the prey, the bearing `alpha` from the pursuer's heading
//! to the line of sight, and `beta = theta_i - theta_{i+1} - pi`. All angles
//! are kept in the half-open range `[-pi, pi)`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance, in radians, for angle equalities taken modulo `2 pi`.
pub const ANGLE_TOL: f64 = 1e-6;

/// Maximum distance of `sum(alpha) / pi` from an integer before a bearing set
/// is rejected as not describing a formation.
pub const ARRANGEMENT_SLACK: f64 = 0.1;

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite("angle"));
    }
    Ok(wrap(x))
}

/// Infallible variant for values already known to be finite.
pub(crate) fn wrap(x: f64) -> f64 {
    let mut y = (x + PI).rem_euclid(TAU) - PI;
    if y >= PI {
        y -= TAU;
    }
    if y < -PI {
        y += TAU;
    }
    y
}

/// Absolute pose of one unicycle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl AgentState {
    pub fn new(x: f64, y: f64, theta: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && theta.is_finite()) {
            return Err(Error::NonFinite("agent state"));
        }
        Ok(Self { x, y, theta })
    }
}

/// Coordinates of one pursuit link.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLink")]
pub struct RelativeState {
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Deserialize)]
struct RawLink {
    rho: f64,
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawLink> for RelativeState {
    type Error = Error;

    fn try_from(raw: RawLink) -> Result<Self> {
        RelativeState::new(raw.rho, raw.alpha, raw.beta)
    }
}

impl RelativeState {
    /// Builds a link, wrapping both angles. `rho` must be positive.
    pub fn new(rho: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(rho.is_finite() && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::NonFinite("relative state"));
        }
        if rho <= 0.0 {
            return Err(Error::DegenerateGeometry(format!(
                "link distance must be positive, got {rho}"
            )));
        }
        Ok(Self {
            rho,
            alpha: wrap(alpha),
            beta: wrap(beta),
        })
    }
}

/// Relative state of the whole fleet; link `i` points from vehicle `i` to
/// vehicle `i + 1 (mod n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFleet")]
pub struct FleetRelativeState {
    pub links: Vec<RelativeState>,
}

#[derive(Deserialize)]
struct RawFleet {
    links: Vec<RelativeState>,
}

impl TryFrom<RawFleet> for FleetRelativeState {
    type Error = Error;

    fn try_from(raw: RawFleet) -> Result<Self> {
        FleetRelativeState::new(raw.links)
    }
}

impl FleetRelativeState {
    pub fn new(links: Vec<RelativeState>) -> Result<Self> {
        if links.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a fleet needs at least two vehicles, got {}",
                links.len()
            )));
        }
        Ok(Self { links })
    }

    /// Builds a fleet from `(rho, alpha, beta)` triples.
    pub fn from_triples(triples: &[(f64, f64, f64)]) -> Result<Self> {
        let links = triples
            .iter()
            .map(|&(r, a, b)| RelativeState::new(r, a, b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(links)
    }

    pub fn n(&self) -> usize {
        self.links.len()
    }

    /// Flattens into `[rho_1, alpha_1, beta_1, rho_2, ...]`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.links
            .iter()
            .flat_map(|l| [l.rho, l.alpha, l.beta])
            .collect()
    }

    /// Inverse of [`to_vec`](Self::to_vec); angles are wrapped.
    pub fn from_slice(values: &[f64]) -> Result<Self> {
        if values.len() % 3 != 0 {
            return Err(Error::InvalidInput(format!(
                "state length {} is not a multiple of 3",
                values.len()
            )));
        }
        let links = values
            .chunks_exact(3)
            .map(|c| RelativeState::new(c[0], c[1], c[2]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(links)
    }

    pub fn bearings(&self) -> Vec<f64> {
        self.links.iter().map(|l| l.alpha).collect()
    }

    pub fn max_rho(&self) -> f64 {
        self.links.iter().map(|l| l.rho).fold(0.0, f64::max)
    }
}

/// The three closure constraints of a relative state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintResidual {
    pub g1: f64,
    pub g2: f64,
    /// `sum(beta) + n pi`, wrapped.
    pub g3: f64,
    /// Accumulated angles `(i - 1) pi - sum_{j < i} beta_j`, unwrapped.
    pub gammas: Vec<f64>,
}

/// Direction of rotation of a circular formation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Rotation {
    CounterClockwise,
    Clockwise,
}

impl Rotation {
    pub fn sign(self) -> f64 {
        match self {
            Rotation::CounterClockwise => 1.0,
            Rotation::Clockwise => -1.0,
        }
    }

    pub fn from_sign(x: f64) -> Option<Self> {
        if x > 0.0 {
            Some(Rotation::CounterClockwise)
        } else if x < 0.0 {
            Some(Rotation::Clockwise)
        } else {
            None
        }
    }
}

impl From<Rotation> for i8 {
    fn from(r: Rotation) -> i8 {
        match r {
            Rotation::CounterClockwise => 1,
            Rotation::Clockwise => -1,
        }
    }
}

impl TryFrom<i8> for Rotation {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Rotation::CounterClockwise),
            -1 => Ok(Rotation::Clockwise),
            other => Err(format!("rotation must be +1 or -1, got {other}")),
        }
    }
}

/// A detected circular formation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormationDescriptor {
    pub radius: f64,
    pub rotation: Rotation,
    /// Common value of `sin(alpha_i) / rho_i`.
    pub ratio_s: f64,
    pub arrangement_p: u32,
    pub bearings: Vec<f64>,
    pub angular_speed: f64,
}

/// How far a relative state is from satisfying each formation condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormationResiduals {
    /// `|wrap(sum(beta) + n pi)|`
    pub bearing_closure: f64,
    /// `max_i |wrap(2 alpha_i + beta_i - pi)|`
    pub angle_condition: f64,
    /// `(max - min) / |mean|` of `sin(alpha_i) / rho_i`; infinite if the mean is zero.
    pub ratio_spread: f64,
}

pub fn formation_residuals(xi: &FleetRelativeState) -> FormationResiduals {
    let n = xi.n() as f64;
    let beta_sum: f64 = xi.links.iter().map(|l| l.beta).sum();
    let bearing_closure = wrap(beta_sum + n * PI).abs();
    let angle_condition = xi
        .links
        .iter()
        .map(|l| wrap(2.0 * l.alpha + l.beta - PI).abs())
        .fold(0.0, f64::max);
    let ratios: Vec<f64> = xi.links.iter().map(|l| l.alpha.sin() / l.rho).collect();
    let mean = ratios.iter().sum::<f64>() / n;
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
            (lo.min(r), hi.max(r))
        });
    let scale = xi.links.iter().map(|l| 1.0 / l.rho).fold(0.0, f64::max);
    let ratio_spread = if mean.abs() <= 1e-14 * scale {
        f64::INFINITY
    } else {
        (hi - lo) / mean.abs()
    };
    FormationResiduals {
        bearing_closure,
        angle_condition,
        ratio_spread,
    }
}

/// Converts absolute poses into link coordinates.
pub fn to_relative(fleet: &[AgentState]) -> Result<FleetRelativeState> {
    let n = fleet.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "a fleet needs at least two vehicles, got {n}"
        )));
    }
    let mut links = Vec::with_capacity(n);
    for i in 0..n {
        let me = &fleet[i];
        let prey = &fleet[(i + 1) % n];
        let (dx, dy) = (prey.x - me.x, prey.y - me.y);
        let (s, c) = me.theta.sin_cos();
        let xb = c * dx + s * dy;
        let yb = -s * dx + c * dy;
        let rho = xb.hypot(yb);
        if !rho.is_finite() {
            return Err(Error::NonFinite("agent position"));
        }
        if rho == 0.0 {
            return Err(Error::DegenerateGeometry(format!(
                "vehicles {} and {} coincide",
                i + 1,
                (i + 1) % n + 1
            )));
        }
        links.push(RelativeState {
            rho,
            alpha: wrap(yb.atan2(xb)),
            beta: wrap(me.theta - prey.theta - PI),
        });
    }
    Ok(FleetRelativeState { links })
}

/// Rebuilds absolute poses from link coordinates, with vehicle 1 at
/// `anchor`. Only the first `n - 1` links are used; the last one is implied
/// when the state satisfies the closure constraints.
pub fn to_absolute(xi: &FleetRelativeState, anchor: AgentState) -> Vec<AgentState> {
    let mut poses = Vec::with_capacity(xi.n());
    let mut q = anchor;
    poses.push(q);
    for l in &xi.links[..xi.n() - 1] {
        let dir = q.theta + l.alpha;
        q = AgentState {
            x: q.x + l.rho * dir.cos(),
            y: q.y + l.rho * dir.sin(),
            theta: wrap(q.theta - l.beta - PI),
        };
        poses.push(q);
    }
    poses
}

/// Evaluates the closure constraints `g1`, `g2`, `g3`.
pub fn constraint_residuals(xi: &FleetRelativeState) -> ConstraintResidual {
    let mut gammas = Vec::with_capacity(xi.n());
    let mut gamma = 0.0;
    let (mut g1, mut g2) = (0.0, 0.0);
    for (i, link) in xi.links.iter().enumerate() {
        if i > 0 {
            gamma += PI - xi.links[i - 1].beta;
        }
        gammas.push(gamma);
        let (s, c) = (link.alpha + gamma).sin_cos();
        g1 += link.rho * s;
        g2 += link.rho * c;
    }
    let beta_sum: f64 = xi.links.iter().map(|l| l.beta).sum();
    ConstraintResidual {
        g1,
        g2,
        g3: wrap(beta_sum + xi.n() as f64 * PI),
        gammas,
    }
}

/// Returns a descriptor if `xi` is a circular formation within `tol`.
///
/// `speed` is the common forward speed, used only for the descriptor's
/// angular speed.
pub fn is_circular_formation(
    xi: &FleetRelativeState,
    tol: f64,
    speed: f64,
) -> Option<FormationDescriptor> {
    let res = formation_residuals(xi);
    if res.bearing_closure > tol || res.angle_condition > tol || res.ratio_spread > tol {
        return None;
    }
    let n = xi.n();
    let ratio_s = xi.links.iter().map(|l| l.alpha.sin() / l.rho).sum::<f64>() / n as f64;
    let rotation = Rotation::from_sign(ratio_s)?;
    if xi
        .links
        .iter()
        .any(|l| Rotation::from_sign(l.alpha) != Some(rotation))
    {
        return None;
    }
    let bearings = xi.bearings();
    let p = bearing_sum_index(&bearings).ok()?;
    Some(FormationDescriptor {
        radius: 1.0 / (2.0 * ratio_s.abs()),
        rotation,
        ratio_s,
        arrangement_p: p.unsigned_abs(),
        bearings,
        angular_speed: 2.0 * speed * ratio_s,
    })
}

/// Trigonometric form of the angle condition `2 alpha + beta = pi (mod 2 pi)`.
pub fn equivalent_condition_check(xi: &FleetRelativeState, tol: f64) -> bool {
    xi.links.iter().all(|l| {
        let sum = l.alpha + l.beta;
        (l.alpha.sin() - sum.sin()).abs() <= tol && (l.alpha.cos() + sum.cos()).abs() <= tol
    })
}

/// Signed arrangement index `p = sum(alpha) / pi`.
pub fn bearing_sum_index(bearings: &[f64]) -> Result<i32> {
    let n = bearings.len();
    if n < 2 {
        return Err(Error::InvalidInput("need at least two bearings".into()));
    }
    let ratio = bearings.iter().sum::<f64>() / PI;
    let p = ratio.round();
    if (ratio - p).abs() > ARRANGEMENT_SLACK {
        return Err(Error::NotAFormation(format!(
            "bearing sum is {ratio:.6} pi, not an integer multiple of pi"
        )));
    }
    let p = p as i32;
    if p == 0 || p.unsigned_abs() as usize > n - 1 {
        return Err(Error::NotAFormation(format!(
            "arrangement index {p} outside [1, {}]",
            n - 1
        )));
    }
    Ok(p)
}

/// Sign of a cotangent sum, with zero decided up to roundoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumSign {
    Positive,
    Zero,
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CotSum {
    pub value: f64,
    pub sign: SumSign,
}

pub fn cot_bearing_sum(bearings: &[f64]) -> Result<CotSum> {
    let mut value = 0.0;
    let mut magnitude = 0.0;
    for (index, &a) in bearings.iter().enumerate() {
        let s = a.sin();
        if s.abs() < 1e-12 {
            return Err(Error::SingularCotangent { index, bearing: a });
        }
        let c = a.cos() / s;
        value += c;
        magnitude += c.abs();
    }
    let sign = if value.abs() <= 1e-12 * magnitude.max(1.0) {
        SumSign::Zero
    } else if value > 0.0 {
        SumSign::Positive
    } else {
        SumSign::Negative
    };
    Ok(CotSum { value, sign })
}

/// Number of distinct cyclic orderings of `n` vehicles on a circle, `(n-1)!`.
pub fn count_arrangements(n: usize) -> Result<u64> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("need n >= 2, got {n}")));
    }
    (1..n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k)).ok_or(Error::Overflow(n))
}

/// Builds the relative state of the circular formation with the given
/// bearings on a circle of radius `|r|`.
pub fn construct_circular_formation(
    bearings: &[f64],
    r: f64,
    speed: f64,
) -> Result<(FleetRelativeState, FormationDescriptor)> {
    let n = bearings.len();
    if n < 2 {
        return Err(Error::InvalidInput("need at least two bearings".into()));
    }
    if !r.is_finite() || r == 0.0 {
        return Err(Error::InvalidInput(format!("radius must be finite and nonzero, got {r}")));
    }
    let bearings = bearings
        .iter()
        .map(|&a| wrap_angle(a))
        .collect::<Result<Vec<_>>>()?;
    for (index, &a) in bearings.iter().enumerate() {
        if a.sin().abs() < 1e-12 {
            return Err(Error::SingularCotangent { index, bearing: a });
        }
    }
    let rotation = Rotation::from_sign(bearings[0]).expect("nonzero sine");
    if bearings
        .iter()
        .any(|&a| Rotation::from_sign(a) != Some(rotation))
    {
        return Err(Error::NotAFormation("bearings have mixed signs".into()));
    }
    let p = bearing_sum_index(&bearings)?;
    let sum: f64 = bearings.iter().sum();
    if (sum - p as f64 * PI).abs() > ANGLE_TOL {
        return Err(Error::NotAFormation(format!(
            "bearing sum {sum} differs from {p} pi by more than {ANGLE_TOL:e}"
        )));
    }
    let radius = r.abs();
    let links = bearings
        .iter()
        .map(|&a| RelativeState::new(2.0 * radius * a.sin().abs(), a, PI - 2.0 * a))
        .collect::<Result<Vec<_>>>()?;
    let ratio_s = rotation.sign() / (2.0 * radius);
    let descriptor = FormationDescriptor {
        radius,
        rotation,
        ratio_s,
        arrangement_p: p.unsigned_abs(),
        bearings,
        angular_speed: 2.0 * speed * ratio_s,
    };
    Ok((FleetRelativeState { links }, descriptor))
}

/// Places `n` vehicles evenly on a circle of radius `r` centred at the origin,
/// vehicle 1 at polar angle 0 and each pursuer followed by its prey in the
/// direction of rotation.
pub fn construct_equally_spaced(
    n: usize,
    r: f64,
    rotation: Rotation,
) -> Result<(Vec<AgentState>, FleetRelativeState)> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("need n >= 2, got {n}")));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {r}")));
    }
    let sign = rotation.sign();
    let step = TAU / n as f64;
    let poses = (0..n)
        .map(|i| {
            let phi = sign * step * i as f64;
            AgentState {
                x: r * phi.cos(),
                y: r * phi.sin(),
                theta: phi + sign * PI / 2.0,
            }
        })
        .collect();
    let link = RelativeState::new(
        2.0 * r * (PI / n as f64).sin(),
        sign * PI / n as f64,
        sign * (PI - step),
    )?;
    let relative = FleetRelativeState {
        links: vec![link; n],
    };
    Ok((poses, relative))
}
