use serde::{Deserialize, Serialize};

use super::integrator::step_rk4;
use crate::control::ControlParams;
use crate::error::{Error, Result};
use crate::geometry::{wrap, wrap_angle};

/// Decoupled two-vehicle motion under the variant law: `(rho, alpha)` per step,
/// with `beta` frozen at its initial value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantTrajectory {
    pub beta0: f64,
    pub times: Vec<f64>,
    pub rho: Vec<f64>,
    pub alpha: Vec<f64>,
}

pub fn n2_variant_simulate(
    beta0: f64,
    alpha0: f64,
    rho0: f64,
    params: &ControlParams,
    dt: f64,
    t_end: f64,
) -> Result<VariantTrajectory> {
    let beta0 = wrap_angle(beta0)?;
    let alpha0 = wrap_angle(alpha0)?;
    if !(rho0 > 0.0 && rho0.is_finite()) {
        return Err(Error::DegenerateGeometry(format!("rho0 must be positive, got {rho0}")));
    }
    if !(t_end >= dt && dt > 0.0) {
        return Err(Error::InvalidInput(format!("need 0 < dt <= t_end, got dt = {dt}, t_end = {t_end}")));
    }
    let (v, k) = (params.v, params.k);
    let rhs = |_: f64, s: &[f64]| {
        let closing = s[1].cos() + (s[1] + beta0).cos();
        Ok(vec![-v * closing, -k * closing])
    };
    let steps = (t_end / dt).round() as usize;
    let mut out = VariantTrajectory {
        beta0,
        times: vec![0.0],
        rho: vec![rho0],
        alpha: vec![alpha0],
    };
    let mut state = vec![rho0, alpha0];
    for i in 0..steps {
        let t = i as f64 * dt;
        state = step_rk4(t, &state, dt, rhs)?;
        if state[0] <= 0.0 {
            return Err(Error::DegenerateGeometry(format!("rho reached {} at t = {t}", state[0])));
        }
        state[1] = wrap(state[1]);
        out.times.push((i + 1) as f64 * dt);
        out.rho.push(state[0]);
        out.alpha.push(state[1]);
    }
    Ok(out)
}
