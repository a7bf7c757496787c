use crate::error::{Error, Result};
use crate::geometry::AgentState;

/// Unicycle kinematics: `(v cos theta, v sin theta, omega)`.
pub fn absolute_rhs(q: &AgentState, omega: f64, v: f64) -> [f64; 3] {
    let (s, c) = q.theta.sin_cos();
    [v * c, v * s, omega]
}

/// One classical fourth-order Runge-Kutta step of `x' = f(t, x)`.
pub fn step_rk4<F>(t: f64, state: &[f64], dt: f64, mut rhs: F) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    let axpy = |a: f64, k: &[f64]| -> Vec<f64> {
        state.iter().zip(k).map(|(x, d)| x + a * d).collect()
    };
    let k1 = finite(rhs(t, state)?, t)?;
    let k2 = finite(rhs(t + 0.5 * dt, &axpy(0.5 * dt, &k1))?, t)?;
    let k3 = finite(rhs(t + 0.5 * dt, &axpy(0.5 * dt, &k2))?, t)?;
    let k4 = finite(rhs(t + dt, &axpy(dt, &k3))?, t)?;
    let next: Vec<f64> = state
        .iter()
        .enumerate()
        .map(|(i, x)| x + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    finite(next, t)
}

fn finite(v: Vec<f64>, t: f64) -> Result<Vec<f64>> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::Blowup(t))
    }
}
