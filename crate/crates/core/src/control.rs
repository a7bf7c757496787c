//! Steering laws and the closed-loop vector field in link coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{FleetRelativeState, RelativeState};

/// Forward speed `v` and gain `k` shared by every vehicle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ControlParams {
    pub v: f64,
    pub k: f64,
}

#[derive(Deserialize)]
struct RawParams {
    v: f64,
    k: f64,
}

impl TryFrom<RawParams> for ControlParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ControlParams::new(raw.v, raw.k)
    }
}

impl ControlParams {
    pub fn new(v: f64, k: f64) -> Result<Self> {
        if !(v.is_finite() && k.is_finite()) {
            return Err(Error::NonFinite("control parameters"));
        }
        if v <= 0.0 {
            return Err(Error::InvalidInput(format!("forward speed must be positive, got {v}")));
        }
        Ok(Self { v, k })
    }

    pub fn with_gain(self, k: f64) -> Self {
        Self { k, ..self }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlLaw {
    /// `omega = (2 v sin a + k (cos a + cos(a + b))) / rho`
    #[default]
    Main,
    /// `omega = v (sin a + sin(a + b)) / rho + k (cos a + cos(a + b))`, two vehicles only.
    Variant,
}

fn check_rho(link: &RelativeState) -> Result<()> {
    if link.rho > 0.0 && link.rho.is_finite() {
        Ok(())
    } else {
        Err(Error::DegenerateGeometry(format!(
            "link distance must be positive, got {}",
            link.rho
        )))
    }
}

pub fn omega_main(link: &RelativeState, params: &ControlParams) -> Result<f64> {
    check_rho(link)?;
    let RelativeState { rho, alpha, beta } = *link;
    let closing = alpha.cos() + (alpha + beta).cos();
    Ok((params.v * 2.0 * alpha.sin() + params.k * closing) / rho)
}

pub fn omega_variant(link: &RelativeState, params: &ControlParams) -> Result<f64> {
    check_rho(link)?;
    let RelativeState { rho, alpha, beta } = *link;
    let sum = alpha + beta;
    Ok(params.v / rho * (alpha.sin() + sum.sin()) + params.k * (alpha.cos() + sum.cos()))
}

pub fn omega(link: &RelativeState, params: &ControlParams, law: ControlLaw) -> Result<f64> {
    match law {
        ControlLaw::Main => omega_main(link, params),
        ControlLaw::Variant => omega_variant(link, params),
    }
}

/// Time derivative of one link.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinkRate {
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Closed-loop vector field.
///
/// For [`ControlLaw::Main`], `beta_i' = omega_i - omega_{i+1}`. The variant
/// law is only defined for two vehicles, where the motion decouples and both
/// heading differences are constant.
pub fn closed_loop_rhs(
    xi: &FleetRelativeState,
    params: &ControlParams,
    law: ControlLaw,
) -> Result<Vec<LinkRate>> {
    let n = xi.n();
    let v = params.v;
    match law {
        ControlLaw::Main => {
            let omegas = xi
                .links
                .iter()
                .map(|l| omega_main(l, params))
                .collect::<Result<Vec<_>>>()?;
            Ok(xi
                .links
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    let sum = l.alpha + l.beta;
                    LinkRate {
                        rho: -v * (l.alpha.cos() + sum.cos()),
                        alpha: v / l.rho * (l.alpha.sin() + sum.sin()) - omegas[i],
                        beta: omegas[i] - omegas[(i + 1) % n],
                    }
                })
                .collect())
        }
        ControlLaw::Variant => {
            if n != 2 {
                return Err(Error::UnsupportedLaw(format!(
                    "the variant law is only analysed for two vehicles, got {n}"
                )));
            }
            xi.links
                .iter()
                .map(|l| {
                    check_rho(l)?;
                    let closing = l.alpha.cos() + (l.alpha + l.beta).cos();
                    Ok(LinkRate {
                        rho: -v * closing,
                        alpha: -params.k * closing,
                        beta: 0.0,
                    })
                })
                .collect()
        }
    }
}

/// [`closed_loop_rhs`] on the flattened `[rho, alpha, beta, ...]` layout.
/// Angles are not wrapped, so this is smooth for finite differencing.
pub fn closed_loop_rhs_flat(
    state: &[f64],
    params: &ControlParams,
    law: ControlLaw,
) -> Result<Vec<f64>> {
    let links = state
        .chunks_exact(3)
        .map(|c| RelativeState {
            rho: c[0],
            alpha: c[1],
            beta: c[2],
        })
        .collect();
    let xi = FleetRelativeState { links };
    Ok(closed_loop_rhs(&xi, params, law)?
        .into_iter()
        .flat_map(|r| [r.rho, r.alpha, r.beta])
        .collect())
}
