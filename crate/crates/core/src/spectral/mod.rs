//! Eigenvalues, the implicit characteristic polynomial, Routh tables and
//! stability verdicts for circular equilibria.

mod charpoly;
mod eig;
mod poly;
mod routh;
mod theorems;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use charpoly::{implicit_charpoly, z_values, CharPoly, REMAINDER_TOL};
pub use eig::{eigvals, eigvals_complex, match_multisets, sort_spectrum, spectral_radius, MAX_SCHUR_SWEEPS};
pub use poly::Poly;
pub use routh::{routh_hurwitz, RouthTable, RouthVerdict};
pub use theorems::{
    circulant_block_eigenvalues, circulant_blocks, circulant_roots, lyapunov_variant,
    n3_coefficients, variant_equilibrium_bearing, CirculantRoots, LyapunovValue, N3Coefficients,
    RootCaseRecord,
};

use crate::control::ControlParams;
use crate::error::{Error, Result};
use crate::geometry::{is_circular_formation, FleetRelativeState, FormationDescriptor};
use crate::linear::{linearize, reduce, trace_reduced};

/// Relative threshold for treating an eigenvalue as lying on the imaginary axis.
pub const AXIS_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    AsymptoticallyStable,
    Unstable,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    TraceN2,
    RouthN3,
    CirculantRoots,
    GenericEigen,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub classification: Classification,
    pub method: Method,
    /// Spectrum backing the verdict, in the units of the linearization.
    pub eigenvalues: Vec<Complex64>,
    pub routh: Option<RouthTable>,
    /// Imaginary-axis modes set aside: `n + 1` zeros and the `+-j w` pair.
    pub discarded_modes: usize,
    /// Trace of the reduced matrix.
    pub trace: f64,
    /// Largest real part among the eigenvalues that were not set aside.
    pub max_real_part: f64,
    /// Multiset distance between the full and reduced spectra when the
    /// cross-check was requested.
    pub cross_check: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportOptions {
    /// Always use the generic eigenvalue route.
    pub force_generic: bool,
    /// Compare the reduced spectrum with that of the full linearization.
    pub cross_check_full: bool,
}

fn descriptor(xi_bar: &FleetRelativeState, params: &ControlParams) -> Result<FormationDescriptor> {
    is_circular_formation(xi_bar, 1e-6, params.v)
        .ok_or_else(|| Error::NotAFormation("equilibrium is not a circular formation".into()))
}

/// Two-vehicle verdict from the sign of the only nontrivial eigenvalue,
/// `2 k s`, with the full spectrum of the linearization as evidence.
pub fn n2_stability(xi_bar: &FleetRelativeState, params: &ControlParams) -> Result<StabilityVerdict> {
    if xi_bar.n() != 2 {
        return Err(Error::InvalidInput(format!("expected two vehicles, got {}", xi_bar.n())));
    }
    let lin = linearize(xi_bar, params)?;
    let d = descriptor(xi_bar, params)?;
    let lambda = 2.0 * params.k * d.ratio_s;
    let classification = if lambda < 0.0 {
        Classification::AsymptoticallyStable
    } else if lambda > 0.0 {
        Classification::Unstable
    } else {
        Classification::Inconclusive
    };
    Ok(StabilityVerdict {
        classification,
        method: Method::TraceN2,
        eigenvalues: eigvals(&lin.assembled)?,
        routh: None,
        discarded_modes: 5,
        trace: trace_reduced(&d.bearings, params, d.ratio_s)?,
        max_real_part: lambda,
        cross_check: None,
    })
}

fn in_lemma_regime(d: &FormationDescriptor, params: &ControlParams) -> bool {
    (params.k.abs() - 2.0 * params.v).abs() <= 1e-12 * params.v && params.k * d.ratio_s < 0.0
}

fn equally_spaced_regular(d: &FormationDescriptor) -> bool {
    let target = PI / d.bearings.len() as f64;
    d.arrangement_p == 1 && d.bearings.iter().all(|a| (a.abs() - target).abs() <= 1e-9)
}

/// Sets aside the zero and `+-j w` modes, then classifies the remainder.
fn classify_rest(
    mut spectrum: Vec<Complex64>,
    omega_bar: f64,
) -> (Classification, f64) {
    let scale = spectral_radius(&spectrum).max(1.0);
    let tol = AXIS_TOL * scale;
    let mut all_found = true;
    for target in [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, omega_bar),
        Complex64::new(0.0, -omega_bar),
    ] {
        match eig::take_nearest(&mut spectrum, target) {
            Some(x) if (x - target).norm() <= tol => {}
            _ => all_found = false,
        }
    }
    let max_re = spectrum.iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re));
    let classification = if max_re > tol {
        Classification::Unstable
    } else if !all_found || spectrum.iter().any(|z| z.re.abs() <= tol) {
        Classification::Inconclusive
    } else {
        Classification::AsymptoticallyStable
    };
    (classification, max_re)
}

pub fn stability_report(xi_bar: &FleetRelativeState, params: &ControlParams) -> Result<StabilityVerdict> {
    stability_report_with(xi_bar, params, ReportOptions::default())
}

/// Stability of a circular equilibrium, choosing the sharpest available
/// method: the two-vehicle trace argument, the Routh test of the reduced
/// cubic for regular triples, the explicit root formula for equally spaced
/// fleets, and otherwise the eigenvalues of the reduced matrix.
pub fn stability_report_with(
    xi_bar: &FleetRelativeState,
    params: &ControlParams,
    options: ReportOptions,
) -> Result<StabilityVerdict> {
    let n = xi_bar.n();
    let red = reduce(xi_bar, params)?;
    let d = descriptor(xi_bar, params)?;
    let cross_check = if options.cross_check_full {
        let full = eigvals(&linearize(xi_bar, params)?.assembled)?;
        let mut reduced = eigvals(&red.assembled)?;
        reduced.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), n));
        match_multisets(&full, &reduced)
    } else {
        None
    };
    let trace = red.assembled.trace();
    let unit = params.v * d.ratio_s.abs();

    if !options.force_generic {
        if n == 2 {
            return Ok(StabilityVerdict {
                cross_check,
                ..n2_stability(xi_bar, params)?
            });
        }
        if n == 3 && d.arrangement_p == 1 && in_lemma_regime(&d, params) {
            let cp = implicit_charpoly(&d.bearings, d.rotation)?;
            let table = routh_hurwitz(&cp.reduced_coeffs)?;
            let classification = match table.verdict {
                RouthVerdict::Hurwitz => Classification::AsymptoticallyStable,
                RouthVerdict::NotHurwitz => Classification::Unstable,
                RouthVerdict::Marginal => Classification::Inconclusive,
            };
            let eigenvalues = eigvals(&red.assembled)?;
            let (_, max_real_part) = classify_rest(eigenvalues.clone(), d.angular_speed);
            return Ok(StabilityVerdict {
                classification,
                method: Method::RouthN3,
                eigenvalues,
                routh: Some(table),
                discarded_modes: n + 3,
                trace,
                max_real_part,
                cross_check,
            });
        }
        if n >= 4 && equally_spaced_regular(&d) && in_lemma_regime(&d, params) {
            let roots = circulant_roots(n)?;
            let eigenvalues: Vec<Complex64> = roots.roots.iter().map(|r| r * unit).collect();
            let (classification, max_real_part) = classify_rest(eigenvalues.clone(), d.angular_speed);
            return Ok(StabilityVerdict {
                classification,
                method: Method::CirculantRoots,
                eigenvalues,
                routh: None,
                discarded_modes: n + 3,
                trace,
                max_real_part,
                cross_check,
            });
        }
    }

    let eigenvalues = eigvals(&red.assembled)?;
    let (classification, max_real_part) = classify_rest(eigenvalues.clone(), d.angular_speed);
    Ok(StabilityVerdict {
        classification,
        method: Method::GenericEigen,
        eigenvalues,
        routh: None,
        discarded_modes: n + 3,
        trace,
        max_real_part,
        cross_check,
    })
}
