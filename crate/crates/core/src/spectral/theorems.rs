//! Closed-form results for two, three and equally spaced vehicles, and the
//! Lyapunov certificate of the variant law.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::eig::eigvals_complex;
use crate::error::{Error, Result};
use crate::geometry::wrap;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct N3Coefficients {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
    /// `a2 a1 - a0`.
    pub gap: f64,
    /// `a0` from the alternative expression `b1 / 4`.
    pub a0_alt: f64,
}

/// Coefficients of the reduced cubic for three vehicles.
///
/// Both expressions for `a0` coincide only when
/// `z1 z2 + z2 z3 + z1 z3 = 2 (z1 + z2 + z3) - 2`, i.e. when the bearing
/// magnitudes sum to `pi`.
pub fn n3_coefficients(z1: f64, z2: f64, z3: f64) -> Result<N3Coefficients> {
    let sum = z1 + z2 + z3;
    let pair = z1 * z2 + z2 * z3 + z1 * z3;
    let prod = z1 * z2 * z3;
    let b5 = 2.0 * sum;
    let b4 = 2.0 * sum * sum;
    let b3 = 4.0 * (z1 * z1 * (z2 + z3) + z2 * z2 * (z1 + z3) + z3 * z3 * (z1 + z2))
        + 8.0 * (prod + 1.0);
    let b1 = 8.0 * prod * pair
        + 8.0 * (z1 * z1 * z2 * z2 + z2 * z2 * z3 * z3 + z1 * z1 * z3 * z3);
    let (a2, a1, a0, a0_alt) = (b5, b4 - 4.0, b3 - 4.0 * b5, b1 / 4.0);
    if !(a0.is_finite() && a0_alt.is_finite()) {
        return Err(Error::NonFinite("cubic coefficients"));
    }
    if (a0 - a0_alt).abs() > 1e-8 * a0.abs().max(a0_alt.abs()).max(1.0) {
        return Err(Error::OutsideHypotheses(format!(
            "the two expressions for a0 disagree: {a0} vs {a0_alt}"
        )));
    }
    Ok(N3Coefficients {
        a2,
        a1,
        a0,
        gap: a2 * a1 - a0,
        a0_alt,
    })
}

/// Per-index quantities of the equally spaced root formula.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootCaseRecord {
    /// One-based block index.
    pub index: usize,
    pub phi: f64,
    pub omega_root: Complex64,
    pub a1: f64,
    pub b1: f64,
    pub phi_big: Complex64,
    pub a2: f64,
    pub b2: f64,
    pub delta: f64,
    /// Set when the principal square root sits on the imaginary axis, where
    /// the branch choice is numerically ambiguous.
    pub branch_ambiguous: bool,
    pub roots: [Complex64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CirculantRoots {
    pub n: usize,
    pub z: f64,
    pub roots: Vec<Complex64>,
    pub cases: Vec<RootCaseRecord>,
}

/// Roots of `(l^2 + 2 z l + 2 z^2)^n - (2 z^2 - 2 l)^n` with
/// `z = 1 + cot(pi/n)`, two per root of unity.
pub fn circulant_roots(n: usize) -> Result<CirculantRoots> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("need n >= 3, got {n}")));
    }
    let z = 1.0 + 1.0 / (PI / n as f64).tan();
    let mut roots = Vec::with_capacity(2 * n);
    let mut cases = Vec::with_capacity(n);
    for i in 1..=n {
        let phi = 2.0 * (i - 1) as f64 * PI / n as f64;
        let w = Complex64::from_polar(1.0, phi);
        let shift = -(z + w);
        let big = (z + w) * (z + w) - 2.0 * z * z * (1.0 - w);
        let root = big.sqrt();
        let re_big = -z * z + 2.0 * phi.cos() * (z * z + z) + (2.0 * phi).cos();
        let im_big = 2.0 * phi.sin() * (z * z + z) + (2.0 * phi).sin();
        let lead = 2.0 * (z + phi.cos()).powi(2) - re_big;
        let delta = lead * lead - re_big * re_big - im_big * im_big;
        let pair = [shift + root, shift - root];
        roots.extend(pair);
        cases.push(RootCaseRecord {
            index: i,
            phi,
            omega_root: w,
            a1: shift.re,
            b1: shift.im,
            phi_big: big,
            a2: root.re,
            b2: root.im,
            delta,
            branch_ambiguous: root.re.abs() <= 1e-12 * (1.0 + big.norm()),
            roots: pair,
        });
    }
    Ok(CirculantRoots { n, z, roots, cases })
}

/// The blocks `D_i = A + w^(i-1) B` of the equally spaced reduced system at
/// `v = 1`, `k = -2`, counterclockwise, divided by `s`.
pub fn circulant_blocks(n: usize) -> Result<Vec<DMatrix<Complex64>>> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("need n >= 3, got {n}")));
    }
    let (v, k) = (1.0, -2.0);
    let cot = 1.0 / (PI / n as f64).tan();
    let c = |x: f64| Complex64::new(x, 0.0);
    Ok((1..=n)
        .map(|i| {
            let w = Complex64::from_polar(1.0, 2.0 * (i - 1) as f64 * PI / n as f64);
            DMatrix::from_row_slice(
                2,
                2,
                &[
                    c(0.0),
                    c(v * cot * cot - k * cot + v),
                    c(-2.0 * v) + w * 2.0 * v,
                    c(k - 2.0 * v * cot) + w * k,
                ],
            )
        })
        .collect())
}

/// Eigenvalues of all blocks from [`circulant_blocks`].
pub fn circulant_block_eigenvalues(n: usize) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(2 * n);
    for d in circulant_blocks(n)? {
        out.extend(eigvals_complex(&d)?);
    }
    Ok(out)
}

fn check_beta0(beta0: f64) -> Result<f64> {
    if !beta0.is_finite() {
        return Err(Error::NonFinite("initial heading difference"));
    }
    let b = wrap(beta0);
    if (b + PI).abs() < 1e-12 {
        return Err(Error::IdenticalHeadings);
    }
    Ok(b)
}

/// Equilibrium bearing of the two-vehicle variant law for a given initial
/// heading difference.
pub fn variant_equilibrium_bearing(beta0: f64, k: f64) -> Result<f64> {
    let b = check_beta0(beta0)?;
    if k == 0.0 || !k.is_finite() {
        return Err(Error::InvalidInput(format!("gain must be nonzero, got {k}")));
    }
    Ok(if k < 0.0 { (PI - b) / 2.0 } else { (-PI - b) / 2.0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovValue {
    pub v: f64,
    pub vdot: f64,
}

/// `V = C^2/2 + (S - 2 sin a)^2/2` and its derivative along the variant
/// flow, where `C` and `S` are the cosine and sine sums of the link.
pub fn lyapunov_variant(alpha: f64, beta0: f64, k: f64) -> Result<LyapunovValue> {
    let abar = variant_equilibrium_bearing(beta0, k)?;
    let b = wrap(beta0);
    let c = alpha.cos() + (alpha + b).cos();
    let s = alpha.sin() + (alpha + b).sin();
    Ok(LyapunovValue {
        v: 0.5 * c * c + 0.5 * (s - 2.0 * abar.sin()).powi(2),
        vdot: 2.0 * k * abar.sin() * c * c,
    })
}
