use serde::{Deserialize, Serialize};

use super::poly::Poly;
use crate::error::{Error, Result};
use crate::geometry::Rotation;

/// Remainder of the division by `l^3 + 4 l`, relative to the largest
/// coefficient of the full polynomial.
pub const REMAINDER_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharPoly {
    /// Monic, degree `2n`, leading coefficient first.
    pub coeffs: Vec<f64>,
    /// Quotient after dividing out `l^3 + 4 l`, degree `2n - 3`.
    pub reduced_coeffs: Vec<f64>,
    pub z_values: Vec<f64>,
    /// Largest remainder coefficient, before normalization.
    pub remainder: f64,
}

impl CharPoly {
    pub fn poly(&self) -> Poly {
        Poly(self.coeffs.clone())
    }

    pub fn reduced(&self) -> Poly {
        Poly(self.reduced_coeffs.clone())
    }
}

/// `z_i = 1 + sign(s) cot(alpha_i)`.
pub fn z_values(bearings: &[f64], rotation: Rotation) -> Result<Vec<f64>> {
    bearings
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            if !a.is_finite() {
                return Err(Error::NonFinite("bearing"));
            }
            let s = a.sin();
            if s.abs() < 1e-12 || a.abs() >= std::f64::consts::PI {
                return Err(Error::SingularCotangent { index: i, bearing: a });
            }
            Ok(1.0 + rotation.sign() * a.cos() / s)
        })
        .collect()
}

/// Builds `prod(l^2 + 2 z_i l + 2 z_i^2) - prod(2 z_i^2 - 2 l)` and divides
/// out `l^3 + 4 l`, valid at `v = 1` with `k = -2 sign(s)`. Roots of the
/// result are the eigenvalues of the reduced linearization divided by `|s|`.
pub fn implicit_charpoly(bearings: &[f64], rotation: Rotation) -> Result<CharPoly> {
    if bearings.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least two bearings, got {}",
            bearings.len()
        )));
    }
    let z = z_values(bearings, rotation)?;
    let mut left = Poly(vec![1.0]);
    let mut right = Poly(vec![1.0]);
    for &zi in &z {
        left = left.mul(&Poly(vec![1.0, 2.0 * zi, 2.0 * zi * zi]));
        right = right.mul(&Poly(vec![-2.0, 2.0 * zi * zi]));
    }
    let mut full = left.sub(&right);
    // The constant terms are identical products, so P(0) = 0 exactly.
    if let Some(last) = full.0.last_mut() {
        *last = 0.0;
    }
    if full.degree() != 2 * z.len() {
        return Err(Error::PolynomialInconsistency {
            remainder: f64::NAN,
            tolerance: REMAINDER_TOL,
        });
    }
    let (quotient, rem) = full.div_rem(&Poly(vec![1.0, 0.0, 4.0, 0.0]))?;
    let remainder = rem.max_abs_coeff();
    if remainder > REMAINDER_TOL * full.max_abs_coeff() {
        return Err(Error::PolynomialInconsistency {
            remainder,
            tolerance: REMAINDER_TOL * full.max_abs_coeff(),
        });
    }
    Ok(CharPoly {
        coeffs: full.0,
        reduced_coeffs: quotient.0,
        z_values: z,
        remainder,
    })
}
