use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ABERTH_MAX_ITER: usize = 500;

/// Real polynomial, coefficients from the leading power down to the constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let first = coeffs.iter().position(|&c| c != 0.0).unwrap_or(coeffs.len().saturating_sub(1));
        Poly(coeffs[first..].to_vec())
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let len = self.0.len().max(other.0.len());
        let pad = |p: &Poly| {
            let mut v = vec![0.0; len - p.0.len()];
            v.extend_from_slice(&p.0);
            v
        };
        let (a, b) = (pad(self), pad(other));
        Poly::new(a.iter().zip(&b).map(|(x, y)| x - y).collect())
    }

    /// Long division; returns `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Poly) -> Result<(Poly, Poly)> {
        let lead = divisor.0[0];
        if lead == 0.0 {
            return Err(Error::InvalidInput("division by the zero polynomial".into()));
        }
        let dd = divisor.degree();
        if self.degree() < dd {
            return Ok((Poly(vec![0.0]), self.clone()));
        }
        let mut work = self.0.clone();
        let qlen = work.len() - dd;
        let mut q = vec![0.0; qlen];
        for i in 0..qlen {
            let f = work[i] / lead;
            q[i] = f;
            for (j, d) in divisor.0.iter().enumerate() {
                work[i + j] -= f * d;
            }
        }
        let rem = if dd == 0 { vec![0.0] } else { work[qlen..].to_vec() };
        Ok((Poly(q), Poly(rem)))
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.0.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    fn eval_with_derivative(&self, x: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        self.0.iter().fold((zero, zero), |(p, dp), &c| (p * x + c, dp * x + p))
    }

    /// Frobenius companion matrix of the monic normalization.
    pub fn companion(&self) -> DMatrix<f64> {
        let d = self.degree();
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            m[(0, j)] = -self.0[j + 1] / self.0[0];
        }
        for i in 1..d {
            m[(i, i - 1)] = 1.0;
        }
        m
    }

    /// All complex roots by simultaneous Aberth-Ehrlich iteration.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let d = self.degree();
        if self.0[0] == 0.0 {
            return Err(Error::InvalidInput("leading coefficient is zero".into()));
        }
        if d == 0 {
            return Ok(Vec::new());
        }
        let monic = Poly(self.0.iter().map(|c| c / self.0[0]).collect());
        // Cauchy bound on the root moduli.
        let bound = 1.0 + monic.0[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let mut z: Vec<Complex64> = (0..d)
            .map(|k| Complex64::from_polar(0.5 * bound, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / d as f64))
            .collect();
        // A root is frozen once its correction drops to roundoff level.
        let mut done = vec![false; d];
        for _ in 0..ABERTH_MAX_ITER {
            for k in 0..d {
                if done[k] {
                    continue;
                }
                let (p, dp) = monic.eval_with_derivative(z[k]);
                if p.norm() == 0.0 {
                    done[k] = true;
                    continue;
                }
                let ratio = p / dp;
                let repulsion: Complex64 = (0..d)
                    .filter(|&j| j != k)
                    .map(|j| 1.0 / (z[k] - z[j]))
                    .sum();
                let step = ratio / (1.0 - ratio * repulsion);
                if !(step.re.is_finite() && step.im.is_finite()) {
                    continue;
                }
                z[k] -= step;
                done[k] = step.norm() <= 1e-14 * (1.0 + z[k].norm());
            }
            if done.iter().all(|&x| x) {
                let mut out = z;
                super::eig::sort_spectrum(&mut out);
                return Ok(out);
            }
        }
        Err(Error::EigenNonConvergence(ABERTH_MAX_ITER))
    }
}
