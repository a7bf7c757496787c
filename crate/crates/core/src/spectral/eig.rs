use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Sweep cap handed to the Schur iteration.
pub const MAX_SCHUR_SWEEPS: usize = 10_000;

fn check_square<T>(m: &DMatrix<T>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidInput(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Orders a spectrum by real part, then modulus of the imaginary part, with
/// the positive member of each conjugate pair first.
pub fn sort_spectrum(values: &mut [Complex64]) {
    values.sort_by(|a, b| {
        a.re.total_cmp(&b.re)
            .then(a.im.abs().total_cmp(&b.im.abs()))
            .then(b.im.total_cmp(&a.im))
    });
}

/// Eigenvalues of a real square matrix from its real Schur form.
pub fn eigvals(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    check_square(m)?;
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("matrix entries"));
    }
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, MAX_SCHUR_SWEEPS)
        .ok_or(Error::EigenNonConvergence(MAX_SCHUR_SWEEPS))?;
    let mut out: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    sort_spectrum(&mut out);
    Ok(out)
}

/// Eigenvalues of a complex square matrix from its complex Schur form.
pub fn eigvals_complex(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    check_square(m)?;
    if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite("matrix entries"));
    }
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, MAX_SCHUR_SWEEPS)
        .ok_or(Error::EigenNonConvergence(MAX_SCHUR_SWEEPS))?;
    let mut out: Vec<Complex64> = schur
        .eigenvalues()
        .ok_or(Error::EigenNonConvergence(MAX_SCHUR_SWEEPS))?
        .iter()
        .copied()
        .collect();
    sort_spectrum(&mut out);
    Ok(out)
}

/// Largest distance between paired elements when two multisets are matched
/// greedily, closest pair first. `None` when the sizes differ.
pub fn match_multisets(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    let mut matched = 0;
    for (d, i, j) in pairs {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        worst = worst.max(d);
        matched += 1;
        if matched == a.len() {
            break;
        }
    }
    Some(worst)
}

/// Removes and returns the element of `values` closest to `target`.
pub(crate) fn take_nearest(values: &mut Vec<Complex64>, target: Complex64) -> Option<Complex64> {
    let idx = values
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - target).norm().total_cmp(&(b.1 - target).norm()))?
        .0;
    Some(values.swap_remove(idx))
}

pub fn spectral_radius(values: &[Complex64]) -> f64 {
    values.iter().fold(0.0, |m, z| m.max(z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_and_rotation() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let got = eigvals(&d).unwrap();
        assert!(match_multisets(&got, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap() < 1e-14);
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let got = eigvals(&rot).unwrap();
        assert!((got[0] - c(0.0, 1.0)).norm() < 1e-14);
        assert!((got[1] - c(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn complex_upper_triangular() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 1.0), c(5.0, 0.0), c(0.0, 0.0), c(-2.0, 0.5)]);
        let got = eigvals_complex(&m).unwrap();
        assert!(match_multisets(&got, &[c(1.0, 1.0), c(-2.0, 0.5)]).unwrap() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(eigvals(&DMatrix::zeros(2, 3)).is_err());
        assert!(eigvals(&DMatrix::from_element(2, 2, f64::NAN)).is_err());
        assert!(eigvals(&DMatrix::zeros(0, 0)).unwrap().is_empty());
    }

    #[test]
    fn greedy_matching_prefers_closest_pairs() {
        let a = [c(0.0, 0.0), c(1.0, 0.0)];
        let b = [c(1.0, 1e-9), c(1e-9, 0.0)];
        assert!(match_multisets(&a, &b).unwrap() < 2e-9);
        assert!(match_multisets(&a, &b[..1]).is_none());
    }
}
