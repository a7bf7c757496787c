use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouthVerdict {
    Hurwitz,
    NotHurwitz,
    /// A zero pivot was replaced by a small positive number.
    Marginal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouthTable {
    pub rows: Vec<Vec<f64>>,
    pub verdict: RouthVerdict,
    pub sign_changes: usize,
}

impl RouthTable {
    pub fn first_column(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[0]).collect()
    }
}

/// Routh array of a polynomial given leading coefficient first.
pub fn routh_hurwitz(coeffs: &[f64]) -> Result<RouthTable> {
    let lead = *coeffs
        .first()
        .ok_or_else(|| Error::InvalidInput("empty coefficient list".into()))?;
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::InvalidInput("leading coefficient must be nonzero".into()));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("polynomial coefficients"));
    }
    let c: Vec<f64> = coeffs.iter().map(|x| x * lead.signum()).collect();
    let scale = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let eps = 1e-9 * scale;
    let width = c.len().div_ceil(2);
    let rowfill = |start: usize| -> Vec<f64> {
        let mut r: Vec<f64> = c.iter().skip(start).step_by(2).copied().collect();
        r.resize(width, 0.0);
        r
    };

    let mut rows = vec![rowfill(0)];
    if c.len() > 1 {
        rows.push(rowfill(1));
    }
    let mut marginal = false;
    let zero_tol = 1e-14 * scale;
    if rows.len() == 2 && rows[1][0].abs() <= zero_tol {
        rows[1][0] = eps;
        marginal = true;
    }
    while rows.len() < c.len() {
        let (up, prev) = (&rows[rows.len() - 2], &rows[rows.len() - 1]);
        let pivot = prev[0];
        let mut next = vec![0.0; width];
        for j in 0..width - 1 {
            next[j] = (pivot * up[j + 1] - up[0] * prev[j + 1]) / pivot;
        }
        if next[0].abs() <= zero_tol {
            next[0] = eps;
            marginal = true;
        }
        rows.push(next);
    }

    let col: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let sign_changes = col.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    // Every coefficient of a Hurwitz polynomial shares the leading sign.
    let necessary = c.iter().all(|&x| x > 0.0);
    let verdict = if !necessary {
        RouthVerdict::NotHurwitz
    } else if marginal {
        RouthVerdict::Marginal
    } else if sign_changes == 0 {
        RouthVerdict::Hurwitz
    } else {
        RouthVerdict::NotHurwitz
    };
    Ok(RouthTable {
        rows,
        verdict,
        sign_changes,
    })
}

impl fmt::Display for RouthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let degree = self.rows.len().saturating_sub(1);
        for (i, row) in self.rows.iter().enumerate() {
            write!(f, "l^{:<3}|", degree - i)?;
            for x in row {
                write!(f, " {x:>14.6e}")?;
            }
            writeln!(f)?;
        }
        write!(f, "verdict: {:?} ({} sign changes)", self.verdict, self.sign_changes)
    }
}
