//! Linearization of the closed loop about an equilibrium and the similarity
//! reduction of a circular equilibrium to its `2n x 2n` core.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3};
use serde::Serialize;

use crate::control::{closed_loop_rhs_flat, ControlLaw, ControlParams};
use crate::error::{Error, Result};
use crate::geometry::{cot_bearing_sum, is_circular_formation, wrap, FleetRelativeState};
use crate::matrix_io;

/// Largest closed-loop residual accepted as an equilibrium.
pub const EQUILIBRIUM_TOL: f64 = 1e-8;

/// Tolerance used to recognise a circular equilibrium before reducing it.
const CIRCULAR_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct LinearizedSystem {
    pub n: usize,
    /// Diagonal blocks `A_i`.
    #[serde(with = "matrix_io::rows_vec")]
    pub a_blocks: Vec<Matrix3<f64>>,
    /// `b_blocks[i]` sits at block position `(i, i + 1 mod n)` and is built
    /// from link `i + 1`.
    #[serde(with = "matrix_io::rows_vec")]
    pub b_blocks: Vec<Matrix3<f64>>,
    #[serde(with = "matrix_io::rows")]
    pub assembled: DMatrix<f64>,
    pub sbar_values: Vec<f64>,
    pub cbar_values: Vec<f64>,
}

/// Largest absolute component of the main-law closed loop at `xi`.
pub fn equilibrium_residual(xi: &FleetRelativeState, params: &ControlParams) -> Result<f64> {
    Ok(closed_loop_rhs_flat(&xi.to_vec(), params, ControlLaw::Main)?
        .into_iter()
        .fold(0.0, |m, x| m.max(x.abs())))
}

/// Jacobian of the main-law closed loop at an equilibrium, from the
/// closed-form block entries.
pub fn linearize(xi_bar: &FleetRelativeState, params: &ControlParams) -> Result<LinearizedSystem> {
    let residual = equilibrium_residual(xi_bar, params)?;
    if residual > EQUILIBRIUM_TOL {
        return Err(Error::NotEquilibrium {
            residual,
            tolerance: EQUILIBRIUM_TOL,
        });
    }
    let (v, k) = (params.v, params.k);
    let n = xi_bar.n();
    let sbar: Vec<f64> = xi_bar.links.iter().map(|l| l.alpha.sin() / l.rho).collect();
    let cbar: Vec<f64> = xi_bar.links.iter().map(|l| l.alpha.cos() / l.rho).collect();

    let a_blocks: Vec<Matrix3<f64>> = (0..n)
        .map(|i| {
            let (s, c, rho) = (sbar[i], cbar[i], xi_bar.links[i].rho);
            Matrix3::new(
                0.0, 2.0 * v * s * rho, v * s * rho,
                0.0, 2.0 * k * s - 2.0 * v * c, k * s - v * c,
                -2.0 * v * s / rho, 2.0 * v * c - 2.0 * k * s, -k * s,
            )
        })
        .collect();
    let b_blocks: Vec<Matrix3<f64>> = (0..n)
        .map(|i| {
            let j = (i + 1) % n;
            let (s, c, rho) = (sbar[j], cbar[j], xi_bar.links[j].rho);
            Matrix3::new(
                0.0, 0.0, 0.0,
                0.0, 0.0, 0.0,
                2.0 * v * s / rho, 2.0 * k * s - 2.0 * v * c, k * s,
            )
        })
        .collect();

    let mut assembled = DMatrix::zeros(3 * n, 3 * n);
    for i in 0..n {
        let j = (i + 1) % n;
        assembled.fixed_view_mut::<3, 3>(3 * i, 3 * i).copy_from(&a_blocks[i]);
        let mut target = assembled.fixed_view_mut::<3, 3>(3 * i, 3 * j);
        target += b_blocks[i];
    }
    Ok(LinearizedSystem {
        n,
        a_blocks,
        b_blocks,
        assembled,
        sbar_values: sbar,
        cbar_values: cbar,
    })
}

fn require_circular(xi_bar: &FleetRelativeState, params: &ControlParams) -> Result<f64> {
    let d = is_circular_formation(xi_bar, CIRCULAR_TOL, params.v).ok_or_else(|| {
        Error::NotAFormation("equilibrium is not a circular formation".into())
    })?;
    Ok(d.ratio_s)
}

/// The `n + 1` analytically known kernel vectors of the linearization at a
/// circular equilibrium: the orbit-scaling vector followed by one drift
/// vector per vehicle.
pub fn kernel_basis_circular(
    xi_bar: &FleetRelativeState,
    params: &ControlParams,
) -> Result<Vec<DVector<f64>>> {
    linearize(xi_bar, params)?;
    require_circular(xi_bar, params)?;
    let n = xi_bar.n();
    let mut out = Vec::with_capacity(n + 1);
    let mut scaling = DVector::zeros(3 * n);
    for (i, l) in xi_bar.links.iter().enumerate() {
        scaling[3 * i] = l.rho;
    }
    out.push(scaling);
    for (i, l) in xi_bar.links.iter().enumerate() {
        let mut drift = DVector::zeros(3 * n);
        drift[3 * i] = l.rho * l.alpha.cos() / l.alpha.sin();
        drift[3 * i + 1] = 1.0;
        drift[3 * i + 2] = -2.0;
        out.push(drift);
    }
    Ok(out)
}

/// Kernel direction of the linearization at a collinear equilibrium whose
/// perturbation leaves the collinear set.
pub fn kernel_vector_collinear(
    xi_bar: &FleetRelativeState,
    params: &ControlParams,
) -> Result<DVector<f64>> {
    linearize(xi_bar, params)?;
    let scale = xi_bar.max_rho();
    let mut along = 0.0;
    for (i, l) in xi_bar.links.iter().enumerate() {
        let on_line = l.alpha.sin().abs() <= CIRCULAR_TOL;
        let same_heading = wrap(l.beta + PI).abs() <= CIRCULAR_TOL;
        if !(on_line && same_heading) {
            return Err(Error::NotCollinear(format!(
                "link {} has alpha = {}, beta = {}",
                i + 1,
                l.alpha,
                l.beta
            )));
        }
        along += l.rho * l.alpha.cos();
    }
    if along.abs() > 1e-8 * scale {
        return Err(Error::NotCollinear(format!(
            "projections do not close: sum rho cos alpha = {along}"
        )));
    }
    let n = xi_bar.n();
    let mut w = DVector::zeros(3 * n);
    for (i, l) in xi_bar.links.iter().enumerate() {
        let c = l.alpha.cos() / l.rho;
        w[3 * i + 1] = 1.0 / c;
        w[3 * i + 2] = -2.0 / c;
    }
    Ok(w)
}

#[derive(Clone, Debug, Serialize)]
pub struct ReducedSystem {
    pub n: usize,
    #[serde(with = "matrix_io::rows_vec")]
    pub abar_blocks: Vec<Matrix2<f64>>,
    #[serde(with = "matrix_io::rows")]
    pub bbar: Matrix2<f64>,
    /// Closed-form `2n x 2n` core.
    #[serde(with = "matrix_io::rows")]
    pub assembled: DMatrix<f64>,
    /// The same core extracted from the transformed and permuted linearization.
    #[serde(with = "matrix_io::rows")]
    pub from_transform: DMatrix<f64>,
    pub sbar: f64,
    #[serde(with = "matrix_io::rows")]
    pub u: DMatrix<f64>,
    #[serde(with = "matrix_io::rows")]
    pub v: DMatrix<f64>,
    /// Largest entry of the trailing `n` columns after transformation; zero
    /// up to roundoff when the transformed matrix is block lower-triangular
    /// with a null trailing block.
    pub null_columns_norm: f64,
    /// Largest entrywise difference between the two constructions.
    pub discrepancy: f64,
}

/// Reduces the linearization at a circular equilibrium.
///
/// Each link's distance is scaled by `1/rho_i` and `beta_i` is replaced by
/// `eta_i = 2 alpha_i + beta_i`; a second transform then clears the columns
/// of the bearing coordinates. Reordering the coordinates as
/// `(rho_1, eta_1, ..., rho_n, eta_n, alpha_1, ..., alpha_n)` leaves the
/// core in the leading `2n x 2n` block.
pub fn reduce(xi_bar: &FleetRelativeState, params: &ControlParams) -> Result<ReducedSystem> {
    let lin = linearize(xi_bar, params)?;
    let sbar = require_circular(xi_bar, params)?;
    let (v, k) = (params.v, params.k);
    let n = xi_bar.n();
    let cots: Vec<f64> = xi_bar
        .links
        .iter()
        .map(|l| l.alpha.cos() / l.alpha.sin())
        .collect();

    let abar_blocks: Vec<Matrix2<f64>> = cots
        .iter()
        .map(|&c| sbar * Matrix2::new(0.0, v * c * c - k * c + v, -2.0 * v, k - 2.0 * v * c))
        .collect();
    let bbar = sbar * Matrix2::new(0.0, 0.0, 2.0 * v, k);
    let mut assembled = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        let j = (i + 1) % n;
        assembled.fixed_view_mut::<2, 2>(2 * i, 2 * i).copy_from(&abar_blocks[i]);
        let mut target = assembled.fixed_view_mut::<2, 2>(2 * i, 2 * j);
        target += bbar;
    }

    let mut u = DMatrix::zeros(3 * n, 3 * n);
    let mut u_inv = DMatrix::zeros(3 * n, 3 * n);
    let mut vt = DMatrix::zeros(3 * n, 3 * n);
    let mut vt_inv = DMatrix::zeros(3 * n, 3 * n);
    for (i, l) in xi_bar.links.iter().enumerate() {
        let o = 3 * i;
        u.fixed_view_mut::<3, 3>(o, o).copy_from(&Matrix3::new(
            1.0 / l.rho, 0.0, 0.0,
            0.0, 1.0, 0.0,
            0.0, 2.0, 1.0,
        ));
        u_inv.fixed_view_mut::<3, 3>(o, o).copy_from(&Matrix3::new(
            l.rho, 0.0, 0.0,
            0.0, 1.0, 0.0,
            0.0, -2.0, 1.0,
        ));
        vt.fixed_view_mut::<3, 3>(o, o).copy_from(&Matrix3::new(
            1.0, -cots[i], 0.0,
            0.0, 1.0, 0.0,
            0.0, 0.0, 1.0,
        ));
        vt_inv.fixed_view_mut::<3, 3>(o, o).copy_from(&Matrix3::new(
            1.0, cots[i], 0.0,
            0.0, 1.0, 0.0,
            0.0, 0.0, 1.0,
        ));
    }
    let transformed = &vt * (&u * &lin.assembled * &u_inv) * &vt_inv;
    let order: Vec<usize> = (0..n)
        .flat_map(|i| [3 * i, 3 * i + 2])
        .chain((0..n).map(|i| 3 * i + 1))
        .collect();
    let permuted = DMatrix::from_fn(3 * n, 3 * n, |r, c| transformed[(order[r], order[c])]);
    let from_transform = permuted.view((0, 0), (2 * n, 2 * n)).into_owned();
    let null_columns_norm = permuted.columns(2 * n, n).amax();

    let discrepancy = (&assembled - &from_transform).amax();
    let scale = assembled.amax().max(1.0);
    if discrepancy > 1e-10 * scale {
        return Err(Error::ReductionMismatch(discrepancy));
    }
    Ok(ReducedSystem {
        n,
        abar_blocks,
        bbar,
        assembled,
        from_transform,
        sbar,
        u,
        v: vt,
        null_columns_norm,
        discrepancy,
    })
}

/// `tr(A_R) = n k s - 2 v s sum(cot alpha_i)`.
pub fn trace_reduced(bearings: &[f64], params: &ControlParams, sbar: f64) -> Result<f64> {
    let cot = cot_bearing_sum(bearings)?;
    Ok(bearings.len() as f64 * params.k * sbar - 2.0 * params.v * sbar * cot.value)
}
