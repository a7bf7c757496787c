//! Worked examples for each module, exercised through the public API.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI, SQRT_2};

use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use cyclic_pursuit::control::{closed_loop_rhs, omega_main, omega_variant, ControlLaw, ControlParams};
use cyclic_pursuit::geometry::*;
use cyclic_pursuit::harness::{bundled_scenario, run_scenario, run_sweep, SweepParameter, SweepSpec};
use cyclic_pursuit::linear::{kernel_basis_circular, kernel_vector_collinear, linearize, reduce, trace_reduced};
use cyclic_pursuit::sim::{absolute_rhs, detect_convergence, n2_variant_simulate, simulate, step_rk4};
use cyclic_pursuit::spectral::*;
use cyclic_pursuit::Error;

fn params(v: f64, k: f64) -> ControlParams {
    ControlParams::new(v, k).unwrap()
}

fn link(rho: f64, alpha: f64, beta: f64) -> RelativeState {
    RelativeState::new(rho, alpha, beta).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

mod formation_geometry {
    use super::*;

    #[test]
    fn wrapping() {
        assert_eq!(wrap_angle(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(wrap_angle(-2.0 * PI).unwrap(), 0.0, epsilon = 1e-15);
        assert_eq!(wrap_angle(PI).unwrap(), -PI);
        assert!(wrap_angle(f64::NAN).is_err());
    }

    #[test]
    fn relative_coordinates() {
        let pair = [AgentState::new(0.0, 0.0, 0.0).unwrap(), AgentState::new(1.0, 0.0, PI).unwrap()];
        let xi = to_relative(&pair).unwrap();
        assert_abs_diff_eq!(xi.links[0].rho, 1.0);
        assert_abs_diff_eq!(xi.links[0].alpha, 0.0);
        assert_abs_diff_eq!(xi.links[0].beta, 0.0, epsilon = 1e-15);

        let (_, square) = construct_equally_spaced(4, 2.0, Rotation::CounterClockwise).unwrap();
        for l in &square.links {
            assert_abs_diff_eq!(l.rho, 2.0 * SQRT_2, epsilon = 1e-12);
            assert_abs_diff_eq!(l.alpha, FRAC_PI_4, epsilon = 1e-12);
            assert_abs_diff_eq!(l.beta, FRAC_PI_2, epsilon = 1e-12);
        }

        let fleet = [(1.0, 2.0, 0.3), (-4.0, 0.5, 2.0), (3.0, -3.0, -1.0), (0.2, 4.0, 3.0), (-2.0, -2.0, -2.5)]
            .map(|(x, y, t)| AgentState::new(x, y, t).unwrap());
        let xi = to_relative(&fleet).unwrap();
        let r = constraint_residuals(&xi);
        // Independent oracle: the link vectors of a closed polygon sum to zero.
        let (mut gx, mut gy) = (0.0, 0.0);
        for i in 0..5 {
            let j = (i + 1) % 5;
            gx += fleet[j].x - fleet[i].x;
            gy += fleet[j].y - fleet[i].y;
        }
        assert!(gx.abs() < 1e-12 && gy.abs() < 1e-12);
        let scale = xi.max_rho();
        assert!(r.g1.abs() <= 1e-10 * scale && r.g2.abs() <= 1e-10 * scale && r.g3.abs() < 1e-12);
    }

    #[test]
    fn constraints() {
        let (xi, _) = construct_circular_formation(&[0.4, 1.0, PI - 1.4], 3.0, 1.0).unwrap();
        let r = constraint_residuals(&xi);
        assert!(r.g1.abs() < 1e-12 && r.g2.abs() < 1e-12 && r.g3.abs() < 1e-12);
        // Rebuild absolute poses and derive the links again.
        let again = to_relative(&to_absolute(&xi, AgentState::new(1.0, -2.0, 0.7).unwrap())).unwrap();
        for (a, b) in again.links.iter().zip(&xi.links) {
            assert_abs_diff_eq!(a.rho, b.rho, epsilon = 1e-12);
            assert_abs_diff_eq!(a.alpha, b.alpha, epsilon = 1e-12);
        }
        let mut bumped = xi.clone();
        bumped.links[1].rho += 0.1;
        let r = constraint_residuals(&bumped);
        assert!(r.g1.abs() > 1e-3 || r.g2.abs() > 1e-3);
    }

    #[test]
    fn formation_detection() {
        let pair = FleetRelativeState::new(vec![link(2.0, FRAC_PI_2, 0.0); 2]).unwrap();
        let d = is_circular_formation(&pair, 1e-9, 1.5).unwrap();
        assert_abs_diff_eq!(d.radius, 1.0, epsilon = 1e-12);
        assert_eq!(d.rotation, Rotation::CounterClockwise);
        assert_eq!(d.arrangement_p, 1);
        assert_abs_diff_eq!(d.angular_speed, 2.0 * 1.5 * 0.5, epsilon = 1e-12);

        let (_, square) = construct_equally_spaced(4, 2.5, Rotation::CounterClockwise).unwrap();
        let d = is_circular_formation(&square, 1e-9, 1.0).unwrap();
        assert_abs_diff_eq!(d.radius, 2.5, epsilon = 1e-12);
        assert_eq!(d.arrangement_p, 1);

        let collinear = FleetRelativeState::new(vec![link(1.0, 0.0, -PI), link(1.0, PI - 1e-16, -PI)]).unwrap();
        assert!(is_circular_formation(&collinear, 1e-6, 1.0).is_none());
    }

    #[test]
    fn equivalent_condition() {
        let one = |a, b| FleetRelativeState::new(vec![link(1.0, a, b); 2]).unwrap();
        assert!(equivalent_condition_check(&one(FRAC_PI_2, 0.0), 1e-12));
        assert!(equivalent_condition_check(&one(0.0, -PI), 1e-12));
        assert!(!equivalent_condition_check(&one(FRAC_PI_4, 0.0), 1e-6));
    }

    #[test]
    fn indices_and_cotangents() {
        assert_eq!(bearing_sum_index(&[PI / 5.0; 5]).unwrap(), 1);
        let base = [0.5, 1.1, PI - 1.6];
        let reversed: Vec<f64> = base.iter().map(|a| PI - a).collect();
        assert_eq!(bearing_sum_index(&reversed).unwrap(), 2);
        assert_eq!(bearing_sum_index(&[-0.3, -(PI - 0.3)]).unwrap(), -1);

        assert_abs_diff_eq!(cot_bearing_sum(&[FRAC_PI_3; 3]).unwrap().value, 3f64.sqrt(), epsilon = 1e-12);
        assert_eq!(cot_bearing_sum(&[0.7, PI - 0.7]).unwrap().sign, SumSign::Zero);
        let p2 = cot_bearing_sum(&[2.0 * FRAC_PI_3; 3]).unwrap();
        assert_abs_diff_eq!(p2.value, -(3f64.sqrt()), epsilon = 1e-12);
        assert_eq!(p2.sign, SumSign::Negative);

        assert_eq!(count_arrangements(2).unwrap(), 1);
        assert_eq!(count_arrangements(3).unwrap(), 2);
        assert_eq!(count_arrangements(5).unwrap(), 24);
    }

    #[test]
    fn construction() {
        let (xi, d) = construct_circular_formation(&[FRAC_PI_4; 4], 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(xi.links[0].rho, 2.0 * SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(xi.links[0].beta, FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(d.angular_speed, 0.5, epsilon = 1e-12);

        let (xi, _) = construct_circular_formation(&[PI / 6.0, FRAC_PI_3, FRAC_PI_2], 1.0, 1.0).unwrap();
        let rho: Vec<f64> = xi.links.iter().map(|l| l.rho).collect();
        let beta: Vec<f64> = xi.links.iter().map(|l| l.beta).collect();
        for (g, w) in rho.iter().zip([1.0, 3f64.sqrt(), 2.0]) {
            assert_abs_diff_eq!(*g, w, epsilon = 1e-12);
        }
        for (g, w) in beta.iter().zip([2.0 * FRAC_PI_3, FRAC_PI_3, 0.0]) {
            assert_abs_diff_eq!(*g, w, epsilon = 1e-12);
        }
        assert!(is_circular_formation(&xi, 1e-12, 1.0).is_some());

        let (xi, _) = construct_circular_formation(&[FRAC_PI_2; 2], 1.0, 1.0).unwrap();
        assert_eq!(xi.links[0], link(2.0, FRAC_PI_2, 0.0));

        let (_, tri) = construct_equally_spaced(3, 1.0, Rotation::Clockwise).unwrap();
        assert_abs_diff_eq!(tri.links[0].alpha, -FRAC_PI_3, epsilon = 1e-12);
        assert_abs_diff_eq!(tri.links[0].rho, 3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(tri.links[0].beta, -FRAC_PI_3, epsilon = 1e-12);
        let (_, pair) = construct_equally_spaced(2, 1.0, Rotation::CounterClockwise).unwrap();
        assert_abs_diff_eq!(pair.links[0].rho, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pair.links[0].beta, 0.0, epsilon = 1e-12);
    }
}

mod control_laws {
    use super::*;

    #[test]
    fn steering() {
        for k in [-3.0, 0.0, 5.0] {
            assert_abs_diff_eq!(omega_main(&link(4.0, FRAC_PI_2, 0.0), &params(1.3, k)).unwrap(), 1.3 / 2.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(omega_main(&link(3.0, 0.0, -PI), &params(1.0, 2.0)).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(omega_main(&link(2.0, FRAC_PI_2, 0.0), &params(1.0, 5.0)).unwrap(), 1.0, epsilon = 1e-15);

        assert_abs_diff_eq!(omega_variant(&link(4.0, FRAC_PI_2, 0.0), &params(2.0, 1.0)).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(omega_variant(&link(3.0, 0.0, -PI), &params(1.0, 2.0)).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(omega_variant(&link(1.0, FRAC_PI_4, 0.0), &params(1.0, -2.0)).unwrap(), -SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn vector_field() {
        let (xi, _) = construct_circular_formation(&[0.5, 1.3, 0.9, PI - 2.7], 2.0, 1.0).unwrap();
        for r in closed_loop_rhs(&xi, &params(1.0, -3.0), ControlLaw::Main).unwrap() {
            assert!(r.rho.abs() < 1e-12 && r.alpha.abs() < 1e-12 && r.beta.abs() < 1e-12);
        }
        let collinear = FleetRelativeState::new(vec![link(1.0, 0.0, -PI), link(2.0, 0.0, -PI), link(3.0, PI - 1e-16, -PI)]).unwrap();
        for r in closed_loop_rhs(&collinear, &params(1.0, 2.0), ControlLaw::Main).unwrap() {
            assert!(r.rho.abs() < 1e-12 && r.alpha.abs() < 1e-12 && r.beta.abs() < 1e-12);
        }
        let pair = FleetRelativeState::new(vec![link(2.0, 0.3, 1.0), link(2.5, -0.8, -1.0)]).unwrap();
        for r in closed_loop_rhs(&pair, &params(1.0, 2.0), ControlLaw::Variant).unwrap() {
            assert_eq!(r.beta, 0.0);
        }
        assert!(matches!(
            closed_loop_rhs(&collinear, &params(1.0, 2.0), ControlLaw::Variant),
            Err(Error::UnsupportedLaw(_))
        ));
    }
}

mod dynamics_sim {
    use super::*;

    #[test]
    fn unicycle() {
        let q = |t| AgentState::new(0.0, 0.0, t).unwrap();
        let a = absolute_rhs(&q(0.0), 0.0, 1.0);
        assert_eq!(a, [1.0, 0.0, 0.0]);
        let b = absolute_rhs(&q(FRAC_PI_2), 1.0, 2.0);
        assert_abs_diff_eq!(b[0], 0.0, epsilon = 1e-15);
        assert_eq!((b[1], b[2]), (2.0, 1.0));
        let c = absolute_rhs(&q(FRAC_PI_4), -3.0, 1.0);
        assert_abs_diff_eq!(c[0], SQRT_2 / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c[1], SQRT_2 / 2.0, epsilon = 1e-15);
        assert_eq!(c[2], -3.0);
    }

    #[test]
    fn runge_kutta() {
        let still = step_rk4(0.0, &[1.0, -2.0], 0.1, |_, x| Ok(vec![0.0; x.len()])).unwrap();
        assert_eq!(still, vec![1.0, -2.0]);
        let grown = step_rk4(0.0, &[1.0], 0.1, |_, x| Ok(vec![x[0]])).unwrap();
        assert!((grown[0] - 0.1f64.exp()).abs() <= 1e-7);
    }

    #[test]
    fn bundled_runs() {
        let five = simulate(&bundled_scenario("fig_5vehicles").unwrap().sim).unwrap();
        let d = detect_convergence(&five, 1e-3, 50).formation.unwrap();
        assert_eq!((d.rotation, d.arrangement_p), (Rotation::CounterClockwise, 1));
        let five_cw = simulate(&bundled_scenario("fig_5vehicles_cw").unwrap().sim).unwrap();
        let d = detect_convergence(&five_cw, 1e-3, 50).formation.unwrap();
        assert_eq!((d.rotation, d.arrangement_p), (Rotation::Clockwise, 1));
        let three = simulate(&bundled_scenario("fig_3vehicles").unwrap().sim).unwrap();
        let d = detect_convergence(&three, 1e-3, 50).formation.unwrap();
        assert_eq!((d.rotation, d.arrangement_p), (Rotation::CounterClockwise, 1));
    }

    #[test]
    fn variant_law() {
        let params = |k| ControlParams::new(1.0, k).unwrap();
        let frozen = n2_variant_simulate(-PI, 0.7, 3.0, &params(-1.0), 1e-2, 10.0).unwrap();
        assert!(frozen.rho.iter().all(|r| (r - 3.0).abs() < 1e-12));
        assert!(frozen.alpha.iter().all(|a| (a - 0.7).abs() < 1e-12));
        let ccw = n2_variant_simulate(0.0, 0.3, 5.0, &params(-1.0), 1e-2, 40.0).unwrap();
        assert_abs_diff_eq!(*ccw.alpha.last().unwrap(), FRAC_PI_2, epsilon = 1e-6);
        let cw = n2_variant_simulate(0.0, -0.3, 5.0, &params(1.0), 1e-2, 40.0).unwrap();
        assert_abs_diff_eq!(*cw.alpha.last().unwrap(), -FRAC_PI_2, epsilon = 1e-6);
    }
}

mod linear_analysis {
    use super::*;

    #[test]
    fn blocks_and_kernel() {
        let (_, square) = construct_equally_spaced(4, 2.0, Rotation::CounterClockwise).unwrap();
        let p = params(1.0, -2.0);
        let lin = linearize(&square, &p).unwrap();
        assert_abs_diff_eq!(lin.a_blocks[0][(0, 1)], SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(lin.a_blocks[0][(2, 0)], -2.0 * 0.25 / (2.0 * SQRT_2), epsilon = 1e-12);

        let kernel = kernel_basis_circular(&square, &p).unwrap();
        assert_eq!(kernel.len(), 5);
        let k = DMatrix::from_columns(&kernel);
        assert_eq!(k.rank(1e-10), 5);
        assert!((&lin.assembled * &k).amax() < 1e-12);
        // The first vector is the orbit scaling [rho_1, 0, 0, ...].
        let scaling = DVector::from_iterator(12, square.links.iter().flat_map(|l| [l.rho, 0.0, 0.0]));
        assert!((&kernel[0] - scaling).amax() < 1e-15);

        let (pair, _) = construct_circular_formation(&[FRAC_PI_2; 2], 1.0, 1.0).unwrap();
        let kernel = kernel_basis_circular(&pair, &p).unwrap();
        assert_eq!(kernel.len(), 3);
        assert!((&kernel[1] - DVector::from_vec(vec![0.0, 1.0, -2.0, 0.0, 0.0, 0.0])).amax() < 1e-15);
    }

    #[test]
    fn collinear_kernel() {
        let xi = FleetRelativeState::new(vec![link(1.0, 0.0, -PI), link(1.0, PI - 1e-16, -PI)]).unwrap();
        let p = params(1.0, -2.0);
        let w = kernel_vector_collinear(&xi, &p).unwrap();
        assert!(w.amax() > 0.0);
        assert!((&linearize(&xi, &p).unwrap().assembled * &w).amax() < 1e-9);
        // A small step along w leaves the collinear set.
        let pushed: Vec<f64> = xi.to_vec().iter().zip(w.iter()).map(|(x, d)| x + 1e-3 * d).collect();
        let moved = FleetRelativeState::from_slice(&pushed).unwrap();
        assert!(moved.links.iter().any(|l| (l.beta + PI).abs() > 1e-4));
    }

    #[test]
    fn reduced_blocks_and_trace() {
        let p = params(1.0, -2.0);
        let (_, square) = construct_equally_spaced(4, 2.0, Rotation::CounterClockwise).unwrap();
        let red = reduce(&square, &p).unwrap();
        let s = 0.25;
        let abar = red.abar_blocks[0] / s;
        let want = [[0.0, 4.0], [-2.0, -4.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(abar[(i, j)], want[i][j], epsilon = 1e-12);
            }
        }
        let bbar = red.bbar / s;
        assert_abs_diff_eq!(bbar[(1, 0)], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bbar[(1, 1)], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(red.assembled.trace(), -4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trace_reduced(&[FRAC_PI_4; 4], &p, s).unwrap(), -4.0, epsilon = 1e-12);

        let (pair, _) = construct_circular_formation(&[FRAC_PI_2; 2], 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(reduce(&pair, &p).unwrap().assembled.trace(), -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trace_reduced(&[0.4, PI - 0.4], &params(1.0, 3.0), 0.2).unwrap(), 2.0 * 3.0 * 0.2, epsilon = 1e-12);

        // p = n - 1 with k sign(s) > 0 always has positive trace.
        let bearings = [2.0, 2.2, 2.0 * PI - 4.2];
        assert!(trace_reduced(&bearings, &params(1.0, 1.0), 0.3).unwrap() > 0.0);
    }
}

mod spectral_stability {
    use super::*;

    #[test]
    fn eigenvalues() {
        let got = eigvals(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]))).unwrap();
        assert!(match_multisets(&got, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap() < 1e-14);
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!(match_multisets(&eigvals(&rot).unwrap(), &[c(0.0, 1.0), c(0.0, -1.0)]).unwrap() < 1e-14);
    }

    #[test]
    fn charpoly_examples() {
        let cp = implicit_charpoly(&[0.9, PI - 0.9], Rotation::CounterClockwise).unwrap();
        assert!(cp.coeffs.iter().zip([1.0, 4.0, 4.0, 16.0, 0.0]).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(cp.reduced_coeffs.iter().zip([1.0, 4.0]).all(|(a, b)| (a - b).abs() < 1e-12));

        let tri = implicit_charpoly(&[FRAC_PI_3; 3], Rotation::CounterClockwise).unwrap();
        let z = 1.0 + 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(tri.reduced_coeffs[1], 6.0 * z, epsilon = 1e-9);
        assert_abs_diff_eq!(tri.reduced_coeffs[1], 9.4641016, epsilon = 1e-7);
        assert_abs_diff_eq!(tri.reduced_coeffs[2], 40.784610, epsilon = 1e-6);
        assert_abs_diff_eq!(tri.reduced_coeffs[3], 18.0 * z.powi(4) - 4.0 * z.powi(3), epsilon = 1e-9);
        let roots = tri.poly().roots().unwrap();
        for t in [c(0.0, 0.0), c(0.0, 2.0), c(0.0, -2.0)] {
            assert!(roots.iter().any(|r| (r - t).norm() < 1e-9));
        }
        let table = routh_hurwitz(&tri.reduced_coeffs).unwrap();
        assert_eq!(table.verdict, RouthVerdict::Hurwitz);
    }

    #[test]
    fn routh_examples() {
        assert_eq!(routh_hurwitz(&[1.0, 4.0]).unwrap().verdict, RouthVerdict::Hurwitz);
        assert_eq!(routh_hurwitz(&[1.0, 0.0, -1.0]).unwrap().verdict, RouthVerdict::NotHurwitz);
    }

    #[test]
    fn three_vehicle_identities() {
        let z = 1.0 + 1.0 / 3f64.sqrt();
        let k = n3_coefficients(z, z, z).unwrap();
        assert_abs_diff_eq!(k.a2, 9.4641016, epsilon = 1e-7);
        assert_abs_diff_eq!(k.a1, 40.784610, epsilon = 1e-6);
        assert!(k.gap > 0.0);
        let tri = implicit_charpoly(&[FRAC_PI_3; 3], Rotation::CounterClockwise).unwrap();
        assert_abs_diff_eq!(k.a0, tri.reduced_coeffs[3], epsilon = 1e-9);

        for a in [[0.3, 1.2, PI - 1.5], [0.05, 0.1, PI - 0.15], [1.0, 1.0, PI - 2.0]] {
            let z = z_values(&a, Rotation::CounterClockwise).unwrap();
            let lhs = z[0] * z[1] + z[1] * z[2] + z[0] * z[2];
            assert!((lhs - (2.0 * (z[0] + z[1] + z[2]) - 2.0)).abs() < 1e-9 * lhs.abs().max(1.0));
            let t: Vec<f64> = a.iter().map(|x| 1.0 / x.tan()).collect();
            assert_abs_diff_eq!(t[0] * t[1] + t[1] * t[2] + t[0] * t[2], 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn pair_verdicts() {
        let (ccw, _) = construct_circular_formation(&[FRAC_PI_2; 2], 1.0, 1.0).unwrap();
        let (cw, _) = construct_circular_formation(&[-FRAC_PI_2; 2], 1.0, 1.0).unwrap();
        let stable = stability_report(&ccw, &params(1.0, -2.0)).unwrap();
        assert_eq!(stable.classification, Classification::AsymptoticallyStable);
        assert_abs_diff_eq!(stable.max_real_part, -2.0, epsilon = 1e-12);
        let want = [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(-2.0, 0.0)];
        assert!(match_multisets(&stable.eigenvalues, &want).unwrap() < 1e-7);
        assert_eq!(stability_report(&ccw, &params(1.0, 2.0)).unwrap().classification, Classification::Unstable);
        assert_eq!(stability_report(&cw, &params(1.0, 2.0)).unwrap().classification, Classification::AsymptoticallyStable);
    }

    #[test]
    fn four_vehicle_root_cases() {
        let r = circulant_roots(4).unwrap();
        assert!(match_multisets(&r.cases[0].roots, &[c(0.0, 0.0), c(-6.0, 0.0)]).unwrap() < 1e-12);
        let second = &r.cases[1].roots;
        assert!(match_multisets(second, &[c(0.0, 2.0), c(-4.0, -4.0)]).unwrap() < 1e-12);
        // Vieta oracle for the quadratic of the second factor.
        let w = c(0.0, 1.0);
        assert!((second[0] + second[1] + 2.0 * (2.0 + w)).norm() < 1e-12);
        assert!((second[0] * second[1] - 8.0 * (1.0 - w)).norm() < 1e-12);
        assert!(r.cases[3].roots.iter().any(|x| (x - c(0.0, -2.0)).norm() < 1e-12));
    }

    #[test]
    fn variant_certificate() {
        assert_abs_diff_eq!(variant_equilibrium_bearing(0.0, -1.0).unwrap(), FRAC_PI_2);
        assert_abs_diff_eq!(variant_equilibrium_bearing(FRAC_PI_2, 1.0).unwrap(), -3.0 * FRAC_PI_4);
        let near = variant_equilibrium_bearing(-PI + 1e-9, -1.0).unwrap();
        assert!(near < PI && near > PI - 1e-8);
        assert!(matches!(variant_equilibrium_bearing(-PI, -1.0), Err(Error::IdenticalHeadings)));

        let at = lyapunov_variant(FRAC_PI_2, 0.0, -1.0).unwrap();
        assert!(at.v.abs() < 1e-15 && at.vdot.abs() < 1e-15);
        let off = lyapunov_variant(0.3, 0.0, -1.0).unwrap();
        assert!(off.v > 0.0 && off.vdot < 0.0);

        let traj = n2_variant_simulate(1.1, -2.0, 20.0, &params(1.0, -0.7), 1e-2, 50.0).unwrap();
        let vs: Vec<f64> = traj.alpha.iter().map(|&a| lyapunov_variant(a, 1.1, -0.7).unwrap().v).collect();
        assert!(vs.windows(2).all(|w| w[1] <= w[0] + 1e-10));
    }

    #[test]
    fn dispatch() {
        let (xi, _) = construct_circular_formation(&[0.5, 1.0, PI - 1.5], 1.0, 1.0).unwrap();
        let v = stability_report(&xi, &params(1.0, -2.0)).unwrap();
        assert_eq!((v.method, v.classification), (Method::RouthN3, Classification::AsymptoticallyStable));
        assert_eq!(v.discarded_modes, 6);

        let (_, five) = construct_equally_spaced(5, 1.0, Rotation::CounterClockwise).unwrap();
        let v = stability_report(&five, &params(1.0, -2.0)).unwrap();
        assert_eq!((v.method, v.classification), (Method::CirculantRoots, Classification::AsymptoticallyStable));
    }

    #[test]
    fn irregular_five_shows_unstable_modes() {
        // An observation, not a theorem: p = 4 samples carry a right half-plane eigenvalue.
        let bearings = [2.4, 2.6, 2.5, 2.45, 4.0 * PI - 9.95];
        let (xi, d) = construct_circular_formation(&bearings, 1.0, 1.0).unwrap();
        assert_eq!(d.arrangement_p, 4);
        for k in [-5.0, -2.0, -1.0, -0.3, 0.3, 1.0, 2.0, 5.0] {
            let v = stability_report(&xi, &params(1.0, k)).unwrap();
            assert!(v.max_real_part > 0.0, "k = {k}: {:?}", v.max_real_part);
            assert_eq!(v.classification, Classification::Unstable);
        }
    }
}

mod experiment_harness {
    use super::*;

    #[test]
    fn bundled_outcomes() {
        let out = run_scenario(&bundled_scenario("fig_2vehicles_switch").unwrap(), None).unwrap();
        let d = out.convergence.formation.as_ref().unwrap();
        assert_eq!(d.rotation, Rotation::CounterClockwise);
        let out = run_scenario(&bundled_scenario("fig_3vehicles_irregular").unwrap(), None).unwrap();
        assert_eq!(out.convergence.formation.as_ref().unwrap().arrangement_p, 1);
    }

    #[test]
    fn scenario_files() {
        use cyclic_pursuit::harness::{OutputFormat, OutputPlan};
        let dir = tempfile::tempdir().unwrap();
        let plan = OutputPlan { dir: dir.path().to_path_buf(), prefix: None, format: OutputFormat::Json };
        let out = run_scenario(&bundled_scenario("fig_3vehicles").unwrap(), Some(&plan)).unwrap();
        assert_eq!(out.files.len(), 3);
        for name in ["fig_3vehicles.json", "fig_3vehicles.convergence.json", "fig_3vehicles.analysis.json"] {
            assert!(dir.path().join(name).exists(), "{name}");
        }
        let analysis: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig_3vehicles.analysis.json")).unwrap()).unwrap();
        assert_eq!(analysis["stability"]["classification"], "asymptotically-stable");
        assert_eq!(analysis["charpoly"]["reduced_coeffs"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn gain_sweep_reports_rates() {
        let mut base = bundled_scenario("fig_5vehicles").unwrap();
        base.sim.t_end = 40.0;
        let spec = SweepSpec {
            base,
            parameter: SweepParameter::K,
            values: vec![-5.0, -2.0, -1.0],
            seeds: (1..=20).collect(),
            threads: None,
        };
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 3);
        for r in rows {
            assert_eq!(r.runs, 20);
            assert!((0.0..=1.0).contains(&r.convergence_rate));
        }
    }

    #[test]
    fn perturbed_irregular_starts_escape() {
        // The irregular p = 2 triple of radius 10 used in the escape experiment.
        let bearings = [2.0 * FRAC_PI_3; 3];
        let (xi, _) = construct_circular_formation(&bearings, 10.0, 1.0).unwrap();
        let mut base = bundled_scenario("fig_3vehicles_irregular").unwrap();
        base.sim.init = cyclic_pursuit::sim::InitialCondition::Relative(xi);
        let spec = SweepSpec {
            base,
            parameter: SweepParameter::BearingPerturbation,
            values: vec![0.02, 0.05],
            seeds: vec![1, 2, 3],
            threads: Some(1),
        };
        for r in run_sweep(&spec).unwrap() {
            assert_eq!(r.failures, 0, "{:?}", r.errors);
            // Every run that settles does so on a regular formation.
            let regular = (r.regular_rate * r.runs as f64).round() as usize;
            assert!(r.converged > 0 && regular == r.converged, "{r:?}");
        }
    }

    #[test]
    fn empty_sweep_is_rejected() {
        let spec = SweepSpec {
            base: bundled_scenario("fig_3vehicles").unwrap(),
            parameter: SweepParameter::K,
            values: vec![],
            seeds: vec![],
            threads: None,
        };
        assert!(matches!(run_sweep(&spec), Err(Error::Config(_))));
    }
}
