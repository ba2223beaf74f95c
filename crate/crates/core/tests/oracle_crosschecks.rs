use std::f64::consts::PI;

use hankel_kdv::determinant::*;
use hankel_kdv::hankel::*;
use hankel_kdv::oracles::*;
use hankel_kdv::potential::{Potential, Side};
use hankel_kdv::quadrature::{composite_nodes, GaussLegendre};
use hankel_kdv::scattering::*;
use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn xi(l: Complex64, x: f64, t: f64) -> Complex64 {
    (I * (8.0 * t * l * l * l + 2.0 * l * x)).exp()
}

/// `P₋f(k) = −(1/2πi) PV∫ f(λ)/(λ − k) dλ + f(k)/2` for real `k`, with `f`
/// decaying like `1/λ` so the integrand is absolutely integrable.
fn p_minus_real_line(f: impl Fn(f64) -> Complex64, k: f64, len: f64) -> Complex64 {
    let rule = GaussLegendre::<f64>::new(16);
    let panel = 1e-3;
    let fk = f(k);
    let n = |a: f64, b: f64| (((b - a) / panel).ceil() as usize).max(1);
    let breaks = |a: f64, b: f64| -> Vec<f64> {
        let m = n(a, b);
        (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect()
    };
    let mut pv = Complex64::new(0.0, 0.0);
    // symmetric window around k: subtract f(k), whose PV integral vanishes there
    let (xs, ws) = composite_nodes(&rule, &breaks(k - 1.0, k + 1.0));
    for (x, w) in xs.iter().zip(&ws) {
        pv += (f(*x) - fk) / (x - k) * *w;
    }
    for (a, b) in [(-len, k - 1.0), (k + 1.0, len)] {
        let (xs, ws) = composite_nodes(&rule, &breaks(a, b));
        for (x, w) in xs.iter().zip(&ws) {
            pv += f(*x) / (x - k) * *w;
        }
    }
    -pv / (2.0 * PI * I) + fk / 2.0
}

#[test]
fn phi_analytic_matches_real_line_principal_value() {
    // G(λ) = ic/(λ − iκ) below the contour height h
    let (c, kappa, h, x, t, k) = (0.8, 0.5, 1.5, 0.3, 0.1, 2.0);
    let g = move |l: Complex64| Ok(I * c / (l - I * kappa));
    let phi = phi_analytic(&g, h, x, t, &[Complex64::new(k, 0.0)], &DiscretizationParams::default()).unwrap()[0];
    let f = |u: f64| {
        let l = Complex64::new(u, 0.0);
        xi(l, x, t) * I * c / (l - I * kappa)
    };
    let pole = I * c * xi(I * kappa, x, t) / (I * kappa - k);
    let direct = p_minus_real_line(f, k, 40.0) + pole;
    assert!((phi - direct).norm() < 1e-6, "{phi} vs {direct}");
}

#[test]
fn phi_analytic_reality_symmetry() {
    // G(−λ̄) = conj G(λ) gives Φ(−k̄) = conj Φ(k)
    let (c, kappa) = (0.8, 0.5);
    let g = move |l: Complex64| Ok(I * c / (l - I * kappa));
    let ks = [Complex64::new(2.0, -0.3), Complex64::new(-2.0, -0.3), Complex64::new(0.7, 0.4), Complex64::new(-0.7, 0.4)];
    let v = phi_analytic(&g, 1.5, 0.3, 0.1, &ks, &DiscretizationParams::default()).unwrap();
    assert!((v[1] - v[0].conj()).norm() < 1e-10);
    assert!((v[3] - v[2].conj()).norm() < 1e-10);
}

#[test]
fn coefficients_match_transfer_matrix() {
    let q = Potential::square_well(-1.0, 0.0, 2.0);
    let p = PiecewiseConstantPotential::new(vec![0.0, 2.0], vec![-1.0]).unwrap();
    let ks = [0.3, 0.8, 1.7, 4.0];
    let ours = scattering_coefficients(&q, &ks, &ScatteringOptions::default()).unwrap();
    for (&k, (t, r, l)) in ks.iter().zip(&ours) {
        let (to, ro, lo) = transfer_matrix_scattering(&p, k).unwrap();
        assert!((t - to).norm() < 1e-8 && (r - ro).norm() < 1e-8 && (l - lo).norm() < 1e-8, "k = {k}");
    }
}

#[test]
fn sech_reflectionless_against_layered_oracle() {
    let q = Potential::sech_well(-2.0, 1.0, 0.0);
    let layers = PiecewiseConstantPotential::sample(&q, -20.0, 20.0, 8000).unwrap();
    for k in [0.5, 1.0, 2.0] {
        let (_, r, _) = scattering_coefficients(&q, &[k], &ScatteringOptions::default()).unwrap()[0];
        let (_, ro, _) = transfer_matrix_scattering(&layers, k).unwrap();
        assert!(r.norm() < 1e-6 && ro.norm() < 1e-5, "k = {k}: {r} {ro}");
    }
}

#[test]
fn left_supported_jost_is_free_to_the_left() {
    let q = Potential::square_well(-1.0, 0.5, 2.0);
    let xs = [-3.0, -1.0, 0.0];
    let y = jost_left(&q, Complex64::new(0.7, 0.2), &xs, &ScatteringOptions::default()).unwrap();
    assert!(y.iter().all(|v| *v == Complex64::new(1.0, 0.0)), "{y:?}");
}

#[test]
fn bound_states_match_eigensolver() {
    let q = Potential::gaussian(-3.0, 1.0, 0.5);
    let ours = bound_states_of(&q, &ScatteringOptions::default()).unwrap();
    let eigs = schrodinger_eigs(&q, (-100.0, 100.0), 40_000).unwrap();
    let mut fd: Vec<f64> = eigs.iter().map(|e| (-e).sqrt()).filter(|k| *k > 0.05).collect();
    fd.sort_by(|a, b| b.total_cmp(a));
    assert_eq!(ours.len(), fd.len());
    for (b, k) in ours.iter().zip(&fd) {
        assert!((b.kappa - k).abs() < 1e-4, "{} vs {k}", b.kappa);
    }
}

#[test]
fn m_function_route_matches_deep_truncation() {
    // left square well; the m-function only sees q on (x_left, 0)
    let q = Potential::square_well(-1.0, -3.0, -1.0);
    let ks = [0.7, 1.3];
    let lambdas: Vec<Complex64> = ks.iter().map(|&k| Complex64::new(k, 0.0)).collect();
    let m = m_function_left(&q, &lambdas, -20.0).unwrap();
    let deep = scattering_coefficients(&q.truncate_left(-20.0).restrict(Side::Left), &ks, &ScatteringOptions::default()).unwrap();
    for (rm, (_, r, _)) in m.r.iter().zip(&deep) {
        assert!((rm - r).norm() < 1e-5, "{rm} vs {r}");
    }
}

#[test]
fn translation_covariance() {
    let opts = ScatteringOptions::default();
    let p = DiscretizationParams::default();
    let uo = UOptions::default();
    let q = Potential::gaussian(-1.0, 1.0, 0.0);
    let base = scatter(&q, Source::FullLine, &opts).unwrap();
    let moved = scatter(&q.shifted(2.0), Source::FullLine, &opts).unwrap();
    for (x, t) in [(0.0, 0.1), (1.0, 0.1), (-1.5, 0.2)] {
        let u0 = u_point(Route::Full(&base), x, t, &p, &uo).unwrap();
        let u1 = u_point(Route::Full(&moved), x + 2.0, t, &p, &uo).unwrap();
        assert!((u0 - u1).abs() < 1e-6, "({x}, {t}): {u0} vs {u1}");
    }
}

#[test]
fn trace_formula_agrees_with_finite_differences() {
    let opts = ScatteringOptions::default();
    let p = DiscretizationParams::default();
    let fd = UOptions { method: UMethod::FiniteDifference, ..Default::default() };
    let tr = UOptions { method: UMethod::TraceFormula, ..Default::default() };
    let two_well = Potential::sum(vec![Potential::square_well(-1.0, -2.0, -1.0), Potential::square_well(-1.0, 1.0, 2.0)]).unwrap();
    for (q, x, t) in [
        (Potential::gaussian(-1.0, 1.0, 0.0), 0.5, 0.1),
        (Potential::square_well(-1.0, -1.0, 1.0), 0.3, 0.1),
        (two_well, 1.0, 0.1),
    ] {
        let sd = scatter(&q, Source::FullLine, &opts).unwrap();
        let a = u_point(Route::Full(&sd), x, t, &p, &fd).unwrap();
        let b = u_point(Route::Full(&sd), x, t, &p, &tr).unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn soliton_moves_at_four_kappa_squared() {
    let sd = scatter(&Potential::sech_well(-2.0, 1.0, 0.0), Source::FullLine, &ScatteringOptions::default()).unwrap();
    let xs: Vec<f64> = (0..=20).map(|i| 3.8 + 0.02 * i as f64).collect();
    let f = u_field(Route::Full(&sd), &xs, &[1.0], &DiscretizationParams::default(), &UOptions::default()).unwrap();
    let (i, _) = f.u[0].iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    // parabolic refinement of the grid minimum
    let (a, b, c) = (f.u[0][i - 1], f.u[0][i], f.u[0][i + 1]);
    let x_min = xs[i] + 0.02 * 0.5 * (a - c) / (a - 2.0 * b + c);
    assert!((x_min / 4.0 - 1.0).abs() < 0.01, "{x_min}");
}

#[test]
fn split_step_preserves_soliton() {
    let q = Potential::sech_well(-2.0, 1.0, 0.0);
    let ss = split_step_kdv(&q, 0.5, (-40.0, 40.0), 2048, 1e-4).unwrap();
    let err = ss.x.iter().zip(&ss.u).map(|(x, u)| (u - soliton_exact(1.0, 0.0, *x, 0.5)).abs()).fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
}
