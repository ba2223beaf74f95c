use hankel_kdv::determinant::block_det_variants;
use hankel_kdv::io::{fmt_num, read_matrix, write_matrix, CsvTable};
use hankel_kdv::linalg::Matrix;
use hankel_kdv::oracles::{transfer_matrix_scattering, PiecewiseConstantPotential};
use hankel_kdv::potential::{Potential, Side};
use hankel_kdv::scattering::{scattering_coefficients, ScatteringOptions};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn symmetric(n: usize, vals: &[f64]) -> Matrix<f64> {
    Matrix::from_fn(n, n, |i, j| vals[i.min(j) * n + i.max(j)])
}

fn dense_logdet(a: &Matrix<f64>) -> f64 {
    let n = a.rows();
    DMatrix::from_fn(n, n, |i, j| a[(i, j)]).determinant().ln()
}

fn layers() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..4).prop_flat_map(|n| {
        (
            prop::collection::vec(0.2f64..1.5, n),
            prop::collection::vec(-2.0f64..1.0, n),
            -2.0f64..0.0,
        )
            .prop_map(|(widths, values, start)| {
                let mut bps = vec![start];
                for w in widths {
                    bps.push(bps.last().unwrap() + w);
                }
                (bps, values)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn layered_profiles_match_transfer_matrix((bps, vals) in layers(), k in 0.2f64..5.0) {
        let parts: Vec<Potential> = bps
            .windows(2)
            .zip(&vals)
            .map(|(w, &v)| Potential::square_well(v, w[0], w[1]))
            .collect();
        let q = Potential::sum(parts).unwrap();
        let (t, r, l) = scattering_coefficients(&q, &[k], &ScatteringOptions::default()).unwrap()[0];
        let (to, ro, lo) = transfer_matrix_scattering(&PiecewiseConstantPotential::new(bps, vals).unwrap(), k).unwrap();
        prop_assert!((t - to).norm() < 1e-8 && (r - ro).norm() < 1e-8 && (l - lo).norm() < 1e-8);
        prop_assert!((r.norm_sqr() + t.norm_sqr() - 1.0).abs() < 1e-8);
    }
}

proptest! {
    #[test]
    fn block_variants_equal_direct_determinant(
        n in 1usize..7,
        a in prop::collection::vec(-1.0f64..1.0, 36),
        b in prop::collection::vec(-1.0f64..1.0, 36),
    ) {
        // entries below 0.5/n keep the spectral radius under one half
        let s = 0.45 / n as f64;
        let hp = symmetric(n, &a).scale(s);
        let hphi = symmetric(n, &b).scale(s);
        let r = block_det_variants(&hp, &hphi, 1e-8, 1e-12).unwrap();
        let direct = dense_logdet(&hp.add(&hphi).plus_identity());
        for (name, v) in &r.values {
            prop_assert!((v - direct).abs() < 1e-12, "{name}: {v} vs {direct}");
        }
        prop_assert!(r.spread < 1e-12);
    }

    #[test]
    fn numbers_round_trip_through_text(v in any::<f64>()) {
        let back: f64 = fmt_num(v).parse().unwrap();
        prop_assert!(back == v || (v.is_nan() && back.is_nan()));
    }

    #[test]
    fn csv_tables_round_trip(rows in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 3), 0..20)) {
        let mut t = CsvTable::new(&["a", "b", "c"]).with_meta("note", "x");
        t.rows = rows;
        let back = CsvTable::parse(&t.render()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn matrices_round_trip(n in 1usize..6, m in 1usize..6, seed in prop::collection::vec(any::<f64>(), 36)) {
        let a = Matrix::from_fn(n, m, |i, j| seed[i * 6 + j]);
        let mut buf = Vec::new();
        write_matrix(&mut buf, &a).unwrap();
        let b = read_matrix(buf.as_slice()).unwrap();
        prop_assert_eq!(a.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn shift_moves_profile(depth in -3.0f64..-0.1, width in 0.3f64..2.0, dx in -5.0f64..5.0, x in -6.0f64..6.0) {
        let q = Potential::gaussian(depth, width, 0.0);
        let moved = q.shifted(dx);
        prop_assert!((moved.evaluate(x + dx) - q.evaluate(x)).abs() < 1e-14);
    }

    #[test]
    fn truncation_and_restriction_agree_on_kept_side(b in -6.0f64..-0.5, x in -8.0f64..8.0) {
        let q = Potential::sech_well(-2.0, 1.0, 0.5);
        let qb = q.truncate_left(b);
        prop_assert_eq!(qb.evaluate(x), if x < b { 0.0 } else { q.evaluate(x) });
        let plus = q.restrict(Side::Right);
        prop_assert_eq!(plus.evaluate(x), if x < 0.0 { 0.0 } else { q.evaluate(x) });
    }

    #[test]
    fn weighted_norm_grows_with_exponent(depth in -3.0f64..-0.1, n1 in 0.0f64..3.0, dn in 0.0f64..2.0) {
        let q = Potential::gaussian(depth, 1.0, 0.5);
        let a = q.check_admissibility(n1, (-20.0, 20.0), 0.0, 1e-10).unwrap();
        let b = q.check_admissibility(n1 + dn, (-20.0, 20.0), 0.0, 1e-10).unwrap();
        prop_assert!(b.weighted_norm >= a.weighted_norm);
    }
}
