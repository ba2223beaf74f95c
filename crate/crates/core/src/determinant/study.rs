use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::{Evaluator, Route, SplitData, UOptions};
use crate::error::{Error, Result};
use crate::hankel::DiscretizationParams;
use crate::linalg::{complex_log_det, log_det_positive, psd_sqrt, Matrix};
use crate::potential::{Potential, Side};
use crate::scattering::{scatter, ScatteringOptions, Source};

/// Log-determinants of the equivalent block forms of `det(1 + H₊ + H(Φ))`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDetReport {
    pub values: BTreeMap<String, f64>,
    /// Why `v3` was not computed.
    pub v3_skipped: Option<String>,
    pub spread: f64,
}

fn logdet_any_sign(a: &Matrix<f64>) -> Result<f64> {
    let (l, s) = a.lu()?.log_abs_det();
    if s <= 0.0 {
        return Err(Error::NonPositiveDeterminant { sign: s });
    }
    Ok(l)
}

/// `v1 = 1 + H₊ + H(Φ)`, `v2 = det(1+H₊)·det(1 + (1+H₊)⁻¹H(Φ))`,
/// `v4 = [[1+H₊, −H(Φ)], [1, 1]]`, `v5 = [[1+H₊, 1], [−H(Φ), 1]]` and, when
/// `H(Φ) = S²` with `S` symmetric, `v3 = [[1+H₊, iS], [iS, 1]]`.
pub fn block_det_variants(h_plus: &Matrix<f64>, h_phi: &Matrix<f64>, block_tol: f64, psd_tol: f64) -> Result<BlockDetReport> {
    let n = h_plus.rows();
    if h_phi.rows() != n || !h_plus.is_square() || !h_phi.is_square() {
        return Err(Error::InvalidInput("block variants need square matrices of one size".into()));
    }
    let id = Matrix::<f64>::identity(n);
    let a = h_plus.plus_identity();
    let neg_phi = h_phi.scale(-1.0);
    let mut values = BTreeMap::new();
    values.insert("v1".to_string(), log_det_positive(&a.add(h_phi))?);
    let lu = a.lu()?;
    let inner = lu.solve(h_phi).plus_identity();
    values.insert("v2".to_string(), logdet_any_sign(&a)? + logdet_any_sign(&inner)?);
    values.insert("v4".to_string(), logdet_any_sign(&Matrix::block2(&a, &neg_phi, &id, &id))?);
    values.insert("v5".to_string(), logdet_any_sign(&Matrix::block2(&a, &id, &neg_phi, &id))?);
    let v3_skipped = match psd_sqrt(h_phi, psd_tol) {
        Some(s) => {
            let big = DMatrix::<Complex64>::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
                (true, true) => Complex64::new(a[(i, j)], 0.0),
                (true, false) => Complex64::new(0.0, s[(i, j - n)]),
                (false, true) => Complex64::new(0.0, s[(i - n, j)]),
                (false, false) => Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0),
            });
            let l = complex_log_det(&big)?;
            values.insert("v3".to_string(), l.re);
            None
        }
        None => Some("H(Φ) is not positive semidefinite".to_string()),
    };
    let lo = values.values().copied().fold(f64::INFINITY, f64::min);
    let hi = values.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    if spread > block_tol {
        let listing: Vec<String> = values.iter().map(|(k, v)| format!("{k}={v:.16e}")).collect();
        return Err(Error::BlockDisagreement(listing.join(", ")));
    }
    Ok(BlockDetReport {
        values,
        v3_skipped,
        spread,
    })
}

/// `u_b` at fixed probes for a decreasing list of cut points `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub b_values: Vec<f64>,
    pub probes: Vec<(f64, f64)>,
    /// `u_b[i][p]` for `b_values[i]` and `probes[p]`.
    pub u_b: Vec<Vec<f64>>,
    /// `deltas[i][p] = u_b[i+1][p] − u_b[i][p]`.
    pub deltas: Vec<Vec<f64>>,
    /// Per probe: the last three `max(|delta|, DELTA_FLOOR)` are
    /// non-increasing.
    pub monotone_tail: Vec<bool>,
}

/// Resolution of `u_b` differences; smaller deltas count as converged.
pub const DELTA_FLOOR: f64 = 1e-9;

/// Evaluates `u_b` through the split assembly of `q·1_{x>b}`; the data of
/// `q₊` is shared by every `b ≤ 0`.
pub fn truncation_study(
    q: &Potential,
    b_list: &[f64],
    probes: &[(f64, f64)],
    params: &DiscretizationParams,
    scat: &ScatteringOptions,
    opts: &UOptions,
) -> Result<ConvergenceTable> {
    if b_list.is_empty() || b_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput("b_list must be non-empty and strictly decreasing".into()));
    }
    if b_list[0] > 0.0 {
        return Err(Error::InvalidInput("cut points must satisfy b <= 0".into()));
    }
    let strict = ScatteringOptions {
        shift_on_exceptional: false,
        ..scat.clone()
    };
    let plus = scatter(&q.restrict(Side::Right), Source::RightRestricted, &strict)?;
    let needs_full = probes.iter().any(|&(x, t)| t == 0.0 && x <= 0.0);
    let mut u_b = Vec::with_capacity(b_list.len());
    for &b in b_list {
        let qb = q.truncate_left(b);
        let split = SplitData::with_plus(plus.clone(), &qb, &strict, needs_full)?;
        let row = probes
            .iter()
            .map(|&(x, t)| Evaluator::new(Route::Split(&split), (x, x), t, params, opts)?.u(x).map(|v| v.0))
            .collect::<Result<Vec<f64>>>()?;
        u_b.push(row);
    }
    let deltas: Vec<Vec<f64>> = u_b
        .windows(2)
        .map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect())
        .collect();
    let monotone_tail = (0..probes.len())
        .map(|p| {
            let mags: Vec<f64> = deltas.iter().map(|d| d[p].abs().max(DELTA_FLOOR)).collect();
            let tail = &mags[mags.len().saturating_sub(3)..];
            tail.windows(2).all(|w| w[1] <= w[0])
        })
        .collect();
    Ok(ConvergenceTable {
        b_values: b_list.to_vec(),
        probes: probes.to_vec(),
        u_b,
        deltas,
        monotone_tail,
    })
}

/// One row of [`smoothing_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingRow {
    pub order: u32,
    /// Richardson-improved `∂ₓᵖu`.
    pub estimate: f64,
    /// Observed order of the difference quotients; `None` when their
    /// successive changes vanish.
    pub slope: Option<f64>,
}

/// Weights of the centered stencil `−r..=r` for the `p`-th derivative.
pub fn central_weights(p: usize, r: usize) -> Vec<f64> {
    let offsets: Vec<f64> = (-(r as i64)..=r as i64).map(|j| j as f64).collect();
    fornberg(p, 0.0, &offsets)
}

/// Fornberg's finite-difference weights for derivative `m` at `z`.
fn fornberg(m: usize, z: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}

/// Centered differences of `u` in `x` at steps `h₀, h₀/2, h₀/4` for orders
/// `1..=max_order`.
pub fn smoothing_probe(
    route: Route<'_>,
    x: f64,
    t: f64,
    max_order: u32,
    h0: f64,
    params: &DiscretizationParams,
    opts: &UOptions,
) -> Result<Vec<SmoothingRow>> {
    if !(t > 0.0) || max_order > 5 || max_order == 0 || !(h0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "smoothing probe needs t > 0, 1 <= max_order <= 5, h0 > 0 (got t={t}, order={max_order}, h0={h0})"
        )));
    }
    let r_max = (max_order as usize).div_ceil(2);
    let ev = Evaluator::new(route, (x - r_max as f64 * h0, x + r_max as f64 * h0), t, params, opts)?;
    // index m on the finest grid h₀/4
    let fine = h0 / 4.0;
    let mut cache: BTreeMap<i64, f64> = BTreeMap::new();
    let mut u_at = |m: i64| -> Result<f64> {
        if let Some(&v) = cache.get(&m) {
            return Ok(v);
        }
        let v = ev.u(x + m as f64 * fine)?.0;
        cache.insert(m, v);
        Ok(v)
    };
    let mut rows = Vec::new();
    for p in 1..=max_order as usize {
        let r = p.div_ceil(2);
        let w = central_weights(p, r);
        let mut d = [0.0; 3];
        for (level, scale) in [4i64, 2, 1].iter().enumerate() {
            let h = fine * *scale as f64;
            let mut acc = 0.0;
            for (j, wj) in w.iter().enumerate() {
                acc += wj * u_at((j as i64 - r as i64) * scale)?;
            }
            d[level] = acc / h.powi(p as i32);
        }
        let (e1, e2) = ((d[0] - d[1]).abs(), (d[1] - d[2]).abs());
        let slope = (e1 > 0.0 && e2 > 0.0).then(|| (e1 / e2).log2());
        rows.push(SmoothingRow {
            order: p as u32,
            estimate: (4.0 * d[2] - d[1]) / 3.0,
            slope,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::{KGridSpec, ScatteringData};

    #[test]
    fn central_weights_known() {
        let w = central_weights(2, 1);
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] + 2.0).abs() < 1e-14 && (w[2] - 1.0).abs() < 1e-14);
        let w = central_weights(3, 2);
        let want = [-0.5, 1.0, 0.0, -1.0, 0.5];
        assert!(w.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-13));
    }

    #[test]
    fn zero_phi_block_variants() {
        let h = Matrix::from_fn(4, 4, |i, j| 0.1 / (1.0 + i as f64 + j as f64));
        let z = Matrix::zeros(4, 4);
        let r = block_det_variants(&h, &z, 1e-12, 1e-12).unwrap();
        let want = log_det_positive(&h.plus_identity()).unwrap();
        for v in r.values.values() {
            assert!((v - want).abs() < 1e-13);
        }
    }

    #[test]
    fn smoothing_of_zero_data() {
        let sd = ScatteringData::empty(&KGridSpec::default());
        let rows = smoothing_probe(Route::Full(&sd), 0.0, 0.1, 5, 0.2, &DiscretizationParams::default(), &UOptions::default()).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.estimate == 0.0 && r.slope.is_none()));
    }

    #[test]
    fn right_supported_truncation_is_exact() {
        let q = Potential::square_well(1.0, 0.5, 1.5);
        let tab = truncation_study(
            &q,
            &[-1.0, -2.0, -4.0],
            &[(0.5, 0.1)],
            &DiscretizationParams::default(),
            &ScatteringOptions::default(),
            &UOptions::default(),
        )
        .unwrap();
        assert!(tab.deltas.iter().flatten().all(|d| *d == 0.0));
    }
}
