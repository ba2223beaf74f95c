//! Panel layouts for the oscillatory integrals over the real axis and over the
//! shifted contour `ℝ + ih`. The phase is cubic, `φ(u) = a·u³ + b·u`, with `b`
//! ranging over an interval determined by the `x`-window and `s ∈ [0, s_max]`.

use crate::quadrature::{composite_nodes, GaussLegendre};

/// Panel rule used for every oscillatory layout.
pub const PANEL_ORDER: usize = 16;

/// Breakpoints on `[u0, u1]` such that the phase changes by at most `delta`
/// radians per panel for every `b ∈ [b_lo, b_hi]`, where
/// `φ'(u) = 3a·u² + c(u) + b`; panels on which `φ'` can vanish are split
/// eight ways, and `fixed` breakpoints are always included.
pub fn phase_breaks(
    u0: f64,
    u1: f64,
    slope: impl Fn(f64) -> f64,
    curvature: impl Fn(f64) -> f64,
    b_range: (f64, f64),
    delta: f64,
    max_len: f64,
    fixed: &[f64],
) -> Vec<f64> {
    let dphi = |u: f64| {
        let base = slope(u);
        (base + b_range.0).abs().max((base + b_range.1).abs())
    };
    let mut breaks = vec![u0];
    let mut u = u0;
    while u < u1 {
        let mut len = max_len;
        let d = dphi(u);
        if d > 0.0 {
            len = len.min(delta / d);
        }
        let c = curvature(u).abs();
        if c > 0.0 {
            len = len.min((2.0 * delta / c).sqrt());
        }
        let d_end = dphi((u + len).min(u1));
        if d_end > 0.0 {
            len = len.min(delta / d_end);
        }
        let next = (u + len.max(1e-9)).min(u1);
        let lo = slope(u).min(slope(next)) + b_range.0;
        let hi = slope(u).max(slope(next)) + b_range.1;
        if lo <= 0.0 && hi >= 0.0 {
            let step = (next - u) / 8.0;
            for i in 1..8 {
                breaks.push(u + step * i as f64);
            }
        }
        breaks.push(next);
        u = next;
    }
    breaks.extend(fixed.iter().copied().filter(|&p| p > u0 && p < u1));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-13 * (1.0 + b.abs()));
    breaks
}

/// Gauss–Legendre nodes and weights on the panels.
pub fn panel_nodes(breaks: &[f64]) -> (Vec<f64>, Vec<f64>) {
    composite_nodes(&GaussLegendre::<f64>::new(PANEL_ORDER), breaks)
}
