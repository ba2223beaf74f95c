//! Gauss–Legendre rules and adaptive Gauss–Kronrod integration.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussLegendre<T> {
    /// Nodes by Newton iteration on `P_n`, ascending order.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = T::of_usize(n);
        let eps = T::epsilon() * T::lit(4.0);
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess for the i-th largest root.
            let theta = T::PI() * (T::of_usize(i) + T::lit(0.75)) / (nf + T::lit(0.5));
            let mut x = theta.cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= eps {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != T::zero() {
                dp = d;
            }
            let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[n - 1 - i] = x;
            nodes[i] = -x;
            weights[n - 1 - i] = w;
            weights[i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn on_interval(&self, a: T, b: T) -> (Vec<T>, Vec<T>) {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        let x = self.nodes.iter().map(|&t| mid + half * t).collect();
        let w = self.weights.iter().map(|&w| w * half).collect();
        (x, w)
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        let mut acc = T::zero();
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * t);
        }
        acc * half
    }

    /// Composite rule over consecutive breakpoints.
    pub fn integrate_panels<F: FnMut(T) -> T>(&self, breaks: &[T], mut f: F) -> T {
        breaks
            .windows(2)
            .map(|ab| self.integrate(ab[0], ab[1], &mut f))
            .fold(T::zero(), |a, b| a + b)
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, T::zero());
    }
    for k in 2..=n {
        let kf = T::of_usize(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::of_usize(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Composite Gauss–Legendre nodes and weights on the panels `breaks`.
pub fn composite_nodes<T: Real>(rule: &GaussLegendre<T>, breaks: &[T]) -> (Vec<T>, Vec<T>) {
    let mut xs = Vec::with_capacity(rule.len() * breaks.len().saturating_sub(1));
    let mut ws = Vec::with_capacity(xs.capacity());
    for ab in breaks.windows(2) {
        let (x, w) = rule.on_interval(ab[0], ab[1]);
        xs.extend(x);
        ws.extend(w);
    }
    (xs, ws)
}

const GK15_XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const GK15_WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const GK15_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7/15 panel: `(integral, error estimate)`.
fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    let mut kronrod = fc * T::lit(GK15_WGK[7]);
    let mut gauss = fc * T::lit(GK15_WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(GK15_XGK[j]);
        let s = f(mid - dx) + f(mid + dx);
        kronrod += T::lit(GK15_WGK[j]) * s;
        if j % 2 == 1 {
            gauss += T::lit(GK15_WG[j / 2]) * s;
        }
    }
    let integral = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (integral, err)
}

/// Result of [`adaptive`] integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveResult<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

/// Globally adaptive Gauss–Kronrod integration over the panels `breaks`.
///
/// Bisects the panel with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol·|I|)` or `max_panels` is hit,
/// in which case the partial value is returned inside the error.
pub fn adaptive<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    breaks: &[T],
    abs_tol: T,
    rel_tol: T,
    max_panels: usize,
) -> Result<AdaptiveResult<T>> {
    let mut panels: Vec<(T, T, T, T)> = breaks
        .windows(2)
        .filter(|ab| ab[1] > ab[0])
        .map(|ab| {
            let (v, e) = gk15(&mut f, ab[0], ab[1]);
            (ab[0], ab[1], v, e)
        })
        .collect();
    let mut evaluations = 15 * panels.len();
    loop {
        let total: T = panels.iter().fold(T::zero(), |s, p| s + p.2);
        let err: T = panels.iter().fold(T::zero(), |s, p| s + p.3);
        let tol = abs_tol.max(rel_tol * total.abs());
        if err <= tol {
            return Ok(AdaptiveResult {
                value: total,
                error: err,
                evaluations,
            });
        }
        if panels.len() >= max_panels {
            return Err(Error::QuadratureNotConverged {
                partial: total.to_f64().unwrap_or(f64::NAN),
                estimate: err.to_f64().unwrap_or(f64::NAN),
                tolerance: tol.to_f64().unwrap_or(f64::NAN),
            });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, p)| {
                if p.3 > best.1 {
                    (i, p.3)
                } else {
                    best
                }
            });
        let (a, b, _, _) = panels.swap_remove(idx);
        let m = (a + b) * T::lit(0.5);
        let (v1, e1) = gk15(&mut f, a, m);
        let (v2, e2) = gk15(&mut f, m, b);
        evaluations += 30;
        panels.push((a, m, v1, e1));
        panels.push((m, b, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for n in [1usize, 2, 5, 16, 33] {
            let rule = GaussLegendre::<f64>::new(n);
            let wsum: f64 = rule.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "n={n}");
            // degree 2n-1 monomial on [0, 1]
            let deg = 2 * n - 1;
            let v = rule.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn gauss_legendre_nodes_sorted_and_symmetric() {
        let rule = GaussLegendre::<f64>::new(64);
        for w in rule.nodes.windows(2) {
            assert!(w[0] < w[1]);
        }
        for i in 0..32 {
            assert!((rule.nodes[i] + rule.nodes[63 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn single_precision_rule() {
        let rule = GaussLegendre::<f32>::new(8);
        let v = rule.integrate(0.0, std::f32::consts::PI, |x| x.sin());
        assert!((v - 2.0).abs() < 1e-5);
    }

    #[test]
    fn adaptive_handles_kink() {
        let r = adaptive(|x: f64| (x - 0.3).abs(), &[0.0, 1.0], 1e-12, 1e-12, 500).unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-11);
    }

    #[test]
    fn adaptive_reports_partial_value() {
        let err = adaptive(|x: f64| 1.0 / x.sqrt(), &[0.0, 1.0], 1e-15, 0.0, 4).unwrap_err();
        match err {
            Error::QuadratureNotConverged { partial, .. } => assert!(partial > 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
