//! Weyl m-function of the left half-line `(−∞, 0)` and the reflection
//! coefficient `R(λ) = (iλ − m₋)/(iλ + m₋)` it determines.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions};
use crate::potential::Potential;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MFunctionResult {
    pub lambda: Vec<Complex64>,
    pub m: Vec<Complex64>,
    pub r: Vec<Complex64>,
    /// `R` recomputed from `2·x_left`.
    pub r_deeper: Vec<Complex64>,
    /// `max |R(x_left) − R(2·x_left)|`.
    pub depth_change: f64,
    /// Nodes at which the Riccati form blew up and the linear form was used.
    pub linear_fallbacks: usize,
}

/// Local outgoing root `μ = √(λ² − q₀)`: `Im μ > 0`, or `Re μ` of the sign of
/// `Re λ` on the real axis.
fn outgoing_root(lambda: Complex64, q0: f64) -> Complex64 {
    let mu = (lambda * lambda - q0).sqrt();
    if mu.im < 0.0 || (mu.im == 0.0 && mu.re * lambda.re < 0.0) {
        -mu
    } else {
        mu
    }
}

fn segments(q: &Potential, x_left: f64) -> Vec<f64> {
    let mut pts = vec![x_left];
    pts.extend(q.breakpoints().into_iter().filter(|&p| p > x_left && p < 0.0));
    pts.push(0.0);
    pts
}

fn riccati(q: &Potential, lambda: Complex64, x_left: f64) -> Result<Complex64> {
    let l2 = lambda * lambda;
    let mut w = [Complex64::new(0.0, 1.0) * outgoing_root(lambda, q.evaluate_mid(x_left))];
    let opts = OdeOptions {
        max_steps: 200_000,
        ..OdeOptions::default()
    };
    for seg in segments(q, x_left).windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let eps = 1e-12 * (1.0 + lo.abs());
        let rhs = |x: f64, st: &[Complex64; 1]| {
            let qx = q.evaluate(x.clamp(lo + eps, hi - eps));
            [st[0] * st[0] + l2 - qx]
        };
        w = integrate(rhs, lo, w, hi, &opts)?;
        if !(w[0].norm() < 1e8) {
            return Err(Error::Riccati { x: hi });
        }
    }
    Ok(w[0])
}

fn linear(q: &Potential, lambda: Complex64, x_left: f64) -> Result<Complex64> {
    let l2 = lambda * lambda;
    let mu = outgoing_root(lambda, q.evaluate_mid(x_left));
    let mut st = [Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0) * mu];
    for seg in segments(q, x_left).windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let eps = 1e-12 * (1.0 + lo.abs());
        let rhs = |x: f64, s: &[Complex64; 2]| {
            let qx = q.evaluate(x.clamp(lo + eps, hi - eps));
            [s[1], s[0] * (qx - l2)]
        };
        st = integrate(rhs, lo, st, hi, &OdeOptions::default())?;
        let n = st[0].norm().max(st[1].norm());
        st = [st[0] / n, st[1] / n];
    }
    if st[0].norm() == 0.0 {
        return Err(Error::Riccati { x: 0.0 });
    }
    Ok(-st[1] / st[0])
}

fn m_value(q: &Potential, lambda: Complex64, x_left: f64) -> Result<(Complex64, bool)> {
    match riccati(q, lambda, x_left) {
        Ok(m) => Ok((m, false)),
        Err(_) => linear(q, lambda, x_left).map(|m| (m, true)),
    }
}

fn reflection(lambda: Complex64, m: Complex64) -> Complex64 {
    let il = Complex64::new(0.0, 1.0) * lambda;
    (il - m) / (il + m)
}

/// `m₋(λ²) = −f'(0)/f(0)` for the Weyl solution `f` decaying at −∞,
/// approximated by integrating `w' = w² + λ² − q` from `x_left` with the
/// local outgoing value `w = iμ`; only `q` on `(x_left, 0)` is used.
pub fn m_function_left(q: &Potential, lambda_nodes: &[Complex64], x_left: f64) -> Result<MFunctionResult> {
    if !(x_left < 0.0 && x_left.is_finite()) {
        return Err(Error::InvalidInput("x_left must be finite and negative".into()));
    }
    if lambda_nodes.iter().any(|l| l.im < 0.0 || *l == Complex64::new(0.0, 0.0)) {
        return Err(Error::InvalidInput("λ must be nonzero with Im λ ≥ 0".into()));
    }
    let rows: Vec<(Complex64, bool, Complex64)> = lambda_nodes
        .par_iter()
        .map(|&l| {
            let (m, fb) = m_value(q, l, x_left)?;
            let (m2, _) = m_value(q, l, 2.0 * x_left)?;
            Ok((m, fb, m2))
        })
        .collect::<Result<_>>()?;
    let m: Vec<Complex64> = rows.iter().map(|r| r.0).collect();
    let r: Vec<Complex64> = lambda_nodes.iter().zip(&m).map(|(&l, &m)| reflection(l, m)).collect();
    let r_deeper: Vec<Complex64> = lambda_nodes.iter().zip(&rows).map(|(&l, row)| reflection(l, row.2)).collect();
    let depth_change = r.iter().zip(&r_deeper).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(MFunctionResult {
        lambda: lambda_nodes.to_vec(),
        m,
        r,
        r_deeper,
        depth_change,
        linear_fallbacks: rows.iter().filter(|r| r.1).count(),
    })
}
