//! Jost solutions in phase-removed form.
//!
//! `y₊ = e^{−ikx}ψ₊` solves `y'' + 2iky' = qy` with `y₊ → 1` at +∞ and is
//! integrated leftward; `y₋ = e^{ikx}ψ₋` solves `y'' − 2iky' = qy` with
//! `y₋ → 1` at −∞ and is integrated rightward. Both directions are stable for
//! `Im k ≥ 0`. Where `q ≡ 0` the solution is propagated in closed form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions};
use crate::potential::Potential;

pub type State = [Complex64; 2];

const ONE: State = [Complex64 { re: 1.0, im: 0.0 }, Complex64 { re: 0.0, im: 0.0 }];
/// Longest stretch integrated without renormalising.
const CHUNK: f64 = 2.0;

/// Which Jost solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `ψ₊ ~ e^{ikx}` at +∞.
    Right,
    /// `ψ₋ ~ e^{−ikx}` at −∞.
    Left,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Right => 1.0,
            Branch::Left => -1.0,
        }
    }
}

/// `(e^z − 1)/z`, accurate near zero.
fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        Complex64::new(1.0, 0.0) + z * (0.5 + z * (1.0 / 6.0 + z / 24.0))
    } else {
        (z.exp() - 1.0) / z
    }
}

/// Reusable Jost-solution integrator for one potential.
#[derive(Debug, Clone)]
pub struct JostSolver {
    q: Potential,
    x_right: f64,
    x_left: std::result::Result<f64, Error>,
    knots: Vec<f64>,
    opts: OdeOptions,
}

impl JostSolver {
    /// `tail_tol` bounds the weighted tail `∫(1+|x|)|q|` ignored past the
    /// starting points.
    pub fn new(q: &Potential, tail_tol: f64, opts: OdeOptions) -> Result<Self> {
        let x_right = q.right_cutoff(tail_tol)?;
        let x_left = q.left_cutoff(tail_tol);
        let mut knots = q.breakpoints();
        knots.retain(|p| p.is_finite());
        Ok(Self {
            q: q.clone(),
            x_right,
            x_left,
            knots,
            opts,
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.q
    }

    pub fn x_right(&self) -> f64 {
        self.x_right
    }

    pub fn x_left(&self) -> Result<f64> {
        self.x_left.clone()
    }

    /// A point inside the effective support, at the deepest sampled value of `q`.
    pub fn match_point(&self) -> f64 {
        let lo = self.x_left.clone().unwrap_or(self.x_right - 20.0);
        let hi = self.x_right;
        if !(hi > lo) {
            return hi;
        }
        let n = 400;
        let mut best = (0.5 * (lo + hi), 0.0);
        for i in 1..n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            let v = self.q.evaluate(x);
            if v < best.1 {
                best = (x, v);
            }
        }
        best.0
    }

    /// Propagate `(y, y')` of the given branch from `x0` to `x1`.
    pub fn propagate(&self, branch: Branch, k: Complex64, x0: f64, y0: State, x1: f64) -> Result<State> {
        if x0 == x1 {
            return Ok(y0);
        }
        let s = branch.sign();
        let two_isk = Complex64::new(0.0, 2.0 * s) * k;
        let mut pts = vec![x0];
        let (a, b) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
        pts.extend(self.knots.iter().copied().filter(|&p| p > a && p < b));
        pts.push(x1);
        if x1 < x0 {
            pts[1..].sort_by(|u, v| v.total_cmp(u));
        } else {
            pts[1..].sort_by(f64::total_cmp);
        }
        let mut y = y0;
        for seg in pts.windows(2) {
            let (p0, p1) = (seg[0], seg[1]);
            let (lo, hi) = if p0 < p1 { (p0, p1) } else { (p1, p0) };
            let mid = 0.5 * (lo + hi);
            if !(mid > self.q.lo && mid < self.q.hi) {
                // q ≡ 0 on this segment
                let d = p1 - p0;
                let e = (-two_isk * d).exp();
                y = [y[0] + y[1] * d * phi1(-two_isk * d), y[1] * e];
                continue;
            }
            let eps = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
            let q = &self.q;
            let rhs = |x: f64, st: &State| {
                let qx = q.evaluate(x.clamp(lo + eps, hi - eps));
                [st[1], st[0] * qx - two_isk * st[1]]
            };
            // unit-norm chunks keep the absolute tolerance relative to the state
            let n = ((p1 - p0).abs() / CHUNK).ceil().max(1.0) as usize;
            for j in 0..n {
                let a = p0 + (p1 - p0) * j as f64 / n as f64;
                let b = if j + 1 == n { p1 } else { p0 + (p1 - p0) * (j + 1) as f64 / n as f64 };
                let norm = y[0].norm().max(y[1].norm());
                if !(norm > 0.0 && norm.is_finite()) {
                    return Err(Error::Integration { x: a, reason: format!("degenerate state (k = {k})") });
                }
                let z = integrate(rhs, a, [y[0] / norm, y[1] / norm], b, &self.opts).map_err(|e| match e {
                    Error::Integration { x, reason } => Error::Integration {
                        x,
                        reason: format!("{reason} (k = {k})"),
                    },
                    other => other,
                })?;
                y = [z[0] * norm, z[1] * norm];
            }
        }
        Ok(y)
    }

    /// `(y₊, y₊')` at `x`.
    pub fn right_state(&self, k: Complex64, x: f64) -> Result<State> {
        if x >= self.x_right {
            return Ok(ONE);
        }
        self.propagate(Branch::Right, k, self.x_right, ONE, x)
    }

    /// `(y₋, y₋')` at `x`.
    pub fn left_state(&self, k: Complex64, x: f64) -> Result<State> {
        let x_left = self.x_left.clone()?;
        if x <= x_left {
            return Ok(ONE);
        }
        self.propagate(Branch::Left, k, x_left, ONE, x)
    }

    /// Values of the branch on `x_grid` (increasing).
    pub fn states_on(&self, branch: Branch, k: Complex64, x_grid: &[f64]) -> Result<Vec<State>> {
        if x_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("x_grid must be increasing".into()));
        }
        let mut out = vec![ONE; x_grid.len()];
        match branch {
            Branch::Right => {
                let mut x = self.x_right;
                let mut y = ONE;
                for (i, &xi) in x_grid.iter().enumerate().rev() {
                    if xi >= self.x_right {
                        continue;
                    }
                    y = self.propagate(branch, k, x, y, xi)?;
                    x = xi;
                    out[i] = y;
                }
            }
            Branch::Left => {
                let mut x = self.x_left.clone()?;
                let mut y = ONE;
                for (i, &xi) in x_grid.iter().enumerate() {
                    if xi <= x {
                        continue;
                    }
                    y = self.propagate(branch, k, x, y, xi)?;
                    x = xi;
                    out[i] = y;
                }
            }
        }
        Ok(out)
    }

    /// `W(ψ₋, ψ₊)` evaluated at `x`.
    pub fn wronskian_at(&self, k: Complex64, x: f64) -> Result<Complex64> {
        let p = self.right_state(k, x)?;
        let m = self.left_state(k, x)?;
        Ok(wronskian(k, &m, &p))
    }

    /// `W(ψ₋, ψ₊)` at the match point.
    pub fn wronskian(&self, k: Complex64) -> Result<Complex64> {
        self.wronskian_at(k, self.match_point())
    }

    /// `(T, R, L, |W|)` at real `k ≠ 0`.
    pub fn coefficients(&self, k: f64) -> Result<(Complex64, Complex64, Complex64, f64)> {
        let xm = self.match_point();
        let kc = Complex64::new(k, 0.0);
        let p = self.right_state(kc, xm)?;
        let m = self.left_state(kc, xm)?;
        let w = wronskian(kc, &m, &p);
        let ik = Complex64::new(0.0, k);
        let t = 2.0 * ik / w;
        // W(ψ₋, ψ₊(−k)) and W(ψ₋(−k), ψ₊) without the plane-wave phases
        let w_mp = m[0] * p[1].conj() - m[1] * p[0].conj();
        let w_pm = m[0].conj() * p[1] - m[1].conj() * p[0];
        let r = -(-2.0 * ik * xm).exp() * w_mp / w;
        let l = -(2.0 * ik * xm).exp() * w_pm / w;
        Ok((t, r, l, w.norm()))
    }
}

/// `W(ψ₋, ψ₊)` from phase-removed states at a common point.
pub fn wronskian(k: Complex64, m: &State, p: &State) -> Complex64 {
    m[0] * p[1] - m[1] * p[0] + Complex64::new(0.0, 2.0) * k * m[0] * p[0]
}
