use num_complex::Complex64;
use rayon::prelude::*;

use super::jost::{wronskian, Branch, JostSolver};
use super::{BoundState, ScatteringOptions};
use crate::error::{Error, Result};
use crate::ode::integrate;
use crate::oracles::schrodinger_eigs;
use crate::potential::Potential;

/// Bound states of `q` with `κ < kappa_max`, sorted descending.
pub fn bound_states(q: &Potential, kappa_max: f64, opts: &ScatteringOptions) -> Result<Vec<BoundState>> {
    if !(kappa_max > 0.0) {
        return Err(Error::InvalidInput("kappa_max must be positive".into()));
    }
    if q.is_zero() {
        return Ok(Vec::new());
    }
    let s = JostSolver::new(q, opts.tail_tol, opts.ode())?;
    bound_states_with(&s, kappa_max, opts)
}

/// `e^{κ·len}` capped; phase-removed solutions at `k = iκ` shrink by up to
/// this factor across `len`, so starting there keeps them above the absolute
/// ODE tolerance.
fn start_scale(kappa: f64, len: f64) -> f64 {
    (kappa * len.max(0.0)).min(300.0).exp()
}

/// `W(ψ₋, ψ₊)(iκ)` up to a positive factor.
fn w_real(s: &JostSolver, kappa: f64) -> Result<f64> {
    let k = Complex64::new(0.0, kappa);
    let (xl, xr) = (s.x_left()?, s.x_right());
    let xm = s.match_point().clamp(xl, xr);
    let start = |v: f64| [Complex64::new(v, 0.0), Complex64::new(0.0, 0.0)];
    let p = s.propagate(Branch::Right, k, xr, start(start_scale(kappa, xr - xm)), xm)?;
    let m = s.propagate(Branch::Left, k, xl, start(start_scale(kappa, xm - xl)), xm)?;
    Ok(wronskian(k, &m, &p).re)
}

pub(super) fn bound_states_with(s: &JostSolver, kappa_max: f64, opts: &ScatteringOptions) -> Result<Vec<BoundState>> {
    if kappa_max <= 1e-8 {
        return check_count(s, &[], opts).map(|_| Vec::new());
    }
    let n = opts.scan_points;
    let mut grid: Vec<f64> = vec![kappa_max * 1e-5];
    grid.extend((1..=n).map(|i| kappa_max * i as f64 / n as f64));
    let vals: Vec<f64> = grid.par_iter().map(|&kp| w_real(s, kp)).collect::<Result<_>>()?;
    let brackets: Vec<(f64, f64, f64)> = grid
        .windows(2)
        .zip(vals.windows(2))
        .filter(|(_, v)| v[0] == 0.0 || v[0].signum() != v[1].signum())
        .map(|(g, v)| (g[0], g[1], v[0]))
        .collect();
    let mut kappas: Vec<f64> = brackets
        .par_iter()
        .map(|&(a, b, fa)| bisect(s, a, b, fa, opts.kappa_tol))
        .collect::<Result<_>>()?;
    kappas.sort_by(|a, b| b.total_cmp(a));
    kappas.dedup_by(|a, b| (*a - *b).abs() < 1e3 * opts.kappa_tol);
    check_count(s, &kappas, opts)?;
    kappas
        .iter()
        .map(|&kappa| Ok(BoundState { kappa, c: norming_with(s, kappa)? }))
        .collect()
}

fn bisect(s: &JostSolver, mut a: f64, mut b: f64, mut fa: f64, tol: f64) -> Result<f64> {
    if fa == 0.0 {
        return Ok(a);
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = w_real(s, m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if b - a < tol {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

/// Compare the number of states with `κ` above a resolvable threshold against
/// the finite-difference eigensolver in a large box.
fn check_count(s: &JostSolver, kappas: &[f64], opts: &ScatteringOptions) -> Result<()> {
    if !opts.eigen_check {
        return Ok(());
    }
    const KAPPA_CMP: f64 = 0.1;
    const PAD: f64 = 40.0;
    let lo = s.x_left()?;
    let hi = s.x_right();
    let h_target = 0.01;
    let n = (((hi - lo + 2.0 * PAD) / h_target) as usize).clamp(2048, 40_000);
    let eigs = schrodinger_eigs(s.potential(), (lo - PAD, hi + PAD), n)?;
    let fd: Vec<f64> = eigs.iter().map(|e| (-e).sqrt()).collect();
    let near = |v: &f64| (v - KAPPA_CMP).abs() < 0.2 * KAPPA_CMP;
    if fd.iter().chain(kappas).any(near) {
        return Ok(());
    }
    let scan = kappas.iter().filter(|&&k| k > KAPPA_CMP).count();
    let eig = fd.iter().filter(|&&k| k > KAPPA_CMP).count();
    if scan != eig {
        return Err(Error::BoundStateCount { scan, eigensolver: eig });
    }
    Ok(())
}

/// `c = ‖ψ₊(·, iκ)‖⁻²` for a bound state at `iκ`.
pub fn norming_constant(q: &Potential, kappa: f64, opts: &ScatteringOptions) -> Result<f64> {
    let s = JostSolver::new(q, opts.tail_tol, opts.ode())?;
    norming_with(&s, kappa)
}

fn segments(s: &JostSolver, from: f64, to: f64) -> Vec<f64> {
    let (a, b) = if from < to { (from, to) } else { (to, from) };
    let mut pts: Vec<f64> = s.potential().breakpoints().into_iter().filter(|&p| p > a && p < b).collect();
    pts.push(from);
    pts.push(to);
    pts.sort_by(f64::total_cmp);
    if from > to {
        pts.reverse();
    }
    pts
}

/// Integrate `[y, y', ∫ e^{σx} y²]` for the phase-removed bound-state equation
/// `y'' = qy + 2κ·dir·y'`.
fn integrate_with_norm(s: &JostSolver, kappa: f64, dir: f64, sigma: f64, from: f64, to: f64) -> Result<[Complex64; 3]> {
    let sc = start_scale(kappa, (to - from).abs());
    let mut y = [Complex64::new(sc, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
    let q = s.potential();
    let opts = crate::ode::OdeOptions::default();
    for seg in segments(s, from, to).windows(2) {
        let (lo, hi) = if seg[0] < seg[1] { (seg[0], seg[1]) } else { (seg[1], seg[0]) };
        let eps = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        let rhs = |x: f64, st: &[Complex64; 3]| {
            let qx = q.evaluate(x.clamp(lo + eps, hi - eps));
            [st[1], st[0] * qx + st[1] * (2.0 * kappa * dir), st[0] * st[0] * (sigma * x).exp()]
        };
        y = integrate(rhs, seg[0], y, seg[1], &opts)?;
    }
    Ok([y[0] / sc, y[1] / sc, y[2] / (sc * sc)])
}

fn norming_with(s: &JostSolver, kappa: f64) -> Result<f64> {
    let xr = s.x_right();
    let xl = s.x_left()?;
    let xm = s.match_point().clamp(xl, xr);
    // ψ₊ = e^{−κx} y₊ from the right
    let p = integrate_with_norm(s, kappa, 1.0, -2.0 * kappa, xr, xm)?;
    // ψ₋ = e^{κx} y₋ from the left
    let m = integrate_with_norm(s, kappa, -1.0, 2.0 * kappa, xl, xm)?;
    let right = -p[2].re + (-2.0 * kappa * xr).exp() / (2.0 * kappa);
    let left = m[2].re + (2.0 * kappa * xl).exp() / (2.0 * kappa);
    // ψ₋ = βψ₊ in value and slope; the pair stays well conditioned at a node
    let a = [p[0].re, p[1].re - kappa * p[0].re];
    let b = [m[0].re, m[1].re + kappa * m[0].re];
    let beta = (2.0 * kappa * xm).exp() * (a[0] * b[0] + a[1] * b[1]) / (a[0] * a[0] + a[1] * a[1]);
    let norm2 = right + left / (beta * beta);
    if !(norm2 > 0.0 && norm2.is_finite()) {
        return Err(Error::Integration {
            x: xm,
            reason: format!("degenerate bound-state norm at κ = {kappa}"),
        });
    }
    Ok(1.0 / norm2)
}
