//! Transformation kernel `B₊(x, y)` of the right restriction `q₊` and the
//! representation `R₊ = T₊(G0/(2ik) + G1/(2ik)²)`, where `G0`, `G1` are the
//! `e^{−2iky}` transforms of `q` and `Q'`, `Q(y) = ∫₀^y q(z)B₊(z, y−z)dz`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{Potential, Side};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VolterraOptions {
    /// Grid steps on `[0, X]` for the coarse solve; the fine solve doubles it.
    pub steps: usize,
    pub max_iter: usize,
    pub tail_tol: f64,
}

impl Default for VolterraOptions {
    fn default() -> Self {
        Self {
            steps: 1024,
            max_iter: 200,
            tail_tol: 1e-12,
        }
    }
}

/// Output of [`r_plus_representation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RPlusRepresentation {
    pub k_nodes: Vec<f64>,
    pub g0: Vec<Complex64>,
    pub g1: Vec<Complex64>,
    /// Sample abscissae of `Q'` on `[0, X]` (fine grid).
    pub y: Vec<f64>,
    pub q_prime: Vec<f64>,
    /// `max(|B₊| − η(x+y)e^{γ(x)})` over the grid; `≤ 0` when the bound holds.
    pub kernel_bound_excess: f64,
    /// `max(|Q'| − C₁|q| − C₂η)` over the grid.
    pub q_prime_bound_excess: f64,
    pub c1: f64,
    pub c2: f64,
    pub iterations: usize,
}

impl RPlusRepresentation {
    /// `T₊(G0/(2ik) + G1/(2ik)²)` at the stored nodes.
    pub fn reconstruct(&self, t_plus: &[Complex64]) -> Vec<Complex64> {
        self.k_nodes
            .iter()
            .zip(&self.g0)
            .zip(&self.g1)
            .zip(t_plus)
            .map(|(((&k, &g0), &g1), &t)| {
                let z = Complex64::new(0.0, 2.0 * k);
                t * (g0 / z + g1 / (z * z))
            })
            .collect()
    }
}

struct Solve {
    h: f64,
    q: Vec<f64>,
    q_prime: Vec<f64>,
    b_excess: f64,
    iterations: usize,
}

/// Tail integrals `η(x) = ∫_x^X |q|`, `γ(x) = ∫_x^X (t − x)|q(t)|dt` at grid nodes.
fn tails(q: &Potential, x_end: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = x_end / n as f64;
    let rule = GaussLegendre::<f64>::new(10);
    let bps = q.breakpoints();
    let mut a0 = vec![0.0; n + 1];
    let mut a1 = vec![0.0; n + 1];
    for i in (0..n).rev() {
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        let mut pts = vec![a];
        pts.extend(bps.iter().copied().filter(|&p| p > a && p < b));
        pts.push(b);
        a0[i] = a0[i + 1] + rule.integrate_panels(&pts, |t| q.evaluate(t).abs());
        a1[i] = a1[i + 1] + rule.integrate_panels(&pts, |t| t * q.evaluate(t).abs());
    }
    let gamma = (0..=n).map(|i| (a1[i] - i as f64 * h * a0[i]).max(0.0)).collect();
    (a0, gamma)
}

fn solve(q: &Potential, x_end: f64, n: usize, max_iter: usize) -> Result<Solve> {
    let h = x_end / n as f64;
    // interior nodes take the mean of one-sided limits, the ends the inner limit
    let eps = 1e-11 * (1.0 + x_end);
    let qv: Vec<f64> = (0..=n)
        .map(|i| match i {
            0 => q.evaluate(eps),
            _ if i == n => q.evaluate(x_end - eps),
            _ => q.evaluate_mid(i as f64 * h),
        })
        .collect();
    let (eta, gamma) = tails(q, x_end, n);
    let omega: Vec<f64> = {
        // Ω(s) = ∫_s^X q, exact on panels
        let rule = GaussLegendre::<f64>::new(10);
        let bps = q.breakpoints();
        let mut o = vec![0.0; n + 1];
        for i in (0..n).rev() {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            let mut pts = vec![a];
            pts.extend(bps.iter().copied().filter(|&p| p > a && p < b));
            pts.push(b);
            o[i] = o[i + 1] + rule.integrate_panels(&pts, |t| q.evaluate(t));
        }
        o
    };
    // b[i][j] = B(ih, jh), i + j ≤ n
    let mut b: Vec<Vec<f64>> = (0..=n).map(|i| (0..=n - i).map(|j| omega[i + j]).collect()).collect();
    let mut c: Vec<Vec<f64>> = (0..=n).map(|m| vec![0.0; n - m + 1]).collect();
    let fill_c = |b: &Vec<Vec<f64>>, c: &mut Vec<Vec<f64>>| {
        c.par_iter_mut().enumerate().for_each(|(m, row)| {
            // row[i] = ∫_{ih}^{X} q(t)B(t, mh)dt
            let top = n - m;
            row[top] = 0.0;
            for i in (0..top).rev() {
                row[i] = row[i + 1] + 0.5 * h * (qv[i] * b[i][m] + qv[i + 1] * b[i + 1][m]);
            }
        });
    };
    let mut iterations = 0;
    loop {
        iterations += 1;
        fill_c(&b, &mut c);
        let mut next: Vec<Vec<f64>> = (0..=n).map(|i| vec![0.0; n - i + 1]).collect();
        let diag: Vec<Vec<f64>> = (0..=n)
            .into_par_iter()
            .map(|s| {
                let mut out = vec![0.0; s + 1];
                let mut prefix = 0.0;
                for j in 0..=s {
                    prefix += c[j][s - j];
                    let trap = prefix - 0.5 * c[0][s] - 0.5 * c[j][s - j];
                    out[j] = omega[s] + h * trap;
                }
                out
            })
            .collect();
        for (s, row) in diag.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                next[s - j][j] = *v;
            }
        }
        let scale = next.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        let change = next
            .iter()
            .flatten()
            .zip(b.iter().flatten())
            .fold(0.0f64, |m, (a, o)| m.max((a - o).abs()));
        b = next;
        if change <= 1e-15 * scale {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::VolterraDivergence {
                iterations,
                residual: change,
            });
        }
    }
    fill_c(&b, &mut c);

    // Deift–Trubowitz bound |B(x,y)| ≤ η(x+y)e^{γ(x)}
    let mut b_excess = f64::NEG_INFINITY;
    for i in 0..=n {
        let g = gamma[i].exp();
        for j in 0..=n - i {
            let bound = eta[i + j] * g;
            b_excess = b_excess.max(b[i][j].abs() - bound * (1.0 + 1e-9) - 1e-13);
        }
    }

    // ∂_yB(ih, jh) = −q((i+j)h) + C(j, i) − ∫₀^{jh} q((i+j)h − z)B((i+j)h − z, z)dz
    let dyb: Vec<Vec<f64>> = {
        let diag: Vec<Vec<f64>> = (0..=n)
            .into_par_iter()
            .map(|s| {
                let mut out = vec![0.0; s + 1];
                let mut prefix = 0.0;
                let e = |m: usize| qv[s - m] * b[s - m][m];
                for j in 0..=s {
                    prefix += e(j);
                    let trap = prefix - 0.5 * e(0) - 0.5 * e(j);
                    let i = s - j;
                    out[j] = -qv[s] + c[j][i] - h * trap;
                }
                out
            })
            .collect();
        let mut d: Vec<Vec<f64>> = (0..=n).map(|i| vec![0.0; n - i + 1]).collect();
        for (s, row) in diag.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                d[s - j][j] = *v;
            }
        }
        d
    };
    // Q'(jh) = q(jh)B(jh, 0) + ∫₀^{jh} q(z)∂_yB(z, jh − z)dz
    let q_prime: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|j| {
            let mut trap = 0.0;
            for m in 0..=j {
                let w = if m == 0 || m == j { 0.5 } else { 1.0 };
                trap += w * qv[m] * dyb[m][j - m];
            }
            if j == 0 {
                trap = 0.0;
            }
            qv[j] * b[j][0] + h * trap
        })
        .collect();
    Ok(Solve {
        h,
        q: qv,
        q_prime,
        b_excess,
        iterations,
    })
}

/// `∫₀^{nh} e^{−2iky} f(y)dy` for `f` piecewise linear through the samples.
fn filon_linear(f: &[f64], h: f64, k: f64) -> Complex64 {
    let a = Complex64::new(0.0, -2.0 * k);
    let z = a * h;
    let (e0, e1) = if z.norm() < 1e-4 {
        // ∫₀^h e^{aτ}dτ and ∫₀^h τe^{aτ}dτ by series
        (
            h * (1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0),
            h * h * (0.5 + z / 3.0 + z * z / 8.0 + z * z * z / 30.0),
        )
    } else {
        let ez = z.exp();
        ((ez - 1.0) / a, h * ez / a - (ez - 1.0) / (a * a))
    };
    let step = (a * h).exp();
    let mut phase = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for w in f.windows(2) {
        acc += phase * (e0 * w[0] + e1 * ((w[1] - w[0]) / h));
        phase *= step;
    }
    acc
}

fn fourier_q(q: &Potential, x_end: f64, k: f64) -> Complex64 {
    let rule = GaussLegendre::<f64>::new(16);
    let mut pts = vec![0.0];
    pts.extend(q.breakpoints().into_iter().filter(|&p| p > 0.0 && p < x_end));
    pts.push(x_end);
    let max_len = (3.0 / k.abs().max(1e-12)).min(0.5);
    let mut acc = Complex64::new(0.0, 0.0);
    for w in pts.windows(2) {
        let m = ((w[1] - w[0]) / max_len).ceil().max(1.0) as usize;
        let d = (w[1] - w[0]) / m as f64;
        for p in 0..m {
            let a = w[0] + p as f64 * d;
            let (xs, ws) = rule.on_interval(a, a + d);
            for (x, wt) in xs.iter().zip(&ws) {
                acc += Complex64::new(0.0, -2.0 * k * x).exp() * (wt * q.evaluate(*x));
            }
        }
    }
    acc
}

/// Solve for `B₊` of `q₊ = q·1_{x>0}` by successive approximations on a
/// triangular grid (steps `N` and `2N`, Richardson-combined), then form `G0`,
/// `G1` at `k_nodes` and check the kernel and `Q'` bounds.
pub fn r_plus_representation(q: &Potential, k_nodes: &[f64], opts: &VolterraOptions) -> Result<RPlusRepresentation> {
    let qp = q.restrict(Side::Right);
    if qp.is_zero() {
        let zero = vec![Complex64::new(0.0, 0.0); k_nodes.len()];
        return Ok(RPlusRepresentation {
            k_nodes: k_nodes.to_vec(),
            g0: zero.clone(),
            g1: zero,
            y: vec![0.0],
            q_prime: vec![0.0],
            kernel_bound_excess: 0.0,
            q_prime_bound_excess: 0.0,
            c1: 0.0,
            c2: 0.0,
            iterations: 0,
        });
    }
    if opts.steps < 8 {
        return Err(Error::InvalidInput("Volterra grid needs ≥ 8 steps".into()));
    }
    let x_end = qp.right_cutoff(opts.tail_tol)?;
    let coarse = solve(&qp, x_end, opts.steps, opts.max_iter)?;
    let fine = solve(&qp, x_end, 2 * opts.steps, opts.max_iter)?;

    let g0: Vec<Complex64> = k_nodes.par_iter().map(|&k| fourier_q(&qp, x_end, k)).collect();
    let g1: Vec<Complex64> = k_nodes
        .par_iter()
        .map(|&k| {
            let a = filon_linear(&coarse.q_prime, coarse.h, k);
            let b = filon_linear(&fine.q_prime, fine.h, k);
            (4.0 * b - a) / 3.0
        })
        .collect();

    // |Q'(y)| ≤ C₁|q(y)| + C₂η(y)
    let n = 2 * opts.steps;
    let (eta, gamma) = tails(&qp, x_end, n);
    let e0 = eta[0];
    let c1 = e0 * gamma[0].exp() + e0;
    let c2 = 2.0 * e0 * e0 * gamma[0].exp();
    let q_prime_bound_excess = (0..=n)
        .map(|j| {
            let qa = fine.q[j].abs().max(qp.evaluate(j as f64 * fine.h + 1e-12).abs()).max(qp.evaluate(j as f64 * fine.h - 1e-12).abs());
            fine.q_prime[j].abs() - (c1 * qa + c2 * eta[j]) * (1.0 + 1e-9) - 1e-12
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(RPlusRepresentation {
        k_nodes: k_nodes.to_vec(),
        g0,
        g1,
        y: (0..=n).map(|j| j as f64 * fine.h).collect(),
        q_prime: fine.q_prime,
        kernel_bound_excess: coarse.b_excess.max(fine.b_excess),
        q_prime_bound_excess,
        c1,
        c2,
        iterations: coarse.iterations.max(fine.iterations),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_profile() {
        let r = r_plus_representation(&Potential::zero(), &[0.5, 1.0], &VolterraOptions::default()).unwrap();
        assert!(r.g0.iter().chain(&r.g1).all(|v| v.norm() == 0.0));
        assert!(r.q_prime.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn square_well_fourier_closed_form() {
        let v0 = 1.0;
        let q = Potential::square_well(-v0, 0.0, 2.0);
        let ks = [0.1, 0.8, 3.0, 17.0];
        let r = r_plus_representation(&q, &ks, &VolterraOptions { steps: 64, ..VolterraOptions::default() }).unwrap();
        for (k, g0) in ks.iter().zip(&r.g0) {
            let ik2 = Complex64::new(0.0, 2.0 * k);
            let exact = -v0 * (1.0 - (-2.0 * ik2).exp()) / ik2;
            assert!((g0 - exact).norm() < 1e-10, "k = {k}");
        }
    }

    #[test]
    fn filon_matches_exact_for_linear() {
        // f(y) = y on [0, 1]
        let n = 10;
        let h = 0.1;
        let f: Vec<f64> = (0..=n).map(|j| j as f64 * h).collect();
        let k = 2.3;
        let a = Complex64::new(0.0, -2.0 * k);
        let exact = a.exp() / a - (a.exp() - 1.0) / (a * a);
        assert!((filon_linear(&f, h, k) - exact).norm() < 1e-13);
    }
}
