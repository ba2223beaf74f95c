//! Independent reference solvers used to validate the pipeline. None of
//! these share numerical code with the scattering/Hankel/determinant path.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::Potential;

/// `−2κ² sech²(κ(x − 4κ²t) − x0)`.
pub fn soliton_exact(kappa: f64, x0: f64, x: f64, t: f64) -> f64 {
    let s = 1.0 / (kappa * (x - 4.0 * kappa * kappa * t) - x0).cosh();
    -2.0 * kappa * kappa * s * s
}

/// Phase offset `x0` of the 1-soliton generated by a bound state `(κ, c)`.
pub fn soliton_offset(kappa: f64, c: f64) -> f64 {
    0.5 * (c / (2.0 * kappa)).ln()
}

/// Layers `[breakpoints[i], breakpoints[i+1])` carrying `values[i]`; zero
/// outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstantPotential {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl PiecewiseConstantPotential {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::InvalidInput(
                "need one more breakpoint than layer values".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("breakpoints must increase".into()));
        }
        if values.iter().chain(&breakpoints).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("values must be finite".into()));
        }
        Ok(Self { breakpoints, values })
    }

    /// Midpoint sampling of `q` on `n` equal layers of `[a, b]`.
    pub fn sample(q: &Potential, a: f64, b: f64, n: usize) -> Result<Self> {
        let h = (b - a) / n as f64;
        let bps = (0..=n).map(|i| a + h * i as f64).collect();
        let vals = (0..n).map(|i| q.evaluate(a + h * (i as f64 + 0.5))).collect();
        Self::new(bps, vals)
    }
}

fn layer_step(psi: Complex64, dpsi: Complex64, k: f64, v: f64, d: f64) -> (Complex64, Complex64) {
    let mu = Complex64::new(k * k - v, 0.0).sqrt();
    let c = (mu * d).cos();
    let s_over_mu = if mu.norm() * d.abs() < 1e-8 {
        Complex64::new(d, 0.0)
    } else {
        (mu * d).sin() / mu
    };
    let s_times_mu = (mu * d).sin() * mu;
    (c * psi + s_over_mu * dpsi, -s_times_mu * psi + c * dpsi)
}

/// `(T, R, L)` at real `k ≠ 0` by products of exact layer propagators.
///
/// `R` is the reflection coefficient for waves incident from +∞ and `L` for
/// waves incident from −∞.
pub fn transfer_matrix_scattering(p: &PiecewiseConstantPotential, k: f64) -> Result<(Complex64, Complex64, Complex64)> {
    if k == 0.0 || !k.is_finite() {
        return Err(Error::InvalidInput("k must be real and nonzero".into()));
    }
    let ik = Complex64::new(0.0, k);
    let bps = &p.breakpoints;
    let (xa, xb) = (bps[0], bps[bps.len() - 1]);

    // solution ~ e^{ikx} right of the layers, carried to the left edge
    let mut psi = (ik * xb).exp();
    let mut dpsi = ik * psi;
    for i in (0..p.values.len()).rev() {
        let d = bps[i] - bps[i + 1];
        (psi, dpsi) = layer_step(psi, dpsi, k, p.values[i], d);
    }
    let a_in = (-ik * xa).exp() * (psi + dpsi / ik) * 0.5;
    let b_in = (ik * xa).exp() * (psi - dpsi / ik) * 0.5;
    let t = 1.0 / a_in;
    let l = b_in / a_in;

    // solution ~ e^{−ikx} left of the layers, carried to the right edge
    let mut psi = (-ik * xa).exp();
    let mut dpsi = -ik * psi;
    for i in 0..p.values.len() {
        let d = bps[i + 1] - bps[i];
        (psi, dpsi) = layer_step(psi, dpsi, k, p.values[i], d);
    }
    let a_out = (ik * xb).exp() * (psi - dpsi / ik) * 0.5;
    let b_out = (-ik * xb).exp() * (psi + dpsi / ik) * 0.5;
    let r = b_out / a_out;
    Ok((t, r, l))
}

/// Number of eigenvalues below `lambda` of the symmetric tridiagonal matrix
/// with diagonal `d` and constant off-diagonal `e`.
fn sturm_count(d: &[f64], e: f64, lambda: f64) -> usize {
    let mut count = 0;
    let mut p = 1.0;
    for (i, &di) in d.iter().enumerate() {
        p = if i == 0 { di - lambda } else { di - lambda - e * e / p };
        if p == 0.0 {
            p = -1e-300;
        }
        if p < 0.0 {
            count += 1;
        }
    }
    count
}

fn negative_eigs_fd(q: &Potential, domain: (f64, f64), n: usize) -> Vec<f64> {
    let (a, b) = domain;
    let h = (b - a) / (n + 1) as f64;
    let d: Vec<f64> = (1..=n)
        .map(|i| {
            let x = a + h * i as f64;
            2.0 / (h * h) + q.evaluate_mid(x)
        })
        .collect();
    let e = -1.0 / (h * h);
    let lower = d.iter().fold(f64::INFINITY, |m, &v| m.min(v)) - 2.0 * e.abs();
    let count = sturm_count(&d, e, 0.0);
    (0..count)
        .map(|j| {
            let (mut lo, mut hi) = (lower, 0.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if sturm_count(&d, e, mid) > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-14 * (1.0 + lo.abs()) {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Negative eigenvalues (ascending) of `−∂ₓ² + q` with Dirichlet conditions on
/// `domain`, from second differences on `n_grid` and `2·n_grid` interior
/// nodes combined by Richardson extrapolation.
pub fn schrodinger_eigs(q: &Potential, domain: (f64, f64), n_grid: usize) -> Result<Vec<f64>> {
    if !(domain.1 > domain.0) || n_grid < 8 {
        return Err(Error::InvalidInput("need a nonempty domain and n_grid ≥ 8".into()));
    }
    let coarse = negative_eigs_fd(q, domain, n_grid);
    let fine = negative_eigs_fd(q, domain, 2 * n_grid + 1);
    let out = fine
        .iter()
        .enumerate()
        .map(|(j, &f)| match coarse.get(j) {
            Some(&c) => (4.0 * f - c) / 3.0,
            None => f,
        })
        .filter(|&v| v < 0.0)
        .collect();
    Ok(out)
}

/// Result of [`split_step_kdv`].
#[derive(Debug, Clone, PartialEq)]
pub struct SplitStepResult {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    /// `∫u dx` at the start and the end of the run.
    pub mass: (f64, f64),
}

/// Periodic Fourier solution of `u_t − 6uu_x + u_xxx = 0` by Strang splitting:
/// exact linear flow in frequency space around an RK4 step of `u_t = 3(u²)_x`
/// with 2/3 dealiasing.
pub fn split_step_kdv(
    q: &Potential,
    t_final: f64,
    domain: (f64, f64),
    n_modes: usize,
    dt: f64,
) -> Result<SplitStepResult> {
    let (a, b) = domain;
    if !(b > a) || n_modes < 16 || !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(Error::InvalidInput("invalid split-step parameters".into()));
    }
    let n = n_modes;
    let len = b - a;
    let dx = len / n as f64;
    let x: Vec<f64> = (0..n).map(|j| a + dx * j as f64).collect();
    let wave: Vec<f64> = (0..n)
        .map(|j| {
            let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            2.0 * std::f64::consts::PI * m / len
        })
        .collect();
    let cut = (n as f64 / 3.0).floor();
    let keep: Vec<bool> = (0..n)
        .map(|j| {
            let m = if j <= n / 2 { j as f64 } else { n as f64 - j as f64 };
            m <= cut
        })
        .collect();

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let scale = 1.0 / n as f64;

    let mut uh: Vec<Complex64> = x.iter().map(|&xi| Complex64::new(q.evaluate(xi), 0.0)).collect();
    let mass0 = uh.iter().map(|v| v.re).sum::<f64>() * dx;
    let norm0 = uh.iter().map(|v| v.re * v.re).sum::<f64>().sqrt().max(1e-300);
    fwd.process(&mut uh);

    let nonlinear = |vh: &[Complex64]| -> Vec<Complex64> {
        let mut phys: Vec<Complex64> = vh.to_vec();
        inv.process(&mut phys);
        let mut sq: Vec<Complex64> = phys.iter().map(|v| Complex64::new((v.re * scale).powi(2), 0.0)).collect();
        fwd.process(&mut sq);
        sq.iter()
            .enumerate()
            .map(|(j, s)| {
                if keep[j] {
                    Complex64::new(0.0, 3.0 * wave[j]) * s
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect()
    };

    let steps = (t_final / dt).ceil() as usize;
    let h = if steps > 0 { t_final / steps as f64 } else { 0.0 };
    let half: Vec<Complex64> = wave.iter().map(|&kk| Complex64::new(0.0, kk.powi(3) * 0.5 * h).exp()).collect();
    for step in 0..steps {
        for (v, e) in uh.iter_mut().zip(&half) {
            *v *= e;
        }
        let k1 = nonlinear(&uh);
        let s1: Vec<_> = uh.iter().zip(&k1).map(|(u, k)| u + k * (0.5 * h)).collect();
        let k2 = nonlinear(&s1);
        let s2: Vec<_> = uh.iter().zip(&k2).map(|(u, k)| u + k * (0.5 * h)).collect();
        let k3 = nonlinear(&s2);
        let s3: Vec<_> = uh.iter().zip(&k3).map(|(u, k)| u + k * h).collect();
        let k4 = nonlinear(&s3);
        for j in 0..n {
            uh[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (h / 6.0);
        }
        for (v, e) in uh.iter_mut().zip(&half) {
            *v *= e;
        }
        if step % 64 == 0 || step + 1 == steps {
            let norm = (uh.iter().map(|v| v.norm_sqr()).sum::<f64>() * scale).sqrt();
            let growth = norm / norm0;
            if !growth.is_finite() || growth > 1e3 {
                return Err(Error::SplitStepBlowUp {
                    t: (step + 1) as f64 * h,
                    growth,
                });
            }
        }
    }
    inv.process(&mut uh);
    let u: Vec<f64> = uh.iter().map(|v| v.re * scale).collect();
    let mass1 = u.iter().sum::<f64>() * dx;
    Ok(SplitStepResult {
        x,
        u,
        mass: (mass0, mass1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soliton_closed_form() {
        assert_eq!(soliton_exact(1.0, 0.0, 0.0, 0.0), -2.0);
        assert!((soliton_exact(1.0, 0.0, 4.0, 1.0) + 2.0).abs() < 1e-15);
    }

    #[test]
    fn transfer_matrix_zero_and_unitarity() {
        let p = PiecewiseConstantPotential::new(vec![0.0, 1.0], vec![0.0]).unwrap();
        let (t, r, l) = transfer_matrix_scattering(&p, 0.7).unwrap();
        assert!((t - 1.0).norm() < 1e-14 && r.norm() < 1e-14 && l.norm() < 1e-14);
        let p = PiecewiseConstantPotential::new(vec![0.0, 2.0], vec![-1.0]).unwrap();
        for k in [0.1, 0.8, 3.0] {
            let (t, r, l) = transfer_matrix_scattering(&p, k).unwrap();
            assert!((r.norm_sqr() + t.norm_sqr() - 1.0).abs() < 1e-13);
            assert!((l.norm_sqr() + t.norm_sqr() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn transfer_matrix_square_well_closed_form() {
        // single well −V on [0, a]: classical closed form for T
        let (v, a, k) = (1.0f64, 2.0f64, 0.8f64);
        let p = PiecewiseConstantPotential::new(vec![0.0, a], vec![-v]).unwrap();
        let (t, _, _) = transfer_matrix_scattering(&p, k).unwrap();
        let mu = (k * k + v).sqrt();
        let denom = Complex64::new((mu * a).cos(), -(k * k + mu * mu) / (2.0 * k * mu) * (mu * a).sin());
        let expected = Complex64::new(0.0, -k * a).exp() / denom;
        assert!((t - expected).norm() < 1e-13);
    }

    #[test]
    fn eigs_of_free_and_solvable_wells() {
        assert!(schrodinger_eigs(&Potential::zero(), (-30.0, 30.0), 512).unwrap().is_empty());
        let e = schrodinger_eigs(&Potential::sech_well(-2.0, 1.0, 0.0), (-30.0, 30.0), 4096).unwrap();
        assert_eq!(e.len(), 1);
        assert!((e[0] + 1.0).abs() < 1e-6, "{e:?}");
    }

    #[test]
    fn split_step_zero_stays_zero() {
        let r = split_step_kdv(&Potential::zero(), 0.1, (-20.0, 20.0), 128, 1e-3).unwrap();
        assert!(r.u.iter().all(|v| *v == 0.0));
    }
}
