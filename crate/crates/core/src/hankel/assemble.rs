//! Kernel assembly. With `E_{ik} = √wᵢ e^{iλₖsᵢ}` every continuous part of the
//! kernel matrix is `(1/π) Re(E diag(d) Eᵀ)` for quadrature coefficients `d`
//! along `k ≥ 0` (or `λ = u + ih`, `u ≥ 0`); pole terms are rank one.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::layout::{panel_nodes, phase_breaks};
use super::{xi, ContourFn, DiscretizationParams, HankelDiscretization, HankelSymbol, KernelProfile, Order};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::quadrature::GaussLegendre;
use crate::scattering::BoundState;

const I: Complex64 = Complex64::new(0.0, 1.0);
const CHUNK: usize = 512;

/// `(2iλ)^m (8iλ³)^n`.
fn multiplier(lambda: Complex64, (m, n): Order) -> Complex64 {
    (2.0 * I * lambda).powu(m) * (8.0 * I * lambda * lambda * lambda).powu(n)
}

/// `(−2κ)^m (8κ³)^n`.
fn pole_multiplier(kappa: f64, (m, n): Order) -> f64 {
    (-2.0 * kappa).powi(m as i32) * (8.0 * kappa.powi(3)).powi(n as i32)
}

fn degree((m, n): Order) -> i32 {
    (m + 3 * n) as i32
}

/// Samples along `λ = u + ih`, `u ∈ [0, U]`.
#[derive(Debug, Clone)]
struct Block {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    h: f64,
    values: Vec<Complex64>,
    /// `(U, value at U)` for the leading endpoint correction of `∫_U^∞`.
    end: Option<(f64, Complex64)>,
}

impl Block {
    fn lambda(&self, u: f64) -> Complex64 {
        Complex64::new(u, self.h)
    }

    fn coefficients(&self, x: f64, t: f64, order: Order) -> Vec<Complex64> {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.values)
            .map(|((&u, &w), &v)| {
                let l = self.lambda(u);
                v * xi(l, x, t) * multiplier(l, order) * (w / PI)
            })
            .collect()
    }

    /// `−f(U)e^{iφ(U)}/(iφ'(U))` with `φ = 8λ³t + 2λx + λs`, or zero where
    /// `φ'` is too small for the expansion.
    fn end_term(&self, x: f64, t: f64, s: f64, order: Order) -> Complex64 {
        let Some((u, v)) = self.end else {
            return Complex64::new(0.0, 0.0);
        };
        let l = self.lambda(u);
        let dphi = 24.0 * l * l * t + 2.0 * x + s;
        if dphi.norm() < 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        -v * multiplier(l, order) * xi(l, x, t) * (I * l * s).exp() / (I * dphi)
    }

    /// Quadrature of `(1/2π)∫ f e^{iλs}` over the full line, using the
    /// reflection `λ ↦ −λ̄` with `conj_values` at the mirrored nodes.
    fn kernel(&self, x: f64, t: f64, s: f64, conj_values: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, (&u, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let l = self.lambda(u);
            let lm = Complex64::new(-u, self.h);
            acc += w * (self.values[j] * xi(l, x, t) * (I * l * s).exp() + conj_values[j] * xi(lm, x, t) * (I * lm * s).exp());
        }
        let end = self.end_term(x, t, s, (0, 0));
        acc / (2.0 * PI) + Complex64::new(end.re / PI, 0.0)
    }
}

/// Adds `(1/π) Re Σₖ dₖ E_{ik}E_{jk}` to `out[o]` for each coefficient set.
fn accumulate(s: &[f64], sw: &[f64], h: f64, nodes: &[f64], coeffs: &[Vec<Complex64>], out: &mut [DMatrix<f64>]) {
    let n = s.len();
    let starts: Vec<usize> = (0..nodes.len()).step_by(CHUNK).collect();
    let partial = starts
        .par_iter()
        .map(|&start| {
            let end = (start + CHUNK).min(nodes.len());
            let c = end - start;
            // p = [C | S], C_{ik} = √wᵢ e^{−h sᵢ} cos(u sᵢ)
            let mut p = DMatrix::<f64>::zeros(n, 2 * c);
            for j in 0..c {
                let u = nodes[start + j];
                for i in 0..n {
                    let amp = sw[i] * (-h * s[i]).exp();
                    let (sn, cs) = (u * s[i]).sin_cos();
                    p[(i, j)] = amp * cs;
                    p[(i, c + j)] = amp * sn;
                }
            }
            let pt = p.transpose();
            let mut z = DMatrix::<f64>::zeros(n, 2 * c);
            let mut acc: Vec<DMatrix<f64>> = Vec::with_capacity(coeffs.len());
            for cf in coeffs {
                for j in 0..c {
                    let d = cf[start + j];
                    let (dr, di) = (d.re, d.im);
                    for i in 0..n {
                        let (cv, sv) = (p[(i, j)], p[(i, c + j)]);
                        z[(i, j)] = cv * dr - sv * di;
                        z[(i, c + j)] = -cv * di - sv * dr;
                    }
                }
                acc.push(&z * &pt);
            }
            acc
        })
        .reduce(
            Vec::new,
            |mut a, b| {
                if a.is_empty() {
                    return b;
                }
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    for (o, m) in out.iter_mut().zip(partial) {
        *o += m;
    }
}

/// Quadrature layout for a symbol at fixed `t`, valid for `x` in a window.
///
/// Panels, nodes and the samples of `R` and `G` are fixed at construction, so
/// matrices at different `x` reuse them.
#[derive(Debug, Clone)]
pub struct KernelLayout {
    t: f64,
    window: (f64, f64),
    poles: Vec<BoundState>,
    blocks: Vec<Block>,
    s_nodes: Vec<f64>,
    s_weights: Vec<f64>,
    l_s: f64,
}

impl KernelLayout {
    /// Build the layout for `sym` over `x ∈ [x_lo, x_hi]` at `sym.t`; `orders`
    /// are the derivative kernels the layout must resolve.
    pub fn new(sym: &HankelSymbol<'_>, window: (f64, f64), params: &DiscretizationParams, orders: &[Order]) -> Result<Self> {
        params.validate()?;
        let (x_lo, x_hi) = window;
        if !(x_lo <= x_hi) {
            return Err(Error::InvalidInput(format!("empty x window [{x_lo}, {x_hi}]")));
        }
        let mut l_s = params.l_s_for(sym);
        loop {
            match Self::build(sym, window, l_s, params, orders) {
                Err(Error::TailCut { .. }) if params.l_s.is_none() && l_s < 4.0 * params.l_s_for(sym) => l_s *= 1.25,
                other => return other,
            }
        }
    }

    fn build(sym: &HankelSymbol<'_>, window: (f64, f64), l_s: f64, params: &DiscretizationParams, orders: &[Order]) -> Result<Self> {
        let (x_lo, x_hi) = window;
        let t = sym.t;
        let rule = GaussLegendre::<f64>::new(params.n_quad);
        let (s_nodes, s_weights) = rule.on_interval(0.0, l_s);
        let max_deg = orders.iter().copied().map(degree).max().unwrap_or(0).max(0);
        let mut blocks = Vec::new();
        if let Some(block) = reflection_block(sym, window, l_s, params) {
            blocks.push(block);
        }
        if let Some(ap) = sym.analytic_part {
            blocks.push(contour_block(ap.g, ap.h, t, window, l_s, params, max_deg)?);
        }
        let layout = Self {
            t,
            window,
            poles: sym.pole_terms.clone(),
            blocks,
            s_nodes,
            s_weights,
            l_s,
        };
        for x in [x_lo, x_hi] {
            let tail = layout.kernel(x, 2.0 * l_s).norm();
            if tail > params.tail_cut {
                return Err(Error::TailCut {
                    value: tail,
                    cut: params.tail_cut,
                    l_s,
                });
            }
        }
        Ok(layout)
    }

    pub fn l_s(&self) -> f64 {
        self.l_s
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    /// Number of continuous quadrature nodes.
    pub fn node_count(&self) -> usize {
        self.blocks.iter().map(|b| b.nodes.len()).sum()
    }

    /// `F(s)` at `x` (complex; the imaginary part is a symmetry residual).
    pub fn kernel(&self, x: f64, s: f64) -> Complex64 {
        let poles: f64 = self
            .poles
            .iter()
            .map(|b| b.c * (8.0 * b.kappa.powi(3) * self.t - 2.0 * b.kappa * x).exp() * (-b.kappa * s).exp())
            .sum();
        let cont: Complex64 = self
            .blocks
            .iter()
            .map(|b| {
                let mirrored: Vec<Complex64> = b.values.iter().map(|v| v.conj()).collect();
                b.kernel(x, self.t, s, &mirrored)
            })
            .sum();
        poles + cont
    }

    /// Nyström matrices at `x` for `(0,0)` and each order in `orders`.
    pub fn discretize(&self, x: f64, orders: &[Order]) -> Result<HankelDiscretization> {
        Ok(self.discretize_with(x, orders, |_| true)?.0)
    }

    /// As [`discretize`](Self::discretize), but pole terms with weight
    /// `c·ξ(iκ) ≥ 1` are left out of the matrices and returned separately.
    pub fn discretize_bordered(&self, x: f64, orders: &[Order]) -> Result<(HankelDiscretization, Vec<BorderedPole>)> {
        self.discretize_with(x, orders, |w| w < 1.0)
    }

    fn discretize_with(&self, x: f64, orders: &[Order], keep: impl Fn(f64) -> bool) -> Result<(HankelDiscretization, Vec<BorderedPole>)> {
        let mut all: Vec<Order> = vec![(0, 0)];
        for &o in orders {
            if !all.contains(&o) {
                all.push(o);
            }
        }
        let n = self.s_nodes.len();
        let sw: Vec<f64> = self.s_weights.iter().map(|w| w.sqrt()).collect();
        let mut mats = vec![DMatrix::<f64>::zeros(n, n); all.len()];
        for block in &self.blocks {
            let coeffs: Vec<Vec<Complex64>> = all.iter().map(|&o| block.coefficients(x, self.t, o)).collect();
            accumulate(&self.s_nodes, &sw, block.h, &block.nodes, &coeffs, &mut mats);
            if block.end.is_some() {
                for (m, &o) in mats.iter_mut().zip(&all) {
                    for i in 0..n {
                        for j in 0..=i {
                            let v = block.end_term(x, self.t, self.s_nodes[i] + self.s_nodes[j], o).re / PI * sw[i] * sw[j];
                            m[(i, j)] += v;
                            if i != j {
                                m[(j, i)] += v;
                            }
                        }
                    }
                }
            }
        }
        let mut bordered = Vec::new();
        for b in &self.poles {
            let weight = b.c * (8.0 * b.kappa.powi(3) * self.t - 2.0 * b.kappa * x).exp();
            let v: Vec<f64> = (0..n).map(|i| sw[i] * (-b.kappa * self.s_nodes[i]).exp()).collect();
            if !keep(weight) {
                bordered.push(BorderedPole {
                    kappa: b.kappa,
                    weight,
                    v,
                });
                continue;
            }
            for (m, &o) in mats.iter_mut().zip(&all) {
                let a = weight * pole_multiplier(b.kappa, o);
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] += a * v[i] * v[j];
                    }
                }
            }
        }
        let mut converted = mats
            .into_iter()
            .map(|m| Matrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)])));
        let m = converted.next().expect("order (0,0) present");
        let deriv_matrices: BTreeMap<Order, Matrix<f64>> = all[1..].iter().copied().zip(converted).collect();
        if !m.as_slice().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite kernel matrix at x = {x}")));
        }
        let d = HankelDiscretization {
            nodes: self.s_nodes.clone(),
            weights: self.s_weights.clone(),
            m,
            deriv_matrices,
            l_s: self.l_s,
        };
        Ok((d, bordered))
    }
}

/// A pole term `w·v vᵀ` kept out of the Nyström matrix, `w = c·ξ(iκ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BorderedPole {
    pub kappa: f64,
    pub weight: f64,
    /// `√wᵢ e^{−κsᵢ}`.
    pub v: Vec<f64>,
}

/// Real-line block up to the largest `k` with `|R(k)|` above the floor,
/// rounded up to a panel break of the coefficient grid.
fn reflection_block(
    sym: &HankelSymbol<'_>,
    window: (f64, f64),
    l_s: f64,
    params: &DiscretizationParams,
) -> Option<Block> {
    let grid = sym.reflection?;
    let k = grid.positive_k();
    let r = grid.positive_r();
    let last = (0..k.len()).rev().find(|&i| r[i].norm() > params.r_floor)?;
    let grid_breaks = grid.layout.breaks();
    let k_max = *grid_breaks.last().unwrap_or(&0.0);
    let k_end = grid_breaks.iter().copied().find(|&b| b > k[last]).unwrap_or(k_max);
    let t = sym.t;
    let breaks = phase_breaks(
        0.0,
        k_end,
        |u| 24.0 * t * u * u,
        |u| 48.0 * t * u,
        (2.0 * window.0, 2.0 * window.1 + 2.0 * l_s),
        params.phase_step,
        params.max_panel,
        &grid_breaks,
    );
    let (nodes, weights) = panel_nodes(&breaks);
    let interp = grid.interpolator();
    let values = nodes.iter().map(|&u| interp.eval(r, u)).collect();
    let end = (k_end >= k_max).then(|| (k_end, interp.eval(r, k_end * (1.0 - 1e-14))));
    Some(Block {
        nodes,
        weights,
        h: 0.0,
        values,
        end,
    })
}

/// `ln` of the largest modulus of `ξ(u + ih)(2|λ|)^deg` for `x ≥ x_lo`.
fn contour_log_envelope(u: f64, h: f64, t: f64, x_lo: f64, deg: i32) -> f64 {
    -24.0 * u * u * h * t + 8.0 * h.powi(3) * t - 2.0 * h * x_lo + deg as f64 * (2.0 * (u + h)).max(1.0).ln()
}

/// Smallest `U` where the damped integrand is below `tol` relative to `g_scale`.
fn contour_extent(h: f64, t: f64, x_lo: f64, deg: i32, g_scale: f64, tol: f64) -> f64 {
    let target = (tol / g_scale.max(1e-300)).ln();
    let mut u = 0.5;
    while contour_log_envelope(u, h, t, x_lo, deg) > target && u < 1e4 {
        u *= 1.05;
    }
    u
}

fn contour_block(
    g: &ContourFn<'_>,
    h: f64,
    t: f64,
    window: (f64, f64),
    l_s: f64,
    params: &DiscretizationParams,
    max_deg: i32,
) -> Result<Block> {
    let (x_lo, x_hi) = window;
    if t == 0.0 && x_lo <= 0.0 {
        return Err(Error::ContourRefused(format!("t = 0 needs x > 0, window starts at {x_lo}")));
    }
    let probe: f64 = [0.0, 1.0, 2.0, 4.0]
        .iter()
        .map(|&u| g(Complex64::new(u, h)).map(|v| v.norm()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let g_scale = 2.0 * probe + 1e-300;
    let (u_end, has_end) = if t > 0.0 {
        (contour_extent(h, t, x_lo, max_deg, g_scale, params.contour_tol), false)
    } else {
        (params.contour_k_max, true)
    };
    let shift = 24.0 * t * h * h;
    let breaks = phase_breaks(
        0.0,
        u_end,
        |u| 24.0 * t * u * u,
        |u| 48.0 * t * u,
        (2.0 * x_lo - shift, 2.0 * x_hi + 2.0 * l_s - shift),
        params.phase_step,
        params.max_panel,
        &[],
    );
    let (nodes, weights) = panel_nodes(&breaks);
    let values: Vec<Complex64> = nodes
        .par_iter()
        .map(|&u| g(Complex64::new(u, h)))
        .collect::<Result<_>>()?;
    let end = if has_end {
        Some((u_end, g(Complex64::new(u_end, h))?))
    } else {
        let g_end = values.last().map_or(0.0, |v| v.norm());
        let bound = g_end * contour_log_envelope(u_end, h, t, x_lo, max_deg).exp();
        if bound > params.contour_tol {
            return Err(Error::ContourTruncation {
                bound,
                required: 2.0 * u_end,
            });
        }
        None
    };
    Ok(Block {
        nodes,
        weights,
        h,
        values,
        end,
    })
}

/// Nyström discretization of `sym` at its own `(x, t)`.
pub fn nystrom(sym: &HankelSymbol<'_>, params: &DiscretizationParams, deriv_orders: &[Order]) -> Result<HankelDiscretization> {
    KernelLayout::new(sym, (sym.x, sym.x), params, deriv_orders)?.discretize(sym.x, deriv_orders)
}

/// `F(s)` at `s_nodes`, with an error estimate from halving the phase step.
pub fn kernel_profile(sym: &HankelSymbol<'_>, s_nodes: &[f64], params: &DiscretizationParams) -> Result<KernelProfile> {
    let s_top = s_nodes.iter().copied().fold(0.0, f64::max);
    let base = DiscretizationParams {
        l_s: Some(params.l_s_for(sym).max(0.5 * s_top)),
        tail_cut: f64::INFINITY,
        ..params.clone()
    };
    if s_nodes.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::InvalidInput("kernel profile nodes must be positive".into()));
    }
    let coarse = KernelLayout::new(sym, (sym.x, sym.x), &base, &[])?;
    let fine = KernelLayout::new(
        sym,
        (sym.x, sym.x),
        &DiscretizationParams {
            phase_step: 0.5 * base.phase_step,
            max_panel: 0.5 * base.max_panel,
            ..base.clone()
        },
        &[],
    )?;
    let mut f_values = Vec::with_capacity(s_nodes.len());
    let mut imag_residual = 0.0f64;
    let mut error_estimate = 0.0f64;
    for &s in s_nodes {
        let a = coarse.kernel(sym.x, s);
        let b = fine.kernel(sym.x, s);
        let est = (a - b).norm();
        if est > params.kernel_tol {
            return Err(Error::KernelAccuracy { s, estimate: est });
        }
        imag_residual = imag_residual.max(b.im.abs());
        error_estimate = error_estimate.max(est);
        f_values.push(b.re);
    }
    if imag_residual > params.kernel_imag_tol {
        return Err(Error::KernelAccuracy {
            s: f64::NAN,
            estimate: imag_residual,
        });
    }
    let tail_bound = sym.pole_terms.iter().map(|b| b.c * sym.pole_weight(b.kappa)).fold(0.0, f64::max);
    Ok(KernelProfile {
        s_nodes: s_nodes.to_vec(),
        f_values,
        tail_bound,
        imag_residual,
        error_estimate,
    })
}

/// `Φ(k) = −(1/2πi)∫_{ℝ+ih} ξ(λ)G(λ)/(λ − k) dλ` at each `k`.
pub fn phi_analytic(
    g: &ContourFn<'_>,
    h: f64,
    x: f64,
    t: f64,
    k_eval: &[Complex64],
    params: &DiscretizationParams,
) -> Result<Vec<Complex64>> {
    if t < 0.0 {
        return Err(Error::InvalidInput(format!("t = {t} < 0")));
    }
    if t == 0.0 && x <= 0.0 {
        return Err(Error::ContourRefused(format!("t = 0 and x = {x} <= 0: integrand does not decay")));
    }
    let probe = g(Complex64::new(0.0, h))?.norm().max(g(Complex64::new(1.0, h))?.norm());
    let u_end = if t > 0.0 {
        contour_extent(h, t, x, 0, 2.0 * probe + 1e-300, params.contour_tol)
    } else {
        params.contour_k_max
    };
    let shift = 24.0 * t * h * h;
    let half = phase_breaks(0.0, u_end, |u| 24.0 * t * u * u, |u| 48.0 * t * u, (2.0 * x - shift, 2.0 * x - shift), params.phase_step, params.max_panel, &[]);
    let breaks: Vec<f64> = half.iter().rev().map(|u| -u).chain(half.iter().copied().skip(1)).collect();
    let (nodes, weights) = panel_nodes(&breaks);
    let samples: Vec<(Complex64, Complex64)> = nodes
        .par_iter()
        .map(|&u| {
            let l = Complex64::new(u, h);
            g(l).map(|v| (l, v * xi(l, x, t)))
        })
        .collect::<Result<_>>()?;
    if t > 0.0 {
        let bound = samples.last().map_or(0.0, |s| s.1.norm()) + samples.first().map_or(0.0, |s| s.1.norm());
        if bound > params.contour_tol {
            return Err(Error::ContourTruncation {
                bound,
                required: 4.0 * u_end,
            });
        }
    }
    Ok(k_eval
        .iter()
        .map(|&k| {
            let sum: Complex64 = samples.iter().zip(&weights).map(|((l, f), w)| f * *w / (l - k)).sum();
            -sum / (2.0 * PI * I)
        })
        .collect())
}
