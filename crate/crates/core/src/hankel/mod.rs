//! Hankel symbols `φ_{x,t}`, their kernel profiles `F(s)` and Nyström
//! discretizations `M[i][j] = √(wᵢwⱼ)·F(sᵢ+sⱼ)` with derivative kernels.

mod assemble;
pub mod layout;
mod report;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scattering::{BoundState, CoefficientGrid, ScatteringData};

pub use assemble::{kernel_profile, nystrom, phi_analytic, BorderedPole, KernelLayout};
pub use report::{singular_value_report, symbol_split_check, SingularValueReport};

/// `G` on the upper half-plane, evaluated pointwise.
pub type ContourFn<'a> = dyn Fn(Complex64) -> Result<Complex64> + Sync + 'a;

/// `ξ_{x,t}(λ) = e^{i(8λ³t + 2λx)}`.
pub fn xi(lambda: Complex64, x: f64, t: f64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    (i * (8.0 * lambda * lambda * lambda * t + 2.0 * lambda * x)).exp()
}

/// The analytic remainder `Φ`, given through `G` on the line `Im λ = h`.
#[derive(Clone, Copy)]
pub struct AnalyticPart<'a> {
    pub g: &'a ContourFn<'a>,
    pub h: f64,
}

impl std::fmt::Debug for AnalyticPart<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnalyticPart").field("h", &self.h).finish_non_exhaustive()
    }
}

/// `φ(k) = Σₙ cₙ ξ(iκₙ)/(ik + κₙ) + R(k)ξ(k)`, optionally plus `Φ(k)`.
#[derive(Debug, Clone)]
pub struct HankelSymbol<'a> {
    pub x: f64,
    pub t: f64,
    pub pole_terms: Vec<BoundState>,
    pub reflection: Option<&'a CoefficientGrid>,
    pub analytic_part: Option<AnalyticPart<'a>>,
}

impl<'a> HankelSymbol<'a> {
    /// `ξ_{x,t}(iκ) = e^{8κ³t − 2κx}`.
    pub fn pole_weight(&self, kappa: f64) -> f64 {
        (8.0 * kappa.powi(3) * self.t - 2.0 * kappa * self.x).exp()
    }

    pub fn xi(&self, lambda: Complex64) -> Complex64 {
        xi(lambda, self.x, self.t)
    }

    /// Same data at another point.
    pub fn at(&self, x: f64, t: f64) -> Self {
        Self { x, t, ..self.clone() }
    }

    /// Pole and reflection terms of the symbol at real `k`.
    pub fn eval(&self, k: f64) -> Complex64 {
        let ik = Complex64::new(0.0, k);
        let poles: Complex64 = self
            .pole_terms
            .iter()
            .map(|b| b.c * self.pole_weight(b.kappa) / (ik + b.kappa))
            .sum();
        let refl = self.reflection.map_or(Complex64::new(0.0, 0.0), |g| {
            g.interpolator().eval(g.positive_r(), k) * self.xi(Complex64::new(k, 0.0))
        });
        poles + refl
    }

    /// Attach `Φ` given by `G` on `ℝ + ih`; requires `h` above every pole.
    pub fn with_analytic(mut self, g: &'a ContourFn<'a>, h: f64, pole_heights: &[f64]) -> Result<Self> {
        let top = pole_heights.iter().copied().fold(0.0, f64::max);
        if !(h > top) {
            return Err(Error::InvalidInput(format!("contour height {h} must exceed max pole height {top}")));
        }
        self.analytic_part = Some(AnalyticPart { g, h });
        Ok(self)
    }

    pub fn kappa_max(&self) -> f64 {
        self.pole_terms.iter().map(|b| b.kappa).fold(0.0, f64::max)
    }

    pub fn has_reflection(&self) -> bool {
        self.reflection.is_some_and(|g| g.r.iter().any(|r| r.norm() > 0.0))
    }
}

fn symbol_from(sd: &ScatteringData, x: f64, t: f64) -> Result<HankelSymbol<'_>> {
    if !(t >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidInput(format!("symbol needs finite x and t >= 0, got ({x}, {t})")));
    }
    Ok(HankelSymbol {
        x,
        t,
        pole_terms: sd.bound_states.clone(),
        reflection: Some(&sd.coeffs),
        analytic_part: None,
    })
}

/// Symbol of the full-line data.
pub fn assemble_symbol(sd: &ScatteringData, x: f64, t: f64) -> Result<HankelSymbol<'_>> {
    symbol_from(sd, x, t)
}

/// Symbol `φ₊` of right-restricted data.
pub fn symbol_plus(sd_plus: &ScatteringData, x: f64, t: f64) -> Result<HankelSymbol<'_>> {
    symbol_from(sd_plus, x, t)
}

/// Nyström and oscillatory-quadrature parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizationParams {
    /// Half-line length; `30 + 10·max(1, 4κ³t)` when absent.
    pub l_s: Option<f64>,
    pub n_quad: usize,
    /// Reflection data is cut off past the last `k` where `|R|` exceeds
    /// this; it should sit above the noise level of the scattering data.
    pub r_floor: f64,
    /// Phase change per oscillatory panel, radians.
    pub phase_step: f64,
    pub max_panel: f64,
    /// Bound on `|F(2L_s)|`.
    pub tail_cut: f64,
    /// Truncation tolerance on the damped contour.
    pub contour_tol: f64,
    /// Upper limit of the undamped contour at `t = 0`.
    pub contour_k_max: f64,
    pub kernel_tol: f64,
    pub kernel_imag_tol: f64,
}

impl Default for DiscretizationParams {
    fn default() -> Self {
        Self {
            l_s: None,
            n_quad: 96,
            r_floor: 1e-8,
            phase_step: 15.0,
            max_panel: 0.5,
            tail_cut: 1e-9,
            contour_tol: 1e-14,
            contour_k_max: 40.0,
            kernel_tol: 1e-8,
            kernel_imag_tol: 1e-9,
        }
    }
}

impl DiscretizationParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, v: f64| Error::InvalidInput(format!("discretization.{field} = {v} must be positive"));
        if self.n_quad < 8 {
            return Err(Error::InvalidInput(format!("discretization.n_quad = {} must be >= 8", self.n_quad)));
        }
        if let Some(l) = self.l_s {
            if !(l > 0.0) {
                return Err(bad("l_s", l));
            }
        }
        for (name, v) in [
            ("r_floor", self.r_floor),
            ("phase_step", self.phase_step),
            ("max_panel", self.max_panel),
            ("tail_cut", self.tail_cut),
            ("contour_tol", self.contour_tol),
            ("contour_k_max", self.contour_k_max),
            ("kernel_tol", self.kernel_tol),
            ("kernel_imag_tol", self.kernel_imag_tol),
        ] {
            if !(v > 0.0) {
                return Err(bad(name, v));
            }
        }
        Ok(())
    }

    /// Explicit `L_s`, else [`default_l_s`]. Layouts grow a default `L_s`
    /// up to fourfold while `|F(2L_s)|` exceeds the tail cut.
    pub fn l_s_for(&self, sym: &HankelSymbol<'_>) -> f64 {
        self.l_s.unwrap_or_else(|| default_l_s(sym.kappa_max(), sym.t))
    }
}

pub fn default_l_s(kappa_max: f64, t: f64) -> f64 {
    30.0 + 10.0 * f64::max(1.0, 4.0 * kappa_max.powi(3) * t)
}

/// Derivative multi-order: `m` in `x`, `n` in `t`.
pub type Order = (u32, u32);

/// Nyström discretization on `[0, L_s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelDiscretization {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub m: Matrix<f64>,
    pub deriv_matrices: BTreeMap<Order, Matrix<f64>>,
    pub l_s: f64,
}

impl HankelDiscretization {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn deriv(&self, order: Order) -> Option<&Matrix<f64>> {
        if order == (0, 0) {
            Some(&self.m)
        } else {
            self.deriv_matrices.get(&order)
        }
    }
}

/// Kernel values `F(s)` at the requested nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelProfile {
    pub s_nodes: Vec<f64>,
    pub f_values: Vec<f64>,
    /// `max ξ(iκ)·c` over the pole terms; `|F(s)|` past the nodes is
    /// bounded by this times `e^{−κ_min s}` plus the reflection part.
    pub tail_bound: f64,
    pub imag_residual: f64,
    pub error_estimate: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::KGridSpec;

    #[test]
    fn zero_data_gives_zero_symbol() {
        let sd = ScatteringData::empty(&KGridSpec::default());
        let sym = assemble_symbol(&sd, 0.3, 0.2).unwrap();
        assert!(!sym.has_reflection());
        assert_eq!(sym.eval(1.7), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn single_pole_symbol() {
        let mut sd = ScatteringData::empty(&KGridSpec::default());
        sd.bound_states.push(BoundState { kappa: 1.0, c: 2.0 });
        let sym = assemble_symbol(&sd, 0.0, 0.0).unwrap();
        let k = 0.7;
        let want = 2.0 / Complex64::new(1.0, k);
        assert!((sym.eval(k) - want).norm() < 1e-15);
    }

    #[test]
    fn time_weight() {
        let mut sd = ScatteringData::empty(&KGridSpec::default());
        sd.bound_states.push(BoundState { kappa: 1.0, c: 1.0 });
        let sym = symbol_plus(&sd, 0.0, 1.0).unwrap();
        assert!((sym.pole_weight(1.0) - 8f64.exp()).abs() < 1e-12);
        assert!((sym.xi(Complex64::new(0.0, 1.0)).re - 8f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn negative_time_rejected() {
        let sd = ScatteringData::empty(&KGridSpec::default());
        assert!(assemble_symbol(&sd, 0.0, -0.1).is_err());
    }

    #[test]
    fn contour_height_must_clear_poles() {
        let sd = ScatteringData::empty(&KGridSpec::default());
        let g = |_: Complex64| Ok(Complex64::new(0.0, 0.0));
        let sym = assemble_symbol(&sd, 0.0, 0.1).unwrap();
        assert!(sym.clone().with_analytic(&g, 0.5, &[0.7]).is_err());
        assert!(sym.with_analytic(&g, 1.5, &[0.7]).is_ok());
    }
}
