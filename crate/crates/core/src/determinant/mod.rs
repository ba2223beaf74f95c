//! Fredholm determinants `det(1 + M)` and the Dyson formula
//! `u(x,t) = −2∂ₓ² log det(1 + H(φ_{x,t}))`.

mod field;
mod study;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel::{
    assemble_symbol, symbol_plus, BorderedPole, ContourFn, DiscretizationParams, HankelDiscretization, HankelSymbol,
    KernelLayout,
};
use crate::linalg::{log_det_positive, Lu, Matrix};
use crate::potential::{Potential, Side};
use crate::scattering::{bound_states_of, scatter, ScatteringData, ScatteringOptions, Source, SplitFunction};

pub use field::{kdv_residual, u_field, FieldMeta, Residual, SolutionField};
pub use study::{
    block_det_variants, smoothing_probe, truncation_study, BlockDetReport, ConvergenceTable, SmoothingRow, DELTA_FLOOR,
};

/// `log det(1 + M)`; the determinant must be positive.
pub fn fredholm_logdet(d: &HankelDiscretization) -> Result<f64> {
    log_det_positive(&d.m.plus_identity())
}

/// How `u` is obtained from the log-determinant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UMethod {
    /// Five-point second difference with one Richardson level.
    FiniteDifference,
    /// `−2[tr(A M'') − tr(A M' A M')]`, `A = (1 + M)⁻¹`.
    TraceFormula,
    /// Trace formula, verified against finite differences.
    Checked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UOptions {
    pub method: UMethod,
    pub h_x: f64,
    pub cross_tol: f64,
}

impl Default for UOptions {
    fn default() -> Self {
        Self {
            method: UMethod::TraceFormula,
            h_x: 1e-3,
            cross_tol: 1e-6,
        }
    }
}

impl UOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.h_x > 0.0) || !(self.cross_tol > 0.0) {
            return Err(Error::InvalidInput("u.h_x and u.cross_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Data for the split assembly `φ₊ + Φ`: right-restricted scattering data
/// and the function `G` continued to the upper half-plane.
pub struct SplitData {
    pub plus: ScatteringData,
    g: Option<Box<ContourFn<'static>>>,
    /// Contour height, above every pole of `G`.
    pub h: f64,
    /// `κₙ` of `q` and `κₙ⁺` of `q₊`.
    pub pole_heights: Vec<f64>,
    /// Full-line data for `t = 0, x ≤ 0`, where `Φ` is not available.
    pub full: Option<ScatteringData>,
}

impl std::fmt::Debug for SplitData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SplitData")
            .field("plus", &self.plus)
            .field("has_g", &self.g.is_some())
            .field("h", &self.h)
            .field("pole_heights", &self.pole_heights)
            .finish_non_exhaustive()
    }
}

fn strict(opts: &ScatteringOptions) -> ScatteringOptions {
    ScatteringOptions {
        shift_on_exceptional: false,
        ..opts.clone()
    }
}

impl SplitData {
    pub fn new(q: &Potential, opts: &ScatteringOptions, with_full: bool) -> Result<Self> {
        let opts = strict(opts);
        let plus = scatter(&q.restrict(Side::Right), Source::RightRestricted, &opts)?;
        Self::with_plus(plus, q, &opts, with_full)
    }

    /// Reuse already computed data of `q₊`.
    pub fn with_plus(plus: ScatteringData, q: &Potential, opts: &ScatteringOptions, with_full: bool) -> Result<Self> {
        let opts = strict(opts);
        let mut heights: Vec<f64> = plus.bound_states.iter().map(|b| b.kappa).collect();
        if q.restrict(Side::Left).is_zero() {
            let h = heights.iter().copied().fold(0.0, f64::max) + 1.0;
            let full = with_full.then(|| plus.clone());
            return Ok(Self {
                plus,
                g: None,
                h,
                pole_heights: heights,
                full,
            });
        }
        heights.extend(bound_states_of(q, &opts)?.iter().map(|b| b.kappa));
        let sf = SplitFunction::new(q, &opts)?;
        let h = heights.iter().copied().fold(0.0, f64::max) + 1.0;
        let full = if with_full {
            Some(scatter(q, Source::FullLine, &opts)?)
        } else {
            None
        };
        Ok(Self {
            plus,
            g: Some(Box::new(move |l| sf.eval(l))),
            h,
            pole_heights: heights,
            full,
        })
    }

    pub fn g(&self) -> Option<&ContourFn<'static>> {
        self.g.as_deref()
    }
}

/// Which symbol feeds the determinant.
#[derive(Debug, Clone, Copy)]
pub enum Route<'a> {
    /// `φ` from full-line data.
    Full(&'a ScatteringData),
    /// `φ₊ + Φ`.
    Split(&'a SplitData),
}

impl<'a> Route<'a> {
    pub fn label(&self) -> &'static str {
        match self {
            Route::Full(_) => "full",
            Route::Split(_) => "split",
        }
    }

    /// Symbol usable for every `x ≥ x_lo` at `t`.
    pub fn symbol(&self, x_lo: f64, t: f64) -> Result<HankelSymbol<'a>> {
        match *self {
            Route::Full(sd) => assemble_symbol(sd, x_lo + sd.shift, t),
            Route::Split(sp) => {
                if t == 0.0 && x_lo <= 0.0 {
                    let full = sp.full.as_ref().ok_or_else(|| {
                        Error::ContourRefused(format!("t = 0, x = {x_lo} <= 0 needs full-line data"))
                    })?;
                    return assemble_symbol(full, x_lo + full.shift, t);
                }
                let sym = symbol_plus(&sp.plus, x_lo, t)?;
                match sp.g() {
                    Some(g) => sym.with_analytic(g, sp.h, &sp.pole_heights),
                    None => Ok(sym),
                }
            }
        }
    }
}

/// Evaluates `log det` and `u` for `x` in a fixed window at fixed `t`.
pub struct Evaluator {
    layout: KernelLayout,
    offset: f64,
    opts: UOptions,
}

impl Evaluator {
    pub fn new(route: Route<'_>, window: (f64, f64), t: f64, params: &DiscretizationParams, opts: &UOptions) -> Result<Self> {
        opts.validate()?;
        let pad = 4.0 * opts.h_x;
        let lo = window.0 - pad;
        let sym = route.symbol(lo, t)?;
        let shift = sym.x - lo;
        let layout = KernelLayout::new(&sym, (lo + shift, window.1 + pad + shift), params, &[(1, 0), (2, 0)])?;
        Ok(Self {
            layout,
            offset: shift,
            opts: opts.clone(),
        })
    }

    pub fn layout(&self) -> &KernelLayout {
        &self.layout
    }

    /// `B = [[1 + N, V], [−Vᵀ, diag(1/w)]]` and `Σ ln w`, where the large pole
    /// terms `w·v vᵀ` of `M = N + V diag(w) Vᵀ` are moved into the border:
    /// `det(1 + M) = det B · Π w`.
    fn bordered(&self, x: f64, orders: &[(u32, u32)]) -> Result<(HankelDiscretization, Vec<BorderedPole>, Lu<f64>, f64)> {
        let (d, poles) = self.layout.discretize_bordered(x + self.offset, orders)?;
        let b = border(&d.m.plus_identity(), &poles, |p| 1.0 / p.weight, true);
        let lu = b.lu()?;
        let (logabs, sign) = lu.log_abs_det();
        if sign <= 0.0 {
            return Err(Error::NonPositiveDeterminant { sign });
        }
        let logdet = logabs + poles.iter().map(|p| p.weight.ln()).sum::<f64>();
        Ok((d, poles, lu, logdet))
    }

    pub fn logdet(&self, x: f64) -> Result<f64> {
        Ok(self.bordered(x, &[])?.3)
    }

    /// `(u, log det)` by the trace formula on the bordered system; `Π w` is
    /// log-linear in `x` and drops out of `∂ₓ²`.
    pub fn trace_u(&self, x: f64) -> Result<(f64, f64)> {
        let (d, poles, lu, logdet) = self.bordered(x, &[(1, 0), (2, 0)])?;
        let b1 = border(d.deriv((1, 0)).expect("first derivative"), &poles, |p| 2.0 * p.kappa / p.weight, false);
        let b2 = border(d.deriv((2, 0)).expect("second derivative"), &poles, |p| 4.0 * p.kappa * p.kappa / p.weight, false);
        let m1 = lu.solve(&b1);
        let m2 = lu.solve(&b2);
        Ok((-2.0 * (m2.trace() - m1.trace_of_product(&m1)), logdet))
    }

    /// Five-point second difference of `log det`, Richardson-combined over `h` and `2h`.
    pub fn fd_u(&self, x: f64) -> Result<f64> {
        let h = self.opts.h_x;
        let f: Vec<f64> = (-4..=4)
            .map(|j| self.logdet(x + j as f64 * h))
            .collect::<Result<_>>()?;
        let d2 = |s: usize| {
            let hh = s as f64 * h;
            (-f[4 + 2 * s] + 16.0 * f[4 + s] - 30.0 * f[4] + 16.0 * f[4 - s] - f[4 - 2 * s]) / (12.0 * hh * hh)
        };
        let rich = (16.0 * d2(1) - d2(2)) / 15.0;
        Ok(-2.0 * rich)
    }

    /// `(u, log det)` by the configured method.
    pub fn u(&self, x: f64) -> Result<(f64, f64)> {
        match self.opts.method {
            UMethod::TraceFormula => self.trace_u(x),
            UMethod::FiniteDifference => Ok((self.fd_u(x)?, self.logdet(x)?)),
            UMethod::Checked => {
                let (trace, logdet) = self.trace_u(x)?;
                let fd = self.fd_u(x)?;
                if (trace - fd).abs() > self.opts.cross_tol {
                    return Err(Error::MethodDisagreement { fd, trace });
                }
                Ok((trace, logdet))
            }
        }
    }

    /// Largest `|Im F(s)|` over a few `s` at `x`.
    pub fn imag_residual(&self, x: f64) -> f64 {
        let l = self.layout.l_s();
        [0.1 * l, 0.5 * l, l, 2.0 * l]
            .iter()
            .map(|&s| self.layout.kernel(x + self.offset, s).im.abs())
            .fold(0.0, f64::max)
    }
}

/// `[[a, V], [−Vᵀ, diag(corner)]]`, or block-diagonal when `coupled` is false.
fn border(a: &Matrix<f64>, poles: &[BorderedPole], corner: impl Fn(&BorderedPole) -> f64, coupled: bool) -> Matrix<f64> {
    if poles.is_empty() {
        return a.clone();
    }
    let n = a.rows();
    let r = poles.len();
    Matrix::from_fn(n + r, n + r, |i, j| match (i < n, j < n) {
        (true, true) => a[(i, j)],
        (true, false) if coupled => poles[j - n].v[i],
        (false, true) if coupled => -poles[i - n].v[j],
        (false, false) if i == j => corner(&poles[i - n]),
        _ => 0.0,
    })
}

/// `u(x, t)` for one point.
pub fn u_point(route: Route<'_>, x: f64, t: f64, params: &DiscretizationParams, opts: &UOptions) -> Result<f64> {
    Ok(Evaluator::new(route, (x, x), t, params, opts)?.u(x)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hankel::nystrom;
    use crate::oracles::{soliton_exact, soliton_offset};
    use crate::scattering::{BoundState, KGridSpec};

    fn soliton(kappa: f64, c: f64) -> ScatteringData {
        let mut sd = ScatteringData::empty(&KGridSpec::default());
        sd.bound_states.push(BoundState { kappa, c });
        sd
    }

    #[test]
    fn zero_matrix_logdet() {
        let sd = ScatteringData::empty(&KGridSpec::default());
        let d = nystrom(&assemble_symbol(&sd, 0.0, 0.0).unwrap(), &DiscretizationParams::default(), &[]).unwrap();
        assert_eq!(fredholm_logdet(&d).unwrap(), 0.0);
    }

    #[test]
    fn rank_one_logdet_closed_form() {
        // κ = 1, c = 2, ξ = e⁸ at (x, t) = (0, 1): λ₁ = c ξ/(2κ) = e⁸ (1 − e^{−2L})
        let sd = soliton(1.0, 1.0);
        let sym = assemble_symbol(&sd, 0.0, 1.0).unwrap();
        let params = DiscretizationParams {
            l_s: Some(60.0),
            n_quad: 96,
            ..Default::default()
        };
        let d = nystrom(&sym, &params, &[]).unwrap();
        let want = (1.0 + 8f64.exp() / 2.0).ln();
        assert!((fredholm_logdet(&d).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn soliton_logdet_bargmann() {
        let sd = soliton(1.0, 2.0);
        let d = nystrom(&assemble_symbol(&sd, 0.0, 0.0).unwrap(), &DiscretizationParams::default(), &[]).unwrap();
        assert!((fredholm_logdet(&d).unwrap() - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn zero_data_gives_zero_u() {
        let sd = ScatteringData::empty(&KGridSpec::default());
        let u = u_point(Route::Full(&sd), 0.4, 0.2, &DiscretizationParams::default(), &UOptions::default()).unwrap();
        assert!(u.abs() < 1e-10);
    }

    #[test]
    fn soliton_u_both_methods() {
        let sd = soliton(1.0, 3.0);
        let x0 = soliton_offset(1.0, 3.0);
        let opts = UOptions {
            method: UMethod::Checked,
            ..Default::default()
        };
        for (x, t) in [(-3.0, 0.0), (0.4, 0.0), (2.5, 0.5), (-1.0, 0.5)] {
            let u = u_point(Route::Full(&sd), x, t, &DiscretizationParams::default(), &opts).unwrap();
            assert!((u - soliton_exact(1.0, x0, x, t)).abs() < 1e-8, "({x},{t}): {u}");
        }
    }
}
