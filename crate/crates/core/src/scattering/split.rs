use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::jost::JostSolver;
use super::{scatter, BoundState, CoefficientGrid, ScatteringData, ScatteringOptions, Source};
use crate::error::{Error, Result};
use crate::potential::{Potential, Side};

/// `R = R₊ + G` on the real grid, with the data of `q₊`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionSplit {
    /// Coefficients of `q₊ = q·1_{x>0}`.
    pub r_plus: CoefficientGrid,
    pub g_values: Vec<Complex64>,
    pub t_plus: Vec<Complex64>,
    pub l_plus: Vec<Complex64>,
    /// `iκₙ` of `q` followed by `iκₙ⁺` of `q₊`.
    pub poles: Vec<Complex64>,
    pub bound_states: Vec<BoundState>,
    pub bound_states_plus: Vec<BoundState>,
    /// `max |R − R₊ − G|` against the full-line coefficients.
    pub split_defect: f64,
}

impl ReflectionSplit {
    /// Scattering data of `q₊` in the form consumed by the Hankel layer.
    pub fn plus_data(&self) -> ScatteringData {
        ScatteringData {
            coeffs: self.r_plus.clone(),
            bound_states: self.bound_states_plus.clone(),
            source: Source::RightRestricted,
            shift: 0.0,
        }
    }
}

/// Split the reflection coefficient of `q` at `x = 0`.
///
/// Returns the split together with the full-line data it was checked against.
pub fn split_reflection(
    q: &Potential,
    opts: &ScatteringOptions,
    denominator_floor: f64,
) -> Result<(ReflectionSplit, ScatteringData)> {
    let strict = ScatteringOptions {
        shift_on_exceptional: false,
        ..opts.clone()
    };
    let full = scatter(q, Source::FullLine, &strict)?;
    let plus = scatter(&q.restrict(Side::Right), Source::RightRestricted, &strict)?;
    let minus = super::coefficient_grid(&q.restrict(Side::Left), &strict)?;
    let n = full.coeffs.k_nodes.len();
    let mut g = Vec::with_capacity(n);
    for i in 0..n {
        let (tp, lp, rm) = (plus.coeffs.t[i], plus.coeffs.l[i], minus.r[i]);
        let den = Complex64::new(1.0, 0.0) - lp * rm;
        if den.norm() < denominator_floor {
            return Err(Error::SplitDenominator {
                k: full.coeffs.k_nodes[i],
                modulus: den.norm(),
            });
        }
        g.push(tp * tp * rm / den);
    }
    let split_defect = (0..n)
        .map(|i| (full.coeffs.r[i] - plus.coeffs.r[i] - g[i]).norm())
        .fold(0.0, f64::max);
    let poles = full
        .bound_states
        .iter()
        .chain(&plus.bound_states)
        .map(|b| Complex64::new(0.0, b.kappa))
        .collect();
    let split = ReflectionSplit {
        t_plus: plus.coeffs.t.clone(),
        l_plus: plus.coeffs.l.clone(),
        r_plus: plus.coeffs.clone(),
        g_values: g,
        poles,
        bound_states: full.bound_states.clone(),
        bound_states_plus: plus.bound_states.clone(),
        split_defect,
    };
    Ok((split, full))
}

/// `G(λ) = R(λ) − R₊(λ)` continued to `Im λ > 0` through Jost values at
/// `x = 0` of the same `λ`:
/// `G = 2iλ·(ψ₋' + iλψ₋) / [W(ψ₋, ψ₊)·(ψ₊' + iλψ₊)]`.
#[derive(Debug, Clone)]
pub struct SplitFunction {
    solver: JostSolver,
}

impl SplitFunction {
    pub fn new(q: &Potential, opts: &ScatteringOptions) -> Result<Self> {
        Ok(Self {
            solver: JostSolver::new(q, opts.tail_tol, opts.ode())?,
        })
    }

    pub fn eval(&self, lambda: Complex64) -> Result<Complex64> {
        let p = self.solver.right_state(lambda, 0.0)?;
        let m = self.solver.left_state(lambda, 0.0)?;
        let il = Complex64::new(0.0, 1.0) * lambda;
        let w = super::jost::wronskian(lambda, &m, &p);
        // in phase-removed variables at x = 0: ψ₋' + iλψ₋ = y₋', ψ₊' + iλψ₊ = y₊' + 2iλy₊
        Ok(2.0 * il * m[1] / (w * (p[1] + 2.0 * il * p[0])))
    }

    pub fn eval_many(&self, lambdas: &[Complex64]) -> Result<Vec<Complex64>> {
        lambdas.par_iter().map(|&l| self.eval(l)).collect()
    }
}

/// The same function from the left half-line m-function `m₋(λ²)`:
/// `G = 2iλ(iλ − m)/[(ψ₊' + mψ₊)(ψ₊' + iλψ₊)]` with `ψ₊` at `x = 0`.
pub fn g_from_m_function(plus: &JostSolver, lambda: Complex64, m: Complex64) -> Result<Complex64> {
    let y = plus.right_state(lambda, 0.0)?;
    let il = Complex64::new(0.0, 1.0) * lambda;
    let (psi, dpsi) = (y[0], y[1] + il * y[0]);
    Ok(2.0 * il * (il - m) / ((dpsi + m * psi) * (dpsi + il * psi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::KGridSpec;

    fn small() -> ScatteringOptions {
        ScatteringOptions {
            grid: KGridSpec { n_nodes: 256, k_max: 20.0, ..KGridSpec::default() },
            ..ScatteringOptions::default()
        }
    }

    #[test]
    fn right_supported_profile_has_no_g() {
        let q = Potential::square_well(-1.0, 0.5, 2.0);
        let (split, full) = split_reflection(&q, &small(), 1e-10).unwrap();
        assert!(split.g_values.iter().all(|g| g.norm() == 0.0));
        assert!(split.split_defect < 1e-9);
        assert_eq!(full.bound_states.len(), split.bound_states_plus.len());
    }

    #[test]
    fn contour_form_matches_real_line_form() {
        let q = Potential::sum(vec![
            Potential::square_well(-1.0, -2.0, -1.0),
            Potential::square_well(-1.0, 1.0, 2.0),
        ])
        .unwrap();
        let opts = small();
        let (split, _) = split_reflection(&q, &opts, 1e-10).unwrap();
        let g = SplitFunction::new(&q, &opts).unwrap();
        let half = split.r_plus.half();
        for i in [0usize, 17, 60, 127] {
            let k = split.r_plus.k_nodes[half + i];
            let direct = g.eval(Complex64::new(k, 0.0)).unwrap();
            assert!((direct - split.g_values[half + i]).norm() < 1e-8, "k = {k}");
        }
    }
}
