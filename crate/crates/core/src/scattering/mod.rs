//! Forward scattering for the 1-D Schrödinger operator `−∂ₓ² + q`.

mod bound_states;
mod jost;
pub mod kgrid;
mod mfunction;
mod split;
mod volterra;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::OdeOptions;
use crate::potential::Potential;

pub use bound_states::{bound_states, norming_constant};
pub use jost::{wronskian, Branch, JostSolver, State};
pub use kgrid::{KGridSpec, PanelInterpolator};
pub use mfunction::{m_function_left, MFunctionResult};
pub use split::{g_from_m_function, split_reflection, ReflectionSplit, SplitFunction};
pub use volterra::{r_plus_representation, RPlusRepresentation, VolterraOptions};

/// A bound state `−κ²` with its norming coefficient `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    pub kappa: f64,
    pub c: f64,
}

/// Scattering coefficients on a symmetric wavenumber grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientGrid {
    /// Symmetric about 0, increasing, 0 excluded.
    pub k_nodes: Vec<f64>,
    pub r: Vec<Complex64>,
    pub t: Vec<Complex64>,
    pub l: Vec<Complex64>,
    /// Positive-half panel layout, for interpolation.
    pub layout: KGridSpec,
}

impl CoefficientGrid {
    fn from_positive(layout: KGridSpec, k: &[f64], r: &[Complex64], t: &[Complex64], l: &[Complex64]) -> Self {
        let mirror = |v: &[Complex64]| -> Vec<Complex64> {
            v.iter().rev().map(|z| z.conj()).chain(v.iter().copied()).collect()
        };
        Self {
            k_nodes: k.iter().rev().map(|x| -x).chain(k.iter().copied()).collect(),
            r: mirror(r),
            t: mirror(t),
            l: mirror(l),
            layout,
        }
    }

    /// Grid of a reflectionless, fully transmitting potential.
    pub fn free(layout: &KGridSpec) -> Self {
        let k = layout.positive_nodes();
        let zero = vec![Complex64::new(0.0, 0.0); k.len()];
        let one = vec![Complex64::new(1.0, 0.0); k.len()];
        Self::from_positive(layout.clone(), &k, &zero, &one, &zero)
    }

    pub fn half(&self) -> usize {
        self.k_nodes.len() / 2
    }

    pub fn positive_k(&self) -> &[f64] {
        &self.k_nodes[self.half()..]
    }

    pub fn positive_r(&self) -> &[Complex64] {
        &self.r[self.half()..]
    }

    pub fn positive_t(&self) -> &[Complex64] {
        &self.t[self.half()..]
    }

    pub fn positive_l(&self) -> &[Complex64] {
        &self.l[self.half()..]
    }

    pub fn interpolator(&self) -> PanelInterpolator {
        PanelInterpolator::new(self.layout.breaks(), self.layout.order)
    }

    /// `max | |R|² + |T|² − 1 |` over the grid.
    pub fn unitarity_defect(&self) -> f64 {
        self.r
            .iter()
            .zip(&self.t)
            .map(|(r, t)| (r.norm_sqr() + t.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max |R(−k) − conj R(k)|` (and likewise for `T`, `L`).
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.k_nodes.len();
        (0..n / 2)
            .map(|i| {
                let j = n - 1 - i;
                (self.r[i] - self.r[j].conj())
                    .norm()
                    .max((self.t[i] - self.t[j].conj()).norm())
                    .max((self.l[i] - self.l[j].conj()).norm())
            })
            .fold(0.0, f64::max)
    }
}

/// Where a [`ScatteringData`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    FullLine,
    RightRestricted,
    LeftTruncated { b: f64 },
}

/// Reflection/transmission data plus bound states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringData {
    pub coeffs: CoefficientGrid,
    /// Sorted by `kappa`, descending.
    pub bound_states: Vec<BoundState>,
    pub source: Source,
    /// Translation applied to the profile after an exceptional Wronskian.
    pub shift: f64,
}

impl ScatteringData {
    /// No reflection, no bound states.
    pub fn empty(layout: &KGridSpec) -> Self {
        Self {
            coeffs: CoefficientGrid::free(layout),
            bound_states: Vec::new(),
            source: Source::FullLine,
            shift: 0.0,
        }
    }

    pub fn kappa_max(&self) -> f64 {
        self.bound_states.first().map_or(0.0, |b| b.kappa)
    }
}

/// Tolerances and grid parameters for forward scattering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatteringOptions {
    pub grid: KGridSpec,
    pub tail_tol: f64,
    pub ode_tol: f64,
    pub wronskian_floor: f64,
    pub kappa_tol: f64,
    pub scan_points: usize,
    /// Cross-check the bound-state count with a finite-difference eigensolver.
    pub eigen_check: bool,
    /// Translate the profile and retry when the Wronskian floor is hit.
    pub shift_on_exceptional: bool,
}

impl Default for ScatteringOptions {
    fn default() -> Self {
        Self {
            grid: KGridSpec::default(),
            tail_tol: 1e-12,
            ode_tol: 1e-10,
            wronskian_floor: 1e-9,
            kappa_tol: 1e-12,
            scan_points: 400,
            eigen_check: true,
            shift_on_exceptional: true,
        }
    }
}

impl ScatteringOptions {
    pub fn ode(&self) -> OdeOptions {
        OdeOptions {
            abs_tol: self.ode_tol,
            rel_tol: self.ode_tol,
            ..OdeOptions::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        for (name, v) in [
            ("tail_tol", self.tail_tol),
            ("ode_tol", self.ode_tol),
            ("wronskian_floor", self.wronskian_floor),
            ("kappa_tol", self.kappa_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive")));
            }
        }
        if self.scan_points < 8 {
            return Err(Error::InvalidInput("scan_points must be ≥ 8".into()));
        }
        Ok(())
    }
}

/// Offset used to move a profile off an exceptional configuration.
pub const EXCEPTIONAL_SHIFT: f64 = 0.007_071_067_811_865_475;

/// `y₊(x, k)` on `x_grid` (increasing).
pub fn jost_right(q: &Potential, k: Complex64, x_grid: &[f64], opts: &ScatteringOptions) -> Result<Vec<Complex64>> {
    check_upper(k)?;
    let s = JostSolver::new(q, opts.tail_tol, opts.ode())?;
    Ok(s.states_on(Branch::Right, k, x_grid)?.into_iter().map(|y| y[0]).collect())
}

/// `y₋(x, k)` on `x_grid` (increasing).
pub fn jost_left(q: &Potential, k: Complex64, x_grid: &[f64], opts: &ScatteringOptions) -> Result<Vec<Complex64>> {
    check_upper(k)?;
    let s = JostSolver::new(q, opts.tail_tol, opts.ode())?;
    Ok(s.states_on(Branch::Left, k, x_grid)?.into_iter().map(|y| y[0]).collect())
}

fn check_upper(k: Complex64) -> Result<()> {
    if k.im < 0.0 || !k.re.is_finite() || !k.im.is_finite() {
        return Err(Error::InvalidInput(format!("k = {k} must satisfy Im k ≥ 0")));
    }
    Ok(())
}

/// `(T, R, L)` at the given real nonzero wavenumbers.
pub fn scattering_coefficients(
    q: &Potential,
    k_nodes: &[f64],
    opts: &ScatteringOptions,
) -> Result<Vec<(Complex64, Complex64, Complex64)>> {
    if k_nodes.iter().any(|k| *k == 0.0 || !k.is_finite()) {
        return Err(Error::InvalidInput("k nodes must be real and nonzero".into()));
    }
    let s = JostSolver::new(q, opts.tail_tol, opts.ode())?;
    coefficients_with(&s, k_nodes, opts.wronskian_floor)
}

fn coefficients_with(
    s: &JostSolver,
    k_nodes: &[f64],
    floor: f64,
) -> Result<Vec<(Complex64, Complex64, Complex64)>> {
    k_nodes
        .par_iter()
        .map(|&k| {
            let (t, r, l, w) = s.coefficients(k)?;
            if w < floor {
                return Err(Error::WronskianFloor { k, modulus: w });
            }
            Ok((t, r, l))
        })
        .collect()
}

/// Coefficient grid for `q` on the layout of `opts`.
pub fn coefficient_grid(q: &Potential, opts: &ScatteringOptions) -> Result<CoefficientGrid> {
    opts.validate()?;
    let s = JostSolver::new(q, opts.tail_tol, opts.ode())?;
    grid_with(&s, opts)
}

fn grid_with(s: &JostSolver, opts: &ScatteringOptions) -> Result<CoefficientGrid> {
    let k = opts.grid.positive_nodes();
    let vals = coefficients_with(s, &k, opts.wronskian_floor)?;
    let t: Vec<_> = vals.iter().map(|v| v.0).collect();
    let r: Vec<_> = vals.iter().map(|v| v.1).collect();
    let l: Vec<_> = vals.iter().map(|v| v.2).collect();
    Ok(CoefficientGrid::from_positive(opts.grid.clone(), &k, &r, &t, &l))
}

/// Full scattering data: coefficient grid and bound states.
///
/// If the Wronskian floor is hit and `shift_on_exceptional` is set, the
/// profile is translated by [`EXCEPTIONAL_SHIFT`] and the shift is recorded.
pub fn scatter(q: &Potential, source: Source, opts: &ScatteringOptions) -> Result<ScatteringData> {
    opts.validate()?;
    match scatter_once(q, source, opts) {
        Err(Error::WronskianFloor { .. }) if opts.shift_on_exceptional => {
            let shifted = q.shifted(EXCEPTIONAL_SHIFT);
            let mut data = scatter_once(&shifted, source, opts)?;
            data.shift = EXCEPTIONAL_SHIFT;
            Ok(data)
        }
        other => other,
    }
}

fn scatter_once(q: &Potential, source: Source, opts: &ScatteringOptions) -> Result<ScatteringData> {
    if q.is_zero() {
        let mut d = ScatteringData::empty(&opts.grid);
        d.source = source;
        return Ok(d);
    }
    let s = JostSolver::new(q, opts.tail_tol, opts.ode())?;
    let coeffs = grid_with(&s, opts)?;
    let kappa_max = default_kappa_max(&s);
    let bound = bound_states::bound_states_with(&s, kappa_max, opts)?;
    Ok(ScatteringData {
        coeffs,
        bound_states: bound,
        source,
        shift: 0.0,
    })
}

/// Bound states of `q` below the bound `√(max(−q))`.
pub fn bound_states_of(q: &Potential, opts: &ScatteringOptions) -> Result<Vec<BoundState>> {
    if q.is_zero() {
        return Ok(Vec::new());
    }
    let s = JostSolver::new(q, opts.tail_tol, opts.ode())?;
    bound_states::bound_states_with(&s, default_kappa_max(&s), opts)
}

/// Upper bound for `κ`: `√(max(−q))` over the effective support.
fn default_kappa_max(s: &JostSolver) -> f64 {
    let lo = s.x_left().unwrap_or(s.x_right() - 40.0);
    let m = s.potential().sampled_min(lo, s.x_right(), 20_000);
    let bps = s.potential().breakpoints();
    let m = bps
        .iter()
        .flat_map(|&b| [s.potential().evaluate(b - 1e-9), s.potential().evaluate(b + 1e-9)])
        .fold(m, f64::min);
    (-m).max(0.0).sqrt() * 1.0001 + 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_potential_data() {
        let opts = ScatteringOptions::default();
        let d = scatter(&Potential::zero(), Source::FullLine, &opts).unwrap();
        assert!(d.bound_states.is_empty());
        assert!(d.coeffs.r.iter().all(|r| r.norm() == 0.0));
        assert!(d.coeffs.t.iter().all(|t| (t - 1.0).norm() == 0.0));
        assert_eq!(d.coeffs.k_nodes.len(), 2048);
    }

    #[test]
    fn rejects_lower_half_plane() {
        let opts = ScatteringOptions::default();
        assert!(jost_right(&Potential::zero(), Complex64::new(1.0, -0.1), &[0.0], &opts).is_err());
    }

    #[test]
    fn grid_symmetry_by_construction() {
        let opts = ScatteringOptions {
            grid: KGridSpec { n_nodes: 128, ..KGridSpec::default() },
            ..ScatteringOptions::default()
        };
        let g = coefficient_grid(&Potential::square_well(-1.0, 0.0, 2.0), &opts).unwrap();
        assert_eq!(g.symmetry_defect(), 0.0);
        assert!(g.unitarity_defect() < 1e-8);
    }
}
