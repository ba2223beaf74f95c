use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Evaluator, Route, UOptions};
use crate::error::{Error, Result};
use crate::hankel::DiscretizationParams;

/// Discretization and provenance of a computed field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub route: String,
    pub discretization: DiscretizationParams,
    pub u_options: UOptions,
    /// Largest `|Im F|` seen while assembling.
    pub imag_residual: f64,
    pub potential_hash: Option<String>,
}

/// `u(x, t)` on a grid; rows are indexed by `t`, columns by `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionField {
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub logdet: Vec<Vec<f64>>,
    pub residual: Option<Vec<Vec<f64>>>,
    pub meta: FieldMeta,
}

impl SolutionField {
    pub fn max_abs_diff(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let mut worst = 0.0f64;
        for (j, &t) in self.t_grid.iter().enumerate() {
            for (i, &x) in self.x_grid.iter().enumerate() {
                worst = worst.max((self.u[j][i] - f(x, t)).abs());
            }
        }
        worst
    }
}

/// `u` over `x_grid × t_grid`, one quadrature layout per `t`.
pub fn u_field(
    route: Route<'_>,
    x_grid: &[f64],
    t_grid: &[f64],
    params: &DiscretizationParams,
    opts: &UOptions,
) -> Result<SolutionField> {
    if x_grid.is_empty() || t_grid.is_empty() {
        return Err(Error::InvalidInput("empty x or t grid".into()));
    }
    let x_lo = x_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let x_hi = x_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut u = Vec::with_capacity(t_grid.len());
    let mut logdet = Vec::with_capacity(t_grid.len());
    let mut imag_residual = 0.0f64;
    for &t in t_grid {
        let ev = Evaluator::new(route, (x_lo, x_hi), t, params, opts)?;
        imag_residual = imag_residual.max(ev.imag_residual(x_lo)).max(ev.imag_residual(x_hi));
        let row: Vec<(f64, f64)> = x_grid.par_iter().map(|&x| ev.u(x)).collect::<Result<_>>()?;
        if let Some((x, _)) = x_grid.iter().zip(&row).find(|(_, v)| !v.0.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite u at ({x}, {t})")));
        }
        u.push(row.iter().map(|v| v.0).collect());
        logdet.push(row.iter().map(|v| v.1).collect());
    }
    Ok(SolutionField {
        x_grid: x_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        u,
        logdet,
        residual: None,
        meta: FieldMeta {
            route: route.label().into(),
            discretization: params.clone(),
            u_options: opts.clone(),
            imag_residual,
            potential_hash: None,
        },
    })
}

/// Centered-difference residual of `u_t − 6uu_x + u_xxx` on interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    /// Same shape as the field; NaN off the interior.
    pub values: Vec<Vec<f64>>,
    pub max_norm: f64,
}

fn uniform_step(grid: &[f64], name: &str) -> Result<f64> {
    let h = grid[1] - grid[0];
    if !(h > 0.0) {
        return Err(Error::GridTooCoarse(format!("{name} grid must increase")));
    }
    for w in grid.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::GridTooCoarse(format!("{name} grid is not uniform")));
        }
    }
    Ok(h)
}

pub fn kdv_residual(field: &SolutionField) -> Result<Residual> {
    let (nx, nt) = (field.x_grid.len(), field.t_grid.len());
    if nx < 7 || nt < 3 {
        return Err(Error::GridTooCoarse(format!("need >= 7 x-nodes and >= 3 t-nodes, got {nx} x {nt}")));
    }
    let dx = uniform_step(&field.x_grid, "x")?;
    let dt = uniform_step(&field.t_grid, "t")?;
    let u = &field.u;
    let mut values = vec![vec![f64::NAN; nx]; nt];
    let mut max_norm = 0.0f64;
    for j in 1..nt - 1 {
        for i in 2..nx - 2 {
            let ut = (u[j + 1][i] - u[j - 1][i]) / (2.0 * dt);
            let ux = (u[j][i + 1] - u[j][i - 1]) / (2.0 * dx);
            let uxxx = (u[j][i + 2] - 2.0 * u[j][i + 1] + 2.0 * u[j][i - 1] - u[j][i - 2]) / (2.0 * dx.powi(3));
            let r = ut - 6.0 * u[j][i] * ux + uxxx;
            values[j][i] = r;
            max_norm = max_norm.max(r.abs());
        }
    }
    Ok(Residual { values, max_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::soliton_exact;
    use crate::scattering::{KGridSpec, ScatteringData};

    fn sampled(f: impl Fn(f64, f64) -> f64, xs: &[f64], ts: &[f64]) -> SolutionField {
        SolutionField {
            x_grid: xs.to_vec(),
            t_grid: ts.to_vec(),
            u: ts.iter().map(|&t| xs.iter().map(|&x| f(x, t)).collect()).collect(),
            logdet: vec![vec![0.0; xs.len()]; ts.len()],
            residual: None,
            meta: FieldMeta {
                route: "sampled".into(),
                discretization: DiscretizationParams::default(),
                u_options: UOptions::default(),
                imag_residual: 0.0,
                potential_hash: None,
            },
        }
    }

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn zero_field_has_zero_residual() {
        let f = sampled(|_, _| 0.0, &grid(0.0, 1.0, 9), &grid(0.0, 1.0, 3));
        assert_eq!(kdv_residual(&f).unwrap().max_norm, 0.0);
    }

    #[test]
    fn soliton_residual_is_second_order() {
        let sol = |x: f64, t: f64| soliton_exact(1.0, 0.0, x, t);
        let res = |n: usize| {
            let f = sampled(sol, &grid(-2.0, 2.0, 8 * n + 1), &grid(0.0, 0.1, 2 * n + 1));
            kdv_residual(&f).unwrap().max_norm
        };
        let (a, b) = (res(4), res(8));
        let slope = (a / b).log2();
        assert!((slope - 2.0).abs() < 0.2, "slope {slope}");
    }

    #[test]
    fn coarse_grid_rejected() {
        let f = sampled(|_, _| 0.0, &grid(0.0, 1.0, 5), &grid(0.0, 1.0, 3));
        assert!(matches!(kdv_residual(&f), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn zero_data_field() {
        let sd = ScatteringData::empty(&KGridSpec::default());
        let f = u_field(Route::Full(&sd), &[-1.0, 0.0, 1.0], &[0.0, 0.1], &DiscretizationParams::default(), &UOptions::default()).unwrap();
        assert!(f.u.iter().flatten().all(|v| v.abs() < 1e-12));
    }
}
