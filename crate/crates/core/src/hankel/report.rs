use super::{assemble_symbol, nystrom, symbol_plus, ContourFn, DiscretizationParams, HankelDiscretization, HankelSymbol, KernelLayout};
use crate::error::{Error, Result};
use crate::linalg::{singular_values, spectral_norm};
use crate::scattering::ScatteringData;

/// Singular values of a discretized Hankel operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularValueReport {
    /// Decreasing.
    pub values: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub trace_norm: f64,
    /// `−d ln σⱼ / dj` fitted on the decaying tail, when there is one.
    pub tail_exponent: Option<f64>,
}

pub fn singular_value_report(d: &HankelDiscretization) -> SingularValueReport {
    let mut values = singular_values(&d.m);
    values.sort_by(|a, b| b.total_cmp(a));
    let partial_sums: Vec<f64> = values
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    let trace_norm = partial_sums.last().copied().unwrap_or(0.0);
    let top = values.first().copied().unwrap_or(0.0);
    let tail: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < 1e-3 * top && v > 1e-13 * top)
        .map(|(j, v)| (j as f64, v.ln()))
        .collect();
    let tail_exponent = (tail.len() >= 3).then(|| {
        let n = tail.len() as f64;
        let (mx, my) = tail.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
        let (sxy, sxx) = tail.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
        -sxy / sxx
    });
    SingularValueReport {
        values,
        partial_sums,
        trace_norm,
        tail_exponent,
    }
}

/// `‖M(φ) − M(φ₊) − M(Φ)‖₂` on a common grid, where `Φ` is built from `G`
/// on `ℝ + ih`.
pub fn symbol_split_check(
    sd: &ScatteringData,
    sd_plus: &ScatteringData,
    g: &ContourFn<'_>,
    h: f64,
    x: f64,
    t: f64,
    params: &DiscretizationParams,
) -> Result<f64> {
    if !(t > 0.0 || x > 0.0) {
        return Err(Error::ContourRefused(format!("split check needs t > 0 or x > 0, got ({x}, {t})")));
    }
    let sym_full = assemble_symbol(sd, x, t)?;
    let sym_plus = symbol_plus(sd_plus, x, t)?;
    let common = DiscretizationParams {
        l_s: Some(KernelLayout::new(&sym_full, (x, x), params, &[])?.l_s().max(KernelLayout::new(&sym_plus, (x, x), params, &[])?.l_s())),
        ..params.clone()
    };
    let heights: Vec<f64> = sd.bound_states.iter().chain(&sd_plus.bound_states).map(|b| b.kappa).collect();
    let full = nystrom(&sym_full, &common, &[])?;
    let plus = nystrom(&sym_plus, &common, &[])?;
    let phi = HankelSymbol {
        x,
        t,
        pole_terms: Vec::new(),
        reflection: None,
        analytic_part: None,
    }
    .with_analytic(g, h, &heights)?;
    let remainder = nystrom(&phi, &common, &[])?;
    Ok(spectral_norm(&full.m.sub(&plus.m).sub(&remainder.m)))
}
