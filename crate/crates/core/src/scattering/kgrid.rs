//! Wavenumber grids: Gauss–Legendre panels with sinh-clustered breakpoints
//! near `k = 0`, and barycentric interpolation inside each panel.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Layout of the positive half of a symmetric wavenumber grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KGridSpec {
    /// Total node count (both signs); a multiple of `2·order`.
    pub n_nodes: usize,
    pub k_max: f64,
    /// Nodes per panel.
    pub order: usize,
    /// Clustering strength of the panel breakpoints.
    pub beta: f64,
}

impl Default for KGridSpec {
    fn default() -> Self {
        Self {
            n_nodes: 2048,
            k_max: 40.0,
            order: 16,
            beta: 2.0,
        }
    }
}

impl KGridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.order < 2 || self.n_nodes == 0 || !self.n_nodes.is_multiple_of(2 * self.order) {
            return Err(Error::InvalidInput(format!(
                "n_nodes = {} must be a positive multiple of 2·order = {}",
                self.n_nodes,
                2 * self.order
            )));
        }
        if !(self.k_max > 0.0 && self.k_max.is_finite()) {
            return Err(Error::InvalidInput("k_max must be positive".into()));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidInput("beta must be positive".into()));
        }
        Ok(())
    }

    /// Panel breakpoints `0 = b₀ < … < b_P = k_max`.
    pub fn breaks(&self) -> Vec<f64> {
        let panels = self.n_nodes / (2 * self.order);
        let s = self.beta.sinh();
        (0..=panels)
            .map(|j| self.k_max * (self.beta * j as f64 / panels as f64).sinh() / s)
            .collect()
    }

    /// Positive nodes, increasing.
    pub fn positive_nodes(&self) -> Vec<f64> {
        let rule = GaussLegendre::<f64>::new(self.order);
        let breaks = self.breaks();
        let mut out = Vec::with_capacity(self.n_nodes / 2);
        for w in breaks.windows(2) {
            let (nodes, _) = rule.on_interval(w[0], w[1]);
            out.extend(nodes);
        }
        out
    }
}

/// Barycentric interpolation of samples taken at the positive nodes of a
/// [`KGridSpec`] layout; extended to `k < 0` by conjugation and by zero past
/// `k_max`.
#[derive(Debug, Clone)]
pub struct PanelInterpolator {
    breaks: Vec<f64>,
    order: usize,
    /// Reference nodes on [−1, 1].
    ref_nodes: Vec<f64>,
    bary: Vec<f64>,
}

impl PanelInterpolator {
    pub fn new(breaks: Vec<f64>, order: usize) -> Self {
        let rule = GaussLegendre::<f64>::new(order);
        let bary = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .enumerate()
            .map(|(j, (x, w))| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                s * ((1.0 - x * x) * w).sqrt()
            })
            .collect();
        Self {
            breaks,
            order,
            ref_nodes: rule.nodes,
            bary,
        }
    }

    pub fn k_max(&self) -> f64 {
        *self.breaks.last().unwrap_or(&0.0)
    }

    /// Interpolate `values` (positive-node samples) at `k`.
    pub fn eval(&self, values: &[Complex64], k: f64) -> Complex64 {
        if k < 0.0 {
            return self.eval(values, -k).conj();
        }
        if k > self.k_max() {
            return Complex64::new(0.0, 0.0);
        }
        let p = self.breaks.partition_point(|&b| b <= k).clamp(1, self.breaks.len() - 1) - 1;
        let (a, b) = (self.breaks[p], self.breaks[p + 1]);
        let xi = (2.0 * k - a - b) / (b - a);
        let vals = &values[p * self.order..(p + 1) * self.order];
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for j in 0..self.order {
            let d = xi - self.ref_nodes[j];
            if d == 0.0 {
                return vals[j];
            }
            let c = self.bary[j] / d;
            num += vals[j] * c;
            den += c;
        }
        num / den
    }
}
