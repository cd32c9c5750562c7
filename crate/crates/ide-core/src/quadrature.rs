//! Composite trapezoidal quadrature on a spatial grid.
//!
//! This is the only rule provided: every integral-operator evaluation in the
//! crate runs through it, so refining the grid is the single knob controlling
//! quadrature accuracy.

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Nodes and nonnegative weights of a composite rule with
/// `sum(weights) = b - a` up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Composite trapezoidal rule on the nodes of `grid`:
/// `w_0 = (x_1-x_0)/2`, `w_j = (x_{j+1}-x_{j-1})/2`, `w_n = (x_n-x_{n-1})/2`.
///
/// Grids always carry at least two nodes, so this cannot fail.
pub fn trapezoid_rule(grid: &Grid) -> QuadratureRule {
    let x = grid.nodes();
    let n = x.len() - 1;
    let mut weights = vec![0.0; n + 1];
    weights[0] = (x[1] - x[0]) / 2.0;
    weights[n] = (x[n] - x[n - 1]) / 2.0;
    for j in 1..n {
        weights[j] = (x[j + 1] - x[j - 1]) / 2.0;
    }
    QuadratureRule { nodes: x.to_vec(), weights }
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Weighted sum `sum_j w_j * values_j` for samples of the integrand at
    /// the quadrature nodes.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.nodes.len() {
            return Err(Error::input(format!(
                "integrand has {} samples but the rule has {} nodes",
                values.len(),
                self.nodes.len()
            )));
        }
        Ok(self.weights.iter().zip(values).map(|(w, v)| w * v).sum())
    }

    /// Convenience: integrate a function by sampling it at the nodes.
    pub fn integrate_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}
