//! Spatial grids on a compact interval.

use crate::error::{Error, Result};

/// A strictly increasing set of nodes `a = x_0 < x_1 < ... < x_n = b`.
///
/// The grid carries the mesh widths `h_max` and `h_min` and remembers whether
/// it was constructed with equal spacing, which lets downstream code pick
/// exact node-containment refinements.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    h_max: f64,
    h_min: f64,
    uniform: bool,
}

impl Grid {
    /// Equispaced grid with `n` subintervals on `[a, b]`.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::input(format!("grid endpoints must satisfy a < b, got [{a}, {b}]")));
        }
        if n < 1 {
            return Err(Error::input("a grid needs at least one subinterval"));
        }
        let mut nodes = Vec::with_capacity(n + 1);
        for j in 0..=n {
            nodes.push(a + (j as f64 / n as f64) * (b - a));
        }
        // force the endpoints so they compare bit-exactly with the habitat
        nodes[0] = a;
        nodes[n] = b;
        let (h_max, h_min) = spacing_range(&nodes);
        Ok(Grid { nodes, h_max, h_min, uniform: true })
    }

    /// Grid from explicit nodes; they must be finite and strictly increasing.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::input("a grid needs at least two nodes"));
        }
        for w in nodes.windows(2) {
            if !(w[0].is_finite() && w[1].is_finite() && w[0] < w[1]) {
                return Err(Error::input("grid nodes must be finite and strictly increasing"));
            }
        }
        let (h_max, h_min) = spacing_range(&nodes);
        let uniform = (h_max - h_min) <= 1e-12 * h_max;
        Ok(Grid { nodes, h_max, h_min, uniform })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of subintervals `n`.
    pub fn subintervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn a(&self) -> f64 {
        self.nodes[0]
    }

    pub fn b(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Index `i` of the subinterval `[x_i, x_{i+1})` containing `x`, clamped
    /// to the last subinterval so that `x = b` maps to `n - 1`.
    pub fn interval_of(&self, x: f64) -> usize {
        let n = self.subintervals();
        let i = self.nodes.partition_point(|&node| node <= x);
        i.saturating_sub(1).min(n - 1)
    }
}

fn spacing_range(nodes: &[f64]) -> (f64, f64) {
    let mut h_max = f64::MIN;
    let mut h_min = f64::MAX;
    for w in nodes.windows(2) {
        let h = w[1] - w[0];
        h_max = h_max.max(h);
        h_min = h_min.min(h);
    }
    (h_max, h_min)
}

/// `count` equispaced points spanning `[a, b]`, endpoints included.
pub fn sample_points(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2, "sampling needs at least the two endpoints");
    let mut pts = Vec::with_capacity(count);
    for j in 0..count {
        pts.push(a + (j as f64 / (count - 1) as f64) * (b - a));
    }
    pts[0] = a;
    pts[count - 1] = b;
    pts
}
