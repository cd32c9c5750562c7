//! B-spline ansatz spaces of degree 1 to 3 and their collocation projections.
//!
//! The three projections implemented here are
//! * degree 1: nodal interpolation by hat functions (operator norm 1),
//! * degree 2: collocation at `a`, the interval midpoints and `b`
//!   (operator norm at most 2),
//! * degree 3: nodal interpolation plus second-derivative end conditions
//!   (operator norm at most `1 + 3/2 * h_max/h_min`).
//!
//! Basis functions use the Cox–de Boor recursion over a strictly increasing
//! knot extension of the grid, so no knot multiplicities occur anywhere.

use std::sync::Arc;

use rand::Rng;

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Largest pivot-ratio estimate accepted before a collocation system is
/// reported as ill-conditioned.
const CONDITION_LIMIT: f64 = 1e13;

/// A spline space of degree `l` over a grid, spanned by the B-splines
/// `beta_{-l}, ..., beta_{n-1}` restricted to `[a, b]`.
#[derive(Debug, Clone)]
pub struct SplineSpace {
    grid: Arc<Grid>,
    degree: usize,
    // knots[k] = x_{k-l} for the extended node sequence, k = 0..=n+2l
    knots: Vec<f64>,
}

impl SplineSpace {
    /// Build the space, extending the grid by `degree` knots on both sides.
    ///
    /// Uniform grids continue with their spacing; nonuniform grids mirror
    /// their boundary spacings outward.
    pub fn new(grid: Arc<Grid>, degree: usize) -> Result<Self> {
        if !(1..=3).contains(&degree) {
            return Err(Error::input(format!("spline degree must be 1, 2 or 3, got {degree}")));
        }
        let l = degree;
        let nodes = grid.nodes();
        let n = grid.subintervals();
        let mut knots = vec![0.0; n + 2 * l + 1];
        knots[l..=l + n].copy_from_slice(nodes);
        for m in 1..=l {
            let dl = nodes[m.min(n)] - nodes[m.min(n) - 1];
            knots[l - m] = knots[l - m + 1] - dl;
            let dr = nodes[n + 1 - m.min(n)] - nodes[n - m.min(n)];
            knots[l + n + m] = knots[l + n + m - 1] + dr;
        }
        Ok(SplineSpace { grid, degree, knots })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Dimension `n + l` of the restricted span.
    pub fn dim(&self) -> usize {
        self.grid.subintervals() + self.degree
    }

    fn knot(&self, j: isize) -> f64 {
        self.knots[(j + self.degree as isize) as usize]
    }

    /// Basis index range: `-l ..= n-1`.
    pub fn basis_range(&self) -> std::ops::RangeInclusive<isize> {
        let l = self.degree as isize;
        let n = self.grid.subintervals() as isize;
        -l..=n - 1
    }

    /// Evaluate `beta_j` at `x` in `[a, b]`.
    pub fn basis_eval(&self, j: isize, x: f64) -> Result<f64> {
        if !self.basis_range().contains(&j) {
            return Err(Error::input(format!("basis index {j} outside {:?}", self.basis_range())));
        }
        if x < self.grid.a() || x > self.grid.b() {
            return Err(Error::input(format!("x = {x} outside the habitat")));
        }
        Ok(self.basis_raw(j, self.degree, x))
    }

    /// Cox–de Boor recursion; callers guarantee `x` lies in `[a, b]` so all
    /// required extension knots exist.
    fn basis_raw(&self, j: isize, deg: usize, x: f64) -> f64 {
        if deg == 0 {
            return if self.knot(j) <= x && x < self.knot(j + 1) { 1.0 } else { 0.0 };
        }
        let d = deg as isize;
        let t_j = self.knot(j);
        let t_jd = self.knot(j + d);
        let t_j1 = self.knot(j + 1);
        let t_jd1 = self.knot(j + d + 1);
        let left = (x - t_j) / (t_jd - t_j) * self.basis_raw(j, deg - 1, x);
        let right = (t_jd1 - x) / (t_jd1 - t_j1) * self.basis_raw(j + 1, deg - 1, x);
        left + right
    }

    /// `order`-th derivative of `beta_j` at `x` (order 0 is the value).
    fn basis_deriv(&self, j: isize, deg: usize, x: f64, order: usize) -> f64 {
        if order == 0 {
            return self.basis_raw(j, deg, x);
        }
        debug_assert!(order <= deg);
        let d = deg as isize;
        let a = self.basis_deriv(j, deg - 1, x, order - 1) / (self.knot(j + d) - self.knot(j));
        let b = self.basis_deriv(j + 1, deg - 1, x, order - 1)
            / (self.knot(j + d + 1) - self.knot(j + 1));
        deg as f64 * (a - b)
    }

    /// Collocation points of the projection for this degree.
    pub fn collocation_points(&self) -> Vec<f64> {
        let nodes = self.grid.nodes();
        match self.degree {
            2 => {
                let mut pts = Vec::with_capacity(nodes.len() + 1);
                pts.push(nodes[0]);
                for w in nodes.windows(2) {
                    pts.push((w[0] + w[1]) / 2.0);
                }
                pts.push(*nodes.last().unwrap());
                pts
            }
            _ => nodes.to_vec(),
        }
    }

    /// First basis index whose support meets the subinterval containing `x`.
    fn first_active(&self, x: f64) -> isize {
        self.grid.interval_of(x) as isize - self.degree as isize
    }
}

/// A spline as coefficients over the basis of its space.
#[derive(Debug, Clone)]
pub struct SplineFunction {
    space: Arc<SplineSpace>,
    coeffs: Vec<f64>,
}

impl SplineFunction {
    pub fn new(space: Arc<SplineSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(Error::input(format!(
                "coefficient count {} does not match space dimension {}",
                coeffs.len(),
                space.dim()
            )));
        }
        Ok(SplineFunction { space, coeffs })
    }

    pub fn space(&self) -> &Arc<SplineSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Evaluate at `x` in `[a, b]` using only the `l + 1` active basis terms.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let g = self.space.grid();
        if x < g.a() || x > g.b() {
            return Err(Error::input(format!("x = {x} outside [{}, {}]", g.a(), g.b())));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        let l = self.space.degree;
        let first = self.space.first_active(x);
        let mut acc = 0.0;
        for j in first..=first + l as isize {
            let c = self.coeffs[(j + l as isize) as usize];
            acc += c * self.space.basis_raw(j, l, x);
        }
        acc
    }

    /// `order`-th derivative at `x`; meaningful for `order <= degree - 1`
    /// everywhere and for `order = 2` on cubic splines.
    pub fn eval_deriv(&self, x: f64, order: usize) -> Result<f64> {
        let g = self.space.grid();
        if x < g.a() || x > g.b() {
            return Err(Error::input(format!("x = {x} outside [{}, {}]", g.a(), g.b())));
        }
        if order > self.space.degree {
            return Ok(0.0);
        }
        let l = self.space.degree;
        let first = self.space.first_active(x);
        let mut acc = 0.0;
        for j in first..=first + l as isize {
            let c = self.coeffs[(j + l as isize) as usize];
            acc += c * self.space.basis_deriv(j, l, x, order);
        }
        Ok(acc)
    }
}

/// Stability constant of the projection family for a given degree and grid.
#[derive(Debug, Clone, Copy)]
pub struct ProjectionFamily {
    degree: usize,
    p: f64,
}

impl ProjectionFamily {
    pub fn for_space(space: &SplineSpace) -> Self {
        let p = match space.degree() {
            1 => 1.0,
            2 => 2.0,
            _ => 1.0 + 1.5 * space.grid().h_max() / space.grid().h_min(),
        };
        ProjectionFamily { degree: space.degree(), p }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Uniform bound `p >= ||pi_n||`.
    pub fn stability_constant(&self) -> f64 {
        self.p
    }
}

/// Interpolate `values` given at the collocation points of `space`.
///
/// Degree 1 copies the values; degrees 2 and 3 assemble and solve a banded
/// collocation system. Degree 3 additionally needs the second derivatives
/// of the target at both endpoints.
pub fn project(
    space: &Arc<SplineSpace>,
    values: &[f64],
    end_second_derivatives: Option<(f64, f64)>,
) -> Result<SplineFunction> {
    let n = space.grid().subintervals();
    let points = space.collocation_points();
    if values.len() != points.len() {
        return Err(Error::input(format!(
            "{} collocation values supplied, {} expected",
            values.len(),
            points.len()
        )));
    }
    match space.degree() {
        1 => SplineFunction::new(space.clone(), values.to_vec()),
        2 => {
            let dim = n + 2;
            let mut m = BandedMatrix::new(dim, 1, 1);
            for (row, &xi) in points.iter().enumerate() {
                fill_row(space, &mut m, row, xi, 0, 1, 1);
            }
            solve_collocation(space, m, values.to_vec())
        }
        _ => {
            let (dd_a, dd_b) = end_second_derivatives.ok_or_else(|| {
                Error::input("cubic projection needs end second derivatives (u''(a), u''(b))")
            })?;
            let dim = n + 3;
            let mut m = BandedMatrix::new(dim, 2, 2);
            fill_row(space, &mut m, 0, space.grid().a(), 2, 2, 2);
            for (k, &xk) in points.iter().enumerate() {
                fill_row(space, &mut m, k + 1, xk, 0, 2, 2);
            }
            fill_row(space, &mut m, dim - 1, space.grid().b(), 2, 2, 2);
            let mut rhs = Vec::with_capacity(dim);
            rhs.push(dd_a);
            rhs.extend_from_slice(values);
            rhs.push(dd_b);
            solve_collocation(space, m, rhs)
        }
    }
}

fn fill_row(
    space: &SplineSpace,
    m: &mut BandedMatrix,
    row: usize,
    x: f64,
    order: usize,
    m1: usize,
    m2: usize,
) {
    let l = space.degree();
    let first = space.first_active(x);
    for j in first..=first + l as isize {
        let v = space.basis_deriv(j, l, x, order);
        let col = (j + l as isize) as usize;
        let in_band = col + m1 >= row && col <= row + m2;
        if in_band {
            m.set(row, col, v);
        } else {
            // entries outside the band are exact zeros of the basis
            debug_assert_eq!(v, 0.0, "row {row}, col {col}");
        }
    }
}

fn solve_collocation(
    space: &Arc<SplineSpace>,
    m: BandedMatrix,
    mut rhs: Vec<f64>,
) -> Result<SplineFunction> {
    let lu = m.decompose()?;
    if lu.condition_estimate() > CONDITION_LIMIT {
        return Err(Error::IllConditioned { estimate: lu.condition_estimate() });
    }
    lu.solve(&mut rhs);
    SplineFunction::new(space.clone(), rhs)
}

/// Sampling grid for sup norms: every grid subinterval is split into equal
/// parts so the result always contains the nodes, with at least
/// `max(base, 1024, 4n)` subintervals overall.
pub fn sup_samples(space: &SplineSpace, base: usize) -> Vec<f64> {
    let nodes = space.grid().nodes();
    let n = space.grid().subintervals();
    let target = base.max(1024).max(4 * n);
    let per = target.div_ceil(n);
    let mut pts = Vec::with_capacity(n * per + 1);
    for w in nodes.windows(2) {
        for j in 0..per {
            pts.push(w[0] + (j as f64 / per as f64) * (w[1] - w[0]));
        }
    }
    pts.push(*nodes.last().unwrap());
    pts
}

/// Empirical lower bound for the projection norm: the largest ratio
/// `||pi_n u|| / ||u||` over random piecewise-linear test functions with
/// values in `[-1, 1]` on random fine meshes.
pub fn lebesgue_estimate(
    space: &Arc<SplineSpace>,
    trials: usize,
    sample_count: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    if trials == 0 || sample_count == 0 {
        return Err(Error::input("lebesgue_estimate needs trials >= 1 and sample_points >= 1"));
    }
    let samples = sup_samples(space, sample_count);
    let points = space.collocation_points();
    let (a, b) = (space.grid().a(), space.grid().b());
    let end_dd = if space.degree() == 3 { Some((0.0, 0.0)) } else { None };

    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let m = rng.random_range(32..=256usize);
        let mesh_h = (b - a) / m as f64;
        let vals: Vec<f64> = (0..=m).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let test_fn = |x: f64| -> f64 {
            let i = (((x - a) / mesh_h).floor() as usize).min(m - 1);
            let t = (x - (a + i as f64 * mesh_h)) / mesh_h;
            vals[i] * (1.0 - t) + vals[i + 1] * t
        };
        let colloc_vals: Vec<f64> = points.iter().map(|&x| test_fn(x)).collect();
        let projected = project(space, &colloc_vals, end_dd)?;
        let num = samples.iter().map(|&x| projected.eval_unchecked(x).abs()).fold(0.0, f64::max);
        let den = samples.iter().map(|&x| test_fn(x).abs()).fold(0.0, f64::max);
        if den > 0.0 {
            worst = worst.max(num / den);
        }
    }
    Ok(worst)
}
