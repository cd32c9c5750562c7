//! Integrodifference models: dispersal kernels, growth nonlinearities and
//! the linear-growth / Lipschitz coefficients consumed by the analysis.
//!
//! The right-hand side is the Hammerstein kernel
//! `f_t(x, y, z) = k_t(x, y) * g_t(y, z)`, optionally plus a space-dependent
//! inhomogeneity. Suprema over space that appear in the coefficient
//! definitions are approximated by maxima over the evaluation grid of a
//! [`SupScheme`]; pass a scheme whose quadrature matches the discretization
//! under study when the bounds must dominate discretized operator values
//! exactly.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{sample_points, Grid};
use crate::quadrature::{trapezoid_rule, QuadratureRule};

pub type TimeFn = Arc<dyn Fn(i64) -> f64 + Send + Sync>;
pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceTimeFn = Arc<dyn Fn(i64, f64) -> f64 + Send + Sync>;
pub type KernelFn = Arc<dyn Fn(i64, f64, f64) -> f64 + Send + Sync>;

/// The compact habitat `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Habitat {
    a: f64,
    b: f64,
}

impl Habitat {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::input(format!("habitat needs finite a < b, got [{a}, {b}]")));
        }
        Ok(Habitat { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }
}

/// Discrete time interval on which the recursion is defined; `None` bounds
/// mean unbounded in that direction.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TimeDomain {
    pub min: Option<i64>,
    pub max: Option<i64>,
}

impl TimeDomain {
    pub fn unbounded() -> Self {
        TimeDomain::default()
    }

    pub fn from(min: i64) -> Self {
        TimeDomain { min: Some(min), max: None }
    }

    pub fn contains(&self, t: i64) -> bool {
        self.min.is_none_or(|m| m <= t) && self.max.is_none_or(|m| t <= m)
    }

    pub(crate) fn require(&self, t: i64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::input(format!("time {t} outside the model's time domain")))
        }
    }
}

/// Dispersal kernel `k_t(x, y) >= 0`.
#[derive(Clone)]
pub enum KernelSpec {
    /// `k_t(x, y) = delta_t/2 * exp(-delta_t |x - y|)` with `delta_t > 0`.
    Laplace { dispersal: TimeFn },
    /// Arbitrary nonnegative kernel; `k0` may supply
    /// `sup_x int |k(x, y)| dy` when it is known, otherwise it is estimated.
    Custom { eval: KernelFn, k0: Option<f64> },
}

impl KernelSpec {
    pub fn laplace(dispersal: TimeFn) -> Self {
        KernelSpec::Laplace { dispersal }
    }

    pub(crate) fn eval_raw(&self, t: i64, x: f64, y: f64) -> f64 {
        match self {
            KernelSpec::Laplace { dispersal } => {
                let d = dispersal(t);
                0.5 * d * (-d * (x - y).abs()).exp()
            }
            KernelSpec::Custom { eval, .. } => eval(t, x, y),
        }
    }

    pub fn dispersal_at(&self, t: i64) -> Option<f64> {
        match self {
            KernelSpec::Laplace { dispersal } => Some(dispersal(t)),
            KernelSpec::Custom { .. } => None,
        }
    }
}

/// Growth nonlinearity `g_t(y, z)`.
#[derive(Clone)]
pub enum GrowthSpec {
    /// `g(y, z) = gamma_t(y) * z / (1 + z^alpha)`, `alpha > 0`.
    BevertonHolt { alpha: f64, gamma: SpaceTimeFn },
    /// `g(z) = gamma_t * z * exp(-z)`.
    Ricker { gamma: TimeFn },
}

/// Additive space profile `b(x) >= 0`; the optional second derivative is
/// used for cubic end conditions and may be omitted (finite differences are
/// substituted).
#[derive(Clone)]
pub struct Inhomogeneity {
    pub f: SpaceFn,
    pub second_derivative: Option<SpaceFn>,
}

impl Inhomogeneity {
    pub fn constant(c: f64) -> Self {
        Inhomogeneity { f: Arc::new(move |_| c), second_derivative: Some(Arc::new(|_| 0.0)) }
    }

    pub fn from_fn(f: SpaceFn) -> Self {
        Inhomogeneity { f, second_derivative: None }
    }
}

/// Evaluation scheme for the space suprema in coefficient definitions:
/// a maximum over `x_points` of integrals computed with `rule`.
#[derive(Clone)]
pub struct SupScheme {
    pub x_points: Vec<f64>,
    pub rule: QuadratureRule,
}

impl SupScheme {
    /// Uniform scheme with `resolution` subintervals for both the max grid
    /// and the quadrature.
    pub fn uniform(habitat: Habitat, resolution: usize) -> Self {
        let grid = Grid::uniform(habitat.a(), habitat.b(), resolution.max(2))
            .expect("habitat endpoints are validated");
        SupScheme {
            x_points: sample_points(habitat.a(), habitat.b(), resolution.max(2) + 1),
            rule: trapezoid_rule(&grid),
        }
    }
}

/// A full model `u_{t+1} = int_Omega k_t(., y) g_t(y, u_t(y)) dy (+ b)`.
#[derive(Clone)]
pub struct IdeModel {
    habitat: Habitat,
    kernel: KernelSpec,
    growth: GrowthSpec,
    inhomogeneity: Option<Inhomogeneity>,
    time_domain: TimeDomain,
}

/// Coefficients of the linear growth bound `|f_t| <= beta + alpha |z|`
/// integrated over the habitat, plus the Lipschitz bound on balls.
#[derive(Debug, Clone, Copy)]
pub struct GrowthBounds {
    pub a_t: f64,
    pub b_t: f64,
    lipschitz: f64,
}

impl GrowthBounds {
    /// Lipschitz bound `ell_t(r)`; constant in `r` for both growth families.
    pub fn ell(&self, _r: f64) -> f64 {
        self.lipschitz
    }
}

impl IdeModel {
    pub fn new(
        habitat: Habitat,
        kernel: KernelSpec,
        growth: GrowthSpec,
        inhomogeneity: Option<Inhomogeneity>,
        time_domain: TimeDomain,
    ) -> Result<Self> {
        if let GrowthSpec::BevertonHolt { alpha, .. } = &growth {
            if !(alpha.is_finite() && *alpha > 0.0) {
                return Err(Error::input(format!("Beverton-Holt alpha must be positive, got {alpha}")));
            }
        }
        if matches!(growth, GrowthSpec::Ricker { .. }) && inhomogeneity.is_none() {
            return Err(Error::input(
                "Ricker models need an inhomogeneity (a zero profile is allowed)",
            ));
        }
        Ok(IdeModel { habitat, kernel, growth, inhomogeneity, time_domain })
    }

    pub fn habitat(&self) -> Habitat {
        self.habitat
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn growth(&self) -> &GrowthSpec {
        &self.growth
    }

    pub fn inhomogeneity(&self) -> Option<&Inhomogeneity> {
        self.inhomogeneity.as_ref()
    }

    pub fn time_domain(&self) -> TimeDomain {
        self.time_domain
    }

    /// Kernel value `k_t(x, y)`; both points must lie in the habitat.
    pub fn kernel_eval(&self, t: i64, x: f64, y: f64) -> Result<f64> {
        self.time_domain.require(t)?;
        if !self.habitat.contains(x) || !self.habitat.contains(y) {
            return Err(Error::input(format!("kernel arguments ({x}, {y}) outside the habitat")));
        }
        let v = self.kernel.eval_raw(t, x, y);
        if !v.is_finite() {
            return Err(Error::NonFinite { context: format!("kernel at t={t}, x={x}, y={y}") });
        }
        if v < 0.0 {
            return Err(Error::input(format!("kernel is negative at t={t}, x={x}, y={y}")));
        }
        Ok(v)
    }

    /// Growth value `g_t(y, z)` for `z >= 0`.
    pub fn growth_eval(&self, t: i64, y: f64, z: f64) -> Result<f64> {
        if !(z >= 0.0) {
            return Err(Error::input(format!("growth argument z = {z} must be nonnegative")));
        }
        let v = self.growth_raw(t, y, z);
        if !v.is_finite() {
            return Err(Error::NonFinite { context: format!("growth at t={t}, y={y}, z={z}") });
        }
        if v < 0.0 {
            return Err(Error::input(format!("growth rate is negative at t={t}, y={y}")));
        }
        Ok(v)
    }

    pub(crate) fn growth_raw(&self, t: i64, y: f64, z: f64) -> f64 {
        match &self.growth {
            GrowthSpec::BevertonHolt { alpha, gamma } => {
                gamma(t, y) * z / (1.0 + z.powf(*alpha))
            }
            GrowthSpec::Ricker { gamma } => gamma(t) * z * (-z).exp(),
        }
    }

    /// `sup_x int k_t(x, y) dy`, estimated with `scheme` unless a custom
    /// kernel supplies the constant.
    pub fn kernel_mass_sup(&self, t: i64, scheme: &SupScheme) -> f64 {
        if let KernelSpec::Custom { k0: Some(k0), .. } = &self.kernel {
            return *k0;
        }
        scheme
            .x_points
            .iter()
            .map(|&x| scheme.rule.integrate_fn(|y| self.kernel.eval_raw(t, x, y)))
            .fold(0.0, f64::max)
    }

    /// `sup_x int k_t(x, y) gamma_t(y) dy` for Beverton-Holt growth.
    fn bh_ell(&self, t: i64, gamma: &SpaceTimeFn, scheme: &SupScheme) -> f64 {
        scheme
            .x_points
            .iter()
            .map(|&x| {
                scheme.rule.integrate_fn(|y| self.kernel.eval_raw(t, x, y) * gamma(t, y))
            })
            .fold(0.0, f64::max)
    }

    /// Sup of the inhomogeneity over the evaluation grid (0 if absent).
    pub fn sup_inhomogeneity(&self, scheme: &SupScheme) -> f64 {
        match &self.inhomogeneity {
            None => 0.0,
            Some(inh) => scheme.x_points.iter().map(|&x| (inh.f)(x).abs()).fold(0.0, f64::max),
        }
    }

    /// Lipschitz bound `ell_t(r)` of the discretization-free operator on the
    /// ball of radius `r`: `sup_x int k gamma dy` for Beverton-Holt (the
    /// growth profile has global Lipschitz constant 1) and
    /// `gamma_t k_0 / e^2` for Ricker.
    pub fn lipschitz_bound(&self, t: i64, r: f64, scheme: &SupScheme) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::input(format!("ball radius must be positive, got {r}")));
        }
        self.time_domain.require(t)?;
        Ok(match &self.growth {
            GrowthSpec::BevertonHolt { gamma, .. } => self.bh_ell(t, gamma, scheme),
            GrowthSpec::Ricker { gamma } => {
                gamma(t) * self.kernel_mass_sup(t, scheme) / std::f64::consts::E.powi(2)
            }
        })
    }

    /// Linear growth coefficients `(a_t, b_t)` such that the operator obeys
    /// `||F_t(u)|| <= b_t + a_t ||u||`.
    ///
    /// For Beverton-Holt with `alpha < 1` the bound is the tangent to the
    /// growth profile at `zeta`, which must be supplied; for `alpha >= 1`
    /// and Ricker the profile is globally bounded and `zeta` is ignored.
    pub fn linear_growth_bounds(
        &self,
        t: i64,
        zeta: Option<f64>,
        scheme: &SupScheme,
    ) -> Result<GrowthBounds> {
        self.time_domain.require(t)?;
        match &self.growth {
            GrowthSpec::BevertonHolt { alpha, gamma } => {
                let ell = self.bh_ell(t, gamma, scheme);
                if *alpha < 1.0 {
                    let zeta = zeta.ok_or_else(|| {
                        Error::input("alpha < 1 needs a tangent point zeta > 0")
                    })?;
                    if !(zeta > 0.0) {
                        return Err(Error::input(format!("zeta must be positive, got {zeta}")));
                    }
                    let (slope, offset) = tangent_coefficients(*alpha, zeta);
                    Ok(GrowthBounds { a_t: slope * ell, b_t: offset * ell, lipschitz: ell })
                } else {
                    let sup_g = if *alpha == 1.0 {
                        1.0
                    } else {
                        (alpha - 1.0).powf(1.0 - 1.0 / alpha) / alpha
                    };
                    Ok(GrowthBounds { a_t: 0.0, b_t: sup_g * ell, lipschitz: ell })
                }
            }
            GrowthSpec::Ricker { gamma } => {
                let k0 = self.kernel_mass_sup(t, scheme);
                let g = gamma(t);
                let e = std::f64::consts::E;
                Ok(GrowthBounds {
                    a_t: 0.0,
                    b_t: g * k0 / e + self.sup_inhomogeneity(scheme),
                    lipschitz: g * k0 / (e * e),
                })
            }
        }
    }

    /// Smallest point of a logarithmic grid at which the tangent slope of the
    /// `alpha < 1` Beverton-Holt bound satisfies `a_t < 1/p` for every time
    /// in `times`.
    pub fn choose_zeta(&self, p: f64, times: &[i64], scheme: &SupScheme) -> Result<f64> {
        let GrowthSpec::BevertonHolt { alpha, gamma } = &self.growth else {
            return Err(Error::input("tangent points only apply to Beverton-Holt growth"));
        };
        if *alpha >= 1.0 {
            return Err(Error::input("tangent points only apply to alpha < 1"));
        }
        let ell_sup = times
            .iter()
            .map(|&t| self.bh_ell(t, gamma, scheme))
            .fold(0.0, f64::max);
        for k in -24..=48 {
            let zeta = 10f64.powf(k as f64 / 8.0);
            let (slope, _) = tangent_coefficients(*alpha, zeta);
            if slope * ell_sup < 1.0 / p {
                return Ok(zeta);
            }
        }
        Err(Error::precondition(format!(
            "no tangent point with a_t < 1/p found (p = {p}, sup ell = {ell_sup})"
        )))
    }

    /// The autonomous limit of a Ricker model: growth frozen at
    /// `gamma_limit`, time domain unrestricted.
    pub fn freeze_ricker(&self, gamma_limit: f64) -> Result<IdeModel> {
        if !matches!(self.growth, GrowthSpec::Ricker { .. }) {
            return Err(Error::input("freeze_ricker requires a Ricker model"));
        }
        Ok(IdeModel {
            habitat: self.habitat,
            kernel: self.kernel.clone(),
            growth: GrowthSpec::Ricker { gamma: Arc::new(move |_| gamma_limit) },
            inhomogeneity: self.inhomogeneity.clone(),
            time_domain: TimeDomain::unbounded(),
        })
    }
}

/// Slope and offset of the tangent to `g_alpha(z) = z/(1+z^alpha)` at `zeta`,
/// which majorizes the profile on the nonnegative axis for `alpha < 1`.
fn tangent_coefficients(alpha: f64, zeta: f64) -> (f64, f64) {
    let za = zeta.powf(alpha);
    let denom = (1.0 + za) * (1.0 + za);
    let slope = (1.0 + (1.0 - alpha) * za) / denom;
    let offset = alpha * zeta.powf(1.0 + alpha) / denom;
    (slope, offset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn const_time(v: f64) -> TimeFn {
        Arc::new(move |_| v)
    }

    fn flat_kernel() -> KernelSpec {
        // unit mass on [0, 1]
        KernelSpec::Custom { eval: Arc::new(|_, _, _| 1.0), k0: Some(1.0) }
    }

    fn bh_model(alpha: f64, kernel: KernelSpec, habitat: Habitat) -> IdeModel {
        IdeModel::new(
            habitat,
            kernel,
            GrowthSpec::BevertonHolt { alpha, gamma: Arc::new(|_, _| 1.0) },
            None,
            TimeDomain::unbounded(),
        )
        .unwrap()
    }

    fn ricker_model(gamma: f64, kernel: KernelSpec, habitat: Habitat) -> IdeModel {
        IdeModel::new(
            habitat,
            kernel,
            GrowthSpec::Ricker { gamma: const_time(gamma) },
            Some(Inhomogeneity::constant(0.0)),
            TimeDomain::unbounded(),
        )
        .unwrap()
    }

    #[test]
    fn laplace_kernel_values() {
        let habitat = Habitat::new(-3.0, 3.0).unwrap();
        let m = bh_model(1.0, KernelSpec::laplace(const_time(2.0)), habitat);
        assert_abs_diff_eq!(m.kernel_eval(0, 0.7, 0.7).unwrap(), 1.0, epsilon = 1e-15);
        let half = m.kernel_eval(0, 0.0, 2f64.ln() / 2.0).unwrap();
        assert_abs_diff_eq!(half, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn laplace_kernel_with_time_varying_dispersal() {
        let habitat = Habitat::new(-3.0, 3.0).unwrap();
        let dispersal: TimeFn = Arc::new(|t| 2.0 + (t as f64 / 3.0).sin());
        let m = bh_model(1.0, KernelSpec::laplace(dispersal), habitat);
        // delta_0 = 2, so k_0(0, 1) = 1 * e^{-2}
        assert_relative_eq!(m.kernel_eval(0, 0.0, 1.0).unwrap(), (-2.0f64).exp(), epsilon = 1e-12);
        assert!(m.kernel_eval(0, 4.0, 0.0).is_err());
    }

    #[test]
    fn growth_values() {
        let habitat = Habitat::new(0.0, 1.0).unwrap();
        let bh1 = bh_model(1.0, flat_kernel(), habitat);
        assert_abs_diff_eq!(bh1.growth_eval(0, 0.5, 1.0).unwrap(), 0.5, epsilon = 1e-15);
        let rick = ricker_model(1.0, flat_kernel(), habitat);
        assert_relative_eq!(
            rick.growth_eval(0, 0.5, 1.0).unwrap(),
            (-1.0f64).exp(),
            epsilon = 1e-14
        );
        // alpha = 2: value at z = 1 is the global maximum 1/2
        let bh2 = bh_model(2.0, flat_kernel(), habitat);
        assert_abs_diff_eq!(bh2.growth_eval(0, 0.5, 1.0).unwrap(), 0.5, epsilon = 1e-15);
        assert!(bh2.growth_eval(0, 0.5, -0.1).is_err());
    }

    #[test]
    fn growth_bounds_for_bounded_profiles() {
        let habitat = Habitat::new(0.0, 1.0).unwrap();
        let scheme = SupScheme::uniform(habitat, 64);
        let bh2 = bh_model(2.0, flat_kernel(), habitat);
        let gb = bh2.linear_growth_bounds(0, None, &scheme).unwrap();
        assert_abs_diff_eq!(gb.a_t, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gb.b_t, 0.5, epsilon = 1e-12);

        let bh1 = bh_model(1.0, flat_kernel(), habitat);
        let gb = bh1.linear_growth_bounds(0, None, &scheme).unwrap();
        assert_abs_diff_eq!(gb.a_t, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gb.b_t, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn tangent_bounds_for_small_alpha() {
        let habitat = Habitat::new(0.0, 1.0).unwrap();
        let scheme = SupScheme::uniform(habitat, 64);
        let m = bh_model(0.5, flat_kernel(), habitat);
        let gb = m.linear_growth_bounds(0, Some(4.0), &scheme).unwrap();
        assert_relative_eq!(gb.a_t, 2.0 / 9.0, epsilon = 1e-12);
        assert_relative_eq!(gb.b_t, 4.0 / 9.0, epsilon = 1e-12);
        // tangency oracle: the line touches g at zeta with matching slope
        let g = |z: f64| z / (1.0 + z.sqrt());
        assert_relative_eq!(gb.a_t * 4.0 + gb.b_t, g(4.0), epsilon = 1e-12);
        let h = 1e-6;
        let slope_fd = (g(4.0 + h) - g(4.0 - h)) / (2.0 * h);
        assert_relative_eq!(gb.a_t, slope_fd, epsilon = 1e-8);
        // zeta is required and must be positive
        assert!(m.linear_growth_bounds(0, None, &scheme).is_err());
        assert!(m.linear_growth_bounds(0, Some(-1.0), &scheme).is_err());
    }

    #[test]
    fn tangent_majorizes_growth_profile() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let habitat = Habitat::new(0.0, 1.0).unwrap();
        let scheme = SupScheme::uniform(habitat, 64);
        for &alpha in &[0.3, 0.5, 0.8] {
            let m = bh_model(alpha, flat_kernel(), habitat);
            for &zeta in &[0.5, 2.0, 10.0, 100.0] {
                let gb = m.linear_growth_bounds(0, Some(zeta), &scheme).unwrap();
                for _ in 0..200 {
                    let z: f64 = rng.random_range(0.0..50.0);
                    let g = z / (1.0 + z.powf(alpha));
                    assert!(
                        g <= gb.b_t + gb.a_t * z + 1e-12,
                        "alpha {alpha}, zeta {zeta}, z {z}"
                    );
                }
            }
        }
    }

    #[test]
    fn bounded_profile_bound_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for &alpha in &[1.0, 1.5, 2.0, 4.0] {
            let sup = if alpha == 1.0 {
                1.0
            } else {
                (alpha - 1.0f64).powf(1.0 - 1.0 / alpha) / alpha
            };
            for _ in 0..300 {
                let z: f64 = rng.random_range(0.0..100.0);
                assert!(z / (1.0 + z.powf(alpha)) <= sup + 1e-12);
            }
        }
    }

    #[test]
    fn growth_lipschitz_witnesses() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let z: f64 = rng.random_range(0.0..10.0);
            let w: f64 = rng.random_range(0.0..10.0);
            let g = |v: f64| v / (1.0 + v);
            assert!((g(z) - g(w)).abs() <= (z - w).abs() + 1e-12);
        }
        // Ricker: the e^{-2} constant is the slope bound past the hump, so
        // the witness is sampled on [1, 10].
        for _ in 0..500 {
            let z: f64 = rng.random_range(1.0..10.0);
            let w: f64 = rng.random_range(1.0..10.0);
            let g = |v: f64| v * (-v).exp();
            assert!(
                (g(z) - g(w)).abs() <= (z - w).abs() / std::f64::consts::E.powi(2) + 1e-12,
                "z {z}, w {w}"
            );
        }
    }

    #[test]
    fn ricker_coefficients() {
        let habitat = Habitat::new(0.0, 1.0).unwrap();
        let scheme = SupScheme::uniform(habitat, 64);
        let m = ricker_model(1.0, flat_kernel(), habitat);
        let e = std::f64::consts::E;
        assert_relative_eq!(m.lipschitz_bound(0, 1.0, &scheme).unwrap(), 1.0 / (e * e), epsilon = 1e-12);
        let gb = m.linear_growth_bounds(0, None, &scheme).unwrap();
        assert_abs_diff_eq!(gb.a_t, 0.0, epsilon = 1e-15);
        assert_relative_eq!(gb.b_t, 1.0 / e, epsilon = 1e-12);
        assert_relative_eq!(gb.ell(3.0), 1.0 / (e * e), epsilon = 1e-12);
    }

    #[test]
    fn bh_lipschitz_is_the_weighted_kernel_mass() {
        let habitat = Habitat::new(0.0, 1.0).unwrap();
        let scheme = SupScheme::uniform(habitat, 64);
        let m = bh_model(1.0, flat_kernel(), habitat);
        assert_relative_eq!(m.lipschitz_bound(0, 5.0, &scheme).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lipschitz_sup_matches_fine_grid_oracle() {
        // sup_x 3 * int_{-3}^{3} k(x,y) dy for the Laplace kernel, delta = 2
        let habitat = Habitat::new(-3.0, 3.0).unwrap();
        let m = IdeModel::new(
            habitat,
            KernelSpec::laplace(const_time(2.0)),
            GrowthSpec::BevertonHolt { alpha: 1.0, gamma: Arc::new(|_, _| 3.0) },
            None,
            TimeDomain::unbounded(),
        )
        .unwrap();
        let scheme = SupScheme::uniform(habitat, 512);
        let got = m.lipschitz_bound(0, 1.0, &scheme).unwrap();

        // independent oracle: direct trapezoidal sums over a fine x grid
        let fine = 4096usize;
        let mut oracle: f64 = 0.0;
        for i in 0..=fine {
            let x = -3.0 + 6.0 * i as f64 / fine as f64;
            let mut acc = 0.0;
            for q in 0..=fine {
                let y = -3.0 + 6.0 * q as f64 / fine as f64;
                let w = if q == 0 || q == fine { 0.5 } else { 1.0 };
                acc += w * (6.0 / fine as f64) * (-2.0 * (x - y).abs()).exp();
            }
            oracle = oracle.max(3.0 * acc);
        }
        assert_relative_eq!(got, oracle, epsilon = 1e-3);
    }

    #[test]
    fn zeta_search_prefers_small_tangent_points() {
        let habitat = Habitat::new(0.0, 1.0).unwrap();
        let scheme = SupScheme::uniform(habitat, 64);
        let m = bh_model(0.5, flat_kernel(), habitat);
        let p = 3.0;
        let zeta = m.choose_zeta(p, &[0], &scheme).unwrap();
        let gb = m.linear_growth_bounds(0, Some(zeta), &scheme).unwrap();
        assert!(gb.a_t < 1.0 / p);
        // the previous grid point must violate the condition
        let prev = zeta / 10f64.powf(1.0 / 8.0);
        let gb_prev = m.linear_growth_bounds(0, Some(prev), &scheme).unwrap();
        assert!(gb_prev.a_t >= 1.0 / p);
    }

    #[test]
    fn nonnegativity_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let habitat = Habitat::new(-3.0, 3.0).unwrap();
        let dispersal: TimeFn = Arc::new(|t| 2.0 + (t as f64 / 3.0).sin());
        let gamma: SpaceTimeFn = Arc::new(|t, x| 3.0 - (t as f64 * x / 5.0).sin());
        let m = IdeModel::new(
            habitat,
            KernelSpec::laplace(dispersal),
            GrowthSpec::BevertonHolt { alpha: 0.5, gamma },
            None,
            TimeDomain::unbounded(),
        )
        .unwrap();
        for _ in 0..300 {
            let t = rng.random_range(-40..40);
            let x = rng.random_range(-3.0..3.0);
            let y = rng.random_range(-3.0..3.0);
            let z = rng.random_range(0.0..20.0);
            assert!(m.kernel_eval(t, x, y).unwrap() >= 0.0);
            assert!(m.growth_eval(t, y, z).unwrap() >= 0.0);
        }
    }

    #[test]
    fn ricker_requires_inhomogeneity() {
        let habitat = Habitat::new(0.0, 1.0).unwrap();
        let r = IdeModel::new(
            habitat,
            flat_kernel(),
            GrowthSpec::Ricker { gamma: const_time(1.0) },
            None,
            TimeDomain::unbounded(),
        );
        assert!(r.is_err());
    }
}
