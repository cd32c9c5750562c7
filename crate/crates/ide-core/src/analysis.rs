//! Dissipativity radii, discretization-error bookkeeping, empirical
//! convergence rates for pullback witnesses and the forward-limit experiment
//! for asymptotically autonomous Ricker models.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::dynamics::{
    fixed_point_autonomous, pullback_state, step, sup_distance, trajectory, Discretization,
    FunctionSet, StateFunction,
};
use crate::error::{Error, Result};
use crate::model::{GrowthSpec, IdeModel, SpaceFn, SupScheme};

/// Which limit of the coefficient series is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Pullback,
    Forward,
}

/// Parameters of an absorbing-radius computation.
#[derive(Debug, Clone)]
pub struct RadiusQuery {
    /// Projection stability constant.
    pub p: f64,
    pub direction: Direction,
    pub tau: i64,
    /// Truncation tolerance for the coefficient series.
    pub tol: f64,
    /// Inflation factor of the absorbing ball, `rho > 1`.
    pub rho: f64,
    /// Tangent point for Beverton-Holt growth with `alpha < 1`; chosen
    /// automatically when absent.
    pub zeta: Option<f64>,
    pub max_terms: usize,
}

impl RadiusQuery {
    pub fn new(p: f64, direction: Direction, tau: i64, tol: f64) -> Self {
        RadiusQuery { p, direction, tau, tol, rho: 1.1, zeta: None, max_terms: 20_000 }
    }
}

/// A truncated absorbing radius `R_tau` with its inflation factor.
#[derive(Debug, Clone, Copy)]
pub struct AbsorbingRadius {
    pub tau: i64,
    pub r: f64,
    pub direction: Direction,
    pub truncation_depth: usize,
    pub rho: f64,
}

impl AbsorbingRadius {
    /// Radius `rho * R_tau` of the inflated absorbing ball.
    pub fn ball_radius(&self) -> f64 {
        self.rho * self.r
    }
}

/// Radius series on raw coefficient sequences `t -> (a_t, b_t)`.
///
/// Pullback: `R_tau = p * sum_{l1 <= tau-1} b_{l1} prod_{l2=l1+1}^{tau-1} p a_{l2}`,
/// truncated once the geometric tail bound (ratio: largest `p a_t` seen so
/// far) drops below the tolerance. Forward: the recursion
/// `r <- p a_t r + p b_t` iterated until it stabilizes.
pub fn absorbing_radius_from_bounds(
    mut bounds_at: impl FnMut(i64) -> Result<(f64, f64)>,
    q: &RadiusQuery,
) -> Result<AbsorbingRadius> {
    if !(q.p >= 1.0) {
        return Err(Error::input(format!("stability constant must satisfy p >= 1, got {}", q.p)));
    }
    if !(q.tol > 0.0) {
        return Err(Error::input("truncation tolerance must be positive"));
    }
    if !(q.rho > 1.0) {
        return Err(Error::input("the inflation factor rho must exceed 1"));
    }
    match q.direction {
        Direction::Pullback => {
            let mut sum = 0.0;
            let mut prod = 1.0;
            let mut ratio_max: f64 = 0.0;
            let mut b_max: f64 = 0.0;
            for k in 0..q.max_terms {
                let t = q.tau - 1 - k as i64;
                let (a, b) = bounds_at(t)?;
                sum += q.p * b * prod;
                prod *= q.p * a;
                ratio_max = ratio_max.max(q.p * a);
                b_max = b_max.max(b);
                if ratio_max < 1.0 {
                    let tail = prod * q.p * b_max / (1.0 - ratio_max);
                    if tail < q.tol {
                        return Ok(AbsorbingRadius {
                            tau: q.tau,
                            r: sum,
                            direction: q.direction,
                            truncation_depth: k + 1,
                            rho: q.rho,
                        });
                    }
                }
            }
            Err(Error::precondition(format!(
                "pullback radius series did not meet tol {} within {} terms (sup p*a_t = {ratio_max})",
                q.tol, q.max_terms
            )))
        }
        Direction::Forward => {
            let mut r = 0.0;
            let mut ratio_max: f64 = 0.0;
            for k in 0..q.max_terms {
                let t = q.tau + k as i64;
                let (a, b) = bounds_at(t)?;
                let next = q.p * a * r + q.p * b;
                let delta = (next - r).abs();
                r = next;
                ratio_max = ratio_max.max(q.p * a);
                if k >= 2 && ratio_max < 1.0 && delta / (1.0 - ratio_max) < q.tol {
                    return Ok(AbsorbingRadius {
                        tau: q.tau,
                        r,
                        direction: q.direction,
                        truncation_depth: k + 1,
                        rho: q.rho,
                    });
                }
            }
            Err(Error::precondition(format!(
                "forward radius recursion did not stabilize within {} terms (sup p*a_t = {ratio_max})",
                q.max_terms
            )))
        }
    }
}

/// Absorbing radius of a model, with coefficients from
/// [`IdeModel::linear_growth_bounds`]. For Beverton-Holt growth with
/// `alpha < 1` the tangent point comes from the query or is chosen on a
/// logarithmic grid over a time window around `tau`.
pub fn absorbing_radius(
    model: &IdeModel,
    q: &RadiusQuery,
    scheme: &SupScheme,
) -> Result<AbsorbingRadius> {
    let zeta = resolve_zeta(model, q, scheme)?;
    absorbing_radius_from_bounds(
        |t| model.linear_growth_bounds(t, zeta, scheme).map(|g| (g.a_t, g.b_t)),
        q,
    )
}

fn resolve_zeta(model: &IdeModel, q: &RadiusQuery, scheme: &SupScheme) -> Result<Option<f64>> {
    match model.growth() {
        GrowthSpec::BevertonHolt { alpha, .. } if *alpha < 1.0 => {
            if q.zeta.is_some() {
                return Ok(q.zeta);
            }
            let window: Vec<i64> = match q.direction {
                Direction::Pullback => (q.tau - 64..=q.tau).collect(),
                Direction::Forward => (q.tau..=q.tau + 64).collect(),
            };
            model.choose_zeta(q.p, &window, scheme).map(Some)
        }
        _ => Ok(q.zeta),
    }
}

/// Local discretization error `e_t^n(u)`: distance between one step of the
/// level-`n` scheme and one step of the reference scheme from the same state.
pub fn local_error(
    model: &IdeModel,
    disc_n: &Discretization,
    disc_ref: &Discretization,
    t: i64,
    u: &StateFunction,
    samples: usize,
) -> Result<f64> {
    if disc_ref.level() < disc_n.level() {
        return Err(Error::input(format!(
            "reference level {} is coarser than the probed level {}",
            disc_ref.level(),
            disc_n.level()
        )));
    }
    let coarse = step(model, disc_n, t, u)?;
    let fine = step(model, disc_ref, t, u)?;
    Ok(sup_distance(&coarse, &fine, samples))
}

/// Ingredients of the global discretization-error recursion: a convergence
/// function `Gamma`, a local-error constant `C` depending on the ball radius,
/// and per-time Lipschitz constants.
#[derive(Clone)]
pub struct ErrorModel {
    pub gamma: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub c_of_radius: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub ell: Arc<dyn Fn(i64, f64) -> f64 + Send + Sync>,
}

impl ErrorModel {
    /// Default convergence function `Gamma(rho) = rho^2` (piecewise linear
    /// collocation).
    pub fn quadratic(
        c_of_radius: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        ell: Arc<dyn Fn(i64, f64) -> f64 + Send + Sync>,
    ) -> Self {
        ErrorModel { gamma: Arc::new(|rho| rho * rho), c_of_radius, ell }
    }
}

/// Accumulated error bound
/// `Gamma(1/n) * sum_{l1=tau}^{t-1} C(B(l1)) prod_{l2=l1+1}^{t-1} ell_{l2}(B(l2))`,
/// where `radii[i]` is the ball radius at time `tau + i` (already inflated by
/// the caller if a neighborhood is intended).
pub fn global_error_bound(
    err: &ErrorModel,
    radii: &[f64],
    tau: i64,
    t: i64,
    n: usize,
) -> Result<f64> {
    if t < tau {
        return Err(Error::input(format!("needs tau <= t, got tau={tau}, t={t}")));
    }
    let span = (t - tau) as usize;
    if radii.len() < span {
        return Err(Error::input(format!(
            "{} radii supplied for {span} time steps",
            radii.len()
        )));
    }
    let mut total = 0.0;
    for l1 in tau..t {
        let mut term = (err.c_of_radius)(radii[(l1 - tau) as usize]);
        for l2 in (l1 + 1)..t {
            term *= (err.ell)(l2, radii[(l2 - tau) as usize]);
        }
        total += term;
    }
    Ok((err.gamma)(1.0 / n as f64) * total)
}

/// One row of the convergence experiment: level, error `||xi^n - xi^{2n}||`
/// and rate `c(n) = log2(err_n / err_{2n})`.
#[derive(Debug, Clone, Copy)]
pub struct RateRow {
    pub n: usize,
    pub err: f64,
    pub rate: f64,
}

/// Result of the pullback convergence experiment.
#[derive(Debug, Clone)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    pub seed_value: f64,
    pub radius: AbsorbingRadius,
    pub depth: usize,
    pub n_ref: usize,
}

/// Configuration of [`convergence_table`].
///
/// Levels count grid *nodes*: level `n` runs on the equispaced grid with `n`
/// nodes (`n - 1` subintervals), which is the counting the published rate
/// table follows.
#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    /// Levels to report; strictly increasing powers of two.
    pub n_list: Vec<usize>,
    /// Pullback depth `s`.
    pub depth: usize,
    /// Reference resolution (node count); sup norms are sampled on its nodes.
    pub n_ref: usize,
    /// Time at which the pullback witnesses are compared.
    pub eval_time: i64,
    /// Inflation factor for the upper-solution seed.
    pub rho: f64,
    /// Truncation tolerance of the seed radius series.
    pub radius_tol: f64,
    /// Tangent point override for `alpha < 1`.
    pub zeta: Option<f64>,
    /// Resolution of the sup scheme used for the seed radius.
    pub scheme_resolution: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            n_list: vec![16, 32, 64, 128, 256, 512, 1024],
            depth: 15,
            n_ref: 4096,
            eval_time: 0,
            rho: 1.1,
            radius_tol: 1e-8,
            zeta: None,
            scheme_resolution: 256,
        }
    }
}

/// Pullback witnesses `xi^n = phi^n(t; t-s, seed)` on levels `n`, `2n`, `4n`
/// for every requested `n` (piecewise linear collocation, trapezoidal rule,
/// one shared constant upper-solution seed), compared in the sup norm on the
/// reference nodes.
pub fn convergence_table(model: &IdeModel, cfg: &ConvergenceConfig) -> Result<RateTable> {
    validate_levels(&cfg.n_list, cfg.n_ref)?;
    if cfg.depth == 0 {
        return Err(Error::input("pullback depth must be at least 1"));
    }
    let habitat = model.habitat();
    let scheme = SupScheme::uniform(habitat, cfg.scheme_resolution);
    let start = cfg.eval_time - cfg.depth as i64;

    let query = RadiusQuery {
        p: 1.0,
        direction: Direction::Pullback,
        tau: start,
        tol: cfg.radius_tol,
        rho: cfg.rho,
        zeta: cfg.zeta,
        max_terms: 20_000,
    };
    let radius = absorbing_radius(model, &query, &scheme)?;
    let seed_value = radius.ball_radius();

    let mut levels: Vec<usize> = cfg
        .n_list
        .iter()
        .flat_map(|&n| [n, 2 * n, 4 * n])
        .collect();
    levels.sort_unstable();
    levels.dedup();

    let witnesses: Result<BTreeMap<usize, StateFunction>> = levels
        .par_iter()
        .map(|&lv| {
            let disc = Discretization::uniform(habitat.a(), habitat.b(), lv - 1, 1)?;
            let seed = StateFunction::constant(&disc, seed_value, start);
            let xi = pullback_state(model, &disc, cfg.eval_time, cfg.depth, seed)?;
            Ok((lv, xi))
        })
        .collect();
    let witnesses = witnesses?;

    // The witnesses are piecewise linear, so |xi^n - xi^{2n}| attains its sup
    // at a node of the union of the two grids; evaluating there is exact and
    // free of sampling aliasing between incommensurate grids.
    let sup_diff = |u: &StateFunction, v: &StateFunction| -> f64 {
        let mut mesh: Vec<f64> = u
            .spline()
            .space()
            .grid()
            .nodes()
            .iter()
            .chain(v.spline().space().grid().nodes())
            .copied()
            .collect();
        mesh.sort_by(f64::total_cmp);
        mesh.dedup();
        let uu = u.sample(&mesh);
        let vv = v.sample(&mesh);
        uu.iter().zip(&vv).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };

    let mut rows = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        let err_n = sup_diff(&witnesses[&n], &witnesses[&(2 * n)]);
        let err_2n = sup_diff(&witnesses[&(2 * n)], &witnesses[&(4 * n)]);
        if !(err_n.is_finite() && err_2n.is_finite()) || err_n == 0.0 || err_2n == 0.0 {
            return Err(Error::Degenerate {
                level: n,
                reason: format!(
                    "witness differences {err_n:.3e} / {err_2n:.3e} admit no finite rate"
                ),
            });
        }
        rows.push(RateRow { n, err: err_n, rate: (err_n / err_2n).log2() });
    }
    Ok(RateTable { rows, seed_value, radius, depth: cfg.depth, n_ref: cfg.n_ref })
}

fn validate_levels(n_list: &[usize], n_ref: usize) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::input("the level list must be nonempty"));
    }
    for w in n_list.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::input("levels must be strictly increasing"));
        }
    }
    for &n in n_list {
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::input(format!("levels must be powers of two >= 2, got {n}")));
        }
    }
    let max = *n_list.last().unwrap();
    if 4 * max > n_ref {
        return Err(Error::input(format!(
            "reference level {n_ref} must be at least 4 * max(n_list) = {}",
            4 * max
        )));
    }
    Ok(())
}

/// Diagnostics of the asymptotic-autonomy conditions for a Ricker model.
#[derive(Debug, Clone, Copy)]
pub struct RickerCheckReport {
    pub k0: f64,
    pub gamma_limit: f64,
    pub gamma_sup: f64,
    /// `sup_{s<=t} prod gamma_l / gamma` over the window.
    pub k_tilde0: f64,
    /// Estimated constant in `|gamma_t - gamma| <= K1 (k0 gamma)^t`.
    pub k_tilde1: f64,
    pub contraction_ok: bool,
    pub convergence_ok: bool,
    pub smallness_lhs: f64,
    pub smallness_rhs: f64,
    pub smallness_ok: bool,
}

impl RickerCheckReport {
    pub fn all_ok(&self) -> bool {
        self.contraction_ok && self.convergence_ok && self.smallness_ok
    }

    fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.contraction_ok {
            out.push("gamma * k0 < 1");
        }
        if !self.convergence_ok {
            out.push("|gamma_t - gamma| <= K1 * (k0 gamma)^t with finite K1");
        }
        if !self.smallness_ok {
            out.push("k0 * sup gamma_t < e^2/(1+e^2) * (1 - k0 gamma) / K0");
        }
        out
    }
}

/// Configuration of [`forward_limit_experiment`].
#[derive(Debug, Clone)]
pub struct ForwardLimitConfig {
    pub levels: Vec<usize>,
    pub degree: usize,
    pub tau: i64,
    pub horizon: usize,
    /// Limit of the growth-rate sequence.
    pub gamma_limit: f64,
    pub fp_tol: f64,
    pub max_iter: usize,
    pub scheme_resolution: usize,
}

impl Default for ForwardLimitConfig {
    fn default() -> Self {
        ForwardLimitConfig {
            levels: vec![64, 128, 256, 512, 1024],
            degree: 1,
            tau: 0,
            horizon: 20,
            gamma_limit: 0.04,
            fp_tol: 1e-12,
            max_iter: 400,
            scheme_resolution: 256,
        }
    }
}

/// Per-level outcome of the forward-limit experiment.
#[derive(Debug, Clone)]
pub struct ForwardLevel {
    pub n: usize,
    pub fixed_point: StateFunction,
    pub fp_iterations: usize,
    /// `(s, Hausdorff semidistance of the orbit set at tau + s to {u*})`.
    pub distances: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct ForwardLimitResult {
    pub levels: Vec<ForwardLevel>,
    pub report: RickerCheckReport,
}

/// Forward orbits of an asymptotically autonomous Ricker model against the
/// fixed point of its frozen limit, per discretization level.
pub fn forward_limit_experiment(
    model: &IdeModel,
    seeds: &[SpaceFn],
    cfg: &ForwardLimitConfig,
) -> Result<ForwardLimitResult> {
    let GrowthSpec::Ricker { gamma } = model.growth() else {
        return Err(Error::input("the forward-limit experiment requires a Ricker model"));
    };
    if seeds.is_empty() {
        return Err(Error::input("at least one seed profile is required"));
    }
    if cfg.horizon == 0 {
        return Err(Error::input("horizon must be at least 1"));
    }
    let habitat = model.habitat();
    let scheme = SupScheme::uniform(habitat, cfg.scheme_resolution);
    let report = ricker_checks(model, gamma, cfg, &scheme);
    if !report.all_ok() {
        return Err(Error::precondition(format!(
            "asymptotic-autonomy conditions failed: {}",
            report.failures().join("; ")
        )));
    }

    let frozen = model.freeze_ricker(cfg.gamma_limit)?;
    let levels: Result<Vec<ForwardLevel>> = cfg
        .levels
        .par_iter()
        .map(|&n| {
            let disc = Discretization::uniform(habitat.a(), habitat.b(), n, cfg.degree)?;
            let samples = 4 * n + 1;
            let fp = fixed_point_autonomous(
                &frozen,
                &disc,
                StateFunction::constant(&disc, 1.0, 0),
                cfg.fp_tol,
                cfg.max_iter,
            )?;
            let mut orbits = Vec::with_capacity(seeds.len());
            for seed in seeds {
                let u0 = StateFunction::from_profile(&disc, |x| seed(x), None, cfg.tau)?;
                orbits.push(trajectory(model, &disc, cfg.tau, cfg.tau + cfg.horizon as i64, u0)?);
            }
            let target = FunctionSet::singleton(fp.state.clone());
            let mut distances = Vec::with_capacity(cfg.horizon);
            for s in 1..=cfg.horizon {
                let slice = FunctionSet::new(
                    orbits.iter().map(|orbit| orbit[s].clone()).collect(),
                )?;
                distances.push((s, crate::dynamics::hausdorff_semidist(&slice, &target, samples)));
            }
            Ok(ForwardLevel { n, fixed_point: fp.state, fp_iterations: fp.iterations, distances })
        })
        .collect();

    Ok(ForwardLimitResult { levels: levels?, report })
}

fn ricker_checks(
    model: &IdeModel,
    gamma: &crate::model::TimeFn,
    cfg: &ForwardLimitConfig,
    scheme: &SupScheme,
) -> RickerCheckReport {
    let k0 = model.kernel_mass_sup(cfg.tau, scheme);
    let g_lim = cfg.gamma_limit;
    let q = k0 * g_lim;
    let window: Vec<i64> = (cfg.tau..=cfg.tau + cfg.horizon as i64).collect();
    let gamma_sup = window.iter().map(|&t| gamma(t)).fold(0.0, f64::max);

    // K0: largest product of gamma_l / gamma over subwindows, by the running
    // maximal-suffix-product recursion
    let mut k_tilde0: f64 = 1.0;
    let mut suffix: f64 = 1.0;
    for &t in &window[..window.len() - 1] {
        suffix = (suffix * gamma(t) / g_lim).max(1.0);
        k_tilde0 = k_tilde0.max(suffix);
    }

    // K1: smallest constant covering the exponential-convergence hypothesis
    // on the window (at least 1)
    let mut k_tilde1: f64 = 1.0;
    let mut convergence_ok = true;
    for &t in &window {
        let gap = (gamma(t) - g_lim).abs();
        if gap == 0.0 {
            continue;
        }
        let decay = q.powi(t as i32);
        if decay <= 0.0 || !decay.is_finite() {
            convergence_ok = false;
            break;
        }
        k_tilde1 = k_tilde1.max(gap / decay);
    }
    if !k_tilde1.is_finite() {
        convergence_ok = false;
    }

    let e2 = std::f64::consts::E.powi(2);
    let smallness_lhs = k0 * gamma_sup;
    let smallness_rhs = e2 / (1.0 + e2) * (1.0 - q) / k_tilde0;
    RickerCheckReport {
        k0,
        gamma_limit: g_lim,
        gamma_sup,
        k_tilde0,
        k_tilde1,
        contraction_ok: q < 1.0,
        convergence_ok,
        smallness_lhs,
        smallness_rhs,
        smallness_ok: smallness_lhs < smallness_rhs,
    }
}
