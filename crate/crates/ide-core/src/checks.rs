//! Randomized invariant suites behind the `check-invariants` subcommand.
//!
//! Each check builds its own canonical models, draws reproducible samples
//! from a seeded generator and counts violations; the CLI reports the
//! outcomes as a pass/fail table.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{absorbing_radius, Direction, RadiusQuery};
use crate::dynamics::{step, sup_distance, trajectory, Discretization, StateFunction};
use crate::error::Result;
use crate::grid::Grid;
use crate::model::{
    GrowthSpec, Habitat, IdeModel, Inhomogeneity, KernelSpec, SpaceTimeFn, TimeDomain, TimeFn,
};
use crate::quadrature::trapezoid_rule;
use crate::splines::{lebesgue_estimate, project, sup_samples, SplineSpace};

/// Outcome of one randomized suite.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// Largest violation margin observed (0 when everything passed).
    pub worst: f64,
    pub note: String,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Parameters shared by the suites.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub seed: u64,
    /// Discretization level for the operator checks.
    pub level: usize,
    pub trials: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { seed: 42, level: 32, trials: 100 }
    }
}

/// The almost-periodic Beverton-Holt setup used throughout the checks.
pub fn standard_bh_model(alpha: f64) -> IdeModel {
    let dispersal: TimeFn = Arc::new(|t| 2.0 + (t as f64 / 3.0).sin());
    let gamma: SpaceTimeFn = Arc::new(|t, x| 3.0 - (t as f64 * x / 5.0).sin());
    IdeModel::new(
        Habitat::new(-3.0, 3.0).unwrap(),
        KernelSpec::laplace(dispersal),
        GrowthSpec::BevertonHolt { alpha, gamma },
        None,
        TimeDomain::unbounded(),
    )
    .expect("valid parameters")
}

/// The asymptotically autonomous Ricker setup used by the checks:
/// `gamma_t = gamma (1 + c q^t)` with `q = k0 gamma`.
pub fn standard_ricker_model(gamma: f64, c: f64, b: f64) -> IdeModel {
    let q = 0.9975 * gamma; // k0 of the delta = 2 Laplace kernel on [-3, 3]
    let gamma_t: TimeFn = Arc::new(move |t| gamma * (1.0 + c * q.powi(t.max(0) as i32)));
    IdeModel::new(
        Habitat::new(-3.0, 3.0).unwrap(),
        KernelSpec::laplace(Arc::new(|_| 2.0)),
        GrowthSpec::Ricker { gamma: gamma_t },
        Some(Inhomogeneity::constant(b)),
        TimeDomain::from(0),
    )
    .expect("valid parameters")
}

fn rng_for(cfg: &CheckConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9e37_79b9).wrapping_add(salt))
}

/// Random nonnegative state with values below `high` at the collocation
/// points.
fn random_state(
    rng: &mut ChaCha8Rng,
    disc: &Discretization,
    high: f64,
    t: i64,
) -> Result<StateFunction> {
    let count = disc.space().collocation_points().len();
    let vals: Vec<f64> = (0..count).map(|_| rng.random_range(0.0..high)).collect();
    let dd = if disc.degree() == 3 { Some((0.0, 0.0)) } else { None };
    StateFunction::from_collocation_values(disc, &vals, dd, t)
}

/// Run every suite; the vector order is stable.
pub fn run_all(cfg: &CheckConfig) -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        kernel_growth_nonnegativity(cfg),
        tangent_majorant(cfg),
        bounded_growth_profile(cfg),
        growth_lipschitz_witness(cfg),
        quadrature_affine_exactness(cfg),
        quadrature_convergence_order(cfg),
        partition_of_unity(cfg)?,
        projection_idempotence(cfg)?,
        projection_norm_bounds(cfg)?,
        operator_boundedness(cfg)?,
        operator_lipschitz(cfg)?,
        order_preservation(cfg)?,
        positivity(cfg)?,
        process_property(cfg)?,
        absorbing_invariance(cfg)?,
    ])
}

fn outcome(name: &'static str, trials: usize, failures: usize, worst: f64, note: String) -> CheckOutcome {
    CheckOutcome { name, trials, failures, worst, note }
}

pub fn kernel_growth_nonnegativity(cfg: &CheckConfig) -> CheckOutcome {
    let mut rng = rng_for(cfg, 1);
    let m = standard_bh_model(0.5);
    let mut failures = 0;
    for _ in 0..cfg.trials {
        let t = rng.random_range(-50..50);
        let x = rng.random_range(-3.0..3.0);
        let y = rng.random_range(-3.0..3.0);
        let z = rng.random_range(0.0..20.0);
        let k = m.kernel_eval(t, x, y);
        let g = m.growth_eval(t, y, z);
        if !matches!(k, Ok(v) if v >= 0.0) || !matches!(g, Ok(v) if v >= 0.0) {
            failures += 1;
        }
    }
    outcome("kernel/growth nonnegativity", cfg.trials, failures, 0.0, String::new())
}

pub fn tangent_majorant(cfg: &CheckConfig) -> CheckOutcome {
    let mut rng = rng_for(cfg, 2);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    for &alpha in &[0.3, 0.5, 0.8] {
        for &zeta in &[0.5, 2.0, 10.0, 100.0] {
            let za = zeta_pow(alpha, zeta);
            for _ in 0..cfg.trials / 4 {
                trials += 1;
                let z: f64 = rng.random_range(0.0..50.0);
                let g = z / (1.0 + z.powf(alpha));
                let line = za.1 + za.0 * z;
                if g > line + 1e-12 {
                    failures += 1;
                    worst = worst.max(g - line);
                }
            }
        }
    }
    outcome("tangent majorant (alpha < 1)", trials, failures, worst, String::new())
}

fn zeta_pow(alpha: f64, zeta: f64) -> (f64, f64) {
    let za = zeta.powf(alpha);
    let d = (1.0 + za) * (1.0 + za);
    ((1.0 + (1.0 - alpha) * za) / d, alpha * zeta.powf(1.0 + alpha) / d)
}

pub fn bounded_growth_profile(cfg: &CheckConfig) -> CheckOutcome {
    let mut rng = rng_for(cfg, 3);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    for &alpha in &[1.0, 1.5, 2.0, 4.0] {
        let sup = if alpha == 1.0 { 1.0 } else { (alpha - 1.0f64).powf(1.0 - 1.0 / alpha) / alpha };
        for _ in 0..cfg.trials {
            trials += 1;
            let z: f64 = rng.random_range(0.0..200.0);
            let g = z / (1.0 + z.powf(alpha));
            if g > sup + 1e-12 {
                failures += 1;
                worst = worst.max(g - sup);
            }
        }
    }
    outcome("global growth bound (alpha >= 1)", trials, failures, worst, String::new())
}

pub fn growth_lipschitz_witness(cfg: &CheckConfig) -> CheckOutcome {
    let mut rng = rng_for(cfg, 4);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.trials {
        let z: f64 = rng.random_range(0.0..10.0);
        let w: f64 = rng.random_range(0.0..10.0);
        let g = |v: f64| v / (1.0 + v);
        let gap = (g(z) - g(w)).abs() - (z - w).abs();
        if gap > 1e-12 {
            failures += 1;
            worst = worst.max(gap);
        }
    }
    // Ricker slope bound e^{-2} holds past the hump of z e^{-z}
    for _ in 0..cfg.trials {
        let z: f64 = rng.random_range(1.0..10.0);
        let w: f64 = rng.random_range(1.0..10.0);
        let g = |v: f64| v * (-v).exp();
        let gap = (g(z) - g(w)).abs() - (z - w).abs() / std::f64::consts::E.powi(2);
        if gap > 1e-12 {
            failures += 1;
            worst = worst.max(gap);
        }
    }
    outcome(
        "growth Lipschitz witness",
        2 * cfg.trials,
        failures,
        worst,
        "Ricker pairs sampled in [1, 10]".into(),
    )
}

pub fn quadrature_affine_exactness(cfg: &CheckConfig) -> CheckOutcome {
    let mut rng = rng_for(cfg, 5);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.trials {
        let n = rng.random_range(2..40usize);
        let mut nodes = vec![0.0];
        for _ in 0..n {
            let last = *nodes.last().unwrap();
            nodes.push(last + rng.random_range(0.05..1.0));
        }
        let grid = Grid::from_nodes(nodes).unwrap();
        let rule = trapezoid_rule(&grid);
        let (c0, c1) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let exact = {
            let (a, b) = (grid.a(), grid.b());
            c0 * (b - a) + c1 * (b * b - a * a) / 2.0
        };
        let got = rule.integrate_fn(|x| c0 + c1 * x);
        let gap = (got - exact).abs();
        let scale = exact.abs().max(1.0);
        if gap > 1e-10 * scale {
            failures += 1;
            worst = worst.max(gap / scale);
        }
    }
    outcome("trapezoid exact on affine integrands", cfg.trials, failures, worst, String::new())
}

pub fn quadrature_convergence_order(_cfg: &CheckConfig) -> CheckOutcome {
    let exact = 3.0f64.sin() + 3.0f64.sin();
    let err = |n: usize| {
        let grid = Grid::uniform(-3.0, 3.0, n).unwrap();
        (trapezoid_rule(&grid).integrate_fn(f64::cos) - exact).abs()
    };
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut note = String::new();
    for n in [64usize, 128, 256] {
        let ratio = err(n) / err(2 * n);
        if !(3.6..=4.4).contains(&ratio) {
            failures += 1;
            worst = worst.max((ratio - 4.0).abs());
            note = format!("ratio {ratio:.3} at n = {n}");
        }
    }
    outcome("trapezoid error ratio in [3.6, 4.4]", 3, failures, worst, note)
}

pub fn partition_of_unity(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for(cfg, 6);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    for l in 1..=3usize {
        let grid = Arc::new(Grid::uniform(-3.0, 3.0, cfg.level)?);
        let sp = SplineSpace::new(grid, l)?;
        for _ in 0..cfg.trials {
            trials += 1;
            let x = rng.random_range(-3.0..=3.0);
            let total: f64 = sp.basis_range().map(|j| sp.basis_eval(j, x).unwrap()).sum();
            let gap = (total - 1.0).abs();
            if gap > 1e-10 {
                failures += 1;
                worst = worst.max(gap);
            }
        }
    }
    Ok(outcome("B-spline partition of unity", trials, failures, worst, String::new()))
}

pub fn projection_idempotence(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for(cfg, 7);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    for l in 1..=3usize {
        let grid = Arc::new(Grid::uniform(-3.0, 3.0, 16)?);
        let sp = Arc::new(SplineSpace::new(grid, l)?);
        let samples = sup_samples(&sp, 512);
        for _ in 0..(cfg.trials / 10).max(3) {
            trials += 1;
            let coeffs: Vec<f64> = (0..sp.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
            let s = crate::splines::SplineFunction::new(sp.clone(), coeffs)?;
            let vals: Vec<f64> = sp.collocation_points().iter().map(|&x| s.eval(x).unwrap()).collect();
            let dd = if l == 3 {
                Some((s.eval_deriv(-3.0, 2)?, s.eval_deriv(3.0, 2)?))
            } else {
                None
            };
            let again = project(&sp, &vals, dd)?;
            let gap = samples
                .iter()
                .map(|&x| (again.eval(x).unwrap() - s.eval(x).unwrap()).abs())
                .fold(0.0, f64::max);
            if gap > 1e-9 {
                failures += 1;
                worst = worst.max(gap);
            }
        }
    }
    Ok(outcome("projection idempotence", trials, failures, worst, String::new()))
}

pub fn projection_norm_bounds(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for(cfg, 8);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut note = String::new();
    for (l, p) in [(1usize, 1.0), (2, 2.0), (3, 2.5)] {
        let grid = Arc::new(Grid::uniform(-3.0, 3.0, 16)?);
        let sp = Arc::new(SplineSpace::new(grid, l)?);
        let est = lebesgue_estimate(&sp, cfg.trials.max(20), 2048, &mut rng)?;
        if est > p + 1e-9 {
            failures += 1;
            worst = worst.max(est - p);
            note = format!("degree {l}: estimate {est:.6}");
        }
    }
    Ok(outcome("projection norms below stability constants", 3, failures, worst, note))
}

pub fn operator_boundedness(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for(cfg, 9);
    let m = standard_bh_model(0.5);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    for degree in 1..=3usize {
        let disc = Discretization::uniform(-3.0, 3.0, cfg.level, degree)?;
        let scheme = disc.matched_sup_scheme();
        let p = disc.projection_family().stability_constant();
        let zeta = m.choose_zeta(p, &[-2, -1, 0, 1, 2], &scheme)?;
        let samples = 4 * cfg.level + 1;
        let mut bounds_at = std::collections::BTreeMap::new();
        for _ in 0..cfg.trials / 2 {
            trials += 1;
            let t = rng.random_range(-10..10);
            let gb = match bounds_at.entry(t) {
                std::collections::btree_map::Entry::Occupied(e) => *e.get(),
                std::collections::btree_map::Entry::Vacant(e) => {
                    *e.insert(m.linear_growth_bounds(t, Some(zeta), &scheme)?)
                }
            };
            let u = random_state(&mut rng, &disc, 6.0, t)?;
            let image = step(&m, &disc, t, &u)?;
            let bound = p * (gb.b_t + gb.a_t * u.sup_norm(samples));
            let val = image.sup_norm(samples);
            if val > bound * (1.0 + 1e-8) {
                failures += 1;
                worst = worst.max(val / bound - 1.0);
            }
        }
    }
    Ok(outcome("operator boundedness ||F(u)|| <= p(b + a||u||)", trials, failures, worst, String::new()))
}

pub fn operator_lipschitz(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for(cfg, 10);
    let m = standard_bh_model(1.0);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    for degree in 1..=3usize {
        let disc = Discretization::uniform(-3.0, 3.0, cfg.level, degree)?;
        let scheme = disc.matched_sup_scheme();
        let p = disc.projection_family().stability_constant();
        let samples = 4 * cfg.level + 1;
        let mut ell_at = std::collections::BTreeMap::new();
        for _ in 0..cfg.trials / 2 {
            trials += 1;
            let t = rng.random_range(-10..10);
            let ell = match ell_at.entry(t) {
                std::collections::btree_map::Entry::Occupied(e) => *e.get(),
                std::collections::btree_map::Entry::Vacant(e) => {
                    *e.insert(m.lipschitz_bound(t, 6.0, &scheme)?)
                }
            };
            let u = random_state(&mut rng, &disc, 6.0, t)?;
            let v = random_state(&mut rng, &disc, 6.0, t)?;
            let lhs = sup_distance(&step(&m, &disc, t, &u)?, &step(&m, &disc, t, &v)?, samples);
            let rhs = p * ell * sup_distance(&u, &v, samples);
            if lhs > rhs * (1.0 + 1e-8) {
                failures += 1;
                worst = worst.max(lhs / rhs - 1.0);
            }
        }
    }
    Ok(outcome("operator Lipschitz bound p * ell(r)", trials, failures, worst, String::new()))
}

pub fn order_preservation(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for(cfg, 11);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    for &alpha in &[0.5, 1.0] {
        let m = standard_bh_model(alpha);
        let disc = Discretization::uniform(-3.0, 3.0, cfg.level, 1)?;
        for _ in 0..cfg.trials / 2 {
            trials += 1;
            let t = rng.random_range(-10..10);
            let u = random_state(&mut rng, &disc, 4.0, t)?;
            let bump: Vec<f64> =
                u.values().iter().map(|&v| v + rng.random_range(0.0..2.0)).collect();
            let v = StateFunction::from_collocation_values(&disc, &bump, None, t)?;
            let iu = step(&m, &disc, t, &u)?;
            let iv = step(&m, &disc, t, &v)?;
            for (a, b) in iu.values().iter().zip(iv.values()) {
                if a > &(b + 1e-12) {
                    failures += 1;
                    worst = worst.max(a - b);
                    break;
                }
            }
        }
    }
    Ok(outcome("order preservation (BH, alpha <= 1, degree 1)", trials, failures, worst, String::new()))
}

pub fn positivity(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for(cfg, 12);
    let m = standard_bh_model(0.5);
    let disc = Discretization::uniform(-3.0, 3.0, cfg.level, 1)?;
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.trials {
        let t = rng.random_range(-10..10);
        let u = random_state(&mut rng, &disc, 5.0, t)?;
        let image = step(&m, &disc, t, &u)?;
        if let Some(&min) = image.values().iter().min_by(|a, b| a.total_cmp(b)) {
            if min < 0.0 {
                failures += 1;
                worst = worst.max(-min);
            }
        }
    }
    Ok(outcome("positivity (degree 1)", cfg.trials, failures, worst, String::new()))
}

pub fn process_property(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for(cfg, 13);
    let m = standard_bh_model(0.5);
    let disc = Discretization::uniform(-3.0, 3.0, cfg.level.min(24), 1)?;
    let mut failures = 0;
    let trials = (cfg.trials / 10).max(3);
    for _ in 0..trials {
        let tau = rng.random_range(-5..5);
        let u = random_state(&mut rng, &disc, 4.0, tau)?;
        let full = trajectory(&m, &disc, tau, tau + 4, u)?;
        let tail = trajectory(&m, &disc, tau + 2, tau + 4, full[2].clone())?;
        if full[4].values() != tail[2].values() {
            failures += 1;
        }
    }
    Ok(outcome("process property (bitwise)", trials, failures, 0.0, String::new()))
}

pub fn absorbing_invariance(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for(cfg, 14);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    let disc = Discretization::uniform(-3.0, 3.0, cfg.level, 1)?;
    let scheme = disc.matched_sup_scheme();
    let samples = 4 * cfg.level + 1;

    // alpha >= 2: slope coefficient vanishes, any state is absorbed in one step
    let m2 = standard_bh_model(2.0);
    let mut radius_at = std::collections::BTreeMap::new();
    for _ in 0..cfg.trials / 2 {
        trials += 1;
        let tau = rng.random_range(-10..10i64);
        let ball = match radius_at.entry(tau) {
            std::collections::btree_map::Entry::Occupied(e) => *e.get(),
            std::collections::btree_map::Entry::Vacant(e) => *e.insert(
                absorbing_radius(
                    &m2,
                    &RadiusQuery::new(1.0, Direction::Pullback, tau + 1, 1e-12),
                    &scheme,
                )?
                .ball_radius(),
            ),
        };
        let u = random_state(&mut rng, &disc, 20.0, tau)?;
        let image = step(&m2, &disc, tau, &u)?;
        let val = image.sup_norm(samples);
        if val > ball * (1.0 + 1e-8) {
            failures += 1;
            worst = worst.max(val / ball - 1.0);
        }
    }

    // alpha = 1/2: boundary states of ball(rho R_tau) step into ball(rho R_{tau+1})
    let m05 = standard_bh_model(0.5);
    let zeta = Some(20.0);
    let mut pair_at = std::collections::BTreeMap::new();
    for _ in 0..cfg.trials / 2 {
        trials += 1;
        let tau = rng.random_range(-10..10i64);
        let (r_tau, r_next) = match pair_at.entry(tau) {
            std::collections::btree_map::Entry::Occupied(e) => *e.get(),
            std::collections::btree_map::Entry::Vacant(e) => {
                let mut q = RadiusQuery::new(1.0, Direction::Pullback, tau, 1e-12);
                q.zeta = zeta;
                let r_tau = absorbing_radius(&m05, &q, &scheme)?;
                let mut q1 = RadiusQuery::new(1.0, Direction::Pullback, tau + 1, 1e-12);
                q1.zeta = zeta;
                let r_next = absorbing_radius(&m05, &q1, &scheme)?;
                *e.insert((r_tau, r_next))
            }
        };
        let raw = random_state(&mut rng, &disc, 1.0, tau)?;
        let peak = raw.values().iter().fold(0.0f64, |a, &b| a.max(b)).max(1e-9);
        let scale = r_tau.ball_radius() / peak;
        let boundary: Vec<f64> = raw.values().iter().map(|&v| v * scale).collect();
        let u = StateFunction::from_collocation_values(&disc, &boundary, None, tau)?;
        let image = step(&m05, &disc, tau, &u)?;
        let val = image.sup_norm(samples);
        let ball = r_next.ball_radius();
        if val > ball * (1.0 + 1e-8) {
            failures += 1;
            worst = worst.max(val / ball - 1.0);
        }
    }
    Ok(outcome("absorbing-set positive invariance", trials, failures, worst, String::new()))
}
