//! Subcommand implementations. Each writes its CSV artifacts plus a
//! `run_metadata.txt` into the output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use ide_core::analysis::{
    absorbing_radius, convergence_table, forward_limit_experiment, ConvergenceConfig, Direction,
    ForwardLimitConfig, RadiusQuery,
};
use ide_core::checks::{run_all, CheckConfig};
use ide_core::dynamics::{pullback_state, trajectory, Discretization, StateFunction};
use ide_core::model::{SpaceFn, SupScheme};

use crate::config::{GrowthConfig, RunConfig};
use crate::error::CliError;
use crate::output::{emit_csv, format_float, write_metadata, Cell, Metadata};

pub struct RunContext {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub threads: usize,
    pub version: &'static str,
}

impl RunContext {
    fn finish(
        &self,
        command: &str,
        started: Instant,
        truncation_depths: &[(String, usize)],
    ) -> Result<(), CliError> {
        let meta = Metadata {
            command,
            version: self.version,
            threads: self.threads,
            wall: started.elapsed(),
            truncation_depths,
            config_echo: &self.config.echo(),
        };
        write_metadata(&self.out_dir.join("run_metadata.txt"), &meta)
    }

    fn single_level(&self) -> Result<usize, CliError> {
        self.config.discretization.n.ok_or_else(|| {
            CliError::config("this command needs discretization.n")
        })
    }
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))
}

/// `simulate`: one trajectory, one CSV row per (time, node).
pub fn simulate(ctx: &RunContext) -> Result<(), CliError> {
    let started = Instant::now();
    ensure_out_dir(&ctx.out_dir)?;
    let cfg = &ctx.config;
    let model = cfg.build_model()?;
    let n = ctx.single_level()?;
    let [a, b] = cfg.model.habitat;
    let disc = Discretization::uniform(a, b, n, cfg.discretization.degree)?;
    let tau = cfg.experiment.tau;
    let u0_profile = RunConfig::space_profile(&cfg.experiment.u0);
    let u0 = StateFunction::from_profile(&disc, |x| u0_profile(x), None, tau)?;
    let states = trajectory(&model, &disc, tau, tau + cfg.experiment.steps as i64, u0)?;

    let nodes = disc.rule().nodes().to_vec();
    let mut rows = Vec::with_capacity(states.len() * nodes.len());
    for state in &states {
        for (j, (&x, &u)) in nodes.iter().zip(state.values()).enumerate() {
            rows.push(vec![
                Cell::Int(state.time_stamp()),
                Cell::Uint(j),
                Cell::Float(x),
                Cell::Float(u),
            ]);
        }
    }
    emit_csv(&ctx.out_dir.join("trajectory.csv"), &["t", "node_index", "x", "u"], &rows)?;
    ctx.finish("simulate", started, &[])
}

/// `pullback`: the depth-`s` pullback witness at `eval_time`, per level.
pub fn pullback(ctx: &RunContext) -> Result<(), CliError> {
    let started = Instant::now();
    ensure_out_dir(&ctx.out_dir)?;
    let cfg = &ctx.config;
    let model = cfg.build_model()?;
    let [a, b] = cfg.model.habitat;
    let levels = cfg.levels()?;
    let s = cfg.experiment.depth;
    let t = cfg.experiment.eval_time;
    let start_time = t - s as i64;

    let scheme = SupScheme::uniform(model.habitat(), cfg.experiment.sup_resolution);
    let query = RadiusQuery {
        p: 1.0,
        direction: Direction::Pullback,
        tau: start_time,
        tol: cfg.experiment.radius_tol,
        rho: cfg.experiment.rho,
        zeta: cfg.experiment.zeta,
        max_terms: 20_000,
    };
    let radius = absorbing_radius(&model, &query, &scheme)?;
    let seed_value = radius.ball_radius();

    let mut rows = Vec::new();
    for &n in &levels {
        let disc = Discretization::uniform(a, b, n, cfg.discretization.degree)?;
        let seed = StateFunction::constant(&disc, seed_value, start_time);
        let xi = pullback_state(&model, &disc, t, s, seed)?;
        for (j, (&x, &u)) in disc.rule().nodes().iter().zip(xi.values()).enumerate() {
            rows.push(vec![Cell::Uint(n), Cell::Uint(j), Cell::Float(x), Cell::Float(u)]);
        }
    }
    emit_csv(&ctx.out_dir.join("pullback.csv"), &["n", "node_index", "x", "u"], &rows)?;
    let depths = vec![(format!("seed_radius_tau_{start_time}"), radius.truncation_depth)];
    ctx.finish("pullback", started, &depths)
}

/// `convergence`: rate table per alpha (CSV) plus a readable text table.
pub fn convergence(ctx: &RunContext, alpha_override: Option<f64>) -> Result<(), CliError> {
    let started = Instant::now();
    ensure_out_dir(&ctx.out_dir)?;
    let cfg = &ctx.config;
    let GrowthConfig::BevertonHolt { alpha: model_alpha, .. } = &cfg.model.growth else {
        return Err(CliError::config(
            "the convergence experiment needs Beverton-Holt growth",
        ));
    };
    let alphas: Vec<f64> = match alpha_override {
        Some(a) => vec![a],
        None => cfg.experiment.alphas.clone().unwrap_or_else(|| vec![*model_alpha]),
    };

    let conv = ConvergenceConfig {
        n_list: cfg
            .discretization
            .n_list
            .clone()
            .unwrap_or_else(|| vec![16, 32, 64, 128, 256, 512, 1024]),
        depth: cfg.experiment.depth,
        n_ref: cfg.discretization.n_ref,
        eval_time: cfg.experiment.eval_time,
        rho: cfg.experiment.rho,
        radius_tol: cfg.experiment.radius_tol,
        zeta: cfg.experiment.zeta,
        scheme_resolution: cfg.experiment.sup_resolution,
    };

    let mut tables = Vec::new();
    let mut depths = Vec::new();
    for &alpha in &alphas {
        let mut model_cfg = cfg.clone();
        if let GrowthConfig::BevertonHolt { alpha: a, .. } = &mut model_cfg.model.growth {
            *a = alpha;
        }
        let model = model_cfg.build_model()?;
        let table = convergence_table(&model, &conv)?;
        depths.push((format!("seed_radius_alpha_{alpha}"), table.radius.truncation_depth));

        let rows: Vec<Vec<Cell>> = table
            .rows
            .iter()
            .map(|r| vec![Cell::Uint(r.n), Cell::Float(r.err), Cell::Float(r.rate)])
            .collect();
        emit_csv(
            &ctx.out_dir.join(format!("convergence_alpha_{alpha}.csv")),
            &["n", "err_n", "c_n"],
            &rows,
        )?;
        tables.push((alpha, table));
    }

    // readable table: one row per level, one c(n) column per alpha
    let mut text = String::new();
    text.push_str("     n");
    for (alpha, _) in &tables {
        text.push_str(&format!("  {:>22}", format!("alpha = {alpha}")));
    }
    text.push('\n');
    let n_list = &tables[0].1.rows;
    for (i, row) in n_list.iter().enumerate() {
        text.push_str(&format!("{:6}", row.n));
        for (_, table) in &tables {
            text.push_str(&format!("  {:>22.15}", table.rows[i].rate));
        }
        text.push('\n');
    }
    std::fs::write(ctx.out_dir.join("convergence_table.txt"), text)?;
    ctx.finish("convergence", started, &depths)
}

/// `forward-limit`: distance series to the frozen fixed point, per level.
pub fn forward_limit(ctx: &RunContext) -> Result<(), CliError> {
    let started = Instant::now();
    ensure_out_dir(&ctx.out_dir)?;
    let cfg = &ctx.config;
    let GrowthConfig::Ricker { gamma_limit, .. } = &cfg.model.growth else {
        return Err(CliError::config("the forward-limit experiment needs Ricker growth"));
    };
    let gamma_limit = gamma_limit.ok_or_else(|| {
        CliError::config("model.growth.gamma_limit is required for forward-limit")
    })?;
    let model = cfg.build_model()?;
    let seeds: Vec<SpaceFn> =
        cfg.experiment.seeds.iter().map(|s| RunConfig::space_profile(s)).collect();
    let fl = ForwardLimitConfig {
        levels: cfg.levels()?,
        degree: cfg.discretization.degree,
        tau: cfg.experiment.tau,
        horizon: cfg.experiment.horizon,
        gamma_limit,
        fp_tol: cfg.experiment.fixed_point_tol,
        max_iter: cfg.experiment.max_iter,
        scheme_resolution: cfg.experiment.sup_resolution,
    };
    let result = forward_limit_experiment(&model, &seeds, &fl)?;

    let mut dist_rows = Vec::new();
    let mut fp_rows = Vec::new();
    for level in &result.levels {
        for &(s, d) in &level.distances {
            dist_rows.push(vec![Cell::Uint(level.n), Cell::Uint(s), Cell::Float(d)]);
        }
        let nodes = level.fixed_point.spline().space().grid().nodes();
        for (j, (&x, &u)) in nodes.iter().zip(level.fixed_point.values()).enumerate() {
            fp_rows.push(vec![Cell::Uint(level.n), Cell::Uint(j), Cell::Float(x), Cell::Float(u)]);
        }
    }
    emit_csv(
        &ctx.out_dir.join("forward_distances.csv"),
        &["n", "s", "distance"],
        &dist_rows,
    )?;
    emit_csv(
        &ctx.out_dir.join("forward_fixed_points.csv"),
        &["n", "node_index", "x", "u_star"],
        &fp_rows,
    )?;

    let report = &result.report;
    let depths: Vec<(String, usize)> = result
        .levels
        .iter()
        .map(|l| (format!("fixed_point_iterations_n_{}", l.n), l.fp_iterations))
        .collect();
    let summary = format!(
        "k0 = {}, gamma = {}, K0 = {}, K1 = {}, smallness {} < {}\n",
        format_float(report.k0),
        format_float(report.gamma_limit),
        format_float(report.k_tilde0),
        format_float(report.k_tilde1),
        format_float(report.smallness_lhs),
        format_float(report.smallness_rhs),
    );
    std::fs::write(ctx.out_dir.join("forward_checks.txt"), summary)?;
    ctx.finish("forward-limit", started, &depths)
}

/// `check-invariants`: run the randomized suites and report counts.
pub fn check_invariants(ctx: &RunContext) -> Result<(), CliError> {
    let started = Instant::now();
    ensure_out_dir(&ctx.out_dir)?;
    let cfg = &ctx.config;
    let check_cfg = CheckConfig {
        seed: cfg.rng_seed,
        level: cfg.discretization.n.unwrap_or(32),
        trials: cfg.experiment.trials,
    };
    let outcomes = run_all(&check_cfg)?;

    let mut rows = Vec::new();
    let mut failed = 0usize;
    println!("{:<52} {:>7} {:>9}  result", "check", "trials", "failures");
    for o in &outcomes {
        println!(
            "{:<52} {:>7} {:>9}  {}",
            o.name,
            o.trials,
            o.failures,
            if o.passed() { "pass" } else { "FAIL" }
        );
        if !o.passed() {
            failed += 1;
        }
        rows.push(vec![
            Cell::Str(o.name.to_string()),
            Cell::Uint(o.trials),
            Cell::Uint(o.failures),
            Cell::Float(o.worst),
            Cell::Str(o.note.clone()),
        ]);
    }
    println!(
        "{} of {} suites passed",
        outcomes.len() - failed,
        outcomes.len()
    );
    emit_csv(
        &ctx.out_dir.join("check_invariants.csv"),
        &["check", "trials", "failures", "worst", "note"],
        &rows,
    )?;
    ctx.finish("check-invariants", started, &[])?;
    if failed > 0 {
        return Err(CliError::runtime(format!("{failed} invariant suites failed")));
    }
    Ok(())
}
