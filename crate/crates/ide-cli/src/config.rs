//! Run configuration: TOML schema, validation and model construction.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use ide_core::model::{
    GrowthSpec, Habitat, IdeModel, Inhomogeneity, KernelSpec, SpaceFn, TimeDomain,
};

use crate::error::CliError;
use crate::expr::{self, Expr};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "defaults::rng_seed")]
    pub rng_seed: u64,
    pub model: ModelConfig,
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// Habitat endpoints `[a, b]`.
    pub habitat: [f64; 2],
    pub kernel: KernelConfig,
    pub growth: GrowthConfig,
    /// Additive profile `b(x)`; expression in `x`. Defaults to the constant
    /// 0.1 for Ricker growth and to none otherwise.
    pub inhomogeneity: Option<InhomogeneityConfig>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    /// `k_t(x, y) = d/2 exp(-d |x-y|)` with dispersal `d` an expression in `t`.
    Laplace { dispersal: String },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GrowthConfig {
    /// `gamma_t(x) * z / (1 + z^alpha)`; `gamma` may use `t` and `x`.
    BevertonHolt { alpha: f64, gamma: String },
    /// `gamma_t * z * exp(-z)`; `gamma` may use `t` only. `gamma_limit` is
    /// the limit of the sequence, needed by the forward-limit experiment.
    Ricker {
        gamma: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma_limit: Option<f64>,
    },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InhomogeneityConfig {
    pub value: String,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    /// Spline degree, 1..=3.
    #[serde(default = "defaults::degree")]
    pub degree: usize,
    /// Level (number of grid subintervals) for single-level commands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Levels for multi-level commands (convergence, pullback, forward-limit).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    /// Reference resolution for the convergence experiment.
    #[serde(default = "defaults::n_ref")]
    pub n_ref: usize,
    #[serde(default = "defaults::quadrature")]
    pub quadrature: String,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Pullback depth `s`.
    #[serde(default = "defaults::depth")]
    pub depth: usize,
    /// Forward horizon (steps past `tau`).
    #[serde(default = "defaults::horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub tau: i64,
    /// Time at which pullback witnesses are compared.
    #[serde(default)]
    pub eval_time: i64,
    /// Steps for `simulate`.
    #[serde(default = "defaults::steps")]
    pub steps: usize,
    /// Initial profile for `simulate`; expression in `x`.
    #[serde(default = "defaults::one")]
    pub u0: String,
    /// Seed profiles for `forward-limit`; expressions in `x`.
    #[serde(default = "defaults::seeds")]
    pub seeds: Vec<String>,
    #[serde(default = "defaults::fixed_point_tol")]
    pub fixed_point_tol: f64,
    #[serde(default = "defaults::max_iter")]
    pub max_iter: usize,
    /// Beverton-Holt parameters for the convergence experiment; one table
    /// column per value. Defaults to the model's own alpha.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default = "defaults::rho")]
    pub rho: f64,
    #[serde(default = "defaults::radius_tol")]
    pub radius_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    /// Trial count for `check-invariants`.
    #[serde(default = "defaults::trials")]
    pub trials: usize,
    /// Resolution of the sup-evaluation scheme.
    #[serde(default = "defaults::sup_resolution")]
    pub sup_resolution: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

mod defaults {
    pub fn rng_seed() -> u64 {
        42
    }
    pub fn degree() -> usize {
        1
    }
    pub fn n_ref() -> usize {
        4096
    }
    pub fn quadrature() -> String {
        "trapezoid".into()
    }
    pub fn depth() -> usize {
        15
    }
    pub fn horizon() -> usize {
        20
    }
    pub fn steps() -> usize {
        20
    }
    pub fn one() -> String {
        "1".into()
    }
    pub fn seeds() -> Vec<String> {
        vec!["1".into()]
    }
    pub fn fixed_point_tol() -> f64 {
        1e-12
    }
    pub fn max_iter() -> usize {
        400
    }
    pub fn rho() -> f64 {
        1.1
    }
    pub fn radius_tol() -> f64 {
        1e-8
    }
    pub fn trials() -> usize {
        100
    }
    pub fn sup_resolution() -> usize {
        256
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let [a, b] = self.model.habitat;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(CliError::config(format!(
                "model.habitat must satisfy a < b, got [{a}, {b}]"
            )));
        }
        if !(1..=3).contains(&self.discretization.degree) {
            return Err(CliError::config(format!(
                "discretization.degree must be 1, 2 or 3, got {}",
                self.discretization.degree
            )));
        }
        if self.discretization.quadrature != "trapezoid" {
            return Err(CliError::config(format!(
                "discretization.quadrature: only \"trapezoid\" is available, got \"{}\"",
                self.discretization.quadrature
            )));
        }
        // parse every expression once so errors carry their field name
        let parsed = |field: &str, src: &str| -> Result<Expr, CliError> {
            expr::parse(src)
                .map_err(|e| CliError::config(format!("{field} = \"{src}\": {e}")))
        };
        match &self.model.kernel {
            KernelConfig::Laplace { dispersal } => {
                let e = parsed("model.kernel.dispersal", dispersal)?;
                if e.uses_space() {
                    return Err(CliError::config(
                        "model.kernel.dispersal may depend on t only",
                    ));
                }
            }
        }
        match &self.model.growth {
            GrowthConfig::BevertonHolt { alpha, gamma } => {
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return Err(CliError::config(format!(
                        "model.growth.alpha must be positive, got {alpha}"
                    )));
                }
                parsed("model.growth.gamma", gamma)?;
            }
            GrowthConfig::Ricker { gamma, .. } => {
                let e = parsed("model.growth.gamma", gamma)?;
                if e.uses_space() {
                    return Err(CliError::config(
                        "model.growth.gamma may depend on t only for Ricker growth",
                    ));
                }
            }
        }
        if let Some(inh) = &self.model.inhomogeneity {
            let e = parsed("model.inhomogeneity.value", &inh.value)?;
            if e.uses_time() {
                return Err(CliError::config(
                    "model.inhomogeneity.value may depend on x only",
                ));
            }
        }
        parsed("experiment.u0", &self.experiment.u0).and_then(|e| {
            if e.uses_time() {
                Err(CliError::config("experiment.u0 may depend on x only"))
            } else {
                Ok(())
            }
        })?;
        for s in &self.experiment.seeds {
            let e = parsed("experiment.seeds", s)?;
            if e.uses_time() {
                return Err(CliError::config("experiment.seeds may depend on x only"));
            }
        }
        if let Some(list) = &self.discretization.n_list {
            if list.is_empty() {
                return Err(CliError::config("discretization.n_list must be nonempty"));
            }
        }
        Ok(())
    }

    /// Build the core model from the (validated) definition.
    pub fn build_model(&self) -> Result<IdeModel, CliError> {
        let [a, b] = self.model.habitat;
        let habitat = Habitat::new(a, b).map_err(CliError::from)?;
        let kernel = match &self.model.kernel {
            KernelConfig::Laplace { dispersal } => {
                let e = expr::parse(dispersal).expect("validated");
                KernelSpec::laplace(Arc::new(move |t| e.eval(t as f64, f64::NAN)))
            }
        };
        let growth = match &self.model.growth {
            GrowthConfig::BevertonHolt { alpha, gamma } => {
                let e = expr::parse(gamma).expect("validated");
                GrowthSpec::BevertonHolt {
                    alpha: *alpha,
                    gamma: Arc::new(move |t, x| e.eval(t as f64, x)),
                }
            }
            GrowthConfig::Ricker { gamma, .. } => {
                let e = expr::parse(gamma).expect("validated");
                GrowthSpec::Ricker { gamma: Arc::new(move |t| e.eval(t as f64, f64::NAN)) }
            }
        };
        let is_ricker = matches!(growth, GrowthSpec::Ricker { .. });
        let inhomogeneity = match &self.model.inhomogeneity {
            Some(cfg) => Some(build_inhomogeneity(&cfg.value)),
            None if is_ricker => Some(Inhomogeneity::constant(0.1)),
            None => None,
        };
        IdeModel::new(habitat, kernel, growth, inhomogeneity, TimeDomain::unbounded())
            .map_err(CliError::from)
    }

    /// Space profile from a validated expression in `x`.
    pub fn space_profile(src: &str) -> SpaceFn {
        let e = expr::parse(src).expect("validated");
        Arc::new(move |x| e.eval(f64::NAN, x))
    }

    /// Levels for multi-level commands: `n_list`, falling back to `n`.
    pub fn levels(&self) -> Result<Vec<usize>, CliError> {
        if let Some(list) = &self.discretization.n_list {
            return Ok(list.clone());
        }
        if let Some(n) = self.discretization.n {
            return Ok(vec![n]);
        }
        Err(CliError::config(
            "set discretization.n or discretization.n_list for this command",
        ))
    }

    /// Echo of the resolved configuration for run metadata.
    pub fn echo(&self) -> String {
        toml::to_string_pretty(self).unwrap_or_else(|e| format!("# serialization failed: {e}"))
    }
}

fn build_inhomogeneity(src: &str) -> Inhomogeneity {
    let e = expr::parse(src).expect("validated");
    if e.uses_space() {
        Inhomogeneity::from_fn(Arc::new(move |x| e.eval(f64::NAN, x)))
    } else {
        Inhomogeneity::constant(e.eval(f64::NAN, f64::NAN))
    }
}
