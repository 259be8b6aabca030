//! Run configuration: a plain TOML file readable in any language, with
//! command-line flags overriding file values. All randomness is seeded from
//! here; nothing draws from wall-clock entropy.

use serde::{Deserialize, Serialize};

use oversmooth::{CaseStudy, Error as CoreError, ParameterGrid, SolverConfig, SolverMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    ExpGrowth,
    LinearSurrogate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactSolutionKind {
    /// x† ≡ 1 (oversmoothing case).
    ConstantOne,
    /// x̂†(t) = −(t−1/2)² + 1/4 (non-oversmoothing case).
    Parabola,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub alpha0: f64,
    pub q: f64,
    pub count: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            alpha0: 1e-12,
            q: 1.15,
            count: 165,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct RuleSection {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_bp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_dp: Option<f64>,
    /// Hölder exponent for the a-priori rule.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

fn default_gamma() -> f64 {
    1.0
}

impl Default for RuleSection {
    fn default() -> Self {
        RuleSection {
            id: "balancing_first".to_string(),
            c_bp: Some(0.1),
            beta: None,
            gamma: 1.0,
            kappa: None,
            c_dp: None,
            p: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub deltas: Vec<f64>,
    pub seed: u64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection {
            deltas: vec![oversmooth::experiments::FEATURED_DELTA],
            seed: oversmooth::experiments::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct SolverSection {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub step_tolerance: f64,
    pub line_search_shrink: f64,
    pub line_search_decrease: f64,
    pub method: String,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverSection {
            max_iterations: d.max_iterations,
            gradient_tolerance: d.gradient_tolerance,
            step_tolerance: d.step_tolerance,
            line_search_shrink: d.line_search_shrink,
            line_search_decrease: d.line_search_decrease,
            method: "gauss_newton".to_string(),
        }
    }
}

/// Full run configuration. `problem` and `n` are required in config files;
/// everything else falls back to the documented defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub n: usize,
    #[serde(default = "default_degree")]
    pub a: f64,
    #[serde(default)]
    pub output_dir: Option<String>,
    /// Exact solution for data synthesis and oracle comparisons. Data
    /// defaults to the x† ≡ 1 case when absent; the oracle rule refuses to
    /// run without it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_solution: Option<ExactSolutionKind>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub rule: RuleSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub solver: SolverSection,
}

fn default_degree() -> f64 {
    1.0
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: ProblemKind::ExpGrowth,
            n: 1000,
            a: 1.0,
            output_dir: None,
            exact_solution: None,
            grid: GridSection::default(),
            rule: RuleSection::default(),
            noise: NoiseSection::default(),
            solver: SolverSection::default(),
        }
    }
}

/// Setup-phase failures are configuration errors (exit code 1), as opposed
/// to runtime failures of a solver or rule (exit code 2).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Run(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Run(m) => write!(f, "run error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Run(_) => 2,
        }
    }
}

pub fn config_err(field: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {err}"))
}

pub fn run_err(err: impl std::fmt::Display) -> CliError {
    CliError::Run(err.to_string())
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Field-level validation of everything the modules will reject later,
    /// surfaced with the config-file field names.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n == 0 {
            return Err(config_err("n", "need at least one grid interval"));
        }
        if self.a <= 0.0 {
            return Err(config_err("a", "need a > 0"));
        }
        self.parameter_grid()?;
        self.solver_config()?;
        if self.noise.deltas.is_empty() {
            return Err(config_err("noise.deltas", "need at least one noise level"));
        }
        if self.noise.deltas.iter().any(|d| *d < 0.0) {
            return Err(config_err("noise.deltas", "noise levels must be >= 0"));
        }
        match self.rule.id.as_str() {
            "balancing_first" | "balancing_standard" | "balancing_third" => {
                if self.rule.c_bp.is_none() && self.rule.beta.is_none() {
                    return Err(config_err(
                        "rule",
                        "balancing needs either c_bp or beta (mutually exclusive)",
                    ));
                }
                if self.rule.c_bp.is_some() && self.rule.beta.is_some() {
                    return Err(config_err(
                        "rule",
                        "c_bp and beta are mutually exclusive parametrizations",
                    ));
                }
            }
            "discrepancy" => {
                if self.rule.c_dp.is_none() {
                    return Err(config_err("rule.c_dp", "discrepancy principle needs c_dp"));
                }
            }
            "quasi_optimality" => {}
            "oracle" => {
                if self.exact_solution.is_none() {
                    return Err(config_err(
                        "exact_solution",
                        "the oracle rule needs the exact solution in the config",
                    ));
                }
            }
            "a_priori" => {
                if self.rule.p.is_none() {
                    return Err(config_err(
                        "rule.p",
                        "a-priori rule needs the Hölder exponent",
                    ));
                }
            }
            other => {
                return Err(config_err("rule.id", format!("unknown rule `{other}`")));
            }
        }
        Ok(())
    }

    pub fn parameter_grid(&self) -> Result<ParameterGrid, CliError> {
        ParameterGrid::new(self.grid.alpha0, self.grid.q, self.grid.count)
            .map_err(|e| config_err("grid", e))
    }

    pub fn solver_config(&self) -> Result<SolverConfig, CliError> {
        let method = match self.solver.method.as_str() {
            "gauss_newton" => SolverMethod::GaussNewton,
            "lbfgs" => SolverMethod::Lbfgs,
            other => {
                return Err(config_err(
                    "solver.method",
                    format!("unknown method `{other}` (gauss_newton | lbfgs)"),
                ))
            }
        };
        let config = SolverConfig {
            max_iterations: self.solver.max_iterations,
            gradient_tolerance: self.solver.gradient_tolerance,
            step_tolerance: self.solver.step_tolerance,
            line_search_shrink: self.solver.line_search_shrink,
            line_search_decrease: self.solver.line_search_decrease,
            method,
            ..SolverConfig::default()
        };
        config.validate().map_err(|e| config_err("solver", e))?;
        Ok(config)
    }

    /// The synthetic case behind the data: the configured exact solution, or
    /// the x† ≡ 1 study when none is given.
    pub fn case_study(&self) -> Result<CaseStudy, CliError> {
        let build = |kind: Option<ExactSolutionKind>| -> Result<CaseStudy, CoreError> {
            match (self.problem, kind) {
                (ProblemKind::LinearSurrogate, _) => CaseStudy::linear_surrogate(self.n),
                (ProblemKind::ExpGrowth, Some(ExactSolutionKind::Parabola)) => {
                    CaseStudy::non_oversmoothing(self.n)
                }
                (ProblemKind::ExpGrowth, _) => CaseStudy::oversmoothing(self.n),
            }
        };
        build(self.exact_solution).map_err(|e| config_err("problem", e))
    }

    pub fn base_config(&self) -> Result<oversmooth::BaseConfig, CliError> {
        Ok(oversmooth::BaseConfig {
            n: self.n,
            a: self.a,
            parameter_grid: self.parameter_grid()?,
            solver: self.solver_config()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
problem = "exp_growth"
n = 500
a = 1.0
exact_solution = "parabola"

[grid]
alpha0 = 1e-9
q = 2.0
count = 20

[rule]
id = "discrepancy"
c_dp = 1.5

[noise]
deltas = [0.0179, 0.009]
seed = 11
"#;

    #[test]
    fn config_to_manifest_round_trip_is_identity() {
        let config: RunConfig = toml::from_str(SAMPLE).unwrap();
        let embedded = serde_json::to_value(&config).unwrap();
        let recovered: RunConfig = serde_json::from_value(embedded).unwrap();
        assert_eq!(config, recovered);
    }

    #[test]
    fn missing_required_field_names_it() {
        let err = toml::from_str::<RunConfig>("n = 100").unwrap_err();
        assert!(err.to_string().contains("problem"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = format!("{SAMPLE}\nmystery = 3\n");
        assert!(toml::from_str::<RunConfig>(&bad).is_err());
    }

    #[test]
    fn validation_catches_rule_mismatches() {
        let mut config: RunConfig = toml::from_str(SAMPLE).unwrap();
        config.rule = RuleSection {
            id: "oracle".to_string(),
            c_bp: None,
            beta: None,
            gamma: 1.0,
            kappa: None,
            c_dp: None,
            p: None,
        };
        config.exact_solution = None;
        let err = config.validate().unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        assert!(err.to_string().contains("exact_solution"));

        config.rule.id = "balancing_first".to_string();
        config.rule.c_bp = Some(0.1);
        config.rule.beta = Some(3.0);
        assert!(config.validate().is_err(), "both parametrizations at once");
    }
}
