//! Command implementations: data synthesis, dispatch into the experiment
//! harness, and artifact writing. Every run drops a `manifest.json` that
//! embeds the effective configuration, so a run can be replayed from its
//! manifest alone.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use oversmooth::experiments::{
    self, csv_float, default_cbp_list, default_comparison_rules, default_contrast_alphas,
    default_delta_sweep, make_noisy_data, write_reconstruction_csv, NoiseModel,
};
use oversmooth::{
    a_priori_alpha, balancing_select, discrepancy_principle, minimize, oracle_alpha,
    quasi_optimality_heuristic, solve_path, BalancingConfig, BalancingVariant, NoiseAmplification,
    Reconstruction, SelectionResult, SourceCondition,
};

use crate::config::{run_err, CliError, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReproduceTarget {
    Table1,
    Figure1,
    Figure2,
    Figure3,
}

impl ReproduceTarget {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "table1" => Ok(ReproduceTarget::Table1),
            "figure1" => Ok(ReproduceTarget::Figure1),
            "figure2" => Ok(ReproduceTarget::Figure2),
            "figure3" => Ok(ReproduceTarget::Figure3),
            other => Err(CliError::Config(format!(
                "unknown reproduce target `{other}` (table1 | figure1 | figure2 | figure3)"
            ))),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            ReproduceTarget::Table1 => "table1",
            ReproduceTarget::Figure1 => "figure1",
            ReproduceTarget::Figure2 => "figure2",
            ReproduceTarget::Figure3 => "figure3",
        }
    }
}

fn write_manifest(
    dir: &Path,
    command: &str,
    config: &RunConfig,
    extra: serde_json::Value,
    artifacts: &[PathBuf],
) -> Result<PathBuf, CliError> {
    #[derive(Serialize)]
    struct Manifest<'a> {
        tool: &'static str,
        version: &'static str,
        command: &'a str,
        config: &'a RunConfig,
        details: serde_json::Value,
        artifacts: Vec<String>,
    }
    let manifest = Manifest {
        tool: "oversmooth",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        details: extra,
        artifacts: artifacts
            .iter()
            .map(|p| {
                p.strip_prefix(dir)
                    .unwrap_or(p)
                    .to_string_lossy()
                    .into_owned()
            })
            .collect(),
    };
    std::fs::create_dir_all(dir)
        .map_err(|e| run_err(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(run_err)?;
    std::fs::write(&path, text).map_err(run_err)?;
    Ok(path)
}

fn noise_model(config: &RunConfig) -> NoiseModel {
    NoiseModel {
        delta: config.noise.deltas[0],
        seed: config.noise.seed,
    }
}

/// Single (δ, α) or path run: reconstruction/path CSV plus manifest.
pub fn command_solve(config: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    config.validate()?;
    let case = config.case_study()?;
    let base = config.base_config()?;
    let noise = noise_model(config);
    let y_delta = make_noisy_data(&case.y, &noise);
    std::fs::create_dir_all(out).map_err(|e| run_err(format!("{}: {e}", out.display())))?;

    let mut artifacts = Vec::new();
    let detail = if base.parameter_grid.len() == 1 {
        let alpha = base.parameter_grid.alpha(0);
        let rec =
            minimize(&case.op, &y_delta, alpha, &case.x_bar, &base.solver).map_err(run_err)?;
        let path = out.join("reconstruction.csv");
        write_reconstruction_csv(&path, &rec, Some(&case.x_dag)).map_err(run_err)?;
        artifacts.push(path);
        json!({
            "mode": "single",
            "alpha": rec.alpha,
            "residual_norm": rec.residual_norm,
            "penalty_norm": rec.penalty_norm,
            "functional_value": rec.functional_value,
            "iterations": rec.iterations,
            "converged": rec.converged,
            "error_vs_exact": rec.x.distance(&case.x_dag),
        })
    } else {
        let path = solve_path(
            &case.op,
            &y_delta,
            &base.parameter_grid,
            &case.x_bar,
            &base.solver,
        )
        .map_err(run_err)?;
        let csv = out.join("path.csv");
        write_path_csv(&csv, &path, &case)?;
        artifacts.push(csv);
        json!({
            "mode": "path",
            "points": path.len(),
            "unconverged": path.iter().filter(|r| !r.converged).count(),
        })
    };
    artifacts.push(write_manifest(out, "solve", config, detail, &artifacts)?);
    Ok(artifacts)
}

fn write_path_csv(
    path: &Path,
    recs: &[Reconstruction],
    case: &oversmooth::CaseStudy,
) -> Result<(), CliError> {
    use std::io::Write as _;
    let mut file = std::fs::File::create(path).map_err(run_err)?;
    writeln!(
        file,
        "alpha,residual_norm,penalty_norm,functional_value,iterations,converged,error_vs_exact"
    )
    .map_err(run_err)?;
    for rec in recs {
        writeln!(
            file,
            "{},{},{},{},{},{},{}",
            csv_float(rec.alpha),
            csv_float(rec.residual_norm),
            csv_float(rec.penalty_norm),
            csv_float(rec.functional_value),
            rec.iterations,
            rec.converged,
            csv_float(rec.x.distance(&case.x_dag)),
        )
        .map_err(run_err)?;
    }
    Ok(())
}

/// Path + rule: selection trace JSON and the chosen reconstruction CSV.
pub fn command_select(config: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    config.validate()?;
    let case = config.case_study()?;
    let base = config.base_config()?;
    let noise = noise_model(config);
    let delta = noise.delta;
    let y_delta = make_noisy_data(&case.y, &noise);
    std::fs::create_dir_all(out).map_err(|e| run_err(format!("{}: {e}", out.display())))?;

    let path = solve_path(
        &case.op,
        &y_delta,
        &base.parameter_grid,
        &case.x_bar,
        &base.solver,
    )
    .map_err(run_err)?;

    let b = base.b();
    let selection: SelectionResult = match config.rule.id.as_str() {
        id @ ("balancing_first" | "balancing_standard" | "balancing_third") => {
            let variant = match id {
                "balancing_first" => BalancingVariant::First,
                "balancing_standard" => BalancingVariant::Standard,
                _ => BalancingVariant::Third,
            };
            let cfg = match (config.rule.c_bp, config.rule.beta) {
                (Some(c_bp), None) => {
                    BalancingConfig::replacement(variant, c_bp, b).map_err(run_err)?
                }
                (None, Some(beta)) => {
                    let na = NoiseAmplification::new(b, config.rule.kappa.unwrap_or(1.0))
                        .map_err(run_err)?;
                    BalancingConfig::balanced(variant, beta, config.rule.gamma, na, config.grid.q)
                        .map_err(run_err)?
                }
                _ => unreachable!("validated: exactly one parametrization"),
            };
            balancing_select(&path, delta, &cfg).map_err(run_err)?
        }
        "discrepancy" => {
            let c_dp = config.rule.c_dp.expect("validated");
            discrepancy_principle(&path, delta, c_dp).map_err(run_err)?
        }
        "quasi_optimality" => quasi_optimality_heuristic(&path).map_err(run_err)?,
        "oracle" => oracle_alpha(&path, &case.x_dag).map_err(run_err)?,
        "a_priori" => {
            let p = config.rule.p.expect("validated");
            let source = SourceCondition::holder(p).map_err(run_err)?;
            let alpha = a_priori_alpha(delta, config.a, &source).map_err(run_err)?;
            // snap to the grid element closest in log scale, ties upward
            let alphas = base.parameter_grid.alphas();
            let index = alphas
                .iter()
                .enumerate()
                .min_by(|(i, a1), (j, a2)| {
                    let d1 = (a1.ln() - alpha.ln()).abs();
                    let d2 = (a2.ln() - alpha.ln()).abs();
                    d1.partial_cmp(&d2).unwrap().then(j.cmp(i))
                })
                .map(|(i, _)| i)
                .expect("nonempty grid");
            SelectionResult {
                rule: "a_priori".to_string(),
                alphas,
                alpha_star: path[index].alpha,
                alpha_index: index,
                terminated_at_grid_end: index + 1 == path.len(),
                trace: Vec::new(),
                reconstruction: Some(path[index].clone()),
            }
        }
        other => return Err(CliError::Config(format!("unknown rule `{other}`"))),
    };

    let trace_path = out.join("selection_trace.json");
    std::fs::write(
        &trace_path,
        serde_json::to_string_pretty(&selection).map_err(run_err)?,
    )
    .map_err(run_err)?;
    let rec = selection
        .reconstruction
        .as_ref()
        .expect("selection carries its reconstruction");
    let rec_path = out.join("selected_reconstruction.csv");
    write_reconstruction_csv(&rec_path, rec, Some(&case.x_dag)).map_err(run_err)?;
    let mut artifacts = vec![trace_path, rec_path];
    let detail = json!({
        "rule": selection.rule,
        "alpha_star": selection.alpha_star,
        "alpha_index": selection.alpha_index,
        "error_vs_exact": rec.x.distance(&case.x_dag),
    });
    artifacts.push(write_manifest(out, "select", config, detail, &artifacts)?);
    Ok(artifacts)
}

/// Scripted reproduction of the benchmark table and figures with the
/// documented defaults; the configuration can still narrow n or the grid.
pub fn command_reproduce(
    target: ReproduceTarget,
    config: &RunConfig,
    out: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    config.validate()?;
    let base = config.base_config()?;
    std::fs::create_dir_all(out).map_err(|e| run_err(format!("{}: {e}", out.display())))?;
    let seeds = [config.noise.seed];
    let mut artifacts;
    let detail;
    match target {
        ReproduceTarget::Table1 => {
            let table =
                experiments::run_table1(&default_cbp_list(), &default_delta_sweep(), &seeds, &base)
                    .map_err(run_err)?;
            artifacts = table.write_csv(out).map_err(run_err)?;
            detail = serde_json::to_value(&table.rows).map_err(run_err)?;
        }
        ReproduceTarget::Figure1 => {
            let c_bp = 0.1;
            let table = experiments::run_table1(&[c_bp], &default_delta_sweep(), &seeds, &base)
                .map_err(run_err)?;
            artifacts = table.write_figure1_csv(out, c_bp).map_err(run_err)?;
            detail = serde_json::to_value(&table.rows).map_err(run_err)?;
        }
        ReproduceTarget::Figure2 => {
            let report = experiments::run_rule_comparison(
                experiments::FEATURED_DELTA,
                &default_comparison_rules(),
                &base,
            )
            .map_err(run_err)?;
            artifacts = report.write_csv(out, "figure2.csv").map_err(run_err)?;
            detail = serde_json::to_value(&report.markers).map_err(run_err)?;
        }
        ReproduceTarget::Figure3 => {
            let report = experiments::run_oversmoothing_contrast(
                experiments::FEATURED_DELTA,
                &default_contrast_alphas(),
                &base,
            )
            .map_err(run_err)?;
            artifacts = report.write_csv(out).map_err(run_err)?;
            detail = json!({
                "delta": report.delta,
                "cases": report.cases.iter().map(|c| json!({
                    "label": c.label,
                    "exact_total_variation": c.exact_total_variation,
                    "entries": c.entries.iter().map(|e| json!({
                        "alpha": e.alpha,
                        "error": e.error,
                        "total_variation": e.total_variation,
                    })).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            });
        }
    }
    artifacts.push(write_manifest(
        out,
        &format!("reproduce {}", target.name()),
        config,
        detail,
        &artifacts,
    )?);
    Ok(artifacts)
}
