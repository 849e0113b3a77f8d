use std::path::Path;

use serde::{Deserialize, Serialize};

use gibbs_trotter::cheb::ancilla_savings;
use gibbs_trotter::hamiltonian::{normalize_one_norm, StageMode};
use gibbs_trotter::lwf::{
    fit_scan, lwf_approx, taylor_order, taylor_scan, truncation_scan, ScanRow, SCAN_FIT_WINDOW, SCAN_REFERENCE_EPS,
};
use gibbs_trotter::pipeline::{run_pipeline, ModelSpec, PipelineConfig, TraceMode};
use gibbs_trotter::stats::{binomial, log_log_fit, LinearFit};
use gibbs_trotter::thermal::RegisterLedger;
use gibbs_trotter::trotter::{log_grid, ProductFormula};

use crate::output::{fmt_f64, sha256_hex, unix_now, OutputDir, RunManifest, FORMAT_VERSION};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    LwfConvergence,
    QubitsSaved,
    Pipeline,
    TrotterOrder,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::LwfConvergence => "lwf-convergence",
            Command::QubitsSaved => "qubits-saved",
            Command::Pipeline => "pipeline",
            Command::TrotterOrder => "trotter-order",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LwfConvergenceConfig {
    pub betas: Vec<f64>,
    /// Fixed `δ`; by default `min(1/β, 1)` per β.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Truncation orders; by default every `M` up to the reference order.
    #[serde(default)]
    pub m_list: Option<Vec<usize>>,
    /// Taylor orders; by default every `K` up to the order for 1e-12.
    #[serde(default)]
    pub k_list: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitsSavedConfig {
    pub n_majorana: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_tau_min() -> f64 {
    1e-3
}

fn default_tau_max() -> f64 {
    1e-1
}

fn default_points() -> usize {
    9
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterOrderConfig {
    pub models: Vec<ModelSpec>,
    pub orders: Vec<usize>,
    #[serde(default = "default_tau_min")]
    pub tau_min: f64,
    #[serde(default = "default_tau_max")]
    pub tau_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_true")]
    pub normalize: bool,
    #[serde(default)]
    pub seed: u64,
}

pub struct RunOutcome {
    pub manifest: RunManifest,
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses `config_text`, applies overrides, runs the command into `out` and
/// writes the manifest. Stage assertion failures are reported after the
/// manifest is written.
pub fn run_command(
    cmd: Command,
    config_text: &str,
    out: &Path,
    seed: Option<u64>,
    mode: Option<TraceMode>,
) -> Result<RunOutcome, CliError> {
    if mode.is_some() && cmd != Command::Pipeline {
        return Err(config_error("--mode applies only to the pipeline command"));
    }
    let started = unix_now();
    let (config, master_seed, dir, failures) = match cmd {
        Command::LwfConvergence => {
            let mut cfg: LwfConvergenceConfig = parse(config_text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            validate_lwf(&cfg)?;
            let mut dir = OutputDir::create(out)?;
            let failures = lwf_convergence(&cfg, &mut dir)?;
            (serde_json::to_value(&cfg)?, cfg.seed, dir, failures)
        }
        Command::QubitsSaved => {
            let mut cfg: QubitsSavedConfig = parse(config_text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            for &n in &cfg.n_majorana {
                if n < 4 || n % 2 == 1 {
                    return Err(config_error(format!("n_majorana {n} must be even and >= 4")));
                }
            }
            let mut dir = OutputDir::create(out)?;
            let failures = qubits_saved(&cfg, &mut dir)?;
            (serde_json::to_value(&cfg)?, cfg.seed, dir, failures)
        }
        Command::Pipeline => {
            let mut cfg: PipelineConfig = parse(config_text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(m) = mode {
                cfg.mode = m;
            }
            cfg.validate().map_err(|e| config_error(e.to_string()))?;
            let mut dir = OutputDir::create(out)?;
            let failures = pipeline(&cfg, &mut dir)?;
            (serde_json::to_value(&cfg)?, cfg.seed, dir, failures)
        }
        Command::TrotterOrder => {
            let mut cfg: TrotterOrderConfig = parse(config_text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            validate_trotter(&cfg)?;
            let mut dir = OutputDir::create(out)?;
            let failures = trotter_order(&cfg, &mut dir)?;
            (serde_json::to_value(&cfg)?, cfg.seed, dir, failures)
        }
    };
    let manifest = RunManifest {
        format_version: FORMAT_VERSION,
        command: cmd.name().to_string(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: sha256_hex(serde_json::to_string(&config)?.as_bytes()),
        config,
        master_seed,
        started_unix: started,
        finished_unix: unix_now(),
        outputs: dir.entries().to_vec(),
        assertion_failures: failures.clone(),
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(dir.root().join("manifest.json"), text)?;
    if !failures.is_empty() {
        return Err(CliError::Assertion(failures));
    }
    Ok(RunOutcome { manifest })
}

fn validate_lwf(cfg: &LwfConvergenceConfig) -> Result<(), CliError> {
    if cfg.betas.is_empty() {
        return Err(config_error("betas must not be empty"));
    }
    if cfg.betas.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
        return Err(config_error("every beta must be finite and positive"));
    }
    if let Some(d) = cfg.delta {
        if !(d > 0.0 && d <= 1.0) {
            return Err(config_error(format!("delta must lie in (0, 1], got {d}")));
        }
    }
    Ok(())
}

fn validate_trotter(cfg: &TrotterOrderConfig) -> Result<(), CliError> {
    if cfg.models.is_empty() || cfg.orders.is_empty() {
        return Err(config_error("models and orders must not be empty"));
    }
    if !(cfg.tau_min > 0.0 && cfg.tau_min < cfg.tau_max && cfg.tau_max.is_finite()) {
        return Err(config_error("need 0 < tau_min < tau_max"));
    }
    if cfg.points < 4 {
        return Err(config_error("need at least 4 step sizes"));
    }
    for &p in &cfg.orders {
        if p == 0 || (p > 1 && p % 2 == 1) {
            return Err(config_error(format!("order {p} must be 1 or even")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
struct FitRecord {
    expansion: &'static str,
    beta: f64,
    delta: f64,
    /// Order against `ln(1/error)` over errors in the fit window.
    slope: Option<f64>,
    intercept: Option<f64>,
    r_squared: Option<f64>,
}

fn fit_record(expansion: &'static str, beta: f64, delta: f64, fit: Option<LinearFit>) -> FitRecord {
    FitRecord {
        expansion,
        beta,
        delta,
        slope: fit.map(|f| f.slope),
        intercept: fit.map(|f| f.intercept),
        r_squared: fit.map(|f| f.r_squared),
    }
}

fn scan_rows(expansion: &str, beta: f64, delta: f64, rows: &[ScanRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                expansion.to_string(),
                fmt_f64(beta),
                fmt_f64(delta),
                r.m.to_string(),
                fmt_f64(r.sup_error),
            ]
        })
        .collect()
}

fn lwf_convergence(cfg: &LwfConvergenceConfig, dir: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for &beta in &cfg.betas {
        let delta = cfg.delta.unwrap_or((1.0 / beta).min(1.0));
        let ms = match &cfg.m_list {
            Some(m) => m.clone(),
            None => (1..=lwf_approx(beta, delta, SCAN_REFERENCE_EPS)?.m).collect(),
        };
        let ks = match &cfg.k_list {
            Some(k) => k.clone(),
            None => (1..=taylor_order(beta, SCAN_REFERENCE_EPS)).collect(),
        };
        let scan = truncation_scan(beta, delta, &ms)?;
        let taylor = taylor_scan(beta, delta, &ks)?;
        rows.extend(scan_rows("lwf", beta, delta, &scan.rows));
        rows.extend(scan_rows("taylor", beta, delta, &taylor));
        // Short truncations oscillate, and below the window the reference
        // accuracy and round-off dominate; check the rows the fit uses.
        let in_window = |e: f64| e >= SCAN_FIT_WINDOW.0 && e <= SCAN_FIT_WINDOW.1;
        for w in scan.rows.windows(2) {
            if in_window(w[0].sup_error) && in_window(w[1].sup_error) && w[1].sup_error > w[0].sup_error * (1.0 + 1e-9) {
                failures.push(format!("beta {beta}: lwf error rises from M = {} to M = {}", w[0].m, w[1].m));
            }
        }
        match scan.fit {
            Some(f) if f.slope > 0.0 && f.r_squared >= 0.95 => {}
            Some(f) => failures.push(format!(
                "beta {beta}: lwf fit slope {} with R^2 {}",
                f.slope, f.r_squared
            )),
            None => failures.push(format!("beta {beta}: too few lwf errors inside the fit window")),
        }
        fits.push(fit_record("lwf", beta, delta, scan.fit));
        fits.push(fit_record("taylor", beta, delta, fit_scan(&taylor, SCAN_FIT_WINDOW)));
    }
    dir.write_csv("lwf_convergence.csv", &["expansion", "beta", "delta", "order", "sup_error"], &rows)?;
    dir.write_json("lwf_fits.json", &fits)?;
    Ok(failures)
}

fn qubits_saved(cfg: &QubitsSavedConfig, dir: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &n in &cfg.n_majorana {
        let gamma = binomial(n as u64, 4);
        let saved = ancilla_savings(n)?;
        let ledger = RegisterLedger::new(n / 2);
        if ledger.gqsp_ancilla != 1 || ledger.total() != n + 2 {
            failures.push(format!("n_majorana {n}: register ledger {ledger:?}"));
        }
        rows.push(vec![
            n.to_string(),
            (n / 2).to_string(),
            gamma.to_string(),
            saved.to_string(),
            ledger.gqsp_ancilla.to_string(),
            ledger.total().to_string(),
        ]);
    }
    dir.write_csv(
        "qubits_saved.csv",
        &["n_majorana", "n_qubits", "gamma", "saved", "this_method_ancillas", "total_width"],
        &rows,
    )?;
    Ok(failures)
}

fn pipeline(cfg: &PipelineConfig, dir: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let r = run_pipeline(cfg)?;
    let rows: Vec<Vec<String>> = r
        .nodes
        .iter()
        .zip(&r.cost.nodes)
        .map(|(n, c)| {
            vec![
                n.k.to_string(),
                fmt_f64(n.s),
                fmt_f64(n.d),
                fmt_f64(n.tau),
                fmt_f64(n.beta_k),
                fmt_f64(n.z_exact),
                fmt_f64(n.z_hat),
                fmt_f64(n.z_uncertainty),
                fmt_f64(n.block_error),
                fmt_f64(c.depth),
                n.queries.to_string(),
                n.seed.to_string(),
            ]
        })
        .collect();
    dir.write_csv(
        "nodes.csv",
        &[
            "k",
            "s_k",
            "d_k",
            "tau",
            "beta_k",
            "z_node_exact",
            "z_node_hat",
            "z_uncertainty",
            "block_error",
            "depth",
            "queries",
            "seed",
        ],
        &rows,
    )?;
    dir.write_json("partition.json", &r)?;

    let mut failures = Vec::new();
    let sum_d: f64 = r.grid.weights.iter().sum();
    if (sum_d - 1.0).abs() > 1e-12 {
        failures.push(format!("weights sum to {sum_d}"));
    }
    let terms: Vec<f64> = r.nodes.iter().map(|n| n.d * n.z_hat).collect();
    let direct: f64 = terms.iter().sum();
    let scale = terms.iter().map(|t| t.abs()).sum::<f64>().max(1.0);
    if (direct - r.extrapolated).abs() > 1e-14 * scale {
        failures.push(format!("extrapolation {} differs from the weighted sum {direct}", r.extrapolated));
    }
    if matches!(cfg.mode, TraceMode::Gqsp | TraceMode::IdealW) {
        for n in &r.nodes {
            if n.block_error > cfg.eps_qsp + 1e-8 {
                failures.push(format!("node {}: block error {:e}", n.k, n.block_error));
            }
        }
    }
    let abs_d: f64 = r.grid.weights.iter().map(|d| d.abs()).sum();
    let stat = abs_d * r.nodes.iter().map(|n| n.z_uncertainty).fold(0.0, f64::max);
    let block = if matches!(cfg.mode, TraceMode::Gqsp | TraceMode::IdealW) {
        // |Δ(B†B)| <= 2ε + ε² per entry block, relative to the e^{-β} shift.
        abs_d * (2.0 * cfg.eps_qsp + cfg.eps_qsp * cfg.eps_qsp) * cfg.beta.exp()
    } else {
        0.0
    };
    if r.eps_cheb_realized > cfg.eps_cheb + stat + block {
        failures.push(format!(
            "realized extrapolation error {:e} exceeds target {:e}",
            r.eps_cheb_realized,
            cfg.eps_cheb + stat + block
        ));
    }
    Ok(failures)
}

fn model_label(i: usize, m: &ModelSpec) -> String {
    match m {
        ModelSpec::Syk { n_majorana, seed, .. } => format!("{i}:syk-n{n_majorana}-s{seed}"),
        ModelSpec::RandomPauli { n_qubits, n_terms, seed } => format!("{i}:pauli-q{n_qubits}-g{n_terms}-s{seed}"),
        ModelSpec::Terms { hamiltonian } => format!("{i}:terms-q{}-g{}", hamiltonian.n_qubits, hamiltonian.terms.len()),
    }
}

#[derive(Clone, Debug, Serialize)]
struct SlopeRecord {
    model: String,
    order: usize,
    slope: Option<f64>,
    r_squared: Option<f64>,
    tolerance: f64,
}

/// Errors at or below this are treated as exact.
const EXACT_FLOOR: f64 = 1e-13;

pub fn slope_tolerance(order: usize) -> f64 {
    if order <= 2 {
        0.1
    } else {
        0.2
    }
}

fn trotter_order(cfg: &TrotterOrderConfig, dir: &mut OutputDir) -> Result<Vec<String>, CliError> {
    let taus = log_grid(cfg.tau_min, cfg.tau_max, cfg.points);
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for (i, spec) in cfg.models.iter().enumerate() {
        let raw = spec.build()?;
        let h = if cfg.normalize { normalize_one_norm(&raw)?.0 } else { raw };
        let label = model_label(i, spec);
        for &p in &cfg.orders {
            let formula = ProductFormula::new(&h, StageMode::Ungrouped, p)?;
            let errs = taus
                .iter()
                .map(|&t| formula.error_norm(t))
                .collect::<gibbs_trotter::Result<Vec<_>>>()?;
            for (t, e) in taus.iter().zip(&errs) {
                rows.push(vec![label.clone(), p.to_string(), fmt_f64(*t), fmt_f64(*e)]);
            }
            let fit = if errs.iter().all(|e| *e <= EXACT_FLOOR) {
                None
            } else {
                log_log_fit(&taus, &errs)
            };
            let tol = slope_tolerance(p);
            if let Some(f) = fit {
                if (f.slope - p as f64).abs() > tol {
                    failures.push(format!("{label} p = {p}: slope {}", f.slope));
                }
            }
            fits.push(SlopeRecord {
                model: label.clone(),
                order: p,
                slope: fit.map(|f| f.slope),
                r_squared: fit.map(|f| f.r_squared),
                tolerance: tol,
            });
        }
    }
    dir.write_csv("trotter_order.csv", &["model", "order", "tau", "error_norm"], &rows)?;
    dir.write_json("trotter_fits.json", &fits)?;
    Ok(failures)
}
