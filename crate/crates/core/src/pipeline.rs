//! End-to-end estimate of `Z(β)/N`: Trotterized traces at Chebyshev-scaled
//! steps, extrapolated to zero step.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cheb::{
    ancilla_savings, bernstein_bound, cheb_grid, cost_model, ellipse_point, interpolate_to_zero, ChebGrid, CostLedger,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{group_commuting, normalize_one_norm, random_pauli_model, HamiltonianDoc, HamiltonianTerms, StageMode};
use crate::linalg::{eigh, C64};
use crate::lwf::lwf_order;
use crate::seed::derive_seed;
use crate::stats::linear_fit;
use crate::syk::{build_syk_hamiltonian, sample_syk, VarianceRule};
use crate::thermal::{
    amplitude_estimate, beta_correction, build_u_boltz_from, default_delta_prime, IqaeSchedule, OracleMode,
    OracleSettings,
};
use crate::trotter::{EffectiveHamiltonian, ProductFormula};

/// Where the Hamiltonian comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Syk {
        n_majorana: usize,
        seed: u64,
        #[serde(default)]
        variance: VarianceRule,
    },
    RandomPauli {
        n_qubits: usize,
        n_terms: usize,
        seed: u64,
    },
    Terms {
        hamiltonian: HamiltonianDoc,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<HamiltonianTerms> {
        match self {
            ModelSpec::Syk { n_majorana, seed, variance } => {
                build_syk_hamiltonian(&sample_syk(*n_majorana, *seed, *variance)?)
            }
            ModelSpec::RandomPauli { n_qubits, n_terms, seed } => random_pauli_model(*n_qubits, *n_terms, *seed),
            ModelSpec::Terms { hamiltonian } => hamiltonian.to_terms(),
        }
    }

    pub fn n_majorana(&self) -> Option<usize> {
        match self {
            ModelSpec::Syk { n_majorana, .. } => Some(*n_majorana),
            _ => None,
        }
    }
}

/// How each node's `Z(β, s_k)/N` is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceMode {
    /// Success probability of the exact block.
    #[default]
    Exact,
    /// Success probability of the GQSP circuit block.
    Gqsp,
    /// GQSP angles applied to the ideal signal `e^{iqτH̃}`.
    IdealW,
    /// Amplitude estimation on the exact block's success probability.
    Sampled,
}

impl TraceMode {
    pub fn label(&self) -> &'static str {
        match self {
            TraceMode::Exact => "exact",
            TraceMode::Gqsp => "gqsp",
            TraceMode::IdealW => "ideal-w",
            TraceMode::Sampled => "sampled",
        }
    }

    fn oracle(&self) -> OracleMode {
        match self {
            TraceMode::Exact | TraceMode::Sampled => OracleMode::Exact,
            TraceMode::Gqsp => OracleMode::Gqsp,
            TraceMode::IdealW => OracleMode::IdealW,
        }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub model: ModelSpec,
    /// Inverse temperature for the (normalized) Hamiltonian.
    pub beta: f64,
    pub order: usize,
    /// Base step `t`; node `k` uses `τ = s_k t`.
    pub t: f64,
    pub m_cheb: usize,
    pub eps_qsp: f64,
    pub eps_cheb: f64,
    /// Additive accuracy of amplitude estimation in sampled mode.
    pub eps_stat: f64,
    #[serde(default)]
    pub mode: TraceMode,
    pub seed: u64,
    #[serde(default)]
    pub stage_mode: StageMode,
    /// Divide `H` by its one-norm so the spectrum lies in `[-1, 1]`.
    #[serde(default = "default_true")]
    pub normalize: bool,
    #[serde(default)]
    pub iqae: IqaeSchedule,
    #[serde(default)]
    pub delta_prime: Option<f64>,
}

impl PipelineConfig {
    /// Exact-mode defaults around a model.
    pub fn new(model: ModelSpec, beta: f64, order: usize, t: f64, m_cheb: usize) -> Self {
        PipelineConfig {
            model,
            beta,
            order,
            t,
            m_cheb,
            eps_qsp: 1e-6,
            eps_cheb: 1e-6,
            eps_stat: 0.05,
            mode: TraceMode::Exact,
            seed: 0,
            stage_mode: StageMode::Ungrouped,
            normalize: true,
            iqae: IqaeSchedule::default(),
            delta_prime: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be finite and >= 0, got {}", self.beta)));
        }
        if !(self.t > 0.0 && self.t <= PI) {
            return Err(Error::invalid(format!("base step t must lie in (0, pi], got {}", self.t)));
        }
        if self.m_cheb < 2 {
            return Err(Error::invalid(format!("M_cheb must be at least 2, got {}", self.m_cheb)));
        }
        // Odd grids put a node at s = 0, where there is no Trotter step.
        if self.m_cheb % 2 == 1 {
            return Err(Error::invalid(format!("M_cheb must be even, got {}", self.m_cheb)));
        }
        for (name, e) in [("eps_qsp", self.eps_qsp), ("eps_cheb", self.eps_cheb), ("eps_stat", self.eps_stat)] {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::invalid(format!("{name} must lie in (0, 1), got {e}")));
            }
        }
        Ok(())
    }
}

/// Per-node diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    /// 1-based node index.
    pub k: usize,
    pub s: f64,
    pub d: f64,
    pub tau: f64,
    /// `β_k = β ⌈1/(s_k t)⌉ s_k t`, the rounded-step temperature.
    pub beta_k: f64,
    /// `Tr e^{-β H̃}/N` from the eigenvalues of `H̃`.
    pub z_exact: f64,
    /// Value used in the extrapolation.
    pub z_hat: f64,
    /// Propagated uncertainty on `z_hat` (sampled mode), otherwise 0.
    pub z_uncertainty: f64,
    /// Largest entry of `block/scale - e^{-β(H̃+1)/2}`.
    pub block_error: f64,
    pub queries: u64,
    pub signal_queries: usize,
    pub fourier_order: usize,
    pub steps_per_query: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    pub config: PipelineConfig,
    pub n_qubits: usize,
    pub n_terms: usize,
    /// One-norm the Hamiltonian was divided by (1 without normalization).
    pub normalization: f64,
    pub grid: ChebGrid,
    /// In grid order.
    pub nodes: Vec<NodeRecord>,
    pub extrapolated: f64,
    /// Extrapolation of the exact node traces.
    pub extrapolated_exact: f64,
    /// `Z(β)/N` of the (normalized) Hamiltonian.
    pub oracle: f64,
    pub eps_cheb_realized: f64,
    pub cost: CostLedger,
    /// Selection-register width avoided, for SYK models.
    pub ancilla_savings: Option<u32>,
}

/// `Tr e^{-βH}/N` by dense diagonalization.
pub fn exact_partition(h: &HamiltonianTerms, beta: f64) -> Result<f64> {
    let dense = h.to_dense()?;
    Ok(EffectiveHamiltonian::exact(&dense)?.boltzmann_trace(beta))
}

fn evaluate_node(
    cfg: &PipelineConfig,
    formula: &ProductFormula,
    grid: &ChebGrid,
    idx: usize,
    settings: &OracleSettings,
) -> Result<NodeRecord> {
    let s = grid.nodes[idx];
    let tau = s * cfg.t;
    let heff = formula.effective_hamiltonian(tau)?;
    let z_exact = heff.boltzmann_trace(cfg.beta);
    let oracle = build_u_boltz_from(&heff, Some((formula, tau)), cfg.beta, cfg.mode.oracle(), settings)?;
    let n = heff.dim() as f64;
    let shift = (-cfg.beta).exp();
    let normalized = oracle.normalized_block();
    let block_error = if cfg.mode == TraceMode::Exact || cfg.mode == TraceMode::Sampled {
        0.0
    } else {
        let exact = heff.spectrum.map(|l| C64::new((-cfg.beta * (l.re + 1.0) / 2.0).exp(), 0.0));
        normalized.max_abs_diff(&exact)
    };
    // Tr(B†B)/N of the normalized block is Tr e^{-β(H̃+1)}/N.
    let p0 = normalized.matrix().norm_squared() / n;
    let seed = derive_seed(cfg.seed, &format!("node-{}", idx + 1));
    let (z_hat, z_uncertainty, queries) = if cfg.mode == TraceMode::Sampled {
        let est = amplitude_estimate(p0.clamp(0.0, 1.0), cfg.eps_stat, seed, &cfg.iqae)?;
        (est.p0_hat / shift, est.p0_uncertainty / shift, est.queries)
    } else {
        (p0 / shift, 0.0, 0)
    };
    Ok(NodeRecord {
        k: idx + 1,
        s,
        d: grid.weights[idx],
        tau,
        beta_k: beta_correction(cfg.beta, s, cfg.t)?,
        z_exact,
        z_hat,
        z_uncertainty,
        block_error,
        queries,
        signal_queries: oracle.signal_queries,
        fourier_order: oracle.fourier_order,
        steps_per_query: oracle.steps_per_query,
        seed,
    })
}

/// Prepares the (normalized, optionally grouped) Hamiltonian of a config.
pub fn prepare_hamiltonian(cfg: &PipelineConfig) -> Result<(HamiltonianTerms, f64)> {
    let raw = cfg.model.build()?;
    let (h, scale) = if cfg.normalize {
        normalize_one_norm(&raw)?
    } else {
        (raw, 1.0)
    };
    let h = match cfg.stage_mode {
        StageMode::Grouped => group_commuting(&h)?,
        StageMode::Ungrouped => h,
    };
    Ok((h, scale))
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PartitionResult> {
    cfg.validate()?;
    let (h, normalization) = prepare_hamiltonian(cfg)?;
    let formula = ProductFormula::new(&h, cfg.stage_mode, cfg.order)?;
    let grid = cheb_grid(cfg.m_cheb)?;
    let settings = OracleSettings {
        eps_qsp: cfg.eps_qsp,
        delta_prime: cfg.delta_prime,
    };
    // Largest |s_k| first: fewest Trotter steps per query.
    let mut order: Vec<usize> = (0..grid.m).collect();
    order.sort_by(|&a, &b| grid.nodes[b].abs().total_cmp(&grid.nodes[a].abs()).then(a.cmp(&b)));
    let mut slots: Vec<Option<NodeRecord>> = vec![None; grid.m];
    for idx in order {
        let rec = evaluate_node(cfg, &formula, &grid, idx, &settings).map_err(|e| Error::AtNode {
            index: idx + 1,
            source: Box::new(e),
        })?;
        slots[idx] = Some(rec);
    }
    let nodes: Vec<NodeRecord> = slots.into_iter().map(|r| r.expect("every node evaluated")).collect();
    let z_hat: Vec<f64> = nodes.iter().map(|n| n.z_hat).collect();
    let z_exact: Vec<f64> = nodes.iter().map(|n| n.z_exact).collect();
    let extrapolated = interpolate_to_zero(&z_hat, &grid)?;
    let extrapolated_exact = interpolate_to_zero(&z_exact, &grid)?;
    let oracle = exact_partition(&h, cfg.beta)?;
    let modelled_mk = lwf_order(default_delta_prime(cfg.beta).min(1.0), cfg.eps_qsp, 1.0)?;
    let m_k: Vec<usize> = nodes
        .iter()
        .map(|n| if n.fourier_order > 0 { n.fourier_order } else { modelled_mk })
        .collect();
    let cost = cost_model(h.stage_count(cfg.stage_mode), cfg.order.max(2), cfg.t, cfg.eps_stat, &grid, &m_k, &z_hat)?;
    Ok(PartitionResult {
        config: cfg.clone(),
        n_qubits: h.n_qubits(),
        n_terms: h.len(),
        normalization,
        extrapolated,
        extrapolated_exact,
        oracle,
        eps_cheb_realized: (extrapolated - oracle).abs(),
        cost,
        ancilla_savings: cfg.model.n_majorana().map(ancilla_savings).transpose()?,
        grid,
        nodes,
    })
}

/// One row of the trace-bound table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceBoundRow {
    pub tau: f64,
    /// `Tr e^{-β H̃_p(τ)}/N`.
    pub lhs: f64,
    /// `e^{β ‖L_p(τ)‖} Z/N`.
    pub rhs: f64,
    pub error_norm: f64,
    /// `lhs / rhs`.
    pub tightness: f64,
}

/// `|Tr e^{-βH̃_p(τ)}/N| <= e^{β‖H̃_p(τ) - H‖} Z/N` over a grid of steps.
pub fn trace_bound_check(h: &HamiltonianTerms, beta: f64, order: usize, taus: &[f64]) -> Result<Vec<TraceBoundRow>> {
    let formula = ProductFormula::new(h, StageMode::Ungrouped, order)?;
    let dense = h.to_dense()?;
    let z = eigh(&dense, 1e-10)?
        .real_eigenvalues()
        .iter()
        .map(|l| (-beta * l).exp())
        .sum::<f64>()
        / dense.dim() as f64;
    taus.iter()
        .map(|&tau| {
            let lhs = formula.effective_hamiltonian(tau)?.boltzmann_trace(beta).abs();
            let error_norm = formula.error_norm(tau)?;
            let rhs = (beta * error_norm).exp() * z;
            Ok(TraceBoundRow {
                tau,
                lhs,
                rhs,
                error_norm,
                tightness: lhs / rhs,
            })
        })
        .collect()
}

/// Bernstein-ellipse interpolation bound with `ρ` fitted from observed errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernsteinFit {
    /// `exp(-slope)` of `ln err` against `M - 1`.
    pub rho_fit: f64,
    /// `rho_fit`, shrunk until the ellipse avoids the branch cut of `log S_p`.
    pub rho: f64,
    /// Largest `|f|` over the ellipse samples.
    pub c: f64,
    /// `4 C ρ^{-(M-1)}/(ρ - 1)` per grid size.
    pub bounds: Vec<f64>,
}

/// Samples taken around the ellipse when estimating `C`.
pub const ELLIPSE_SAMPLES: usize = 720;

/// Fits `ρ` to `(M, err)` pairs for `f(s) = Tr e^{-βH̃_p(st)}/N` and
/// evaluates the interpolation bound with `C = max |f|` on the ellipse.
pub fn bernstein_fit(formula: &ProductFormula, beta: f64, t: f64, ms: &[usize], errs: &[f64]) -> Result<BernsteinFit> {
    if ms.len() != errs.len() || ms.len() < 2 {
        return Err(Error::invalid("need at least two (M, error) pairs"));
    }
    let x: Vec<f64> = ms.iter().map(|&m| m as f64 - 1.0).collect();
    let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let fit = linear_fit(&x, &y).ok_or_else(|| Error::invalid("errors do not admit a log-linear fit"))?;
    let rho_fit = (-fit.slope).exp();
    if !(rho_fit > 1.0) {
        return Err(Error::invalid(format!("errors do not decay (fitted rho {rho_fit})")));
    }
    let mut rho = rho_fit;
    let c = loop {
        match ellipse_max(formula, beta, t, rho) {
            Ok(c) => break c,
            Err(Error::BranchCut { .. }) if rho - 1.0 > 1e-6 => rho = 1.0 + 0.5 * (rho - 1.0),
            Err(e) => return Err(e),
        }
    };
    let bounds = ms
        .iter()
        .map(|&m| bernstein_bound(c, rho, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(BernsteinFit { rho_fit, rho, c, bounds })
}

fn ellipse_max(formula: &ProductFormula, beta: f64, t: f64, rho: f64) -> Result<f64> {
    (0..ELLIPSE_SAMPLES)
        .map(|i| {
            let (re, im) = ellipse_point(rho, 2.0 * PI * i as f64 / ELLIPSE_SAMPLES as f64);
            Ok(formula.boltzmann_trace_complex(beta, C64::new(re * t, im * t))?.norm())
        })
        .try_fold(0.0f64, |acc, v: Result<f64>| Ok(acc.max(v?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;

    fn syk8(seed: u64) -> ModelSpec {
        ModelSpec::Syk {
            n_majorana: 8,
            seed,
            variance: VarianceRule::default(),
        }
    }

    fn single_z() -> HamiltonianTerms {
        HamiltonianTerms::from_terms(1, [(1.0, "Z".parse::<PauliString>().unwrap())]).unwrap()
    }

    #[test]
    fn exact_partition_examples() {
        let h = single_z();
        assert!((exact_partition(&h, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((exact_partition(&h, 1.0).unwrap() - 1f64.cosh()).abs() < 1e-14);
    }

    #[test]
    fn config_validation() {
        let mut cfg = PipelineConfig::new(syk8(1), 1.0, 2, 0.3, 4);
        assert!(cfg.validate().is_ok());
        cfg.m_cheb = 3;
        assert!(cfg.validate().is_err());
        cfg.m_cheb = 4;
        cfg.t = 4.0;
        assert!(cfg.validate().is_err());
        cfg.t = 0.3;
        cfg.eps_stat = 1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let cfg = PipelineConfig::new(syk8(1), 1.0, 2, 0.3, 4);
        let mut v = serde_json::to_value(&cfg).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(serde_json::from_value::<PipelineConfig>(v).is_err());
        let back: PipelineConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn single_term_model_is_exact_at_every_node() {
        let doc = HamiltonianDoc::from_terms(&single_z(), None, "test");
        let cfg = PipelineConfig::new(ModelSpec::Terms { hamiltonian: doc }, 1.5, 2, 0.4, 4);
        let r = run_pipeline(&cfg).unwrap();
        for n in &r.nodes {
            assert!((n.z_hat - r.oracle).abs() < 1e-12);
        }
        assert!(r.eps_cheb_realized <= 1e-12);
        let sum: f64 = r.nodes.iter().map(|n| n.d * n.z_hat).sum();
        assert!((sum - r.extrapolated).abs() <= 1e-14);
    }

    #[test]
    fn syk_extrapolation_converges_within_bound() {
        let ms = [2, 4, 6, 8];
        let errs: Vec<f64> = ms
            .iter()
            .map(|&m| run_pipeline(&PipelineConfig::new(syk8(3), 2.0, 2, 2.0, m)).unwrap().eps_cheb_realized)
            .collect();
        assert!(errs.windows(2).all(|w| w[1] * 1.5 <= w[0]), "{errs:?}");
        let (h, _) = prepare_hamiltonian(&PipelineConfig::new(syk8(3), 2.0, 2, 2.0, 2)).unwrap();
        let formula = ProductFormula::new(&h, StageMode::Ungrouped, 2).unwrap();
        let fit = bernstein_fit(&formula, 2.0, 2.0, &ms, &errs).unwrap();
        assert!(fit.rho > 1.0 && fit.rho <= fit.rho_fit);
        for (e, b) in errs.iter().zip(&fit.bounds) {
            assert!(e <= b, "{errs:?} vs {:?}", fit.bounds);
        }
    }

    #[test]
    fn large_grids_reach_oracle() {
        let r = run_pipeline(&PipelineConfig::new(syk8(3), 2.0, 2, 0.5, 16)).unwrap();
        assert!(r.eps_cheb_realized < 1e-8);
    }

    #[test]
    fn gqsp_mode_tracks_exact_mode() {
        let mut cfg = PipelineConfig::new(syk8(5), 1.0, 2, 0.35, 4);
        let exact = run_pipeline(&cfg).unwrap();
        cfg.mode = TraceMode::Gqsp;
        let g = run_pipeline(&cfg).unwrap();
        for (a, b) in exact.nodes.iter().zip(&g.nodes) {
            assert!(b.block_error <= cfg.eps_qsp + 1e-8);
            assert!((a.z_hat - b.z_hat).abs() < 1e-5);
        }
    }

    #[test]
    fn node_errors_carry_index() {
        // A step this large leaves no room for the signal power.
        let mut cfg = PipelineConfig::new(syk8(1), 1.0, 2, 3.0, 2);
        cfg.mode = TraceMode::Gqsp;
        cfg.normalize = false;
        match run_pipeline(&cfg) {
            Err(Error::AtNode { .. }) => {}
            other => panic!("expected a node error, got {other:?}"),
        }
    }

    #[test]
    fn sampled_mode_is_seeded() {
        let mut cfg = PipelineConfig::new(syk8(2), 1.0, 2, 0.35, 4);
        cfg.mode = TraceMode::Sampled;
        cfg.seed = 11;
        let a = run_pipeline(&cfg).unwrap();
        let b = run_pipeline(&cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        cfg.seed = 12;
        let c = run_pipeline(&cfg).unwrap();
        assert_ne!(a.extrapolated, c.extrapolated);
    }

    #[test]
    fn sampled_mode_within_propagated_error() {
        let cfg = PipelineConfig::new(syk8(2), 1.0, 2, 0.35, 4);
        let exact = run_pipeline(&cfg).unwrap();
        let abs_d: f64 = exact.grid.weights.iter().map(|d| d.abs()).sum();
        let trials = 40;
        let mut inside = 0;
        for seed in 0..trials {
            let mut c = cfg.clone();
            c.mode = TraceMode::Sampled;
            c.seed = seed;
            let r = run_pipeline(&c).unwrap();
            let worst = r.nodes.iter().map(|n| n.z_uncertainty).fold(0.0, f64::max);
            if (r.extrapolated - exact.extrapolated).abs() <= abs_d * worst {
                inside += 1;
            }
        }
        assert!(inside as f64 >= 0.95 * trials as f64, "{inside}/{trials}");
    }

    #[test]
    fn trace_bound_commuting_is_tight() {
        let h = HamiltonianTerms::from_terms(
            2,
            [
                (0.4, "ZI".parse::<PauliString>().unwrap()),
                (-0.3, "ZZ".parse().unwrap()),
                (0.2, "IZ".parse().unwrap()),
            ],
        )
        .unwrap();
        for row in trace_bound_check(&h, 1.3, 2, &[0.01, 0.1, 0.5]).unwrap() {
            assert!((row.lhs - row.rhs).abs() <= 1e-10 * row.rhs, "{row:?}");
        }
    }

    #[test]
    fn trace_bound_random_models() {
        for seed in 0..4 {
            let (h, _) = normalize_one_norm(&random_pauli_model(3, 8, seed).unwrap()).unwrap();
            for p in [1, 2] {
                for row in trace_bound_check(&h, 2.0, p, &[1e-3, 1e-2, 0.1, 0.3]).unwrap() {
                    assert!(row.lhs <= row.rhs, "{row:?}");
                }
            }
        }
    }

    #[test]
    fn cost_and_ancilla_reported() {
        let r = run_pipeline(&PipelineConfig::new(syk8(1), 1.0, 2, 0.35, 4)).unwrap();
        assert_eq!(r.ancilla_savings, Some(7));
        assert_eq!(r.cost.nodes.len(), 4);
        assert!(r.cost.total > 0.0);
        assert!((r.normalization - syk_norm(1)).abs() < 1e-15);
    }

    fn syk_norm(seed: u64) -> f64 {
        syk8(seed).build().unwrap().one_norm()
    }
}
