//! Chebyshev extrapolation of step-size dependent quantities to zero step.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lwf::lwf_order;
use crate::stats::{binomial, ceil_log2};
use crate::trotter::{factorial, stage_count};

/// `T_j(s) = cos(j arccos s)` by the three-term recurrence.
pub fn chebyshev_t(j: usize, s: f64) -> f64 {
    match j {
        0 => 1.0,
        1 => s,
        _ => {
            let (mut a, mut b) = (1.0, s);
            for _ in 2..=j {
                let c = 2.0 * s * b - a;
                a = b;
                b = c;
            }
            b
        }
    }
}

/// Discretely orthonormal basis on `m` nodes: `√(1/m) T_0`, `√(2/m) T_j`.
pub fn orthonormal_u(j: usize, s: f64, m: usize) -> f64 {
    let norm = if j == 0 { 1.0 / m as f64 } else { 2.0 / m as f64 };
    norm.sqrt() * chebyshev_t(j, s)
}

/// Nodes `s_k = cos((2k-1)π/(2M))`, `k = 1..=M`, and extrapolation weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebGrid {
    pub m: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn cheb_grid(m: usize) -> Result<ChebGrid> {
    if m == 0 {
        return Err(Error::invalid("Chebyshev grid needs at least one node"));
    }
    let nodes: Vec<f64> = (1..=m)
        .map(|k| ((2 * k - 1) as f64 * PI / (2 * m) as f64).cos())
        .collect();
    // d_k = Σ_j u_j(0) u_j(s_k); only even j contribute since T_j(0) = 0 for odd j.
    let weights = nodes
        .iter()
        .map(|&s| {
            (0..m)
                .step_by(2)
                .map(|j| orthonormal_u(j, 0.0, m) * orthonormal_u(j, s, m))
                .sum()
        })
        .collect();
    Ok(ChebGrid { m, nodes, weights })
}

/// `d_k = (1/M)(-1)^{k+M/2} tan((2k-1)π/(2M))`, defined for even `M`.
pub fn closed_form_weights(m: usize) -> Option<Vec<f64>> {
    if m == 0 || m % 2 == 1 {
        return None;
    }
    Some(
        (1..=m)
            .map(|k| {
                let sign = if (k + m / 2) % 2 == 0 { 1.0 } else { -1.0 };
                sign * ((2 * k - 1) as f64 * PI / (2 * m) as f64).tan() / m as f64
            })
            .collect(),
    )
}

impl ChebGrid {
    /// `Σ_k u_i(s_k) u_j(s_k)`.
    pub fn orthonormality_matrix(&self) -> DMatrix<f64> {
        let v = DMatrix::from_fn(self.m, self.m, |k, j| orthonormal_u(j, self.nodes[k], self.m));
        v.transpose() * v
    }

    /// `Σ_k 1/|s_k|`; infinite for odd `M` (the middle node is 0).
    pub fn inverse_node_sum(&self) -> f64 {
        self.nodes.iter().map(|s| 1.0 / s.abs()).sum()
    }
}

/// `Σ_k d_k f(s_k)`.
pub fn interpolate_to_zero(values: &[f64], grid: &ChebGrid) -> Result<f64> {
    if values.len() != grid.m {
        return Err(Error::SizeMismatch {
            left: values.len(),
            right: grid.m,
        });
    }
    Ok(values.iter().zip(&grid.weights).map(|(v, d)| v * d).sum())
}

/// `ρ = r + √(r² - 1)` for the ellipse inscribed in the disc of radius `r`.
pub fn rho_from_radius(r: f64) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::invalid(format!("radius {r} gives a degenerate ellipse")));
    }
    Ok(r + (r * r - 1.0).sqrt())
}

/// `4 C ρ^{-(M-1)} / (ρ - 1)`.
pub fn bernstein_bound(c: f64, rho: f64, m: usize) -> Result<f64> {
    if !(rho > 1.0) {
        return Err(Error::invalid(format!("rho must exceed 1, got {rho}")));
    }
    if !(c > 0.0) {
        return Err(Error::invalid(format!("C must be positive, got {c}")));
    }
    Ok(4.0 * c * rho.powi(-(m as i32 - 1)) / (rho - 1.0))
}

/// Point on the Bernstein ellipse `(w + 1/w)/2` with `w = ρ e^{iφ}`.
pub fn ellipse_point(rho: f64, phi: f64) -> (f64, f64) {
    let a = 0.5 * (rho + 1.0 / rho);
    let b = 0.5 * (rho - 1.0 / rho);
    (a * phi.cos(), b * phi.sin())
}

/// `M_cheb = c (max(ln((Z/N)/ε), 0) + β α (r t)^p / p!) / ln r`, at least 2.
///
/// The log term is clamped at zero: `Z/N` may be below `ε`.
pub fn mcheb_size(beta: f64, alpha: f64, r: f64, t: f64, p: usize, eps_cheb: f64, z_ratio: f64, calibration: f64) -> Result<usize> {
    if !(r > 1.0) {
        return Err(Error::invalid(format!("radius must exceed 1, got {r}")));
    }
    if !(eps_cheb > 0.0 && z_ratio > 0.0) {
        return Err(Error::invalid("epsilon and Z/N must be positive"));
    }
    let log_term = (z_ratio / eps_cheb).ln().max(0.0);
    let trotter_term = beta * alpha * (r * t).powi(p as i32) / factorial(p);
    let m = (calibration * (log_term + trotter_term) / r.ln()).ceil();
    Ok((m as usize).max(2))
}

/// Order, base step and disc radius for a given `β`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub p: usize,
    pub t: f64,
    pub r: f64,
}

/// `p ~ √(log₅ β)` (nearest even order, at least 2), `t = e^{-√(ln β ln 5)}`,
/// `r = e^{1/√(log₅ β)}`; below `β = 1` a fixed `(2, 0.5, 2)`.
pub fn scaling_schedule(beta: f64) -> Schedule {
    if !(beta >= 1.0) {
        return Schedule { p: 2, t: 0.5, r: 2.0 };
    }
    let ln5 = 5f64.ln();
    let l5 = beta.ln() / ln5;
    let p = (2.0 * (l5.sqrt() / 2.0).round()).max(2.0) as usize;
    let t = (-(beta.ln() * ln5).sqrt()).exp();
    // At β = 1, log₅β = 0 and the radius diverges; keep it finite.
    let r = if l5 > 0.0 { (1.0 / l5.sqrt()).exp() } else { f64::INFINITY };
    Schedule { p, t, r }
}

/// Selection-register width a block encoding of `C(n, 4)` terms needs,
/// `⌈log₂ C(n, 4)⌉`.
pub fn ancilla_savings(n_majorana: usize) -> Result<u32> {
    if n_majorana < 4 || n_majorana % 2 == 1 {
        return Err(Error::MajoranaCount(n_majorana));
    }
    Ok(ceil_log2(binomial(n_majorana as u64, 4)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeCost {
    pub s: f64,
    /// Fourier order `M_k` of the node's polynomial.
    pub m_k: usize,
    /// Stages of one `S_p` step.
    pub stages: usize,
    /// `M_k · stages / (t |s_k|)`.
    pub depth: f64,
    /// `√(Z_k/N)/ε`.
    pub queries: f64,
}

/// Cost bookkeeping for one pipeline configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub nodes: Vec<NodeCost>,
    /// `Σ_k depth_k · queries_k`.
    pub total: f64,
    /// `(stages/t) max_k(M_k √(Z_k/N)/ε) M log M`.
    pub aggregate: f64,
    pub inverse_node_sum: f64,
    /// `Σ 1/|s_k| / (M log M)`.
    pub node_identity_ratio: f64,
}

/// Per-node depth and query counts with the aggregate cost expression.
#[allow(clippy::too_many_arguments)]
pub fn cost_model(
    n_terms: usize,
    p: usize,
    t: f64,
    eps_stat: f64,
    grid: &ChebGrid,
    m_k: &[usize],
    z_k: &[f64],
) -> Result<CostLedger> {
    if m_k.len() != grid.m || z_k.len() != grid.m {
        return Err(Error::SizeMismatch {
            left: m_k.len().min(z_k.len()),
            right: grid.m,
        });
    }
    if !(t > 0.0 && eps_stat > 0.0) {
        return Err(Error::invalid("cost model needs t > 0 and epsilon > 0"));
    }
    let stages = stage_count(n_terms, p)?;
    let nodes: Vec<NodeCost> = grid
        .nodes
        .iter()
        .zip(m_k)
        .zip(z_k)
        .map(|((&s, &m), &z)| NodeCost {
            s,
            m_k: m,
            stages,
            depth: m as f64 * stages as f64 / (t * s.abs()),
            queries: z.max(0.0).sqrt() / eps_stat,
        })
        .collect();
    let total = nodes.iter().map(|n| n.depth * n.queries).sum();
    let worst = nodes
        .iter()
        .map(|n| n.m_k as f64 * n.queries)
        .fold(0.0, f64::max);
    let mm = grid.m as f64;
    let mlogm = (mm * mm.ln()).max(mm);
    let inverse_node_sum = grid.inverse_node_sum();
    Ok(CostLedger {
        nodes,
        total,
        aggregate: stages as f64 / t * worst * mlogm,
        inverse_node_sum,
        node_identity_ratio: inverse_node_sum / mlogm,
    })
}

/// Modelled total cost at inverse temperature `β` under [`scaling_schedule`],
/// with `M_k` from the Fourier order at `δ = 1/β` and `M_cheb` from
/// [`mcheb_size`] rounded up to even.
pub fn scheduled_cost(beta: f64, alpha: f64, n_terms: usize, eps: f64, z_ratio: f64) -> Result<CostLedger> {
    let sch = scaling_schedule(beta);
    let mut m = mcheb_size(beta, alpha, sch.r, sch.t, sch.p, eps, z_ratio, 1.0)?;
    m += m % 2;
    let grid = cheb_grid(m)?;
    let mk = lwf_order((1.0 / beta).min(1.0), eps, 1.0)?;
    cost_model(n_terms, sch.p, sch.t, eps, &grid, &vec![mk; m], &vec![z_ratio; m])
}
