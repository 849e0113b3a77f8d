//! Trace estimation through a thermofield double.
//!
//! Registers are ordered `C ⊗ A ⊗ B`: the single oracle ancilla `C` is the
//! most significant qubit, `A` holds the system and `B` its copy. The
//! Boltzmann oracle acts on `C ⊗ A`; the probability of finding `C` in `|0⟩`
//! after it is `Tr(B† B)/N` for its top-left block `B`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gqsp::{angles_for_laurent, gqsp_apply, gqsp_block, GqspAngles, LaurentPoly, RESCALE};
use crate::linalg::{DenseOperator, C64, DEFAULT_QUBIT_CAP, ONE, ZERO};
use crate::lwf::lwf_approx;
use crate::trotter::{EffectiveHamiltonian, ProductFormula};

/// Maximally entangled state `Σ_n |n⟩_A |n⟩_B / √N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThermofieldState {
    pub n: usize,
    pub vector: DVector<C64>,
}

pub fn thermofield_double(n: usize) -> Result<ThermofieldState> {
    if 2 * n > DEFAULT_QUBIT_CAP {
        return Err(Error::QubitCap {
            n: 2 * n,
            cap: DEFAULT_QUBIT_CAP,
        });
    }
    let dim = 1usize << n;
    let amp = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
    let mut vector = DVector::from_element(dim * dim, ZERO);
    for k in 0..dim {
        vector[k * dim + k] = amp;
    }
    Ok(ThermofieldState { n, vector })
}

impl ThermofieldState {
    /// Reduced density matrix on `A`.
    pub fn reduced_a(&self) -> DenseOperator {
        let dim = 1usize << self.n;
        let psi = DMatrix::from_fn(dim, dim, |a, b| self.vector[a * dim + b]);
        DenseOperator::from_matrix(&psi * psi.adjoint()).expect("square")
    }
}

/// `β_k = β ⌈1/(s t)⌉ s t`, with the floor for negative `s`.
pub fn beta_correction(beta: f64, s: f64, t: f64) -> Result<f64> {
    if s == 0.0 || t <= 0.0 {
        return Err(Error::invalid(format!("beta correction needs s != 0 and t > 0 (s={s}, t={t})")));
    }
    let x = 1.0 / (s * t);
    let rounded = if s > 0.0 { x.ceil() } else { x.floor() };
    Ok(beta * rounded * s * t)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMode {
    #[default]
    Exact,
    Gqsp,
    IdealW,
}

impl OracleMode {
    pub fn label(&self) -> &'static str {
        match self {
            OracleMode::Exact => "exact",
            OracleMode::Gqsp => "gqsp",
            OracleMode::IdealW => "ideal-w",
        }
    }
}

/// How spectrum of `H̃` is placed on the Fourier domain.
///
/// `W = S_p(τ)^q` has eigenphases `q τ λ̃ = (π/2) x` with
/// `x = κ (1 - δ') λ̃`; `q` is the largest power with `κ <= 1`, so
/// `λ̃ ∈ [-1, 1]` lands in `[-1 + δ, 1 - δ]` with `δ = 1 - κ(1 - δ')`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalMap {
    pub delta_prime: f64,
    pub q: u64,
    pub kappa: f64,
    /// Inverse temperature of the Fourier target `e^{-β''(x+1)}`.
    pub beta_target: f64,
    pub delta: f64,
    /// `e^{-β''(x+1)} = σ e^{-β(λ̃+1)/2}` on the mapped spectrum.
    pub sigma: f64,
    /// Negative steps reverse the phase direction.
    pub reflected: bool,
}

/// `δ' = min(1/β, 1/2)`.
pub fn default_delta_prime(beta: f64) -> f64 {
    if beta > 0.0 {
        (1.0 / beta).min(0.5)
    } else {
        0.5
    }
}

pub fn signal_map(beta: f64, tau: f64, delta_prime: f64) -> Result<SignalMap> {
    if !(delta_prime > 0.0 && delta_prime < 1.0) {
        return Err(Error::invalid(format!("delta' must lie in (0, 1), got {delta_prime}")));
    }
    if tau == 0.0 || !tau.is_finite() {
        return Err(Error::invalid("signal step must be finite and nonzero"));
    }
    let a = tau.abs();
    let q = (PI * (1.0 - delta_prime) / (2.0 * a)).floor();
    if q < 1.0 {
        return Err(Error::invalid(format!(
            "step {tau} too large for delta' = {delta_prime}: no integer power fits"
        )));
    }
    let kappa = 2.0 * q * a / (PI * (1.0 - delta_prime));
    let span = kappa * (1.0 - delta_prime);
    let beta_target = beta / (2.0 * span);
    Ok(SignalMap {
        delta_prime,
        q: q as u64,
        kappa,
        beta_target,
        delta: 1.0 - span,
        sigma: (beta / 2.0 - beta_target).exp(),
        reflected: tau < 0.0,
    })
}

/// Settings for the GQSP-based oracle modes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    /// Target accuracy of the normalized block.
    pub eps_qsp: f64,
    /// `None` selects [`default_delta_prime`].
    pub delta_prime: Option<f64>,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            eps_qsp: 1e-6,
            delta_prime: None,
        }
    }
}

/// Block encoding of `e^{-β(H̃+1)/2}` (times `scale`) with one ancilla.
#[derive(Clone, Debug)]
pub struct BoltzmannOracle {
    pub mode: OracleMode,
    pub beta: f64,
    pub tau: f64,
    /// Ancilla-0 block: `scale · e^{-β(H̃+1)/2}` up to the stated accuracy.
    pub block: DenseOperator,
    /// Known subnormalization (map factor times the completion rescale).
    pub scale: f64,
    pub map: Option<SignalMap>,
    pub angles: Option<GqspAngles>,
    signal: Option<DenseOperator>,
    /// Applications of the anti-controlled signal (`deg P̃ = 2M`).
    pub signal_queries: usize,
    /// `M` of the Fourier target after trimming.
    pub fourier_order: usize,
    /// Trotter steps per signal application.
    pub steps_per_query: u64,
}

impl BoltzmannOracle {
    /// `block / scale`, the estimate of `e^{-β(H̃+1)/2}`.
    pub fn normalized_block(&self) -> DenseOperator {
        self.block.scale(C64::new(1.0 / self.scale, 0.0))
    }

    /// Full unitary on `C ⊗ A`.
    pub fn unitary(&self) -> Result<DenseOperator> {
        match (&self.angles, &self.signal) {
            (Some(a), Some(w)) => gqsp_apply(a, w),
            _ => hermitian_dilation(&self.block),
        }
    }
}

/// `[[B, √(I - B²)], [√(I - B²), -B]]` for Hermitian `0 <= B <= I`.
pub fn hermitian_dilation(b: &DenseOperator) -> Result<DenseOperator> {
    let spec = crate::linalg::eigh(b, 1e-10)?;
    let comp = spec.map(|l| C64::new((1.0 - l.re * l.re).max(0.0).sqrt(), 0.0));
    let d = b.dim();
    let mut m = DMatrix::<C64>::zeros(2 * d, 2 * d);
    m.view_mut((0, 0), (d, d)).copy_from(b.matrix());
    m.view_mut((0, d), (d, d)).copy_from(comp.matrix());
    m.view_mut((d, 0), (d, d)).copy_from(comp.matrix());
    m.view_mut((d, d), (d, d)).copy_from(&(-b.matrix()));
    DenseOperator::from_matrix(m)
}

fn exact_block(h: &EffectiveHamiltonian, beta: f64) -> DenseOperator {
    h.spectrum.map(|l| C64::new((-beta * (l.re + 1.0) / 2.0).exp(), 0.0))
}

/// Builds the oracle for `H̃ = log S_p(τ)/(iτ)`.
pub fn build_u_boltz(
    formula: &ProductFormula,
    tau: f64,
    beta: f64,
    mode: OracleMode,
    settings: &OracleSettings,
) -> Result<BoltzmannOracle> {
    let h = formula.effective_hamiltonian(tau)?;
    build_u_boltz_from(&h, Some((formula, tau)), beta, mode, settings)
}

/// As [`build_u_boltz`] with `H̃` given directly. The gqsp mode needs the
/// formula to form `S_p(τ)^q`; without it only exact and ideal-W apply.
pub fn build_u_boltz_from(
    h: &EffectiveHamiltonian,
    source: Option<(&ProductFormula, f64)>,
    beta: f64,
    mode: OracleMode,
    settings: &OracleSettings,
) -> Result<BoltzmannOracle> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta must be finite and >= 0, got {beta}")));
    }
    let tau = source.map(|(_, t)| t).unwrap_or(h.tau);
    if mode == OracleMode::Exact || beta == 0.0 {
        return Ok(BoltzmannOracle {
            mode,
            beta,
            tau,
            block: exact_block(h, beta),
            scale: 1.0,
            map: None,
            angles: None,
            signal: None,
            signal_queries: 0,
            fourier_order: 0,
            steps_per_query: 0,
        });
    }
    let ev = h.eigenvalues();
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    if lo < -1.0 || hi > 1.0 {
        return Err(Error::SpectrumOutOfWindow { lo, hi, width: 1.0 });
    }
    let delta_prime = settings.delta_prime.unwrap_or_else(|| default_delta_prime(beta));
    let map = signal_map(beta, tau, delta_prime)?;
    let signal = match mode {
        OracleMode::Gqsp => {
            let (formula, t) = source.ok_or_else(|| Error::invalid("gqsp mode needs the product formula"))?;
            formula.unitary(t).pow(map.q)
        }
        _ => {
            let phase = map.q as f64 * tau;
            h.spectrum.map(|l| C64::from_polar(1.0, phase * l.re))
        }
    };
    // Size the Fourier target so the normalized block meets eps_qsp.
    let eps = settings.eps_qsp * map.sigma;
    let f = lwf_approx(map.beta_target, map.delta, eps / 2.0)?.trimmed_to(eps);
    let mut target = LaurentPoly::from_fourier(&f);
    if map.reflected {
        target = target.reflected();
    }
    let (angles, _, _) = angles_for_laurent(&target, RESCALE)?;
    let raw = gqsp_block(&angles, &signal)?;
    // Undo the monomial shift: P̃(W) = W^M p(W).
    let block = &signal.adjoint().pow(target.m() as u64) * &raw;
    Ok(BoltzmannOracle {
        mode,
        beta,
        tau,
        block,
        scale: map.sigma * RESCALE,
        map: Some(map),
        signal_queries: angles.degree,
        fourier_order: target.m(),
        angles: Some(angles),
        signal: Some(signal),
        steps_per_query: map.q,
    })
}

/// `Tr e^{-β(H̃+1)}/N` together with the unshifted `Z/N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessProbability {
    /// Probability realized by the oracle's block.
    pub shifted: f64,
    /// `Z(β, s)/N = Tr e^{-β H̃}/N`.
    pub unshifted: f64,
    /// `e^{-β}`, the known ratio between the two.
    pub shift_factor: f64,
}

pub fn exact_p0(h: &EffectiveHamiltonian, beta: f64) -> SuccessProbability {
    let unshifted = h.boltzmann_trace(beta);
    let shift_factor = (-beta).exp();
    SuccessProbability {
        shifted: unshifted * shift_factor,
        unshifted,
        shift_factor,
    }
}

/// `|0⟩_C ⊗ |ψ₀⟩_{AB}`.
pub fn initial_state(n: usize) -> Result<DVector<C64>> {
    let tfd = thermofield_double(n)?;
    let mut v = DVector::from_element(2 * tfd.vector.len(), ZERO);
    v.rows_mut(0, tfd.vector.len()).copy_from(&tfd.vector);
    Ok(v)
}

/// `(U ⊗ I_B) v` for `U` on `C ⊗ A`.
pub fn apply_on_ca(u: &DenseOperator, v: &DVector<C64>, dim_b: usize) -> DVector<C64> {
    let rows = u.dim();
    let psi = DMatrix::from_fn(rows, dim_b, |r, b| v[r * dim_b + b]);
    let out = u.matrix() * psi;
    DVector::from_fn(rows * dim_b, |k, _| out[(k / dim_b, k % dim_b)])
}

/// Probability of the ancilla reading 0, by evolving the full state.
pub fn success_probability(oracle: &BoltzmannOracle) -> Result<f64> {
    let dim = oracle.block.dim();
    let n = dim.trailing_zeros() as usize;
    let v = apply_on_ca(&oracle.unitary()?, &initial_state(n)?, dim);
    Ok(v.rows(0, dim * dim).norm_squared())
}

/// Unitary whose first column is `v` (a Householder reflection).
pub fn state_preparation(v: &DVector<C64>) -> DenseOperator {
    let n = v.len();
    let v0 = v[0];
    let phase = if v0.norm() > 0.0 { v0 / v0.norm() } else { ONE };
    // H = I - 2 w w† / (w† w) with w = e_0 - v/phase maps e_0 to v/phase.
    let mut w = -v / phase;
    w[0] += ONE;
    let ww = w.norm_squared();
    let mut m = DMatrix::<C64>::identity(n, n);
    if ww > 1e-30 {
        m -= &w * w.adjoint() * C64::new(2.0 / ww, 0.0);
    }
    DenseOperator::from_matrix(m * phase).expect("square")
}

/// The circuit `A = (U_boltz ⊗ I_B)(I_C ⊗ V)` with `V|0⟩ = |ψ₀⟩`.
pub fn amplitude_circuit(oracle: &BoltzmannOracle) -> Result<DenseOperator> {
    let dim = oracle.block.dim();
    let n = dim.trailing_zeros() as usize;
    let tfd = thermofield_double(n)?;
    let prep = DenseOperator::identity(2).kron(&state_preparation(&tfd.vector));
    let u = oracle.unitary()?.kron(&DenseOperator::identity(dim));
    Ok(&u * &prep)
}

/// `Q = -A S₀ A† S_χ` with `S₀ = I - 2|0⟩⟨0|` and `S_χ = I - 2 |0⟩⟨0|_C ⊗ I`.
pub fn grover_operator(a: &DenseOperator) -> Result<DenseOperator> {
    let n = a.dim();
    if n % 2 != 0 {
        return Err(Error::invalid("grover operator needs an even dimension"));
    }
    let mut s0 = DenseOperator::identity(n).into_matrix();
    s0[(0, 0)] = -ONE;
    let s_chi = DMatrix::from_fn(n, n, |r, c| {
        if r != c {
            ZERO
        } else if r < n / 2 {
            -ONE
        } else {
            ONE
        }
    });
    let q = -(a.matrix() * s0 * a.matrix().adjoint() * s_chi);
    DenseOperator::from_matrix(q)
}

/// `θ_a` from `Q`'s rotation on the plane spanned by `A|0⟩` and `Q A|0⟩`:
/// `Q` acts there with eigenvalues `e^{±2iθ_a}`.
pub fn grover_angle(q: &DenseOperator, a: &DenseOperator) -> f64 {
    let psi = a.matrix().column(0).clone_owned();
    let qpsi = q.matrix() * &psi;
    let c = psi.dotc(&qpsi);
    let perp = (&qpsi - &psi * c).norm();
    perp.atan2(c.re) / 2.0
}

/// Simulated register widths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLedger {
    pub system: usize,
    pub copy: usize,
    pub gqsp_ancilla: usize,
    pub estimation_ancilla: usize,
}

impl RegisterLedger {
    pub fn new(n: usize) -> Self {
        RegisterLedger {
            system: n,
            copy: n,
            gqsp_ancilla: 1,
            estimation_ancilla: 1,
        }
    }

    pub fn total(&self) -> usize {
        self.system + self.copy + self.gqsp_ancilla + self.estimation_ancilla
    }
}

/// Iterative amplitude estimation parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IqaeSchedule {
    /// Overall failure probability.
    pub alpha: f64,
    /// Shots per round.
    pub shots: u64,
}

impl Default for IqaeSchedule {
    fn default() -> Self {
        IqaeSchedule {
            alpha: 0.05,
            shots: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub p0_hat: f64,
    pub a0_hat: f64,
    /// Confidence interval on `a₀`.
    pub interval: (f64, f64),
    pub eps: f64,
    /// `Σ shots · (2k + 1)` over rounds: oracle applications in the
    /// executed circuits `Q^k A`.
    pub queries: u64,
    /// `Σ shots · k`: Grover powers alone.
    pub grover_applications: u64,
    pub rounds: usize,
    /// Propagated uncertainty on `p₀`, `2 a₀ ε + ε²`.
    pub p0_uncertainty: f64,
    pub seed: u64,
}

/// Largest `k` (with `K = 4k + 2` at least twice the current `K`) keeping the
/// scaled interval inside one half-plane; `None` if no such `k` exists.
fn next_k(k: u64, theta: (f64, f64)) -> Option<(u64, bool)> {
    let ki = (4 * k + 2) as f64;
    let width = theta.1 - theta.0;
    let mut kk = (PI / width).floor() as i64;
    kk -= (kk - 2).rem_euclid(4);
    while kk as f64 >= 2.0 * ki {
        let (lo, hi) = (kk as f64 * theta.0, kk as f64 * theta.1);
        let (lo, hi) = (lo.rem_euclid(2.0 * PI), hi.rem_euclid(2.0 * PI));
        if lo <= PI && hi <= PI && lo <= hi {
            return Some(((kk as u64 - 2) / 4, true));
        }
        if lo >= PI && hi >= PI && lo <= hi {
            return Some(((kk as u64 - 2) / 4, false));
        }
        kk -= 4;
    }
    None
}

/// Iterative amplitude estimation of `a₀ = √p₀` to additive accuracy `eps`,
/// drawing shot counts from the exact outcome probabilities
/// `sin²((2k+1)θ_a)`.
pub fn amplitude_estimate(p0_true: f64, eps: f64, seed: u64, schedule: &IqaeSchedule) -> Result<TraceEstimate> {
    if !(0.0..=1.0).contains(&p0_true) {
        return Err(Error::invalid(format!("p0 must lie in [0, 1], got {p0_true}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    if schedule.shots == 0 || !(schedule.alpha > 0.0 && schedule.alpha < 1.0) {
        return Err(Error::invalid("schedule needs shots > 0 and alpha in (0, 1)"));
    }
    let theta_a = p0_true.sqrt().asin();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_max = ((PI / (8.0 * eps)).log2().ceil()).max(1.0);
    let mut theta = (0.0f64, PI / 2.0);
    let (mut k, mut up) = (0u64, true);
    let (mut hits, mut total) = (0u64, 0u64);
    let mut queries = 0u64;
    let mut grover_applications = 0u64;
    let mut rounds = 0usize;
    while theta.1.sin() - theta.0.sin() > 2.0 * eps {
        if let Some((kn, un)) = next_k(k, theta) {
            if kn != k {
                hits = 0;
                total = 0;
            }
            k = kn;
            up = un;
        }
        let big_k = (4 * k + 2) as f64;
        let prob = (big_k * theta_a / 2.0).sin().powi(2).clamp(0.0, 1.0);
        let draws = Binomial::new(schedule.shots, prob)
            .map_err(|e| Error::invalid(format!("binomial sampler: {e}")))?
            .sample(&mut rng);
        hits += draws;
        total += schedule.shots;
        queries += schedule.shots * (2 * k + 1);
        grover_applications += schedule.shots * k;
        rounds += 1;
        let a = hits as f64 / total as f64;
        let half = ((2.0 * t_max / schedule.alpha).ln() / (2.0 * total as f64)).sqrt();
        let (a_lo, a_hi) = ((a - half).max(0.0), (a + half).min(1.0));
        let (t_lo, t_hi) = if up {
            ((1.0 - 2.0 * a_lo).acos(), (1.0 - 2.0 * a_hi).acos())
        } else {
            (2.0 * PI - (1.0 - 2.0 * a_hi).acos(), 2.0 * PI - (1.0 - 2.0 * a_lo).acos())
        };
        let base_lo = (big_k * theta.0 / (2.0 * PI)).floor() * 2.0 * PI;
        let base_hi = (big_k * theta.1 / (2.0 * PI)).floor() * 2.0 * PI;
        let new = ((base_lo + t_lo) / big_k, (base_hi + t_hi) / big_k);
        // Intersect, guarding against round-off inverting the interval.
        let lo = new.0.max(theta.0);
        let hi = new.1.min(theta.1);
        theta = if lo <= hi { (lo, hi) } else { (hi, lo) };
        if rounds > 100_000 {
            return Err(Error::invalid("amplitude estimation did not converge"));
        }
    }
    let interval = (theta.0.sin(), theta.1.sin());
    let a0_hat = 0.5 * (interval.0 + interval.1);
    Ok(TraceEstimate {
        p0_hat: a0_hat * a0_hat,
        a0_hat,
        interval,
        eps,
        queries,
        grover_applications,
        rounds,
        p0_uncertainty: 2.0 * a0_hat * eps + eps * eps,
        seed,
    })
}
