//! Suzuki–Trotter product formulas and their effective Hamiltonians.
//!
//! `S_1(t) = Π_γ e^{i H_γ t}` with γ = 1 leftmost, `S_2(t) = S_1(t/2) S_1(-t/2)†`
//! and `S_{2l}(t) = S(u t)² S((1-4u) t) S(u t)²` with `u = (4 - 4^{1/(2l-1)})^{-1}`.
//!
//! Products are accumulated as deviations from the identity,
//! `(I + E)(I + F) = I + E + F + EF`, so that `S(τ) - I` keeps relative
//! precision for small steps before the logarithm is taken. The Trotter error
//! `H̃ - H` itself has a second, extended-precision route
//! ([`ProductFormula::error_operator`]) for errors below `f64` resolution.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hamiltonian::{HamiltonianTerms, StageMode, Term};
use crate::precise::{error_from_ratio, exp_minus_i_h, Dd, DdMatrix};
use crate::linalg::{
    eigh, expm1_c, log1p_c, log_unitary_from_deviation, DenseOperator,
    SpectralDecomposition, Tolerances, C64, DEFAULT_QUBIT_CAP, I, ONE, ZERO,
};
use crate::stats::log_log_fit;

/// `(4 - 4^{1/(2l-1)})^{-1}`.
pub fn suzuki_u(l: usize) -> Result<f64> {
    if l < 2 {
        return Err(Error::invalid(format!("suzuki_u needs l >= 2, got {l}")));
    }
    Ok(1.0 / (4.0 - 4f64.powf(1.0 / (2 * l - 1) as f64)))
}

/// One exponential `e^{i H_term · fraction · t}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stage {
    /// Zero-based stage (term or group) index.
    pub term: usize,
    pub fraction: f64,
}

/// A fully unrolled product formula, leftmost factor first.
#[derive(Clone, Debug, PartialEq)]
pub struct FormulaPlan {
    pub order: usize,
    pub n_terms: usize,
    pub stages: Vec<Stage>,
}

impl FormulaPlan {
    /// Total fraction of `t` given to each term.
    pub fn fraction_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_terms];
        for s in &self.stages {
            sums[s.term] += s.fraction;
        }
        sums
    }

    pub fn is_symmetric(&self) -> bool {
        self.order % 2 == 0
    }
}

/// Number of exponentials in the unrolled formula: `Γ`, `2Γ`, `2·5^{l-1}Γ`.
pub fn stage_count(n_terms: usize, order: usize) -> Result<usize> {
    match order {
        1 => Ok(n_terms),
        p if p >= 2 && p % 2 == 0 => Ok(2 * 5usize.pow((p / 2 - 1) as u32) * n_terms),
        p => Err(Error::UnsupportedOrder(p)),
    }
}

pub fn build_plan(n_terms: usize, order: usize) -> Result<FormulaPlan> {
    if n_terms == 0 {
        return Err(Error::invalid("product formula needs at least one term"));
    }
    let stages = match order {
        1 => (0..n_terms).map(|term| Stage { term, fraction: 1.0 }).collect(),
        p if p >= 2 && p % 2 == 0 => symmetric_stages(n_terms, p / 2)?,
        p => return Err(Error::UnsupportedOrder(p)),
    };
    Ok(FormulaPlan {
        order,
        n_terms,
        stages,
    })
}

fn symmetric_stages(n_terms: usize, l: usize) -> Result<Vec<Stage>> {
    if l == 1 {
        let forward = (0..n_terms).map(|term| Stage { term, fraction: 0.5 });
        let backward = (0..n_terms).rev().map(|term| Stage { term, fraction: 0.5 });
        return Ok(forward.chain(backward).collect());
    }
    let inner = symmetric_stages(n_terms, l - 1)?;
    let u = suzuki_u(l)?;
    let scaled = |f: f64| inner.iter().map(move |s| Stage {
        term: s.term,
        fraction: s.fraction * f,
    });
    let mut out = Vec::with_capacity(5 * inner.len());
    out.extend(scaled(u));
    out.extend(scaled(u));
    out.extend(scaled(1.0 - 4.0 * u));
    out.extend(scaled(u));
    out.extend(scaled(u));
    Ok(out)
}

/// Stage fractions of `plan` recomputed in double-double.
fn fractions_dd(plan: &FormulaPlan) -> Vec<Dd> {
    fn symmetric(n_terms: usize, l: usize) -> Vec<Dd> {
        let half = Dd::from_f64(0.5);
        if l == 1 {
            return vec![half; 2 * n_terms];
        }
        let inner = symmetric(n_terms, l - 1);
        let root = Dd::nth_root(4.0, (2 * l - 1) as u32);
        let u = Dd::ONE.div(Dd::from_f64(4.0) - root);
        let mid = Dd::ONE - Dd::from_f64(4.0) * u;
        [u, u, mid, u, u]
            .iter()
            .flat_map(|&f| inner.iter().map(move |&x| x * f))
            .collect()
    }
    let exact = match plan.order {
        1 => vec![Dd::ONE; plan.n_terms],
        p => symmetric(plan.n_terms, p / 2),
    };
    let matches = exact.len() == plan.stages.len()
        && exact
            .iter()
            .zip(&plan.stages)
            .all(|(d, s)| (d.to_f64() - s.fraction).abs() <= 1e-14);
    // Hand-built plans keep their f64 fractions.
    if matches {
        exact
    } else {
        plan.stages.iter().map(|s| Dd::from_f64(s.fraction)).collect()
    }
}

/// Exponential of one stage operator.
#[derive(Clone, Debug)]
enum Kernel {
    /// `coeff · P`, with `P|c> = amp |row>` tabulated per column.
    Pauli { coeff: f64, map: Vec<(usize, C64)> },
    /// A dense Hermitian stage (a commuting group); the Pauli tables of its
    /// members feed the extended-precision route.
    Spectral {
        spec: SpectralDecomposition,
        paulis: Vec<PauliTable>,
    },
}

/// `(coeff, P|c> = amp|row>` per column `c`).
type PauliTable = (f64, Vec<(usize, C64)>);

fn pauli_table(t: &Term, dim: usize) -> PauliTable {
    (t.coeff, (0..dim).map(|c| t.pauli.apply_to_basis(c)).collect())
}

impl Kernel {
    /// `E <- (I + E)(I + F) - I` with `F = e^{i x H_j} - I`.
    fn compose(&self, e: &mut DMatrix<C64>, x: C64) {
        let dim = e.nrows();
        match self {
            Kernel::Pauli { coeff, map } => {
                let y = x * *coeff;
                let half = (y * 0.5).sin();
                let a = half * half * -2.0;
                let b = I * y.sin();
                let old = e.clone();
                let keep = ONE + a;
                for (c, &(r, amp)) in map.iter().enumerate() {
                    let ba = b * amp;
                    for i in 0..dim {
                        e[(i, c)] = old[(i, c)] * keep + ba * old[(i, r)];
                    }
                    e[(r, c)] += ba;
                    e[(c, c)] += a;
                }
            }
            Kernel::Spectral { spec, .. } => {
                let f = spec.map(|lam| expm1_c(I * x * lam)).into_matrix();
                let ef = &*e * &f;
                *e += f + ef;
            }
        }
    }
}

/// A Hamiltonian bound to a plan, with per-stage kernels cached.
#[derive(Clone, Debug)]
pub struct ProductFormula {
    dim: usize,
    plan: FormulaPlan,
    kernels: Vec<Kernel>,
    fractions_dd: Vec<Dd>,
    terms: Vec<PauliTable>,
    hamiltonian: DenseOperator,
    h_spectrum: SpectralDecomposition,
    tol: Tolerances,
}

impl ProductFormula {
    pub fn new(h: &HamiltonianTerms, mode: StageMode, order: usize) -> Result<Self> {
        let plan = build_plan(h.stage_count(mode), order)?;
        Self::with_plan(h, mode, plan)
    }

    pub fn with_plan(h: &HamiltonianTerms, mode: StageMode, plan: FormulaPlan) -> Result<Self> {
        if h.n_qubits() > DEFAULT_QUBIT_CAP {
            return Err(Error::QubitCap {
                n: h.n_qubits(),
                cap: DEFAULT_QUBIT_CAP,
            });
        }
        if h.is_empty() {
            return Err(Error::ZeroHamiltonian);
        }
        let gamma = h.stage_count(mode);
        if plan.n_terms != gamma {
            return Err(Error::SizeMismatch {
                left: plan.n_terms,
                right: gamma,
            });
        }
        let tol = Tolerances::default();
        let dim = h.dim();
        let kernels = match (mode, h.groups()) {
            (StageMode::Grouped, Some(groups)) => h
                .stage_operators(StageMode::Grouped)?
                .iter()
                .zip(groups)
                .map(|(op, g)| {
                    Ok(Kernel::Spectral {
                        spec: eigh(op, tol.hermitian)?,
                        paulis: g.iter().map(|&k| pauli_table(&h.terms()[k], dim)).collect(),
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            (StageMode::Grouped, None) => {
                return Err(Error::invalid("grouped stages requested before group_commuting"))
            }
            (StageMode::Ungrouped, _) => h
                .terms()
                .iter()
                .map(|t| {
                    let (coeff, map) = pauli_table(t, dim);
                    Kernel::Pauli { coeff, map }
                })
                .collect(),
        };
        let hamiltonian = h.to_dense()?;
        Ok(ProductFormula {
            dim,
            fractions_dd: fractions_dd(&plan),
            plan,
            kernels,
            terms: h.terms().iter().map(|t| pauli_table(t, dim)).collect(),
            h_spectrum: eigh(&hamiltonian, tol.hermitian)?,
            hamiltonian,
            tol,
        })
    }

    pub fn plan(&self) -> &FormulaPlan {
        &self.plan
    }

    pub fn order(&self) -> usize {
        self.plan.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dense `H = Σ_γ H_γ`.
    pub fn hamiltonian(&self) -> &DenseOperator {
        &self.hamiltonian
    }

    /// `S_p(t) - I` for a possibly complex step.
    pub fn deviation(&self, t: C64) -> DenseOperator {
        let mut e = DMatrix::from_element(self.dim, self.dim, ZERO);
        for s in &self.plan.stages {
            self.kernels[s.term].compose(&mut e, t * s.fraction);
        }
        DenseOperator::from_matrix(e).expect("square")
    }

    /// `S_p(t)`.
    pub fn unitary(&self, t: f64) -> DenseOperator {
        let e = self.deviation(C64::new(t, 0.0));
        &e + &DenseOperator::identity(self.dim)
    }

    /// `H̃_p(τ) = log S_p(τ) / (iτ)`.
    pub fn effective_hamiltonian(&self, tau: f64) -> Result<EffectiveHamiltonian> {
        if tau == 0.0 || !tau.is_finite() {
            return Err(Error::invalid(format!("effective Hamiltonian needs a finite nonzero step, got {tau}")));
        }
        let dev = self.deviation(C64::new(tau, 0.0));
        let log = log_unitary_from_deviation(&dev, self.tol.branch_cut)?;
        let raw = log.scale(C64::new(0.0, -1.0 / tau));
        let (matrix, defect) = raw.hermitian_part();
        if defect > 1e-10 {
            return Err(Error::NotHermitian(defect));
        }
        let spectrum = eigh(&matrix, self.tol.hermitian)?;
        Ok(EffectiveHamiltonian {
            matrix,
            spectrum,
            tau,
            order: self.plan.order,
            hermitian_defect: defect,
        })
    }

    /// `L_p(τ) = H̃_p(τ) - H`, resolved in extended precision.
    ///
    /// Accurate to relative order `‖L‖|τ|` plus ~1e-30 absolute, so it stays
    /// meaningful where `H̃` itself is indistinguishable from `H` in `f64`.
    pub fn error_operator(&self, tau: f64) -> Result<DenseOperator> {
        if tau == 0.0 || !tau.is_finite() {
            return Err(Error::invalid(format!("Trotter error needs a finite nonzero step, got {tau}")));
        }
        let t = Dd::from_f64(tau);
        let mut e = DdMatrix::zeros(self.dim);
        for (s, frac) in self.plan.stages.iter().zip(&self.fractions_dd) {
            let x = *frac * t;
            match &self.kernels[s.term] {
                Kernel::Pauli { coeff, map } => e.compose_pauli(x * Dd::from_f64(*coeff), map),
                // Members of a group commute, so their product is the group's
                // exponential.
                Kernel::Spectral { paulis, .. } => {
                    for (coeff, map) in paulis {
                        e.compose_pauli(x * Dd::from_f64(*coeff), map);
                    }
                }
            }
        }
        let g = exp_minus_i_h(&self.terms, self.dim, t);
        // R = G (I + E) - I
        let ratio = g.mul(&e).plus(&g).minus_identity();
        Ok(error_from_ratio(&ratio.to_dense(), &self.h_spectrum, tau))
    }

    /// Spectral norm of `H̃_p(τ) - H` from the extended-precision route.
    pub fn error_norm(&self, tau: f64) -> Result<f64> {
        self.error_operator(tau)?.hermitian_norm()
    }

    /// Spectral norm of `H̃_p(τ) - H` with `H̃` from the `f64` matrix
    /// logarithm; limited to roughly `1e-15 / |τ|`.
    pub fn error_norm_spectral(&self, tau: f64) -> Result<f64> {
        let heff = self.effective_hamiltonian(tau)?;
        (&heff.matrix - &self.hamiltonian).hermitian_norm()
    }

    /// Eigenvalues of `S_p(z)` for complex `z`, where the formula is no
    /// longer unitary.
    pub fn eigenvalue_deviations(&self, z: C64) -> Vec<C64> {
        let dev = self.deviation(z);
        crate::linalg::eigenvalues(&dev)
    }

    /// Analytic continuation of `Tr e^{-β H̃_p(z)} / N` to complex steps,
    /// through the eigenvalues of `S_p(z)`.
    pub fn boltzmann_trace_complex(&self, beta: f64, z: C64) -> Result<C64> {
        if z.norm() == 0.0 {
            return Err(Error::invalid("complex step must be nonzero"));
        }
        let mut acc = ZERO;
        for mu in self.eigenvalue_deviations(z) {
            let log = log1p_c(mu);
            if log.im.abs() > std::f64::consts::PI - self.tol.branch_cut {
                return Err(Error::BranchCut {
                    phase: log.im,
                    guard: self.tol.branch_cut,
                });
            }
            let lam = log / (I * z);
            acc += (-lam * beta).exp();
        }
        Ok(acc / self.dim as f64)
    }
}

/// Ordered product of the plan's exponentials for an ungrouped Hamiltonian.
pub fn apply_formula(h: &HamiltonianTerms, t: f64, plan: &FormulaPlan) -> Result<DenseOperator> {
    Ok(ProductFormula::with_plan(h, StageMode::Ungrouped, plan.clone())?.unitary(t))
}

/// `H̃_p(s t)` for an ungrouped Hamiltonian.
pub fn effective_hamiltonian(
    h: &HamiltonianTerms,
    s: f64,
    t: f64,
    plan: &FormulaPlan,
) -> Result<EffectiveHamiltonian> {
    if s == 0.0 {
        return Err(Error::invalid("node s must be nonzero"));
    }
    ProductFormula::with_plan(h, StageMode::Ungrouped, plan.clone())?.effective_hamiltonian(s * t)
}

/// `‖H̃_p(τ) - H‖` for an ungrouped Hamiltonian.
pub fn trotter_error_norm(h: &HamiltonianTerms, tau: f64, plan: &FormulaPlan) -> Result<f64> {
    ProductFormula::with_plan(h, StageMode::Ungrouped, plan.clone())?.error_norm(tau)
}

/// The Hermitian generator of one Trotter step.
#[derive(Clone, Debug)]
pub struct EffectiveHamiltonian {
    pub matrix: DenseOperator,
    pub spectrum: SpectralDecomposition,
    pub tau: f64,
    pub order: usize,
    /// Anti-Hermitian part removed by symmetrization.
    pub hermitian_defect: f64,
}

impl EffectiveHamiltonian {
    /// Wraps an exact Hamiltonian (no Trotter error) in the same shape.
    pub fn exact(h: &DenseOperator) -> Result<Self> {
        Ok(EffectiveHamiltonian {
            matrix: h.clone(),
            spectrum: eigh(h, Tolerances::default().hermitian)?,
            tau: 0.0,
            order: 0,
            hermitian_defect: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectrum.real_eigenvalues()
    }

    /// `Tr e^{-β H̃} / N`.
    pub fn boltzmann_trace(&self, beta: f64) -> f64 {
        let ev = self.eigenvalues();
        ev.iter().map(|l| (-beta * l).exp()).sum::<f64>() / ev.len() as f64
    }
}

/// Least-squares `α` in `‖H̃_p(τ) - H‖ ≈ α |τ|^p / (p+1)!`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaFit {
    pub alpha: f64,
    /// Log–log slope of the error over the grid; `None` when the errors are
    /// at round-off level.
    pub slope: Option<f64>,
    pub errors: Vec<f64>,
}

/// Errors at or below this are treated as exact commutation.
const ROUNDOFF_ERROR: f64 = 1e-12;

pub fn fit_alpha(formula: &ProductFormula, taus: &[f64]) -> Result<AlphaFit> {
    if taus.len() < 4 {
        return Err(Error::invalid("fit_alpha needs at least 4 step sizes"));
    }
    let p = formula.order();
    let errors = taus
        .iter()
        .map(|&t| formula.error_norm(t))
        .collect::<Result<Vec<_>>>()?;
    if errors.iter().all(|&e| e <= ROUNDOFF_ERROR) {
        return Ok(AlphaFit {
            alpha: 0.0,
            slope: None,
            errors,
        });
    }
    let abs: Vec<f64> = taus.iter().map(|t| t.abs()).collect();
    let fit = log_log_fit(&abs, &errors).ok_or_else(|| Error::invalid("degenerate step grid"))?;
    if (fit.slope - p as f64).abs() > 0.2 {
        return Err(Error::NonAsymptotic {
            slope: fit.slope,
            expected: p,
        });
    }
    let fact = factorial(p + 1);
    let xs: Vec<f64> = abs.iter().map(|t| t.powi(p as i32) / fact).collect();
    let sxy: f64 = xs.iter().zip(&errors).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    Ok(AlphaFit {
        alpha: sxy / sxx,
        slope: Some(fit.slope),
        errors,
    })
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Logarithmically spaced grid from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{group_commuting, random_pauli_model};
    use crate::linalg::matrix_exp;
    use crate::pauli::PauliString;
    use crate::stats::log_log_fit;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    /// Dense product of `matrix_exp` factors, independent of the deviation
    /// kernels.
    fn naive_product(h: &HamiltonianTerms, t: f64, plan: &FormulaPlan) -> DenseOperator {
        let ops = h.stage_operators(StageMode::Ungrouped).unwrap();
        plan.stages.iter().fold(DenseOperator::identity(h.dim()), |acc, s| {
            &acc * &matrix_exp(&ops[s.term], C64::new(0.0, s.fraction * t)).unwrap()
        })
    }

    #[test]
    fn suzuki_values() {
        assert!((suzuki_u(2).unwrap() - 0.414_490_771_7).abs() < 1e-10);
        assert!((suzuki_u(3).unwrap() - 0.373_065_827_7).abs() < 1e-10);
        for l in 2..6 {
            let u = suzuki_u(l).unwrap();
            assert_eq!(4.0 * u + (1.0 - 4.0 * u), 1.0);
        }
        assert!(suzuki_u(1).is_err());
    }

    #[test]
    fn plan_shapes() {
        let p1 = build_plan(3, 1).unwrap();
        let got: Vec<_> = p1.stages.iter().map(|s| (s.term, s.fraction)).collect();
        assert_eq!(got, vec![(0, 1.0), (1, 1.0), (2, 1.0)]);
        let p2 = build_plan(2, 2).unwrap();
        let got: Vec<_> = p2.stages.iter().map(|s| (s.term, s.fraction)).collect();
        assert_eq!(got, vec![(0, 0.5), (1, 0.5), (1, 0.5), (0, 0.5)]);
        let p4 = build_plan(2, 4).unwrap();
        assert_eq!(p4.stages.len(), 20);
        let u = suzuki_u(2).unwrap();
        let blocks: Vec<f64> = p4.stages.chunks(4).map(|c| c[0].fraction * 2.0).collect();
        let want = [u, u, 1.0 - 4.0 * u, u, u];
        for (b, w) in blocks.iter().zip(want) {
            assert!((b - w).abs() < 1e-15);
        }
        for order in [1, 2, 4, 6] {
            let plan = build_plan(5, order).unwrap();
            assert_eq!(plan.stages.len(), stage_count(5, order).unwrap());
            for s in plan.fraction_sums() {
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
        assert!(matches!(build_plan(2, 3), Err(Error::UnsupportedOrder(3))));
    }

    #[test]
    fn kernels_match_naive_products() {
        let h = random_pauli_model(3, 5, 9).unwrap();
        for order in [1, 2, 4] {
            let plan = build_plan(5, order).unwrap();
            let fast = apply_formula(&h, 0.37, &plan).unwrap();
            let slow = naive_product(&h, 0.37, &plan);
            assert!(fast.max_abs_diff(&slow) < 1e-13, "order {order}");
            assert!(fast.unitarity_error() < 1e-10);
        }
        let g = group_commuting(&h).unwrap();
        let grouped = ProductFormula::new(&g, StageMode::Grouped, 2).unwrap();
        assert!(grouped.unitary(0.2).unitarity_error() < 1e-10);
    }

    #[test]
    fn single_term_is_exact() {
        let h = HamiltonianTerms::from_terms(2, [(0.7, ps("XZ"))]).unwrap();
        let dense = h.to_dense().unwrap();
        for order in [1, 2, 4] {
            let plan = build_plan(1, order).unwrap();
            let u = apply_formula(&h, 0.9, &plan).unwrap();
            let want = matrix_exp(&dense, C64::new(0.0, 0.9)).unwrap();
            assert!(u.max_abs_diff(&want) < 1e-14);
            for (s, t) in [(0.5, 0.3), (-0.8, 0.3), (1.0, 2.0)] {
                let heff = effective_hamiltonian(&h, s, t, &plan).unwrap();
                assert!(heff.matrix.max_abs_diff(&dense) < 1e-10);
            }
        }
        let plan = build_plan(1, 2).unwrap();
        assert!(apply_formula(&h, 0.0, &plan).unwrap().max_abs_diff(&DenseOperator::identity(4)) < 1e-16);
    }

    #[test]
    fn commuting_terms_match_full_exponential() {
        let h = HamiltonianTerms::from_terms(3, [(0.3, ps("ZZI")), (-0.2, ps("IZZ")), (0.5, ps("XXX"))]).unwrap();
        assert!(h.is_commuting());
        let dense = h.to_dense().unwrap();
        for order in [1, 2, 4] {
            let plan = build_plan(3, order).unwrap();
            let want = matrix_exp(&dense, C64::new(0.0, 1.1)).unwrap();
            assert!(apply_formula(&h, 1.1, &plan).unwrap().max_abs_diff(&want) < 1e-10);
            for tau in [1e-3, 1e-2, 0.1, 0.5] {
                assert!(trotter_error_norm(&h, tau, &plan).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn symmetric_formulas_are_time_reversible() {
        let h = random_pauli_model(3, 4, 21).unwrap();
        for order in [2, 4] {
            let f = ProductFormula::new(&h, StageMode::Ungrouped, order).unwrap();
            let fwd = f.unitary(0.4);
            let bwd = f.unitary(-0.4);
            assert!(bwd.max_abs_diff(&fwd.adjoint()) < 1e-10);
            let a = f.effective_hamiltonian(0.4).unwrap();
            let b = f.effective_hamiltonian(-0.4).unwrap();
            assert!(a.matrix.max_abs_diff(&b.matrix) < 1e-10);
        }
    }

    #[test]
    fn effective_hamiltonian_reconstructs_step() {
        let h = random_pauli_model(3, 6, 4).unwrap();
        for order in [1, 2, 4] {
            let f = ProductFormula::new(&h, StageMode::Ungrouped, order).unwrap();
            for tau in [0.05, 0.5, 1.5] {
                let heff = f.effective_hamiltonian(tau).unwrap();
                assert!(heff.matrix.hermiticity_error() < 1e-10);
                let back = matrix_exp(&heff.matrix, C64::new(0.0, tau)).unwrap();
                assert!(back.max_abs_diff(&f.unitary(tau)) < 1e-9);
            }
        }
    }

    #[test]
    fn branch_cut_is_reported() {
        let h = HamiltonianTerms::from_terms(1, [(1.0, ps("Z"))]).unwrap();
        let f = ProductFormula::new(&h, StageMode::Ungrouped, 1).unwrap();
        assert!(matches!(
            f.effective_hamiltonian(std::f64::consts::PI),
            Err(Error::BranchCut { .. })
        ));
    }

    #[test]
    fn error_slopes_follow_order() {
        for seed in 0..3 {
            let h = random_pauli_model(3, 4, 100 + seed).unwrap();
            let (h, _) = crate::hamiltonian::normalize_one_norm(&h).unwrap();
            let taus = log_grid(1e-3, 1e-1, 7);
            for (order, tol) in [(1, 0.1), (2, 0.1), (4, 0.2)] {
                let f = ProductFormula::new(&h, StageMode::Ungrouped, order).unwrap();
                let errs: Vec<f64> = taus.iter().map(|&t| f.error_norm(t).unwrap()).collect();
                let fit = log_log_fit(&taus, &errs).unwrap();
                assert!((fit.slope - order as f64).abs() <= tol, "seed {seed} p={order}: {}", fit.slope);
            }
        }
    }

    #[test]
    fn error_routes_agree() {
        let h = random_pauli_model(3, 5, 17).unwrap();
        let (h, _) = crate::hamiltonian::normalize_one_norm(&h).unwrap();
        for order in [1, 2, 4] {
            let f = ProductFormula::new(&h, StageMode::Ungrouped, order).unwrap();
            for tau in [0.05, 0.2, -0.3] {
                let precise = f.error_operator(tau).unwrap();
                let heff = f.effective_hamiltonian(tau).unwrap();
                let spectral = &heff.matrix - f.hamiltonian();
                let scale = spectral.max_abs();
                let diff = precise.max_abs_diff(&spectral);
                // First-order inversion: relative error of order ‖L‖|τ|.
                let rel = 4.0 * scale * tau.abs();
                assert!(diff <= rel * scale + 1e-13, "p={order} tau={tau}: {diff} vs {scale}");
            }
        }
    }

    #[test]
    fn grouped_precise_route_matches_spectral() {
        let h = group_commuting(&random_pauli_model(3, 8, 5).unwrap()).unwrap();
        let f = ProductFormula::new(&h, StageMode::Grouped, 2).unwrap();
        let precise = f.error_norm(0.1).unwrap();
        let spectral = f.error_norm_spectral(0.1).unwrap();
        assert!((precise / spectral - 1.0).abs() < 1e-6);
    }

    #[test]
    fn alpha_matches_commutator_for_a_pair() {
        let h = HamiltonianTerms::from_terms(1, [(0.6, ps("X")), (0.4, ps("Z"))]).unwrap();
        let ops = h.stage_operators(StageMode::Ungrouped).unwrap();
        let comm = ops[0].commutator(&ops[1]).operator_norm();
        let f = ProductFormula::new(&h, StageMode::Ungrouped, 1).unwrap();
        let fit = fit_alpha(&f, &log_grid(1e-4, 1e-3, 5)).unwrap();
        // ‖L‖ ≈ ½‖[H1,H2]‖ τ, so α = ½‖[H1,H2]‖ · 2!.
        assert!((fit.alpha / comm - 1.0).abs() < 0.25, "{} vs {comm}", fit.alpha);
        let other = fit_alpha(&f, &log_grid(1e-3, 1e-2, 5)).unwrap();
        assert!((other.alpha / fit.alpha - 1.0).abs() < 0.1);
    }

    #[test]
    fn alpha_vanishes_for_commuting_models() {
        let h = HamiltonianTerms::from_terms(2, [(0.5, ps("ZZ")), (0.5, ps("XX"))]).unwrap();
        let f = ProductFormula::new(&h, StageMode::Ungrouped, 2).unwrap();
        let fit = fit_alpha(&f, &log_grid(1e-3, 1e-1, 5)).unwrap();
        assert_eq!(fit.alpha, 0.0);
    }

    #[test]
    fn non_asymptotic_grid_is_rejected() {
        let h = random_pauli_model(2, 4, 3).unwrap();
        let f = ProductFormula::new(&h, StageMode::Ungrouped, 2).unwrap();
        // Steps near the branch guard are far outside the power-law regime.
        let r = fit_alpha(&f, &[0.6, 0.9, 1.2, 1.5]);
        assert!(matches!(r, Err(Error::NonAsymptotic { .. })), "{r:?}");
    }

    #[test]
    fn complex_trace_continues_real_trace() {
        let h = random_pauli_model(2, 3, 5).unwrap();
        let (h, _) = crate::hamiltonian::normalize_one_norm(&h).unwrap();
        let f = ProductFormula::new(&h, StageMode::Ungrouped, 2).unwrap();
        let tau = 0.3;
        let real = f.effective_hamiltonian(tau).unwrap().boltzmann_trace(2.0);
        let z = f.boltzmann_trace_complex(2.0, C64::new(tau, 0.0)).unwrap();
        assert!((z.re - real).abs() < 1e-12 && z.im.abs() < 1e-12);
    }
}
