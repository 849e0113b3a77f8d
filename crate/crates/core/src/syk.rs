//! SYK model with q = 4 on Majorana operators mapped by Jordan–Wigner.
//!
//! `H = 1/(4·4!) Σ_{ijkl} J_ijkl γ_i γ_j γ_k γ_l` with antisymmetric `J`
//! reduces to `1/4 Σ_{i<j<k<l} J_ijkl γ_i γ_j γ_k γ_l`, and each ordered
//! product of four Majoranas is `1/4` times a Hermitian Pauli string.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianTerms;
use crate::pauli::{pauli_multiply, Letter, PauliString, Phase};

/// Distribution of the couplings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum VarianceRule {
    /// Mean zero, variance `3! J² / n_majorana³`.
    Standard { j: f64 },
    /// Mean zero with an explicit variance.
    Fixed { variance: f64 },
}

impl Default for VarianceRule {
    fn default() -> Self {
        VarianceRule::Standard { j: 1.0 }
    }
}

impl VarianceRule {
    pub fn variance(&self, n_majorana: usize) -> f64 {
        match *self {
            VarianceRule::Standard { j } => 6.0 * j * j / (n_majorana as f64).powi(3),
            VarianceRule::Fixed { variance } => variance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SykCouplings {
    pub n_majorana: usize,
    /// `((i, j, k, l), J)` with `1 <= i < j < k < l <= n_majorana`, in
    /// lexicographic order.
    pub couplings: Vec<([usize; 4], f64)>,
    pub seed: u64,
    pub variance_rule: VarianceRule,
}

impl SykCouplings {
    /// Couplings with the given values in lexicographic index order.
    pub fn from_values(n_majorana: usize, values: &[f64]) -> Result<Self> {
        check_count(n_majorana)?;
        let idx = quartets(n_majorana);
        if idx.len() != values.len() {
            return Err(Error::SizeMismatch {
                left: values.len(),
                right: idx.len(),
            });
        }
        Ok(SykCouplings {
            n_majorana,
            couplings: idx.into_iter().zip(values.iter().copied()).collect(),
            seed: 0,
            variance_rule: VarianceRule::default(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_majorana / 2
    }
}

fn check_count(n_majorana: usize) -> Result<()> {
    if n_majorana < 4 || n_majorana % 2 != 0 {
        return Err(Error::MajoranaCount(n_majorana));
    }
    Ok(())
}

/// All `i < j < k < l` in `1..=n`, lexicographic.
pub fn quartets(n: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            for k in j + 1..=n {
                for l in k + 1..=n {
                    out.push([i, j, k, l]);
                }
            }
        }
    }
    out
}

pub fn sample_syk(n_majorana: usize, seed: u64, rule: VarianceRule) -> Result<SykCouplings> {
    check_count(n_majorana)?;
    let variance = rule.variance(n_majorana);
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(Error::invalid(format!("bad coupling variance {variance}")));
    }
    let normal = Normal::new(0.0, variance.sqrt()).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let couplings = quartets(n_majorana)
        .into_iter()
        .map(|q| (q, normal.sample(&mut rng)))
        .collect();
    Ok(SykCouplings {
        n_majorana,
        couplings,
        seed,
        variance_rule: rule,
    })
}

/// `γ_index = prefactor · string` with prefactor `1/√2`.
pub fn jordan_wigner_majorana(index: usize, n_majorana: usize) -> Result<(f64, PauliString)> {
    if n_majorana < 2 || n_majorana % 2 != 0 {
        return Err(Error::MajoranaCount(n_majorana));
    }
    if index == 0 || index > n_majorana {
        return Err(Error::MajoranaIndex {
            index,
            n: n_majorana,
        });
    }
    let n_qubits = n_majorana / 2;
    let k = (index + 1) / 2;
    let mut letters = vec![Letter::I; n_qubits];
    for l in letters.iter_mut().take(k - 1) {
        *l = Letter::Z;
    }
    letters[k - 1] = if index % 2 == 1 { Letter::X } else { Letter::Y };
    Ok((
        std::f64::consts::FRAC_1_SQRT_2,
        PauliString::new(letters, Phase::ONE)?,
    ))
}

pub fn build_syk_hamiltonian(c: &SykCouplings) -> Result<HamiltonianTerms> {
    check_count(c.n_majorana)?;
    let n = c.n_majorana;
    let gammas = (1..=n)
        .map(|i| jordan_wigner_majorana(i, n).map(|(_, p)| p))
        .collect::<Result<Vec<_>>>()?;
    let mut terms = Vec::with_capacity(c.couplings.len());
    for (q, j) in &c.couplings {
        if !(q[0] >= 1 && q[0] < q[1] && q[1] < q[2] && q[2] < q[3] && q[3] <= n) {
            return Err(Error::invalid(format!("coupling index {q:?} not strictly increasing in 1..={n}")));
        }
        let mut p = gammas[q[0] - 1].clone();
        for &idx in &q[1..] {
            p = pauli_multiply(&p, &gammas[idx - 1])?;
        }
        // 4!/(4·4!) from the sum over orderings, (1/√2)^4 from the Majoranas.
        terms.push((j * 0.25 * 0.25, p));
    }
    HamiltonianTerms::from_terms(c.n_majorana / 2, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{DenseOperator, C64};
    use proptest::prelude::*;

    fn gamma_dense(i: usize, n: usize) -> DenseOperator {
        let (f, p) = jordan_wigner_majorana(i, n).unwrap();
        p.to_dense().unwrap().scale(C64::new(f, 0.0))
    }

    /// Permutation sign of four distinct integers.
    fn perm_sign(v: [usize; 4]) -> f64 {
        let mut s = 1.0;
        for a in 0..4 {
            for b in a + 1..4 {
                if v[a] > v[b] {
                    s = -s;
                }
            }
        }
        s
    }

    /// Full ordered sum `1/(4·4!) Σ_{ijkl} J_ijkl γγγγ` with `J` extended
    /// antisymmetrically.
    fn dense_oracle(c: &SykCouplings) -> DenseOperator {
        let n = c.n_majorana;
        let g: Vec<_> = (1..=n).map(|i| gamma_dense(i, n)).collect();
        let dim = 1 << (n / 2);
        let mut acc = DenseOperator::zeros(dim);
        let lookup = |v: [usize; 4]| {
            let mut s = v;
            s.sort_unstable();
            c.couplings.iter().find(|(q, _)| *q == s).map(|(_, j)| *j).unwrap()
        };
        for i in 1..=n {
            for j in 1..=n {
                for k in 1..=n {
                    for l in 1..=n {
                        let v = [i, j, k, l];
                        if i == j || i == k || i == l || j == k || j == l || k == l {
                            continue;
                        }
                        let coupling = perm_sign(v) * lookup(v);
                        let prod = &(&(&g[i - 1] * &g[j - 1]) * &g[k - 1]) * &g[l - 1];
                        acc = &acc + &prod.scale(C64::new(coupling / 96.0, 0.0));
                    }
                }
            }
        }
        acc
    }

    #[test]
    fn coupling_counts() {
        assert_eq!(sample_syk(4, 1, VarianceRule::default()).unwrap().couplings.len(), 1);
        assert_eq!(sample_syk(8, 1, VarianceRule::default()).unwrap().couplings.len(), 70);
        assert!(matches!(sample_syk(5, 1, VarianceRule::default()), Err(Error::MajoranaCount(5))));
        assert!(sample_syk(2, 1, VarianceRule::default()).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_syk(8, 42, VarianceRule::default()).unwrap();
        let b = sample_syk(8, 42, VarianceRule::default()).unwrap();
        assert_eq!(a, b);
        let c = sample_syk(8, 43, VarianceRule::default()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sample_variance_is_plausible() {
        let c = sample_syk(16, 5, VarianceRule::Fixed { variance: 4.0 }).unwrap();
        let m = c.couplings.len() as f64;
        let var = c.couplings.iter().map(|(_, j)| j * j).sum::<f64>() / m;
        // 1820 samples: the standard error of the variance is about 0.13.
        assert!((var - 4.0).abs() < 0.6, "{var}");
    }

    #[test]
    fn jordan_wigner_examples() {
        let (f, p) = jordan_wigner_majorana(1, 2).unwrap();
        assert_eq!(f, std::f64::consts::FRAC_1_SQRT_2);
        assert_eq!(p.to_string(), "X");
        assert_eq!(jordan_wigner_majorana(4, 4).unwrap().1.to_string(), "ZY");
        assert_eq!(jordan_wigner_majorana(5, 8).unwrap().1.to_string(), "ZZXI");
        assert!(jordan_wigner_majorana(0, 4).is_err());
        assert!(jordan_wigner_majorana(5, 4).is_err());
    }

    #[test]
    fn anticommutation_exhaustive() {
        for n in [2, 4, 6, 8] {
            let g: Vec<_> = (1..=n).map(|i| gamma_dense(i, n)).collect();
            let id = DenseOperator::identity(g[0].dim());
            for i in 0..n {
                for j in 0..n {
                    let anti = &(&g[i] * &g[j]) + &(&g[j] * &g[i]);
                    let want = if i == j { id.clone() } else { DenseOperator::zeros(id.dim()) };
                    assert!(anti.max_abs_diff(&want) < 1e-12, "n={n} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn single_coupling_matches_majorana_product() {
        let c = SykCouplings::from_values(4, &[1.0]).unwrap();
        let h = build_syk_hamiltonian(&c).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.terms()[0].coeff.abs(), 1.0 / 16.0);
        let prod = &(&(&gamma_dense(1, 4) * &gamma_dense(2, 4)) * &gamma_dense(3, 4)) * &gamma_dense(4, 4);
        let want = prod.scale(C64::new(0.25, 0.0));
        assert!(h.to_dense().unwrap().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn zero_couplings_give_empty_hamiltonian() {
        let c = SykCouplings::from_values(6, &[0.0; 15]).unwrap();
        let h = build_syk_hamiltonian(&c).unwrap();
        assert!(h.is_empty());
        assert_eq!(h.one_norm(), 0.0);
    }

    #[test]
    fn dense_reconstruction() {
        for (n, seed) in [(4, 1), (6, 2), (8, 3)] {
            let c = sample_syk(n, seed, VarianceRule::default()).unwrap();
            let h = build_syk_hamiltonian(&c).unwrap();
            assert_eq!(h.len(), crate::stats::binomial(n as u64, 4) as usize);
            let diff = h.to_dense().unwrap().max_abs_diff(&dense_oracle(&c));
            assert!(diff < 1e-10, "n={n}: {diff}");
        }
    }

    #[test]
    fn grouping_of_eight_majoranas() {
        let c = sample_syk(8, 7, VarianceRule::default()).unwrap();
        let g = crate::hamiltonian::group_commuting(&build_syk_hamiltonian(&c).unwrap()).unwrap();
        let count = g.groups().unwrap().len();
        assert!(count < 70);
        // First-fit in lexicographic quartet order; independent of the couplings.
        assert_eq!(count, 8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn grouping_holds_for_random_seeds(seed in any::<u64>()) {
            let c = sample_syk(8, seed, VarianceRule::default()).unwrap();
            let h = crate::hamiltonian::group_commuting(&build_syk_hamiltonian(&c).unwrap()).unwrap();
            for g in h.groups().unwrap() {
                for &a in g {
                    for &b in g {
                        prop_assert!(h.terms()[a].pauli.commutes(&h.terms()[b].pauli).unwrap());
                    }
                }
            }
        }
    }
}
