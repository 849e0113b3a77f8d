//! Hamiltonians written as real combinations of Pauli strings.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseOperator, C64, DEFAULT_QUBIT_CAP};
use crate::pauli::{pauli_commutes, Letter, PauliString, Phase};

/// Merged coefficients smaller than this are dropped.
pub const MERGE_DROP: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: f64,
    /// Always carries phase +1; signs live in `coeff`.
    pub pauli: PauliString,
}

/// `H = Σ_γ coeff_γ · pauli_γ`, optionally partitioned into commuting groups.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianTerms {
    n_qubits: usize,
    terms: Vec<Term>,
    groups: Option<Vec<Vec<usize>>>,
}

/// How terms are bundled into product-formula stages.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageMode {
    /// One stage per Pauli string.
    #[default]
    Ungrouped,
    /// One stage per commuting group.
    Grouped,
}

impl HamiltonianTerms {
    /// Builds from `(coeff, string)` pairs. Real string phases fold into the
    /// coefficient, repeated strings merge (first occurrence fixes the order),
    /// and merged coefficients below [`MERGE_DROP`] are removed.
    pub fn from_terms(n_qubits: usize, terms: impl IntoIterator<Item = (f64, PauliString)>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("Hamiltonian needs at least one qubit"));
        }
        let mut index: HashMap<Vec<Letter>, usize> = HashMap::new();
        let mut merged: Vec<Term> = Vec::new();
        for (c, p) in terms {
            if p.n_qubits() != n_qubits {
                return Err(Error::SizeMismatch {
                    left: p.n_qubits(),
                    right: n_qubits,
                });
            }
            if !c.is_finite() {
                return Err(Error::invalid("non-finite coefficient"));
            }
            let sign = p.phase().sign().ok_or_else(|| {
                Error::invalid(format!("term {p} has an imaginary phase and is not Hermitian"))
            })?;
            let key = p.letters().to_vec();
            match index.get(&key) {
                Some(&k) => merged[k].coeff += sign * c,
                None => {
                    index.insert(key, merged.len());
                    merged.push(Term {
                        coeff: sign * c,
                        pauli: p.with_phase(Phase::ONE),
                    });
                }
            }
        }
        merged.retain(|t| t.coeff.abs() >= MERGE_DROP);
        Ok(HamiltonianTerms {
            n_qubits,
            terms: merged,
            groups: None,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn groups(&self) -> Option<&[Vec<usize>]> {
        self.groups.as_deref()
    }

    /// Σ|coeff|, which bounds Σ‖H_γ‖ since every string has unit norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    /// Number of product-formula stages Γ under `mode`.
    pub fn stage_count(&self, mode: StageMode) -> usize {
        match (mode, &self.groups) {
            (StageMode::Grouped, Some(g)) => g.len(),
            _ => self.terms.len(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        HamiltonianTerms {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff * s,
                    pauli: t.pauli.clone(),
                })
                .collect(),
            groups: self.groups.clone(),
        }
    }

    pub fn to_dense(&self) -> Result<DenseOperator> {
        self.to_dense_with_cap(DEFAULT_QUBIT_CAP)
    }

    pub fn to_dense_with_cap(&self, cap: usize) -> Result<DenseOperator> {
        if self.n_qubits > cap {
            return Err(Error::QubitCap {
                n: self.n_qubits,
                cap,
            });
        }
        let mut mat = nalgebra::DMatrix::<C64>::zeros(self.dim(), self.dim());
        for t in &self.terms {
            for col in 0..self.dim() {
                let (row, amp) = t.pauli.apply_to_basis(col);
                mat[(row, col)] += amp * t.coeff;
            }
        }
        DenseOperator::from_matrix(mat)
    }

    /// Dense operator of each stage under `mode`, in stage order.
    pub fn stage_operators(&self, mode: StageMode) -> Result<Vec<DenseOperator>> {
        match (mode, &self.groups) {
            (StageMode::Grouped, Some(groups)) => groups
                .iter()
                .map(|g| {
                    let sub = HamiltonianTerms {
                        n_qubits: self.n_qubits,
                        terms: g.iter().map(|&k| self.terms[k].clone()).collect(),
                        groups: None,
                    };
                    sub.to_dense()
                })
                .collect(),
            (StageMode::Grouped, None) => Err(Error::invalid(
                "grouped stages requested before group_commuting",
            )),
            (StageMode::Ungrouped, _) => self
                .terms
                .iter()
                .map(|t| Ok(t.pauli.to_dense()?.scale(C64::new(t.coeff, 0.0))))
                .collect(),
        }
    }

    /// True when every pair of terms commutes.
    pub fn is_commuting(&self) -> bool {
        self.terms.iter().enumerate().all(|(i, a)| {
            self.terms[i + 1..]
                .iter()
                .all(|b| pauli_commutes(&a.pauli, &b.pauli).unwrap_or(false))
        })
    }
}

/// Divides every coefficient by the one-norm and returns that scale, so
/// `Z_original(β) = Z_normalized(β · scale)`.
pub fn normalize_one_norm(h: &HamiltonianTerms) -> Result<(HamiltonianTerms, f64)> {
    let scale = h.one_norm();
    if scale == 0.0 {
        return Err(Error::ZeroHamiltonian);
    }
    let mut out = h.clone();
    for t in &mut out.terms {
        t.coeff /= scale;
    }
    Ok((out, scale))
}

/// Greedy first-fit colouring of the anticommutation graph in term order.
pub fn group_commuting(h: &HamiltonianTerms) -> Result<HamiltonianTerms> {
    if h.terms.is_empty() {
        return Err(Error::invalid("cannot group an empty Hamiltonian"));
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, t) in h.terms.iter().enumerate() {
        let slot = groups.iter().position(|g| {
            g.iter()
                .all(|&j| pauli_commutes(&h.terms[j].pauli, &t.pauli).expect("same width"))
        });
        match slot {
            Some(s) => groups[s].push(k),
            None => groups.push(vec![k]),
        }
    }
    let mut out = h.clone();
    out.groups = Some(groups);
    Ok(out)
}

/// Random model with `n_terms` distinct non-identity strings and coefficients
/// uniform in [-1, 1].
pub fn random_pauli_model(n_qubits: usize, n_terms: usize, seed: u64) -> Result<HamiltonianTerms> {
    let available = (1usize << (2 * n_qubits)) - 1;
    if n_terms > available {
        return Err(Error::invalid(format!(
            "{n_terms} distinct strings requested on {n_qubits} qubits"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut codes: Vec<usize> = (1..=available).collect();
    codes.shuffle(&mut rng);
    let terms = codes[..n_terms]
        .iter()
        .map(|&code| {
            let letters = (0..n_qubits)
                .map(|q| Letter::ALL[(code >> (2 * q)) & 3])
                .collect();
            let c: f64 = rng.random_range(-1.0..1.0);
            (c, PauliString::new(letters, Phase::ONE).expect("non-empty"))
        })
        .collect::<Vec<_>>();
    HamiltonianTerms::from_terms(n_qubits, terms)
}

/// Serialized form: `{n_qubits, terms: [{coeff, pauli}], seed, provenance}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianDoc {
    pub n_qubits: usize,
    pub terms: Vec<TermDoc>,
    pub seed: Option<u64>,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub coeff: f64,
    pub pauli: String,
}

impl HamiltonianDoc {
    pub fn from_terms(h: &HamiltonianTerms, seed: Option<u64>, provenance: impl Into<String>) -> Self {
        HamiltonianDoc {
            n_qubits: h.n_qubits,
            terms: h
                .terms
                .iter()
                .map(|t| TermDoc {
                    coeff: t.coeff,
                    pauli: t.pauli.label(),
                })
                .collect(),
            seed,
            provenance: provenance.into(),
        }
    }

    pub fn to_terms(&self) -> Result<HamiltonianTerms> {
        let terms = self
            .terms
            .iter()
            .map(|t| Ok((t.coeff, t.pauli.parse::<PauliString>()?)))
            .collect::<Result<Vec<_>>>()?;
        HamiltonianTerms::from_terms(self.n_qubits, terms)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
