//! Pauli strings with an exact phase in {+1, +i, -1, -i}.
//!
//! Qubit 0 is the leftmost letter and the most significant Kronecker factor,
//! so `"ZX"` is `Z ⊗ X`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{DenseOperator, C64, DEFAULT_QUBIT_CAP, I, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

    /// Single-site product `self * other = i^k * letter`.
    pub fn mul(self, other: Letter) -> (Letter, u8) {
        use Letter::*;
        match (self, other) {
            (I, b) => (b, 0),
            (a, I) => (a, 0),
            (a, b) if a == b => (I, 0),
            (X, Y) => (Z, 1),
            (Y, Z) => (X, 1),
            (Z, X) => (Y, 1),
            (Y, X) => (Z, 3),
            (Z, Y) => (X, 3),
            (X, Z) => (Y, 3),
            _ => unreachable!(),
        }
    }

    pub fn anticommutes(self, other: Letter) -> bool {
        self != Letter::I && other != Letter::I && self != other
    }

    pub fn matrix(self) -> [[C64; 2]; 2] {
        match self {
            Letter::I => [[ONE, ZERO], [ZERO, ONE]],
            Letter::X => [[ZERO, ONE], [ONE, ZERO]],
            Letter::Y => [[ZERO, -I], [I, ZERO]],
            Letter::Z => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }
}

/// One of the four unit phases, stored as the power of `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u8) -> Phase {
        Phase(k % 4)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn value(self) -> C64 {
        match self.0 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        }
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    /// +1 or -1 for real phases.
    pub fn sign(self) -> Option<f64> {
        match self.0 {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase::from_power(self.0 + rhs.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Letter>,
    phase: Phase,
}

impl PauliString {
    pub fn new(letters: Vec<Letter>, phase: Phase) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::invalid("a Pauli string needs at least one qubit"));
        }
        Ok(PauliString { letters, phase })
    }

    pub fn identity(n_qubits: usize) -> Self {
        assert!(n_qubits > 0, "a Pauli string needs at least one qubit");
        PauliString {
            letters: vec![Letter::I; n_qubits],
            phase: Phase::ONE,
        }
    }

    /// A single letter on qubit `site`, identity elsewhere.
    pub fn single(n_qubits: usize, site: usize, letter: Letter) -> Self {
        let mut p = PauliString::identity(n_qubits);
        p.letters[site] = letter;
        p
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&l| l == Letter::I)
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&l| l != Letter::I).count()
    }

    /// Letters only, without the phase.
    pub fn label(&self) -> String {
        self.letters.iter().map(|l| l.as_char()).collect()
    }

    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        pauli_multiply(self, other)
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        pauli_commutes(self, other)
    }

    pub fn to_dense(&self) -> Result<DenseOperator> {
        to_dense(self, DEFAULT_QUBIT_CAP)
    }

    /// Action on a computational basis index: `P|b> = amp * |b'>`.
    pub fn apply_to_basis(&self, b: usize) -> (usize, C64) {
        let n = self.n_qubits();
        let mut out = b;
        let mut amp = self.phase.value();
        for (q, &l) in self.letters.iter().enumerate() {
            let bit = (b >> (n - 1 - q)) & 1;
            match l {
                Letter::I => {}
                Letter::X => out ^= 1 << (n - 1 - q),
                Letter::Y => {
                    out ^= 1 << (n - 1 - q);
                    amp *= if bit == 0 { I } else { -I };
                }
                Letter::Z => {
                    if bit == 1 {
                        amp = -amp;
                    }
                }
            }
        }
        (out, amp)
    }
}

pub fn pauli_multiply(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::SizeMismatch {
            left: a.n_qubits(),
            right: b.n_qubits(),
        });
    }
    let mut power = a.phase.0 + b.phase.0;
    let letters = a
        .letters
        .iter()
        .zip(&b.letters)
        .map(|(&x, &y)| {
            let (l, k) = x.mul(y);
            power += k;
            l
        })
        .collect();
    Ok(PauliString {
        letters,
        phase: Phase::from_power(power),
    })
}

/// Two strings commute iff they anticommute on an even number of sites.
pub fn pauli_commutes(a: &PauliString, b: &PauliString) -> Result<bool> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::SizeMismatch {
            left: a.n_qubits(),
            right: b.n_qubits(),
        });
    }
    let anti = a
        .letters
        .iter()
        .zip(&b.letters)
        .filter(|(x, y)| x.anticommutes(**y))
        .count();
    Ok(anti % 2 == 0)
}

pub fn to_dense(p: &PauliString, cap: usize) -> Result<DenseOperator> {
    let n = p.n_qubits();
    if n > cap {
        return Err(Error::QubitCap { n, cap });
    }
    let dim = 1usize << n;
    let mut mat = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let (row, amp) = p.apply_to_basis(col);
        mat[(row, col)] = amp;
    }
    DenseOperator::from_matrix(mat)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase.0 {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.label())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses an optional phase prefix (`i`, `-`, `-i`, `+`) followed by letters.
    fn from_str(s: &str) -> Result<Self> {
        let (phase, rest) = if let Some(r) = s.strip_prefix("-i") {
            (Phase::MINUS_I, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (Phase::I, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (Phase::ONE, r)
        } else {
            (Phase::ONE, s)
        };
        let letters = rest
            .chars()
            .map(|c| {
                Letter::from_char(c).ok_or_else(|| Error::invalid(format!("bad Pauli letter {c:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(letters, phase)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    /// Dense Kronecker product of 2x2 letter matrices, built independently of
    /// `apply_to_basis`.
    fn kron_oracle(p: &PauliString) -> DenseOperator {
        let mut acc = DenseOperator::identity(1).scale(p.phase().value());
        for l in p.letters() {
            let m = l.matrix();
            let single = DenseOperator::from_rows(2, &[m[0][0], m[0][1], m[1][0], m[1][1]]).unwrap();
            acc = acc.kron(&single);
        }
        acc
    }

    fn letters(n: usize) -> impl Strategy<Value = PauliString> {
        (prop::collection::vec(0u8..4, n), 0u8..4).prop_map(|(ls, ph)| {
            PauliString::new(
                ls.into_iter().map(|k| Letter::ALL[k as usize]).collect(),
                Phase::from_power(ph),
            )
            .unwrap()
        })
    }

    #[test]
    fn xy_is_iz() {
        let c = pauli_multiply(&ps("XI"), &ps("YI")).unwrap();
        assert_eq!(c, ps("iZI"));
    }

    #[test]
    fn dense_examples() {
        let id = ps("I").to_dense().unwrap();
        assert_eq!(id, DenseOperator::identity(2));
        let zx = ps("ZX").to_dense().unwrap();
        let o = ZERO;
        let want = DenseOperator::from_rows(
            4,
            &[o, ONE, o, o, ONE, o, o, o, o, o, o, -ONE, o, o, -ONE, o],
        )
        .unwrap();
        assert_eq!(zx, want);
        let iy = ps("iY").to_dense().unwrap();
        assert_eq!(iy, DenseOperator::from_rows(2, &[o, ONE, -ONE, o]).unwrap());
    }

    #[test]
    fn commutation_examples() {
        assert!(pauli_commutes(&ps("XX"), &ps("ZZ")).unwrap());
        assert!(!pauli_commutes(&ps("XI"), &ps("ZI")).unwrap());
        assert!(pauli_commutes(&ps("X"), &ps("XX")).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let p = PauliString::identity(13);
        assert!(matches!(p.to_dense(), Err(Error::QubitCap { n: 13, cap: 12 })));
        assert!(to_dense(&ps("XYZ"), 2).is_err());
    }

    #[test]
    fn exhaustive_two_qubit_commutation() {
        let mut all = Vec::new();
        for a in Letter::ALL {
            for b in Letter::ALL {
                all.push(PauliString::new(vec![a, b], Phase::ONE).unwrap());
            }
        }
        for p in &all {
            for q in &all {
                let dp = kron_oracle(p);
                let dq = kron_oracle(q);
                let comm_zero = dp.commutator(&dq).max_abs() == 0.0;
                assert_eq!(pauli_commutes(p, q).unwrap(), comm_zero, "{p} {q}");
            }
        }
    }

    #[test]
    fn traces() {
        for s in ["II", "XI", "ZZ", "YX", "IZ"] {
            let tr = ps(s).to_dense().unwrap().trace();
            let want = if s == "II" { 4.0 } else { 0.0 };
            assert_eq!(tr, C64::new(want, 0.0));
        }
    }

    #[test]
    fn display_round_trip() {
        for s in ["XYZ", "iZZ", "-IXI", "-iY"] {
            assert_eq!(ps(s).to_string(), s);
        }
        assert!("XQ".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
    }

    proptest! {
        #[test]
        fn product_matches_dense(a in letters(4), b in letters(4)) {
            let c = pauli_multiply(&a, &b).unwrap();
            let lhs = kron_oracle(&c);
            let rhs = &kron_oracle(&a) * &kron_oracle(&b);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn involution(a in letters(5)) {
            let unphased = a.clone().with_phase(Phase::ONE);
            let sq = pauli_multiply(&unphased, &unphased).unwrap();
            prop_assert_eq!(sq, PauliString::identity(5));
        }

        #[test]
        fn commutation_matches_dense(a in letters(5), b in letters(5)) {
            let comm = kron_oracle(&a).commutator(&kron_oracle(&b));
            prop_assert_eq!(pauli_commutes(&a, &b).unwrap(), comm.max_abs() == 0.0);
        }

        #[test]
        fn dense_matches_kron(a in letters(3)) {
            prop_assert_eq!(a.to_dense().unwrap(), kron_oracle(&a));
        }
    }
}
