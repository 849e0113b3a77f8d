//! Double-double arithmetic for resolving Trotter errors below `f64` round-off.
//!
//! At `τ = 1e-3` a fourth-order formula on a normalized Hamiltonian has
//! `‖H̃ - H‖ ~ 1e-16`, under the `ε_machine ‖H‖` floor of any route that forms
//! `H̃` in double precision. Here the product `S_p(τ)` and the exact
//! `e^{-iHτ}` are formed with ~32 significant digits, their ratio
//! `R = e^{-iHτ} S_p(τ) - I` is rounded to `f64` (it is small, so relative
//! precision survives), and `L = H̃ - H` is recovered by inverting the
//! first-order derivative of the exponential in the eigenbasis of `H`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::linalg::{DenseOperator, SpectralDecomposition, C64};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn renorm(hi: f64, lo: f64) -> Dd {
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub fn div(self, y: Dd) -> Dd {
        let q1 = self.hi / y.hi;
        let r = self - y * Dd::from_f64(q1);
        let q2 = r.hi / y.hi;
        let r = r - y * Dd::from_f64(q2);
        let q3 = r.hi / y.hi;
        Dd::renorm(q1, q2) + Dd::from_f64(q3)
    }

    pub fn abs(self) -> f64 {
        self.to_f64().abs()
    }

    /// `(sin x, cos x)` by Taylor series; intended for `|x| <= 2`.
    pub fn sin_cos(self) -> (Dd, Dd) {
        let x2 = self * self;
        let mut term = self;
        let mut sin = self;
        let mut k = 1.0;
        while term.abs() > 1e-34 {
            term = -(term * x2).div(Dd::from_f64((k + 1.0) * (k + 2.0)));
            sin = sin + term;
            k += 2.0;
        }
        let mut term = Dd::ONE;
        let mut cos = Dd::ONE;
        let mut k = 0.0;
        while term.abs() > 1e-34 {
            term = -(term * x2).div(Dd::from_f64((k + 1.0) * (k + 2.0)));
            cos = cos + term;
            k += 2.0;
        }
        (sin, cos)
    }

    /// Real root `y` of `y^n = a` refined from the `f64` estimate.
    pub fn nth_root(a: f64, n: u32) -> Dd {
        let target = Dd::from_f64(a);
        let mut y = Dd::from_f64(a.powf(1.0 / n as f64));
        for _ in 0..3 {
            let mut yn1 = Dd::ONE;
            for _ in 0..n - 1 {
                yn1 = yn1 * y;
            }
            let f = yn1 * y - target;
            y = y - f.div(Dd::from_f64(n as f64) * yn1);
        }
        y
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, y: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, y.hi);
        let (t, f) = two_sum(self.lo, y.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Dd::renorm(s, e + f)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, y: Dd) -> Dd {
        self + (-y)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, y: Dd) -> Dd {
        let p = self.hi * y.hi;
        let e = self.hi.mul_add(y.hi, -p);
        Dd::renorm(p, e + (self.hi * y.lo + self.lo * y.hi))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Cdd {
    re: Dd,
    im: Dd,
}

impl Cdd {
    pub const ZERO: Cdd = Cdd {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };
    pub const ONE: Cdd = Cdd {
        re: Dd::ONE,
        im: Dd::ZERO,
    };

    pub fn new(re: Dd, im: Dd) -> Cdd {
        Cdd { re, im }
    }

    /// Exact for the unit phases that occur in Pauli tables.
    pub fn from_c64(z: C64) -> Cdd {
        Cdd::new(Dd::from_f64(z.re), Dd::from_f64(z.im))
    }

    pub fn to_c64(self) -> C64 {
        C64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn scale(self, s: Dd) -> Cdd {
        Cdd::new(self.re * s, self.im * s)
    }

    /// Multiply by `i`.
    pub fn times_i(self) -> Cdd {
        Cdd::new(-self.im, self.re)
    }
}

impl Add for Cdd {
    type Output = Cdd;
    fn add(self, o: Cdd) -> Cdd {
        Cdd::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Cdd {
    type Output = Cdd;
    fn sub(self, o: Cdd) -> Cdd {
        Cdd::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Cdd {
    type Output = Cdd;
    fn mul(self, o: Cdd) -> Cdd {
        Cdd::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

/// Column-major square matrix of `Cdd`.
#[derive(Clone, Debug)]
pub(crate) struct DdMatrix {
    dim: usize,
    data: Vec<Cdd>,
}

impl DdMatrix {
    pub fn zeros(dim: usize) -> Self {
        DdMatrix {
            dim,
            data: vec![Cdd::ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m.data[k * dim + k] = Cdd::ONE;
        }
        m
    }

    fn at(&self, r: usize, c: usize) -> Cdd {
        self.data[c * self.dim + r]
    }

    fn at_mut(&mut self, r: usize, c: usize) -> &mut Cdd {
        &mut self.data[c * self.dim + r]
    }

    pub fn mul(&self, o: &DdMatrix) -> DdMatrix {
        let n = self.dim;
        let mut out = DdMatrix::zeros(n);
        for c in 0..n {
            for k in 0..n {
                let b = o.at(k, c);
                if b == Cdd::ZERO {
                    continue;
                }
                for r in 0..n {
                    let v = out.at(r, c) + self.at(r, k) * b;
                    *out.at_mut(r, c) = v;
                }
            }
        }
        out
    }

    pub fn plus(mut self, o: &DdMatrix) -> DdMatrix {
        for (a, b) in self.data.iter_mut().zip(&o.data) {
            *a = *a + *b;
        }
        self
    }

    pub fn minus_identity(mut self) -> DdMatrix {
        for k in 0..self.dim {
            let v = self.at(k, k) - Cdd::ONE;
            *self.at_mut(k, k) = v;
        }
        self
    }

    fn add_scaled(&mut self, o: &DdMatrix, s: Dd) {
        for (a, b) in self.data.iter_mut().zip(&o.data) {
            *a = *a + b.scale(s);
        }
    }

    fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .fold(0.0, |acc, z| acc.max(z.re.abs().max(z.im.abs())))
    }

    pub fn to_dense(&self) -> DenseOperator {
        let n = self.dim;
        DenseOperator::from_matrix(DMatrix::from_fn(n, n, |r, c| self.at(r, c).to_c64()))
            .expect("square")
    }

    /// `E <- (I + E)(I + F) - I` with `F = e^{iy P} - I`, where `P` is a
    /// Pauli string given by its column table.
    pub fn compose_pauli(&mut self, y: Dd, map: &[(usize, C64)]) {
        let (s, c) = y.sin_cos();
        let a = c - Dd::ONE;
        let keep = Dd::ONE + a;
        let old = self.clone();
        for (col, &(row, amp)) in map.iter().enumerate() {
            let ba = Cdd::from_c64(amp).scale(s).times_i();
            for r in 0..self.dim {
                let v = old.at(r, col).scale(keep) + old.at(r, row) * ba;
                *self.at_mut(r, col) = v;
            }
            let v = self.at(row, col) + ba;
            *self.at_mut(row, col) = v;
            let v = self.at(col, col) + Cdd::new(a, Dd::ZERO);
            *self.at_mut(col, col) = v;
        }
    }
}

/// `e^{-iHτ}` for `H = Σ c_k P_k`, by scaled Taylor series and squaring.
pub(crate) fn exp_minus_i_h(terms: &[(f64, Vec<(usize, C64)>)], dim: usize, tau: Dd) -> DdMatrix {
    let norm: f64 = terms.iter().map(|(c, _)| c.abs()).sum::<f64>() * tau.abs();
    let mut squarings = 0;
    while norm / f64::powi(2.0, squarings) > 0.1 {
        squarings += 1;
    }
    let step = tau.div(Dd::from_f64(f64::powi(2.0, squarings)));
    // A = -i H step
    let mut a = DdMatrix::zeros(dim);
    for (coeff, map) in terms {
        let w = Dd::from_f64(*coeff) * step;
        for (col, &(row, amp)) in map.iter().enumerate() {
            let v = a.at(row, col) + Cdd::from_c64(-amp).scale(w).times_i();
            *a.at_mut(row, col) = v;
        }
    }
    let mut sum = DdMatrix::identity(dim);
    let mut term = DdMatrix::identity(dim);
    let mut k = 1.0;
    loop {
        term = term.mul(&a);
        let inv = Dd::ONE.div(Dd::from_f64(k));
        for z in term.data.iter_mut() {
            *z = z.scale(inv);
        }
        sum.add_scaled(&term, Dd::ONE);
        if term.max_abs() < 1e-34 || k > 60.0 {
            break;
        }
        k += 1.0;
    }
    for _ in 0..squarings {
        sum = sum.mul(&sum);
    }
    sum
}

/// Recovers `L` from `R = e^{-iHτ} e^{i(H+L)τ} - I` to first order in `L`.
///
/// With `X = iHτ` diagonal in the eigenbasis of `H`,
/// `log(I + R) = ∫_0^1 e^{-sX} (iLτ) e^{sX} ds + O(‖Lτ‖²)`, whose `(a, b)`
/// entry is `(iLτ)_ab (e^{x_b - x_a} - 1)/(x_b - x_a)`.
pub(crate) fn error_from_ratio(r: &DenseOperator, h_spec: &SpectralDecomposition, tau: f64) -> DenseOperator {
    let v = &h_spec.eigenvectors;
    // log(I + R) by series; ‖R‖ is tiny in the regimes this is used for.
    let rm = r.matrix();
    let r2 = rm * rm;
    let r3 = &r2 * rm;
    let z = rm - &r2 * C64::new(0.5, 0.0) + &r3 * C64::new(1.0 / 3.0, 0.0);
    let zt = v.adjoint() * z * v;
    let lam = &h_spec.eigenvalues;
    let d = DMatrix::from_fn(zt.nrows(), zt.ncols(), |a, b| {
        let y = C64::new(0.0, tau * (lam[b].re - lam[a].re));
        let phi = if y.norm() < 1e-8 {
            C64::new(1.0, 0.0) + y * 0.5
        } else {
            crate::linalg::expm1_c(y) / y
        };
        zt[(a, b)] / phi
    });
    let l = v * d * v.adjoint() * C64::new(0.0, -1.0 / tau);
    let op = DenseOperator::from_matrix(l).expect("square");
    op.hermitian_part().0
}
