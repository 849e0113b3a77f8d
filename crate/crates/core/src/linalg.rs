//! Dense complex operators and the spectral kernels built on them.
//!
//! Everything here works on full `dim x dim` matrices. Exponentials and
//! logarithms go through an explicit eigendecomposition, so the eigenvalues
//! are always at hand for traces and diagnostics.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Largest qubit count for which dense operators are built.
pub const DEFAULT_QUBIT_CAP: usize = 12;

/// Numerical tolerances shared by the dense kernels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub hermitian: f64,
    pub unitary: f64,
    pub reconstruction: f64,
    /// Exclusion band around the logarithm's branch cut at -pi.
    pub branch_cut: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: 1e-12,
            unitary: 1e-10,
            reconstruction: 1e-10,
            branch_cut: 1e-8,
        }
    }
}

/// A square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    mat: DMatrix<C64>,
}

impl DenseOperator {
    pub fn from_matrix(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        if mat.nrows() == 0 {
            return Err(Error::EmptyOperator);
        }
        Ok(DenseOperator { mat })
    }

    /// Row-major construction.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::SizeMismatch {
                left: entries.len(),
                right: dim * dim,
            });
        }
        Self::from_matrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(dim > 0, "dense operator needs a positive dimension");
        DenseOperator {
            mat: DMatrix::from_fn(dim, dim, f),
        }
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim > 0, "dense operator needs a positive dimension");
        DenseOperator {
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "dense operator needs a positive dimension");
        DenseOperator {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        assert!(!entries.is_empty(), "dense operator needs a positive dimension");
        DenseOperator {
            mat: DMatrix::from_diagonal(&DVector::from_column_slice(entries)),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        DenseOperator {
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        DenseOperator { mat: &self.mat * s }
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.mat
            .iter()
            .zip(other.mat.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn unitarity_error(&self) -> f64 {
        let prod = DenseOperator {
            mat: self.mat.adjoint() * &self.mat,
        };
        prod.max_abs_diff(&DenseOperator::identity(self.dim()))
    }

    pub fn ensure_hermitian(&self, tol: f64) -> Result<()> {
        let err = self.hermiticity_error();
        if err > tol {
            return Err(Error::NotHermitian(err));
        }
        Ok(())
    }

    pub fn ensure_unitary(&self, tol: f64) -> Result<()> {
        let err = self.unitarity_error();
        if err > tol {
            return Err(Error::NotUnitary(err));
        }
        Ok(())
    }

    /// `(A + A^dagger) / 2` together with the size of the discarded part.
    pub fn hermitian_part(&self) -> (Self, f64) {
        let adj = self.mat.adjoint();
        let herm = (&self.mat + &adj) * C64::new(0.5, 0.0);
        let anti = (&self.mat - &adj) * C64::new(0.5, 0.0);
        let defect = anti.iter().fold(0.0, |acc: f64, z| acc.max(z.norm()));
        (DenseOperator { mat: herm }, defect)
    }

    /// Kronecker product `self ⊗ other` (self is the more significant factor).
    pub fn kron(&self, other: &DenseOperator) -> Self {
        DenseOperator {
            mat: self.mat.kronecker(&other.mat),
        }
    }

    pub fn commutator(&self, other: &DenseOperator) -> Self {
        DenseOperator {
            mat: &self.mat * &other.mat - &other.mat * &self.mat,
        }
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, mut k: u64) -> Self {
        let mut result = DenseOperator::identity(self.dim());
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.mat * v
    }

    /// Spectral norm of a Hermitian operator (largest |eigenvalue|).
    pub fn hermitian_norm(&self) -> Result<f64> {
        let spec = eigh(self, Tolerances::default().hermitian)?;
        Ok(spec
            .real_eigenvalues()
            .iter()
            .fold(0.0, |acc: f64, e| acc.max(e.abs())))
    }

    /// Spectral norm of a general operator via the largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.mat
            .clone()
            .singular_values()
            .iter()
            .fold(0.0, |acc: f64, s| acc.max(*s))
    }
}

impl<'a> Mul<&'a DenseOperator> for &'a DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: &'a DenseOperator) -> DenseOperator {
        DenseOperator {
            mat: &self.mat * &rhs.mat,
        }
    }
}

impl<'a> Add<&'a DenseOperator> for &'a DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: &'a DenseOperator) -> DenseOperator {
        DenseOperator {
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl<'a> Sub<&'a DenseOperator> for &'a DenseOperator {
    type Output = DenseOperator;
    fn sub(self, rhs: &'a DenseOperator) -> DenseOperator {
        DenseOperator {
            mat: &self.mat - &rhs.mat,
        }
    }
}

/// Eigenvalues and a unitary eigenvector matrix, `A = V diag(λ) V†`.
///
/// Hermitian sources have real eigenvalues stored with zero imaginary part,
/// sorted ascending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<C64>,
    pub eigenvectors: DMatrix<C64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn real_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }

    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(C64) -> C64) -> DenseOperator {
        let mut scaled = self.eigenvectors.clone();
        for (j, lam) in self.eigenvalues.iter().enumerate() {
            let w = f(*lam);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= w;
            }
        }
        DenseOperator {
            mat: scaled * self.eigenvectors.adjoint(),
        }
    }

    pub fn reconstruct(&self) -> DenseOperator {
        self.map(|z| z)
    }
}

/// Eigendecomposition of a Hermitian operator.
pub fn eigh(h: &DenseOperator, hermitian_tol: f64) -> Result<SpectralDecomposition> {
    h.ensure_hermitian(hermitian_tol)?;
    let (sym, _) = h.hermitian_part();
    let eig = SymmetricEigen::new(sym.mat);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let dim = order.len();
    let mut vecs = DMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(SpectralDecomposition {
        eigenvalues: order
            .iter()
            .map(|&k| C64::new(eig.eigenvalues[k], 0.0))
            .collect(),
        eigenvectors: vecs,
    })
}

/// Eigendecomposition of a normal operator (unitary, or a unitary minus the
/// identity) through its complex Schur form, whose triangular factor is
/// diagonal up to round-off.
pub fn eig_normal(a: &DenseOperator) -> SpectralDecomposition {
    let (q, t) = Schur::new(a.mat.clone()).unpack();
    SpectralDecomposition {
        eigenvalues: t.diagonal().iter().copied().collect(),
        eigenvectors: q,
    }
}

/// Eigenvalues of an arbitrary square operator.
pub fn eigenvalues(a: &DenseOperator) -> Vec<C64> {
    Schur::new(a.mat.clone())
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .unwrap_or_else(|| {
            let (_, t) = Schur::new(a.mat.clone()).unpack();
            t.diagonal().iter().copied().collect()
        })
}

/// `exp(scalar * h)` for Hermitian `h`.
pub fn matrix_exp(h: &DenseOperator, scalar: C64) -> Result<DenseOperator> {
    let spec = eigh(h, Tolerances::default().hermitian)?;
    Ok(spec.map(|lam| (scalar * lam).exp()))
}

/// `exp(scalar * h) - I` from a cached Hermitian spectrum, accurate to
/// relative precision when the exponent is small.
pub fn expm1_from_spectrum(spec: &SpectralDecomposition, scalar: C64) -> DenseOperator {
    spec.map(|lam| expm1_c(scalar * lam))
}

/// Principal logarithm of a unitary, with eigenphases in (-pi, pi).
pub fn matrix_log_unitary(u: &DenseOperator, tol: &Tolerances) -> Result<DenseOperator> {
    u.ensure_unitary(tol.unitary)?;
    let dev = u - &DenseOperator::identity(u.dim());
    log_unitary_from_deviation(&dev, tol.branch_cut)
}

/// Principal logarithm of `I + E` where `I + E` is unitary.
///
/// Works on the deviation `E` directly, so a unitary close to the identity
/// keeps full relative precision in its logarithm.
pub fn log_unitary_from_deviation(dev: &DenseOperator, branch_guard: f64) -> Result<DenseOperator> {
    let spec = eig_normal(dev);
    for mu in &spec.eigenvalues {
        let phase = log1p_c(*mu).im;
        if phase.abs() > std::f64::consts::PI - branch_guard {
            return Err(Error::BranchCut {
                phase,
                guard: branch_guard,
            });
        }
    }
    Ok(spec.map(log1p_c))
}

/// `e^z - 1` without cancellation for small `z`.
pub fn expm1_c(z: C64) -> C64 {
    if z.norm() > 0.5 {
        return z.exp() - ONE;
    }
    // e^{a+ib} - 1 = e^a (cos b - 1) + (e^a - 1) + i e^a sin b
    let ea = z.re.exp();
    let half = (0.5 * z.im).sin();
    let cosm1 = -2.0 * half * half;
    C64::new(ea * cosm1 + z.re.exp_m1(), ea * z.im.sin())
}

/// `ln(1 + z)` without cancellation for small `z`.
pub fn log1p_c(z: C64) -> C64 {
    let re = 0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p();
    let im = z.im.atan2(1.0 + z.re);
    C64::new(re, im)
}
