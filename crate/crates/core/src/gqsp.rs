//! Generalized quantum signal processing on dense operators.
//!
//! The circuit is `R(θ_d, φ_d, 0) A ⋯ R(θ_1, φ_1, 0) A R(θ_0, φ_0, λ)` with
//! `A = |0⟩⟨0| ⊗ U + |1⟩⟨1| ⊗ I`; the ancilla is the most significant factor,
//! so the top-left `dim x dim` block of the product is `P(U)` and the block
//! below it is `Q(U)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{DenseOperator, C64, ONE, ZERO};
use crate::lwf::FourierApprox;

/// Unit-circle samples used for admissibility and completion checks.
pub const CIRCLE_SAMPLES: usize = 4096;
/// Admissibility slack on `max |P|`.
pub const ADMISSIBLE_SLACK: f64 = 1e-9;
/// Rescale applied to targets before completion, keeping `|P| < 1` strictly.
pub const RESCALE: f64 = 1.0 - 1e-6;

fn circle_point(k: usize, samples: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * k as f64 / samples as f64)
}

/// `Σ_{m=-M}^{M} c_m z^m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaurentPoly {
    m: usize,
    c: Vec<C64>,
}

impl LaurentPoly {
    /// Coefficients ordered `c_{-M}, ..., c_M`.
    pub fn new(c: Vec<C64>) -> Result<Self> {
        if c.len() % 2 == 0 {
            return Err(Error::invalid(format!(
                "Laurent coefficients need odd length 2M+1, got {}",
                c.len()
            )));
        }
        Ok(LaurentPoly { m: c.len() / 2, c })
    }

    pub fn constant(c0: C64) -> Self {
        LaurentPoly { m: 0, c: vec![c0] }
    }

    pub fn from_fourier(f: &FourierApprox) -> Self {
        LaurentPoly {
            m: f.m,
            c: f.c.clone(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.c
    }

    pub fn coeff(&self, j: i64) -> C64 {
        if j.unsigned_abs() as usize > self.m {
            ZERO
        } else {
            self.c[(j + self.m as i64) as usize]
        }
    }

    pub fn eval(&self, z: C64) -> C64 {
        // z^{-M} Σ c_{k-M} z^k
        let poly = self.c.iter().rev().fold(ZERO, |acc, &c| acc * z + c);
        poly * z.powi(-(self.m as i32))
    }

    pub fn scaled(&self, s: f64) -> Self {
        LaurentPoly {
            m: self.m,
            c: self.c.iter().map(|z| z * s).collect(),
        }
    }

    /// Coefficients of `p(z^{-1})`, i.e. `c_m -> c_{-m}`.
    pub fn reflected(&self) -> Self {
        LaurentPoly {
            m: self.m,
            c: self.c.iter().rev().copied().collect(),
        }
    }

    pub fn max_on_circle(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|k| self.eval(circle_point(k, samples)).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_admissible(&self) -> bool {
        self.max_on_circle(CIRCLE_SAMPLES) <= 1.0 + ADMISSIBLE_SLACK
    }

    /// Hex SHA-256 of the little-endian coefficient bytes.
    pub fn hash(&self) -> String {
        coeff_hash(&self.c)
    }
}

fn coeff_hash(c: &[C64]) -> String {
    let mut h = Sha256::new();
    for z in c {
        h.update(z.re.to_le_bytes());
        h.update(z.im.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Ordinary polynomial `Σ_k p_k z^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    pub coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(coeffs: Vec<C64>) -> Self {
        let coeffs = if coeffs.is_empty() { vec![ZERO] } else { coeffs };
        Poly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn max_on_circle(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|k| self.eval(circle_point(k, samples)).norm())
            .fold(0.0, f64::max)
    }
}

/// `(z^M p(z), M)`: a degree-`2M` polynomial with the same modulus on the
/// unit circle.
pub fn monomial_shift(p: &LaurentPoly) -> (Poly, usize) {
    (Poly::new(p.c.clone()), p.m)
}

/// `R(θ, φ, λ)`.
pub fn rotation(theta: f64, phi: f64, lambda: f64) -> Matrix2<C64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(
        C64::from_polar(c, lambda + phi),
        C64::from_polar(s, phi),
        C64::from_polar(s, lambda),
        C64::new(-c, 0.0),
    )
}

/// `max_k ||P(z_k)|² + |Q(z_k)|² - 1|` over `samples` unit-circle points.
pub fn completion_residual(p: &Poly, q: &Poly, samples: usize) -> f64 {
    (0..samples)
        .map(|k| {
            let z = circle_point(k, samples);
            (p.eval(z).norm_sqr() + q.eval(z).norm_sqr() - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Relative size below which a coefficient of `z^d (1 - P P*)` counts as zero.
const COEFF_ZERO: f64 = 1e-15;
/// Below this `1 - |P|²` on the circle the factorization is refused.
const DEGENERATE_FLOOR: f64 = 1e-12;

/// `p(z)/p'(z)`, evaluated through the reversed polynomial outside the unit
/// disk so large roots do not overflow or lose precision.
fn newton_ratio(poly: &[C64], z: C64) -> C64 {
    let n = poly.len() - 1;
    if z.norm() <= 1.0 {
        let (mut p, mut dp) = (ZERO, ZERO);
        for &c in poly.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        p / dp
    } else {
        // p(z) = z^n R(y), y = 1/z, R(y) = Σ a_{n-k} y^k
        let y = z.inv();
        let (mut r, mut dr) = (ZERO, ZERO);
        for &c in poly.iter() {
            dr = dr * y + r;
            r = r * y + c;
        }
        z * r / (r * n as f64 - y * dr)
    }
}

fn roots(poly: &[C64]) -> Result<Vec<C64>> {
    // poly ascending, nonzero leading coefficient
    let n = poly.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = poly[n];
    let mut companion = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = ONE;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -poly[i] / lead;
    }
    let op = DenseOperator::from_matrix(companion)?;
    let mut rs = crate::linalg::eigenvalues(&op);
    if rs.len() != n || rs.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
        return Err(Error::RootFinding(n));
    }
    // Aberth refinement of all roots at once.
    let mut done = vec![false; n];
    for _ in 0..200 {
        let mut moved = false;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let w = newton_ratio(poly, rs[k]);
            if !w.re.is_finite() || !w.im.is_finite() {
                done[k] = true;
                continue;
            }
            let repulsion: C64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (rs[k] - rs[j]).inv())
                .fold(ZERO, |a, b| a + b);
            let step = w / (ONE - w * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                rs[k] -= step;
            }
            if step.norm() <= 1e-15 * rs[k].norm().max(1e-300) {
                done[k] = true;
            } else {
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    if rs.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
        return Err(Error::RootFinding(n));
    }
    Ok(rs)
}

/// Complementary polynomial `Q` with `|P|² + |Q|² = 1` on the unit circle,
/// from the in-disk roots of `z^d (1 - P(z) P*(1/z̄))`. `Q` has a real
/// positive leading coefficient.
pub fn complete_polynomial(p: &Poly) -> Result<Poly> {
    let d = p.degree();
    let max_p = p.max_on_circle(CIRCLE_SAMPLES);
    if max_p > 1.0 + ADMISSIBLE_SLACK {
        return Err(Error::NotAdmissible(max_p));
    }
    // g_n, n = 0..=2d: coefficient of z^n in z^d - Σ_{j,k} p_j conj(p_k) z^{j-k+d}
    let mut g = vec![ZERO; 2 * d + 1];
    g[d] = ONE;
    for (j, &pj) in p.coeffs.iter().enumerate() {
        for (k, &pk) in p.coeffs.iter().enumerate() {
            g[j + d - k] -= pj * pk.conj();
        }
    }
    let scale = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale <= 1e-13 {
        // |P| = 1 identically.
        return Ok(Poly::new(vec![ZERO; d + 1]));
    }
    let min_f = (0..CIRCLE_SAMPLES)
        .map(|k| 1.0 - p.eval(circle_point(k, CIRCLE_SAMPLES)).norm_sqr())
        .fold(f64::INFINITY, f64::min);
    if min_f < DEGENERATE_FLOOR {
        return Err(Error::DegenerateCompletion(min_f));
    }
    // Coefficients are conjugate-symmetric, so zeros at the bottom match
    // zeros at the top: `lo` roots at 0 pair with `lo` roots at infinity.
    let lo = g.iter().position(|z| z.norm() > COEFF_ZERO * scale).unwrap_or(d);
    let hi = 2 * d - lo;
    let mut rs = roots(&g[lo..=hi])?;
    rs.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let keep = (hi - lo) / 2;
    // Q(z) = α z^lo Π_{kept} (z - r)
    let mut q = vec![ZERO; lo];
    q.push(ONE);
    for &r in &rs[..keep] {
        let mut next = vec![ZERO; q.len() + 1];
        for (i, &c) in q.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * r;
        }
        q = next;
    }
    let shape = Poly::new(q);
    // |α|² as the mean of F / |Q_shape|² over the circle.
    let samples = 256;
    let mut acc = 0.0;
    for k in 0..samples {
        let z = circle_point(k, samples);
        let f = 1.0 - p.eval(z).norm_sqr();
        acc += f / shape.eval(z).norm_sqr();
    }
    let alpha = (acc / samples as f64).sqrt();
    let mut coeffs: Vec<C64> = shape.coeffs.iter().map(|c| c * alpha).collect();
    coeffs.resize(d + 1, ZERO);
    Ok(Poly::new(coeffs))
}

/// Angles of the interleaved circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GqspAngles {
    pub degree: usize,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub lambda: f64,
    /// Hash of the target polynomial's coefficients.
    pub target_hash: String,
}

impl GqspAngles {
    /// `(P(z), Q(z))` for a scalar signal `z`: the first column of the
    /// circuit with `A = diag(z, 1)`.
    pub fn eval(&self, z: C64) -> (C64, C64) {
        let r0 = rotation(self.theta[0], self.phi[0], self.lambda);
        let mut v = [r0[(0, 0)], r0[(1, 0)]];
        for j in 1..=self.degree {
            let r = rotation(self.theta[j], self.phi[j], 0.0);
            let a = [v[0] * z, v[1]];
            v = [
                r[(0, 0)] * a[0] + r[(0, 1)] * a[1],
                r[(1, 0)] * a[0] + r[(1, 1)] * a[1],
            ];
        }
        (v[0], v[1])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Below this the leading pair is treated as vanishing.
const PEEL_FLOOR: f64 = 1e-13;

/// Angles realizing `(P, Q)` by peeling one rotation per degree.
pub fn synthesize_angles(p: &Poly, q: &Poly) -> Result<GqspAngles> {
    let d = p.degree().max(q.degree());
    let mut pp = p.coeffs.clone();
    let mut qq = q.coeffs.clone();
    pp.resize(d + 1, ZERO);
    qq.resize(d + 1, ZERO);
    let target_hash = coeff_hash(&p.coeffs);
    let mut theta = vec![0.0; d + 1];
    let mut phi = vec![0.0; d + 1];
    for j in (1..=d).rev() {
        let (pd, qd) = (pp[j], qq[j]);
        let (p0, q0) = (pp[0], qq[0]);
        let top = pd.norm_sqr() + qd.norm_sqr();
        let bottom = p0.norm_sqr() + q0.norm_sqr();
        let (t, f) = if top >= bottom {
            if top.sqrt() < PEEL_FLOOR {
                return Err(Error::PeelingUnstable {
                    degree: j,
                    magnitude: top.sqrt(),
                });
            }
            (qd.norm().atan2(pd.norm()), pd.arg() - qd.arg())
        } else {
            if bottom.sqrt() < PEEL_FLOOR {
                return Err(Error::PeelingUnstable {
                    degree: j,
                    magnitude: bottom.sqrt(),
                });
            }
            (p0.norm().atan2(q0.norm()), p0.arg() - (-q0).arg())
        };
        theta[j] = t;
        phi[j] = f;
        // R(θ, φ, 0)^† (P, Q) = (z P', Q')
        let (s, c) = t.sin_cos();
        let ef = C64::from_polar(1.0, -f);
        let top_row: Vec<C64> = pp.iter().zip(&qq).map(|(&a, &b)| ef * c * a + b * s).collect();
        let bot_row: Vec<C64> = pp.iter().zip(&qq).map(|(&a, &b)| ef * s * a - b * c).collect();
        pp = top_row[1..=j].to_vec();
        qq = bot_row[..j].to_vec();
    }
    let (p0, q0) = (pp[0], qq[0]);
    theta[0] = q0.norm().atan2(p0.norm());
    let lambda = if q0.norm() > 0.0 { q0.arg() } else { 0.0 };
    phi[0] = if p0.norm() > 0.0 { p0.arg() - lambda } else { 0.0 };
    Ok(GqspAngles {
        degree: d,
        theta,
        phi,
        lambda,
        target_hash,
    })
}

/// Scales by `rescale`, shifts, completes and peels a Laurent target.
/// Returns the angles with the shifted `P` and its completion `Q`.
pub fn angles_for_laurent(p: &LaurentPoly, rescale: f64) -> Result<(GqspAngles, Poly, Poly)> {
    let (shifted, _) = monomial_shift(&p.scaled(rescale));
    let q = complete_polynomial(&shifted)?;
    let angles = synthesize_angles(&shifted, &q)?;
    Ok((angles, shifted, q))
}

fn apply_rotation_rows(r: &Matrix2<C64>, m: &mut DMatrix<C64>, dim: usize) {
    let top = m.rows(0, dim).clone_owned();
    let bot = m.rows(dim, dim).clone_owned();
    m.rows_mut(0, dim).copy_from(&(&top * r[(0, 0)] + &bot * r[(0, 1)]));
    m.rows_mut(dim, dim).copy_from(&(&top * r[(1, 0)] + &bot * r[(1, 1)]));
}

fn circuit_columns(angles: &GqspAngles, u: &DenseOperator, cols: usize) -> Result<DMatrix<C64>> {
    u.ensure_unitary(crate::linalg::Tolerances::default().unitary)?;
    let dim = u.dim();
    // Columns of R_0 ⊗ I restricted to the first `cols` columns.
    let mut m = DMatrix::<C64>::zeros(2 * dim, cols);
    let r0 = rotation(angles.theta[0], angles.phi[0], angles.lambda);
    for c in 0..cols {
        let (blk, i) = (c / dim, c % dim);
        m[(i, c)] = r0[(0, blk)];
        m[(dim + i, c)] = r0[(1, blk)];
    }
    for j in 1..=angles.degree {
        let top = u.matrix() * m.rows(0, dim);
        m.rows_mut(0, dim).copy_from(&top);
        apply_rotation_rows(&rotation(angles.theta[j], angles.phi[j], 0.0), &mut m, dim);
    }
    Ok(m)
}

/// The full `2·dim` unitary of the interleaved circuit.
pub fn gqsp_apply(angles: &GqspAngles, u: &DenseOperator) -> Result<DenseOperator> {
    DenseOperator::from_matrix(circuit_columns(angles, u, 2 * u.dim())?)
}

/// Top-left block only (`P(U)`), skipping the columns that feed `G`.
pub fn gqsp_block(angles: &GqspAngles, u: &DenseOperator) -> Result<DenseOperator> {
    let cols = circuit_columns(angles, u, u.dim())?;
    DenseOperator::from_matrix(cols.rows(0, u.dim()).clone_owned())
}

pub fn extract_block(full: &DenseOperator) -> Result<DenseOperator> {
    let n = full.dim();
    if n % 2 != 0 {
        return Err(Error::invalid(format!("dimension {n} is odd")));
    }
    DenseOperator::from_matrix(full.matrix().view((0, 0), (n / 2, n / 2)).clone_owned())
}

/// `Σ_m c_m U^m` by Horner's rule in `U` and in `U^†`.
pub fn direct_poly_apply(p: &LaurentPoly, u: &DenseOperator) -> Result<DenseOperator> {
    u.ensure_unitary(crate::linalg::Tolerances::default().unitary)?;
    let dim = u.dim();
    let ud = u.adjoint();
    let m = p.m as i64;
    let eye = DMatrix::<C64>::identity(dim, dim);
    let mut pos = DMatrix::<C64>::zeros(dim, dim);
    for j in (0..=m).rev() {
        pos = u.matrix() * pos + &eye * p.coeff(j);
    }
    let mut neg = DMatrix::<C64>::zeros(dim, dim);
    for j in (1..=m).rev() {
        neg = ud.matrix() * (neg + &eye * p.coeff(-j));
    }
    DenseOperator::from_matrix(pos + neg)
}

/// `max |block(gqsp(U)) - U^M p(U)|`.
pub fn verify_block(angles: &GqspAngles, u: &DenseOperator, p: &LaurentPoly, shift: usize) -> Result<f64> {
    let block = extract_block(&gqsp_apply(angles, u)?)?;
    let want = &u.pow(shift as u64) * &direct_poly_apply(p, u)?;
    Ok(block.max_abs_diff(&want))
}
