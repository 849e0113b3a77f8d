//! Low-weight Fourier approximation of `f(x) = e^{-β(x+1)}` on `[-1+δ, 1-δ]`.
//!
//! The construction goes through three truncations: a Taylor series
//! `Σ_k a_k x^k`, the substitution `x = arcsin(y)/(π/2)` with `y = sin(πx/2)`
//! and the series `(arcsin(y)/(π/2))^k = Σ_l b^k_l y^l`, and finally the
//! binomial expansion of `y^l = (i/2)^l Σ_m (-1)^m C(l,m) e^{iπx(2m-l)/2}`
//! restricted to frequencies `|2m - l| <= M`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};
use crate::stats::{linear_fit, sorted_sum, LinearFit};

/// `f(x) = e^{-β(x+1)}`.
pub fn boltzmann(beta: f64, x: f64) -> f64 {
    (-beta * (x + 1.0)).exp()
}

/// Taylor coefficients of `e^{-β(x+1)}` about `x = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorSeries {
    pub beta: f64,
    pub a: Vec<f64>,
    pub one_norm_a: f64,
}

impl TaylorSeries {
    pub fn order(&self) -> usize {
        self.a.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.a.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

/// `a_k = e^{-β} (-β)^k / k!` for `k = 0..=K`.
pub fn gibbs_taylor(beta: f64, k: usize) -> Result<TaylorSeries> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta must be finite and >= 0, got {beta}")));
    }
    let mut a = Vec::with_capacity(k + 1);
    let mut term = (-beta).exp();
    a.push(term);
    for j in 1..=k {
        term *= -beta / j as f64;
        a.push(term);
    }
    let one_norm_a = a.iter().map(|v| v.abs()).sum();
    Ok(TaylorSeries { beta, a, one_norm_a })
}

/// `Σ_{k>K} e^{-β} β^k / k!`, the worst-case Taylor remainder on `[-1, 1]`.
pub fn taylor_tail(beta: f64, k: usize) -> f64 {
    let mut term = (-beta).exp();
    for j in 1..=k + 1 {
        term *= beta / j as f64;
    }
    let mut tail = 0.0;
    let mut j = k + 1;
    while term > 1e-300 && (term > tail * 1e-17 || (j as f64) < beta) {
        tail += term;
        j += 1;
        term *= beta / j as f64;
    }
    tail
}

/// Smallest `K` with `e^{-β} β^{K+1}/(K+1)! < ε/8` and `K + 2 >= 2β`; the
/// second condition makes the remaining terms shrink by at least half each
/// step, so the whole tail is below `ε/4`.
pub fn taylor_order(beta: f64, eps: f64) -> usize {
    let mut k = 0usize;
    let mut next = (-beta).exp() * beta; // e^{-β} β^{K+1}/(K+1)! at K = 0
    while !(next < eps / 8.0 && (k + 2) as f64 >= 2.0 * beta) {
        k += 1;
        next *= beta / (k + 1) as f64;
    }
    k
}

/// Power-series coefficients of `arcsin(y)/(π/2)` up to `y^L`.
fn arcsin_base(l_max: usize) -> Vec<f64> {
    let mut b = vec![0.0; l_max + 1];
    // C(2n, n)/4^n by its product form
    let mut r = 1.0;
    let mut n = 0usize;
    while 2 * n + 1 <= l_max {
        if n > 0 {
            r *= (2 * n - 1) as f64 / (2 * n) as f64;
        }
        b[2 * n + 1] = 2.0 / PI * r / (2 * n + 1) as f64;
        n += 1;
    }
    b
}

fn cauchy_truncated(a: &[f64], base: &[f64]) -> Vec<f64> {
    let len = a.len();
    let mut out = vec![0.0; len];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        // base has only odd entries
        let mut j = 1;
        while i + j < len {
            out[i + j] += ai * base[j];
            j += 2;
        }
    }
    out
}

/// `b^k_l`, `l = 0..=L`, for `(arcsin(y)/(π/2))^k`.
pub fn arcsin_series(k: usize, l_max: usize) -> Vec<f64> {
    arcsin_powers(k, l_max).pop().expect("k + 1 rows")
}

/// Rows `b^0, b^1, ..., b^K`, each truncated at `y^L`.
pub fn arcsin_powers(k_max: usize, l_max: usize) -> Vec<Vec<f64>> {
    let base = arcsin_base(l_max);
    let mut rows = Vec::with_capacity(k_max + 1);
    let mut cur = vec![0.0; l_max + 1];
    cur[0] = 1.0;
    rows.push(cur.clone());
    for _ in 0..k_max {
        cur = cauchy_truncated(&cur, &base);
        rows.push(cur.clone());
    }
    rows
}

fn check_delta(delta: f64) -> Result<()> {
    // δ = 1 collapses the interval to {0}; it is kept because δ = 1/β at β = 1.
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1], got {delta}")));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// `M = max(2⌈ln(4‖a‖₁/ε)/δ⌉, 0)`.
pub fn lwf_order(delta: f64, eps: f64, one_norm_a: f64) -> Result<usize> {
    check_delta(delta)?;
    check_eps(eps)?;
    let m = 2.0 * ((4.0 * one_norm_a / eps).ln() / delta).ceil();
    Ok(if m > 0.0 { m as usize } else { 0 })
}

/// The three truncation errors (and any later trimming), as worst-case bounds
/// on the interval.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorSplit {
    pub taylor: f64,
    pub arcsin: f64,
    pub binomial: f64,
    /// One-norm of coefficients dropped by [`FourierApprox::truncated`].
    pub trimmed: f64,
}

impl ErrorSplit {
    pub fn total(&self) -> f64 {
        self.taylor + self.arcsin + self.binomial + self.trimmed
    }
}

/// `Σ_{m=-M}^{M} c_m e^{iπmx/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierApprox {
    pub beta: f64,
    pub delta: f64,
    /// Sup-error target the approximation was sized for.
    pub eps: f64,
    pub m: usize,
    /// `c[j + M]` is the coefficient of `e^{iπjx/2}`.
    pub c: Vec<C64>,
    pub one_norm_a: f64,
    pub taylor_order: usize,
    pub arcsin_order: usize,
    pub errors: ErrorSplit,
}

impl FourierApprox {
    pub fn coeff(&self, j: i64) -> C64 {
        if j.unsigned_abs() as usize > self.m {
            return ZERO;
        }
        self.c[(j + self.m as i64) as usize]
    }

    pub fn one_norm_c(&self) -> f64 {
        self.c.iter().map(|z| z.norm()).sum()
    }

    pub fn eval(&self, x: f64) -> C64 {
        let m = self.m as i64;
        (-m..=m)
            .map(|j| self.coeff(j) * C64::from_polar(1.0, PI * j as f64 * x / 2.0))
            .fold(ZERO, |a, b| a + b)
    }

    /// Evenly spaced points covering `[-1+δ, 1-δ]`.
    pub fn grid(&self, points: usize) -> Vec<f64> {
        interval_grid(self.delta, points)
    }

    /// `max |f(x) - Σ c_m e^{iπmx/2}|` over `points` grid points.
    pub fn sup_error(&self, points: usize) -> f64 {
        self.grid(points)
            .into_iter()
            .map(|x| (self.eval(x) - boltzmann(self.beta, x)).norm())
            .fold(0.0, f64::max)
    }

    /// `max |Im Σ c_m e^{iπmx/2}|` over the grid.
    pub fn max_imaginary(&self, points: usize) -> f64 {
        self.grid(points)
            .into_iter()
            .map(|x| self.eval(x).im.abs())
            .fold(0.0, f64::max)
    }

    /// Drops frequencies beyond `|j| <= m`; the dropped one-norm is added to
    /// the error split.
    pub fn truncated(&self, m: usize) -> FourierApprox {
        if m >= self.m {
            return self.clone();
        }
        let lo = self.m - m;
        let dropped: f64 = self.c[..lo]
            .iter()
            .chain(&self.c[self.m + m + 1..])
            .map(|z| z.norm())
            .sum();
        let mut out = self.clone();
        out.m = m;
        out.c = self.c[lo..=self.m + m].to_vec();
        out.errors.trimmed += dropped;
        out
    }

    /// Smallest truncation whose total error bound stays within `eps`.
    pub fn trimmed_to(&self, eps: f64) -> FourierApprox {
        let mut best = self.clone();
        for m in (0..self.m).rev() {
            let t = self.truncated(m);
            if t.errors.total() > eps {
                break;
            }
            best = t;
        }
        best
    }
}

/// `points` evenly spaced values on `[-1+δ, 1-δ]` (all zero when `δ = 1`).
pub fn interval_grid(delta: f64, points: usize) -> Vec<f64> {
    let lo = -1.0 + delta;
    let hi = 1.0 - delta;
    if points == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..points)
        .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
        .collect()
}

/// Largest arcsin order tried before giving up.
const MAX_ARCSIN_ORDER: usize = 1 << 16;

/// Assembles `c_m` from a Taylor series with `M` from [`lwf_order`].
pub fn lwf_coefficients(ts: &TaylorSeries, delta: f64, eps: f64) -> Result<FourierApprox> {
    let m = lwf_order(delta, eps, ts.one_norm_a)?;
    lwf_coefficients_with_order(ts, delta, eps, m)
}

/// Taylor order from [`taylor_order`], then [`lwf_coefficients`].
pub fn lwf_approx(beta: f64, delta: f64, eps: f64) -> Result<FourierApprox> {
    check_eps(eps)?;
    let ts = gibbs_taylor(beta, taylor_order(beta, eps))?;
    lwf_coefficients(&ts, delta, eps)
}

/// As [`lwf_coefficients`] with an explicit frequency cutoff `M`.
pub fn lwf_coefficients_with_order(ts: &TaylorSeries, delta: f64, eps: f64, m: usize) -> Result<FourierApprox> {
    check_delta(delta)?;
    check_eps(eps)?;
    let k_max = ts.order();
    let taylor = taylor_tail(ts.beta, k_max);
    let y_max = (PI * delta / 2.0).cos().max(0.0);
    let x_max = y_max.asin() / (PI / 2.0);

    // Arcsin order: grow until Σ_k |a_k| Σ_{l>L} b^k_l y_max^l < ε/8.
    let mut l_max = 16usize;
    let (rows, arcsin) = loop {
        let rows = arcsin_powers(k_max, l_max);
        let tail: f64 = rows
            .iter()
            .zip(&ts.a)
            .enumerate()
            .map(|(k, (row, a))| {
                let partial = row.iter().rev().fold(0.0, |acc, &b| acc * y_max + b);
                a.abs() * (x_max.powi(k as i32) - partial).max(0.0)
            })
            .sum();
        if tail < eps / 8.0 {
            break (rows, tail);
        }
        if l_max >= MAX_ARCSIN_ORDER {
            return Err(Error::LwfUnattainable {
                eps,
                taylor,
                arcsin: tail,
                binomial: f64::NAN,
            });
        }
        l_max = (l_max * 3 / 2).min(MAX_ARCSIN_ORDER);
    };

    // B_l = Σ_k a_k b^k_l
    let big_b: Vec<f64> = (0..=l_max)
        .map(|l| sorted_sum(rows.iter().zip(&ts.a).map(|(r, a)| a * r[l]).collect(), |v| v.abs()))
        .collect();

    // c_j = Σ_l B_l i^l Σ_{m: 2m-l=j} (-1)^m C(l,m)/2^l, with binomial rows
    // built by Pascal averaging to avoid under/overflow.
    let width = 2 * m + 1;
    let mut contributions: Vec<Vec<C64>> = vec![Vec::new(); width];
    let mut binomial = 0.0;
    let mut pmf = vec![1.0f64];
    for (l, &bl) in big_b.iter().enumerate() {
        if l > 0 {
            let mut next = vec![0.0; l + 1];
            for (i, &p) in pmf.iter().enumerate() {
                next[i] += 0.5 * p;
                next[i + 1] += 0.5 * p;
            }
            pmf = next;
        }
        if bl == 0.0 {
            continue;
        }
        let il = match l % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        let mut dropped = 0.0;
        for (mm, &p) in pmf.iter().enumerate() {
            let j = 2 * mm as i64 - l as i64;
            if j.unsigned_abs() as usize > m {
                dropped += p;
                continue;
            }
            let sign = if mm % 2 == 0 { 1.0 } else { -1.0 };
            contributions[(j + m as i64) as usize].push(il * (bl * sign * p));
        }
        binomial += bl.abs() * dropped;
    }
    let c: Vec<C64> = contributions
        .into_iter()
        .map(|v| sorted_sum(v, |z| z.norm()))
        .collect();

    let errors = ErrorSplit {
        taylor,
        arcsin,
        binomial,
        trimmed: 0.0,
    };
    if errors.total() > eps {
        return Err(Error::LwfUnattainable {
            eps,
            taylor,
            arcsin,
            binomial,
        });
    }
    Ok(FourierApprox {
        beta: ts.beta,
        delta,
        eps,
        m,
        c,
        one_norm_a: ts.one_norm_a,
        taylor_order: k_max,
        arcsin_order: l_max,
        errors,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow {
    pub m: usize,
    pub sup_error: f64,
}

/// Sup error of truncations of one high-accuracy approximation, with a fit
/// of `M` against `ln(1/error)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationScan {
    pub beta: f64,
    pub delta: f64,
    pub rows: Vec<ScanRow>,
    pub fit: Option<LinearFit>,
}

/// Accuracy of the reference approximation truncated by a scan.
pub const SCAN_REFERENCE_EPS: f64 = 1e-12;
/// Errors inside this window enter the fit; below it round-off and the
/// reference accuracy take over, above it the asymptotic regime has not begun.
pub const SCAN_FIT_WINDOW: (f64, f64) = (1e-10, 1e-2);
/// Grid used for sup errors in scans.
pub const SCAN_GRID_POINTS: usize = 1000;

pub fn truncation_scan(beta: f64, delta: f64, m_list: &[usize]) -> Result<TruncationScan> {
    if m_list.is_empty() {
        return Err(Error::invalid("truncation scan needs at least one M"));
    }
    let full = lwf_approx(beta, delta, SCAN_REFERENCE_EPS)?;
    let grid = full.grid(SCAN_GRID_POINTS);
    let target: Vec<f64> = grid.iter().map(|&x| boltzmann(beta, x)).collect();
    let mut ms: Vec<usize> = m_list.to_vec();
    ms.sort_unstable();
    ms.dedup();
    // Partial sums grow one frequency pair at a time.
    let mut partial: Vec<C64> = vec![full.coeff(0); grid.len()];
    let mut reached = 0usize;
    let mut rows = Vec::with_capacity(ms.len());
    for &m in &ms {
        while reached < m.min(full.m) {
            reached += 1;
            let j = reached as i64;
            let (cp, cn) = (full.coeff(j), full.coeff(-j));
            for (s, &x) in partial.iter_mut().zip(&grid) {
                let e = C64::from_polar(1.0, PI * j as f64 * x / 2.0);
                *s += cp * e + cn * e.conj();
            }
        }
        let err = partial
            .iter()
            .zip(&target)
            .map(|(s, f)| (s - f).norm())
            .fold(0.0, f64::max);
        rows.push(ScanRow { m, sup_error: err });
    }
    let fit = fit_scan(&rows, SCAN_FIT_WINDOW);
    Ok(TruncationScan {
        beta,
        delta,
        rows,
        fit,
    })
}

/// Fit of `M` against `ln(1/error)` over rows whose error lies in `window`.
pub fn fit_scan(rows: &[ScanRow], window: (f64, f64)) -> Option<LinearFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.sup_error >= window.0 && r.sup_error <= window.1)
        .map(|r| ((1.0 / r.sup_error).ln(), r.m as f64))
        .unzip();
    if x.len() < 3 {
        return None;
    }
    linear_fit(&x, &y)
}

/// Sup error of Taylor partial sums of order `K` on `[-1+δ, 1-δ]`.
pub fn taylor_scan(beta: f64, delta: f64, k_list: &[usize]) -> Result<Vec<ScanRow>> {
    check_delta(delta)?;
    let k_max = k_list.iter().copied().max().unwrap_or(0);
    let full = gibbs_taylor(beta, k_max)?;
    let grid = interval_grid(delta, SCAN_GRID_POINTS);
    Ok(k_list
        .iter()
        .map(|&k| {
            let ts = TaylorSeries {
                beta,
                a: full.a[..=k].to_vec(),
                one_norm_a: 0.0,
            };
            let err = grid
                .iter()
                .map(|&x| (ts.eval(x) - boltzmann(beta, x)).abs())
                .fold(0.0, f64::max);
            ScanRow { m: k, sup_error: err }
        })
        .collect())
}
