//! Dual certificate for the asymmetric relaxation at the planted solution.
//!
//! With `x*` equal to `a` on `C1` and `b` on `C2`, complementary slackness
//! and `S*x* = 0` pin everything down once `λ` is chosen:
//!
//! ```text
//! b*_j = (2/(an)) [η b + λ 𝟏ᵀx* − (Ax*)_j]                  j ∈ C2
//! B*   = stripe: B*_ij = b*_j for i ∈ C1, j ∈ C2 (and transpose)
//! h*_i = (1/a) [(B*x*)_i + (Ax*)_i − η a − λ 𝟏ᵀx*]          i ∈ C1
//! η    = ‖A − E A‖ + ‖B* − E B*‖
//! S*   = H* − B* − A + η I + λ J
//! ```
//!
//! `B* − E B*` does not involve `η` or `λ`, so `η` is computed first.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Community, LabeledGraph, ModelParams};
use crate::linalg::{spectral_norm, sym_eigen, Matrix};
use crate::sdp::MleWeights;

/// Edge probabilities used for `E[A]` and `E[B*]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockProbabilities {
    pub p1: f64,
    pub p2: f64,
    pub q: f64,
}

impl From<&ModelParams> for BlockProbabilities {
    fn from(p: &ModelParams) -> Self {
        Self {
            p1: p.p1,
            p2: p.p2,
            q: p.q,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub eta: f64,
    pub lambda: f64,
    /// Diagonal of `H*`; zero on `C2`.
    pub h: Vec<f64>,
    /// `b*_j` for the members of `C2` in increasing vertex order.
    pub b_stripe: Vec<f64>,
    pub b: Matrix,
    pub s: Matrix,
    pub x_star: Vec<f64>,
    pub weights: MleWeights,
}

/// Stripe matrix: `value[k]` on row `c1[i]`, column `c2[k]` and its mirror.
pub fn stripe_matrix(n: usize, c1: &[usize], c2: &[usize], values: &[f64]) -> Matrix {
    let mut m = Matrix::zeros(n);
    for (k, &j) in c2.iter().enumerate() {
        for &i in c1 {
            m[(i, j)] = values[k];
            m[(j, i)] = values[k];
        }
    }
    m
}

/// `E[A]` with zero diagonal.
pub fn expected_adjacency(g: &LabeledGraph, probs: &BlockProbabilities) -> Matrix {
    let t = g.truth();
    Matrix::from_fn(g.n(), |i, j| {
        if i == j {
            0.0
        } else {
            match (t.sign(i) > 0, t.sign(j) > 0) {
                (true, true) => probs.p1,
                (false, false) => probs.p2,
                _ => probs.q,
            }
        }
    })
}

/// The λ-independent part of the construction.
struct Base {
    n: usize,
    a_mat: Matrix,
    x: Vec<f64>,
    ax: Vec<f64>,
    ones_x: f64,
    c1: Vec<usize>,
    c2: Vec<usize>,
    eta: f64,
    w: MleWeights,
}

fn base(g: &LabeledGraph, w: &MleWeights, probs: &BlockProbabilities) -> Result<Base> {
    if !(w.a > 0.0 && w.a.is_finite() && w.b.is_finite()) {
        return Err(Error::invalid("certificate needs a > 0"));
    }
    let n = g.n();
    let truth = g.truth();
    let a_mat = g.adjacency_matrix();
    let x = w.planted_vector(truth);
    let ax = a_mat.mul_vec(&x);
    let c1 = truth.members(Community::One);
    let c2 = truth.members(Community::Two);
    let half = n as f64 / 2.0;
    // E[(Ax*)_j] for j ∈ C2: neighbors in C1 at rate q, in C2 \ {j} at p2.
    let e_ax2 = half * probs.q * w.a + (half - 1.0) * probs.p2 * w.b;
    let scale = 2.0 / (w.a * n as f64);
    let dev: Vec<f64> = c2.iter().map(|&j| -scale * (ax[j] - e_ax2)).collect();
    let b_dev = stripe_matrix(n, &c1, &c2, &dev);
    let a_dev = a_mat.sub(&expected_adjacency(g, probs));
    let eta = spectral_norm(&a_dev) + spectral_norm(&b_dev);
    Ok(Base {
        n,
        ones_x: x.iter().sum(),
        a_mat,
        x,
        ax,
        c1,
        c2,
        eta,
        w: *w,
    })
}

impl Base {
    fn at(&self, lambda: f64) -> Certificate {
        let (a, b) = (self.w.a, self.w.b);
        let n = self.n;
        let shift = self.eta * b + lambda * self.ones_x;
        let scale = 2.0 / (a * n as f64);
        let b_stripe: Vec<f64> = self.c2.iter().map(|&j| scale * (shift - self.ax[j])).collect();
        let b_mat = stripe_matrix(n, &self.c1, &self.c2, &b_stripe);
        // (B*x*)_i for i ∈ C1 is b Σ b*_ℓ.
        let bx1 = b * b_stripe.iter().sum::<f64>();
        let mut h = vec![0.0; n];
        for &i in &self.c1 {
            h[i] = (bx1 + self.ax[i] - self.eta * a - lambda * self.ones_x) / a;
        }
        let s = Matrix::from_fn(n, |i, j| {
            let diag = if i == j { h[i] + self.eta } else { 0.0 };
            diag - b_mat[(i, j)] - self.a_mat[(i, j)] + lambda
        });
        Certificate {
            eta: self.eta,
            lambda,
            h,
            b_stripe,
            b: b_mat,
            s,
            x_star: self.x.clone(),
            weights: self.w,
        }
    }
}

pub fn construct(
    g: &LabeledGraph,
    w: &MleWeights,
    probs: &BlockProbabilities,
    lambda: f64,
) -> Result<Certificate> {
    if !lambda.is_finite() {
        return Err(Error::invalid("lambda must be finite"));
    }
    Ok(base(g, w, probs)?.at(lambda))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub lambda: f64,
    pub eta: f64,
    pub h_nonneg: bool,
    /// Smallest `h*_i` over `C1`.
    pub h_min: f64,
    pub b_nonneg: bool,
    pub b_min: f64,
    /// `‖S*x*‖ / ‖x*‖`.
    pub s_kernel_resid: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// `|cos|` between the bottom eigenvector of `S*` and `x*`.
    pub kernel_cosine: f64,
    pub slackness_diag_resid: f64,
    pub slackness_offdiag_resid: f64,
    pub valid: bool,
}

impl CertificateReport {
    /// Ordering for the λ sweep: validity, then `λ2`, then `min b*`.
    fn better_than(&self, other: &Self) -> bool {
        (self.valid, self.lambda2, self.b_min)
            .partial_cmp(&(other.valid, other.lambda2, other.b_min))
            .is_some_and(|o| o.is_gt())
    }
}

pub fn check(cert: &Certificate, tol: f64) -> CertificateReport {
    let n = cert.s.n();
    let w = &cert.weights;
    let (a, b) = (w.a, w.b);
    let ones: Vec<bool> = cert.x_star.iter().map(|&v| v == a).collect();
    let h_min = (0..n)
        .filter(|&i| ones[i])
        .map(|i| cert.h[i])
        .fold(f64::INFINITY, f64::min);
    let b_min = cert.b_stripe.iter().copied().fold(f64::INFINITY, f64::min);
    let sx = cert.s.mul_vec(&cert.x_star);
    let xn = cert.x_star.iter().map(|v| v * v).sum::<f64>().sqrt();
    let s_kernel_resid = sx.iter().map(|v| v * v).sum::<f64>().sqrt() / xn;

    let eig = sym_eigen(&cert.s);
    let lambda1 = eig.values.first().copied().unwrap_or(0.0);
    let lambda2 = eig.values.get(1).copied().unwrap_or(f64::INFINITY);
    let v0 = eig.vector(0);
    let kernel_cosine = v0.iter().zip(&cert.x_star).map(|(p, q)| p * q).sum::<f64>().abs() / xn;

    let mut diag_resid = 0.0f64;
    let mut off_resid = 0.0f64;
    for i in 0..n {
        let xi = cert.x_star[i];
        diag_resid = diag_resid.max((cert.h[i] * (xi * xi - a * a)).abs());
        for j in 0..n {
            let xij = xi * cert.x_star[j];
            off_resid = off_resid.max((cert.b[(i, j)] * (xij - a * b)).abs());
        }
    }
    let h_nonneg = h_min >= -tol;
    let b_nonneg = b_min >= -tol;
    CertificateReport {
        lambda: cert.lambda,
        eta: cert.eta,
        h_nonneg,
        h_min,
        b_nonneg,
        b_min,
        s_kernel_resid,
        lambda1,
        lambda2,
        kernel_cosine,
        slackness_diag_resid: diag_resid,
        slackness_offdiag_resid: off_resid,
        valid: h_nonneg && b_nonneg && s_kernel_resid <= tol && lambda2 > tol,
    }
}

/// Default grid: 0 and ±s·10^k for 20 values of k evenly spaced in
/// [−2, 2], with `s = ‖A‖₂/n`.
pub fn default_lambda_grid(g: &LabeledGraph) -> Vec<f64> {
    let n = g.n().max(1) as f64;
    let s = spectral_norm(&g.adjacency_matrix()) / n;
    let s = if s > 0.0 { s } else { 1.0 / n };
    let mut grid = vec![0.0];
    for k in 0..20 {
        let m = s * 10f64.powf(-2.0 + 4.0 * k as f64 / 19.0);
        grid.push(m);
        grid.push(-m);
    }
    grid.sort_by(f64::total_cmp);
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub best: CertificateReport,
    pub reports: Vec<CertificateReport>,
}

/// Construct and check at every λ; the best report is the maximum of
/// (validity, `λ2`, `min b*`), earliest grid point on ties.
pub fn lambda_sweep(
    g: &LabeledGraph,
    w: &MleWeights,
    probs: &BlockProbabilities,
    grid: &[f64],
    tol: f64,
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::invalid("lambda grid is empty"));
    }
    if grid.iter().any(|l| !l.is_finite()) {
        return Err(Error::invalid("lambda grid has non-finite entries"));
    }
    let base = base(g, w, probs)?;
    let reports: Vec<CertificateReport> = grid
        .par_iter()
        .map(|&l| check(&base.at(l), tol))
        .collect();
    let mut best = reports[0];
    for r in &reports[1..] {
        if r.better_than(&best) {
            best = *r;
        }
    }
    Ok(SweepResult { best, reports })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureStats {
    /// λ at which the statistic is evaluated (see [`failure_witness_stats`]).
    pub lambda: f64,
    /// `b Σ_{ℓ∈C2} b*_ℓ`.
    pub b_sum_term: f64,
    /// `min_{i∈C1, j∈C2} [(Ax*)_i − (Ax*)_j]`.
    pub min_difference: f64,
    pub statistic: f64,
    /// `(max_j (Ax*)_j − mean_ℓ (Ax*)_ℓ) / log n` over `C2`.
    pub tau: f64,
}

/// The combined necessary condition `b Σ b*_ℓ + min[(Ax*)_i − (Ax*)_j] > 0`
/// for `h* ≥ 0` and `b* ≥ 0`.
///
/// The statistic falls as `λ 𝟏ᵀx*` grows, and `b* ≥ 0` needs
/// `η b + λ 𝟏ᵀx* ≥ max_j (Ax*)_j`. When `𝟏ᵀx* > 0` it is evaluated at the
/// smallest such λ, its supremum over λ admitting `b* ≥ 0`; a value ≤ 0
/// there rules out a valid certificate at every λ. When `𝟏ᵀx* = 0` it does
/// not depend on λ and λ = 0 is used.
pub fn failure_witness_stats(
    g: &LabeledGraph,
    w: &MleWeights,
    probs: &BlockProbabilities,
) -> Result<FailureStats> {
    let bs = base(g, w, probs)?;
    let n = bs.n;
    if bs.c1.is_empty() {
        return Err(Error::invalid("graph has no vertices"));
    }
    let max2 = bs.c2.iter().map(|&j| bs.ax[j]).fold(f64::NEG_INFINITY, f64::max);
    let min1 = bs.c1.iter().map(|&i| bs.ax[i]).fold(f64::INFINITY, f64::min);
    let mean2 = bs.c2.iter().map(|&j| bs.ax[j]).sum::<f64>() / bs.c2.len() as f64;
    let lambda = if bs.ones_x.abs() > 1e-12 * (w.a.abs() + w.b.abs()) * n as f64 {
        (max2 - bs.eta * w.b) / bs.ones_x
    } else {
        0.0
    };
    let cert = bs.at(lambda);
    let b_sum_term = w.b * cert.b_stripe.iter().sum::<f64>();
    let min_difference = min1 - max2;
    Ok(FailureStats {
        lambda,
        b_sum_term,
        min_difference,
        statistic: b_sum_term + min_difference,
        tau: (max2 - mean2) / (n as f64).ln(),
    })
}
