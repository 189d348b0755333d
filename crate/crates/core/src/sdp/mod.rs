//! SDP relaxations of the MLE and a dense splitting solver for them.
//!
//! Two instances are built here. The symmetric relaxation maximizes
//! `⟨A,Y⟩` over `Y ⪰ 0, Y_ii = 1, ⟨J,Y⟩ = 0`. The asymmetric relaxation
//! weights the planted solution by the log-odds `ψ1, ψ2` and maximizes
//! `⟨A,X⟩` over `X ⪰ 0, X_ii ≤ a², X_ij ≥ ab, tr X = (n/2)(a²+b²),
//! ⟨J,X⟩ = (n²/4)(a+b)²` with `a = ψ1`, `b = −ψ2`.

mod admm;
mod project;

pub use admm::{solve, ProjectionMethod, Residuals, SdpSolution, SolverOptions, Status};
pub use project::{dykstra_project, project_constraints};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeCounts, LabeledGraph, Labeling, ModelParams};
use crate::linalg::{sym_eigen, Matrix};

/// Log-odds weights of the two within-community edge types.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleWeights {
    pub psi1: f64,
    pub psi2: f64,
    pub a: f64,
    pub b: f64,
}

fn log_odds(p: f64, q: f64) -> f64 {
    (p * (1.0 - q) / ((1.0 - p) * q)).ln()
}

impl MleWeights {
    /// Weights for edge probabilities `0 < q < p1, p2 < 1`.
    pub fn from_probabilities(p1: f64, p2: f64, q: f64) -> Result<Self> {
        for (name, v) in [("p1", p1), ("p2", p2), ("q", q)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::invalid(format!("{name} = {v} outside (0, 1)")));
            }
        }
        if !(p1 > q && p2 > q) {
            return Err(Error::invalid("need q < p1 and q < p2"));
        }
        let psi1 = log_odds(p1, q);
        let psi2 = log_odds(p2, q);
        Ok(Self {
            psi1,
            psi2,
            a: psi1,
            b: -psi2,
        })
    }

    pub fn from_params(p: &ModelParams) -> Result<Self> {
        Self::from_probabilities(p.p1, p.p2, p.q)
    }

    /// `x*`: `a` on community one, `b` on community two.
    pub fn planted_vector(&self, truth: &Labeling) -> Vec<f64> {
        truth
            .as_slice()
            .iter()
            .map(|&s| if s > 0 { self.a } else { self.b })
            .collect()
    }
}

/// `E1 ψ1 + E2 ψ2`, the labeling-dependent part of the log-likelihood.
pub fn mle_objective(counts: &EdgeCounts, w: &MleWeights) -> f64 {
    counts.e1 as f64 * w.psi1 + counts.e2 as f64 * w.psi2
}

/// Diagonal constraint family; exactly one is active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DiagConstraint {
    Equal(f64),
    UpperBound(f64),
}

/// Maximize `⟨objective, X⟩` over PSD `X` subject to the listed constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub objective: Matrix,
    pub diag: DiagConstraint,
    /// `X_ij >= l` for every `(i, j)`, diagonal included.
    pub entry_lower: Option<f64>,
    /// `tr X = c`.
    pub trace: Option<f64>,
    /// `⟨J, X⟩ = c`.
    pub total: Option<f64>,
}

/// Constraint violations of a candidate matrix. Trace and all-ones
/// residuals are divided by `n` and `n²` so every entry is on a per-entry
/// scale.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Violation {
    pub diag: f64,
    pub entry: f64,
    pub trace: f64,
    pub total: f64,
    pub asymmetry: f64,
}

impl Violation {
    pub fn max(&self) -> f64 {
        self.diag
            .max(self.entry)
            .max(self.trace)
            .max(self.total)
            .max(self.asymmetry)
    }
}

impl SdpProblem {
    pub fn n(&self) -> usize {
        self.objective.n()
    }

    fn check(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        let d = match self.diag {
            DiagConstraint::Equal(v) | DiagConstraint::UpperBound(v) => v,
        };
        let ok = finite(d)
            && self.entry_lower.map_or(true, finite)
            && self.trace.map_or(true, finite)
            && self.total.map_or(true, finite)
            && self.objective.as_slice().iter().all(|v| v.is_finite());
        if !ok {
            return Err(Error::invalid("non-finite SDP constant"));
        }
        if self.objective.asymmetry() > 0.0 {
            return Err(Error::invalid("SDP objective must be symmetric"));
        }
        Ok(())
    }

    pub fn violation(&self, x: &Matrix) -> Violation {
        let n = x.n();
        let nf = n.max(1) as f64;
        let diag = match self.diag {
            DiagConstraint::Equal(v) => (0..n).map(|i| (x[(i, i)] - v).abs()).fold(0.0, f64::max),
            DiagConstraint::UpperBound(v) => {
                (0..n).map(|i| (x[(i, i)] - v).max(0.0)).fold(0.0, f64::max)
            }
        };
        let entry = self.entry_lower.map_or(0.0, |l| {
            x.as_slice().iter().map(|&e| (l - e).max(0.0)).fold(0.0, f64::max)
        });
        let trace = self.trace.map_or(0.0, |t| (x.trace() - t).abs() / nf);
        let total = self.total.map_or(0.0, |s| (x.total() - s).abs() / (nf * nf));
        Violation {
            diag,
            entry,
            trace,
            total,
            asymmetry: x.asymmetry(),
        }
    }
}

/// `max ⟨A,Y⟩` s.t. `Y ⪰ 0, Y_ii = 1, ⟨J,Y⟩ = 0`.
pub fn build_sym_sdp(g: &LabeledGraph) -> SdpProblem {
    SdpProblem {
        objective: g.adjacency_matrix(),
        diag: DiagConstraint::Equal(1.0),
        entry_lower: None,
        trace: None,
        total: Some(0.0),
    }
}

/// The MLE-weighted relaxation. Requires `a > 0 > b`. When `|b| > a` the
/// planted `x*x*ᵀ` violates `X_ii <= a²`; the problem is still built.
pub fn build_asym_sdp(g: &LabeledGraph, w: &MleWeights) -> Result<SdpProblem> {
    if !(w.a > 0.0 && w.b < 0.0 && w.a.is_finite() && w.b.is_finite()) {
        return Err(Error::invalid(format!(
            "asymmetric SDP needs a > 0 > b, got a = {}, b = {}",
            w.a, w.b
        )));
    }
    let n = g.n() as f64;
    let (a, b) = (w.a, w.b);
    Ok(SdpProblem {
        objective: g.adjacency_matrix(),
        diag: DiagConstraint::UpperBound(a * a),
        entry_lower: Some(a * b),
        trace: Some(0.5 * n * (a * a + b * b)),
        total: Some(0.25 * n * n * (a + b) * (a + b)),
    })
}

/// `σ σᵀ`.
pub fn planted_sym(truth: &Labeling) -> Matrix {
    Matrix::outer(&truth.to_f64())
}

/// `x* x*ᵀ`.
pub fn planted_asym(truth: &Labeling, w: &MleWeights) -> Matrix {
    Matrix::outer(&w.planted_vector(truth))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthComparison {
    pub target_objective: f64,
    pub objective: f64,
    /// `objective − target_objective`.
    pub gap: f64,
    pub relative_distance: f64,
}

/// Compare a converged solution against a planted matrix.
pub fn compare_with_truth(
    sol: &SdpSolution,
    problem: &SdpProblem,
    target: &Matrix,
) -> Result<TruthComparison> {
    if sol.status != Status::Converged {
        return Err(Error::Status(format!(
            "solution not converged ({:?})",
            sol.status
        )));
    }
    if target.n() != problem.n() || sol.matrix.n() != problem.n() {
        return Err(Error::invalid("dimension mismatch"));
    }
    let scale = target.as_slice().iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let v = problem.violation(target);
    if v.max() > 1e-9 * scale {
        return Err(Error::invalid(format!(
            "target is not feasible for the problem (violation {:e})",
            v.max()
        )));
    }
    let target_objective = problem.objective.inner(target);
    let norm = target.frobenius_norm();
    Ok(TruthComparison {
        target_objective,
        objective: sol.objective_value,
        gap: sol.objective_value - target_objective,
        relative_distance: if norm > 0.0 {
            sol.matrix.frobenius_distance(target) / norm
        } else {
            sol.matrix.frobenius_norm()
        },
    })
}

/// Sign of the top eigenvector of `y`, ties to `+1`. The eigenvector's
/// sign is fixed so that its largest-magnitude entry is positive.
pub fn round_top_eigenvector(y: &Matrix) -> Vec<i8> {
    let n = y.n();
    if n == 0 {
        return Vec::new();
    }
    let eig = sym_eigen(y);
    let mut v = eig.vector(n - 1);
    let pivot = v
        .iter()
        .copied()
        .fold(0.0f64, |m, e| if e.abs() > m.abs() { e } else { m });
    if pivot < 0.0 {
        v.iter_mut().for_each(|e| *e = -*e);
    }
    v.iter().map(|&e| if e >= 0.0 { 1 } else { -1 }).collect()
}

/// `min_i Σ_ℓ A_iℓ σ_i σ_ℓ`, the first-order score of a ±1 labeling.
pub fn first_order_score(g: &LabeledGraph, sigma: &[i8]) -> Result<i64> {
    if sigma.len() != g.n() {
        return Err(Error::invalid("labeling length differs from graph order"));
    }
    let mut best = i64::MAX;
    for i in 0..g.n() {
        let s: i64 = g
            .row(i)
            .iter()
            .zip(sigma)
            .map(|(&a, &l)| a as i64 * l as i64)
            .sum();
        best = best.min(s * sigma[i] as i64);
    }
    Ok(if g.n() == 0 { 0 } else { best })
}
