//! Over-relaxed ADMM for `max ⟨A,X⟩` over PSD matrices in a constraint set.
//!
//! The splitting keeps two copies of the variable: `X` on the PSD side and
//! `Z` in the box/affine set `K`, with scaled dual `U`:
//!
//! ```text
//! X  = Π_psd(Z − U + A/ρ)
//! X̂  = α X + (1 − α) Z
//! Z⁺ = Π_K(X̂ + U)
//! U⁺ = U + X̂ − Z⁺
//! ```
//!
//! Two things make this usable at a few hundred vertices. When the
//! all-ones equality reads `⟨J,X⟩ = 0`, every feasible `X` has `X𝟏 = 0`,
//! so no feasible point is strictly feasible and plain ADMM crawls. The
//! solver then projects onto the face `{X ⪰ 0, X𝟏 = 0}` instead (clamp the
//! spectrum of `QVQ`, `Q = I − J/n`) and drops the equality from `K`.
//! Second, the map `(Z, U) ↦ (Z⁺, U⁺)` is accelerated with safeguarded
//! Anderson mixing: a mixed point is kept only if its fixed-point residual
//! does not exceed that of the plain step.

use std::collections::VecDeque;

use faer::linalg::solvers::Solve;
use serde::{Deserialize, Serialize};

use super::project::{dykstra_project, project_constraints};
use super::{SdpProblem, Violation};
use crate::error::{Error, Result};
use crate::linalg::{project_psd, sym_eigenvalues, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    IterLimit,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProjectionMethod {
    Exact,
    /// Cyclic Dykstra with at most this many passes per projection.
    Dykstra(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol_feas: f64,
    pub tol_psd: f64,
    pub max_iter: usize,
    pub relaxation: f64,
    /// Penalty; `None` picks `‖A‖_F / √n`.
    pub rho: Option<f64>,
    /// Anderson memory; 0 disables mixing.
    pub anderson_memory: usize,
    pub face_reduction: bool,
    pub projection: ProjectionMethod,
}

impl SolverOptions {
    /// Defaults for an order-`n` problem: `tol_feas = 1e-6·n`.
    pub fn for_order(n: usize) -> Self {
        Self {
            tol_feas: 1e-6 * n as f64,
            tol_psd: 1e-8,
            max_iter: 50_000,
            relaxation: 1.6,
            rho: None,
            anderson_memory: 8,
            face_reduction: true,
            projection: ProjectionMethod::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Residuals {
    /// `‖X − Z‖_F`.
    pub primal: f64,
    /// `ρ‖Z⁺ − Z‖_F`.
    pub dual: f64,
    /// Largest constraint violation of the returned matrix.
    pub constraint: f64,
    pub violation: Violation,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub matrix: Matrix,
    pub objective_value: f64,
    pub status: Status,
    pub residuals: Residuals,
    pub iterations: usize,
    /// Fixed-point evaluations, counting rejected Anderson candidates.
    pub evaluations: usize,
    pub rho: f64,
}

struct Splitting<'a> {
    k: SdpProblem,
    a_over_rho: Vec<f64>,
    rho: f64,
    alpha: f64,
    face: bool,
    method: ProjectionMethod,
    objective: &'a Matrix,
}

struct Step {
    next: Vec<f64>,
    x: Matrix,
    primal: f64,
    dual: f64,
}

/// `Q v Q` with `Q = I − J/n`.
fn center(v: &mut Matrix) {
    let n = v.n();
    let nf = n as f64;
    let rows: Vec<f64> = (0..n).map(|i| v.row(i).iter().sum::<f64>() / nf).collect();
    let all = rows.iter().sum::<f64>() / nf;
    let d = v.as_mut_slice();
    // v is symmetric, so column means equal row means.
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] += all - rows[i] - rows[j];
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Splitting<'_> {
    fn n(&self) -> usize {
        self.k.n()
    }

    fn project_k(&self, y: &Matrix) -> Result<Matrix> {
        match self.method {
            ProjectionMethod::Exact => project_constraints(&self.k, y, true),
            ProjectionMethod::Dykstra(passes) => Ok(dykstra_project(&self.k, y, passes)),
        }
    }

    fn step(&self, w: &[f64]) -> Result<Step> {
        let n = self.n();
        let nn = n * n;
        let (z, u) = w.split_at(nn);
        let mut v = Matrix::from_fn(n, |i, j| {
            let k = i * n + j;
            z[k] - u[k] + self.a_over_rho[k]
        });
        v.symmetrize();
        if self.face {
            center(&mut v);
        }
        let x = project_psd(&v);
        let xs = x.as_slice();
        let xh: Vec<f64> = (0..nn)
            .map(|k| self.alpha * xs[k] + (1.0 - self.alpha) * z[k])
            .collect();
        let mut y = Matrix::from_fn(n, |i, j| xh[i * n + j] + u[i * n + j]);
        y.symmetrize();
        let zn = self.project_k(&y)?;
        let zs = zn.as_slice();
        let mut next = Vec::with_capacity(2 * nn);
        next.extend_from_slice(zs);
        next.extend((0..nn).map(|k| u[k] + xh[k] - zs[k]));
        let primal = norm(&(0..nn).map(|k| xs[k] - zs[k]).collect::<Vec<_>>());
        let dual = self.rho * norm(&(0..nn).map(|k| zs[k] - z[k]).collect::<Vec<_>>());
        Ok(Step {
            next,
            x,
            primal,
            dual,
        })
    }
}

/// Least-squares Anderson coefficients: `argmin ‖g − ΔG γ‖`.
fn anderson_gamma(dg: &VecDeque<Vec<f64>>, g: &[f64]) -> Option<Vec<f64>> {
    let m = dg.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut gram = faer::Mat::<f64>::zeros(m, m);
    let mut rhs = faer::Mat::<f64>::zeros(m, 1);
    for i in 0..m {
        rhs[(i, 0)] = dot(&dg[i], g);
        for j in 0..=i {
            let v = dot(&dg[i], &dg[j]);
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    let tr: f64 = (0..m).map(|i| gram[(i, i)]).sum();
    if !(tr > 0.0) {
        return None;
    }
    for i in 0..m {
        gram[(i, i)] += 1e-10 * tr;
    }
    let sol = gram.partial_piv_lu().solve(&rhs);
    let gamma: Vec<f64> = (0..m).map(|i| sol[(i, 0)]).collect();
    gamma.iter().all(|v| v.is_finite()).then_some(gamma)
}

/// Iterations the residual must sit above `1e3·tol_feas` with a vanishing
/// step before the problem is declared infeasible.
const STALL_WINDOW: usize = 200;

pub fn solve(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    problem.check()?;
    if !(opts.tol_feas > 0.0 && opts.tol_psd > 0.0) {
        return Err(Error::invalid("tolerances must be positive"));
    }
    if !(opts.relaxation > 0.0 && opts.relaxation < 2.0) {
        return Err(Error::invalid("relaxation must lie in (0, 2)"));
    }
    if opts.max_iter == 0 {
        return Err(Error::invalid("max_iter must be positive"));
    }
    let n = problem.n();
    let nn = n * n;
    let a = &problem.objective;
    let rho = match opts.rho {
        Some(r) if r > 0.0 && r.is_finite() => r,
        Some(r) => return Err(Error::invalid(format!("rho must be positive, got {r}"))),
        None => {
            let f = a.frobenius_norm() / (n.max(1) as f64).sqrt();
            if f > 0.0 {
                f
            } else {
                1.0
            }
        }
    };
    let face = opts.face_reduction && problem.total == Some(0.0);
    let sp = Splitting {
        // K: everything but the cone, and without ⟨J,X⟩ = 0 on the face.
        k: SdpProblem {
            objective: Matrix::zeros(n),
            total: if face { None } else { problem.total },
            ..problem.clone()
        },
        a_over_rho: a.as_slice().iter().map(|v| v / rho).collect(),
        rho,
        alpha: opts.relaxation,
        face,
        method: opts.projection,
        objective: a,
    };

    let mut w = vec![0.0; 2 * nn];
    match sp.project_k(&Matrix::zeros(n)) {
        Ok(z0) => w[..nn].copy_from_slice(z0.as_slice()),
        Err(_) => {
            return Ok(SdpSolution {
                matrix: Matrix::zeros(n),
                objective_value: f64::NAN,
                status: Status::Infeasible,
                residuals: Residuals::default(),
                iterations: 0,
                evaluations: 0,
                rho,
            })
        }
    }

    let w0 = w.clone();
    let tol = opts.tol_feas;
    let mut cur = sp.step(&w)?;
    let mut evaluations = 1;
    let mut status = Status::IterLimit;
    let mut iterations = 0;
    let mut stall = 0;
    let mut dw: VecDeque<Vec<f64>> = VecDeque::new();
    let mut dg: VecDeque<Vec<f64>> = VecDeque::new();
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    // Acceleration is dropped once the primal residual stays large and stops
    // shrinking; on infeasible problems the plain iteration is what settles.
    let mut accelerate = opts.anderson_memory > 0;
    let mut window_primal = f64::INFINITY;

    while iterations < opts.max_iter {
        iterations += 1;
        let viol = problem.violation(&cur.x);
        if cur.primal <= tol && cur.dual <= tol && viol.max() <= tol {
            status = Status::Converged;
            break;
        }
        if cur.primal > 1e3 * tol && cur.dual < tol {
            stall += 1;
            if stall >= STALL_WINDOW {
                status = Status::Infeasible;
                break;
            }
        } else {
            stall = 0;
        }
        if iterations == opts.max_iter {
            break;
        }

        let g: Vec<f64> = cur.next.iter().zip(&w).map(|(f, x)| f - x).collect();
        if iterations % STALL_WINDOW == 0 {
            if accelerate && cur.primal > 1e3 * tol && cur.primal > 0.99 * window_primal {
                // Accelerated steps can push a divergent iterate far enough
                // that its increments drown in rounding; restart plainly.
                accelerate = false;
                w.copy_from_slice(&w0);
                cur = sp.step(&w)?;
                evaluations += 1;
                stall = 0;
                continue;
            }
            window_primal = cur.primal;
        }
        if !accelerate {
            w = std::mem::take(&mut cur.next);
            cur = sp.step(&w)?;
            evaluations += 1;
            continue;
        }
        if let Some((pw, pg)) = prev.take() {
            dw.push_back(w.iter().zip(&pw).map(|(a, b)| a - b).collect());
            dg.push_back(g.iter().zip(&pg).map(|(a, b)| a - b).collect());
            if dw.len() > opts.anderson_memory {
                dw.pop_front();
                dg.pop_front();
            }
        }
        let gamma = if dg.is_empty() {
            None
        } else {
            anderson_gamma(&dg, &g)
        };
        let Some(gamma) = gamma else {
            prev = Some((w.clone(), g));
            w = std::mem::take(&mut cur.next);
            cur = sp.step(&w)?;
            evaluations += 1;
            continue;
        };
        let mut cand = cur.next.clone();
        for (c, gm) in gamma.iter().enumerate() {
            for (k, e) in cand.iter_mut().enumerate() {
                *e -= gm * (dw[c][k] + dg[c][k]);
            }
        }
        let trial = sp.step(&cand)?;
        evaluations += 1;
        let g_trial = norm(&trial.next.iter().zip(&cand).map(|(f, x)| f - x).collect::<Vec<_>>());
        if g_trial <= norm(&g) {
            prev = Some((std::mem::replace(&mut w, cand), g));
            cur = trial;
        } else {
            dw.clear();
            dg.clear();
            prev = None;
            w = std::mem::take(&mut cur.next);
            cur = sp.step(&w)?;
            evaluations += 1;
        }
    }

    let mut x = cur.x;
    x.symmetrize();
    let violation = problem.violation(&x);
    let min_eigenvalue = if n == 0 {
        0.0
    } else {
        sym_eigenvalues(&x)[0]
    };
    if status == Status::Converged && min_eigenvalue < -opts.tol_psd {
        status = Status::IterLimit;
    }
    Ok(SdpSolution {
        objective_value: sp.objective.inner(&x),
        matrix: x,
        status,
        residuals: Residuals {
            primal: cur.primal,
            dual: cur.dual,
            constraint: violation.max(),
            violation,
            min_eigenvalue,
        },
        iterations,
        evaluations,
        rho,
    })
}
