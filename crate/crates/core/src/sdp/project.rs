//! Frobenius projection onto the non-cone constraints of an [`SdpProblem`].
//!
//! The constraint set splits by entry: the diagonal and off-diagonal
//! entries each carry box bounds, and the trace and all-ones equalities
//! are sums over those groups. With a trace constraint present the
//! all-ones equality only touches the off-diagonal sum, so each group is a
//! box intersected with one hyperplane and the projection is
//! `clamp(v − μ, lo, hi)` for a scalar shift `μ`. Cyclic Dykstra over the
//! individual sets is kept for comparison.

use super::{DiagConstraint, SdpProblem};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

const SHIFT_BISECTIONS: usize = 200;

struct Group {
    idx: Vec<usize>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    target: Option<f64>,
}

fn clamp(v: f64, lo: f64, hi: f64) -> f64 {
    v.max(lo).min(hi)
}

/// Solve `Σ clamp(v_k − μ, lo_k, hi_k) = c` for `μ`.
fn solve_shift(v: &[f64], lo: &[f64], hi: &[f64], c: f64) -> Result<f64> {
    let sum_lo: f64 = lo.iter().sum();
    let sum_hi: f64 = hi.iter().sum();
    let scale = 1.0 + c.abs();
    if sum_lo > c + 1e-12 * scale || sum_hi < c - 1e-12 * scale {
        return Err(Error::invalid(format!(
            "constraint set empty: bounds sum to [{sum_lo}, {sum_hi}], target {c}"
        )));
    }
    // A target on the edge of the bounds pins every entry to that bound
    // (the diagonal of the asymmetric problem when a = −b). The bracket
    // search below would chase rounding noise there.
    let pinned = 1e-12 * scale;
    if c >= sum_hi - pinned {
        return Ok(v.iter().zip(hi).map(|(x, h)| x - h).fold(f64::INFINITY, f64::min));
    }
    if c <= sum_lo + pinned {
        return Ok(v.iter().zip(lo).map(|(x, l)| x - l).fold(f64::NEG_INFINITY, f64::max));
    }
    let f = |mu: f64| -> f64 {
        v.iter()
            .zip(lo)
            .zip(hi)
            .map(|((&x, &l), &h)| clamp(x - mu, l, h))
            .sum()
    };
    let k = v.len() as f64;
    let mu0 = (v.iter().sum::<f64>() - c) / k;
    let mut step = 1.0 + v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (mut a, mut b) = (mu0 - step, mu0 + step);
    // f is nonincreasing in μ.
    while f(a) < c {
        step *= 2.0;
        a = mu0 - step;
    }
    while f(b) > c {
        step *= 2.0;
        b = mu0 + step;
    }
    for _ in 0..SHIFT_BISECTIONS {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) > c {
            a = m;
        } else {
            b = m;
        }
    }
    let mut mu = 0.5 * (a + b);
    // Exact on the final linear piece: spread the remaining error over the
    // entries strictly inside their bounds.
    let free = v
        .iter()
        .zip(lo)
        .zip(hi)
        .filter(|((&x, &l), &h)| x - mu > l && x - mu < h)
        .count();
    if free > 0 {
        mu += (f(mu) - c) / free as f64;
    }
    Ok(mu)
}

fn groups(p: &SdpProblem) -> Vec<Group> {
    let n = p.n();
    let (d_lo, d_hi) = match p.diag {
        DiagConstraint::Equal(v) => (v, v),
        DiagConstraint::UpperBound(v) => (p.entry_lower.unwrap_or(f64::NEG_INFINITY), v),
    };
    let o_lo = p.entry_lower.unwrap_or(f64::NEG_INFINITY);
    let diag: Vec<usize> = (0..n).map(|i| i * n + i).collect();
    let off: Vec<usize> = (0..n * n).filter(|k| k / n != k % n).collect();
    let with = |idx: Vec<usize>, lo: f64, hi: f64, target| Group {
        lo: vec![lo; idx.len()],
        hi: vec![hi; idx.len()],
        idx,
        target,
    };
    match (p.trace, p.total) {
        (Some(t), total) => vec![
            with(diag, d_lo, d_hi, Some(t)),
            with(off, o_lo, f64::INFINITY, total.map(|s| s - t)),
        ],
        (None, Some(s)) => {
            let mut g = with(diag, d_lo, d_hi, None);
            let o = with(off, o_lo, f64::INFINITY, None);
            g.idx.extend(o.idx);
            g.lo.extend(o.lo);
            g.hi.extend(o.hi);
            g.target = Some(s);
            vec![g]
        }
        (None, None) => vec![
            with(diag, d_lo, d_hi, None),
            with(off, o_lo, f64::INFINITY, None),
        ],
    }
}

/// Exact Frobenius projection of a symmetric `v` onto the affine and box
/// constraints of `p` (everything except the cone). With `include_total`
/// false the all-ones equality is dropped.
pub fn project_constraints(p: &SdpProblem, v: &Matrix, include_total: bool) -> Result<Matrix> {
    let n = p.n();
    if v.n() != n {
        return Err(Error::invalid("dimension mismatch"));
    }
    let reduced;
    let p = if include_total || p.total.is_none() {
        p
    } else {
        reduced = SdpProblem {
            total: None,
            ..p.clone()
        };
        &reduced
    };
    let src = v.as_slice();
    let mut out = v.clone();
    let dst = out.as_mut_slice();
    for g in groups(p) {
        if g.idx.is_empty() {
            continue;
        }
        let vals: Vec<f64> = g.idx.iter().map(|&k| src[k]).collect();
        let mu = match g.target {
            Some(c) => solve_shift(&vals, &g.lo, &g.hi, c)?,
            None => 0.0,
        };
        for (t, &k) in g.idx.iter().enumerate() {
            dst[k] = clamp(vals[t] - mu, g.lo[t], g.hi[t]);
        }
    }
    Ok(out)
}

/// Cyclic Dykstra over the individual constraint sets (diagonal, entry
/// bound, trace, all-ones). Converges to the same point as
/// [`project_constraints`]; used as its reference.
pub fn dykstra_project(p: &SdpProblem, v: &Matrix, passes: usize) -> Matrix {
    let n = p.n();
    let nn = n * n;
    let nf = n as f64;
    let mut x = v.clone();
    let mut incr = vec![vec![0.0; nn]; 4];
    for _ in 0..passes {
        let before = x.clone();
        for (set, inc) in incr.iter_mut().enumerate() {
            let y: Vec<f64> = x.as_slice().iter().zip(inc.iter()).map(|(a, b)| a + b).collect();
            let mut z = y.clone();
            match set {
                0 => {
                    for i in 0..n {
                        let k = i * n + i;
                        z[k] = match p.diag {
                            DiagConstraint::Equal(c) => c,
                            DiagConstraint::UpperBound(c) => z[k].min(c),
                        };
                    }
                }
                1 => {
                    if let Some(l) = p.entry_lower {
                        z.iter_mut().for_each(|e| *e = e.max(l));
                    }
                }
                2 => {
                    if let Some(t) = p.trace {
                        let tr: f64 = (0..n).map(|i| z[i * n + i]).sum();
                        let d = (t - tr) / nf;
                        (0..n).for_each(|i| z[i * n + i] += d);
                    }
                }
                _ => {
                    if let Some(s) = p.total {
                        let d = (s - z.iter().sum::<f64>()) / (nf * nf);
                        z.iter_mut().for_each(|e| *e += d);
                    }
                }
            }
            for k in 0..nn {
                inc[k] = y[k] - z[k];
            }
            x = Matrix::from_vec(n, z);
        }
        if x.frobenius_distance(&before) <= 1e-14 * (1.0 + x.frobenius_norm()) {
            break;
        }
    }
    x
}
