//! Information-theoretic threshold and degree-profile geometry.

mod cloud;
mod events;
mod genie;

pub use cloud::{
    cloud_boundary, cloud_exponent, cloud_extreme, cloud_extreme_at_level, find_witness,
    witness_region, CloudExtreme, CloudPoint, RegionClass, RegionRaster, WitnessPair,
    CLOUD_LEVEL,
};
pub use events::{event_scan, lemma2_violations, EventReport};
pub use genie::{genie_asym, genie_asym_statistic, genie_sym};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ModelParams;

/// Rate coefficients `(α1, α2, β)` without a vertex count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: f64,
}

impl Rates {
    pub fn new(alpha1: f64, alpha2: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("alpha1", alpha1), ("alpha2", alpha2), ("beta", beta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            alpha1,
            alpha2,
            beta,
        })
    }

    pub fn from_params(p: &ModelParams) -> Result<Self> {
        Self::new(p.alpha1, p.alpha2, p.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ITEvaluation {
    pub value: f64,
    pub argmax_t: f64,
}

const IT_GRID: usize = 1001;
const IT_T_TOL: f64 = 1e-10;

fn it_objective(t: f64, a1: f64, a2: f64, b: f64) -> f64 {
    0.5 * (t * a1 + (1.0 - t) * a2 + b - b.powf(t) * a2.powf(1.0 - t) - b.powf(1.0 - t) * a1.powf(t))
}

/// `sup_{t∈[0,1]} ½[tα1 + (1−t)α2 + β − β^t α2^{1−t} − β^{1−t} α1^t]`.
///
/// A 1001-point grid locates the bracket; golden-section search then
/// refines `t` to width `1e-10`. The objective is concave in `t`.
pub fn it_value(alpha1: f64, alpha2: f64, beta: f64) -> Result<ITEvaluation> {
    let r = Rates::new(alpha1, alpha2, beta)?;
    let f = |t: f64| it_objective(t, r.alpha1, r.alpha2, r.beta);

    let step = 1.0 / (IT_GRID - 1) as f64;
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for k in 0..IT_GRID {
        let v = f(k as f64 * step);
        if v > best_val {
            best_val = v;
            best = k;
        }
    }
    let mut lo = best.saturating_sub(1) as f64 * step;
    let mut hi = ((best + 1).min(IT_GRID - 1)) as f64 * step;

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > IT_T_TOL {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let mut t = 0.5 * (lo + hi);
    let mut value = f(t);
    // Endpoints of the grid bracket can beat the interior point when the
    // maximum sits on t = 0 or t = 1.
    for cand in [lo, hi, best as f64 * step] {
        let v = f(cand);
        if v > value {
            value = v;
            t = cand;
        }
    }
    Ok(ITEvaluation {
        value: value.max(0.0),
        argmax_t: t,
    })
}

/// Accuracy required of the located boundary: `|IT − 1|`.
pub const BOUNDARY_TOL: f64 = 1e-8;

fn bisect_to_unit_it(mut lo: f64, mut hi: f64, it: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    // Invariant: it(lo) < 1 <= it(hi).
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if it(mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (vl, vh) = ((it(lo)? - 1.0).abs(), (it(hi)? - 1.0).abs());
    let (root, err) = if vl < vh { (lo, vl) } else { (hi, vh) };
    if err > BOUNDARY_TOL {
        return Err(Error::NoRoot(format!(
            "bisection stalled with |IT-1| = {err:e} at {root}"
        )));
    }
    Ok(root)
}

fn expand_bracket(start: f64, it: &impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    if it(start)? >= 1.0 {
        return Err(Error::NoRoot(format!(
            "IT already >= 1 at the lower end of the bracket ({start})"
        )));
    }
    let mut lo = start;
    let mut hi = start.max(1.0) * 2.0;
    while it(hi)? < 1.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::NoRoot("no IT = 1 crossing below 1e9".into()));
        }
    }
    Ok((lo, hi))
}

/// The `α1 > β` with `IT(α1, α2, β) = 1`, by bisection.
pub fn boundary_alpha(beta: f64, alpha2: f64) -> Result<f64> {
    Rates::new(1.0, alpha2, beta)?;
    let it = |a: f64| it_value(a, alpha2, beta).map(|e| e.value);
    let (lo, hi) = expand_bracket(beta, &it)?;
    bisect_to_unit_it(lo, hi, it)
}

/// The `α > β` with `IT(α, α, β) = 1`.
pub fn boundary_alpha_symmetric(beta: f64) -> Result<f64> {
    Rates::new(1.0, 1.0, beta)?;
    let it = |a: f64| it_value(a, a, beta).map(|e| e.value);
    let (lo, hi) = expand_bracket(beta, &it)?;
    bisect_to_unit_it(lo, hi, it)
}

/// Scale `(α1, α2)` by `s` (β fixed) so that `IT(sα1, sα2, β) = target`.
/// Requires both rates to stay above `β` along the ray.
pub fn scale_to_it(alpha1: f64, alpha2: f64, beta: f64, target: f64) -> Result<Rates> {
    Rates::new(alpha1, alpha2, beta)?;
    if !(target > 0.0) {
        return Err(Error::invalid("target IT must be positive"));
    }
    let it = |s: f64| it_value(s * alpha1, s * alpha2, beta).map(|e| e.value / target);
    let s0 = beta / alpha1.min(alpha2);
    let (lo, hi) = expand_bracket(s0, &it)?;
    let s = bisect_to_unit_it(lo, hi, it)?;
    Rates::new(s * alpha1, s * alpha2, beta)
}
