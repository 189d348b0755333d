//! Degree-profile clouds and the witness condition.
//!
//! A vertex of community 1 has rescaled degree profile `(x, y)` with
//! probability `n^{e1(x, y) + o(1)}`, where
//! `e1 = −(α1+β)/2 + x log(α1 e/(2x)) + y log(β e/(2y))`; community 2 uses
//! rates `(β, α2)`. The cloud of a community is `{e > −1}`.
//!
//! Extremes of `x − y` over a cloud have a closed parametrization. The
//! Lagrange condition for a linear functional forces `xy = rx·ry/4`, so
//! write `x = g e^{−u}`, `y = g e^{u}` with `g = √(rx ry)/2` and
//! `L = ½ log(rx/ry)`. Along that curve
//!
//! ```text
//! e(u) = −(rx+ry)/2 + g[e^{−u}(1 + L + u) + e^{u}(1 − L − u)]
//! ```
//!
//! which peaks at 0 for `u = −L` (the Poisson mean) and falls off to −∞ on
//! both sides, while `x − y = −2g sinh u` is decreasing. The minimum of
//! `x − y` over the cloud is the root with `u > −L`, the maximum the root
//! with `u < −L`. Clouds are convex, so these stationary points are global.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{it_value, Rates};
use crate::error::{Error, Result};
use crate::graph::Community;

/// Cloud membership level: `e > CLOUD_LEVEL`.
pub const CLOUD_LEVEL: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloudPoint {
    pub x: f64,
    pub y: f64,
    pub exponent: f64,
}

impl CloudPoint {
    /// Strict membership with an optional slack below the level.
    pub fn in_cloud(&self, slack: f64) -> bool {
        self.exponent > CLOUD_LEVEL - slack
    }
}

fn rates_of(c: Community, r: &Rates) -> (f64, f64) {
    match c {
        Community::One => (r.alpha1, r.beta),
        Community::Two => (r.beta, r.alpha2),
    }
}

/// `x log(r e/(2x))`, with the continuous value 0 at `x = 0`.
fn xlog(x: f64, rate: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (rate * std::f64::consts::E / (2.0 * x)).ln()
    }
}

fn exponent_raw(rx: f64, ry: f64, x: f64, y: f64) -> f64 {
    -(rx + ry) / 2.0 + xlog(x, rx) + xlog(y, ry)
}

pub fn cloud_exponent(c: Community, x: f64, y: f64, r: &Rates) -> Result<f64> {
    if !(x >= 0.0 && y >= 0.0 && x.is_finite() && y.is_finite()) {
        return Err(Error::invalid(format!(
            "degree profile must be nonnegative, got ({x}, {y})"
        )));
    }
    let (rx, ry) = rates_of(c, r);
    Ok(exponent_raw(rx, ry, x, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloudExtreme {
    pub point: CloudPoint,
    /// `x − y` at the point.
    pub value: f64,
    /// `|log(rx/(2x)) + log(ry/(2y))|`, zero at a stationary point.
    pub lagrange_residual: f64,
}

struct Curve {
    rx: f64,
    ry: f64,
    g: f64,
    l: f64,
}

impl Curve {
    fn new(rx: f64, ry: f64) -> Self {
        Self {
            rx,
            ry,
            g: (rx * ry).sqrt() / 2.0,
            l: 0.5 * (rx / ry).ln(),
        }
    }

    fn point(&self, u: f64) -> (f64, f64) {
        (self.g * (-u).exp(), self.g * u.exp())
    }

    fn exponent(&self, u: f64) -> f64 {
        let (x, y) = self.point(u);
        exponent_raw(self.rx, self.ry, x, y)
    }

    /// Root of `e(u) = level` on the side `dir = ±1` of the peak.
    fn root(&self, level: f64, dir: f64) -> f64 {
        let peak = -self.l;
        let mut w = 1.0;
        while self.exponent(peak + dir * w) >= level {
            w *= 2.0;
        }
        let (mut inside, mut outside) = (0.0, w);
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if mid <= inside || mid >= outside {
                break;
            }
            if self.exponent(peak + dir * mid) >= level {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        peak + dir * inside
    }
}

/// Extreme of `x − y` over `{e ≥ level}`: the minimum for community 1 and
/// the maximum for community 2.
pub fn cloud_extreme_at_level(c: Community, r: &Rates, level: f64) -> Result<CloudExtreme> {
    if !(level < 0.0 && level.is_finite()) {
        return Err(Error::invalid(format!(
            "cloud level must be negative, got {level}"
        )));
    }
    let (rx, ry) = rates_of(c, r);
    let curve = Curve::new(rx, ry);
    let dir = match c {
        Community::One => 1.0,
        Community::Two => -1.0,
    };
    let u = curve.root(level, dir);
    let (x, y) = curve.point(u);
    Ok(CloudExtreme {
        point: CloudPoint {
            x,
            y,
            exponent: exponent_raw(rx, ry, x, y),
        },
        value: x - y,
        lagrange_residual: ((rx / (2.0 * x)).ln() + (ry / (2.0 * y)).ln()).abs(),
    })
}

pub fn cloud_extreme(c: Community, r: &Rates) -> Result<CloudExtreme> {
    cloud_extreme_at_level(c, r, CLOUD_LEVEL)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessPair {
    pub p1: CloudPoint,
    pub p2: CloudPoint,
    /// `(y1 − y2)/(x1 − x2)`; `+∞` when `x1 = x2`.
    pub slope: f64,
    /// `(x2 − y2) − (x1 − y1)`, positive for a witness.
    pub gap: f64,
    /// Event parameters at the ⅓ and ⅔ points of `[x1 − y1, x2 − y2]`.
    pub delta: f64,
    pub epsilon: f64,
}

/// The extremal pair, if `max_{C2}(x − y) > min_{C1}(x − y)`.
pub fn find_witness(r: &Rates) -> Result<Option<WitnessPair>> {
    let e1 = cloud_extreme(Community::One, r)?;
    let e2 = cloud_extreme(Community::Two, r)?;
    let gap = e2.value - e1.value;
    if !(gap > 0.0) {
        return Ok(None);
    }
    let (p1, p2) = (e1.point, e2.point);
    let slope = if p1.x == p2.x {
        f64::INFINITY
    } else {
        (p1.y - p2.y) / (p1.x - p2.x)
    };
    Ok(Some(WitnessPair {
        p1,
        p2,
        slope,
        gap,
        delta: e1.value + gap / 3.0,
        epsilon: e1.value + 2.0 * gap / 3.0,
    }))
}

/// Level set `{e = level}` traced along `points` rays from the Poisson
/// mean. Rays that leave the quadrant before reaching the level stop on
/// the axis.
pub fn cloud_boundary(c: Community, r: &Rates, level: f64, points: usize) -> Result<Vec<CloudPoint>> {
    if points < 3 {
        return Err(Error::invalid("a boundary polyline needs at least 3 points"));
    }
    if !(level < 0.0 && level.is_finite()) {
        return Err(Error::invalid("cloud level must be negative"));
    }
    let (rx, ry) = rates_of(c, r);
    let (mx, my) = (rx / 2.0, ry / 2.0);
    let e = |t: f64, dx: f64, dy: f64| exponent_raw(rx, ry, (mx + t * dx).max(0.0), (my + t * dy).max(0.0));
    let mut out = Vec::with_capacity(points);
    for k in 0..points {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / points as f64;
        let (dx, dy) = (theta.cos(), theta.sin());
        let mut limit = f64::INFINITY;
        if dx < 0.0 {
            limit = limit.min(mx / -dx);
        }
        if dy < 0.0 {
            limit = limit.min(my / -dy);
        }
        // e is concave with its maximum at the mean: nonincreasing along
        // the ray.
        let t = if limit.is_finite() && e(limit, dx, dy) >= level {
            limit
        } else {
            let mut hi = if limit.is_finite() { limit } else { 1.0 };
            while !limit.is_finite() && e(hi, dx, dy) >= level {
                hi *= 2.0;
            }
            let mut lo = 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if e(mid, dx, dy) >= level {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        let (x, y) = ((mx + t * dx).max(0.0), (my + t * dy).max(0.0));
        out.push(CloudPoint {
            x,
            y,
            exponent: exponent_raw(rx, ry, x, y),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionClass {
    Infeasible,
    FeasibleNoWitness,
    FeasibleWitness,
}

impl RegionClass {
    pub fn name(self) -> &'static str {
        match self {
            RegionClass::Infeasible => "infeasible",
            RegionClass::FeasibleNoWitness => "feasible_no_witness",
            RegionClass::FeasibleWitness => "feasible_witness",
        }
    }
}

/// Classification of an `(α1, α2)` grid at fixed `β`. Cell `(i, j)` sits at
/// `(alpha1[i], alpha2[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRaster {
    pub beta: f64,
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub classes: Vec<RegionClass>,
    pub it: Vec<f64>,
}

impl RegionRaster {
    pub fn get(&self, i: usize, j: usize) -> RegionClass {
        self.classes[i * self.alpha2.len() + j]
    }

    /// Index of the grid point nearest to `(a1, a2)`.
    pub fn nearest(&self, a1: f64, a2: f64) -> (usize, usize) {
        let near = |axis: &[f64], v: f64| {
            (0..axis.len())
                .min_by(|&a, &b| (axis[a] - v).abs().total_cmp(&(axis[b] - v).abs()))
                .unwrap_or(0)
        };
        (near(&self.alpha1, a1), near(&self.alpha2, a2))
    }

    /// CSV with header `alpha1,alpha2,it,class`, one row per cell.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "alpha1,alpha2,it,class")?;
        for (i, a1) in self.alpha1.iter().enumerate() {
            for (j, a2) in self.alpha2.iter().enumerate() {
                let k = i * self.alpha2.len() + j;
                writeln!(w, "{a1},{a2},{},{}", self.it[k], self.classes[k].name())?;
            }
        }
        Ok(())
    }
}

fn axis(range: (f64, f64), res: usize) -> Vec<f64> {
    let (lo, hi) = range;
    (0..res)
        .map(|k| lo + (hi - lo) * k as f64 / (res - 1) as f64)
        .collect()
}

/// Classify each grid point: infeasible below `IT = 1`, otherwise by
/// whether [`find_witness`] succeeds.
pub fn witness_region(
    beta: f64,
    a1_range: (f64, f64),
    a2_range: (f64, f64),
    resolution: (usize, usize),
) -> Result<RegionRaster> {
    if resolution.0 < 2 || resolution.1 < 2 {
        return Err(Error::invalid("resolution must be at least 2 per axis"));
    }
    for (lo, hi) in [a1_range, a2_range] {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::invalid(format!("bad range [{lo}, {hi}]")));
        }
    }
    Rates::new(1.0, 1.0, beta)?;
    let alpha1 = axis(a1_range, resolution.0);
    let alpha2 = axis(a2_range, resolution.1);
    let cells: Vec<(f64, f64)> = alpha1
        .iter()
        .flat_map(|&a| alpha2.iter().map(move |&b| (a, b)))
        .collect();
    let out: Vec<(RegionClass, f64)> = cells
        .par_iter()
        .map(|&(a1, a2)| -> Result<(RegionClass, f64)> {
            let r = Rates::new(a1, a2, beta)?;
            let it = it_value(a1, a2, beta)?.value;
            let class = if it < 1.0 {
                RegionClass::Infeasible
            } else if find_witness(&r)?.is_some() {
                RegionClass::FeasibleWitness
            } else {
                RegionClass::FeasibleNoWitness
            };
            Ok((class, it))
        })
        .collect::<Result<_>>()?;
    Ok(RegionRaster {
        beta,
        alpha1,
        alpha2,
        classes: out.iter().map(|c| c.0).collect(),
        it: out.iter().map(|c| c.1).collect(),
    })
}
