//! The events behind the suboptimality argument, evaluated on one graph.
//!
//! With `s_u = Σ_{ℓ∈C1} A_uℓ − Σ_{ℓ∈C2} A_uℓ`:
//! - `F_i(δ)`, `i ∈ C1`: `s_i ≤ δ log n`
//! - `G_j(ε)`, `j ∈ C2`: `−s_j ≤ −ε log n`
//! - `L`: inside each `T_k` (the first `⌊n/log³n⌋` members of `C_k`) every
//!   vertex has at most one neighbor
//! - `F̄_i(δ)`, `i ∈ T1`: the sum restricted to `C' = C \ T`, plus 1, is `< δ log n`
//! - `Ḡ_j(ε)`, `j ∈ T2`: likewise with `< −ε log n`
//!
//! An exact improving swap needs `s_j − s_i > 2 A_ij`; the bracket form
//! `s_j > s_i` drops the edge between the pair and is what `F ∩ G` implies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{best_swap, signed_degrees, Community, LabeledGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    pub n: usize,
    pub delta: f64,
    pub epsilon: f64,
    /// `|T1| = |T2|`.
    pub t_size: usize,
    /// `⌊n/log³n⌋ < 1`: `L` is taken as true and proxies are skipped.
    pub degenerate: bool,
    pub f_count: usize,
    pub g_count: usize,
    pub any_f: bool,
    pub any_g: bool,
    pub l_holds: bool,
    /// Largest neighbor count inside `T1` and inside `T2`.
    pub l_max_degree: [usize; 2],
    pub fbar_count: usize,
    pub gbar_count: usize,
    pub any_fbar: bool,
    pub any_gbar: bool,
    /// Vertices of `T1 ∪ T2` in `L ∩ F̄ \ F` or `L ∩ Ḡ \ G`; always 0.
    pub containment_violations: usize,
    /// `min_{i∈C1} s_i / log n` and `max_{j∈C2} s_j / log n`.
    pub min_c1_score: f64,
    pub max_c2_score: f64,
    /// Bracket form: `max_j s_j > min_i s_i`.
    pub separation_fails: bool,
    pub best_swap_delta: i64,
    pub improving_swap: bool,
}

fn t_size(n: usize) -> usize {
    let l = (n as f64).ln();
    (n as f64 / (l * l * l)).floor() as usize
}

struct Parts {
    members: [Vec<usize>; 2],
    t: [Vec<usize>; 2],
    in_t: Vec<bool>,
}

fn parts(g: &LabeledGraph) -> Parts {
    let truth = g.truth();
    let members = [truth.members(Community::One), truth.members(Community::Two)];
    let k = t_size(g.n()).min(members[0].len());
    let t = [members[0][..k].to_vec(), members[1][..k].to_vec()];
    let mut in_t = vec![false; g.n()];
    for &u in t.iter().flatten() {
        in_t[u] = true;
    }
    Parts { members, t, in_t }
}

/// `Σ_{ℓ∈C1'} A_uℓ − Σ_{ℓ∈C2'} A_uℓ`.
fn proxy_score(g: &LabeledGraph, p: &Parts, u: usize) -> i64 {
    let truth = g.truth();
    g.row(u)
        .iter()
        .enumerate()
        .filter(|&(l, &a)| a != 0 && !p.in_t[l])
        .map(|(l, _)| truth.sign(l) as i64)
        .sum()
}

fn l_degrees(g: &LabeledGraph, p: &Parts) -> [usize; 2] {
    let mut out = [0; 2];
    for (k, t) in p.t.iter().enumerate() {
        for &u in t {
            let d = t.iter().filter(|&&v| g.has_edge(u, v)).count();
            out[k] = out[k].max(d);
        }
    }
    out
}

pub fn event_scan(g: &LabeledGraph, delta: f64, epsilon: f64) -> Result<EventReport> {
    if !(epsilon > delta) || !delta.is_finite() || !epsilon.is_finite() {
        return Err(Error::invalid(format!(
            "need epsilon > delta, got delta = {delta}, epsilon = {epsilon}"
        )));
    }
    let n = g.n();
    let ln = (n as f64).ln();
    let s = signed_degrees(g, g.truth())?;
    let p = parts(g);
    let [c1, c2] = &p.members;

    let f = |i: usize| s[i] as f64 <= delta * ln;
    let gev = |j: usize| -(s[j] as f64) <= -epsilon * ln;
    let f_count = c1.iter().filter(|&&i| f(i)).count();
    let g_count = c2.iter().filter(|&&j| gev(j)).count();

    let degenerate = p.t[0].is_empty();
    let l_max_degree = l_degrees(g, &p);
    let l_holds = degenerate || l_max_degree.iter().all(|&d| d <= 1);

    let (mut fbar_count, mut gbar_count, mut violations) = (0, 0, 0);
    if !degenerate {
        for &i in &p.t[0] {
            let fb = ((proxy_score(g, &p, i) + 1) as f64) < delta * ln;
            fbar_count += fb as usize;
            violations += (l_holds && fb && !f(i)) as usize;
        }
        for &j in &p.t[1] {
            let gb = ((-proxy_score(g, &p, j) + 1) as f64) < -epsilon * ln;
            gbar_count += gb as usize;
            violations += (l_holds && gb && !gev(j)) as usize;
        }
    }

    let min_c1 = c1.iter().map(|&i| s[i]).min().unwrap_or(0);
    let max_c2 = c2.iter().map(|&j| s[j]).max().unwrap_or(0);
    let best = best_swap(g, g.truth())?;
    Ok(EventReport {
        n,
        delta,
        epsilon,
        t_size: p.t[0].len(),
        degenerate,
        f_count,
        g_count,
        any_f: f_count > 0,
        any_g: g_count > 0,
        l_holds,
        l_max_degree,
        fbar_count,
        gbar_count,
        any_fbar: fbar_count > 0,
        any_gbar: gbar_count > 0,
        containment_violations: violations,
        min_c1_score: min_c1 as f64 / ln,
        max_c2_score: max_c2 as f64 / ln,
        separation_fails: max_c2 > min_c1,
        best_swap_delta: best.delta,
        improving_swap: best.delta > 0,
    })
}

/// Vertices where the proxy misses the original event on `L`: `i ∈ T1` in
/// `F_i(δ) \ F̄_i(δ′)` and `j ∈ T2` in `G_j(ε) \ Ḡ_j(ε′)`. Zero when `L`
/// fails, since the comparison is conditional on `L`.
pub fn lemma2_violations(
    g: &LabeledGraph,
    (delta, delta_prime): (f64, f64),
    (epsilon, epsilon_prime): (f64, f64),
) -> Result<[usize; 2]> {
    if !(delta_prime > delta && epsilon_prime < epsilon) {
        return Err(Error::invalid("need delta' > delta and epsilon' < epsilon"));
    }
    let ln = (g.n() as f64).ln();
    let s = signed_degrees(g, g.truth())?;
    let p = parts(g);
    if p.t[0].is_empty() || l_degrees(g, &p).iter().any(|&d| d > 1) {
        return Ok([0, 0]);
    }
    let f_miss = p.t[0]
        .iter()
        .filter(|&&i| {
            let f = s[i] as f64 <= delta * ln;
            let fb = ((proxy_score(g, &p, i) + 1) as f64) < delta_prime * ln;
            f && !fb
        })
        .count();
    let g_miss = p.t[1]
        .iter()
        .filter(|&&j| {
            let gv = -(s[j] as f64) <= -epsilon * ln;
            let gb = ((-proxy_score(g, &p, j) + 1) as f64) < -epsilon_prime * ln;
            gv && !gb
        })
        .count();
    Ok([f_miss, g_miss])
}
