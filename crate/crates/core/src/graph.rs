//! Graphs with a planted balanced two-community labeling, and the
//! combinatorial objectives evaluated on them.
//!
//! Conventions: vertices are 0-based internally; `z` sums over ordered
//! pairs, so every undirected edge contributes twice.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Model configuration: `n` vertices in two halves, intra-community rates
/// `alpha1`, `alpha2` and cross rate `beta`, all on the `log(n)/n` scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: f64,
    pub p1: f64,
    pub p2: f64,
    pub q: f64,
}

impl ModelParams {
    pub fn new(n: usize, alpha1: f64, alpha2: f64, beta: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::invalid(format!("n must be even and >= 4, got {n}")));
        }
        for (name, v) in [("alpha1", alpha1), ("alpha2", alpha2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        // beta = 0 is allowed: it describes two disconnected communities.
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::invalid(format!("beta must be nonnegative, got {beta}")));
        }
        let scale = (n as f64).ln() / n as f64;
        let (p1, p2, q) = (alpha1 * scale, alpha2 * scale, beta * scale);
        if p1 > 1.0 || p2 > 1.0 || q > 1.0 {
            return Err(Error::invalid(format!(
                "derived probabilities exceed 1 (p1={p1}, p2={p2}, q={q}) at n={n}"
            )));
        }
        if !(p1 > q && p2 > q) {
            return Err(Error::invalid(format!(
                "assortative ordering p1 > q and p2 > q violated (p1={p1}, p2={p2}, q={q})"
            )));
        }
        Ok(Self {
            n,
            alpha1,
            alpha2,
            beta,
            p1,
            p2,
            q,
        })
    }

    pub fn log_n(&self) -> f64 {
        (self.n as f64).ln()
    }

    /// Edge probability between two vertices with the given labels.
    pub fn edge_probability(&self, su: i8, sv: i8) -> f64 {
        match (su, sv) {
            (1, 1) => self.p1,
            (-1, -1) => self.p2,
            _ => self.q,
        }
    }
}

/// Which half of the planted partition a vertex lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Community {
    One,
    Two,
}

impl Community {
    pub fn from_sign(s: i8) -> Self {
        if s > 0 {
            Community::One
        } else {
            Community::Two
        }
    }

    pub fn index(self) -> usize {
        match self {
            Community::One => 1,
            Community::Two => 2,
        }
    }
}

/// A balanced `±1` labeling.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Labeling {
    sigma: Vec<i8>,
}

impl Labeling {
    pub fn new(sigma: Vec<i8>) -> Result<Self> {
        if sigma.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::invalid("labeling entries must be +1 or -1"));
        }
        let sum: i64 = sigma.iter().map(|&s| s as i64).sum();
        if sum != 0 {
            return Err(Error::invalid(format!("labeling is unbalanced (sum {sum})")));
        }
        Ok(Self { sigma })
    }

    /// `C1 = {0..n/2}`, `C2 = {n/2..n}`.
    pub fn first_half(n: usize) -> Self {
        let h = n / 2;
        Self {
            sigma: (0..n).map(|i| if i < h { 1 } else { -1 }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn sign(&self, u: usize) -> i8 {
        self.sigma[u]
    }

    pub fn community(&self, u: usize) -> Community {
        Community::from_sign(self.sigma[u])
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.sigma
    }

    /// Vertices of a community in increasing index order.
    pub fn members(&self, c: Community) -> Vec<usize> {
        let want = if c == Community::One { 1 } else { -1 };
        (0..self.sigma.len())
            .filter(|&u| self.sigma[u] == want)
            .collect()
    }

    /// The labeling with the labels of `i` and `j` exchanged.
    pub fn swapped(&self, i: usize, j: usize) -> Self {
        let mut sigma = self.sigma.clone();
        sigma.swap(i, j);
        Self { sigma }
    }

    pub fn flipped(&self) -> Self {
        Self {
            sigma: self.sigma.iter().map(|&s| -s).collect(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.sigma.iter().map(|&s| s as f64).collect()
    }
}

/// Rescaled degree profile `(deg into C1, deg into C2) / log n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub d1: f64,
    pub d2: f64,
}

/// Edge counts per block of the partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCounts {
    pub e1: u64,
    pub e2: u64,
    pub e12: u64,
    /// `C(n/2, 2)`, the number of vertex pairs inside one community.
    pub h: u64,
    /// `(n/2)^2`, the number of cross pairs.
    pub r: u64,
}

impl EdgeCounts {
    pub fn total(&self) -> u64 {
        self.e1 + self.e2 + self.e12
    }
}

/// Simple undirected graph stored as a dense 0/1 adjacency matrix together
/// with its ground-truth labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraph {
    n: usize,
    adj: Vec<u8>,
    truth: Labeling,
}

impl LabeledGraph {
    pub fn empty(truth: Labeling) -> Self {
        let n = truth.len();
        Self {
            n,
            adj: vec![0; n * n],
            truth,
        }
    }

    /// Build from 0-based undirected edges. Duplicate edges are merged.
    pub fn from_edges(truth: Labeling, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(truth);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn from_adjacency(adj: Vec<u8>, truth: Labeling) -> Result<Self> {
        let n = truth.len();
        if adj.len() != n * n {
            return Err(Error::invalid(format!(
                "adjacency has {} entries, expected {}",
                adj.len(),
                n * n
            )));
        }
        for i in 0..n {
            if adj[i * n + i] != 0 {
                return Err(Error::invalid(format!("self loop at vertex {i}")));
            }
            for j in 0..n {
                let a = adj[i * n + j];
                if a > 1 {
                    return Err(Error::invalid("adjacency entries must be 0 or 1"));
                }
                if a != adj[j * n + i] {
                    return Err(Error::invalid(format!("adjacency not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { n, adj, truth })
    }

    pub(crate) fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.n;
        if u >= n || v >= n {
            return Err(Error::invalid(format!("edge ({u},{v}) out of range for n={n}")));
        }
        if u == v {
            return Err(Error::invalid(format!("self loop at vertex {u}")));
        }
        self.adj[u * n + v] = 1;
        self.adj[v * n + u] = 1;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn truth(&self) -> &Labeling {
        &self.truth
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.n + v] != 0
    }

    pub fn row(&self, u: usize) -> &[u8] {
        &self.adj[u * self.n..(u + 1) * self.n]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().filter(|&&a| a != 0).count()
    }

    /// Edges `(u, v)` with `u < v`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            (u + 1..self.n)
                .filter(move |&v| self.has_edge(u, v))
                .map(move |v| (u, v))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&a| a != 0).count() / 2
    }

    pub fn adjacency_matrix(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| self.adj[i * self.n + j] as f64)
    }

    /// Raw neighbor counts of `u` inside the `+1` and `-1` sides of `sigma`.
    pub fn side_degrees(&self, u: usize, sigma: &Labeling) -> (i64, i64) {
        let mut plus = 0;
        let mut minus = 0;
        for (l, &a) in self.row(u).iter().enumerate() {
            if a != 0 {
                if sigma.sign(l) > 0 {
                    plus += 1;
                } else {
                    minus += 1;
                }
            }
        }
        (plus, minus)
    }

    /// Same graph with a different ground truth.
    pub fn with_truth(&self, truth: Labeling) -> Result<Self> {
        if truth.len() != self.n {
            return Err(Error::invalid("labeling length does not match graph"));
        }
        Ok(Self {
            n: self.n,
            adj: self.adj.clone(),
            truth,
        })
    }

    /// Text format: `n m`, then `m` lines `u v` (1-based, `u < v`), then one
    /// line with the `±1` labels.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.n, self.edge_count())?;
        for (u, v) in self.edges() {
            writeln!(w, "{} {}", u + 1, v + 1)?;
        }
        let labels: Vec<String> = self.truth.as_slice().iter().map(|s| s.to_string()).collect();
        writeln!(w, "{}", labels.join(" "))
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| l.as_ref().map(|s| !s.trim().is_empty()).unwrap_or(true));
        let parse_err = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let io_err = |e: std::io::Error| Error::io("<graph input>", e);

        let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
        let header = header.map_err(io_err)?;
        let mut it = header.split_whitespace();
        let n: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(ln, "expected vertex count"))?;
        let m: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(ln, "expected edge count"))?;

        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, line) = lines.next().ok_or_else(|| parse_err(ln, "truncated edge list"))?;
            let line = line.map_err(io_err)?;
            let mut it = line.split_whitespace();
            let u: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(ln, "bad edge"))?;
            let v: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(ln, "bad edge"))?;
            if u == 0 || v == 0 || u > n || v > n || u >= v {
                return Err(parse_err(ln, "edge endpoints must satisfy 1 <= u < v <= n"));
            }
            edges.push((u - 1, v - 1));
        }

        let (ln, line) = lines.next().ok_or_else(|| parse_err(ln, "missing labeling line"))?;
        let line = line.map_err(io_err)?;
        let sigma: Vec<i8> = line
            .split_whitespace()
            .map(|s| s.parse::<i8>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| parse_err(ln, "labels must be +1 or -1"))?;
        if sigma.len() != n {
            return Err(parse_err(ln, "labeling length differs from n"));
        }
        let truth = Labeling::new(sigma)?;
        Self::from_edges(truth, &edges)
    }
}

fn check_len(g: &LabeledGraph, sigma: &Labeling) -> Result<()> {
    if sigma.len() != g.n() {
        return Err(Error::invalid(format!(
            "labeling length {} does not match n={}",
            sigma.len(),
            g.n()
        )));
    }
    Ok(())
}

/// `z(σ) = Σ_{i,j} A_ij σ(i) σ(j)` over ordered pairs.
pub fn z_objective(g: &LabeledGraph, sigma: &Labeling) -> Result<i64> {
    check_len(g, sigma)?;
    Ok(g
        .edges()
        .map(|(u, v)| 2 * (sigma.sign(u) as i64) * (sigma.sign(v) as i64))
        .sum())
}

/// `s_u = Σ_l A_ul σ(l)`, neighbors on u's `+1` side minus the `-1` side.
pub fn signed_degrees(g: &LabeledGraph, sigma: &Labeling) -> Result<Vec<i64>> {
    check_len(g, sigma)?;
    Ok((0..g.n())
        .map(|u| {
            let (plus, minus) = g.side_degrees(u, sigma);
            plus - minus
        })
        .collect())
}

#[inline]
fn swap_delta_from(s: &[i64], g: &LabeledGraph, i: usize, j: usize) -> i64 {
    // Exchanging labels flips every edge at i and at j except the i-j edge.
    4 * (s[j] - s[i] - 2 * g.has_edge(i, j) as i64)
}

/// `z(σ_{i↔j}) − z(σ)` for `σ(i) = +1`, `σ(j) = −1`, in O(n).
pub fn swap_delta(g: &LabeledGraph, sigma: &Labeling, i: usize, j: usize) -> Result<i64> {
    check_len(g, sigma)?;
    if i >= g.n() || j >= g.n() {
        return Err(Error::invalid("vertex out of range"));
    }
    if sigma.sign(i) != 1 || sigma.sign(j) != -1 {
        return Err(Error::invalid(format!(
            "swap requires sigma({i}) = +1 and sigma({j}) = -1"
        )));
    }
    let (pi, mi) = g.side_degrees(i, sigma);
    let (pj, mj) = g.side_degrees(j, sigma);
    let mut s = vec![0; g.n()];
    s[i] = pi - mi;
    s[j] = pj - mj;
    Ok(swap_delta_from(&s, g, i, j))
}

/// The best single swap relative to `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestSwap {
    pub i: usize,
    pub j: usize,
    pub delta: i64,
}

/// Scans all `(i ∈ +1, j ∈ −1)` pairs using precomputed signed degrees.
/// Ties resolve to the lexicographically smallest pair.
pub fn best_swap(g: &LabeledGraph, sigma: &Labeling) -> Result<BestSwap> {
    let s = signed_degrees(g, sigma)?;
    let plus: Vec<usize> = (0..g.n()).filter(|&u| sigma.sign(u) > 0).collect();
    let minus: Vec<usize> = (0..g.n()).filter(|&u| sigma.sign(u) < 0).collect();
    let mut best = BestSwap {
        i: plus[0],
        j: minus[0],
        delta: i64::MIN,
    };
    for &i in &plus {
        for &j in &minus {
            let d = swap_delta_from(&s, g, i, j);
            if d > best.delta {
                best = BestSwap { i, j, delta: d };
            }
        }
    }
    Ok(best)
}

pub fn degree_profile(g: &LabeledGraph, u: usize) -> Result<DegreeProfile> {
    if u >= g.n() {
        return Err(Error::invalid(format!("vertex {u} out of range")));
    }
    let (c1, c2) = g.side_degrees(u, g.truth());
    let ln = (g.n() as f64).ln();
    Ok(DegreeProfile {
        d1: c1 as f64 / ln,
        d2: c2 as f64 / ln,
    })
}

/// Edge counts with respect to an arbitrary balanced labeling.
pub fn edge_counts_for(g: &LabeledGraph, sigma: &Labeling) -> Result<EdgeCounts> {
    check_len(g, sigma)?;
    let half = (g.n() / 2) as u64;
    let (mut e1, mut e2, mut e12) = (0, 0, 0);
    for (u, v) in g.edges() {
        match (sigma.sign(u), sigma.sign(v)) {
            (1, 1) => e1 += 1,
            (-1, -1) => e2 += 1,
            _ => e12 += 1,
        }
    }
    Ok(EdgeCounts {
        e1,
        e2,
        e12,
        h: half * (half - 1) / 2,
        r: half * half,
    })
}

pub fn edge_counts(g: &LabeledGraph) -> EdgeCounts {
    edge_counts_for(g, g.truth()).expect("truth labeling matches graph size")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lab(v: &[i8]) -> Labeling {
        Labeling::new(v.to_vec()).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(3, 5.0, 5.0, 1.0).is_err());
        assert!(ModelParams::new(2, 5.0, 5.0, 1.0).is_err());
        assert!(ModelParams::new(10, 5.0, 5.0, 6.0).is_err());
        assert!(ModelParams::new(4, 10.0, 2.0, 1.0).is_err()); // p1 > 1
        let p = ModelParams::new(100, 5.0, 4.0, 1.0).unwrap();
        assert!((p.p1 - 5.0 * (100f64).ln() / 100.0).abs() < 1e-15);
        assert!(ModelParams::new(100, 5.0, 4.0, 0.0).is_ok());
    }

    #[test]
    fn labeling_validation() {
        assert!(Labeling::new(vec![1, 1, -1]).is_err());
        assert!(Labeling::new(vec![1, 0, -1, 0]).is_err());
        assert!(Labeling::new(vec![1, -1, 1, -1]).is_ok());
    }

    #[test]
    fn z_examples() {
        let s = lab(&[1, 1, -1, -1]);
        let g = LabeledGraph::empty(s.clone());
        assert_eq!(z_objective(&g, &s).unwrap(), 0);
        let g = LabeledGraph::from_edges(s.clone(), &[(0, 1)]).unwrap();
        assert_eq!(z_objective(&g, &s).unwrap(), 2);
        let g = LabeledGraph::from_edges(s.clone(), &[(0, 2)]).unwrap();
        assert_eq!(z_objective(&g, &s).unwrap(), -2);
        let short = lab(&[1, -1]);
        assert!(z_objective(&g, &short).is_err());
    }

    #[test]
    fn swap_examples() {
        let s = lab(&[1, 1, -1, -1]);
        let g = LabeledGraph::empty(s.clone());
        assert_eq!(swap_delta(&g, &s, 0, 2).unwrap(), 0);
        let g = LabeledGraph::from_edges(s.clone(), &[(0, 1)]).unwrap();
        assert_eq!(swap_delta(&g, &s, 0, 2).unwrap(), -4);
        assert!(swap_delta(&g, &s, 0, 1).is_err());
        assert!(swap_delta(&g, &s, 2, 0).is_err());
    }

    #[test]
    fn degree_profile_examples() {
        let s = lab(&[1, 1, -1, -1]);
        let g = LabeledGraph::from_edges(s, &[(0, 1), (0, 2)]).unwrap();
        let d = degree_profile(&g, 0).unwrap();
        let l4 = 4f64.ln();
        assert!((d.d1 - 1.0 / l4).abs() < 1e-15 && (d.d2 - 1.0 / l4).abs() < 1e-15);
        let d = degree_profile(&g, 3).unwrap();
        assert_eq!((d.d1, d.d2), (0.0, 0.0));
        assert!(degree_profile(&g, 4).is_err());
    }

    #[test]
    fn edge_count_examples() {
        let s = lab(&[1, 1, -1, -1]);
        let e = edge_counts(&LabeledGraph::empty(s.clone()));
        assert_eq!((e.e1, e.e2, e.e12), (0, 0, 0));
        let all: Vec<_> = (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v))).collect();
        let e = edge_counts(&LabeledGraph::from_edges(s, &all).unwrap());
        assert_eq!((e.e1, e.e2, e.e12, e.h, e.r), (1, 1, 4, 1, 4));
    }

    #[test]
    fn adjacency_validation() {
        let s = lab(&[1, -1]);
        assert!(LabeledGraph::from_adjacency(vec![0, 1, 0, 0], s.clone()).is_err());
        assert!(LabeledGraph::from_adjacency(vec![1, 0, 0, 0], s.clone()).is_err());
        assert!(LabeledGraph::from_adjacency(vec![0, 1, 1, 0], s).is_ok());
    }

    #[test]
    fn text_format_parse_errors() {
        let bad = "4 1\n2 1\n1 1 -1 -1\n";
        assert!(matches!(
            LabeledGraph::read_text(bad.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
        let bad = "4 1\n1 2\n1 1 1 -1\n";
        assert!(LabeledGraph::read_text(bad.as_bytes()).is_err());
        let ok = "4 2\n1 2\n3 4\n1 1 -1 -1\n";
        let g = LabeledGraph::read_text(ok.as_bytes()).unwrap();
        assert_eq!(g.edge_count(), 2);
        let mut buf = Vec::new();
        g.write_text(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), ok);
    }
}
