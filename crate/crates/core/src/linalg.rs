//! Dense square matrices and symmetric eigendecompositions.
//!
//! Two eigensolvers live here. `jacobi_eigen` is a cyclic Jacobi solver
//! used for small matrices and as the reference in tests; larger matrices
//! go through faer's tridiagonal solver, which is what makes the repeated
//! cone projections inside the SDP solver affordable. Both return
//! eigenvalues in nondecreasing order with eigenvectors as columns.

use std::ops::{Index, IndexMut};

/// Matrices at or below this order use the Jacobi solver.
pub const JACOBI_MAX_ORDER: usize = 48;

/// Off-diagonal Frobenius norm, relative to the input norm, at which Jacobi
/// sweeps stop.
pub const JACOBI_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 100;

/// Square `n × n` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "matrix data length");
        Self { n, data }
    }

    /// `v vᵀ`.
    pub fn outer(v: &[f64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.n + i]).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    /// `⟨J, M⟩`, the sum of all entries.
    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    /// `⟨self, other⟩ = tr(self · other)` for symmetric arguments.
    pub fn inner(&self, other: &Matrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn frobenius_distance(&self, other: &Matrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `xᵀ M x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        Matrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Largest `|M_ij − M_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i]).abs());
            }
        }
        worst
    }

    /// Replace `M` by `(M + Mᵀ)/2` in place.
    pub fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = v;
                self.data[j * n + i] = v;
            }
        }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.n + j]).collect()
    }

    fn to_faer(&self) -> faer::Mat<f64> {
        faer::Mat::from_fn(self.n, self.n, |i, j| self.data[i * self.n + j])
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigenvalues in nondecreasing order with matching unit eigenvectors stored
/// as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    /// `Σ_k f(λ_k) v_k v_kᵀ` over the eigenpairs with `f(λ_k) != 0`.
    pub fn reconstruct(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let kept: Vec<(usize, f64)> = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &l)| (k, f(l)))
            .filter(|&(_, w)| w != 0.0)
            .collect();
        if kept.is_empty() {
            return Matrix::zeros(n);
        }
        // (V D^{1/2}) (V D^{1/2})ᵀ for nonnegative weights; signed weights
        // fall back to V D Vᵀ.
        let nonneg = kept.iter().all(|&(_, w)| w > 0.0);
        let r = kept.len();
        let left = faer::Mat::from_fn(n, r, |i, c| {
            let (k, w) = kept[c];
            let scale = if nonneg { w.sqrt() } else { w };
            self.vectors[(i, k)] * scale
        });
        let right = faer::Mat::from_fn(n, r, |i, c| {
            let (k, w) = kept[c];
            let scale = if nonneg { w.sqrt() } else { 1.0 };
            self.vectors[(i, k)] * scale
        });
        let prod = &left * right.transpose();
        let mut out = Matrix::from_fn(n, |i, j| prod[(i, j)]);
        out.symmetrize();
        out
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
pub fn jacobi_eigen(m: &Matrix) -> SymEigen {
    let n = m.n();
    let mut a = m.clone();
    a.symmetrize();
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A <- A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                // A <- Jᵀ A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    SymEigen {
        values: order.iter().map(|&k| a[(k, k)]).collect(),
        vectors: Matrix::from_fn(n, |i, c| v[(i, order[c])]),
    }
}

fn faer_eigen(m: &Matrix) -> SymEigen {
    let n = m.n();
    let evd = m
        .to_faer()
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("symmetric eigendecomposition converges for finite input");
    let s = evd.S().column_vector();
    let u = evd.U();
    SymEigen {
        values: (0..n).map(|k| s[k]).collect(),
        vectors: Matrix::from_fn(n, |i, k| u[(i, k)]),
    }
}

/// Full symmetric eigendecomposition; Jacobi for small orders.
pub fn sym_eigen(m: &Matrix) -> SymEigen {
    if m.n() <= JACOBI_MAX_ORDER {
        jacobi_eigen(m)
    } else {
        faer_eigen(m)
    }
}

/// Eigenvalues only, nondecreasing.
pub fn sym_eigenvalues(m: &Matrix) -> Vec<f64> {
    if m.n() <= JACOBI_MAX_ORDER {
        jacobi_eigen(m).values
    } else {
        m.to_faer()
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .expect("symmetric eigenvalues converge for finite input")
    }
}

/// Spectral norm `max |λ|` of a symmetric matrix.
pub fn spectral_norm(m: &Matrix) -> f64 {
    let vals = sym_eigenvalues(m);
    match (vals.first(), vals.last()) {
        (Some(lo), Some(hi)) => lo.abs().max(hi.abs()),
        _ => 0.0,
    }
}

/// Frobenius-nearest PSD matrix: clamp negative eigenvalues to zero.
pub fn project_psd(m: &Matrix) -> Matrix {
    if m.n() == 0 {
        return m.clone();
    }
    sym_eigen(m).reconstruct(|l| l.max(0.0))
}
