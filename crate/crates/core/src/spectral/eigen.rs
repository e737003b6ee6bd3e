//! Largest eigenvalues of symmetric operators.
//!
//! Small problems go through a dense symmetric eigendecomposition. Larger
//! ones use a Krylov method that touches the operator only through
//! matrix–vector products: Lanczos vectors are generated with full
//! reorthogonalization, Ritz pairs come from an explicit Rayleigh–Ritz
//! projection of the whole basis, and convergence is judged on true
//! residual norms. Once the wanted Ritz values have converged a fresh random
//! direction is appended and the projection redone; this catches copies of
//! repeated eigenvalues that a single Krylov sequence cannot see.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;

use super::SymmetricLaplacian;

/// Symmetric linear operator accessed by products only.
pub trait SymmetricOperator<S> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[S]) -> Vec<S>;
}

impl<S: Scalar> SymmetricOperator<S> for CsrMatrix<S> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[S]) -> Vec<S> {
        self.mul_vec(x)
    }
}

impl<S: Scalar> SymmetricOperator<S> for SymmetricLaplacian<S> {
    fn dim(&self) -> usize {
        SymmetricLaplacian::dim(self)
    }

    fn apply(&self, x: &[S]) -> Vec<S> {
        self.matrix().mul_vec(x)
    }
}

impl<S: Scalar> SymmetricOperator<S> for DMatrix<S> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[S]) -> Vec<S> {
        (0..self.nrows())
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(S::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenMethod {
    /// Dense up to `dense_max_dim`, Krylov above.
    #[default]
    Auto,
    Dense,
    Krylov,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions<S> {
    pub method: EigenMethod,
    pub dense_max_dim: usize,
    /// Ritz pairs are accepted once ‖Ay − θy‖ ≤ tol · max|θ|.
    pub tol: S,
    /// Seed of the random starting and restart vectors.
    pub seed: u64,
}

impl<S: Scalar> Default for EigenOptions<S> {
    fn default() -> Self {
        let floor = S::EPSILON * S::lit(1000.0);
        let target = S::lit(1e-10);
        Self {
            method: EigenMethod::Auto,
            dense_max_dim: 500,
            tol: if floor > target { floor } else { target },
            seed: 0x5eed_1a9c,
        }
    }
}

/// The `min(k, dim)` largest eigenvalues of `l`, in descending order.
pub fn top_k_eigenvalues<S: Scalar>(l: &SymmetricLaplacian<S>, k: usize) -> Result<Vec<S>> {
    top_k_eigenvalues_with(l, k, &EigenOptions::default())
}

pub fn top_k_eigenvalues_with<S: Scalar, Op: SymmetricOperator<S> + ?Sized>(
    op: &Op,
    k: usize,
    opts: &EigenOptions<S>,
) -> Result<Vec<S>> {
    let n = op.dim();
    let k = k.min(n);
    if k == 0 {
        return Ok(Vec::new());
    }
    let dense = match opts.method {
        EigenMethod::Dense => true,
        EigenMethod::Krylov => false,
        EigenMethod::Auto => n <= opts.dense_max_dim,
    };
    if dense {
        Ok(dense_top_k(op, k))
    } else {
        krylov_top_k(op, k, opts)
    }
}

fn dense_top_k<S: Scalar, Op: SymmetricOperator<S> + ?Sized>(op: &Op, k: usize) -> Vec<S> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut unit = vec![S::zero(); n];
    for j in 0..n {
        unit[j] = S::one();
        for (i, v) in op.apply(&unit).into_iter().enumerate() {
            m[(i, j)] = v;
        }
        unit[j] = S::zero();
    }
    // symmetrize away round-off from a non-exactly-symmetric operator
    let m = (&m + m.transpose()) * S::lit(0.5);
    let mut eig: Vec<S> = m.symmetric_eigenvalues().iter().copied().collect();
    sort_desc(&mut eig);
    eig.truncate(k);
    eig
}

fn sort_desc<S: Scalar>(v: &mut [S]) {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

fn norm<S: Scalar>(a: &[S]) -> S {
    dot(a, a).sqrt()
}

struct KrylovBasis<'a, S, Op: ?Sized> {
    op: &'a Op,
    q: Vec<Vec<S>>,
    aq: Vec<Vec<S>>,
    /// Upper triangle of QᵀAQ, column by column.
    h: Vec<Vec<S>>,
    rng: ChaCha8Rng,
}

impl<S: Scalar, Op: SymmetricOperator<S> + ?Sized> KrylovBasis<'_, S, Op> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn len(&self) -> usize {
        self.q.len()
    }

    fn random_vector(&mut self) -> Vec<S> {
        (0..self.dim())
            .map(|_| S::lit(self.rng.random::<f64>() - 0.5))
            .collect()
    }

    /// Orthogonalize against the basis (two Gram–Schmidt passes) and append.
    /// Returns false when the candidate lies in the span already.
    fn push(&mut self, mut v: Vec<S>) -> bool {
        let original = norm(&v);
        if original == S::zero() {
            return false;
        }
        for _ in 0..2 {
            for qi in &self.q {
                let c = dot(qi, &v);
                v.iter_mut().zip(qi).for_each(|(x, &y)| *x -= c * y);
            }
        }
        let remaining = norm(&v);
        if remaining <= original * S::EPSILON.sqrt() {
            return false;
        }
        v.iter_mut().for_each(|x| *x /= remaining);
        let av = self.op.apply(&v);
        let col: Vec<S> = self
            .q
            .iter()
            .map(|qi| dot(qi, &av))
            .chain(std::iter::once(dot(&v, &av)))
            .collect();
        self.q.push(v);
        self.aq.push(av);
        self.h.push(col);
        true
    }

    /// Next Lanczos direction, or a random one after a breakdown or when
    /// `fresh` is requested.
    fn extend(&mut self, fresh: bool) -> bool {
        if self.len() >= self.dim() {
            return false;
        }
        if !fresh && !self.q.is_empty() {
            let candidate = self.aq.last().unwrap().clone();
            if self.push(candidate) {
                return true;
            }
        }
        for _ in 0..8 {
            let candidate = self.random_vector();
            if self.push(candidate) {
                return true;
            }
        }
        false
    }

    /// Top-k Ritz values (descending), their residual norms and the
    /// largest |θ| over all Ritz values.
    fn ritz(&self, k: usize) -> (Vec<S>, Vec<S>, S) {
        let m = self.len();
        let mut hm = DMatrix::zeros(m, m);
        for (j, col) in self.h.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                hm[(i, j)] = v;
                hm[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(hm);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .partial_cmp(&eig.eigenvalues[a])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let scale = eig
            .eigenvalues
            .iter()
            .fold(S::zero(), |acc, &x| acc.max(x.abs()));
        let n = self.dim();
        let mut values = Vec::with_capacity(k);
        let mut residuals = Vec::with_capacity(k);
        for &idx in order.iter().take(k) {
            let theta = eig.eigenvalues[idx];
            let s = eig.eigenvectors.column(idx);
            let mut r = vec![S::zero(); n];
            for (j, &sj) in s.iter().enumerate() {
                let (qj, aqj) = (&self.q[j], &self.aq[j]);
                for i in 0..n {
                    r[i] += sj * (aqj[i] - theta * qj[i]);
                }
            }
            values.push(theta);
            residuals.push(norm(&r));
        }
        (values, residuals, scale)
    }
}

fn krylov_top_k<S: Scalar, Op: SymmetricOperator<S> + ?Sized>(
    op: &Op,
    k: usize,
    opts: &EigenOptions<S>,
) -> Result<Vec<S>> {
    let n = op.dim();
    let mut basis = KrylovBasis {
        op,
        q: Vec::new(),
        aq: Vec::new(),
        h: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
    };
    let probe_len = (k / 4).max(8);
    let mut target = n.min((2 * k + 20).max(40));
    let mut previous: Option<Vec<S>> = None;
    let mut fresh = true;
    loop {
        while basis.len() < target {
            if !basis.extend(fresh) {
                break;
            }
            fresh = false;
        }
        let exhausted = basis.len() >= n || basis.len() < target;
        let (values, residuals, scale) = basis.ritz(k);
        let tiny = if scale > S::zero() { scale } else { S::one() };
        let worst = residuals.iter().fold(S::zero(), |acc, &r| acc.max(r));
        let converged = worst <= opts.tol * tiny;

        if converged && exhausted {
            return Ok(values);
        }
        if converged {
            let stable = previous.as_ref().is_some_and(|prev| {
                prev.iter()
                    .zip(&values)
                    .all(|(&a, &b)| (a - b).abs() <= opts.tol * tiny)
            });
            if stable {
                return Ok(values);
            }
            previous = Some(values);
            fresh = true;
            target = n.min(basis.len() + probe_len);
            continue;
        }
        if exhausted {
            return Err(Error::Convergence {
                what: "Krylov eigensolver",
                iterations: basis.len(),
                residual: worst.as_f64(),
            });
        }
        previous = None;
        target = n.min(basis.len() + (basis.len() / 2).max(20));
    }
}
