use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::reduction::RowStochasticMatrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationaryMethod {
    LazyPower,
    DenseSolve,
}

#[derive(Debug, Clone)]
pub struct StationaryDistribution<S> {
    probs: Vec<S>,
    residual: S,
    iterations: usize,
    method: StationaryMethod,
}

impl<S: Scalar> StationaryDistribution<S> {
    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// ‖φP − φ‖₁ at acceptance.
    pub fn residual(&self) -> S {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn method(&self) -> StationaryMethod {
        self.method
    }
}

#[derive(Debug, Clone)]
pub struct StationaryOptions<S> {
    /// L1 residual at which the lazy iteration stops.
    pub tol: S,
    /// Iteration cap as a multiple of the dimension.
    pub iterations_per_node: usize,
    /// Largest dimension for which the dense solve fallback is attempted.
    pub dense_fallback_max_dim: usize,
}

impl<S: Scalar> Default for StationaryOptions<S> {
    fn default() -> Self {
        Self {
            tol: S::solver_tol(),
            iterations_per_node: 100,
            dense_fallback_max_dim: 2000,
        }
    }
}

fn l1_residual<S: Scalar>(p: &RowStochasticMatrix<S>, x: &[S]) -> (Vec<S>, S) {
    let xp = p.matrix().vec_mul(x);
    let r = xp
        .iter()
        .zip(x)
        .fold(S::zero(), |acc, (&a, &b)| acc + (a - b).abs());
    (xp, r)
}

/// Largest residual accepted on any returned distribution.
fn accept_tol<S: Scalar>(dim: usize) -> S {
    let floor = S::EPSILON * S::from_count(16 * dim.max(1));
    let target = S::lit(1e-10);
    if floor > target {
        floor
    } else {
        target
    }
}

pub fn stationary_distribution<S: Scalar>(p: &RowStochasticMatrix<S>) -> Result<StationaryDistribution<S>> {
    stationary_distribution_with(p, &StationaryOptions::default())
}

/// Stationary vector φ with φP = φ. Iterates the lazy chain (P + I)/2,
/// which shares P's fixed points but is aperiodic (the gadget walk is
/// 3-periodic when all weights are one). Falls back to a dense solve when
/// the iteration cap is reached on small inputs.
pub fn stationary_distribution_with<S: Scalar>(
    p: &RowStochasticMatrix<S>,
    opts: &StationaryOptions<S>,
) -> Result<StationaryDistribution<S>> {
    let n = p.dim();
    if n == 0 {
        return Err(Error::Structural("empty transition matrix".into()));
    }
    if !p.matrix().is_irreducible() {
        return Err(Error::Convergence {
            what: "stationary distribution of a reducible chain",
            iterations: 0,
            residual: f64::NAN,
        });
    }
    let half = S::lit(0.5);
    let mut x = vec![S::one() / S::from_count(n); n];
    let max_iter = opts.iterations_per_node * n;
    let mut residual = S::zero();
    for it in 0..=max_iter {
        let (xp, r) = l1_residual(p, &x);
        residual = r;
        if r <= opts.tol {
            return finish(p, x, it, StationaryMethod::LazyPower);
        }
        if it == max_iter {
            break;
        }
        let mut total = S::zero();
        for (xi, &yi) in x.iter_mut().zip(&xp) {
            *xi = half * (*xi + yi);
            total += *xi;
        }
        x.iter_mut().for_each(|xi| *xi /= total);
    }
    if n <= opts.dense_fallback_max_dim {
        log::debug!("lazy power iteration stalled at residual {residual}; using dense solve");
        let x = dense_stationary(p)?;
        return finish(p, x, max_iter, StationaryMethod::DenseSolve);
    }
    Err(Error::Convergence {
        what: "lazy power iteration",
        iterations: max_iter,
        residual: residual.as_f64(),
    })
}

fn finish<S: Scalar>(
    p: &RowStochasticMatrix<S>,
    probs: Vec<S>,
    iterations: usize,
    method: StationaryMethod,
) -> Result<StationaryDistribution<S>> {
    let (_, residual) = l1_residual(p, &probs);
    let min = probs.iter().copied().fold(S::one(), |a, b| a.min(b));
    if residual > accept_tol(p.dim()) || min <= S::zero() {
        return Err(Error::Convergence {
            what: "stationary distribution (reducible chain?)",
            iterations,
            residual: residual.as_f64(),
        });
    }
    Ok(StationaryDistribution {
        probs,
        residual,
        iterations,
        method,
    })
}

/// Solve (Pᵀ − I)φ = 0 with Σφ = 1 replacing the last equation.
pub fn dense_stationary<S: Scalar>(p: &RowStochasticMatrix<S>) -> Result<Vec<S>> {
    let n = p.dim();
    let mut m: DMatrix<S> = p.matrix().to_dense().transpose();
    for i in 0..n {
        m[(i, i)] -= S::one();
    }
    for j in 0..n {
        m[(n - 1, j)] = S::one();
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = S::one();
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Structural("singular stationary system (reducible chain)".into()))?;
    Ok(sol.iter().copied().collect())
}

/// Closed-form stationary vector of the gadget walk when every weight is
/// one: (d₁..d_n, δ₁..δ_m, δ₁..δ_m) / vol(G), with `d` the incidence counts.
pub fn unit_weight_closed_form<S: Scalar>(h: &Hypergraph<S>) -> Vec<S> {
    let degrees = (0..h.num_nodes()).map(|v| h.incident_count(v));
    let sizes = h.edges().iter().map(|e| e.len());
    let raw: Vec<usize> = degrees.chain(sizes.clone()).chain(sizes).collect();
    let vol = S::from_count(raw.iter().sum());
    raw.into_iter().map(|c| S::from_count(c) / vol).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{adapted_cb_gadget, transition_matrix};

    fn chain(h: &Hypergraph<f64>) -> RowStochasticMatrix<f64> {
        transition_matrix(&adapted_cb_gadget(h)).unwrap()
    }

    #[test]
    fn two_edge_closed_form() {
        let h = Hypergraph::new(4, vec![(vec![0, 1, 2], 1.0), (vec![2, 3], 1.0)]).unwrap();
        let phi = stationary_distribution(&chain(&h)).unwrap();
        let expected = [1.0, 1.0, 2.0, 1.0, 3.0, 2.0, 3.0, 2.0].map(|x| x / 15.0);
        for (a, b) in phi.probs().iter().zip(expected) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        assert_eq!(phi.method(), StationaryMethod::LazyPower);
        assert!(phi.residual() <= 1e-12);
        let closed = unit_weight_closed_form(&h);
        for (a, b) in closed.iter().zip(expected) {
            assert!((a - b).abs() < 1e-16);
        }
    }

    #[test]
    fn single_edge_closed_form() {
        let h = Hypergraph::new(2, vec![(vec![0, 1], 1.0)]).unwrap();
        let phi = stationary_distribution(&chain(&h)).unwrap();
        let expected = [1.0, 1.0, 2.0, 2.0].map(|x| x / 6.0);
        for (a, b) in phi.probs().iter().zip(expected) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn weighted_instance_matches_dense() {
        let h = Hypergraph::new(
            5,
            vec![(vec![0, 1, 2], 0.3), (vec![2, 3], 1.0), (vec![3, 4, 0], 0.7)],
        )
        .unwrap();
        let p = chain(&h);
        let phi = stationary_distribution(&p).unwrap();
        let dense = dense_stationary(&p).unwrap();
        for (a, b) in phi.probs().iter().zip(&dense) {
            assert!((a - b).abs() < 1e-9);
        }
        let sum: f64 = phi.probs().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn forced_fallback_uses_dense_solve() {
        let h = Hypergraph::new(3, vec![(vec![0, 1], 0.4), (vec![1, 2], 1.0)]).unwrap();
        let opts = StationaryOptions {
            iterations_per_node: 0,
            ..Default::default()
        };
        let phi = stationary_distribution_with(&chain(&h), &opts).unwrap();
        assert_eq!(phi.method(), StationaryMethod::DenseSolve);
        assert!(phi.residual() <= 1e-10);
    }

    #[test]
    fn reducible_chain_is_rejected() {
        let h = Hypergraph::new(4, vec![(vec![0, 1], 1.0), (vec![2, 3], 1.0)]).unwrap();
        assert!(matches!(
            stationary_distribution(&chain(&h)),
            Err(Error::Convergence { .. })
        ));
        assert!(dense_stationary(&chain(&h)).is_err());
    }
}
