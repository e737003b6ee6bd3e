use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::reduction::{RowStochasticMatrix, UndirectedGraph};
use crate::scalar::Scalar;
use crate::sparse::CsrMatrix;

use super::StationaryDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianKind {
    /// Φ − (ΦP + PᵀΦ)/2
    CombinatorialDirected,
    /// Φ^{-1/2} L Φ^{-1/2}
    NormalizedDirected,
    /// I − D^{-1/2} W D^{-1/2}
    NormalizedUndirected,
}

/// Symmetric sparse Laplacian. Symmetry is exact: every off-diagonal value
/// is computed once and stored in both triangles.
#[derive(Debug, Clone)]
pub struct SymmetricLaplacian<S> {
    matrix: CsrMatrix<S>,
    kind: LaplacianKind,
}

impl<S: Scalar> SymmetricLaplacian<S> {
    fn from_upper(dim: usize, upper: BTreeMap<(usize, usize), S>, kind: LaplacianKind) -> Self {
        let mut triplets = Vec::with_capacity(2 * upper.len());
        for ((i, j), v) in upper {
            triplets.push((i, j, v));
            if i != j {
                triplets.push((j, i, v));
            }
        }
        Self {
            matrix: CsrMatrix::from_triplets(dim, dim, &triplets),
            kind,
        }
    }

    pub fn matrix(&self) -> &CsrMatrix<S> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn kind(&self) -> LaplacianKind {
        self.kind
    }

    pub fn to_dense(&self) -> DMatrix<S> {
        self.matrix.to_dense()
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.matrix.get(i, j)
    }
}

/// Chung's symmetrized combinatorial Laplacian L = Φ − (ΦP + PᵀΦ)/2.
pub fn combinatorial_laplacian<S: Scalar>(
    p: &RowStochasticMatrix<S>,
    phi: &StationaryDistribution<S>,
) -> Result<SymmetricLaplacian<S>> {
    let n = p.dim();
    if phi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: phi.len(),
        });
    }
    let probs = phi.probs();
    let half = S::lit(0.5);
    let mut upper: BTreeMap<(usize, usize), S> = BTreeMap::new();
    for (i, &pi) in probs.iter().enumerate() {
        upper.insert((i, i), pi);
    }
    // L_ij = δ_ij φ_i − (φ_i P_ij + φ_j P_ji)/2: accumulate each flow term
    // into the (min, max) slot so both triangles share one value.
    for i in 0..n {
        for (j, pij) in p.matrix().row(i) {
            let flow = probs[i] * pij;
            let key = (i.min(j), i.max(j));
            let slot = upper.entry(key).or_insert_with(S::zero);
            if i == j {
                *slot -= flow;
            } else {
                *slot -= half * flow;
            }
        }
    }
    Ok(SymmetricLaplacian::from_upper(
        n,
        upper,
        LaplacianKind::CombinatorialDirected,
    ))
}

/// 𝓛 = Φ^{-1/2} L Φ^{-1/2}.
pub fn normalized_laplacian<S: Scalar>(
    l: &SymmetricLaplacian<S>,
    phi: &StationaryDistribution<S>,
) -> Result<SymmetricLaplacian<S>> {
    let n = l.dim();
    if phi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: phi.len(),
        });
    }
    if let Some(i) = phi.probs().iter().position(|&x| x <= S::zero()) {
        return Err(Error::Domain(format!("stationary entry {i} is not positive")));
    }
    let root: Vec<S> = phi.probs().iter().map(|&x| x.sqrt()).collect();
    let upper = l
        .matrix
        .triplets()
        .filter(|&(i, j, _)| i <= j)
        .map(|(i, j, v)| ((i, j), v / (root[i] * root[j])))
        .collect();
    Ok(SymmetricLaplacian::from_upper(
        n,
        upper,
        LaplacianKind::NormalizedDirected,
    ))
}

/// I − D^{-1/2} W D^{-1/2} for an undirected graph; isolated nodes get an
/// identity row.
pub fn undirected_normalized_laplacian<S: Scalar>(g: &UndirectedGraph<S>) -> SymmetricLaplacian<S> {
    let n = g.num_nodes();
    let root: Vec<S> = (0..n).map(|u| g.degree(u).sqrt()).collect();
    let mut upper: BTreeMap<(usize, usize), S> = (0..n).map(|i| ((i, i), S::one())).collect();
    for (u, v, w) in g.edge_list() {
        if root[u] == S::zero() || root[v] == S::zero() {
            continue;
        }
        *upper.entry((u, v)).or_insert_with(S::zero) -= w / (root[u] * root[v]);
    }
    SymmetricLaplacian::from_upper(n, upper, LaplacianKind::NormalizedUndirected)
}

#[cfg(test)]
mod tests {
    use nalgebra::SymmetricEigen;

    use super::*;
    use crate::hypergraph::Hypergraph;
    use crate::reduction::{adapted_cb_gadget, clique_expansion, transition_matrix};
    use crate::spectral::stationary_distribution;

    fn sorted_eigs(m: DMatrix<f64>) -> Vec<f64> {
        let mut v: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    fn two_edge_laplacian() -> SymmetricLaplacian<f64> {
        let h = Hypergraph::<f64>::new(4, vec![(vec![0, 1, 2], 1.0), (vec![2, 3], 1.0)]).unwrap();
        let p = transition_matrix(&adapted_cb_gadget(&h)).unwrap();
        let phi = stationary_distribution(&p).unwrap();
        combinatorial_laplacian(&p, &phi).unwrap()
    }

    #[test]
    fn combinatorial_structure() {
        let l = two_edge_laplacian();
        assert!(l.matrix().is_symmetric());
        // dense arithmetic oracle: row sums vanish
        let d = l.to_dense();
        for r in 0..l.dim() {
            assert!(d.row(r).sum().abs() < 1e-10);
        }
        let eig = sorted_eigs(d);
        assert!(eig[0].abs() < 1e-10);
        assert!(eig[1] > 1e-6, "connected instance has a simple zero eigenvalue");
    }

    #[test]
    fn combinatorial_entries_by_hand() {
        // single unit edge {0,1}: φ = (1,1,2,2)/6, a = 2, b = 3
        let h = Hypergraph::<f64>::new(2, vec![(vec![0, 1], 1.0)]).unwrap();
        let p = transition_matrix(&adapted_cb_gadget(&h)).unwrap();
        let phi = stationary_distribution(&p).unwrap();
        let l = combinatorial_laplacian(&p, &phi).unwrap();
        assert!((l.get(0, 0) - 1.0 / 6.0).abs() < 1e-12);
        assert!((l.get(0, 2) + 1.0 / 12.0).abs() < 1e-12);
        assert!((l.get(2, 3) + 1.0 / 6.0).abs() < 1e-12);
        assert!((l.get(3, 0) + 1.0 / 12.0).abs() < 1e-12);
        assert_eq!(l.get(0, 1), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let h = Hypergraph::<f64>::new(2, vec![(vec![0, 1], 1.0)]).unwrap();
        let p = transition_matrix(&adapted_cb_gadget(&h)).unwrap();
        let other = Hypergraph::<f64>::new(3, vec![(vec![0, 1, 2], 1.0)]).unwrap();
        let q = transition_matrix(&adapted_cb_gadget(&other)).unwrap();
        let phi = stationary_distribution(&q).unwrap();
        assert!(matches!(
            combinatorial_laplacian(&p, &phi),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn normalized_block_form_single_edge() {
        // W = I, e = {0,1,2}: A = D^{-1/2} H Δ^{-1/2} has entries 1/√3.
        let h = Hypergraph::<f64>::new(3, vec![(vec![0, 1, 2], 1.0)]).unwrap();
        let p = transition_matrix(&adapted_cb_gadget(&h)).unwrap();
        let phi = stationary_distribution(&p).unwrap();
        let l = combinatorial_laplacian(&p, &phi).unwrap();
        let nl = normalized_laplacian(&l, &phi).unwrap();
        let a_entry = 1.0 / 3f64.sqrt();
        for v in 0..3 {
            assert!((nl.get(v, v) - 1.0).abs() < 1e-10);
            assert!((nl.get(v, 3) + a_entry / 2.0).abs() < 1e-10);
            assert!((nl.get(v, 4) + a_entry / 2.0).abs() < 1e-10);
        }
        assert!((nl.get(3, 4) + 0.5).abs() < 1e-10);
        assert!((nl.get(3, 3) - 1.0).abs() < 1e-10);
        assert!(nl.matrix().is_symmetric());
    }

    #[test]
    fn undirected_examples() {
        let tri = Hypergraph::<f64>::new(3, vec![(vec![0, 1, 2], 1.0)]).unwrap();
        let l = undirected_normalized_laplacian(&clique_expansion(&tri));
        let eig = sorted_eigs(l.to_dense());
        for (a, b) in eig.iter().zip([0.0, 1.5, 1.5]) {
            assert!((a - b).abs() < 1e-12);
        }

        let edge = Hypergraph::<f64>::new(2, vec![(vec![0, 1], 1.0)]).unwrap();
        let eig = sorted_eigs(undirected_normalized_laplacian(&clique_expansion(&edge)).to_dense());
        assert!((eig[0]).abs() < 1e-12 && (eig[1] - 2.0).abs() < 1e-12);

        let iso = Hypergraph::<f64>::new(3, vec![(vec![0, 1], 1.0)]).unwrap();
        let l = undirected_normalized_laplacian(&clique_expansion(&iso));
        assert_eq!(l.get(2, 2), 1.0);
        assert_eq!(l.get(2, 0), 0.0);
    }
}
