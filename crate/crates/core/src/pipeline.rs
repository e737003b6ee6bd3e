//! End-to-end detection: snapshot → reduction → Laplacian → spectrum →
//! embedding, then LAD scoring over the whole sequence.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::ingest::SnapshotSequence;
use crate::lad::{anomaly_and_change_scores, top_change_points, ChangeScoreConvention, EmbeddingSeries, PredictionCount};
use crate::reduction::{adapted_cb_gadget, clique_expansion, star_expansion_with, transition_matrix, StarWeighting};
use crate::scalar::Scalar;
use crate::spectral::{
    combinatorial_laplacian, normalized_laplacian, stationary_distribution, top_k_eigenvalues_with,
    undirected_normalized_laplacian, EigenOptions, SymmetricLaplacian,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionMethod {
    CbGadget,
    Star,
    Clique,
}

impl ReductionMethod {
    pub const ALL: [Self; 3] = [Self::CbGadget, Self::Star, Self::Clique];

    pub fn name(self) -> &'static str {
        match self {
            Self::CbGadget => "cb-gadget",
            Self::Star => "star",
            Self::Clique => "clique",
        }
    }
}

impl fmt::Display for ReductionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReductionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown reduction method '{s}'")))
    }
}

/// Which symmetric matrix represents the gadget digraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GadgetLaplacian {
    /// Φ − (ΦP + PᵀΦ)/2
    #[default]
    Combinatorial,
    /// Φ^{-1/2} L Φ^{-1/2}
    Normalized,
}

impl FromStr for GadgetLaplacian {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "combinatorial" => Ok(Self::Combinatorial),
            "normalized" => Ok(Self::Normalized),
            other => Err(Error::Domain(format!("unknown gadget Laplacian '{other}'"))),
        }
    }
}

impl fmt::Display for GadgetLaplacian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Combinatorial => "combinatorial",
            Self::Normalized => "normalized",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionConfig<S> {
    pub method: ReductionMethod,
    /// Embedding size for cb-gadget and star; clique always uses the full
    /// node universe.
    pub k: usize,
    pub window: usize,
    pub convention: ChangeScoreConvention,
    pub prediction: PredictionCount,
    pub largest_component: bool,
    pub gadget_laplacian: GadgetLaplacian,
    pub star_weighting: StarWeighting,
    pub eigen: EigenOptions<S>,
}

impl<S: Scalar> Default for DetectionConfig<S> {
    fn default() -> Self {
        Self {
            method: ReductionMethod::CbGadget,
            k: 100,
            window: 20,
            convention: ChangeScoreConvention::Max,
            prediction: PredictionCount::Fraction(0.03),
            largest_component: true,
            gadget_laplacian: GadgetLaplacian::Combinatorial,
            star_weighting: StarWeighting::SizeNormalized,
            eigen: EigenOptions::default(),
        }
    }
}

impl<S: Scalar> DetectionConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Domain("K must be at least 1".into()));
        }
        if self.window == 0 {
            return Err(Error::Domain("context window must be at least 1".into()));
        }
        Ok(())
    }

    /// Embedding length for a node universe of `universe` entities.
    pub fn embedding_dim(&self, universe: usize) -> usize {
        match self.method {
            ReductionMethod::Clique => universe.max(1),
            _ => self.k,
        }
    }
}

/// The symmetric matrix whose spectrum embeds `h` under `config`.
pub fn snapshot_laplacian<S: Scalar>(h: &Hypergraph<S>, config: &DetectionConfig<S>) -> Result<SymmetricLaplacian<S>> {
    match config.method {
        ReductionMethod::CbGadget => {
            let p = transition_matrix(&adapted_cb_gadget(h))?;
            let phi = stationary_distribution(&p)?;
            let l = combinatorial_laplacian(&p, &phi)?;
            match config.gadget_laplacian {
                GadgetLaplacian::Combinatorial => Ok(l),
                GadgetLaplacian::Normalized => normalized_laplacian(&l, &phi),
            }
        }
        ReductionMethod::Star => Ok(undirected_normalized_laplacian(&star_expansion_with(
            h,
            config.star_weighting,
        ))),
        ReductionMethod::Clique => Ok(undirected_normalized_laplacian(&clique_expansion(h))),
    }
}

/// Descending top eigenvalues of one snapshot (at most `dim` of them).
/// Snapshots without hyperedges give an empty spectrum.
pub fn snapshot_spectrum<S: Scalar>(h: &Hypergraph<S>, config: &DetectionConfig<S>, dim: usize) -> Result<Vec<S>> {
    if h.num_edges() == 0 {
        return Ok(Vec::new());
    }
    let restricted;
    let h = if config.largest_component {
        restricted = h.induced(&h.largest_component());
        &restricted
    } else {
        h
    };
    let l = snapshot_laplacian(h, config)?;
    top_k_eigenvalues_with(&l, dim, &config.eigen)
}

/// Spectra of every snapshot, computed in parallel.
pub fn sequence_spectra<S: Scalar>(seq: &SnapshotSequence<S>, config: &DetectionConfig<S>) -> Result<Vec<Vec<S>>> {
    config.validate()?;
    let dim = config.embedding_dim(seq.universe());
    seq.snapshots()
        .par_iter()
        .enumerate()
        .map(|(i, h)| {
            snapshot_spectrum(h, config, dim).map_err(|e| Error::Snapshot {
                index: i,
                time: seq.times()[i],
                source: Box::new(e),
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Detection<S> {
    pub times: Vec<i64>,
    pub z: Vec<S>,
    pub z_hat: Vec<S>,
    pub predicted: Vec<bool>,
    pub empty: Vec<bool>,
    pub spectra: Vec<Vec<S>>,
}

impl<S> Detection<S> {
    pub fn predicted_times(&self) -> Vec<i64> {
        self.times
            .iter()
            .zip(&self.predicted)
            .filter_map(|(&t, &p)| p.then_some(t))
            .collect()
    }
}

pub fn detect<S: Scalar>(seq: &SnapshotSequence<S>, config: &DetectionConfig<S>) -> Result<Detection<S>> {
    let spectra = sequence_spectra(seq, config)?;
    detect_from_spectra(seq.times(), spectra, seq.empty_flags(), config.embedding_dim(seq.universe()), config)
}

/// LAD over precomputed spectra.
pub fn detect_from_spectra<S: Scalar>(
    times: &[i64],
    spectra: Vec<Vec<S>>,
    empty: Vec<bool>,
    dim: usize,
    config: &DetectionConfig<S>,
) -> Result<Detection<S>> {
    let series = EmbeddingSeries::from_spectra(times, &spectra, dim)?;
    let scores = anomaly_and_change_scores(&series, config.window, config.convention)?;
    let mut predicted = vec![false; times.len()];
    for i in top_change_points(&scores.z_hat, config.prediction)? {
        predicted[i] = true;
    }
    Ok(Detection {
        times: times.to_vec(),
        z: scores.z,
        z_hat: scores.z_hat,
        predicted,
        empty,
        spectra,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::{default_scenario, generate_sequence};

    #[test]
    fn method_names_round_trip() {
        for m in ReductionMethod::ALL {
            assert_eq!(m.name().parse::<ReductionMethod>().unwrap(), m);
        }
        assert!("hyper".parse::<ReductionMethod>().is_err());
    }

    #[test]
    fn empty_snapshot_gives_empty_spectrum() {
        let h = Hypergraph::<f64>::new(4, Vec::new()).unwrap();
        let cfg = DetectionConfig::default();
        assert!(snapshot_spectrum(&h, &cfg, 10).unwrap().is_empty());
    }

    #[test]
    fn disconnected_snapshot_uses_largest_component() {
        let h = Hypergraph::<f64>::new(6, vec![(vec![0, 1, 2], 1.0), (vec![3, 4], 1.0)]).unwrap();
        let cfg = DetectionConfig::default();
        let s = snapshot_spectrum(&h, &cfg, 10).unwrap();
        // gadget of one 3-node edge: 3 + 2 nodes
        assert_eq!(s.len(), 5);
        let no_lcc = DetectionConfig {
            largest_component: false,
            ..DetectionConfig::default()
        };
        assert!(snapshot_spectrum(&h, &no_lcc, 10).is_err());
    }

    #[test]
    fn clique_uses_full_universe() {
        let cfg = DetectionConfig::<f64> {
            method: ReductionMethod::Clique,
            ..DetectionConfig::default()
        };
        assert_eq!(cfg.embedding_dim(70), 70);
        assert_eq!(DetectionConfig::<f64>::default().embedding_dim(70), 100);
    }

    #[test]
    fn detection_on_default_scenario_is_deterministic() {
        let mut scenario = default_scenario();
        scenario.num_snapshots = 40;
        scenario.schedule.truncate(1);
        let (seq, _) = generate_sequence::<f64>(&scenario, 0).unwrap();
        for method in ReductionMethod::ALL {
            let cfg = DetectionConfig {
                method,
                ..DetectionConfig::default()
            };
            let a = detect(&seq, &cfg).unwrap();
            let b = detect(&seq, &cfg).unwrap();
            assert_eq!(a.z_hat, b.z_hat);
            assert_eq!(a.predicted.iter().filter(|&&p| p).count(), 2);
            assert!(a.z.iter().all(|&z| (0.0..=2.0).contains(&z)));
        }
    }
}
