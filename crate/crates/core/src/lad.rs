//! Laplacian anomaly detection over a series of spectral embeddings.
//!
//! Each snapshot is embedded as its (truncated, zero-padded, unit-normalized)
//! top eigenvalues. The typical behaviour at time `t` is the dominant left
//! singular vector of the context matrix of the previous `l` embeddings; the
//! anomaly score is `Z_t = 1 − v_tᵀ v̂_t` and change scores are successive
//! differences of `Z`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Differences and scores smaller than this multiple of machine epsilon
/// are round-off and reported as exactly zero.
const NOISE_FLOOR_ULPS: f64 = 64.0;

fn noise_floor<S: Scalar>() -> S {
    S::EPSILON * S::lit(NOISE_FLOOR_ULPS)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<S> {
    pub vector: Vec<S>,
    /// Set when the input spectrum was identically zero (or empty).
    pub degenerate: bool,
}

/// Truncate or zero-pad a descending spectrum to length `k` and normalize it
/// to unit length. A zero spectrum maps to the zero vector, flagged.
pub fn embed_snapshot<S: Scalar>(spectrum: &[S], k: usize) -> Result<Embedding<S>> {
    if let Some(i) = spectrum.windows(2).position(|w| w[0] < w[1]) {
        return Err(Error::Domain(format!(
            "spectrum must be sorted in descending order (violated at index {i})"
        )));
    }
    let mut vector: Vec<S> = spectrum.iter().copied().take(k).collect();
    vector.resize(k, S::zero());
    let len = vector.iter().fold(S::zero(), |acc, &x| acc + x * x).sqrt();
    if len == S::zero() {
        return Ok(Embedding {
            vector,
            degenerate: true,
        });
    }
    vector.iter_mut().for_each(|x| *x /= len);
    Ok(Embedding {
        vector,
        degenerate: false,
    })
}

/// Time-ordered unit embeddings of equal length.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingSeries<S> {
    times: Vec<i64>,
    embeddings: Vec<Embedding<S>>,
    dim: usize,
}

impl<S: Scalar> EmbeddingSeries<S> {
    pub fn new(dim: usize) -> Self {
        Self {
            times: Vec::new(),
            embeddings: Vec::new(),
            dim,
        }
    }

    /// Embed a sequence of descending spectra.
    pub fn from_spectra(times: &[i64], spectra: &[Vec<S>], dim: usize) -> Result<Self> {
        if times.len() != spectra.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: spectra.len(),
            });
        }
        let mut series = Self::new(dim);
        for (&t, s) in times.iter().zip(spectra) {
            series.push(t, embed_snapshot(s, dim)?)?;
        }
        Ok(series)
    }

    pub fn push(&mut self, t: i64, e: Embedding<S>) -> Result<()> {
        if e.vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: e.vector.len(),
            });
        }
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::Domain(format!("time {t} does not follow {last}")));
            }
        }
        self.times.push(t);
        self.embeddings.push(e);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.embeddings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.embeddings.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[i64] {
        &self.times
    }

    pub fn embeddings(&self) -> &[Embedding<S>] {
        &self.embeddings
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<S> {
    pub vector: Vec<S>,
    pub degenerate: bool,
}

/// Dominant left singular vector of the context matrix whose columns are
/// `context`, oriented so that its mean dot product with the columns is
/// nonnegative. Identical columns are returned unchanged.
pub fn predict_typical<S: Scalar>(context: &[&[S]]) -> Result<Prediction<S>> {
    let first = *context
        .first()
        .ok_or_else(|| Error::Domain("context must contain at least one embedding".into()))?;
    let dim = first.len();
    if let Some(bad) = context.iter().find(|c| c.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    let zero = || Prediction {
        vector: vec![S::zero(); dim],
        degenerate: true,
    };
    if context.iter().all(|c| *c == first) {
        let len = first.iter().fold(S::zero(), |a, &x| a + x * x).sqrt();
        if len == S::zero() {
            return Ok(zero());
        }
        let vector = if (len - S::one()).abs() <= noise_floor::<S>() {
            first.to_vec()
        } else {
            first.iter().map(|&x| x / len).collect()
        };
        return Ok(Prediction {
            vector,
            degenerate: false,
        });
    }

    // Right singular vectors come from the small l×l Gram matrix CᵀC.
    let l = context.len();
    let gram = DMatrix::from_fn(l, l, |i, j| dot(context[i], context[j]));
    let eig = SymmetricEigen::new(gram);
    let (top, &sigma2) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, &S)>, (i, v)| match best {
            Some((_, b)) if *b >= *v => best,
            _ => Some((i, v)),
        })
        .expect("nonempty context");
    if sigma2 <= S::zero() {
        return Ok(zero());
    }
    let right = eig.eigenvectors.column(top);
    let mut u = vec![S::zero(); dim];
    for (c, &w) in context.iter().zip(right.iter()) {
        for (ui, &ci) in u.iter_mut().zip(c.iter()) {
            *ui += w * ci;
        }
    }
    let len = u.iter().fold(S::zero(), |a, &x| a + x * x).sqrt();
    if len == S::zero() {
        return Ok(zero());
    }
    u.iter_mut().for_each(|x| *x /= len);
    let mean_dot = context.iter().fold(S::zero(), |a, c| a + dot(&u, c));
    if mean_dot < S::zero() {
        u.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(Prediction {
        vector: u,
        degenerate: false,
    })
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (&x, &y)| acc + x * y)
}

/// How consecutive anomaly scores are turned into change scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChangeScoreConvention {
    /// max(Z_t − Z_{t−1}, 0)
    #[default]
    Max,
    /// min(Z_t − Z_{t−1}, 0), the formula as usually printed.
    Min,
    /// Z_t − Z_{t−1}
    Raw,
}

impl std::str::FromStr for ChangeScoreConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Self::Max),
            "min" => Ok(Self::Min),
            "raw" | "raw-difference" => Ok(Self::Raw),
            other => Err(Error::Domain(format!("unknown change-score convention '{other}'"))),
        }
    }
}

impl std::fmt::Display for ChangeScoreConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Max => "max",
            Self::Min => "min",
            Self::Raw => "raw",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadScores<S> {
    /// Anomaly score per time point (0 during warm-up).
    pub z: Vec<S>,
    /// Change score per time point (0 during warm-up and at the first
    /// scored index).
    pub z_hat: Vec<S>,
}

/// Z and Ẑ for every time point of `series` with a context window of
/// `window` embeddings. The first `window` points are warm-up and score 0.
pub fn anomaly_and_change_scores<S: Scalar>(
    series: &EmbeddingSeries<S>,
    window: usize,
    convention: ChangeScoreConvention,
) -> Result<LadScores<S>> {
    if window == 0 {
        return Err(Error::Domain("context window must be at least 1".into()));
    }
    let n = series.len();
    if n <= window {
        return Err(Error::Domain(format!(
            "series of length {n} is too short for a context window of {window}"
        )));
    }
    let emb = series.embeddings();
    let floor = noise_floor::<S>();
    let mut z = vec![S::zero(); n];
    for t in window..n {
        let context: Vec<&[S]> = emb[t - window..t].iter().map(|e| e.vector.as_slice()).collect();
        let pred = predict_typical(&context)?;
        let v = &emb[t];
        let score = if v.degenerate || pred.degenerate {
            S::one() - dot(&v.vector, &pred.vector)
        } else {
            // 1 − vᵀv̂ = ½‖v − v̂‖² for unit vectors; exact zero on equality.
            let d2 = v
                .vector
                .iter()
                .zip(&pred.vector)
                .fold(S::zero(), |a, (&x, &y)| a + (x - y) * (x - y));
            d2 * S::lit(0.5)
        };
        let score = score.max(S::zero()).min(S::lit(2.0));
        z[t] = if score <= floor { S::zero() } else { score };
    }
    let mut z_hat = vec![S::zero(); n];
    for t in window + 1..n {
        let d = z[t] - z[t - 1];
        let d = if d.abs() <= floor { S::zero() } else { d };
        z_hat[t] = match convention {
            ChangeScoreConvention::Max => d.max(S::zero()),
            ChangeScoreConvention::Min => d.min(S::zero()),
            ChangeScoreConvention::Raw => d,
        };
    }
    Ok(LadScores { z, z_hat })
}

/// How many change points to predict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PredictionCount {
    /// ⌈fraction · T⌉ points, `0 < fraction ≤ 1`.
    Fraction(f64),
    /// Exactly this many (clamped to T).
    Count(usize),
}

impl PredictionCount {
    pub fn resolve(self, total: usize) -> Result<usize> {
        match self {
            Self::Fraction(f) if f > 0.0 && f <= 1.0 => {
                // tolerate representation error such as 0.05·100 = 5.000…1
                let raw = f * total as f64;
                Ok(((raw - 1e-9).ceil().max(0.0) as usize).min(total))
            }
            Self::Fraction(f) => Err(Error::Domain(format!("fraction {f} outside (0, 1]"))),
            Self::Count(c) => Ok(c.min(total)),
        }
    }
}

/// Indices of the largest |Ẑ| values, ties to the earlier index, returned
/// in increasing order.
pub fn top_change_points<S: Scalar>(z_hat: &[S], how_many: PredictionCount) -> Result<Vec<usize>> {
    let count = how_many.resolve(z_hat.len())?;
    let mut order: Vec<usize> = (0..z_hat.len()).collect();
    order.sort_by(|&a, &b| {
        z_hat[b]
            .abs()
            .partial_cmp(&z_hat[a].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut picked: Vec<usize> = order.into_iter().take(count).collect();
    picked.sort_unstable();
    Ok(picked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(dim: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        v
    }

    fn series(vectors: Vec<Vec<f64>>) -> EmbeddingSeries<f64> {
        let mut s = EmbeddingSeries::new(vectors[0].len());
        for (t, v) in vectors.into_iter().enumerate() {
            s.push(
                t as i64,
                Embedding {
                    vector: v,
                    degenerate: false,
                },
            )
            .unwrap();
        }
        s
    }

    #[test]
    fn embedding_examples() {
        assert!(embed_snapshot(&[3.0, 4.0], 2).is_err());
        let e = embed_snapshot(&[4.0f64, 3.0], 2).unwrap();
        assert!((e.vector[0] - 0.8).abs() < 1e-15 && (e.vector[1] - 0.6).abs() < 1e-15);
        assert_eq!(embed_snapshot(&[5.0], 3).unwrap().vector, vec![1.0, 0.0, 0.0]);
        let z = embed_snapshot(&[0.0, 0.0], 3).unwrap();
        assert!(z.degenerate && z.vector == vec![0.0; 3]);
        assert_eq!(embed_snapshot(&[5.0, 4.0, 3.0], 2).unwrap().vector.len(), 2);
    }

    #[test]
    fn prediction_rank_one_and_single_column() {
        let u = vec![0.6f64, 0.8, 0.0];
        let ctx = vec![u.as_slice(); 5];
        assert_eq!(predict_typical(&ctx).unwrap().vector, u);
        assert_eq!(predict_typical(&[u.as_slice()]).unwrap().vector, u);
        let scaled = [1.2, 1.6, 0.0];
        let p = predict_typical(&[&scaled[..], &scaled[..]]).unwrap();
        assert!(p.vector.iter().zip(&u).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn prediction_matches_svd_oracle() {
        let a = [0.6, 0.8, 0.0, 0.0];
        let b = [0.0, 0.0, 0.8, 0.6];
        let c = [0.3, 0.4, 0.5, 0.7];
        let cols: Vec<&[f64]> = vec![&a, &b, &c, &a, &c, &c];
        let p = predict_typical(&cols).unwrap();
        let m = DMatrix::from_fn(4, cols.len(), |i, j| cols[j][i]);
        let svd = m.svd(true, false);
        let (top, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .unwrap();
        let u = svd.u.unwrap().column(top).into_owned();
        let align: f64 = u.iter().zip(&p.vector).map(|(x, y)| x * y).sum();
        assert!((align.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prediction_is_permutation_invariant() {
        let a = [0.6f64, 0.8, 0.0];
        let b = [0.0, 0.6, 0.8];
        let c = [0.48, 0.6, 0.64];
        let p1 = predict_typical(&[&a[..], &b[..], &c[..], &c[..]]).unwrap();
        let p2 = predict_typical(&[&c[..], &a[..], &c[..], &b[..]]).unwrap();
        for (x, y) in p1.vector.iter().zip(&p2.vector) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_context_is_degenerate() {
        let z = [0.0, 0.0];
        let p = predict_typical(&[&z[..], &z[..]]).unwrap();
        assert!(p.degenerate);
        assert!(predict_typical::<f64>(&[]).is_err());
    }

    #[test]
    fn constant_series_scores_zero() {
        let v = vec![0.6, 0.8];
        let s = series(vec![v; 30]);
        let scores = anomaly_and_change_scores(&s, 20, ChangeScoreConvention::Max).unwrap();
        assert!(scores.z.iter().all(|&x| x == 0.0));
        assert!(scores.z_hat.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn orthogonal_jump_is_a_single_unit_spike() {
        let mut v = vec![unit(3, 0); 30];
        v.extend(vec![unit(3, 1); 30]);
        let s = series(v);
        let scores = anomaly_and_change_scores(&s, 20, ChangeScoreConvention::Max).unwrap();
        assert!((scores.z[30] - 1.0).abs() < 1e-12);
        assert!((scores.z_hat[30] - 1.0).abs() < 1e-12);
        let nonzero: Vec<usize> = (0..60).filter(|&t| scores.z_hat[t] != 0.0).collect();
        assert_eq!(nonzero, vec![30]);

        let min = anomaly_and_change_scores(&s, 20, ChangeScoreConvention::Min).unwrap();
        assert!(min.z_hat.iter().all(|&x| x <= 0.0));
        let raw = anomaly_and_change_scores(&s, 20, ChangeScoreConvention::Raw).unwrap();
        assert!((raw.z_hat[30] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn short_series_is_rejected() {
        let s = series(vec![unit(2, 0); 20]);
        assert!(matches!(
            anomaly_and_change_scores(&s, 20, ChangeScoreConvention::Max),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn warmup_points_score_zero() {
        let mut v: Vec<Vec<f64>> = (0..5).map(|i| unit(5, i)).collect();
        v.extend(vec![unit(5, 0); 10]);
        let scores = anomaly_and_change_scores(&series(v), 3, ChangeScoreConvention::Max).unwrap();
        assert!(scores.z[..3].iter().all(|&x| x == 0.0));
        assert_eq!(scores.z_hat[3], 0.0);
        assert!(scores.z.iter().all(|&x| (0.0..=2.0).contains(&x)));
    }

    #[test]
    fn top_change_point_selection() {
        let zeros = vec![0.0f64; 150];
        assert_eq!(top_change_points(&zeros, PredictionCount::Fraction(0.03)).unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(top_change_points(&zeros, PredictionCount::Count(4)).unwrap().len(), 4);
        let mut z = vec![0.0f64; 10];
        z[7] = 0.9;
        z[2] = 0.5;
        z[5] = -0.7;
        assert_eq!(top_change_points(&z, PredictionCount::Count(2)).unwrap(), vec![5, 7]);
        assert_eq!(PredictionCount::Fraction(0.05).resolve(100).unwrap(), 5);
        assert!(PredictionCount::Fraction(0.0).resolve(10).is_err());
        assert!(PredictionCount::Fraction(1.5).resolve(10).is_err());
    }

    #[test]
    fn series_rejects_bad_pushes() {
        let mut s = EmbeddingSeries::<f64>::new(2);
        s.push(1, Embedding { vector: vec![1.0, 0.0], degenerate: false }).unwrap();
        assert!(s.push(1, Embedding { vector: vec![1.0, 0.0], degenerate: false }).is_err());
        assert!(s.push(2, Embedding { vector: vec![1.0], degenerate: false }).is_err());
    }
}
