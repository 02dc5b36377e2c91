//! LBG vector quantization, the associative codebook built on it, and the
//! residual quantizer used for envelope coding.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SPLIT_SCALE: f64 = 0.001;
const LLOYD_TOLERANCE: f64 = 1e-5;
const LLOYD_MAX_ITERS: usize = 50;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the lowest index.
pub fn nearest(centroids: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(c, x);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn mean_of(rows: &[Vec<f64>]) -> Vec<f64> {
    let dim = rows[0].len();
    let mut m = vec![0.0; dim];
    for r in rows {
        for (a, v) in m.iter_mut().zip(r) {
            *a += v;
        }
    }
    m.iter_mut().for_each(|a| *a /= rows.len() as f64);
    m
}

/// Result of binary-splitting LBG.
#[derive(Debug, Clone)]
pub struct LbgOutcome {
    /// The codebook after each stage: sizes 1, 2, 4, ..., target.
    pub stages: Vec<Vec<Vec<f64>>>,
    /// Mean squared quantization error after every assignment step, one list
    /// per splitting stage.
    pub distortion_history: Vec<Vec<f64>>,
}

impl LbgOutcome {
    pub fn centroids(&self) -> &[Vec<f64>] {
        self.stages.last().expect("at least one stage")
    }

    pub fn stage(&self, size: usize) -> Option<&[Vec<f64>]> {
        self.stages.iter().find(|s| s.len() == size).map(Vec::as_slice)
    }
}

/// Binary-splitting LBG to `target_size` centroids (a power of two).
///
/// Each split perturbs every centroid by `±0.001·σ` per dimension, where `σ`
/// is the data's standard deviation; Lloyd iterations then run until the
/// relative distortion change drops below `1e-5` or 50 iterations pass. A
/// cell left empty is re-seeded with the point of the most populous cell
/// farthest from its centroid.
pub fn lbg_train(data: &[Vec<f64>], target_size: usize) -> Result<LbgOutcome> {
    if !target_size.is_power_of_two() {
        return Err(Error::Training(format!(
            "codebook size {target_size} is not a power of two"
        )));
    }
    if data.len() < target_size {
        return Err(Error::Training(format!(
            "{} training vectors cannot fill {target_size} cells",
            data.len()
        )));
    }
    let dim = data[0].len();
    if data.iter().any(|r| r.len() != dim) {
        return Err(Error::precondition("ragged training vectors"));
    }
    let mean = mean_of(data);
    let std: Vec<f64> = (0..dim)
        .map(|j| {
            let v = data.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / data.len() as f64;
            v.sqrt()
        })
        .collect();
    let mut centroids = vec![mean];
    let mut history = Vec::new();
    let mut stages = Vec::new();
    history.push(vec![assign(data, &centroids).1]);
    stages.push(centroids.clone());
    while centroids.len() < target_size {
        let mut split = Vec::with_capacity(2 * centroids.len());
        for c in &centroids {
            split.push(c.iter().zip(&std).map(|(v, s)| v + SPLIT_SCALE * s).collect());
            split.push(c.iter().zip(&std).map(|(v, s)| v - SPLIT_SCALE * s).collect());
        }
        centroids = split;
        history.push(lloyd(data, &mut centroids));
        stages.push(centroids.clone());
    }
    Ok(LbgOutcome {
        stages,
        distortion_history: history,
    })
}

/// Nearest-centroid labels and the mean squared error.
fn assign(data: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<(usize, f64)>, f64) {
    let labels: Vec<(usize, f64)> = data.par_iter().map(|x| nearest(centroids, x)).collect();
    let total: f64 = labels.iter().map(|l| l.1).sum();
    (labels, total / data.len() as f64)
}

fn lloyd(data: &[Vec<f64>], centroids: &mut [Vec<f64>]) -> Vec<f64> {
    let mut history = Vec::new();
    let dim = data[0].len();
    let m = centroids.len();
    let (mut labels, mut dist) = assign(data, centroids);
    history.push(dist);
    for _ in 0..LLOYD_MAX_ITERS {
        let mut sums = vec![vec![0.0; dim]; m];
        let mut counts = vec![0usize; m];
        for (x, &(i, _)) in data.iter().zip(&labels) {
            counts[i] += 1;
            for (s, v) in sums[i].iter_mut().zip(x) {
                *s += v;
            }
        }
        for i in 0..m {
            if counts[i] > 0 {
                centroids[i] = sums[i].iter().map(|s| s / counts[i] as f64).collect();
            }
        }
        for i in 0..m {
            if counts[i] > 0 {
                continue;
            }
            let donor = (0..m).max_by_key(|&j| (counts[j], std::cmp::Reverse(j))).unwrap();
            let far = data
                .iter()
                .zip(&labels)
                .enumerate()
                .filter(|(_, (_, l))| l.0 == donor)
                .max_by(|a, b| {
                    let da = sq_dist(a.1 .0, &centroids[donor]);
                    let db = sq_dist(b.1 .0, &centroids[donor]);
                    da.total_cmp(&db).then(b.0.cmp(&a.0))
                })
                .map(|(idx, _)| idx);
            if let Some(idx) = far {
                centroids[i] = data[idx].clone();
                labels[idx] = (i, 0.0);
                counts[donor] -= 1;
                counts[i] = 1;
            }
        }
        let (new_labels, new_dist) = assign(data, centroids);
        debug_assert!(
            new_dist <= dist * (1.0 + 1e-12) + 1e-300,
            "Lloyd distortion rose from {dist} to {new_dist}"
        );
        history.push(new_dist);
        let converged = dist <= 0.0 || (dist - new_dist) / dist < LLOYD_TOLERANCE;
        labels = new_labels;
        dist = new_dist;
        if converged {
            break;
        }
    }
    history
}

/// A vector quantizer on the inputs whose cells carry output codewords.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociativeCodebook {
    pub input_centroids: Vec<Vec<f64>>,
    pub output_codewords: Vec<Vec<f64>>,
}

impl AssociativeCodebook {
    pub fn size(&self) -> usize {
        self.input_centroids.len()
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        self.output_codewords[nearest(&self.input_centroids, x).0].clone()
    }
}

/// Attaches to every cell the mean of the targets whose inputs fall in it; an
/// empty cell gets the global target mean.
pub fn codebook_associate(
    centroids: &[Vec<f64>],
    x: &[Vec<f64>],
    y: &[Vec<f64>],
) -> Result<AssociativeCodebook> {
    if centroids.is_empty() || !centroids.len().is_power_of_two() {
        return Err(Error::precondition("codebook size must be a power of two"));
    }
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::precondition("inputs and targets must pair up"));
    }
    let out_dim = y[0].len();
    let global = mean_of(y);
    let labels: Vec<usize> = x.par_iter().map(|xi| nearest(centroids, xi).0).collect();
    let mut sums = vec![vec![0.0; out_dim]; centroids.len()];
    let mut counts = vec![0usize; centroids.len()];
    for (&i, yi) in labels.iter().zip(y) {
        counts[i] += 1;
        for (s, v) in sums[i].iter_mut().zip(yi) {
            *s += v;
        }
    }
    let output_codewords = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &c)| {
            if c == 0 {
                global.clone()
            } else {
                s.into_iter().map(|v| v / c as f64).collect()
            }
        })
        .collect();
    Ok(AssociativeCodebook {
        input_centroids: centroids.to_vec(),
        output_codewords,
    })
}

/// Quantizer for the prediction error of the high-band cepstrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualVq {
    pub bits: u32,
    pub codewords: Vec<Vec<f64>>,
}

impl ResidualVq {
    pub fn train(residuals: &[Vec<f64>], bits: u32) -> Result<Self> {
        if !(4..=12).contains(&bits) {
            return Err(Error::Training(format!("residual VQ bits must be in 4..=12, got {bits}")));
        }
        let out = lbg_train(residuals, 1 << bits)?;
        Ok(Self {
            bits,
            codewords: out.centroids().to_vec(),
        })
    }

    pub fn encode(&self, residual: &[f64]) -> usize {
        nearest(&self.codewords, residual).0
    }

    pub fn decode(&self, index: usize) -> &[f64] {
        &self.codewords[index]
    }

    /// `prediction + decode(encode(target - prediction))`.
    pub fn correct(&self, prediction: &[f64], target: &[f64]) -> Vec<f64> {
        let resid: Vec<f64> = target.iter().zip(prediction).map(|(t, p)| t - p).collect();
        let q = self.decode(self.encode(&resid));
        prediction.iter().zip(q).map(|(p, r)| p + r).collect()
    }
}
