//! Fitting the high- and low-band predictors on a wideband corpus.

use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{apply_mask, FeatureMask, FeatureScaler, TrainingRow};
use crate::predictors::{
    codebook_associate, lbg_train, mlp_train, regression_fit, LbgOutcome, ModelBundle, Predictor, PredictorKind,
    PredictorModel, ResidualVq, TrainSchedule,
};
use crate::spectrum::HIGH_BAND;

use super::config::PipelineConfig;
use super::corpus::{list_wavs, CorpusFrontend};

const DB_PER_NEPER_POWER: f64 = 10.0 / std::f64::consts::LN_10;
const DB_PER_NEPER_AMPLITUDE: f64 = 20.0 / std::f64::consts::LN_10;

/// Which prediction target a fit addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    High,
    Low,
}

impl Target {
    pub fn of(self, row: &TrainingRow) -> Vec<f64> {
        match self {
            Target::High => row.high_target.to_vec(),
            Target::Low => row.low_target.to_vec(),
        }
    }

    /// Per-frame error in dB: spectral distortion over the high band for
    /// cepstra (exact by Parseval, the DCT being orthonormal), RMS
    /// log-amplitude error for the two low harmonics.
    pub fn frame_error_db(self, pred: &[f64], truth: &[f64]) -> f64 {
        let ss: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
        match self {
            Target::High => DB_PER_NEPER_POWER * (ss / HIGH_BAND.count() as f64).sqrt(),
            Target::Low => DB_PER_NEPER_AMPLITUDE * (ss / pred.len() as f64).sqrt(),
        }
    }
}

/// Root mean square of per-frame dB errors.
pub fn quadrature_mean(errors: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = errors.into_iter().fold((0.0, 0usize), |(s, n), e| (s + e * e, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        (s / n as f64).sqrt()
    }
}

/// Aggregate dB error of `predictor` on `rows`.
pub fn predictor_error(predictor: &Predictor, rows: &[TrainingRow], target: Target) -> f64 {
    quadrature_mean(
        rows.iter()
            .map(|r| target.frame_error_db(&predictor.predict(&r.features), &target.of(r))),
    )
}

fn design(rows: &[TrainingRow], mask: FeatureMask) -> Vec<Vec<f64>> {
    rows.iter().map(|r| apply_mask(&r.features, mask)).collect()
}

fn targets(rows: &[TrainingRow], target: Target) -> Vec<Vec<f64>> {
    rows.iter().map(|r| target.of(r)).collect()
}

pub fn fit_regression(rows: &[TrainingRow], target: Target) -> Result<Predictor> {
    let mask = FeatureMask::Regression;
    let fit = regression_fit(&design(rows, mask), &targets(rows, target))?;
    Predictor::new(mask, FeatureScaler::identity(mask.dim()), PredictorModel::Regression(fit.model))
}

/// LBG on the raw codebook features, grown to `2^bits` cells.
pub fn train_codebook_inputs(rows: &[TrainingRow], bits: u32) -> Result<LbgOutcome> {
    lbg_train(&design(rows, FeatureMask::Codebook), 1 << bits)
}

/// Associative codebook built from the LBG stage of `size` cells.
pub fn codebook_predictor(lbg: &LbgOutcome, size: usize, rows: &[TrainingRow], target: Target) -> Result<Predictor> {
    let centroids = lbg
        .stage(size)
        .ok_or_else(|| Error::Training(format!("LBG run has no stage with {size} cells")))?;
    let mask = FeatureMask::Codebook;
    let cb = codebook_associate(centroids, &design(rows, mask), &targets(rows, target))?;
    Predictor::new(mask, FeatureScaler::identity(mask.dim()), PredictorModel::Codebook(cb))
}

/// One MLP run; inputs are standardized with training-split statistics.
pub fn fit_mlp(
    train: &[TrainingRow],
    validation: &[TrainingRow],
    target: Target,
    hidden: &[usize],
    schedule: &TrainSchedule,
) -> Result<(Predictor, crate::predictors::TrainReport)> {
    let mask = FeatureMask::Mlp;
    let raw = design(train, mask);
    let scaler = FeatureScaler::fit(&raw)?;
    let x: Vec<Vec<f64>> = raw.iter().map(|r| scaler.transform(r)).collect();
    let xv: Vec<Vec<f64>> = design(validation, mask).iter().map(|r| scaler.transform(r)).collect();
    let (model, report) = mlp_train(
        &x,
        &targets(train, target),
        hidden,
        schedule,
        (&xv, &targets(validation, target)),
    )?;
    Ok((Predictor::new(mask, scaler, PredictorModel::Mlp(model))?, report))
}

#[derive(Debug, Clone)]
pub struct MlpAttempt {
    pub seed: u64,
    /// Training-split error in dB, `None` when the run failed.
    pub train_error: Option<f64>,
    pub epochs: usize,
    pub accepted: bool,
}

/// Scores of the fitted predictors for one band.
#[derive(Debug, Clone)]
pub struct BandReport {
    pub target: Target,
    pub chosen: PredictorKind,
    pub regression_train: f64,
    pub regression_validation: f64,
    pub chosen_train: f64,
    pub chosen_validation: f64,
    pub mlp_attempts: Vec<MlpAttempt>,
    /// `(cells, train error, validation error)` per LBG stage.
    pub codebook_curve: Vec<(usize, f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct TrainingReport {
    pub files: usize,
    pub train_rows: usize,
    pub validation_rows: usize,
    pub high: BandReport,
    pub low: BandReport,
    /// `(bits, validation SD before, after)`.
    pub residual_vq: Option<(u32, f64, f64)>,
    pub seconds: f64,
}

impl TrainingReport {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "files: {}\nframes: {} train, {} validation\ntraining time: {:.1} s\n",
            self.files, self.train_rows, self.validation_rows, self.seconds
        );
        for (name, b) in [("high band SD (dB)", &self.high), ("low band error (dB)", &self.low)] {
            s.push_str(&format!("\n{name}\n"));
            s.push_str(&format!(
                "  regression   train {:.3}  validation {:.3}\n",
                b.regression_train, b.regression_validation
            ));
            for (cells, tr, va) in &b.codebook_curve {
                s.push_str(&format!("  codebook {cells:>4} train {tr:.3}  validation {va:.3}\n"));
            }
            for a in &b.mlp_attempts {
                match a.train_error {
                    Some(e) => s.push_str(&format!(
                        "  mlp seed {:<4} train {:.3}  epochs {}{}\n",
                        a.seed,
                        e,
                        a.epochs,
                        if a.accepted { "  accepted" } else { "  rejected" }
                    )),
                    None => s.push_str(&format!("  mlp seed {:<4} failed\n", a.seed)),
                }
            }
            s.push_str(&format!(
                "  chosen: {}  train {:.3}  validation {:.3}\n",
                b.chosen, b.chosen_train, b.chosen_validation
            ));
        }
        if let Some((bits, before, after)) = self.residual_vq {
            s.push_str(&format!("\nresidual VQ {bits} bits: validation SD {before:.3} -> {after:.3} dB\n"));
        }
        s
    }
}

/// Seeded row split into training and validation sets.
pub fn split_rows(mut rows: Vec<TrainingRow>, fraction: f64, seed: u64) -> (Vec<TrainingRow>, Vec<TrainingRow>) {
    rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_val = ((rows.len() as f64) * fraction).round() as usize;
    let validation = rows.split_off(rows.len() - n_val.min(rows.len()));
    (rows, validation)
}

/// Fits the configured predictor for one band. An MLP must reach a training
/// error no worse than regression; failing runs are retried with the next
/// seed, and regression is kept if none qualifies.
pub fn fit_band(
    train: &[TrainingRow],
    validation: &[TrainingRow],
    target: Target,
    kind: PredictorKind,
    cfg: &PipelineConfig,
) -> Result<(Predictor, BandReport)> {
    let val_or_train = if validation.is_empty() { train } else { validation };
    let regression = fit_regression(train, target)?;
    let regression_train = predictor_error(&regression, train, target);
    let mut report = BandReport {
        target,
        chosen: PredictorKind::Regression,
        regression_train,
        regression_validation: predictor_error(&regression, val_or_train, target),
        chosen_train: regression_train,
        chosen_validation: f64::NAN,
        mlp_attempts: Vec::new(),
        codebook_curve: Vec::new(),
    };
    let chosen = match kind {
        PredictorKind::Regression => regression,
        PredictorKind::Codebook => {
            let lbg = train_codebook_inputs(train, cfg.codebook_bits)?;
            let mut last = None;
            for size in (2..=cfg.codebook_bits).step_by(2).map(|b| 1usize << b).chain([1 << cfg.codebook_bits]) {
                if report.codebook_curve.iter().any(|c| c.0 == size) {
                    continue;
                }
                let p = codebook_predictor(&lbg, size, train, target)?;
                report.codebook_curve.push((
                    size,
                    predictor_error(&p, train, target),
                    predictor_error(&p, val_or_train, target),
                ));
                last = Some(p);
            }
            last.expect("at least one codebook stage")
        }
        PredictorKind::Mlp => {
            let hidden = match target {
                Target::High => &cfg.hidden_high,
                Target::Low => &cfg.hidden_low,
            };
            let mut accepted = None;
            let mut last_err = None;
            for attempt in 0..cfg.mlp_attempts {
                let mut schedule = cfg.schedule.clone();
                schedule.seed = cfg.schedule.seed.wrapping_add(attempt as u64);
                match fit_mlp(train, validation, target, hidden, &schedule) {
                    Ok((p, r)) => {
                        let e = predictor_error(&p, train, target);
                        let ok = e <= regression_train;
                        report.mlp_attempts.push(MlpAttempt {
                            seed: schedule.seed,
                            train_error: Some(e),
                            epochs: r.epochs,
                            accepted: ok,
                        });
                        if ok {
                            accepted = Some(p);
                            break;
                        }
                    }
                    Err(e) => {
                        report.mlp_attempts.push(MlpAttempt {
                            seed: schedule.seed,
                            train_error: None,
                            epochs: 0,
                            accepted: false,
                        });
                        last_err = Some(e);
                    }
                }
            }
            match (accepted, last_err) {
                (Some(p), _) => p,
                (None, Some(e)) if report.mlp_attempts.iter().all(|a| a.train_error.is_none()) => return Err(e),
                _ => regression,
            }
        }
    };
    report.chosen = chosen.kind();
    report.chosen_train = predictor_error(&chosen, train, target);
    report.chosen_validation = predictor_error(&chosen, val_or_train, target);
    Ok((chosen, report))
}

/// Fits both bands (and the residual VQ when configured) on prepared rows.
pub fn train_rows(rows: Vec<TrainingRow>, files: usize, cfg: &PipelineConfig) -> Result<(ModelBundle, TrainingReport)> {
    cfg.validate()?;
    let start = Instant::now();
    let min_rows = FeatureMask::Regression.dim() + 2;
    if rows.len() < min_rows {
        return Err(Error::Training(format!(
            "only {} usable frames; at least {min_rows} are needed",
            rows.len()
        )));
    }
    let (train, validation) = split_rows(rows, cfg.validation_fraction, cfg.schedule.seed);
    let (high, high_report) = fit_band(&train, &validation, Target::High, cfg.high_predictor, cfg)?;
    let (low, low_report) = fit_band(&train, &validation, Target::Low, cfg.low_predictor, cfg)?;
    let mut residual_vq = None;
    let mut vq_report = None;
    if let Some(bits) = cfg.residual_vq_bits {
        let resid: Vec<Vec<f64>> = train
            .iter()
            .map(|r| {
                let p = high.predict(&r.features);
                r.high_target.iter().zip(&p).map(|(t, p)| t - p).collect()
            })
            .collect();
        let vq = ResidualVq::train(&resid, bits)?;
        let val = if validation.is_empty() { &train } else { &validation };
        let after = quadrature_mean(val.iter().map(|r| {
            let t = r.high_target.to_vec();
            Target::High.frame_error_db(&vq.correct(&high.predict(&r.features), &t), &t)
        }));
        vq_report = Some((bits, predictor_error(&high, val, Target::High), after));
        residual_vq = Some(vq);
    }
    let bundle = ModelBundle {
        analysis: cfg.analysis.clone(),
        high,
        low,
        residual_vq,
    };
    bundle.validate()?;
    let report = TrainingReport {
        files,
        train_rows: train.len(),
        validation_rows: validation.len(),
        high: high_report,
        low: low_report,
        residual_vq: vq_report,
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((bundle, report))
}

/// Training rows of every file in `dir`, files processed in parallel.
pub fn corpus_rows(dir: impl AsRef<Path>, cfg: &PipelineConfig) -> Result<(Vec<TrainingRow>, usize)> {
    let files = list_wavs(dir)?;
    let front = CorpusFrontend::new(cfg)?;
    let per_file = files
        .par_iter()
        .map(|p| front.pair_file(p).map(|v| v.iter().filter_map(|f| f.training_row()).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    Ok((per_file.into_iter().flatten().collect(), files.len()))
}

pub fn train(corpus_dir: impl AsRef<Path>, cfg: &PipelineConfig) -> Result<(ModelBundle, TrainingReport)> {
    cfg.validate()?;
    let (rows, files) = corpus_rows(corpus_dir, cfg)?;
    train_rows(rows, files, cfg)
}
