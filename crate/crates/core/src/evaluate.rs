//! Synset-level evaluation of leadership-change predictions.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::io::content_lines;
use crate::lexicon::SenseId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Leader changed and the new leader was predicted.
    Tp,
    /// Leader stayed and something else was predicted.
    Fp,
    /// Leader changed and it was missed.
    Fn,
    /// Leader stayed and was predicted.
    Tn,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Tp => "tp",
            Outcome::Fp => "fp",
            Outcome::Fn => "fn",
            Outcome::Tn => "tn",
        }
    }
}

pub fn classify_outcome<T: PartialEq>(
    present_leader: &T,
    future_leader: &T,
    predicted: &T,
) -> Outcome {
    let changed = present_leader != future_leader;
    let right = predicted == future_leader;
    match (changed, right) {
        (true, true) => Outcome::Tp,
        (false, false) => Outcome::Fp,
        (true, false) => Outcome::Fn,
        (false, true) => Outcome::Tn,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ContingencyCounts {
    pub fn record(&mut self, outcome: Outcome) {
        match outcome {
            Outcome::Tp => self.tp += 1,
            Outcome::Fp => self.fp += 1,
            Outcome::Fn => self.fn_ += 1,
            Outcome::Tn => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Precision, recall and F-score of the change class. Division by zero yields zero.
pub fn metrics(counts: &ContingencyCounts) -> Metrics {
    let precision = ratio(counts.tp as f64, (counts.tp + counts.fp) as f64);
    let recall = ratio(counts.tp as f64, (counts.tp + counts.fn_) as f64);
    Metrics {
        precision,
        recall,
        f_score: harmonic_mean(precision, recall),
    }
}

pub fn harmonic_mean(precision: f64, recall: f64) -> f64 {
    ratio(2.0 * precision * recall, precision + recall)
}

fn z_score(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Invalid(format!(
            "confidence {confidence} not in (0, 1)"
        )));
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(normal.inverse_cdf(1.0 - (1.0 - confidence) / 2.0))
}

/// Wilson score interval for a proportion `p` observed over `n` trials.
pub fn wilson_interval_for(p: f64, n: u64, confidence: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Invalid("Wilson interval needs n > 0".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Invalid(format!("proportion {p} not in [0, 1]")));
    }
    let z = z_score(confidence)?;
    let n = n as f64;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if p == 0.0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if p == 1.0 {
        1.0
    } else {
        (center + half).min(1.0)
    };
    Ok((lo, hi))
}

pub fn wilson_interval(successes: u64, n: u64, confidence: f64) -> Result<(f64, f64)> {
    if successes > n {
        return Err(Error::Invalid(format!("{successes} successes out of {n}")));
    }
    if n == 0 {
        return Err(Error::Invalid("Wilson interval needs n > 0".into()));
    }
    wilson_interval_for(successes as f64 / n as f64, n, confidence)
}

/// One word's predicted chance of leading its synset in the future.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub synset_id: String,
    pub sense: SenseId,
    pub probability: f64,
    /// Ranking key within the synset; any increasing function of the probability.
    pub score: f64,
}

/// Member with the highest score; ties go to the smallest sense id.
/// Returns the index and whether a tie was broken.
pub fn predict_synset_winner(scores: &[(SenseId, f64)]) -> Option<(usize, bool)> {
    let best = scores.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = (0..scores.len()).filter(|&i| scores[i].1 == best).collect();
    let winner = tied
        .iter()
        .copied()
        .min_by(|&a, &b| scores[a].0.cmp(&scores[b].0))?;
    let tie = tied.len() > 1;
    if tie {
        log::debug!(
            "tie among {} members; picked {}",
            tied.len(),
            scores[winner].0
        );
    }
    Some((winner, tie))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynsetOutcome {
    pub synset_id: String,
    pub present_leader: SenseId,
    pub future_leader: SenseId,
    pub predicted: SenseId,
    pub outcome: Outcome,
    pub tie: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub counts: ContingencyCounts,
    pub metrics: Metrics,
    pub ties: usize,
    pub outcomes: Vec<SynsetOutcome>,
}

/// Scores every snapshot of `dataset` with `predictions` (one per word).
pub fn evaluate(dataset: &Dataset, predictions: &[Prediction]) -> Result<Evaluation> {
    let index: HashMap<(&str, &SenseId), f64> = predictions
        .iter()
        .map(|p| ((p.synset_id.as_str(), &p.sense), p.score))
        .collect();
    let mut counts = ContingencyCounts::default();
    let mut outcomes = Vec::with_capacity(dataset.snapshots.len());
    let mut ties = 0;
    for snap in &dataset.snapshots {
        let scores: Vec<(SenseId, f64)> = snap
            .members
            .iter()
            .map(|m| {
                index
                    .get(&(snap.synset_id.as_str(), &m.sense))
                    .map(|&s| (m.sense.clone(), s))
                    .ok_or_else(|| {
                        Error::Invalid(format!(
                            "no prediction for {} in {}",
                            m.sense, snap.synset_id
                        ))
                    })
            })
            .collect::<Result<_>>()?;
        let (winner, tie) = predict_synset_winner(&scores).expect("snapshot has members");
        let present = &snap.members[snap.present_leader()].sense;
        let future = &snap.members[snap.future_leader()].sense;
        let predicted = &snap.members[winner].sense;
        let outcome = classify_outcome(present, future, predicted);
        counts.record(outcome);
        ties += usize::from(tie);
        outcomes.push(SynsetOutcome {
            synset_id: snap.synset_id.clone(),
            present_leader: present.clone(),
            future_leader: future.clone(),
            predicted: predicted.clone(),
            outcome,
            tie,
        });
    }
    Ok(Evaluation {
        metrics: metrics(&counts),
        counts,
        ties,
        outcomes,
    })
}

/// Uniform draw in `[0, 1)` determined by `(seed, synset, sense)` alone.
pub fn uniform_draw(seed: u64, synset_id: &str, sense: &SenseId) -> f64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(synset_id.as_bytes());
    h.update([0u8]);
    h.update(sense.to_string().as_bytes());
    let digest = h.finalize();
    let bits = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Independent uniform "probabilities" for every word of the dataset.
pub fn random_predictions(dataset: &Dataset, seed: u64) -> Vec<Prediction> {
    dataset
        .snapshots
        .iter()
        .flat_map(|snap| {
            snap.members.iter().map(move |m| {
                let p = uniform_draw(seed, &snap.synset_id, &m.sense);
                Prediction {
                    synset_id: snap.synset_id.clone(),
                    sense: m.sense.clone(),
                    probability: p,
                    score: p,
                }
            })
        })
        .collect()
}

pub fn random_baseline(dataset: &Dataset, seed: u64) -> Metrics {
    evaluate(dataset, &random_predictions(dataset, seed))
        .expect("random predictions cover every word")
        .metrics
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        if values.is_empty() {
            return MeanSd { mean: 0.0, sd: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        MeanSd { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seeds: Vec<u64>,
    pub precision: MeanSd,
    pub recall: MeanSd,
    pub f_score: MeanSd,
}

/// Random baseline repeated over several seeds.
pub fn random_baseline_seeds(dataset: &Dataset, seeds: &[u64]) -> SeedSummary {
    let runs: Vec<Metrics> = seeds.iter().map(|&s| random_baseline(dataset, s)).collect();
    let pick = |f: fn(&Metrics) -> f64| MeanSd::of(&runs.iter().map(f).collect::<Vec<_>>());
    SeedSummary {
        seeds: seeds.to_vec(),
        precision: pick(|m| m.precision),
        recall: pick(|m| m.recall),
        f_score: pick(|m| m.f_score),
    }
}

/// Rounds a proportion to a percentage with one decimal, as in the report tables.
pub fn percent1(x: f64) -> f64 {
    (x * 1000.0).round() / 10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercentMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

impl From<Metrics> for PercentMetrics {
    fn from(m: Metrics) -> Self {
        PercentMetrics {
            precision: percent1(m.precision),
            recall: percent1(m.recall),
            f_score: percent1(m.f_score),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricIntervals {
    pub precision: (f64, f64),
    pub recall: (f64, f64),
    pub f_score: (f64, f64),
}

/// 95% Wilson bands around each metric, taking the number of synsets as the trial count.
pub fn metric_intervals(m: &Metrics, synsets: u64) -> Result<MetricIntervals> {
    Ok(MetricIntervals {
        precision: wilson_interval_for(m.precision, synsets, 0.95)?,
        recall: wilson_interval_for(m.recall, synsets, 0.95)?,
        f_score: wilson_interval_for(m.f_score, synsets, 0.95)?,
    })
}

pub fn outcomes_to_tsv(outcomes: &[SynsetOutcome]) -> String {
    let mut out =
        String::from("synset_id\tpresent_leader\tfuture_leader\tpredicted\toutcome\ttie\n");
    for o in outcomes {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            o.synset_id,
            o.present_leader,
            o.future_leader,
            o.predicted,
            o.outcome.as_str(),
            u8::from(o.tie)
        );
    }
    out
}

pub fn predictions_to_tsv(predictions: &[Prediction]) -> String {
    let mut out = String::from("synset_id\tsense_id\tprobability\tscore\n");
    for p in predictions {
        let _ = writeln!(
            out,
            "{}\t{}\t{:?}\t{:?}",
            p.synset_id, p.sense, p.probability, p.score
        );
    }
    out
}

pub fn predictions_from_tsv<R: BufRead>(source: R) -> Result<Vec<Prediction>> {
    let mut out = Vec::new();
    for item in content_lines(source) {
        let (line_no, line) = item?;
        if line.starts_with("synset_id\t") {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(Error::parse(
                line_no,
                format!("expected 4 columns, found {}", cols.len()),
            ));
        }
        let real = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::parse(line_no, format!("bad number `{s}`")))
        };
        out.push(Prediction {
            synset_id: cols[0].to_string(),
            sense: cols[1].parse().map_err(|e| Error::parse(line_no, e))?,
            probability: real(cols[2])?,
            score: real(cols[3])?,
        });
    }
    Ok(out)
}
