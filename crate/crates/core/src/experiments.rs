//! Experiment suites: the full change-prediction run, feature ablations,
//! cycle-length sweeps, and inspection of fitted models.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dataset::{
    build_dataset, schedule_windows, ChangeHistogram, Dataset, DatasetSummary, RemovalReason,
    TimeWindow, WindowPair,
};
use crate::error::{Error, Result};
use crate::evaluate::{
    evaluate, metric_intervals, outcomes_to_tsv, predictions_to_tsv, random_baseline_seeds,
    random_predictions, ContingencyCounts, Evaluation, MetricIntervals, PercentMetrics, Prediction,
    SeedSummary,
};
use crate::features::{dataset_features, Feature, FeatureMask, FeatureVector};
use crate::io::write_atomic;
use crate::model::{GaussianParams, NaiveBayesModel};
use crate::pipeline::Inputs;

/// How many seeds the random baseline is repeated over for its mean and spread.
pub const RANDOM_REPEATS: u64 = 10;

/// Datasets and feature vectors for one train/test window pair.
#[derive(Debug, Clone)]
pub struct PreparedPair {
    pub cycle: u32,
    /// 1-based position of the test window within its cycle.
    pub index: usize,
    pub windows: WindowPair,
    pub train: Dataset,
    pub test: Dataset,
    /// Carry the target class.
    pub train_vectors: Vec<FeatureVector>,
    /// Built without the target class; evaluation reads leaders from `test`.
    pub test_vectors: Vec<FeatureVector>,
}

impl PreparedPair {
    pub fn label(&self) -> String {
        format!("Test{}", self.index)
    }
}

pub fn prepare_pair(
    inputs: &Inputs,
    cycle: u32,
    index: usize,
    windows: WindowPair,
) -> Result<PreparedPair> {
    let train = build_dataset(
        &inputs.synsets,
        &inputs.corpus,
        &windows.train,
        inputs.half_width,
    );
    let test = build_dataset(
        &inputs.synsets,
        &inputs.corpus,
        &windows.test,
        inputs.half_width,
    );
    let ctx = inputs.feature_context();
    let train_vectors = dataset_features(&train, &ctx, true)?;
    let test_vectors = dataset_features(&test, &ctx, false)?;
    Ok(PreparedPair {
        cycle,
        index,
        windows,
        train,
        test,
        train_vectors,
        test_vectors,
    })
}

pub fn prepare_cycle(inputs: &Inputs, cycle: u32) -> Result<Vec<PreparedPair>> {
    schedule_windows(cycle, &inputs.schedule)?
        .into_iter()
        .enumerate()
        .map(|(i, w)| prepare_pair(inputs, cycle, i + 1, w))
        .collect()
}

/// Win probability of every vector; the ranking score is the log-odds.
pub fn predict(model: &NaiveBayesModel, vectors: &[FeatureVector]) -> Vec<Prediction> {
    vectors
        .par_iter()
        .map(|v| Prediction {
            synset_id: v.synset_id.clone(),
            sense: v.sense.clone(),
            probability: model.win_probability(v),
            score: model.log_odds(v),
        })
        .collect()
}

fn evaluate_mask(
    prepared: &PreparedPair,
    mask: FeatureMask,
) -> Result<(NaiveBayesModel, Vec<Prediction>, Evaluation)> {
    let model = NaiveBayesModel::fit_with(&prepared.train_vectors, mask)?;
    let predictions = predict(&model, &prepared.test_vectors);
    let evaluation = evaluate(&prepared.test, &predictions)?;
    Ok((model, predictions, evaluation))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomReport {
    pub seed: u64,
    pub counts: ContingencyCounts,
    pub metrics: PercentMetrics,
    pub intervals: MetricIntervals,
    /// Repeated over several seeds; an extension beyond a single-run baseline.
    pub over_seeds: SeedSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub window: TimeWindow,
    pub summary: DatasetSummary,
    pub removal_log: std::collections::BTreeMap<RemovalReason, usize>,
}

impl From<&Dataset> for DatasetReport {
    fn from(d: &Dataset) -> Self {
        DatasetReport {
            window: d.window,
            summary: d.summary(),
            removal_log: d.removal_log.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbcpReport {
    pub cycle: u32,
    pub test: String,
    pub features: FeatureMask,
    pub train: DatasetReport,
    pub test_set: DatasetReport,
    pub percent_changed: f64,
    pub percent_stable: f64,
    pub counts: ContingencyCounts,
    /// Percentages with one decimal.
    pub metrics: PercentMetrics,
    pub intervals: MetricIntervals,
    pub ties: usize,
    pub random: RandomReport,
}

#[derive(Debug, Clone)]
pub struct NbcpRun {
    pub report: NbcpReport,
    pub model: NaiveBayesModel,
    pub predictions: Vec<Prediction>,
    pub evaluation: Evaluation,
}

fn random_report(test: &Dataset, seed: u64) -> Result<RandomReport> {
    let eval = evaluate(test, &random_predictions(test, seed))?;
    let n = test.snapshots.len().max(1) as u64;
    let seeds: Vec<u64> = (0..RANDOM_REPEATS).map(|i| seed.wrapping_add(i)).collect();
    Ok(RandomReport {
        seed,
        counts: eval.counts,
        metrics: eval.metrics.into(),
        intervals: metric_intervals(&eval.metrics, n)?,
        over_seeds: random_baseline_seeds(test, &seeds),
    })
}

/// Fits on the training window (future visible) and evaluates on the test window.
pub fn run_nbcp(prepared: &PreparedPair, inputs: &Inputs) -> Result<NbcpRun> {
    let (model, predictions, evaluation) = evaluate_mask(prepared, FeatureMask::all())?;
    let summary = prepared.test.summary();
    let n = prepared.test.snapshots.len().max(1) as u64;
    let report = NbcpReport {
        cycle: prepared.cycle,
        test: prepared.label(),
        features: FeatureMask::all(),
        train: (&prepared.train).into(),
        test_set: (&prepared.test).into(),
        percent_changed: round1(summary.change_percent),
        percent_stable: if summary.synsets == 0 {
            0.0
        } else {
            round1(100.0 - summary.change_percent)
        },
        counts: evaluation.counts,
        metrics: evaluation.metrics.into(),
        intervals: metric_intervals(&evaluation.metrics, n)?,
        ties: evaluation.ties,
        random: random_report(&prepared.test, inputs.seed)?,
    };
    Ok(NbcpRun {
        report,
        model,
        predictions,
        evaluation,
    })
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationMode {
    /// F(all but the feature) − F(all).
    DropOne,
    /// F(the feature alone) − F(random).
    SingleOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AblationSpec {
    pub mode: AblationMode,
    pub feature: Feature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationResult {
    pub spec: AblationSpec,
    pub test: String,
    pub reference_f: f64,
    pub variant_f: f64,
    /// Percentage points.
    pub delta: f64,
    /// The two F-scores' 95% Wilson bands do not overlap. This stands in for an
    /// unnamed significance test.
    pub significant: bool,
    /// Names the test behind `significant`.
    pub significance_test: String,
}

/// Label carried by every ablation result.
pub const ABLATION_SIGNIFICANCE_TEST: &str = "wilson_overlap_95";

fn intervals_disjoint(a: f64, b: f64, n: u64) -> Result<bool> {
    let (alo, ahi) = crate::evaluate::wilson_interval_for(a, n, 0.95)?;
    let (blo, bhi) = crate::evaluate::wilson_interval_for(b, n, 0.95)?;
    Ok(ahi < blo || bhi < alo)
}

pub fn run_ablation(
    spec: AblationSpec,
    prepared: &PreparedPair,
    inputs: &Inputs,
) -> Result<AblationResult> {
    let (reference_f, variant_f) = match spec.mode {
        AblationMode::DropOne => {
            let all = evaluate_mask(prepared, FeatureMask::all())?
                .2
                .metrics
                .f_score;
            let dropped = evaluate_mask(prepared, FeatureMask::all().without(spec.feature))?
                .2
                .metrics
                .f_score;
            (all, dropped)
        }
        AblationMode::SingleOnly => {
            let random = evaluate(
                &prepared.test,
                &random_predictions(&prepared.test, inputs.seed),
            )?
            .metrics
            .f_score;
            let alone = evaluate_mask(prepared, FeatureMask::only(spec.feature))?
                .2
                .metrics
                .f_score;
            (random, alone)
        }
    };
    let n = prepared.test.snapshots.len().max(1) as u64;
    Ok(AblationResult {
        spec,
        test: prepared.label(),
        reference_f,
        variant_f,
        delta: 100.0 * (variant_f - reference_f),
        significant: intervals_disjoint(reference_f, variant_f, n)?,
        significance_test: ABLATION_SIGNIFICANCE_TEST.to_string(),
    })
}

/// Every feature in `mode`, for every prepared pair.
pub fn run_ablation_table(
    mode: AblationMode,
    pairs: &[PreparedPair],
    inputs: &Inputs,
) -> Result<Vec<AblationResult>> {
    let jobs: Vec<(Feature, &PreparedPair)> = Feature::ALL
        .into_iter()
        .flat_map(|f| pairs.iter().map(move |p| (f, p)))
        .collect();
    jobs.into_par_iter()
        .map(|(feature, p)| run_ablation(AblationSpec { mode, feature }, p, inputs))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cycle: u32,
    pub test: String,
    /// Rows are keyed by the future period of the test window.
    pub future: i32,
    pub nbcp_f: f64,
    pub random_f: f64,
    pub percent_changed: f64,
    pub synsets: usize,
}

impl From<&NbcpReport> for SweepRow {
    fn from(r: &NbcpReport) -> Self {
        SweepRow {
            cycle: r.cycle,
            test: r.test.clone(),
            future: r.test_set.window.future,
            nbcp_f: r.metrics.f_score,
            random_f: r.random.metrics.f_score,
            percent_changed: r.percent_changed,
            synsets: r.test_set.summary.synsets,
        }
    }
}

/// Runs the full system for each cycle length. Cycles that cannot be
/// scheduled are skipped with a warning.
pub fn run_cycle_sweep(cycles: &[u32], inputs: &Inputs) -> Result<(Vec<SweepRow>, Vec<NbcpRun>)> {
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for &cycle in cycles {
        let pairs = match prepare_cycle(inputs, cycle) {
            Ok(p) => p,
            Err(e @ (Error::Schedule { .. } | Error::Invalid(_))) => {
                log::warn!("skipping cycle {cycle}: {e}");
                continue;
            }
            Err(e) => return Err(e),
        };
        for p in &pairs {
            let run = run_nbcp(p, inputs)?;
            rows.push(SweepRow::from(&run.report));
            runs.push(run);
        }
    }
    Ok((rows, runs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    pub p_value: f64,
    pub significant_95: bool,
}

/// Two-tailed unpaired Welch t-test from summary statistics.
pub fn welch_t_test(
    mean1: f64,
    var1: f64,
    n1: u64,
    mean2: f64,
    var2: f64,
    n2: u64,
) -> Result<WelchResult> {
    if n1 < 2 || n2 < 2 {
        return Err(Error::Invalid(
            "Welch test needs at least two samples per group".into(),
        ));
    }
    if var1 < 0.0 || var2 < 0.0 {
        return Err(Error::Invalid("negative variance".into()));
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let (a, b) = (var1 / n1f, var2 / n2f);
    let se2 = a + b;
    if se2 == 0.0 {
        let differ = mean1 != mean2;
        return Ok(WelchResult {
            t: if differ {
                f64::INFINITY.copysign(mean1 - mean2)
            } else {
                0.0
            },
            df: (n1f + n2f - 2.0),
            p_value: if differ { 0.0 } else { 1.0 },
            significant_95: differ,
        });
    }
    let t = (mean1 - mean2) / se2.sqrt();
    let df = se2 * se2 / (a * a / (n1f - 1.0) + b * b / (n2f - 1.0));
    let dist =
        StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Invalid(format!("t distribution: {e}")))?;
    let p_value = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(WelchResult {
        t,
        df,
        p_value,
        significant_95: p_value < 0.05,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpretationRow {
    pub dimension: String,
    pub loser_mean: f64,
    pub winner_mean: f64,
    /// `winner_mean - loser_mean`.
    pub difference: f64,
    pub significant: bool,
}

impl InterpretationRow {
    fn from_params(dimension: String, classes: &[GaussianParams; 2]) -> Result<Self> {
        let [loser, winner] = classes;
        let test = welch_t_test(
            winner.mean,
            winner.variance,
            winner.sample_count,
            loser.mean,
            loser.variance,
            loser.sample_count,
        )?;
        Ok(InterpretationRow {
            dimension,
            loser_mean: loser.mean,
            winner_mean: winner.mean,
            difference: winner.mean - loser.mean,
            significant: test.significant_95,
        })
    }

    /// Which class a higher value (or the trigram's presence) points to.
    pub fn suggests(&self) -> &'static str {
        if self.difference >= 0.0 {
            "winner"
        } else {
            "loser"
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interpretation {
    pub scalars: Vec<InterpretationRow>,
    pub trigrams: Vec<InterpretationRow>,
}

pub const DEFAULT_TOP_TRIGRAMS: usize = 12;

/// Per-class Gaussian means of the scalar features, and the `top_k` trigrams
/// with the largest gap between class means.
pub fn interpret_model(
    model: &NaiveBayesModel,
    training_vectors: &[FeatureVector],
    top_k: usize,
) -> Result<Interpretation> {
    let mut counts = [0u64; 2];
    for v in training_vectors {
        match v.target_class {
            Some(c @ (0 | 1)) => counts[c as usize] += 1,
            _ => {
                return Err(Error::Invalid(format!(
                    "training vector {} has no class",
                    v.sense
                )))
            }
        }
    }
    if counts != model.class_counts {
        return Err(Error::Invalid(format!(
            "training vectors have class counts {counts:?}, model was fitted on {:?}",
            model.class_counts
        )));
    }
    let scalars = model
        .scalars
        .iter()
        .map(|d| InterpretationRow::from_params(d.feature.name().to_string(), &d.classes))
        .collect::<Result<Vec<_>>>()?;
    let mut trigrams = model
        .trigrams
        .iter()
        .map(|d| InterpretationRow::from_params(d.trigram.clone(), &d.classes))
        .collect::<Result<Vec<_>>>()?;
    trigrams.sort_by(|a, b| {
        b.difference
            .abs()
            .total_cmp(&a.difference.abs())
            .then_with(|| a.dimension.cmp(&b.dimension))
    });
    trigrams.truncate(top_k);
    Ok(Interpretation { scalars, trigrams })
}

pub fn nbcp_table_csv(reports: &[NbcpReport]) -> String {
    let mut out = String::from("statistic");
    for r in reports {
        let _ = write!(out, ",{}", r.test);
    }
    out.push('\n');
    let mut row = |name: &str, f: &dyn Fn(&NbcpReport) -> String| {
        out.push_str(name);
        for r in reports {
            out.push(',');
            out.push_str(&f(r));
        }
        out.push('\n');
    };
    row("number_of_synsets", &|r| {
        r.test_set.summary.synsets.to_string()
    });
    row("percent_changed", &|r| format!("{:.1}", r.percent_changed));
    row("percent_stable", &|r| format!("{:.1}", r.percent_stable));
    row("precision_random", &|r| {
        format!("{:.1}", r.random.metrics.precision)
    });
    row("recall_random", &|r| {
        format!("{:.1}", r.random.metrics.recall)
    });
    row("f_score_random", &|r| {
        format!("{:.1}", r.random.metrics.f_score)
    });
    row("precision_nbcp", &|r| format!("{:.1}", r.metrics.precision));
    row("recall_nbcp", &|r| format!("{:.1}", r.metrics.recall));
    row("f_score_nbcp", &|r| format!("{:.1}", r.metrics.f_score));
    out
}

/// One row per feature, one column per test window.
pub fn ablation_csv(results: &[AblationResult]) -> String {
    let mut tests: Vec<&str> = results.iter().map(|r| r.test.as_str()).collect();
    tests.sort();
    tests.dedup();
    let mut out = String::from("feature");
    for t in &tests {
        let _ = write!(out, ",{t},{t}_significant_{ABLATION_SIGNIFICANCE_TEST}");
    }
    out.push('\n');
    for f in Feature::ALL {
        out.push_str(f.name());
        for t in &tests {
            match results.iter().find(|r| r.spec.feature == f && r.test == *t) {
                Some(r) => {
                    let _ = write!(out, ",{:.2},{}", r.delta, r.significant);
                }
                None => out.push_str(",,"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("cycle,test,future,nbcp_f,random_f,percent_changed,synsets\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.1},{:.1},{:.1},{}",
            r.cycle, r.test, r.future, r.nbcp_f, r.random_f, r.percent_changed, r.synsets
        );
    }
    out
}

pub fn interpretation_csv(rows: &[InterpretationRow]) -> String {
    let mut out =
        String::from("dimension,loser_mean,winner_mean,difference,significant,suggests\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.4},{:.4},{:.4},{},{}",
            r.dimension,
            r.loser_mean,
            r.winner_mean,
            r.difference,
            r.significant,
            r.suggests()
        );
    }
    out
}

/// Scores saved predictions against a dataset, with the seeded random
/// baseline alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub test_set: DatasetReport,
    pub counts: ContingencyCounts,
    pub metrics: PercentMetrics,
    pub intervals: MetricIntervals,
    pub ties: usize,
    pub random: RandomReport,
}

pub fn evaluation_report(
    dataset: &Dataset,
    predictions: &[Prediction],
    seed: u64,
) -> Result<(EvaluationReport, Evaluation)> {
    let evaluation = evaluate(dataset, predictions)?;
    let n = dataset.snapshots.len().max(1) as u64;
    let report = EvaluationReport {
        test_set: dataset.into(),
        counts: evaluation.counts,
        metrics: evaluation.metrics.into(),
        intervals: metric_intervals(&evaluation.metrics, n)?,
        ties: evaluation.ties,
        random: random_report(dataset, seed)?,
    };
    Ok((report, evaluation))
}

/// One row per dataset: window, synsets, words, words per synset, percent changed.
pub fn dataset_summary_csv(rows: &[(String, DatasetReport)]) -> String {
    let mut out = String::from(
        "dataset,past,present,future,synsets,words,words_per_synset,percent_changed,removed\n",
    );
    for (name, d) in rows {
        let _ = writeln!(
            out,
            "{name},{},{},{},{},{},{:.2},{:.1},{}",
            d.window.past,
            d.window.present,
            d.window.future,
            d.summary.synsets,
            d.summary.words,
            d.summary.words_per_synset,
            d.summary.change_percent,
            d.removal_log.values().sum::<usize>()
        );
    }
    out
}

pub fn change_histogram_csv(h: &ChangeHistogram) -> String {
    let mut out = String::from("changes_at_least,synsets,percent\n");
    for r in &h.rows {
        let _ = writeln!(out, "{},{},{:.1}", r.changes, r.synsets, r.percent);
    }
    out
}

/// Writes `report.json`, `predictions.tsv` and `outcomes.tsv` for one run under
/// `root/<experiment>/<cycle>/<window>/`, returning that directory.
pub fn write_run(root: &Path, experiment: &str, run: &NbcpRun) -> Result<PathBuf> {
    let dir = root
        .join(experiment)
        .join(run.report.cycle.to_string())
        .join(run.report.test_set.window.label());
    write_atomic(
        &dir.join("report.json"),
        serde_json::to_string_pretty(&run.report)?.as_bytes(),
    )?;
    write_atomic(
        &dir.join("predictions.tsv"),
        predictions_to_tsv(&run.predictions).as_bytes(),
    )?;
    write_atomic(
        &dir.join("outcomes.tsv"),
        outcomes_to_tsv(&run.evaluation.outcomes).as_bytes(),
    )?;
    Ok(dir)
}
