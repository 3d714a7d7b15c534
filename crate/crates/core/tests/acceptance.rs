//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for
//! each, and exits non-zero if any failed.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use lexevo::corpus::synset_annual_shares;
use lexevo::dataset::{
    build_dataset, schedule_windows, Dataset, MemberCounts, ScheduleConfig, SynsetSnapshot,
    TimeWindow,
};
use lexevo::evaluate::{
    evaluate, metrics, random_baseline, wilson_interval_for, ContingencyCounts, Prediction,
};
use lexevo::experiments::{
    interpret_model, interpretation_csv, prepare_cycle, run_nbcp, write_run,
};
use lexevo::features::{dataset_features, Feature, FeatureMask, FeatureVector, TrigramSet};
use lexevo::lexicon::{LexPos, SenseId};
use lexevo::model::{NaiveBayesModel, VARIANCE_FLOOR};
use lexevo::pipeline::{load_inputs, with_workers, InputPaths, Inputs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type RunFiles = (BTreeMap<String, Vec<u8>>, f64, Duration);

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn table2_paths() -> InputPaths {
    let dir = fixtures().join("table2");
    InputPaths {
        corpus: vec![dir.join("corpus.tsv")],
        lexicon: dir.join("lexicon.tsv"),
        catvar: Some(dir.join("catvar.tsv")),
        syllables: Some(dir.join("syllables.tsv")),
    }
}

fn synthetic_paths() -> InputPaths {
    let dir = fixtures().join("synthetic");
    InputPaths {
        corpus: vec![dir.join("corpus-a.tsv"), dir.join("corpus-b.tsv")],
        lexicon: dir.join("lexicon.tsv"),
        catvar: None,
        syllables: None,
    }
}

fn near(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn test1() -> TimeWindow {
    TimeWindow::new(1850, 1900, 1950).unwrap()
}

struct Expected {
    lemma: &'static str,
    length: f64,
    syllables: u32,
    unique: &'static [&'static str],
    shared: f64,
    variations: u32,
    growth: f64,
    extrapolation: f64,
    age: u32,
    class: u8,
}

fn table4_vectors() -> Outcome {
    let start = Instant::now();
    let (inputs, _) = load_inputs(&table2_paths()).map_err(|e| e.to_string())?;
    let dataset = build_dataset(&inputs.synsets, &inputs.corpus, &test1(), inputs.half_width);
    let vectors =
        dataset_features(&dataset, &inputs.feature_context(), true).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let expected = [
        Expected {
            lemma: "rapturous",
            length: 0.9,
            syllables: 3,
            unique: &["uro", "rou", "ous", "us|"],
            shared: 0.556,
            variations: 3,
            growth: -0.122,
            extrapolation: 0.119,
            age: 258,
            class: 0,
        },
        Expected {
            lemma: "ecstatic",
            length: 0.8,
            syllables: 3,
            unique: &["|ec", "ecs", "cst", "sta", "tat", "ati", "tic"],
            shared: 0.125,
            variations: 2,
            growth: 0.107,
            extrapolation: 0.449,
            age: 213,
            class: 1,
        },
    ];
    for e in &expected {
        let v = vectors
            .iter()
            .find(|v| v.sense.lemma == e.lemma)
            .ok_or_else(|| format!("no vector for {}", e.lemma))?;
        let unique: BTreeSet<String> = v.unique_ngrams.iter().map(String::from).collect();
        check!(
            near(v.normalized_length, e.length, 1e-3),
            "{} length {}",
            e.lemma,
            v.normalized_length
        );
        check!(
            v.syllable_count == e.syllables,
            "{} syllables {}",
            e.lemma,
            v.syllable_count
        );
        check!(
            unique == set(e.unique),
            "{} unique trigrams {unique:?}",
            e.lemma
        );
        check!(
            near(v.shared_ngrams, e.shared, 1e-3),
            "{} shared {}",
            e.lemma,
            v.shared_ngrams
        );
        check!(
            v.categorial_variations == e.variations,
            "{} variations {}",
            e.lemma,
            v.categorial_variations
        );
        check!(
            near(v.relative_growth, e.growth, 1e-3),
            "{} growth {}",
            e.lemma,
            v.relative_growth
        );
        check!(
            near(v.linear_extrapolation, e.extrapolation, 1e-3),
            "{} extrapolation {}",
            e.lemma,
            v.linear_extrapolation
        );
        check!(v.present_age == e.age, "{} age {}", e.lemma, v.present_age);
        check!(
            v.target_class == Some(e.class),
            "{} class {:?}",
            e.lemma,
            v.target_class
        );
    }
    check!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("rapturous and ecstatic match in {elapsed:?}"))
}

/// 11-year sums read straight from the fixture file.
fn fixture_sums(center: i32) -> BTreeMap<String, u64> {
    let text = std::fs::read_to_string(fixtures().join("table2/corpus.tsv")).unwrap();
    let mut sums = BTreeMap::new();
    for line in text.lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        let year: i32 = cols[1].parse().unwrap();
        if (year - center).abs() <= 5 {
            *sums.entry(cols[0].to_string()).or_insert(0) += cols[2].parse::<u64>().unwrap();
        }
    }
    sums
}

fn relative_frequency_arithmetic() -> Outcome {
    let members = [
        "rapturous_ADJ",
        "ecstatic_ADJ",
        "rapt_ADJ",
        "enraptured_ADJ",
        "rhapsodic_ADJ",
    ];
    let past = fixture_sums(1850);
    let present = fixture_sums(1900);
    let past_total: u64 = members.iter().map(|m| past[*m]).sum();
    let present_total: u64 = members.iter().map(|m| present[*m]).sum();
    check!(past_total == 23843, "1850 total {past_total}");
    check!(present_total == 63630, "1900 total {present_total}");
    check!(
        present["ecstatic_ADJ"] == 21716,
        "ecstatic 1900 count {}",
        present["ecstatic_ADJ"]
    );
    let f1 = past["ecstatic_ADJ"] as f64 / past_total as f64;
    let f2 = present["ecstatic_ADJ"] as f64 / present_total as f64;
    check!(f2 == 21716.0 / 63630.0, "f2 {f2}");
    let extrapolation = 2.0 * f2 - f1;
    check!(
        near(extrapolation, 0.449, 1e-3),
        "extrapolation {extrapolation}"
    );

    let (inputs, _) = load_inputs(&table2_paths()).map_err(|e| e.to_string())?;
    let dataset = build_dataset(&inputs.synsets, &inputs.corpus, &test1(), inputs.half_width);
    let vectors =
        dataset_features(&dataset, &inputs.feature_context(), true).map_err(|e| e.to_string())?;
    let v = vectors
        .iter()
        .find(|v| v.sense.lemma == "ecstatic")
        .ok_or("no ecstatic")?;
    check!(
        near(v.linear_extrapolation, extrapolation, 1e-12),
        "library gives {}",
        v.linear_extrapolation
    );
    Ok(format!("f2 = {f2:.4}, 2*f2 - f1 = {extrapolation:.4}"))
}

fn metric_identities() -> Outcome {
    // precision 1581/3100 = 0.510, recall 1581/5100 = 0.310
    let counts = ContingencyCounts {
        tp: 1581,
        fp: 1519,
        fn_: 3519,
        tn: 1000,
    };
    let m = metrics(&counts);
    check!(
        near(m.precision, 0.510, 1e-12) && near(m.recall, 0.310, 1e-12),
        "{m:?}"
    );
    check!(near(m.f_score, 0.385, 1e-3), "F {}", m.f_score);

    let (inputs, _) = load_inputs(&synthetic_paths()).map_err(|e| e.to_string())?;
    let dataset = build_dataset(&inputs.synsets, &inputs.corpus, &test1(), inputs.half_width);
    check!(
        dataset.summary().change_percent > 0.0,
        "fixture has no changes"
    );
    let never_change: Vec<Prediction> = dataset
        .snapshots
        .iter()
        .flat_map(|s| {
            let leader = s.present_leader();
            s.members.iter().enumerate().map(move |(i, m)| Prediction {
                synset_id: s.synset_id.clone(),
                sense: m.sense.clone(),
                probability: if i == leader { 1.0 } else { 0.0 },
                score: if i == leader { 1.0 } else { 0.0 },
            })
        })
        .collect();
    let e = evaluate(&dataset, &never_change).map_err(|e| e.to_string())?;
    let z = &e.metrics;
    check!(
        (z.precision, z.recall, z.f_score) == (0.0, 0.0, 0.0),
        "never-change {z:?}"
    );
    Ok(format!(
        "F = {:.4}; never-change guesser gives (0, 0, 0)",
        m.f_score
    ))
}

fn wilson_check() -> Outcome {
    let (lo, hi) = wilson_interval_for(0.5, 3484, 0.95).map_err(|e| e.to_string())?;
    let half = (hi - lo) / 2.0;
    check!(near(half, 0.0166, 0.0005), "half-width {half}");
    Ok(format!("half-width {half:.4}"))
}

fn window_schedule() -> Outcome {
    let cfg = ScheduleConfig::default();
    let w = |p, q, f| TimeWindow::new(p, q, f).unwrap();
    let fifty = schedule_windows(50, &cfg).map_err(|e| e.to_string())?;
    let flat: Vec<TimeWindow> = fifty.iter().flat_map(|p| [p.train, p.test]).collect();
    let expected = vec![
        w(1800, 1850, 1900),
        w(1850, 1900, 1950),
        w(1850, 1900, 1950),
        w(1900, 1950, 2000),
    ];
    check!(flat == expected, "cycle 50: {flat:?}");
    let thirty: Vec<i32> = schedule_windows(30, &cfg)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|p| p.test.future)
        .collect();
    check!(
        thirty == vec![1910, 1940, 1970, 2000],
        "cycle 30 futures {thirty:?}"
    );
    let sixty = cfg.periods(60);
    check!(
        sixty == vec![1820, 1880, 1940, 2000],
        "cycle 60 periods {sixty:?}"
    );
    let sixty_pairs = schedule_windows(60, &cfg).map_err(|e| e.to_string())?;
    check!(
        sixty_pairs.len() == 1
            && sixty_pairs[0].train == w(1820, 1880, 1940)
            && sixty_pairs[0].test == w(1880, 1940, 2000),
        "cycle 60 pairs {sixty_pairs:?}"
    );
    Ok("cycles 30, 50 and 60 exact".into())
}

/// Straightforward reference for the model: per-class mean, unbiased
/// variance with the floor, add-one priors, and the log-odds summed
/// dimension by dimension.
struct Oracle {
    priors: [f64; 2],
    dims: Vec<(String, [(f64, f64); 2])>,
}

fn oracle_value(v: &FeatureVector, dim: &str) -> f64 {
    match dim.strip_prefix("tri:") {
        Some(t) => f64::from(u8::from(v.unique_ngrams.contains(t))),
        None => v.scalar(dim.parse::<Feature>().unwrap()).unwrap(),
    }
}

fn oracle_fit(vectors: &[FeatureVector], dims: &[String]) -> Oracle {
    let n = vectors.len() as f64;
    let class = |c: u8| -> Vec<&FeatureVector> {
        vectors
            .iter()
            .filter(|v| v.target_class == Some(c))
            .collect()
    };
    let groups = [class(0), class(1)];
    let priors = [0, 1].map(|c| (groups[c].len() as f64 + 1.0) / (n + 2.0));
    let dims = dims
        .iter()
        .map(|d| {
            let params = [0, 1].map(|c| {
                let xs: Vec<f64> = groups[c].iter().map(|v| oracle_value(v, d)).collect();
                let k = xs.len() as f64;
                let mean = xs.iter().sum::<f64>() / k;
                let var = if xs.len() < 2 {
                    0.0
                } else {
                    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0)
                };
                (mean, var.max(1e-9))
            });
            (d.clone(), params)
        })
        .collect();
    Oracle { priors, dims }
}

fn oracle_probability(o: &Oracle, v: &FeatureVector) -> f64 {
    let log_pdf = |(m, s2): (f64, f64), x: f64| {
        -0.5 * (2.0 * std::f64::consts::PI * s2).ln() - (x - m) * (x - m) / (2.0 * s2)
    };
    let mut odds = o.priors[1].ln() - o.priors[0].ln();
    for (d, p) in &o.dims {
        let x = oracle_value(v, d);
        odds += log_pdf(p[1], x) - log_pdf(p[0], x);
    }
    1.0 / (1.0 + (-odds).exp())
}

fn random_case(rng: &mut ChaCha8Rng) -> (Vec<FeatureVector>, FeatureMask, Vec<String>) {
    let n = rng.gen_range(2..=20);
    let scalar_count = rng.gen_range(0..=6usize);
    let mut scalars = Feature::SCALARS.to_vec();
    while scalars.len() > scalar_count {
        scalars.remove(rng.gen_range(0..scalars.len()));
    }
    let vocab_size = 6 - scalar_count;
    let vocab: Vec<String> = ["abc", "bcd", "cde", "def", "efg", "fgh"][..vocab_size]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut mask = FeatureMask::all();
    for f in Feature::SCALARS {
        if !scalars.contains(&f) {
            mask = mask.without(f);
        }
    }
    if vocab.is_empty() {
        mask = mask.without(Feature::UniqueNgrams);
    }
    let classes: Vec<u8> = loop {
        let cs: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        if cs.contains(&0) && cs.contains(&1) {
            break cs;
        }
    };
    let vectors: Vec<FeatureVector> = classes
        .iter()
        .enumerate()
        .map(|(i, &c)| FeatureVector {
            synset_id: format!("s{}", i / 2),
            sense: SenseId::new(format!("word{i:02}"), LexPos::Noun, 1),
            normalized_length: rng.gen_range(0.2..1.0),
            syllable_count: rng.gen_range(1..6),
            unique_ngrams: vocab
                .iter()
                .filter(|_| rng.gen_bool(0.4))
                .cloned()
                .collect::<TrigramSet>(),
            shared_ngrams: rng.gen_range(0.0..1.0),
            categorial_variations: rng.gen_range(0..4),
            relative_growth: rng.gen_range(-0.5..0.5),
            linear_extrapolation: rng.gen_range(-0.5..1.5),
            present_age: rng.gen_range(0..400),
            target_class: Some(c),
        })
        .collect();
    let mut dims: Vec<String> = scalars.iter().map(|f| f.name().to_string()).collect();
    let seen: BTreeSet<&str> = vectors
        .iter()
        .flat_map(|v| v.unique_ngrams.iter())
        .collect();
    dims.extend(seen.iter().map(|t| format!("tri:{t}")));
    (vectors, mask, dims)
}

fn naive_bayes_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let (vectors, mask, dims) = random_case(&mut rng);
        let model =
            NaiveBayesModel::fit_with(&vectors, mask).map_err(|e| format!("case {case}: {e}"))?;
        let oracle = oracle_fit(&vectors, &dims);
        for c in 0..2 {
            check!(
                near(model.priors[c], oracle.priors[c], 1e-12),
                "case {case}: prior {c}"
            );
        }
        let scalar_dims = model
            .scalars
            .iter()
            .map(|d| (d.feature.name().to_string(), d.classes));
        let trigram_dims = model
            .trigrams
            .iter()
            .map(|d| (format!("tri:{}", d.trigram), d.classes));
        let fitted: Vec<_> = scalar_dims.chain(trigram_dims).collect();
        check!(
            fitted.len() == oracle.dims.len(),
            "case {case}: {} dims vs {}",
            fitted.len(),
            oracle.dims.len()
        );
        for (name, params) in &fitted {
            let (_, reference) = oracle
                .dims
                .iter()
                .find(|(d, _)| d == name)
                .ok_or(format!("case {case}: dim {name}"))?;
            for c in 0..2 {
                let (m, s2) = reference[c];
                worst = worst
                    .max((params[c].mean - m).abs())
                    .max((params[c].variance - s2).abs());
                check!(
                    near(params[c].mean, m, 1e-9) && near(params[c].variance, s2, 1e-9),
                    "case {case}: {name} class {c}: {:?} vs ({m}, {s2})",
                    params[c]
                );
                check!(params[c].variance >= VARIANCE_FLOOR, "case {case}: floor");
            }
        }
        for v in &vectors {
            let p = model.win_probability(v);
            let q = oracle_probability(&oracle, v);
            worst = worst.max((p - q).abs());
            check!(
                near(p, q, 1e-9),
                "case {case}: {} probability {p} vs {q}",
                v.sense
            );
        }
    }
    let elapsed = start.elapsed();
    check!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!(
        "1000 cases, max deviation {worst:.1e}, {elapsed:?}"
    ))
}

/// Runs the synthetic fixture end to end under `workers` threads and returns
/// every written file, Test1 F and the runtime.
fn synthetic_run(workers: usize) -> Result<RunFiles, String> {
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let f = with_workers(workers, || -> lexevo::Result<f64> {
        let (inputs, _) = load_inputs(&synthetic_paths())?;
        let mut f = f64::NAN;
        for pair in prepare_cycle(&inputs, 50)? {
            let run = run_nbcp(&pair, &inputs)?;
            if pair.index == 1 {
                f = run.evaluation.metrics.f_score;
            }
            write_run(out.path(), "nbcp", &run)?;
            let model = run.model.to_json()?;
            lexevo::io::write_atomic(
                &out.path().join(format!("model-{}.json", pair.index)),
                model.as_bytes(),
            )?;
        }
        Ok(f)
    })
    .map_err(|e| e.to_string())?
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mut files = BTreeMap::new();
    let mut stack = vec![out.path().to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(out.path()).unwrap().display().to_string();
                files.insert(rel, std::fs::read(&path).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok((files, f, elapsed))
}

fn synthetic_end_to_end() -> Outcome {
    let (reference, f, elapsed) = synthetic_run(1)?;
    check!(f >= 0.95, "Test1 F {f}");
    check!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    check!(
        reference.len() >= 8,
        "only {} report files",
        reference.len()
    );
    for workers in [2, 8, 8] {
        let (files, _, elapsed) = synthetic_run(workers)?;
        check!(
            elapsed < Duration::from_secs(30),
            "{workers} workers took {elapsed:?}"
        );
        check!(files == reference, "reports differ with {workers} workers");
    }
    Ok(format!(
        "Test1 F = {f:.3}; {} files byte-identical across 1/2/8/8 workers; {elapsed:?} per run",
        reference.len()
    ))
}

fn random_baseline_expectation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let snapshots: Vec<SynsetSnapshot> = (0..10_000)
        .map(|i| {
            let changed = rng.gen_bool(0.3);
            let (a_present, a_future) = if changed { (60, 40) } else { (60, 70) };
            SynsetSnapshot {
                synset_id: format!("s{i:05}"),
                members: vec![
                    MemberCounts {
                        sense: SenseId::new(format!("alpha{i}"), LexPos::Noun, 1),
                        past: 10,
                        present: a_present,
                        future: a_future,
                    },
                    MemberCounts {
                        sense: SenseId::new(format!("beta{i}"), LexPos::Noun, 1),
                        past: 10,
                        present: 100 - a_present,
                        future: 100 - a_future,
                    },
                ],
            }
        })
        .collect();
    let dataset = Dataset {
        window: test1(),
        half_width: 5,
        snapshots,
        removal_log: BTreeMap::new(),
    };
    let m = random_baseline(&dataset, 42);
    check!(near(m.recall, 0.5, 0.02), "recall {}", m.recall);
    Ok(format!(
        "recall {:.4} over 10,000 two-word synsets",
        m.recall
    ))
}

fn interpretation_oracle() -> Outcome {
    let (inputs, _): (Inputs, _) = load_inputs(&synthetic_paths()).map_err(|e| e.to_string())?;
    let pair = prepare_cycle(&inputs, 50)
        .map_err(|e| e.to_string())?
        .into_iter()
        .next()
        .ok_or("no window pair")?;
    let model = NaiveBayesModel::fit(&pair.train_vectors).map_err(|e| e.to_string())?;
    let report = interpret_model(&model, &pair.train_vectors, 12).map_err(|e| e.to_string())?;
    let class_mean = |c: u8, value: &dyn Fn(&FeatureVector) -> f64| {
        let xs: Vec<f64> = pair
            .train_vectors
            .iter()
            .filter(|v| v.target_class == Some(c))
            .map(value)
            .collect();
        xs.iter().sum::<f64>() / xs.len() as f64
    };
    check!(
        report.scalars.len() == 7,
        "{} scalar rows",
        report.scalars.len()
    );
    for row in &report.scalars {
        let f: Feature = row
            .dimension
            .parse()
            .map_err(|_| format!("bad row {}", row.dimension))?;
        let value = |v: &FeatureVector| v.scalar(f).unwrap();
        let diff = class_mean(1, &value) - class_mean(0, &value);
        check!(
            near(row.difference, diff, 1e-12),
            "{}: {} vs {diff}",
            row.dimension,
            row.difference
        );
    }
    let vocabulary: BTreeSet<&str> = pair
        .train_vectors
        .iter()
        .flat_map(|v| v.unique_ngrams.iter())
        .collect();
    let mut brute: Vec<(String, f64)> = vocabulary
        .iter()
        .map(|t| {
            let value = |v: &FeatureVector| f64::from(u8::from(v.unique_ngrams.contains(t)));
            (t.to_string(), class_mean(1, &value) - class_mean(0, &value))
        })
        .collect();
    brute.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.cmp(&b.0)));
    check!(
        report.trigrams.len() == 12.min(brute.len()),
        "{} trigram rows",
        report.trigrams.len()
    );
    for (row, (t, d)) in report.trigrams.iter().zip(&brute) {
        check!(row.dimension == *t, "rank order: {} vs {t}", row.dimension);
        check!(
            near(row.difference, *d, 1e-12),
            "{t}: {} vs {d}",
            row.difference
        );
    }
    let top = &report.trigrams[0];
    check!(
        top.dimension == "zzz" && top.difference > 0.0,
        "top trigram {top:?}"
    );
    let table = interpretation_csv(&report.trigrams);
    check!(
        table.lines().nth(1).is_some_and(|l| l.starts_with("zzz,")),
        "table:\n{table}"
    );
    Ok(format!(
        "7 scalar and {} trigram rows match; zzz first ({:+.3})",
        report.trigrams.len(),
        top.difference
    ))
}

fn share_rows() -> Outcome {
    let (inputs, _) = load_inputs(&table2_paths()).map_err(|e| e.to_string())?;
    let synset = inputs.lexicon.find("a00001").ok_or("no a00001")?;
    let series: Vec<_> = synset
        .members
        .iter()
        .map(|m| inputs.corpus.get(&m.corpus_key()))
        .collect();
    let rows = synset_annual_shares(&series, 1800..=2000);
    check!(rows.len() == 201, "{} rows", rows.len());
    let mut worst: f64 = 0.0;
    for row in &rows {
        check!(!row.flagged, "{} flagged", row.year);
        let sum: f64 = row.shares.iter().sum();
        worst = worst.max((sum - 1.0).abs());
        check!(near(sum, 1.0, 1e-12), "{}: sum {sum}", row.year);
    }
    Ok(format!("201 rows, max |sum - 1| = {worst:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 feature vectors for rapturous/ecstatic", table4_vectors),
        (
            "2 relative-frequency arithmetic",
            relative_frequency_arithmetic,
        ),
        ("3 metric identities", metric_identities),
        ("4 Wilson half-width", wilson_check),
        ("5 window schedule", window_schedule),
        ("6 naive Bayes oracle", naive_bayes_oracle),
        ("7 synthetic end-to-end run", synthetic_end_to_end),
        ("8 random-baseline recall", random_baseline_expectation),
        ("9 interpretation oracle", interpretation_oracle),
        ("10 annual share rows", share_rows),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
