mod config;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lexevo::corpus::{shares_csv, synset_annual_shares};
use lexevo::dataset::{
    build_dataset, change_statistics, schedule_windows, Dataset, DatasetSidecar, TimeWindow,
};
use lexevo::evaluate::{predictions_from_tsv, predictions_to_tsv};
use lexevo::experiments::{
    ablation_csv, change_histogram_csv, dataset_summary_csv, evaluation_report, interpret_model,
    interpretation_csv, nbcp_table_csv, predict, prepare_cycle, run_ablation_table,
    run_cycle_sweep, run_nbcp, sweep_csv, write_run, AblationMode, DatasetReport,
};
use lexevo::features::{dataset_features, features_from_tsv, features_to_tsv, FeatureVector};
use lexevo::io::{open_text, read_to_string, write_atomic};
use lexevo::model::NaiveBayesModel;
use lexevo::pipeline::{
    corpus_filter, load_catvar_file, load_inputs, load_lexicon_file, with_workers, InputPaths,
    Inputs,
};

use config::{parse_config, CommonArgs, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] lexevo::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "evocli",
    version,
    about = "Predict which synonym will lead its synset"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    DropOne,
    SingleOnly,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter corpus files down to the words the lexicon and clusters need.
    Ingest,
    /// Build window datasets (every window of the cycle unless --window is given).
    BuildDataset {
        /// `PAST,PRESENT,FUTURE`
        #[arg(long)]
        window: Option<String>,
    },
    /// Feature vectors for a dataset written by build-dataset.
    ExtractFeatures {
        #[arg(long)]
        dataset: PathBuf,
        /// Include the target class (for training data).
        #[arg(long)]
        with_target: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit the model on a feature file, or on the first training window of the cycle.
    Train {
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Score a feature file with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Score saved predictions, or run every window pair of the cycle.
    Evaluate {
        #[arg(long, requires = "predictions")]
        dataset: Option<PathBuf>,
        #[arg(long, requires = "dataset")]
        predictions: Option<PathBuf>,
    },
    /// Feature ablations over every window pair of the cycle.
    Ablate {
        /// Both modes when omitted.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Full runs for several cycle lengths.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "30,40,50,60")]
        cycles: Vec<u32>,
    },
    /// Per-class means of a fitted model and its most telling trigrams.
    Interpret {
        #[arg(long, requires = "features")]
        model: Option<PathBuf>,
        /// Training feature file the model was fitted on.
        #[arg(long, requires = "model")]
        features: Option<PathBuf>,
        #[arg(long, default_value_t = lexevo::experiments::DEFAULT_TOP_TRIGRAMS)]
        top: usize,
    },
    /// Annual shares of each synset member as CSV.
    PlotData {
        #[arg(long)]
        synset: String,
        #[arg(long, default_value_t = 1800)]
        from: i32,
        #[arg(long, default_value_t = 2000)]
        to: i32,
        /// Written to stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn input_paths(config: &RunConfig) -> CliResult<InputPaths> {
    if config.corpus.is_empty() {
        return Err(CliError::Usage("--corpus is required".into()));
    }
    Ok(InputPaths {
        corpus: config.corpus.clone(),
        lexicon: config.lexicon()?,
        catvar: config.catvar.clone(),
        syllables: config.syllables.clone(),
    })
}

fn load(config: &RunConfig) -> CliResult<Inputs> {
    let (mut inputs, report) = load_inputs(&input_paths(config)?)?;
    if report.rows_skipped > 0 {
        log::warn!(
            "skipped {} malformed corpus rows, e.g. {:?}",
            report.rows_skipped,
            report.sample_errors.first()
        );
    }
    inputs.half_width = config.half_width;
    inputs.schedule.anchor_year = config.anchor_year;
    inputs.schedule.floor_year = config.floor_year;
    inputs.seed = config.seed;
    Ok(inputs)
}

fn check_cycle(inputs: &Inputs, cycle: u32) -> CliResult {
    let s = &inputs.schedule;
    if !(s.min_cycle..=s.max_cycle).contains(&cycle) {
        return Err(CliError::Usage(format!(
            "cycle {cycle} outside [{}, {}]",
            s.min_cycle, s.max_cycle
        )));
    }
    Ok(())
}

fn parse_window(text: &str) -> CliResult<TimeWindow> {
    let years: Vec<i32> = text
        .split([',', '-'])
        .map(|y| y.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("window `{text}`: expected PAST,PRESENT,FUTURE")))?;
    match years[..] {
        [p, q, f] => TimeWindow::new(p, q, f).map_err(|e| CliError::Usage(e.to_string())),
        _ => Err(CliError::Usage(format!(
            "window `{text}`: expected three years"
        ))),
    }
}

fn write_text(path: &Path, text: &str) -> CliResult {
    write_atomic(path, text.as_bytes())?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(lexevo::Error::from)?;
    write_text(path, &text)
}

fn sidecar_path(dataset: &Path) -> PathBuf {
    dataset.with_extension("json")
}

fn read_dataset(path: &Path) -> CliResult<Dataset> {
    let sidecar: DatasetSidecar =
        serde_json::from_str(&read_to_string(&sidecar_path(path))?).map_err(lexevo::Error::from)?;
    Ok(Dataset::from_parts(open_text(path)?, &sidecar)?)
}

fn read_features(path: &Path) -> CliResult<Vec<FeatureVector>> {
    Ok(features_from_tsv(open_text(path)?)?)
}

fn ingest(config: &RunConfig) -> CliResult {
    let paths = input_paths(config)?;
    let lexicon = load_lexicon_file(&paths)?;
    let catvar = load_catvar_file(&paths)?;
    let filter = corpus_filter(&lexicon, &catvar);
    let (table, report) = lexevo::corpus::load_corpus_files(&paths.corpus, &filter)?;
    let mut bytes = Vec::new();
    table.write_tsv(&mut bytes)?;
    write_atomic(&config.out.join("corpus.tsv"), &bytes)?;
    write_json(&config.out.join("ingest.json"), &report)?;
    println!(
        "kept {} of {} rows ({} malformed), {} series",
        report.rows_kept,
        report.rows_read,
        report.rows_skipped,
        table.len()
    );
    Ok(())
}

fn save_dataset(dir: &Path, d: &Dataset) -> CliResult<PathBuf> {
    let path = dir.join(format!("{}.tsv", d.window.label()));
    write_text(&path, &d.to_tsv())?;
    write_json(&sidecar_path(&path), &d.sidecar())?;
    Ok(path)
}

fn build_datasets(config: &RunConfig, window: Option<&str>) -> CliResult {
    let inputs = load(config)?;
    let dir = config.out.join("datasets");
    if let Some(w) = window {
        let d = build_dataset(
            &inputs.synsets,
            &inputs.corpus,
            &parse_window(w)?,
            inputs.half_width,
        );
        println!("{}", save_dataset(&dir, &d)?.display());
        return Ok(());
    }
    check_cycle(&inputs, config.cycle)?;
    let pairs = schedule_windows(config.cycle, &inputs.schedule)?;
    let mut rows = Vec::new();
    for (i, pair) in pairs.iter().enumerate() {
        for (name, window) in [
            (format!("Train{}", i + 1), pair.train),
            (format!("Test{}", i + 1), pair.test),
        ] {
            let d = build_dataset(&inputs.synsets, &inputs.corpus, &window, inputs.half_width);
            save_dataset(&dir, &d)?;
            rows.push((name, DatasetReport::from(&d)));
        }
    }
    let cycle_dir = dir.join(config.cycle.to_string());
    write_text(&cycle_dir.join("summary.csv"), &dataset_summary_csv(&rows))?;
    let periods = inputs.schedule.periods(config.cycle);
    let changes = change_statistics(&inputs.synsets, &inputs.corpus, &periods, inputs.half_width)?;
    write_text(
        &cycle_dir.join("change_statistics.csv"),
        &change_histogram_csv(&changes),
    )?;
    print!("{}", dataset_summary_csv(&rows));
    Ok(())
}

fn extract_features(
    config: &RunConfig,
    dataset: &Path,
    with_target: bool,
    output: Option<PathBuf>,
) -> CliResult {
    let inputs = load(config)?;
    let d = read_dataset(dataset)?;
    let vectors = dataset_features(&d, &inputs.feature_context(), with_target)?;
    let suffix = if with_target { "train" } else { "test" };
    let path = output.unwrap_or_else(|| {
        config
            .out
            .join("features")
            .join(format!("{}.{suffix}.tsv", d.window.label()))
    });
    write_text(&path, &features_to_tsv(&vectors))?;
    println!("{}", path.display());
    Ok(())
}

fn first_pair_training(config: &RunConfig) -> CliResult<Vec<FeatureVector>> {
    let inputs = load(config)?;
    check_cycle(&inputs, config.cycle)?;
    let pair = prepare_cycle(&inputs, config.cycle)?
        .into_iter()
        .next()
        .ok_or_else(|| CliError::Usage("cycle has no window pair".into()))?;
    Ok(pair.train_vectors)
}

fn train(config: &RunConfig, features: Option<PathBuf>, output: Option<PathBuf>) -> CliResult {
    let vectors = match features {
        Some(f) => read_features(&f)?,
        None => first_pair_training(config)?,
    };
    let model = NaiveBayesModel::fit(&vectors)?;
    let path = output.unwrap_or_else(|| config.out.join("model.json"));
    write_text(&path, &model.to_json()?)?;
    println!("{}", path.display());
    Ok(())
}

fn predict_cmd(
    config: &RunConfig,
    model: &Path,
    features: &Path,
    output: Option<PathBuf>,
) -> CliResult {
    let model = NaiveBayesModel::from_json(&read_to_string(model)?)?;
    let vectors = read_features(features)?;
    let predictions = predict(&model, &vectors);
    let path = output.unwrap_or_else(|| config.out.join("predictions.tsv"));
    write_text(&path, &predictions_to_tsv(&predictions))?;
    println!("{}", path.display());
    Ok(())
}

fn evaluate_cmd(
    config: &RunConfig,
    dataset: Option<PathBuf>,
    predictions: Option<PathBuf>,
) -> CliResult {
    if let (Some(dataset), Some(predictions)) = (dataset, predictions) {
        let d = read_dataset(&dataset)?;
        let p = predictions_from_tsv(open_text(&predictions)?)?;
        let (report, evaluation) = evaluation_report(&d, &p, config.seed)?;
        let dir = config.out.join("evaluation").join(d.window.label());
        write_json(&dir.join("report.json"), &report)?;
        write_text(
            &dir.join("outcomes.tsv"),
            &lexevo::evaluate::outcomes_to_tsv(&evaluation.outcomes),
        )?;
        println!(
            "precision {:.1} recall {:.1} F {:.1}",
            report.metrics.precision, report.metrics.recall, report.metrics.f_score
        );
        return Ok(());
    }
    let inputs = load(config)?;
    check_cycle(&inputs, config.cycle)?;
    let mut reports = Vec::new();
    for pair in prepare_cycle(&inputs, config.cycle)? {
        let run = run_nbcp(&pair, &inputs)?;
        write_run(&config.out, "nbcp", &run)?;
        reports.push(run.report);
    }
    let table = nbcp_table_csv(&reports);
    write_text(
        &config
            .out
            .join("nbcp")
            .join(config.cycle.to_string())
            .join("table.csv"),
        &table,
    )?;
    print!("{table}");
    Ok(())
}

fn ablate(config: &RunConfig, mode: Option<Mode>) -> CliResult {
    let inputs = load(config)?;
    check_cycle(&inputs, config.cycle)?;
    let pairs = prepare_cycle(&inputs, config.cycle)?;
    let modes: Vec<(AblationMode, &str)> = match mode {
        Some(Mode::DropOne) => vec![(AblationMode::DropOne, "drop_one")],
        Some(Mode::SingleOnly) => vec![(AblationMode::SingleOnly, "single_only")],
        None => vec![
            (AblationMode::DropOne, "drop_one"),
            (AblationMode::SingleOnly, "single_only"),
        ],
    };
    let dir = config.out.join("ablation").join(config.cycle.to_string());
    for (mode, name) in modes {
        let results = run_ablation_table(mode, &pairs, &inputs)?;
        let table = ablation_csv(&results);
        write_text(&dir.join(format!("{name}.csv")), &table)?;
        write_json(&dir.join(format!("{name}.json")), &results)?;
        println!("# {name}\n{table}");
    }
    Ok(())
}

fn sweep(config: &RunConfig, cycles: &[u32]) -> CliResult {
    let inputs = load(config)?;
    let (rows, runs) = run_cycle_sweep(cycles, &inputs)?;
    for run in &runs {
        write_run(&config.out, "sweep", run)?;
    }
    let table = sweep_csv(&rows);
    write_text(&config.out.join("sweep").join("sweep.csv"), &table)?;
    print!("{table}");
    Ok(())
}

fn interpret(
    config: &RunConfig,
    model: Option<PathBuf>,
    features: Option<PathBuf>,
    top: usize,
) -> CliResult {
    let (model, vectors) = match (model, features) {
        (Some(m), Some(f)) => (
            NaiveBayesModel::from_json(&read_to_string(&m)?)?,
            read_features(&f)?,
        ),
        _ => {
            let vectors = first_pair_training(config)?;
            (NaiveBayesModel::fit(&vectors)?, vectors)
        }
    };
    let report = interpret_model(&model, &vectors, top)?;
    let dir = config.out.join("interpretation");
    write_text(
        &dir.join("scalars.csv"),
        &interpretation_csv(&report.scalars),
    )?;
    write_text(
        &dir.join("trigrams.csv"),
        &interpretation_csv(&report.trigrams),
    )?;
    write_json(&dir.join("interpretation.json"), &report)?;
    print!(
        "{}\n{}",
        interpretation_csv(&report.scalars),
        interpretation_csv(&report.trigrams)
    );
    Ok(())
}

fn plot_data(
    config: &RunConfig,
    synset: &str,
    from: i32,
    to: i32,
    output: Option<PathBuf>,
) -> CliResult {
    if from > to {
        return Err(CliError::Usage(format!("--from {from} is after --to {to}")));
    }
    let inputs = load(config)?;
    let s = inputs
        .lexicon
        .find(synset)
        .ok_or_else(|| lexevo::Error::Invalid(format!("unknown synset {synset}")))?;
    let series: Vec<_> = s
        .members
        .iter()
        .map(|m| inputs.corpus.get(&m.corpus_key()))
        .collect();
    let words: Vec<String> = s.lemmas().map(String::from).collect();
    let csv = shares_csv(&words, &synset_annual_shares(&series, from..=to));
    match output {
        Some(path) => write_text(&path, &csv)?,
        None => {
            let _ = std::io::stdout().write_all(csv.as_bytes());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    let file = match &cli.common.config {
        Some(path) => parse_config(&read_to_string(path)?)?,
        None => Default::default(),
    };
    let config = RunConfig::resolve(&cli.common, &file)?;
    let workers = config.workers;
    with_workers(workers, move || match cli.command {
        Command::Ingest => ingest(&config),
        Command::BuildDataset { window } => build_datasets(&config, window.as_deref()),
        Command::ExtractFeatures {
            dataset,
            with_target,
            output,
        } => extract_features(&config, &dataset, with_target, output),
        Command::Train { features, output } => train(&config, features, output),
        Command::Predict {
            model,
            features,
            output,
        } => predict_cmd(&config, &model, &features, output),
        Command::Evaluate {
            dataset,
            predictions,
        } => evaluate_cmd(&config, dataset, predictions),
        Command::Ablate { mode } => ablate(&config, mode),
        Command::Sweep { cycles } => sweep(&config, &cycles),
        Command::Interpret {
            model,
            features,
            top,
        } => interpret(&config, model, features, top),
        Command::PlotData {
            synset,
            from,
            to,
            output,
        } => plot_data(&config, &synset, from, to, output),
    })?
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("evocli: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
