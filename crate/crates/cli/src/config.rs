use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;

use crate::CliError;

/// Options shared by every subcommand. Each may also come from the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// `key = value` file; flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Corpus files (comma-separated or repeated); `.gz` is decompressed.
    #[arg(long, global = true, value_delimiter = ',', value_name = "FILE")]
    pub corpus: Vec<PathBuf>,
    #[arg(long, global = true, value_name = "FILE")]
    pub lexicon: Option<PathBuf>,
    #[arg(long, global = true, value_name = "FILE")]
    pub catvar: Option<PathBuf>,
    /// Syllable-count exceptions (`lemma<TAB>count`).
    #[arg(long, global = true, value_name = "FILE")]
    pub syllables: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Cycle length in years.
    #[arg(long, global = true)]
    pub cycle: Option<u32>,
    #[arg(long, global = true)]
    pub half_width: Option<u32>,
    #[arg(long, global = true)]
    pub anchor_year: Option<i32>,
    #[arg(long, global = true)]
    pub floor_year: Option<i32>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: Vec<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub catvar: Option<PathBuf>,
    pub syllables: Option<PathBuf>,
    pub out: PathBuf,
    pub cycle: u32,
    pub half_width: u32,
    pub anchor_year: i32,
    pub floor_year: i32,
    pub seed: u64,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: Vec::new(),
            lexicon: None,
            catvar: None,
            syllables: None,
            out: PathBuf::from("reports"),
            cycle: 50,
            half_width: 5,
            anchor_year: 2000,
            floor_year: 1800,
            seed: 0,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

const KEYS: &[&str] = &[
    "corpus",
    "lexicon",
    "catvar",
    "syllables",
    "out",
    "cycle",
    "half_width",
    "anchor_year",
    "floor_year",
    "seed",
    "workers",
];

/// Parses `key = value` lines. Blank lines and `#` comments are ignored;
/// dashes in keys are read as underscores.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key = value", i + 1))
        })?;
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "config line {}: unknown key `{key}`",
                i + 1
            )));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

fn parsed<T: std::str::FromStr>(
    file: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError> {
    file.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{v}`")))
        })
        .transpose()
}

impl RunConfig {
    /// Flags override the config file, which overrides the defaults.
    pub fn resolve(
        args: &CommonArgs,
        file: &BTreeMap<String, String>,
    ) -> Result<RunConfig, CliError> {
        let d = RunConfig::default();
        let path = |key: &str| file.get(key).map(PathBuf::from);
        let corpus = if !args.corpus.is_empty() {
            args.corpus.clone()
        } else {
            file.get("corpus")
                .map(|v| {
                    v.split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(PathBuf::from)
                        .collect()
                })
                .unwrap_or_default()
        };
        let config = RunConfig {
            corpus,
            lexicon: args.lexicon.clone().or_else(|| path("lexicon")),
            catvar: args.catvar.clone().or_else(|| path("catvar")),
            syllables: args.syllables.clone().or_else(|| path("syllables")),
            out: args.out.clone().or_else(|| path("out")).unwrap_or(d.out),
            cycle: args.cycle.or(parsed(file, "cycle")?).unwrap_or(d.cycle),
            half_width: args
                .half_width
                .or(parsed(file, "half_width")?)
                .unwrap_or(d.half_width),
            anchor_year: args
                .anchor_year
                .or(parsed(file, "anchor_year")?)
                .unwrap_or(d.anchor_year),
            floor_year: args
                .floor_year
                .or(parsed(file, "floor_year")?)
                .unwrap_or(d.floor_year),
            seed: args.seed.or(parsed(file, "seed")?).unwrap_or(d.seed),
            workers: args
                .workers
                .or(parsed(file, "workers")?)
                .unwrap_or(d.workers),
        };
        if config.floor_year >= config.anchor_year {
            return Err(CliError::Usage(
                "floor_year must be before anchor_year".into(),
            ));
        }
        if config.cycle < 1 {
            return Err(CliError::Usage("cycle must be at least 1".into()));
        }
        if config.workers < 1 {
            return Err(CliError::Usage("workers must be at least 1".into()));
        }
        Ok(config)
    }

    pub fn lexicon(&self) -> Result<PathBuf, CliError> {
        self.lexicon
            .clone()
            .ok_or_else(|| CliError::Usage("--lexicon is required".into()))
    }
}
