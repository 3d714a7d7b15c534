//! Loading the raw inputs once and sharing them across stages.

use std::collections::HashSet;
use std::path::PathBuf;

use crate::corpus::{load_corpus_files, CorpusTable, LoadReport, UnigramKey};
use crate::dataset::{ScheduleConfig, DEFAULT_HALF_WIDTH};
use crate::error::Result;
use crate::features::{FeatureContext, SyllableCounter};
use crate::io::open_text;
use crate::lexicon::{
    eligible_synsets, load_catvar, load_lexicon, vocabulary, BirthIndex, CatVarClusters, Lexicon,
    Synset,
};

#[derive(Debug, Clone, Default)]
pub struct InputPaths {
    pub corpus: Vec<PathBuf>,
    pub lexicon: PathBuf,
    pub catvar: Option<PathBuf>,
    pub syllables: Option<PathBuf>,
}

/// Everything the experiments read, loaded and indexed.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub lexicon: Lexicon,
    /// Synsets passing the eligibility filters, in file order.
    pub synsets: Vec<Synset>,
    pub corpus: CorpusTable,
    pub catvar: CatVarClusters,
    pub syllables: SyllableCounter,
    pub births: BirthIndex,
    pub half_width: u32,
    pub schedule: ScheduleConfig,
    pub seed: u64,
}

impl Inputs {
    pub fn new(
        lexicon: Lexicon,
        corpus: CorpusTable,
        catvar: CatVarClusters,
        syllables: SyllableCounter,
    ) -> Self {
        let synsets = eligible_synsets(&lexicon);
        let births = birth_index(&corpus);
        Inputs {
            lexicon,
            synsets,
            corpus,
            catvar,
            syllables,
            births,
            half_width: DEFAULT_HALF_WIDTH,
            schedule: ScheduleConfig::default(),
            seed: 0,
        }
    }

    pub fn feature_context(&self) -> FeatureContext<'_> {
        FeatureContext {
            catvar: &self.catvar,
            births: &self.births,
            syllables: &self.syllables,
        }
    }
}

/// Birth year of every unigram with at least one nonzero count.
pub fn birth_index(corpus: &CorpusTable) -> BirthIndex {
    corpus
        .iter()
        .filter_map(|(k, s)| crate::corpus::birth_year(Some(s)).map(|y| (k.clone(), y)))
        .collect()
}

pub fn load_lexicon_file(paths: &InputPaths) -> Result<Lexicon> {
    load_lexicon(open_text(&paths.lexicon)?)
}

pub fn load_catvar_file(paths: &InputPaths) -> Result<CatVarClusters> {
    match &paths.catvar {
        Some(p) => load_catvar(open_text(p)?),
        None => Ok(CatVarClusters::default()),
    }
}

pub fn load_syllables_file(paths: &InputPaths) -> Result<SyllableCounter> {
    match &paths.syllables {
        Some(p) => SyllableCounter::load(open_text(p)?),
        None => Ok(SyllableCounter::default()),
    }
}

/// Corpus keys the pipeline needs: members of eligible synsets plus every
/// categorial-variation cluster member.
pub fn corpus_filter(lexicon: &Lexicon, catvar: &CatVarClusters) -> HashSet<UnigramKey> {
    let eligible = eligible_synsets(lexicon);
    let mut filter = vocabulary(&eligible);
    filter.extend(catvar.vocabulary());
    filter
}

pub fn load_inputs(paths: &InputPaths) -> Result<(Inputs, LoadReport)> {
    let lexicon = load_lexicon_file(paths)?;
    let catvar = load_catvar_file(paths)?;
    let syllables = load_syllables_file(paths)?;
    let filter = corpus_filter(&lexicon, &catvar);
    let (corpus, report) = load_corpus_files(&paths.corpus, &filter)?;
    Ok((Inputs::new(lexicon, corpus, catvar, syllables), report))
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| crate::error::Error::Invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
