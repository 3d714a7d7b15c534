//! Per-word feature vectors: two length features, three character features,
//! and three corpus features computed relative to the word's synset.

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::io::BufRead;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, SynsetSnapshot, TimeWindow};
use crate::error::{Error, Result};
use crate::io::content_lines;
use crate::lexicon::{categorial_variation_count, BirthIndex, CatVarClusters, SenseId};

/// The eight features. The trigram vector counts as one feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    NormalizedLength,
    SyllableCount,
    UniqueNgrams,
    SharedNgrams,
    CategorialVariations,
    RelativeGrowth,
    LinearExtrapolation,
    PresentAge,
}

impl Feature {
    pub const ALL: [Feature; 8] = [
        Feature::NormalizedLength,
        Feature::SyllableCount,
        Feature::UniqueNgrams,
        Feature::SharedNgrams,
        Feature::CategorialVariations,
        Feature::RelativeGrowth,
        Feature::LinearExtrapolation,
        Feature::PresentAge,
    ];

    /// Every feature except the trigram vector, in table order.
    pub const SCALARS: [Feature; 7] = [
        Feature::NormalizedLength,
        Feature::SyllableCount,
        Feature::SharedNgrams,
        Feature::CategorialVariations,
        Feature::RelativeGrowth,
        Feature::LinearExtrapolation,
        Feature::PresentAge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::NormalizedLength => "normalized_length",
            Feature::SyllableCount => "syllable_count",
            Feature::UniqueNgrams => "unique_ngrams",
            Feature::SharedNgrams => "shared_ngrams",
            Feature::CategorialVariations => "categorial_variations",
            Feature::RelativeGrowth => "relative_growth",
            Feature::LinearExtrapolation => "linear_extrapolation",
            Feature::PresentAge => "present_age",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown feature `{s}`")))
    }
}

/// A subset of the eight features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FeatureMask(u8);

impl FeatureMask {
    pub fn all() -> Self {
        FeatureMask(0xff)
    }

    pub fn only(feature: Feature) -> Self {
        FeatureMask(feature.bit())
    }

    pub fn without(self, feature: Feature) -> Self {
        FeatureMask(self.0 & !feature.bit())
    }

    pub fn contains(self, feature: Feature) -> bool {
        self.0 & feature.bit() != 0
    }

    pub fn features(self) -> impl Iterator<Item = Feature> {
        Feature::ALL.into_iter().filter(move |f| self.contains(*f))
    }
}

impl Default for FeatureMask {
    fn default() -> Self {
        FeatureMask::all()
    }
}

impl Serialize for FeatureMask {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.features())
    }
}

impl<'de> Deserialize<'de> for FeatureMask {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let features = Vec::<Feature>::deserialize(d)?;
        Ok(FeatureMask(features.iter().fold(0, |m, f| m | f.bit())))
    }
}

/// Boundary-marked character trigrams in order of first occurrence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrigramSet(Vec<String>);

impl TrigramSet {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, trigram: &str) -> bool {
        self.0.iter().any(|t| t == trigram)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl FromIterator<String> for TrigramSet {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        let mut out: Vec<String> = Vec::new();
        for t in iter {
            if !out.contains(&t) {
                out.push(t);
            }
        }
        TrigramSet(out)
    }
}

/// Trigrams of `|lemma|`, de-duplicated in order.
pub fn boundary_trigrams(lemma: &str) -> TrigramSet {
    let chars: Vec<char> = std::iter::once('|')
        .chain(lemma.chars())
        .chain(std::iter::once('|'))
        .collect();
    chars.windows(3).map(|w| w.iter().collect()).collect()
}

/// Splits a word's trigrams into those no other synset member has, and the
/// fraction that is shared.
pub fn partition_trigrams(lemma: &str, synset_lemmas: &[&str]) -> (TrigramSet, f64) {
    let own = boundary_trigrams(lemma);
    let others: BTreeSet<String> = synset_lemmas
        .iter()
        .filter(|l| **l != lemma)
        .flat_map(|l| boundary_trigrams(l).0)
        .collect();
    let unique: TrigramSet = own
        .iter()
        .filter(|t| !others.contains(*t))
        .map(String::from)
        .collect();
    let shared = own.len() - unique.len();
    let fraction = if own.is_empty() {
        0.0
    } else {
        shared as f64 / own.len() as f64
    };
    (unique, fraction)
}

fn is_plain_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

/// Heuristic syllable count for a lowercase word: maximal vowel groups, with
/// `y` vocalic unless word-initial or next to another vowel, less one for a
/// silent final `e` (but not consonant + `le`). Never below one.
pub fn heuristic_syllables(lemma: &str) -> u32 {
    let w = lemma.as_bytes();
    let vocalic: Vec<bool> = (0..w.len())
        .map(|i| match w[i] {
            c if is_plain_vowel(c) => true,
            b'y' => {
                i > 0
                    && !is_plain_vowel(w[i - 1])
                    && !w.get(i + 1).copied().is_some_and(is_plain_vowel)
            }
            _ => false,
        })
        .collect();
    let mut groups = 0u32;
    for i in 0..w.len() {
        if vocalic[i] && (i == 0 || !vocalic[i - 1]) {
            groups += 1;
        }
    }
    let n = w.len();
    if n >= 2 && w[n - 1] == b'e' && !vocalic[n - 2] {
        let consonant_le = n >= 3 && w[n - 2] == b'l' && !vocalic[n - 3];
        if !consonant_le {
            groups = groups.saturating_sub(1);
        }
    }
    groups.max(1)
}

/// Syllable counts with per-lemma overrides.
#[derive(Debug, Clone, Default)]
pub struct SyllableCounter {
    exceptions: HashMap<String, u32>,
}

impl SyllableCounter {
    pub fn new(exceptions: HashMap<String, u32>) -> Self {
        SyllableCounter { exceptions }
    }

    /// Reads `lemma<TAB>count` rows.
    pub fn load<R: BufRead>(source: R) -> Result<Self> {
        let mut exceptions = HashMap::new();
        for item in content_lines(source) {
            let (line_no, line) = item?;
            let (lemma, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(line_no, "expected lemma<TAB>count"))?;
            let count: u32 = count
                .trim()
                .parse()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| Error::parse(line_no, format!("bad syllable count `{count}`")))?;
            exceptions.insert(lemma.trim().to_string(), count);
        }
        Ok(SyllableCounter { exceptions })
    }

    pub fn count(&self, lemma: &str) -> u32 {
        self.exceptions
            .get(lemma)
            .copied()
            .unwrap_or_else(|| heuristic_syllables(lemma))
    }
}

/// Past (`f1`) and present (`f2`) frequency of each member relative to its synset.
/// A synset with no past occurrences gets `f1 = 0` for every member.
pub fn relative_frequencies(snapshot: &SynsetSnapshot) -> Vec<(f64, f64)> {
    let past_total = snapshot.past_total();
    let present_total = snapshot.present_total();
    if past_total == 0 {
        log::debug!(
            "synset {} has no past occurrences; f1 = 0",
            snapshot.synset_id
        );
    }
    snapshot
        .members
        .iter()
        .map(|m| {
            let f1 = if past_total == 0 {
                0.0
            } else {
                m.past as f64 / past_total as f64
            };
            (f1, m.present as f64 / present_total as f64)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub synset_id: String,
    pub sense: SenseId,
    pub normalized_length: f64,
    pub syllable_count: u32,
    pub unique_ngrams: TrigramSet,
    pub shared_ngrams: f64,
    pub categorial_variations: u32,
    pub relative_growth: f64,
    pub linear_extrapolation: f64,
    pub present_age: u32,
    /// 1 for the future leader of the synset, 0 otherwise; absent at prediction time.
    pub target_class: Option<u8>,
}

impl FeatureVector {
    /// Value of a scalar feature. The trigram vector has no scalar value.
    pub fn scalar(&self, feature: Feature) -> Option<f64> {
        Some(match feature {
            Feature::NormalizedLength => self.normalized_length,
            Feature::SyllableCount => self.syllable_count as f64,
            Feature::UniqueNgrams => return None,
            Feature::SharedNgrams => self.shared_ngrams,
            Feature::CategorialVariations => self.categorial_variations as f64,
            Feature::RelativeGrowth => self.relative_growth,
            Feature::LinearExtrapolation => self.linear_extrapolation,
            Feature::PresentAge => self.present_age as f64,
        })
    }
}

/// Lexicon and corpus lookups needed by the feature extractor.
#[derive(Debug, Clone, Copy)]
pub struct FeatureContext<'a> {
    pub catvar: &'a CatVarClusters,
    pub births: &'a BirthIndex,
    pub syllables: &'a SyllableCounter,
}

/// Builds the feature vector of member `index` of `snapshot`. The target class
/// is filled only when `with_target` is set.
pub fn make_feature_vector(
    index: usize,
    snapshot: &SynsetSnapshot,
    ctx: &FeatureContext<'_>,
    window: &TimeWindow,
    with_target: bool,
) -> Result<FeatureVector> {
    let member = &snapshot.members[index];
    let lemma = member.sense.lemma.as_str();
    let lemmas: Vec<&str> = snapshot.lemmas().collect();
    let max_len = lemmas.iter().map(|l| l.chars().count()).max().unwrap_or(1);
    let (unique, shared) = partition_trigrams(lemma, &lemmas);
    let (f1, f2) = relative_frequencies(snapshot)[index];
    let key = member.sense.corpus_key();
    let birth = *ctx
        .births
        .get(&key)
        .ok_or_else(|| Error::NoBirth(key.to_string()))?;
    // A word first seen inside the present's smoothing interval has age zero.
    let present_age = (window.present - birth).max(0) as u32;
    Ok(FeatureVector {
        synset_id: snapshot.synset_id.clone(),
        sense: member.sense.clone(),
        normalized_length: lemma.chars().count() as f64 / max_len as f64,
        syllable_count: ctx.syllables.count(lemma),
        unique_ngrams: unique,
        shared_ngrams: shared,
        categorial_variations: categorial_variation_count(
            &key,
            window.present,
            ctx.catvar,
            ctx.births,
        ),
        relative_growth: f2 - f1,
        linear_extrapolation: 2.0 * f2 - f1,
        present_age,
        target_class: with_target.then(|| u8::from(snapshot.future_leader() == index)),
    })
}

pub fn snapshot_features(
    snapshot: &SynsetSnapshot,
    ctx: &FeatureContext<'_>,
    window: &TimeWindow,
    with_target: bool,
) -> Result<Vec<FeatureVector>> {
    (0..snapshot.members.len())
        .map(|i| make_feature_vector(i, snapshot, ctx, window, with_target))
        .collect()
}

/// Feature vectors for every word of a dataset, in snapshot order.
pub fn dataset_features(
    dataset: &Dataset,
    ctx: &FeatureContext<'_>,
    with_target: bool,
) -> Result<Vec<FeatureVector>> {
    let per_synset: Vec<Vec<FeatureVector>> = dataset
        .snapshots
        .par_iter()
        .map(|s| snapshot_features(s, ctx, &dataset.window, with_target))
        .collect::<Result<_>>()?;
    Ok(per_synset.into_iter().flatten().collect())
}

const DUMP_HEADER: &str = "synset_id\tsense_id\tnormalized_length\tsyllable_count\tshared_ngrams\tcategorial_variations\trelative_growth\tlinear_extrapolation\tpresent_age\ttarget_class\tunique_ngrams";

/// Tab-separated feature dump. Reals use the shortest representation that
/// parses back to the same value; `-` marks an absent class.
pub fn features_to_tsv(vectors: &[FeatureVector]) -> String {
    let mut out = String::from(DUMP_HEADER);
    out.push('\n');
    for v in vectors {
        let class = v.target_class.map_or("-".to_string(), |c| c.to_string());
        let trigrams: Vec<&str> = v.unique_ngrams.iter().collect();
        let _ = writeln!(
            out,
            "{}\t{}\t{:?}\t{}\t{:?}\t{}\t{:?}\t{:?}\t{}\t{}\t{}",
            v.synset_id,
            v.sense,
            v.normalized_length,
            v.syllable_count,
            v.shared_ngrams,
            v.categorial_variations,
            v.relative_growth,
            v.linear_extrapolation,
            v.present_age,
            class,
            trigrams.join(","),
        );
    }
    out
}

pub fn features_from_tsv<R: BufRead>(source: R) -> Result<Vec<FeatureVector>> {
    let mut out = Vec::new();
    for item in content_lines(source) {
        let (line_no, line) = item?;
        if line.starts_with("synset_id\t") {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 11 {
            return Err(Error::parse(
                line_no,
                format!("expected 11 columns, found {}", cols.len()),
            ));
        }
        let real = |i: usize| -> Result<f64> {
            cols[i]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad number `{}`", cols[i])))
        };
        let int = |i: usize| -> Result<u32> {
            cols[i]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad integer `{}`", cols[i])))
        };
        let target_class = match cols[9] {
            "-" => None,
            "0" => Some(0),
            "1" => Some(1),
            other => return Err(Error::parse(line_no, format!("bad class `{other}`"))),
        };
        out.push(FeatureVector {
            synset_id: cols[0].to_string(),
            sense: cols[1].parse().map_err(|e| Error::parse(line_no, e))?,
            normalized_length: real(2)?,
            syllable_count: int(3)?,
            shared_ngrams: real(4)?,
            categorial_variations: int(5)?,
            relative_growth: real(6)?,
            linear_extrapolation: real(7)?,
            present_age: int(8)?,
            target_class,
            unique_ngrams: cols[10]
                .split(',')
                .filter(|t| !t.is_empty())
                .map(String::from)
                .collect(),
        });
    }
    Ok(out)
}
