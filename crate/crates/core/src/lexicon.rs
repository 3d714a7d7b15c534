//! Synset lexicon and categorial-variation clusters.
//!
//! The lexicon file is a complete sense inventory: one synset per line as
//! `synset_id<TAB>pos<TAB>lemma1,lemma2,...`. A lemma's sense count for a part
//! of speech is the number of synsets of that part of speech listing it.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::UnigramKey;
use crate::error::{Error, Result};
use crate::io::content_lines;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LexPos {
    Noun,
    Verb,
    Adj,
    Adv,
}

impl LexPos {
    /// Parses a lexicon part-of-speech letter. Adjective satellites (`s`) fold into `a`.
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'n' => Some(LexPos::Noun),
            'v' => Some(LexPos::Verb),
            'a' | 's' => Some(LexPos::Adj),
            'r' => Some(LexPos::Adv),
            _ => None,
        }
    }

    fn from_str_exact(s: &str) -> Option<Self> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => LexPos::from_char(c),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            LexPos::Noun => 'n',
            LexPos::Verb => 'v',
            LexPos::Adj => 'a',
            LexPos::Adv => 'r',
        }
    }

    pub fn corpus_tag(self) -> &'static str {
        match self {
            LexPos::Noun => "NOUN",
            LexPos::Verb => "VERB",
            LexPos::Adj => "ADJ",
            LexPos::Adv => "ADV",
        }
    }
}

/// A word sense, rendered `lemma#pos#k` (e.g. `rapt#a#1`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SenseId {
    pub lemma: String,
    pub pos: LexPos,
    pub sense_number: u32,
}

impl SenseId {
    pub fn new(lemma: impl Into<String>, pos: LexPos, sense_number: u32) -> Self {
        SenseId {
            lemma: lemma.into(),
            pos,
            sense_number,
        }
    }

    /// The corpus unigram this sense is counted under (`rapt#a#1` → `rapt_ADJ`).
    pub fn corpus_key(&self) -> UnigramKey {
        UnigramKey::new(self.lemma.clone(), self.pos.corpus_tag())
    }
}

impl fmt::Display for SenseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}#{}#{}",
            self.lemma,
            self.pos.as_char(),
            self.sense_number
        )
    }
}

impl FromStr for SenseId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut parts = s.rsplitn(3, '#');
        let (Some(k), Some(pos), Some(lemma)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(format!("sense id `{s}` is not lemma#pos#k"));
        };
        let pos = LexPos::from_str_exact(pos)
            .ok_or_else(|| format!("sense id `{s}` has bad part of speech"))?;
        let k: u32 = k
            .parse()
            .ok()
            .filter(|&k| k > 0)
            .ok_or_else(|| format!("sense id `{s}` has bad sense number"))?;
        if lemma.is_empty() {
            return Err(format!("sense id `{s}` has an empty lemma"));
        }
        Ok(SenseId::new(lemma, pos, k))
    }
}

impl Serialize for SenseId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SenseId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synset {
    pub id: String,
    pub pos: LexPos,
    pub members: Vec<SenseId>,
}

impl Synset {
    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(|m| m.lemma.as_str())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    pub synsets: Vec<Synset>,
    sense_count: HashMap<(String, LexPos), u32>,
}

impl Lexicon {
    pub fn sense_count(&self, lemma: &str, pos: LexPos) -> u32 {
        self.sense_count
            .get(&(lemma.to_string(), pos))
            .copied()
            .unwrap_or(0)
    }

    pub fn is_monosemous(&self, lemma: &str, pos: LexPos) -> bool {
        self.sense_count(lemma, pos) == 1
    }

    pub fn find(&self, synset_id: &str) -> Option<&Synset> {
        self.synsets.iter().find(|s| s.id == synset_id)
    }
}

pub fn load_lexicon<R: BufRead>(source: R) -> Result<Lexicon> {
    let mut lexicon = Lexicon::default();
    let mut seen_ids = HashSet::new();
    for item in content_lines(source) {
        let (line_no, line) = item?;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::parse(
                line_no,
                format!("expected 3 tab-separated columns, found {}", cols.len()),
            ));
        }
        let id = cols[0].trim();
        if id.is_empty() {
            return Err(Error::parse(line_no, "empty synset id"));
        }
        if !seen_ids.insert(id.to_string()) {
            return Err(Error::DuplicateSynset(id.to_string()));
        }
        let pos = LexPos::from_str_exact(cols[1].trim()).ok_or_else(|| {
            Error::parse(line_no, format!("bad part of speech `{}`", cols[1].trim()))
        })?;
        let lemmas: Vec<&str> = cols[2]
            .split(',')
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        if lemmas.is_empty() {
            return Err(Error::parse(
                line_no,
                format!("synset `{id}` has no members"),
            ));
        }
        let mut members = Vec::with_capacity(lemmas.len());
        let mut seen_lemmas = HashSet::new();
        for lemma in lemmas {
            if !seen_lemmas.insert(lemma) {
                return Err(Error::parse(
                    line_no,
                    format!("synset `{id}` lists `{lemma}` twice"),
                ));
            }
            let count = lexicon
                .sense_count
                .entry((lemma.to_string(), pos))
                .or_insert(0);
            *count += 1;
            members.push(SenseId::new(lemma, pos, *count));
        }
        lexicon.synsets.push(Synset {
            id: id.to_string(),
            pos,
            members,
        });
    }
    Ok(lexicon)
}

/// Lowercase ASCII letters only, at least three of them.
pub fn is_eligible_lemma(lemma: &str) -> bool {
    lemma.len() >= 3 && lemma.bytes().all(|b| b.is_ascii_lowercase())
}

/// Synsets with at least two members, every member an eligible, monosemous lemma.
pub fn eligible_synsets(lexicon: &Lexicon) -> Vec<Synset> {
    lexicon
        .synsets
        .iter()
        .filter(|s| {
            s.members.len() >= 2
                && s.members
                    .iter()
                    .all(|m| is_eligible_lemma(&m.lemma) && lexicon.is_monosemous(&m.lemma, m.pos))
        })
        .cloned()
        .collect()
}

/// Corpus keys for every member of the given synsets.
pub fn vocabulary<'a, I: IntoIterator<Item = &'a Synset>>(synsets: I) -> HashSet<UnigramKey> {
    synsets
        .into_iter()
        .flat_map(|s| s.members.iter().map(SenseId::corpus_key))
        .collect()
}

/// Groups of derivationally related word forms (`hunger_NOUN,hunger_VERB,hungry_ADJ`).
#[derive(Debug, Clone, Default)]
pub struct CatVarClusters {
    pub clusters: Vec<Vec<UnigramKey>>,
    index: HashMap<UnigramKey, usize>,
}

impl CatVarClusters {
    pub fn cluster_of(&self, word: &UnigramKey) -> Option<&[UnigramKey]> {
        self.index.get(word).map(|&i| self.clusters[i].as_slice())
    }

    pub fn vocabulary(&self) -> HashSet<UnigramKey> {
        self.index.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

pub fn load_catvar<R: BufRead>(source: R) -> Result<CatVarClusters> {
    let mut out = CatVarClusters::default();
    for item in content_lines(source) {
        let (line_no, line) = item?;
        let mut cluster = Vec::new();
        for token in line
            .split([',', '\t'])
            .map(str::trim)
            .filter(|t| !t.is_empty())
        {
            let key: UnigramKey = token.parse().map_err(|e| Error::parse(line_no, e))?;
            if cluster.contains(&key) {
                continue;
            }
            if out.index.contains_key(&key) {
                return Err(Error::DuplicateCluster(key.to_string()));
            }
            out.index.insert(key.clone(), out.clusters.len());
            cluster.push(key);
        }
        if !cluster.is_empty() {
            out.clusters.push(cluster);
        }
    }
    Ok(out)
}

pub type BirthIndex = HashMap<UnigramKey, i32>;

/// Number of other cluster members already born by `present`.
/// Members without a known birth year do not count.
pub fn categorial_variation_count(
    word: &UnigramKey,
    present: i32,
    clusters: &CatVarClusters,
    births: &BirthIndex,
) -> u32 {
    let Some(cluster) = clusters.cluster_of(word) else {
        return 0;
    };
    cluster
        .iter()
        .filter(|m| *m != word)
        .filter(|m| births.get(*m).is_some_and(|&b| b <= present))
        .count() as u32
}
