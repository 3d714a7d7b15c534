//! Unigram frequency tables in the Google Books ngram v2 row shape.
//!
//! Each row is `word_POS<TAB>year<TAB>match_count<TAB>volume_count`. Only the
//! match count (token frequency) feeds the pipeline; volume counts are kept
//! alongside it so filtered tables can be written back out unchanged.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::ops::RangeInclusive;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::open_text;

pub const MIN_YEAR: i32 = 1500;
pub const MAX_YEAR: i32 = 2008;

/// Part-of-speech tags used by the corpus (the universal tag set of the v2 release).
pub const CORPUS_TAGS: &[&str] = &[
    "NOUN", "VERB", "ADJ", "ADV", "PRON", "DET", "ADP", "NUM", "CONJ", "PRT", "X", ".",
];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UnigramKey {
    pub lemma: String,
    pub pos: String,
}

impl UnigramKey {
    pub fn new(lemma: impl Into<String>, pos: impl Into<String>) -> Self {
        UnigramKey {
            lemma: lemma.into(),
            pos: pos.into(),
        }
    }
}

impl fmt::Display for UnigramKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.lemma, self.pos)
    }
}

impl FromStr for UnigramKey {
    type Err = String;

    fn from_str(token: &str) -> Result<Self, String> {
        let (lemma, pos) = token
            .rsplit_once('_')
            .ok_or_else(|| format!("token `{token}` has no _POS suffix"))?;
        if lemma.is_empty() {
            return Err(format!("token `{token}` has an empty lemma"));
        }
        if !CORPUS_TAGS.contains(&pos) {
            return Err(format!("token `{token}` has unknown tag `{pos}`"));
        }
        Ok(UnigramKey::new(lemma, pos))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyRecord {
    pub key: UnigramKey,
    pub year: i32,
    pub match_count: u64,
    pub volume_count: u64,
}

impl fmt::Display for FrequencyRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}",
            self.key, self.year, self.match_count, self.volume_count
        )
    }
}

/// Parses one corpus row. `line_no` is only used to label the error.
pub fn parse_ngram_row(line: &str, line_no: usize) -> Result<FrequencyRecord> {
    let line = line.trim_end_matches(['\n', '\r']);
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 4 {
        return Err(Error::parse(
            line_no,
            format!("expected 4 tab-separated columns, found {}", cols.len()),
        ));
    }
    let key: UnigramKey = cols[0].parse().map_err(|e| Error::parse(line_no, e))?;
    let year: i32 = cols[1]
        .parse()
        .map_err(|_| Error::parse(line_no, format!("bad year `{}`", cols[1])))?;
    if !(MIN_YEAR..=MAX_YEAR).contains(&year) {
        return Err(Error::parse(line_no, format!("year {year} out of range")));
    }
    let match_count: u64 = cols[2]
        .parse()
        .map_err(|_| Error::parse(line_no, format!("bad match count `{}`", cols[2])))?;
    let volume_count: u64 = cols[3]
        .parse()
        .map_err(|_| Error::parse(line_no, format!("bad volume count `{}`", cols[3])))?;
    Ok(FrequencyRecord {
        key,
        year,
        match_count,
        volume_count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YearCount {
    pub year: i32,
    pub match_count: u64,
    pub volume_count: u64,
}

/// Annual counts of one unigram, strictly increasing by year.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Series {
    points: Vec<YearCount>,
}

impl Series {
    /// Builds a series from `(year, match_count)` pairs; duplicate years are summed.
    pub fn from_counts<I: IntoIterator<Item = (i32, u64)>>(counts: I) -> Self {
        let mut map: BTreeMap<i32, YearCount> = BTreeMap::new();
        for (year, count) in counts {
            map.entry(year)
                .or_insert(YearCount {
                    year,
                    match_count: 0,
                    volume_count: 0,
                })
                .match_count += count;
        }
        Series {
            points: map.into_values().collect(),
        }
    }

    pub fn points(&self) -> &[YearCount] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn count(&self, year: i32) -> u64 {
        self.points
            .binary_search_by_key(&year, |p| p.year)
            .map(|i| self.points[i].match_count)
            .unwrap_or(0)
    }

    fn add(&mut self, year: i32, match_count: u64, volume_count: u64) {
        match self.points.binary_search_by_key(&year, |p| p.year) {
            Ok(i) => {
                self.points[i].match_count += match_count;
                self.points[i].volume_count += volume_count;
            }
            Err(i) => self.points.insert(
                i,
                YearCount {
                    year,
                    match_count,
                    volume_count,
                },
            ),
        }
    }

    fn merge(&mut self, other: &Series) {
        for p in &other.points {
            self.add(p.year, p.match_count, p.volume_count);
        }
    }
}

/// Sum of annual counts over `[center - half_width, center + half_width]`.
/// Missing years contribute zero, so an absent series yields 0.
pub fn period_count(series: Option<&Series>, center: i32, half_width: u32) -> u64 {
    let Some(series) = series else { return 0 };
    let lo = center - half_width as i32;
    let hi = center + half_width as i32;
    let pts = &series.points;
    let start = pts.partition_point(|p| p.year < lo);
    let end = pts.partition_point(|p| p.year <= hi);
    pts[start..end].iter().map(|p| p.match_count).sum()
}

/// First year with a nonzero count.
pub fn birth_year(series: Option<&Series>) -> Option<i32> {
    series?
        .points
        .iter()
        .find(|p| p.match_count > 0)
        .map(|p| p.year)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusTable {
    series: BTreeMap<UnigramKey, Series>,
}

impl CorpusTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &UnigramKey) -> Option<&Series> {
        self.series.get(key)
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&UnigramKey, &Series)> {
        self.series.iter()
    }

    pub fn insert_record(&mut self, rec: &FrequencyRecord) {
        self.series.entry(rec.key.clone()).or_default().add(
            rec.year,
            rec.match_count,
            rec.volume_count,
        );
    }

    pub fn insert_series(&mut self, key: UnigramKey, series: Series) {
        self.series.entry(key).or_default().merge(&series);
    }

    /// Sums `other` into `self`. Integer addition keeps the result independent
    /// of merge order.
    pub fn merge(&mut self, other: CorpusTable) {
        for (key, series) in other.series {
            match self.series.get_mut(&key) {
                Some(existing) => existing.merge(&series),
                None => {
                    self.series.insert(key, series);
                }
            }
        }
    }

    pub fn period_count(&self, key: &UnigramKey, center: i32, half_width: u32) -> u64 {
        period_count(self.get(key), center, half_width)
    }

    pub fn birth_year(&self, key: &UnigramKey) -> Result<i32> {
        birth_year(self.get(key)).ok_or_else(|| Error::NoBirth(key.to_string()))
    }

    /// Writes every record back out in the corpus row format, sorted by key and year.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        for (key, series) in &self.series {
            for p in &series.points {
                writeln!(
                    out,
                    "{key}\t{}\t{}\t{}",
                    p.year, p.match_count, p.volume_count
                )?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub rows_read: u64,
    pub rows_kept: u64,
    pub rows_skipped: u64,
    /// The first few malformed rows, for diagnostics.
    pub sample_errors: Vec<String>,
}

const MAX_SAMPLE_ERRORS: usize = 10;

impl LoadReport {
    fn absorb(&mut self, other: LoadReport) {
        self.rows_read += other.rows_read;
        self.rows_kept += other.rows_kept;
        self.rows_skipped += other.rows_skipped;
        for e in other.sample_errors {
            if self.sample_errors.len() < MAX_SAMPLE_ERRORS {
                self.sample_errors.push(e);
            }
        }
    }
}

/// Reads corpus rows from `source`, keeping only keys in `filter`.
///
/// Malformed rows are skipped and counted. Rows whose key is not in the filter
/// are not inspected beyond the first column.
pub fn load_unigram_series<R: BufRead>(
    source: R,
    filter: &HashSet<UnigramKey>,
) -> Result<(CorpusTable, LoadReport)> {
    let mut table = CorpusTable::new();
    let mut report = LoadReport::default();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        report.rows_read += 1;
        match parse_ngram_row(&line, idx + 1) {
            Ok(rec) => {
                if filter.contains(&rec.key) {
                    table.insert_record(&rec);
                    report.rows_kept += 1;
                }
            }
            Err(e) => {
                report.rows_skipped += 1;
                if report.sample_errors.len() < MAX_SAMPLE_ERRORS {
                    report.sample_errors.push(e.to_string());
                }
            }
        }
    }
    if report.rows_skipped > 0 {
        log::warn!("skipped {} malformed corpus rows", report.rows_skipped);
    }
    Ok((table, report))
}

/// Loads several corpus files in parallel (one file per task) and merges them.
pub fn load_corpus_files<P: AsRef<Path> + Sync>(
    paths: &[P],
    filter: &HashSet<UnigramKey>,
) -> Result<(CorpusTable, LoadReport)> {
    let parts: Vec<(CorpusTable, LoadReport)> = paths
        .par_iter()
        .map(|p| {
            let path = p.as_ref();
            let (table, mut report) = load_unigram_series(open_text(path)?, filter)?;
            for e in report.sample_errors.iter_mut() {
                *e = format!("{}: {e}", path.display());
            }
            Ok((table, report))
        })
        .collect::<Result<_>>()?;
    let mut table = CorpusTable::new();
    let mut report = LoadReport::default();
    for (t, r) in parts {
        table.merge(t);
        report.absorb(r);
    }
    Ok((table, report))
}

/// One row of normalized annual frequencies within a synset.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareRow {
    pub year: i32,
    pub shares: Vec<f64>,
    /// Set when every member count is zero that year; shares are then all zero.
    pub flagged: bool,
}

/// Each member's share of the synset total for every year in `years`.
pub fn synset_annual_shares(
    members: &[Option<&Series>],
    years: RangeInclusive<i32>,
) -> Vec<ShareRow> {
    years
        .map(|year| {
            let counts: Vec<u64> = members
                .iter()
                .map(|s| s.map_or(0, |s| s.count(year)))
                .collect();
            let total: u64 = counts.iter().sum();
            if total == 0 {
                ShareRow {
                    year,
                    shares: vec![0.0; counts.len()],
                    flagged: true,
                }
            } else {
                ShareRow {
                    year,
                    shares: counts.iter().map(|&c| c as f64 / total as f64).collect(),
                    flagged: false,
                }
            }
        })
        .collect()
}

/// Renders share rows as `year,word1,word2,...` CSV with six decimals.
pub fn shares_csv(words: &[String], rows: &[ShareRow]) -> String {
    let mut out = String::from("year");
    for w in words {
        out.push(',');
        out.push_str(w);
    }
    out.push('\n');
    for row in rows {
        out.push_str(&row.year.to_string());
        for s in &row.shares {
            out.push_str(&format!(",{s:.6}"));
        }
        out.push('\n');
    }
    out
}
