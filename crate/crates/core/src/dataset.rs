//! Time windows, per-synset snapshots, and the removal rules that turn
//! eligible synsets into train/test datasets.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::CorpusTable;
use crate::error::{Error, Result};
use crate::io::content_lines;
use crate::lexicon::{SenseId, Synset};

pub const DEFAULT_HALF_WIDTH: u32 = 5;

/// Past, present and future sampling years, equally spaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeWindow {
    pub past: i32,
    pub present: i32,
    pub future: i32,
}

impl TimeWindow {
    pub fn new(past: i32, present: i32, future: i32) -> Result<Self> {
        if !(past < present && present < future) || future - present != present - past {
            return Err(Error::Invalid(format!(
                "window {past}/{present}/{future} is not three increasing, equally spaced years"
            )));
        }
        Ok(TimeWindow {
            past,
            present,
            future,
        })
    }

    pub fn cycle(&self) -> i32 {
        self.present - self.past
    }

    pub fn label(&self) -> String {
        format!("{}-{}-{}", self.past, self.present, self.future)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowPair {
    pub train: TimeWindow,
    pub test: TimeWindow,
}

/// Bounds for laying out sampling periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleConfig {
    pub anchor_year: i32,
    pub floor_year: i32,
    pub min_cycle: u32,
    pub max_cycle: u32,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            anchor_year: 2000,
            floor_year: 1800,
            min_cycle: 30,
            max_cycle: 60,
        }
    }
}

impl ScheduleConfig {
    /// Sampling periods counted back from the anchor, returned in chronological order.
    pub fn periods(&self, cycle: u32) -> Vec<i32> {
        let mut periods = Vec::new();
        if cycle == 0 {
            return periods;
        }
        let mut year = self.anchor_year;
        while year >= self.floor_year {
            periods.push(year);
            year -= cycle as i32;
        }
        periods.reverse();
        periods
    }
}

/// Train/test window pairs for one cycle length, oldest first.
///
/// Pair `k` trains on periods `[k, k+1, k+2]` and tests on `[k+1, k+2, k+3]`,
/// so each test window is its training window moved forward by one cycle.
pub fn schedule_windows(cycle: u32, config: &ScheduleConfig) -> Result<Vec<WindowPair>> {
    if cycle < config.min_cycle || cycle > config.max_cycle {
        return Err(Error::Invalid(format!(
            "cycle {cycle} outside [{}, {}]",
            config.min_cycle, config.max_cycle
        )));
    }
    let periods = config.periods(cycle);
    if periods.len() < 4 {
        return Err(Error::Schedule {
            cycle,
            periods: periods.len(),
        });
    }
    Ok(periods
        .windows(4)
        .map(|p| WindowPair {
            train: TimeWindow {
                past: p[0],
                present: p[1],
                future: p[2],
            },
            test: TimeWindow {
                past: p[1],
                present: p[2],
                future: p[3],
            },
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberCounts {
    pub sense: SenseId,
    pub past: u64,
    pub present: u64,
    pub future: u64,
}

/// One synset's smoothed counts in a window, after the removal rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynsetSnapshot {
    pub synset_id: String,
    pub members: Vec<MemberCounts>,
}

fn unique_argmax<I: Iterator<Item = u64>>(values: I) -> Option<usize> {
    let mut best: Option<(usize, u64)> = None;
    let mut tied = false;
    for (i, v) in values.enumerate() {
        match best {
            Some((_, b)) if v < b => {}
            Some((_, b)) if v == b => tied = true,
            _ => {
                best = Some((i, v));
                tied = false;
            }
        }
    }
    if tied {
        None
    } else {
        best.map(|(i, _)| i)
    }
}

impl SynsetSnapshot {
    pub fn present_leader(&self) -> usize {
        unique_argmax(self.members.iter().map(|m| m.present))
            .expect("snapshot invariant: unique present leader")
    }

    pub fn future_leader(&self) -> usize {
        unique_argmax(self.members.iter().map(|m| m.future))
            .expect("snapshot invariant: unique future leader")
    }

    pub fn changed(&self) -> bool {
        self.present_leader() != self.future_leader()
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(|m| m.sense.lemma.as_str())
    }

    pub fn past_total(&self) -> u64 {
        self.members.iter().map(|m| m.past).sum()
    }

    pub fn present_total(&self) -> u64 {
        self.members.iter().map(|m| m.present).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalReason {
    /// Some member has a zero count in the present.
    DeadWord,
    /// The present or future maximum is shared by two or more members.
    Tie,
}

pub fn build_snapshot(
    synset: &Synset,
    corpus: &CorpusTable,
    window: &TimeWindow,
    half_width: u32,
) -> Result<SynsetSnapshot, RemovalReason> {
    let members: Vec<MemberCounts> = synset
        .members
        .iter()
        .map(|sense| {
            let key = sense.corpus_key();
            MemberCounts {
                sense: sense.clone(),
                past: corpus.period_count(&key, window.past, half_width),
                present: corpus.period_count(&key, window.present, half_width),
                future: corpus.period_count(&key, window.future, half_width),
            }
        })
        .collect();
    if members.iter().any(|m| m.present == 0) {
        return Err(RemovalReason::DeadWord);
    }
    if unique_argmax(members.iter().map(|m| m.present)).is_none()
        || unique_argmax(members.iter().map(|m| m.future)).is_none()
    {
        return Err(RemovalReason::Tie);
    }
    Ok(SynsetSnapshot {
        synset_id: synset.id.clone(),
        members,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub synsets: usize,
    pub words: usize,
    pub words_per_synset: f64,
    /// Percent of synsets whose present leader differs from the future leader.
    pub change_percent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub window: TimeWindow,
    pub half_width: u32,
    /// Sorted by synset id.
    pub snapshots: Vec<SynsetSnapshot>,
    pub removal_log: BTreeMap<RemovalReason, usize>,
}

pub fn build_dataset(
    synsets: &[Synset],
    corpus: &CorpusTable,
    window: &TimeWindow,
    half_width: u32,
) -> Dataset {
    let outcomes: Vec<_> = synsets
        .par_iter()
        .map(|s| build_snapshot(s, corpus, window, half_width))
        .collect();
    let mut snapshots = Vec::new();
    let mut removal_log = BTreeMap::new();
    for outcome in outcomes {
        match outcome {
            Ok(snap) => snapshots.push(snap),
            Err(reason) => *removal_log.entry(reason).or_insert(0) += 1,
        }
    }
    snapshots.sort_by(|a, b| a.synset_id.cmp(&b.synset_id));
    Dataset {
        window: *window,
        half_width,
        snapshots,
        removal_log,
    }
}

impl Dataset {
    pub fn summary(&self) -> DatasetSummary {
        let synsets = self.snapshots.len();
        let words: usize = self.snapshots.iter().map(|s| s.members.len()).sum();
        let changed = self.snapshots.iter().filter(|s| s.changed()).count();
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        DatasetSummary {
            synsets,
            words,
            words_per_synset: ratio(words, synsets),
            change_percent: 100.0 * ratio(changed, synsets),
        }
    }

    pub fn removed(&self) -> usize {
        self.removal_log.values().sum()
    }

    /// Rows of `synset_id, sense_id, past, present, future` with a header line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("synset_id\tsense_id\tpast\tpresent\tfuture\n");
        for snap in &self.snapshots {
            for m in &snap.members {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}",
                    snap.synset_id, m.sense, m.past, m.present, m.future
                );
            }
        }
        out
    }

    pub fn sidecar(&self) -> DatasetSidecar {
        DatasetSidecar {
            window: self.window,
            half_width: self.half_width,
            summary: self.summary(),
            removal_log: self.removal_log.clone(),
        }
    }

    /// Rebuilds a dataset from its TSV rows and sidecar. Rows must keep each
    /// synset's members contiguous.
    pub fn from_parts<R: BufRead>(tsv: R, sidecar: &DatasetSidecar) -> Result<Dataset> {
        let mut snapshots: Vec<SynsetSnapshot> = Vec::new();
        for item in content_lines(tsv) {
            let (line_no, line) = item?;
            if line.starts_with("synset_id\t") {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 5 {
                return Err(Error::parse(
                    line_no,
                    format!("expected 5 columns, found {}", cols.len()),
                ));
            }
            let sense: SenseId = cols[1].parse().map_err(|e| Error::parse(line_no, e))?;
            let num = |s: &str| {
                s.parse::<u64>()
                    .map_err(|_| Error::parse(line_no, format!("bad count `{s}`")))
            };
            let member = MemberCounts {
                sense,
                past: num(cols[2])?,
                present: num(cols[3])?,
                future: num(cols[4])?,
            };
            match snapshots.last_mut() {
                Some(last) if last.synset_id == cols[0] => last.members.push(member),
                _ => {
                    if snapshots.iter().any(|s| s.synset_id == cols[0]) {
                        return Err(Error::parse(
                            line_no,
                            format!("rows for synset `{}` are not contiguous", cols[0]),
                        ));
                    }
                    snapshots.push(SynsetSnapshot {
                        synset_id: cols[0].to_string(),
                        members: vec![member],
                    })
                }
            }
        }
        for snap in &snapshots {
            let valid = snap.members.len() >= 2
                && snap.members.iter().all(|m| m.present > 0)
                && unique_argmax(snap.members.iter().map(|m| m.present)).is_some()
                && unique_argmax(snap.members.iter().map(|m| m.future)).is_some();
            if !valid {
                return Err(Error::Invalid(format!(
                    "synset `{}` violates the dataset removal rules",
                    snap.synset_id
                )));
            }
        }
        snapshots.sort_by(|a, b| a.synset_id.cmp(&b.synset_id));
        Ok(Dataset {
            window: sidecar.window,
            half_width: sidecar.half_width,
            snapshots,
            removal_log: sidecar.removal_log.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub window: TimeWindow,
    pub half_width: u32,
    pub summary: DatasetSummary,
    pub removal_log: BTreeMap<RemovalReason, usize>,
}

/// Number of synsets with at least `changes` leadership changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeRow {
    pub changes: usize,
    pub synsets: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeHistogram {
    pub periods: Vec<i32>,
    pub synsets: usize,
    /// Cumulative rows for `>= 1, >= 2, ...` changes, up to `periods.len() - 1`.
    pub rows: Vec<ChangeRow>,
}

/// Leader of one period given the previous leader.
///
/// A period with zero total keeps the previous leader. A tie keeps the previous
/// leader when it is among the tied maxima, otherwise takes the smallest lemma.
pub(crate) fn resolve_leader(
    lemmas: &[&str],
    counts: &[u64],
    previous: Option<usize>,
) -> Option<usize> {
    let max = *counts.iter().max()?;
    if max == 0 {
        return previous;
    }
    let tied: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] == max).collect();
    if tied.len() == 1 {
        return Some(tied[0]);
    }
    if let Some(p) = previous.filter(|p| tied.contains(p)) {
        return Some(p);
    }
    tied.into_iter().min_by_key(|&i| lemmas[i])
}

/// Number of leadership changes between consecutive periods.
pub fn count_leader_changes(lemmas: &[&str], counts_by_period: &[Vec<u64>]) -> usize {
    let mut leader = None;
    let mut changes = 0;
    for counts in counts_by_period {
        let next = resolve_leader(lemmas, counts, leader);
        if leader.is_some() && next != leader {
            changes += 1;
        }
        leader = next;
    }
    changes
}

/// Histogram of leadership changes over `periods` for synsets that passed the
/// eligibility filters (no window removal rules applied).
pub fn change_statistics(
    synsets: &[Synset],
    corpus: &CorpusTable,
    periods: &[i32],
    half_width: u32,
) -> Result<ChangeHistogram> {
    if periods.len() < 2 {
        return Err(Error::Invalid(
            "change statistics need at least two periods".into(),
        ));
    }
    let per_synset: Vec<usize> = synsets
        .par_iter()
        .map(|s| {
            let lemmas: Vec<&str> = s.lemmas().collect();
            let counts: Vec<Vec<u64>> = periods
                .iter()
                .map(|&p| {
                    s.members
                        .iter()
                        .map(|m| corpus.period_count(&m.corpus_key(), p, half_width))
                        .collect()
                })
                .collect();
            count_leader_changes(&lemmas, &counts)
        })
        .collect();
    let n = per_synset.len();
    let rows = (1..periods.len())
        .map(|k| {
            let count = per_synset.iter().filter(|&&c| c >= k).count();
            ChangeRow {
                changes: k,
                synsets: count,
                percent: if n == 0 {
                    0.0
                } else {
                    100.0 * count as f64 / n as f64
                },
            }
        })
        .collect();
    Ok(ChangeHistogram {
        periods: periods.to_vec(),
        synsets: n,
        rows,
    })
}
