//! Regenerates the files under `fixtures/`.
//!
//! `cargo run -p lexevo --example make_fixtures [OUT_DIR [SEED]]`

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lexevo::experiments::{interpret_model, prepare_cycle, run_nbcp};
use lexevo::pipeline::{load_inputs, InputPaths};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CENTERS: [i32; 5] = [1800, 1850, 1900, 1950, 2000];
const LAST_YEAR: i32 = 2008;

/// Annual counts realizing the given 11-year sums around each center. Years
/// outside every window take the rate of the nearest center; years from
/// `birth` to 1794 get `early` per year.
fn annual_counts(birth: i32, early: u64, sums: &[u64; 5]) -> BTreeMap<i32, u64> {
    let mut out = BTreeMap::new();
    for year in birth..=LAST_YEAR {
        let count = if year < CENTERS[0] - 5 {
            early
        } else {
            let (i, c) = CENTERS
                .iter()
                .enumerate()
                .min_by_key(|(_, c)| (year - **c).abs())
                .map(|(i, c)| (i, *c))
                .unwrap();
            let offset = year - c;
            let s = sums[i];
            if offset.abs() <= 5 {
                let k = (offset + 5) as u64;
                s / 11 + u64::from(k < s % 11)
            } else {
                (s / 11).max(1)
            }
        };
        out.insert(year, count);
    }
    out
}

fn push_rows(out: &mut String, key: &str, counts: &BTreeMap<i32, u64>) {
    for (year, &count) in counts {
        if count > 0 {
            let _ = writeln!(out, "{key}\t{year}\t{count}\t{}", (count / 3).max(1));
        }
    }
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::create_dir_all(dir).unwrap();
    std::fs::write(dir.join(name), text).unwrap();
}

fn table2(dir: &Path) {
    // lemma, birth, 11-year sums at 1800..2000 (1850, 1900, 1950 are fixed).
    let words: [(&str, i32, [u64; 5]); 5] = [
        ("rapturous", 1642, [4103, 8645, 15320, 9544, 5021]),
        ("ecstatic", 1687, [1207, 5576, 21716, 30829, 40117]),
        ("rapt", 1560, [2215, 5243, 18750, 14845, 12034]),
        ("enraptured", 1600, [2519, 4334, 7148, 5263, 3012]),
        ("rhapsodic", 1790, [22, 45, 696, 3595, 4410]),
    ];
    let mut corpus = String::new();
    for (lemma, birth, sums) in &words {
        push_rows(
            &mut corpus,
            &format!("{lemma}_ADJ"),
            &annual_counts(*birth, 1, sums),
        );
    }
    let related = [
        ("rapture_NOUN", 1600),
        ("rapturously_ADV", 1700),
        ("rapturousness_NOUN", 1750),
        ("ecstasy_NOUN", 1580),
        ("ecstatically_ADV", 1720),
        ("ecstaticness_NOUN", 1950),
    ];
    for (key, birth) in related {
        let counts = (birth..=LAST_YEAR).map(|y| (y, 10)).collect();
        push_rows(&mut corpus, key, &counts);
    }
    // Rows the loader must filter out.
    for year in 1800..=1810 {
        let _ = writeln!(corpus, "the_DET\t{year}\t900000\t5000");
        let _ = writeln!(corpus, "rapturous_NOUN\t{year}\t3\t1");
    }
    write(dir, "corpus.tsv", &corpus);
    write(
        dir,
        "lexicon.tsv",
        "# synset_id\tpos\tmembers\n\
         a00001\ta\trapturous,ecstatic,rapt,enraptured,rhapsodic\n\
         a00002\ts\tglad,beaming\n\
         a00003\ta\tglad,happy\n\
         n00004\tn\tpalfrey\n",
    );
    write(
        dir,
        "catvar.tsv",
        "rapturous_ADJ,rapture_NOUN,rapturously_ADV,rapturousness_NOUN\n\
         ecstatic_ADJ,ecstasy_NOUN,ecstatically_ADV,ecstaticness_NOUN\n",
    );
    write(dir, "syllables.tsv", "enraptured\t3\n");
}

#[derive(Clone, Copy)]
enum Trajectory {
    Stable,
    ChangeAt1900,
    ChangeAt1950,
    ChangeAt2000,
}

impl Trajectory {
    /// Share of the word carrying the planted trigram at each center.
    fn shares(self) -> [f64; 5] {
        match self {
            Trajectory::Stable => [0.7, 0.72, 0.7, 0.74, 0.72],
            Trajectory::ChangeAt1900 => [0.1, 0.35, 0.65, 0.8, 0.85],
            Trajectory::ChangeAt1950 => [0.1, 0.2, 0.4, 0.7, 0.8],
            Trajectory::ChangeAt2000 => [0.15, 0.15, 0.2, 0.4, 0.7],
        }
    }
}

fn stem(rng: &mut ChaCha8Rng) -> String {
    const C: &[u8] = b"bcdfghjklmnpstvw";
    const V: &[u8] = b"aeiou";
    (0..2)
        .flat_map(|_| [C[rng.gen_range(0..C.len())], V[rng.gen_range(0..V.len())]])
        .map(char::from)
        .collect()
}

fn synthetic(dir: &Path, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kinds: Vec<Trajectory> = [
        (Trajectory::Stable, 20),
        (Trajectory::ChangeAt1900, 10),
        (Trajectory::ChangeAt1950, 12),
        (Trajectory::ChangeAt2000, 8),
    ]
    .into_iter()
    .flat_map(|(k, n)| std::iter::repeat(k).take(n))
    .collect();
    kinds.shuffle(&mut rng);

    let mut stems = std::collections::BTreeSet::new();
    let mut decoys_left = [5usize, 5];
    let mut plain_thirds = 10usize;
    let mut lexicon = String::from("# synthetic synsets; the planted winner trigram is zzz\n");
    let mut corpora = [String::new(), String::new()];
    for (i, kind) in kinds.into_iter().enumerate() {
        let s = loop {
            let s = stem(&mut rng);
            if stems.insert(s.clone()) {
                break s;
            }
        };
        // Alternating two tails keeps each tail common in both classes;
        // a tail rare among winners would dominate its binary dimensions.
        let tails = if i % 2 == 0 {
            ["bax", "dek"]
        } else {
            ["dek", "bax"]
        };
        let mut members = vec![("zzz", true), (tails[0], false)];
        let third = match kind {
            Trajectory::Stable if decoys_left[0] > 0 => {
                decoys_left[0] -= 1;
                Some("zza")
            }
            Trajectory::Stable if decoys_left[1] > 0 => {
                decoys_left[1] -= 1;
                Some("azz")
            }
            _ if plain_thirds > 0 && rng.gen_bool(0.4) => {
                plain_thirds -= 1;
                Some(tails[1])
            }
            _ => None,
        };
        if let Some(t) = third {
            members.push((t, false));
        }
        let minor = if third.is_some() { 0.05 } else { 0.0 };
        let birth = rng.gen_range(1550..=1750);
        let base = kind.shares();
        let mut sums = [[0u64; 5]; 3];
        for p in 0..5 {
            let total: f64 = rng.gen_range(4000.0..40000.0);
            let a = (base[p] + rng.gen_range(-0.02..0.02)).clamp(0.05, 0.95);
            let shares = [a * (1.0 - minor), (1.0 - a) * (1.0 - minor), minor];
            for (m, share) in shares.iter().enumerate() {
                sums[m][p] = ((share * total).round() as u64).max(11);
            }
        }
        let mut lemmas = Vec::new();
        for (m, (tail, _)) in members.iter().enumerate() {
            let lemma = format!("{s}ro{tail}");
            let counts = annual_counts(birth, 2, &sums[m]);
            push_rows(&mut corpora[i % 2], &format!("{lemma}_NOUN"), &counts);
            lemmas.push(lemma);
        }
        lemmas.shuffle(&mut rng);
        let _ = writeln!(lexicon, "n{:05}\tn\t{}", i + 1, lemmas.join(","));
    }
    write(dir, "lexicon.tsv", &lexicon);
    write(dir, "corpus-a.tsv", &corpora[0]);
    write(dir, "corpus-b.tsv", &corpora[1]);
}

fn check_synthetic(dir: &Path) {
    let paths = InputPaths {
        corpus: vec![dir.join("corpus-a.tsv"), dir.join("corpus-b.tsv")],
        lexicon: dir.join("lexicon.tsv"),
        catvar: None,
        syllables: None,
    };
    let (inputs, report) = load_inputs(&paths).unwrap();
    println!(
        "synthetic: {} rows, {} synsets",
        report.rows_kept,
        inputs.synsets.len()
    );
    for pair in prepare_cycle(&inputs, 50).unwrap() {
        assert_eq!(
            pair.train.removed() + pair.test.removed(),
            0,
            "no synset may be removed"
        );
        let run = run_nbcp(&pair, &inputs).unwrap();
        for o in run
            .evaluation
            .outcomes
            .iter()
            .filter(|o| o.predicted != o.future_leader)
        {
            println!(
                "  miss {}: predicted {}, actual {}",
                o.synset_id, o.predicted, o.future_leader
            );
            for v in pair
                .test_vectors
                .iter()
                .filter(|v| v.synset_id == o.synset_id)
            {
                println!(
                    "    {} log-odds {:.2} f1 {:.3} extrapolation {:.3}",
                    v.sense,
                    run.model.log_odds(v),
                    v.linear_extrapolation - 2.0 * v.relative_growth,
                    v.linear_extrapolation
                );
            }
        }
        let top = interpret_model(&run.model, &pair.train_vectors, 3).unwrap();
        println!(
            "  {} F={:.1} changed={:.1}% top trigrams {:?}",
            pair.label(),
            run.report.metrics.f_score,
            run.report.percent_changed,
            top.trigrams
                .iter()
                .map(|r| (&r.dimension, r.difference))
                .collect::<Vec<_>>()
        );
    }
}

fn main() {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"));
    let seed = std::env::args()
        .nth(2)
        .map_or(7, |s| s.parse().expect("seed"));
    table2(&out.join("table2"));
    synthetic(&out.join("synthetic"), seed);
    check_synthetic(&out.join("synthetic"));
}
