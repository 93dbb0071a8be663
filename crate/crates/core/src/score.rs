//! Lexicon scoring of topic-assigned clauses and the per-review matrix.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Topic, TopicId};
use crate::error::{Error, Result};
use crate::summarize::{BiTerm, BiTermOccurrence};

pub const DEFAULT_TAU: f64 = 0.25;
pub const CLAUSE_SCORE_HEADER: &str = "review_id\tclause_index\ttopic\tbiterm_key\tvalence\tscored\tnegated";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentimentLexicon {
    entries: BTreeMap<String, f64>,
}

impl SentimentLexicon {
    pub fn from_entries<I: IntoIterator<Item = (S, f64)>, S: Into<String>>(entries: I) -> Result<Self> {
        let mut m = BTreeMap::new();
        for (k, v) in entries {
            let k = k.into().to_lowercase();
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::Validation(format!("valence of `{k}` must lie in [-1, 1], got {v}")));
            }
            m.insert(k, v);
        }
        Ok(SentimentLexicon { entries: m })
    }

    /// TSV `stem<TAB>valence`; `#` comments allowed.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('\t')
                .ok_or_else(|| Error::format(path, i + 1, "expected `stem<TAB>valence`"))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::format(path, i + 1, format!("bad valence `{}`", v.trim())))?;
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::format(path, i + 1, format!("valence {v} outside [-1, 1]")));
            }
            entries.push((k.trim().to_string(), v));
        }
        SentimentLexicon::from_entries(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SentimentLexicon::parse(&text, path)
    }

    pub fn get(&self, stem: &str) -> Option<f64> {
        self.entries.get(stem).copied()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Lexicon valence of the evaluation word, or `(0, false)` when absent.
pub fn score_biterm(biterm: &BiTerm, lexicon: &SentimentLexicon) -> (f64, bool) {
    match lexicon.get(&biterm.evaluation_stem) {
        Some(v) => (v, true),
        None => (0.0, false),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseScore {
    pub review_id: String,
    pub clause_index: usize,
    pub topic: TopicId,
    pub biterm: BiTerm,
    pub valence: f64,
    pub scored: bool,
    pub negated: bool,
}

fn zero_fix(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// Negated clauses take the opposite of the bi-term valence.
pub fn score_clause(occurrence: &BiTermOccurrence, topic: TopicId, lexicon: &SentimentLexicon) -> ClauseScore {
    let (v, scored) = score_biterm(&occurrence.biterm, lexicon);
    let valence = zero_fix(if occurrence.negated { -v } else { v });
    ClauseScore {
        review_id: occurrence.review_id.clone(),
        clause_index: occurrence.clause_index,
        topic,
        biterm: occurrence.biterm.clone(),
        valence,
        scored,
        negated: occurrence.negated,
    }
}

/// One score per clause. The clause takes the topic held by most of its
/// bi-terms (the earliest on ties) and is scored through the first bi-term
/// of that topic found in the lexicon, else the first of that topic.
pub fn score_clauses<F>(occurrences: &[BiTermOccurrence], topic_of: F, lexicon: &SentimentLexicon) -> Vec<ClauseScore>
where
    F: Fn(&BiTerm) -> Option<TopicId>,
{
    let mut by_clause: BTreeMap<usize, Vec<(&BiTermOccurrence, TopicId)>> = BTreeMap::new();
    let mut order: Vec<(&str, usize)> = Vec::new();
    let mut slot: BTreeMap<(&str, usize), usize> = BTreeMap::new();
    for o in occurrences {
        let Some(t) = topic_of(&o.biterm) else { continue };
        let key = (o.review_id.as_str(), o.clause_index);
        let n = *slot.entry(key).or_insert_with(|| {
            order.push(key);
            order.len() - 1
        });
        by_clause.entry(n).or_default().push((o, t));
    }
    let mut out = Vec::with_capacity(by_clause.len());
    for (_, occs) in by_clause {
        let mut tally: Vec<(&TopicId, usize)> = Vec::new();
        for (_, t) in &occs {
            match tally.iter_mut().find(|(x, _)| *x == t) {
                Some(e) => e.1 += 1,
                None => tally.push((t, 1)),
            }
        }
        let best = tally.iter().map(|e| e.1).max().expect("non-empty clause");
        let topic = tally.iter().find(|e| e.1 == best).expect("max exists").0.clone();
        let of_topic: Vec<&BiTermOccurrence> = occs.iter().filter(|(_, t)| *t == topic).map(|(o, _)| *o).collect();
        let primary = of_topic
            .iter()
            .find(|o| score_biterm(&o.biterm, lexicon).1)
            .unwrap_or(&of_topic[0]);
        out.push(score_clause(primary, topic, lexicon));
    }
    out
}

pub fn clause_scores_to_tsv(scores: &[ClauseScore]) -> String {
    let mut out = String::from(CLAUSE_SCORE_HEADER);
    out.push('\n');
    for s in scores {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.4}\t{}\t{}",
            s.review_id,
            s.clause_index,
            s.topic,
            s.biterm.key(),
            zero_fix(s.valence),
            s.scored,
            s.negated
        );
    }
    out
}

pub fn check_tau(tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Parameter(format!("tau must be positive, got {tau}")));
    }
    Ok(tau)
}

/// 1 below `-tau`, 3 above `tau`, 2 in between.
pub fn discretize(mean: f64, tau: f64) -> Result<u8> {
    check_tau(tau)?;
    Ok(if mean < -tau {
        1
    } else if mean > tau {
        3
    } else {
        2
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopicCell {
    pub count: usize,
    pub mean: f64,
    pub likert: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicScoreRow {
    pub review_id: String,
    /// One cell per configured topic, in topic order.
    pub cells: Vec<TopicCell>,
}

/// Per-topic clause count, mean over scored clauses, and likert level.
pub fn aggregate(review_id: &str, scores: &[ClauseScore], topics: &[Topic], tau: f64) -> Result<TopicScoreRow> {
    check_tau(tau)?;
    let mut cells = Vec::with_capacity(topics.len());
    for t in topics {
        let mine: Vec<&ClauseScore> = scores
            .iter()
            .filter(|s| s.review_id == review_id && s.topic == t.id)
            .collect();
        let scored: Vec<f64> = mine.iter().filter(|s| s.scored).map(|s| s.valence).collect();
        let mean = if scored.is_empty() {
            0.0
        } else {
            zero_fix(scored.iter().sum::<f64>() / scored.len() as f64)
        };
        let likert = if mine.is_empty() { 0 } else { discretize(mean, tau)? };
        cells.push(TopicCell {
            count: mine.len(),
            mean,
            likert,
        });
    }
    Ok(TopicScoreRow {
        review_id: review_id.to_string(),
        cells,
    })
}

pub fn matrix_header(topics: &[Topic]) -> String {
    let mut h = String::from("review_id");
    for t in topics {
        let _ = write!(h, ",{0}_count,{0}_mean,{0}_likert", t.id);
    }
    h
}

pub fn matrix_to_csv(rows: &[TopicScoreRow], topics: &[Topic]) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let header = matrix_header(topics);
    w.write_record(header.split(',')).expect("in-memory write");
    for r in rows {
        let mut rec = vec![r.review_id.clone()];
        for c in &r.cells {
            rec.push(c.count.to_string());
            rec.push(format!("{:.4}", zero_fix(c.mean)));
            rec.push(c.likert.to_string());
        }
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{default_topics, PosTag};
    use proptest::prelude::*;

    fn lex() -> SentimentLexicon {
        SentimentLexicon::from_entries([("good", 1.0), ("limit", -1.0), ("like", 1.0), ("fair", 0.5)]).unwrap()
    }

    fn occ(r: &str, i: usize, b: BiTerm, negated: bool) -> BiTermOccurrence {
        BiTermOccurrence {
            biterm: b,
            review_id: r.into(),
            clause_index: i,
            negated,
        }
    }

    fn nn(o: &str, e: &str) -> BiTerm {
        BiTerm::new(o, PosTag::NN, e, PosTag::ADJ).unwrap()
    }

    #[test]
    fn biterm_valence() {
        assert_eq!(score_biterm(&nn("food", "good"), &lex()), (1.0, true));
        assert_eq!(score_biterm(&nn("park", "limit"), &lex()), (-1.0, true));
        assert_eq!(score_biterm(&nn("dish", "spici"), &lex()), (0.0, false));
    }

    #[test]
    fn negation_flips() {
        let like = BiTerm::new("food", PosTag::NN, "like", PosTag::VB).unwrap();
        let f = TopicId::new("F");
        assert_eq!(score_clause(&occ("r", 0, like.clone(), false), f.clone(), &lex()).valence, 1.0);
        assert_eq!(score_clause(&occ("r", 0, like, true), f.clone(), &lex()).valence, -1.0);
        let neutral = score_clause(&occ("r", 0, nn("dish", "spici"), true), f, &lex());
        assert!(neutral.valence == 0.0 && neutral.valence.is_sign_positive());
    }

    #[test]
    fn clause_topic_is_majority_then_earliest() {
        let topic_of = |b: &BiTerm| match b.object_stem.as_str() {
            "food" | "dish" => Some(TopicId::new("F")),
            "price" => Some(TopicId::new("P")),
            _ => None,
        };
        let occs = vec![
            occ("r", 0, nn("price", "fair"), false),
            occ("r", 0, nn("dish", "spici"), false),
            occ("r", 0, nn("food", "good"), false),
            occ("r", 1, nn("price", "fair"), false),
            occ("r", 1, nn("food", "good"), false),
            occ("r", 2, nn("wall", "hole"), false),
        ];
        let s = score_clauses(&occs, topic_of, &lex());
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].topic.as_str(), s[0].valence), ("F", 1.0));
        assert_eq!((s[1].topic.as_str(), s[1].valence), ("P", 0.5));
    }

    #[test]
    fn aggregate_examples() {
        let topics = default_topics();
        let cs = |t: &str, v: f64, scored: bool| ClauseScore {
            review_id: "r".into(),
            clause_index: 0,
            topic: TopicId::new(t),
            biterm: nn("x", "y"),
            valence: v,
            scored,
            negated: false,
        };
        let row = aggregate("r", &[cs("F", 1.0, true), cs("F", -1.0, true), cs("S", 1.0, true)], &topics, 0.25).unwrap();
        assert_eq!(row.cells[0], TopicCell { count: 2, mean: 0.0, likert: 2 });
        assert_eq!(row.cells[1], TopicCell { count: 1, mean: 1.0, likert: 3 });
        assert_eq!(row.cells[2], TopicCell { count: 0, mean: 0.0, likert: 0 });
        let row = aggregate("r", &[cs("F", 0.0, false), cs("F", 0.0, false)], &topics, 0.25).unwrap();
        assert_eq!(row.cells[0], TopicCell { count: 2, mean: 0.0, likert: 2 });
    }

    #[test]
    fn discretize_levels() {
        assert_eq!(discretize(-1.0, 0.25).unwrap(), 1);
        assert_eq!(discretize(0.0, 0.25).unwrap(), 2);
        assert_eq!(discretize(1.0, 0.25).unwrap(), 3);
        assert_eq!(discretize(0.25, 0.25).unwrap(), 2);
        assert!(matches!(discretize(0.0, 0.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn matrix_csv_format() {
        let topics = vec![Topic::new("F", "Food"), Topic::new("S", "Service")];
        let rows = vec![TopicScoreRow {
            review_id: "r1".into(),
            cells: vec![
                TopicCell { count: 1, mean: -0.0, likert: 2 },
                TopicCell { count: 0, mean: 0.0, likert: 0 },
            ],
        }];
        assert_eq!(
            matrix_to_csv(&rows, &topics),
            "review_id,F_count,F_mean,F_likert,S_count,S_mean,S_likert\nr1,1,0.0000,2,0,0.0000,0\n"
        );
    }

    #[test]
    fn lexicon_file_checks() {
        let p = Path::new("lex.tsv");
        assert_eq!(SentimentLexicon::parse("# c\ngood\t1.0\nbad\t-0.5\n", p).unwrap().len(), 2);
        assert!(SentimentLexicon::parse("good\t1.5\n", p).is_err());
        assert!(SentimentLexicon::parse("good 1\n", p).is_err());
    }

    proptest! {
        #[test]
        fn means_stay_bounded(vals in prop::collection::vec((-1.0f64..=1.0, any::<bool>(), any::<bool>()), 0..20)) {
            let topics = default_topics();
            let scores: Vec<ClauseScore> = vals.iter().enumerate().map(|(i, (v, scored, f))| ClauseScore {
                review_id: "r".into(),
                clause_index: i,
                topic: TopicId::new(if *f { "F" } else { "S" }),
                biterm: nn("x", "y"),
                valence: if *scored { *v } else { 0.0 },
                scored: *scored,
                negated: false,
            }).collect();
            let row = aggregate("r", &scores, &topics, DEFAULT_TAU).unwrap();
            let total: usize = row.cells.iter().map(|c| c.count).sum();
            prop_assert_eq!(total, scores.len());
            for c in &row.cells {
                prop_assert!(c.mean.abs() <= 1.0);
                prop_assert_eq!(c.likert == 0, c.count == 0);
            }
        }
    }
}
