//! Manual labeling of common expressions and the topic bags built from it.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{Clause, PosTag, Topic, TopicId};
use crate::error::{Error, Result};
use crate::strain::CommonExpressionSet;
use crate::summarize::{BiTerm, BiTermOccurrence};

pub const DISCARD: &str = "DISCARD";
pub const LABEL_CSV_HEADER: [&str; 5] = ["object_stem", "object_pos", "evaluation_stem", "evaluation_pos", "decision"];
pub const BAGS_HEADER: &str = "topic\tobject_stem\tobject_pos\tevaluation_stem\tevaluation_pos\tprovenance";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Decision {
    Topic(TopicId),
    Discard,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Topic(t) => write!(f, "{t}"),
            Decision::Discard => f.write_str(DISCARD),
        }
    }
}

impl FromStr for Decision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "" => Err(Error::Validation("empty decision".into())),
            DISCARD => Ok(Decision::Discard),
            t => Ok(Decision::Topic(TopicId::new(t))),
        }
    }
}

impl Serialize for Decision {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Decision {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serializes a bi-term as its `object:POS:evaluation:POS` key.
pub mod biterm_key {
    use super::*;

    pub fn serialize<S: Serializer>(b: &BiTerm, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(b)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BiTerm, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRecord {
    #[serde(with = "biterm_key")]
    pub biterm: BiTerm,
    pub decision: Decision,
    pub labeler: String,
    pub timestamp: DateTime<Utc>,
}

fn check_decision(decision: &Decision, topics: &[Topic]) -> Result<()> {
    match decision {
        Decision::Discard => Ok(()),
        Decision::Topic(t) if topics.iter().any(|x| &x.id == t) => Ok(()),
        Decision::Topic(t) => Err(Error::Validation(format!("unknown topic id `{t}`"))),
    }
}

/// Append-only label journal. The active decision for a bi-term is the
/// last one recorded.
#[derive(Debug, Default)]
pub struct LabelStore {
    path: Option<PathBuf>,
    history: Vec<LabelRecord>,
}

impl LabelStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or starts) a JSONL journal at `path`.
    pub fn open(path: &Path) -> Result<Self> {
        let mut history = Vec::new();
        if path.exists() {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let rec: LabelRecord =
                    serde_json::from_str(line).map_err(|e| Error::format(path, i + 1, e.to_string()))?;
                history.push(rec);
            }
        }
        Ok(LabelStore {
            path: Some(path.to_path_buf()),
            history,
        })
    }

    pub fn append(&mut self, record: LabelRecord) -> Result<()> {
        if let Some(path) = &self.path {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| Error::io(path, e))?;
            let line = serde_json::to_string(&record).map_err(|e| Error::Validation(e.to_string()))?;
            writeln!(f, "{line}").map_err(|e| Error::io(path, e))?;
            f.sync_data().map_err(|e| Error::io(path, e))?;
        }
        self.history.push(record);
        Ok(())
    }

    pub fn history(&self) -> &[LabelRecord] {
        &self.history
    }

    pub fn active(&self) -> BTreeMap<BiTerm, Decision> {
        active_decisions(&self.history)
    }
}

pub fn active_decisions(labels: &[LabelRecord]) -> BTreeMap<BiTerm, Decision> {
    let mut m = BTreeMap::new();
    for r in labels {
        m.insert(r.biterm.clone(), r.decision.clone());
    }
    m
}

/// Validates and persists one decision.
pub fn record_label(
    store: &mut LabelStore,
    strained: &CommonExpressionSet,
    topics: &[Topic],
    biterm: &BiTerm,
    decision: Decision,
    labeler: &str,
) -> Result<LabelRecord> {
    check_decision(&decision, topics)?;
    if !strained.contains(biterm) {
        return Err(Error::Validation(format!("bi-term `{biterm}` is not a common expression")));
    }
    let rec = LabelRecord {
        biterm: biterm.clone(),
        decision,
        labeler: labeler.to_string(),
        timestamp: Utc::now(),
    };
    store.append(rec.clone())?;
    Ok(rec)
}

/// Clauses containing `biterm`, in the order of `clauses`.
pub fn clauses_for_biterm<'a>(
    biterm: &BiTerm,
    occurrences: &[BiTermOccurrence],
    clauses: &'a [Clause],
) -> Vec<&'a Clause> {
    let wanted: HashSet<(&str, usize)> = occurrences
        .iter()
        .filter(|o| &o.biterm == biterm)
        .map(|o| (o.review_id.as_str(), o.clause_index))
        .collect();
    if wanted.is_empty() {
        return Vec::new();
    }
    clauses
        .iter()
        .filter(|c| wanted.contains(&(c.review_id.as_str(), c.index)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Manual,
    Upcycled,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Manual => "manual",
            Provenance::Upcycled => "upcycled",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicBag {
    pub topic: Topic,
    pub members: BTreeMap<BiTerm, Provenance>,
}

impl TopicBag {
    pub fn new(topic: Topic) -> Self {
        TopicBag {
            topic,
            members: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, b: &BiTerm) -> bool {
        self.members.contains_key(b)
    }

    pub fn biterms(&self) -> impl Iterator<Item = &BiTerm> {
        self.members.keys()
    }
}

/// One bag per topic, in topic order, filled with the active manual labels.
pub fn build_topic_bags(labels: &[LabelRecord], topics: &[Topic]) -> Result<Vec<TopicBag>> {
    for r in labels {
        check_decision(&r.decision, topics)?;
    }
    let mut bags: Vec<TopicBag> = topics.iter().cloned().map(TopicBag::new).collect();
    for (b, d) in active_decisions(labels) {
        if let Decision::Topic(t) = d {
            let bag = bags.iter_mut().find(|g| g.topic.id == t).expect("topic checked above");
            bag.members.insert(b, Provenance::Manual);
        }
    }
    assert_disjoint(&bags)?;
    Ok(bags)
}

pub fn assert_disjoint(bags: &[TopicBag]) -> Result<()> {
    let mut seen: BTreeSet<&BiTerm> = BTreeSet::new();
    for bag in bags {
        for b in bag.biterms() {
            if !seen.insert(b) {
                return Err(Error::Validation(format!("bi-term `{b}` is in more than one bag")));
            }
        }
    }
    Ok(())
}

/// Topic of the bag holding `biterm`, if any.
pub fn bag_topic<'a>(bags: &'a [TopicBag], biterm: &BiTerm) -> Option<&'a TopicId> {
    bags.iter().find(|b| b.contains(biterm)).map(|b| &b.topic.id)
}

pub fn bags_to_tsv(bags: &[TopicBag]) -> String {
    let mut out = String::from(BAGS_HEADER);
    out.push('\n');
    for bag in bags {
        for (b, p) in &bag.members {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                bag.topic.id,
                b.object_stem,
                b.object_pos,
                b.evaluation_stem,
                b.evaluation_pos,
                p.as_str()
            ));
        }
    }
    out
}

pub fn parse_bags_tsv(text: &str, topics: &[Topic], path: &Path) -> Result<Vec<TopicBag>> {
    let mut bags: Vec<TopicBag> = topics.iter().cloned().map(TopicBag::new).collect();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let err = |m: String| Error::format(path, i + 1, m);
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 6 {
            return Err(err("expected 6 columns".into()));
        }
        let pos = |s: &str| PosTag::parse(s).ok_or_else(|| err(format!("bad tag `{s}`")));
        let b = BiTerm::new(cols[1], pos(cols[2])?, cols[3], pos(cols[4])?).map_err(|e| err(e.to_string()))?;
        let prov = match cols[5] {
            "manual" => Provenance::Manual,
            "upcycled" => Provenance::Upcycled,
            p => return Err(err(format!("bad provenance `{p}`"))),
        };
        let bag = bags
            .iter_mut()
            .find(|g| g.topic.id.as_str() == cols[0])
            .ok_or_else(|| err(format!("unknown topic id `{}`", cols[0])))?;
        bag.members.insert(b, prov);
    }
    assert_disjoint(&bags)?;
    Ok(bags)
}

/// Reads an offline label sheet. Rows are applied in file order.
pub fn import_labels_csv(path: &Path, labeler: &str) -> Result<Vec<LabelRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let now = Utc::now();
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::format(path, line, e.to_string()))?;
        if row.len() != 5 {
            return Err(Error::format(path, line, "expected 5 columns"));
        }
        let pos = |s: &str| PosTag::parse(s).ok_or_else(|| Error::format(path, line, format!("bad tag `{s}`")));
        let biterm = BiTerm::new(&row[0], pos(&row[1])?, &row[2], pos(&row[3])?)
            .map_err(|e| Error::format(path, line, e.to_string()))?;
        let decision: Decision = row[4].parse().map_err(|e: Error| Error::format(path, line, e.to_string()))?;
        out.push(LabelRecord {
            biterm,
            decision,
            labeler: labeler.to_string(),
            timestamp: now,
        });
    }
    Ok(out)
}

/// Active decisions as a label sheet, sorted by bi-term.
pub fn export_labels_csv(labels: &[LabelRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(LABEL_CSV_HEADER).expect("in-memory write");
    for (b, d) in active_decisions(labels) {
        w.write_record([
            b.object_stem.as_str(),
            b.object_pos.as_str(),
            b.evaluation_stem.as_str(),
            b.evaluation_pos.as_str(),
            &d.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::default_topics;
    use crate::strain::{count_biterms, strain};

    fn nn(o: &str, e: &str, ep: PosTag) -> BiTerm {
        BiTerm::new(o, PosTag::NN, e, ep).unwrap()
    }

    fn rec(b: &BiTerm, d: &str) -> LabelRecord {
        LabelRecord {
            biterm: b.clone(),
            decision: d.parse().unwrap(),
            labeler: "t".into(),
            timestamp: Utc::now(),
        }
    }

    fn sample_labels() -> Vec<(BiTerm, &'static str)> {
        use PosTag::*;
        vec![
            (nn("food", "good", ADJ), "F"),
            (nn("food", "great", ADJ), "F"),
            (nn("servic", "good", ADJ), "S"),
            (nn("staff", "friend", ADJ), "S"),
            (BiTerm::new("recommend", VB, "high", RB).unwrap(), "Re"),
            (nn("place", "great", ADJ), "E"),
            (BiTerm::new("go", VB, "back", RB).unwrap(), "Rv"),
            (nn("servic", "great", ADJ), "S"),
            (nn("price", "reason", ADJ), "P"),
            (nn("servic", "friend", ADJ), "S"),
        ]
    }

    #[test]
    fn bags_from_the_ten_labels() {
        let labels: Vec<_> = sample_labels().iter().map(|(b, d)| rec(b, d)).collect();
        let bags = build_topic_bags(&labels, &default_topics()).unwrap();
        let sizes: Vec<(String, usize)> = bags.iter().map(|b| (b.topic.id.to_string(), b.len())).collect();
        let expect = [("F", 2), ("S", 4), ("P", 1), ("A", 0), ("E", 1), ("Rv", 1), ("Re", 1), ("O", 0)];
        assert_eq!(
            sizes,
            expect.iter().map(|(t, n)| (t.to_string(), *n)).collect::<Vec<_>>()
        );
        assert!(bags[1].contains(&nn("staff", "friend", PosTag::ADJ)));
    }

    #[test]
    fn latest_wins_and_discard() {
        let b = nn("food", "good", PosTag::ADJ);
        let d = nn("dinner", "good", PosTag::ADJ);
        let labels = vec![rec(&b, "S"), rec(&b, "F"), rec(&d, "F"), rec(&d, DISCARD)];
        let bags = build_topic_bags(&labels, &default_topics()).unwrap();
        assert!(bags[0].contains(&b));
        assert!(!bags[1].contains(&b));
        assert!(bags.iter().all(|g| !g.contains(&d)));
        assert!(build_topic_bags(&[], &default_topics()).unwrap().iter().all(TopicBag::is_empty));
    }

    #[test]
    fn record_label_validation() {
        let b = nn("food", "good", PosTag::ADJ);
        let occ = BiTermOccurrence {
            biterm: b.clone(),
            review_id: "r".into(),
            clause_index: 0,
            negated: false,
        };
        let strained = strain(&count_biterms(&[occ]), 1).unwrap();
        let topics = default_topics();
        let mut store = LabelStore::in_memory();
        assert!(record_label(&mut store, &strained, &topics, &b, "F".parse().unwrap(), "a").is_ok());
        assert!(record_label(&mut store, &strained, &topics, &b, "Zz".parse().unwrap(), "a").is_err());
        let other = nn("x", "y", PosTag::ADJ);
        assert!(record_label(&mut store, &strained, &topics, &other, Decision::Discard, "a").is_err());
        assert_eq!(store.history().len(), 1);
    }

    #[test]
    fn journal_replays() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.jsonl");
        let mut store = LabelStore::open(&path).unwrap();
        for (b, d) in sample_labels() {
            store.append(rec(&b, d)).unwrap();
        }
        let reopened = LabelStore::open(&path).unwrap();
        assert_eq!(reopened.history(), store.history());
        let topics = default_topics();
        assert_eq!(
            build_topic_bags(reopened.history(), &topics).unwrap(),
            build_topic_bags(store.history(), &topics).unwrap()
        );
    }

    #[test]
    fn csv_and_bag_tsv_round_trip() {
        let labels: Vec<_> = sample_labels().iter().map(|(b, d)| rec(b, d)).collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.csv");
        fs::write(&path, export_labels_csv(&labels)).unwrap();
        let back = import_labels_csv(&path, "csv").unwrap();
        let topics = default_topics();
        let bags = build_topic_bags(&labels, &topics).unwrap();
        assert_eq!(build_topic_bags(&back, &topics).unwrap(), bags);
        let tsv = bags_to_tsv(&bags);
        assert_eq!(parse_bags_tsv(&tsv, &topics, Path::new("b")).unwrap(), bags);
    }

    #[test]
    fn clause_lookup_keeps_corpus_order() {
        let b = nn("food", "good", PosTag::ADJ);
        let clause = |r: &str, i: usize| Clause {
            review_id: r.into(),
            index: i,
            tokens: vec![],
            text: format!("{r}-{i}"),
            negated: false,
            sentence: 0,
            start: 0,
        };
        let clauses = vec![clause("a", 0), clause("a", 1), clause("b", 0)];
        let occ = |r: &str, i: usize| BiTermOccurrence {
            biterm: b.clone(),
            review_id: r.into(),
            clause_index: i,
            negated: false,
        };
        let occs = vec![occ("b", 0), occ("a", 1)];
        let got: Vec<&str> = clauses_for_biterm(&b, &occs, &clauses).iter().map(|c| c.text.as_str()).collect();
        assert_eq!(got, vec!["a-1", "b-0"]);
        assert!(clauses_for_biterm(&nn("x", "y", PosTag::ADJ), &occs, &clauses).is_empty());
    }
}
