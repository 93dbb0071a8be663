//! Shared domain types and corpus loading.
//!
//! Reviews are loaded from JSONL (one object per line) or CSV (header row,
//! RFC-4180 quoting). Records that cannot be turned into a [`Review`] are
//! reported individually, so `corpus.len() + rejected.len()` always equals
//! the number of input records.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub id: String,
    #[serde(default)]
    pub title: String,
    pub body: String,
    #[serde(default)]
    pub rating: Option<i64>,
    #[serde(default)]
    pub date: Option<String>,
}

impl Review {
    pub fn new(id: impl Into<String>, body: impl Into<String>) -> Self {
        Review {
            id: id.into(),
            title: String::new(),
            body: body.into(),
            rating: None,
            date: None,
        }
    }
}

/// Ordered, immutable collection of reviews.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    reviews: Vec<Review>,
}

impl Corpus {
    pub fn new(reviews: Vec<Review>) -> Self {
        Corpus { reviews }
    }

    pub fn reviews(&self) -> &[Review] {
        &self.reviews
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Review> {
        self.reviews.iter().find(|r| r.id == id)
    }
}

/// Coarse part-of-speech tagset used throughout the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PosTag {
    NN,
    VB,
    ADJ,
    RB,
    IN,
    DT,
    CC,
    PUNCT,
    UH,
    OTHER,
}

impl PosTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::NN => "NN",
            PosTag::VB => "VB",
            PosTag::ADJ => "ADJ",
            PosTag::RB => "RB",
            PosTag::IN => "IN",
            PosTag::DT => "DT",
            PosTag::CC => "CC",
            PosTag::PUNCT => "PUNCT",
            PosTag::UH => "UH",
            PosTag::OTHER => "OTHER",
        }
    }

    pub fn parse(s: &str) -> Option<PosTag> {
        Some(match s {
            "NN" => PosTag::NN,
            "VB" => PosTag::VB,
            "ADJ" => PosTag::ADJ,
            "RB" => PosTag::RB,
            "IN" => PosTag::IN,
            "DT" => PosTag::DT,
            "CC" => PosTag::CC,
            "PUNCT" => PosTag::PUNCT,
            "UH" => PosTag::UH,
            "OTHER" => PosTag::OTHER,
            _ => return None,
        })
    }

    /// Collapse a Penn Treebank tag (or a Universal POS tag) into the
    /// internal tagset.
    pub fn from_treebank(tag: &str) -> PosTag {
        match tag {
            t if t.starts_with("NN") => PosTag::NN,
            "PRP" | "WP" | "NOUN" | "PROPN" | "PRON" => PosTag::NN,
            t if t.starts_with("VB") => PosTag::VB,
            "MD" | "VERB" | "AUX" => PosTag::VB,
            t if t.starts_with("JJ") => PosTag::ADJ,
            "ADJ" => PosTag::ADJ,
            t if t.starts_with("RB") => PosTag::RB,
            "WRB" | "RP" | "ADV" | "PART" => PosTag::RB,
            "IN" | "TO" | "ADP" | "SCONJ" => PosTag::IN,
            "DT" | "PDT" | "WDT" | "PRP$" | "WP$" | "DET" => PosTag::DT,
            "CC" | "CCONJ" => PosTag::CC,
            "UH" | "INTJ" => PosTag::UH,
            "." | "," | ":" | "``" | "''" | "-LRB-" | "-RRB-" | "HYPH" | "NFP" | "PUNCT" => {
                PosTag::PUNCT
            }
            _ => PosTag::OTHER,
        }
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Lowercase stem; for non-alphabetic tokens the lowercased surface.
    pub stem: String,
    pub pos: PosTag,
}

impl Token {
    pub fn new(surface: impl Into<String>, pos: PosTag) -> Self {
        let surface = surface.into();
        let stem = crate::stem::stem_token(&surface);
        Token { surface, stem, pos }
    }

    pub fn lower(&self) -> String {
        self.surface.to_lowercase()
    }
}

/// A contiguous run of tokens from one sentence of a review.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub review_id: String,
    pub index: usize,
    pub tokens: Vec<Token>,
    /// Original substring of the review body.
    pub text: String,
    pub negated: bool,
    /// Sentence the clause was cut from and the offset of its first token
    /// inside that sentence.
    pub sentence: usize,
    pub start: usize,
}

impl Clause {
    pub fn token_range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.tokens.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TopicId(pub String);

impl TopicId {
    pub fn new(id: impl Into<String>) -> Self {
        TopicId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TopicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub id: TopicId,
    pub label: String,
    pub weight: f64,
}

impl Topic {
    pub fn new(id: &str, label: &str) -> Self {
        Topic {
            id: TopicId::new(id),
            label: label.to_string(),
            weight: 1.0,
        }
    }
}

/// Food, Service, Price, Atmosphere, Environment, Revisit, Recommendation,
/// Other; every weight 1.0.
pub fn default_topics() -> Vec<Topic> {
    [
        ("F", "Food"),
        ("S", "Service"),
        ("P", "Price"),
        ("A", "Atmosphere"),
        ("E", "Environment"),
        ("Rv", "Revisit"),
        ("Re", "Recommendation"),
        ("O", "Other"),
    ]
    .iter()
    .map(|(id, label)| Topic::new(id, label))
    .collect()
}

pub fn validate_topics(topics: &[Topic]) -> Result<()> {
    let mut seen = HashSet::new();
    for t in topics {
        if t.id.as_str().is_empty() {
            return Err(Error::Validation("topic id must be non-empty".into()));
        }
        if !seen.insert(&t.id) {
            return Err(Error::Validation(format!("duplicate topic id `{}`", t.id)));
        }
        if !(t.weight > 0.0 && t.weight.is_finite()) {
            return Err(Error::Parameter(format!(
                "topic `{}` weight must be positive, got {}",
                t.id, t.weight
            )));
        }
    }
    Ok(())
}

/// Topics file: TSV `id<TAB>label[<TAB>weight]`, `#` comments allowed.
pub fn load_topics(path: &Path) -> Result<Vec<Topic>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut topics = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 2 {
            return Err(Error::format(path, i + 1, "expected `id<TAB>label[<TAB>weight]`"));
        }
        let weight = match cols.get(2) {
            Some(w) => w
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::format(path, i + 1, format!("bad weight `{w}`")))?,
            None => 1.0,
        };
        topics.push(Topic {
            id: TopicId::new(cols[0].trim()),
            label: cols[1].trim().to_string(),
            weight,
        });
    }
    validate_topics(&topics)?;
    Ok(topics)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Jsonl,
    Csv,
}

impl InputFormat {
    pub fn from_path(path: &Path) -> Option<InputFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "jsonl" | "ndjson" => Some(InputFormat::Jsonl),
            "csv" => Some(InputFormat::Csv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IssueKind {
    Malformed,
    MissingField,
    EmptyBody,
    DuplicateId,
    RatingOutOfRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    /// 1-based record number in the input (0 when not tied to a record).
    pub record: usize,
    pub id: Option<String>,
    pub kind: IssueKind,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn len(&self) -> usize {
        self.issues.len()
    }

    pub fn count(&self, kind: IssueKind) -> usize {
        self.issues.iter().filter(|i| i.kind == kind).count()
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOutcome {
    pub corpus: Corpus,
    /// One entry per rejected input record.
    pub rejected: ValidationReport,
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<serde_json::Value>,
    title: Option<String>,
    body: Option<String>,
    rating: Option<serde_json::Value>,
    date: Option<String>,
}

pub fn load_reviews(path: &Path, format: InputFormat) -> Result<LoadOutcome> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_reviews(&bytes, format)
}

/// Parse an in-memory review file. Pure: identical bytes give an identical
/// outcome.
pub fn parse_reviews(bytes: &[u8], format: InputFormat) -> Result<LoadOutcome> {
    let records: Vec<std::result::Result<RawRecord, String>> = match format {
        InputFormat::Jsonl => {
            let text = String::from_utf8_lossy(bytes);
            text.lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| serde_json::from_str::<RawRecord>(l).map_err(|e| e.to_string()))
                .collect()
        }
        InputFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(true)
                .flexible(true)
                .from_reader(bytes);
            let headers = match reader.headers() {
                Ok(h) => h.clone(),
                Err(_) => return Ok(LoadOutcome::default()),
            };
            let col = |name: &str| headers.iter().position(|h| h.trim() == name);
            let (id_c, title_c, body_c, rating_c, date_c) =
                (col("id"), col("title"), col("body"), col("rating"), col("date"));
            reader
                .records()
                .map(|rec| {
                    let rec = rec.map_err(|e| e.to_string())?;
                    let get = |c: Option<usize>| {
                        c.and_then(|c| rec.get(c))
                            .map(str::to_string)
                            .filter(|s| !s.is_empty())
                    };
                    Ok(RawRecord {
                        id: get(id_c).map(serde_json::Value::String),
                        title: get(title_c),
                        body: get(body_c),
                        rating: get(rating_c).map(serde_json::Value::String),
                        date: get(date_c),
                    })
                })
                .collect()
        }
    };

    let mut reviews = Vec::new();
    let mut rejected = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (i, rec) in records.into_iter().enumerate() {
        let record = i + 1;
        let reject = |kind, id: Option<String>, message: String| Issue {
            record,
            id,
            kind,
            message,
        };
        let raw = match rec {
            Ok(raw) => raw,
            Err(msg) => {
                rejected.push(reject(IssueKind::Malformed, None, msg));
                continue;
            }
        };
        let id = match raw.id {
            Some(serde_json::Value::String(s)) if !s.trim().is_empty() => s,
            Some(serde_json::Value::Number(n)) => n.to_string(),
            _ => {
                rejected.push(reject(IssueKind::MissingField, None, "missing `id`".into()));
                continue;
            }
        };
        let body = match raw.body {
            Some(b) if !b.trim().is_empty() => b,
            _ => {
                let msg = format!("review `{id}` has an empty body");
                rejected.push(reject(IssueKind::EmptyBody, Some(id), msg));
                continue;
            }
        };
        let rating = match raw.rating {
            None | Some(serde_json::Value::Null) => None,
            Some(serde_json::Value::Number(n)) if n.is_i64() => n.as_i64(),
            Some(serde_json::Value::String(s)) if s.trim().parse::<i64>().is_ok() => {
                s.trim().parse::<i64>().ok()
            }
            Some(other) => {
                let msg = format!("review `{id}` has a non-integer rating {other}");
                rejected.push(reject(IssueKind::Malformed, Some(id), msg));
                continue;
            }
        };
        if !seen.insert(id.clone()) {
            let msg = format!("duplicate review id `{id}`");
            rejected.push(reject(IssueKind::DuplicateId, Some(id), msg));
            continue;
        }
        reviews.push(Review {
            id,
            title: raw.title.unwrap_or_default(),
            body,
            rating,
            date: raw.date,
        });
    }
    Ok(LoadOutcome {
        corpus: Corpus::new(reviews),
        rejected: ValidationReport { issues: rejected },
    })
}

/// Report duplicate ids, empty bodies and ratings outside 1..=5.
pub fn validate_corpus(corpus: &Corpus) -> ValidationReport {
    let mut issues = Vec::new();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for (i, r) in corpus.reviews().iter().enumerate() {
        let n = counts.entry(r.id.as_str()).or_default();
        *n += 1;
        if *n == 2 {
            issues.push(Issue {
                record: i + 1,
                id: Some(r.id.clone()),
                kind: IssueKind::DuplicateId,
                message: format!("duplicate review id `{}`", r.id),
            });
        }
        if r.body.trim().is_empty() {
            issues.push(Issue {
                record: i + 1,
                id: Some(r.id.clone()),
                kind: IssueKind::EmptyBody,
                message: format!("review `{}` has an empty body", r.id),
            });
        }
        if let Some(rating) = r.rating {
            if !(1..=5).contains(&rating) {
                issues.push(Issue {
                    record: i + 1,
                    id: Some(r.id.clone()),
                    kind: IssueKind::RatingOutOfRange,
                    message: format!("review `{}` has rating {rating} outside 1..=5", r.id),
                });
            }
        }
    }
    ValidationReport { issues }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIRST_FIVE: &str = r#"{"id":"r1","title":"Fantastic!!","body":"great taste, simple dish.","rating":5,"date":"2016-04-18"}
{"id":"r2","title":"Went here...","body":"this place was great.","rating":5,"date":"2016-04-12"}
{"id":"r3","title":"I'm dreaming...","body":"this is hands down the best poke.","rating":5,"date":"2016-04-11"}
{"id":"r4","title":"Amazing Poke!","body":"so glad we found it.","rating":5,"date":"2016-04-11"}
{"id":"r5","title":"Great Poke","body":"just a small shop.","rating":4,"date":"2016-04-09"}
"#;

    #[test]
    fn loads_first_five_rows() {
        let out = parse_reviews(FIRST_FIVE.as_bytes(), InputFormat::Jsonl).unwrap();
        assert_eq!(out.corpus.len(), 5);
        assert!(out.rejected.is_empty());
        let titles: Vec<_> = out.corpus.reviews().iter().map(|r| r.title.as_str()).collect();
        assert_eq!(titles[0], "Fantastic!!");
        assert_eq!(titles[1], "Went here...");
        let ratings: Vec<_> = out.corpus.reviews().iter().map(|r| r.rating.unwrap()).collect();
        assert_eq!(ratings, vec![5, 5, 5, 5, 4]);
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let out = parse_reviews(b"", InputFormat::Jsonl).unwrap();
        assert!(out.corpus.is_empty());
        assert!(out.rejected.is_empty());
        let out = parse_reviews(b"", InputFormat::Csv).unwrap();
        assert!(out.corpus.is_empty());
    }

    #[test]
    fn blank_body_is_rejected() {
        let out = parse_reviews(br#"{"id":"a","body":"   "}"#, InputFormat::Jsonl).unwrap();
        assert_eq!(out.corpus.len(), 0);
        assert_eq!(out.rejected.len(), 1);
        assert_eq!(out.rejected.issues[0].kind, IssueKind::EmptyBody);
    }

    #[test]
    fn duplicate_id_names_the_id() {
        let src = "{\"id\":\"r1\",\"body\":\"a\"}\n{\"id\":\"r1\",\"body\":\"b\"}\nnot json\n";
        let out = parse_reviews(src.as_bytes(), InputFormat::Jsonl).unwrap();
        assert_eq!(out.corpus.len(), 1);
        assert_eq!(out.rejected.len(), 2);
        assert!(out.rejected.issues[0].message.contains("r1"));
        assert_eq!(out.rejected.issues[1].kind, IssueKind::Malformed);
    }

    #[test]
    fn csv_with_quoting() {
        let src = "id,title,body,rating,date\nr1,\"Hi, there\",\"food was good, really\",5,2016-04-18\nr2,,\"ok\",,\n";
        let out = parse_reviews(src.as_bytes(), InputFormat::Csv).unwrap();
        assert_eq!(out.corpus.len(), 2);
        assert_eq!(out.corpus.reviews()[0].title, "Hi, there");
        assert_eq!(out.corpus.reviews()[0].body, "food was good, really");
        assert_eq!(out.corpus.reviews()[1].rating, None);
    }

    #[test]
    fn validate_reports_each_problem() {
        let mut a = Review::new("r1", "good");
        let b = Review::new("r1", "bad");
        assert_eq!(validate_corpus(&Corpus::new(vec![a.clone(), b])).count(IssueKind::DuplicateId), 1);
        a.rating = Some(7);
        let report = validate_corpus(&Corpus::new(vec![a]));
        assert_eq!(report.len(), 1);
        assert_eq!(report.issues[0].kind, IssueKind::RatingOutOfRange);
        let five = parse_reviews(FIRST_FIVE.as_bytes(), InputFormat::Jsonl).unwrap();
        assert!(validate_corpus(&five.corpus).is_empty());
    }

    #[test]
    fn penn_tags_collapse() {
        assert_eq!(PosTag::from_treebank("JJS"), PosTag::ADJ);
        assert_eq!(PosTag::from_treebank("VBD"), PosTag::VB);
        assert_eq!(PosTag::from_treebank("NNS"), PosTag::NN);
        assert_eq!(PosTag::from_treebank("RBR"), PosTag::RB);
        assert_eq!(PosTag::from_treebank(","), PosTag::PUNCT);
        assert_eq!(PosTag::from_treebank("UH"), PosTag::UH);
    }

    #[test]
    fn default_taxonomy_has_eight_unit_weight_topics() {
        let topics = default_topics();
        assert_eq!(topics.len(), 8);
        assert!(topics.iter().all(|t| t.weight == 1.0));
        validate_topics(&topics).unwrap();
    }

    proptest::proptest! {
        #[test]
        fn record_counts_add_up(bodies in proptest::collection::vec("[ a-z]{0,6}", 0..12), dup in 0usize..3) {
            let mut lines = Vec::new();
            for (i, b) in bodies.iter().enumerate() {
                let id = if i < dup { "same".to_string() } else { format!("r{i}") };
                lines.push(serde_json::json!({"id": id, "body": b}).to_string());
            }
            let src = lines.join("\n");
            let out = parse_reviews(src.as_bytes(), InputFormat::Jsonl).unwrap();
            proptest::prop_assert_eq!(out.corpus.len() + out.rejected.len(), bodies.len());
            let again = parse_reviews(src.as_bytes(), InputFormat::Jsonl).unwrap();
            proptest::prop_assert_eq!(out.corpus, again.corpus);
        }
    }
}
