//! Golden checks over the bundled fixture set.
//!
//! Each case runs one piece of the pipeline on the fixture inputs and
//! compares the result byte for byte with a file under `golden/`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::bagger::clauses_for_biterm;
use crate::corpus::Clause;
use crate::error::{Error, Result};
use crate::parse::{derive_pairs, load_parsed, tag_tokens};
use crate::pipeline::{disintegrate_review, Pipeline, PipelineConfig, MATRIX};
use crate::score::ClauseScore;
use crate::segment::normalize_whitespace;
use crate::summarize::{extract_biterms, BiTerm};

/// Directory holding the bundled fixtures.
pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldenResult {
    pub name: &'static str,
    /// Golden file the case is checked against.
    pub expected: PathBuf,
    pub passed: bool,
    /// Expected and actual text when the case failed.
    pub diff: Option<String>,
}

fn compare(name: &'static str, file: &str, expected: &str, actual: &str) -> GoldenResult {
    let path = fixture_dir().join("golden").join(file);
    if expected == actual {
        return GoldenResult {
            name,
            expected: path,
            passed: true,
            diff: None,
        };
    }
    let mut diff = String::new();
    let (e, a): (Vec<&str>, Vec<&str>) = (expected.lines().collect(), actual.lines().collect());
    for i in 0..e.len().max(a.len()) {
        let (x, y) = (e.get(i).copied().unwrap_or(""), a.get(i).copied().unwrap_or(""));
        if x != y {
            diff.push_str(&format!("line {}:\n  - {x}\n  + {y}\n", i + 1));
        }
    }
    GoldenResult {
        name,
        expected: path,
        passed: false,
        diff: Some(diff),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
}

/// Fixture pipeline writing into `work_dir`.
pub fn fixture_pipeline(work_dir: &Path) -> Result<Pipeline> {
    let mut cfg = PipelineConfig::load(&fixture_dir().join("dissbus.toml"))?;
    cfg.paths.output = work_dir.to_path_buf();
    Pipeline::new(cfg)
}

fn first_review_clauses(p: &Pipeline, use_parses: bool) -> Result<Vec<Clause>> {
    let cfg = &p.config;
    let corpus = cfg.load_corpus()?;
    let review = corpus
        .get("r001")
        .ok_or_else(|| Error::Validation("fixture corpus lacks r001".into()))?;
    let seg = cfg.segmenter()?;
    let tagger = cfg.tagger(&seg)?;
    let parsed = match (&cfg.paths.parses, use_parses) {
        (Some(path), true) => Some(load_parsed(path)?),
        _ => None,
    };
    let sentences = parsed.as_ref().and_then(|m| m.get("r001")).map(Vec::as_slice);
    Ok(disintegrate_review(review, sentences, &tagger, &seg)
        .into_iter()
        .map(|r| r.clause)
        .collect())
}

fn disintegration(p: &Pipeline, use_parses: bool, name: &'static str) -> Result<GoldenResult> {
    let expected = read(&fixture_dir().join("golden/disintegration.txt"))?;
    let got: String = first_review_clauses(p, use_parses)?
        .iter()
        .map(|c| normalize_whitespace(&c.text) + "\n")
        .collect();
    Ok(compare(name, "disintegration.txt", &expected, &got))
}

fn summarization(p: &Pipeline) -> Result<GoldenResult> {
    let golden = read(&fixture_dir().join("golden/summarization.tsv"))?;
    let parsed = match &p.config.paths.parses {
        Some(path) => load_parsed(path)?,
        None => return Err(Error::Validation("fixture config lacks a parse file".into())),
    };
    let mut expected = String::new();
    let mut actual = String::new();
    for line in data_lines(&golden) {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::Validation(format!("bad summarization golden row `{line}`")));
        }
        let (tokens, pairs) = match cols[0] {
            "conllu" => {
                let s = parsed
                    .values()
                    .flatten()
                    .find(|s| {
                        let text: Vec<&str> = s.tokens.iter().map(|t| t.surface.as_str()).collect();
                        normalize_whitespace(&text.join(" ").replace(" ,", ",").replace(" .", ".")) == cols[1]
                    })
                    .ok_or_else(|| Error::Validation(format!("no parsed sentence `{}`", cols[1])))?;
                (s.tokens.clone(), s.pairs.clone())
            }
            _ => {
                let tokens = tag_tokens(cols[1]);
                let pairs = derive_pairs(&tokens);
                (tokens, pairs)
            }
        };
        let clause = Clause {
            review_id: "golden".into(),
            index: 0,
            tokens,
            text: cols[1].to_string(),
            negated: false,
            sentence: 0,
            start: 0,
        };
        let keys: Vec<String> = extract_biterms(&clause, &pairs).iter().map(|o| o.biterm.key()).collect();
        expected.push_str(&format!("{}\t{}\n", cols[1], cols[2]));
        actual.push_str(&format!("{}\t{}\n", cols[1], keys.join(",")));
    }
    Ok(compare("summarization", "summarization.tsv", &expected, &actual))
}

fn done_well(p: &Pipeline) -> Result<GoldenResult> {
    let expected = read(&fixture_dir().join("golden/done_well.txt"))?;
    let records = p.clauses()?;
    let clauses: Vec<Clause> = records.into_iter().map(|r| r.clause).collect();
    let b: BiTerm = "done:VB:well:RB".parse()?;
    let got: String = clauses_for_biterm(&b, &p.occurrences()?, &clauses)
        .iter()
        .map(|c| normalize_whitespace(&c.text) + "\n")
        .collect();
    Ok(compare("clauses for (done, well)", "done_well.txt", &expected, &got))
}

/// For each golden sentence, the clause scores whose clause text lies in
/// that sentence must include the expected (topic, valence).
fn scoring(p: &Pipeline) -> Result<GoldenResult> {
    let golden = read(&fixture_dir().join("golden/scoring.tsv"))?;
    let clauses: Vec<Clause> = p.clauses()?.into_iter().map(|r| r.clause).collect();
    let scores = read_clause_scores(p)?;
    let mut expected = String::new();
    let mut actual = String::new();
    for line in data_lines(&golden) {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::Validation(format!("bad scoring golden row `{line}`")));
        }
        let sentence = cols[0];
        expected.push_str(&format!("{sentence}\t{}\t{}\n", cols[1], cols[2]));
        let hit = scores.iter().find(|s| {
            let text = clauses
                .iter()
                .find(|c| c.review_id == s.review_id && c.index == s.clause_index)
                .map(|c| normalize_whitespace(&c.text))
                .unwrap_or_default();
            !text.is_empty() && sentence.contains(&text) && s.topic.as_str() == cols[1]
        });
        let got = hit.map_or("none\tnone".to_string(), |s| format!("{}\t{:.2}", s.topic, s.valence));
        actual.push_str(&format!("{sentence}\t{got}\n"));
    }
    Ok(compare("scoring", "scoring.tsv", &expected, &actual))
}

/// Reads `clause_scores.tsv` back from the output directory.
pub fn read_clause_scores(p: &Pipeline) -> Result<Vec<ClauseScore>> {
    let path = p.config.output(crate::pipeline::CLAUSE_SCORES);
    let text = read(&path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.split('\t').collect();
        let err = || Error::format(&path, i + 1, "bad clause score row");
        if cols.len() != 7 {
            return Err(err());
        }
        out.push(ClauseScore {
            review_id: cols[0].to_string(),
            clause_index: cols[1].parse().map_err(|_| err())?,
            topic: crate::corpus::TopicId::new(cols[2]),
            biterm: cols[3].parse()?,
            valence: cols[4].parse().map_err(|_| err())?,
            scored: cols[5].parse().map_err(|_| err())?,
            negated: cols[6].parse().map_err(|_| err())?,
        });
    }
    Ok(out)
}

/// Runs the fixture pipeline in `work_dir` and checks every golden case.
pub fn verify_goldens(work_dir: &Path) -> Result<Vec<GoldenResult>> {
    let p = fixture_pipeline(work_dir)?;
    p.run_all()?;
    let matrix = compare(
        "matrix",
        "matrix.csv",
        &read(&fixture_dir().join("golden/matrix.csv"))?,
        &read(&p.config.output(MATRIX))?,
    );
    Ok(vec![
        disintegration(&p, false, "disintegration (rule tagger)")?,
        disintegration(&p, true, "disintegration (parsed)")?,
        summarization(&p)?,
        done_well(&p)?,
        scoring(&p)?,
        matrix,
    ])
}
