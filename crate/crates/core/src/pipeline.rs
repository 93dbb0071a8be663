//! Stage orchestration with on-disk artifacts and manifests.
//!
//! Every stage reads its predecessors' artifacts from the output directory
//! and writes its own plus `<stage>.manifest.json` (input hashes,
//! parameters, counts). Identical inputs give byte-identical artifacts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bagger::{
    bag_topic, bags_to_tsv, build_topic_bags, import_labels_csv, parse_bags_tsv, LabelRecord, LabelStore, TopicBag,
};
use crate::corpus::{default_topics, load_reviews, load_topics, Clause, Corpus, InputFormat, Review, Topic, TopicId};
use crate::error::{Error, Result};
use crate::lists::WordList;
use crate::parse::{align_offsets, derive_pairs, load_parsed, DependencyPair, ParseSource, ParsedCorpus, Tagger, TaggedSentence};
use crate::score::{aggregate, check_tau, clause_scores_to_tsv, matrix_to_csv, score_clauses, SentimentLexicon};
use crate::segment::{segment, SegmenterConfig};
use crate::strain::{check_cut_point, count_biterms, strain, CommonExpressionSet, FrequencyTable};
use crate::summarize::{extract_biterms, BiTerm, BiTermOccurrence};
use crate::upcycle::{
    assignments_to_tsv, check_gates, parse_assignments_tsv, upcycle, ComparisonMode, ComparisonPlan, Thesaurus,
};

pub const CLAUSES: &str = "clauses.jsonl";
pub const OCCURRENCES: &str = "occurrences.tsv";
pub const FREQUENCY: &str = "frequency.tsv";
pub const COMMON_EXPRESSIONS: &str = "common_expressions.tsv";
pub const BAGS: &str = "bags.tsv";
pub const ASSIGNMENTS: &str = "assignments.tsv";
pub const BAGS_UPCYCLED: &str = "bags_upcycled.tsv";
pub const CLAUSE_SCORES: &str = "clause_scores.tsv";
pub const MATRIX: &str = "matrix.csv";
pub const JOURNAL: &str = "labels.jsonl";
pub const RUN_REPORT: &str = "run_report.json";
const OCCURRENCE_HEADER: &str = "review_id\tclause_index\tbiterm_key\tnegated";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Disintegrate,
    Summarize,
    Strain,
    Bag,
    Upcycle,
    Score,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Disintegrate,
        Stage::Summarize,
        Stage::Strain,
        Stage::Bag,
        Stage::Upcycle,
        Stage::Score,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Disintegrate => "disintegrate",
            Stage::Summarize => "summarize",
            Stage::Strain => "strain",
            Stage::Bag => "bag",
            Stage::Upcycle => "upcycle",
            Stage::Score => "score",
        }
    }

    pub fn artifacts(self) -> &'static [&'static str] {
        match self {
            Stage::Disintegrate => &[CLAUSES],
            Stage::Summarize => &[OCCURRENCES],
            Stage::Strain => &[FREQUENCY, COMMON_EXPRESSIONS],
            Stage::Bag => &[BAGS],
            Stage::Upcycle => &[ASSIGNMENTS, BAGS_UPCYCLED],
            Stage::Score => &[CLAUSE_SCORES, MATRIX],
        }
    }

    pub fn manifest_name(self) -> String {
        format!("{}.manifest.json", self.as_str())
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown stage `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub corpus: PathBuf,
    pub parses: Option<PathBuf>,
    pub lexicon: PathBuf,
    pub thesaurus: PathBuf,
    pub categories: Option<PathBuf>,
    pub negations: Option<PathBuf>,
    pub conjunctions: Option<PathBuf>,
    pub abbreviations: Option<PathBuf>,
    pub pos_lexicon: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    /// Label journal written by the labeling service; defaults to
    /// `<output>/labels.jsonl`.
    pub journal: Option<PathBuf>,
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Parameters {
    pub cut_point: i64,
    pub c1: f64,
    pub c2: i64,
    pub mode: ComparisonMode,
    pub m: usize,
    pub seed: u64,
    pub tau: f64,
}

impl Default for Parameters {
    fn default() -> Self {
        Parameters {
            cut_point: 8,
            c1: 1.0,
            c2: 8,
            mode: ComparisonMode::Full,
            m: 0,
            seed: 42,
            tau: 0.25,
        }
    }
}

impl Parameters {
    pub fn validate(&self) -> Result<()> {
        check_cut_point(self.cut_point)?;
        check_gates(self.c1, self.c2)?;
        check_tau(self.tau)?;
        if self.mode == ComparisonMode::Fractional && self.m == 0 {
            return Err(Error::Parameter("fractional comparison needs M ≥ 1".into()));
        }
        Ok(())
    }

    pub fn plan(&self) -> ComparisonPlan {
        ComparisonPlan {
            mode: self.mode,
            m: self.m,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    #[serde(default)]
    pub parameters: Parameters,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    /// Reads a TOML config; relative paths are taken from the config's
    /// directory.
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let p = &mut cfg.paths;
        for required in [&mut p.corpus, &mut p.lexicon, &mut p.thesaurus, &mut p.output] {
            resolve(base, required);
        }
        for opt in [
            &mut p.parses,
            &mut p.categories,
            &mut p.negations,
            &mut p.conjunctions,
            &mut p.abbreviations,
            &mut p.pos_lexicon,
            &mut p.topics,
            &mut p.labels,
            &mut p.journal,
        ]
        .into_iter()
        .flatten()
        {
            resolve(base, opt);
        }
        Ok(cfg)
    }

    pub fn output(&self, name: &str) -> PathBuf {
        self.paths.output.join(name)
    }

    pub fn journal_path(&self) -> PathBuf {
        self.paths.journal.clone().unwrap_or_else(|| self.output(JOURNAL))
    }

    pub fn topics(&self) -> Result<Vec<Topic>> {
        match &self.paths.topics {
            Some(p) => load_topics(p),
            None => Ok(default_topics()),
        }
    }

    pub fn segmenter(&self) -> Result<SegmenterConfig> {
        let list = |p: &Option<PathBuf>, default: fn() -> WordList| match p {
            Some(p) => WordList::load(p),
            None => Ok(default()),
        };
        Ok(SegmenterConfig {
            conjunctions: list(&self.paths.conjunctions, WordList::conjunctions)?,
            abbreviations: list(&self.paths.abbreviations, WordList::abbreviations)?,
            negations: list(&self.paths.negations, WordList::negations)?,
        })
    }

    pub fn tagger(&self, segmenter: &SegmenterConfig) -> Result<Tagger> {
        match &self.paths.pos_lexicon {
            Some(p) => Tagger::load_lexicon(p, segmenter.abbreviations.clone()),
            None => Ok(Tagger::default().with_abbreviations(segmenter.abbreviations.clone())),
        }
    }

    pub fn load_corpus(&self) -> Result<Corpus> {
        let path = &self.paths.corpus;
        let format = InputFormat::from_path(path)
            .ok_or_else(|| Error::Validation(format!("{}: expected a .jsonl or .csv file", path.display())))?;
        let outcome = load_reviews(path, format)?;
        for issue in &outcome.rejected.issues {
            log::warn!("{}: record {} rejected: {}", path.display(), issue.record, issue.message);
        }
        Ok(outcome.corpus)
    }

    pub fn thesaurus(&self) -> Result<Thesaurus> {
        Thesaurus::load(&self.paths.thesaurus, self.paths.categories.as_deref())
    }
}

/// A clause together with the dependency pairs that fall inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseRecord {
    #[serde(flatten)]
    pub clause: Clause,
    pub pairs: Vec<DependencyPair>,
}

/// Segments one review. Parsed sentences are used when given, otherwise
/// the body is tagged by rule and pairs are derived per clause.
pub fn disintegrate_review(
    review: &Review,
    parsed: Option<&[TaggedSentence]>,
    tagger: &Tagger,
    segmenter: &SegmenterConfig,
) -> Vec<ClauseRecord> {
    let sentences: Vec<TaggedSentence> = match parsed {
        Some(s) => {
            let mut s = s.to_vec();
            align_offsets(&review.body, &mut s);
            s
        }
        None => vec![tagger.parse_body(&review.body)],
    };
    segment(review, &sentences, segmenter)
        .into_iter()
        .map(|clause| {
            let sentence = &sentences[clause.sentence];
            let pairs = match sentence.source {
                ParseSource::Conllu => sentence.pairs_within(clause.token_range()),
                ParseSource::RuleTagger => derive_pairs(&clause.tokens),
            };
            ClauseRecord { clause, pairs }
        })
        .collect()
}

/// All clauses of the corpus, reviews in corpus order.
pub fn disintegrate(
    corpus: &Corpus,
    parsed: Option<&ParsedCorpus>,
    tagger: &Tagger,
    segmenter: &SegmenterConfig,
) -> Vec<ClauseRecord> {
    corpus
        .reviews()
        .par_iter()
        .map(|r| {
            let sentences = parsed.and_then(|p| p.get(&r.id)).map(Vec::as_slice);
            disintegrate_review(r, sentences, tagger, segmenter)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

pub fn summarize(records: &[ClauseRecord]) -> Vec<BiTermOccurrence> {
    records
        .par_iter()
        .map(|r| extract_biterms(&r.clause, &r.pairs))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Topic of a bi-term: its bag, else its upcycled assignment.
pub fn topic_lookup<'a>(
    bags: &'a [TopicBag],
    assignments: &'a BTreeMap<BiTerm, TopicId>,
) -> impl Fn(&BiTerm) -> Option<TopicId> + 'a {
    move |b| bag_topic(bags, b).cloned().or_else(|| assignments.get(b).cloned())
}

pub fn occurrences_to_tsv(occs: &[BiTermOccurrence]) -> String {
    let mut out = String::from(OCCURRENCE_HEADER);
    out.push('\n');
    for o in occs {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", o.review_id, o.clause_index, o.biterm.key(), o.negated));
    }
    out
}

pub fn parse_occurrences_tsv(text: &str, path: &Path) -> Result<Vec<BiTermOccurrence>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let err = |m: String| Error::format(path, i + 1, m);
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(err("expected 4 columns".into()));
        }
        out.push(BiTermOccurrence {
            review_id: cols[0].to_string(),
            clause_index: cols[1].parse().map_err(|_| err(format!("bad clause index `{}`", cols[1])))?,
            biterm: cols[2].parse().map_err(|e: Error| err(e.to_string()))?,
            negated: cols[3].parse().map_err(|_| err(format!("bad flag `{}`", cols[3])))?,
        });
    }
    Ok(out)
}

pub fn clauses_to_jsonl(records: &[ClauseRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("clause records serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_clauses_jsonl(text: &str, path: &Path) -> Result<Vec<ClauseRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::format(path, i + 1, e.to_string())))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub inputs: BTreeMap<String, String>,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub counts: BTreeMap<String, usize>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn hash_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path).map_err(|e| Error::io(path, e))?))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Stage runner bound to one configuration.
pub struct Pipeline {
    pub config: PipelineConfig,
}

struct ManifestBuilder {
    m: Manifest,
}

impl ManifestBuilder {
    fn new(stage: Stage) -> Self {
        ManifestBuilder {
            m: Manifest {
                stage: stage.as_str().to_string(),
                ..Manifest::default()
            },
        }
    }

    fn input(mut self, name: &str, path: &Path) -> Result<Self> {
        self.m.inputs.insert(name.to_string(), hash_file(path)?);
        Ok(self)
    }

    fn param(mut self, name: &str, v: impl Serialize) -> Self {
        self.m.parameters.insert(name.to_string(), serde_json::to_value(v).expect("plain values"));
        self
    }

    fn count(mut self, name: &str, n: usize) -> Self {
        self.m.counts.insert(name.to_string(), n);
        self
    }
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Pipeline> {
        config.parameters.validate()?;
        Ok(Pipeline { config })
    }

    pub fn from_path(path: &Path) -> Result<Pipeline> {
        Pipeline::new(PipelineConfig::load(path)?)
    }

    fn out(&self, name: &str) -> PathBuf {
        self.config.output(name)
    }

    fn finish(&self, stage: Stage, b: ManifestBuilder) -> Result<Manifest> {
        let text = serde_json::to_string_pretty(&b.m).expect("manifest serializes") + "\n";
        write(&self.out(&stage.manifest_name()), &text)?;
        log::info!("{stage}: {:?}", b.m.counts);
        Ok(b.m)
    }

    fn require(&self, stage: Stage, needs: Stage) -> Result<()> {
        for a in needs.artifacts() {
            if !self.out(a).exists() {
                return Err(Error::MissingStage {
                    stage: stage.as_str(),
                    required: needs.as_str(),
                    command: needs.as_str(),
                });
            }
        }
        Ok(())
    }

    pub fn read_manifest(&self, stage: Stage) -> Result<Manifest> {
        let path = self.out(&stage.manifest_name());
        serde_json::from_str(&read(&path)?).map_err(|e| Error::format(&path, 1, e.to_string()))
    }

    pub fn run_stage(&self, stage: Stage) -> Result<Manifest> {
        match stage {
            Stage::Disintegrate => self.run_disintegrate(),
            Stage::Summarize => self.run_summarize(),
            Stage::Strain => self.run_strain(),
            Stage::Bag => self.run_bag(),
            Stage::Upcycle => self.run_upcycle(),
            Stage::Score => self.run_score(),
        }
    }

    fn run_disintegrate(&self) -> Result<Manifest> {
        let cfg = &self.config;
        let corpus = cfg.load_corpus()?;
        let segmenter = cfg.segmenter()?;
        let tagger = cfg.tagger(&segmenter)?;
        let parsed = match &cfg.paths.parses {
            Some(p) => Some(load_parsed(p)?),
            None => None,
        };
        if let Some(parsed) = &parsed {
            for id in parsed.keys().filter(|id| corpus.get(id).is_none()) {
                log::warn!("parse file has sentences for unknown review `{id}`");
            }
        }
        let records = disintegrate(&corpus, parsed.as_ref(), &tagger, &segmenter);
        write(&self.out(CLAUSES), &clauses_to_jsonl(&records))?;
        let mut b = ManifestBuilder::new(Stage::Disintegrate).input("corpus", &cfg.paths.corpus)?;
        for (name, p) in [
            ("parses", &cfg.paths.parses),
            ("conjunctions", &cfg.paths.conjunctions),
            ("abbreviations", &cfg.paths.abbreviations),
            ("negations", &cfg.paths.negations),
            ("pos_lexicon", &cfg.paths.pos_lexicon),
        ] {
            if let Some(p) = p {
                b = b.input(name, p)?;
            }
        }
        let negated = records.iter().filter(|r| r.clause.negated).count();
        self.finish(
            Stage::Disintegrate,
            b.count("reviews", corpus.len())
                .count("clauses", records.len())
                .count("negated_clauses", negated),
        )
    }

    pub fn clauses(&self) -> Result<Vec<ClauseRecord>> {
        let p = self.out(CLAUSES);
        parse_clauses_jsonl(&read(&p)?, &p)
    }

    pub fn occurrences(&self) -> Result<Vec<BiTermOccurrence>> {
        let p = self.out(OCCURRENCES);
        parse_occurrences_tsv(&read(&p)?, &p)
    }

    fn run_summarize(&self) -> Result<Manifest> {
        self.require(Stage::Summarize, Stage::Disintegrate)?;
        let records = self.clauses()?;
        let occs = summarize(&records);
        write(&self.out(OCCURRENCES), &occurrences_to_tsv(&occs))?;
        let unique: BTreeSet<&BiTerm> = occs.iter().map(|o| &o.biterm).collect();
        self.finish(
            Stage::Summarize,
            ManifestBuilder::new(Stage::Summarize)
                .input(CLAUSES, &self.out(CLAUSES))?
                .count("clauses", records.len())
                .count("biterm_occurrences", occs.len())
                .count("unique_biterms", unique.len()),
        )
    }

    pub fn frequency(&self) -> Result<FrequencyTable> {
        let p = self.out(FREQUENCY);
        FrequencyTable::parse_tsv(&read(&p)?, &p)
    }

    /// The strained set as written by the last strain run.
    pub fn common_expressions(&self) -> Result<CommonExpressionSet> {
        self.require(Stage::Bag, Stage::Strain)?;
        let p = self.out(COMMON_EXPRESSIONS);
        let table = FrequencyTable::parse_tsv(&read(&p)?, &p)?;
        let cut_point = self
            .read_manifest(Stage::Strain)?
            .parameters
            .get("cut_point")
            .and_then(serde_json::Value::as_u64)
            .unwrap_or(self.config.parameters.cut_point as u64) as usize;
        Ok(CommonExpressionSet {
            biterms: table.iter().map(|(b, _)| b.clone()).collect(),
            cut_point,
        })
    }

    fn run_strain(&self) -> Result<Manifest> {
        self.require(Stage::Strain, Stage::Summarize)?;
        let c = self.config.parameters.cut_point;
        let occs = self.occurrences()?;
        let table = count_biterms(&occs);
        let set = strain(&table, c)?;
        write(&self.out(FREQUENCY), &table.to_tsv())?;
        write(&self.out(COMMON_EXPRESSIONS), &set.to_tsv(&table))?;
        self.finish(
            Stage::Strain,
            ManifestBuilder::new(Stage::Strain)
                .input(OCCURRENCES, &self.out(OCCURRENCES))?
                .param("cut_point", c)
                .count("unique_biterms", table.len())
                .count("biterm_occurrences", table.total_occurrences())
                .count("strained", set.len())
                .count("unstrained", table.len() - set.len()),
        )
    }

    /// Label sheet rows first, then the service journal; later rows win.
    pub fn labels(&self) -> Result<Vec<LabelRecord>> {
        let mut out = Vec::new();
        let mut found = false;
        if let Some(p) = &self.config.paths.labels {
            out.extend(import_labels_csv(p, "import")?);
            found = true;
        }
        let journal = self.config.journal_path();
        if journal.exists() {
            out.extend(LabelStore::open(&journal)?.history().iter().cloned());
            found = true;
        }
        if !found {
            return Err(Error::MissingStage {
                stage: "bag",
                required: "labels",
                command: "serve",
            });
        }
        Ok(out)
    }

    fn run_bag(&self) -> Result<Manifest> {
        self.require(Stage::Bag, Stage::Strain)?;
        let topics = self.config.topics()?;
        let strained = self.common_expressions()?;
        let all = self.labels()?;
        let (labels, stale): (Vec<LabelRecord>, Vec<LabelRecord>) =
            all.into_iter().partition(|r| strained.contains(&r.biterm));
        for r in &stale {
            log::warn!("label for `{}` ignored: not a common expression at C={}", r.biterm, strained.cut_point);
        }
        let bags = build_topic_bags(&labels, &topics)?;
        write(&self.out(BAGS), &bags_to_tsv(&bags))?;
        let mut b = ManifestBuilder::new(Stage::Bag).input(COMMON_EXPRESSIONS, &self.out(COMMON_EXPRESSIONS))?;
        if let Some(p) = &self.config.paths.labels {
            b = b.input("labels", p)?;
        }
        let journal = self.config.journal_path();
        if journal.exists() {
            b = b.input("journal", &journal)?;
        }
        if let Some(p) = &self.config.paths.topics {
            b = b.input("topics", p)?;
        }
        let labeled: usize = bags.iter().map(TopicBag::len).sum();
        let active = crate::bagger::active_decisions(&labels);
        self.finish(
            Stage::Bag,
            b.count("labels", labels.len())
                .count("ignored_labels", stale.len())
                .count("bagged", labeled)
                .count("discarded", active.len() - labeled)
                .count("unlabeled", strained.len() - active.len()),
        )
    }

    pub fn bags(&self, name: &str) -> Result<Vec<TopicBag>> {
        let p = self.out(name);
        parse_bags_tsv(&read(&p)?, &self.config.topics()?, &p)
    }

    fn run_upcycle(&self) -> Result<Manifest> {
        self.require(Stage::Upcycle, Stage::Bag)?;
        let params = self.config.parameters;
        let bags = self.bags(BAGS)?;
        let table = self.frequency()?;
        let strained = self.common_expressions()?;
        let mut unstrained = FrequencyTable::new();
        for (b, n) in table.iter().filter(|(b, _)| !strained.contains(b)) {
            unstrained.add(b.clone(), n);
        }
        let thesaurus = self.config.thesaurus()?;
        let outcome = upcycle(&unstrained, bags, &thesaurus, params.c1, params.c2, params.plan())?;
        write(&self.out(ASSIGNMENTS), &assignments_to_tsv(&outcome.assignments))?;
        write(&self.out(BAGS_UPCYCLED), &bags_to_tsv(&outcome.bags))?;
        let mut b = ManifestBuilder::new(Stage::Upcycle)
            .input(BAGS, &self.out(BAGS))?
            .input(FREQUENCY, &self.out(FREQUENCY))?
            .input("thesaurus", &self.config.paths.thesaurus)?;
        if let Some(p) = &self.config.paths.categories {
            b = b.input("categories", p)?;
        }
        let added = outcome.assignments.iter().filter(|a| a.added).count();
        let matched_occ: usize = outcome.assignments.iter().filter(|a| a.topic.is_some()).map(|a| a.count).sum();
        let mut b = b
            .param("c1", params.c1)
            .param("c2", params.c2)
            .param("mode", params.mode);
        if params.mode == ComparisonMode::Fractional {
            b = b.param("m", params.m).param("seed", params.seed);
        }
        self.finish(
            Stage::Upcycle,
            b.count("unstrained", outcome.assignments.len())
                .count("matched", outcome.matched())
                .count("unmatched", outcome.assignments.len() - outcome.matched())
                .count("matched_occurrences", matched_occ)
                .count("added_to_bags", added),
        )
    }

    fn run_score(&self) -> Result<Manifest> {
        self.require(Stage::Score, Stage::Upcycle)?;
        self.require(Stage::Score, Stage::Summarize)?;
        let topics = self.config.topics()?;
        let tau = self.config.parameters.tau;
        let bags = self.bags(BAGS_UPCYCLED)?;
        let ap = self.out(ASSIGNMENTS);
        let assignments = parse_assignments_tsv(&read(&ap)?, &ap)?;
        let lexicon = SentimentLexicon::load(&self.config.paths.lexicon)?;
        let occs = self.occurrences()?;
        let corpus = self.config.load_corpus()?;
        let scores = score_clauses(&occs, topic_lookup(&bags, &assignments), &lexicon);
        let rows = matrix_rows(&corpus, &scores, &topics, tau)?;
        write(&self.out(CLAUSE_SCORES), &clause_scores_to_tsv(&scores))?;
        write(&self.out(MATRIX), &matrix_to_csv(&rows, &topics))?;
        let mut b = ManifestBuilder::new(Stage::Score)
            .input(BAGS_UPCYCLED, &self.out(BAGS_UPCYCLED))?
            .input(ASSIGNMENTS, &ap)?
            .input(OCCURRENCES, &self.out(OCCURRENCES))?
            .input("lexicon", &self.config.paths.lexicon)?
            .input("corpus", &self.config.paths.corpus)?
            .param("tau", tau);
        if let Some(p) = &self.config.paths.topics {
            b = b.input("topics", p)?;
        }
        self.finish(
            Stage::Score,
            b.count("scored_clauses", scores.iter().filter(|s| s.scored).count())
                .count("topic_clauses", scores.len())
                .count("rows", rows.len()),
        )
    }

    /// Runs every stage in order and writes `run_report.json`.
    pub fn run_all(&self) -> Result<RunReport> {
        let mut manifests = BTreeMap::new();
        for stage in Stage::ALL {
            manifests.insert(stage, self.run_stage(stage)?);
        }
        let c = |s: Stage, k: &str| manifests[&s].counts.get(k).copied().unwrap_or(0);
        let report = RunReport {
            reviews: c(Stage::Disintegrate, "reviews"),
            clauses: c(Stage::Disintegrate, "clauses"),
            biterm_occurrences: c(Stage::Summarize, "biterm_occurrences"),
            unique_biterms: c(Stage::Summarize, "unique_biterms"),
            strained: c(Stage::Strain, "strained"),
            bagged: c(Stage::Bag, "bagged"),
            matched: c(Stage::Upcycle, "matched"),
            unmatched: c(Stage::Upcycle, "unmatched"),
            added_to_bags: c(Stage::Upcycle, "added_to_bags"),
            topic_clauses: c(Stage::Score, "topic_clauses"),
            rows: c(Stage::Score, "rows"),
        };
        let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        write(&self.out(RUN_REPORT), &text)?;
        Ok(report)
    }
}

/// One matrix row per review, in corpus order.
pub fn matrix_rows(
    corpus: &Corpus,
    scores: &[crate::score::ClauseScore],
    topics: &[Topic],
    tau: f64,
) -> Result<Vec<crate::score::TopicScoreRow>> {
    let mut by_review: BTreeMap<&str, Vec<crate::score::ClauseScore>> = BTreeMap::new();
    for s in scores {
        by_review.entry(s.review_id.as_str()).or_default().push(s.clone());
    }
    corpus
        .reviews()
        .par_iter()
        .map(|r| {
            let mine = by_review.get(r.id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
            aggregate(&r.id, mine, topics, tau)
        })
        .collect()
}

/// Funnel counts of a full run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub reviews: usize,
    pub clauses: usize,
    pub biterm_occurrences: usize,
    pub unique_biterms: usize,
    pub strained: usize,
    pub bagged: usize,
    /// Uncommon bi-terms given a topic.
    pub matched: usize,
    pub unmatched: usize,
    pub added_to_bags: usize,
    pub topic_clauses: usize,
    pub rows: usize,
}
