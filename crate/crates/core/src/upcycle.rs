//! Topic assignment for uncommon bi-terms by similarity to the topic bags.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bagger::{Provenance, TopicBag};
use crate::corpus::{Topic, TopicId};
use crate::error::{Error, Result};
use crate::strain::FrequencyTable;
use crate::summarize::BiTerm;

pub const UNASSIGNED: &str = "UNASSIGNED";
pub const ASSIGNMENT_HEADER: &str = "biterm_key\ttopic\tscore\tadded_to_bag";

/// Synonym and category lookups over stems. Entries are used as written;
/// they are not re-stemmed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Thesaurus {
    synonyms: BTreeMap<String, BTreeSet<String>>,
    categories: BTreeMap<String, BTreeSet<String>>,
}

fn parse_lists(text: &str, path: &Path) -> Result<Vec<(String, Vec<String>)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (head, rest) = line
            .split_once('\t')
            .ok_or_else(|| Error::format(path, i + 1, "expected `stem<TAB>a,b,...`"))?;
        let head = head.trim().to_lowercase();
        if head.is_empty() {
            return Err(Error::format(path, i + 1, "empty stem"));
        }
        let items = rest
            .split(',')
            .map(|s| s.trim().to_lowercase())
            .filter(|s| !s.is_empty())
            .collect();
        out.push((head, items));
    }
    Ok(out)
}

impl Thesaurus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_synonyms(&mut self, stem: &str, others: &[&str]) {
        for o in others {
            if *o == stem {
                continue;
            }
            self.synonyms.entry(stem.to_string()).or_default().insert(o.to_string());
            self.synonyms.entry(o.to_string()).or_default().insert(stem.to_string());
        }
    }

    pub fn add_categories(&mut self, stem: &str, cats: &[&str]) {
        let e = self.categories.entry(stem.to_string()).or_default();
        e.extend(cats.iter().map(|c| c.to_string()));
    }

    pub fn parse(synonyms: &str, categories: Option<&str>, path: &Path) -> Result<Thesaurus> {
        let mut t = Thesaurus::new();
        for (head, items) in parse_lists(synonyms, path)? {
            let refs: Vec<&str> = items.iter().map(String::as_str).collect();
            t.add_synonyms(&head, &refs);
        }
        if let Some(c) = categories {
            for (head, items) in parse_lists(c, path)? {
                let refs: Vec<&str> = items.iter().map(String::as_str).collect();
                t.add_categories(&head, &refs);
            }
        }
        Ok(t)
    }

    pub fn load(synonyms: &Path, categories: Option<&Path>) -> Result<Thesaurus> {
        let syn = fs::read_to_string(synonyms).map_err(|e| Error::io(synonyms, e))?;
        let mut t = Thesaurus::parse(&syn, None, synonyms)?;
        if let Some(p) = categories {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            for (head, items) in parse_lists(&text, p)? {
                let refs: Vec<&str> = items.iter().map(String::as_str).collect();
                t.add_categories(&head, &refs);
            }
        }
        Ok(t)
    }

    pub fn synonyms(&self, stem: &str) -> impl Iterator<Item = &str> {
        self.synonyms.get(stem).into_iter().flatten().map(String::as_str)
    }

    pub fn categories(&self, stem: &str) -> impl Iterator<Item = &str> {
        self.categories.get(stem).into_iter().flatten().map(String::as_str)
    }

    fn is_synonym(&self, x: &str, y: &str) -> bool {
        self.synonyms.get(x).is_some_and(|s| s.contains(y))
    }

    fn share_category(&self, x: &str, y: &str) -> bool {
        match (self.categories.get(x), self.categories.get(y)) {
            (Some(a), Some(b)) => !a.is_disjoint(b),
            _ => false,
        }
    }
}

/// 0 when the stems are equal, synonyms, or share a category; 1 otherwise.
pub fn semantic_distance(x: &str, y: &str, thesaurus: &Thesaurus) -> u8 {
    if x == y || thesaurus.is_synonym(x, y) || thesaurus.share_category(x, y) {
        0
    } else {
        1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComparisonMode {
    Full,
    Fractional,
}

impl FromStr for ComparisonMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(ComparisonMode::Full),
            "fractional" => Ok(ComparisonMode::Fractional),
            other => Err(Error::Parameter(format!("mode must be `full` or `fractional`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComparisonPlan {
    pub mode: ComparisonMode,
    pub m: usize,
    pub seed: u64,
}

impl ComparisonPlan {
    pub fn full() -> Self {
        ComparisonPlan {
            mode: ComparisonMode::Full,
            m: 0,
            seed: 0,
        }
    }

    pub fn fractional(m: usize, seed: u64) -> Self {
        ComparisonPlan {
            mode: ComparisonMode::Fractional,
            m,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityScore {
    pub topic: TopicId,
    pub value: f64,
}

/// `w_k` times the number of sampled members whose object stem is at
/// distance 0 from the bi-term's object stem.
pub fn similarity_score<'a>(
    biterm: &BiTerm,
    topic: &Topic,
    sample: impl IntoIterator<Item = &'a BiTerm>,
    thesaurus: &Thesaurus,
) -> SimilarityScore {
    let hits = sample
        .into_iter()
        .filter(|m| semantic_distance(&biterm.object_stem, &m.object_stem, thesaurus) == 0)
        .count();
    SimilarityScore {
        topic: topic.id.clone(),
        value: topic.weight * hits as f64,
    }
}

/// Score against every member of the bag.
pub fn full_score(biterm: &BiTerm, bag: &TopicBag, thesaurus: &Thesaurus) -> SimilarityScore {
    similarity_score(biterm, &bag.topic, bag.biterms(), thesaurus)
}

/// Strict argmax. A zero maximum or a tie at the maximum gives `None`.
pub fn assign_topic(scores: &[SimilarityScore]) -> Option<TopicId> {
    let max = scores.iter().map(|s| s.value).fold(0.0_f64, f64::max);
    if max <= 0.0 {
        return None;
    }
    let mut winners = scores.iter().filter(|s| s.value == max);
    let first = winners.next()?;
    if winners.next().is_some() {
        return None;
    }
    Some(first.topic.clone())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    /// Largest-remainder seats before the minimum and cap adjustments.
    pub apportioned: Vec<usize>,
    /// Seats after every non-empty bag got one and caps were applied.
    pub seats: Vec<usize>,
}

/// Splits `m` comparisons across bags in proportion to their sizes.
pub fn allocate_fractional(m: usize, sizes: &[usize]) -> Result<Allocation> {
    let nonempty = sizes.iter().filter(|n| **n > 0).count();
    if m < nonempty {
        return Err(Error::Parameter(format!(
            "comparison size M={m} is smaller than the {nonempty} non-empty bags"
        )));
    }
    let total: usize = sizes.iter().sum();
    if total == 0 {
        let zeros = vec![0; sizes.len()];
        return Ok(Allocation {
            apportioned: zeros.clone(),
            seats: zeros,
        });
    }
    let (m128, total128) = (m as u128, total as u128);
    let mut seats: Vec<usize> = sizes.iter().map(|n| (m128 * *n as u128 / total128) as usize).collect();
    let remainders: Vec<u128> = sizes.iter().map(|n| m128 * *n as u128 % total128).collect();
    let leftover = m - seats.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..sizes.len()).filter(|k| remainders[*k] > 0).collect();
    order.sort_by(|a, b| {
        remainders[*b]
            .cmp(&remainders[*a])
            .then(sizes[*b].cmp(&sizes[*a]))
            .then(a.cmp(b))
    });
    for k in order.into_iter().take(leftover) {
        seats[k] += 1;
    }
    let apportioned = seats.clone();

    // Surplus of bag k over its exact quota, scaled by the total size.
    let surplus = |seats: &[usize], k: usize| seats[k] as i128 * total as i128 - (m128 * sizes[k] as u128) as i128;
    for k in 0..sizes.len() {
        if sizes[k] > 0 && seats[k] == 0 {
            let donor = (0..sizes.len())
                .filter(|d| seats[*d] >= 2)
                .max_by(|a, b| {
                    surplus(&seats, *a)
                        .cmp(&surplus(&seats, *b))
                        .then(seats[*a].cmp(&seats[*b]))
                        .then(b.cmp(a))
                })
                .expect("m covers every non-empty bag");
            seats[donor] -= 1;
            seats[k] = 1;
        }
    }
    for (s, n) in seats.iter_mut().zip(sizes) {
        *s = (*s).min(*n);
    }
    Ok(Allocation { apportioned, seats })
}

/// Draws `seats[k]` members of bag k uniformly without replacement.
pub fn sample_members<'a>(bags: &'a [TopicBag], seats: &[usize], rng: &mut ChaCha8Rng) -> Vec<Vec<&'a BiTerm>> {
    bags.iter()
        .zip(seats)
        .map(|(bag, k)| {
            let members: Vec<&BiTerm> = bag.biterms().collect();
            members.choose_multiple(rng, *k).copied().collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub biterm: BiTerm,
    pub count: usize,
    pub topic: Option<TopicId>,
    /// Winning score, or the highest score when unassigned.
    pub score: f64,
    pub added: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpcycleOutcome {
    pub bags: Vec<TopicBag>,
    pub assignments: Vec<Assignment>,
}

impl UpcycleOutcome {
    pub fn assignment(&self, biterm: &BiTerm) -> Option<&Assignment> {
        self.assignments.iter().find(|a| &a.biterm == biterm)
    }

    pub fn matched(&self) -> usize {
        self.assignments.iter().filter(|a| a.topic.is_some()).count()
    }
}

pub fn check_gates(c1: f64, c2: i64) -> Result<usize> {
    if !(c1 > 0.0 && c1.is_finite()) {
        return Err(Error::Parameter(format!("C1 must be positive, got {c1}")));
    }
    if c2 < 1 {
        return Err(Error::Parameter(format!("C2 must be at least 1, got {c2}")));
    }
    Ok(c2 as usize)
}

/// Single pass over the uncommon bi-terms, count-descending then by key.
/// Every bi-term gets a topic or none; it joins the winning bag only when
/// its score reaches `c1` and its count reaches `c2`, and later bi-terms
/// are scored against the grown bags.
pub fn upcycle(
    unstrained: &FrequencyTable,
    bags: Vec<TopicBag>,
    thesaurus: &Thesaurus,
    c1: f64,
    c2: i64,
    plan: ComparisonPlan,
) -> Result<UpcycleOutcome> {
    let c2 = check_gates(c1, c2)?;
    let mut bags = bags;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    if plan.mode == ComparisonMode::Fractional {
        let sizes: Vec<usize> = bags.iter().map(TopicBag::len).collect();
        allocate_fractional(plan.m, &sizes)?;
    }
    let mut assignments = Vec::new();
    for (biterm, count) in unstrained.ranked() {
        if bags.iter().any(|b| b.contains(biterm)) {
            continue;
        }
        let scores: Vec<SimilarityScore> = match plan.mode {
            ComparisonMode::Full => bags.iter().map(|b| full_score(biterm, b, thesaurus)).collect(),
            ComparisonMode::Fractional => {
                let sizes: Vec<usize> = bags.iter().map(TopicBag::len).collect();
                let alloc = allocate_fractional(plan.m, &sizes)?;
                let samples = sample_members(&bags, &alloc.seats, &mut rng);
                bags.iter()
                    .zip(samples)
                    .map(|(b, s)| similarity_score(biterm, &b.topic, s, thesaurus))
                    .collect()
            }
        };
        let best = scores.iter().map(|s| s.value).fold(0.0_f64, f64::max);
        let topic = assign_topic(&scores);
        let added = topic.is_some() && best >= c1 && count >= c2;
        if added {
            let t = topic.as_ref().expect("checked");
            let bag = bags.iter_mut().find(|b| &b.topic.id == t).expect("scored bag");
            bag.members.insert(biterm.clone(), Provenance::Upcycled);
        }
        assignments.push(Assignment {
            biterm: biterm.clone(),
            count,
            topic,
            score: best,
            added,
        });
    }
    Ok(UpcycleOutcome { bags, assignments })
}

pub fn assignments_to_tsv(assignments: &[Assignment]) -> String {
    let mut out = String::from(ASSIGNMENT_HEADER);
    out.push('\n');
    for a in assignments {
        let topic = a.topic.as_ref().map_or(UNASSIGNED, TopicId::as_str);
        let _ = writeln!(out, "{}\t{}\t{:.4}\t{}", a.biterm.key(), topic, a.score, a.added);
    }
    out
}

/// Reads the topic column back as a map; unassigned rows are omitted.
pub fn parse_assignments_tsv(text: &str, path: &Path) -> Result<BTreeMap<BiTerm, TopicId>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(Error::format(path, i + 1, "expected 4 columns"));
        }
        let b: BiTerm = cols[0].parse().map_err(|e: Error| Error::format(path, i + 1, e.to_string()))?;
        if cols[1] != UNASSIGNED {
            out.insert(b, TopicId::new(cols[1]));
        }
    }
    Ok(out)
}
