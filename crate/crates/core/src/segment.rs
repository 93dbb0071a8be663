//! Rule-based clause segmentation.
//!
//! Punctuation marks and conjunctions are enumerated as boundary candidates
//! and each candidate is tested as a clause identifier:
//!
//! * `.`, `;`, `!`, `?` always separate clauses (decimal points and
//!   abbreviation periods are never candidates).
//! * A comma does not separate clauses when its nearest word neighbours
//!   share a POS tag (a list), when it directly precedes a separating
//!   conjunction, or when either side of it within the sentence lacks a
//!   verb.
//! * A coordinating conjunction separates clauses when each side holds a
//!   noun or verb; a subordinating one only when each side holds both a
//!   noun and a verb.
//!
//! Sides are measured within the sentence, i.e. between the surrounding
//! always-separating marks. Punctuation identifiers stay with the clause on
//! their left. Conjunction identifiers are dropped, except when directly
//! followed by punctuation (`but, ...`), in which case they open the next
//! clause.

use serde::{Deserialize, Serialize};

use crate::corpus::{Clause, PosTag, Review, Token};
use crate::lists::WordList;
use crate::parse::TaggedSentence;
use crate::summarize::detect_negation;

const SUBORDINATORS: &[&str] = &[
    "because", "before", "after", "when", "while", "although", "though", "since", "unless",
    "until", "if", "once", "whereas", "whenever",
];

#[derive(Debug, Clone)]
pub struct SegmenterConfig {
    pub conjunctions: WordList,
    pub abbreviations: WordList,
    /// Used to fill [`Clause::negated`].
    pub negations: WordList,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        SegmenterConfig {
            conjunctions: WordList::conjunctions(),
            abbreviations: WordList::abbreviations(),
            negations: WordList::negations(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryKind {
    Punct,
    Conjunction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryCandidate {
    pub position: usize,
    pub kind: BoundaryKind,
    pub surface: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    Terminal,
    Comma,
}

fn punct_mark(surface: &str) -> Option<Mark> {
    if surface == "," {
        return Some(Mark::Comma);
    }
    if !surface.is_empty() && surface.chars().all(|c| matches!(c, '.' | '!' | '?' | ';' | '\u{2026}')) {
        return Some(Mark::Terminal);
    }
    None
}

fn lower(t: &Token) -> String {
    t.surface.to_lowercase().replace('\u{2019}', "'")
}

fn is_digits(t: &Token) -> bool {
    !t.surface.is_empty() && t.surface.chars().all(|c| c.is_ascii_digit())
}

fn is_excluded_period(tokens: &[Token], i: usize, config: &SegmenterConfig) -> bool {
    if tokens[i].surface != "." || i == 0 {
        return false;
    }
    let prev = &tokens[i - 1];
    if is_digits(prev) && tokens.get(i + 1).map(is_digits).unwrap_or(false) {
        return true;
    }
    config.abbreviations.contains(&format!("{}.", lower(prev)))
}

/// Every punctuation mark and listed conjunction that could separate
/// clauses, in position order.
pub fn find_boundary_candidates(tokens: &[Token], config: &SegmenterConfig) -> Vec<BoundaryCandidate> {
    tokens
        .iter()
        .enumerate()
        .filter_map(|(i, t)| {
            let kind = if t.pos == PosTag::PUNCT || punct_mark(&t.surface).is_some() {
                punct_mark(&t.surface)?;
                if is_excluded_period(tokens, i, config) {
                    return None;
                }
                BoundaryKind::Punct
            } else if config.conjunctions.contains(&lower(t)) {
                BoundaryKind::Conjunction
            } else {
                return None;
            };
            Some(BoundaryCandidate {
                position: i,
                kind,
                surface: t.surface.clone(),
            })
        })
        .collect()
}

fn is_hard_boundary(tokens: &[Token], i: usize, config: &SegmenterConfig) -> bool {
    punct_mark(&tokens[i].surface) == Some(Mark::Terminal) && !is_excluded_period(tokens, i, config)
}

/// Token ranges on each side of `pos`, bounded by the surrounding
/// always-separating marks.
fn sides(tokens: &[Token], pos: usize, config: &SegmenterConfig) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
    let start = (0..pos)
        .rev()
        .find(|&j| is_hard_boundary(tokens, j, config))
        .map(|j| j + 1)
        .unwrap_or(0);
    let end = (pos + 1..tokens.len())
        .find(|&j| is_hard_boundary(tokens, j, config))
        .unwrap_or(tokens.len());
    (start..pos, pos + 1..end)
}

fn has_tag(tokens: &[Token], range: std::ops::Range<usize>, tag: PosTag) -> bool {
    tokens[range].iter().any(|t| t.pos == tag)
}

fn has_content(tokens: &[Token], range: std::ops::Range<usize>) -> bool {
    tokens[range].iter().any(|t| matches!(t.pos, PosTag::NN | PosTag::VB))
}

fn is_word(t: &Token, config: &SegmenterConfig) -> bool {
    t.pos != PosTag::PUNCT && punct_mark(&t.surface).is_none() && !config.conjunctions.contains(&lower(t))
}

fn conjunction_is_identifier(tokens: &[Token], pos: usize, config: &SegmenterConfig) -> bool {
    let t = &tokens[pos];
    if !matches!(t.pos, PosTag::CC | PosTag::IN) {
        return false;
    }
    let (left, right) = sides(tokens, pos, config);
    if SUBORDINATORS.contains(&lower(t).as_str()) {
        has_tag(tokens, left.clone(), PosTag::NN)
            && has_tag(tokens, left, PosTag::VB)
            && has_tag(tokens, right.clone(), PosTag::NN)
            && has_tag(tokens, right, PosTag::VB)
    } else {
        has_content(tokens, left) && has_content(tokens, right)
    }
}

fn comma_is_identifier(tokens: &[Token], pos: usize, config: &SegmenterConfig) -> bool {
    let left = (0..pos).rev().find(|&j| is_word(&tokens[j], config));
    let right = (pos + 1..tokens.len()).find(|&j| is_word(&tokens[j], config));
    let (Some(l), Some(r)) = (left, right) else {
        return false;
    };
    if tokens[l].pos == tokens[r].pos {
        return false;
    }
    let next = (pos + 1..tokens.len()).find(|&j| tokens[j].pos != PosTag::PUNCT);
    if let Some(n) = next {
        if config.conjunctions.contains(&lower(&tokens[n])) && conjunction_is_identifier(tokens, n, config) {
            return false;
        }
    }
    let (ls, rs) = sides(tokens, pos, config);
    has_tag(tokens, ls, PosTag::VB) && has_tag(tokens, rs, PosTag::VB)
}

pub fn is_clause_identifier(candidate: &BoundaryCandidate, tokens: &[Token], config: &SegmenterConfig) -> bool {
    match candidate.kind {
        BoundaryKind::Conjunction => conjunction_is_identifier(tokens, candidate.position, config),
        BoundaryKind::Punct => match punct_mark(&candidate.surface) {
            Some(Mark::Terminal) => true,
            Some(Mark::Comma) => comma_is_identifier(tokens, candidate.position, config),
            None => false,
        },
    }
}

/// Clauses plus the identifier tokens that were dropped, as
/// `(sentence, token)` positions.
#[derive(Debug, Clone, Default)]
pub struct Segmentation {
    pub clauses: Vec<Clause>,
    pub dropped: Vec<(usize, usize)>,
}

pub fn segment(review: &Review, sentences: &[TaggedSentence], config: &SegmenterConfig) -> Vec<Clause> {
    segment_detailed(review, sentences, config).clauses
}

pub fn segment_detailed(review: &Review, sentences: &[TaggedSentence], config: &SegmenterConfig) -> Segmentation {
    let mut out = Segmentation::default();
    for (s_idx, sentence) in sentences.iter().enumerate() {
        let tokens = &sentence.tokens;
        let identifiers: Vec<BoundaryCandidate> = find_boundary_candidates(tokens, config)
            .into_iter()
            .filter(|c| is_clause_identifier(c, tokens, config))
            .collect();
        let mut runs: Vec<Vec<usize>> = Vec::new();
        let mut current: Vec<usize> = Vec::new();
        let mut next_id = identifiers.iter().peekable();
        for i in 0..tokens.len() {
            let is_id = next_id.peek().map(|c| c.position == i).unwrap_or(false);
            if !is_id {
                current.push(i);
                continue;
            }
            let cand = next_id.next().unwrap();
            match cand.kind {
                BoundaryKind::Punct => {
                    current.push(i);
                    runs.push(std::mem::take(&mut current));
                }
                BoundaryKind::Conjunction => {
                    if !current.is_empty() {
                        runs.push(std::mem::take(&mut current));
                    }
                    let followed_by_punct = tokens.get(i + 1).map(|t| t.pos == PosTag::PUNCT).unwrap_or(false);
                    if followed_by_punct {
                        current.push(i);
                    } else {
                        out.dropped.push((s_idx, i));
                    }
                }
            }
        }
        if !current.is_empty() {
            runs.push(current);
        }

        // Punctuation-only runs join the clause they follow, or are dropped
        // at the start of a sentence.
        let mut merged: Vec<Vec<usize>> = Vec::new();
        for run in runs {
            let only_punct = run.iter().all(|&i| tokens[i].pos == PosTag::PUNCT);
            if only_punct {
                match merged.last_mut() {
                    Some(prev) if prev.last().map(|&p| p + 1) == run.first().copied() => prev.extend(run),
                    _ => out.dropped.extend(run.into_iter().map(|i| (s_idx, i))),
                }
            } else {
                merged.push(run);
            }
        }

        for run in merged {
            let (first, last) = (run[0], *run.last().unwrap());
            let clause_tokens: Vec<Token> = run.iter().map(|&i| tokens[i].clone()).collect();
            let text = match (
                sentence.offsets.get(first).cloned().flatten(),
                sentence.offsets.get(last).cloned().flatten(),
            ) {
                (Some(a), Some(b)) if a.start <= b.end && b.end <= review.body.len() => review.body[a.start..b.end].to_string(),
                _ => clause_tokens.iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" "),
            };
            let mut clause = Clause {
                review_id: review.id.clone(),
                index: out.clauses.len(),
                tokens: clause_tokens,
                text,
                negated: false,
                sentence: s_idx,
                start: first,
            };
            clause.negated = detect_negation(&clause, &config.negations);
            out.clauses.push(clause);
        }
    }
    out
}

/// Collapse runs of whitespace to single spaces and trim.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::Tagger;

    fn cfg() -> SegmenterConfig {
        SegmenterConfig::default()
    }

    fn clauses_of(body: &str) -> Vec<String> {
        let review = Review::new("r", body);
        let sentence = Tagger::shared().parse_body(body);
        segment(&review, &[sentence], &cfg()).into_iter().map(|c| c.text).collect()
    }

    fn candidate_surfaces(text: &str) -> Vec<String> {
        let tokens = Tagger::shared().tag(text);
        find_boundary_candidates(&tokens, &cfg()).into_iter().map(|c| c.surface).collect()
    }

    fn identifier_at(text: &str, surface: &str, nth: usize) -> bool {
        let tokens = Tagger::shared().tag(text);
        let c = find_boundary_candidates(&tokens, &cfg())
            .into_iter()
            .filter(|c| c.surface == surface)
            .nth(nth)
            .expect("candidate");
        is_clause_identifier(&c, &tokens, &cfg())
    }

    #[test]
    fn candidates_in_example() {
        assert_eq!(candidate_surfaces("great taste, simple dish. never tried poke before."), vec![",", ".", "before", "."]);
        assert!(candidate_surfaces("I paid 3.50 dollars").is_empty());
        assert_eq!(candidate_surfaces("food was good but staff was rude"), vec!["but"]);
        assert!(candidate_surfaces("we met dr. smith and e.g. his wife").iter().all(|s| s != "."));
    }

    #[test]
    fn list_commas_are_not_identifiers() {
        let s = "wow the food was simple, fresh, and delicious";
        assert!(!identifier_at(s, ",", 0));
        assert!(!identifier_at(s, ",", 1));
        let s = "I like to eat eggs, bacon, and pancake as breakfast";
        assert!(!identifier_at(s, ",", 0));
        assert!(!identifier_at(s, ",", 1));
    }

    #[test]
    fn but_between_content_words() {
        assert!(identifier_at("well worth it but plan on going", "but", 0));
    }

    #[test]
    fn single_clause_is_identity() {
        let review = Review::new("r", "the food was amazing");
        let sentence = Tagger::shared().parse_body(&review.body);
        let clauses = segment(&review, std::slice::from_ref(&sentence), &cfg());
        assert_eq!(clauses.len(), 1);
        assert_eq!(clauses[0].tokens, sentence.tokens);
        assert_eq!(clauses[0].text, "the food was amazing");
    }

    #[test]
    fn coordinated_clauses_drop_the_conjunction() {
        assert_eq!(
            clauses_of("The food was amazing and the service was great"),
            vec!["The food was amazing", "the service was great"]
        );
    }

    #[test]
    fn fronted_subordinate_clause() {
        // "I" and "dinner" are both nouns to the tagger, so the comma reads
        // as a list comma and the sentence stays whole.
        assert_eq!(clauses_of("Before I ate dinner, I took a bus tour"), vec!["Before I ate dinner, I took a bus tour"]);
        assert_eq!(
            clauses_of("the food was cold because the kitchen was slow"),
            vec!["the food was cold", "the kitchen was slow"]
        );
    }

    #[test]
    fn consecutive_identifiers_leave_no_empty_clause() {
        assert_eq!(clauses_of("wow. . great food."), vec!["wow. .", "great food."]);
        assert_eq!(clauses_of(". wow."), vec!["wow."]);
    }

    #[test]
    fn abbreviation_period_does_not_split() {
        assert_eq!(clauses_of("we met dr. smith at the bar. great food."), vec!["we met dr. smith at the bar.", "great food."]);
    }

    #[test]
    fn indices_are_consecutive() {
        let review = Review::new("r", "great taste. wow. the food was good but the staff was rude.");
        let sentence = Tagger::shared().parse_body(&review.body);
        let clauses = segment(&review, &[sentence], &cfg());
        for (i, c) in clauses.iter().enumerate() {
            assert_eq!(c.index, i);
            assert!(!c.tokens.is_empty());
        }
        assert_eq!(clauses.len(), 4);
    }
}
