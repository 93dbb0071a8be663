//! POS tags and head-dependent word pairs for review sentences.
//!
//! Two sources are supported: externally parsed CoNLL-U files
//! ([`conllu::load_parsed`]) and a deterministic rule tagger with a
//! nearest-neighbour pairing heuristic ([`tagger`]). When a review has a
//! CoNLL-U parse the rule tagger is not consulted for it.

pub mod conllu;
pub mod tagger;

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::corpus::Token;

pub use conllu::{load_parsed, parse_conllu, ParsedCorpus};
pub use tagger::{derive_pairs, tag_tokens, Tagger};

/// `word1` depends on `word2`. Indices point into the token list the pair
/// was built against (a sentence, or a clause once rebased).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyPair {
    pub dependent: usize,
    pub head: usize,
    pub word1: Token,
    pub word2: Token,
    pub relation: Option<String>,
}

impl DependencyPair {
    pub fn new(tokens: &[Token], dependent: usize, head: usize, relation: Option<&str>) -> Self {
        DependencyPair {
            dependent,
            head,
            word1: tokens[dependent].clone(),
            word2: tokens[head].clone(),
            relation: relation.map(str::to_string),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParseSource {
    Conllu,
    RuleTagger,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedSentence {
    pub tokens: Vec<Token>,
    pub pairs: Vec<DependencyPair>,
    /// Byte span of each token in the review body, when known.
    pub offsets: Vec<Option<Range<usize>>>,
    pub source: ParseSource,
}

impl TaggedSentence {
    pub fn new(tokens: Vec<Token>, pairs: Vec<DependencyPair>, source: ParseSource) -> Self {
        let offsets = vec![None; tokens.len()];
        TaggedSentence {
            tokens,
            pairs,
            offsets,
            source,
        }
    }

    /// Pairs whose both ends fall inside `range`, re-indexed relative to
    /// the start of the range.
    pub fn pairs_within(&self, range: Range<usize>) -> Vec<DependencyPair> {
        self.pairs
            .iter()
            .filter(|p| range.contains(&p.dependent) && range.contains(&p.head))
            .map(|p| DependencyPair {
                dependent: p.dependent - range.start,
                head: p.head - range.start,
                ..p.clone()
            })
            .collect()
    }
}

/// Locate each sentence token in `body`, scanning left to right and
/// ignoring case. Tokens that cannot be found keep no offset.
pub fn align_offsets(body: &str, sentences: &mut [TaggedSentence]) {
    let lower = body.to_lowercase();
    // Lowercasing can change byte lengths for some scripts; only trust the
    // mapping when it does not.
    let usable = lower.len() == body.len();
    let mut cursor = 0;
    for sentence in sentences.iter_mut() {
        for (i, token) in sentence.tokens.iter().enumerate() {
            if !usable {
                sentence.offsets[i] = None;
                continue;
            }
            let needle = normalize_quotes(&token.surface.to_lowercase());
            let hay = &lower[cursor..];
            match find_normalized(hay, &needle) {
                Some((start, len)) => {
                    let s = cursor + start;
                    sentence.offsets[i] = Some(s..s + len);
                    cursor = s + len;
                }
                None => sentence.offsets[i] = None,
            }
        }
    }
}

fn normalize_quotes(s: &str) -> String {
    s.replace('\u{2019}', "'")
}

fn find_normalized(hay: &str, needle: &str) -> Option<(usize, usize)> {
    if needle.is_empty() {
        return None;
    }
    if let Some(p) = hay.find(needle) {
        return Some((p, needle.len()));
    }
    let swapped = needle.replace('\'', "\u{2019}");
    hay.find(&swapped).map(|p| (p, swapped.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PosTag;

    #[test]
    fn pairs_within_rebases() {
        let tokens: Vec<Token> = ["a", "b", "c", "d"]
            .iter()
            .map(|s| Token::new(*s, PosTag::NN))
            .collect();
        let pairs = vec![
            DependencyPair::new(&tokens, 0, 1, None),
            DependencyPair::new(&tokens, 2, 3, None),
            DependencyPair::new(&tokens, 1, 2, None),
        ];
        let s = TaggedSentence::new(tokens, pairs, ParseSource::Conllu);
        let inner = s.pairs_within(2..4);
        assert_eq!(inner.len(), 1);
        assert_eq!((inner[0].dependent, inner[0].head), (0, 1));
        assert_eq!(inner[0].word1.surface, "c");
    }

    #[test]
    fn offsets_follow_body() {
        let tokens = vec![
            Token::new("do", PosTag::VB),
            Token::new("n't", PosTag::RB),
            Token::new("go", PosTag::VB),
        ];
        let mut s = vec![TaggedSentence::new(tokens, vec![], ParseSource::Conllu)];
        align_offsets("Don't go", &mut s);
        assert_eq!(s[0].offsets, vec![Some(0..2), Some(2..5), Some(6..8)]);
    }
}
