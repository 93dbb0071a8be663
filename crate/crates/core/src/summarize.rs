//! Clause compression into (object word, evaluation word) bi-terms.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Clause, PosTag};
use crate::error::Error;
use crate::lists::WordList;
use crate::parse::DependencyPair;

pub use crate::stem::stem;

/// A stemmed (object, evaluation) pair. The POS pair is always one of
/// (NN,ADJ), (NN,VB), (NN,RB), (VB,ADJ), (VB,RB).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BiTerm {
    pub object_stem: String,
    pub object_pos: PosTag,
    pub evaluation_stem: String,
    pub evaluation_pos: PosTag,
}

pub fn is_valid_combination(object: PosTag, evaluation: PosTag) -> bool {
    use PosTag::*;
    matches!(
        (object, evaluation),
        (NN, ADJ) | (NN, VB) | (NN, RB) | (VB, ADJ) | (VB, RB)
    )
}

impl BiTerm {
    pub fn new(
        object_stem: impl Into<String>,
        object_pos: PosTag,
        evaluation_stem: impl Into<String>,
        evaluation_pos: PosTag,
    ) -> Result<BiTerm, Error> {
        if !is_valid_combination(object_pos, evaluation_pos) {
            return Err(Error::Validation(format!(
                "({object_pos},{evaluation_pos}) is not a bi-term combination"
            )));
        }
        let (o, e) = (object_stem.into().to_lowercase(), evaluation_stem.into().to_lowercase());
        if o.is_empty() || e.is_empty() || o.contains(':') || e.contains(':') {
            return Err(Error::Validation(format!("bad bi-term stems `{o}`/`{e}`")));
        }
        Ok(BiTerm {
            object_stem: o,
            object_pos,
            evaluation_stem: e,
            evaluation_pos,
        })
    }

    /// `object:POS:evaluation:POS`, used in URLs and exports.
    pub fn key(&self) -> String {
        self.to_string()
    }

    fn sort_key(&self) -> (&str, &str, &str, &str) {
        (
            &self.object_stem,
            self.object_pos.as_str(),
            &self.evaluation_stem,
            self.evaluation_pos.as_str(),
        )
    }
}

impl Ord for BiTerm {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for BiTerm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BiTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}:{}",
            self.object_stem, self.object_pos, self.evaluation_stem, self.evaluation_pos
        )
    }
}

impl FromStr for BiTerm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Validation(format!("bad bi-term key `{s}`"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let op = PosTag::parse(parts[1]).ok_or_else(bad)?;
        let ep = PosTag::parse(parts[3]).ok_or_else(bad)?;
        BiTerm::new(parts[0], op, parts[2], ep)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiTermOccurrence {
    pub biterm: BiTerm,
    pub review_id: String,
    pub clause_index: usize,
    pub negated: bool,
}

fn normalize_apostrophes(s: &str) -> String {
    s.to_lowercase().replace(['\u{2019}', '\u{2018}'], "'")
}

/// True iff some token of the clause is a negation word. A split-off
/// `n't` counts as `not`.
pub fn detect_negation(clause: &Clause, negations: &WordList) -> bool {
    clause.tokens.iter().any(|t| {
        let w = normalize_apostrophes(&t.surface);
        negations.contains(&w) || (w == "n't" && negations.contains("not"))
    })
}

/// Keep the dependency pairs whose tags form one of the five bi-term
/// combinations. The noun or verb becomes the object word; in a (VB,NN)
/// pair the noun is the object. Duplicates within the clause collapse.
pub fn extract_biterms(clause: &Clause, pairs: &[DependencyPair]) -> Vec<BiTermOccurrence> {
    let mut out: Vec<BiTermOccurrence> = Vec::new();
    for pair in pairs {
        let (a, b) = (&pair.word1, &pair.word2);
        let oriented = if is_valid_combination(a.pos, b.pos) {
            Some((a, b))
        } else if is_valid_combination(b.pos, a.pos) {
            Some((b, a))
        } else {
            None
        };
        let Some((object, evaluation)) = oriented else { continue };
        let Ok(biterm) = BiTerm::new(&object.stem, object.pos, &evaluation.stem, evaluation.pos) else {
            continue;
        };
        if out.iter().any(|o| o.biterm == biterm) {
            continue;
        }
        out.push(BiTermOccurrence {
            biterm,
            review_id: clause.review_id.clone(),
            clause_index: clause.index,
            negated: clause.negated,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Token;
    use crate::parse::{derive_pairs, tag_tokens};

    fn clause(text: &str, tokens: Vec<Token>) -> Clause {
        Clause {
            review_id: "r".into(),
            index: 0,
            tokens,
            text: text.into(),
            negated: false,
            sentence: 0,
            start: 0,
        }
    }

    fn bt(o: &str, op: PosTag, e: &str, ep: PosTag) -> BiTerm {
        BiTerm::new(o, op, e, ep).unwrap()
    }

    #[test]
    fn great_taste_simple_dish_with_parser_pairs() {
        use PosTag::*;
        let tokens: Vec<Token> = [
            ("great", ADJ),
            ("taste", NN),
            (",", PUNCT),
            ("simple", ADJ),
            ("dish", NN),
            (".", PUNCT),
        ]
        .iter()
        .map(|(s, p)| Token::new(*s, *p))
        .collect();
        let pairs = vec![
            DependencyPair::new(&tokens, 0, 1, Some("amod")),
            DependencyPair::new(&tokens, 2, 1, Some("punct")),
            DependencyPair::new(&tokens, 4, 1, Some("appos")),
            DependencyPair::new(&tokens, 3, 4, Some("amod")),
            DependencyPair::new(&tokens, 5, 1, Some("punct")),
        ];
        let c = clause("great taste, simple dish.", tokens);
        let got: Vec<BiTerm> = extract_biterms(&c, &pairs).into_iter().map(|o| o.biterm).collect();
        assert_eq!(got, vec![bt("tast", NN, "great", ADJ), bt("dish", NN, "simpl", ADJ)]);
    }

    #[test]
    fn food_was_very_good() {
        let tokens = tag_tokens("the food was very good");
        let pairs = derive_pairs(&tokens);
        let c = clause("the food was very good", tokens);
        let got: Vec<BiTerm> = extract_biterms(&c, &pairs).into_iter().map(|o| o.biterm).collect();
        assert_eq!(got, vec![bt("food", PosTag::NN, "good", PosTag::ADJ)]);
    }

    #[test]
    fn interjection_gives_nothing() {
        let tokens = tag_tokens("wow.");
        let pairs = derive_pairs(&tokens);
        assert!(extract_biterms(&clause("wow.", tokens), &pairs).is_empty());
    }

    #[test]
    fn verb_noun_pair_puts_noun_first() {
        let tokens = vec![Token::new("beef", PosTag::NN), Token::new("ordered", PosTag::VB)];
        let pairs = vec![DependencyPair::new(&tokens, 1, 0, None)];
        let got = extract_biterms(&clause("beef ordered", tokens), &pairs);
        assert_eq!(got[0].biterm, bt("beef", PosTag::NN, "order", PosTag::VB));
    }

    #[test]
    fn duplicates_collapse_and_vb_vb_excluded() {
        let tokens = vec![
            Token::new("good", PosTag::ADJ),
            Token::new("food", PosTag::NN),
            Token::new("go", PosTag::VB),
            Token::new("eat", PosTag::VB),
        ];
        let pairs = vec![
            DependencyPair::new(&tokens, 0, 1, None),
            DependencyPair::new(&tokens, 1, 0, None),
            DependencyPair::new(&tokens, 2, 3, None),
        ];
        assert_eq!(extract_biterms(&clause("x", tokens), &pairs).len(), 1);
    }

    #[test]
    fn negation_detection() {
        let neg = WordList::negations();
        let c = |s: &str| clause(s, tag_tokens(s));
        assert!(detect_negation(&c("i do not like the food here"), &neg));
        assert!(!detect_negation(&c("i like the food here"), &neg));
        assert!(detect_negation(&c("never tried poke before"), &neg));
        assert!(detect_negation(&c("we don\u{2019}t care"), &neg));
        let split = clause("do n't", vec![Token::new("do", PosTag::VB), Token::new("n't", PosTag::RB)]);
        assert!(detect_negation(&split, &neg));
    }

    #[test]
    fn key_round_trip() {
        let b = bt("servic", PosTag::NN, "good", PosTag::ADJ);
        assert_eq!(b.key(), "servic:NN:good:ADJ");
        assert_eq!(b.key().parse::<BiTerm>().unwrap(), b);
        assert!("a:ADJ:b:NN".parse::<BiTerm>().is_err());
    }
}
