//! Rule tagger used when no external parse is supplied.
//!
//! Tags come from, in order: closed-class word lists, the bundled open-class
//! lexicon (`data/pos_lexicon.tsv`), suffix rules, and finally NN. A small
//! contextual pass then fixes `so` before a modifier (intensifier, RB) and a
//! clause-final `before`/`after` (adverb, RB).

use std::collections::HashMap;
use std::fs;
use std::ops::Range;
use std::path::Path;
use std::sync::OnceLock;

use crate::corpus::{PosTag, Token};
use crate::error::{Error, Result};
use crate::lists::WordList;

use super::{DependencyPair, ParseSource, TaggedSentence};

pub const DEFAULT_LEXICON: &str = include_str!("../../data/pos_lexicon.tsv");

const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "my", "your", "our", "their", "his",
    "her", "its", "some", "any", "every", "each", "all", "no", "another", "such", "neither",
    "either", "both", "few", "several", "many", "much", "whose",
];
const COORDINATORS: &[&str] = &["and", "but", "or", "nor", "yet", "so", "plus"];
const SUBORDINATORS: &[&str] = &[
    "because", "although", "though", "while", "when", "whenever", "whereas", "unless", "until",
    "since", "if", "once", "whether",
];
const PREPOSITIONS: &[&str] = &[
    "about", "above", "across", "after", "against", "along", "among", "around", "at", "before",
    "behind", "below", "beneath", "beside", "besides", "between", "beyond", "by", "despite",
    "during", "except", "for", "from", "in", "inside", "into", "near", "of", "off", "on", "onto",
    "over", "past", "per", "through", "throughout", "to", "toward", "towards", "under",
    "underneath", "upon", "via", "with", "within", "without", "than", "as", "like",
];
const NEGATION_ADVERBS: &[&str] = &["not", "never", "n't"];
const NEGATED_AUXILIARIES: &[&str] = &[
    "don't", "doesn't", "didn't", "won't", "can't", "cannot", "isn't", "wasn't", "aren't",
    "weren't", "couldn't", "wouldn't", "shouldn't", "hasn't", "haven't", "hadn't", "ain't",
];
const INTERJECTIONS: &[&str] = &[
    "wow", "oh", "ah", "aha", "hey", "yay", "ugh", "hmm", "mmm", "whoa", "omg", "alas", "oops",
    "yum", "ok", "okay", "yes", "yeah", "nope", "thanks", "mahalo", "aloha",
];

/// Auxiliary and copular verbs: tagged VB but never chosen as the main verb
/// or as an attachment target.
pub const AUXILIARIES: &[&str] = &[
    "be", "am", "is", "are", "was", "were", "been", "being", "'s", "'re", "'m", "do", "does",
    "did", "have", "has", "had", "having", "will", "would", "shall", "should", "can", "could",
    "may", "might", "must", "'ll", "'d", "'ve", "don't", "doesn't", "didn't", "won't", "can't",
    "cannot", "isn't", "wasn't", "aren't", "weren't", "couldn't", "wouldn't", "shouldn't",
    "hasn't", "haven't", "hadn't", "ain't",
];

pub const PRONOUNS: &[&str] = &[
    "i", "me", "we", "us", "you", "he", "him", "she", "her", "it", "they", "them", "myself",
    "ourselves", "yourself", "itself", "themselves", "one", "someone", "everyone", "anyone",
    "everything", "something", "anything", "nothing", "who", "what", "which", "that",
];

fn is_punct_char(c: char) -> bool {
    matches!(
        c,
        '.' | ',' | ';' | ':' | '!' | '?' | '"' | '\'' | '(' | ')' | '[' | ']' | '-' | '\u{2026}'
            | '\u{2013}' | '\u{2014}' | '\u{201c}' | '\u{201d}' | '\u{2018}' | '\u{2019}'
    )
}

pub fn is_auxiliary(token: &Token) -> bool {
    token.pos == PosTag::VB && AUXILIARIES.contains(&normalized(&token.surface).as_str())
}

pub fn is_pronoun(token: &Token) -> bool {
    PRONOUNS.contains(&normalized(&token.surface).as_str())
}

fn normalized(surface: &str) -> String {
    surface.to_lowercase().replace('\u{2019}', "'")
}

#[derive(Debug, Clone)]
pub struct Tagger {
    lexicon: HashMap<String, PosTag>,
    abbreviations: WordList,
}

impl Default for Tagger {
    fn default() -> Self {
        Tagger::new(parse_lexicon(DEFAULT_LEXICON, Path::new("pos_lexicon.tsv")).expect("bundled lexicon"), WordList::abbreviations())
    }
}

/// Lexicon TSV: `word<TAB>tag`, lowercase keys, tags from the internal set.
pub fn parse_lexicon(text: &str, path: &Path) -> Result<HashMap<String, PosTag>> {
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (word, tag) = line
            .split_once('\t')
            .ok_or_else(|| Error::format(path, i + 1, "expected `word<TAB>tag`"))?;
        let tag = PosTag::parse(tag.trim())
            .ok_or_else(|| Error::format(path, i + 1, format!("unknown tag `{}`", tag.trim())))?;
        out.insert(word.trim().to_lowercase(), tag);
    }
    Ok(out)
}

static DEFAULT_TAGGER: OnceLock<Tagger> = OnceLock::new();

impl Tagger {
    pub fn new(lexicon: HashMap<String, PosTag>, abbreviations: WordList) -> Self {
        Tagger {
            lexicon,
            abbreviations,
        }
    }

    pub fn shared() -> &'static Tagger {
        DEFAULT_TAGGER.get_or_init(Tagger::default)
    }

    pub fn load_lexicon(path: &Path, abbreviations: WordList) -> Result<Tagger> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Tagger::new(parse_lexicon(&text, path)?, abbreviations))
    }

    pub fn with_abbreviations(mut self, abbreviations: WordList) -> Self {
        self.abbreviations = abbreviations;
        self
    }

    pub fn abbreviations(&self) -> &WordList {
        &self.abbreviations
    }

    /// Split text into word, number, abbreviation and punctuation tokens
    /// with their byte spans.
    pub fn tokenize<'a>(&self, text: &'a str) -> Vec<(&'a str, Range<usize>)> {
        let lower = text.to_lowercase();
        let lower_ok = lower.len() == text.len();
        let chars: Vec<(usize, char)> = text.char_indices().collect();
        let end_of = |k: usize| chars.get(k).map(|c| c.0).unwrap_or(text.len());
        let mut out = Vec::new();
        let mut k = 0;
        while k < chars.len() {
            let (start, c) = chars[k];
            if c.is_whitespace() {
                k += 1;
                continue;
            }
            if c.is_alphanumeric() {
                if lower_ok {
                    if let Some(len) = self.abbreviation_at(&lower, start) {
                        out.push((&text[start..start + len], start..start + len));
                        while k < chars.len() && chars[k].0 < start + len {
                            k += 1;
                        }
                        continue;
                    }
                }
                let mut j = k + 1;
                while j < chars.len() {
                    let ch = chars[j].1;
                    let next_alnum = chars.get(j + 1).map(|c| c.1.is_alphanumeric()).unwrap_or(false);
                    let next_digit = chars.get(j + 1).map(|c| c.1.is_ascii_digit()).unwrap_or(false);
                    let joins = ch.is_alphanumeric()
                        || (matches!(ch, '\'' | '\u{2019}' | '-') && next_alnum)
                        || (matches!(ch, '.' | ',') && chars[j - 1].1.is_ascii_digit() && next_digit);
                    if !joins {
                        break;
                    }
                    j += 1;
                }
                let end = end_of(j);
                out.push((&text[start..end], start..end));
                k = j;
                continue;
            }
            // Runs of one punctuation mark ("!!", "...") form a single token.
            let mut j = k + 1;
            if is_punct_char(c) {
                while j < chars.len() && chars[j].1 == c {
                    j += 1;
                }
            }
            let end = end_of(j);
            out.push((&text[start..end], start..end));
            k = j;
        }
        out
    }

    fn abbreviation_at(&self, lower: &str, start: usize) -> Option<usize> {
        if start > 0 {
            let prev = lower[..start].chars().next_back()?;
            if prev.is_alphanumeric() {
                return None;
            }
        }
        let rest = &lower[start..];
        self.abbreviations
            .iter()
            .filter(|a| rest.starts_with(*a))
            .filter(|a| {
                rest[a.len()..]
                    .chars()
                    .next()
                    .map(|c| !c.is_alphanumeric())
                    .unwrap_or(true)
            })
            .map(str::len)
            .max()
    }

    fn tag_word(&self, surface: &str) -> PosTag {
        let w = normalized(surface);
        if w.chars().all(is_punct_char) {
            return PosTag::PUNCT;
        }
        if !w.chars().any(char::is_alphabetic) {
            return PosTag::OTHER;
        }
        let s = w.as_str();
        if NEGATED_AUXILIARIES.contains(&s) {
            return PosTag::VB;
        }
        if NEGATION_ADVERBS.contains(&s) {
            return PosTag::RB;
        }
        if COORDINATORS.contains(&s) {
            return PosTag::CC;
        }
        if SUBORDINATORS.contains(&s) || PREPOSITIONS.contains(&s) && !self.lexicon.contains_key(s) {
            return PosTag::IN;
        }
        if DETERMINERS.contains(&s) {
            return PosTag::DT;
        }
        if INTERJECTIONS.contains(&s) {
            return PosTag::UH;
        }
        if let Some(tag) = self.lexicon.get(s) {
            return *tag;
        }
        if s.ends_with('.') {
            // Abbreviations such as "dr." or "st.".
            return PosTag::NN;
        }
        if s.ends_with("ly") && s.len() > 4 {
            return PosTag::RB;
        }
        if ["ous", "ful", "ive", "able", "ible"].iter().any(|suf| s.ends_with(suf) && s.len() > suf.len() + 2) {
            return PosTag::ADJ;
        }
        for suf in ["ing", "ed"] {
            if let Some(base) = s.strip_suffix(suf) {
                if self.is_known_verb_stem(base) {
                    return PosTag::VB;
                }
            }
        }
        if let Some(base) = s.strip_suffix('s') {
            if let Some(tag) = self.lexicon.get(base) {
                if matches!(tag, PosTag::NN | PosTag::VB) {
                    return *tag;
                }
            }
        }
        PosTag::NN
    }

    fn is_known_verb_stem(&self, base: &str) -> bool {
        if base.len() < 2 {
            return false;
        }
        let mut candidates = vec![base.to_string(), format!("{base}e")];
        let b: Vec<char> = base.chars().collect();
        if b.len() >= 2 && b[b.len() - 1] == b[b.len() - 2] {
            candidates.push(b[..b.len() - 1].iter().collect());
        }
        if let Some(stem) = base.strip_suffix('i') {
            candidates.push(format!("{stem}y"));
        }
        candidates
            .iter()
            .any(|c| self.lexicon.get(c.as_str()) == Some(&PosTag::VB))
    }

    /// Tag a piece of text. Deterministic; unknown words default to NN.
    pub fn tag(&self, text: &str) -> Vec<Token> {
        let pieces = self.tokenize(text);
        let mut tokens: Vec<Token> = pieces
            .iter()
            .map(|(s, _)| Token::new(*s, self.tag_word(s)))
            .collect();
        apply_context(&mut tokens);
        tokens
    }

    /// Tag a whole review body as one sentence with aligned offsets; pairs
    /// are left empty and derived per clause.
    pub fn parse_body(&self, body: &str) -> TaggedSentence {
        let pieces = self.tokenize(body);
        let mut tokens: Vec<Token> = pieces
            .iter()
            .map(|(s, _)| Token::new(*s, self.tag_word(s)))
            .collect();
        apply_context(&mut tokens);
        let mut sentence = TaggedSentence::new(tokens, Vec::new(), ParseSource::RuleTagger);
        sentence.offsets = pieces.into_iter().map(|(_, r)| Some(r)).collect();
        sentence
    }
}

fn apply_context(tokens: &mut [Token]) {
    for i in 0..tokens.len() {
        let lower = normalized(&tokens[i].surface);
        let next = tokens.get(i + 1).map(|t| t.pos);
        if lower == "so" && matches!(next, Some(PosTag::ADJ | PosTag::RB)) {
            tokens[i].pos = PosTag::RB;
        }
        if matches!(lower.as_str(), "before" | "after" | "since")
            && matches!(next, None | Some(PosTag::PUNCT))
        {
            tokens[i].pos = PosTag::RB;
        }
    }
}

/// Tag clause text with the bundled lexicon.
///
/// # Panics
/// Panics on empty text.
pub fn tag_tokens(text: &str) -> Vec<Token> {
    assert!(!text.trim().is_empty(), "tag_tokens requires non-empty text");
    Tagger::shared().tag(text)
}

fn is_content_target(t: &Token) -> bool {
    match t.pos {
        PosTag::NN => !is_pronoun(t),
        PosTag::VB => !is_auxiliary(t),
        _ => false,
    }
}

fn is_modifier(t: &Token) -> bool {
    matches!(t.pos, PosTag::ADJ | PosTag::RB | PosTag::CC) || t.surface == ","
}

/// Heuristic head-dependent pairs for one clause.
///
/// * An adverb directly before an adjective or adverb modifies it.
/// * Any other ADJ/RB attaches to the nearest noun or main verb on its right
///   when only modifiers stand in between (attributive use), otherwise to
///   the nearest one on its left.
/// * The first non-auxiliary verb pairs with the nearest non-pronoun noun
///   before it (subject); when there is none, with the nearest one after it
///   (object).
///
/// Pronouns and auxiliaries are never chosen as targets.
pub fn derive_pairs(tokens: &[Token]) -> Vec<DependencyPair> {
    let mut pairs = Vec::new();
    for i in 0..tokens.len() {
        let pos = tokens[i].pos;
        if !matches!(pos, PosTag::ADJ | PosTag::RB) {
            continue;
        }
        let rel = if pos == PosTag::ADJ { "amod" } else { "advmod" };
        if pos == PosTag::RB {
            if let Some(next) = tokens.get(i + 1) {
                if matches!(next.pos, PosTag::ADJ | PosTag::RB) {
                    pairs.push(DependencyPair::new(tokens, i, i + 1, Some(rel)));
                    continue;
                }
            }
        }
        let right = tokens[i + 1..]
            .iter()
            .position(|t| !is_modifier(t))
            .map(|off| i + 1 + off)
            .filter(|&j| is_content_target(&tokens[j]));
        let left = || (0..i).rev().find(|&j| is_content_target(&tokens[j]));
        if let Some(j) = right.or_else(left) {
            pairs.push(DependencyPair::new(tokens, i, j, Some(rel)));
        }
    }
    let main_verb = tokens
        .iter()
        .position(|t| t.pos == PosTag::VB && !is_auxiliary(t));
    if let Some(v) = main_verb {
        let noun = |t: &Token| t.pos == PosTag::NN && !is_pronoun(t);
        if let Some(s) = (0..v).rev().find(|&j| noun(&tokens[j])) {
            pairs.push(DependencyPair::new(tokens, s, v, Some("nsubj")));
        } else if let Some(o) = (v + 1..tokens.len()).find(|&j| noun(&tokens[j])) {
            pairs.push(DependencyPair::new(tokens, o, v, Some("dobj")));
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags(text: &str) -> Vec<PosTag> {
        tag_tokens(text).iter().map(|t| t.pos).collect()
    }

    fn pair_words(text: &str) -> Vec<(String, String)> {
        derive_pairs(&tag_tokens(text))
            .into_iter()
            .map(|p| (p.word1.surface, p.word2.surface))
            .collect()
    }

    #[test]
    fn food_was_very_good() {
        use PosTag::*;
        assert_eq!(tags("the food was very good"), vec![DT, NN, VB, RB, ADJ]);
        let pairs = pair_words("the food was very good");
        assert_eq!(
            pairs,
            vec![("very".into(), "good".into()), ("good".into(), "food".into())]
        );
    }

    #[test]
    fn interjection() {
        assert_eq!(tags("wow"), vec![PosTag::UH]);
        assert!(pair_words("wow").is_empty());
    }

    #[test]
    fn attributive_adjective() {
        assert_eq!(pair_words("great taste"), vec![("great".into(), "taste".into())]);
    }

    #[test]
    #[should_panic]
    fn empty_text_is_rejected() {
        tag_tokens("");
    }

    #[test]
    fn tokenizer_keeps_decimals_abbreviations_and_contractions() {
        let t = Tagger::shared();
        let words: Vec<&str> = t.tokenize("I paid 3.50 at St. Mary's, don't ask!!").into_iter().map(|(s, _)| s).collect();
        assert_eq!(words, vec!["I", "paid", "3.50", "at", "St.", "Mary's", ",", "don't", "ask", "!!"]);
    }

    #[test]
    fn suffix_rules() {
        use PosTag::*;
        let t = Tagger::shared();
        assert_eq!(t.tag_word("quickishly"), RB);
        assert_eq!(t.tag_word("glamorous"), ADJ);
        assert_eq!(t.tag_word("zorbful"), ADJ);
        assert_eq!(t.tag_word("ordering"), VB);
        assert_eq!(t.tag_word("tried"), VB);
        assert_eq!(t.tag_word("blorp"), NN);
    }

    #[test]
    fn contextual_fixes() {
        let toks = tag_tokens("the fish was so fresh");
        assert_eq!(toks[3].pos, PosTag::RB);
        let toks = tag_tokens("never tried poke before.");
        assert_eq!(toks[3].pos, PosTag::RB);
    }

    #[test]
    fn verb_pairs_with_subject_or_object() {
        let p = pair_words("the staff smiled");
        assert!(p.contains(&("staff".into(), "smiled".into())));
        let p = pair_words("i like the food here");
        assert!(p.contains(&("food".into(), "like".into())));
    }

    #[test]
    fn deterministic() {
        let a = derive_pairs(&tag_tokens("crisp and delicious salads, really tasty garlic prawns"));
        let b = derive_pairs(&tag_tokens("crisp and delicious salads, really tasty garlic prawns"));
        assert_eq!(a, b);
        for p in &a {
            assert_eq!(a.iter().filter(|q| q.dependent == p.dependent && matches!(q.word1.pos, PosTag::ADJ | PosTag::RB)).count(), 1);
        }
    }
}
