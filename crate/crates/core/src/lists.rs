//! Plain-text word lists: one lowercase entry per line, `#` starts a comment.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const DEFAULT_CONJUNCTIONS: &str = include_str!("../data/conjunctions.txt");
pub const DEFAULT_ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");
pub const DEFAULT_NEGATIONS: &str = include_str!("../data/negations.txt");

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordList(BTreeSet<String>);

impl WordList {
    pub fn parse(text: &str) -> WordList {
        WordList(
            text.lines()
                .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
                .filter(|l| !l.is_empty())
                .map(|l| l.replace('\u{2019}', "'"))
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<WordList> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(WordList::parse(&text))
    }

    pub fn from_words<I: IntoIterator<Item = S>, S: AsRef<str>>(words: I) -> WordList {
        WordList(words.into_iter().map(|w| w.as_ref().to_lowercase()).collect())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn conjunctions() -> WordList {
        WordList::parse(DEFAULT_CONJUNCTIONS)
    }

    pub fn abbreviations() -> WordList {
        WordList::parse(DEFAULT_ABBREVIATIONS)
    }

    pub fn negations() -> WordList {
        WordList::parse(DEFAULT_NEGATIONS)
    }
}
