//! Frequency counting and the cut-point filter.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::PosTag;
use crate::error::{Error, Result};
use crate::summarize::{BiTerm, BiTermOccurrence};

pub const FREQUENCY_HEADER: &str = "object_stem\tobject_pos\tevaluation_stem\tevaluation_pos\tcount";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    entries: BTreeMap<BiTerm, usize>,
    total_occurrences: usize,
}

impl FrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, biterm: BiTerm, n: usize) {
        if n == 0 {
            return;
        }
        *self.entries.entry(biterm).or_insert(0) += n;
        self.total_occurrences += n;
    }

    pub fn merge(mut self, other: FrequencyTable) -> FrequencyTable {
        for (b, n) in other.entries {
            self.add(b, n);
        }
        self
    }

    pub fn count(&self, biterm: &BiTerm) -> usize {
        self.entries.get(biterm).copied().unwrap_or(0)
    }

    pub fn contains(&self, biterm: &BiTerm) -> bool {
        self.entries.contains_key(biterm)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_occurrences(&self) -> usize {
        self.total_occurrences
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BiTerm, usize)> {
        self.entries.iter().map(|(b, n)| (b, *n))
    }

    /// Entries by count descending, then by bi-term.
    pub fn ranked(&self) -> Vec<(&BiTerm, usize)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    /// The entries whose count is below `cut_point`.
    pub fn below(&self, cut_point: usize) -> FrequencyTable {
        let mut t = FrequencyTable::new();
        for (b, n) in self.iter().filter(|(_, n)| *n < cut_point) {
            t.add(b.clone(), n);
        }
        t
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(FREQUENCY_HEADER);
        out.push('\n');
        for (b, n) in self.ranked() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                b.object_stem, b.object_pos, b.evaluation_stem, b.evaluation_pos, n
            );
        }
        out
    }

    pub fn parse_tsv(text: &str, path: &Path) -> Result<FrequencyTable> {
        let mut t = FrequencyTable::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 5 {
                return Err(Error::format(path, i + 1, "expected 5 columns"));
            }
            let pos = |s: &str| PosTag::parse(s).ok_or_else(|| Error::format(path, i + 1, format!("bad tag `{s}`")));
            let b = BiTerm::new(cols[0], pos(cols[1])?, cols[2], pos(cols[3])?)
                .map_err(|e| Error::format(path, i + 1, e.to_string()))?;
            let n: usize = cols[4]
                .parse()
                .map_err(|_| Error::format(path, i + 1, format!("bad count `{}`", cols[4])))?;
            if n == 0 {
                return Err(Error::format(path, i + 1, "count must be at least 1"));
            }
            t.add(b, n);
        }
        Ok(t)
    }
}

/// Every occurrence counts once; repeats inside a review are not merged.
pub fn count_biterms(occurrences: &[BiTermOccurrence]) -> FrequencyTable {
    let mut t = FrequencyTable::new();
    for o in occurrences {
        t.add(o.biterm.clone(), 1);
    }
    t
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommonExpressionSet {
    pub biterms: BTreeSet<BiTerm>,
    pub cut_point: usize,
}

impl CommonExpressionSet {
    pub fn contains(&self, biterm: &BiTerm) -> bool {
        self.biterms.contains(biterm)
    }

    pub fn len(&self) -> usize {
        self.biterms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.biterms.is_empty()
    }

    /// Members with their counts, ranked like the frequency export.
    pub fn to_tsv(&self, table: &FrequencyTable) -> String {
        let mut sub = FrequencyTable::new();
        for b in &self.biterms {
            sub.add(b.clone(), table.count(b));
        }
        sub.to_tsv()
    }
}

pub fn check_cut_point(cut_point: i64) -> Result<usize> {
    if cut_point < 1 {
        return Err(Error::Parameter(format!("cut-point C must be at least 1, got {cut_point}")));
    }
    Ok(cut_point as usize)
}

pub fn strain(table: &FrequencyTable, cut_point: i64) -> Result<CommonExpressionSet> {
    let c = check_cut_point(cut_point)?;
    Ok(CommonExpressionSet {
        biterms: table.iter().filter(|(_, n)| *n >= c).map(|(b, _)| b.clone()).collect(),
        cut_point: c,
    })
}
