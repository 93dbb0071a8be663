//! CoNLL-U reader.
//!
//! Sentences are grouped by the `# review_id = <id>` comment; a sentence
//! without its own comment belongs to the most recent review id. Multiword
//! token ranges (`3-4`) and empty nodes (`5.1`) are skipped. Coarse POS comes
//! from XPOS when it is a Penn tag, otherwise from UPOS.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::corpus::{PosTag, Token};
use crate::error::{Error, Result};

use super::{DependencyPair, ParseSource, TaggedSentence};

pub type ParsedCorpus = BTreeMap<String, Vec<TaggedSentence>>;

pub fn load_parsed(path: &Path) -> Result<ParsedCorpus> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_conllu(&text, path)
}

struct Row {
    id: usize,
    form: String,
    pos: PosTag,
    head: Option<usize>,
    deprel: Option<String>,
    line: usize,
}

pub fn parse_conllu(text: &str, path: &Path) -> Result<ParsedCorpus> {
    let mut out = ParsedCorpus::new();
    let mut current_id: Option<String> = None;
    let mut rows: Vec<Row> = Vec::new();
    let mut sentence_line = 0;

    let flush = |rows: &mut Vec<Row>,
                 current: &Option<String>,
                 out: &mut ParsedCorpus,
                 line: usize|
     -> Result<()> {
        if rows.is_empty() {
            return Ok(());
        }
        let id = current
            .clone()
            .ok_or_else(|| Error::format(path, line, "sentence before any `# review_id =` comment"))?;
        let sentence = build_sentence(std::mem::take(rows), path)?;
        out.entry(id).or_default().push(sentence);
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut rows, &current_id, &mut out, sentence_line)?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "review_id" {
                    if !rows.is_empty() {
                        flush(&mut rows, &current_id, &mut out, sentence_line)?;
                    }
                    let value = value.trim();
                    if value.is_empty() {
                        return Err(Error::format(path, line_no, "empty review_id"));
                    }
                    current_id = Some(value.to_string());
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::format(
                path,
                line_no,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let id: usize = cols[0]
            .parse()
            .map_err(|_| Error::format(path, line_no, format!("bad token id `{}`", cols[0])))?;
        let head = match cols[6] {
            "_" => None,
            h => Some(
                h.parse::<usize>()
                    .map_err(|_| Error::format(path, line_no, format!("bad HEAD `{h}`")))?,
            ),
        };
        let (upos, xpos) = (cols[3], cols[4]);
        let pos = if xpos != "_" && !xpos.is_empty() {
            PosTag::from_treebank(xpos)
        } else {
            PosTag::from_treebank(upos)
        };
        if rows.is_empty() {
            sentence_line = line_no;
        }
        rows.push(Row {
            id,
            form: cols[1].to_string(),
            pos,
            head,
            deprel: Some(cols[7]).filter(|d| *d != "_").map(str::to_string),
            line: line_no,
        });
    }
    flush(&mut rows, &current_id, &mut out, sentence_line)?;
    Ok(out)
}

fn build_sentence(rows: Vec<Row>, path: &Path) -> Result<TaggedSentence> {
    for (i, row) in rows.iter().enumerate() {
        if row.id != i + 1 {
            return Err(Error::format(
                path,
                row.line,
                format!("token id {} out of sequence (expected {})", row.id, i + 1),
            ));
        }
    }
    let tokens: Vec<Token> = rows.iter().map(|r| Token::new(r.form.clone(), r.pos)).collect();
    let mut pairs = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        match row.head {
            None | Some(0) => {}
            Some(h) if h > rows.len() => {
                return Err(Error::format(path, row.line, format!("HEAD {h} outside sentence")));
            }
            Some(h) => pairs.push(DependencyPair::new(&tokens, i, h - 1, row.deprel.as_deref())),
        }
    }
    Ok(TaggedSentence::new(tokens, pairs, ParseSource::Conllu))
}
