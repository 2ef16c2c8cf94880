//! Keyword search over image-caption corpora.
//!
//! A query holds "with" and "without" synonym groups. A caption matches when
//! every "with" group has at least one term present and no "without" group
//! has any. Terms match case-insensitively as substrings that begin at a word
//! start, so `mitotic` finds "Mitotic figures" and `arrow` finds "arrows" but
//! not "narrow".
//!
//! Multi-panel figure captions can be split into per-panel subcaptions first
//! ([`split_subcaptions`]); shared leading text is prefixed to each panel.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::CaptionRecord;

pub const FULL_ID: &str = "full";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordQuery {
    with_groups: Vec<Vec<String>>,
    without_groups: Vec<Vec<String>>,
}

fn normalize_groups(groups: Vec<Vec<String>>) -> Result<Vec<Vec<String>>> {
    groups
        .into_iter()
        .map(|g| {
            if g.is_empty() {
                return Err(Error::InvalidQuery("empty synonym group".into()));
            }
            g.into_iter()
                .map(|t| {
                    let t = t.trim().to_lowercase();
                    if t.is_empty() {
                        Err(Error::InvalidQuery("empty keyword".into()))
                    } else {
                        Ok(t)
                    }
                })
                .collect()
        })
        .collect()
}

impl KeywordQuery {
    pub fn new(with_groups: Vec<Vec<String>>, without_groups: Vec<Vec<String>>) -> Result<Self> {
        if with_groups.is_empty() {
            return Err(Error::InvalidQuery(
                "at least one \"with\" group is required".into(),
            ));
        }
        Ok(Self {
            with_groups: normalize_groups(with_groups)?,
            without_groups: normalize_groups(without_groups)?,
        })
    }

    /// Builds a query from CLI-style groups where `|` separates synonyms.
    pub fn from_pipe_groups<S: AsRef<str>>(with: &[S], without: &[S]) -> Result<Self> {
        let split = |gs: &[S]| -> Vec<Vec<String>> {
            gs.iter()
                .map(|g| g.as_ref().split('|').map(str::to_string).collect())
                .collect()
        };
        Self::new(split(with), split(without))
    }

    pub fn with_groups(&self) -> &[Vec<String>] {
        &self.with_groups
    }

    pub fn without_groups(&self) -> &[Vec<String>] {
        &self.without_groups
    }

    pub fn matches(&self, caption: &str) -> bool {
        let text = caption.to_lowercase();
        self.with_groups
            .iter()
            .all(|g| g.iter().any(|t| contains_at_word_start(&text, t)))
            && !self
                .without_groups
                .iter()
                .any(|g| g.iter().any(|t| contains_at_word_start(&text, t)))
    }
}

/// True when `term` occurs in `text` at a position not preceded by a letter.
/// Both arguments are expected lowercase.
pub fn contains_at_word_start(text: &str, term: &str) -> bool {
    text.match_indices(term).any(|(i, _)| {
        text[..i]
            .chars()
            .next_back()
            .is_none_or(|c| !c.is_alphabetic())
    })
}

/// Records matching the query, in corpus order.
pub fn keyword_search(corpus: &[CaptionRecord], query: &KeywordQuery) -> Vec<CaptionRecord> {
    corpus
        .par_iter()
        .filter(|r| query.matches(&r.caption))
        .cloned()
        .collect()
}

/// Splits every record into subcaptions and searches those. Panel hits get id
/// `<parent>#<panel>` and carry the original caption as `parent_caption`;
/// unsplit records keep their id.
pub fn keyword_search_subcaptions(
    corpus: &[CaptionRecord],
    query: &KeywordQuery,
) -> Vec<CaptionRecord> {
    corpus
        .par_iter()
        .flat_map_iter(|r| {
            split_subcaptions(r)
                .into_iter()
                .filter(|s| query.matches(&s.text))
                .map(|s| {
                    let split = s.subfigure_id != FULL_ID;
                    CaptionRecord {
                        id: if split {
                            format!("{}#{}", r.id, s.subfigure_id)
                        } else {
                            r.id.clone()
                        },
                        caption: s.text,
                        source: r.source.clone(),
                        parent_caption: if split {
                            Some(r.caption.clone())
                        } else {
                            r.parent_caption.clone()
                        },
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubCaption {
    pub parent_id: String,
    pub subfigure_id: String,
    pub text: String,
}

/// Result of segmenting a caption before the shared prefix is applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptionParts {
    pub supcaption: String,
    pub panels: Vec<(String, String)>,
}

#[derive(Debug, PartialEq, Eq)]
enum Marker<'a> {
    /// `(A) text.` or `A, text.`
    Leading(char, &'a str),
    /// `text (A).`
    Trailing(char, String),
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Sentences end at a period followed by whitespace or the end of text.
fn sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if c == '.' && iter.peek().is_none_or(|&(_, n)| n.is_whitespace()) {
            let s = text[start..=i].trim();
            if !s.is_empty() {
                out.push(s);
            }
            start = i + 1;
        }
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

fn classify(sentence: &str) -> Option<Marker<'_>> {
    let chars: Vec<char> = sentence.chars().collect();
    let boundary = |i: usize| chars.get(i).is_none_or(|c| c.is_whitespace());

    // (A) text
    if chars.len() >= 3 && chars[0] == '(' && chars[1].is_ascii_alphabetic() && chars[2] == ')' && boundary(3) {
        let rest = sentence[3..].trim();
        if !rest.is_empty() {
            return Some(Marker::Leading(chars[1], rest));
        }
    }
    // A, text
    if chars.len() >= 3 && chars[0].is_ascii_alphabetic() && chars[1] == ',' && chars[2].is_whitespace() {
        let rest = sentence[2..].trim();
        if !rest.is_empty() {
            return Some(Marker::Leading(chars[0], rest));
        }
    }
    // text (A).
    let stripped = sentence.strip_suffix('.').unwrap_or(sentence).trim_end();
    let sc: Vec<char> = stripped.chars().collect();
    let n = sc.len();
    if n >= 4
        && sc[n - 1] == ')'
        && sc[n - 2].is_ascii_alphabetic()
        && sc[n - 3] == '('
        && sc[n - 4].is_whitespace()
    {
        let marker_start = stripped.len() - 3;
        let body = format!("{}{}", &stripped[..marker_start], &sentence[stripped.len()..]);
        if !stripped[..marker_start].trim().is_empty() {
            return Some(Marker::Trailing(sc[n - 2], collapse_ws(&body)));
        }
    }
    None
}

/// Segments a caption into shared leading text and per-panel bodies.
/// Recognized panel markers: `A, text.`, `(A) text.` and `text (A).`.
/// Sentences without a marker attach to the panel before them, or to the
/// shared text when no panel has started.
pub fn caption_parts(caption: &str) -> CaptionParts {
    let mut sup: Vec<&str> = Vec::new();
    let mut panels: Vec<(String, Vec<String>)> = Vec::new();
    for s in sentences(caption) {
        match classify(s) {
            Some(Marker::Leading(id, body)) => panels.push((id.to_string(), vec![body.to_string()])),
            Some(Marker::Trailing(id, body)) => panels.push((id.to_string(), vec![body])),
            None => match panels.last_mut() {
                Some((_, parts)) => parts.push(s.to_string()),
                None => sup.push(s),
            },
        }
    }
    CaptionParts {
        supcaption: collapse_ws(&sup.join(" ")),
        panels: panels
            .into_iter()
            .map(|(id, parts)| (id, collapse_ws(&parts.join(" "))))
            .collect(),
    }
}

/// Splits a figure caption into per-panel subcaptions with the shared
/// leading text prefixed to each. Captions without markers come back whole
/// under the id [`FULL_ID`].
pub fn split_subcaptions(record: &CaptionRecord) -> Vec<SubCaption> {
    let parts = caption_parts(&record.caption);
    if parts.panels.is_empty() {
        return vec![SubCaption {
            parent_id: record.id.clone(),
            subfigure_id: FULL_ID.to_string(),
            text: collapse_ws(&record.caption),
        }];
    }
    parts
        .panels
        .into_iter()
        .map(|(id, body)| SubCaption {
            parent_id: record.id.clone(),
            subfigure_id: id,
            text: if parts.supcaption.is_empty() {
                body
            } else {
                format!("{} {}", parts.supcaption, body)
            },
        })
        .collect()
}

/// Tab-separated `id`/`caption` table for manual review of search hits.
pub fn review_report(matches: &[CaptionRecord]) -> String {
    let mut out = String::from("id\tcaption\n");
    for r in matches {
        out.push_str(&r.id);
        out.push('\t');
        out.push_str(&collapse_ws(&r.caption));
        out.push('\n');
    }
    out
}

/// Removes manually rejected hits. Returns the kept records and one warning
/// per exclusion id that matched nothing.
pub fn apply_exclusions<S: AsRef<str>>(
    matches: Vec<CaptionRecord>,
    exclude_ids: &[S],
) -> (Vec<CaptionRecord>, Vec<String>) {
    let present: HashSet<&str> = matches.iter().map(|r| r.id.as_str()).collect();
    let warnings = exclude_ids
        .iter()
        .map(AsRef::as_ref)
        .filter(|id| !present.contains(id))
        .map(|id| format!("exclusion id {id:?} is not among the matches"))
        .collect();
    let excluded: HashSet<&str> = exclude_ids.iter().map(AsRef::as_ref).collect();
    let kept = matches
        .into_iter()
        .filter(|r| !excluded.contains(r.id.as_str()))
        .collect();
    (kept, warnings)
}
