use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SEGMENT_BUDGET: usize = 5_000;

/// Estimates how many tokens a text occupies.
pub trait TokenEstimator: Send + Sync {
    fn estimate(&self, text: &str) -> usize;
}

/// `ceil(chars / 4)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CharHeuristic;

impl TokenEstimator for CharHeuristic {
    fn estimate(&self, text: &str) -> usize {
        text.chars().count().div_ceil(4)
    }
}

impl<F: Fn(&str) -> usize + Send + Sync> TokenEstimator for F {
    fn estimate(&self, text: &str) -> usize {
        self(text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub index: usize,
    pub text: String,
    pub token_estimate: usize,
    /// Byte offsets into the source transcript.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentConfig {
    pub budget: usize,
    /// Split an oversized sentence at word boundaries instead of failing.
    #[serde(default)]
    pub word_fallback: bool,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        SegmentConfig {
            budget: DEFAULT_SEGMENT_BUDGET,
            word_fallback: false,
        }
    }
}

/// Byte ranges of sentences. A sentence ends after `.`, `!` or `?` (plus
/// closing quotes or brackets) followed by whitespace, or at a newline; the
/// trailing whitespace belongs to it.
pub fn sentence_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((_, c)) = chars.next() {
        let boundary = if c == '\n' {
            true
        } else if matches!(c, '.' | '!' | '?') {
            while let Some(&(_, n)) = chars.peek() {
                if matches!(n, '"' | '\'' | ')' | ']' | '”' | '’' | '.' | '!' | '?') {
                    chars.next();
                } else {
                    break;
                }
            }
            matches!(chars.peek(), Some((_, n)) if n.is_whitespace())
        } else {
            false
        };
        if boundary {
            while let Some(&(_, n)) = chars.peek() {
                if n.is_whitespace() {
                    chars.next();
                } else {
                    break;
                }
            }
            let end = chars.peek().map(|&(j, _)| j).unwrap_or(text.len());
            spans.push((start, end));
            start = end;
        }
    }
    if start < text.len() {
        spans.push((start, text.len()));
    }
    spans
}

/// Byte ranges of words with their trailing whitespace.
fn word_spans(text: &str, offset: usize) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = 0;
    let mut in_space = false;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            in_space = true;
        } else if in_space {
            spans.push((offset + start, offset + i));
            start = i;
            in_space = false;
        }
    }
    if start < text.len() {
        spans.push((offset + start, offset + text.len()));
    }
    spans
}

/// Greedily packs consecutive units into segments within the budget.
fn pack(
    text: &str,
    units: &[(usize, usize)],
    budget: usize,
    estimator: &dyn TokenEstimator,
    out: &mut Vec<(usize, usize)>,
) -> std::result::Result<(), (usize, usize, usize)> {
    let mut cur: Option<(usize, usize)> = None;
    for &(s, e) in units {
        let unit_tokens = estimator.estimate(&text[s..e]);
        if unit_tokens > budget {
            return Err((s, e, unit_tokens));
        }
        cur = match cur {
            None => Some((s, e)),
            Some((cs, _)) if estimator.estimate(&text[cs..e]) <= budget => Some((cs, e)),
            Some(done) => {
                out.push(done);
                Some((s, e))
            }
        };
    }
    out.extend(cur);
    Ok(())
}

/// Splits a transcript into consecutive segments of at most `cfg.budget`
/// estimated tokens without breaking sentences. Concatenating the segment
/// texts gives back `text` exactly.
pub fn segment_transcript(
    text: &str,
    cfg: &SegmentConfig,
    estimator: &dyn TokenEstimator,
) -> Result<Vec<Segment>> {
    if text.is_empty() {
        return Err(Error::Empty("transcript"));
    }
    if cfg.budget == 0 {
        return Err(Error::InvalidArgument("segment budget must be positive".into()));
    }
    let sentences = sentence_spans(text);
    let mut ranges = Vec::new();
    let mut pending: Vec<(usize, usize)> = Vec::new();
    for &(s, e) in &sentences {
        if estimator.estimate(&text[s..e]) <= cfg.budget {
            pending.push((s, e));
            continue;
        }
        if !cfg.word_fallback {
            return Err(Error::OversizedSpan {
                start: s,
                end: e,
                tokens: estimator.estimate(&text[s..e]),
                budget: cfg.budget,
            });
        }
        pack(text, &pending, cfg.budget, estimator, &mut ranges).map_err(oversized(cfg))?;
        pending.clear();
        let words = word_spans(&text[s..e], s);
        pack(text, &words, cfg.budget, estimator, &mut ranges).map_err(oversized(cfg))?;
    }
    pack(text, &pending, cfg.budget, estimator, &mut ranges).map_err(oversized(cfg))?;

    Ok(ranges
        .into_iter()
        .enumerate()
        .map(|(index, (start, end))| Segment {
            index,
            text: text[start..end].to_string(),
            token_estimate: estimator.estimate(&text[start..end]),
            start,
            end,
        })
        .collect())
}

fn oversized(cfg: &SegmentConfig) -> impl Fn((usize, usize, usize)) -> Error + '_ {
    move |(start, end, tokens)| Error::OversizedSpan {
        start,
        end,
        tokens,
        budget: cfg.budget,
    }
}
