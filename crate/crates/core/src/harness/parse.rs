use std::collections::BTreeSet;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::ranking::{Ranking, ValueId};
use crate::taxonomy::ValueTaxonomy;

pub const MIN_PARSED_VALUES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    /// Names of basic values.
    #[default]
    Basic,
    /// Names of subvalues, mapped onto their basic values.
    Subvalue,
}

/// Which extraction layer produced a ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParseLayer {
    StructuredBlock,
    EnumeratedList,
    FirstMention,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parsed {
    pub ranking: Ranking,
    pub layer: ParseLayer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseFailure {
    pub message: String,
    /// Distinct values recognized anywhere in the text, in first-mention order.
    pub recognized: Vec<String>,
}

/// Case-insensitive matcher for taxonomy names, longest phrase first.
struct NameMatcher {
    re: Regex,
}

impl NameMatcher {
    fn new(ids: &[ValueId]) -> Self {
        let mut slugs: Vec<&str> = ids.iter().map(|v| v.as_str()).collect();
        slugs.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        let alts: Vec<String> = slugs
            .iter()
            .map(|s| {
                s.split('-')
                    .map(regex::escape)
                    .collect::<Vec<_>>()
                    .join(r"[\s_\-]+")
            })
            .collect();
        let pattern = format!(r"(?i)\b(?:{})\b", alts.join("|"));
        NameMatcher {
            re: Regex::new(&pattern).expect("escaped alternation"),
        }
    }

    fn find_all(&self, text: &str) -> Vec<ValueId> {
        self.re
            .find_iter(text)
            .map(|m| ValueId::new(m.as_str()))
            .collect()
    }

    fn first(&self, text: &str) -> Option<ValueId> {
        self.re.find(text).map(|m| ValueId::new(m.as_str()))
    }

    /// Whole-string match after trimming list decoration.
    fn exact(&self, text: &str) -> Option<ValueId> {
        let t = text.trim().trim_matches(|c: char| "*_`\"'.:".contains(c)).trim();
        self.re
            .find(t)
            .filter(|m| m.start() == 0 && m.end() == t.len())
            .map(|m| ValueId::new(m.as_str()))
    }
}

fn dedup(items: impl IntoIterator<Item = ValueId>) -> Vec<ValueId> {
    let mut seen = BTreeSet::new();
    items.into_iter().filter(|v| seen.insert(v.clone())).collect()
}

/// Finds `{ ... }` objects in the text that parse as JSON with a string
/// array under `key`.
fn structured(text: &str, key: &str) -> Option<Vec<String>> {
    let bytes = text.as_bytes();
    let mut candidates = Vec::new();
    for (i, &b) in bytes.iter().enumerate() {
        if b != b'{' {
            continue;
        }
        let mut depth = 0usize;
        let mut in_str = false;
        let mut escaped = false;
        for (j, &c) in bytes.iter().enumerate().skip(i) {
            if in_str {
                match c {
                    _ if escaped => escaped = false,
                    b'\\' => escaped = true,
                    b'"' => in_str = false,
                    _ => {}
                }
                continue;
            }
            match c {
                b'"' => in_str = true,
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        candidates.push(&text[i..=j]);
                        break;
                    }
                }
                _ => {}
            }
        }
    }
    // The last well-formed block wins: answers usually end with it.
    candidates.iter().rev().find_map(|c| {
        let v: serde_json::Value = serde_json::from_str(c).ok()?;
        let arr = v.get(key)?.as_array()?;
        arr.iter().map(|x| x.as_str().map(str::to_string)).collect()
    })
}

fn enumerated(text: &str) -> Vec<&str> {
    let marker = Regex::new(r"(?m)(?:^|\s)\(?(\d{1,2})[.)]\s+").expect("static regex");
    let marks: Vec<(usize, usize)> = marker
        .captures_iter(text)
        .map(|c| {
            let whole = c.get(0).unwrap();
            (whole.start(), whole.end())
        })
        .collect();
    marks
        .iter()
        .enumerate()
        .map(|(i, &(_, body))| {
            let end = marks.get(i + 1).map_or(text.len(), |m| m.0);
            let item = &text[body..end];
            item.lines().next().unwrap_or("")
        })
        .collect()
}

fn recognize(
    text: &str,
    taxonomy: &ValueTaxonomy,
    mode: ParseMode,
) -> std::result::Result<Parsed, ParseFailure> {
    let basic = NameMatcher::new(taxonomy.basic_values());
    let (matcher, key) = match mode {
        ParseMode::Basic => (basic, "ranking"),
        ParseMode::Subvalue => (NameMatcher::new(taxonomy.subvalues()), "subvalues"),
    };
    let attempt = |ids: Vec<ValueId>, layer| -> Option<Parsed> {
        let ids = dedup(ids);
        if ids.len() < MIN_PARSED_VALUES {
            return None;
        }
        let ranking = match mode {
            ParseMode::Basic => Ranking::new(ids).ok()?,
            ParseMode::Subvalue => taxonomy.map_subvalues_to_basic(&ids).ok()?,
        };
        (ranking.len() >= MIN_PARSED_VALUES).then_some(Parsed { ranking, layer })
    };

    if let Some(items) = structured(text, key) {
        let ids: Vec<ValueId> = items
            .iter()
            .filter_map(|s| matcher.exact(s).or_else(|| matcher.first(s)))
            .collect();
        if let Some(p) = attempt(ids, ParseLayer::StructuredBlock) {
            return Ok(p);
        }
    }
    let items = enumerated(text);
    if items.len() >= MIN_PARSED_VALUES {
        let ids: Vec<ValueId> = items.iter().filter_map(|s| matcher.first(s)).collect();
        if let Some(p) = attempt(ids, ParseLayer::EnumeratedList) {
            return Ok(p);
        }
    }
    let mentions = matcher.find_all(text);
    if let Some(p) = attempt(mentions.clone(), ParseLayer::FirstMention) {
        return Ok(p);
    }
    let recognized: Vec<String> = dedup(mentions).iter().map(|v| v.to_string()).collect();
    Err(ParseFailure {
        message: format!(
            "recognized {} distinct value(s), need at least {MIN_PARSED_VALUES}",
            recognized.len()
        ),
        recognized,
    })
}

/// Extracts an ordered value list from a model response: a JSON block if
/// present, else a numbered list, else first mentions.
pub fn parse_ranking(
    text: &str,
    taxonomy: &ValueTaxonomy,
    mode: ParseMode,
) -> std::result::Result<Ranking, ParseFailure> {
    recognize(text, taxonomy, mode).map(|p| p.ranking)
}

/// Like [`parse_ranking`], also reporting the layer that matched.
pub fn parse_ranking_detailed(
    text: &str,
    taxonomy: &ValueTaxonomy,
    mode: ParseMode,
) -> std::result::Result<Parsed, ParseFailure> {
    recognize(text, taxonomy, mode)
}

/// Canonical numbered-list rendering, one value per line.
pub fn render_ranking(ranking: &Ranking) -> String {
    ranking
        .items()
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{}. {}\n", i + 1, v.display_name()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Degeneracy {
    Empty,
    /// A 20-character unit repeated at least 10 times in a row.
    Repetition { unit: String },
}

pub const REPEAT_UNIT: usize = 20;
pub const REPEAT_COUNT: usize = 10;

/// Flags empty output and repetition loops.
pub fn detect_degenerate(text: &str) -> Option<Degeneracy> {
    if text.trim().is_empty() {
        return Some(Degeneracy::Empty);
    }
    let chars: Vec<char> = text.chars().collect();
    let span = REPEAT_UNIT * REPEAT_COUNT;
    if chars.len() < span {
        return None;
    }
    // A run of period-20 repetition means chars[j] == chars[j + 20] for 180
    // consecutive positions.
    let mut run = 0;
    for j in 0..chars.len() - REPEAT_UNIT {
        if chars[j] == chars[j + REPEAT_UNIT] {
            run += 1;
            if run == span - REPEAT_UNIT {
                let start = j + 1 - run;
                return Some(Degeneracy::Repetition {
                    unit: chars[start..start + REPEAT_UNIT].iter().collect(),
                });
            }
        } else {
            run = 0;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tax() -> ValueTaxonomy {
        ValueTaxonomy::bundled()
    }

    fn ids(r: &Ranking) -> Vec<&str> {
        r.items().iter().map(|v| v.as_str()).collect()
    }

    #[test]
    fn inline_numbered_list() {
        let r = parse_ranking("1. Security 2. Tradition 3. Benevolence 4. Power", &tax(), ParseMode::Basic)
            .unwrap();
        assert_eq!(ids(&r), ["security", "tradition", "benevolence", "power"]);
    }

    #[test]
    fn json_block_wins() {
        let text = "Power matters most... 1. Power 2. Hedonism 3. Tradition\n```json\n{\"ranking\": [\"Self-Direction\", \"Universalism\", \"security\"]}\n```";
        let p = parse_ranking_detailed(text, &tax(), ParseMode::Basic).unwrap();
        assert_eq!(p.layer, ParseLayer::StructuredBlock);
        assert_eq!(ids(&p.ranking), ["self-direction", "universalism", "security"]);
    }

    #[test]
    fn markdown_list_with_explanations() {
        let text = "Here is my ranking:\n\n1. **Self direction** - she values independence and security less.\n2. **Benevolence**: helps family.\n3) Achievement\n";
        let p = parse_ranking_detailed(text, &tax(), ParseMode::Basic).unwrap();
        assert_eq!(p.layer, ParseLayer::EnumeratedList);
        assert_eq!(ids(&p.ranking), ["self-direction", "benevolence", "achievement"]);
    }

    #[test]
    fn prose_first_mentions() {
        let text = "The interviewee cares deeply about benevolence toward neighbours. Tradition shapes her routines, \
                    while security of the family is a recurring worry. Benevolence again... Some hedonism shows too.";
        let p = parse_ranking_detailed(text, &tax(), ParseMode::Basic).unwrap();
        assert_eq!(p.layer, ParseLayer::FirstMention);
        assert_eq!(ids(&p.ranking), ["benevolence", "tradition", "security", "hedonism"]);
    }

    #[test]
    fn too_few_values_fails_with_tokens() {
        let f = parse_ranking("Security first, then power.", &tax(), ParseMode::Basic).unwrap_err();
        assert_eq!(f.recognized, ["security", "power"]);
    }

    #[test]
    fn subvalue_mode_maps_to_basic() {
        let text = "1. Family security\n2. Honest\n3. Helpful\n4. Wealth\n5. Creativity";
        let r = parse_ranking(text, &tax(), ParseMode::Subvalue).unwrap();
        assert_eq!(r.items()[0].as_str(), "security");
        assert_eq!(r.items()[1].as_str(), "benevolence");
        assert!(r.contains(&"power".into()));
    }

    #[test]
    fn longest_phrase_wins() {
        let r = parse_ranking(
            "1. National security\n2. Social power\n3. Wealth\n4. Creativity",
            &tax(),
            ParseMode::Subvalue,
        )
        .unwrap();
        assert_eq!(ids(&r), ["security", "power", "self-direction"]);
    }

    #[test]
    fn render_is_idempotent() {
        let r = Ranking::from_names(&[
            "self-direction", "power", "security", "universalism", "hedonism", "achievement",
            "stimulation", "conformity", "tradition", "benevolence",
        ])
        .unwrap();
        let text = render_ranking(&r);
        assert!(text.starts_with("1. Self-Direction\n2. Power\n"));
        assert_eq!(parse_ranking(&text, &tax(), ParseMode::Basic).unwrap(), r);
    }

    #[test]
    fn degenerate_detection() {
        assert_eq!(detect_degenerate("  \n"), Some(Degeneracy::Empty));
        assert_eq!(detect_degenerate("A normal answer."), None);
        let unit = "the the the values. ";
        assert_eq!(unit.chars().count(), 20);
        let looped = format!("Intro text. {}", unit.repeat(10));
        assert!(matches!(detect_degenerate(&looped), Some(Degeneracy::Repetition { .. })));
        let almost = format!("Intro text. {}", unit.repeat(9));
        assert_eq!(detect_degenerate(&almost), None);
        assert!(detect_degenerate(&"ab".repeat(150)).is_some());
    }
}
