//! Value identifiers, rankings and their top-k prefixes.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slugified, lowercase identifier of a value (basic or nuanced).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValueId(String);

impl ValueId {
    /// Normalizes `raw` into a slug: lowercase, runs of whitespace,
    /// underscores and hyphens collapsed into a single `-`.
    pub fn new(raw: &str) -> Self {
        ValueId(slugify(raw))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Human-readable label, e.g. `self-direction` -> `Self-Direction`.
    pub fn display_name(&self) -> String {
        self.0
            .split('-')
            .map(|w| {
                let mut c = w.chars();
                match c.next() {
                    Some(f) => f.to_uppercase().chain(c).collect::<String>(),
                    None => String::new(),
                }
            })
            .collect::<Vec<_>>()
            .join("-")
    }
}

impl fmt::Display for ValueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ValueId {
    fn from(s: &str) -> Self {
        ValueId::new(s)
    }
}

pub(crate) fn slugify(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_sep = false;
    for ch in raw.trim().chars() {
        if ch.is_whitespace() || ch == '-' || ch == '_' {
            pending_sep = !out.is_empty();
            continue;
        }
        if pending_sep {
            out.push('-');
            pending_sep = false;
        }
        out.extend(ch.to_lowercase());
    }
    out
}

/// An ordered, duplicate-free, non-empty list of values, most important first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<ValueId>", into = "Vec<ValueId>")]
pub struct Ranking {
    items: Vec<ValueId>,
}

impl Ranking {
    pub fn new(items: Vec<ValueId>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::Empty("ranking"));
        }
        let mut seen = BTreeSet::new();
        for item in &items {
            if !seen.insert(item) {
                return Err(Error::InvalidRanking(format!("duplicate item `{item}`")));
            }
        }
        Ok(Ranking { items })
    }

    /// Builds a ranking from raw names, normalizing each.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        Ranking::new(names.iter().map(|n| ValueId::new(n.as_ref())).collect())
    }

    pub fn items(&self) -> &[ValueId] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Zero-based position of `value`, if ranked.
    pub fn position(&self, value: &ValueId) -> Option<usize> {
        self.items.iter().position(|v| v == value)
    }

    pub fn contains(&self, value: &ValueId) -> bool {
        self.items.contains(value)
    }

    /// The ranking truncated to its first `len` items.
    pub fn prefix(&self, len: usize) -> Result<Ranking> {
        if len == 0 || len > self.items.len() {
            return Err(Error::KTooLarge {
                k: len,
                len: self.items.len(),
            });
        }
        Ok(Ranking {
            items: self.items[..len].to_vec(),
        })
    }

    pub fn top_k(&self, k: usize) -> Result<TopKSet> {
        top_k(self, k)
    }
}

impl TryFrom<Vec<ValueId>> for Ranking {
    type Error = Error;

    fn try_from(items: Vec<ValueId>) -> Result<Self> {
        Ranking::new(items)
    }
}

impl From<Ranking> for Vec<ValueId> {
    fn from(r: Ranking) -> Self {
        r.items
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.items.iter().map(ValueId::as_str).collect();
        write!(f, "({})", names.join(", "))
    }
}

/// Unordered first-k members of a ranking.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TopKSet {
    k: usize,
    members: BTreeSet<ValueId>,
}

impl TopKSet {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn members(&self) -> &BTreeSet<ValueId> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: &ValueId) -> bool {
        self.members.contains(v)
    }

    pub fn intersection_len(&self, other: &TopKSet) -> usize {
        self.members.intersection(&other.members).count()
    }

    pub fn union_len(&self, other: &TopKSet) -> usize {
        self.members.union(&other.members).count()
    }

    /// Builds a set directly from members; `k` is the member count.
    pub fn from_members(members: impl IntoIterator<Item = ValueId>) -> Self {
        let members: BTreeSet<ValueId> = members.into_iter().collect();
        TopKSet {
            k: members.len(),
            members,
        }
    }
}

/// The set of the first `k` items of `ranking`.
pub fn top_k(ranking: &Ranking, k: usize) -> Result<TopKSet> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if k > ranking.len() {
        return Err(Error::KTooLarge {
            k,
            len: ranking.len(),
        });
    }
    Ok(TopKSet {
        k,
        members: ranking.items[..k].iter().cloned().collect(),
    })
}

/// Top-k with depth clipped to the ranking length (lenient scoring of
/// partial model output).
pub fn top_k_clipped(ranking: &Ranking, k: usize) -> TopKSet {
    let k = k.min(ranking.len()).max(1);
    TopKSet {
        k,
        members: ranking.items[..k].iter().cloned().collect(),
    }
}
