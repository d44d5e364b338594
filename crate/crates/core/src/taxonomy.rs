//! The value taxonomy: basic values, nuanced subvalues and the mapping
//! between them.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::{Ranking, ValueId};

pub const BUNDLED_TAXONOMY: &str = include_str!("../data/schwartz_taxonomy.toml");

pub const EXPECTED_BASIC: usize = 10;
pub const EXPECTED_SUBVALUES: usize = 58;

/// On-disk shape of a taxonomy document (TOML or JSON).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaxonomyDoc {
    #[serde(default)]
    pub version: Option<String>,
    pub basic_values: Vec<String>,
    #[serde(default)]
    pub subvalues: Vec<SubvalueDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubvalueDoc {
    pub id: String,
    pub basic: String,
}

/// Cardinality checking when loading a taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// Exactly 10 basic values and 58 subvalues.
    #[default]
    Strict,
    /// Any non-zero counts; mismatches become warnings.
    Permissive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueTaxonomy {
    version: Option<String>,
    basic_values: Vec<ValueId>,
    subvalues: Vec<ValueId>,
    subvalue_to_basic: BTreeMap<ValueId, ValueId>,
    warnings: Vec<String>,
}

impl ValueTaxonomy {
    /// The shipped 10/58 Schwartz taxonomy.
    pub fn bundled() -> Self {
        Self::from_toml(BUNDLED_TAXONOMY, LoadMode::Strict).expect("bundled taxonomy is valid")
    }

    pub fn from_toml(text: &str, mode: LoadMode) -> Result<Self> {
        let doc: TaxonomyDoc = toml::from_str(text)?;
        Self::from_doc(doc, mode)
    }

    pub fn from_json(text: &str, mode: LoadMode) -> Result<Self> {
        let doc: TaxonomyDoc = serde_json::from_str(text)?;
        Self::from_doc(doc, mode)
    }

    /// Loads a `.toml` or `.json` taxonomy file.
    pub fn load(path: &Path, mode: LoadMode) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&text, mode),
            _ => Self::from_toml(&text, mode),
        }
    }

    pub fn from_doc(doc: TaxonomyDoc, mode: LoadMode) -> Result<Self> {
        let mut warnings = Vec::new();
        let mut seen = BTreeSet::new();

        let mut basic_values = Vec::with_capacity(doc.basic_values.len());
        for raw in &doc.basic_values {
            let id = ValueId::new(raw);
            if id.as_str().is_empty() {
                return Err(Error::Taxonomy("empty basic value identifier".into()));
            }
            if !seen.insert(id.clone()) {
                return Err(Error::DuplicateId(id.to_string()));
            }
            basic_values.push(id);
        }
        let basic_set: BTreeSet<&ValueId> = basic_values.iter().collect();

        let mut subvalues = Vec::with_capacity(doc.subvalues.len());
        let mut subvalue_to_basic = BTreeMap::new();
        for sv in &doc.subvalues {
            let id = ValueId::new(&sv.id);
            let basic = ValueId::new(&sv.basic);
            if id.as_str().is_empty() {
                return Err(Error::Taxonomy("empty subvalue identifier".into()));
            }
            if !seen.insert(id.clone()) {
                return Err(Error::DuplicateId(id.to_string()));
            }
            if !basic_set.contains(&basic) {
                return Err(Error::Taxonomy(format!(
                    "subvalue `{id}` maps to unknown basic value `{basic}`"
                )));
            }
            subvalue_to_basic.insert(id.clone(), basic);
            subvalues.push(id);
        }

        if basic_values.is_empty() {
            return Err(Error::Taxonomy("no basic values".into()));
        }
        let counts_ok =
            basic_values.len() == EXPECTED_BASIC && subvalues.len() == EXPECTED_SUBVALUES;
        if !counts_ok {
            let msg = format!(
                "expected {EXPECTED_BASIC} basic values and {EXPECTED_SUBVALUES} subvalues, found {} and {}",
                basic_values.len(),
                subvalues.len()
            );
            match mode {
                LoadMode::Strict => return Err(Error::Taxonomy(msg)),
                LoadMode::Permissive => warnings.push(msg),
            }
        }

        Ok(ValueTaxonomy {
            version: doc.version,
            basic_values,
            subvalues,
            subvalue_to_basic,
            warnings,
        })
    }

    pub fn to_doc(&self) -> TaxonomyDoc {
        TaxonomyDoc {
            version: self.version.clone(),
            basic_values: self.basic_values.iter().map(|v| v.to_string()).collect(),
            subvalues: self
                .subvalues
                .iter()
                .map(|s| SubvalueDoc {
                    id: s.to_string(),
                    basic: self.subvalue_to_basic[s].to_string(),
                })
                .collect(),
        }
    }

    pub fn version(&self) -> Option<&str> {
        self.version.as_deref()
    }

    pub fn basic_values(&self) -> &[ValueId] {
        &self.basic_values
    }

    pub fn subvalues(&self) -> &[ValueId] {
        &self.subvalues
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn basic_of(&self, subvalue: &ValueId) -> Option<&ValueId> {
        self.subvalue_to_basic.get(subvalue)
    }

    /// Position of a basic value in taxonomy order.
    pub fn index_of(&self, value: &ValueId) -> Option<usize> {
        self.basic_values.iter().position(|v| v == value)
    }

    pub fn is_basic(&self, value: &ValueId) -> bool {
        self.index_of(value).is_some()
    }

    pub fn validate_ranking(&self, ranking: &Ranking) -> Result<()> {
        match ranking.items().iter().find(|v| !self.is_basic(v)) {
            Some(v) => Err(Error::UnknownValue(v.to_string())),
            None => Ok(()),
        }
    }

    /// Collapses a ranked list of subvalues onto basic values, ordering
    /// each basic value by the first occurrence of any of its subvalues.
    pub fn map_subvalues_to_basic(&self, subvalue_ranking: &[ValueId]) -> Result<Ranking> {
        if subvalue_ranking.is_empty() {
            return Err(Error::Empty("subvalue ranking"));
        }
        let mut out: Vec<ValueId> = Vec::new();
        for sv in subvalue_ranking {
            let basic = self
                .basic_of(sv)
                .ok_or_else(|| Error::UnknownSubvalue(sv.to_string()))?;
            if !out.contains(basic) {
                out.push(basic.clone());
            }
        }
        Ranking::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = r#"
basic_values = ["A", "B", "C"]
subvalues = [
  { id = "sv1", basic = "a" },
  { id = "sv2", basic = "b" },
  { id = "sv3", basic = "a" },
  { id = "sv4", basic = "c" },
  { id = "sv5", basic = "b" },
  { id = "sv6", basic = "c" },
]
"#;

    fn ids(names: &[&str]) -> Vec<ValueId> {
        names.iter().map(|n| ValueId::new(n)).collect()
    }

    #[test]
    fn bundled_has_ten_and_fifty_eight() {
        let t = ValueTaxonomy::bundled();
        assert_eq!(t.basic_values().len(), 10);
        assert_eq!(t.subvalues().len(), 58);
        assert!(t.warnings().is_empty());
        for sv in t.subvalues() {
            assert!(t.is_basic(t.basic_of(sv).unwrap()));
        }
    }

    #[test]
    fn loading_is_idempotent() {
        let t = ValueTaxonomy::bundled();
        let again =
            ValueTaxonomy::from_json(&serde_json::to_string(&t.to_doc()).unwrap(), LoadMode::Strict)
                .unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn toy_taxonomy_needs_permissive_mode() {
        assert!(ValueTaxonomy::from_toml(TOY, LoadMode::Strict).is_err());
        let t = ValueTaxonomy::from_toml(TOY, LoadMode::Permissive).unwrap();
        assert_eq!(t.basic_values(), ids(&["a", "b", "c"]).as_slice());
        assert_eq!(t.warnings().len(), 1);
    }

    #[test]
    fn unknown_basic_is_rejected() {
        let doc = r#"
basic_values = ["security"]
subvalues = [{ id = "thrift", basic = "wealth" }]
"#;
        let err = ValueTaxonomy::from_toml(doc, LoadMode::Permissive).unwrap_err();
        assert!(err.to_string().contains("wealth"), "{err}");
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let doc = r#"basic_values = ["Power", "power "]"#;
        assert!(matches!(
            ValueTaxonomy::from_toml(doc, LoadMode::Permissive),
            Err(Error::DuplicateId(_))
        ));
        let doc = r#"
basic_values = ["power"]
subvalues = [{ id = "power", basic = "power" }]
"#;
        assert!(ValueTaxonomy::from_toml(doc, LoadMode::Permissive).is_err());
    }

    #[test]
    fn first_occurrence_collapse() {
        let t = ValueTaxonomy::from_toml(TOY, LoadMode::Permissive).unwrap();
        let r = t.map_subvalues_to_basic(&ids(&["sv1", "sv2", "sv3"])).unwrap();
        assert_eq!(r.items(), ids(&["a", "b"]).as_slice());

        // sv6->c, sv1->a, sv4->c (dup), sv5->b, sv3->a (dup), sv2->b (dup)
        let r = t
            .map_subvalues_to_basic(&ids(&["sv6", "sv1", "sv4", "sv5", "sv3", "sv2"]))
            .unwrap();
        assert_eq!(r.items(), ids(&["c", "a", "b"]).as_slice());

        assert!(matches!(t.map_subvalues_to_basic(&[]), Err(Error::Empty(_))));
        assert!(matches!(
            t.map_subvalues_to_basic(&ids(&["nope"])),
            Err(Error::UnknownSubvalue(_))
        ));
    }

    #[test]
    fn prepending_moves_basic_to_front() {
        let t = ValueTaxonomy::bundled();
        let base = ids(&["wealth", "humble", "curious", "helpful"]);
        let before = t.map_subvalues_to_basic(&base).unwrap();
        for sv in t.subvalues() {
            let mut list = vec![sv.clone()];
            list.extend(base.iter().cloned());
            let after = t.map_subvalues_to_basic(&list).unwrap();
            let x = t.basic_of(sv).unwrap();
            assert_eq!(&after.items()[0], x);
            if &before.items()[0] == x {
                assert_eq!(after, before);
            }
        }
    }
}
