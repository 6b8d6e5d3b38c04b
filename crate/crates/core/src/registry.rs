//! Case registry: every shipped formula instance plus the expected table rows.
//!
//! File format is a JSON array; rationals are "p/q" strings and `rhs` is an expression string
//! (see `algebra::expr`) carrying an implicit division by pi.

use crate::algebra::RhsExpr;
use crate::error::{Error, Result};
use crate::series::SeriesFamily;
use rug::Rational;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

static SHIPPED: &str = include_str!("../data/registry.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseStatus {
    ConjectureProvedHere,
    PreviouslyProved,
    Open,
}

/// Exact cells of one table row, in the order the table prints them.
///
/// `arg` holds z+- for P and the printed sqrt(-f+-) column for W.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub table: u8,
    pub h: String,
    pub arg: [String; 2],
    pub tau: [String; 2],
    pub b: [String; 2],
    pub c: [String; 2],
    pub yratio: [String; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub id: String,
    pub family: SeriesFamily,
    #[serde(with = "rational_str")]
    pub t: Rational,
    #[serde(with = "rational_str")]
    pub x: Rational,
    #[serde(with = "rational_str")]
    pub b: Rational,
    pub rhs: RhsExpr,
    pub status: CaseStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_row: Option<TableRow>,
}

pub mod rational_str {
    use rug::Rational;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(D::Error::custom)
    }

    pub fn parse(s: &str) -> Result<Rational, String> {
        Rational::parse(s.trim()).map(Rational::from).map_err(|e| format!("bad rational {s:?}: {e}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CaseRegistry {
    pub cases: Vec<CaseSpec>,
}

impl CaseRegistry {
    pub fn shipped() -> CaseRegistry {
        CaseRegistry::from_json(SHIPPED).expect("shipped registry is valid")
    }

    pub fn from_json(s: &str) -> Result<CaseRegistry> {
        let reg: CaseRegistry = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        reg.validate()?;
        Ok(reg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("registry serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for c in &self.cases {
            if !seen.insert(c.id.as_str()) {
                return Err(Error::Parse(format!("duplicate case id {}", c.id)));
            }
            if c.status != CaseStatus::Open && !c.family.evidence_only() && c.expected_row.is_none() {
                return Err(Error::Parse(format!("case {} needs an expected_row", c.id)));
            }
            if c.family.evidence_only() && c.status != CaseStatus::Open {
                return Err(Error::Parse(format!("case {}: family {} can only be open", c.id, c.family)));
            }
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&CaseSpec> {
        self.cases.iter().find(|c| c.id == id).ok_or_else(|| Error::UnknownCase(id.to_string()))
    }

    pub fn ids(&self) -> Vec<&str> {
        self.cases.iter().map(|c| c.id.as_str()).collect()
    }

    /// Rows of table 1, 2 or 3 in registry order.
    pub fn table(&self, n: u8) -> Vec<&CaseSpec> {
        self.cases.iter().filter(|c| c.expected_row.as_ref().is_some_and(|r| r.table == n)).collect()
    }
}
