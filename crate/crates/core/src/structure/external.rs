//! Imported theory predictions for models whose formulas are not computed here.
//!
//! Table format: whitespace- or comma-delimited rows
//! `n_a l_a j_a n_b l_b j_b value_au`, `#` comments, an optional
//! `# model: NAME` line naming the table. Values are radial matrix elements in
//! atomic units.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::state::RydbergState;
use crate::angular::HalfInteger;
use crate::error::{read_to_string, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalModelTable {
    pub name: String,
    entries: BTreeMap<(RydbergState, RydbergState), f64>,
}

impl ExternalModelTable {
    pub fn new(name: impl Into<String>) -> Self {
        ExternalModelTable { name: name.into(), entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, a: RydbergState, b: RydbergState, value_au: f64) {
        self.entries.insert((a.fine(), b.fine()), value_au);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Radial element for the pair, in either order.
    pub fn lookup(&self, a: &RydbergState, b: &RydbergState) -> Result<f64> {
        let (a, b) = (a.fine(), b.fine());
        self.entries
            .get(&(a, b))
            .or_else(|| self.entries.get(&(b, a)))
            .copied()
            .ok_or_else(|| Error::Lookup(format!("model `{}` has no entry for {a} → {b}", self.name)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RydbergState, &RydbergState, f64)> {
        self.entries.iter().map(|((a, b), v)| (a, b, *v))
    }

    pub fn parse(text: &str, default_name: &str) -> Result<Self> {
        let mut table = ExternalModelTable::new(default_name);
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = raw.trim();
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some(name) = comment.trim().strip_prefix("model:") {
                    table.name = name.trim().to_string();
                }
                continue;
            }
            if trimmed.is_empty() {
                continue;
            }
            let fields: Vec<&str> = trimmed
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            if fields.len() != 7 {
                return Err(Error::parse(line_no, format!("expected 7 columns, found {}", fields.len())));
            }
            let int = |s: &str| -> Result<u32> {
                s.parse().map_err(|_| Error::parse(line_no, format!("bad integer `{s}`")))
            };
            let half = |s: &str| -> Result<HalfInteger> { s.parse().map_err(|e| Error::parse(line_no, e)) };
            let state = |n: &str, l: &str, j: &str| -> Result<RydbergState> {
                RydbergState::new(int(n)?, int(l)?, half(j)?).map_err(|e| Error::parse(line_no, e.to_string()))
            };
            let a = state(fields[0], fields[1], fields[2])?;
            let b = state(fields[3], fields[4], fields[5])?;
            let v: f64 = fields[6]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad value `{}`", fields[6])))?;
            if !v.is_finite() {
                return Err(Error::parse(line_no, "value is not finite"));
            }
            if table.entries.contains_key(&(a, b)) || table.entries.contains_key(&(b, a)) {
                return Err(Error::parse(line_no, format!("duplicate entry {a} → {b}")));
            }
            table.entries.insert((a, b), v);
        }
        Ok(table)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# model: {}\n# n_a l_a j_a n_b l_b j_b value_au\n", self.name);
        for ((a, b), v) in &self.entries {
            out.push_str(&format!("{} {} {} {} {} {} {}\n", a.n, a.l, a.j, b.n, b.l, b.j, v));
        }
        out
    }
}

/// Loads a model table; the file stem names the model unless the file says otherwise.
pub fn load_external_model(path: &Path) -> Result<ExternalModelTable> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("external");
    ExternalModelTable::parse(&read_to_string(path)?, stem).map_err(|e| e.with_path(path))
}
