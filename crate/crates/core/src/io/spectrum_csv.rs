//! Spectrum files: a typed `#` header followed by two comma-separated columns.
//!
//! ```text
//! # kind: transmission
//! # stage: instrumented
//! # detuning_unit: MHz
//! detuning,value
//! -60,0.9981
//! ```
//!
//! `detuning_unit` is `MHz` (cyclic) or `rad/s`. Cross-section values are m².
//! Extra `# key: value` lines are kept as metadata.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::constants::{mhz_to_rad, rad_to_mhz};
use crate::error::{read_to_string, Error, Result};
use crate::lineshape::{SpectrumTrace, Stage, ValueKind};

use super::write_atomic;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetuningUnit {
    MHz,
    RadPerSecond,
}

impl DetuningUnit {
    fn label(self) -> &'static str {
        match self {
            DetuningUnit::MHz => "MHz",
            DetuningUnit::RadPerSecond => "rad/s",
        }
    }
}

impl FromStr for DetuningUnit {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "MHz" => Ok(DetuningUnit::MHz),
            "rad/s" => Ok(DetuningUnit::RadPerSecond),
            _ => Err(format!("unknown detuning unit `{s}` (expected MHz or rad/s)")),
        }
    }
}

fn parse_kind(s: &str) -> std::result::Result<ValueKind, String> {
    match s {
        "transmission" => Ok(ValueKind::Transmission),
        "cross_section" => Ok(ValueKind::CrossSection),
        _ => Err(format!("unknown value kind `{s}` (expected transmission or cross_section)")),
    }
}

fn parse_stage(s: &str) -> std::result::Result<Stage, String> {
    match s {
        "ideal" => Ok(Stage::Ideal),
        "instrumented" => Ok(Stage::Instrumented),
        _ => Err(format!("unknown stage `{s}` (expected ideal or instrumented)")),
    }
}

/// A trace plus whatever extra header fields came with it.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumFile {
    pub trace: SpectrumTrace,
    pub metadata: BTreeMap<String, String>,
}

pub fn format_spectrum(trace: &SpectrumTrace, unit: DetuningUnit, metadata: &BTreeMap<String, String>) -> String {
    let mut s = String::with_capacity(32 * trace.len() + 128);
    let _ = writeln!(s, "# kind: {}", trace.kind);
    let _ = writeln!(s, "# stage: {}", trace.stage);
    let _ = writeln!(s, "# detuning_unit: {}", unit.label());
    for (k, v) in metadata {
        let _ = writeln!(s, "# {k}: {v}");
    }
    s.push_str("detuning,value\n");
    for (d, v) in trace.detuning.iter().zip(&trace.value) {
        let d = match unit {
            DetuningUnit::MHz => rad_to_mhz(*d),
            DetuningUnit::RadPerSecond => *d,
        };
        let _ = writeln!(s, "{d:?},{v:?}");
    }
    s
}

pub fn parse_spectrum(text: &str) -> Result<SpectrumFile> {
    let mut kind = None;
    let mut stage = None;
    let mut unit = None;
    let mut metadata = BTreeMap::new();
    let mut header_seen = false;
    let mut detuning = Vec::new();
    let mut value = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('#') {
            if header_seen {
                continue;
            }
            let Some((k, v)) = rest.split_once(':') else { continue };
            let (k, v) = (k.trim(), v.trim());
            match k {
                "kind" => kind = Some(parse_kind(v).map_err(|m| Error::parse(line, m))?),
                "stage" => stage = Some(parse_stage(v).map_err(|m| Error::parse(line, m))?),
                "detuning_unit" => unit = Some(v.parse::<DetuningUnit>().map_err(|m| Error::parse(line, m))?),
                _ => {
                    metadata.insert(k.to_string(), v.to_string());
                }
            }
            continue;
        }
        if !header_seen {
            let cols: Vec<&str> = t.split(',').map(str::trim).collect();
            if cols != ["detuning", "value"] {
                return Err(Error::parse(line, format!("expected column header `detuning,value`, got `{t}`")));
            }
            header_seen = true;
            continue;
        }
        let cols: Vec<&str> = t.split(',').map(str::trim).collect();
        if cols.len() != 2 {
            return Err(Error::parse(line, format!("expected 2 columns, found {}", cols.len())));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(line, format!("not a finite number: `{s}`")))
        };
        let d = num(cols[0])?;
        let v = num(cols[1])?;
        if let Some(&prev) = detuning.last() {
            if !(d > prev) {
                return Err(Error::parse(line, format!("detuning {} does not increase (previous {})", cols[0], prev)));
            }
        }
        detuning.push(d);
        value.push(v);
        last_line = line;
    }

    let missing = |what: &str| Error::parse(0, format!("missing `# {what}:` header line"));
    let kind = kind.ok_or_else(|| missing("kind"))?;
    let stage = stage.ok_or_else(|| missing("stage"))?;
    let unit = unit.ok_or_else(|| missing("detuning_unit"))?;
    if !header_seen {
        return Err(Error::parse(0, "missing `detuning,value` column header"));
    }
    if detuning.len() < 2 {
        return Err(Error::parse(last_line, format!("need at least 2 samples, found {}", detuning.len())));
    }
    if unit == DetuningUnit::MHz {
        detuning.iter_mut().for_each(|d| *d = mhz_to_rad(*d));
    }
    let trace = SpectrumTrace::new(detuning, value, kind, stage).map_err(|e| Error::parse(last_line, e.to_string()))?;
    Ok(SpectrumFile { trace, metadata })
}

pub fn read_spectrum(path: &Path) -> Result<SpectrumFile> {
    parse_spectrum(&read_to_string(path)?).map_err(|e| e.with_path(path))
}

pub fn write_spectrum(
    path: &Path,
    trace: &SpectrumTrace,
    unit: DetuningUnit,
    metadata: &BTreeMap<String, String>,
) -> Result<()> {
    write_atomic(path, format_spectrum(trace, unit, metadata).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace() -> SpectrumTrace {
        let d = (0..50).map(|i| mhz_to_rad(-10.0 + 0.37 * i as f64)).collect();
        let v = (0..50).map(|i| 1.0 - 0.5 / (1.0 + (i as f64 - 25.0).powi(2) / 9.0)).collect();
        SpectrumTrace::new(d, v, ValueKind::Transmission, Stage::Instrumented).unwrap()
    }

    #[test]
    fn rad_round_trip_is_exact() {
        let t = trace();
        let mut meta = BTreeMap::new();
        meta.insert("n".to_string(), "44".to_string());
        let f = parse_spectrum(&format_spectrum(&t, DetuningUnit::RadPerSecond, &meta)).unwrap();
        assert_eq!(f.trace, t);
        assert_eq!(f.metadata, meta);
    }

    #[test]
    fn mhz_round_trip_to_rounding() {
        let t = trace();
        let f = parse_spectrum(&format_spectrum(&t, DetuningUnit::MHz, &BTreeMap::new())).unwrap();
        assert_eq!(f.trace.value, t.value);
        for (a, b) in f.trace.detuning.iter().zip(&t.detuning) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let head = "# kind: transmission\n# stage: ideal\n# detuning_unit: MHz\ndetuning,value\n";
        let bad_num = format!("{head}0,1\n1,abc\n");
        assert!(matches!(parse_spectrum(&bad_num), Err(Error::Parse { line: 6, .. })));
        let non_mono = format!("{head}0,1\n1,1\n1,1\n");
        match parse_spectrum(&non_mono) {
            Err(Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 7);
                assert!(msg.contains("does not increase"));
            }
            other => panic!("{other:?}"),
        }
        let bad_unit = "# kind: transmission\n# stage: ideal\n# detuning_unit: GHz\n";
        assert!(matches!(parse_spectrum(bad_unit), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_spectrum("detuning,value\n0,1\n1,1\n"), Err(Error::Parse { .. })));
    }
}
