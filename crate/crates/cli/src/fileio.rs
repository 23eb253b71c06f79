//! Configuration files: JSON with all rationals as strings, so values
//! survive round trips exactly and no binary float ever touches the data.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use bll_core::{
    parse_rational, rational::format_rational, Configuration, Interval, IntervalUnion,
    MeasureVector, Rational, SetTuple,
};

/// On-disk schema. `sets` is optional: per slot, a list of `[lo, hi]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigFile {
    pub m: usize,
    pub rows: Vec<Vec<String>>,
    pub e: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sets: Option<Vec<Vec<[String; 2]>>>,
}

#[derive(Debug)]
pub struct Loaded {
    pub config: Configuration,
    pub e: MeasureVector,
    pub sets: Option<SetTuple>,
}

fn rational_at(raw: &str, location: String) -> Result<Rational, String> {
    parse_rational(raw).map_err(|_| format!("{location}: invalid rational literal `{raw}`"))
}

pub fn parse_config(path: &Path, text: &str) -> Result<Loaded, String> {
    let file: ConfigFile =
        serde_json::from_str(text).map_err(|e| format!("{}: {}", path.display(), e))?;
    let where_at = |suffix: String| format!("{}: {}", path.display(), suffix);

    let mut rows = Vec::with_capacity(file.rows.len());
    for (j, row) in file.rows.iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (c, entry) in row.iter().enumerate() {
            out.push(rational_at(entry, where_at(format!("rows[{j}][{c}]")))?);
        }
        rows.push(out);
    }
    let config = Configuration::new(file.m, rows).map_err(|e| where_at(format!("rows: {e}")))?;

    let mut e_values = Vec::with_capacity(file.e.len());
    for (j, entry) in file.e.iter().enumerate() {
        e_values.push(rational_at(entry, where_at(format!("e[{j}]")))?);
    }
    if e_values.len() != config.slots() {
        return Err(where_at(format!(
            "e has {} entries, configuration has {} rows",
            e_values.len(),
            config.slots()
        )));
    }
    let e = MeasureVector::new(e_values).map_err(|e| where_at(format!("e: {e}")))?;

    let sets = match &file.sets {
        None => None,
        Some(raw_sets) => {
            if raw_sets.len() != config.slots() {
                return Err(where_at(format!(
                    "sets has {} slots, configuration has {} rows",
                    raw_sets.len(),
                    config.slots()
                )));
            }
            let mut slots = Vec::with_capacity(raw_sets.len());
            for (j, slot) in raw_sets.iter().enumerate() {
                let mut intervals = Vec::with_capacity(slot.len());
                for (k, pair) in slot.iter().enumerate() {
                    let lo = rational_at(&pair[0], where_at(format!("sets[{j}][{k}][0]")))?;
                    let hi = rational_at(&pair[1], where_at(format!("sets[{j}][{k}][1]")))?;
                    if lo > hi {
                        return Err(where_at(format!("sets[{j}][{k}]: lo > hi")));
                    }
                    intervals.push(Interval::new(lo, hi));
                }
                slots.push(IntervalUnion::new(intervals));
            }
            Some(SetTuple::new(slots).map_err(|e| where_at(format!("sets: {e}")))?)
        }
    };

    Ok(Loaded { config, e, sets })
}

pub fn load(path: &Path) -> Result<Loaded, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {}", path.display(), e))?;
    parse_config(path, &text)
}

/// Serializes a configuration back to the file schema; emitted files
/// re-parse to identical in-memory values.
pub fn render_config(config: &Configuration, e: &MeasureVector, sets: Option<&SetTuple>) -> String {
    let file = ConfigFile {
        m: config.dim(),
        rows: config
            .rows()
            .iter()
            .map(|row| row.iter().map(format_rational).collect())
            .collect(),
        e: e.values().iter().map(format_rational).collect(),
        sets: sets.map(|tuple| {
            tuple
                .slots()
                .iter()
                .map(|slot| {
                    slot.components()
                        .iter()
                        .map(|it| [format_rational(&it.lo), format_rational(&it.hi)])
                        .collect()
                })
                .collect()
        }),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("schema serializes");
    text.push('\n');
    text
}

/// Write-then-rename so partially written output never lands at the target.
pub fn write_atomic(path: &Path, content: &str) -> Result<(), String> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, content).map_err(|e| format!("{}: {}", tmp.display(), e))?;
    fs::rename(&tmp, path).map_err(|e| format!("{}: {}", path.display(), e))
}
