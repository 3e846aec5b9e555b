//! Shared flag enums and helpers used by several subcommands.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;

use textmix::corpus::{PosClass, TextNorm, Unit, VocabFilterConfig};
use textmix::{Error, Result};

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitArg {
    Sentence,
    Document,
}

impl From<UnitArg> for Unit {
    fn from(value: UnitArg) -> Unit {
        match value {
            UnitArg::Sentence => Unit::Sentence,
            UnitArg::Document => Unit::Document,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PosArg {
    Adjective,
    Adverb,
    Verb,
    Noun,
}

impl From<PosArg> for PosClass {
    fn from(value: PosArg) -> PosClass {
        match value {
            PosArg::Adjective => PosClass::Adjective,
            PosArg::Adverb => PosClass::Adverb,
            PosArg::Verb => PosClass::Verb,
            PosArg::Noun => PosClass::Noun,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionArg {
    /// Tokens the AI reference over-uses (largest q/p first).
    Ai,
    /// Tokens the human reference over-uses (smallest q/p first).
    Human,
}

/// Load an exclusion file: one lowercase token per line, `#` comments allowed.
pub fn load_exclusions(path: &Path) -> Result<BTreeSet<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_lowercase())
        .collect())
}

pub fn build_filter(
    lexicon: &Path,
    pos: PosArg,
    exclude: Option<&PathBuf>,
    min_token_len: usize,
    keep_case: bool,
) -> Result<VocabFilterConfig> {
    let mut filter = VocabFilterConfig::new(lexicon);
    filter.pos_class = pos.into();
    filter.min_token_len = min_token_len;
    filter.lowercase = !keep_case;
    if let Some(path) = exclude {
        filter.exclusion_list = load_exclusions(path)?;
    }
    filter.validate()?;
    Ok(filter)
}

pub fn text_norm(min_token_len: usize, keep_case: bool) -> TextNorm {
    TextNorm {
        lowercase: !keep_case,
        min_token_len,
    }
}

/// Parse a grid flag: either `start:end:step` or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let invalid = |msg: &str| Error::InvalidConfig(format!("grid {spec:?}: {msg}"));
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(invalid("expected start:end:step"));
        }
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| invalid("not a number"));
        let (start, end, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if step.is_nan() || step <= 0.0 || end < start {
            return Err(invalid("need step > 0 and end >= start"));
        }
        let count = ((end - start) / step).round() as usize;
        (0..=count)
            .map(|i| {
                // kill accumulated binary noise like 0.07500000000000001
                let v = start + i as f64 * step;
                (v * 1e10).round() / 1e10
            })
            .filter(|&v| v <= end + 1e-10)
            .collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| invalid("not a number")))
            .collect::<Result<Vec<f64>>>()?
    };
    if values.is_empty() {
        return Err(invalid("empty grid"));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_grid_has_inclusive_endpoints() {
        let grid = parse_grid("0:0.25:0.025").unwrap();
        assert_eq!(grid.len(), 11);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[3], 0.075);
        assert_eq!(*grid.last().unwrap(), 0.25);
    }

    #[test]
    fn list_grid_parses_values() {
        assert_eq!(parse_grid("0,0.1,0.2").unwrap(), vec![0.0, 0.1, 0.2]);
        assert_eq!(parse_grid("0.1").unwrap(), vec![0.1]);
    }

    #[test]
    fn malformed_grids_are_rejected() {
        assert!(parse_grid("0:0.25").is_err());
        assert!(parse_grid("0:0.25:0").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("0.3:0.1:0.1").is_err());
    }
}
