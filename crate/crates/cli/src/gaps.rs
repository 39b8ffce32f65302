//! Gap inputs: `--gap start:length` arguments and the JSON sidecar
//! `{ "gaps": [{"start": s, "length": h}], "sample_rate": r }` (1-based).

use std::path::Path;

use gapfill_core::gap::GapSpec;
use serde::{Deserialize, Serialize};

use crate::errors::{CliError, Result};

#[derive(Debug, Serialize, Deserialize)]
pub struct SidecarGap {
    pub start: usize,
    pub length: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Sidecar {
    pub gaps: Vec<SidecarGap>,
    pub sample_rate: u32,
}

pub fn parse_gap_arg(s: &str) -> Result<GapSpec> {
    let bad = || CliError::Usage(format!("gap '{s}': expected start:length, 1-based"));
    let (start, length) = s.split_once(':').ok_or_else(bad)?;
    let start: usize = start.trim().parse().map_err(|_| bad())?;
    let length: usize = length.trim().parse().map_err(|_| bad())?;
    GapSpec::from_start_len(start, length).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn load_sidecar(path: &Path, wav_rate: u32) -> Result<Vec<GapSpec>> {
    let text = std::fs::read_to_string(path)?;
    let sidecar: Sidecar = serde_json::from_str(&text)?;
    if sidecar.sample_rate != wav_rate {
        eprintln!(
            "warning: sidecar sample rate {} differs from WAV rate {wav_rate}",
            sidecar.sample_rate
        );
    }
    sidecar
        .gaps
        .iter()
        .map(|g| {
            GapSpec::from_start_len(g.start, g.length).map_err(|e| CliError::Io(e.to_string()))
        })
        .collect()
}
