//! TAP serialization: JSON Lines, one object per pair, LF-terminated.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MinerError, TapRecord};

/// On-disk shape of one TAP: token sequences are space-joined strings.
#[derive(Debug, Serialize, Deserialize)]
struct TapLine {
    id: String,
    context: String,
    target: String,
    focal_signature: Option<String>,
}

impl From<&TapRecord> for TapLine {
    fn from(tap: &TapRecord) -> Self {
        TapLine {
            id: tap.id.clone(),
            context: tap.context_tokens.join(" "),
            target: tap.target_tokens.join(" "),
            focal_signature: tap.focal_signature.clone(),
        }
    }
}

impl TapLine {
    fn into_record(self) -> TapRecord {
        TapRecord {
            id: self.id,
            context_tokens: self.context.split_whitespace().map(String::from).collect(),
            target_tokens: self.target.split_whitespace().map(String::from).collect(),
            focal_signature: self.focal_signature,
        }
    }
}

/// Writes TAPs as JSON Lines.
pub fn write_taps(path: &Path, taps: &[TapRecord]) -> Result<(), MinerError> {
    let file = fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    for tap in taps {
        serde_json::to_writer(&mut out, &TapLine::from(tap))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a JSON Lines TAP file written by [`write_taps`].
pub fn read_taps(path: &Path) -> Result<Vec<TapRecord>, MinerError> {
    let file = fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut taps = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TapLine =
            serde_json::from_str(&line).map_err(|e| MinerError::BadTapLine {
                line: i + 1,
                reason: e.to_string(),
            })?;
        taps.push(parsed.into_record());
    }
    Ok(taps)
}
