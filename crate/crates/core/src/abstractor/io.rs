//! Persistence for abstract TAPs and vocabularies.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AbstractTap, AbstractionMap, AbstractorError, Vocabulary, ZipfReport};

/// On-disk shape: token sequences space-joined, map stored forward-only.
#[derive(Debug, Serialize, Deserialize)]
struct AbstractLine {
    raw_id: String,
    context: String,
    target: String,
    map: BTreeMap<String, String>,
}

/// Writes abstract TAPs as JSON Lines.
pub fn write_abstract_taps(path: &Path, taps: &[AbstractTap]) -> Result<(), AbstractorError> {
    let file = fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    for tap in taps {
        let line = AbstractLine {
            raw_id: tap.raw_id.clone(),
            context: tap.context_tokens.join(" "),
            target: tap.target_tokens.join(" "),
            map: tap.map.forward.clone(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a JSON Lines abstract TAP file written by [`write_abstract_taps`].
pub fn read_abstract_taps(path: &Path) -> Result<Vec<AbstractTap>, AbstractorError> {
    let file = fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut taps = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: AbstractLine =
            serde_json::from_str(&line).map_err(|e| AbstractorError::BadLine {
                line: i + 1,
                reason: e.to_string(),
            })?;
        taps.push(AbstractTap {
            raw_id: parsed.raw_id,
            context_tokens: parsed.context.split_whitespace().map(String::from).collect(),
            target_tokens: parsed.target.split_whitespace().map(String::from).collect(),
            map: AbstractionMap::from_forward(parsed.map),
        });
    }
    Ok(taps)
}

/// Writes a vocabulary as `lexeme<TAB>frequency`, one line per rank.
pub fn write_vocabulary(path: &Path, vocab: &Vocabulary) -> Result<(), AbstractorError> {
    let file = fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    for (lexeme, freq) in vocab.entries() {
        writeln!(out, "{lexeme}\t{freq}")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a vocabulary file written by [`write_vocabulary`]. Rank order is
/// the line order.
pub fn read_vocabulary(path: &Path) -> Result<Vocabulary, AbstractorError> {
    let file = fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut entries = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let (lexeme, freq) = line.rsplit_once('\t').ok_or_else(|| AbstractorError::BadLine {
            line: i + 1,
            reason: "expected lexeme<TAB>frequency".to_string(),
        })?;
        let freq: u64 = freq.parse().map_err(|e| AbstractorError::BadLine {
            line: i + 1,
            reason: format!("bad frequency: {e}"),
        })?;
        entries.push((lexeme.to_string(), freq));
    }
    Ok(Vocabulary::from_entries(entries))
}

/// Writes the rank/frequency curve as `rank<TAB>frequency` lines.
pub fn write_zipf_report(path: &Path, report: &ZipfReport) -> Result<(), AbstractorError> {
    let file = fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    for (rank, freq) in report {
        writeln!(out, "{rank}\t{freq}")?;
    }
    out.flush()?;
    Ok(())
}
