//! On-disk formats for predictions, reports, histograms and sample files.
//!
//! Token sequences are stored space-joined, same as the TAP files; every
//! writer produces byte-identical output for identical input.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::OverlapReport;
use super::report::{EvalReport, PredictionRecord};
use super::sample::ImperfectPrediction;
use super::EvalError;

#[derive(Serialize, Deserialize)]
struct PredictionLine {
    id: String,
    candidates: Vec<String>,
    log_probs: Vec<f64>,
}

fn split(joined: &str) -> Vec<String> {
    joined.split_whitespace().map(String::from).collect()
}

pub fn write_predictions(path: &Path, records: &[PredictionRecord]) -> Result<(), EvalError> {
    let mut out = BufWriter::new(File::create(path)?);
    for record in records {
        let line = PredictionLine {
            id: record.id.clone(),
            candidates: record.candidates.iter().map(|c| c.join(" ")).collect(),
            log_probs: record.log_probs.clone(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>, EvalError> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: PredictionLine =
            serde_json::from_str(&line).map_err(|e| EvalError::BadLine {
                line: idx + 1,
                reason: e.to_string(),
            })?;
        if parsed.candidates.len() != parsed.log_probs.len() {
            return Err(EvalError::BadLine {
                line: idx + 1,
                reason: format!(
                    "{} candidates but {} log probabilities",
                    parsed.candidates.len(),
                    parsed.log_probs.len()
                ),
            });
        }
        records.push(PredictionRecord {
            id: parsed.id,
            candidates: parsed.candidates.iter().map(|c| split(c)).collect(),
            log_probs: parsed.log_probs,
        });
    }
    Ok(records)
}

pub fn write_eval_report(path: &Path, report: &EvalReport) -> Result<(), EvalError> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_eval_report(path: &Path) -> Result<EvalReport, EvalError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub fn write_overlap_report(path: &Path, report: &OverlapReport) -> Result<(), EvalError> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// The edit-distance histogram as `distance,count` CSV, ascending.
pub fn write_histogram_csv(path: &Path, report: &EvalReport) -> Result<(), EvalError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "distance,count")?;
    for (distance, count) in &report.edit_distance_histogram {
        writeln!(out, "{distance},{count}")?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct SampleLine {
    id: String,
    prediction: String,
    gold: String,
}

pub fn write_samples(path: &Path, samples: &[ImperfectPrediction]) -> Result<(), EvalError> {
    let mut out = BufWriter::new(File::create(path)?);
    for sample in samples {
        let line = SampleLine {
            id: sample.id.clone(),
            prediction: sample.prediction.join(" "),
            gold: sample.gold.join(" "),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_samples(path: &Path) -> Result<Vec<ImperfectPrediction>, EvalError> {
    let reader = BufReader::new(File::open(path)?);
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: SampleLine = serde_json::from_str(&line).map_err(|e| EvalError::BadLine {
            line: idx + 1,
            reason: e.to_string(),
        })?;
        samples.push(ImperfectPrediction {
            id: parsed.id,
            prediction: split(&parsed.prediction),
            gold: split(&parsed.gold),
        });
    }
    Ok(samples)
}
