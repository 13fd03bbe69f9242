//! `abstract`: raw TAP files in, abstracted TAP files out, with an
//! in-command round-trip check so a broken map never reaches training.

use std::collections::BTreeMap;
use std::fs;

use assertgen_core::abstractor::{
    abstract_corpus, read_vocabulary, unabstract, write_abstract_taps, AbstractionReport,
    DEFAULT_CATEGORY_CAP,
};
use assertgen_core::miner::{read_taps, TapRecord};

use crate::config::PipelineConfig;
use crate::error::{with_path, CliError};

use super::{taps_path, SPLITS};

pub fn run(config: &PipelineConfig) -> Result<(), CliError> {
    let raw_dir = config.output_dir.join("raw");
    let vocab_path = raw_dir.join("vocab.json");
    let idioms = with_path(read_vocabulary(&vocab_path), &vocab_path)?;

    let out_dir = config.output_dir.join("abstract");
    fs::create_dir_all(&out_dir)?;

    let mut reports: BTreeMap<&str, AbstractionReport> = BTreeMap::new();
    for split in SPLITS {
        let in_path = taps_path(&raw_dir, split);
        let taps = with_path(read_taps(&in_path), &in_path)?;
        let by_id: BTreeMap<&str, &TapRecord> =
            taps.iter().map(|t| (t.id.as_str(), t)).collect();

        let (abstracted, report) = abstract_corpus(&taps, &idioms, DEFAULT_CATEGORY_CAP);

        // Round-trip check: mapping back through the stored per-TAP map
        // must reproduce the raw tokens exactly, with nothing unresolved.
        for tap in &abstracted {
            let raw = by_id[tap.raw_id.as_str()];
            let (context, unresolved_c) = unabstract(&tap.context_tokens, &tap.map);
            let (target, unresolved_t) = unabstract(&tap.target_tokens, &tap.map);
            if !unresolved_c.is_empty() || !unresolved_t.is_empty() {
                return Err(CliError::Integrity(format!(
                    "abstraction of TAP {} left unresolved placeholders: {:?}",
                    tap.raw_id,
                    [unresolved_c, unresolved_t].concat()
                )));
            }
            if context != raw.context_tokens || target != raw.target_tokens {
                return Err(CliError::Integrity(format!(
                    "abstraction round-trip mismatch for TAP {}",
                    tap.raw_id
                )));
            }
        }

        write_abstract_taps(&taps_path(&out_dir, split), &abstracted)?;
        println!(
            "{split}: {} of {} TAPs abstracted ({} over the index cap, {} duplicates)",
            report.kept, report.input_count, report.dropped_cap_exceeded, report.dropped_duplicate
        );
        reports.insert(split, report);
    }

    let mut json = serde_json::to_string_pretty(&reports)?;
    json.push('\n');
    fs::write(out_dir.join("abstraction_report.json"), json)?;
    Ok(())
}
