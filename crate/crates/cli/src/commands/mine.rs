//! `mine`: corpus directory in, filtered and split TAP files out.

use std::fs;

use assertgen_core::abstractor::{build_vocabulary, write_vocabulary, write_zipf_report};
use assertgen_core::miner::{
    filter_taps, mine_corpus, split_dataset, write_taps, FilterReport, MineOptions, MiningStats,
};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::CliError;

use super::taps_path;

/// Everything the mine command counted, for `mine_report.json`.
#[derive(Debug, Serialize)]
struct MineReport {
    stats: MiningStats,
    filter: FilterReport,
    split: SplitSizes,
}

#[derive(Debug, Serialize)]
struct SplitSizes {
    train: usize,
    val: usize,
    test: usize,
}

pub fn run(config: &PipelineConfig) -> Result<(), CliError> {
    let options = MineOptions {
        require_junit4: config.require_junit4,
    };
    let outcome = mine_corpus(&config.corpus_dir, &options)?;
    if outcome.taps.is_empty() {
        return Err(CliError::Input(format!(
            "no test-assert pairs found under {}",
            config.corpus_dir.display()
        )));
    }
    log::info!(
        "mined {} TAPs from {} projects",
        outcome.taps.len(),
        outcome.stats.projects_scanned
    );

    let (vocab, zipf) = build_vocabulary(&outcome.taps, config.vocab_capacity)?;
    let (kept, filter) = filter_taps(outcome.taps, &vocab, config.max_context_tokens);
    if kept.is_empty() {
        return Err(CliError::Input(
            "every mined TAP was removed by the corpus filters".into(),
        ));
    }
    let (train, val, test) = split_dataset(kept, config.split_ratios, config.seed)?;

    let dir = config.output_dir.join("raw");
    fs::create_dir_all(&dir)?;
    write_taps(&taps_path(&dir, "train"), &train)?;
    write_taps(&taps_path(&dir, "val"), &val)?;
    write_taps(&taps_path(&dir, "test"), &test)?;
    write_vocabulary(&dir.join("vocab.json"), &vocab)?;
    write_zipf_report(&dir.join("zipf.csv"), &zipf)?;

    let report = MineReport {
        stats: outcome.stats,
        filter,
        split: SplitSizes {
            train: train.len(),
            val: val.len(),
            test: test.len(),
        },
    };
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    fs::write(dir.join("mine_report.json"), json)?;

    println!(
        "mined {} TAPs ({} kept after filters: {} long, {} unknown, {} duplicate)",
        report.filter.input_count,
        report.filter.kept,
        report.filter.removed_long,
        report.filter.removed_unknown,
        report.filter.removed_duplicate
    );
    println!(
        "split {}/{}/{} train/val/test into {}",
        train.len(),
        val.len(),
        test.len(),
        dir.display()
    );
    Ok(())
}
