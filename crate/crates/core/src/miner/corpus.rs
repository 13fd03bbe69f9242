//! Corpus-level mining: walk projects, lex files, assemble TAPs.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::jlex;

use super::focal::find_focal_method;
use super::methods::extract_methods;
use super::pom::scan_pom;
use super::tap::assemble_tap;
use super::{MinerError, TapRecord};

/// Mining switches.
#[derive(Debug, Clone, Default)]
pub struct MineOptions {
    /// Skip projects whose pom.xml files never declare JUnit 4.
    pub require_junit4: bool,
}

/// Everything one mining run produced.
#[derive(Debug, Clone)]
pub struct MiningOutcome {
    pub taps: Vec<TapRecord>,
    pub stats: MiningStats,
}

/// Counters for one mining run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiningStats {
    pub projects_scanned: usize,
    pub projects_skipped: usize,
    pub files_lexed: usize,
    pub files_failed: usize,
    pub tests_seen: usize,
    pub tests_without_assert: usize,
    pub tests_with_multiple_asserts: usize,
    pub taps_assembled: usize,
}

impl MiningStats {
    fn absorb(&mut self, other: &MiningStats) {
        self.projects_scanned += other.projects_scanned;
        self.projects_skipped += other.projects_skipped;
        self.files_lexed += other.files_lexed;
        self.files_failed += other.files_failed;
        self.tests_seen += other.tests_seen;
        self.tests_without_assert += other.tests_without_assert;
        self.tests_with_multiple_asserts += other.tests_with_multiple_asserts;
        self.taps_assembled += other.taps_assembled;
    }
}

/// Mines a corpus directory: each subdirectory is one project; a root with
/// no subdirectories is treated as a single project. Projects are processed
/// in parallel but merged in sorted-path order, so the output is identical
/// run to run.
pub fn mine_corpus(root: &Path, options: &MineOptions) -> Result<MiningOutcome, MinerError> {
    if !root.is_dir() {
        return Err(MinerError::NotADirectory(root.display().to_string()));
    }
    let mut projects: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    projects.sort();
    if projects.is_empty() {
        projects.push(root.to_path_buf());
    }

    let per_project: Vec<(Vec<TapRecord>, MiningStats)> = projects
        .par_iter()
        .map(|project| mine_project(project, root, options))
        .collect();

    let mut taps = Vec::new();
    let mut stats = MiningStats::default();
    for (project_taps, project_stats) in per_project {
        taps.extend(project_taps);
        stats.absorb(&project_stats);
    }
    stats.taps_assembled = taps.len();
    Ok(MiningOutcome { taps, stats })
}

fn mine_project(
    project: &Path,
    corpus_root: &Path,
    options: &MineOptions,
) -> (Vec<TapRecord>, MiningStats) {
    let mut stats = MiningStats {
        projects_scanned: 1,
        ..MiningStats::default()
    };
    let project_id = project
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| project.display().to_string());

    if options.require_junit4 && !project_uses_junit4(project) {
        stats.projects_skipped = 1;
        return (Vec::new(), stats);
    }

    let mut java_files: Vec<PathBuf> = WalkDir::new(project)
        .sort_by_file_name()
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .map(|e| e.into_path())
        .filter(|p| p.extension().map(|x| x == "java").unwrap_or(false))
        .collect();
    java_files.sort();

    let mut pool = Vec::new();
    for file in &java_files {
        let Ok(source) = fs::read_to_string(file) else {
            stats.files_failed += 1;
            continue;
        };
        let relative = file
            .strip_prefix(corpus_root)
            .unwrap_or(file)
            .to_string_lossy()
            .replace('\\', "/");
        match jlex::lex(&source) {
            Ok(stream) => {
                stats.files_lexed += 1;
                pool.extend(extract_methods(&stream, &project_id, &relative));
            }
            Err(err) => {
                stats.files_failed += 1;
                log::warn!("skipping {relative}: {err}");
            }
        }
    }

    let mut taps = Vec::new();
    for test in pool.iter().filter(|m| m.is_test) {
        stats.tests_seen += 1;
        let focal = find_focal_method(test, &pool);
        match assemble_tap(test, focal) {
            Ok(tap) => taps.push(tap),
            Err(MinerError::NoAssert) => stats.tests_without_assert += 1,
            Err(MinerError::MultipleAsserts(_)) => stats.tests_with_multiple_asserts += 1,
            Err(err) => log::warn!("unexpected assembly failure in {project_id}: {err}"),
        }
    }
    (taps, stats)
}

fn project_uses_junit4(project: &Path) -> bool {
    WalkDir::new(project)
        .sort_by_file_name()
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .filter(|e| e.file_name() == "pom.xml")
        .any(|e| {
            fs::read_to_string(e.path())
                .map(|text| scan_pom(&text))
                .unwrap_or(false)
        })
}
