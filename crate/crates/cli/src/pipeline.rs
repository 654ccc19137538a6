//! The pipeline commands behind the CLI subcommands.
//!
//! Exit-code contract: `Clean` maps to 0, `Partial` (some subjects were
//! skipped) to 1, and any returned error to 2. No command mutates its
//! input directory, and identical inputs plus identical seeds produce
//! byte-identical outputs regardless of `--jobs`.

use std::path::Path;

use anyhow::{bail, Context};
use rayon::prelude::*;

use fdkin_core::features::{
    extract_features, sweep_alpha, FeatureMatrix, FeatureVector, KinematicBase, Stat, SubjectInfo,
};
use fdkin_core::fracdiff::{fd, Alpha, Approach, SampledSignal};
use fdkin_core::learn::random_search;
use fdkin_core::rng::stream_key;
use fdkin_core::signal::synth_cohort;
use fdkin_core::stats::correlation_report;

use crate::cohort::{load_recording, read_cohort, write_cohort};
use crate::config::{PipelineConfig, REPORT_ORDER};
use crate::feats_io::{read_feature_csv, write_feature_csv};
use crate::report::{write_classification_reports, write_correlation_reports, ClassificationRow};
use crate::{fmt_g17, write_atomic};

/// Rows of the truncated correlation view.
pub const TOP_K: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmdOutcome {
    Clean,
    /// Some subjects failed and were skipped.
    Partial { skipped: usize },
}

impl CmdOutcome {
    pub fn exit_code(self) -> i32 {
        match self {
            CmdOutcome::Clean => 0,
            CmdOutcome::Partial { .. } => 1,
        }
    }
}

fn install_pool<T: Send>(jobs: usize, work: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("cannot build worker pool")?;
    Ok(pool.install(work))
}

/// `synth`: generates the synthetic cohort into `output_dir`.
pub fn cmd_synth(cfg: &PipelineConfig) -> anyhow::Result<CmdOutcome> {
    let out_dir = cfg.output_dir()?;
    let cohort = synth_cohort(&cfg.synth).map_err(|e| anyhow::anyhow!("{e}"))?;
    write_cohort(out_dir, &cohort)?;
    Ok(CmdOutcome::Clean)
}

/// `extract`: cohort directory -> one feature CSV per approach plus the
/// combined file. Per-subject failures are logged and skipped; the run
/// fails only when every subject fails.
pub fn cmd_extract(cfg: &PipelineConfig, jobs: usize) -> anyhow::Result<CmdOutcome> {
    let in_dir = cfg.input_dir()?;
    let out_dir = cfg.output_dir()?;
    let entries = read_cohort(in_dir)?;
    let approaches = cfg.approaches.clone();
    let alphas = cfg.alphas.clone();

    type SubjectRow = (SubjectInfo, Vec<FeatureVector>);
    let results: Vec<Result<SubjectRow, String>> = install_pool(jobs, || {
        entries
            .par_iter()
            .map(|entry| {
                let rec = load_recording(in_dir, entry).map_err(|e| format!("{e:#}"))?;
                let mut vectors = Vec::with_capacity(approaches.len());
                for &approach in &approaches {
                    let fv = extract_features(&rec, approach, &alphas)
                        .map_err(|e| format!("{}: {e}", entry.info.subject_id))?;
                    vectors.push(fv);
                }
                Ok((entry.info.clone(), vectors))
            })
            .collect()
    })?;

    let mut skipped = 0usize;
    let mut kept: Vec<SubjectRow> = Vec::new();
    for result in results {
        match result {
            Ok(row) => kept.push(row),
            Err(message) => {
                skipped += 1;
                eprintln!("skipping subject: {message}");
            }
        }
    }
    if kept.is_empty() {
        bail!("all {skipped} subjects failed feature extraction");
    }

    let mut per_approach = Vec::new();
    for (k, approach) in approaches.iter().enumerate() {
        let rows: Vec<(SubjectInfo, FeatureVector)> = kept
            .iter()
            .map(|(info, vectors)| (info.clone(), vectors[k].clone()))
            .collect();
        let matrix = FeatureMatrix::from_rows(rows).map_err(|e| anyhow::anyhow!("{e}"))?;
        write_feature_csv(&out_dir.join(format!("features_{}.csv", approach.code())), &matrix)?;
        per_approach.push(matrix);
    }
    let refs: Vec<&FeatureMatrix> = per_approach.iter().collect();
    let all = FeatureMatrix::concat_approaches(&refs).map_err(|e| anyhow::anyhow!("{e}"))?;
    write_feature_csv(&out_dir.join("features_all.csv"), &all)?;

    Ok(if skipped == 0 {
        CmdOutcome::Clean
    } else {
        CmdOutcome::Partial { skipped }
    })
}

/// `correlate`: feature CSVs -> full and top-5 correlation reports per
/// approach.
pub fn cmd_correlate(cfg: &PipelineConfig) -> anyhow::Result<CmdOutcome> {
    let in_dir = cfg.input_dir()?;
    let out_dir = cfg.output_dir()?;
    for approach in &cfg.approaches {
        let code = approach.code();
        let matrix = read_feature_csv(&in_dir.join(format!("features_{code}.csv")))?;
        let report = correlation_report(&matrix).map_err(|e| anyhow::anyhow!("{code}: {e}"))?;
        for warning in &report.warnings {
            eprintln!("{code}: {warning}");
        }
        write_correlation_reports(out_dir, code, &report.rows, TOP_K)?;
    }
    Ok(CmdOutcome::Clean)
}

/// `classify`: randomized hyperparameter search per approach plus the
/// combined feature set, reported in the fixed row order C, RL, GL, ALL.
pub fn cmd_classify(cfg: &PipelineConfig, jobs: usize) -> anyhow::Result<CmdOutcome> {
    let in_dir = cfg.input_dir()?;
    let out_dir = cfg.output_dir()?;

    let mut tasks: Vec<(String, u64, FeatureMatrix)> = Vec::new();
    for approach in &cfg.approaches {
        let code = approach.code();
        let matrix = read_feature_csv(&in_dir.join(format!("features_{code}.csv")))?;
        let salt = REPORT_ORDER.iter().position(|a| a == approach).unwrap() as u64;
        tasks.push((code.to_string(), salt, matrix));
    }
    if cfg.approaches.len() > 1 {
        let all = read_feature_csv(&in_dir.join("features_all.csv"))?;
        tasks.push(("ALL".to_string(), REPORT_ORDER.len() as u64, all));
    }

    let plan = cfg.cv;
    let iterations = cfg.search_iterations;
    let seed = cfg.seed;
    let rows: Vec<anyhow::Result<ClassificationRow>> = install_pool(jobs, || {
        tasks
            .par_iter()
            .map(|(name, salt, matrix)| {
                let search_seed = stream_key(&[seed, *salt]);
                let (config, report) = random_search(matrix, &plan, iterations, search_seed)
                    .map_err(|e| anyhow::anyhow!("{name}: {e}"))?;
                Ok(ClassificationRow { name: name.clone(), config, report })
            })
            .collect()
    })?;
    let rows: Vec<ClassificationRow> = rows.into_iter().collect::<anyhow::Result<_>>()?;

    write_classification_reports(out_dir, &rows)?;
    Ok(CmdOutcome::Clean)
}

/// `fd`: reads a single-column numeric CSV, differentiates it, writes the
/// series one value per line (17 significant digits).
pub fn cmd_fd(
    input: &Path,
    output: Option<&Path>,
    alpha: f64,
    approach_code: &str,
    step: f64,
) -> anyhow::Result<CmdOutcome> {
    let alpha = Alpha::new(alpha).map_err(|e| anyhow::anyhow!("{e}"))?;
    let approach = Approach::from_code(approach_code)
        .with_context(|| format!("unknown approach {approach_code:?} (use GL, RL or C)"))?;
    let text = std::fs::read_to_string(input)
        .with_context(|| format!("cannot read {}", input.display()))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        values.push(
            line.parse::<f64>()
                .with_context(|| format!("{} line {}: not a number", input.display(), i + 1))?,
        );
    }
    let signal = SampledSignal::new(values, step).map_err(|e| anyhow::anyhow!("{e}"))?;
    let out = fd(&signal, alpha, approach);
    let mut content = String::new();
    for v in &out.values {
        content.push_str(&fmt_g17(*v));
        content.push('\n');
    }
    match output {
        Some(path) => write_atomic(path, &content)?,
        None => print!("{content}"),
    }
    Ok(CmdOutcome::Clean)
}

/// `sweep`: α sweep of one statistic for one subject across all three
/// approaches; rows `approach,alpha,value`.
pub fn cmd_sweep(
    cfg: &PipelineConfig,
    subject: &str,
    base_label: &str,
    stat_label: &str,
    output: Option<&Path>,
) -> anyhow::Result<CmdOutcome> {
    let in_dir = cfg.input_dir()?;
    let base = KinematicBase::from_label(base_label)
        .with_context(|| format!("unknown base {base_label:?}"))?;
    let stat = Stat::from_label(stat_label)
        .with_context(|| format!("unknown stat {stat_label:?} (use mean or relstd)"))?;
    let entries = read_cohort(in_dir)?;
    let entry = entries
        .iter()
        .find(|e| e.info.subject_id == subject)
        .with_context(|| format!("subject {subject:?} not in subjects.csv"))?;
    let rec = load_recording(in_dir, entry)?;
    let points = sweep_alpha(&rec, base, stat, &cfg.alphas).map_err(|e| anyhow::anyhow!("{e}"))?;

    let mut content = String::from("approach,alpha,value\n");
    for point in &points {
        content.push_str(&format!(
            "{},{},{}\n",
            point.approach.code(),
            fdkin_core::features::format_alpha(point.alpha),
            point.value.map(fmt_g17).unwrap_or_default(),
        ));
    }
    match output {
        Some(path) => write_atomic(path, &content)?,
        None => {
            let out_dir = cfg.output_dir()?;
            let name = format!("sweep_{subject}_{base_label}_{stat_label}.csv");
            write_atomic(&out_dir.join(name), &content)?;
        }
    }
    Ok(CmdOutcome::Clean)
}
