//! The pipeline configuration file (TOML) and its resolved form.
//!
//! One file drives every subcommand; each command reads the directories it
//! needs (`input_dir` / `output_dir`) plus its own section. `--seed` on the
//! command line overrides the file's seed everywhere.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Deserialize;

use fdkin_core::fracdiff::{Alpha, Approach};
use fdkin_core::learn::CvPlan;
use fdkin_core::signal::SynthConfig;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    input_dir: Option<PathBuf>,
    output_dir: Option<PathBuf>,
    approaches: Option<Vec<String>>,
    alphas: Option<Vec<f64>>,
    seed: Option<u64>,
    search_iterations: Option<usize>,
    cv: Option<CvSection>,
    synth: Option<SynthSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CvSection {
    folds: Option<usize>,
    repetitions: Option<usize>,
    stratified: Option<bool>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SynthSection {
    n_per_group: Option<usize>,
    duration_s: Option<f64>,
    loop_freq_hz: Option<f64>,
    drift_mm_s: Option<f64>,
    loop_amp_x_mm: Option<f64>,
    loop_amp_y_mm: Option<f64>,
    noise_mm: Option<f64>,
    pd_tremor_hz: Option<f64>,
    pd_tremor_amp: Option<f64>,
    pd_vel_jitter: Option<f64>,
    pd_size_decay: Option<f64>,
    pd_freq_scale: Option<f64>,
    pd_amp_scale: Option<f64>,
}

/// Fully resolved configuration.
#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub input_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    /// Derivative approaches, in the fixed report order C, RL, GL.
    pub approaches: Vec<Approach>,
    pub alphas: Vec<Alpha>,
    pub seed: u64,
    pub search_iterations: usize,
    pub cv: CvPlan,
    pub synth: SynthConfig,
}

/// Fixed display/report order of the approaches.
pub const REPORT_ORDER: [Approach; 3] = [
    Approach::Caputo,
    Approach::RiemannLiouville,
    Approach::GrunwaldLetnikov,
];

pub fn load(path: &Path, seed_override: Option<u64>) -> anyhow::Result<PipelineConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let file: FileConfig = toml::from_str(&text)
        .with_context(|| format!("cannot parse config {}", path.display()))?;
    resolve(file, seed_override)
}

fn resolve(file: FileConfig, seed_override: Option<u64>) -> anyhow::Result<PipelineConfig> {
    let seed = seed_override.or(file.seed).unwrap_or(42);

    let approaches = match &file.approaches {
        None => REPORT_ORDER.to_vec(),
        Some(codes) => {
            let mut out = Vec::new();
            for code in codes {
                let approach = Approach::from_code(code)
                    .with_context(|| format!("unknown approach {code:?} (use GL, RL or C)"))?;
                if out.contains(&approach) {
                    bail!("approach {code} listed twice");
                }
                out.push(approach);
            }
            if out.is_empty() {
                bail!("approaches must not be empty");
            }
            // normalize to the fixed report order
            REPORT_ORDER
                .iter()
                .copied()
                .filter(|a| out.contains(a))
                .collect()
        }
    };

    let alphas = match &file.alphas {
        None => fdkin_core::fracdiff::alpha_grid().to_vec(),
        Some(raw) => {
            if raw.is_empty() {
                bail!("alphas must not be empty");
            }
            let mut out = Vec::new();
            for &a in raw {
                let alpha =
                    Alpha::new(a).map_err(|e| anyhow::anyhow!("invalid alpha {a}: {e}"))?;
                if out.contains(&alpha) {
                    bail!("alpha {a} listed twice");
                }
                out.push(alpha);
            }
            out.sort_by(|a, b| a.value().total_cmp(&b.value()));
            out
        }
    };

    let cv_section = file.cv.unwrap_or_default();
    let cv = CvPlan {
        folds: cv_section.folds.unwrap_or(5),
        repetitions: cv_section.repetitions.unwrap_or(10),
        stratified: cv_section.stratified.unwrap_or(true),
        seed: cv_section.seed.unwrap_or(seed),
    };
    if cv.folds < 2 {
        bail!("cv.folds must be at least 2");
    }
    if cv.repetitions < 1 {
        bail!("cv.repetitions must be at least 1");
    }

    let s = file.synth.unwrap_or_default();
    let defaults = SynthConfig::default();
    let synth = SynthConfig {
        n_per_group: s.n_per_group.unwrap_or(defaults.n_per_group),
        seed,
        duration_s: s.duration_s.unwrap_or(defaults.duration_s),
        loop_freq_hz: s.loop_freq_hz.unwrap_or(defaults.loop_freq_hz),
        drift_mm_s: s.drift_mm_s.unwrap_or(defaults.drift_mm_s),
        loop_amp_x_mm: s.loop_amp_x_mm.unwrap_or(defaults.loop_amp_x_mm),
        loop_amp_y_mm: s.loop_amp_y_mm.unwrap_or(defaults.loop_amp_y_mm),
        noise_mm: s.noise_mm.unwrap_or(defaults.noise_mm),
        pd_tremor_hz: s.pd_tremor_hz.unwrap_or(defaults.pd_tremor_hz),
        pd_tremor_amp: s.pd_tremor_amp.unwrap_or(defaults.pd_tremor_amp),
        pd_vel_jitter: s.pd_vel_jitter.unwrap_or(defaults.pd_vel_jitter),
        pd_size_decay: s.pd_size_decay.unwrap_or(defaults.pd_size_decay),
        pd_freq_scale: s.pd_freq_scale.unwrap_or(defaults.pd_freq_scale),
        pd_amp_scale: s.pd_amp_scale.unwrap_or(defaults.pd_amp_scale),
    };
    synth
        .validate()
        .map_err(|e| anyhow::anyhow!("invalid [synth] section: {e}"))?;

    Ok(PipelineConfig {
        input_dir: file.input_dir,
        output_dir: file.output_dir,
        approaches,
        alphas,
        seed,
        search_iterations: file.search_iterations.unwrap_or(1000),
        cv,
        synth,
    })
}

impl PipelineConfig {
    pub fn input_dir(&self) -> anyhow::Result<&Path> {
        self.input_dir
            .as_deref()
            .context("config is missing input_dir")
    }

    pub fn output_dir(&self) -> anyhow::Result<&Path> {
        self.output_dir
            .as_deref()
            .context("config is missing output_dir")
    }
}
