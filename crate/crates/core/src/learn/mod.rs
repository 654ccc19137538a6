//! Binary patient/control classification: a minimal second-order
//! gradient-boosted-trees learner, repeated stratified cross-validation,
//! randomized hyperparameter search over the fixed value lists, and the
//! confusion-matrix metric suite (MCC, BACC, SEN, SPE, PRE, F1).

mod gbt;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

pub use gbt::GbtModel;

use crate::features::FeatureMatrix;
use crate::math;
use crate::rng::{stream_key, CounterRng};
use crate::signal::Label;

/// Hyperparameter value lists available to the randomized search.
pub mod search_space {
    pub const LEARNING_RATE: [f64; 5] = [0.001, 0.01, 0.1, 0.2, 0.3];
    pub const GAMMA: [f64; 7] = [0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.5];
    pub const MAX_DEPTH: [usize; 5] = [6, 8, 10, 12, 15];
    pub const SUBSAMPLE: [f64; 6] = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
    pub const COLSAMPLE_BYLEVEL: [f64; 7] = [0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
    pub const COLSAMPLE_BYTREE: [f64; 7] = [0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
    pub const SCALE_POS_WEIGHT: [f64; 4] = [1.0, 2.0, 3.0, 4.0];
    pub const MIN_CHILD_WEIGHT: [f64; 6] = [0.5, 1.0, 3.0, 5.0, 7.0, 10.0];
}

/// Gradient-boosted-trees configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct GbtConfig {
    pub n_estimators: usize,
    pub learning_rate: f64,
    /// Minimum split gain.
    pub gamma: f64,
    pub max_depth: usize,
    /// Row sampling ratio per tree, in (0, 1].
    pub subsample: f64,
    pub colsample_bylevel: f64,
    pub colsample_bytree: f64,
    /// Gradient/hessian multiplier of the positive (patient) class.
    pub scale_pos_weight: f64,
    /// Minimum hessian sum per child.
    pub min_child_weight: f64,
    pub seed: u64,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig {
            n_estimators: 100,
            learning_rate: 0.1,
            gamma: 0.0,
            max_depth: 6,
            subsample: 1.0,
            colsample_bylevel: 1.0,
            colsample_bytree: 1.0,
            scale_pos_weight: 1.0,
            min_child_weight: 1.0,
            seed: 0,
        }
    }
}

impl GbtConfig {
    pub fn validate(&self) -> Result<(), LearnError> {
        let bad = |msg: &str| Err(LearnError::BadConfig(String::from(msg)));
        if self.n_estimators == 0 {
            return bad("n_estimators must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return bad("gamma must be >= 0");
        }
        if self.max_depth == 0 {
            return bad("max_depth must be positive");
        }
        for (name, v) in [
            ("subsample", self.subsample),
            ("colsample_bylevel", self.colsample_bylevel),
            ("colsample_bytree", self.colsample_bytree),
        ] {
            if !(v.is_finite() && v > 0.0 && v <= 1.0) {
                return Err(LearnError::BadConfig(format!("{name} must lie in (0, 1]")));
            }
        }
        if !(self.scale_pos_weight.is_finite() && self.scale_pos_weight > 0.0) {
            return bad("scale_pos_weight must be positive");
        }
        if !(self.min_child_weight.is_finite() && self.min_child_weight >= 0.0) {
            return bad("min_child_weight must be >= 0");
        }
        Ok(())
    }
}

/// Binary confusion matrix with the patient class as positive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub true_pos: usize,
    pub false_neg: usize,
    pub false_pos: usize,
    pub true_neg: usize,
}

impl ConfusionMatrix {
    pub fn positives(&self) -> usize {
        self.true_pos + self.false_neg
    }

    pub fn negatives(&self) -> usize {
        self.true_neg + self.false_pos
    }
}

/// Metric suite of one evaluation. Precision and F1 are undefined when no
/// positive prediction exists.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub mcc: f64,
    pub bacc: f64,
    pub sen: f64,
    pub spe: f64,
    pub pre: Option<f64>,
    pub f1: Option<f64>,
    pub matrix: ConfusionMatrix,
}

/// Cross-validation plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CvPlan {
    pub folds: usize,
    pub repetitions: usize,
    pub stratified: bool,
    pub seed: u64,
}

impl Default for CvPlan {
    fn default() -> Self {
        CvPlan { folds: 5, repetitions: 10, stratified: true, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LearnError {
    BadConfig(String),
    /// Both classes are needed for training / evaluation.
    DegenerateClasses { pd: usize, hc: usize },
    /// A value is missing; impute upstream.
    MissingValue { subject: String, column: String },
    /// Confusion matrix with an empty actual class.
    EmptyActualClass,
    /// Class counts must reach the fold count.
    TooFewPerClass { pd: usize, hc: usize, folds: usize },
    /// No valid stratification found within the attempt budget.
    SplitFailed,
    EmptyMatrix,
}

impl core::fmt::Display for LearnError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LearnError::BadConfig(msg) => write!(f, "invalid configuration: {msg}"),
            LearnError::DegenerateClasses { pd, hc } => {
                write!(f, "need both classes, got PD={pd} HC={hc}")
            }
            LearnError::MissingValue { subject, column } => {
                write!(f, "missing value for subject {subject}, column {column}")
            }
            LearnError::EmptyActualClass => write!(f, "confusion matrix has an empty actual class"),
            LearnError::TooFewPerClass { pd, hc, folds } => {
                write!(f, "class counts PD={pd} HC={hc} below fold count {folds}")
            }
            LearnError::SplitFailed => write!(f, "no valid fold assignment found in 100 attempts"),
            LearnError::EmptyMatrix => write!(f, "feature matrix has no rows"),
        }
    }
}

impl core::error::Error for LearnError {}

/// Computes the metric suite of one confusion matrix. MCC is defined as 0
/// when any marginal factor vanishes; precision and F1 are undefined
/// markers when there is no positive prediction.
pub fn compute_metrics(m: &ConfusionMatrix) -> Result<MetricsReport, LearnError> {
    if m.positives() == 0 || m.negatives() == 0 {
        return Err(LearnError::EmptyActualClass);
    }
    let (tp, fn_, fp, tn) = (
        m.true_pos as f64,
        m.false_neg as f64,
        m.false_pos as f64,
        m.true_neg as f64,
    );
    let sen = tp / (tp + fn_);
    let spe = tn / (tn + fp);
    let bacc = 0.5 * (sen + spe);
    let pre = if m.true_pos + m.false_pos > 0 {
        Some(tp / (tp + fp))
    } else {
        None
    };
    let f1 = pre.map(|p| if p + sen == 0.0 { 0.0 } else { 2.0 * p * sen / (p + sen) });
    let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    let mcc = if denom == 0.0 {
        0.0
    } else {
        (tp * tn - fp * fn_) / libm::sqrt(denom)
    };
    Ok(MetricsReport { mcc, bacc, sen, spe, pre, f1, matrix: *m })
}

fn labels_of(matrix: &FeatureMatrix) -> Vec<f64> {
    matrix
        .subjects
        .iter()
        .map(|s| if s.label == Label::Pd { 1.0 } else { 0.0 })
        .collect()
}

fn class_counts(y: &[f64]) -> (usize, usize) {
    let pd = y.iter().filter(|&&v| v == 1.0).count();
    (pd, y.len() - pd)
}

/// Trains on the full matrix. Every value must be present (impute
/// upstream); both classes must hold at least two subjects.
pub fn train_gbt(matrix: &FeatureMatrix, cfg: &GbtConfig) -> Result<GbtModel, LearnError> {
    cfg.validate()?;
    if matrix.n_rows() == 0 {
        return Err(LearnError::EmptyMatrix);
    }
    let y = labels_of(matrix);
    let (pd, hc) = class_counts(&y);
    if pd < 2 || hc < 2 {
        return Err(LearnError::DegenerateClasses { pd, hc });
    }
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(matrix.n_rows()); matrix.n_cols()];
    for (i, row) in matrix.values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            match v {
                Some(v) => cols[j].push(*v),
                None => {
                    return Err(LearnError::MissingValue {
                        subject: matrix.subjects[i].subject_id.clone(),
                        column: matrix.columns[j].label(),
                    })
                }
            }
        }
    }
    let data = gbt::DenseData::new(cols);
    Ok(gbt::fit(&data, &y, cfg))
}

/// Stratified fold assignment: each class is shuffled and dealt
/// round-robin, so per-fold class counts deviate from the global ratio by
/// at most one subject. Returns `fold_of[row]`.
fn assign_folds(y: &[f64], folds: usize, stratified: bool, rng: &mut CounterRng) -> Vec<usize> {
    let n = y.len();
    let mut fold_of = vec![0usize; n];
    if stratified {
        for class in [1.0, 0.0] {
            let mut members: Vec<usize> = (0..n).filter(|&i| y[i] == class).collect();
            rng.shuffle(&mut members);
            for (k, &row) in members.iter().enumerate() {
                fold_of[row] = k % folds;
            }
        }
    } else {
        let mut rows: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut rows);
        for (k, &row) in rows.iter().enumerate() {
            fold_of[row] = k % folds;
        }
    }
    fold_of
}

fn folds_are_valid(y: &[f64], fold_of: &[usize], folds: usize) -> bool {
    for fold in 0..folds {
        let mut pd = 0usize;
        let mut hc = 0usize;
        for (i, &f) in fold_of.iter().enumerate() {
            if f == fold {
                if y[i] == 1.0 {
                    pd += 1;
                } else {
                    hc += 1;
                }
            }
        }
        if pd == 0 || hc == 0 {
            return false;
        }
    }
    true
}

/// Column medians over the training rows; used to impute both sides of the
/// fold without leaking test values. All-missing training columns impute 0.
fn fold_medians(matrix: &FeatureMatrix, train_rows: &[usize]) -> Vec<f64> {
    (0..matrix.n_cols())
        .map(|j| {
            let present: Vec<f64> = train_rows
                .iter()
                .filter_map(|&i| matrix.values[i][j])
                .collect();
            if present.is_empty() {
                0.0
            } else {
                math::median(&present)
            }
        })
        .collect()
}

/// Repeated stratified cross-validation. Out-of-fold predictions are
/// pooled into one confusion matrix per repetition; the report averages
/// the per-repetition metrics and attaches the matrix of the repetition
/// with the median balanced accuracy.
pub fn cross_validate(
    matrix: &FeatureMatrix,
    cfg: &GbtConfig,
    plan: &CvPlan,
) -> Result<MetricsReport, LearnError> {
    cfg.validate()?;
    if plan.folds < 2 || plan.repetitions == 0 {
        return Err(LearnError::BadConfig(String::from(
            "need folds >= 2 and repetitions >= 1",
        )));
    }
    let y = labels_of(matrix);
    let (pd, hc) = class_counts(&y);
    if pd < plan.folds || hc < plan.folds {
        return Err(LearnError::TooFewPerClass { pd, hc, folds: plan.folds });
    }

    let mut per_rep: Vec<MetricsReport> = Vec::with_capacity(plan.repetitions);
    for rep in 0..plan.repetitions {
        let mut fold_of = None;
        for attempt in 0..100u64 {
            let mut rng =
                CounterRng::new(stream_key(&[plan.seed, rep as u64, attempt, 0xF01D]));
            let candidate = assign_folds(&y, plan.folds, plan.stratified, &mut rng);
            if folds_are_valid(&y, &candidate, plan.folds) {
                fold_of = Some(candidate);
                break;
            }
        }
        let fold_of = fold_of.ok_or(LearnError::SplitFailed)?;

        let mut pooled = ConfusionMatrix::default();
        for fold in 0..plan.folds {
            let train_rows: Vec<usize> =
                (0..matrix.n_rows()).filter(|&i| fold_of[i] != fold).collect();
            let test_rows: Vec<usize> =
                (0..matrix.n_rows()).filter(|&i| fold_of[i] == fold).collect();
            let medians = fold_medians(matrix, &train_rows);

            let cols: Vec<Vec<f64>> = (0..matrix.n_cols())
                .map(|j| {
                    train_rows
                        .iter()
                        .map(|&i| matrix.values[i][j].unwrap_or(medians[j]))
                        .collect()
                })
                .collect();
            let y_train: Vec<f64> = train_rows.iter().map(|&i| y[i]).collect();
            let fold_cfg = GbtConfig {
                seed: stream_key(&[cfg.seed, rep as u64, fold as u64]),
                ..cfg.clone()
            };
            let data = gbt::DenseData::new(cols);
            let model = gbt::fit(&data, &y_train, &fold_cfg);

            for &i in &test_rows {
                let row: Vec<f64> = (0..matrix.n_cols())
                    .map(|j| matrix.values[i][j].unwrap_or(medians[j]))
                    .collect();
                let predicted_pd = model.predict_positive(&row);
                match (y[i] == 1.0, predicted_pd) {
                    (true, true) => pooled.true_pos += 1,
                    (true, false) => pooled.false_neg += 1,
                    (false, true) => pooled.false_pos += 1,
                    (false, false) => pooled.true_neg += 1,
                }
            }
        }
        per_rep.push(compute_metrics(&pooled)?);
    }

    Ok(aggregate_repetitions(&per_rep))
}

fn aggregate_repetitions(per_rep: &[MetricsReport]) -> MetricsReport {
    let n = per_rep.len() as f64;
    let mean_of = |get: fn(&MetricsReport) -> f64| per_rep.iter().map(get).sum::<f64>() / n;
    let mean_opt = |get: fn(&MetricsReport) -> Option<f64>| {
        let defined: Vec<f64> = per_rep.iter().filter_map(get).collect();
        if defined.is_empty() {
            None
        } else {
            Some(math::mean(&defined))
        }
    };
    // the repetition with median balanced accuracy donates its matrix
    let mut order: Vec<usize> = (0..per_rep.len()).collect();
    order.sort_by(|&a, &b| per_rep[a].bacc.total_cmp(&per_rep[b].bacc).then(a.cmp(&b)));
    let median_rep = order[(order.len() - 1) / 2];

    MetricsReport {
        mcc: mean_of(|r| r.mcc),
        bacc: mean_of(|r| r.bacc),
        sen: mean_of(|r| r.sen),
        spe: mean_of(|r| r.spe),
        pre: mean_opt(|r| r.pre),
        f1: mean_opt(|r| r.f1),
        matrix: per_rep[median_rep].matrix,
    }
}

/// Uniformly samples configurations from the fixed hyperparameter lists
/// and returns the one maximizing mean cross-validated balanced accuracy
/// (ties: higher MCC, then lower iteration index).
pub fn random_search(
    matrix: &FeatureMatrix,
    plan: &CvPlan,
    iterations: usize,
    seed: u64,
) -> Result<(GbtConfig, MetricsReport), LearnError> {
    if iterations == 0 {
        return Err(LearnError::BadConfig(String::from("iterations must be >= 1")));
    }
    let mut best: Option<(GbtConfig, MetricsReport)> = None;
    for iteration in 0..iterations {
        let cfg = sample_config(seed, iteration);
        let report = cross_validate(matrix, &cfg, plan)?;
        let better = match &best {
            None => true,
            Some((_, current)) => {
                report.bacc > current.bacc
                    || (report.bacc == current.bacc && report.mcc > current.mcc)
            }
        };
        if better {
            best = Some((cfg, report));
        }
    }
    Ok(best.expect("iterations >= 1"))
}

/// The configuration sampled at one search iteration (draw order is part
/// of the reproducibility contract).
pub fn sample_config(seed: u64, iteration: usize) -> GbtConfig {
    let mut rng = CounterRng::new(stream_key(&[seed, iteration as u64]));
    GbtConfig {
        n_estimators: 100,
        learning_rate: *rng.pick(&search_space::LEARNING_RATE),
        gamma: *rng.pick(&search_space::GAMMA),
        max_depth: *rng.pick(&search_space::MAX_DEPTH),
        subsample: *rng.pick(&search_space::SUBSAMPLE),
        colsample_bylevel: *rng.pick(&search_space::COLSAMPLE_BYLEVEL),
        colsample_bytree: *rng.pick(&search_space::COLSAMPLE_BYTREE),
        scale_pos_weight: *rng.pick(&search_space::SCALE_POS_WEIGHT),
        min_child_weight: *rng.pick(&search_space::MIN_CHILD_WEIGHT),
        seed: stream_key(&[seed, iteration as u64, 0x5EED]),
    }
}
