//! Fractional-order kinematic feature vectors.
//!
//! Nine kinematic bases (velocity / acceleration / jerk, each combined,
//! horizontal and vertical) are evaluated on the α grid for one derivative
//! approach and summarised by the mean and the relative standard deviation,
//! giving 9 × 10 × 2 = 180 named features per approach on the default grid.
//!
//! Axis series take the absolute value of the signed order-α derivative;
//! combined series take the Euclidean magnitude of the two signed axis
//! series. Higher kinematics iterate the order-α operator on the signed
//! series (velocity → acceleration → jerk), excluding the boundary-affected
//! warmup samples after every application. Stroke series are pooled by
//! concatenation and sorted before accumulation, so the statistics are
//! exactly independent of stroke order.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::fracdiff::{fd, Alpha, Approach, SampledSignal};
use crate::math;
use crate::signal::{repair_outliers, segment_strokes, Gender, HandwritingRecording, Label, SignalError, Stroke};

/// The nine kinematic bases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KinematicBase {
    Velocity,
    HorizontalVelocity,
    VerticalVelocity,
    Acceleration,
    HorizontalAcceleration,
    VerticalAcceleration,
    Jerk,
    HorizontalJerk,
    VerticalJerk,
}

/// Which coordinate stream a base draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BaseAxis {
    Combined,
    Horizontal,
    Vertical,
}

impl KinematicBase {
    pub const ALL: [KinematicBase; 9] = [
        KinematicBase::Velocity,
        KinematicBase::HorizontalVelocity,
        KinematicBase::VerticalVelocity,
        KinematicBase::Acceleration,
        KinematicBase::HorizontalAcceleration,
        KinematicBase::VerticalAcceleration,
        KinematicBase::Jerk,
        KinematicBase::HorizontalJerk,
        KinematicBase::VerticalJerk,
    ];

    pub fn label(self) -> &'static str {
        match self {
            KinematicBase::Velocity => "velocity",
            KinematicBase::HorizontalVelocity => "horizontal_velocity",
            KinematicBase::VerticalVelocity => "vertical_velocity",
            KinematicBase::Acceleration => "acceleration",
            KinematicBase::HorizontalAcceleration => "horizontal_acceleration",
            KinematicBase::VerticalAcceleration => "vertical_acceleration",
            KinematicBase::Jerk => "jerk",
            KinematicBase::HorizontalJerk => "horizontal_jerk",
            KinematicBase::VerticalJerk => "vertical_jerk",
        }
    }

    pub fn from_label(label: &str) -> Option<KinematicBase> {
        KinematicBase::ALL.iter().copied().find(|b| b.label() == label)
    }

    /// 1 for the velocity family, 2 for acceleration, 3 for jerk.
    fn order(self) -> usize {
        match self {
            KinematicBase::Velocity
            | KinematicBase::HorizontalVelocity
            | KinematicBase::VerticalVelocity => 1,
            KinematicBase::Acceleration
            | KinematicBase::HorizontalAcceleration
            | KinematicBase::VerticalAcceleration => 2,
            KinematicBase::Jerk | KinematicBase::HorizontalJerk | KinematicBase::VerticalJerk => 3,
        }
    }

    fn axis(self) -> BaseAxis {
        match self {
            KinematicBase::Velocity | KinematicBase::Acceleration | KinematicBase::Jerk => {
                BaseAxis::Combined
            }
            KinematicBase::HorizontalVelocity
            | KinematicBase::HorizontalAcceleration
            | KinematicBase::HorizontalJerk => BaseAxis::Horizontal,
            KinematicBase::VerticalVelocity
            | KinematicBase::VerticalAcceleration
            | KinematicBase::VerticalJerk => BaseAxis::Vertical,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stat {
    Mean,
    RelStd,
}

impl Stat {
    pub const ALL: [Stat; 2] = [Stat::Mean, Stat::RelStd];

    pub fn label(self) -> &'static str {
        match self {
            Stat::Mean => "mean",
            Stat::RelStd => "relstd",
        }
    }

    pub fn from_label(label: &str) -> Option<Stat> {
        match label {
            "mean" => Some(Stat::Mean),
            "relstd" => Some(Stat::RelStd),
            _ => None,
        }
    }
}

/// One named feature: base × order α × summary statistic.
#[derive(Clone, Copy, Debug)]
pub struct FeatureName {
    pub base: KinematicBase,
    pub alpha: Alpha,
    pub stat: Stat,
}

impl FeatureName {
    fn sort_key(&self) -> (u8, u64, u8) {
        let base = KinematicBase::ALL.iter().position(|b| *b == self.base).unwrap() as u8;
        (base, self.alpha.value().to_bits(), self.stat as u8)
    }
}

impl PartialEq for FeatureName {
    fn eq(&self, other: &Self) -> bool {
        self.sort_key() == other.sort_key()
    }
}

impl Eq for FeatureName {}

impl PartialOrd for FeatureName {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FeatureName {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl core::hash::Hash for FeatureName {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        self.sort_key().hash(state);
    }
}

/// Fixed-format α text: one decimal on the tenth grid ("0.1" .. "1.0"),
/// shortest round-trip form otherwise.
pub fn format_alpha(alpha: Alpha) -> String {
    let v = alpha.value();
    if v * 10.0 == libm::floor(v * 10.0) {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

fn parse_alpha_text(text: &str) -> Option<Alpha> {
    Alpha::new(text.parse::<f64>().ok()?).ok()
}

impl core::fmt::Display for FeatureName {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "{} {} a={}",
            self.stat.label(),
            self.base.label(),
            format_alpha(self.alpha)
        )
    }
}

/// A feature column identity: approach plus feature name. Column labels
/// have the fixed format `"<stat> <base> a=<alpha> [<approach>]"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColumnKey {
    pub approach: Approach,
    pub name: FeatureName,
}

impl ColumnKey {
    pub fn label(&self) -> String {
        format!("{} [{}]", self.name, self.approach.code())
    }

    pub fn parse_label(label: &str) -> Option<ColumnKey> {
        let mut parts = label.split(' ');
        let stat = Stat::from_label(parts.next()?)?;
        let base = KinematicBase::from_label(parts.next()?)?;
        let alpha = parse_alpha_text(parts.next()?.strip_prefix("a=")?)?;
        let approach_part = parts.next()?;
        if parts.next().is_some() {
            return None;
        }
        let approach =
            Approach::from_code(approach_part.strip_prefix('[')?.strip_suffix(']')?)?;
        Some(ColumnKey {
            approach,
            name: FeatureName { base, alpha, stat },
        })
    }
}

/// The feature vector of one subject for one approach. Missing entries are
/// explicit (`None`), never silent zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub subject_id: String,
    pub approach: Approach,
    pub values: BTreeMap<FeatureName, Option<f64>>,
}

/// Per-subject metadata carried alongside feature rows.
#[derive(Clone, Debug, PartialEq)]
pub struct SubjectInfo {
    pub subject_id: String,
    pub label: Label,
    pub age: Option<f64>,
    pub gender: Option<Gender>,
}

/// Feature rows across subjects with aligned columns.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<ColumnKey>,
    pub subjects: Vec<SubjectInfo>,
    /// Row-major: `values[row][column]`.
    pub values: Vec<Vec<Option<f64>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FeatureError {
    Signal(SignalError),
    NoEligibleStrokes,
    /// Rows of one matrix must share the approach.
    MixedApproaches,
    DuplicateSubject(String),
    /// Concatenation requires identical subject rows in identical order.
    SubjectMismatch,
    EmptyMatrix,
}

impl From<SignalError> for FeatureError {
    fn from(e: SignalError) -> Self {
        FeatureError::Signal(e)
    }
}

impl core::fmt::Display for FeatureError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FeatureError::Signal(e) => write!(f, "signal error: {e}"),
            FeatureError::NoEligibleStrokes => write!(f, "recording has no on-surface stroke of length >= 2"),
            FeatureError::MixedApproaches => write!(f, "feature rows mix derivative approaches"),
            FeatureError::DuplicateSubject(id) => write!(f, "duplicate subject id {id}"),
            FeatureError::SubjectMismatch => write!(f, "subject rows differ across concatenated matrices"),
            FeatureError::EmptyMatrix => write!(f, "feature matrix has no rows"),
        }
    }
}

impl core::error::Error for FeatureError {}

/// Signed derivative chain of one axis: level k holds the series after
/// k + 1 applications of the order-α operator, with the warmup prefix
/// dropped after each application. Levels too short to compute are None.
type ChainLevels = [Option<Vec<f64>>; 3];

fn axis_chain(signal: &SampledSignal, alpha: Alpha, approach: Approach) -> ChainLevels {
    let mut levels: ChainLevels = [None, None, None];
    let mut current = signal.clone();
    for level in levels.iter_mut() {
        let out = fd(&current, alpha, approach);
        let trimmed: Vec<f64> = out.values[out.warmup..].to_vec();
        if trimmed.is_empty() {
            break;
        }
        *level = Some(trimmed.clone());
        if trimmed.len() < 2 {
            break;
        }
        current = SampledSignal::new(trimmed, signal.h()).expect("trimmed FD output is finite");
    }
    levels
}

fn combine(base: KinematicBase, xc: &ChainLevels, yc: &ChainLevels) -> Vec<f64> {
    let level = base.order() - 1;
    match base.axis() {
        BaseAxis::Horizontal => xc[level]
            .as_deref()
            .map(|v| v.iter().map(|s| s.abs()).collect())
            .unwrap_or_default(),
        BaseAxis::Vertical => yc[level]
            .as_deref()
            .map(|v| v.iter().map(|s| s.abs()).collect())
            .unwrap_or_default(),
        BaseAxis::Combined => match (xc[level].as_deref(), yc[level].as_deref()) {
            (Some(xs), Some(ys)) => xs
                .iter()
                .zip(ys)
                .map(|(&a, &b)| libm::sqrt(a * a + b * b))
                .collect(),
            _ => Vec::new(),
        },
    }
}

/// The per-stroke kinematic series for one base, order and approach.
/// Strokes too short to survive the warmup trims yield an empty series.
pub fn kinematic_series(
    stroke: &Stroke,
    base: KinematicBase,
    alpha: Alpha,
    approach: Approach,
) -> Vec<f64> {
    let xc = axis_chain(&stroke.x, alpha, approach);
    let yc = axis_chain(&stroke.y, alpha, approach);
    combine(base, &xc, &yc)
}

/// Minimum pooled sample count for a feature to be reported.
const MIN_POOLED: usize = 4;

fn summarize(pooled: &mut [f64]) -> (Option<f64>, Option<f64>) {
    if pooled.len() < MIN_POOLED {
        return (None, None);
    }
    // Canonical accumulation order: statistics are invariant to stroke
    // permutation bit for bit.
    pooled.sort_unstable_by(f64::total_cmp);
    let mean = math::mean(pooled);
    if !mean.is_finite() {
        return (None, None);
    }
    let relstd = if mean == 0.0 {
        None
    } else {
        let rs = math::sample_std(pooled) / mean;
        rs.is_finite().then_some(rs)
    };
    (Some(mean), relstd)
}

/// Extracts the feature vector of one recording for one approach over the
/// given α grid: segments on-surface strokes, repairs outliers, computes
/// the kinematic series per stroke, pools them, and summarises each pooled
/// series by mean and relstd.
pub fn extract_features(
    rec: &HandwritingRecording,
    approach: Approach,
    alphas: &[Alpha],
) -> Result<FeatureVector, FeatureError> {
    let strokes = segment_strokes(rec);
    if strokes.is_empty() {
        return Err(FeatureError::NoEligibleStrokes);
    }
    let repaired: Vec<Stroke> = strokes
        .iter()
        .map(repair_outliers)
        .collect::<Result<_, _>>()?;

    let mut values = BTreeMap::new();
    for &alpha in alphas {
        let mut pooled: BTreeMap<KinematicBase, Vec<f64>> =
            KinematicBase::ALL.iter().map(|&b| (b, Vec::new())).collect();
        for stroke in &repaired {
            let xc = axis_chain(&stroke.x, alpha, approach);
            let yc = axis_chain(&stroke.y, alpha, approach);
            for &base in &KinematicBase::ALL {
                pooled.get_mut(&base).unwrap().extend(combine(base, &xc, &yc));
            }
        }
        for (base, mut series) in pooled {
            let (mean, relstd) = summarize(&mut series);
            values.insert(FeatureName { base, alpha, stat: Stat::Mean }, mean);
            values.insert(FeatureName { base, alpha, stat: Stat::RelStd }, relstd);
        }
    }
    Ok(FeatureVector {
        subject_id: rec.subject_id.clone(),
        approach,
        values,
    })
}

/// One cell of an α sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub approach: Approach,
    pub alpha: Alpha,
    pub value: Option<f64>,
}

/// Evaluates one (base, stat) cell over the α grid for all three
/// approaches, through the same pooling path as [`extract_features`].
pub fn sweep_alpha(
    rec: &HandwritingRecording,
    base: KinematicBase,
    stat: Stat,
    alphas: &[Alpha],
) -> Result<Vec<SweepPoint>, FeatureError> {
    let mut points = Vec::with_capacity(3 * alphas.len());
    for approach in Approach::ALL {
        let vector = extract_features(rec, approach, alphas)?;
        for &alpha in alphas {
            let value = vector
                .values
                .get(&FeatureName { base, alpha, stat })
                .copied()
                .flatten();
            points.push(SweepPoint { approach, alpha, value });
        }
    }
    Ok(points)
}

impl FeatureMatrix {
    /// Builds a matrix from per-subject vectors that share one approach.
    /// Column order is the canonical feature order of the first row.
    pub fn from_rows(rows: Vec<(SubjectInfo, FeatureVector)>) -> Result<Self, FeatureError> {
        let first = rows.first().ok_or(FeatureError::EmptyMatrix)?;
        let approach = first.1.approach;
        let names: Vec<FeatureName> = first.1.values.keys().copied().collect();
        let columns: Vec<ColumnKey> = names
            .iter()
            .map(|&name| ColumnKey { approach, name })
            .collect();

        let mut subjects = Vec::with_capacity(rows.len());
        let mut values = Vec::with_capacity(rows.len());
        for (info, vector) in rows {
            if vector.approach != approach {
                return Err(FeatureError::MixedApproaches);
            }
            if subjects.iter().any(|s: &SubjectInfo| s.subject_id == info.subject_id) {
                return Err(FeatureError::DuplicateSubject(info.subject_id));
            }
            let row: Vec<Option<f64>> = names
                .iter()
                .map(|name| vector.values.get(name).copied().flatten())
                .collect();
            subjects.push(info);
            values.push(row);
        }
        Ok(FeatureMatrix { columns, subjects, values })
    }

    /// Concatenates per-approach matrices column-wise (the combined
    /// 540-feature view). Subject rows must match exactly.
    pub fn concat_approaches(parts: &[&FeatureMatrix]) -> Result<Self, FeatureError> {
        let first = parts.first().ok_or(FeatureError::EmptyMatrix)?;
        let mut columns = Vec::new();
        let mut values: Vec<Vec<Option<f64>>> = first.subjects.iter().map(|_| Vec::new()).collect();
        for part in parts {
            if part.subjects != first.subjects {
                return Err(FeatureError::SubjectMismatch);
            }
            columns.extend(part.columns.iter().copied());
            for (row, src) in values.iter_mut().zip(&part.values) {
                row.extend(src.iter().copied());
            }
        }
        Ok(FeatureMatrix {
            columns,
            subjects: first.subjects.clone(),
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.values.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }
}
