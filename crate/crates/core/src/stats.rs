//! Correlation analysis between features and clinical status, controlled
//! for age and gender, with Benjamini-Hochberg false-discovery-rate
//! adjustment of the p-values.
//!
//! Covariate control is ordinary-least-squares residualization of each
//! feature column on [1, age, gender] before correlating against status
//! (PD = 1, HC = 0; gender F = 0, M = 1). p-values for both correlation
//! types use the Student-t approximation through the regularized
//! incomplete beta function.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::features::{ColumnKey, FeatureMatrix};
use crate::math;
use crate::signal::{Gender, Label};

#[derive(Clone, Debug, PartialEq)]
pub enum StatsError {
    LengthMismatch { x: usize, y: usize },
    /// Correlations need at least 3 paired observations.
    TooFewObservations(usize),
    ConstantInput,
    /// Fewer than 4 rows in one of the classes.
    TooFewPerClass { pd: usize, hc: usize },
    /// No feature column produced a valid correlation.
    NoUsableColumns,
}

impl core::fmt::Display for StatsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            StatsError::LengthMismatch { x, y } => write!(f, "length mismatch: {x} vs {y}"),
            StatsError::TooFewObservations(n) => {
                write!(f, "need at least 3 observations, got {n}")
            }
            StatsError::ConstantInput => write!(f, "correlation undefined for constant input"),
            StatsError::TooFewPerClass { pd, hc } => {
                write!(f, "need at least 4 subjects per class, got PD={pd} HC={hc}")
            }
            StatsError::NoUsableColumns => write!(f, "no feature column admits a correlation"),
        }
    }
}

impl core::error::Error for StatsError {}

fn check_pair(x: &[f64], y: &[f64]) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { x: x.len(), y: y.len() });
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewObservations(x.len()));
    }
    let constant = |v: &[f64]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return Err(StatsError::ConstantInput);
    }
    Ok(())
}

/// Pearson product-moment correlation with a two-sided p-value from
/// t = r sqrt((n-2)/(1-r^2)) against Student-t with n-2 degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<(f64, f64), StatsError> {
    check_pair(x, y)?;
    let n = x.len();
    let mx = math::mean(x);
    let my = math::mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        let dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let r = sxy / libm::sqrt(sxx * syy);
    let r = r.clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        let t = r * libm::sqrt(df / (1.0 - r * r));
        math::student_t_two_sided_p(t, df)
    };
    Ok((r, p))
}

/// Mid-ranks (ties receive the average of their positions, 1-based).
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j share the mean rank
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson on mid-ranks, p-value via the same
/// t-approximation.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<(f64, f64), StatsError> {
    check_pair(x, y)?;
    pearson(&midranks(x), &midranks(y))
}

/// Benjamini-Hochberg step-up adjustment. Sorts ascending, scales the i-th
/// order statistic by m/i, enforces monotonicity from the largest down,
/// caps at 1 and returns values in the original order.
pub fn fdr_bh(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    if m == 0 {
        return Vec::new();
    }
    debug_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_unstable_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut adjusted = vec![0.0; m];
    let mut running_min = 1.0_f64;
    for i in (0..m).rev() {
        let rank = i + 1;
        // rank m scales by exactly 1; rounding p*m/m could otherwise land
        // one ulp below p and break the adjusted >= raw guarantee
        let q = if rank == m {
            p[order[i]]
        } else {
            p[order[i]] * m as f64 / rank as f64
        };
        running_min = running_min.min(q).min(1.0);
        adjusted[order[i]] = running_min;
    }
    adjusted
}

/// Covariates available for residualization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CovariateSpec {
    pub age: bool,
    pub gender: bool,
}

impl CovariateSpec {
    pub fn is_empty(self) -> bool {
        !self.age && !self.gender
    }
}

/// Solves the least-squares normal equations X'X b = X'y with partial
/// pivoting. Returns None when the system is singular (rank-deficient
/// design, e.g. a single gender present).
fn solve_normal_equations(xtx: &mut [Vec<f64>], xty: &mut [f64]) -> Option<Vec<f64>> {
    let k = xty.len();
    for col in 0..k {
        let pivot_row = (col..k)
            .max_by(|&a, &b| xtx[a][col].abs().total_cmp(&xtx[b][col].abs()))
            .unwrap();
        if xtx[pivot_row][col].abs() < 1e-10 {
            return None;
        }
        xtx.swap(col, pivot_row);
        xty.swap(col, pivot_row);
        for row in 0..k {
            if row == col {
                continue;
            }
            let factor = xtx[row][col] / xtx[col][col];
            for c in col..k {
                xtx[row][c] -= factor * xtx[col][c];
            }
            xty[row] -= factor * xty[col];
        }
    }
    Some((0..k).map(|i| xty[i] / xtx[i][i]).collect())
}

/// Residual of y from OLS on the given design columns (first column is the
/// intercept). Falls back to dropping trailing covariate columns when the
/// design is rank-deficient; returns the indices of dropped columns.
fn ols_residuals(design: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, usize) {
    let mut k = design.len();
    loop {
        let mut xtx: Vec<Vec<f64>> = (0..k)
            .map(|a| {
                (0..k)
                    .map(|b| design[a].iter().zip(&design[b]).map(|(u, v)| u * v).sum())
                    .collect()
            })
            .collect();
        let mut xty: Vec<f64> = (0..k)
            .map(|a| design[a].iter().zip(y).map(|(u, v)| u * v).sum())
            .collect();
        if let Some(beta) = solve_normal_equations(&mut xtx, &mut xty) {
            let residuals = y
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let fit: f64 = (0..k).map(|c| beta[c] * design[c][i]).sum();
                    v - fit
                })
                .collect();
            return (residuals, design.len() - k);
        }
        // Drop the last covariate column and retry; the intercept-only
        // design (k = 1) is never singular for n >= 1.
        k -= 1;
        debug_assert!(k >= 1);
    }
}

/// Replaces each feature column by its OLS residual on [1, age, gender].
/// Rows with a missing feature value (or missing requested covariates)
/// keep their missing marker; labels are untouched. Returns the matrix
/// and human-readable warnings for any dropped covariate columns.
pub fn residualize(matrix: &FeatureMatrix, spec: CovariateSpec) -> (FeatureMatrix, Vec<String>) {
    let mut out = matrix.clone();
    let mut warnings = Vec::new();
    if spec.is_empty() {
        return (out, warnings);
    }
    for (j, key) in matrix.columns.iter().enumerate() {
        let mut rows: Vec<usize> = Vec::new();
        for (i, subject) in matrix.subjects.iter().enumerate() {
            let has_covs = (!spec.age || subject.age.is_some())
                && (!spec.gender || subject.gender.is_some());
            if has_covs && matrix.values[i][j].is_some() {
                rows.push(i);
            }
        }
        if rows.len() < 3 {
            continue;
        }
        let y: Vec<f64> = rows.iter().map(|&i| matrix.values[i][j].unwrap()).collect();
        let mut design: Vec<Vec<f64>> = vec![vec![1.0; rows.len()]];
        if spec.age {
            design.push(rows.iter().map(|&i| matrix.subjects[i].age.unwrap()).collect());
        }
        if spec.gender {
            design.push(
                rows.iter()
                    .map(|&i| match matrix.subjects[i].gender.unwrap() {
                        Gender::F => 0.0,
                        Gender::M => 1.0,
                    })
                    .collect(),
            );
        }
        let (residuals, dropped) = ols_residuals(&design, &y);
        if dropped > 0 {
            warnings.push(format!(
                "column {}: rank-deficient covariate design, dropped {dropped} covariate column(s)",
                key.label()
            ));
        }
        for (&i, r) in rows.iter().zip(&residuals) {
            out.values[i][j] = Some(*r);
        }
    }
    (out, warnings)
}

/// One row of the correlation report.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationRow {
    pub feature: ColumnKey,
    /// Spearman coefficient and its raw/adjusted p-values.
    pub rho: f64,
    pub p_s: f64,
    pub p_s_adj: f64,
    /// Pearson coefficient and its raw/adjusted p-values.
    pub r: f64,
    pub p_p: f64,
    pub p_p_adj: f64,
}

/// Full correlation report, sorted by (adjusted Spearman p ascending,
/// |rho| descending).
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationReport {
    pub rows: Vec<CorrelationRow>,
    /// Columns excluded from the analysis (constant, too few complete
    /// cases, ...); the BH multiplicity is reduced accordingly.
    pub warnings: Vec<String>,
}

impl CorrelationReport {
    pub fn top(&self, k: usize) -> &[CorrelationRow] {
        &self.rows[..k.min(self.rows.len())]
    }
}

/// Correlates every feature column against clinical status (PD = 1,
/// HC = 0) after residualizing features on the available covariates.
/// Columns whose complete cases are constant or too few are excluded and
/// reported in the warnings; both p-value families are BH-adjusted across
/// the included columns.
pub fn correlation_report(matrix: &FeatureMatrix) -> Result<CorrelationReport, StatsError> {
    let n_pd = matrix.subjects.iter().filter(|s| s.label == Label::Pd).count();
    let n_hc = matrix.subjects.len() - n_pd;
    if n_pd < 4 || n_hc < 4 {
        return Err(StatsError::TooFewPerClass { pd: n_pd, hc: n_hc });
    }

    let spec = CovariateSpec {
        age: matrix.subjects.iter().all(|s| s.age.is_some()),
        gender: matrix.subjects.iter().all(|s| s.gender.is_some()),
    };
    let (resid, mut warnings) = residualize(matrix, spec);

    struct Computed {
        column: usize,
        feature: ColumnKey,
        rho: f64,
        p_s: f64,
        r: f64,
        p_p: f64,
    }

    let mut computed: Vec<Computed> = Vec::new();
    for (j, key) in resid.columns.iter().enumerate() {
        let mut xs = Vec::new();
        let mut status = Vec::new();
        for (i, subject) in resid.subjects.iter().enumerate() {
            if let Some(v) = resid.values[i][j] {
                xs.push(v);
                status.push(if subject.label == Label::Pd { 1.0 } else { 0.0 });
            }
        }
        let result = spearman(&xs, &status).and_then(|s| pearson(&xs, &status).map(|p| (s, p)));
        match result {
            Ok(((rho, p_s), (r, p_p))) => computed.push(Computed {
                column: j,
                feature: *key,
                rho,
                p_s,
                r,
                p_p,
            }),
            Err(e) => warnings.push(format!("column {} excluded: {e}", key.label())),
        }
    }
    if computed.is_empty() {
        return Err(StatsError::NoUsableColumns);
    }

    let p_s_adj = fdr_bh(&computed.iter().map(|c| c.p_s).collect::<Vec<_>>());
    let p_p_adj = fdr_bh(&computed.iter().map(|c| c.p_p).collect::<Vec<_>>());

    let mut rows: Vec<CorrelationRow> = computed
        .iter()
        .zip(p_s_adj.iter().zip(&p_p_adj))
        .map(|(c, (&psa, &ppa))| CorrelationRow {
            feature: c.feature,
            rho: c.rho,
            p_s: c.p_s,
            p_s_adj: psa,
            r: c.r,
            p_p: c.p_p,
            p_p_adj: ppa,
        })
        .collect();
    // order: adjusted Spearman p ascending, |rho| descending, then the
    // original column position as a deterministic tiebreak
    let position: Vec<usize> = computed.iter().map(|c| c.column).collect();
    let mut indices: Vec<usize> = (0..rows.len()).collect();
    indices.sort_by(|&a, &b| {
        rows[a]
            .p_s_adj
            .total_cmp(&rows[b].p_s_adj)
            .then(rows[b].rho.abs().total_cmp(&rows[a].rho.abs()))
            .then(position[a].cmp(&position[b]))
    });
    rows = indices.into_iter().map(|i| rows[i].clone()).collect();

    Ok(CorrelationReport { rows, warnings })
}
