//! Correlation and classification report files.
//!
//! Machine CSVs carry 17 significant digits; the plain-text classification
//! report rounds to 4 decimals and echoes the winning hyperparameters.

use std::path::Path;

use fdkin_core::learn::{GbtConfig, MetricsReport};
use fdkin_core::stats::CorrelationRow;

use crate::{fmt_g17, fmt_human, write_atomic};

pub fn correlation_csv(rows: &[CorrelationRow]) -> String {
    let mut out = String::from("feature,rho,p_s,p_s_adj,r,p_p,p_p_adj\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.feature.label(),
            fmt_g17(row.rho),
            fmt_g17(row.p_s),
            fmt_g17(row.p_s_adj),
            fmt_g17(row.r),
            fmt_g17(row.p_p),
            fmt_g17(row.p_p_adj),
        ));
    }
    out
}

pub fn write_correlation_reports(
    dir: &Path,
    approach_code: &str,
    rows: &[CorrelationRow],
    top_k: usize,
) -> anyhow::Result<()> {
    write_atomic(
        &dir.join(format!("correlation_{approach_code}_full.csv")),
        &correlation_csv(rows),
    )?;
    write_atomic(
        &dir.join(format!("correlation_{approach_code}_top{top_k}.csv")),
        &correlation_csv(&rows[..top_k.min(rows.len())]),
    )
}

/// One classification report row: the display name (an approach code or
/// "ALL"), the winning configuration and its cross-validated metrics.
pub struct ClassificationRow {
    pub name: String,
    pub config: GbtConfig,
    pub report: MetricsReport,
}

fn opt_csv(v: Option<f64>, fmt: fn(f64) -> String) -> String {
    v.map(fmt).unwrap_or_default()
}

pub fn write_classification_reports(dir: &Path, rows: &[ClassificationRow]) -> anyhow::Result<()> {
    let mut csv = String::from("approach,mcc,bacc,sen,spe,pre,f1\n");
    for row in rows {
        let r = &row.report;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.name,
            fmt_g17(r.mcc),
            fmt_g17(r.bacc),
            fmt_g17(r.sen),
            fmt_g17(r.spe),
            opt_csv(r.pre, fmt_g17),
            opt_csv(r.f1, fmt_g17),
        ));
    }
    write_atomic(&dir.join("classification_report.csv"), &csv)?;

    let mut params = String::from(
        "approach,n_estimators,learning_rate,gamma,max_depth,subsample,\
         colsample_bylevel,colsample_bytree,scale_pos_weight,min_child_weight\n",
    );
    for row in rows {
        let c = &row.config;
        params.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.name,
            c.n_estimators,
            c.learning_rate,
            c.gamma,
            c.max_depth,
            c.subsample,
            c.colsample_bylevel,
            c.colsample_bytree,
            c.scale_pos_weight,
            c.min_child_weight,
        ));
    }
    write_atomic(&dir.join("classification_params.csv"), &params)?;

    let mut text = String::from("approach      MCC     BACC    SEN     SPE     PRE     F1\n");
    for row in rows {
        let r = &row.report;
        text.push_str(&format!(
            "{:<10}  {:>6}  {:>6}  {:>6}  {:>6}  {:>6}  {:>6}\n",
            row.name,
            fmt_human(r.mcc),
            fmt_human(r.bacc),
            fmt_human(r.sen),
            fmt_human(r.spe),
            opt_csv(r.pre, fmt_human),
            opt_csv(r.f1, fmt_human),
        ));
    }
    text.push('\n');
    for row in rows {
        let c = &row.config;
        text.push_str(&format!(
            "{}: n_estimators={} learning_rate={} gamma={} max_depth={} subsample={} \
             colsample_bylevel={} colsample_bytree={} scale_pos_weight={} min_child_weight={}\n",
            row.name,
            c.n_estimators,
            c.learning_rate,
            c.gamma,
            c.max_depth,
            c.subsample,
            c.colsample_bylevel,
            c.colsample_bytree,
            c.scale_pos_weight,
            c.min_child_weight,
        ));
    }
    write_atomic(&dir.join("classification_report.txt"), &text)
}
