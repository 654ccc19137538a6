//! Feature CSV format: header `subject_id,label,age,gender,<columns...>`
//! with column labels `"<stat> <base> a=<alpha> [<approach>]"`. Feature
//! values carry 17 significant digits; missing values are empty fields.

use std::path::Path;

use anyhow::{bail, Context};

use fdkin_core::features::{ColumnKey, FeatureMatrix, SubjectInfo};
use fdkin_core::signal::{Gender, Label};

use crate::{fmt_g17, write_atomic};

pub fn write_feature_csv(path: &Path, matrix: &FeatureMatrix) -> anyhow::Result<()> {
    let mut out = String::from("subject_id,label,age,gender");
    for key in &matrix.columns {
        out.push(',');
        out.push_str(&key.label());
    }
    out.push('\n');
    for (subject, row) in matrix.subjects.iter().zip(&matrix.values) {
        out.push_str(&subject.subject_id);
        out.push(',');
        out.push_str(subject.label.as_str());
        out.push(',');
        if let Some(age) = subject.age {
            out.push_str(&format!("{age}"));
        }
        out.push(',');
        if let Some(gender) = subject.gender {
            out.push_str(gender.as_str());
        }
        for value in row {
            out.push(',');
            if let Some(v) = value {
                out.push_str(&fmt_g17(*v));
            }
        }
        out.push('\n');
    }
    write_atomic(path, &out)
}

pub fn read_feature_csv(path: &Path) -> anyhow::Result<FeatureMatrix> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let header: Vec<&str> = headers.iter().collect();
    if header.len() < 5 || header[..4] != ["subject_id", "label", "age", "gender"] {
        bail!(
            "{}: expected header starting with subject_id,label,age,gender,<features>",
            path.display()
        );
    }
    let columns: Vec<ColumnKey> = header[4..]
        .iter()
        .map(|label| {
            ColumnKey::parse_label(label)
                .with_context(|| format!("{}: bad feature column {label:?}", path.display()))
        })
        .collect::<anyhow::Result<_>>()?;

    let mut subjects = Vec::new();
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row_no = i + 2;
        if record.len() != 4 + columns.len() {
            bail!("{} row {row_no}: wrong field count", path.display());
        }
        let label = Label::from_str(&record[1])
            .with_context(|| format!("{} row {row_no}: label must be PD or HC", path.display()))?;
        let age = if record[2].is_empty() {
            None
        } else {
            Some(record[2].parse::<f64>().with_context(|| {
                format!("{} row {row_no}: age is not a number", path.display())
            })?)
        };
        let gender = if record[3].is_empty() {
            None
        } else {
            Some(Gender::from_str(&record[3]).with_context(|| {
                format!("{} row {row_no}: gender must be F or M", path.display())
            })?)
        };
        let mut row = Vec::with_capacity(columns.len());
        for j in 0..columns.len() {
            let field = &record[4 + j];
            if field.is_empty() {
                row.push(None);
            } else {
                row.push(Some(field.parse::<f64>().with_context(|| {
                    format!("{} row {row_no}: bad number {field:?}", path.display())
                })?));
            }
        }
        subjects.push(SubjectInfo {
            subject_id: record[0].to_string(),
            label,
            age,
            gender,
        });
        values.push(row);
    }
    if subjects.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    Ok(FeatureMatrix { columns, subjects, values })
}
