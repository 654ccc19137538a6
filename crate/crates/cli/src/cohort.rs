//! Cohort directories: one SVC file per subject plus a `subjects.csv`
//! sidecar with header `subject_id,label,age,gender,path`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};

use fdkin_core::features::SubjectInfo;
use fdkin_core::signal::{parse_svc, write_svc, Gender, HandwritingRecording, Label};

use crate::write_atomic;

/// A subjects.csv row.
#[derive(Clone, Debug)]
pub struct CohortEntry {
    pub info: SubjectInfo,
    /// SVC path relative to the cohort directory.
    pub path: PathBuf,
}

/// Writes every recording as `<subject_id>.svc` plus the sidecar.
pub fn write_cohort(dir: &Path, recordings: &[HandwritingRecording]) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut sidecar = String::from("subject_id,label,age,gender,path\n");
    for rec in recordings {
        let file_name = format!("{}.svc", rec.subject_id);
        write_atomic(&dir.join(&file_name), &write_svc(rec))?;
        let label = rec.label.context("synthetic recordings always carry a label")?;
        let age = rec.age.map(|a| format!("{a}")).unwrap_or_default();
        let gender = rec.gender.map(|g| g.as_str().to_string()).unwrap_or_default();
        sidecar.push_str(&format!(
            "{},{},{},{},{}\n",
            rec.subject_id,
            label.as_str(),
            age,
            gender,
            file_name
        ));
    }
    write_atomic(&dir.join("subjects.csv"), &sidecar)
}

/// Reads the sidecar; rows keep file order.
pub fn read_cohort(dir: &Path) -> anyhow::Result<Vec<CohortEntry>> {
    let sidecar = dir.join("subjects.csv");
    let mut reader = csv::Reader::from_path(&sidecar)
        .with_context(|| format!("cannot open {}", sidecar.display()))?;
    {
        let headers = reader.headers()?;
        let expected = ["subject_id", "label", "age", "gender", "path"];
        if headers.iter().collect::<Vec<_>>() != expected {
            bail!(
                "{}: expected header {:?}, got {:?}",
                sidecar.display(),
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            );
        }
    }
    let mut entries = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2;
        if record.len() != 5 {
            bail!("{} row {row}: expected 5 fields", sidecar.display());
        }
        let subject_id = record[0].to_string();
        if subject_id.is_empty() {
            bail!("{} row {row}: empty subject_id", sidecar.display());
        }
        let label = Label::from_str(&record[1])
            .with_context(|| format!("{} row {row}: label must be PD or HC", sidecar.display()))?;
        let age = if record[2].is_empty() {
            None
        } else {
            Some(record[2].parse::<f64>().with_context(|| {
                format!("{} row {row}: age is not a number", sidecar.display())
            })?)
        };
        let gender = if record[3].is_empty() {
            None
        } else {
            Some(Gender::from_str(&record[3]).with_context(|| {
                format!("{} row {row}: gender must be F or M", sidecar.display())
            })?)
        };
        entries.push(CohortEntry {
            info: SubjectInfo { subject_id, label, age, gender },
            path: PathBuf::from(&record[4]),
        });
    }
    if entries.is_empty() {
        bail!("{}: no subjects listed", sidecar.display());
    }
    Ok(entries)
}

/// Loads and parses one subject's SVC file, attaching the sidecar metadata.
pub fn load_recording(dir: &Path, entry: &CohortEntry) -> anyhow::Result<HandwritingRecording> {
    let path = dir.join(&entry.path);
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut rec = parse_svc(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    rec.subject_id = entry.info.subject_id.clone();
    rec.label = Some(entry.info.label);
    rec.age = entry.info.age;
    rec.gender = entry.info.gender;
    Ok(rec)
}
