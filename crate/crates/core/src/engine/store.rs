use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::session::{IterationRecord, Session};
use super::EngineError;
use crate::fedsl::pretty_print;

/// Files a session directory may contain, besides `iterations/`.
pub const SESSION_FILES: &[&str] =
    &["config.json", "baseline.json", "accepted.fedsl", "report.json", "report.csv", "usage.json"];

pub(crate) struct Store {
    dir: PathBuf,
}

fn store_err(e: impl std::fmt::Display) -> EngineError {
    EngineError::Store(e.to_string())
}

/// Write to a temp file next to `path`, then rename over it.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), EngineError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| EngineError::Io(e.error))?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), EngineError> {
    let mut text = serde_json::to_string_pretty(value).map_err(store_err)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl Store {
    pub(crate) fn open(dir: &Path) -> Result<Store, EngineError> {
        fs::create_dir_all(dir.join("iterations"))?;
        Ok(Store { dir: dir.to_path_buf() })
    }

    pub(crate) fn write_start(&self, s: &Session) -> Result<(), EngineError> {
        write_json(&self.dir.join("config.json"), &s.config)?;
        write_json(&self.dir.join("baseline.json"), &s.baseline)
    }

    pub(crate) fn write_state(&self, s: &Session, finished: bool) -> Result<(), EngineError> {
        for rec in &s.iterations {
            let path = self.dir.join("iterations").join(format!("{:03}.json", rec.index));
            if !path.exists() {
                write_json(&path, rec)?;
            }
        }
        let accepted = s.accepted_script();
        let text = if accepted.is_empty() { String::new() } else { pretty_print(&accepted) };
        write_atomic(&self.dir.join("accepted.fedsl"), text.as_bytes())?;

        let report = s.report(finished);
        write_json(&self.dir.join("report.json"), &report)?;
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record([
            "iteration",
            "decision",
            "roc_auc_before",
            "roc_auc_after",
            "accuracy_before",
            "accuracy_after",
            "delta_auc",
            "delta_acc",
            "decision_score",
            "human_override",
        ])
        .map_err(store_err)?;
        for r in &report.rows {
            let decision = serde_json::to_value(r.decision).map_err(store_err)?;
            w.write_record([
                r.index.to_string(),
                decision.as_str().unwrap_or_default().to_string(),
                fmt_opt(r.roc_before),
                fmt_opt(r.roc_after),
                fmt_opt(r.acc_before),
                fmt_opt(r.acc_after),
                fmt_opt(r.delta_auc),
                fmt_opt(r.delta_acc),
                fmt_opt(r.decision_score),
                r.human_override.map(|b| b.to_string()).unwrap_or_default(),
            ])
            .map_err(store_err)?;
        }
        let bytes = w.into_inner().map_err(store_err)?;
        write_atomic(&self.dir.join("report.csv"), &bytes)?;
        write_json(&self.dir.join("usage.json"), &report.usage)
    }
}

/// Iteration records of a session directory, in order.
pub fn read_iterations(dir: &Path) -> Result<Vec<IterationRecord>, EngineError> {
    let it = dir.join("iterations");
    if !it.exists() {
        return Ok(vec![]);
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(&it)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for (k, p) in paths.iter().enumerate() {
        let rec: IterationRecord =
            serde_json::from_str(&fs::read_to_string(p)?).map_err(|e| store_err(format!("{}: {e}", p.display())))?;
        if rec.index != k + 1 {
            return Err(store_err(format!("iteration files are not contiguous at {}", p.display())));
        }
        out.push(rec);
    }
    Ok(out)
}
