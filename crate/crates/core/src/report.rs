//! Run reports and CSV emission: lossless numeric formatting, reproducible
//! checksums, and a warning channel so no flag is silently dropped.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// 17 significant digits: doubles round-trip exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct ProducedFile {
    pub path: PathBuf,
    /// SHA-256 over the payload, excluding comment lines (leading '#'),
    /// so the timestamped header does not break reproducibility.
    pub sha256: String,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Warning {
    pub operation: String,
    pub parameters: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario_name: String,
    pub task: String,
    pub seed: u64,
    pub scenario: serde_json::Value,
    pub files: Vec<ProducedFile>,
    pub warnings: Vec<Warning>,
    /// Headline numbers of the run (supremum, fitted rate, ...).
    pub summary: serde_json::Value,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn new(name: &str, task: &str, seed: u64, scenario: serde_json::Value) -> Self {
        RunReport {
            scenario_name: name.to_string(),
            task: task.to_string(),
            seed,
            scenario,
            files: Vec::new(),
            warnings: Vec::new(),
            summary: serde_json::Value::Null,
            wall_time_s: 0.0,
        }
    }

    pub fn warn(&mut self, operation: &str, parameters: &str, message: String) {
        self.warnings.push(Warning {
            operation: operation.to_string(),
            parameters: parameters.to_string(),
            message,
        });
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "scenario: {}\ntask: {}\nseed: {}\nwall_time_s: {:.3}\n",
            self.scenario_name, self.task, self.seed, self.wall_time_s
        );
        s.push_str(&format!("summary: {}\n", self.summary));
        s.push_str("files:\n");
        for f in &self.files {
            s.push_str(&format!(
                "  {} rows={} sha256={}\n",
                f.path.display(),
                f.rows,
                f.sha256
            ));
        }
        if self.warnings.is_empty() {
            s.push_str("warnings: []\n");
        } else {
            s.push_str("warnings:\n");
            for w in &self.warnings {
                s.push_str(&format!("  [{} {}] {}\n", w.operation, w.parameters, w.message));
            }
        }
        s
    }

    /// JSON report next to the data files; field order is the struct order.
    pub fn write_json(&self, path: &Path) -> Result<(), ReportError> {
        let body = serde_json::to_string_pretty(self).expect("report is serializable");
        std::fs::write(path, body + "\n").map_err(|source| ReportError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn checksum_skipping_comments(payload: &str) -> String {
    let mut hasher = Sha256::new();
    for line in payload.lines() {
        if line.starts_with('#') {
            continue;
        }
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
    }
    format!("{:x}", hasher.finalize())
}

/// CSV with '.' decimal separator, LF endings, a header row, and a leading
/// timestamped comment line that checksums skip.
pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<ProducedFile, ReportError> {
    let mut payload = String::new();
    payload.push_str(&format!(
        "# generated {}\n",
        chrono::Utc::now().to_rfc3339()
    ));
    payload.push_str(&header.join(","));
    payload.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        payload.push_str(&row.join(","));
        payload.push('\n');
    }
    let mut f = std::fs::File::create(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    f.write_all(payload.as_bytes()).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(ProducedFile {
        path: path.to_path_buf(),
        sha256: checksum_skipping_comments(&payload),
        rows: rows.len(),
    })
}

/// Output directory resolution: THERMO_OUT_DIR beats the scenario field,
/// which beats the current directory.
pub fn resolve_out_dir(scenario_out: Option<&Path>) -> PathBuf {
    if let Ok(env) = std::env::var("THERMO_OUT_DIR") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    scenario_out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_round_trip() {
        for &x in &[0.1, std::f64::consts::PI, 8.9407e-4, -1.0 / 3.0, 1e300] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn checksum_ignores_comment_lines() {
        let a = "# generated 2020\nh\n1,2\n";
        let b = "# generated 2021\nh\n1,2\n";
        assert_eq!(checksum_skipping_comments(a), checksum_skipping_comments(b));
        let c = "# generated 2021\nh\n1,3\n";
        assert_ne!(checksum_skipping_comments(a), checksum_skipping_comments(c));
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let file = write_csv(
            &path,
            &["t", "E"],
            &[vec![fmt_f64(0.0), fmt_f64(1.0)], vec![fmt_f64(0.1), fmt_f64(0.5)]],
        )
        .unwrap();
        assert_eq!(file.rows, 2);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(!text.contains('\r'));
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with('#'));
        assert_eq!(lines.next().unwrap(), "t,E");
    }
}
