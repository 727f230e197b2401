//! Result serialization: CSV data files and the JSON run manifest.
//!
//! Column contracts are stable: distributions as `t,x[,y],P` (zero-mass
//! sites omitted), metrics as `t,variance,p_esc,stderr_var,stderr_pesc`
//! (escape columns empty when no boundary is configured).

use std::path::{Path, PathBuf};

use serde::Serialize;

use qwalk_core::{Dim, Distribution, MetricSeries};

use crate::CliError;

/// Tracks emitted files so every data file lands in exactly one manifest.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<OutputDir, CliError> {
        std::fs::create_dir_all(root)
            .map_err(|e| CliError::Io(format!("creating {}: {e}", root.display())))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    fn register(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.root.join(name)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.register(name);
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Io(format!("encoding {name}: {e}")))?;
        std::fs::write(&path, text)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
    }

    /// Distribution series as `t,x[,y],P`, one row per nonzero site.
    pub fn write_distributions(
        &mut self,
        name: &str,
        dists: &[Distribution],
    ) -> Result<(), CliError> {
        let path = self.register(name);
        let mut w = csv::Writer::from_path(&path)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
        let io_err = |e: csv::Error| CliError::Io(format!("writing {name}: {e}"));
        let two_d = dists
            .first()
            .map(|d| d.extent().dim() == Dim::Two)
            .unwrap_or(false);
        if two_d {
            w.write_record(["t", "x", "y", "P"]).map_err(io_err)?;
        } else {
            w.write_record(["t", "x", "P"]).map_err(io_err)?;
        }
        for dist in dists {
            let t = dist.time().to_string();
            for (pos, p) in dist.iter() {
                if p == 0.0 {
                    continue;
                }
                let prob = format!("{p}");
                if two_d {
                    w.write_record([&t, &pos.x.to_string(), &pos.y.to_string(), &prob])
                        .map_err(io_err)?;
                } else {
                    w.write_record([&t, &pos.x.to_string(), &prob])
                        .map_err(io_err)?;
                }
            }
        }
        w.flush()
            .map_err(|e| CliError::Io(format!("writing {name}: {e}")))
    }

    /// Metric curves as `t,variance,p_esc,stderr_var,stderr_pesc`.
    pub fn write_metrics(&mut self, name: &str, series: &MetricSeries) -> Result<(), CliError> {
        let path = self.register(name);
        let mut w = csv::Writer::from_path(&path)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
        let io_err = |e: csv::Error| CliError::Io(format!("writing {name}: {e}"));
        w.write_record(["t", "variance", "p_esc", "stderr_var", "stderr_pesc"])
            .map_err(io_err)?;
        let with_escape = !series.p_esc.is_empty();
        for t in 0..series.len() {
            let esc = if with_escape {
                format!("{}", series.p_esc[t])
            } else {
                String::new()
            };
            let esc_se = if with_escape {
                format!("{}", series.stderr_p_esc[t])
            } else {
                String::new()
            };
            w.write_record([
                (t + 1).to_string(),
                format!("{}", series.variance[t]),
                esc,
                format!("{}", series.stderr_variance[t]),
                esc_se,
            ])
            .map_err(io_err)?;
        }
        w.flush()
            .map_err(|e| CliError::Io(format!("writing {name}: {e}")))
    }

    /// Per-run summary line for grid presets.
    pub fn write_summary(&mut self, name: &str, rows: &[SummaryRow]) -> Result<(), CliError> {
        let path = self.register(name);
        let mut w = csv::Writer::from_path(&path)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
        let io_err = |e: csv::Error| CliError::Io(format!("writing {name}: {e}"));
        w.write_record([
            "label",
            "p",
            "p_d",
            "t_b",
            "trials",
            "final_variance",
            "final_p_esc",
            "stderr_variance",
            "stderr_p_esc",
        ])
        .map_err(io_err)?;
        for row in rows {
            w.write_record([
                row.label.clone(),
                format!("{}", row.p),
                format!("{}", row.p_d),
                row.t_b.map(|v| v.to_string()).unwrap_or_default(),
                row.trials.to_string(),
                format!("{}", row.final_variance),
                row.final_p_esc.map(|v| format!("{v}")).unwrap_or_default(),
                format!("{}", row.stderr_variance),
                row.stderr_p_esc.map(|v| format!("{v}")).unwrap_or_default(),
            ])
            .map_err(io_err)?;
        }
        w.flush()
            .map_err(|e| CliError::Io(format!("writing {name}: {e}")))
    }

    /// Write the manifest referencing every file emitted so far (plus
    /// itself) and return the full list.
    pub fn write_manifest(&mut self, manifest: &RunManifest) -> Result<(), CliError> {
        let mut manifest = manifest.clone();
        manifest.outputs = self.files.clone();
        self.write_json("manifest.json", &manifest)
    }
}

#[derive(Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub version: String,
    pub created_utc: String,
    /// Generator identity; part of the same-seed-same-numbers contract.
    pub rng_algorithm: String,
    pub master_seed: u64,
    /// "flag" when --seed was given, "generated" otherwise.
    pub seed_source: String,
    /// Config echo for single-config commands; grid commands reference
    /// per-run config files instead.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, master_seed: u64, seed_from_flag: bool) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            created_utc: chrono::Utc::now().to_rfc3339(),
            rng_algorithm: qwalk_core::RNG_ALGORITHM.to_string(),
            master_seed,
            seed_source: if seed_from_flag { "flag" } else { "generated" }.to_string(),
            config: None,
            outputs: Vec::new(),
        }
    }
}

pub struct SummaryRow {
    pub label: String,
    pub p: f64,
    pub p_d: f64,
    pub t_b: Option<u32>,
    pub trials: u64,
    pub final_variance: f64,
    pub final_p_esc: Option<f64>,
    pub stderr_variance: f64,
    pub stderr_p_esc: Option<f64>,
}

impl SummaryRow {
    pub fn from_result(label: &str, result: &qwalk_core::EnsembleResult) -> SummaryRow {
        let s = &result.series;
        SummaryRow {
            label: label.to_string(),
            p: result.config.p,
            p_d: result.config.p_d,
            t_b: result.config.t_b,
            trials: result.config.trials,
            final_variance: *s.variance.last().unwrap(),
            final_p_esc: s.p_esc.last().copied(),
            stderr_variance: *s.stderr_variance.last().unwrap(),
            stderr_p_esc: s.stderr_p_esc.last().copied(),
        }
    }
}
