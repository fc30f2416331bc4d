//! Evaluation reports: CSV and JSON files plus plot-ready series.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::radar::ActivityLabel;

/// Published AUC of the 2D-A network for breathing at -20 dB.
pub const PUBLISHED_RESNET_2DA_AUC: f64 = 0.91;
/// Published AUC of the variational message-passing detector in the same setting.
pub const PUBLISHED_VMP_AUC: f64 = 0.87;
/// SNR of the two published values above.
pub const PUBLISHED_COMPARISON_SNR_DB: f64 = -20.0;
/// Published upper bound on the FLOPs of 1D-D.
pub const PUBLISHED_1DD_FLOP_BOUND: f64 = 1e7;

pub const CSV_HEADER: &str = "name,activity,snr_db,auc,flops,n_pos,n_neg,seed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    /// Variant or detector name.
    pub name: String,
    pub activity: ActivityLabel,
    pub snr_db: f64,
    pub auc: f64,
    pub flops: u64,
    pub n_pos: usize,
    pub n_neg: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportProvenance {
    pub seed: u64,
    /// SHA-256 of the resolved configuration.
    pub config_hash: String,
    /// Pure-noise negatives added to the empty test samples at every SNR.
    #[serde(default)]
    pub noise_negatives: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub provenance: ReportProvenance,
}

impl EvalReport {
    pub fn validate(&self) -> Result<()> {
        for r in &self.rows {
            if !(0.0..=1.0).contains(&r.auc) || r.n_pos == 0 || r.n_neg == 0 {
                return Err(Error::Config(format!("invalid report row {r:?}")));
            }
        }
        Ok(())
    }

    pub fn extend(&mut self, other: EvalReport) {
        self.rows.extend(other.rows);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.name, r.activity, r.snr_db, r.auc, r.flops, r.n_pos, r.n_neg, r.seed
            );
        }
        s
    }

    /// Parses rows written by [`to_csv`](Self::to_csv). Provenance is not
    /// part of the CSV form; the seed column is.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == CSV_HEADER => {}
            other => return Err(Error::Parse(format!("unexpected CSV header {other:?}"))),
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split(',').collect();
            let bad = |what: &str| Error::Parse(format!("CSV line {}: bad {what}", i + 2));
            if f.len() != 8 {
                return Err(bad("column count"));
            }
            rows.push(EvalRow {
                name: f[0].to_string(),
                activity: f[1].parse()?,
                snr_db: f[2].parse().map_err(|_| bad("snr_db"))?,
                auc: f[3].parse().map_err(|_| bad("auc"))?,
                flops: f[4].parse().map_err(|_| bad("flops"))?,
                n_pos: f[5].parse().map_err(|_| bad("n_pos"))?,
                n_neg: f[6].parse().map_err(|_| bad("n_neg"))?,
                seed: f[7].parse().map_err(|_| bad("seed"))?,
            });
        }
        let provenance = ReportProvenance {
            seed: rows.first().map_or(0, |r| r.seed),
            ..ReportProvenance::default()
        };
        Ok(Self { rows, provenance })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("report JSON: {e}")))
    }

    /// One series per (name, activity), in first-appearance order.
    pub fn plot_data(&self, x_axis: PlotAxis) -> PlotData {
        let mut series: Vec<PlotSeries> = Vec::new();
        for r in &self.rows {
            let key = match x_axis {
                PlotAxis::SnrDb => (r.name.clone(), r.activity),
                // one point per variant, one curve per activity (and detector family)
                PlotAxis::Flops => (String::new(), r.activity),
            };
            let idx = match series.iter().position(|s| (s.name.clone(), s.activity) == key) {
                Some(i) => i,
                None => {
                    series.push(PlotSeries {
                        name: key.0.clone(),
                        activity: key.1,
                        labels: Vec::new(),
                        x: Vec::new(),
                        y: Vec::new(),
                    });
                    series.len() - 1
                }
            };
            let s = &mut series[idx];
            s.labels.push(r.name.clone());
            s.x.push(match x_axis {
                PlotAxis::SnrDb => r.snr_db,
                PlotAxis::Flops => r.flops as f64,
            });
            s.y.push(r.auc);
        }
        PlotData {
            x_axis,
            y_axis: "auc".into(),
            series,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotAxis {
    SnrDb,
    Flops,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub name: String,
    pub activity: ActivityLabel,
    /// Row name of every point.
    pub labels: Vec<String>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub x_axis: PlotAxis,
    pub y_axis: String,
    pub series: Vec<PlotSeries>,
}

/// Hex SHA-256 of the JSON form of `config`.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_vec(config).expect("config serializes");
    Sha256::digest(&json)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub enum ReportFormat {
    Csv,
    Json,
}

pub fn emit_report(report: &EvalReport, format: ReportFormat, path: &Path) -> Result<()> {
    match format {
        ReportFormat::Csv => write(path, &report.to_csv()),
        ReportFormat::Json => write(path, &report.to_json()),
    }
}

pub fn emit_plot_data(report: &EvalReport, x_axis: PlotAxis, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(&report.plot_data(x_axis)).expect("plot data serializes");
    write(path, &json)
}

pub fn read_report(path: &Path) -> Result<EvalReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|e| e == "csv") {
        EvalReport::from_csv(&text)
    } else {
        EvalReport::from_json(&text)
    }
}
