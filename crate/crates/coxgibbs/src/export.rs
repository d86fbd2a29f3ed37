//! Machine-readable artifacts: fit reports, chain sample CSVs with their
//! JSON sidecars, calibration reports, and dataset CSVs.
//!
//! JSON is emitted with a fixed field order and floats printed to 17
//! significant digits so artifacts diff stably across runs and platforms.

use std::io::{self, Write};

use crate::gpc::GpcRound;
use crate::gs4cox::Chain;

/// 17-significant-digit float formatting used in every numeric artifact;
/// round-trips any finite f64 exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A JSON value that renders object keys in insertion order.
#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Bool(bool),
    F64(f64),
    U64(u64),
    I64(i64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(&'static str, Json)>),
}

impl Json {
    pub fn from_f64_slice(values: &[f64]) -> Json {
        Json::Arr(values.iter().map(|v| Json::F64(*v)).collect())
    }

    pub fn opt_f64(v: Option<f64>) -> Json {
        v.map_or(Json::Null, Json::F64)
    }

    pub fn opt_f64_slice(v: Option<&[f64]>) -> Json {
        v.map_or(Json::Null, Json::from_f64_slice)
    }

    fn write(&self, out: &mut String) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::F64(v) => {
                if v.is_finite() {
                    out.push_str(&fmt_f64(*v));
                } else {
                    out.push_str("null");
                }
            }
            Json::U64(v) => out.push_str(&v.to_string()),
            Json::I64(v) => out.push_str(&v.to_string()),
            Json::Str(s) => write_json_string(s, out),
            Json::Arr(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.write(out);
                }
                out.push(']');
            }
            Json::Obj(fields) => {
                out.push('{');
                for (i, (key, value)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_json_string(key, out);
                    out.push(':');
                    value.write(out);
                }
                out.push('}');
            }
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out.push('\n');
        out
    }
}

fn write_json_string(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                out.push_str(&format!("\\u{:04x}", c as u32));
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Sampler configuration echoed inside a fit report.
#[derive(Debug, Clone)]
pub struct ReportConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub learning_rate: f64,
    pub prior_variance: f64,
    pub ties: String,
    pub seed: u64,
    pub threads: usize,
    pub corrected: bool,
}

impl ReportConfig {
    fn to_json(&self) -> Json {
        Json::Obj(vec![
            ("iterations", Json::U64(self.iterations as u64)),
            ("burn_in", Json::U64(self.burn_in as u64)),
            ("learning_rate", Json::F64(self.learning_rate)),
            ("prior_variance", Json::F64(self.prior_variance)),
            ("ties", Json::Str(self.ties.clone())),
            ("seed", Json::U64(self.seed)),
            ("threads", Json::U64(self.threads as u64)),
            ("corrected", Json::Bool(self.corrected)),
        ])
    }
}

/// The single machine-readable artifact of a fit.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub method: String,
    pub estimates: Vec<f64>,
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
    pub ess: Option<Vec<f64>>,
    pub ess_avg: Option<f64>,
    pub esr: Option<f64>,
    /// Present for the Metropolis sampler only.
    pub acceptance_rate: Option<f64>,
    /// The translation applied by the finite-sample correction, if any.
    pub correction: Option<Vec<f64>>,
    pub config: ReportConfig,
    pub manifest_hash: String,
}

impl FitReport {
    pub fn to_json(&self) -> String {
        let mut fields: Vec<(&'static str, Json)> = vec![
            ("method", Json::Str(self.method.clone())),
            ("estimates", Json::from_f64_slice(&self.estimates)),
            ("ci_lo", Json::from_f64_slice(&self.ci_lo)),
            ("ci_hi", Json::from_f64_slice(&self.ci_hi)),
            ("ess", Json::opt_f64_slice(self.ess.as_deref())),
            ("ess_avg", Json::opt_f64(self.ess_avg)),
            ("esr", Json::opt_f64(self.esr)),
        ];
        if let Some(rate) = self.acceptance_rate {
            fields.push(("acceptance_rate", Json::F64(rate)));
        }
        fields.push(("correction", Json::opt_f64_slice(self.correction.as_deref())));
        fields.push(("config", self.config.to_json()));
        fields.push(("manifest_hash", Json::Str(self.manifest_hash.clone())));
        Json::Obj(fields).render()
    }
}

/// Metadata accompanying a samples CSV.
#[derive(Debug, Clone)]
pub struct ChainSidecar {
    pub seed: u64,
    pub iterations: usize,
    pub burn_in: usize,
    pub learning_rate: f64,
    pub corrected: bool,
    pub correction: Option<Vec<f64>>,
    pub wall_seconds: f64,
    /// Present for the Metropolis sampler only.
    pub acceptance_rate: Option<f64>,
    pub manifest_hash: String,
}

impl ChainSidecar {
    pub fn to_json(&self) -> String {
        let mut fields: Vec<(&'static str, Json)> = vec![
            ("seed", Json::U64(self.seed)),
            ("iterations", Json::U64(self.iterations as u64)),
            ("burn_in", Json::U64(self.burn_in as u64)),
            ("learning_rate", Json::F64(self.learning_rate)),
            ("corrected", Json::Bool(self.corrected)),
            ("correction", Json::opt_f64_slice(self.correction.as_deref())),
            ("wall_seconds", Json::F64(self.wall_seconds)),
        ];
        if let Some(rate) = self.acceptance_rate {
            fields.push(("acceptance_rate", Json::F64(rate)));
        }
        fields.push(("manifest_hash", Json::Str(self.manifest_hash.clone())));
        Json::Obj(fields).render()
    }
}

/// Calibration artifact: final learning rate plus the per-round trace.
#[derive(Debug, Clone)]
pub struct CalibrationReport {
    pub method: String,
    pub w: f64,
    pub converged: bool,
    pub alpha: f64,
    pub tol: f64,
    pub bootstrap_count: usize,
    pub max_rounds: usize,
    pub ties: String,
    pub seed: u64,
    pub rounds: Vec<GpcRound>,
    pub manifest_hash: String,
}

impl CalibrationReport {
    pub fn to_json(&self) -> String {
        let rounds = Json::Arr(
            self.rounds
                .iter()
                .map(|r| {
                    Json::Obj(vec![
                        ("round", Json::U64(r.round as u64)),
                        ("w", Json::F64(r.w)),
                        ("coverage", Json::F64(r.coverage)),
                        ("replicates_used", Json::U64(r.replicates_used as u64)),
                    ])
                })
                .collect(),
        );
        Json::Obj(vec![
            ("method", Json::Str(self.method.clone())),
            ("w", Json::F64(self.w)),
            ("converged", Json::Bool(self.converged)),
            ("alpha", Json::F64(self.alpha)),
            ("tol", Json::F64(self.tol)),
            ("bootstrap_count", Json::U64(self.bootstrap_count as u64)),
            ("max_rounds", Json::U64(self.max_rounds as u64)),
            ("ties", Json::Str(self.ties.clone())),
            ("seed", Json::U64(self.seed)),
            ("rounds", rounds),
            ("manifest_hash", Json::Str(self.manifest_hash.clone())),
        ])
        .render()
    }
}

/// Write a chain as CSV: header `beta_1..beta_P`, one row per sweep
/// (burn-in included), every value at 17 significant digits.
pub fn write_samples_csv<W: Write>(mut out: W, chain: &Chain) -> io::Result<()> {
    let p = chain.dim();
    let header: Vec<String> = (1..=p).map(|j| format!("beta_{j}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for m in 0..chain.iterations() {
        let row: Vec<String> = chain.sample(m).iter().map(|v| fmt_f64(*v)).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Write a dataset as CSV with columns `time,status,<covariates...>`.
/// Times and covariates use shortest exact round-trip formatting; status is
/// 1 for an event, 0 for censoring.
pub fn write_dataset_csv<W: Write>(
    mut out: W,
    data: &crate::data::SurvivalDataset,
) -> io::Result<()> {
    let mut header = vec!["time".to_string(), "status".to_string()];
    header.extend(data.names().iter().map(|n| csv_field(n)));
    writeln!(out, "{}", header.join(","))?;
    for i in 0..data.n() {
        let mut row = Vec::with_capacity(2 + data.p());
        row.push(data.times()[i].to_string());
        row.push(if data.events()[i] { "1" } else { "0" }.to_string());
        row.extend(data.x_row(i).iter().map(|v| v.to_string()));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
