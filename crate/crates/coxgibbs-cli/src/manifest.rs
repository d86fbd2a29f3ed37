//! Run manifests: every subcommand writes one, every artifact references
//! its hash, and `fit --from-manifest` replays a fit from one.
//!
//! The hash is the SHA-256 of the manifest body rendered *without* the
//! `timestamp` and `hash` fields, so re-running the same configuration at a
//! different time yields the same hash.

use std::path::Path;

use chrono::{SecondsFormat, Utc};
use coxgibbs::export::Json;
use sha2::{Digest, Sha256};

use crate::{AppError, AppResult};

pub struct Manifest {
    pub subcommand: &'static str,
    pub config: Vec<(&'static str, Json)>,
    pub inputs: Vec<(&'static str, Json)>,
    pub outputs: Vec<(&'static str, Json)>,
}

impl Manifest {
    /// Render the manifest and its hash. The returned JSON includes the
    /// timestamp and hash; the hash covers everything else.
    pub fn finalize(self) -> (String, String) {
        let core = vec![
            ("subcommand", Json::Str(self.subcommand.to_string())),
            (
                "tool_version",
                Json::Str(env!("CARGO_PKG_VERSION").to_string()),
            ),
            ("config", Json::Obj(self.config)),
            ("inputs", Json::Obj(self.inputs)),
            ("outputs", Json::Obj(self.outputs)),
        ];
        let body = Json::Obj(core.clone()).render();
        let digest = Sha256::digest(body.as_bytes());
        let hash = format!("{digest:x}");

        let mut full = core;
        full.push((
            "timestamp",
            Json::Str(Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)),
        ));
        full.push(("hash", Json::Str(hash.clone())));
        (hash, Json::Obj(full).render())
    }
}

/// Write an artifact, creating parent directories as needed.
pub fn write_artifact(path: &Path, contents: &str) -> AppResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}

/// Helpers for pulling typed fields out of a parsed manifest during replay.
pub mod read {
    use coxgibbs::CoxError;
    use serde_json::Value;

    use super::AppError;

    fn missing(field: &str) -> AppError {
        AppError::Runtime(CoxError::InvalidArgument(format!(
            "manifest is missing or mistypes field '{field}'"
        )))
    }

    pub fn str_field(v: &Value, field: &str) -> Result<String, AppError> {
        v.get(field)
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| missing(field))
    }

    pub fn u64_field(v: &Value, field: &str) -> Result<u64, AppError> {
        v.get(field)
            .and_then(Value::as_u64)
            .ok_or_else(|| missing(field))
    }

    pub fn i64_field(v: &Value, field: &str) -> Result<i64, AppError> {
        v.get(field)
            .and_then(Value::as_i64)
            .ok_or_else(|| missing(field))
    }

    pub fn f64_field(v: &Value, field: &str) -> Result<f64, AppError> {
        v.get(field)
            .and_then(Value::as_f64)
            .ok_or_else(|| missing(field))
    }

    pub fn bool_field(v: &Value, field: &str) -> Result<bool, AppError> {
        v.get(field)
            .and_then(Value::as_bool)
            .ok_or_else(|| missing(field))
    }

    pub fn str_list_field(v: &Value, field: &str) -> Result<Vec<String>, AppError> {
        let arr = v
            .get(field)
            .and_then(Value::as_array)
            .ok_or_else(|| missing(field))?;
        arr.iter()
            .map(|item| {
                item.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| missing(field))
            })
            .collect()
    }
}
