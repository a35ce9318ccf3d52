//! Run artifacts: versioned CSV tables, the JSON summary, and the config
//! hash that ties them to the exact inputs.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::Write;

use serde::Serialize;

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

/// Deterministic float formatting shared by every CSV cell.
pub fn num(v: f64) -> String {
    format!("{v:.12e}")
}

pub struct Table {
    /// versioned schema tag written as a leading comment line
    pub schema: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        writeln!(buf, "# schema: {}", self.schema).expect("write to vec");
        let mut writer = csv::Writer::from_writer(buf);
        writer.write_record(&self.columns).expect("write header");
        for row in &self.rows {
            writer.write_record(row).expect("write row");
        }
        writer.into_inner().expect("flush csv")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// |measured| ≤ tolerance.
    pub fn residual(name: &str, measured: f64, tolerance: f64) -> Check {
        Check {
            name: name.to_string(),
            measured,
            tolerance,
            pass: measured.abs() <= tolerance,
        }
    }

    /// measured ≥ threshold (tolerance field records the threshold).
    pub fn at_least(name: &str, measured: f64, threshold: f64) -> Check {
        Check {
            name: name.to_string(),
            measured,
            tolerance: threshold,
            pass: measured >= threshold,
        }
    }
}

#[derive(Serialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub experiment: &'static str,
    pub config_hash: String,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub details: serde_json::Map<String, serde_json::Value>,
    pub artifacts: Vec<String>,
}

impl RunSummary {
    pub fn to_json_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("summary serializes");
        bytes.push(b'\n');
        bytes
    }
}

/// 64-bit hash of the normalized config text.
pub fn config_hash(normalized: &str) -> String {
    let mut hasher = DefaultHasher::new();
    normalized.hash(&mut hasher);
    format!("{:016x}", hasher.finish())
}
