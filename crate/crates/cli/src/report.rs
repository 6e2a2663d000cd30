//! Result records and their CSV/JSON serialization.
//!
//! The CSV column order and the JSON field names are frozen; they are the
//! output compatibility surface. Floats print with 17 significant digits
//! ('.' decimal separator), which round-trips f64 exactly.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

pub const UNITS_LINE: &str = "entropy_nats, beta_inverse_energy";

/// One verification result at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub suite: String,
    pub model: String,
    pub statistics: String,
    /// Inverse temperature, formatted ("inf" for ground states).
    pub beta: String,
    /// Window size in sites (0 when not applicable).
    pub window: usize,
    /// Region label ("-" when not applicable).
    pub region: String,
    /// Named numeric results.
    pub quantities: BTreeMap<String, f64>,
    /// Named signed margins; every entry must be ≥ -tolerance for a pass.
    /// Residual-style checks store the negated residual.
    pub slacks: BTreeMap<String, f64>,
    /// Pass tolerance applied to the slack entries.
    pub tolerance: f64,
    pub truncated: bool,
    pub converged: bool,
    pub skipped: bool,
    /// Free-form annotation (error messages, skip reasons, surrogate labels).
    #[serde(default)]
    pub note: String,
    pub pass: bool,
}

impl ResultRecord {
    /// Evaluate the pass flag from the slacks and tolerance.
    pub fn finalize(mut self) -> ResultRecord {
        self.pass = self.slacks.values().all(|&s| s >= -self.tolerance);
        self
    }

    /// Deterministic sort key: (suite, model, β, window, region).
    pub fn sort_key(&self) -> (String, String, f64, usize, String) {
        (
            self.suite.clone(),
            self.model.clone(),
            parse_beta(&self.beta),
            self.window,
            self.region.clone(),
        )
    }
}

pub fn format_beta(beta: f64) -> String {
    if beta.is_infinite() {
        "inf".to_string()
    } else {
        format_float(beta)
    }
}

pub fn parse_beta(text: &str) -> f64 {
    if text == "inf" {
        f64::INFINITY
    } else {
        text.parse().unwrap_or(f64::NAN)
    }
}

/// 17 significant digits: exact f64 round-trip.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Entropy-valued suites whose outputs the `--bits` toggle rescales by
/// 1/ln 2. Residual-, energy- and norm-valued suites stay in natural units.
pub fn suite_is_entropy_valued(suite: &str) -> bool {
    matches!(
        suite,
        "area_law" | "halves_series" | "donald" | "ssa" | "ground_state" | "gaussian_scan"
    )
}

/// Apply the bits display rescale to a copy of the records.
pub fn rescale_to_bits(records: &[ResultRecord]) -> Vec<ResultRecord> {
    let ln2 = std::f64::consts::LN_2;
    records
        .iter()
        .map(|r| {
            let mut out = r.clone();
            if suite_is_entropy_valued(&r.suite) {
                for v in out.quantities.values_mut() {
                    *v /= ln2;
                }
                for v in out.slacks.values_mut() {
                    *v /= ln2;
                }
            }
            out
        })
        .collect()
}

fn pack_map(map: &BTreeMap<String, f64>) -> String {
    map.iter()
        .map(|(k, v)| format!("{k}={}", format_float(*v)))
        .collect::<Vec<_>>()
        .join("|")
}

/// CSV with the frozen column order; one row per record, a units comment
/// line, then the header.
pub fn to_csv(records: &[ResultRecord]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# units: {UNITS_LINE}\n"));
    out.push_str("suite,model,statistics,beta,window,region,pass,truncated,converged,skipped,tolerance,quantities,slacks,note\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.suite,
            r.model,
            r.statistics,
            r.beta,
            r.window,
            r.region,
            r.pass,
            r.truncated,
            r.converged,
            r.skipped,
            format_float(r.tolerance),
            pack_map(&r.quantities),
            pack_map(&r.slacks),
            r.note,
        ));
    }
    out
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct JsonDocument {
    pub units: String,
    pub records: Vec<ResultRecord>,
}

pub fn to_json(records: &[ResultRecord]) -> String {
    let doc = JsonDocument {
        units: UNITS_LINE.to_string(),
        records: records.to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable records");
    text.push('\n');
    text
}

#[cfg(test)]
pub fn from_json(text: &str) -> Result<JsonDocument, serde_json::Error> {
    serde_json::from_str(text)
}

/// Write records in the requested format; used by both `run` and tests.
pub fn emit(
    records: &[ResultRecord],
    format: OutputFormat,
    mut sink: impl Write,
) -> std::io::Result<()> {
    let text = match format {
        OutputFormat::Csv => to_csv(records),
        OutputFormat::Json => to_json(records),
    };
    sink.write_all(text.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}
