//! Analysis report and its text, JSON and CSV renderings.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::document::DefaultedRate;
use crate::fta::CutSetList;
use crate::quant::{Method, QuantResult};
use crate::riskmx::RiskMatrix;
use crate::scenario::ScenarioStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Text,
    Structured,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub input_sha256: String,
    pub tool_version: String,
    /// RFC 3339 UTC generation time; omitted for reproducible output.
    pub timestamp: Option<String>,
}

impl Provenance {
    pub fn new(input: &[u8], timestamp: Option<String>) -> Self {
        Self {
            input_sha256: hex::encode(Sha256::digest(input)),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
        }
    }

    pub fn now() -> String {
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeSummary {
    pub top: String,
    pub gates: usize,
    pub events: usize,
    pub stochastic_events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub tree: TreeSummary,
    pub mission_hours: f64,
    pub method: Method,
    /// Multiplier applied to per-hour rates.
    pub rate_scale: f64,
    pub results: QuantResult,
    pub cut_sets: CutSetList,
    pub scenarios: Option<ScenarioStats>,
    pub risk: Option<RiskMatrix>,
    /// Event rates filled in from the component library.
    pub defaulted_rates: Vec<DefaultedRate>,
    pub provenance: Provenance,
}

impl ReportDocument {
    /// Every numeric field is finite.
    pub fn is_finite(&self) -> bool {
        self.results.is_finite()
            && self.mission_hours.is_finite()
            && self.rate_scale.is_finite()
            && self.defaulted_rates.iter().all(|d| d.lambda.is_finite())
    }
}

fn method_name(method: Method) -> &'static str {
    match method {
        Method::Exact => "exact",
        Method::RareEvent => "rare-event",
    }
}

/// Renders `doc` in the requested format.
pub fn emit_report(doc: &ReportDocument, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Text => render_text(doc).into_bytes(),
        ReportFormat::Structured => render_structured(doc).into_bytes(),
        ReportFormat::Csv => render_csv(doc).into_bytes(),
    }
}

fn render_text(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let t = &doc.tree;
    let _ = writeln!(out, "Top gate: {}", t.top);
    let _ = writeln!(out, "No. of gates: {}", t.gates);
    let _ = writeln!(out, "No. of events: {} ({} stochastic)", t.events, t.stochastic_events);
    let _ = writeln!(out, "Mission time: {} h", doc.mission_hours);
    let _ = writeln!(out, "Method: {}", method_name(doc.method));
    let _ = writeln!(out, "Failure rates per {} h", doc.rate_scale);
    out.push('\n');
    let _ = writeln!(out, "{:<26}Result", "Value");
    for (label, value) in doc.results.rows() {
        let _ = writeln!(out, "{label:<26}{value:.6}");
    }
    out.push('\n');
    out.push_str(&doc.cut_sets.render_text());
    if let Some(s) = &doc.scenarios {
        out.push('\n');
        out.push_str("Scenario enumeration\n");
        out.push_str(&s.render_text());
    }
    if let Some(r) = &doc.risk {
        out.push('\n');
        out.push_str("Risk matrix\n");
        out.push_str(&r.render_text());
    }
    if !doc.defaulted_rates.is_empty() {
        out.push('\n');
        out.push_str("Library rates\n");
        for d in &doc.defaulted_rates {
            let _ = writeln!(out, "  {:<12} {:<30} {:e} /h", d.event, d.component, d.lambda);
        }
    }
    out.push('\n');
    let p = &doc.provenance;
    let _ = writeln!(out, "input sha256: {}", p.input_sha256);
    let _ = writeln!(out, "tool version: {}", p.tool_version);
    if let Some(ts) = &p.timestamp {
        let _ = writeln!(out, "generated: {ts}");
    }
    out
}

/// Pretty JSON with object keys sorted.
fn render_structured(doc: &ReportDocument) -> String {
    // serde_json::Value keeps object keys in a BTreeMap
    let value = serde_json::to_value(doc).expect("report serializes");
    let mut out = serde_json::to_string_pretty(&value).expect("value serializes");
    out.push('\n');
    out
}

fn render_csv(doc: &ReportDocument) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["field", "value"]).expect("in-memory write");
    for (label, value) in doc.results.rows() {
        w.write_record([label.to_string(), value.to_string()])
            .expect("in-memory write");
    }
    let mut out = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8");
    if let Some(s) = &doc.scenarios {
        out.push('\n');
        out.push_str(&s.to_csv());
    }
    out
}
