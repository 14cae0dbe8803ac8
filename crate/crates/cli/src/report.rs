// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use slplab_core::audit::AuditVerdict;
use slplab_core::evidence::EvidenceAssessment;
use slplab_core::experiment::FactorizationReport;
use slplab_core::stopping::StoppingStudy;
use slplab_core::Scalar;

use crate::error::CliError;

/// Version of the JSON layout; see `schema/report-v1.schema.json`.
pub const SCHEMA_VERSION: &str = "slplab.report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub demo_name: String,
    /// Effective inputs, defaults included.
    pub inputs: BTreeMap<String, String>,
    pub findings: Vec<Finding>,
    pub assessments: Vec<EvidenceAssessment>,
    pub verdicts: Vec<AuditVerdict>,
    pub studies: Vec<StoppingStudy>,
    pub factorizations: Vec<FactorizationReport>,
}

impl Report {
    pub fn new(demo_name: &str, inputs: BTreeMap<String, String>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION.to_string(),
            demo_name: demo_name.to_string(),
            inputs,
            findings: Vec::new(),
            assessments: Vec::new(),
            verdicts: Vec::new(),
            studies: Vec::new(),
            factorizations: Vec::new(),
        }
    }

    pub fn finding(&self, name: &str) -> Option<&Finding> {
        self.findings.iter().find(|f| f.name == name)
    }

    pub(crate) fn push_number(&mut self, name: &str, value: Scalar, tag: &str) {
        self.findings.push(Finding {
            name: name.into(),
            value: FindingValue::Number(value),
            tag: tag.into(),
        });
    }

    pub(crate) fn push_flag(&mut self, name: &str, value: bool, tag: &str) {
        self.findings.push(Finding {
            name: name.into(),
            value: FindingValue::Flag(value),
            tag: tag.into(),
        });
    }

    pub(crate) fn push_text(&mut self, name: &str, value: String, tag: &str) {
        self.findings.push(Finding {
            name: name.into(),
            value: FindingValue::Text(value),
            tag: tag.into(),
        });
    }
}

/// A named derived quantity. `tag` names the sampling distribution or the
/// oracle that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub name: String,
    pub value: FindingValue,
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingValue {
    Number(Scalar),
    Flag(bool),
    Text(String),
}

impl FindingValue {
    pub fn as_number(&self) -> Option<&Scalar> {
        match self {
            FindingValue::Number(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_flag(&self) -> Option<bool> {
        match self {
            FindingValue::Flag(b) => Some(*b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(CliError::Usage(format!("unsupported format {other:?} (text|json|csv)"))),
        }
    }
}

pub fn serialize(report: &Report, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(report).map_err(|e| CliError::Serialization(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => to_csv(report),
        Format::Text => Ok(to_text(report).into_bytes()),
    }
}

pub fn parse_json(bytes: &[u8]) -> Result<Report, CliError> {
    serde_json::from_slice(bytes).map_err(|e| CliError::Serialization(e.to_string()))
}

pub const CSV_HEADER: [&str; 9] = [
    "demo",
    "index",
    "p_value",
    "p_exact",
    "distribution_used",
    "model",
    "outcome",
    "flags",
    "trace",
];

fn to_csv(report: &Report) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Serialization(e.to_string());
    w.write_record(CSV_HEADER).map_err(err)?;
    for (i, a) in report.assessments.iter().enumerate() {
        let (model, outcome) = match &a.source {
            Some(r) => (r.model.to_string(), r.outcome.to_string()),
            None => (String::new(), String::new()),
        };
        let flags: Vec<String> = a
            .flags
            .iter()
            .map(|f| {
                serde_json::to_string(f)
                    .unwrap_or_default()
                    .trim_matches('"')
                    .to_string()
            })
            .collect();
        w.write_record([
            report.demo_name.clone(),
            (i + 1).to_string(),
            format!("{:e}", a.p()),
            a.p_value
                .as_exact()
                .map(slplab_core::scalar::format_rational)
                .unwrap_or_default(),
            a.distribution_used.to_string(),
            model,
            outcome,
            flags.join(";"),
            a.trace.clone(),
        ])
        .map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Serialization(e.to_string()))
}

fn to_text(report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "slplab {} ({})", report.demo_name, report.schema_version);
    if !report.inputs.is_empty() {
        let _ = writeln!(s, "\ninputs:");
        for (k, v) in &report.inputs {
            let _ = writeln!(s, "  {k} = {v}");
        }
    }
    if !report.findings.is_empty() {
        let _ = writeln!(s, "\nfindings:");
        for f in &report.findings {
            let value = match &f.value {
                FindingValue::Number(x) => x.to_string(),
                FindingValue::Flag(b) => b.to_string(),
                FindingValue::Text(t) => t.clone(),
            };
            let _ = writeln!(s, "  {:<34} {value}  [{}]", f.name, f.tag);
        }
    }
    if !report.assessments.is_empty() {
        let _ = writeln!(s, "\nassessments:");
        for (i, a) in report.assessments.iter().enumerate() {
            let _ = writeln!(s, "  [{}] p = {}  ({})", i + 1, a.p_value, a.distribution_used);
            if let Some(src) = &a.source {
                let _ = writeln!(s, "      {} | {}", src.model, src.outcome);
            }
            let _ = writeln!(s, "      {}", a.trace);
        }
    }
    for (i, v) in report.verdicts.iter().enumerate() {
        if i == 0 {
            let _ = writeln!(s, "\nverdicts:");
        }
        let _ = writeln!(
            s,
            "  [{}] premise 1 {:?}, premise 2 {:?}, order {:?} -> {:?}",
            i + 1,
            v.semantics.premise1,
            v.semantics.premise2,
            v.semantics.evaluation_order,
            v.verdict
        );
        for (label, claim) in [
            ("premise 1", &v.premise1),
            ("premise 2", &v.premise2),
            ("conclusion", &v.conclusion),
        ] {
            let pairs: Vec<String> = claim
                .witnesses
                .iter()
                .map(|w| format!("{:.6} vs {:.6} (gap {:.6})", w.left.p(), w.right.p(), w.gap.to_f64()))
                .collect();
            let _ = writeln!(
                s,
                "      {label:<10} {:<5} {}",
                if claim.holds { "true" } else { "false" },
                pairs.join("; ")
            );
        }
    }
    for (i, st) in report.studies.iter().enumerate() {
        if i == 0 {
            let _ = writeln!(s, "\nstudies:");
        }
        let _ = writeln!(
            s,
            "  sigma = {}, n_max = {}, reps = {}, seed = {}: {} stopped, fraction {:.4} (se {:.4})",
            st.sigma,
            st.n_max,
            st.n_replications,
            st.seed,
            st.stopped,
            st.final_fraction(),
            st.standard_error
        );
        let marks: Vec<u32> = [1u32, 10, 50, 100, 169, 500, 1000]
            .into_iter()
            .filter(|n| *n <= st.n_max)
            .collect();
        for n in marks {
            let _ = writeln!(s, "      stopped by n = {n:<5} {:.4}", st.fraction_by(n).unwrap_or(0.0));
        }
    }
    for (i, f) in report.factorizations.iter().enumerate() {
        if i == 0 {
            let _ = writeln!(s, "\nfactorizations:");
        }
        let _ = writeln!(s, "  {}: {}", f.model, if f.passed { "passed" } else { "FAILED" });
        for slice in &f.slices {
            let _ = writeln!(
                s,
                "      t = {:<4} {} sequences, conditional {}  {}",
                slice.statistic,
                slice.sequences,
                slice.uniform_value,
                if slice.passed { "ok" } else { "FAILED" }
            );
        }
    }
    s
}
