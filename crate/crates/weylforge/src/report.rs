//! Versioned run report and its JSON / text renderings.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "weylforge-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub point: Vec<String>,
    /// The checked quantity at the point, rendered exactly.
    pub residual: String,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub point: Vec<String>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub status: Status,
    pub summary: String,
    pub samples: Vec<SampleRecord>,
    pub rejections: Vec<Rejection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub family: String,
    pub mode: String,
    pub pair: String,
    pub seed: u64,
    pub sample_count: usize,
    pub tolerance: f64,
    pub checks: Vec<CheckReport>,
    pub passed: bool,
    /// Not covered by the determinism guarantee.
    pub wall_time_ms: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

impl Report {
    pub fn from_json(text: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(text)?;
        if r.schema != SCHEMA {
            bail!(
                "unsupported report schema `{}`, expected `{SCHEMA}`",
                r.schema
            );
        }
        Ok(r)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serialises") + "\n",
            Format::Text => self.render_text(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "family {}  mode {}  pair {}  seed {}  samples {}",
            self.family, self.mode, self.pair, self.seed, self.sample_count
        );
        let _ = writeln!(
            out,
            "{:<11} {:<8} {:>7} {:>9}  summary",
            "check", "status", "samples", "rejected"
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<11} {:<8} {:>7} {:>9}  {}",
                c.check,
                c.status.label(),
                c.samples.len(),
                c.rejections.len(),
                c.summary
            );
        }
        for c in self.checks.iter().filter(|c| c.status == Status::Fail) {
            let bad: Vec<&SampleRecord> = c.samples.iter().filter(|s| !s.ok).collect();
            if bad.is_empty() {
                continue;
            }
            let _ = writeln!(out, "\noffending samples for {}:", c.check);
            for s in bad.iter().take(10) {
                let _ = writeln!(
                    out,
                    "  #{:<3} ({})  {}",
                    s.index,
                    s.point.join(", "),
                    s.residual
                );
            }
            if bad.len() > 10 {
                let _ = writeln!(out, "  ... {} more", bad.len() - 10);
            }
        }
        let _ = writeln!(out);
        out.push_str(if self.passed {
            "ALL CHECKS PASSED\n"
        } else {
            "SOME CHECKS FAILED\n"
        });
        out
    }
}
