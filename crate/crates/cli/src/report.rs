//! Verification report and its JSON, CSV and text renderings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use platedual_core::dual::{CheckOutcome, DualReport};
use platedual_core::elasticity3d::{ElasticBreakdown, TensorHypotheses};
use platedual_core::plate::EnergyBreakdown;
use platedual_core::solver::GradcheckReport;

use crate::config::Model;
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyReport {
    Plate(EnergyBreakdown),
    Elastic(ElasticBreakdown),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalSummary {
    pub value: f64,
    pub grad_norm: f64,
    pub grad_tol: f64,
    pub iters: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub c_shift: f64,
    pub min_eigenvalue: f64,
    pub delta_pd: f64,
    pub div_residual: f64,
    pub tol_div: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivitySummary {
    pub samples: usize,
    /// Smallest `J(u) - bound(u)` over the sampled states.
    pub min_slack: f64,
    /// Largest relative mismatch between the rewritten and direct energy (3D only).
    pub transcript_mismatch: Option<f64>,
    /// Smallest `expression - floor` over the sampled states (3D only).
    pub min_floor_margin: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub certificate_s: f64,
    pub gradcheck_s: f64,
    pub solve_s: f64,
    pub verify_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub scenario: String,
    pub model: Model,
    pub seed: u64,
    pub grid_nodes: Vec<usize>,
    pub energy: Option<EnergyReport>,
    pub critical_point: Option<CriticalSummary>,
    pub certificate: Option<CertificateSummary>,
    pub coercivity: Option<CoercivitySummary>,
    pub gradcheck: Option<GradcheckReport>,
    pub tensor_hypotheses: Option<TensorHypotheses>,
    pub dual: Option<DualReport>,
    pub checks: Vec<CheckOutcome>,
    pub timings: Timings,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(scenario: &str, model: Model, seed: u64, grid_nodes: Vec<usize>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.into(),
            model,
            seed,
            grid_nodes,
            energy: None,
            critical_point: None,
            certificate: None,
            coercivity: None,
            gradcheck: None,
            tensor_hypotheses: None,
            dual: None,
            checks: Vec::new(),
            timings: Timings::default(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    /// Zero all wall-clock timings so reports of identical runs compare equal.
    pub fn normalize_timings(&mut self) {
        self.timings = Timings::default();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|source| CliError::Json { path: "<report>".into(), source })
    }

    pub fn csv_summary(&self) -> String {
        let mut s = String::from("name,value,tolerance,pass\n");
        for c in &self.checks {
            let _ = writeln!(s, "{},{:e},{:e},{}", c.name, c.value, c.tol, c.passed);
        }
        s
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        let dims: Vec<String> = self.grid_nodes.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "scenario {} ({}, grid {}, seed {})", self.scenario, self.model, dims.join("x"), self.seed);
        if let Some(cp) = &self.critical_point {
            let _ = writeln!(
                s,
                "J = {:.6e}   |g| = {:.3e} (tol {:.1e})   iterations {}   {}",
                cp.value,
                cp.grad_norm,
                cp.grad_tol,
                cp.iters,
                if cp.converged { "converged" } else { "NOT converged" }
            );
        }
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{}  {:<28} {:>12.4e}  tol {:>10.3e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.tol
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        let _ = writeln!(
            s,
            "RESULT: {} ({passed}/{} checks)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks.len()
        );
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

/// Write the report into `dir` as `report.json`, `summary.csv` or `report.txt`.
pub fn emit_report(report: &VerificationReport, format: ReportFormat, dir: &Path) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let (name, body) = match format {
        ReportFormat::Json => ("report.json", report.to_json()),
        ReportFormat::Csv => ("summary.csv", report.csv_summary()),
        ReportFormat::Text => ("report.txt", report.text()),
    };
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VerificationReport {
        let mut r = VerificationReport::new("t", Model::PlateClamped, 3, vec![5, 5]);
        r.checks.push(CheckOutcome::le("a", 1e-12, 1e-6));
        r.checks.push(CheckOutcome::gt("b", -1.0, 0.0));
        r.timings.total_s = 1.25;
        r
    }

    #[test]
    fn empty_report_is_valid_json() {
        let r = VerificationReport::new("empty", Model::Elasticity3dClamped, 0, vec![5, 5, 5]);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["checks"].as_array().unwrap().len(), 0);
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        assert_eq!(VerificationReport::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn csv_has_one_row_per_check() {
        let r = sample();
        assert_eq!(r.csv_summary().lines().count(), 1 + r.checks.len());
    }

    #[test]
    fn text_banner_reports_failures() {
        let t = sample().text();
        assert!(t.contains("PASS  a") && t.contains("FAIL  b"));
        assert!(t.trim_end().ends_with("RESULT: FAIL (1/2 checks)"));
    }

    #[test]
    fn normalization_clears_timings() {
        let mut r = sample();
        r.normalize_timings();
        assert_eq!(r.timings, Timings::default());
    }
}
