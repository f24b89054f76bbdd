use num_rational::Ratio;
use serde::Serialize;

use crate::model::{Duration, TransactionKind};
use crate::system::{pessimism_pct, ratio_to_f64};

/// One validation cell, reduced over its seeds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub suite: String,
    pub scenario: String,
    pub kind: TransactionKind,
    pub beta: u32,
    pub phi_k: u32,
    pub v: u32,
    /// Seed that produced the maximum (the lowest one on ties).
    pub seed: u64,
    /// Picoseconds, except in the parallelism suite where both columns count transactions.
    pub bound_ps: u64,
    pub measured_ps: u64,
    pub pessimism_pct: f64,
    pub pass: bool,
    /// Largest admissible bound − measured gap, for suites that check tightness.
    #[serde(skip)]
    pub max_gap_ps: Option<u64>,
    #[serde(skip)]
    pub exact: bool,
}

/// Pessimism as printed in reports: four decimals, exact rational underneath.
pub fn format_pessimism(p: Ratio<i128>) -> f64 {
    (ratio_to_f64(p) * 1e4).round() / 1e4
}

impl ReportRow {
    #[allow(clippy::too_many_arguments)]
    pub fn new(suite: &str, scenario: String, kind: TransactionKind, beta: u32, phi_k: u32, v: u32, seed: u64, bound: u64, measured: u64) -> Self {
        let pessimism = match pessimism_pct(Duration::from_ps(bound), Duration::from_ps(measured)) {
            Ok(p) => format_pessimism(p),
            Err(_) => f64::INFINITY,
        };
        ReportRow {
            suite: suite.to_string(),
            scenario,
            kind,
            beta,
            phi_k,
            v,
            seed,
            bound_ps: bound,
            measured_ps: measured,
            pessimism_pct: pessimism,
            pass: measured <= bound,
            max_gap_ps: None,
            exact: false,
        }
    }

    pub fn gap(&self) -> i128 {
        self.bound_ps as i128 - self.measured_ps as i128
    }

    /// Safety plus whatever tightness the row asks for.
    pub fn tight(&self) -> bool {
        self.pass && (!self.exact || self.gap() == 0) && self.max_gap_ps.is_none_or(|g| self.gap() <= g as i128)
    }

    fn key(&self) -> (&str, &str, TransactionKind, u32, u32, u32) {
        (&self.suite, &self.scenario, self.kind, self.beta, self.phi_k, self.v)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub rows: usize,
    pub violations: usize,
    /// Rows failing an exactness or slack requirement while still safe.
    pub loose: usize,
    pub min_pessimism_pct: Option<f64>,
    pub max_pessimism_pct: Option<f64>,
    /// Observed transactions whose memory case differed from the cell's case; excluded from maxima.
    pub case_mismatches: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub rows: Vec<ReportRow>,
    pub summary: Summary,
}

impl ValidationReport {
    pub fn new(mut rows: Vec<ReportRow>, case_mismatches: u64) -> Self {
        rows.sort_by(|a, b| a.key().cmp(&b.key()));
        let finite = || rows.iter().map(|r| r.pessimism_pct).filter(|p| p.is_finite());
        let summary = Summary {
            rows: rows.len(),
            violations: rows.iter().filter(|r| !r.pass).count(),
            loose: rows.iter().filter(|r| r.pass && !r.tight()).count(),
            min_pessimism_pct: finite().reduce(f64::min),
            max_pessimism_pct: finite().reduce(f64::max),
            case_mismatches,
        };
        ValidationReport { rows, summary }
    }

    /// Process exit status: 1 when any row's measurement exceeds its bound.
    pub fn exit_code(&self) -> u8 {
        if self.summary.violations > 0 {
            1
        } else {
            0
        }
    }

    pub fn merge(reports: impl IntoIterator<Item = ValidationReport>) -> Self {
        let mut rows = Vec::new();
        let mut mismatches = 0;
        for r in reports {
            rows.extend(r.rows);
            mismatches += r.summary.case_mismatches;
        }
        Self::new(rows, mismatches)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["suite", "scenario", "kind", "beta", "phi_k", "V", "seed", "bound_ps", "measured_ps", "pessimism_pct", "pass"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.suite.clone(),
                r.scenario.clone(),
                r.kind.to_string(),
                r.beta.to_string(),
                r.phi_k.to_string(),
                r.v.to_string(),
                r.seed.to_string(),
                r.bound_ps.to_string(),
                r.measured_ps.to_string(),
                format!("{:.4}", r.pessimism_pct),
                r.pass.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}
