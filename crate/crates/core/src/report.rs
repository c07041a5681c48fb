//! Check records and their canonical ordering.

use serde::Serialize;

/// How much a recorded value can be trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    /// A sampled supremum; the true constant is at least this.
    LowerBoundEstimate,
    /// Sampled instances passed; a failure would be conclusive.
    FalsificationTest,
    /// Deterministic value reproduced from closed-form rules.
    Computed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub input: String,
    pub constant: Option<f64>,
    /// The measured quantity (an estimate, an error, a ratio).
    pub value: Option<f64>,
    pub pass: bool,
    pub evidence: Evidence,
    pub witness: Option<String>,
    pub samples: usize,
    pub seed: u64,
}

impl CheckRecord {
    pub fn new(check: &str, input: impl Into<String>, pass: bool, evidence: Evidence, samples: usize, seed: u64) -> Self {
        Self {
            check: check.to_string(),
            input: input.into(),
            constant: None,
            value: None,
            pass,
            evidence,
            witness: None,
            samples,
            seed,
        }
    }

    pub fn constant(mut self, c: f64) -> Self {
        self.constant = Some(c);
        self
    }

    pub fn value(mut self, v: f64) -> Self {
        self.value = Some(v);
        self
    }

    pub fn witness(mut self, w: Option<String>) -> Self {
        self.witness = w;
        self
    }
}

/// Outcome of one numbered acceptance criterion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub summary: String,
    pub records: Vec<CheckRecord>,
}

impl CriterionResult {
    pub fn from_records(id: u8, name: &str, summary: String, records: Vec<CheckRecord>) -> Self {
        Self {
            id,
            name: name.to_string(),
            pass: records.iter().all(|r| r.pass),
            summary,
            records,
        }
    }

    /// `criterion 4 (Lipschitzness of F2): PASS ...`
    pub fn line(&self) -> String {
        format!(
            "criterion {} ({}): {} {}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.summary
        )
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub pass: bool,
    pub criteria: Vec<CriterionSummary>,
    pub records: Vec<CheckRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionSummary {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub summary: String,
}

impl Report {
    /// Collects records from all criteria, sorted by check name then input.
    pub fn new(command: &str, seed: u64, results: Vec<CriterionResult>) -> Self {
        let mut criteria = Vec::new();
        let mut records = Vec::new();
        for r in results {
            criteria.push(CriterionSummary {
                id: r.id,
                name: r.name,
                pass: r.pass,
                summary: r.summary,
            });
            records.extend(r.records);
        }
        criteria.sort_by_key(|c| c.id);
        records.sort_by(|a, b| a.check.cmp(&b.check).then_with(|| a.input.cmp(&b.input)));
        Self {
            command: command.to_string(),
            seed,
            pass: criteria.iter().all(|c| c.pass),
            criteria,
            records,
        }
    }
}
