use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_error, Error, Result};
use crate::numfmt::{parse_f64, round12, sig12};

use super::config::Tolerances;

/// One acceptance check. Numbers are stored rounded to 12 significant
/// digits and the flag is computed from the rounded values, so re-evaluating
/// a stored record always reproduces it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Criterion {
    pub criterion: String,
    pub alpha: Option<f64>,
    /// `None` when the statistic could not be computed (NaN).
    pub value: Option<f64>,
    pub target: f64,
    pub se: Option<f64>,
    pub k: f64,
    pub floor: f64,
    pub pass: bool,
}

impl Criterion {
    pub fn new(name: &str, alpha: Option<f64>, value: f64, target: f64, se: f64, tol: Tolerances) -> Self {
        let finite = |x: f64| x.is_finite().then(|| round12(x));
        let mut c = Self {
            criterion: name.to_string(),
            alpha: alpha.map(round12),
            value: finite(value),
            target: round12(target),
            se: finite(se),
            k: round12(tol.se_multiplier),
            floor: round12(tol.abs_floor),
            pass: false,
        };
        c.pass = c.evaluate();
        c
    }

    /// `|value − target| ≤ max(k·se, floor)`.
    pub fn evaluate(&self) -> bool {
        match (self.value, self.se) {
            (Some(v), Some(se)) => (v - self.target).abs() <= (self.k * se).max(self.floor),
            _ => false,
        }
    }

    pub fn label(&self) -> String {
        match self.alpha {
            Some(a) => format!("{} at alpha={}", self.criterion, sig12(a)),
            None => self.criterion.clone(),
        }
    }

    pub fn describe(&self) -> String {
        let fmt = |x: Option<f64>| x.map_or("NaN".to_string(), sig12);
        format!(
            "{}: value {} target {} se {} (tolerance max({}·se, {}))",
            self.label(),
            fmt(self.value),
            sig12(self.target),
            fmt(self.se),
            sig12(self.k),
            sig12(self.floor)
        )
    }
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub name: String,
    pub seed: u64,
    pub replicas: u64,
    pub horizon: f64,
    pub alphas: Vec<f64>,
    /// α-indexed CSV files written next to the summary.
    pub alpha_files: Vec<String>,
    pub notes: Vec<String>,
    pub criteria: Vec<Criterion>,
    pub pass: bool,
}

impl Summary {
    pub fn failures(&self) -> impl Iterator<Item = &Criterion> {
        self.criteria.iter().filter(|c| !c.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

/// Result of re-checking a stored report.
#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub summary: Summary,
    /// Criteria failing on re-evaluation.
    pub failures: Vec<Criterion>,
    /// Criteria whose stored flag disagrees with re-evaluation.
    pub altered_flags: Vec<Criterion>,
}

impl Verification {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            1
        }
    }
}

/// Re-evaluates the pass flags of a report directory from its stored numbers.
///
/// Structural problems (missing or unreadable summary, α grids in the CSV
/// files that differ from the summary's) are errors.
pub fn verify(dir: &Path) -> Result<Verification> {
    let path = dir.join("summary.json");
    let text = fs::read_to_string(&path).map_err(io_error(&path))?;
    let summary: Summary =
        serde_json::from_str(&text).map_err(|e| Error::MalformedReport(format!("summary.json: {e}")))?;
    crate::estimators::check_alphas(&summary.alphas)
        .map_err(|e| Error::MalformedReport(format!("summary.json: {e}")))?;
    for c in &summary.criteria {
        if let Some(a) = c.alpha {
            if !summary.alphas.contains(&a) {
                return Err(Error::MalformedReport(format!(
                    "criterion {} uses alpha {a} outside the grid",
                    c.criterion
                )));
            }
        }
    }
    for name in &summary.alpha_files {
        let grid = read_alpha_column(&dir.join(name))?;
        if grid != summary.alphas {
            return Err(Error::MalformedReport(format!(
                "{name}: alpha grid {grid:?} does not match the summary grid {:?}",
                summary.alphas
            )));
        }
    }
    let failures = summary.criteria.iter().filter(|c| !c.evaluate()).cloned().collect();
    let altered_flags = summary
        .criteria
        .iter()
        .filter(|c| c.evaluate() != c.pass)
        .cloned()
        .collect();
    Ok(Verification {
        summary,
        failures,
        altered_flags,
    })
}

fn read_alpha_column(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let name = path.display();
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::MalformedReport(format!("{name}: empty file")))?;
    if header.split(',').next() != Some("alpha") {
        return Err(Error::MalformedReport(format!("{name}: first column is not alpha")));
    }
    let width = header.split(',').count();
    lines
        .enumerate()
        .map(|(i, line)| {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != width {
                return Err(Error::MalformedReport(format!(
                    "{name}: row {} has {} cells, header has {width}",
                    i + 2,
                    cells.len()
                )));
            }
            parse_f64(cells[0])
                .filter(|a| a.is_finite())
                .ok_or_else(|| Error::MalformedReport(format!("{name}: bad alpha on row {}", i + 2)))
        })
        .collect()
}
