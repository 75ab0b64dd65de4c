//! Evaluation report documents and their plain-text table.

use std::fmt::Write as _;
use std::path::Path;

use railodm_core::classifier::{Variant, NUM_CLASSES};
use railodm_core::eval::{compare, Comparison, EvalReport, ReportMetadata, Tally, VariantResult};
use railodm_core::odm::OperationalState;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccuracyCell {
    pub correct: u64,
    pub support: u64,
    /// Absent (null) when the state has no test rows.
    pub accuracy: Option<f64>,
}

impl From<Tally> for AccuracyCell {
    fn from(t: Tally) -> Self {
        Self {
            correct: t.correct,
            support: t.support,
            accuracy: t.accuracy(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateCell {
    pub state: OperationalState,
    pub correct: u64,
    pub support: u64,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantDocument {
    pub variant: Variant,
    pub states: Vec<StateCell>,
    pub overall: AccuracyCell,
    /// Rows are true classes, columns predicted, canonical class order.
    pub confusion: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub metadata: ReportMetadata,
    pub variants: Vec<VariantDocument>,
    /// Present only when all three variants were evaluated.
    pub comparison: Option<Comparison>,
}

impl ReportDocument {
    pub fn new(report: &EvalReport) -> Self {
        let variants = report
            .variants
            .iter()
            .map(|v| VariantDocument {
                variant: v.variant,
                states: OperationalState::ALL
                    .iter()
                    .map(|&s| {
                        let t = v.per_state[s.index()];
                        StateCell {
                            state: s,
                            correct: t.correct,
                            support: t.support,
                            accuracy: t.accuracy(),
                        }
                    })
                    .collect(),
                overall: v.overall.into(),
                confusion: v.confusion.iter().map(|r| r.to_vec()).collect(),
            })
            .collect();
        Self {
            metadata: report.metadata.clone(),
            variants,
            comparison: compare(report).ok(),
        }
    }

    pub fn to_report(&self) -> Result<EvalReport> {
        let bad = |m: String| Error::Schema {
            what: "report",
            problems: vec![m],
        };
        let mut variants = Vec::with_capacity(self.variants.len());
        for v in &self.variants {
            let mut per_state = [Tally::default(); 5];
            for c in &v.states {
                per_state[c.state.index()] = Tally {
                    correct: c.correct,
                    support: c.support,
                };
            }
            let mut confusion = [[0u64; NUM_CLASSES]; NUM_CLASSES];
            if v.confusion.len() != NUM_CLASSES
                || v.confusion.iter().any(|r| r.len() != NUM_CLASSES)
            {
                return Err(bad(format!(
                    "{}: confusion matrix must be {NUM_CLASSES}x{NUM_CLASSES}",
                    v.variant
                )));
            }
            for (dst, src) in confusion.iter_mut().zip(&v.confusion) {
                dst.copy_from_slice(src);
            }
            variants.push(VariantResult {
                variant: v.variant,
                per_state,
                overall: Tally {
                    correct: v.overall.correct,
                    support: v.overall.support,
                },
                confusion,
            });
        }
        Ok(EvalReport {
            metadata: self.metadata.clone(),
            variants,
        })
    }

    pub fn variant(&self, v: Variant) -> Option<&VariantDocument> {
        self.variants.iter().find(|d| d.variant == v)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema {
            what: "report",
            problems: vec![e.to_string()],
        })
    }

    /// `true` when the comparison ran and every claim holds; `None` when
    /// fewer than three variants were evaluated.
    pub fn claims_passed(&self) -> Option<bool> {
        self.comparison.as_ref().map(Comparison::all_passed)
    }
}

fn cell(a: Option<f64>) -> String {
    a.map(|a| format!("{:.1}%", a * 100.0))
        .unwrap_or_else(|| "-".into())
}

fn delta(a: Option<f64>, b: Option<f64>) -> String {
    match (a, b) {
        (Some(a), Some(b)) => format!("{:+.1}", (a - b) * 100.0),
        _ => "-".into(),
    }
}

/// States down the side, one accuracy column per variant, then deltas
/// against NB and the claim lines.
pub fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    let nb = report.variant(Variant::Nb);
    let others: Vec<&VariantResult> = report
        .variants
        .iter()
        .filter(|v| v.variant != Variant::Nb)
        .collect();

    let _ = write!(out, "{:<14}{:>9}", "State", "Support");
    for v in &report.variants {
        let _ = write!(out, "{:>10}", v.variant.name());
    }
    if nb.is_some() {
        for v in &others {
            let _ = write!(out, "{:>12}", format!("{}-NB", v.variant.name()));
        }
    }
    out.push('\n');

    let support = |s: Option<OperationalState>| {
        report.variants.first().map(|v| match s {
            Some(s) => v.per_state[s.index()].support,
            None => v.overall.support,
        })
    };
    let rows = OperationalState::ALL
        .iter()
        .map(|&s| (s.name(), Some(s)))
        .chain([("Overall", None)]);
    for (name, s) in rows {
        let acc = |v: &VariantResult| match s {
            Some(s) => v.state_accuracy(s),
            None => v.overall.accuracy(),
        };
        let _ = write!(out, "{:<14}{:>9}", name, support(s).unwrap_or(0));
        for v in &report.variants {
            let _ = write!(out, "{:>10}", cell(acc(v)));
        }
        if let Some(nb) = nb {
            for v in &others {
                let _ = write!(out, "{:>12}", delta(acc(v), acc(nb)));
            }
        }
        out.push('\n');
    }

    if let Ok(cmp) = compare(report) {
        out.push('\n');
        for c in &cmp.claims {
            let _ = writeln!(
                out,
                "{} {} ({})",
                if c.passed { "PASS" } else { "FAIL" },
                c.description,
                c.detail
            );
        }
    }
    out
}

pub fn save_report(doc: &ReportDocument, path: &Path) -> Result<()> {
    std::fs::write(path, doc.to_json()).map_err(|e| Error::io(path, e))
}

pub fn load_report(path: &Path) -> Result<ReportDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ReportDocument::from_json(&text)
}
