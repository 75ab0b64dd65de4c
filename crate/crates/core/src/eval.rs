//! Held-out evaluation: run-level splits, per-state accuracy and the
//! NB-versus-OwO comparison claims.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classifier::{
    variant_exponents, ClassifierError, FeatureRow, GaussianNbModel, InputClass, Variant,
    WeightTable, NUM_CLASSES,
};
use crate::odm::OperationalState;
use crate::sim::TraceStep;

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    TrainCountTooLarge { train_count: usize, total: usize },
    EmptyTestSet,
    NoVariants,
    MissingVariant(Variant),
    Classifier(ClassifierError),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::TrainCountTooLarge { train_count, total } => write!(
                f,
                "train_count {train_count} must be smaller than the number of runs ({total})"
            ),
            EvalError::EmptyTestSet => f.write_str("test set is empty"),
            EvalError::NoVariants => f.write_str("no variants requested"),
            EvalError::MissingVariant(v) => write!(f, "report has no {v} results"),
            EvalError::Classifier(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for EvalError {}

impl From<ClassifierError> for EvalError {
    fn from(e: ClassifierError) -> Self {
        EvalError::Classifier(e)
    }
}

/// Indices of whole runs on each side of a split.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles run indices with `seed` and assigns the first `train_count` to
/// training. Both sides are returned sorted.
pub fn split_runs(total: usize, train_count: usize, seed: u64) -> Result<Split, EvalError> {
    if train_count >= total {
        return Err(EvalError::TrainCountTooLarge { train_count, total });
    }
    let mut idx: Vec<usize> = (0..total).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut train = idx[..train_count].to_vec();
    let mut test = idx[train_count..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tally {
    pub correct: u64,
    pub support: u64,
}

impl Tally {
    /// `None` when there is no support.
    pub fn accuracy(&self) -> Option<f64> {
        (self.support > 0).then(|| self.correct as f64 / self.support as f64)
    }

    fn add(&mut self, hit: bool) {
        self.support += 1;
        if hit {
            self.correct += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VariantResult {
    pub variant: Variant,
    /// Indexed by `OperationalState::index`.
    pub per_state: [Tally; 5],
    pub overall: Tally,
    /// `confusion[true][predicted]`, canonical class order.
    pub confusion: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl VariantResult {
    fn new(variant: Variant) -> Self {
        Self {
            variant,
            per_state: [Tally::default(); 5],
            overall: Tally::default(),
            confusion: [[0; NUM_CLASSES]; NUM_CLASSES],
        }
    }

    pub fn state_accuracy(&self, state: OperationalState) -> Option<f64> {
        self.per_state[state.index()].accuracy()
    }

    /// Support-weighted mean of the per-state accuracies.
    pub fn weighted_state_mean(&self) -> Option<f64> {
        let total: u64 = self.per_state.iter().map(|t| t.support).sum();
        if total == 0 {
            return None;
        }
        let s: f64 = self
            .per_state
            .iter()
            .filter_map(|t| t.accuracy().map(|a| a * t.support as f64))
            .sum();
        Some(s / total as f64)
    }
}

/// What the numbers were computed from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReportMetadata {
    pub route_hash: String,
    pub weights_hash: String,
    pub train_seeds: Vec<u64>,
    pub test_seeds: Vec<u64>,
    pub split_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub metadata: ReportMetadata,
    pub variants: Vec<VariantResult>,
}

impl EvalReport {
    pub fn variant(&self, v: Variant) -> Option<&VariantResult> {
        self.variants.iter().find(|r| r.variant == v)
    }
}

/// A test row: observation, ground-truth state and label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestRow {
    pub row: FeatureRow,
    pub state: OperationalState,
    pub class: InputClass,
}

impl TestRow {
    pub fn from_step(step: &TraceStep) -> Self {
        Self {
            row: FeatureRow::from_step(step),
            state: step.state,
            class: InputClass::from_command(step.input),
        }
    }
}

pub fn evaluate(
    model: &GaussianNbModel,
    rows: &[TestRow],
    weights: &WeightTable,
    variants: &[Variant],
    metadata: ReportMetadata,
) -> Result<EvalReport, EvalError> {
    if rows.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    if variants.is_empty() {
        return Err(EvalError::NoVariants);
    }
    let mut out = Vec::with_capacity(variants.len());
    for &v in variants {
        let exps = variant_exponents(model, weights, v)?;
        let mut res = VariantResult::new(v);
        for r in rows {
            let pred = model.predict_with_exponents(&r.row, &exps[r.state.index()])?;
            let hit = pred == r.class;
            res.per_state[r.state.index()].add(hit);
            res.overall.add(hit);
            res.confusion[r.class.index()][pred.index()] += 1;
        }
        out.push(res);
    }
    Ok(EvalReport {
        metadata,
        variants: out,
    })
}

/// Minimum accuracy every variant must reach on AWS steps.
pub const AWS_MIN_ACCURACY: f64 = 0.98;
/// Cruise: OwO+PI must beat NB by at least this much.
pub const CRUISE_MIN_GAIN: f64 = 0.05;
/// Overall: the better OwO variant must beat NB by at least this much.
pub const OVERALL_MIN_GAIN: f64 = 0.03;

// Guards the margin comparisons against the last-ulp error of the addition.
const CMP_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Claim {
    pub id: String,
    pub description: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StateDelta {
    pub state: OperationalState,
    pub owo_minus_nb: Option<f64>,
    pub owo_pi_minus_nb: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Comparison {
    pub deltas: Vec<StateDelta>,
    pub overall_owo_minus_nb: Option<f64>,
    pub overall_owo_pi_minus_nb: Option<f64>,
    pub claims: Vec<Claim>,
}

impl Comparison {
    pub fn all_passed(&self) -> bool {
        self.claims.iter().all(|c| c.passed)
    }
}

fn diff(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a? - b?)
}

fn fmt_acc(a: Option<f64>) -> String {
    match a {
        Some(a) => format!("{a:.4}"),
        None => String::from("absent"),
    }
}

fn at_least(lhs: Option<f64>, rhs: Option<f64>, margin: f64) -> bool {
    matches!((lhs, rhs), (Some(l), Some(r)) if l + CMP_EPS >= r + margin)
}

fn claim(id: &str, description: &str, passed: bool, detail: String) -> Claim {
    Claim {
        id: id.into(),
        description: description.into(),
        passed,
        detail,
    }
}

/// Per-state deltas against NB and one pass/fail line per qualitative claim.
pub fn compare(report: &EvalReport) -> Result<Comparison, EvalError> {
    let get = |v| report.variant(v).ok_or(EvalError::MissingVariant(v));
    let nb = get(Variant::Nb)?;
    let owo = get(Variant::Owo)?;
    let pi = get(Variant::OwoPi)?;
    use OperationalState::*;

    let deltas = OperationalState::ALL
        .iter()
        .map(|&s| StateDelta {
            state: s,
            owo_minus_nb: diff(owo.state_accuracy(s), nb.state_accuracy(s)),
            owo_pi_minus_nb: diff(pi.state_accuracy(s), nb.state_accuracy(s)),
        })
        .collect();

    let mut claims = Vec::new();

    let aws: Vec<Option<f64>> = [nb, owo, pi]
        .iter()
        .map(|r| r.state_accuracy(Aws))
        .collect();
    claims.push(claim(
        "aws",
        "AWS: every variant >= 0.98",
        aws.iter()
            .all(|a| matches!(a, Some(a) if *a >= AWS_MIN_ACCURACY)),
        format!(
            "NB {} OwO {} OwO+PI {}",
            fmt_acc(aws[0]),
            fmt_acc(aws[1]),
            fmt_acc(aws[2])
        ),
    ));

    let (c_nb, c_pi) = (nb.state_accuracy(Cruise), pi.state_accuracy(Cruise));
    claims.push(claim(
        "cruise",
        "Cruise: OwO+PI >= NB + 0.05",
        at_least(c_pi, c_nb, CRUISE_MIN_GAIN),
        format!("NB {} OwO+PI {}", fmt_acc(c_nb), fmt_acc(c_pi)),
    ));

    for (id, desc, s) in [
        ("brake_change", "Brake_Change: OwO >= NB", BrakeChange),
        ("speed_change", "Speed_Change: OwO >= NB", SpeedChange),
    ] {
        let (n, o) = (nb.state_accuracy(s), owo.state_accuracy(s));
        claims.push(claim(
            id,
            desc,
            at_least(o, n, 0.0),
            format!("NB {} OwO {}", fmt_acc(n), fmt_acc(o)),
        ));
    }

    let (e_owo, e_pi) = (
        owo.state_accuracy(EngineCheck),
        pi.state_accuracy(EngineCheck),
    );
    claims.push(claim(
        "engine_check",
        "Engine_Check: OwO+PI >= OwO",
        at_least(e_pi, e_owo, 0.0),
        format!("OwO {} OwO+PI {}", fmt_acc(e_owo), fmt_acc(e_pi)),
    ));

    let o_nb = nb.overall.accuracy();
    let best = match (owo.overall.accuracy(), pi.overall.accuracy()) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    };
    claims.push(claim(
        "overall",
        "Overall: best OwO variant >= NB + 0.03",
        at_least(best, o_nb, OVERALL_MIN_GAIN),
        format!("NB {} best OwO {}", fmt_acc(o_nb), fmt_acc(best)),
    ));

    Ok(Comparison {
        deltas,
        overall_owo_minus_nb: diff(owo.overall.accuracy(), o_nb),
        overall_owo_pi_minus_nb: diff(pi.overall.accuracy(), o_nb),
        claims,
    })
}

/// Builds a report directly from per-state accuracies, for tests and fixtures.
/// Each state gets `support` rows.
pub fn synthetic_report(accuracies: &[(Variant, [Option<f64>; 5])], support: u64) -> EvalReport {
    let variants = accuracies
        .iter()
        .map(|(v, accs)| {
            let mut r = VariantResult::new(*v);
            for (i, a) in accs.iter().enumerate() {
                if let Some(a) = a {
                    let correct = libm::round(a * support as f64) as u64;
                    r.per_state[i] = Tally { correct, support };
                    r.overall.correct += correct;
                    r.overall.support += support;
                }
            }
            r
        })
        .collect();
    EvalReport {
        metadata: ReportMetadata::default(),
        variants,
    }
}
