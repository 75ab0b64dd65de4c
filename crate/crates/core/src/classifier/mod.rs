//! Input prediction: Gaussian naive Bayes and the state-weighted OwO rule.

mod classes;
mod features;
mod gaussian;
mod weights;

use alloc::vec::Vec;
use core::fmt;

pub use classes::{InputClass, NUM_CLASSES};
pub use features::{Feature, FeatureRow, FeatureSet, LabeledRow};
pub use gaussian::{
    fit, predict_nb, predict_owo, ClassParams, GaussianNbModel, Standardizer, VAR_FLOOR,
};
pub use weights::{WeightColumn, WeightError, WeightTable};

use crate::odm::OperationalState;

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierError {
    EmptyDataset,
    NoFeatures,
    /// Variance is undefined for a class seen exactly once.
    SingletonClass(InputClass),
    MissingFeature(Feature),
    NonFinite(Feature),
    /// The variant needs features the model was not fitted on.
    VariantMismatch(Variant),
    LengthMismatch {
        rows: usize,
        states: usize,
    },
}

impl fmt::Display for ClassifierError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifierError::EmptyDataset => f.write_str("cannot fit on an empty dataset"),
            ClassifierError::NoFeatures => f.write_str("feature set is empty"),
            ClassifierError::SingletonClass(c) => {
                write!(f, "class {c} has a single row; its variance is undefined")
            }
            ClassifierError::MissingFeature(feat) => write!(f, "missing feature {}", feat.name()),
            ClassifierError::NonFinite(feat) => write!(f, "feature {} is not finite", feat.name()),
            ClassifierError::VariantMismatch(v) => {
                write!(
                    f,
                    "variant {} requires a model fitted with previous-input features",
                    v.name()
                )
            }
            ClassifierError::LengthMismatch { rows, states } => {
                write!(f, "{rows} rows but {states} state labels")
            }
        }
    }
}

impl core::error::Error for ClassifierError {}

/// The three compared predictors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Variant {
    /// Gaussian NB, base features at full weight, no PI.
    #[cfg_attr(feature = "serde", serde(rename = "NB"))]
    Nb,
    /// State weights, PI excluded.
    #[cfg_attr(feature = "serde", serde(rename = "OwO"))]
    Owo,
    /// State weights with the PI column applied to the previous input.
    #[cfg_attr(feature = "serde", serde(rename = "OwO+PI"))]
    OwoPi,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Nb, Variant::Owo, Variant::OwoPi];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Nb => "NB",
            Variant::Owo => "OwO",
            Variant::OwoPi => "OwO+PI",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "NB" | "nb" => Some(Variant::Nb),
            "OwO" | "owo" => Some(Variant::Owo),
            "OwO+PI" | "owo+pi" | "owo-pi" => Some(Variant::OwoPi),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exponent vectors for each state under `variant`, indexed by state.
pub fn variant_exponents(
    model: &GaussianNbModel,
    weights: &WeightTable,
    variant: Variant,
) -> Result<[Vec<f64>; 5], ClassifierError> {
    if variant == Variant::OwoPi && !model.feature_set().has_pi() {
        return Err(ClassifierError::VariantMismatch(variant));
    }
    Ok(OperationalState::ALL.map(|s| match variant {
        Variant::Nb => model.nb_exponents(),
        Variant::Owo => model.owo_exponents(s, weights, false),
        Variant::OwoPi => model.owo_exponents(s, weights, true),
    }))
}

/// Elementwise prediction for one variant.
pub fn predict_batch(
    model: &GaussianNbModel,
    rows: &[FeatureRow],
    states: &[OperationalState],
    weights: &WeightTable,
    variant: Variant,
) -> Result<Vec<InputClass>, ClassifierError> {
    if rows.len() != states.len() {
        return Err(ClassifierError::LengthMismatch {
            rows: rows.len(),
            states: states.len(),
        });
    }
    let exps = variant_exponents(model, weights, variant)?;
    rows.iter()
        .zip(states)
        .map(|(r, s)| model.predict_with_exponents(r, &exps[s.index()]))
        .collect()
}

#[cfg(test)]
mod tests;
