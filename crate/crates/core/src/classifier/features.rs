use alloc::vec::Vec;

use super::classes::InputClass;
use super::weights::WeightColumn;
use crate::sim::TraceStep;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Feature {
    T,
    S,
    SL,
    SLS,
    RoA,
    ES,
    #[cfg_attr(feature = "serde", serde(rename = "prev_power"))]
    PrevPower,
    #[cfg_attr(feature = "serde", serde(rename = "prev_brake"))]
    PrevBrake,
}

impl Feature {
    pub const BASE: [Feature; 6] = [
        Feature::T,
        Feature::S,
        Feature::SL,
        Feature::SLS,
        Feature::RoA,
        Feature::ES,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::T => "T",
            Feature::S => "S",
            Feature::SL => "SL",
            Feature::SLS => "SLS",
            Feature::RoA => "RoA",
            Feature::ES => "ES",
            Feature::PrevPower => "prev_power",
            Feature::PrevBrake => "prev_brake",
        }
    }

    /// The weight-table column that scales this feature. Both previous-input
    /// features share `PI`.
    pub fn weight_column(self) -> WeightColumn {
        match self {
            Feature::T => WeightColumn::T,
            Feature::S => WeightColumn::S,
            Feature::SL => WeightColumn::SL,
            Feature::SLS => WeightColumn::SLS,
            Feature::RoA => WeightColumn::RoA,
            Feature::ES => WeightColumn::ES,
            Feature::PrevPower | Feature::PrevBrake => WeightColumn::PI,
        }
    }

    pub fn is_pi(self) -> bool {
        matches!(self, Feature::PrevPower | Feature::PrevBrake)
    }
}

/// Ordered list of features a model is fitted on.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct FeatureSet(Vec<Feature>);

impl FeatureSet {
    /// `T, S, SL, SLS, RoA, ES`.
    pub fn base() -> Self {
        Self(Feature::BASE.to_vec())
    }

    /// Base features followed by `prev_power, prev_brake`.
    pub fn with_pi() -> Self {
        let mut v = Feature::BASE.to_vec();
        v.extend([Feature::PrevPower, Feature::PrevBrake]);
        Self(v)
    }

    /// Arbitrary subset, in the given order. Duplicates are dropped.
    pub fn custom(features: &[Feature]) -> Self {
        let mut v: Vec<Feature> = Vec::with_capacity(features.len());
        for f in features {
            if !v.contains(f) {
                v.push(*f);
            }
        }
        Self(v)
    }

    pub fn features(&self) -> &[Feature] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn has_pi(&self) -> bool {
        self.0.iter().any(|f| f.is_pi())
    }
}

/// Observation values for one step. The previous-input pair is optional so
/// that rows from a channel log without it can still be scored by base models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureRow {
    pub base: [f64; 6],
    pub pi: Option<[f64; 2]>,
}

impl FeatureRow {
    pub fn new(base: [f64; 6], pi: Option<[f64; 2]>) -> Self {
        Self { base, pi }
    }

    pub fn from_step(step: &TraceStep) -> Self {
        let o = &step.obs;
        Self {
            base: [o.t, o.s, o.sl, o.sls, o.roa, o.es()],
            pi: Some([
                step.prev_input.power_notch() as f64,
                step.prev_input.brake_notch() as f64,
            ]),
        }
    }

    pub fn without_pi(mut self) -> Self {
        self.pi = None;
        self
    }

    pub fn get(&self, f: Feature) -> Option<f64> {
        match f {
            Feature::PrevPower => self.pi.map(|p| p[0]),
            Feature::PrevBrake => self.pi.map(|p| p[1]),
            other => Some(self.base[other as usize]),
        }
    }

    pub fn set(&mut self, f: Feature, value: f64) {
        match f {
            Feature::PrevPower => {
                let p = self.pi.get_or_insert([0.0; 2]);
                p[0] = value;
            }
            Feature::PrevBrake => {
                let p = self.pi.get_or_insert([0.0; 2]);
                p[1] = value;
            }
            other => self.base[other as usize] = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledRow {
    pub row: FeatureRow,
    pub class: InputClass,
}

impl LabeledRow {
    pub fn from_step(step: &TraceStep) -> Self {
        Self {
            row: FeatureRow::from_step(step),
            class: InputClass::from_command(step.input),
        }
    }
}
