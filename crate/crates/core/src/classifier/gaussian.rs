//! Gaussian naive Bayes fitted on z-scored features.
//!
//! Scoring is always in log space. A prediction is
//! `argmax_I ln P(I) + Σ_o e_o · ln N(z_o; μ_Io, σ²_Io)` where the exponents
//! `e_o` are all 1 for plain NB and `w_O / 100` for the state-weighted form.
//! Features with a zero exponent are skipped entirely.

use alloc::vec;
use alloc::vec::Vec;

use super::classes::{InputClass, NUM_CLASSES};
use super::features::{FeatureRow, FeatureSet, LabeledRow};
use super::weights::WeightTable;
use super::ClassifierError;
use crate::math::{ln, log_normal, sqrt};
use crate::odm::OperationalState;

/// Variance floor in standardised units.
pub const VAR_FLOOR: f64 = 1e-6;

/// z-score parameters for one feature.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Standardizer {
    pub mean: f64,
    /// Population standard deviation; 1.0 for a constant feature.
    pub sd: f64,
}

impl Standardizer {
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.sd
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassParams {
    pub count: u64,
    /// Maximum-likelihood prior: `count / total`. Zero for unseen classes.
    pub prior: f64,
    /// Per-feature mean, standardised units, in model feature order.
    pub mean: Vec<f64>,
    /// Per-feature variance, standardised units, floored at [`VAR_FLOOR`].
    pub var: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianNbModel {
    pub features: FeatureSet,
    pub scalers: Vec<Standardizer>,
    /// Indexed by canonical class index.
    pub classes: Vec<ClassParams>,
}

fn row_values(
    row: &FeatureRow,
    features: &FeatureSet,
    out: &mut [f64],
) -> Result<(), ClassifierError> {
    for (slot, &f) in out.iter_mut().zip(features.features()) {
        let v = row.get(f).ok_or(ClassifierError::MissingFeature(f))?;
        if !v.is_finite() {
            return Err(ClassifierError::NonFinite(f));
        }
        *slot = v;
    }
    Ok(())
}

pub fn fit(rows: &[LabeledRow], features: &FeatureSet) -> Result<GaussianNbModel, ClassifierError> {
    if rows.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    if features.is_empty() {
        return Err(ClassifierError::NoFeatures);
    }
    let n_feat = features.len();
    let n = rows.len() as f64;

    // Pass 1: feature means and per-class counts.
    let mut x = vec![0.0; n_feat];
    let mut sum = vec![0.0; n_feat];
    let mut counts = [0u64; NUM_CLASSES];
    for r in rows {
        row_values(&r.row, features, &mut x)?;
        for (s, v) in sum.iter_mut().zip(&x) {
            *s += v;
        }
        counts[r.class.index()] += 1;
    }
    if let Some(c) = InputClass::all().find(|c| counts[c.index()] == 1) {
        return Err(ClassifierError::SingletonClass(c));
    }
    let means: Vec<f64> = sum.iter().map(|s| s / n).collect();

    // Pass 2: feature variances.
    let mut sq = vec![0.0; n_feat];
    for r in rows {
        row_values(&r.row, features, &mut x)?;
        for i in 0..n_feat {
            let d = x[i] - means[i];
            sq[i] += d * d;
        }
    }
    let scalers: Vec<Standardizer> = (0..n_feat)
        .map(|i| {
            let sd = sqrt(sq[i] / n);
            Standardizer {
                mean: means[i],
                sd: if sd > 0.0 { sd } else { 1.0 },
            }
        })
        .collect();

    // Pass 3/4: per-class moments in standardised space.
    let mut class_sum = vec![vec![0.0; n_feat]; NUM_CLASSES];
    for r in rows {
        row_values(&r.row, features, &mut x)?;
        let acc = &mut class_sum[r.class.index()];
        for i in 0..n_feat {
            acc[i] += scalers[i].apply(x[i]);
        }
    }
    let class_mean: Vec<Vec<f64>> = class_sum
        .iter()
        .zip(counts)
        .map(|(s, c)| {
            s.iter()
                .map(|v| if c > 0 { v / c as f64 } else { 0.0 })
                .collect()
        })
        .collect();
    let mut class_sq = vec![vec![0.0; n_feat]; NUM_CLASSES];
    for r in rows {
        row_values(&r.row, features, &mut x)?;
        let ci = r.class.index();
        for i in 0..n_feat {
            let d = scalers[i].apply(x[i]) - class_mean[ci][i];
            class_sq[ci][i] += d * d;
        }
    }

    let classes = (0..NUM_CLASSES)
        .map(|ci| {
            let c = counts[ci];
            ClassParams {
                count: c,
                prior: c as f64 / n,
                mean: class_mean[ci].clone(),
                var: class_sq[ci]
                    .iter()
                    .map(|s| {
                        if c > 0 {
                            (s / c as f64).max(VAR_FLOOR)
                        } else {
                            1.0
                        }
                    })
                    .collect(),
            }
        })
        .collect();

    Ok(GaussianNbModel {
        features: features.clone(),
        scalers,
        classes,
    })
}

impl GaussianNbModel {
    pub fn feature_set(&self) -> &FeatureSet {
        &self.features
    }

    pub fn prior(&self, class: InputClass) -> f64 {
        self.classes[class.index()].prior
    }

    /// Standardised feature values, in model order.
    pub fn standardize(&self, row: &FeatureRow) -> Result<Vec<f64>, ClassifierError> {
        let mut x = vec![0.0; self.features.len()];
        row_values(row, &self.features, &mut x)?;
        for (v, s) in x.iter_mut().zip(&self.scalers) {
            *v = s.apply(*v);
        }
        Ok(x)
    }

    /// Per-feature exponents for plain NB: 1 for base features, 0 for PI.
    pub fn nb_exponents(&self) -> Vec<f64> {
        self.features
            .features()
            .iter()
            .map(|f| if f.is_pi() { 0.0 } else { 1.0 })
            .collect()
    }

    /// Per-feature exponents `w / 100` for `state`. PI features are zeroed
    /// unless `use_pi`.
    pub fn owo_exponents(
        &self,
        state: OperationalState,
        weights: &WeightTable,
        use_pi: bool,
    ) -> Vec<f64> {
        self.features
            .features()
            .iter()
            .map(|f| {
                if f.is_pi() && !use_pi {
                    0.0
                } else {
                    weights.exponent(state, f.weight_column())
                }
            })
            .collect()
    }

    /// Unnormalised log posterior for every class; `None` for unseen classes.
    pub fn log_scores(
        &self,
        row: &FeatureRow,
        exponents: &[f64],
    ) -> Result<[Option<f64>; NUM_CLASSES], ClassifierError> {
        let z = self.standardize(row)?;
        Ok(self.log_scores_standardized(&z, exponents))
    }

    fn log_scores_standardized(&self, z: &[f64], exponents: &[f64]) -> [Option<f64>; NUM_CLASSES] {
        let mut out = [None; NUM_CLASSES];
        for (ci, cp) in self.classes.iter().enumerate() {
            if cp.count == 0 {
                continue;
            }
            let mut score = ln(cp.prior);
            for i in 0..z.len() {
                let e = exponents[i];
                if e != 0.0 {
                    score += e * log_normal(z[i], cp.mean[i], cp.var[i]);
                }
            }
            out[ci] = Some(score);
        }
        out
    }

    /// Argmax with explicit exponents; ties go to the lowest class index.
    pub fn predict_with_exponents(
        &self,
        row: &FeatureRow,
        exponents: &[f64],
    ) -> Result<InputClass, ClassifierError> {
        debug_assert_eq!(exponents.len(), self.features.len());
        let z = self.standardize(row)?;
        Ok(argmax(&self.log_scores_standardized(&z, exponents)))
    }
}

pub(crate) fn argmax(scores: &[Option<f64>; NUM_CLASSES]) -> InputClass {
    let mut best: Option<(usize, f64)> = None;
    for (ci, s) in scores.iter().enumerate() {
        if let Some(s) = *s {
            match best {
                Some((_, b)) if s <= b => {}
                _ => best = Some((ci, s)),
            }
        }
    }
    // A fitted model always has at least one present class.
    InputClass::from_index(best.map(|b| b.0).unwrap_or(0)).unwrap()
}

/// Plain Gaussian NB over the base features.
pub fn predict_nb(
    model: &GaussianNbModel,
    row: &FeatureRow,
) -> Result<InputClass, ClassifierError> {
    model.predict_with_exponents(row, &model.nb_exponents())
}

/// State-weighted prediction using every feature in the model, PI included
/// when the model has it.
pub fn predict_owo(
    model: &GaussianNbModel,
    row: &FeatureRow,
    state: OperationalState,
    weights: &WeightTable,
) -> Result<InputClass, ClassifierError> {
    model.predict_with_exponents(row, &model.owo_exponents(state, weights, true))
}
