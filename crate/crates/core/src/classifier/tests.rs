use super::*;
use crate::odm::OperationalState;
use alloc::vec;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn class(i: usize) -> InputClass {
    InputClass::from_index(i).unwrap()
}

/// Row with only `S` and `RoA` carrying information.
fn row2(s: f64, roa: f64) -> FeatureRow {
    FeatureRow::new([0.0, s, 0.0, 0.0, roa, 0.0], None)
}

fn toy_features() -> FeatureSet {
    FeatureSet::custom(&[Feature::S, Feature::RoA])
}

/// Gaussian blobs, one per class, in the (S, RoA) plane.
fn toy_rows(centres: &[(usize, f64, f64, f64)], per_class: usize, seed: u64) -> Vec<LabeledRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for &(ci, cs, cr, spread) in centres {
        for _ in 0..per_class {
            let s = cs + spread * (rng.random::<f64>() - 0.5) * 3.0;
            let r = cr + spread * (rng.random::<f64>() - 0.5) * 3.0;
            rows.push(LabeledRow {
                row: row2(s, r),
                class: class(ci),
            });
        }
    }
    rows
}

/// Oracle: moments computed directly from the rows, posterior evaluated as a
/// product of densities in linear space.
struct LinearOracle {
    mean: [f64; 2],
    sd: [f64; 2],
    prior: [f64; NUM_CLASSES],
    mu: [[f64; 2]; NUM_CLASSES],
    var: [[f64; 2]; NUM_CLASSES],
}

impl LinearOracle {
    fn new(rows: &[LabeledRow]) -> Self {
        let get = |r: &LabeledRow| [r.row.base[1], r.row.base[4]];
        let n = rows.len() as f64;
        let mut mean = [0.0; 2];
        for r in rows {
            let x = get(r);
            mean[0] += x[0] / n;
            mean[1] += x[1] / n;
        }
        let mut sd = [0.0; 2];
        for j in 0..2 {
            let v: f64 = rows
                .iter()
                .map(|r| (get(r)[j] - mean[j]).powi(2))
                .sum::<f64>()
                / n;
            sd[j] = v.sqrt();
        }
        let mut prior = [0.0; NUM_CLASSES];
        let mut mu = [[0.0; 2]; NUM_CLASSES];
        let mut var = [[0.0; 2]; NUM_CLASSES];
        for c in 0..NUM_CLASSES {
            let zs: Vec<[f64; 2]> = rows
                .iter()
                .filter(|r| r.class.index() == c)
                .map(|r| {
                    let x = get(r);
                    [(x[0] - mean[0]) / sd[0], (x[1] - mean[1]) / sd[1]]
                })
                .collect();
            if zs.is_empty() {
                continue;
            }
            let m = zs.len() as f64;
            prior[c] = m / n;
            for j in 0..2 {
                mu[c][j] = zs.iter().map(|z| z[j]).sum::<f64>() / m;
                var[c][j] =
                    (zs.iter().map(|z| (z[j] - mu[c][j]).powi(2)).sum::<f64>() / m).max(VAR_FLOOR);
            }
        }
        Self {
            mean,
            sd,
            prior,
            mu,
            var,
        }
    }

    fn predict(&self, s: f64, roa: f64) -> usize {
        let z = [
            (s - self.mean[0]) / self.sd[0],
            (roa - self.mean[1]) / self.sd[1],
        ];
        let mut best = (usize::MAX, -1.0f64);
        for c in 0..NUM_CLASSES {
            if self.prior[c] == 0.0 {
                continue;
            }
            let mut p = self.prior[c];
            for j in 0..2 {
                let v = self.var[c][j];
                p *= (-(z[j] - self.mu[c][j]).powi(2) / (2.0 * v)).exp()
                    / (2.0 * core::f64::consts::PI * v).sqrt();
            }
            if p > best.1 {
                best = (c, p);
            }
        }
        best.0
    }
}

#[test]
fn separated_classes_recovered_exactly() {
    let rows = toy_rows(&[(0, 0.0, 0.0, 0.1), (3, 10.0, 0.0, 0.1)], 50, 1);
    let model = fit(&rows, &toy_features()).unwrap();
    for r in &rows {
        assert_eq!(predict_nb(&model, &r.row).unwrap(), r.class);
    }
}

#[test]
fn single_class_has_unit_prior() {
    let rows = toy_rows(&[(6, 1.0, 1.0, 0.5)], 20, 2);
    let model = fit(&rows, &toy_features()).unwrap();
    assert_eq!(model.prior(class(6)), 1.0);
    for c in InputClass::all().filter(|c| c.index() != 6) {
        assert_eq!(model.prior(c), 0.0);
    }
    assert_eq!(predict_nb(&model, &row2(50.0, -50.0)).unwrap(), class(6));
}

#[test]
fn fit_errors() {
    assert_eq!(
        fit(&[], &toy_features()),
        Err(ClassifierError::EmptyDataset)
    );
    let mut rows = toy_rows(&[(0, 0.0, 0.0, 1.0)], 5, 3);
    rows.push(LabeledRow {
        row: row2(1.0, 1.0),
        class: class(8),
    });
    assert_eq!(
        fit(&rows, &toy_features()),
        Err(ClassifierError::SingletonClass(class(8)))
    );
    let rows = vec![
        LabeledRow {
            row: row2(f64::NAN, 0.0),
            class: class(0),
        },
        LabeledRow {
            row: row2(1.0, 0.0),
            class: class(0),
        },
    ];
    assert_eq!(
        fit(&rows, &toy_features()),
        Err(ClassifierError::NonFinite(Feature::S))
    );
}

#[test]
fn priors_sum_to_one_on_simulated_rows() {
    let route = crate::route::RouteSpec::new(
        3000.0,
        15.0,
        vec![
            crate::route::RouteFeature::new(
                1000.0,
                crate::route::FeatureKind::Signal {
                    aspect_limit_mps: 15.0,
                },
            ),
            crate::route::RouteFeature::new(
                2000.0,
                crate::route::FeatureKind::SpeedLimitChange { limit_mps: 8.0 },
            ),
        ],
    )
    .unwrap();
    let run = crate::sim::generate_run(&route, 5, 0.1).unwrap();
    let rows: Vec<LabeledRow> = run
        .steps
        .iter()
        .take(1000)
        .map(LabeledRow::from_step)
        .collect();
    assert_eq!(rows.len(), 1000);
    // Drop singleton classes so the fit is defined.
    let mut counts = [0usize; NUM_CLASSES];
    rows.iter().for_each(|r| counts[r.class.index()] += 1);
    let rows: Vec<LabeledRow> = rows
        .into_iter()
        .filter(|r| counts[r.class.index()] > 1)
        .collect();
    let model = fit(&rows, &FeatureSet::with_pi()).unwrap();
    let total: f64 = InputClass::all().map(|c| model.prior(c)).sum();
    assert!((total - 1.0).abs() <= 1e-12, "{total}");
    for cp in &model.classes {
        assert!(cp.var.iter().all(|v| *v >= VAR_FLOOR));
    }
}

#[test]
fn symmetric_toy_at_class_mean() {
    let rows = toy_rows(&[(1, -2.0, 0.0, 0.5), (2, 2.0, 0.0, 0.5)], 40, 4);
    let model = fit(&rows, &toy_features()).unwrap();
    assert_eq!(predict_nb(&model, &row2(-2.0, 0.0)).unwrap(), class(1));
    assert_eq!(predict_nb(&model, &row2(2.0, 0.0)).unwrap(), class(2));
}

#[test]
fn exact_tie_goes_to_lower_index() {
    // Mirror-image classes: same count, same spread, means symmetric about 0.
    let mut rows = Vec::new();
    for x in [-3.0, -1.0] {
        rows.push(LabeledRow {
            row: row2(x, 0.0),
            class: class(7),
        });
    }
    for x in [1.0, 3.0] {
        rows.push(LabeledRow {
            row: row2(x, 0.0),
            class: class(5),
        });
    }
    let model = fit(&rows, &FeatureSet::custom(&[Feature::S])).unwrap();
    assert_eq!(predict_nb(&model, &row2(0.0, 0.0)).unwrap(), class(5));
}

#[test]
fn five_class_model_matches_linear_oracle() {
    let centres = [
        (0, 0.0, 0.0, 1.0),
        (2, 3.0, 1.0, 1.5),
        (4, -2.0, 2.0, 0.8),
        (5, 1.0, -2.5, 1.2),
        (8, -3.0, -1.0, 2.0),
    ];
    let rows = toy_rows(&centres, 60, 5);
    let model = fit(&rows, &toy_features()).unwrap();
    let oracle = LinearOracle::new(&rows);
    for c in 0..NUM_CLASSES {
        let cp = &model.classes[c];
        assert!((cp.prior - oracle.prior[c]).abs() < 1e-12);
        if cp.count > 0 {
            for j in 0..2 {
                assert!((cp.mean[j] - oracle.mu[c][j]).abs() < 1e-9);
                assert!((cp.var[j] - oracle.var[c][j]).abs() < 1e-9);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for _ in 0..200 {
        let s = rng.random_range(-6.0..6.0);
        let r = rng.random_range(-6.0..6.0);
        assert_eq!(
            predict_nb(&model, &row2(s, r)).unwrap().index(),
            oracle.predict(s, r),
            "at ({s}, {r})"
        );
    }
}

#[test]
fn missing_and_non_finite_features_rejected() {
    let rows = toy_rows(&[(0, 0.0, 0.0, 1.0), (1, 2.0, 2.0, 1.0)], 10, 6);
    let mut with_pi = rows.clone();
    for r in &mut with_pi {
        r.row.pi = Some([0.0, 0.0]);
    }
    let model = fit(
        &with_pi,
        &FeatureSet::custom(&[Feature::S, Feature::PrevPower]),
    )
    .unwrap();
    let weights = WeightTable::uniform();
    assert_eq!(
        predict_owo(&model, &row2(0.0, 0.0), OperationalState::Cruise, &weights),
        Err(ClassifierError::MissingFeature(Feature::PrevPower))
    );
    let base = fit(&rows, &toy_features()).unwrap();
    assert_eq!(
        predict_nb(&base, &row2(f64::INFINITY, 0.0)),
        Err(ClassifierError::NonFinite(Feature::S))
    );
}

#[test]
fn batch_matches_elementwise_and_checks_lengths() {
    let rows = toy_rows(
        &[(0, 0.0, 0.0, 1.0), (1, 2.0, 2.0, 1.0), (6, -1.0, 3.0, 1.0)],
        30,
        7,
    );
    let model = fit(&rows, &toy_features()).unwrap();
    let feats: Vec<FeatureRow> = rows.iter().map(|r| r.row).collect();
    let states = vec![OperationalState::Cruise; feats.len()];
    let w = WeightTable::default();
    let nb = predict_batch(&model, &feats, &states, &w, Variant::Nb).unwrap();
    for (r, p) in feats.iter().zip(&nb) {
        assert_eq!(predict_nb(&model, r).unwrap(), *p);
    }
    assert!(predict_batch(&model, &[], &[], &w, Variant::Owo)
        .unwrap()
        .is_empty());
    assert_eq!(
        predict_batch(&model, &feats, &states[1..], &w, Variant::Nb),
        Err(ClassifierError::LengthMismatch {
            rows: feats.len(),
            states: feats.len() - 1
        })
    );
    assert_eq!(
        predict_batch(&model, &feats, &states, &w, Variant::OwoPi),
        Err(ClassifierError::VariantMismatch(Variant::OwoPi))
    );
}

#[test]
fn scaling_priors_never_changes_predictions() {
    let rows = toy_rows(
        &[(0, 0.0, 0.0, 1.0), (3, 1.5, 1.0, 1.0), (7, -1.0, 1.0, 1.0)],
        40,
        8,
    );
    let model = fit(&rows, &toy_features()).unwrap();
    let mut scaled = model.clone();
    for cp in &mut scaled.classes {
        cp.prior *= 0.125;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        let r = row2(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        assert_eq!(
            predict_nb(&model, &r).unwrap(),
            predict_nb(&scaled, &r).unwrap()
        );
    }
}

#[test]
fn raising_a_favouring_feature_never_flips_away() {
    // Two classes separated on S only; RoA is noise shared by both.
    let rows = toy_rows(&[(1, -1.0, 0.0, 2.0), (6, 1.0, 0.0, 2.0)], 200, 10);
    let model = fit(&rows, &toy_features()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let single = |i: usize| {
        let mut e = vec![0.0; 2];
        e[i] = 1.0;
        e
    };
    for _ in 0..2000 {
        let r = row2(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let s_only = model.log_scores(&r, &single(0)).unwrap();
        let lr = s_only[1].unwrap()
            - s_only[6].unwrap()
            - (model.prior(class(1)).ln() - model.prior(class(6)).ln());
        let favoured = if lr > 0.0 { class(1) } else { class(6) };
        let low = model.predict_with_exponents(&r, &[0.0, 1.0]).unwrap();
        let high = model.predict_with_exponents(&r, &[2.0, 1.0]).unwrap();
        if low == favoured {
            assert_eq!(high, favoured);
        }
    }
}

#[test]
fn predictions_repeatable() {
    let rows = toy_rows(&[(0, 0.0, 0.0, 1.0), (4, 1.0, 1.0, 1.0)], 30, 12);
    let a = fit(&rows, &toy_features()).unwrap();
    let b = fit(&rows, &toy_features()).unwrap();
    assert_eq!(a, b);
    let r = row2(0.4, 0.6);
    assert_eq!(predict_nb(&a, &r).unwrap(), predict_nb(&b, &r).unwrap());
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn model_with_pi() -> GaussianNbModel {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut rows = Vec::new();
        for c in [0usize, 1, 2, 5, 6] {
            for _ in 0..40 {
                let mut base = [0.0; 6];
                for (j, b) in base.iter_mut().enumerate() {
                    *b = (c as f64) * 0.3 * (j as f64 + 1.0) + rng.random_range(-1.0..1.0);
                }
                let pi = [
                    rng.random_range(0.0..4.0f64).round(),
                    rng.random_range(0.0..4.0f64).round(),
                ];
                rows.push(LabeledRow {
                    row: FeatureRow::new(base, Some(pi)),
                    class: class(c),
                });
            }
        }
        fit(&rows, &FeatureSet::with_pi()).unwrap()
    }

    fn base_of(m: &GaussianNbModel) -> GaussianNbModel {
        // Same parameters restricted to the base features.
        let n = 6;
        GaussianNbModel {
            features: FeatureSet::base(),
            scalers: m.scalers[..n].to_vec(),
            classes: m
                .classes
                .iter()
                .map(|c| ClassParams {
                    count: c.count,
                    prior: c.prior,
                    mean: c.mean[..n].to_vec(),
                    var: c.var[..n].to_vec(),
                })
                .collect(),
        }
    }

    fn arb_row() -> impl Strategy<Value = FeatureRow> {
        (prop::array::uniform6(-5.0..5.0f64), 0u8..5, 0u8..5)
            .prop_map(|(b, p, q)| FeatureRow::new(b, Some([p as f64, q as f64])))
    }

    fn arb_state() -> impl Strategy<Value = OperationalState> {
        prop::sample::select(OperationalState::ALL.to_vec())
    }

    proptest! {
        #[test]
        fn uniform_owo_equals_nb_on_base_model(row in arb_row(), state in arb_state()) {
            let m = base_of(&model_with_pi());
            let w = WeightTable::uniform();
            prop_assert_eq!(predict_owo(&m, &row, state, &w).unwrap(), predict_nb(&m, &row).unwrap());
        }

        #[test]
        fn zero_weight_features_are_inert(row in arb_row(), state in arb_state(), v in -1e3..1e3f64, pick in 0usize..8) {
            let m = model_with_pi();
            let w = WeightTable::default();
            let feat = m.feature_set().features()[pick];
            prop_assume!(w.get(state, feat.weight_column()) == 0);
            let mut perturbed = row;
            perturbed.set(feat, v);
            prop_assert_eq!(
                predict_owo(&m, &row, state, &w).unwrap(),
                predict_owo(&m, &perturbed, state, &w).unwrap()
            );
        }
    }
}
