//! Quadrature verification of the update-step scalar quantities on 1-D
//! instances: subset scores, likelihood ratios and subset posteriors are
//! checked against direct numeric integration of their defining integrals.

mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use mscphd::cardinality::ClutterModel;
use mscphd::gaussian::{GaussianComponent, GaussianMixture, LinearObservationModel};
use mscphd::measurement::MeasurementFrame;
use mscphd::partition::{
    enumerate_subsets, subset_score_beta, MeasurementIndex, MeasurementSubset,
};
use mscphd::sensor::{Observation, SensorModel};
use mscphd::update::{compute_log_dw, posterior_gm_for_subset};

fn sensor_1d(p_d: f64, h: f64, r: f64, rate: f64, area: f64) -> SensorModel {
    SensorModel::new(
        p_d,
        Observation::Linear(LinearObservationModel::new(
            DMatrix::from_vec(1, 1, vec![h]),
            DMatrix::from_vec(1, 1, vec![r]),
        )),
        ClutterModel::poisson_rect(rate, area),
    )
}

fn comp_1d(w: f64, m: f64, v: f64) -> GaussianComponent {
    GaussianComponent::new(w, DVector::from_vec(vec![m]), DMatrix::from_vec(1, 1, vec![v]))
}

#[test]
fn beta_all_miss_product() {
    let sensors: Vec<SensorModel> = (0..4).map(|_| sensor_1d(0.5, 1.0, 1.0, 1.0, 20.0)).collect();
    let frame = MeasurementFrame::empty(4);
    let comp = comp_1d(1.0, 0.0, 1.0);
    let beta = subset_score_beta(&comp, &MeasurementSubset::empty(), &frame, &sensors, None)
        .unwrap()
        .exp();
    assert!((beta - 0.5f64.powi(4)).abs() < 1e-12);
}

#[test]
fn beta_single_measurement_quadrature() {
    // One detected measurement at the prior mean, a second undetected
    // sensor contributing its miss factor, uniform clutter over [-10, 10].
    let sensors = vec![sensor_1d(0.5, 1.0, 1.0, 1.0, 20.0), sensor_1d(0.5, 1.0, 1.0, 1.0, 20.0)];
    let frame = MeasurementFrame::new(vec![vec![DVector::from_vec(vec![0.0])], vec![]]);
    let comp = comp_1d(1.0, 0.0, 1.0);
    let w = MeasurementSubset::singleton(MeasurementIndex::new(0, 0));
    let beta = subset_score_beta(&comp, &w, &frame, &sensors, None).unwrap().exp();
    let oracle = beta_quadrature(&comp, &w, &frame, &sensors, &[0, 1]);
    assert!(
        (beta - oracle).abs() < 1e-9 * oracle,
        "beta {beta} vs quadrature {oracle}"
    );
    // Frozen from the quadrature oracle: 0.25 * N(0; 0, 2) / 0.05.
    assert!((oracle - 1.410_473_9).abs() < 1e-6, "oracle drifted: {oracle}");
}

#[test]
fn beta_chained_subsets_match_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..10 {
        let sensors: Vec<SensorModel> = (0..3)
            .map(|_| {
                sensor_1d(
                    rng.gen_range(0.3..0.9),
                    rng.gen_range(0.5..1.5),
                    rng.gen_range(0.5..2.0),
                    1.0,
                    20.0,
                )
            })
            .collect();
        let frame = MeasurementFrame::new(
            (0..3)
                .map(|_| {
                    (0..rng.gen_range(1..=2))
                        .map(|_| DVector::from_vec(vec![rng.gen_range(-3.0..3.0)]))
                        .collect()
                })
                .collect(),
        );
        let comp = comp_1d(1.0, rng.gen_range(-2.0..2.0), rng.gen_range(0.5..2.0));
        for subset in enumerate_subsets(&frame).unwrap() {
            let got = subset_score_beta(&comp, &subset, &frame, &sensors, None).unwrap().exp();
            let oracle = beta_quadrature(&comp, &subset, &frame, &sensors, &[0, 1, 2]);
            assert!(
                (got - oracle).abs() <= 1e-8 * oracle.max(1e-30),
                "beta {got} vs quadrature {oracle} for {subset:?}"
            );
        }
    }
}

#[test]
fn beta_invariant_to_sensor_relabeling() {
    // Swapping the two sensors (and relabeling the subset and frame
    // accordingly) must not change the full-frame score: the chained
    // conditioning order is irrelevant to the product of marginals.
    let sa = sensor_1d(0.6, 1.0, 0.7, 1.0, 20.0);
    let sb = sensor_1d(0.4, 1.2, 1.8, 1.0, 20.0);
    let za = DVector::from_vec(vec![0.8]);
    let zb = DVector::from_vec(vec![-0.5]);
    let comp = comp_1d(1.0, 0.2, 1.3);

    let frame_ab = MeasurementFrame::new(vec![vec![za.clone()], vec![zb.clone()]]);
    let frame_ba = MeasurementFrame::new(vec![vec![zb], vec![za]]);
    let w_both = MeasurementSubset::new(vec![
        MeasurementIndex::new(0, 0),
        MeasurementIndex::new(1, 0),
    ])
    .unwrap();

    let beta_ab = subset_score_beta(&comp, &w_both, &frame_ab, &[sa.clone(), sb.clone()], None)
        .unwrap();
    let beta_ba = subset_score_beta(&comp, &w_both, &frame_ba, &[sb, sa], None).unwrap();
    assert!(
        (beta_ab - beta_ba).abs() < 1e-12,
        "chaining order changed the score: {beta_ab} vs {beta_ba}"
    );
}

#[test]
fn beta_restricted_to_leading_sensors() {
    let sensors = vec![
        sensor_1d(0.5, 1.0, 1.0, 1.0, 20.0),
        sensor_1d(0.7, 1.0, 1.0, 1.0, 20.0),
        sensor_1d(0.9, 1.0, 1.0, 1.0, 20.0),
    ];
    let frame = MeasurementFrame::new(vec![vec![DVector::from_vec(vec![0.3])], vec![], vec![]]);
    let comp = comp_1d(1.0, 0.0, 1.0);
    let w = MeasurementSubset::singleton(MeasurementIndex::new(0, 0));
    let full = subset_score_beta(&comp, &w, &frame, &sensors, None).unwrap();
    let first_two = subset_score_beta(&comp, &w, &frame, &sensors, Some(2)).unwrap();
    let first_one = subset_score_beta(&comp, &w, &frame, &sensors, Some(1)).unwrap();
    // Each extra undetected sensor multiplies in its miss probability.
    assert!((full - (first_two + 0.1f64.ln())).abs() < 1e-12);
    assert!((first_two - (first_one + 0.3f64.ln())).abs() < 1e-12);
}

#[test]
fn dw_matches_quadrature_on_mixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..10 {
        let sensors: Vec<SensorModel> = (0..2)
            .map(|_| {
                sensor_1d(
                    rng.gen_range(0.3..0.9),
                    1.0,
                    rng.gen_range(0.5..2.0),
                    rng.gen_range(0.5..2.0),
                    20.0,
                )
            })
            .collect();
        let frame = MeasurementFrame::new(vec![
            vec![DVector::from_vec(vec![rng.gen_range(-3.0..3.0)])],
            vec![DVector::from_vec(vec![rng.gen_range(-3.0..3.0)])],
        ]);
        let raw = GaussianMixture::from_components(vec![
            comp_1d(rng.gen_range(0.2..1.0), rng.gen_range(-3.0..0.0), rng.gen_range(0.5..2.0)),
            comp_1d(rng.gen_range(0.2..1.0), rng.gen_range(0.0..3.0), rng.gen_range(0.5..2.0)),
        ]);
        let r = raw.normalized();
        for subset in enumerate_subsets(&frame).unwrap() {
            if subset.is_empty() {
                continue;
            }
            let got = compute_log_dw(&r, &subset, &frame, &sensors).unwrap().exp();
            let oracle = dw_quadrature(&r, &subset, &frame, &sensors);
            assert!(
                (got - oracle).abs() <= 1e-8 * oracle.max(1e-30),
                "d_W {got} vs quadrature {oracle}"
            );
        }
    }
}

#[test]
fn subset_posterior_weights_match_quadrature_ratio() {
    // The normalized posterior component weights are each component's
    // share of the subset integral.
    let sensors = vec![sensor_1d(0.5, 1.0, 1.0, 1.0, 20.0)];
    let frame = MeasurementFrame::new(vec![vec![DVector::from_vec(vec![0.5])]]);
    let raw = GaussianMixture::from_components(vec![comp_1d(0.6, -1.0, 1.0), comp_1d(0.4, 2.0, 0.7)]);
    let r = raw.normalized();
    let w = MeasurementSubset::singleton(MeasurementIndex::new(0, 0));
    let post = posterior_gm_for_subset(&r, &w, &frame, &sensors).unwrap();

    let active = [0usize];
    let b0 = r.components[0].weight
        * beta_quadrature(&r.components[0].with_weight(1.0), &w, &frame, &sensors, &active);
    let b1 = r.components[1].weight
        * beta_quadrature(&r.components[1].with_weight(1.0), &w, &frame, &sensors, &active);
    assert!((post.components[0].weight - b0 / (b0 + b1)).abs() < 1e-9);
    assert!((post.components[1].weight - b1 / (b0 + b1)).abs() < 1e-9);
    assert!((post.total_weight() - 1.0).abs() < 1e-12);
}
