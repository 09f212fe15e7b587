//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its measured numbers. Criteria mix exact oracle equivalences
//! (enumeration vs greedy, collapsed single-sensor forms) with desk-scale
//! statistical trend checks of the bundled scenarios.

mod common;

use std::time::Instant;

use common::*;
use nalgebra::{DMatrix, Vector2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use mscphd::filters::{
    extract_estimates, gcphd_update_with_details, gphd_update_with_details, predict,
    single_sensor_cphd_update, FilterConfig, FilterMode, FilterState,
};
use mscphd::gaussian::ReductionParams;
use mscphd::ospa::{min_cost_assignment, ospa, OspaParams};
use mscphd::partition::{GreedyParams, SensorOrder};
use mscphd::sim::{
    bearing_demo_scenario, generate_measurements, linear_demo_scenario, mix_seed, simulate_tracks,
    Scenario, Trajectory,
};

fn pass(criterion: usize, name: &str, detail: String) {
    println!("ACCEPTANCE {criterion} ({name}): PASS {detail}");
}

#[test]
fn criterion_01_exact_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA1);
    let mut worst_ms = 0.0f64;
    for _ in 0..50 {
        let instance = random_desk(&mut rng, &DeskOptions::default());
        let start = Instant::now();

        let mut exact_config = instance.config.clone();
        exact_config.exact_update = true;
        let (_, exact) =
            gcphd_update_with_details(&instance.predicted, &instance.frame, &exact_config)
                .unwrap();
        let (_, greedy) =
            gcphd_update_with_details(&instance.predicted, &instance.frame, &instance.config)
                .unwrap();

        assert_mixtures_close(&exact.raw_posterior, &greedy.raw_posterior, 1e-9, "posterior");
        assert_cardinality_close(
            exact.raw_cardinality.as_ref().unwrap(),
            greedy.raw_cardinality.as_ref().unwrap(),
            1e-9,
            "cardinality",
        );

        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        worst_ms = worst_ms.max(elapsed);
        assert!(elapsed < 1000.0, "instance took {elapsed:.1} ms");
    }
    pass(
        1,
        "exact-oracle equivalence",
        format!("50 instances within 1e-9; slowest {worst_ms:.1} ms"),
    );
}

#[test]
fn criterion_02_single_sensor_triple_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA2);
    for _ in 0..50 {
        let opts = DeskOptions { sensors: 1..=1, measurements: 0..=6, ..DeskOptions::default() };
        let instance = random_desk(&mut rng, &opts);
        let mut exact_config = instance.config.clone();
        exact_config.exact_update = true;
        let (_, exact) =
            gcphd_update_with_details(&instance.predicted, &instance.frame, &exact_config)
                .unwrap();
        let (_, greedy) =
            gcphd_update_with_details(&instance.predicted, &instance.frame, &instance.config)
                .unwrap();
        let collapsed = single_sensor_cphd_update(
            &instance.predicted,
            &instance.frame.per_sensor[0],
            &instance.config.sensors[0],
        )
        .unwrap();

        assert_mixtures_close(&exact.raw_posterior, &greedy.raw_posterior, 1e-9, "exact/greedy");
        assert_mixtures_close(&exact.raw_posterior, &collapsed.phd, 1e-9, "exact/esf");
        assert_cardinality_close(
            exact.raw_cardinality.as_ref().unwrap(),
            greedy.raw_cardinality.as_ref().unwrap(),
            1e-9,
            "exact/greedy cardinality",
        );
        assert_cardinality_close(
            exact.raw_cardinality.as_ref().unwrap(),
            collapsed.cardinality.as_ref().unwrap(),
            1e-9,
            "exact/esf cardinality",
        );
    }
    pass(2, "s=1 triple agreement", "50 frames with m <= 6 within 1e-9".into());
}

#[test]
fn criterion_03_poisson_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA3);
    let mut worst_alpha0 = 0.0f64;
    for _ in 0..20 {
        let opts =
            DeskOptions { poisson_cardinality: Some(2.0), n_max: 40, ..DeskOptions::default() };
        let instance = random_desk(&mut rng, &opts);
        let (_, cphd) =
            gcphd_update_with_details(&instance.predicted, &instance.frame, &instance.config)
                .unwrap();
        let mut phd_config = instance.config.clone();
        phd_config.mode = FilterMode::GPhd;
        let predicted_phd = FilterState { phd: instance.predicted.phd.clone(), cardinality: None };
        let (_, phd) =
            gphd_update_with_details(&predicted_phd, &instance.frame, &phd_config).unwrap();

        let mu = instance.predicted.phd.total_weight();
        worst_alpha0 = worst_alpha0.max((cphd.alpha0 - mu).abs());
        assert!(
            (cphd.alpha0 - mu).abs() < 1e-6,
            "alpha0 {} differs from mu {mu}",
            cphd.alpha0
        );
        assert_mixtures_close(&cphd.raw_posterior, &phd.raw_posterior, 1e-6, "cphd/phd weights");
    }
    pass(
        3,
        "Poisson reduction",
        format!("20 instances; max |alpha0 - mu| = {worst_alpha0:.2e}"),
    );
}

#[test]
fn criterion_04_normalization_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA4);
    for i in 0..1000 {
        let mut instance = random_desk(&mut rng, &DeskOptions::default());
        // Realistic beams rather than maximal ones.
        instance.config.greedy =
            GreedyParams { w_max: 6, p_max: 6, sensor_order: SensorOrder::Ascending };
        let (state, details) =
            gcphd_update_with_details(&instance.predicted, &instance.frame, &instance.config)
                .unwrap();
        let card_sum: f64 = state.cardinality.as_ref().unwrap().probs().iter().sum();
        assert!((card_sum - 1.0).abs() <= 1e-9, "step {i}: cardinality sum {card_sum}");
        let alpha_sum: f64 = details.log_alpha_p.iter().map(|l| l.exp()).sum();
        assert!((alpha_sum - 1.0).abs() <= 1e-9, "step {i}: alpha sum {alpha_sum}");
        assert!(
            state.phd.components.iter().all(|c| c.weight >= -1e-12),
            "step {i}: negative weight"
        );
    }
    pass(4, "normalization invariants", "1000 random update steps".into());
}

/// Shared Monte-Carlo runner: mean OSPA over runs and steps plus mean
/// per-step update time in milliseconds.
#[allow(clippy::too_many_arguments)]
fn run_mc(
    scenario: &Scenario,
    tracks: &[Trajectory],
    mode: FilterMode,
    runs: usize,
    seed: u64,
    greedy: GreedyParams,
    n_max: usize,
    ospa_params: &OspaParams,
) -> (f64, f64) {
    let results: Vec<(f64, f64)> = (0..runs as u64)
        .into_par_iter()
        .map(|run| {
            let frames = generate_measurements(scenario, tracks, mix_seed(seed, &[run]));
            let birth = scenario.birth.build(n_max);
            let config = FilterConfig {
                survival_prob: 0.99,
                motion: scenario.motion.build(),
                sensors: scenario.build_sensor_models(),
                greedy: greedy.clone(),
                reduction: ReductionParams::default(),
                n_max,
                mode,
                exact_update: false,
            };
            let mut state = FilterState::initial(mode, n_max);
            let mut total_ospa = 0.0;
            let mut total_ms = 0.0;
            for (i, frame) in frames.iter().enumerate() {
                let predicted = predict(&state, &config, &birth);
                let start = Instant::now();
                state = match mode {
                    FilterMode::GCphd => {
                        mscphd::filters::gcphd_update(&predicted, frame, &config)
                    }
                    FilterMode::GPhd => mscphd::filters::gphd_update(&predicted, frame, &config),
                    FilterMode::IcCphd => {
                        mscphd::filters::ic_cphd_update(&predicted, frame, &config)
                    }
                    FilterMode::IcPhd => {
                        mscphd::filters::ic_phd_update(&predicted, frame, &config)
                    }
                }
                .expect("update failed");
                total_ms += start.elapsed().as_secs_f64() * 1e3;
                let (_, estimates) = extract_estimates(&state, mode);
                let truth: Vec<Vector2<f64>> =
                    tracks.iter().filter_map(|t| t.position_at(i + 1)).collect();
                let est: Vec<Vector2<f64>> =
                    estimates.iter().map(|e| Vector2::new(e[0], e[1])).collect();
                total_ospa += ospa(&truth, &est, ospa_params);
            }
            let n = frames.len() as f64;
            (total_ospa / n, total_ms / n)
        })
        .collect();
    let n = results.len() as f64;
    (
        results.iter().map(|r| r.0).sum::<f64>() / n,
        results.iter().map(|r| r.1).sum::<f64>() / n,
    )
}

#[test]
fn criterion_05_detection_sweep_trends() {
    let base = linear_demo_scenario();
    let tracks = simulate_tracks(&base);
    let params = OspaParams::new(100.0, 1.0);
    let greedy = GreedyParams::default();
    let modes = [
        ("gcphd", FilterMode::GCphd),
        ("gphd", FilterMode::GPhd),
        ("iccphd", FilterMode::IcCphd),
        ("icphd", FilterMode::IcPhd),
    ];
    let pds = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

    let start = Instant::now();
    // means[pd_index][mode_index]
    let mut means = vec![[0.0f64; 4]; pds.len()];
    for (pi, &pd) in pds.iter().enumerate() {
        let mut scenario = base.clone();
        scenario.sensors[5].set_detection_prob(pd);
        for (mi, (_, mode)) in modes.iter().enumerate() {
            let seed = mix_seed(0xC5, &[pi as u64]);
            let (mean_ospa, _) =
                run_mc(&scenario, &tracks, *mode, 10, seed, greedy.clone(), 20, &params);
            means[pi][mi] = mean_ospa;
        }
    }
    let elapsed = start.elapsed();

    for (pi, &pd) in pds.iter().enumerate() {
        let [gcphd, gphd, iccphd, icphd] = means[pi];
        // (a) the iterated-corrector PHD is strictly worst everywhere.
        assert!(
            icphd > gcphd && icphd > gphd && icphd > iccphd,
            "IC-PHD not worst at pd={pd}: {:?}",
            means[pi]
        );
        // (c) the CPHD never trails the PHD by more than one OSPA unit.
        assert!(
            gcphd <= gphd + 1.0,
            "G-CPHD {gcphd} exceeds G-PHD {gphd} + 1.0 at pd={pd}"
        );
    }
    // (b) every filter improves from pd = 0.2 to pd = 1.0.
    for (mi, (name, _)) in modes.iter().enumerate() {
        assert!(
            means[pds.len() - 1][mi] < means[0][mi],
            "{name} did not improve: pd=0.2 -> {}, pd=1.0 -> {}",
            means[0][mi],
            means[pds.len() - 1][mi]
        );
    }
    assert!(elapsed.as_secs() < 1800, "sweep took {elapsed:?}");
    pass(
        5,
        "detection sweep trends",
        format!(
            "pd=0.2 means {:?}; pd=1.0 means {:?}; {elapsed:.0?}",
            means[0].map(|m| (m * 100.0).round() / 100.0),
            means[pds.len() - 1].map(|m| (m * 100.0).round() / 100.0)
        ),
    );
}

#[test]
fn criterion_06_sensor_scaling() {
    let mut scenario = linear_demo_scenario();
    for s in &mut scenario.sensors {
        s.set_detection_prob(0.5);
    }
    // Extend to eight identical sensors.
    while scenario.sensors.len() < 8 {
        scenario.sensors.push(scenario.sensors[0].clone());
    }
    scenario.variable_sensor = None;
    let tracks = simulate_tracks(&scenario);
    let params = OspaParams::new(100.0, 1.0);

    let mut timings = Vec::new();
    for s in [4usize, 8] {
        let mut sub = scenario.clone();
        sub.sensors.truncate(s);
        let (_, mean_ms) = run_mc(
            &sub,
            &tracks,
            FilterMode::GCphd,
            5,
            0xC6,
            GreedyParams::default(),
            20,
            &params,
        );
        timings.push(mean_ms);
    }
    let ratio = timings[1] / timings[0];
    assert!(
        ratio <= 3.0,
        "update time grew superlinearly: t(8)={:.2} ms, t(4)={:.2} ms, ratio {ratio:.2}",
        timings[1],
        timings[0]
    );
    pass(
        6,
        "sensor scaling",
        format!("t(4)={:.2} ms, t(8)={:.2} ms, ratio {ratio:.2} <= 3", timings[0], timings[1]),
    );
}

#[test]
fn criterion_07_subset_beam_sweep() {
    let mut scenario = linear_demo_scenario();
    for s in &mut scenario.sensors {
        s.set_detection_prob(0.5);
    }
    let tracks = simulate_tracks(&scenario);
    let params = OspaParams::new(100.0, 1.0);

    let mut means = Vec::new();
    for w_max in [1usize, 2] {
        let greedy = GreedyParams { w_max, p_max: 6, sensor_order: SensorOrder::Ascending };
        let (mean_ospa, _) =
            run_mc(&scenario, &tracks, FilterMode::GCphd, 10, 0xC7, greedy, 20, &params);
        means.push(mean_ospa);
    }
    assert!(
        means[1] <= means[0],
        "W_max=2 ({}) did not improve on W_max=1 ({})",
        means[1],
        means[0]
    );
    pass(
        7,
        "subset beam sweep",
        format!("mean OSPA {:.2} at W_max=1 vs {:.2} at W_max=2", means[0], means[1]),
    );
}

#[test]
fn criterion_08_bearings_scenario() {
    let scenario = bearing_demo_scenario();
    let tracks = simulate_tracks(&scenario);
    let params = OspaParams::new(2.0, 1.0);

    let (gcphd, _) = run_mc(
        &scenario,
        &tracks,
        FilterMode::GCphd,
        10,
        0xC8,
        GreedyParams::default(),
        20,
        &params,
    );
    let (gphd, _) = run_mc(
        &scenario,
        &tracks,
        FilterMode::GPhd,
        10,
        0xC8,
        GreedyParams::default(),
        20,
        &params,
    );
    assert!(gcphd < 1.0, "G-CPHD bearings mean OSPA {gcphd} >= 1.0");
    assert!(gcphd <= gphd + 0.1, "G-CPHD {gcphd} trails G-PHD {gphd} by more than 0.1");
    pass(
        8,
        "bearings scenario",
        format!("G-CPHD mean OSPA {gcphd:.3}, G-PHD {gphd:.3} (c=2)"),
    );
}

#[test]
fn criterion_09_ospa_unit_suite() {
    let params = OspaParams::new(100.0, 1.0);
    let a = vec![Vector2::new(1.0, 2.0), Vector2::new(-3.0, 4.0)];
    assert_eq!(ospa(&a, &a, &params), 0.0);
    assert_eq!(ospa(&[], &[Vector2::new(7.0, 7.0)], &params), 100.0);
    assert!(
        (ospa(&[Vector2::new(0.0, 0.0)], &[Vector2::new(3.0, 4.0)], &params) - 5.0).abs()
            < 1e-12
    );

    let mut rng = ChaCha8Rng::seed_from_u64(0xA9);
    for _ in 0..100 {
        let cost = DMatrix::from_fn(6, 6, |_, _| rng.gen_range(0.0..10.0));
        let (assignment, total) = min_cost_assignment(&cost);
        // Exhaustive search over all 720 permutations.
        let mut perm: Vec<usize> = (0..6).collect();
        let mut best = f64::INFINITY;
        permutations(&mut perm, 0, &mut |p| {
            let c: f64 = p.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum();
            if c < best {
                best = c;
            }
        });
        assert!((total - best).abs() < 1e-10, "assignment {total} vs brute force {best}");
        // The reported assignment is consistent with its cost.
        let recomputed: f64 =
            assignment.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum();
        assert!((recomputed - total).abs() < 1e-12);
    }
    pass(9, "OSPA unit suite", "examples exact; 100 random 6x6 assignments optimal".into());
}

fn permutations(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permutations(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

#[test]
fn extraction_matches_simulation_truth_shape() {
    // Light sanity run: a short prefix of the bundled scenario keeps the
    // estimate count near the true count.
    let mut scenario = linear_demo_scenario();
    scenario.duration = 30;
    for t in &mut scenario.targets {
        t.death_step = t.death_step.min(30);
    }
    scenario.targets.retain(|t| t.birth_step < 30);
    let tracks = simulate_tracks(&scenario);
    let params = OspaParams::new(100.0, 1.0);
    let (mean, _) = run_mc(
        &scenario,
        &tracks,
        FilterMode::GCphd,
        3,
        0xAB,
        GreedyParams::default(),
        20,
        &params,
    );
    assert!(mean < 60.0, "tracking collapsed: mean OSPA {mean}");
}
