use mscphd::filters::*;
use mscphd::gaussian::ReductionParams;
use mscphd::partition::{GreedyParams, SensorOrder};
use mscphd::sim::*;
use nalgebra::Vector2;

fn main() {
    let mut scenario = linear_demo_scenario();
    scenario.sensors[5].set_detection_prob(0.99);
    let tracks = simulate_tracks(&scenario);
    let frames = generate_measurements(&scenario, &tracks, 6);
    let birth = scenario.birth.build(20);
    let config = FilterConfig {
        survival_prob: 0.99,
        motion: scenario.motion.build(),
        sensors: scenario.build_sensor_models(),
        greedy: GreedyParams { w_max: 6, p_max: 6, sensor_order: SensorOrder::Ascending },
        reduction: ReductionParams::default(),
        n_max: 20,
        mode: FilterMode::GCphd,
        exact_update: false,
    };
    let mut state = FilterState::initial(FilterMode::GCphd, config.n_max);
    for (i, frame) in frames.iter().enumerate() {
        let step_idx = i + 1;
        let predicted = predict(&state, &config, &birth);
        if step_idx == 59 {
            // crossing targets truth
            let t1 = tracks[0].position_at(59).unwrap();
            let t4 = tracks[3].position_at(59).unwrap();
            println!("t1 {:?} t4 {:?}", (t1[0].round(), t1[1].round()), (t4[0].round(), t4[1].round()));
            // measurements near the crossing pair per sensor
            for (j, zs) in frame.per_sensor.iter().enumerate() {
                let near: Vec<(usize, f64, f64)> = zs.iter().enumerate()
                    .filter(|(_, z)| z.len() == 2 && ((z[0]-t1[0]).powi(2)+(z[1]-t1[1]).powi(2)).sqrt().min(((z[0]-t4[0]).powi(2)+(z[1]-t4[1]).powi(2)).sqrt()) < 40.0)
                    .map(|(l, z)| (l, z[0].round(), z[1].round())).collect();
                println!("sensor {j}: m={} near-crossing: {:?}", zs.len(), near);
            }
            // predicted components near crossing
            println!("predicted comps near crossing:");
            for (ci, c) in predicted.phd.components.iter().enumerate() {
                let d1 = ((c.mean[0]-t1[0]).powi(2)+(c.mean[1]-t1[1]).powi(2)).sqrt();
                let d4 = ((c.mean[0]-t4[0]).powi(2)+(c.mean[1]-t4[1]).powi(2)).sqrt();
                if d1 < 60.0 || d4 < 60.0 {
                    println!("  comp {ci}: w {:.3} at ({:.0},{:.0}) cov00 {:.1}", c.weight, c.mean[0], c.mean[1], c.covariance[(0,0)]);
                }
            }
            let (_, details) = gcphd_update_with_details(&predicted, frame, &config).unwrap();
            // dump subset log_dw for subsets touching the near-crossing sensor-5(idx) measurements
            println!("subset ratios (top):");
            let mut dws: Vec<(String, f64)> = details.subset_log_dw.iter()
                .map(|(w, d)| (format!("{:?}", w.indices().iter().map(|ix| (ix.sensor, ix.index)).collect::<Vec<_>>()), *d)).collect();
            dws.sort_by(|a, b| b.1.total_cmp(&a.1));
            for (s, d) in dws.iter().take(14) { println!("  {s}: {d:.1}"); }
            // partitions with alphas
            for (p, l) in details.partitions.iter().zip(&details.log_alpha_p) {
                let subs: Vec<Vec<(usize,usize)>> = p.subsets().iter().map(|w| w.indices().iter().map(|ix| (ix.sensor, ix.index)).collect()).collect();
                println!("alpha {:.3}: {:?}", l.exp(), subs);
            }
        }
        state = step(&state, frame, &config, &birth).unwrap();
        if step_idx >= 59 { break; }
    }
    let _ = Vector2::new(0.0, 0.0);
}
