//! Post-hoc track linking: joins the closest estimates across consecutive
//! time steps into labeled tracks. Purely cosmetic output for plotting;
//! the filters themselves are unlabeled.

/// One linked estimate.
#[derive(Debug, Clone)]
pub struct TrackPoint {
    pub track_id: usize,
    pub step: usize,
    pub x: f64,
    pub y: f64,
}

/// Greedy nearest-neighbor linking of per-step estimate sets.
///
/// Tracks updated at the previous step are candidates; estimate/track
/// pairs are matched closest-first under the gate, and leftover estimates
/// open new tracks.
pub fn link_tracks(estimates_per_step: &[Vec<(f64, f64)>], gate: f64) -> Vec<TrackPoint> {
    struct Active {
        id: usize,
        pos: (f64, f64),
        last_step: usize,
    }

    let mut out = Vec::new();
    let mut active: Vec<Active> = Vec::new();
    let mut next_id = 0;

    for (i, estimates) in estimates_per_step.iter().enumerate() {
        let step = i + 1;

        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (ti, track) in active.iter().enumerate() {
            if track.last_step + 1 != step {
                continue;
            }
            for (ei, &(x, y)) in estimates.iter().enumerate() {
                let d = ((track.pos.0 - x).powi(2) + (track.pos.1 - y).powi(2)).sqrt();
                if d <= gate {
                    pairs.push((d, ti, ei));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut track_used = vec![false; active.len()];
        let mut est_used = vec![false; estimates.len()];
        for (_, ti, ei) in pairs {
            if track_used[ti] || est_used[ei] {
                continue;
            }
            track_used[ti] = true;
            est_used[ei] = true;
            active[ti].pos = estimates[ei];
            active[ti].last_step = step;
            out.push(TrackPoint {
                track_id: active[ti].id,
                step,
                x: estimates[ei].0,
                y: estimates[ei].1,
            });
        }
        for (ei, &(x, y)) in estimates.iter().enumerate() {
            if est_used[ei] {
                continue;
            }
            active.push(Active { id: next_id, pos: (x, y), last_step: step });
            out.push(TrackPoint { track_id: next_id, step, x, y });
            next_id += 1;
        }
        // Tracks that missed a step are retired.
        active.retain(|t| t.last_step == step);
    }
    out
}

pub fn tracks_csv(points: &[TrackPoint]) -> String {
    let mut out = String::from("track_id,step,x,y\n");
    for p in points {
        out.push_str(&format!("{},{},{},{}\n", p.track_id, p.step, p.x, p.y));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn links_straight_tracks() {
        let steps: Vec<Vec<(f64, f64)>> = (0..5)
            .map(|k| vec![(k as f64, 0.0), (100.0 - k as f64, 50.0)])
            .collect();
        let points = link_tracks(&steps, 10.0);
        assert_eq!(points.len(), 10);
        let ids: std::collections::BTreeSet<usize> = points.iter().map(|p| p.track_id).collect();
        assert_eq!(ids.len(), 2);
        // Each track advances one step at a time.
        for id in ids {
            let steps: Vec<usize> =
                points.iter().filter(|p| p.track_id == id).map(|p| p.step).collect();
            assert_eq!(steps, vec![1, 2, 3, 4, 5]);
        }
    }

    #[test]
    fn far_estimate_starts_new_track() {
        let steps = vec![vec![(0.0, 0.0)], vec![(500.0, 500.0)]];
        let points = link_tracks(&steps, 10.0);
        assert_eq!(points.len(), 2);
        assert_ne!(points[0].track_id, points[1].track_id);
    }

    #[test]
    fn gap_retires_track() {
        let steps = vec![vec![(0.0, 0.0)], vec![], vec![(0.0, 0.0)]];
        let points = link_tracks(&steps, 10.0);
        assert_eq!(points.len(), 2);
        assert_ne!(points[0].track_id, points[1].track_id);
    }
}
