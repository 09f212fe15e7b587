//! OSPA (optimal sub-pattern assignment) error between estimated and true
//! target sets.

use nalgebra::{DMatrix, Vector2};

/// OSPA parameters: cutoff `c` bounds per-target localization error and
/// prices each cardinality mismatch; `p` is the metric order.
#[derive(Debug, Clone, Copy)]
pub struct OspaParams {
    pub cutoff: f64,
    pub power: f64,
}

impl OspaParams {
    pub fn new(cutoff: f64, power: f64) -> Self {
        assert!(cutoff > 0.0 && power >= 1.0);
        Self { cutoff, power }
    }
}

/// Minimum-cost assignment of rows to distinct columns of a cost matrix
/// with `nrows <= ncols`, via the shortest-augmenting-path method with
/// potentials (O(n^2 m)). Ties resolve deterministically by column order.
///
/// Returns `row_to_col` and the total cost.
pub fn min_cost_assignment(cost: &DMatrix<f64>) -> (Vec<usize>, f64) {
    let n = cost.nrows();
    let m = cost.ncols();
    assert!(n <= m, "assignment expects nrows <= ncols");
    if n == 0 {
        return (Vec::new(), 0.0);
    }

    // 1-indexed potentials; p[j] is the row matched to column j.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![usize::MAX; n];
    for j in 1..=m {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    let total = row_to_col
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[(i, j)])
        .sum();
    (row_to_col, total)
}

/// OSPA distance between two sets of planar positions. Distances are
/// Euclidean, cut off at `c`; the optimal pairing of the smaller set into
/// the larger is charged, each unmatched element of the larger set costs
/// `c`, and the total is normalized by the larger cardinality. Two empty
/// sets have distance zero.
pub fn ospa(truth: &[Vector2<f64>], estimate: &[Vector2<f64>], params: &OspaParams) -> f64 {
    let c = params.cutoff;
    let p = params.power;
    if truth.is_empty() && estimate.is_empty() {
        return 0.0;
    }
    let (small, large) = if truth.len() <= estimate.len() {
        (truth, estimate)
    } else {
        (estimate, truth)
    };
    let n = small.len();
    let m = large.len();
    if n == 0 {
        return c;
    }

    let cost = DMatrix::from_fn(n, m, |i, j| {
        let d = (small[i] - large[j]).norm().min(c);
        d.powf(p)
    });
    let (_, matched) = min_cost_assignment(&cost);
    ((matched + c.powf(p) * (m - n) as f64) / m as f64).powf(1.0 / p)
}
