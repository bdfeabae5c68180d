//! K-means (k-means++ seeding, Lloyd iterations) and class balancing by
//! centroid resampling.

use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-4;

/// Rows per block when computing point-to-centroid distances.
const BLOCK: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub centroids: Array2<f64>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    pub iterations_run: usize,
    /// Inertia after seeding followed by one entry per Lloyd iteration.
    pub inertia_history: Vec<f64>,
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Picks an index with probability proportional to `weights`.
fn weighted_pick(rng: &mut ChaCha8Rng, weights: &[f64], total: f64) -> Option<usize> {
    if !(total > 0.0) {
        return None;
    }
    let mut r = rng.gen::<f64>() * total;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last = Some(i);
            if r < w {
                return Some(i);
            }
            r -= w;
        }
    }
    last
}

fn kmeans_pp(points: &Array2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = points.nrows();
    let mut chosen = vec![false; n];
    let first = rng.gen_range(0..n);
    let mut idx = vec![first];
    chosen[first] = true;
    let mut d2: Vec<f64> = (0..n)
        .map(|i| sq_dist(points.row(i), points.row(first)))
        .collect();
    while idx.len() < k {
        let total: f64 = d2.iter().sum();
        let next = weighted_pick(rng, &d2, total).unwrap_or_else(|| {
            // every remaining point coincides with a centre
            (0..n).find(|&i| !chosen[i]).expect("k <= n")
        });
        chosen[next] = true;
        idx.push(next);
        let c = points.row(next);
        for (i, d) in d2.iter_mut().enumerate() {
            if *d > 0.0 {
                let nd = sq_dist(points.row(i), c);
                if nd < *d {
                    *d = nd;
                }
            }
        }
    }
    points.select(Axis(0), &idx)
}

/// Nearest centroid of every point using `|x|² + |c|² - 2x·c`, in row blocks.
fn nearest(points: &Array2<f64>, centroids: &Array2<f64>) -> Vec<usize> {
    let n = points.nrows();
    let c_norm: Array1<f64> = centroids.rows().into_iter().map(|r| r.dot(&r)).collect();
    let ct = centroids.t();
    let mut out = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let end = (start + BLOCK).min(n);
        let block = points.slice(s![start..end, ..]);
        let cross = block.dot(&ct);
        for row in cross.rows() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, (&x, &cn)) in row.iter().zip(c_norm.iter()).enumerate() {
                let d = cn - 2.0 * x;
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            out.push(best);
        }
        start = end;
    }
    out
}

fn inertia_of(points: &Array2<f64>, centroids: &Array2<f64>, assign: &[usize]) -> f64 {
    assign
        .iter()
        .enumerate()
        .map(|(i, &c)| sq_dist(points.row(i), centroids.row(c)))
        .sum()
}

fn update_means(points: &Array2<f64>, assign: &[usize], k: usize) -> (Array2<f64>, Vec<usize>) {
    let d = points.ncols();
    let mut sums = Array2::<f64>::zeros((k, d));
    let mut counts = vec![0usize; k];
    for (i, &c) in assign.iter().enumerate() {
        let mut row = sums.row_mut(c);
        row += &points.row(i);
        counts[c] += 1;
    }
    for (c, &cnt) in counts.iter().enumerate() {
        if cnt > 0 {
            sums.row_mut(c).mapv_inplace(|v| v / cnt as f64);
        }
    }
    (sums, counts)
}

/// Moves the farthest points of multi-member clusters into empty clusters.
fn reseed_empty(
    points: &Array2<f64>,
    centroids: &mut Array2<f64>,
    assign: &mut [usize],
    counts: &mut [usize],
) {
    let empty: Vec<usize> = (0..counts.len()).filter(|&c| counts[c] == 0).collect();
    if empty.is_empty() {
        return;
    }
    let mut dist: Vec<(f64, usize)> = assign
        .iter()
        .enumerate()
        .map(|(i, &c)| (sq_dist(points.row(i), centroids.row(c)), i))
        .collect();
    // farthest first, lowest index on ties
    dist.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut cursor = dist.into_iter();
    for c in empty {
        for (_, i) in cursor.by_ref() {
            let old = assign[i];
            if counts[old] > 1 {
                counts[old] -= 1;
                counts[c] = 1;
                assign[i] = c;
                centroids.row_mut(c).assign(&points.row(i));
                break;
            }
        }
    }
}

pub fn kmeans_fit(
    points: &Array2<f64>,
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<KMeansResult> {
    let n = points.nrows();
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::InvalidInput(format!("k = {k} exceeds {n} points")));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite point coordinates".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_pp(points, k, &mut rng);

    // initial assignment by exact distance so the guard below starts consistent
    let mut assign = nearest(points, &centroids);
    let mut inertia = inertia_of(points, &centroids, &assign);
    let mut history = vec![inertia];
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let (mut next, mut counts) = update_means(points, &assign, k);
        reseed_empty(points, &mut next, &mut assign, &mut counts);
        // means of the possibly reseeded assignment
        let (means, _) = update_means(points, &assign, k);
        next = means;
        let candidate = nearest(points, &next);
        // accept a move only when it is a genuine improvement in exact arithmetic
        let mut moved = 0usize;
        let mut counts_after = counts.clone();
        for (i, &c) in candidate.iter().enumerate() {
            let cur = assign[i];
            if c != cur && counts_after[cur] > 1 {
                let dc = sq_dist(points.row(i), next.row(c));
                let dk = sq_dist(points.row(i), next.row(cur));
                if dc < dk {
                    counts_after[cur] -= 1;
                    counts_after[c] += 1;
                    assign[i] = c;
                    moved += 1;
                }
            }
        }
        let new_inertia = inertia_of(points, &next, &assign);
        centroids = next;
        history.push(new_inertia);
        let change = if inertia > 0.0 {
            (inertia - new_inertia) / inertia
        } else {
            0.0
        };
        inertia = new_inertia;
        if moved == 0 || change < tol {
            break;
        }
    }
    // final centroids are the means of the final assignment
    let (final_c, counts) = update_means(points, &assign, k);
    debug_assert!(counts.iter().all(|&c| c > 0));
    let final_inertia = inertia_of(points, &final_c, &assign);
    if final_inertia <= inertia {
        centroids = final_c;
        inertia = final_inertia;
    }
    Ok(KMeansResult {
        centroids,
        assignments: assign,
        inertia,
        iterations_run: iterations,
        inertia_history: history,
    })
}

/// Replaces every class larger than `target` by `target` k-means centroids.
/// Smaller classes pass through unchanged. Class `i` is clustered with seed `seed + i`.
pub fn balance_classes(
    classes: &[Array2<f64>],
    target: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<Vec<Array2<f64>>> {
    if target == 0 {
        return Err(Error::InvalidInput("target count must be positive".into()));
    }
    classes
        .iter()
        .enumerate()
        .map(|(i, x)| {
            if x.nrows() == 0 {
                Err(Error::InsufficientData(format!("class {i} is empty")))
            } else if x.nrows() <= target {
                Ok(x.clone())
            } else {
                Ok(kmeans_fit(x, target, seed.wrapping_add(i as u64), max_iter, tol)?.centroids)
            }
        })
        .collect()
}
