#![allow(dead_code)]

use leading_tree::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A 2-D Gaussian mixture with `n` points in `[10, 300]`, a few of them
/// duplicated so that distance and density ties occur.
pub fn random_mixture(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(10..=300);
    let k = rng.random_range(1..=6);
    let centers: Vec<[f64; 2]> = (0..k)
        .map(|_| [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)])
        .collect();
    let spread: f64 = rng.random_range(0.3..2.0);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    while rows.len() < n {
        if rows.len() > 3 && rng.random_bool(0.08) {
            let j = rng.random_range(0..rows.len());
            rows.push(rows[j].clone());
            continue;
        }
        let c = centers[rng.random_range(0..k)];
        let dx: f64 = rng.sample(StandardNormal);
        let dy: f64 = rng.sample(StandardNormal);
        rows.push(vec![c[0] + spread * dx, c[1] + spread * dy]);
    }
    Dataset::new(rows, None).unwrap()
}

pub struct Instance {
    pub dataset: Dataset,
    pub distances: CondensedDistanceMatrix,
    pub profile: PeakProfile,
}

/// Cutoff kernel on even seeds (many density ties), gaussian on odd ones.
pub fn instance(seed: u64) -> Instance {
    let dataset = random_mixture(seed);
    let distances = pairwise_distances(&dataset).unwrap();
    let dc = estimate_dc(&distances, 2.0).unwrap();
    let kernel = if seed.is_multiple_of(2) {
        Kernel::Cutoff
    } else {
        Kernel::Gaussian
    };
    let rho = local_density(&distances, kernel, dc).unwrap();
    let profile = PeakProfile::compute(&distances, rho).unwrap();
    Instance {
        dataset,
        distances,
        profile,
    }
}

/// For each point, scans every strictly denser point (equal density counts
/// as denser when the index is lower) and keeps the nearest; equidistant
/// candidates resolve to the densest, then lowest index.
pub fn brute_delta_nn(d: &CondensedDistanceMatrix, rho: &[f64]) -> (Vec<f64>, Vec<Option<usize>>) {
    let n = rho.len();
    let denser = |j: usize, i: usize| rho[j] > rho[i] || (rho[j] == rho[i] && j < i);
    let mut delta = vec![0.0; n];
    let mut nn = vec![None; n];
    for i in 0..n {
        let mut best: Option<(f64, usize)> = None;
        for j in 0..n {
            if j == i || !denser(j, i) {
                continue;
            }
            let dist = d.get(i, j);
            let better = match best {
                None => true,
                Some((bd, bj)) => {
                    dist < bd || (dist == bd && (rho[j] > rho[bj] || (rho[j] == rho[bj] && j < bj)))
                }
            };
            if better {
                best = Some((dist, j));
            }
        }
        match best {
            Some((dist, j)) => {
                delta[i] = dist;
                nn[i] = Some(j);
            }
            None => delta[i] = (0..n).map(|j| d.get(i, j)).fold(0.0, f64::max),
        }
    }
    (delta, nn)
}

/// Hops from `i` to the first node of `stop` following a raw parent array.
pub fn parent_walk(parents: &[Option<usize>], stop: &[usize], i: usize) -> usize {
    let mut node = i;
    let mut hops = 0;
    while !stop.contains(&node) {
        node = parents[node].unwrap();
        hops += 1;
    }
    hops
}

/// Does `fine` refine `coarse`? Checked over every pair of points.
pub fn refines_by_pairs(coarse: &[usize], fine: &[usize]) -> bool {
    let n = fine.len();
    (0..n).all(|i| (i + 1..n).all(|j| fine[i] != fine[j] || coarse[i] == coarse[j]))
}

/// Prints one result line and panics on failure.
pub fn verdict(criterion: &str, ok: bool, detail: impl AsRef<str>) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] {criterion}: {}", detail.as_ref());
    assert!(ok, "{criterion} failed: {}", detail.as_ref());
}
