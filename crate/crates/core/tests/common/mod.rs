#![allow(dead_code)]

use hdap::cluster::{DbscanLabels, Label};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Brute-force DBSCAN from the neighbourhood graph: union-find over
/// core-core edges, borders go to their lowest-index core neighbour.
/// Returns `None` for noise and the component's lowest core index otherwise.
pub fn dbscan_oracle(points: &[Vec<f64>], eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let n = points.len();
    let adjacent = |i: usize, j: usize| distance(&points[i], &points[j]) <= eps;
    let core: Vec<bool> = (0..n)
        .map(|i| (0..n).filter(|&j| adjacent(i, j)).count() >= min_pts)
        .collect();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if core[i] && core[j] && adjacent(i, j) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut lowest = vec![usize::MAX; n];
    for i in (0..n).filter(|&i| core[i]) {
        let root = find(&mut parent, i);
        lowest[root] = lowest[root].min(i);
    }
    (0..n)
        .map(|i| {
            let anchor = if core[i] {
                Some(i)
            } else {
                (0..n).find(|&j| core[j] && adjacent(i, j))
            };
            anchor.map(|c| {
                let root = find(&mut parent, c);
                lowest[root]
            })
        })
        .collect()
}

/// Relabels by order of first appearance; noise stays `None`.
pub fn canonical(labels: &[Option<usize>]) -> Vec<Option<usize>> {
    let mut seen: Vec<usize> = Vec::new();
    labels
        .iter()
        .map(|l| {
            l.map(|c| match seen.iter().position(|&s| s == c) {
                Some(p) => p,
                None => {
                    seen.push(c);
                    seen.len() - 1
                }
            })
        })
        .collect()
}

pub fn implementation_labels(raw: &DbscanLabels) -> Vec<Option<usize>> {
    raw.labels
        .iter()
        .map(|l| match l {
            Label::Cluster(c) => Some(*c),
            Label::Noise => None,
        })
        .collect()
}

/// A random clustering instance: integer grids (exercising the inclusive
/// radius) on even seeds, Gaussian blobs on odd seeds.
pub fn random_instance(seed: u64) -> (Vec<Vec<f64>>, f64, usize) {
    let mut r = rng(seed);
    let n = r.random_range(1..=64);
    let dim = r.random_range(1..=3);
    let min_pts = r.random_range(1..=6);
    if seed.is_multiple_of(2) {
        let side = r.random_range(3..=12);
        let pts = (0..n)
            .map(|_| (0..dim).map(|_| r.random_range(0..side) as f64).collect())
            .collect();
        (pts, r.random_range(1..=3) as f64, min_pts)
    } else {
        let blobs = r.random_range(1..=4);
        let centers: Vec<Vec<f64>> = (0..blobs)
            .map(|_| (0..dim).map(|_| r.random_range(0.0..10.0)).collect())
            .collect();
        let spread = Normal::new(0.0, r.random_range(0.1..1.0)).unwrap();
        let pts = (0..n)
            .map(|i| {
                let c = &centers[i % blobs];
                c.iter().map(|v| v + spread.sample(&mut r)).collect()
            })
            .collect();
        (pts, r.random_range(0.1..1.5), min_pts)
    }
}
