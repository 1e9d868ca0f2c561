#![allow(dead_code)]

use posim::credal::DiscreteCredalInstance;
use rand::Rng;

/// `P(A) <= max_{ω∈A} π(ω)` for every subset, by enumeration.
pub fn brute_force_member(probs: &[f64], contour: &[f64]) -> bool {
    let n = probs.len();
    (1u32..(1 << n)).all(|mask| {
        let (mut p, mut pi) = (0.0, 0.0f64);
        for k in 0..n {
            if mask & (1 << k) != 0 {
                p += probs[k];
                pi = pi.max(contour[k]);
            }
        }
        p <= pi + 1e-12
    })
}

/// A random finite instance; about half are members by construction
/// (mass of each level band placed on one atom of the corresponding cut).
pub fn random_credal_instance<R: Rng>(rng: &mut R, max_n: usize) -> DiscreteCredalInstance {
    let n = rng.random_range(1..=max_n);
    let mut contour: Vec<f64> = (0..n).map(|_| rng.random_range(0..=10) as f64 / 10.0).collect();
    let top = rng.random_range(0..n);
    contour[top] = 1.0;
    let probs = if rng.random_bool(0.5) {
        let mut levels: Vec<f64> = contour.clone();
        levels.push(0.0);
        levels.sort_by(|a, b| b.total_cmp(a));
        levels.dedup();
        let mut p = vec![0.0; n];
        for w in levels.windows(2) {
            let cut: Vec<usize> = (0..n).filter(|&k| contour[k] >= w[0]).collect();
            p[cut[rng.random_range(0..cut.len())]] += w[0] - w[1];
        }
        p
    } else {
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0..=20) as f64).collect();
        let total: f64 = w.iter().sum();
        if total == 0.0 {
            let mut p = vec![0.0; n];
            p[top] = 1.0;
            p
        } else {
            w.iter().map(|x| x / total).collect()
        }
    };
    let atoms = (0..n).map(|k| format!("w{k}")).collect();
    DiscreteCredalInstance::new(atoms, probs, contour).expect("valid instance")
}
