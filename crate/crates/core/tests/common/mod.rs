//! Shared fixtures and brute-force reference implementations for the
//! integration tests. The references work on raw atom lists and never call
//! the library's evaluators.

#![allow(dead_code)]

use maxstab::dist::{Atom, DiscreteDist};
use maxstab::harness::SamplerConfig;
use maxstab::step::MonotoneStep;
use rand::Rng;

/// Λ with jumps at −2 and 0.4: 0.9, then 0.6, then 0.3.
pub fn three_step_lambda() -> MonotoneStep {
    MonotoneStep::decreasing(vec![-2.0, 0.4], vec![0.9, 0.6, 0.3]).unwrap()
}

/// Raw right-continuous piecewise-constant Λ used by the references.
pub fn lambda_at(bps: &[f64], vals: &[f64], x: f64) -> f64 {
    let k = bps.iter().filter(|&&t| t <= x).count();
    vals[k]
}

pub fn cfg(seed: u64, max_atoms: usize, trials: usize) -> SamplerConfig {
    SamplerConfig { seed, max_atoms, support_range: (-10.0, 10.0), grid_snap: None, mass_quantum: None, trials }
}

pub fn sample_many(cfg: &SamplerConfig, n: usize) -> Vec<DiscreteDist> {
    (0..n).map(|i| cfg.sample_with(&mut cfg.rng_for_trial(i))).collect()
}

/// `F(z)` by direct summation over atoms.
pub fn cdf_ref(atoms: &[Atom], z: f64) -> f64 {
    if atoms.iter().all(|a| a.x <= z) {
        return 1.0;
    }
    atoms.iter().filter(|a| a.x <= z).map(|a| a.p).sum()
}

fn sorted(atoms: &[Atom]) -> Vec<Atom> {
    let mut a = atoms.to_vec();
    a.sort_by(|l, r| l.x.partial_cmp(&r.x).unwrap());
    a
}

/// Smallest atom whose running mass reaches `alpha` (with slack for
/// summation order).
pub fn var_ref(atoms: &[Atom], alpha: f64) -> f64 {
    let mut acc = 0.0;
    let a = sorted(atoms);
    for at in &a {
        acc += at.p;
        if acc >= alpha - 1e-12 {
            return at.x;
        }
    }
    a.last().unwrap().x
}

/// Quantile integral by midpoint rule on a fine `β` grid.
pub fn es_ref(atoms: &[Atom], alpha: f64, steps: usize) -> f64 {
    let a = sorted(atoms);
    let q = |beta: f64| {
        let mut acc = 0.0;
        for at in &a {
            acc += at.p;
            if acc >= beta {
                return at.x;
            }
        }
        a.last().unwrap().x
    };
    let h = (1.0 - alpha) / steps as f64;
    (0..steps).map(|k| q(alpha + (k as f64 + 0.5) * h)).sum::<f64>() * h / (1.0 - alpha)
}

/// `sup{x : F(x) < Λ(x)}` by testing every candidate right end and a point
/// just left of it. `None` stands for `−∞`.
pub fn lambda_quantile_ref(atoms: &[Atom], bps: &[f64], vals: &[f64]) -> Option<f64> {
    let mut cands: Vec<f64> = atoms.iter().map(|a| a.x).chain(bps.iter().copied()).collect();
    cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best: Option<f64> = None;
    let inside = |x: f64| cdf_ref(atoms, x) < lambda_at(bps, vals, x) - 1e-12;
    if vals[0] > 0.0 && inside(cands[0] - 1.0) {
        best = Some(cands[0] - 1.0);
    }
    for &c in &cands {
        if inside(c - 1e-7) || inside(c) {
            best = Some(best.map_or(c, |b: f64| b.max(c)));
        }
    }
    best
}

/// A random flat decreasing Λ with values in `(0, 1]`.
pub fn random_lambda<R: Rng>(rng: &mut R, snap: bool) -> (Vec<f64>, Vec<f64>) {
    let k = rng.gen_range(0..=4);
    let mut bps: Vec<f64> = (0..k)
        .map(|_| {
            let t: f64 = rng.gen_range(-10.0..10.0);
            if snap {
                t.round()
            } else {
                t
            }
        })
        .collect();
    bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bps.dedup();
    let mut vals: Vec<f64> = (0..=bps.len())
        .map(|_| {
            if snap {
                rng.gen_range(1..=10) as f64 / 10.0
            } else {
                rng.gen_range(0.01..=1.0)
            }
        })
        .collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (bps, vals)
}
