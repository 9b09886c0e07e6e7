//! Seeded randomized checks of stability and monotonicity axioms.
//!
//! Every trial draws from its own ChaCha stream `(seed, trial)`, so the
//! outcome of a check is independent of how trials are scheduled across
//! threads. Witnesses are rebuilt from the trial index and replay exactly.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{ContinuousCdf, DiscreteDist};
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::measures::RiskMeasure;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub max_atoms: usize,
    pub support_range: (f64, f64),
    /// Atoms are rounded to `lo + k · snap` when set.
    #[serde(default)]
    pub grid_snap: Option<f64>,
    /// When set to `q`, CDF levels are multiples of `1/q`.
    #[serde(default)]
    pub mass_quantum: Option<u32>,
    pub trials: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 0,
            max_atoms: 5,
            support_range: (-10.0, 10.0),
            grid_snap: None,
            mass_quantum: None,
            trials: 1000,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.support_range;
        if self.max_atoms == 0 {
            return Err(Error::InvalidArgument("max_atoms must be at least 1".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidArgument(format!("bad support range [{lo}, {hi}]")));
        }
        if let Some(s) = self.grid_snap {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidArgument(format!("grid_snap must be positive, got {s}")));
            }
        }
        if let Some(q) = self.mass_quantum {
            if q == 0 {
                return Err(Error::InvalidArgument("mass_quantum must be positive".into()));
            }
        }
        Ok(())
    }

    /// The generator for trial `i`.
    pub fn rng_for_trial(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }

    /// First draw of trial 0.
    pub fn sample(&self) -> DiscreteDist {
        self.sample_with(&mut self.rng_for_trial(0))
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> DiscreteDist {
        let (lo, hi) = self.support_range;
        let n = rng.gen_range(1..=self.max_atoms.max(1));
        let mut xs: Vec<f64> = (0..n).map(|_| self.snap(rng.gen_range(lo..=hi))).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        let levels = self.sample_levels(rng, xs.len());
        DiscreteDist::from_levels(&xs, &levels).expect("sampler produces valid levels")
    }

    fn snap(&self, x: f64) -> f64 {
        let (lo, hi) = self.support_range;
        let Some(s) = self.grid_snap else { return x };
        let span = hi - lo;
        let cells = (span / s).round();
        let k = ((x - lo) / s).round();
        if cells > 0.0 && (cells * s - span).abs() <= 1e-9 * span.abs().max(1.0) {
            // same arithmetic as `engine::linspace`, so atoms hit grid nodes exactly
            let k = k.min(cells);
            (lo * (cells - k) + hi * k) / cells
        } else {
            (lo + k * s).min(hi)
        }
    }

    fn sample_levels<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        match self.mass_quantum {
            Some(q) if (q as usize) >= n => {
                let q = q as usize;
                let mut cuts = rand::seq::index::sample(rng, q - 1, n - 1).into_vec();
                cuts.iter_mut().for_each(|c| *c += 1);
                cuts.sort_unstable();
                cuts.push(q);
                cuts.into_iter().map(|c| c as f64 / q as f64).collect()
            }
            _ => {
                let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
                let total: f64 = w.iter().sum();
                let mut acc = 0.0;
                let mut out: Vec<f64> = w
                    .iter()
                    .map(|v| {
                        acc += v;
                        acc / total
                    })
                    .collect();
                *out.last_mut().unwrap() = 1.0;
                out
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axiom {
    /// `ρ(F ∨ G) = ρ(F) ∨ ρ(G)`.
    MaxS,
    /// `ρ(F ∧ G) = ρ(F) ∧ ρ(G)`.
    MinS,
    /// `x < y ⇒ ρ(δ_x) < ρ(δ_y)`.
    Nd,
    /// `F ⪯ G ⇒ ρ(F) ≤ ρ(G)`.
    Fsd,
    /// Lower semicontinuity along the discretization sequence.
    Ls,
}

impl Axiom {
    pub fn id(self) -> &'static str {
        match self {
            Axiom::MaxS => "maxs",
            Axiom::MinS => "mins",
            Axiom::Nd => "nd",
            Axiom::Fsd => "fsd",
            Axiom::Ls => "ls",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Axiom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "maxs" => Ok(Axiom::MaxS),
            "mins" => Ok(Axiom::MinS),
            "nd" => Ok(Axiom::Nd),
            "fsd" => Ok(Axiom::Fsd),
            "ls" => Ok(Axiom::Ls),
            other => Err(Error::InvalidArgument(format!("unknown axiom {other:?} (maxs|mins|nd|fsd|ls)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Witness {
    /// `lhs` and `rhs` are the two sides of the checked relation.
    Pair { f: DiscreteDist, g: DiscreteDist, lhs: ExtReal, rhs: ExtReal, gap: ExtReal },
    Points { x: f64, y: f64, rho_x: ExtReal, rho_y: ExtReal, gap: ExtReal },
    Sequence { ns: Vec<usize>, values: Vec<ExtReal>, reference: ExtReal, gap: ExtReal },
}

impl Witness {
    pub fn gap(&self) -> ExtReal {
        match self {
            Witness::Pair { gap, .. } | Witness::Points { gap, .. } | Witness::Sequence { gap, .. } => *gap,
        }
    }

    /// Re-evaluates the witness under `ρ` and returns the recomputed gap.
    pub fn replay<R: RiskMeasure + ?Sized>(&self, rho: &R, axiom: Axiom) -> ExtReal {
        match (self, axiom) {
            (Witness::Pair { f, g, .. }, Axiom::MaxS) => max_stability_gap(rho, f, g).2,
            (Witness::Pair { f, g, .. }, Axiom::MinS) => min_stability_gap(rho, f, g).2,
            (Witness::Pair { f, g, .. }, _) => excess(rho.evaluate(f), rho.evaluate(g)),
            (Witness::Points { x, y, .. }, _) => nd_gap(point(rho, *x), point(rho, *y)),
            (Witness::Sequence { gap, .. }, _) => *gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub axiom: Axiom,
    pub seed: Option<u64>,
    pub trials: usize,
    pub violations: usize,
    pub worst_gap: ExtReal,
    pub tol: f64,
    pub witness: Option<Witness>,
    pub verdict: Verdict,
    /// Semicontinuity probe only: reference minus the last sequence value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_gap: Option<ExtReal>,
}

impl StabilityReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    fn new(axiom: Axiom, seed: Option<u64>, trials: usize, violations: usize, worst_gap: ExtReal, tol: f64, witness: Option<Witness>) -> Self {
        let verdict = if violations == 0 { Verdict::Pass } else { Verdict::Fail };
        StabilityReport { axiom, seed, trials, violations, worst_gap, tol, witness, verdict, tail_gap: None }
    }
}

/// How far `a` exceeds `b`; zero when `a ≤ b`.
fn excess(a: ExtReal, b: ExtReal) -> ExtReal {
    if a <= b {
        ExtReal::Finite(0.0)
    } else {
        a.gap(b)
    }
}

fn point<R: RiskMeasure + ?Sized>(rho: &R, x: f64) -> ExtReal {
    rho.evaluate(&DiscreteDist::point_mass(x).expect("finite grid point"))
}

/// `(ρ(F ∨ G), ρ(F) ∨ ρ(G), gap)`.
pub fn max_stability_gap<R: RiskMeasure + ?Sized>(rho: &R, f: &DiscreteDist, g: &DiscreteDist) -> (ExtReal, ExtReal, ExtReal) {
    let lhs = rho.evaluate(&f.join(g));
    let rhs = rho.evaluate(f).max(rho.evaluate(g));
    (lhs, rhs, lhs.gap(rhs))
}

/// `(ρ(F ∧ G), ρ(F) ∧ ρ(G), gap)`.
pub fn min_stability_gap<R: RiskMeasure + ?Sized>(rho: &R, f: &DiscreteDist, g: &DiscreteDist) -> (ExtReal, ExtReal, ExtReal) {
    let lhs = rho.evaluate(&f.meet(g));
    let rhs = rho.evaluate(f).min(rho.evaluate(g));
    (lhs, rhs, lhs.gap(rhs))
}

/// Shortfall of `ρ(δ_y) − ρ(δ_x)` from being positive.
fn nd_gap(a: ExtReal, b: ExtReal) -> ExtReal {
    if b > a {
        ExtReal::Finite(0.0)
    } else {
        excess(a, b)
    }
}

fn nd_ok(a: ExtReal, b: ExtReal, tol: f64) -> bool {
    match (a, b) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => b - a > tol,
        _ => b > a,
    }
}

fn pair_stability<R: RiskMeasure + ?Sized>(rho: &R, cfg: &SamplerConfig, tol: f64, axiom: Axiom) -> StabilityReport {
    let gap_of = |f: &DiscreteDist, g: &DiscreteDist| match axiom {
        Axiom::MaxS => max_stability_gap(rho, f, g),
        _ => min_stability_gap(rho, f, g),
    };
    let draw = |i: usize| {
        let mut rng = cfg.rng_for_trial(i);
        let f = cfg.sample_with(&mut rng);
        let g = cfg.sample_with(&mut rng);
        (f, g)
    };
    let gaps: Vec<ExtReal> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let (f, g) = draw(i);
            gap_of(&f, &g).2
        })
        .collect();
    summarize(axiom, Some(cfg.seed), &gaps, tol, |i| {
        let (f, g) = draw(i);
        let (lhs, rhs, gap) = gap_of(&f, &g);
        Witness::Pair { f, g, lhs, rhs, gap }
    })
}

fn summarize(axiom: Axiom, seed: Option<u64>, gaps: &[ExtReal], tol: f64, witness: impl Fn(usize) -> Witness) -> StabilityReport {
    let limit = ExtReal::Finite(tol);
    let violations = gaps.iter().filter(|&&g| g > limit).count();
    let mut worst = ExtReal::Finite(0.0);
    let mut worst_at = None;
    for (i, &g) in gaps.iter().enumerate() {
        if g > worst {
            worst = g;
            worst_at = Some(i);
        }
    }
    let witness = worst_at.filter(|_| violations > 0).map(witness);
    StabilityReport::new(axiom, seed, gaps.len(), violations, worst, tol, witness)
}

pub fn check_max_stability<R: RiskMeasure + ?Sized>(rho: &R, cfg: &SamplerConfig, tol: f64) -> StabilityReport {
    pair_stability(rho, cfg, tol, Axiom::MaxS)
}

pub fn check_min_stability<R: RiskMeasure + ?Sized>(rho: &R, cfg: &SamplerConfig, tol: f64) -> StabilityReport {
    pair_stability(rho, cfg, tol, Axiom::MinS)
}

/// Checks that `ρ(δ_x)` increases by more than `tol` between neighbouring
/// grid points.
pub fn check_nondegeneracy<R: RiskMeasure + ?Sized>(rho: &R, grid: &[f64], tol: f64) -> Result<StabilityReport> {
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidGrid("non-degeneracy grid must be finite and strictly increasing".into()));
    }
    let values: Vec<ExtReal> = grid.par_iter().map(|&x| point(rho, x)).collect();
    let mut gaps = Vec::with_capacity(values.len().saturating_sub(1));
    let mut violations = 0;
    let mut witness = None;
    let mut worst = ExtReal::Finite(0.0);
    for i in 1..values.len() {
        let gap = nd_gap(values[i - 1], values[i]);
        gaps.push(gap);
        if !nd_ok(values[i - 1], values[i], tol) {
            violations += 1;
            if witness.is_none() || gap > worst {
                worst = worst.max(gap);
                witness = Some(Witness::Points { x: grid[i - 1], y: grid[i], rho_x: values[i - 1], rho_y: values[i], gap });
            }
        }
    }
    Ok(StabilityReport::new(Axiom::Nd, None, gaps.len(), violations, worst, tol, witness))
}

/// Draws `F` and a dominating `G`: atoms pushed right by order-preserving
/// cumulative shifts, and a random share of each atom's mass moved to the
/// next atom up.
pub fn sample_comparable_pair<R: Rng + ?Sized>(cfg: &SamplerConfig, rng: &mut R) -> (DiscreteDist, DiscreteDist) {
    let f = cfg.sample_with(rng);
    let (lo, hi) = cfg.support_range;
    let scale = (hi - lo).max(1.0) / (2.0 * cfg.max_atoms.max(1) as f64);
    let step = |rng: &mut R| -> f64 {
        let d = rng.gen_range(0.0..scale);
        match cfg.grid_snap {
            Some(s) => (d / s).round() * s,
            None => d,
        }
    };
    let mut shifted = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    for &x in f.support() {
        if rng.gen_bool(0.5) {
            acc += step(rng);
        }
        let mut y = x + acc;
        if let Some(&prev) = shifted.last() {
            if y <= prev {
                // rounding collapsed two shifted atoms
                y = prev + prev.abs().max(1.0) * f64::EPSILON;
            }
        }
        shifted.push(y);
    }
    let n = f.len();
    let mut levels = Vec::with_capacity(n);
    for i in 0..n {
        if i + 1 == n {
            levels.push(1.0);
        } else {
            let s: f64 = if rng.gen_bool(0.5) { rng.gen_range(0.0..=1.0) } else { 0.0 };
            levels.push(f.levels()[i] - s * f.mass(i));
        }
    }
    // shifts are non-negative and cumulative, so order is kept; a level may
    // dip below its predecessor only through rounding
    for i in 1..n {
        if levels[i] < levels[i - 1] {
            levels[i] = levels[i - 1];
        }
    }
    let g = DiscreteDist::from_levels(&shifted, &levels).expect("comparable pair is valid");
    (f, g)
}

/// Checks `ρ(F) ≤ ρ(G) + tol` on sampled pairs with `F ⪯ G`.
pub fn check_fsd_consistency<R: RiskMeasure + ?Sized>(rho: &R, cfg: &SamplerConfig, tol: f64) -> StabilityReport {
    let draw = |i: usize| sample_comparable_pair(cfg, &mut cfg.rng_for_trial(i));
    let gaps: Vec<ExtReal> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let (f, g) = draw(i);
            excess(rho.evaluate(&f), rho.evaluate(&g))
        })
        .collect();
    summarize(Axiom::Fsd, Some(cfg.seed), &gaps, tol, |i| {
        let (f, g) = draw(i);
        let (lhs, rhs) = (rho.evaluate(&f), rho.evaluate(&g));
        Witness::Pair { gap: excess(lhs, rhs), f, g, lhs, rhs }
    })
}

/// Evaluates `ρ(F_n)` for the discretizations `n = 1..=n_max` and checks
/// that no value exceeds the reference (by default `ρ(F_{4 n_max})`) and
/// that the deficit does not grow along `n → 2n`.
pub fn check_semicontinuity_probe<R: RiskMeasure + ?Sized>(
    rho: &R,
    cdf: &ContinuousCdf,
    n_max: usize,
    tol: f64,
    reference: Option<ExtReal>,
) -> Result<StabilityReport> {
    if n_max < 2 {
        return Err(Error::InvalidArgument(format!("n_max must be at least 2, got {n_max}")));
    }
    let reference = match reference {
        Some(r) => r,
        None => rho.evaluate(&cdf.discretize(4 * n_max)?),
    };
    let ns: Vec<usize> = (1..=n_max).collect();
    let values: Vec<ExtReal> = ns
        .par_iter()
        .map(|&n| cdf.discretize(n).map(|d| rho.evaluate(&d)))
        .collect::<Result<_>>()?;
    let limit = ExtReal::Finite(tol);
    let deficit = |v: ExtReal| excess(reference, v);
    let mut violations = 0;
    let mut worst = ExtReal::Finite(0.0);
    for (i, &v) in values.iter().enumerate() {
        let over = excess(v, reference);
        if over > limit {
            violations += 1;
        }
        worst = worst.max(over);
        let n = i + 1;
        if 2 * n <= n_max {
            let grow = excess(deficit(values[2 * n - 1]), deficit(v));
            if grow > limit {
                violations += 1;
            }
            worst = worst.max(grow);
        }
    }
    let tail = deficit(*values.last().unwrap());
    let witness = (violations > 0).then(|| Witness::Sequence { ns: ns.clone(), values: values.clone(), reference, gap: worst });
    let mut report = StabilityReport::new(Axiom::Ls, None, n_max, violations, worst, tol, witness);
    report.tail_gap = Some(tail);
    Ok(report)
}

/// First sampled pair violating max- or min-stability, if any.
pub fn find_stability_counterexample<R: RiskMeasure + ?Sized>(
    rho: &R,
    axiom: Axiom,
    cfg: &SamplerConfig,
    tol: f64,
) -> Result<Option<Witness>> {
    let gap_of = |f: &DiscreteDist, g: &DiscreteDist| match axiom {
        Axiom::MaxS => Ok(max_stability_gap(rho, f, g)),
        Axiom::MinS => Ok(min_stability_gap(rho, f, g)),
        other => Err(Error::InvalidArgument(format!("counterexample search covers maxs and mins, not {other}"))),
    };
    gap_of(&DiscreteDist::point_mass(0.0)?, &DiscreteDist::point_mass(0.0)?)?;
    let limit = ExtReal::Finite(tol);
    let hit = (0..cfg.trials).into_par_iter().find_first(|&i| {
        let mut rng = cfg.rng_for_trial(i);
        let f = cfg.sample_with(&mut rng);
        let g = cfg.sample_with(&mut rng);
        gap_of(&f, &g).map(|t| t.2 > limit).unwrap_or(false)
    });
    Ok(hit.map(|i| {
        let mut rng = cfg.rng_for_trial(i);
        let f = cfg.sample_with(&mut rng);
        let g = cfg.sample_with(&mut rng);
        let (lhs, rhs, gap) = gap_of(&f, &g).expect("axiom checked above");
        Witness::Pair { f, g, lhs, rhs, gap }
    }))
}

/// Runs the check for `axiom` with the inputs each one needs.
pub struct SuiteInputs<'a> {
    pub cfg: &'a SamplerConfig,
    pub nd_grid: &'a [f64],
    pub ls_cdf: &'a ContinuousCdf,
    pub ls_n_max: usize,
    pub tol: f64,
}

pub fn run_axiom<R: RiskMeasure + ?Sized>(rho: &R, axiom: Axiom, inputs: &SuiteInputs<'_>) -> Result<StabilityReport> {
    inputs.cfg.validate()?;
    match axiom {
        Axiom::MaxS => Ok(check_max_stability(rho, inputs.cfg, inputs.tol)),
        Axiom::MinS => Ok(check_min_stability(rho, inputs.cfg, inputs.tol)),
        Axiom::Fsd => Ok(check_fsd_consistency(rho, inputs.cfg, inputs.tol)),
        Axiom::Nd => check_nondegeneracy(rho, inputs.nd_grid, inputs.tol),
        Axiom::Ls => check_semicontinuity_probe(rho, inputs.ls_cdf, inputs.ls_n_max, inputs.tol, None),
    }
}
