//! Reconstruction of a sup-kernel from a max-stable functional.
//!
//! Given `ρ`, the engine evaluates it on two-point laws
//! `f(x, y, p) = ρ(p δ_x + (1 − p) δ_y)`, locates the thresholds
//! `h(x, p) = inf{y ≥ x : f(x, y, p) > ρ(δ_x)}`, and tabulates
//! `ψ(y, p) = max_x f(x, y, p) · 1{y > h(x, p)}` over a finite grid.
//!
//! A [`PsiGrid`] doubles as a kernel: node `x_j` stands for the cell
//! `(x_{j−1}, x_j]` (the first node for a cell of the same width as its right
//! neighbour), and a probability is looked up at the largest grid level not
//! above it. With these conventions the grid evaluator is exact on
//! distributions whose atoms sit on the grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::measures::RiskMeasure;

/// Slack used when snapping a probability onto the p-grid and an atom onto
/// the x-grid.
pub const GRID_SNAP: f64 = 1e-9;

/// `n + 1` evenly spaced points from `lo` to `hi`, each computed with a
/// single rounding so that round values land exactly.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![lo];
    }
    let nf = n as f64;
    (0..=n).map(|i| (lo * (nf - i as f64) + hi * i as f64) / nf).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiGrid {
    x_grid: Vec<f64>,
    p_grid: Vec<f64>,
    /// `table[i][j] = ψ(x_i, p_j)`.
    table: Vec<Vec<ExtReal>>,
    y_max: f64,
    tol: f64,
}

#[derive(Deserialize)]
struct PsiGridRaw {
    x_grid: Vec<f64>,
    p_grid: Vec<f64>,
    table: Vec<Vec<ExtReal>>,
    #[serde(default)]
    y_max: Option<f64>,
    #[serde(default)]
    tol: Option<f64>,
}

impl<'de> Deserialize<'de> for PsiGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PsiGridRaw::deserialize(d)?;
        let y_max = raw.y_max.unwrap_or_else(|| raw.x_grid.last().copied().unwrap_or(0.0));
        PsiGrid::from_table(raw.x_grid, raw.p_grid, raw.table, y_max, raw.tol.unwrap_or(1e-9))
            .map_err(serde::de::Error::custom)
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.iter().all(|t| t.is_finite()) && v.windows(2).all(|w| w[0] < w[1])
}

fn check_grids(x_grid: &[f64], p_grid: &[f64]) -> Result<()> {
    if x_grid.is_empty() || !strictly_increasing(x_grid) {
        return Err(Error::InvalidGrid("x-grid must be non-empty, finite and strictly increasing".into()));
    }
    if p_grid.len() < 2 || !strictly_increasing(p_grid) || p_grid[0] != 0.0 || *p_grid.last().unwrap() != 1.0 {
        return Err(Error::InvalidGrid("p-grid must be strictly increasing from 0 to 1 inclusive".into()));
    }
    Ok(())
}

impl PsiGrid {
    /// Wraps a precomputed table after structural checks: grid ordering,
    /// dimensions, rows decreasing in `p`, last column `−∞`.
    pub fn from_table(
        x_grid: Vec<f64>,
        p_grid: Vec<f64>,
        table: Vec<Vec<ExtReal>>,
        y_max: f64,
        tol: f64,
    ) -> Result<Self> {
        let g = PsiGrid { x_grid, p_grid, table, y_max, tol };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        check_grids(&self.x_grid, &self.p_grid)?;
        if self.table.len() != self.x_grid.len() || self.table.iter().any(|r| r.len() != self.p_grid.len()) {
            return Err(Error::InvalidGrid(format!(
                "table must be {} x {}",
                self.x_grid.len(),
                self.p_grid.len()
            )));
        }
        for (i, row) in self.table.iter().enumerate() {
            if row.windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::InvalidGrid(format!("row at x = {} is not decreasing in p", self.x_grid[i])));
            }
            if *row.last().unwrap() != ExtReal::NegInf {
                return Err(Error::InvalidGrid(format!("psi(x = {}, 1) must be -inf", self.x_grid[i])));
            }
        }
        Ok(())
    }

    pub fn x_grid(&self) -> &[f64] {
        &self.x_grid
    }

    pub fn p_grid(&self) -> &[f64] {
        &self.p_grid
    }

    pub fn table(&self) -> &[Vec<ExtReal>] {
        &self.table
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Table entry at node `i`, level `j`.
    pub fn at(&self, i: usize, j: usize) -> ExtReal {
        self.table[i][j]
    }

    /// Left end of the first node's cell.
    pub fn lower_edge(&self) -> f64 {
        let w = if self.x_grid.len() > 1 { self.x_grid[1] - self.x_grid[0] } else { 1.0 };
        self.x_grid[0] - w
    }

    /// Index of the largest grid level `≤ p` (with snapping).
    pub fn p_index(&self, p: f64) -> usize {
        self.p_grid.partition_point(|&q| q <= p + GRID_SNAP).saturating_sub(1)
    }

    /// Index of the node whose cell contains `x`, if any.
    pub fn x_cell(&self, x: f64) -> Option<usize> {
        if x <= self.lower_edge() {
            return None;
        }
        let j = self.x_grid.partition_point(|&t| t < x - GRID_SNAP);
        (j < self.x_grid.len()).then_some(j)
    }

    /// Index of the grid node equal to `x` (with snapping).
    pub fn x_node(&self, x: f64) -> Option<usize> {
        let j = self.x_grid.partition_point(|&t| t < x - GRID_SNAP);
        (j < self.x_grid.len() && (self.x_grid[j] - x).abs() <= GRID_SNAP).then_some(j)
    }

    pub fn eval(&self, x: f64, p: f64) -> ExtReal {
        match self.x_cell(x) {
            Some(i) => self.table[i][self.p_index(p)],
            None => ExtReal::NegInf,
        }
    }

    /// `sup_{t<x} ψ(t, p)` for the cell-wise kernel.
    pub fn left_sup(&self, x: f64, p: f64) -> ExtReal {
        if x <= self.lower_edge() {
            return ExtReal::NegInf;
        }
        let last = match self.x_cell(x) {
            Some(i) => i,
            None => self.x_grid.len() - 1,
        };
        let j = self.p_index(p);
        (0..=last).map(|i| self.table[i][j]).fold(ExtReal::NegInf, ExtReal::max)
    }

    /// `sup_x ψ(x, F(x))` for the cell-wise kernel.
    pub fn sup_eval(&self, f: &DiscreteDist) -> ExtReal {
        let xs = f.support();
        let tail = self.left_sup(f64::INFINITY, 1.0);
        (0..xs.len()).map(|i| self.left_sup(xs[i], f.level_before(i))).fold(tail, ExtReal::max)
    }

    /// Violations of the construction invariants (beyond the structural
    /// checks of [`PsiGrid::validate`]): the `p = 0` column must be strictly
    /// increasing in `x`.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 1..self.x_grid.len() {
            if self.table[i][0] <= self.table[i - 1][0] {
                out.push(format!(
                    "psi(., 0) not strictly increasing between x = {} and x = {}",
                    self.x_grid[i - 1],
                    self.x_grid[i]
                ));
            }
        }
        out
    }
}

/// One evaluation `f(x, y, p) = ρ(p δ_x + (1 − p) δ_y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPointEval {
    pub x: f64,
    pub y: f64,
    pub p: f64,
    pub value: ExtReal,
}

pub fn two_point_eval<R: RiskMeasure + ?Sized>(rho: &R, x: f64, y: f64, p: f64) -> Result<TwoPointEval> {
    let dist = DiscreteDist::two_point(x, y, p)?;
    Ok(TwoPointEval { x, y, p, value: rho.evaluate(&dist) })
}

fn f_unchecked<R: RiskMeasure + ?Sized>(rho: &R, x: f64, y: f64, p: f64) -> ExtReal {
    rho.evaluate(&DiscreteDist::two_point(x, y, p).expect("x <= y and p in [0, 1]"))
}

fn point_value<R: RiskMeasure + ?Sized>(rho: &R, x: f64) -> ExtReal {
    rho.evaluate(&DiscreteDist::point_mass(x).expect("finite grid point"))
}

/// Bisection for `inf{y ∈ [x, y_max] : f(x, y, p) > ρ(δ_x)}`, returning the
/// upper bracket once it is within `tol` of the lower one, and `+∞` when
/// `f(x, y_max, p)` does not exceed `ρ(δ_x)`.
pub fn h_threshold<R: RiskMeasure + ?Sized>(rho: &R, x: f64, p: f64, y_max: f64, tol: f64) -> Result<ExtReal> {
    if !(x.is_finite() && y_max.is_finite() && y_max > x) {
        return Err(Error::InvalidArgument(format!("h_threshold needs finite y_max > x, got x = {x}, y_max = {y_max}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityRange { name: "p", value: p, range: "[0, 1]" });
    }
    Ok(h_unchecked(rho, point_value(rho, x), x, p, y_max, tol))
}

fn h_unchecked<R: RiskMeasure + ?Sized>(rho: &R, base: ExtReal, x: f64, p: f64, y_max: f64, tol: f64) -> ExtReal {
    if f_unchecked(rho, x, y_max, p) <= base {
        return ExtReal::PosInf;
    }
    let (mut lo, mut hi) = (x, y_max);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f_unchecked(rho, x, mid, p) > base {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    ExtReal::Finite(hi)
}

/// Tabulates `ψ` on `x_grid × p_grid`. Candidates for the outer maximum are
/// the grid nodes plus one extra node a cell below the grid, so every node
/// `y` has a candidate `x < y` and `ψ(y, 0) = ρ(δ_y)` holds throughout.
/// `y_max` defaults to the last node plus the grid span. Cells are computed
/// in parallel; the result does not depend on scheduling.
pub fn construct_psi<R: RiskMeasure + ?Sized>(
    rho: &R,
    x_grid: &[f64],
    p_grid: &[f64],
    y_max: Option<f64>,
    tol: f64,
) -> Result<PsiGrid> {
    check_grids(x_grid, p_grid)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let first = x_grid[0];
    let last = *x_grid.last().unwrap();
    let width = if x_grid.len() > 1 { x_grid[1] - x_grid[0] } else { 1.0 };
    let y_max = y_max.unwrap_or(last + (last - first).max(width));
    if !(y_max.is_finite() && y_max > last) {
        return Err(Error::InvalidGrid(format!("y_max = {y_max} must exceed the last grid node {last}")));
    }

    let mut xs = Vec::with_capacity(x_grid.len() + 1);
    xs.push(first - width);
    xs.extend_from_slice(x_grid);

    // h[k][j] for candidate k, level j
    let h: Vec<Vec<ExtReal>> = xs
        .par_iter()
        .map(|&x| {
            let base = point_value(rho, x);
            p_grid.iter().map(|&p| h_unchecked(rho, base, x, p, y_max, tol)).collect()
        })
        .collect();

    let table: Vec<Vec<ExtReal>> = x_grid
        .par_iter()
        .enumerate()
        .map(|(i, &y)| {
            // candidates below y are xs[0..=i]
            p_grid
                .iter()
                .enumerate()
                .map(|(j, &p)| {
                    let mut best = ExtReal::NegInf;
                    for k in 0..=i {
                        if ExtReal::Finite(y) > h[k][j] {
                            best = best.max(f_unchecked(rho, xs[k], y, p));
                        }
                    }
                    best
                })
                .collect()
        })
        .collect();

    let grid = PsiGrid { x_grid: x_grid.to_vec(), p_grid: p_grid.to_vec(), table, y_max, tol };
    grid.validate()?;
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepresentationCase {
    pub rho: ExtReal,
    pub psi_sup: ExtReal,
    pub error: ExtReal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepresentationReport {
    pub checked: usize,
    pub max_error: ExtReal,
    pub failures: usize,
    pub tol: f64,
    pub cases: Vec<RepresentationCase>,
}

impl RepresentationReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Compares `ρ(F)` with the grid evaluator `sup_x ψ(x, F(x))` on each `F`.
/// Every atom must be a grid node.
pub fn verify_representation<R: RiskMeasure + ?Sized>(
    rho: &R,
    grid: &PsiGrid,
    dists: &[DiscreteDist],
    tol: f64,
) -> Result<RepresentationReport> {
    for (index, d) in dists.iter().enumerate() {
        if let Some(&x) = d.support().iter().find(|&&x| grid.x_node(x).is_none()) {
            return Err(Error::OffGrid { index, x });
        }
    }
    let cases: Vec<RepresentationCase> = dists
        .par_iter()
        .map(|d| {
            let rho_v = rho.evaluate(d);
            let psi_sup = grid.sup_eval(d);
            RepresentationCase { rho: rho_v, psi_sup, error: rho_v.gap(psi_sup) }
        })
        .collect();
    let max_error = cases.iter().map(|c| c.error).fold(ExtReal::Finite(0.0), ExtReal::max);
    let failures = cases.iter().filter(|c| c.error > ExtReal::Finite(tol)).count();
    Ok(RepresentationReport { checked: cases.len(), max_error, failures, tol, cases })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaCrossCheck {
    pub probes: usize,
    pub max_error: ExtReal,
    /// Allowed error: the largest step of `f̂` between neighbouring nodes, plus `tol`.
    pub cell_tolerance: f64,
    pub failures: usize,
}

impl LambdaCrossCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveredLambda {
    pub x_grid: Vec<f64>,
    pub lambda_hat: Vec<f64>,
    pub f_hat: Vec<ExtReal>,
    /// Monotonicity problems, reported as found.
    pub issues: Vec<String>,
    /// Nodes where `Λ̂ = 0`.
    pub zeros: usize,
    pub cross_check: LambdaCrossCheck,
}

impl RecoveredLambda {
    /// `sup{f̂(x) : F(x) < Λ̂(x)}` with `f̂` and `Λ̂` read cell-wise.
    pub fn evaluate(&self, f: &DiscreteDist, lower_edge: f64) -> ExtReal {
        let mut best = ExtReal::NegInf;
        for i in 0..self.x_grid.len() {
            let left = if i == 0 { lower_edge } else { self.x_grid[i - 1] };
            if f.cdf(left) < self.lambda_hat[i] {
                best = best.max(self.f_hat[i]);
            }
        }
        best
    }
}

/// Reads `Λ̂(x)` off a constructed grid as the grid level just above the
/// last `p` with `ψ(x, p) = ψ(x, 0)`, and `f̂(x) = ρ(δ_x)`; then checks
/// monotonicity and compares `ρ` with the recovered Λ-form on `probes`.
pub fn recover_lambda<R: RiskMeasure + ?Sized>(
    rho: &R,
    grid: &PsiGrid,
    probes: &[DiscreteDist],
    tol: f64,
) -> RecoveredLambda {
    let ps = grid.p_grid();
    let xs = grid.x_grid().to_vec();
    let mut lambda_hat = Vec::with_capacity(xs.len());
    for row in grid.table() {
        let head = row[0];
        let mut last_eq = 0;
        for (j, v) in row.iter().enumerate() {
            if v.approx_eq(head, tol) {
                last_eq = j;
            } else {
                break;
            }
        }
        lambda_hat.push(ps[(last_eq + 1).min(ps.len() - 1)]);
    }
    let f_hat: Vec<ExtReal> = xs.iter().map(|&x| point_value(rho, x)).collect();

    let mut issues = Vec::new();
    for i in 1..xs.len() {
        if lambda_hat[i] > lambda_hat[i - 1] + tol {
            issues.push(format!(
                "Lambda-hat increases from {} to {} between x = {} and x = {}",
                lambda_hat[i - 1],
                lambda_hat[i],
                xs[i - 1],
                xs[i]
            ));
        }
        if f_hat[i] <= f_hat[i - 1] {
            issues.push(format!("f-hat not strictly increasing between x = {} and x = {}", xs[i - 1], xs[i]));
        }
    }
    let zeros = lambda_hat.iter().filter(|&&l| l == 0.0).count();

    let cell_tolerance = f_hat
        .windows(2)
        .filter_map(|w| w[1].finite().zip(w[0].finite()).map(|(b, a)| b - a))
        .fold(0.0, f64::max)
        + tol;

    let mut rec = RecoveredLambda {
        x_grid: xs,
        lambda_hat,
        f_hat,
        issues,
        zeros,
        cross_check: LambdaCrossCheck { probes: probes.len(), max_error: ExtReal::Finite(0.0), cell_tolerance, failures: 0 },
    };
    let edge = grid.lower_edge();
    let errors: Vec<ExtReal> = probes.par_iter().map(|f| rho.evaluate(f).gap(rec.evaluate(f, edge))).collect();
    rec.cross_check.max_error = errors.iter().copied().fold(ExtReal::Finite(0.0), ExtReal::max);
    rec.cross_check.failures = errors.iter().filter(|&&e| e > ExtReal::Finite(cell_tolerance)).count();
    rec
}
