//! Finite atomic distributions with step CDFs, and the FSD lattice on them.
//!
//! A [`DiscreteDist`] stores its support points together with the cumulative
//! levels `P_i = F(x_i)`. The levels are the canonical data: join and meet are
//! pointwise `min`/`max` of levels, so storing those (and not the masses
//! recovered by differencing) keeps lattice identities exact in floating point.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Masses at or below this are dropped from lattice results.
pub const MASS_EPS: f64 = 1e-15;
/// Accepted deviation of the input mass sum from 1 before renormalization.
pub const MASS_SUM_TOL: f64 = 1e-12;

/// A single `(x, p)` atom as it appears in the JSON format.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    xs: Vec<f64>,
    cum: Vec<f64>,
}

impl DiscreteDist {
    /// Builds a distribution from raw atoms: merges equal support points,
    /// drops zero masses, and renormalizes when the total is within
    /// [`MASS_SUM_TOL`] of one.
    pub fn new(atoms: &[Atom]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        for a in atoms {
            if !a.x.is_finite() {
                return Err(Error::NanValue(format!("support point {}", a.x)));
            }
            if !a.p.is_finite() {
                return Err(Error::NanValue(format!("mass {} at x = {}", a.p, a.x)));
            }
            if a.p < 0.0 {
                return Err(Error::NegativeMass(a.p));
            }
        }

        let mut sorted = atoms.to_vec();
        sorted.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap_or(Ordering::Equal));
        let mut merged: Vec<Atom> = Vec::with_capacity(sorted.len());
        for a in sorted {
            match merged.last_mut() {
                Some(last) if last.x == a.x => {
                    log::debug!("merging duplicate atom at x = {}", a.x);
                    last.p += a.p;
                }
                _ => merged.push(a),
            }
        }

        let sum: f64 = merged.iter().map(|a| a.p).sum();
        if (sum - 1.0).abs() > MASS_SUM_TOL {
            return Err(Error::MassSum { sum });
        }
        if sum != 1.0 {
            log::debug!("renormalizing mass sum {sum} to 1");
        }

        let mut xs = Vec::with_capacity(merged.len());
        let mut cum = Vec::with_capacity(merged.len());
        let mut acc = 0.0;
        for a in merged.iter().filter(|a| a.p > 0.0) {
            acc += a.p;
            xs.push(a.x);
            cum.push(acc / sum);
        }
        if xs.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        *cum.last_mut().unwrap() = 1.0;
        Ok(Self::canonical(xs, cum))
    }

    /// Builds a distribution from support points and CDF levels `F(x_i)`.
    /// The last level must be 1 (within [`MASS_SUM_TOL`]).
    pub fn from_levels(xs: &[f64], levels: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if xs.len() != levels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} support points but {} levels",
                xs.len(),
                levels.len()
            )));
        }
        if xs.iter().any(|x| !x.is_finite()) || levels.iter().any(|p| !p.is_finite()) {
            return Err(Error::NanValue("support point or level".into()));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "support points must be strictly increasing".into(),
            ));
        }
        if levels.windows(2).any(|w| w[0] > w[1]) || levels[0] < 0.0 {
            return Err(Error::InvalidArgument("levels must be increasing in [0, 1]".into()));
        }
        let last = *levels.last().unwrap();
        if (last - 1.0).abs() > MASS_SUM_TOL {
            return Err(Error::MassSum { sum: last });
        }
        let mut cum = levels.to_vec();
        *cum.last_mut().unwrap() = 1.0;
        Ok(Self::canonical(xs.to_vec(), cum))
    }

    /// Drops atoms whose jump is at most [`MASS_EPS`]; the dropped mass moves
    /// to the next retained atom. Expects sorted `xs`, increasing `cum`, and
    /// `cum.last() == 1`.
    fn canonical(xs: Vec<f64>, cum: Vec<f64>) -> Self {
        let mut out_x = Vec::with_capacity(xs.len());
        let mut out_c: Vec<f64> = Vec::with_capacity(cum.len());
        let n = xs.len();
        for (i, (x, c)) in xs.into_iter().zip(cum).enumerate() {
            let prev = out_c.last().copied().unwrap_or(0.0);
            if c - prev > MASS_EPS || (i + 1 == n && out_c.is_empty()) {
                out_x.push(x);
                out_c.push(c);
            } else if i + 1 == n {
                // tiny final jump: fold it into the last retained atom
                *out_c.last_mut().unwrap() = 1.0;
            }
        }
        DiscreteDist { xs: out_x, cum: out_c }
    }

    pub fn point_mass(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::NanValue(format!("support point {c}")));
        }
        Ok(DiscreteDist { xs: vec![c], cum: vec![1.0] })
    }

    /// `p δ_x + (1 − p) δ_y` for `x ≤ y`; degenerates to a point mass when
    /// `x = y` or `p ∈ {0, 1}`.
    pub fn two_point(x: f64, y: f64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ProbabilityRange { name: "p", value: p, range: "[0, 1]" });
        }
        if x > y {
            return Err(Error::InvalidArgument(format!("two-point support needs x <= y, got {x} > {y}")));
        }
        if x == y || p >= 1.0 {
            Self::point_mass(x)
        } else if p <= 0.0 {
            Self::point_mass(y)
        } else {
            Self::from_levels(&[x, y], &[p, 1.0])
        }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn support(&self) -> &[f64] {
        &self.xs
    }

    /// Cumulative levels `F(x_i)`; the last entry is exactly 1.
    pub fn levels(&self) -> &[f64] {
        &self.cum
    }

    pub fn min_support(&self) -> f64 {
        self.xs[0]
    }

    pub fn max_support(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    /// `F(x_{i−1})` with `P_0 = 0`, i.e. the level just left of atom `i`.
    pub fn level_before(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.cum[i - 1]
        }
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.cum[i] - self.level_before(i)
    }

    pub fn atoms(&self) -> Vec<Atom> {
        (0..self.len()).map(|i| Atom { x: self.xs[i], p: self.mass(i) }).collect()
    }

    /// Right-continuous CDF `F(x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.xs.partition_point(|&xi| xi <= x);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    /// Left limit `F(x−)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        let k = self.xs.partition_point(|&xi| xi < x);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    /// `inf{x : F(x) ≥ a}` for `a ∈ (0, 1]`.
    pub fn left_quantile(&self, a: f64) -> Result<f64> {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::ProbabilityRange { name: "level", value: a, range: "(0, 1]" });
        }
        let i = self.cum.partition_point(|&c| c < a);
        Ok(self.xs[i.min(self.len() - 1)])
    }

    /// `sup{x : F(x) ≤ a}` for `a ∈ [0, 1)`.
    pub fn right_quantile(&self, a: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::ProbabilityRange { name: "level", value: a, range: "[0, 1)" });
        }
        let i = self.cum.partition_point(|&c| c <= a);
        Ok(self.xs[i.min(self.len() - 1)])
    }

    /// `F ⪯₁ G`, i.e. `F(x) ≥ G(x)` everywhere. Checked on the merged support.
    pub fn fsd_leq(&self, other: &DiscreteDist) -> bool {
        merge_levels(self, other).all(|(_, f, g)| f >= g)
    }

    /// FSD join `F ∨ G`: pointwise minimum of the CDFs.
    pub fn join(&self, other: &DiscreteDist) -> DiscreteDist {
        self.combine(other, f64::min)
    }

    /// FSD meet `F ∧ G`: pointwise maximum of the CDFs.
    pub fn meet(&self, other: &DiscreteDist) -> DiscreteDist {
        self.combine(other, f64::max)
    }

    fn combine(&self, other: &DiscreteDist, op: fn(f64, f64) -> f64) -> DiscreteDist {
        let (xs, cum): (Vec<f64>, Vec<f64>) =
            merge_levels(self, other).map(|(x, f, g)| (x, op(f, g))).unzip();
        Self::canonical(xs, cum)
    }

    /// Two-point distributions `F_k = P_k δ_{x_1} + (1 − P_k) δ_{x_{k+1}}`,
    /// `k = 1, …, n − 1`, whose join is exactly `F`.
    pub fn join_decomposition(&self) -> Vec<DiscreteDist> {
        if self.len() <= 2 {
            return vec![self.clone()];
        }
        let x1 = self.xs[0];
        (1..self.len())
            .map(|k| DiscreteDist { xs: vec![x1, self.xs[k]], cum: vec![self.cum[k - 1], 1.0] })
            .collect()
    }

    /// `Σ p_i x_i`.
    pub fn mean(&self) -> f64 {
        (0..self.len()).map(|i| self.mass(i) * self.xs[i]).sum()
    }
}

impl fmt::Display for DiscreteDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}·δ({})", self.mass(i), self.xs[i])?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct DistJson {
    atoms: Vec<Atom>,
}

impl Serialize for DiscreteDist {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DistJson { atoms: self.atoms() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiscreteDist {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = DistJson::deserialize(d)?;
        DiscreteDist::new(&raw.atoms).map_err(serde::de::Error::custom)
    }
}

/// Walks the merged support of `f` and `g`, yielding `(z, F(z), G(z))`.
fn merge_levels<'a>(
    f: &'a DiscreteDist,
    g: &'a DiscreteDist,
) -> impl Iterator<Item = (f64, f64, f64)> + 'a {
    let (mut i, mut j) = (0usize, 0usize);
    let (mut lf, mut lg) = (0.0, 0.0);
    std::iter::from_fn(move || {
        let xf = f.xs.get(i).copied();
        let xg = g.xs.get(j).copied();
        let z = match (xf, xg) {
            (None, None) => return None,
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (Some(a), Some(b)) => a.min(b),
        };
        if xf == Some(z) {
            lf = f.cum[i];
            i += 1;
        }
        if xg == Some(z) {
            lg = g.cum[j];
            j += 1;
        }
        Some((z, lf, lg))
    })
}

/// A continuous CDF with compact support `[m, M]`, given as a callable.
#[derive(Clone)]
pub struct ContinuousCdf {
    lower: f64,
    upper: f64,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    label: String,
}

impl fmt::Debug for ContinuousCdf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuousCdf")
            .field("label", &self.label)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .finish()
    }
}

impl ContinuousCdf {
    /// `eval` only needs to be correct on `[lower, upper]`; outside it the
    /// CDF is pinned to 0 and 1.
    pub fn from_fn(
        lower: f64,
        upper: f64,
        label: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(Error::NanValue("continuous support endpoint".into()));
        }
        if lower > upper {
            return Err(Error::InvalidArgument(format!("support [{lower}, {upper}] is reversed")));
        }
        Ok(ContinuousCdf { lower, upper, eval: Arc::new(eval), label: label.into() })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::from_fn(a, b, format!("uniform[{a}, {b}]"), move |x| {
            if b > a {
                (x - a) / (b - a)
            } else {
                1.0
            }
        })
    }

    pub fn triangular(a: f64, mode: f64, b: f64) -> Result<Self> {
        if !(a <= mode && mode <= b) || a == b {
            return Err(Error::InvalidArgument(format!(
                "triangular needs a <= mode <= b with a < b, got ({a}, {mode}, {b})"
            )));
        }
        Self::from_fn(a, b, format!("triangular[{a}, {mode}, {b}]"), move |x| {
            if x <= mode {
                if mode == a {
                    0.0
                } else {
                    (x - a) * (x - a) / ((b - a) * (mode - a))
                }
            } else {
                1.0 - (b - x) * (b - x) / ((b - a) * (b - mode))
            }
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.lower {
            0.0
        } else if x >= self.upper {
            1.0
        } else {
            (self.eval)(x).clamp(0.0, 1.0)
        }
    }

    /// Step approximation from below in FSD: on the cell
    /// `[m + (k−1)T/n, m + kT/n)` it takes the value `F(m + kT/n)`.
    pub fn discretize(&self, n: usize) -> Result<DiscreteDist> {
        if n == 0 {
            return Err(Error::InvalidArgument("discretization needs n >= 1".into()));
        }
        let (m, big_m) = (self.lower, self.upper);
        if m == big_m {
            return DiscreteDist::point_mass(m);
        }
        let span = big_m - m;
        let mut xs = Vec::with_capacity(n);
        let mut cum = Vec::with_capacity(n);
        let mut running = 0.0f64;
        for k in 1..=n {
            let right = if k == n { big_m } else { m + span * (k as f64) / (n as f64) };
            running = running.max(self.eval(right));
            xs.push(m + span * ((k - 1) as f64) / (n as f64));
            cum.push(running);
        }
        *cum.last_mut().unwrap() = 1.0;
        Ok(DiscreteDist::canonical(xs, cum))
    }
}

/// JSON selector for the shipped continuous families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ContinuousFamily {
    Uniform { a: f64, b: f64 },
    Triangular { a: f64, mode: f64, b: f64 },
}

impl ContinuousFamily {
    pub fn build(&self) -> Result<ContinuousCdf> {
        match *self {
            ContinuousFamily::Uniform { a, b } => ContinuousCdf::uniform(a, b),
            ContinuousFamily::Triangular { a, mode, b } => ContinuousCdf::triangular(a, mode, b),
        }
    }
}
