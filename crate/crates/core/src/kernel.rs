//! Bivariate kernels `ψ(x, p)` / `φ(x, p)` and the exact evaluators
//! `ρ(F) = sup_x ψ(x, F(x))` and `ρ(F) = inf_x φ(x, F(x−))`.
//!
//! For a step CDF with atoms `x_1 < … < x_n` and levels `P_i`, the supremum
//! splits over the constancy intervals `[x_{i−1}, x_i)`:
//!
//! ```text
//! sup_x ψ(x, F(x)) = max( max_i ψ̃(x_i, P_{i−1}),  ψ̃(+∞, 1) ),   ψ̃(x, p) = sup_{t<x} ψ(t, p)
//! ```
//!
//! because `ψ` is decreasing in `p` and `F(t) ≤ P_{i−1}` for every `t < x_i`.
//! Each variant computes its left supremum `ψ̃` in closed form, so no
//! epsilon probing is involved. The inf form mirrors this with the right
//! infimum `φ̃(x, p) = inf_{t>x} φ(t, p)` over the intervals `(x_i, x_{i+1}]`.

use serde::{Deserialize, Serialize};

use crate::dist::DiscreteDist;
use crate::engine::PsiGrid;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::step::MonotoneStep;

#[derive(Debug, Clone, PartialEq)]
pub enum PsiKernel {
    /// `x − ∞·1{p ≥ α}`.
    Var { alpha: f64 },
    /// `x − h(p)`.
    BenchmarkLoss { h: MonotoneStep },
    /// `x − ∞·1{p ≥ Λ(x)}`.
    Lambda { lambda: MonotoneStep },
    /// `g(p) − ∞·1{x ≠ x_0}`.
    Pinned { x0: f64, g: MonotoneStep },
    /// Tabulated kernel produced by the representation engine.
    Grid(PsiGrid),
    /// `ψ̃(x, p) = sup_{t<x} ψ(t, p)`.
    Regularized(Box<PsiKernel>),
}

impl PsiKernel {
    pub fn var(alpha: f64) -> Result<Self> {
        let k = PsiKernel::Var { alpha };
        k.validate()?;
        Ok(k)
    }

    pub fn benchmark_loss(h: MonotoneStep) -> Result<Self> {
        let k = PsiKernel::BenchmarkLoss { h };
        k.validate()?;
        Ok(k)
    }

    pub fn lambda(lambda: MonotoneStep) -> Result<Self> {
        let k = PsiKernel::Lambda { lambda };
        k.validate()?;
        Ok(k)
    }

    pub fn pinned(x0: f64, g: MonotoneStep) -> Result<Self> {
        let k = PsiKernel::Pinned { x0, g };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PsiKernel::Var { alpha } => {
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(Error::ProbabilityRange { name: "alpha", value: *alpha, range: "(0, 1)" });
                }
                Ok(())
            }
            PsiKernel::BenchmarkLoss { h } => h.validate_benchmark(),
            PsiKernel::Lambda { lambda } => lambda.validate_lambda(false),
            PsiKernel::Pinned { x0, g } => {
                if !x0.is_finite() {
                    return Err(Error::NanValue("pinned x0".into()));
                }
                g.validate_pinned()
            }
            PsiKernel::Grid(grid) => grid.validate(),
            PsiKernel::Regularized(inner) => inner.validate(),
        }
    }

    /// Pointwise value `ψ(x, p)`.
    pub fn eval(&self, x: f64, p: f64) -> ExtReal {
        match self {
            PsiKernel::Var { alpha } => {
                if p >= *alpha {
                    ExtReal::NegInf
                } else {
                    ExtReal::from_f64(x)
                }
            }
            PsiKernel::BenchmarkLoss { h } => ExtReal::from_f64(x).sub(h.eval(p)),
            PsiKernel::Lambda { lambda } => {
                if ExtReal::Finite(p) >= lambda.eval(x) {
                    ExtReal::NegInf
                } else {
                    ExtReal::from_f64(x)
                }
            }
            PsiKernel::Pinned { x0, g } => {
                if x == *x0 {
                    g.eval(p)
                } else {
                    ExtReal::NegInf
                }
            }
            PsiKernel::Grid(grid) => grid.eval(x, p),
            PsiKernel::Regularized(inner) => inner.left_sup(x, p),
        }
    }

    /// Left supremum `ψ̃(x, p) = sup_{t<x} ψ(t, p)`; `x` may be `±∞`.
    pub fn left_sup(&self, x: f64, p: f64) -> ExtReal {
        match self {
            PsiKernel::Var { alpha } => {
                if p >= *alpha || x == f64::NEG_INFINITY {
                    ExtReal::NegInf
                } else {
                    ExtReal::from_f64(x)
                }
            }
            PsiKernel::BenchmarkLoss { h } => ExtReal::from_f64(x).sub(h.eval(p)),
            PsiKernel::Lambda { lambda } => {
                // {t : p < Λ(t)} is (−∞, s); intersect with (−∞, x).
                match lambda.upper_cut(p) {
                    ExtReal::NegInf => ExtReal::NegInf,
                    cut => ExtReal::from_f64(x).min(cut),
                }
            }
            PsiKernel::Pinned { x0, g } => {
                if x > *x0 {
                    g.eval(p)
                } else {
                    ExtReal::NegInf
                }
            }
            PsiKernel::Grid(grid) => grid.left_sup(x, p),
            PsiKernel::Regularized(inner) => inner.left_sup(x, p),
        }
    }

    /// Points in `x` where the kernel can jump.
    pub fn x_breakpoints(&self) -> Vec<f64> {
        match self {
            PsiKernel::Var { .. } | PsiKernel::BenchmarkLoss { .. } => vec![],
            PsiKernel::Lambda { lambda } => lambda.breakpoints().to_vec(),
            PsiKernel::Pinned { x0, .. } => vec![*x0],
            PsiKernel::Grid(grid) => grid.x_grid().to_vec(),
            PsiKernel::Regularized(inner) => inner.x_breakpoints(),
        }
    }

    /// Points in `p` where the kernel can jump (the `Λ` values for the
    /// `Λ` variant, since `ψ(x, ·)` jumps at `p = Λ(x)`).
    pub fn p_breakpoints(&self) -> Vec<f64> {
        let mut out = match self {
            PsiKernel::Var { alpha } => vec![*alpha],
            PsiKernel::BenchmarkLoss { h } => h.breakpoints().to_vec(),
            PsiKernel::Lambda { lambda } => lambda.values().iter().filter_map(|v| v.finite()).collect(),
            PsiKernel::Pinned { g, .. } => g.breakpoints().to_vec(),
            PsiKernel::Grid(grid) => grid.p_grid().to_vec(),
            PsiKernel::Regularized(inner) => inner.p_breakpoints(),
        };
        out.retain(|p| (0.0..=1.0).contains(p));
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }

    /// `sup_x ψ(x, F(x))`.
    pub fn sup_eval(&self, f: &DiscreteDist) -> ExtReal {
        sup_psi_eval(self, f)
    }
}

/// Exact `sup_{x∈ℝ} ψ(x, F(x))`; `−∞` when the composite is identically `−∞`.
pub fn sup_psi_eval(psi: &PsiKernel, f: &DiscreteDist) -> ExtReal {
    let xs = f.support();
    let tail = psi.left_sup(f64::INFINITY, 1.0);
    (0..xs.len())
        .map(|i| psi.left_sup(xs[i], f.level_before(i)))
        .fold(tail, ExtReal::max)
}

/// `ψ̃(x, p) = sup_{t<x} ψ(t, p)`: increasing and lower semicontinuous in `x`,
/// with the same sup-representation on every distribution.
pub fn regularize_psi(psi: &PsiKernel) -> PsiKernel {
    match psi {
        PsiKernel::Regularized(_) => psi.clone(),
        other => PsiKernel::Regularized(Box::new(other.clone())),
    }
}

/// Kernels for the inf form. `φ(x, 0) = +∞` throughout.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiKernel {
    /// `x + ∞·1{p < α}`, `α ∈ (0, 1]`.
    Var { alpha: f64 },
    /// `x + k(p)` with `k` decreasing and `k(0) = +∞`.
    Benchmark { k: MonotoneStep },
    /// `x + ∞·1{p < Λ(x)}`.
    Lambda { lambda: MonotoneStep },
    /// `g(p) + ∞·1{x ≠ x_0}`.
    Pinned { x0: f64, g: MonotoneStep },
    /// `φ̃(x, p) = inf_{t>x} φ(t, p)`.
    Regularized(Box<PhiKernel>),
}

impl PhiKernel {
    pub fn validate(&self) -> Result<()> {
        match self {
            PhiKernel::Var { alpha } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return Err(Error::ProbabilityRange { name: "alpha", value: *alpha, range: "(0, 1]" });
                }
                Ok(())
            }
            PhiKernel::Benchmark { k } => {
                if k.direction() != crate::step::Direction::Decreasing {
                    return Err(Error::InvalidStep("inf-form benchmark k must be decreasing".into()));
                }
                if k.eval(0.0) != ExtReal::PosInf {
                    return Err(Error::InvalidStep("inf-form benchmark needs k(0) = +inf".into()));
                }
                if !k.eval(1.0).is_finite() {
                    return Err(Error::InvalidStep("inf-form benchmark needs finite k(1)".into()));
                }
                Ok(())
            }
            PhiKernel::Lambda { lambda } => lambda.validate_lambda(true),
            PhiKernel::Pinned { x0, g } => {
                if !x0.is_finite() {
                    return Err(Error::NanValue("pinned x0".into()));
                }
                g.validate_pinned()
            }
            PhiKernel::Regularized(inner) => inner.validate(),
        }
    }

    pub fn eval(&self, x: f64, p: f64) -> ExtReal {
        match self {
            PhiKernel::Var { alpha } => {
                if p < *alpha {
                    ExtReal::PosInf
                } else {
                    ExtReal::from_f64(x)
                }
            }
            PhiKernel::Benchmark { k } => ExtReal::from_f64(x).add(k.eval(p)),
            PhiKernel::Lambda { lambda } => {
                if ExtReal::Finite(p) < lambda.eval(x) {
                    ExtReal::PosInf
                } else {
                    ExtReal::from_f64(x)
                }
            }
            PhiKernel::Pinned { x0, g } => {
                if x == *x0 {
                    g.eval(p)
                } else {
                    ExtReal::PosInf
                }
            }
            PhiKernel::Regularized(inner) => inner.right_inf(x, p),
        }
    }

    /// Right infimum `φ̃(x, p) = inf_{t>x} φ(t, p)`; `x` may be `±∞`.
    pub fn right_inf(&self, x: f64, p: f64) -> ExtReal {
        match self {
            PhiKernel::Var { alpha } => {
                if p < *alpha || x == f64::INFINITY {
                    ExtReal::PosInf
                } else {
                    ExtReal::from_f64(x)
                }
            }
            PhiKernel::Benchmark { k } => ExtReal::from_f64(x).add(k.eval(p)),
            PhiKernel::Lambda { lambda } => {
                // {t : Λ(t) ≤ p} is [s, ∞); intersect with (x, ∞).
                match lambda.upper_cut(p) {
                    ExtReal::PosInf => ExtReal::PosInf,
                    cut => ExtReal::from_f64(x).max(cut),
                }
            }
            PhiKernel::Pinned { x0, g } => {
                if x < *x0 {
                    g.eval(p)
                } else {
                    ExtReal::PosInf
                }
            }
            PhiKernel::Regularized(inner) => inner.right_inf(x, p),
        }
    }

    pub fn inf_eval(&self, f: &DiscreteDist) -> ExtReal {
        inf_phi_eval(self, f)
    }
}

/// Exact `inf_{x∈ℝ} φ(x, F(x−))`. On `(x_i, x_{i+1}]` the left limit is `P_i`.
pub fn inf_phi_eval(phi: &PhiKernel, f: &DiscreteDist) -> ExtReal {
    let head = phi.right_inf(f64::NEG_INFINITY, 0.0);
    let xs = f.support();
    let levels = f.levels();
    (0..xs.len())
        .map(|i| phi.right_inf(xs[i], levels[i]))
        .fold(head, ExtReal::min)
}

// JSON: {"kind":"var","alpha":..} | {"kind":"benchmark_loss","h":{..}} |
// {"kind":"lambda","Lambda":{..}} | {"kind":"pinned","x0":..,"g":{..}} |
// {"kind":"grid", x_grid, p_grid, table, ..} | {"kind":"regularized","inner":{..}}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum PsiRepr {
    Var { alpha: f64 },
    BenchmarkLoss { h: MonotoneStep },
    Lambda {
        #[serde(rename = "Lambda")]
        lambda: MonotoneStep,
    },
    Pinned { x0: f64, g: MonotoneStep },
    Grid(PsiGrid),
    Regularized { inner: Box<PsiKernel> },
}

impl Serialize for PsiKernel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self.clone() {
            PsiKernel::Var { alpha } => PsiRepr::Var { alpha },
            PsiKernel::BenchmarkLoss { h } => PsiRepr::BenchmarkLoss { h },
            PsiKernel::Lambda { lambda } => PsiRepr::Lambda { lambda },
            PsiKernel::Pinned { x0, g } => PsiRepr::Pinned { x0, g },
            PsiKernel::Grid(grid) => PsiRepr::Grid(grid),
            PsiKernel::Regularized(inner) => PsiRepr::Regularized { inner },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PsiKernel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let k = match PsiRepr::deserialize(d)? {
            PsiRepr::Var { alpha } => PsiKernel::Var { alpha },
            PsiRepr::BenchmarkLoss { h } => PsiKernel::BenchmarkLoss { h },
            PsiRepr::Lambda { lambda } => PsiKernel::Lambda { lambda },
            PsiRepr::Pinned { x0, g } => PsiKernel::Pinned { x0, g },
            PsiRepr::Grid(grid) => PsiKernel::Grid(grid),
            PsiRepr::Regularized { inner } => PsiKernel::Regularized(inner),
        };
        k.validate().map_err(serde::de::Error::custom)?;
        Ok(k)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum PhiRepr {
    Var { alpha: f64 },
    Benchmark { k: MonotoneStep },
    Lambda {
        #[serde(rename = "Lambda")]
        lambda: MonotoneStep,
    },
    Pinned { x0: f64, g: MonotoneStep },
    Regularized { inner: Box<PhiKernel> },
}

impl Serialize for PhiKernel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self.clone() {
            PhiKernel::Var { alpha } => PhiRepr::Var { alpha },
            PhiKernel::Benchmark { k } => PhiRepr::Benchmark { k },
            PhiKernel::Lambda { lambda } => PhiRepr::Lambda { lambda },
            PhiKernel::Pinned { x0, g } => PhiRepr::Pinned { x0, g },
            PhiKernel::Regularized(inner) => PhiRepr::Regularized { inner },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PhiKernel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let k = match PhiRepr::deserialize(d)? {
            PhiRepr::Var { alpha } => PhiKernel::Var { alpha },
            PhiRepr::Benchmark { k } => PhiKernel::Benchmark { k },
            PhiRepr::Lambda { lambda } => PhiKernel::Lambda { lambda },
            PhiRepr::Pinned { x0, g } => PhiKernel::Pinned { x0, g },
            PhiRepr::Regularized { inner } => PhiKernel::Regularized(inner),
        };
        k.validate().map_err(serde::de::Error::custom)?;
        Ok(k)
    }
}
