//! Concrete risk functionals and the [`RiskMeasure`] interface.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::kernel::{inf_phi_eval, sup_psi_eval, PhiKernel, PsiKernel};
use crate::step::MonotoneStep;

/// A functional on finite distributions. Implementations are pure and must
/// be safe to call from several threads.
pub trait RiskMeasure: Send + Sync {
    fn name(&self) -> String;

    fn params(&self) -> Value {
        Value::Null
    }

    fn evaluate(&self, f: &DiscreteDist) -> ExtReal;
}

pub type SharedMeasure = Arc<dyn RiskMeasure>;

impl fmt::Debug for dyn RiskMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name(), self.params())
    }
}

impl<T: RiskMeasure + ?Sized> RiskMeasure for Arc<T> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn params(&self) -> Value {
        (**self).params()
    }

    fn evaluate(&self, f: &DiscreteDist) -> ExtReal {
        (**self).evaluate(f)
    }
}

fn check_open_unit(name: &'static str, a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(Error::ProbabilityRange { name, value: a, range: "(0, 1)" })
    }
}

/// Left quantile `sup{x : F(x) < α}`.
pub fn var(f: &DiscreteDist, alpha: f64) -> Result<f64> {
    check_open_unit("alpha", alpha)?;
    f.left_quantile(alpha)
}

/// `sup_{α∈[0,1]} {F^{-1}(α) − h(α)} = max_i {x_i − h(P_{i−1})}`.
pub fn benchmark_loss_var(f: &DiscreteDist, h: &MonotoneStep) -> Result<ExtReal> {
    h.validate_benchmark()?;
    Ok(benchmark_loss_unchecked(f, h))
}

fn benchmark_loss_unchecked(f: &DiscreteDist, h: &MonotoneStep) -> ExtReal {
    let xs = f.support();
    (0..xs.len())
        .map(|i| ExtReal::Finite(xs[i]).sub(h.eval(f.level_before(i))))
        .fold(ExtReal::NegInf, ExtReal::max)
}

/// `sup{x : F(x) < Λ(x)}`, `−∞` when the set is empty.
pub fn lambda_quantile(f: &DiscreteDist, lambda: &MonotoneStep) -> Result<ExtReal> {
    lambda.validate_lambda(false)?;
    Ok(lambda_quantile_unchecked(f, lambda))
}

fn lambda_quantile_unchecked(f: &DiscreteDist, lambda: &MonotoneStep) -> ExtReal {
    // F − Λ is increasing, so {F < Λ} is a left interval; both sides are
    // constant between merged breakpoints and the first z with F(z) ≥ Λ(z)
    // is its right end.
    if ExtReal::Finite(0.0) >= lambda.first_value() {
        return ExtReal::NegInf;
    }
    let mut zs: Vec<f64> = f.support().iter().chain(lambda.breakpoints()).copied().collect();
    zs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    zs.dedup();
    for z in zs {
        if ExtReal::Finite(f.cdf(z)) >= lambda.eval(z) {
            return ExtReal::Finite(z);
        }
    }
    // F = 1 from the top atom on, and Λ ≤ 1
    ExtReal::Finite(f.max_support())
}

/// Both quantile forms of the Λ-quantile,
/// `sup_x {F^{-1}(Λ(x)) ∧ x}` and `inf_x {F^{-1}(Λ(x)) ∨ x}`.
/// `Λ` must take values in `(0, 1]`.
pub fn lambda_quantile_dual(f: &DiscreteDist, lambda: &MonotoneStep) -> Result<(ExtReal, ExtReal)> {
    lambda.validate_lambda(true)?;
    // On [t_j, t_{j+1}) the composite q_j = F^{-1}(Λ_j) is constant: the sup
    // of q_j ∧ x tends to q_j ∧ t_{j+1}, the inf of q_j ∨ x is q_j ∨ t_j.
    let ts = lambda.breakpoints();
    let mut sup_form = ExtReal::NegInf;
    let mut inf_form = ExtReal::PosInf;
    for (j, v) in lambda.values().iter().enumerate() {
        let level = v.finite().expect("validated Lambda is finite");
        let q = ExtReal::Finite(f.left_quantile(level)?);
        let left = if j == 0 { ExtReal::NegInf } else { ExtReal::Finite(ts[j - 1]) };
        let right = ts.get(j).map_or(ExtReal::PosInf, |&t| ExtReal::Finite(t));
        sup_form = sup_form.max(q.min(right));
        inf_form = inf_form.min(q.max(left));
    }
    Ok((sup_form, inf_form))
}

/// `1/(1−α) ∫_α^1 F^{-1}(β) dβ`, integrating the step quantile exactly.
pub fn expected_shortfall(f: &DiscreteDist, alpha: f64) -> Result<f64> {
    check_open_unit("alpha", alpha)?;
    Ok(expected_shortfall_unchecked(f, alpha))
}

fn expected_shortfall_unchecked(f: &DiscreteDist, alpha: f64) -> f64 {
    let xs = f.support();
    let levels = f.levels();
    let total: f64 = (0..xs.len())
        .map(|i| {
            let width = levels[i] - f.level_before(i).max(alpha);
            if width > 0.0 {
                xs[i] * width
            } else {
                0.0
            }
        })
        .sum();
    total / (1.0 - alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueAtRisk {
    alpha: f64,
}

impl ValueAtRisk {
    pub fn new(alpha: f64) -> Result<Self> {
        check_open_unit("alpha", alpha)?;
        Ok(ValueAtRisk { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kernel(&self) -> PsiKernel {
        PsiKernel::Var { alpha: self.alpha }
    }
}

impl RiskMeasure for ValueAtRisk {
    fn name(&self) -> String {
        "var".into()
    }

    fn params(&self) -> Value {
        json!({ "alpha": self.alpha })
    }

    fn evaluate(&self, f: &DiscreteDist) -> ExtReal {
        ExtReal::Finite(f.left_quantile(self.alpha).expect("alpha validated"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkLossVar {
    h: MonotoneStep,
}

impl BenchmarkLossVar {
    pub fn new(h: MonotoneStep) -> Result<Self> {
        h.validate_benchmark()?;
        Ok(BenchmarkLossVar { h })
    }

    pub fn benchmark(&self) -> &MonotoneStep {
        &self.h
    }

    pub fn kernel(&self) -> PsiKernel {
        PsiKernel::BenchmarkLoss { h: self.h.clone() }
    }
}

impl RiskMeasure for BenchmarkLossVar {
    fn name(&self) -> String {
        "benchmark_loss".into()
    }

    fn params(&self) -> Value {
        json!({ "h": self.h })
    }

    fn evaluate(&self, f: &DiscreteDist) -> ExtReal {
        benchmark_loss_unchecked(f, &self.h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaQuantile {
    lambda: MonotoneStep,
}

impl LambdaQuantile {
    pub fn new(lambda: MonotoneStep) -> Result<Self> {
        lambda.validate_lambda(false)?;
        Ok(LambdaQuantile { lambda })
    }

    pub fn lambda(&self) -> &MonotoneStep {
        &self.lambda
    }

    pub fn kernel(&self) -> PsiKernel {
        PsiKernel::Lambda { lambda: self.lambda.clone() }
    }
}

impl RiskMeasure for LambdaQuantile {
    fn name(&self) -> String {
        "lambda".into()
    }

    fn params(&self) -> Value {
        json!({ "Lambda": self.lambda })
    }

    fn evaluate(&self, f: &DiscreteDist) -> ExtReal {
        lambda_quantile_unchecked(f, &self.lambda)
    }
}

/// FSD-consistent, but neither max- nor min-stable.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedShortfall {
    alpha: f64,
}

impl ExpectedShortfall {
    pub fn new(alpha: f64) -> Result<Self> {
        check_open_unit("alpha", alpha)?;
        Ok(ExpectedShortfall { alpha })
    }
}

impl RiskMeasure for ExpectedShortfall {
    fn name(&self) -> String {
        "es".into()
    }

    fn params(&self) -> Value {
        json!({ "alpha": self.alpha })
    }

    fn evaluate(&self, f: &DiscreteDist) -> ExtReal {
        ExtReal::Finite(expected_shortfall_unchecked(f, self.alpha))
    }
}

/// `F ↦ sup_x ψ(x, F(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupKernelMeasure {
    kernel: PsiKernel,
}

impl SupKernelMeasure {
    pub fn new(kernel: PsiKernel) -> Result<Self> {
        kernel.validate()?;
        Ok(SupKernelMeasure { kernel })
    }

    pub fn kernel(&self) -> &PsiKernel {
        &self.kernel
    }
}

impl RiskMeasure for SupKernelMeasure {
    fn name(&self) -> String {
        "sup_kernel".into()
    }

    fn params(&self) -> Value {
        json!({ "kernel": self.kernel })
    }

    fn evaluate(&self, f: &DiscreteDist) -> ExtReal {
        sup_psi_eval(&self.kernel, f)
    }
}

/// `F ↦ inf_x φ(x, F(x−))`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfKernelMeasure {
    kernel: PhiKernel,
}

impl InfKernelMeasure {
    pub fn new(kernel: PhiKernel) -> Result<Self> {
        kernel.validate()?;
        Ok(InfKernelMeasure { kernel })
    }
}

impl RiskMeasure for InfKernelMeasure {
    fn name(&self) -> String {
        "inf_kernel".into()
    }

    fn params(&self) -> Value {
        json!({ "kernel": self.kernel })
    }

    fn evaluate(&self, f: &DiscreteDist) -> ExtReal {
        inf_phi_eval(&self.kernel, f)
    }
}

/// `F ↦ f(ρ(F))` for a strictly increasing `f`; infinities pass through.
#[derive(Clone)]
pub struct Transformed {
    inner: SharedMeasure,
    map: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    label: String,
}

impl RiskMeasure for Transformed {
    fn name(&self) -> String {
        format!("{}∘{}", self.label, self.inner.name())
    }

    fn params(&self) -> Value {
        json!({ "map": self.label, "inner": { "name": self.inner.name(), "params": self.inner.params() } })
    }

    fn evaluate(&self, f: &DiscreteDist) -> ExtReal {
        self.inner.evaluate(f).map_finite(|v| (self.map)(v))
    }
}

/// Composes `ρ` with `f` once `f` is seen to be finite and strictly
/// increasing on `probes`.
pub fn transform_measure(
    inner: SharedMeasure,
    map: impl Fn(f64) -> f64 + Send + Sync + 'static,
    label: impl Into<String>,
    probes: &[f64],
) -> Result<Transformed> {
    let mut probes = probes.to_vec();
    if probes.iter().any(|p| p.is_nan()) {
        return Err(Error::NanValue("transform probe".into()));
    }
    probes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    probes.dedup();
    for w in probes.windows(2) {
        let (fa, fb) = (map(w[0]), map(w[1]));
        if !fa.is_finite() || !fb.is_finite() || fa >= fb {
            return Err(Error::NotStrictlyIncreasing { a: w[0], b: w[1], fa, fb });
        }
    }
    Ok(Transformed { inner, map: Arc::new(map), label: label.into() })
}

/// 2001 evenly spaced points on `[-100, 100]`.
pub fn default_probes() -> Vec<f64> {
    (0..=2000).map(|i| -100.0 + 0.1 * i as f64).collect()
}

/// JSON description of a measure, tagged by `"kind"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    Var {
        alpha: f64,
    },
    BenchmarkLoss {
        h: MonotoneStep,
    },
    Lambda {
        #[serde(rename = "Lambda")]
        lambda: MonotoneStep,
    },
    Pinned {
        x0: f64,
        g: MonotoneStep,
    },
    Es {
        alpha: f64,
    },
    SupKernel {
        kernel: PsiKernel,
    },
    InfKernel {
        kernel: PhiKernel,
    },
    /// `scale · ρ + shift`, `scale > 0`.
    Affine {
        scale: f64,
        shift: f64,
        inner: Box<MeasureSpec>,
    },
}

impl MeasureSpec {
    pub fn build(&self) -> Result<SharedMeasure> {
        Ok(match self {
            MeasureSpec::Var { alpha } => Arc::new(ValueAtRisk::new(*alpha)?),
            MeasureSpec::BenchmarkLoss { h } => Arc::new(BenchmarkLossVar::new(h.clone())?),
            MeasureSpec::Lambda { lambda } => Arc::new(LambdaQuantile::new(lambda.clone())?),
            MeasureSpec::Pinned { x0, g } => Arc::new(SupKernelMeasure::new(PsiKernel::pinned(*x0, g.clone())?)?),
            MeasureSpec::Es { alpha } => Arc::new(ExpectedShortfall::new(*alpha)?),
            MeasureSpec::SupKernel { kernel } => Arc::new(SupKernelMeasure::new(kernel.clone())?),
            MeasureSpec::InfKernel { kernel } => Arc::new(InfKernelMeasure::new(kernel.clone())?),
            MeasureSpec::Affine { scale, shift, inner } => {
                if !(scale.is_finite() && *scale > 0.0 && shift.is_finite()) {
                    return Err(Error::InvalidArgument(format!(
                        "affine map needs finite scale > 0 and finite shift, got ({scale}, {shift})"
                    )));
                }
                let (a, b) = (*scale, *shift);
                Arc::new(transform_measure(inner.build()?, move |t| a * t + b, format!("{a}t+{b}"), &default_probes())?)
            }
        })
    }
}
