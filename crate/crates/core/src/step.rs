//! Monotone right-continuous step functions with an optional linear drift.
//!
//! One type covers the three curve roles: benchmark `h` on `[0, 1]`
//! (increasing, `h(1) = +∞`), probability curve `Λ` on `ℝ` (decreasing into
//! `[0, 1]`), and the decreasing `g` of a pinned kernel. Pieces are
//! half-open `[t_i, t_{i+1})`, so an increasing curve stores its upper
//! one-sided limit at a jump (the usc version) and a decreasing one stores the
//! lower.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal::ExtReal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "inc")]
    Increasing,
    #[serde(rename = "dec")]
    Decreasing,
}

/// JSON form: `{"breakpoints":[..],"values":[..],"direction":"inc|dec","at_one":"inf"|number}`,
/// plus an optional `"slope"` for a linear term `slope · x` added to every piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSpec {
    #[serde(default)]
    pub breakpoints: Vec<f64>,
    pub values: Vec<ExtReal>,
    pub direction: Direction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_one: Option<ExtReal>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub slope: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepSpec", into = "StepSpec")]
pub struct MonotoneStep {
    direction: Direction,
    breakpoints: Vec<f64>,
    values: Vec<ExtReal>,
    slope: f64,
    at_one: Option<ExtReal>,
}

impl TryFrom<StepSpec> for MonotoneStep {
    type Error = Error;

    fn try_from(s: StepSpec) -> Result<Self> {
        MonotoneStep::new(s.direction, s.breakpoints, s.values, s.slope, s.at_one)
    }
}

impl From<MonotoneStep> for StepSpec {
    fn from(m: MonotoneStep) -> Self {
        StepSpec {
            breakpoints: m.breakpoints,
            values: m.values,
            direction: m.direction,
            at_one: m.at_one,
            slope: m.slope,
        }
    }
}

impl MonotoneStep {
    pub fn new(
        direction: Direction,
        breakpoints: Vec<f64>,
        values: Vec<ExtReal>,
        slope: f64,
        at_one: Option<ExtReal>,
    ) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidStep(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) || !slope.is_finite() {
            return Err(Error::NanValue("step breakpoints or slope".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidStep("breakpoints must be strictly increasing".into()));
        }
        let ordered = |a: ExtReal, b: ExtReal| match direction {
            Direction::Increasing => a <= b,
            Direction::Decreasing => a >= b,
        };
        if values.windows(2).any(|w| !ordered(w[0], w[1])) {
            return Err(Error::InvalidStep(format!("values are not monotone ({direction:?})")));
        }
        match direction {
            Direction::Increasing if slope < 0.0 => {
                return Err(Error::InvalidStep("increasing step needs slope >= 0".into()))
            }
            Direction::Decreasing if slope > 0.0 => {
                return Err(Error::InvalidStep("decreasing step needs slope <= 0".into()))
            }
            _ => {}
        }
        let step = MonotoneStep { direction, breakpoints, values, slope, at_one: None };
        if let Some(v) = at_one {
            let below = step.eval(1.0);
            if !ordered(below, v) {
                return Err(Error::InvalidStep(format!(
                    "at_one = {v} breaks monotonicity against {below}"
                )));
            }
        }
        Ok(MonotoneStep { at_one, ..step })
    }

    pub fn constant(v: f64, direction: Direction) -> Result<Self> {
        Self::new(direction, vec![], vec![ExtReal::try_from_f64(v)?], 0.0, None)
    }

    /// Decreasing step: `values[0]` on `(−∞, t_1)`, `values[i]` on `[t_i, t_{i+1})`.
    pub fn decreasing(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let values = values.into_iter().map(ExtReal::try_from_f64).collect::<Result<_>>()?;
        Self::new(Direction::Decreasing, breakpoints, values, 0.0, None)
    }

    /// Increasing step with explicit extended values.
    pub fn increasing(breakpoints: Vec<f64>, values: Vec<ExtReal>, at_one: Option<ExtReal>) -> Result<Self> {
        Self::new(Direction::Increasing, breakpoints, values, 0.0, at_one)
    }

    /// `intercept + slope · p` on `[0, 1)` and `+∞` at 1.
    pub fn affine_benchmark(intercept: f64, slope: f64) -> Result<Self> {
        Self::new(
            Direction::Increasing,
            vec![],
            vec![ExtReal::try_from_f64(intercept)?],
            slope,
            Some(ExtReal::PosInf),
        )
    }

    /// `∞ · 1{p ≥ a}`.
    pub fn jump_to_infinity(a: f64) -> Result<Self> {
        Self::increasing(vec![a], vec![ExtReal::Finite(0.0), ExtReal::PosInf], Some(ExtReal::PosInf))
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    fn piece(&self, i: usize, x: f64) -> ExtReal {
        if self.slope == 0.0 {
            self.values[i]
        } else {
            self.values[i].map_finite(|v| v + self.slope * x)
        }
    }

    pub fn eval(&self, x: f64) -> ExtReal {
        if x == 1.0 {
            if let Some(v) = self.at_one {
                return v;
            }
        }
        let i = self.breakpoints.partition_point(|&t| t <= x);
        self.piece(i, x)
    }

    /// Left limit `lim_{t↑x}`.
    pub fn eval_left(&self, x: f64) -> ExtReal {
        let i = self.breakpoints.partition_point(|&t| t < x);
        self.piece(i, x)
    }

    /// Supremum of the curve over `ℝ` (value of the leftmost piece for a
    /// decreasing flat curve).
    pub fn first_value(&self) -> ExtReal {
        self.values[0]
    }

    /// For a flat decreasing curve `Λ`: the right end `s` of the left
    /// interval `{t : Λ(t) > p}`. `NegInf` when the set is empty, `PosInf`
    /// when it is all of `ℝ`. Dually `{t : Λ(t) ≤ p}` is `[s, ∞)`.
    pub fn upper_cut(&self, p: f64) -> ExtReal {
        debug_assert!(self.direction == Direction::Decreasing && self.slope == 0.0);
        let p = ExtReal::Finite(p);
        match self.values.iter().position(|&v| v <= p) {
            None => ExtReal::PosInf,
            Some(0) => ExtReal::NegInf,
            Some(j) => ExtReal::Finite(self.breakpoints[j - 1]),
        }
    }

    /// Checks the benchmark role: increasing, `h(0)` finite, `h(1) = +∞`.
    pub fn validate_benchmark(&self) -> Result<()> {
        if self.direction != Direction::Increasing {
            return Err(Error::InvalidStep("benchmark h must be increasing".into()));
        }
        if !self.eval(0.0).is_finite() {
            return Err(Error::InvalidStep("benchmark h(0) must be finite".into()));
        }
        if self.eval(1.0) != ExtReal::PosInf {
            return Err(Error::InvalidStep(format!(
                "benchmark h(1) must be +inf, got {}",
                self.eval(1.0)
            )));
        }
        Ok(())
    }

    /// Checks the Λ role: flat decreasing with values in `[0, 1]`, or in
    /// `(0, 1]` when `positive` is set.
    pub fn validate_lambda(&self, positive: bool) -> Result<()> {
        if self.direction != Direction::Decreasing || self.slope != 0.0 {
            return Err(Error::InvalidStep("Lambda must be a flat decreasing step".into()));
        }
        for v in &self.values {
            let ok = match v.finite() {
                Some(p) if positive => p > 0.0 && p <= 1.0,
                Some(p) => (0.0..=1.0).contains(&p),
                None => false,
            };
            if !ok {
                let range = if positive { "(0, 1]" } else { "[0, 1]" };
                return Err(Error::InvalidStep(format!("Lambda value {v} outside {range}")));
            }
        }
        Ok(())
    }

    /// Checks the pinned-kernel role: decreasing and finite on `[0, 1]`.
    pub fn validate_pinned(&self) -> Result<()> {
        if self.direction != Direction::Decreasing {
            return Err(Error::InvalidStep("g must be decreasing".into()));
        }
        let lo = self.breakpoints.partition_point(|&t| t <= 0.0);
        let hi = self.breakpoints.partition_point(|&t| t <= 1.0);
        if self.values[lo..=hi].iter().any(|v| !v.is_finite()) || !self.eval(1.0).is_finite() {
            return Err(Error::InvalidStep("g must be finite on [0, 1]".into()));
        }
        Ok(())
    }
}
