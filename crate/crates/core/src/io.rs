//! JSON loading and saving, and super-level-set export.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::dist::{Atom, ContinuousCdf, ContinuousFamily, DiscreteDist};
use crate::engine::{linspace, PsiGrid};
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::kernel::PsiKernel;
use crate::measures::MeasureSpec;

#[derive(Debug, Clone)]
pub enum LoadedDist {
    Discrete(DiscreteDist),
    Continuous(ContinuousFamily, ContinuousCdf),
}

impl LoadedDist {
    pub fn discrete(self) -> Result<DiscreteDist> {
        match self {
            LoadedDist::Discrete(d) => Ok(d),
            LoadedDist::Continuous(fam, _) => Err(Error::InvalidArgument(format!(
                "expected a discrete distribution, got continuous {fam:?}"
            ))),
        }
    }
}

fn number(v: &Value, what: &str) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::MalformedJson(format!("{what} is not a float"))),
        Value::String(s) if s.eq_ignore_ascii_case("nan") => Err(Error::NanValue(what.to_string())),
        other => Err(Error::MalformedJson(format!("{what} must be a number, got {other}"))),
    }
}

/// Parses the distribution JSON formats:
/// `{"atoms":[{"x":..,"p":..},..]}` or `{"family":"uniform","a":..,"b":..}`.
/// A literal `"nan"` string in an atom is reported as a NaN value.
pub fn parse_distribution_str(text: &str) -> Result<LoadedDist> {
    let v: Value = serde_json::from_str(text)?;
    let obj = v.as_object().ok_or_else(|| Error::MalformedJson("expected a JSON object".into()))?;
    if obj.contains_key("family") {
        let fam: ContinuousFamily = serde_json::from_value(v.clone())?;
        let cdf = fam.build()?;
        return Ok(LoadedDist::Continuous(fam, cdf));
    }
    let atoms = obj
        .get("atoms")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::MalformedJson("missing \"atoms\" array".into()))?;
    let mut parsed = Vec::with_capacity(atoms.len());
    for (i, a) in atoms.iter().enumerate() {
        let x = number(a.get("x").unwrap_or(&Value::Null), &format!("atoms[{i}].x"))?;
        let p = number(a.get("p").unwrap_or(&Value::Null), &format!("atoms[{i}].p"))?;
        parsed.push(Atom { x, p });
    }
    Ok(LoadedDist::Discrete(DiscreteDist::new(&parsed)?))
}

pub fn parse_distribution_file(path: impl AsRef<Path>) -> Result<LoadedDist> {
    let path = path.as_ref();
    log::debug!("loading distribution from {}", path.display());
    parse_distribution_str(&fs::read_to_string(path)?)
}

pub fn save_distribution(path: impl AsRef<Path>, d: &DiscreteDist) -> Result<()> {
    write_json(path, d)
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Inline JSON when the argument looks like an object, otherwise a path.
fn json_arg(arg: &str) -> Result<String> {
    let t = arg.trim_start();
    if t.starts_with('{') {
        Ok(arg.to_string())
    } else {
        Ok(fs::read_to_string(arg)?)
    }
}

pub fn parse_measure(arg: &str) -> Result<MeasureSpec> {
    let spec: MeasureSpec = serde_json::from_str(&json_arg(arg)?)?;
    spec.build()?;
    Ok(spec)
}

/// A kernel JSON (`{"kind":..}`) or a serialized [`PsiGrid`].
pub fn parse_kernel(arg: &str) -> Result<PsiKernel> {
    let v: Value = serde_json::from_str(&json_arg(arg)?)?;
    let kernel = if v.get("kind").is_some() {
        serde_json::from_value::<PsiKernel>(v)?
    } else {
        PsiKernel::Grid(serde_json::from_value::<PsiGrid>(v)?)
    };
    kernel.validate()?;
    Ok(kernel)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuperlevelRow {
    pub x: f64,
    /// Largest probability with `ψ(x, p) ≥ t`; `None` when `ψ(x, 0) < t`.
    pub p_boundary: Option<f64>,
}

/// For each `x` (the grid nodes in range for a tabulated kernel, else
/// `resolution` evenly spaced points), the largest `p` on the probability
/// grid with `ψ(x, p) ≥ t`. The super-level set is the region under the
/// boundary.
pub fn emit_superlevel_set(psi: &PsiKernel, t: f64, x_range: (f64, f64), resolution: usize) -> Result<Vec<SuperlevelRow>> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!("resolution must be at least 2, got {resolution}")));
    }
    let (lo, hi) = x_range;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidArgument(format!("bad x-range [{lo}, {hi}]")));
    }
    let (xs, ps) = match psi {
        PsiKernel::Grid(g) => (
            g.x_grid().iter().copied().filter(|x| (lo..=hi).contains(x)).collect(),
            g.p_grid().to_vec(),
        ),
        _ => (linspace(lo, hi, resolution - 1), linspace(0.0, 1.0, resolution - 1)),
    };
    let level = ExtReal::Finite(t);
    Ok(xs
        .into_iter()
        .map(|x| {
            let p_boundary = ps.iter().take_while(|&&p| psi.eval(x, p) >= level).last().copied();
            SuperlevelRow { x, p_boundary }
        })
        .collect())
}

/// CSV with header `x,p_boundary,reachable`; unreachable columns read `none`.
pub fn write_superlevel_csv<W: Write>(mut out: W, rows: &[SuperlevelRow]) -> Result<()> {
    writeln!(out, "x,p_boundary,reachable")?;
    for r in rows {
        match r.p_boundary {
            Some(p) => writeln!(out, "{},{},true", r.x, p)?,
            None => writeln!(out, "{},none,false", r.x)?,
        }
    }
    Ok(())
}
