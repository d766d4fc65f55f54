//! One TOML file holds both the system definition and the run knobs.
//!
//! Numeric entries may be integers or quoted exact strings (`"3/4"`,
//! `"0.25"`, `"2.5e-3"`); bare TOML floats are accepted in float mode but
//! rejected in rational mode, where silently rounding an input would defeat
//! the point of exact arithmetic.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use kneading_core::system::Branch;
use kneading_core::{ArithmeticMode, Scalar, System};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    F64,
    Rational,
}

/// A numeric config entry before mode-specific interpretation.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
    Str(String),
}

impl Value {
    pub fn to_scalar<K: Scalar>(&self, field: &str) -> Result<K> {
        match self {
            Value::Int(n) => Ok(K::from_int(*n)),
            Value::Float(x) => {
                if K::MODE == ArithmeticMode::Rational {
                    bail!(
                        "field `{field}`: bare float {x} in rational mode; \
                         quote it as an exact string (\"p/q\" or a decimal)"
                    );
                }
                Ok(K::from_f64_approx(*x))
            }
            Value::Str(s) => {
                parse_exact::<K>(s).with_context(|| format!("field `{field}` = {s:?}"))
            }
        }
    }
}

/// Parse `"p/q"`, a plain decimal, or scientific notation exactly.
pub fn parse_exact<K: Scalar>(s: &str) -> Result<K> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().context("numerator")?;
        let q: i64 = q.trim().parse().context("denominator")?;
        if q == 0 {
            bail!("zero denominator");
        }
        return Ok(K::from_ratio(p, q));
    }
    let (mant, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().context("exponent")?),
        None => (s, 0),
    };
    let neg = mant.starts_with('-');
    let mant = mant.trim_start_matches(['+', '-']);
    let (int_part, frac_part) = match mant.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mant, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        bail!("not a number");
    }
    if digits.len() > 18 {
        bail!("more than 18 significant digits; use \"p/q\" form");
    }
    let mut num: i64 = digits.parse()?;
    let mut scale = frac_part.len() as i32 - exp;
    let mut den: i64 = 1;
    while scale > 0 {
        den = den.checked_mul(10).context("denominator overflow; use \"p/q\" form")?;
        scale -= 1;
    }
    while scale < 0 {
        num = num.checked_mul(10).context("numerator overflow; use \"p/q\" form")?;
        scale += 1;
    }
    Ok(K::from_ratio(if neg { -num } else { num }, den))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub system: SystemSpec,
    #[serde(default)]
    pub run: RunSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub a: Value,
    pub b: Value,
    #[serde(default)]
    pub cuts: Vec<Value>,
    #[serde(rename = "branch")]
    pub branches: Vec<BranchSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchSpec {
    pub slope: Value,
    pub intercept: Value,
    pub weight: Value,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub mode: Option<Mode>,
    pub truncation: Option<usize>,
    pub identity_degree: Option<usize>,
    pub depth_cap: Option<usize>,
    pub cylinder_cap: Option<usize>,
    pub tolerance: Option<f64>,
    pub tail_tolerance: Option<f64>,
    pub critical_tolerance: Option<f64>,
    pub output_dir: Option<String>,
}

/// Validated run knobs with defaults filled in.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    /// Series truncation degree `N` for kneading/pressure work.
    pub truncation: usize,
    /// Degree for the identity suite (`N_id ≤ N`).
    pub identity_degree: usize,
    /// Maximum cylinder depth for census-backed checks and listings.
    pub depth_cap: usize,
    /// Hard cap on enumerated cylinders per walk.
    pub cylinder_cap: usize,
    /// Identity-residual tolerance in float mode (rational mode demands 0).
    pub tolerance: f64,
    /// Budget for the unseen series tail when evaluating at a concrete `t`.
    pub tail_tolerance: f64,
    /// Accuracy budget for extrapolated critical-parameter quantities.
    pub critical_tolerance: f64,
    pub output_dir: PathBuf,
}

pub fn load(path: &Path) -> Result<(ConfigFile, RunConfig)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let file: ConfigFile =
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let run = &file.run;
    let cfg = RunConfig {
        mode: run.mode.unwrap_or(Mode::F64),
        truncation: run.truncation.unwrap_or(64),
        identity_degree: run.identity_degree.unwrap_or(12),
        depth_cap: run.depth_cap.unwrap_or(24),
        cylinder_cap: run.cylinder_cap.unwrap_or(10_000_000),
        tolerance: run.tolerance.unwrap_or(1e-12),
        tail_tolerance: run.tail_tolerance.unwrap_or(1e-9),
        critical_tolerance: run.critical_tolerance.unwrap_or(1e-6),
        output_dir: PathBuf::from(run.output_dir.as_deref().unwrap_or("out")),
    };
    if cfg.truncation == 0 || cfg.identity_degree == 0 || cfg.depth_cap == 0 {
        bail!("truncation, identity_degree and depth_cap must be positive");
    }
    if cfg.identity_degree > cfg.truncation {
        bail!(
            "identity_degree ({}) must not exceed truncation ({})",
            cfg.identity_degree,
            cfg.truncation
        );
    }
    if cfg.tolerance <= 0.0 || cfg.tail_tolerance <= 0.0 || cfg.critical_tolerance <= 0.0 {
        bail!("tolerances must be positive");
    }
    Ok((file, cfg))
}

pub fn build_system<K: Scalar>(spec: &SystemSpec) -> Result<System<K>> {
    let a = spec.a.to_scalar::<K>("system.a")?;
    let b = spec.b.to_scalar::<K>("system.b")?;
    let cuts = spec
        .cuts
        .iter()
        .enumerate()
        .map(|(i, v)| v.to_scalar::<K>(&format!("system.cuts[{i}]")))
        .collect::<Result<Vec<K>>>()?;
    let branches = spec
        .branches
        .iter()
        .enumerate()
        .map(|(i, br)| {
            Ok(Branch::new(
                br.slope.to_scalar::<K>(&format!("branch[{i}].slope"))?,
                br.intercept.to_scalar::<K>(&format!("branch[{i}].intercept"))?,
                br.weight.to_scalar::<K>(&format!("branch[{i}].weight"))?,
            ))
        })
        .collect::<Result<Vec<Branch<K>>>>()?;
    System::new(a, b, cuts, branches).map_err(|e| anyhow::anyhow!("invalid system: {e}"))
}
