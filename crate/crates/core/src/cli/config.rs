//! Run configuration: presets, flat `key=value` files and command-line flags,
//! layered in that order and validated into a [`RunConfig`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::diagnostics::{ExactSolution, RemainderEstimate, DEFAULT_GRID_POINTS};
use crate::nonlinearity::Nonlinearity;
use crate::solver::{SbvpProblem, ScanGrid};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid `{field}`: {msg}")]
    Invalid { field: String, msg: String },
    #[error("unknown preset `{0}` (known: {known})", known = PRESET_NAMES.join(", "))]
    UnknownPreset(String),
}

fn invalid(field: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutputKind {
    Coeffs,
    Solution,
    Error,
    Residual,
    Bound,
    Convergence,
}

impl OutputKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Coeffs => "coeffs",
            Self::Solution => "solution",
            Self::Error => "error",
            Self::Residual => "residual",
            Self::Bound => "bound",
            Self::Convergence => "convergence",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "coeffs" => Self::Coeffs,
            "solution" | "solution_table" => Self::Solution,
            "error" | "error_table" => Self::Error,
            "residual" | "residual_table" => Self::Residual,
            "bound" => Self::Bound,
            "convergence" => Self::Convergence,
            _ => return None,
        })
    }
}

impl fmt::Display for OutputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "text" => Some(Self::Text),
            "csv" => Some(Self::Csv),
            _ => None,
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            Self::Text => "txt",
            Self::Csv => "csv",
        }
    }
}

/// A named problem from the bundled examples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub alpha: f64,
    pub family: Nonlinearity,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub exact: Option<ExactSolution>,
}

pub const PRESET_NAMES: &[&str] = &[
    "isothermal-gas-sphere",
    "thermal-explosion",
    "oxygen-diffusion",
    "human-head",
    "human-head-case-two",
    "membrane-cap",
];

pub fn preset(name: &str) -> Option<Preset> {
    let p = |alpha, family, a, b, c, exact| Preset {
        name: PRESET_NAMES.iter().find(|n| **n == name).copied().unwrap_or(""),
        alpha,
        family,
        a,
        b,
        c,
        exact,
    };
    Some(match name {
        "isothermal-gas-sphere" => p(
            2.0,
            Nonlinearity::PowerLaw { gamma: 5.0 },
            1.0,
            0.0,
            3f64.sqrt() / 2.0,
            Some(ExactSolution::IsothermalGasSphere),
        ),
        "thermal-explosion" => p(
            1.0,
            Nonlinearity::ThermalExplosion { nu: -1.0 },
            1.0,
            0.0,
            0.0,
            Some(ExactSolution::ThermalExplosion),
        ),
        "oxygen-diffusion" => p(
            2.0,
            Nonlinearity::MichaelisMenten {
                delta: 0.76129,
                mu: 0.03119,
            },
            5.0,
            1.0,
            5.0,
            None,
        ),
        "human-head" => p(2.0, Nonlinearity::HeatSource { l: 1.0, kappa: 1.0 }, 1.0, 1.0, 0.0, None),
        "human-head-case-two" => p(2.0, Nonlinearity::HeatSource { l: 1.0, kappa: 1.0 }, 0.1, 1.0, 0.0, None),
        "membrane-cap" => p(3.0, Nonlinearity::MembraneCap, 1.0, 0.0, 1.0, None),
        _ => return None,
    })
}

/// A validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: SbvpProblem,
    pub order: usize,
    pub ladder: Option<Vec<usize>>,
    pub scan: ScanGrid,
    pub grid_points: usize,
    pub exact: Option<ExactSolution>,
    pub outputs: Vec<OutputKind>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub bound_mode: RemainderEstimate,
    pub parallel: bool,
}

pub const DEFAULT_ORDER: i64 = 12;

/// Unvalidated settings. Integers are kept signed so that negative input
/// reaches validation and is reported against its field name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub alpha: Option<f64>,
    pub family: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub order: Option<i64>,
    pub ladder: Option<Vec<i64>>,
    pub scan: Option<(f64, f64, i64)>,
    pub grid_points: Option<i64>,
    /// `Some(None)` explicitly disables a preset's exact solution.
    pub exact: Option<Option<ExactSolution>>,
    pub outputs: Option<Vec<OutputKind>>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
    pub bound_mode: Option<RemainderEstimate>,
    pub parallel: Option<bool>,
}

impl RawConfig {
    pub fn from_preset(name: &str) -> Result<Self, ConfigError> {
        let p = preset(name).ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))?;
        Ok(Self {
            alpha: Some(p.alpha),
            family: Some(p.family.family_name().to_string()),
            params: p.family.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            a: Some(p.a),
            b: Some(p.b),
            c: Some(p.c),
            exact: Some(p.exact),
            ..Self::default()
        })
    }

    /// Applies every setting present in `top` over `self`. Switching the
    /// family discards the parameters of the previous one.
    pub fn overlay(&mut self, top: RawConfig) {
        if let Some(family) = top.family {
            if self.family.as_deref() != Some(family.as_str()) {
                self.params.clear();
            }
            self.family = Some(family);
        }
        self.params.extend(top.params);
        macro_rules! take {
            ($($field:ident),*) => { $( if top.$field.is_some() { self.$field = top.$field; } )* };
        }
        take!(alpha, a, b, c, order, ladder, scan, grid_points, exact, outputs, output_path, format, bound_mode, parallel);
    }

    /// Parses the flat `key=value` format. Keys are the [`RunConfig`] field
    /// names plus the problem fields (`alpha`, `family`, `param.<name>`, `a`,
    /// `b`, `c`) and `preset`, which seeds the file's settings.
    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut base: Option<RawConfig> = None;
        let mut cfg = RawConfig::default();
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                msg: format!("expected key=value, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let syntax = |msg: String| ConfigError::Syntax { line, msg };
            let num = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| syntax(format!("{key}: `{v}` is not a number")))
            };
            let int = |v: &str| {
                v.parse::<i64>()
                    .map_err(|_| syntax(format!("{key}: `{v}` is not an integer")))
            };
            match key {
                "preset" => base = Some(RawConfig::from_preset(value)?),
                "alpha" => cfg.alpha = Some(num(value)?),
                "family" => cfg.family = Some(value.replace('-', "_")),
                "a" => cfg.a = Some(num(value)?),
                "b" => cfg.b = Some(num(value)?),
                "c" => cfg.c = Some(num(value)?),
                "order" => cfg.order = Some(int(value)?),
                "ladder" => cfg.ladder = Some(parse_list(value, int)?),
                "scan" => cfg.scan = Some(parse_scan(value).map_err(syntax)?),
                "grid_points" => cfg.grid_points = Some(int(value)?),
                "exact" => cfg.exact = Some(parse_exact(value).map_err(syntax)?),
                "outputs" => cfg.outputs = Some(parse_outputs(value).map_err(syntax)?),
                "output_path" => cfg.output_path = Some(PathBuf::from(value)),
                "format" => {
                    cfg.format = Some(Format::parse(value).ok_or_else(|| syntax(format!("unknown format `{value}`")))?)
                }
                "bound_mode" => cfg.bound_mode = Some(parse_bound_mode(value).map_err(syntax)?),
                "parallel" => {
                    cfg.parallel = Some(value.parse().map_err(|_| syntax(format!("parallel: `{value}` is not a boolean")))?)
                }
                k if k.starts_with("param.") && k.len() > "param.".len() => {
                    cfg.params.insert(k["param.".len()..].to_string(), num(value)?);
                }
                other => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: other.to_string(),
                    })
                }
            }
        }
        Ok(match base {
            Some(mut b) => {
                b.overlay(cfg);
                b
            }
            None => cfg,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_str(&text)
    }

    pub fn validate(&self) -> Result<RunConfig, ConfigError> {
        let family = self
            .family
            .as_deref()
            .ok_or_else(|| invalid("family", "no nonlinearity family given"))?;
        let allowed = Nonlinearity::param_names(family)
            .ok_or_else(|| invalid("family", format!("unknown family `{family}`")))?;
        if let Some(extra) = self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(invalid(
                &format!("param.{extra}"),
                format!("`{family}` takes parameters {allowed:?}"),
            ));
        }
        let f = Nonlinearity::from_params(family, |k| self.params.get(k).copied())
            .map_err(|e| invalid("param", e.to_string()))?;

        let alpha = self.alpha.ok_or_else(|| invalid("alpha", "missing"))?;
        if !(alpha >= 1.0) || !alpha.is_finite() {
            return Err(invalid("alpha", format!("must be finite and >= 1, got {alpha}")));
        }
        let a = self.a.ok_or_else(|| invalid("a", "missing"))?;
        let b = self.b.ok_or_else(|| invalid("b", "missing"))?;
        let c = self.c.ok_or_else(|| invalid("c", "missing"))?;
        let problem = SbvpProblem::new(alpha, f, a, b, c).map_err(|e| invalid("a", e.to_string()))?;

        let order = self.order.unwrap_or(DEFAULT_ORDER);
        if order < 2 {
            return Err(invalid("order", format!("must be >= 2, got {order}")));
        }
        let order = order as usize;

        let ladder = match &self.ladder {
            None => None,
            Some(l) => {
                if l.iter().any(|&n| n < 2 || n as usize > order) {
                    return Err(invalid("ladder", format!("orders must lie in [2, {order}]")));
                }
                let mut l: Vec<usize> = l.iter().map(|&n| n as usize).collect();
                l.sort_unstable();
                l.dedup();
                Some(l)
            }
        };

        let scan = match self.scan {
            None => ScanGrid::default(),
            Some((lo, hi, steps)) => {
                if steps < 2 {
                    return Err(invalid("scan", format!("steps must be >= 2, got {steps}")));
                }
                ScanGrid::new(lo, hi, steps as usize).map_err(|e| invalid("scan", e.to_string()))?
            }
        };

        let grid_points = self.grid_points.unwrap_or(DEFAULT_GRID_POINTS as i64);
        if grid_points < 11 {
            return Err(invalid("grid_points", format!("must be >= 11, got {grid_points}")));
        }

        let outputs = match &self.outputs {
            Some(o) if o.is_empty() => return Err(invalid("outputs", "nothing to emit")),
            Some(o) => {
                let mut o = o.clone();
                o.sort();
                o.dedup();
                o
            }
            None => vec![OutputKind::Coeffs, OutputKind::Solution],
        };
        let exact = self.exact.flatten();
        if exact.is_none() && outputs.contains(&OutputKind::Error) {
            return Err(invalid("exact", "the error table needs an exact solution"));
        }

        Ok(RunConfig {
            problem,
            order,
            ladder,
            scan,
            grid_points: grid_points as usize,
            exact,
            outputs,
            output_path: self.output_path.clone(),
            format: self.format.unwrap_or_default(),
            bound_mode: self.bound_mode.unwrap_or_default(),
            parallel: self.parallel.unwrap_or(false),
        })
    }
}

pub fn parse_list<T, E>(value: &str, item: impl Fn(&str) -> Result<T, E>) -> Result<Vec<T>, E> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect()
}

pub fn parse_scan(value: &str) -> Result<(f64, f64, i64), String> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    let [lo, hi, steps] = parts.as_slice() else {
        return Err(format!("scan: expected lo,hi,steps, got `{value}`"));
    };
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("scan: `{s}` is not a number"));
    let steps = steps
        .parse::<i64>()
        .map_err(|_| format!("scan: `{steps}` is not an integer"))?;
    Ok((num(lo)?, num(hi)?, steps))
}

pub fn parse_bc(value: &str) -> Result<(f64, f64, f64), String> {
    let parts = parse_list(value, |s| s.parse::<f64>().map_err(|_| format!("bc: `{s}` is not a number")))?;
    match parts.as_slice() {
        [a, b, c] => Ok((*a, *b, *c)),
        _ => Err(format!("bc: expected a,b,c, got `{value}`")),
    }
}

pub fn parse_exact(value: &str) -> Result<Option<ExactSolution>, String> {
    let normalized = value.replace('-', "_");
    if normalized == "none" {
        return Ok(None);
    }
    ExactSolution::from_name(&normalized)
        .map(Some)
        .ok_or_else(|| format!("unknown exact solution `{value}`"))
}

pub fn parse_outputs(value: &str) -> Result<Vec<OutputKind>, String> {
    parse_list(value, |s| OutputKind::parse(s).ok_or_else(|| format!("unknown output `{s}`")))
}

pub fn parse_bound_mode(value: &str) -> Result<RemainderEstimate, String> {
    match value.replace('-', "_").as_str() {
        "taylor_term" => Ok(RemainderEstimate::TaylorTerm),
        "derivative_max" => Ok(RemainderEstimate::DerivativeMax),
        _ => Err(format!("unknown bound mode `{value}`")),
    }
}
