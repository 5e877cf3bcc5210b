//! Run configuration: a flat `key = value` text format with `#` comments,
//! plus command-line overrides. Lists are comma separated.
//!
//! ```text
//! method = dg
//! k = 1
//! elements = 4,16,64
//! beta = 1e-2,1,1e2
//! source = table81
//! ```

use std::fmt;
use std::path::PathBuf;

use advest_core::problem::POINCARE_CONSTANT;
use advest_core::{AdvectionProblem, Method, Mesh1D};
use thiserror::Error;

use crate::presets::Preset;
use crate::source::SourceSpec;

/// Keys understood by [`RunConfig::set`].
pub const FIELDS: &[&str] = &[
    "method", "k", "kprime", "elements", "beta", "source", "grading", "domain", "poincare",
    "quad_order", "out", "preset",
];

/// Where a configuration value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    CommandLine,
    /// Cross-field checks after all values are read.
    Validation,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::CommandLine => f.write_str("command line"),
            Origin::Validation => f.write_str("config"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("{origin}: field `{field}`: {message}")]
    Field {
        origin: Origin,
        field: String,
        message: String,
    },
}

impl ConfigError {
    fn field(origin: Origin, field: &str, message: impl Into<String>) -> Self {
        ConfigError::Field {
            origin,
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub k: usize,
    /// Reconstruction degree; `None` means `k`.
    pub kprime: Option<usize>,
    pub elements: Vec<usize>,
    pub betas: Vec<f64>,
    pub source: SourceSpec,
    /// Ratio `h_{i+1} / h_i` of the geometric mesh; 1 is uniform.
    pub grading: f64,
    pub domain: (f64, f64),
    /// Constant in the oscillation indicator.
    pub poincare: f64,
    /// Gauss points per element for analytic data; `None` keeps the default.
    pub quad_order: Option<usize>,
    pub out: Option<PathBuf>,
    pub preset: Option<Preset>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            method: Method::Pg2,
            k: 1,
            kprime: None,
            elements: vec![4, 16, 64],
            betas: vec![1.0],
            source: SourceSpec::Arctan,
            grading: 1.0,
            domain: (0.0, 1.0),
            poincare: POINCARE_CONSTANT,
            quad_order: None,
            out: None,
            preset: None,
        }
    }
}

fn parse_list<T, E: fmt::Display>(value: &str, parse: impl Fn(&str) -> Result<T, E>) -> Result<Vec<T>, String> {
    let items = value
        .split(',')
        .map(|s| parse(s.trim()).map_err(|e| format!("`{}`: {e}", s.trim())))
        .collect::<Result<Vec<T>, String>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        Ok(v) => Err(format!("must be positive and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn format_list<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Parses a config file on top of the defaults and validates it.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = RunConfig::default();
        config.apply_text(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Applies every `key = value` line of `text`; later lines win.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                text: raw.trim().to_string(),
            })?;
            self.set_from(Origin::Line(line), key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Applies one override given on the command line.
    pub fn set(&mut self, field: &str, value: &str) -> Result<(), ConfigError> {
        self.set_from(Origin::CommandLine, field, value.trim())
    }

    fn set_from(&mut self, origin: Origin, field: &str, value: &str) -> Result<(), ConfigError> {
        let fail = |message: String| ConfigError::field(origin, field, message);
        match field {
            "method" => self.method = value.parse().map_err(|e: advest_core::Error| fail(e.to_string()))?,
            "k" => self.k = value.parse().map_err(|e: std::num::ParseIntError| fail(e.to_string()))?,
            "kprime" => {
                self.kprime = match value {
                    "" | "auto" => None,
                    v => Some(v.parse().map_err(|e: std::num::ParseIntError| fail(e.to_string()))?),
                }
            }
            "elements" => self.elements = parse_list(value, parse_count).map_err(fail)?,
            "beta" => {
                self.betas = parse_list(value, |s| match s.parse::<f64>() {
                    Ok(v) if v.is_finite() && v != 0.0 => Ok(v),
                    Ok(v) => Err(format!("velocity must be nonzero and finite, got {v}")),
                    Err(e) => Err(e.to_string()),
                })
                .map_err(fail)?
            }
            "source" => self.source = value.parse().map_err(|e: crate::source::SourceError| fail(e.to_string()))?,
            "grading" => self.grading = parse_positive(value).map_err(fail)?,
            "domain" => {
                let ends = parse_list(value, |s| s.parse::<f64>().map_err(|e| e.to_string())).map_err(fail)?;
                match ends[..] {
                    [a, b] if a.is_finite() && b.is_finite() && a < b => self.domain = (a, b),
                    _ => return Err(fail("expected two finite numbers `a,b` with a < b".into())),
                }
            }
            "poincare" => self.poincare = parse_positive(value).map_err(fail)?,
            "quad_order" => self.quad_order = Some(parse_count(value).map_err(fail)?),
            "out" => self.out = if value.is_empty() { None } else { Some(PathBuf::from(value)) },
            "preset" => {
                self.preset = match value {
                    "none" => None,
                    v => Some(v.parse().map_err(fail)?),
                }
            }
            _ => {
                return Err(fail(format!("unknown field (known fields: {})", FIELDS.join(", "))));
            }
        }
        Ok(())
    }

    /// Cross-field checks: the method's minimum degree and the degree limits.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.method
            .check_degree(self.k)
            .map_err(|e| ConfigError::field(Origin::Validation, "k", e.to_string()))?;
        if self.kprime() + 3 > advest_core::quadrature::MAX_POINTS {
            return Err(ConfigError::field(Origin::Validation, "kprime", "degree too large"));
        }
        Ok(())
    }

    pub fn kprime(&self) -> usize {
        self.kprime.unwrap_or(self.k)
    }

    pub fn problem(&self, beta: f64) -> advest_core::Result<AdvectionProblem> {
        let problem = AdvectionProblem::new(beta, self.source.term())?.with_poincare_constant(self.poincare)?;
        match self.quad_order {
            Some(q) => problem.with_quad_order(q),
            None => Ok(problem),
        }
    }

    pub fn mesh(&self, n: usize) -> advest_core::Result<Mesh1D> {
        Mesh1D::graded(self.domain.0, self.domain.1, n, self.grading)
    }

    /// Serializes to the text format; `parse(to_text())` gives back `self`.
    pub fn to_text(&self) -> String {
        let mut lines = vec![
            format!("method = {}", self.method),
            format!("k = {}", self.k),
            format!("kprime = {}", self.kprime.map_or("auto".to_string(), |v| v.to_string())),
            format!("elements = {}", format_list(&self.elements)),
            format!("beta = {}", format_list(&self.betas)),
            format!("source = {}", self.source),
            format!("grading = {}", self.grading),
            format!("domain = {},{}", self.domain.0, self.domain.1),
            format!("poincare = {}", self.poincare),
        ];
        if let Some(q) = self.quad_order {
            lines.push(format!("quad_order = {q}"));
        }
        if let Some(out) = &self.out {
            lines.push(format!("out = {}", out.display()));
        }
        lines.push(format!("preset = {}", self.preset.map_or("none".to_string(), |p| p.to_string())));
        lines.join("\n") + "\n"
    }
}
