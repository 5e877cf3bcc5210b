//! Source-term specifications accepted on the command line and in config
//! files: `arctan`, `poly:<c0,c1,...>` or `table81`.

use std::fmt;
use std::str::FromStr;

use advest_core::SourceTerm;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    /// `f(x) = atan(x)`.
    Arctan,
    /// Global polynomial `c0 + c1 x + ...`.
    Poly(Vec<f64>),
    /// `x² + x + sin(2π x_i)` on element `[x_i, x_{i+1}]`.
    Table81,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SourceError {
    #[error("unknown source `{0}` (expected `arctan`, `poly:<c0,c1,...>` or `table81`)")]
    Unknown(String),
    #[error("`poly:` needs at least one coefficient")]
    Empty,
    #[error("coefficient {index} of `poly:` is not a finite number: `{text}`")]
    Coefficient { index: usize, text: String },
}

impl SourceSpec {
    pub fn term(&self) -> SourceTerm {
        match self {
            SourceSpec::Arctan => SourceTerm::Arctan,
            SourceSpec::Poly(c) => SourceTerm::Polynomial(c.clone()),
            SourceSpec::Table81 => SourceTerm::quadratic_with_sine_jumps(),
        }
    }
}

impl FromStr for SourceSpec {
    type Err = SourceError;

    fn from_str(s: &str) -> Result<Self, SourceError> {
        let s = s.trim();
        if let Some(list) = s.strip_prefix("poly:") {
            if list.trim().is_empty() {
                return Err(SourceError::Empty);
            }
            let coeffs = list
                .split(',')
                .enumerate()
                .map(|(index, text)| match text.trim().parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(SourceError::Coefficient {
                        index,
                        text: text.trim().to_string(),
                    }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(SourceSpec::Poly(coeffs));
        }
        match s {
            "arctan" => Ok(SourceSpec::Arctan),
            "table81" => Ok(SourceSpec::Table81),
            other => Err(SourceError::Unknown(other.to_string())),
        }
    }
}

impl fmt::Display for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceSpec::Arctan => f.write_str("arctan"),
            SourceSpec::Table81 => f.write_str("table81"),
            SourceSpec::Poly(c) => {
                let list: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                write!(f, "poly:{}", list.join(","))
            }
        }
    }
}
