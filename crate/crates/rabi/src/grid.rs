//! Scan grids: a single value, a comma-separated list, or
//! `min:max:count[:lin|log]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GridError {
    #[error("empty grid specification")]
    Empty,
    #[error("cannot parse {0:?} as a number")]
    Number(String),
    #[error("grid needs count >= 2, got {0}")]
    Count(usize),
    #[error("grid needs min < max, got {min} and {max}")]
    Order { min: f64, max: f64 },
    #[error("log spacing needs min > 0, got {0}")]
    LogMin(f64),
    #[error("unknown spacing {0:?} (use lin or log)")]
    Spacing(String),
    #[error("expected min:max:count[:lin|log], got {0:?}")]
    Shape(String),
    #[error("grid values must be finite, got {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Lin,
    Log,
}

/// A resolved scan grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Grid {
    List { values: Vec<f64> },
    Range { min: f64, max: f64, count: usize, spacing: Spacing },
}

impl Grid {
    pub fn single(value: f64) -> Self {
        Grid::List { values: vec![value] }
    }

    pub fn range(min: f64, max: f64, count: usize, spacing: Spacing) -> Result<Self, GridError> {
        for v in [min, max] {
            if !v.is_finite() {
                return Err(GridError::NonFinite(v));
            }
        }
        if count < 2 {
            return Err(GridError::Count(count));
        }
        if !(min < max) {
            return Err(GridError::Order { min, max });
        }
        if spacing == Spacing::Log && !(min > 0.0) {
            return Err(GridError::LogMin(min));
        }
        Ok(Grid::Range { min, max, count, spacing })
    }

    pub fn values(&self) -> Vec<f64> {
        match *self {
            Grid::List { ref values } => values.clone(),
            Grid::Range { min, max, count, spacing } => (0..count)
                .map(|i| {
                    let s = i as f64 / (count - 1) as f64;
                    if i == count - 1 {
                        return max;
                    }
                    match spacing {
                        Spacing::Lin => min + s * (max - min),
                        Spacing::Log => (min.ln() + s * (max.ln() - min.ln())).exp(),
                    }
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Grid::List { values } => values.len(),
            Grid::Range { count, .. } => *count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn number(s: &str) -> Result<f64, GridError> {
    let v: f64 = s.trim().parse().map_err(|_| GridError::Number(s.trim().to_string()))?;
    if !v.is_finite() {
        return Err(GridError::NonFinite(v));
    }
    Ok(v)
}

impl FromStr for Grid {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(GridError::Empty);
        }
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            if !(3..=4).contains(&parts.len()) {
                return Err(GridError::Shape(s.to_string()));
            }
            let count: usize = parts[2].trim().parse().map_err(|_| GridError::Number(parts[2].to_string()))?;
            let spacing = match parts.get(3).map(|p| p.trim()) {
                None | Some("lin") => Spacing::Lin,
                Some("log") => Spacing::Log,
                Some(other) => return Err(GridError::Spacing(other.to_string())),
            };
            return Grid::range(number(parts[0])?, number(parts[1])?, count, spacing);
        }
        let values = s.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
        Ok(Grid::List { values })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grid::List { values } => {
                let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
            Grid::Range { min, max, count, spacing } => {
                let sp = match spacing {
                    Spacing::Lin => "lin",
                    Spacing::Log => "log",
                };
                write!(f, "{min}:{max}:{count}:{sp}")
            }
        }
    }
}
