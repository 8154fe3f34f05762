//! Flat `key = value` configuration and observable specs.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix, CVector};
use crate::quantum::{
    bloch_observable, gellmann, observable_from_matrix, pauli, pauli_diagonal_combination, qubit_state, qutrit_state,
    BlochObservableParams, Observable, PauliAxis, QubitParams, QutritParams,
};
use crate::sweep::Range;

/// Parse a real number or a multiple of π: `0.3`, `pi`, `5pi/12`, `3*pi/2`, `-pi/4`, `pi/7`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let bad = || Error::InvalidConfig(format!("cannot parse angle {s:?}"));
    let t = s.trim().replace(' ', "");
    if let Ok(v) = t.parse::<f64>() {
        return if v.is_finite() { Ok(v) } else { Err(bad()) };
    }
    let lower = t.to_ascii_lowercase();
    let (num, den) = match lower.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().map_err(|_| bad())?),
        None => (lower.as_str(), 1.0),
    };
    let coef = num.strip_suffix("pi").ok_or_else(bad)?;
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let k = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    if den == 0.0 {
        return Err(bad());
    }
    Ok(k * PI / den)
}

/// Comma-separated angles.
pub fn parse_angle_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(parse_angle).collect()
}

/// `lo,hi,steps`.
pub fn parse_range(s: &str) -> Result<Range> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidConfig(format!("range {s:?} must be lo,hi,steps")));
    }
    let steps = parts[2]
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::InvalidConfig(format!("range steps {:?} is not a count", parts[2])))?;
    Range::new(parse_angle(parts[0])?, parse_angle(parts[1])?, steps)
}

fn read_matrix(path: &Path) -> Result<CMatrix> {
    let text = std::fs::read_to_string(path)?;
    let v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    let bad = || {
        Error::InvalidConfig(format!(
            "{}: expected rows of numbers or [re, im] pairs",
            path.display()
        ))
    };
    let rows = v.as_array().ok_or_else(bad)?;
    let parsed = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(bad)?
                .iter()
                .map(|e| match e {
                    serde_json::Value::Number(n) => n.as_f64().map(|x| c64(x, 0.0)).ok_or_else(bad),
                    serde_json::Value::Array(p) if p.len() == 2 => match (p[0].as_f64(), p[1].as_f64()) {
                        (Some(re), Some(im)) => Ok(c64(re, im)),
                        _ => Err(bad()),
                    },
                    _ => Err(bad()),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    CMatrix::from_rows(&parsed)
}

/// `pauli:x|y|z`, `gellmann:k`, `bloch:θ,φ`, `combo`, or `matrix:<json file>`.
pub fn parse_observable(spec: &str) -> Result<Observable> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "pauli" => match arg {
            "x" => Ok(pauli(PauliAxis::X)),
            "y" => Ok(pauli(PauliAxis::Y)),
            "z" => Ok(pauli(PauliAxis::Z)),
            _ => Err(Error::InvalidConfig(format!("unknown Pauli axis {arg:?}"))),
        },
        "gellmann" => gellmann(
            arg.parse()
                .map_err(|_| Error::InvalidConfig(format!("Gell-Mann index {arg:?}")))?,
        ),
        "bloch" => {
            let v = parse_angle_list(arg)?;
            if v.len() != 2 {
                return Err(Error::InvalidConfig("bloch needs theta,phi".into()));
            }
            bloch_observable(BlochObservableParams::new(v[0], v[1])?)
        }
        "combo" => Ok(pauli_diagonal_combination()),
        "matrix" => observable_from_matrix(read_matrix(Path::new(arg))?),
        _ => Err(Error::InvalidConfig(format!("unknown observable spec {spec:?}"))),
    }
}

/// Angles of a qubit (`theta`, `xi`) or qutrit (`theta`, `alpha`, `chi1`, `chi2`) state.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StateSpec {
    pub theta: f64,
    pub xi: f64,
    pub alpha: f64,
    pub chi1: f64,
    pub chi2: f64,
}

/// The parametrized state of dimension `dim` (2 or 3).
pub fn build_state(dim: usize, s: &StateSpec) -> Result<CVector> {
    match dim {
        2 => qubit_state(QubitParams::new(s.theta, s.xi)?),
        3 => qutrit_state(QutritParams::new(s.theta, s.alpha, s.chi1, s.chi2)?),
        d => Err(Error::UnsupportedDimension {
            dim: d,
            supported: "2, 3",
        }),
    }
}

/// Ordered `key = value` pairs; `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlatConfig {
    pub entries: BTreeMap<String, String>,
}

impl FlatConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value", n + 1)))?;
            entries.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Entries of `other` override ours.
    pub fn merged(mut self, other: &FlatConfig) -> Self {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
        self
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::InvalidConfig(format!("missing key {key}")))
    }

    pub fn angle_or(&self, key: &str, default: f64) -> Result<f64> {
        self.get(key).map(parse_angle).unwrap_or(Ok(default))
    }

    pub fn range_or(&self, key: &str, default: Range) -> Result<Range> {
        self.get(key).map(parse_range).unwrap_or(Ok(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("{key} = {v:?} is not a count"))),
        }
    }
}
