use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Gap reason codes stored in the `gap` field.
pub const GAP_NONE: f64 = 0.0;
pub const GAP_NEAR_ORTHOGONAL: f64 = 1.0;
pub const GAP_OTHER: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

/// Fields over the Cartesian product of the axes, flattened row-major with
/// the first axis varying slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub id: String,
    pub observable: String,
    pub axes: Vec<Axis>,
    pub fields: Vec<(String, Vec<f64>)>,
    pub meta: BTreeMap<String, String>,
}

impl SweepTable {
    pub fn new(id: &str, observable: &str, axes: Vec<Axis>) -> Self {
        Self {
            id: id.to_string(),
            observable: observable.to_string(),
            axes,
            fields: Vec::new(),
            meta: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.values.len()).collect()
    }

    pub fn push_field(&mut self, name: &str, values: Vec<f64>) {
        assert_eq!(values.len(), self.len(), "field {name} has wrong length");
        self.fields.push((name.to_string(), values));
    }

    pub fn field(&self, name: &str) -> Option<&[f64]> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn field_names(&self) -> Vec<&str> {
        self.fields.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn axis(&self, name: &str) -> Option<&[f64]> {
        self.axes.iter().find(|a| a.name == name).map(|a| a.values.as_slice())
    }

    pub fn set_meta(&mut self, key: &str, value: impl ToString) {
        self.meta.insert(key.to_string(), value.to_string());
    }

    /// Axis coordinates of flat index `k`.
    pub fn coords(&self, mut k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (d, axis) in self.axes.iter().enumerate().rev() {
            let n = axis.values.len();
            out[d] = axis.values[k % n];
            k /= n;
        }
        out
    }

    /// Short stable hash of the table's provenance metadata.
    pub fn params_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.id.as_bytes());
        h.update([0]);
        h.update(self.observable.as_bytes());
        for (k, v) in &self.meta {
            h.update([0]);
            h.update(k.as_bytes());
            h.update([b'=']);
            h.update(v.as_bytes());
        }
        h.finalize().iter().take(6).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn file_stem(&self) -> String {
        let obs: String = self
            .observable
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '-' })
            .collect();
        format!("{}__{}__{}", self.id, obs, self.params_hash())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# sweep-id: {}", self.id);
        let _ = writeln!(s, "# observable: {}", self.observable);
        for (k, v) in &self.meta {
            let _ = writeln!(s, "# {k}: {v}");
        }
        let header: Vec<&str> = self
            .axes
            .iter()
            .map(|a| a.name.as_str())
            .chain(self.fields.iter().map(|(n, _)| n.as_str()))
            .collect();
        let _ = writeln!(s, "{}", header.join(","));
        for k in 0..self.len() {
            let mut row: Vec<String> = self.coords(k).iter().map(|v| v.to_string()).collect();
            row.extend(self.fields.iter().map(|(_, v)| v[k].to_string()));
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// Write `<dir>/<stem>.csv` (or `.json`), returning the path.
    pub fn write(&self, dir: &Path, json: bool) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let (ext, body) = if json {
            ("json", self.to_json()?)
        } else {
            ("csv", self.to_csv())
        };
        let path = dir.join(format!("{}.{ext}", self.file_stem()));
        let mut f = std::fs::File::create(&path)?;
        f.write_all(body.as_bytes())?;
        Ok(path)
    }
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|k| {
            if k == steps - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Range {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        let r = Self { lo, hi, steps };
        r.validate("range", f64::NEG_INFINITY, f64::INFINITY)?;
        Ok(r)
    }

    pub fn validate(&self, name: &str, lo: f64, hi: f64) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidConfig(format!(
                "{name}: steps must be at least 2, got {}",
                self.steps
            )));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::InvalidConfig(format!(
                "{name}: need lo < hi, got {}..{}",
                self.lo, self.hi
            )));
        }
        if self.lo < lo || self.hi > hi {
            return Err(Error::InvalidConfig(format!(
                "{name}: {}..{} outside the allowed {lo}..{hi}",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        linspace(self.lo, self.hi, self.steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SweepTable {
        let mut t = SweepTable::new(
            "demo",
            "pauli:x",
            vec![
                Axis {
                    name: "a".into(),
                    values: vec![0.0, 1.0],
                },
                Axis {
                    name: "b".into(),
                    values: vec![10.0, 20.0, 30.0],
                },
            ],
        );
        t.push_field("v", (0..6).map(|k| k as f64).collect());
        t.set_meta("seed", 7);
        t
    }

    #[test]
    fn coords_are_row_major() {
        let t = sample();
        assert_eq!(t.coords(0), vec![0.0, 10.0]);
        assert_eq!(t.coords(2), vec![0.0, 30.0]);
        assert_eq!(t.coords(4), vec![1.0, 20.0]);
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# sweep-id: demo");
        assert!(lines.contains(&"a,b,v"));
        assert_eq!(lines.last().unwrap(), &"1,30,5");
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 7);
    }

    #[test]
    fn file_name_is_stable() {
        let t = sample();
        let stem = t.file_stem();
        assert!(stem.starts_with("demo__pauli-x__"));
        assert_eq!(stem, sample().file_stem());
        let mut other = sample();
        other.set_meta("seed", 8);
        assert_ne!(stem, other.file_stem());
    }

    #[test]
    fn json_round_trip() {
        let t = sample();
        let back: SweepTable = serde_json::from_str(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.0, 1.0, 5);
        assert_eq!(v, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(Range::new(0.0, 1.0, 1).is_err());
        assert!(Range::new(1.0, 0.0, 4).is_err());
    }
}
