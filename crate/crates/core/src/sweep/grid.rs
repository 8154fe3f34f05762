use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::table::{Axis, Range, SweepTable, GAP_NEAR_ORTHOGONAL, GAP_NONE, GAP_OTHER};
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::quantum::{qubit_state, qutrit_state, Observable, QubitParams, QutritParams};
use crate::weak::{self, Variant, DEFAULT_CLASSIFY_TOL};

/// Field names of a state-grid table, in column order.
pub const GRID_FIELDS: [&str; 14] = [
    "wv_abs",
    "wv_re",
    "wv_im",
    "df_A",
    "df_Aprime",
    "dfn_A",
    "dfn_Aprime",
    "numerator",
    "alpha2_A",
    "alpha2_Aprime",
    "class_code",
    "overlap_sq",
    "wv_abs_sq",
    "gap",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub theta_i: Range,
    pub theta_f: Range,
    /// `(ξi, ξf)` for qubits.
    pub fixed_phases: (f64, f64),
    pub observable: Observable,
    pub observable_label: String,
    /// Qutrit parameters `alpha_i, chi1_i, chi2_i, alpha_f, chi1_f, chi2_f` (default 0).
    pub extra_params: BTreeMap<String, f64>,
}

impl GridSpec {
    pub fn new(observable: Observable, label: &str, steps: usize) -> Result<Self> {
        let r = Range::new(0.0, FRAC_PI_2, steps)?;
        Ok(Self {
            theta_i: r,
            theta_f: r,
            fixed_phases: (0.0, 0.0),
            observable,
            observable_label: label.to_string(),
            extra_params: BTreeMap::new(),
        })
    }

    fn extra(&self, key: &str) -> f64 {
        self.extra_params.get(key).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        self.theta_i.validate("theta_i", 0.0, FRAC_PI_2)?;
        self.theta_f.validate("theta_f", 0.0, FRAC_PI_2)?;
        let (xi_i, xi_f) = self.fixed_phases;
        for (name, v) in [("xi_i", xi_i), ("xi_f", xi_f)] {
            if !(0.0..=2.0 * PI).contains(&v) {
                return Err(Error::InvalidConfig(format!("{name} = {v} outside [0, 2pi]")));
            }
        }
        match self.observable.dim() {
            2 => {
                if let Some(k) = self.extra_params.keys().next() {
                    return Err(Error::InvalidConfig(format!(
                        "qutrit parameter {k} given for a qubit observable"
                    )));
                }
            }
            3 => {
                const KNOWN: [&str; 6] = ["alpha_i", "chi1_i", "chi2_i", "alpha_f", "chi1_f", "chi2_f"];
                for k in self.extra_params.keys() {
                    if !KNOWN.contains(&k.as_str()) {
                        return Err(Error::InvalidConfig(format!("unknown qutrit parameter {k}")));
                    }
                }
                QutritParams::new(0.0, self.extra("alpha_i"), self.extra("chi1_i"), self.extra("chi2_i"))?;
                QutritParams::new(0.0, self.extra("alpha_f"), self.extra("chi1_f"), self.extra("chi2_f"))?;
            }
            d => {
                return Err(Error::UnsupportedDimension {
                    dim: d,
                    supported: "2, 3",
                })
            }
        }
        Ok(())
    }

    /// Pre- and post-selected states at a grid point.
    pub fn states(&self, theta_i: f64, theta_f: f64) -> Result<(CVector, CVector)> {
        if self.observable.dim() == 3 {
            let pi = QutritParams::new(
                theta_i,
                self.extra("alpha_i"),
                self.extra("chi1_i"),
                self.extra("chi2_i"),
            )?;
            let pf = QutritParams::new(
                theta_f,
                self.extra("alpha_f"),
                self.extra("chi1_f"),
                self.extra("chi2_f"),
            )?;
            Ok((qutrit_state(pi)?, qutrit_state(pf)?))
        } else {
            let (xi_i, xi_f) = self.fixed_phases;
            Ok((
                qubit_state(QubitParams::new(theta_i, xi_i)?)?,
                qubit_state(QubitParams::new(theta_f, xi_f)?)?,
            ))
        }
    }
}

/// All grid fields at one point, in [`GRID_FIELDS`] order.
pub fn grid_point(o: &Observable, psi_i: &CVector, psi_f: &CVector) -> Result<[f64; 14]> {
    let value = weak::weak_value_trace(o, psi_i, psi_f)?;
    let a = weak::build_weak_operator(o, psi_i, psi_f, Variant::A)?;
    let ap = weak::build_weak_operator(o, psi_i, psi_f, Variant::APrime)?;
    let s = a.overlap_sq();
    let dfn_a = weak::normalized_henrici(o, psi_i)?;
    let dfn_ap = weak::normalized_henrici(o, psi_f)?;
    Ok([
        value.norm(),
        value.re,
        value.im,
        a.henrici_structural()?,
        ap.henrici_structural()?,
        dfn_a,
        dfn_ap,
        o.matrix().sandwich(psi_f, psi_i)?.norm(),
        a.nonzero_eig().norm(),
        ap.nonzero_eig().norm(),
        weak::classify(value, o, DEFAULT_CLASSIFY_TOL).code() as f64,
        s,
        value.norm_sqr(),
        GAP_NONE,
    ])
}

fn gap_row(e: &Error) -> [f64; 14] {
    let mut row = [f64::NAN; 14];
    row[13] = match e {
        Error::NearOrthogonalPostselection { .. } => GAP_NEAR_ORTHOGONAL,
        _ => GAP_OTHER,
    };
    row
}

/// Weak value, departures and classification over a `(θi, θf)` grid.
pub fn state_grid_sweep(id: &str, g: &GridSpec) -> Result<SweepTable> {
    g.validate()?;
    let ti = g.theta_i.values();
    let tf = g.theta_f.values();
    let rows: Vec<Vec<[f64; 14]>> = ti
        .par_iter()
        .map(|&a| {
            tf.iter()
                .map(|&b| {
                    g.states(a, b)
                        .and_then(|(pi, pf)| grid_point(&g.observable, &pi, &pf))
                        .unwrap_or_else(|e| gap_row(&e))
                })
                .collect()
        })
        .collect();
    let points: Vec<&[f64; 14]> = rows.iter().flatten().collect();

    let mut t = SweepTable::new(
        id,
        &g.observable_label,
        vec![
            Axis {
                name: "theta_i".into(),
                values: ti,
            },
            Axis {
                name: "theta_f".into(),
                values: tf,
            },
        ],
    );
    for (c, name) in GRID_FIELDS.iter().enumerate() {
        t.push_field(name, points.iter().map(|p| p[c]).collect());
    }
    let gaps = points.iter().filter(|p| p[13] != GAP_NONE).count();
    let amplifying = points
        .iter()
        .filter(|p| p[13] == GAP_NONE && (p[10] as u8) & weak::Classification::AMPLIFYING != 0)
        .count();
    t.set_meta("kind", "state-grid");
    t.set_meta(
        "theta_i",
        format!("{},{},{}", g.theta_i.lo, g.theta_i.hi, g.theta_i.steps),
    );
    t.set_meta(
        "theta_f",
        format!("{},{},{}", g.theta_f.lo, g.theta_f.hi, g.theta_f.steps),
    );
    t.set_meta("xi_i", g.fixed_phases.0);
    t.set_meta("xi_f", g.fixed_phases.1);
    for (k, v) in &g.extra_params {
        t.set_meta(k, v);
    }
    t.set_meta("spectrum", format!("{:?}", g.observable.spectrum()));
    t.set_meta("classify_tol", DEFAULT_CLASSIFY_TOL);
    t.set_meta("gap_count", gaps);
    t.set_meta("amplifying_count", amplifying);
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{pauli, PauliAxis};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn sigma_x_eigenvector_point() {
        let g = GridSpec::new(pauli(PauliAxis::X), "pauli-x", 5).unwrap();
        let t = state_grid_sweep("t", &g).unwrap();
        let k = 2 * 5 + 2;
        assert_eq!(t.coords(k), vec![FRAC_PI_4, FRAC_PI_4]);
        assert!(t.field("df_A").unwrap()[k] < 1e-15);
        assert!((t.field("wv_abs").unwrap()[k] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_corner_is_a_gap() {
        let g = GridSpec::new(pauli(PauliAxis::X), "pauli-x", 5).unwrap();
        let t = state_grid_sweep("t", &g).unwrap();
        let k = 4 * 5;
        assert_eq!(t.coords(k), vec![FRAC_PI_2, 0.0]);
        assert!(t.field("wv_abs").unwrap()[k].is_nan());
        assert_eq!(t.field("gap").unwrap()[k], GAP_NEAR_ORTHOGONAL);
        assert_eq!(t.meta["gap_count"], "2");
    }

    #[test]
    fn sigma_z_never_amplifies() {
        let g = GridSpec::new(pauli(PauliAxis::Z), "pauli-z", 60).unwrap();
        let t = state_grid_sweep("t", &g).unwrap();
        assert_eq!(t.meta["amplifying_count"], "0");
    }

    #[test]
    fn invalid_specs() {
        let mut g = GridSpec::new(pauli(PauliAxis::X), "pauli-x", 5).unwrap();
        g.theta_i.steps = 1;
        assert!(state_grid_sweep("t", &g).is_err());
        let mut g = GridSpec::new(pauli(PauliAxis::X), "pauli-x", 5).unwrap();
        g.extra_params.insert("alpha_i".into(), 0.3);
        assert!(g.validate().is_err());
    }
}
