use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::table::{Axis, Range, SweepTable, GAP_NEAR_ORTHOGONAL, GAP_NONE, GAP_OTHER};
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::quantum::{bloch_observable_unchecked, qubit_state, Observable, QubitParams};
use crate::weak::{self, Variant, DEFAULT_CLASSIFY_TOL};

/// Default number of `θ` samples.
pub const DEFAULT_THETA_STEPS: usize = 2000;
/// Step of the central finite differences.
pub const FD_STEP: f64 = 1e-5;

pub const OBSERVABLE_FIELDS: [&str; 18] = [
    "numerator",
    "dfn_A",
    "dfn_Aprime",
    "d_numerator",
    "d_dfn_A",
    "d_dfn_Aprime",
    "alpha2_A",
    "alpha2_Aprime",
    "wv_abs",
    "wv_re",
    "wv_im",
    "df_A",
    "df_Aprime",
    "amplifying",
    "eigvec_angle_A",
    "eigvec_angle_Aprime",
    "class_code",
    "gap",
];

/// Fixed qubit states and the azimuth of `O(θ) = cosθ σz + sinθ(cosφ σx + sinφ σy)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableScenario {
    pub theta_i: f64,
    pub theta_f: f64,
    pub xi_i: f64,
    pub xi_f: f64,
    pub phi: f64,
}

impl ObservableScenario {
    /// Real states (`ξ = 0`).
    pub fn new(theta_i: f64, theta_f: f64, phi: f64) -> Result<Self> {
        let s = Self {
            theta_i,
            theta_f,
            xi_i: 0.0,
            xi_f: 0.0,
            phi,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        QubitParams::new(self.theta_i, self.xi_i)?;
        QubitParams::new(self.theta_f, self.xi_f)?;
        if !(0.0..=2.0 * PI).contains(&self.phi) {
            return Err(Error::Domain {
                name: "phi",
                value: self.phi,
                lo: 0.0,
                hi: 2.0 * PI,
            });
        }
        Ok(())
    }

    pub fn states(&self) -> Result<(CVector, CVector)> {
        Ok((
            qubit_state(QubitParams::new(self.theta_i, self.xi_i)?)?,
            qubit_state(QubitParams::new(self.theta_f, self.xi_f)?)?,
        ))
    }

    pub fn observable(&self, theta: f64) -> Observable {
        bloch_observable_unchecked(theta, self.phi)
    }

    /// Denominator-free trace of the weak operator, `⟨ψ|O(θ)|ψ⟩` with `ψ` its fluctuation state.
    pub fn expectation(&self, theta: f64, variant: Variant) -> Result<f64> {
        let (pi, pf) = self.states()?;
        let psi = match variant {
            Variant::A => pi,
            Variant::APrime => pf,
        };
        Ok(self.observable(theta).matrix().sandwich(&psi, &psi)?.re)
    }
}

/// `(|⟨ψf|O|ψi⟩|, Δᵢ O, Δf O)`, defined at any overlap.
fn unnormalized(o: &Observable, pi: &CVector, pf: &CVector) -> Result<[f64; 3]> {
    Ok([
        o.matrix().sandwich(pf, pi)?.norm(),
        weak::normalized_henrici(o, pi)?,
        weak::normalized_henrici(o, pf)?,
    ])
}

fn point(s: &ObservableScenario, pi: &CVector, pf: &CVector, theta: f64) -> Result<[f64; 18]> {
    let o = s.observable(theta);
    let base = unnormalized(&o, pi, pf)?;
    let plus = unnormalized(&s.observable(theta + FD_STEP), pi, pf)?;
    let minus = unnormalized(&s.observable(theta - FD_STEP), pi, pf)?;
    let d: Vec<f64> = (0..3).map(|k| (plus[k] - minus[k]) / (2.0 * FD_STEP)).collect();
    let mut row = [f64::NAN; 18];
    row[..3].copy_from_slice(&base);
    row[3..6].copy_from_slice(&d);

    let tail = (|| -> Result<[f64; 11]> {
        let value = weak::weak_value_trace(&o, pi, pf)?;
        let a = weak::build_weak_operator(&o, pi, pf, Variant::A)?;
        let ap = weak::build_weak_operator(&o, pi, pf, Variant::APrime)?;
        let class = weak::classify(value, &o, DEFAULT_CLASSIFY_TOL);
        let angle = |w| -> Result<f64> { Ok(weak::eigenstructure(w)?.eigvec_angle.unwrap_or(f64::NAN)) };
        Ok([
            a.nonzero_eig().re,
            ap.nonzero_eig().re,
            value.norm(),
            value.re,
            value.im,
            a.henrici_structural()?,
            ap.henrici_structural()?,
            class.amplifying as u8 as f64,
            angle(&a)?,
            angle(&ap)?,
            class.code() as f64,
        ])
    })();
    match tail {
        Ok(t) => {
            row[6..17].copy_from_slice(&t);
            row[17] = GAP_NONE;
        }
        Err(Error::NearOrthogonalPostselection { .. }) => row[17] = GAP_NEAR_ORTHOGONAL,
        Err(_) => row[17] = GAP_OTHER,
    }
    Ok(row)
}

fn amplifying_at(s: &ObservableScenario, pi: &CVector, pf: &CVector, theta: f64) -> bool {
    let o = s.observable(theta);
    weak::weak_value_trace(&o, pi, pf)
        .map(|v| weak::classify(v, &o, DEFAULT_CLASSIFY_TOL).amplifying)
        .unwrap_or(false)
}

/// Bisect the amplification boundary between `inside` (amplifying) and `outside`.
fn refine_edge(s: &ObservableScenario, pi: &CVector, pf: &CVector, mut inside: f64, mut outside: f64) -> f64 {
    for _ in 0..200 {
        if (inside - outside).abs() <= 1e-14 {
            break;
        }
        let mid = 0.5 * (inside + outside);
        if amplifying_at(s, pi, pf, mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Amplifying runs of a mask as `(first, last)` index pairs.
pub(crate) fn runs(mask: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (k, &m) in mask.iter().enumerate() {
        match (m, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                out.push((s, k - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, mask.len() - 1));
    }
    out
}

/// Per-`θ` numerator, departures, derivatives, eigenvalues and weak value for each
/// `θi` in `theta_i`. Axes are `(theta_i, theta)`. Amplification windows, refined by
/// bisection, are stored in meta as `window.<row>` = `lo,hi;lo,hi…`.
pub fn observable_sweep(id: &str, theta: Range, base: ObservableScenario, theta_i: &[f64]) -> Result<SweepTable> {
    theta.validate("theta", 0.0, FRAC_PI_2)?;
    if theta_i.is_empty() {
        return Err(Error::InvalidConfig(
            "observable sweep needs at least one theta_i".into(),
        ));
    }
    let scenarios = theta_i
        .iter()
        .map(|&ti| {
            let s = ObservableScenario { theta_i: ti, ..base };
            s.validate().map(|_| s)
        })
        .collect::<Result<Vec<_>>>()?;
    let thetas = theta.values();

    let rows = scenarios
        .par_iter()
        .map(|s| -> Result<(Vec<[f64; 18]>, String)> {
            let (pi, pf) = s.states()?;
            let pts = thetas
                .iter()
                .map(|&t| point(s, &pi, &pf, t))
                .collect::<Result<Vec<_>>>()?;
            let mask: Vec<bool> = pts.iter().map(|p| p[13] == 1.0).collect();
            let windows: Vec<String> = runs(&mask)
                .into_iter()
                .map(|(a, b)| {
                    let lo = if a == 0 {
                        thetas[0]
                    } else {
                        refine_edge(s, &pi, &pf, thetas[a], thetas[a - 1])
                    };
                    let hi = if b + 1 == thetas.len() {
                        thetas[b]
                    } else {
                        refine_edge(s, &pi, &pf, thetas[b], thetas[b + 1])
                    };
                    format!("{lo},{hi}")
                })
                .collect();
            Ok((pts, windows.join(";")))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut t = SweepTable::new(
        id,
        &format!("bloch:phi={}", base.phi),
        vec![
            Axis {
                name: "theta_i".into(),
                values: theta_i.to_vec(),
            },
            Axis {
                name: "theta".into(),
                values: thetas,
            },
        ],
    );
    for (c, name) in OBSERVABLE_FIELDS.iter().enumerate() {
        t.push_field(name, rows.iter().flat_map(|(p, _)| p.iter().map(|r| r[c])).collect());
    }
    t.set_meta("kind", "observable");
    t.set_meta("theta", format!("{},{},{}", theta.lo, theta.hi, theta.steps));
    t.set_meta("theta_f", base.theta_f);
    t.set_meta("xi_i", base.xi_i);
    t.set_meta("xi_f", base.xi_f);
    t.set_meta("phi", base.phi);
    t.set_meta("fd_step", FD_STEP);
    t.set_meta("classify_tol", DEFAULT_CLASSIFY_TOL);
    for (k, (_, w)) in rows.iter().enumerate() {
        t.set_meta(&format!("window.{k}"), w);
    }
    let gaps = t
        .field("gap")
        .map(|g| g.iter().filter(|&&v| v != GAP_NONE).count())
        .unwrap_or(0);
    t.set_meta("gap_count", gaps);
    Ok(t)
}

/// Amplification windows of row `row`, as stored by [`observable_sweep`].
pub fn windows(t: &SweepTable, row: usize) -> Vec<(f64, f64)> {
    let Some(w) = t.meta.get(&format!("window.{row}")) else {
        return Vec::new();
    };
    w.split(';')
        .filter(|s| !s.is_empty())
        .filter_map(|pair| {
            let (a, b) = pair.split_once(',')?;
            Some((a.parse().ok()?, b.parse().ok()?))
        })
        .collect()
}

/// Angle `θ*` in `range` where the weak operator's trace vanishes, and the
/// Fubini–Study angle between its eigenvectors there.
pub fn locate_degeneracy(s: &ObservableScenario, range: (f64, f64), variant: Variant) -> Result<(f64, f64)> {
    let (lo, hi) = range;
    if !(lo < hi) {
        return Err(Error::InvalidConfig(format!(
            "degeneracy search needs lo < hi, got {lo}..{hi}"
        )));
    }
    let f = |t: f64| s.expectation(t, variant);
    const SCAN: usize = 2000;
    const TOUCH: f64 = 1e-12;
    let mut star = None;
    let mut prev = (lo, f(lo)?);
    if prev.1.abs() <= TOUCH {
        star = Some(lo);
    }
    for k in 1..=SCAN {
        if star.is_some() {
            break;
        }
        let t = if k == SCAN {
            hi
        } else {
            lo + (hi - lo) * k as f64 / SCAN as f64
        };
        let cur = (t, f(t)?);
        if cur.1.abs() <= TOUCH {
            star = Some(t);
        } else if prev.1.signum() != cur.1.signum() {
            let (mut a, mut b, fa) = (prev.0, cur.0, prev.1);
            while b - a > 1e-13 {
                let m = 0.5 * (a + b);
                let fm = f(m)?;
                if fm == 0.0 {
                    a = m;
                    b = m;
                } else if fm.signum() == fa.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            star = Some(0.5 * (a + b));
        }
        prev = cur;
    }
    let star =
        star.ok_or_else(|| Error::NotFound(format!("no zero of the {} trace in [{lo}, {hi}]", variant.label())))?;
    let (pi, pf) = s.states()?;
    let w = weak::build_weak_operator(&s.observable(star), &pi, &pf, variant)?;
    let angle = weak::eigenstructure(&w)?
        .eigvec_angle
        .ok_or(Error::UnsupportedDimension {
            dim: w.matrix().dim(),
            supported: "2",
        })?;
    Ok((star, angle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{appc_amplification_window, appd_values_and_derivatives};
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn endpoint_curves_coincide() {
        let s = ObservableScenario::new(FRAC_PI_2, 0.0, PI / 12.0).unwrap();
        let t = observable_sweep("t", Range::new(0.0, FRAC_PI_2, 101).unwrap(), s, &[FRAC_PI_2]).unwrap();
        let (n, a, b) = (
            t.field("numerator").unwrap(),
            t.field("dfn_A").unwrap(),
            t.field("dfn_Aprime").unwrap(),
        );
        for k in 0..101 {
            assert!((n[k] - a[k]).abs() < 1e-12 && (n[k] - b[k]).abs() < 1e-12);
        }
        assert!(t.field("gap").unwrap().iter().all(|&g| g == GAP_NEAR_ORTHOGONAL));
    }

    #[test]
    fn matches_closed_forms() {
        let s = ObservableScenario::new(0.2, 0.2, PI / 12.0).unwrap();
        let t = observable_sweep("t", Range::new(0.0, FRAC_PI_2, 41).unwrap(), s, &[1.4, 1.5]).unwrap();
        for k in 0..t.len() {
            let c = t.coords(k);
            let d = appd_values_and_derivatives(c[1], c[0], 0.2, PI / 12.0);
            assert!((t.field("numerator").unwrap()[k] - d.numerator).abs() < 1e-12);
            // The closed-form labels are swapped relative to the generic variants.
            assert!((t.field("dfn_A").unwrap()[k] - d.dfn_aprime).abs() < 1e-12);
            assert!((t.field("dfn_Aprime").unwrap()[k] - d.dfn_a).abs() < 1e-12);
            assert!((t.field("d_numerator").unwrap()[k] - d.d_numerator).abs() < 1e-6 * d.d_numerator.abs().max(1.0));
        }
    }

    #[test]
    fn window_edge_is_refined() {
        let s = ObservableScenario::new(0.5, 0.0, FRAC_PI_4).unwrap();
        let t = observable_sweep("t", Range::new(0.0, FRAC_PI_2, 200).unwrap(), s, &[0.5]).unwrap();
        let w = windows(&t, 0);
        assert_eq!(w.len(), 1);
        let (lo, hi) = appc_amplification_window(0.5);
        assert!((w[0].0 - lo).abs() < 1e-7, "{:?}", w);
        assert!((w[0].1 - hi).abs() < 1e-7, "{:?}", w);
    }

    #[test]
    fn degeneracy_examples() {
        let ti = 1.2;
        let s = ObservableScenario::new(ti, 0.0, FRAC_PI_4).unwrap();
        let (t, ang) = locate_degeneracy(&s, (0.0, FRAC_PI_2), Variant::APrime).unwrap();
        assert!((t - FRAC_PI_2).abs() < 1e-10 && ang <= 1e-6);
        let (t, ang) = locate_degeneracy(&s, (0.0, FRAC_PI_2), Variant::A).unwrap();
        let expected = (-std::f64::consts::SQRT_2 / (2.0 * ti).tan()).atan();
        assert!((t - expected).abs() < 1e-10 && ang <= 1e-6);
        let s = ObservableScenario::new(0.5, 0.0, FRAC_PI_4).unwrap();
        assert!(matches!(
            locate_degeneracy(&s, (0.0, FRAC_PI_2), Variant::A),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn runs_of_mask() {
        assert_eq!(runs(&[false, true, true, false, true]), vec![(1, 2), (4, 4)]);
        assert!(runs(&[false, false]).is_empty());
    }
}
