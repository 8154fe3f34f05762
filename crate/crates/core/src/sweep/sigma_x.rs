//! `|σx,w|²` against `d_f(Âx)` for fixed `θi`, parametrically in `θf` and through the
//! two branches of `tan θf(d_f)`.

use std::f64::consts::FRAC_PI_2;

use super::table::{linspace, Axis, Range, SweepTable};
use crate::error::{Error, Result};
use crate::oracles::{
    sx_df, sx_tan_thetaf_of_df, sx_theta_hat_f, sx_theta_tilde_f, sx_wv_sq, sx_wv_sq_of_df, Branch, Extremum,
    QubitScenario,
};
use crate::quantum::{pauli, qubit_state, PauliAxis, QubitParams};
use crate::weak::{self, Variant};

/// Anomalous `θf` interval: `[0, θ̃f]` when `θf = 0` is anomalous, else `[θ̃f, π/2]`.
fn anomalous_interval(theta_i: f64, xi_i: f64, xi_f: f64) -> Result<(f64, f64)> {
    let tilde = sx_theta_tilde_f(theta_i, xi_i, xi_f)?;
    let at_zero = sx_wv_sq(QubitScenario::new(theta_i, 0.0, xi_i, xi_f)?)?;
    Ok(if at_zero > 1.0 {
        (0.0, tilde)
    } else {
        (tilde, FRAC_PI_2)
    })
}

/// `d_f` at `θ̃f` (diamond), at `θf = 0` (square) and its largest value over the
/// anomalous interval (circle).
pub fn sx_markers(theta_i: f64, xi_i: f64, xi_f: f64) -> Result<(f64, f64, f64)> {
    let df = |tf: f64| QubitScenario::new(theta_i, tf, xi_i, xi_f).and_then(sx_df);
    let (lo, hi) = anomalous_interval(theta_i, xi_i, xi_f)?;
    let tilde = sx_theta_tilde_f(theta_i, xi_i, xi_f)?;
    let mut circle = df(lo)?.max(df(hi)?);
    if let (hat, Extremum::Max) = sx_theta_hat_f(theta_i, xi_i, xi_f) {
        if (lo..=hi).contains(&hat) {
            circle = circle.max(df(hat)?);
        }
    }
    Ok((df(tilde)?, df(0.0)?, circle))
}

/// Axes `(xi_i, theta_f)`. Fields: generic and closed-form `d_f` and `|σx,w|²`,
/// plus the anomalous mask. Per-row markers go to meta.
pub fn sx_parametric(id: &str, theta_i: f64, xi_f: f64, xi_i: &[f64], theta_f: Range) -> Result<SweepTable> {
    theta_f.validate("theta_f", 0.0, FRAC_PI_2)?;
    let tfs = theta_f.values();
    let o = pauli(PauliAxis::X);
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); 5];
    let mut t = SweepTable::new("", "", Vec::new());
    for (row, &xi) in xi_i.iter().enumerate() {
        let pi = qubit_state(QubitParams::new(theta_i, xi)?)?;
        for &tf in &tfs {
            let pf = qubit_state(QubitParams::new(tf, xi_f)?)?;
            let sc = QubitScenario::new(theta_i, tf, xi, xi_f)?;
            let vals = match (
                weak::build_weak_operator(&o, &pi, &pf, Variant::A),
                sx_df(sc),
                sx_wv_sq(sc),
            ) {
                (Ok(w), Ok(df_c), Ok(wv_c)) => {
                    let wv = weak::weak_value_trace(&o, &pi, &pf)?.norm_sqr();
                    [w.henrici_structural()?, wv, df_c, wv_c, (wv > 1.0) as u8 as f64]
                }
                _ => [f64::NAN; 5],
            };
            for (c, v) in cols.iter_mut().zip(vals) {
                c.push(v);
            }
        }
        let (d, s, c) = sx_markers(theta_i, xi, xi_f)?;
        t.set_meta(&format!("theta_tilde_f.{row}"), sx_theta_tilde_f(theta_i, xi, xi_f)?);
        let (hat, kind) = sx_theta_hat_f(theta_i, xi, xi_f);
        t.set_meta(&format!("theta_hat_f.{row}"), format!("{hat},{kind:?}"));
        t.set_meta(&format!("markers.{row}"), format!("{d},{s},{c}"));
    }
    t.id = id.to_string();
    t.observable = "pauli:x".to_string();
    t.axes = vec![
        Axis {
            name: "xi_i".into(),
            values: xi_i.to_vec(),
        },
        Axis {
            name: "theta_f".into(),
            values: tfs,
        },
    ];
    for (name, c) in ["df", "wv_sq", "df_closed", "wv_sq_closed", "anomalous"]
        .iter()
        .zip(cols)
    {
        t.push_field(name, c);
    }
    t.set_meta("kind", "sigma-x-parametric");
    t.set_meta("theta_i", theta_i);
    t.set_meta("xi_f", xi_f);
    t.set_meta("theta_f", format!("{},{},{}", theta_f.lo, theta_f.hi, theta_f.steps));
    Ok(t)
}

/// Axes `(xi_i, u)` with `d_f = diamond + u·(circle − diamond)` per row. Fields:
/// `df`, both `tan θf` branches and the matching `|σx,w|²` (NaN where a branch has no
/// real root or leaves `[0, π/2]`).
pub fn sx_branches(id: &str, theta_i: f64, xi_f: f64, xi_i: &[f64], steps: usize) -> Result<SweepTable> {
    if steps < 2 {
        return Err(Error::InvalidConfig(format!(
            "branch sweep needs at least 2 steps, got {steps}"
        )));
    }
    let us = linspace(0.0, 1.0, steps);
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); 5];
    let mut t = SweepTable::new(id, "pauli:x", Vec::new());
    for (row, &xi) in xi_i.iter().enumerate() {
        let (d, s, c) = sx_markers(theta_i, xi, xi_f)?;
        t.set_meta(&format!("markers.{row}"), format!("{d},{s},{c}"));
        for &u in &us {
            let df = d + u * (c - d);
            let mut vals = [df, f64::NAN, f64::NAN, f64::NAN, f64::NAN];
            for (k, b) in [Branch::Plus, Branch::Minus].into_iter().enumerate() {
                if let Ok(x) = sx_tan_thetaf_of_df(df, theta_i, xi, xi_f, b) {
                    if x >= 0.0 {
                        vals[1 + k] = x;
                        vals[3 + k] = sx_wv_sq_of_df(df, x, theta_i, xi, xi_f);
                    }
                }
            }
            for (col, v) in cols.iter_mut().zip(vals) {
                col.push(v);
            }
        }
    }
    t.axes = vec![
        Axis {
            name: "xi_i".into(),
            values: xi_i.to_vec(),
        },
        Axis {
            name: "u".into(),
            values: us,
        },
    ];
    for (name, c) in ["df", "tan_plus", "tan_minus", "wv_sq_plus", "wv_sq_minus"]
        .iter()
        .zip(cols)
    {
        t.push_field(name, c);
    }
    t.set_meta("kind", "sigma-x-branches");
    t.set_meta("theta_i", theta_i);
    t.set_meta("xi_f", xi_f);
    Ok(t)
}
