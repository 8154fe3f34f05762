use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::observable::{locate_degeneracy, observable_sweep, runs, windows, ObservableScenario};
use super::table::{Axis, Range, SweepTable};
use crate::error::{Error, Result};
use crate::oracles::appc_argmax_theta;
use crate::weak::Variant;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremaReport {
    pub argmax_wv: f64,
    pub argmax_dfn_a: f64,
    pub argmax_dfn_aprime: f64,
    pub mean_check: f64,
    pub max_wv: f64,
}

/// Vertex of the parabola through three equally spaced samples, as an offset in steps.
fn parabolic_offset(l: f64, c: f64, r: f64) -> f64 {
    let den = l - 2.0 * c + r;
    if den >= 0.0 || !den.is_finite() {
        return 0.0;
    }
    (0.5 * (l - r) / den).clamp(-0.5, 0.5)
}

/// Argmax of `f` over indices `lo..=hi` of `xs` (first index wins ties). Interior
/// maxima are refined parabolically; a maximum on a run boundary moves to the
/// supplied edge position.
fn argmax_in(xs: &[f64], f: &[f64], lo: usize, hi: usize, edges: (f64, f64)) -> f64 {
    let mut best = lo;
    for k in lo..=hi {
        if f[k] > f[best] {
            best = k;
        }
    }
    if best > lo && best < hi {
        let h = xs[best + 1] - xs[best];
        return xs[best] + h * parabolic_offset(f[best - 1], f[best], f[best + 1]);
    }
    if lo == hi {
        return xs[lo];
    }
    if best == lo && f[lo] > f[lo + 1] {
        edges.0
    } else if best == hi && f[hi] > f[hi - 1] {
        edges.1
    } else {
        xs[best]
    }
}

/// Argmax positions of `wv_abs` and the two normalized departures within the
/// amplification window of row `row` holding the largest weak value. Without an
/// amplification window the whole row is used.
pub fn extrema_report(t: &SweepTable, row: usize) -> Result<ExtremaReport> {
    let xs = t
        .axis("theta")
        .ok_or_else(|| Error::NotFound("theta axis (observable sweep table expected)".into()))?;
    let n = xs.len();
    let rows = t.len() / n;
    if row >= rows {
        return Err(Error::IndexOutOfRange {
            index: row,
            lo: 0,
            hi: rows.saturating_sub(1),
        });
    }
    let slice = |name: &str| -> Result<&[f64]> {
        t.field(name)
            .map(|v| &v[row * n..(row + 1) * n])
            .ok_or_else(|| Error::NotFound(format!("field {name}")))
    };
    let wv = slice("wv_abs")?;
    let dfn_a = slice("dfn_A")?;
    let dfn_ap = slice("dfn_Aprime")?;
    let mask: Vec<bool> = slice("amplifying")?.iter().map(|&m| m == 1.0).collect();

    let runs = runs(&mask);
    let edges = windows(t, row);
    let (lo, hi, edge) = if runs.is_empty() {
        (0, n - 1, (xs[0], xs[n - 1]))
    } else {
        // Ordered scan: the first run holding the maximum wins.
        let mut pick = 0;
        let mut best = f64::NEG_INFINITY;
        for (r, &(a, b)) in runs.iter().enumerate() {
            let m = wv[a..=b].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if m > best {
                best = m;
                pick = r;
            }
        }
        let (a, b) = runs[pick];
        (a, b, edges.get(pick).copied().unwrap_or((xs[a], xs[b])))
    };
    let argmax_wv = argmax_in(xs, wv, lo, hi, edge);
    let argmax_dfn_a = argmax_in(xs, dfn_a, lo, hi, edge);
    let argmax_dfn_aprime = argmax_in(xs, dfn_ap, lo, hi, edge);
    let max_wv = wv[lo..=hi].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(ExtremaReport {
        argmax_wv,
        argmax_dfn_a,
        argmax_dfn_aprime,
        mean_check: (argmax_wv - 0.5 * (argmax_dfn_a + argmax_dfn_aprime)).abs(),
        max_wv,
    })
}

/// Per-`θi` extrema and nilpotency angles of the observable family.
/// Missing nilpotency angles are stored as NaN; `min_abs_alpha2_*` run over the whole `θ` range.
pub fn extrema_vs_theta_i(id: &str, theta: Range, base: ObservableScenario, theta_i: Range) -> Result<SweepTable> {
    theta_i.validate("theta_i", 0.0, FRAC_PI_2)?;
    let tis = theta_i.values();
    let sweep = observable_sweep(id, theta, base, &tis)?;
    let n = sweep.axes[1].values.len();
    let min_abs = |name: &str, row: usize| -> f64 {
        sweep.field(name).map_or(f64::NAN, |v| {
            v[row * n..(row + 1) * n]
                .iter()
                .filter(|x| !x.is_nan())
                .fold(f64::NAN, |m, x| m.min(x.abs()))
        })
    };
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(tis.len()); 10];
    for (row, &ti) in tis.iter().enumerate() {
        let e = extrema_report(&sweep, row)?;
        let s = ObservableScenario { theta_i: ti, ..base };
        let star = |v| {
            locate_degeneracy(&s, (theta.lo, theta.hi), v)
                .map(|(x, _)| x)
                .unwrap_or(f64::NAN)
        };
        let closed =
            if base.theta_f == 0.0 && base.xi_i == 0.0 && base.xi_f == 0.0 && base.phi == std::f64::consts::FRAC_PI_4 {
                appc_argmax_theta(ti)
            } else {
                f64::NAN
            };
        let vals = [
            e.argmax_wv,
            e.argmax_dfn_a,
            e.argmax_dfn_aprime,
            e.mean_check,
            e.max_wv,
            star(Variant::A),
            star(Variant::APrime),
            closed,
            min_abs("alpha2_A", row),
            min_abs("alpha2_Aprime", row),
        ];
        for (c, v) in cols.iter_mut().zip(vals) {
            c.push(v);
        }
    }
    let mut t = SweepTable::new(
        id,
        &sweep.observable,
        vec![Axis {
            name: "theta_i".into(),
            values: tis,
        }],
    );
    let names = [
        "argmax_wv",
        "argmax_dfn_A",
        "argmax_dfn_Aprime",
        "mean_check",
        "max_wv",
        "theta_star_A",
        "theta_star_Aprime",
        "argmax_closed_form",
        "min_abs_alpha2_A",
        "min_abs_alpha2_Aprime",
    ];
    for (name, c) in names.iter().zip(cols) {
        t.push_field(name, c);
    }
    t.set_meta("kind", "extrema");
    t.set_meta("theta", format!("{},{},{}", theta.lo, theta.hi, theta.steps));
    t.set_meta("theta_i", format!("{},{},{}", theta_i.lo, theta_i.hi, theta_i.steps));
    t.set_meta("theta_f", base.theta_f);
    t.set_meta("xi_i", base.xi_i);
    t.set_meta("xi_f", base.xi_f);
    t.set_meta("phi", base.phi);
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::table::Axis;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn argmax_at_average() {
        for ti in [0.6, 1.1] {
            let s = ObservableScenario::new(ti, 0.0, FRAC_PI_4).unwrap();
            let t = observable_sweep("t", Range::new(0.0, FRAC_PI_2, 2000).unwrap(), s, &[ti]).unwrap();
            let e = extrema_report(&t, 0).unwrap();
            assert!(e.mean_check <= 1e-4, "{e:?}");
            assert!((e.argmax_wv - appc_argmax_theta(ti)).abs() <= 1e-5, "{e:?}");
        }
    }

    #[test]
    fn flat_table_ties_to_first_point() {
        let xs = vec![0.0, 0.5, 1.0, 1.5];
        let mut t = SweepTable::new(
            "flat",
            "x",
            vec![
                Axis {
                    name: "theta_i".into(),
                    values: vec![0.3],
                },
                Axis {
                    name: "theta".into(),
                    values: xs,
                },
            ],
        );
        for f in ["wv_abs", "dfn_A", "dfn_Aprime"] {
            t.push_field(f, vec![1.0; 4]);
        }
        t.push_field("amplifying", vec![0.0; 4]);
        let e = extrema_report(&t, 0).unwrap();
        assert_eq!((e.argmax_wv, e.argmax_dfn_a, e.argmax_dfn_aprime), (0.0, 0.0, 0.0));
        assert_eq!(e.mean_check, 0.0);
    }

    #[test]
    fn parabola_vertex() {
        // Samples of -(x - 0.3)² at x = -1, 0, 1.
        let f = |x: f64| -(x - 0.3) * (x - 0.3);
        assert!((parabolic_offset(f(-1.0), f(0.0), f(1.0)) - 0.3).abs() < 1e-12);
        assert_eq!(parabolic_offset(1.0, 1.0, 1.0), 0.0);
    }
}
