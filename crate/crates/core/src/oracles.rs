//! Closed-form weak values and Henrici departures for qubit scenarios.
//!
//! Everything here is written out from trigonometric formulas and shares no
//! code with [`crate::weak`], so the two can check each other.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexScalar};
use crate::weak::DEFAULT_OVERLAP_FLOOR;

const EXCLUSION_TOL: f64 = 1e-9;
const DISCRIMINANT_TOL: f64 = 1e-12;
const SINGULAR_TOL: f64 = 1e-12;

fn check(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if !(value.is_finite() && value >= lo && value <= hi) {
        return Err(Error::Domain { name, value, lo, hi });
    }
    Ok(())
}

fn floor_check(overlap_sq: f64) -> Result<()> {
    if overlap_sq < DEFAULT_OVERLAP_FLOOR {
        return Err(Error::NearOrthogonalPostselection {
            overlap_sq,
            floor: DEFAULT_OVERLAP_FLOOR,
        });
    }
    Ok(())
}

/// Real-phase qubit pre/post-selection `(cos θ, e^{iξ} sin θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitScenario {
    pub theta_i: f64,
    pub theta_f: f64,
    pub xi_i: f64,
    pub xi_f: f64,
}

impl QubitScenario {
    pub fn new(theta_i: f64, theta_f: f64, xi_i: f64, xi_f: f64) -> Result<Self> {
        check("theta_i", theta_i, 0.0, FRAC_PI_2)?;
        check("theta_f", theta_f, 0.0, FRAC_PI_2)?;
        check("xi_i", xi_i, 0.0, 2.0 * PI)?;
        check("xi_f", xi_f, 0.0, 2.0 * PI)?;
        Ok(Self {
            theta_i,
            theta_f,
            xi_i,
            xi_f,
        })
    }

    pub fn real(theta_i: f64, theta_f: f64) -> Result<Self> {
        Self::new(theta_i, theta_f, 0.0, 0.0)
    }

    /// `cos²θf cos²θi + sin²θf sin²θi + 2cos(ξi−ξf) cosθf cosθi sinθf sinθi`.
    pub fn overlap_sq(&self) -> f64 {
        let (sf, cf) = self.theta_f.sin_cos();
        let (si, ci) = self.theta_i.sin_cos();
        cf * cf * ci * ci + sf * sf * si * si + 2.0 * (self.xi_i - self.xi_f).cos() * cf * ci * sf * si
    }
}

/// `S = sqrt(1 − sin²2θi cos²ξi)`.
fn s_factor(theta_i: f64, xi_i: f64) -> f64 {
    (1.0 - (2.0 * theta_i).sin().powi(2) * xi_i.cos().powi(2))
        .max(0.0)
        .sqrt()
}

/// Henrici departure of `Â` built from σx.
pub fn sx_df(s: QubitScenario) -> Result<f64> {
    let ov = s.overlap_sq();
    floor_check(ov)?;
    Ok(s_factor(s.theta_i, s.xi_i) / ov)
}

/// `|σx,w|²`.
pub fn sx_wv_sq(s: QubitScenario) -> Result<f64> {
    let ov = s.overlap_sq();
    floor_check(ov)?;
    let (sf, cf) = s.theta_f.sin_cos();
    let (si, ci) = s.theta_i.sin_cos();
    let num = sf * sf * ci * ci + cf * cf * si * si + 2.0 * (s.xi_i + s.xi_f).cos() * cf * ci * sf * si;
    Ok(num / ov)
}

/// Post-selection angle where `|σx,w|² = 1`:
/// `tan θ̃f = tan2θi sinξi sinξf + sqrt(tan²2θi sin²ξi sin²ξf + 1)`,
/// the root of the pair lying in `[0, π/2]`.
pub fn sx_theta_tilde_f(theta_i: f64, xi_i: f64, xi_f: f64) -> Result<f64> {
    check("theta_i", theta_i, 0.0, FRAC_PI_2)?;
    if (theta_i - FRAC_PI_4).abs() < EXCLUSION_TOL {
        return Err(Error::ExcludedParameter {
            name: "theta_i",
            value: theta_i,
        });
    }
    let b = (2.0 * theta_i).tan() * xi_i.sin() * xi_f.sin();
    let roots = [b + (b * b + 1.0).sqrt(), b - (b * b + 1.0).sqrt()];
    let t = roots
        .into_iter()
        .find(|r| *r >= 0.0)
        .expect("the two roots multiply to -1");
    Ok(t.atan())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extremum {
    Max,
    Min,
}

/// Stationary point of `sx_df` in `θf`, from `tan2θ̂f = tan2θi cos(ξi−ξf)`,
/// together with whether it is the maximum or the minimum of `d_f`.
pub fn sx_theta_hat_f(theta_i: f64, xi_i: f64, xi_f: f64) -> (f64, Extremum) {
    let c = (xi_i - xi_f).cos();
    let c2 = (2.0 * theta_i).cos();
    if c2.abs() < EXCLUSION_TOL {
        let kind = if c >= 0.0 { Extremum::Min } else { Extremum::Max };
        return (FRAC_PI_4, kind);
    }
    // Overlap = ½[1 + R cos(2θf − β)]; d_f is extremal where the overlap is.
    let beta = ((2.0 * theta_i).sin() * c).atan2(c2);
    if beta >= 0.0 {
        (beta / 2.0, Extremum::Min)
    } else {
        ((beta + PI) / 2.0, Extremum::Max)
    }
}

/// Argmax of `sx_df` over `θf ∈ [0, π/2]`, falling back to an endpoint when
/// the stationary point is a minimum.
pub fn sx_df_argmax_theta_f(theta_i: f64, xi_i: f64, xi_f: f64) -> f64 {
    match sx_theta_hat_f(theta_i, xi_i, xi_f) {
        (angle, Extremum::Max) => angle,
        (_, Extremum::Min) => {
            let ov = |tf: f64| {
                QubitScenario {
                    theta_i,
                    theta_f: tf,
                    xi_i,
                    xi_f,
                }
                .overlap_sq()
            };
            if ov(0.0) <= ov(FRAC_PI_2) {
                0.0
            } else {
                FRAC_PI_2
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// `tan θf` as a function of `d_f(Âx)`, solving
/// `d_f = S(1+a²)(1+x²)/(1 + a²x² + 2cos(ξi−ξf) a x)` for `x`, `a = tanθi`.
pub fn sx_tan_thetaf_of_df(df: f64, theta_i: f64, xi_i: f64, xi_f: f64, branch: Branch) -> Result<f64> {
    let a = theta_i.tan();
    let c = (xi_i - xi_f).cos();
    let k = (1.0 + a * a) * s_factor(theta_i, xi_i);
    let den = df * a * a - k;
    if den.abs() <= SINGULAR_TOL {
        return Err(Error::BranchSingularity { denominator: den });
    }
    let disc = df * df * c * c * a * a - den * (df - k);
    if disc < -DISCRIMINANT_TOL {
        return Err(Error::NoRealSolution { discriminant: disc });
    }
    let root = disc.max(0.0).sqrt();
    let signed = match branch {
        Branch::Plus => root,
        Branch::Minus => -root,
    };
    Ok((-df * c * a + signed) / den)
}

/// `|σx,w|²` from `d_f` and `tan θf`.
pub fn sx_wv_sq_of_df(df: f64, tan_theta_f: f64, theta_i: f64, xi_i: f64, xi_f: f64) -> f64 {
    let (a, x) = (theta_i.tan(), tan_theta_f);
    let num = x * x + a * a + 2.0 * (xi_i + xi_f).cos() * x * a;
    num / ((1.0 + a * a) * (1.0 + x * x) * s_factor(theta_i, xi_i)) * df
}

/// σy with real states: `(i tan(θf−θi), 1/cos²(θf−θi))`.
pub fn sy_relations(theta_i: f64, theta_f: f64) -> Result<(ComplexScalar, f64)> {
    let d = theta_f - theta_i;
    floor_check(d.cos().powi(2))?;
    Ok((c64(0.0, d.tan()), 1.0 / d.cos().powi(2)))
}

/// σz with real states: `(|cos2θi − tan(θf−θi) sin2θi|, |sin2θi|(1 + tan²(θf−θi)))`.
pub fn sz_relations(theta_i: f64, theta_f: f64) -> Result<(f64, f64)> {
    let d = theta_f - theta_i;
    floor_check(d.cos().powi(2))?;
    let (s2, c2) = (2.0 * theta_i).sin_cos();
    let wv = (c2 - d.tan() * s2).abs();
    Ok((wv, s2.abs() * (1.0 + d.tan().powi(2))))
}

/// Observable `cosθ σz + sinθ(σx + σy)/√2` with `ψf = (1, 0)`,
/// `ψi = (cosθi, sinθi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixCScenario {
    pub theta_i: f64,
    pub theta: f64,
}

impl AppendixCScenario {
    pub fn new(theta_i: f64, theta: f64) -> Result<Self> {
        check("theta_i", theta_i, 0.0, FRAC_PI_2)?;
        check("theta", theta, 0.0, FRAC_PI_2)?;
        Ok(Self { theta_i, theta })
    }
}

/// Eigenvalues and departures with the overlap denominator removed.
/// `alpha_a`/`df_a` describe the operator read off in `ψi` (built on `Π_f`),
/// `alpha_aprime`/`df_aprime` the one built on `Πᵢ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixCQuantities {
    pub alpha_a: f64,
    pub alpha_aprime: f64,
    pub df_a: f64,
    pub df_aprime: f64,
    pub wv_abs: f64,
}

pub fn appc_quantities(s: AppendixCScenario) -> AppendixCQuantities {
    let (st, ct) = s.theta.sin_cos();
    let (si, ci) = s.theta_i.sin_cos();
    let ti = s.theta_i.tan();
    let radicand = 5.0
        - (4.0 * s.theta_i).cos()
        - (2.0 * s.theta).cos() * (1.0 + 3.0 * (4.0 * s.theta_i).cos())
        - 2.0 * SQRT_2 * (2.0 * s.theta).sin() * (4.0 * s.theta_i).sin();
    AppendixCQuantities {
        alpha_a: ct,
        alpha_aprime: ct * (2.0 * s.theta_i).cos() + SQRT_2 * ci * st * si,
        df_a: st.abs(),
        df_aprime: radicand.max(0.0).sqrt() / 8f64.sqrt(),
        wv_abs: (ct * ct + SQRT_2 * ct * st * ti + st * st * ti * ti).max(0.0).sqrt(),
    }
}

/// `X = √2 tanθi / (1 − tan²θi)`.
fn appc_x(theta_i: f64) -> f64 {
    let t = theta_i.tan();
    SQRT_2 * t / (1.0 - t * t)
}

/// Range of `θ` with `|O_w| ≥ 1`: `[0, arctan X]` below `θi = π/4`,
/// all of `[0, π/2]` above.
pub fn appc_amplification_window(theta_i: f64) -> (f64, f64) {
    if theta_i < FRAC_PI_4 - EXCLUSION_TOL {
        (0.0, appc_x(theta_i).atan())
    } else {
        (0.0, FRAC_PI_2)
    }
}

/// Angles where the two departures peak inside the amplification window,
/// in the order (`df_a`, `df_aprime`).
pub fn appc_df_extremal_angles(theta_i: f64) -> (f64, f64) {
    if theta_i < FRAC_PI_4 - EXCLUSION_TOL {
        (appc_x(theta_i).atan(), 0.0)
    } else if theta_i <= FRAC_PI_4 + EXCLUSION_TOL {
        (FRAC_PI_2, 0.0)
    } else {
        (FRAC_PI_2, (-SQRT_2 / (2.0 * theta_i).tan()).atan())
    }
}

/// Argmax of `|O_w|` over `θ`: `½ arctan X` below `π/4`,
/// `π/4 + ½ arctan(−√2 cot2θi)` above.
pub fn appc_argmax_theta(theta_i: f64) -> f64 {
    if (theta_i - FRAC_PI_4).abs() < EXCLUSION_TOL {
        FRAC_PI_4
    } else if theta_i < FRAC_PI_4 {
        0.5 * appc_x(theta_i).atan()
    } else {
        FRAC_PI_4 + 0.5 * (-SQRT_2 / (2.0 * theta_i).tan()).atan()
    }
}

/// Numerator of the weak value, the two denominator-free departures and
/// their `θ` derivatives for `cosθ σz + sinθ(cosφ σx + sinφ σy)` with real
/// states. `dfn_a` depends on `θf` (fluctuations in `ψf`), `dfn_aprime` on `θi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixDValues {
    pub numerator: f64,
    pub dfn_a: f64,
    pub dfn_aprime: f64,
    pub d_numerator: f64,
    pub d_dfn_a: f64,
    pub d_dfn_aprime: f64,
}

fn appd_dfn(theta: f64, angle: f64, phi: f64) -> (f64, f64) {
    let radicand = (3.0 + 2.0 * (4.0 * angle).cos() * phi.cos().powi(2) - (2.0 * phi).cos()) * theta.sin().powi(2)
        + 4.0 * theta.cos().powi(2) * (2.0 * angle).sin().powi(2)
        - 2.0 * phi.cos() * (2.0 * theta).sin() * (4.0 * angle).sin();
    let root = radicand.max(0.0).sqrt();
    let d = (-4.0 * (2.0 * theta).cos() * phi.cos() * (4.0 * angle).sin()
        + (2.0 * theta).sin() * ((4.0 * angle).cos() * (3.0 + (2.0 * phi).cos()) + 2.0 * phi.sin().powi(2)))
        / (4.0 * root);
    (0.5 * root, d)
}

pub fn appd_values_and_derivatives(theta: f64, theta_i: f64, theta_f: f64, phi: f64) -> AppendixDValues {
    let (sum, diff) = (theta_f + theta_i, theta_f - theta_i);
    let radicand = (theta.cos() * sum.cos() + phi.cos() * theta.sin() * sum.sin()).powi(2)
        + theta.sin().powi(2) * diff.sin().powi(2) * phi.sin().powi(2);
    let root = radicand.max(0.0).sqrt();
    let d_numerator = (-(2.0 * theta).sin()
        * ((2.0 * diff).cos() + 3.0 * (2.0 * sum).cos()
            - 2.0 * (2.0 * phi).cos() * (2.0 * theta_f).sin() * (2.0 * theta_i).sin())
        + 4.0 * (2.0 * theta).cos() * phi.cos() * (2.0 * sum).sin())
        / (8.0 * root);
    let (dfn_a, d_dfn_a) = appd_dfn(theta, theta_f, phi);
    let (dfn_aprime, d_dfn_aprime) = appd_dfn(theta, theta_i, phi);
    AppendixDValues {
        numerator: root,
        dfn_a,
        dfn_aprime,
        d_numerator,
        d_dfn_a,
        d_dfn_aprime,
    }
}
