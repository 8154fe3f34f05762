mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use common::*;
use proptest::prelude::*;

use wvnn::linalg::CVector;
use wvnn::oracles::{
    appc_quantities, appd_values_and_derivatives, sx_df, sx_wv_sq, sy_relations, sz_relations, AppendixCScenario,
    QubitScenario,
};
use wvnn::quantum::{bloch_observable_unchecked, pauli, qubit_state, Observable, PauliAxis, QubitParams};
use wvnn::weak::{build_weak_operator, henrici_spectral, normalized_henrici, weak_value_trace, Variant};

const TOL: f64 = 1e-10;
const MIN_OVERLAP: f64 = 1e-4;

fn qubit(theta: f64, xi: f64) -> CVector {
    qubit_state(QubitParams::new(theta, xi).unwrap()).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * b.abs().max(1.0)
}

/// Generic departure of the operator built on `ψi`.
fn generic_df(o: &Observable, vi: &CVector, vf: &CVector) -> (f64, f64) {
    let w = build_weak_operator(o, vi, vf, Variant::A).unwrap();
    (w.henrici_structural().unwrap(), henrici_spectral(w.matrix()).unwrap())
}

fn angles() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.0..=FRAC_PI_2, 0.0..=FRAC_PI_2, 0.0..=TAU, 0.0..=TAU)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2500))]

    #[test]
    fn sigma_x_oracles((ti, tf, xi, xf) in angles()) {
        let s = QubitScenario::new(ti, tf, xi, xf).unwrap();
        prop_assume!(s.overlap_sq() > MIN_OVERLAP);
        let (vi, vf) = (qubit(ti, xi), qubit(tf, xf));
        let o = pauli(PauliAxis::X);
        let wv = weak_value_trace(&o, &vi, &vf).unwrap();
        prop_assert!(close(sx_wv_sq(s).unwrap(), wv.norm_sqr()));
        let df = sx_df(s).unwrap();
        let (structural, spectral) = generic_df(&o, &vi, &vf);
        prop_assert!(close(df, structural), "{df} {structural}");
        prop_assert!(close(df, spectral), "{df} {spectral}");
    }

    #[test]
    fn sigma_x_real_phase_reduction(ti in 0.0..=FRAC_PI_2, tf in 0.0..=FRAC_PI_2) {
        let s = QubitScenario::real(ti, tf).unwrap();
        let ov = (tf - ti).cos().powi(2);
        prop_assume!(ov > MIN_OVERLAP);
        prop_assert!(close(sx_df(s).unwrap(), (2.0 * ti).cos().abs() / ov));
        prop_assert!(close(sx_wv_sq(s).unwrap(), (tf + ti).sin().powi(2) / ov));
    }

    #[test]
    fn sigma_y_and_z_oracles(ti in 0.0..=FRAC_PI_2, tf in 0.0..=FRAC_PI_2) {
        prop_assume!((tf - ti).cos().powi(2) > MIN_OVERLAP);
        let (vi, vf) = (qubit(ti, 0.0), qubit(tf, 0.0));

        let oy = pauli(PauliAxis::Y);
        let (wy, dfy) = sy_relations(ti, tf).unwrap();
        let gy = weak_value_trace(&oy, &vi, &vf).unwrap();
        prop_assert!(rel_err(gy, wy) <= TOL);
        let (structural, spectral) = generic_df(&oy, &vi, &vf);
        prop_assert!(close(dfy, structural) && close(dfy, spectral));
        // |σy,w|² = d_f − 1 on real states.
        prop_assert!(close(gy.norm_sqr(), dfy - 1.0));

        let oz = pauli(PauliAxis::Z);
        let (wz, dfz) = sz_relations(ti, tf).unwrap();
        prop_assert!(close(weak_value_trace(&oz, &vi, &vf).unwrap().norm(), wz));
        let (structural, spectral) = generic_df(&oz, &vi, &vf);
        prop_assert!(close(dfz, structural) && close(dfz, spectral));
    }

    #[test]
    fn varying_observable_at_quarter_phase(ti in 0.0..=FRAC_PI_2, theta in 0.0..=FRAC_PI_2) {
        prop_assume!(ti.cos().powi(2) > MIN_OVERLAP);
        let q = appc_quantities(AppendixCScenario::new(ti, theta).unwrap());
        let o = bloch_observable_unchecked(theta, FRAC_PI_4);
        let (vi, vf) = (qubit(ti, 0.0), qubit(0.0, 0.0));
        prop_assert!(close(weak_value_trace(&o, &vi, &vf).unwrap().norm(), q.wv_abs));
        // Denominator-free traces: ⟨ψ|O|ψ⟩ of each projector.
        let s = ti.cos().powi(2);
        let on_f = build_weak_operator(&o, &vi, &vf, Variant::APrime).unwrap();
        let on_i = build_weak_operator(&o, &vi, &vf, Variant::A).unwrap();
        prop_assert!(close(on_f.nonzero_eig().re * s, q.alpha_a));
        prop_assert!(close(on_i.nonzero_eig().re * s, q.alpha_aprime));
        prop_assert!(close(normalized_henrici(&o, &vf).unwrap(), q.df_a));
        prop_assert!(close(normalized_henrici(&o, &vi).unwrap(), q.df_aprime));
    }

    #[test]
    fn varying_observable_values_and_slopes(
        theta in 0.0..=FRAC_PI_2,
        ti in 0.0..=FRAC_PI_2,
        tf in 0.0..=FRAC_PI_2,
        phi in 0.0..=TAU,
    ) {
        let v = appd_values_and_derivatives(theta, ti, tf, phi);
        let (vi, vf) = (to_entries(ti), to_entries(tf));
        let numerator = |t: f64| {
            let o = to_rows(bloch_observable_unchecked(t, phi).matrix());
            braket(&vf, &apply(&o, &vi)).norm()
        };
        let spread = |t: f64, psi: &[C]| {
            let o = to_rows(bloch_observable_unchecked(t, phi).matrix());
            let (m1, m2) = moments(&o, psi);
            (m2 - m1 * m1).max(0.0).sqrt()
        };
        prop_assert!(close(v.numerator, numerator(theta)));
        prop_assert!(close(v.dfn_a, spread(theta, &vf)));
        prop_assert!(close(v.dfn_aprime, spread(theta, &vi)));

        // Central differences; near a modulus kink the truncation error grows
        // like (h/m)², so keep m ≥ 1e-2.
        let h = 1e-5;
        prop_assume!(theta > h && theta < FRAC_PI_2 - h);
        prop_assume!(v.numerator > 1e-2 && v.dfn_a > 1e-2 && v.dfn_aprime > 1e-2);
        let fd = |f: &dyn Fn(f64) -> f64| (f(theta + h) - f(theta - h)) / (2.0 * h);
        let fd_tol = 1e-6;
        prop_assert!((v.d_numerator - fd(&numerator)).abs() <= fd_tol * v.d_numerator.abs().max(1.0));
        prop_assert!((v.d_dfn_a - fd(&|t| spread(t, &vf))).abs() <= fd_tol * v.d_dfn_a.abs().max(1.0));
        prop_assert!((v.d_dfn_aprime - fd(&|t| spread(t, &vi))).abs() <= fd_tol * v.d_dfn_aprime.abs().max(1.0));
    }
}

fn to_entries(theta: f64) -> Vec<C> {
    vec![c(theta.cos(), 0.0), c(theta.sin(), 0.0)]
}
