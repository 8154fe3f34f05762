//! Weak values and the rank-1 weak operators `Â = OΠᵢ/|⟨ψf|ψi⟩|²` and
//! `Â′ = Π_f O/|⟨ψf|ψi⟩|²`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, CVector, ComplexScalar};
use crate::quantum::{self, Observable};

pub const DEFAULT_OVERLAP_FLOOR: f64 = 1e-14;
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;
pub const DEGENERACY_ANGLE_TOL: f64 = 1e-6;
pub const NILPOTENT_TOL: f64 = 1e-10;
const RADICAND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// `O Πᵢ / |⟨ψf|ψi⟩|²`, weak value read off in `ψf`.
    A,
    /// `Π_f O / |⟨ψf|ψi⟩|²`, weak value read off in `ψi`.
    APrime,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::A => "A",
            Variant::APrime => "A-prime",
        }
    }
}

fn check_inputs(o: &Observable, psi_i: &CVector, psi_f: &CVector, floor: f64) -> Result<ComplexScalar> {
    for psi in [psi_i, psi_f] {
        if psi.dim() != o.dim() {
            return Err(Error::DimensionMismatch {
                expected: o.dim(),
                found: psi.dim(),
            });
        }
    }
    let ov = quantum::overlap(psi_f, psi_i)?;
    let overlap_sq = ov.norm_sqr();
    if overlap_sq < floor {
        return Err(Error::NearOrthogonalPostselection { overlap_sq, floor });
    }
    Ok(ov)
}

/// `⟨ψf|O|ψi⟩ / ⟨ψf|ψi⟩`.
pub fn weak_value_trace(o: &Observable, psi_i: &CVector, psi_f: &CVector) -> Result<ComplexScalar> {
    weak_value_trace_with_floor(o, psi_i, psi_f, DEFAULT_OVERLAP_FLOOR)
}

pub fn weak_value_trace_with_floor(
    o: &Observable,
    psi_i: &CVector,
    psi_f: &CVector,
    floor: f64,
) -> Result<ComplexScalar> {
    let ov = check_inputs(o, psi_i, psi_f, floor)?;
    Ok(o.matrix().sandwich(psi_f, psi_i)? / ov)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakOperator {
    matrix: CMatrix,
    variant: Variant,
    observable: Observable,
    psi_i: CVector,
    psi_f: CVector,
    overlap_sq: f64,
    nonzero_eig: ComplexScalar,
}

impl WeakOperator {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn psi_i(&self) -> &CVector {
        &self.psi_i
    }

    pub fn psi_f(&self) -> &CVector {
        &self.psi_f
    }

    pub fn overlap_sq(&self) -> f64 {
        self.overlap_sq
    }

    /// The only eigenvalue that can be nonzero, equal to the trace.
    pub fn nonzero_eig(&self) -> ComplexScalar {
        self.nonzero_eig
    }

    /// The state whose expectation value of this operator is the weak value.
    pub fn reading_state(&self) -> &CVector {
        match self.variant {
            Variant::A => &self.psi_f,
            Variant::APrime => &self.psi_i,
        }
    }

    /// The state whose uncertainty sets the departure from normality.
    pub fn fluctuation_state(&self) -> &CVector {
        match self.variant {
            Variant::A => &self.psi_i,
            Variant::APrime => &self.psi_f,
        }
    }

    /// Weak value as an expectation value of this operator.
    pub fn expectation(&self) -> ComplexScalar {
        let psi = self.reading_state();
        self.matrix
            .sandwich(psi, psi)
            .expect("dimensions checked at construction")
    }

    pub fn henrici_structural(&self) -> Result<f64> {
        henrici_structural(&self.observable, self.fluctuation_state(), self.overlap_sq)
    }
}

pub fn build_weak_operator(o: &Observable, psi_i: &CVector, psi_f: &CVector, variant: Variant) -> Result<WeakOperator> {
    build_weak_operator_with_floor(o, psi_i, psi_f, variant, DEFAULT_OVERLAP_FLOOR)
}

pub fn build_weak_operator_with_floor(
    o: &Observable,
    psi_i: &CVector,
    psi_f: &CVector,
    variant: Variant,
    floor: f64,
) -> Result<WeakOperator> {
    let overlap_sq = check_inputs(o, psi_i, psi_f, floor)?.norm_sqr();
    let product = match variant {
        Variant::A => o.matrix() * &CMatrix::outer(psi_i, psi_i)?,
        Variant::APrime => &CMatrix::outer(psi_f, psi_f)? * o.matrix(),
    };
    let matrix = product.scale(c64(1.0 / overlap_sq, 0.0));
    let nonzero_eig = matrix.trace();
    Ok(WeakOperator {
        matrix,
        variant,
        observable: o.clone(),
        psi_i: psi_i.clone(),
        psi_f: psi_f.clone(),
        overlap_sq,
        nonzero_eig,
    })
}

/// `sqrt(‖M‖_F² − Σ|λ|²)`, evaluated on the complex Schur triangle.
pub fn henrici_spectral(m: &CMatrix) -> Result<f64> {
    linalg::schur_departure(m)
}

fn check_state(o: &Observable, psi: &CVector) -> Result<()> {
    if psi.dim() != o.dim() {
        return Err(Error::DimensionMismatch {
            expected: o.dim(),
            found: psi.dim(),
        });
    }
    let n = psi.norm();
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized { norm: n });
    }
    Ok(())
}

/// Raw `⟨ψ|O²|ψ⟩ − ⟨ψ|O|ψ⟩²`, unclamped.
pub fn variance_radicand(o: &Observable, psi: &CVector) -> Result<f64> {
    check_state(o, psi)?;
    let opsi = o.matrix().mul_vec(psi)?;
    let second = opsi.norm_sqr();
    let first = psi.inner(&opsi)?.re;
    Ok(second - first * first)
}

/// `Δψ O = ‖(O − ⟨O⟩ψ)ψ‖`, the residual norm, which avoids the cancellation
/// in `sqrt(⟨O²⟩ − ⟨O⟩²)` near eigenstates.
fn uncertainty(o: &Observable, psi: &CVector) -> Result<f64> {
    let radicand = variance_radicand(o, psi)?;
    if radicand < -RADICAND_TOL {
        return Err(Error::NumericalInconsistency { radicand });
    }
    let opsi = o.matrix().mul_vec(psi)?;
    let mean = psi.inner(&opsi)?.re;
    Ok(opsi.sub(&psi.scale(c64(mean, 0.0))).norm())
}

/// `Δψ O / overlap_sq`; pass `ψi` for `Â` and `ψf` for `Â′`.
pub fn henrici_structural(o: &Observable, psi: &CVector, overlap_sq: f64) -> Result<f64> {
    if !(overlap_sq.is_finite() && overlap_sq > 0.0) {
        return Err(Error::Domain {
            name: "overlap_sq",
            value: overlap_sq,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(uncertainty(o, psi)? / overlap_sq)
}

/// Denominator-free departure `Δψ O`.
pub fn normalized_henrici(o: &Observable, psi: &CVector) -> Result<f64> {
    uncertainty(o, psi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Classification {
    pub in_range: bool,
    pub anomalous_complex: bool,
    pub anomalous_outside_range: bool,
    pub amplifying: bool,
}

impl Classification {
    pub const IN_RANGE: u8 = 1;
    pub const COMPLEX: u8 = 2;
    pub const OUTSIDE: u8 = 4;
    pub const AMPLIFYING: u8 = 8;

    /// Bitmask of the tags, 1 in-range, 2 complex, 4 outside-range, 8 amplifying.
    pub fn code(&self) -> u8 {
        let mut c = 0;
        if self.in_range {
            c |= Self::IN_RANGE;
        }
        if self.anomalous_complex {
            c |= Self::COMPLEX;
        }
        if self.anomalous_outside_range {
            c |= Self::OUTSIDE;
        }
        if self.amplifying {
            c |= Self::AMPLIFYING;
        }
        c
    }

    pub fn tags(&self) -> Vec<&'static str> {
        let mut t = Vec::new();
        if self.in_range {
            t.push("in-range");
        }
        if self.anomalous_complex {
            t.push("anomalous-complex");
        }
        if self.anomalous_outside_range {
            t.push("anomalous-outside-range");
        }
        if self.amplifying {
            t.push("amplifying");
        }
        t
    }

    pub fn is_anomalous(&self) -> bool {
        self.anomalous_complex || self.anomalous_outside_range
    }
}

pub fn classify(value: ComplexScalar, o: &Observable, tol: f64) -> Classification {
    let (lo, hi) = (o.min_eigenvalue(), o.max_eigenvalue());
    let anomalous_complex = value.im.abs() > tol;
    let anomalous_outside_range = value.re < lo - tol || value.re > hi + tol;
    Classification {
        in_range: !anomalous_complex && !anomalous_outside_range,
        anomalous_complex,
        anomalous_outside_range,
        amplifying: value.norm() > o.max_abs_eigenvalue() + tol,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakValueReport {
    pub value: ComplexScalar,
    pub spectrum_min: f64,
    pub spectrum_max: f64,
    pub classification: Classification,
    pub henrici_a: f64,
    pub henrici_aprime: f64,
    pub overlap_sq: f64,
}

pub fn weak_value_report(o: &Observable, psi_i: &CVector, psi_f: &CVector, tol: f64) -> Result<WeakValueReport> {
    let value = weak_value_trace(o, psi_i, psi_f)?;
    let overlap_sq = quantum::overlap(psi_f, psi_i)?.norm_sqr();
    Ok(WeakValueReport {
        value,
        spectrum_min: o.min_eigenvalue(),
        spectrum_max: o.max_eigenvalue(),
        classification: classify(value, o, tol),
        henrici_a: henrici_structural(o, psi_i, overlap_sq)?,
        henrici_aprime: henrici_structural(o, psi_f, overlap_sq)?,
        overlap_sq,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenstructureReport {
    /// `{trace, 0, …, 0}`.
    pub eigenvalues: Vec<ComplexScalar>,
    pub largest_abs_eig: f64,
    /// Fubini–Study angle between the two eigenvectors (dim 2 only).
    pub eigvec_angle: Option<f64>,
    pub nilpotent: bool,
    pub degenerate: bool,
    /// Matching distance between the reported eigenvalues and the solver's.
    pub solver_discrepancy: f64,
}

/// Null vector of a nonzero 2×2 matrix of rank 1, from its largest row.
fn null_vector_2x2(m: &CMatrix) -> Option<CVector> {
    let r0 = (m[(0, 0)], m[(0, 1)]);
    let r1 = (m[(1, 0)], m[(1, 1)]);
    let n0 = r0.0.norm_sqr() + r0.1.norm_sqr();
    let n1 = r1.0.norm_sqr() + r1.1.norm_sqr();
    let (r, n) = if n0 >= n1 { (r0, n0) } else { (r1, n1) };
    if n == 0.0 {
        return None;
    }
    CVector::new(vec![r.1, -r.0]).ok()
}

fn eigvec_angle_2x2(w: &CMatrix, trace: ComplexScalar) -> f64 {
    let shifted = w - &CMatrix::identity(2).scale(trace);
    match (null_vector_2x2(&shifted), null_vector_2x2(w)) {
        (Some(u), Some(v)) => quantum::fubini_angle(&u, &v).unwrap_or(FRAC_PI_2),
        _ => FRAC_PI_2,
    }
}

pub fn eigenstructure(w: &WeakOperator) -> Result<EigenstructureReport> {
    let m = w.matrix();
    let d = m.dim();
    let trace = w.nonzero_eig();
    let mut eigenvalues = vec![c64(0.0, 0.0); d];
    eigenvalues[0] = trace;
    let solver = linalg::eigvals_qr_default(m)?;
    let solver_discrepancy = linalg::spectrum_distance(&eigenvalues, &solver);
    let nilpotent = trace.norm() <= NILPOTENT_TOL && linalg::frobenius_norm(m) > NILPOTENT_TOL;
    let eigvec_angle = (d == 2).then(|| eigvec_angle_2x2(m, trace));
    Ok(EigenstructureReport {
        eigenvalues,
        largest_abs_eig: trace.norm(),
        eigvec_angle,
        nilpotent,
        degenerate: eigvec_angle.is_some_and(|a| a <= DEGENERACY_ANGLE_TOL),
        solver_discrepancy,
    })
}

/// `‖W² − tr(W)·W‖_F`.
pub fn quasi_idempotence_defect(w: &WeakOperator) -> f64 {
    let m = w.matrix();
    linalg::frobenius_norm(&(&(m * m) - &m.scale(w.nonzero_eig())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{pauli, qubit_state, PauliAxis, QubitParams};
    use std::f64::consts::FRAC_PI_4;

    fn qubit(theta: f64, xi: f64) -> CVector {
        qubit_state(QubitParams::new(theta, xi).unwrap()).unwrap()
    }

    #[test]
    fn weak_value_examples() {
        let sz = pauli(PauliAxis::Z);
        let e0 = CVector::basis(2, 0).unwrap();
        for k in 0..20 {
            let ti = 1.5 * k as f64 / 19.0;
            let v = weak_value_trace(&sz, &qubit(ti, 0.0), &e0).unwrap();
            assert!((v - c64(1.0, 0.0)).norm() < 1e-12);
        }
        let sy = pauli(PauliAxis::Y);
        let (ti, tf) = (0.2, 0.9);
        let v = weak_value_trace(&sy, &qubit(ti, 0.0), &qubit(tf, 0.0)).unwrap();
        assert!((v - c64(0.0, (tf - ti).tan())).norm() < 1e-12);
        let sx = pauli(PauliAxis::X);
        let psi = qubit(0.4, 1.1);
        let v = weak_value_trace(&sx, &psi, &psi).unwrap();
        assert!(v.im.abs() < 1e-15 && v.re.abs() <= 1.0);
    }

    #[test]
    fn orthogonal_postselection_is_rejected() {
        let sx = pauli(PauliAxis::X);
        let e0 = CVector::basis(2, 0).unwrap();
        let e1 = CVector::basis(2, 1).unwrap();
        assert!(matches!(
            weak_value_trace(&sx, &e0, &e1),
            Err(Error::NearOrthogonalPostselection { overlap_sq, .. }) if overlap_sq == 0.0
        ));
        assert!(build_weak_operator(&sx, &e0, &e1, Variant::A).is_err());
        let nearly = qubit(FRAC_PI_2 - 1e-8, 0.0);
        assert!(weak_value_trace(&sx, &e0, &nearly).is_err());
        assert!(weak_value_trace_with_floor(&sx, &e0, &nearly, 1e-17).is_ok());
    }

    #[test]
    fn operator_routes_agree() {
        let sx = pauli(PauliAxis::X);
        let (pi, pf) = (qubit(0.3, 0.7), qubit(1.2, 2.5));
        let v = weak_value_trace(&sx, &pi, &pf).unwrap();
        for variant in [Variant::A, Variant::APrime] {
            let w = build_weak_operator(&sx, &pi, &pf, variant).unwrap();
            assert!((w.expectation() - v).norm() < 1e-12);
            assert!((w.nonzero_eig() - w.matrix().trace()).norm() == 0.0);
        }
    }

    #[test]
    fn eigenvector_preselection_gives_normal_operator() {
        let sx = pauli(PauliAxis::X);
        let plus = qubit(FRAC_PI_4, 0.0);
        let w = build_weak_operator(&sx, &plus, &qubit(0.3, 0.2), Variant::A).unwrap();
        assert!(linalg::normality_defect(w.matrix()) <= 1e-12);
        assert!((w.expectation() - c64(1.0, 0.0)).norm() < 1e-12);
        assert!(quasi_idempotence_defect(&w) <= 1e-12);
    }

    #[test]
    fn henrici_spectral_examples() {
        let j = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!((henrici_spectral(&j).unwrap() - 1.0).abs() < 1e-15);
        assert!(henrici_spectral(pauli(PauliAxis::Y).matrix()).unwrap() <= 1e-10);
        let sx = pauli(PauliAxis::X);
        for &(ti, tf) in &[(0.2, 0.9), (1.0, 0.1), (0.6, 0.6)] {
            let w = build_weak_operator(&sx, &qubit(ti, 0.0), &qubit(tf, 0.0), Variant::A).unwrap();
            let expected = (2.0 * ti).cos().abs() / (tf - ti).cos().powi(2);
            let got = henrici_spectral(w.matrix()).unwrap();
            assert!(
                (got - expected).abs() <= 1e-12 * (1.0 + expected),
                "{got} vs {expected}"
            );
        }
    }

    #[test]
    fn henrici_structural_examples() {
        let sx = pauli(PauliAxis::X);
        let e0 = CVector::basis(2, 0).unwrap();
        assert!((henrici_structural(&sx, &e0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(henrici_structural(&sx, &qubit(FRAC_PI_4, 0.0), 0.3).unwrap() <= 1e-15);
        assert!((henrici_structural(&sx, &e0, 0.25).unwrap() - 4.0).abs() < 1e-15);
        assert!(henrici_structural(&sx, &e0, 0.0).is_err());
        let sz = pauli(PauliAxis::Z);
        assert!((normalized_henrici(&sz, &qubit(FRAC_PI_4, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(normalized_henrici(&sz, &e0).unwrap(), 0.0);
    }

    #[test]
    fn classify_examples() {
        let sx = pauli(PauliAxis::X);
        let c = classify(c64(0.5, 0.0), &sx, DEFAULT_CLASSIFY_TOL);
        assert_eq!(c.tags(), vec!["in-range"]);
        assert_eq!(c.code(), 1);
        let c = classify(c64(0.0, 0.9), &sx, DEFAULT_CLASSIFY_TOL);
        assert_eq!(c.tags(), vec!["anomalous-complex"]);
        let c = classify(c64(-3.2, 0.0), &sx, DEFAULT_CLASSIFY_TOL);
        assert_eq!(c.tags(), vec!["anomalous-outside-range", "amplifying"]);
        assert_eq!(c.code(), 12);
        let c = classify(c64(1.0 + 1e-12, 0.0), &sx, DEFAULT_CLASSIFY_TOL);
        assert!(c.in_range && !c.amplifying);
        let c = classify(c64(0.8, 0.8), &sx, DEFAULT_CLASSIFY_TOL);
        assert!(c.anomalous_complex && c.amplifying && !c.anomalous_outside_range);
    }

    #[test]
    fn report_collects_both_departures() {
        let sx = pauli(PauliAxis::X);
        let (pi, pf) = (qubit(0.2, 0.0), qubit(0.9, 0.0));
        let r = weak_value_report(&sx, &pi, &pf, DEFAULT_CLASSIFY_TOL).unwrap();
        let ov = (0.7f64).cos().powi(2);
        assert!((r.overlap_sq - ov).abs() < 1e-15);
        assert!((r.henrici_a - (0.4f64).cos() / ov).abs() < 1e-12);
        assert!((r.henrici_aprime - (1.8f64).cos().abs() / ov).abs() < 1e-12);
        assert!((r.spectrum_min + 1.0).abs() < 1e-15 && (r.spectrum_max - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nilpotent_eigenstructure() {
        // ⟨ψi|σz|ψi⟩ = 0 on the equator.
        let sz = pauli(PauliAxis::Z);
        let w = build_weak_operator(&sz, &qubit(FRAC_PI_4, 0.0), &qubit(0.3, 0.0), Variant::A).unwrap();
        let e = eigenstructure(&w).unwrap();
        assert!(e.nilpotent && e.degenerate);
        assert!(e.eigenvalues.iter().all(|l| l.norm() <= 1e-12));
        assert!(e.eigvec_angle.unwrap() <= 1e-12);
        let m = w.matrix();
        assert!(linalg::frobenius_norm(&(m * m)) <= 1e-12);
    }

    #[test]
    fn generic_eigenstructure() {
        let sx = pauli(PauliAxis::X);
        let w = build_weak_operator(&sx, &qubit(0.2, 0.4), &qubit(0.9, 1.3), Variant::APrime).unwrap();
        let e = eigenstructure(&w).unwrap();
        assert!(!e.nilpotent && !e.degenerate);
        assert!(e.solver_discrepancy <= 1e-10);
        let pf = w.psi_f();
        let expected = sx.matrix().sandwich(pf, pf).unwrap().norm() / w.overlap_sq();
        assert!((e.largest_abs_eig - expected).abs() <= 1e-12);
        let angle = e.eigvec_angle.unwrap();
        assert!(angle > 0.0 && angle <= FRAC_PI_2);
        // Eigenvector angle of Â is the angle between Oψi and the complement of ψi.
        let w = build_weak_operator(&sx, &qubit(0.2, 0.0), &qubit(0.9, 0.0), Variant::A).unwrap();
        let e = eigenstructure(&w).unwrap();
        let expected = FRAC_PI_2 - (FRAC_PI_2 - 0.4f64).abs();
        assert!((e.eigvec_angle.unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn eigenvector_preselection_has_orthogonal_eigenvectors() {
        let sz = pauli(PauliAxis::Z);
        let e0 = CVector::basis(2, 0).unwrap();
        let w = build_weak_operator(&sz, &e0, &qubit(0.5, 0.0), Variant::A).unwrap();
        let e = eigenstructure(&w).unwrap();
        assert!((e.eigvec_angle.unwrap() - FRAC_PI_2).abs() < 1e-12);
    }
}
