//! Parametrized pure states and the observable catalog.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, CVector, ComplexScalar};

const HERMITIAN_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-12;

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if !(value.is_finite() && value >= lo && value <= hi) {
        return Err(Error::Domain { name, value, lo, hi });
    }
    Ok(())
}

/// Wrap an angle into `[0, period]`.
fn wrap(value: f64, period: f64) -> f64 {
    let w = value.rem_euclid(period);
    if w == 0.0 && value > 0.0 {
        period
    } else {
        w
    }
}

/// Reflect a polar angle into `[0, π/2]` (period π, mirrored at π/2).
fn fold_polar(value: f64) -> f64 {
    let w = value.rem_euclid(PI);
    if w > FRAC_PI_2 {
        PI - w
    } else {
        w
    }
}

/// Qubit state `(cos θ, e^{iξ} sin θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    pub theta: f64,
    pub xi: f64,
}

impl QubitParams {
    pub fn new(theta: f64, xi: f64) -> Result<Self> {
        check_range("theta", theta, 0.0, FRAC_PI_2)?;
        check_range("xi", xi, 0.0, 2.0 * PI)?;
        Ok(Self { theta, xi })
    }

    /// Non-canonical constructor for sweeps: folds θ into `[0, π/2]` and
    /// wraps ξ into `[0, 2π]`. Folding θ can change the state by a sign
    /// on the second component, so results are only meaningful for
    /// phase-insensitive quantities.
    pub fn wrapped(theta: f64, xi: f64) -> Self {
        Self {
            theta: fold_polar(theta),
            xi: wrap(xi, 2.0 * PI),
        }
    }
}

/// Qutrit state `(cos θ, e^{iχ₁} cos α sin θ, e^{iχ₂} sin α sin θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QutritParams {
    pub theta: f64,
    pub alpha: f64,
    pub chi1: f64,
    pub chi2: f64,
}

impl QutritParams {
    pub fn new(theta: f64, alpha: f64, chi1: f64, chi2: f64) -> Result<Self> {
        check_range("theta", theta, 0.0, FRAC_PI_2)?;
        check_range("alpha", alpha, 0.0, FRAC_PI_2)?;
        check_range("chi1", chi1, 0.0, 2.0 * PI)?;
        check_range("chi2", chi2, 0.0, 2.0 * PI)?;
        Ok(Self {
            theta,
            alpha,
            chi1,
            chi2,
        })
    }

    pub fn wrapped(theta: f64, alpha: f64, chi1: f64, chi2: f64) -> Self {
        Self {
            theta: fold_polar(theta),
            alpha: fold_polar(alpha),
            chi1: wrap(chi1, 2.0 * PI),
            chi2: wrap(chi2, 2.0 * PI),
        }
    }
}

pub fn qubit_state(p: QubitParams) -> Result<CVector> {
    QubitParams::new(p.theta, p.xi)?;
    CVector::new(vec![
        c64(p.theta.cos(), 0.0),
        ComplexScalar::from_polar(p.theta.sin(), p.xi),
    ])
}

pub fn qutrit_state(p: QutritParams) -> Result<CVector> {
    QutritParams::new(p.theta, p.alpha, p.chi1, p.chi2)?;
    let s = p.theta.sin();
    CVector::new(vec![
        c64(p.theta.cos(), 0.0),
        ComplexScalar::from_polar(p.alpha.cos() * s, p.chi1),
        ComplexScalar::from_polar(p.alpha.sin() * s, p.chi2),
    ])
}

fn check_unit(v: &CVector) -> Result<()> {
    let n = v.norm();
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm: n });
    }
    Ok(())
}

/// `<ψ_f|ψ_i>` for unit states.
pub fn overlap(psi_f: &CVector, psi_i: &CVector) -> Result<ComplexScalar> {
    if psi_f.dim() != psi_i.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi_f.dim(),
            found: psi_i.dim(),
        });
    }
    check_unit(psi_f)?;
    check_unit(psi_i)?;
    psi_f.inner(psi_i)
}

/// Fubini–Study angle `arccos |<v1|v2>|` between the rays of two nonzero vectors.
pub fn fubini_angle(v1: &CVector, v2: &CVector) -> Result<f64> {
    let n1 = v1.norm();
    let n2 = v2.norm();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::DegenerateInput("zero vector has no Fubini-Study angle"));
    }
    let c = (v1.inner(v2)?.norm() / (n1 * n2)).min(1.0);
    Ok(c.acos())
}

/// A Hermitian matrix with its spectrum cached in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    matrix: CMatrix,
    spectrum: Vec<f64>,
    eigenvectors: Vec<CVector>,
}

impl Observable {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// Orthonormal eigenvectors, in the order of [`Observable::spectrum`].
    pub fn eigenvectors(&self) -> &[CVector] {
        &self.eigenvectors
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.spectrum.last().expect("nonempty spectrum")
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.min_eigenvalue().abs().max(self.max_eigenvalue().abs())
    }

    pub fn squared(&self) -> CMatrix {
        &self.matrix * &self.matrix
    }
}

pub fn observable_from_matrix(m: CMatrix) -> Result<Observable> {
    let defect = linalg::hermiticity_defect(&m);
    if defect > HERMITIAN_TOL * linalg::frobenius_norm(&m).max(1.0) {
        return Err(Error::HermiticityViolation { defect });
    }
    let (spectrum, eigenvectors) = linalg::hermitian_eigen(&m);
    Ok(Observable {
        matrix: m,
        spectrum,
        eigenvectors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

fn pauli_matrix(axis: PauliAxis) -> CMatrix {
    let (o, l, i) = (c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 1.0));
    let rows = match axis {
        PauliAxis::X => [[o, l], [l, o]],
        PauliAxis::Y => [[o, -i], [i, o]],
        PauliAxis::Z => [[l, o], [o, -l]],
    };
    CMatrix::from_rows(&rows.map(|r| r.to_vec())).expect("pauli matrix")
}

pub fn pauli(axis: PauliAxis) -> Observable {
    observable_from_matrix(pauli_matrix(axis)).expect("Pauli matrices are Hermitian")
}

/// Gell-Mann matrix `λ_k`, `k ∈ 1..=8`.
pub fn gellmann(k: usize) -> Result<Observable> {
    let (o, l, i) = (c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 1.0));
    let rows: [[ComplexScalar; 3]; 3] = match k {
        1 => [[o, l, o], [l, o, o], [o, o, o]],
        2 => [[o, -i, o], [i, o, o], [o, o, o]],
        3 => [[l, o, o], [o, -l, o], [o, o, o]],
        4 => [[o, o, l], [o, o, o], [l, o, o]],
        5 => [[o, o, -i], [o, o, o], [i, o, o]],
        6 => [[o, o, o], [o, o, l], [o, l, o]],
        7 => [[o, o, o], [o, o, -i], [o, i, o]],
        8 => {
            let s = c64(1.0 / 3f64.sqrt(), 0.0);
            [[s, o, o], [o, s, o], [o, o, s * -2.0]]
        }
        _ => return Err(Error::IndexOutOfRange { index: k, lo: 1, hi: 8 }),
    };
    observable_from_matrix(CMatrix::from_rows(&rows.map(|r| r.to_vec()))?)
}

/// Unit Bloch-vector observable `sinθ cosφ σx + sinθ sinφ σy + cosθ σz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochObservableParams {
    pub theta: f64,
    pub phi: f64,
}

impl BlochObservableParams {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        check_range("theta", theta, 0.0, FRAC_PI_2)?;
        check_range("phi", phi, 0.0, 2.0 * PI)?;
        Ok(Self { theta, phi })
    }
}

pub fn bloch_observable(p: BlochObservableParams) -> Result<Observable> {
    BlochObservableParams::new(p.theta, p.phi)?;
    Ok(bloch_observable_unchecked(p.theta, p.phi))
}

/// Same matrix as [`bloch_observable`] without the parameter-range check,
/// for finite-difference stencils that step just outside `[0, π/2]`.
pub fn bloch_observable_unchecked(theta: f64, phi: f64) -> Observable {
    let (st, ct) = theta.sin_cos();
    let off = ComplexScalar::from_polar(st, -phi);
    let m = CMatrix::from_rows(&[vec![c64(ct, 0.0), off], vec![off.conj(), c64(-ct, 0.0)]]).expect("finite entries");
    observable_from_matrix(m).expect("Bloch observable is Hermitian")
}

/// `(σx + σy + σz)/√3`.
pub fn pauli_diagonal_combination() -> Observable {
    let s = 1.0 / 3f64.sqrt();
    let sum = &(&pauli_matrix(PauliAxis::X) + &pauli_matrix(PauliAxis::Y)) + &pauli_matrix(PauliAxis::Z);
    observable_from_matrix(sum.scale(c64(s, 0.0))).expect("Hermitian")
}
