//! Small dense complex linear algebra.
//!
//! Everything here works on square matrices of dimension 2 to 6 (operators)
//! and on vectors of arbitrary length (meter wave functions). Storage is
//! row-major; all values are immutable once built.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type ComplexScalar = Complex64;

pub const DEFAULT_QR_TOL: f64 = 1e-12;

#[inline]
pub fn c64(re: f64, im: f64) -> ComplexScalar {
    Complex64::new(re, im)
}

fn all_finite(values: &[ComplexScalar]) -> bool {
    values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// A complex column vector ("ket").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVector {
    entries: Vec<ComplexScalar>,
}

impl CVector {
    pub fn new(entries: Vec<ComplexScalar>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyDimension("vector"));
        }
        if !all_finite(&entries) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(Self { entries })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| c64(x, 0.0)).collect())
    }

    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::IndexOutOfRange {
                index: k,
                lo: 0,
                hi: dim.saturating_sub(1),
            });
        }
        let mut v = vec![ComplexScalar::new(0.0, 0.0); dim];
        v[k] = c64(1.0, 0.0);
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[ComplexScalar] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<ComplexScalar> {
        self.entries
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &CVector) -> Result<ComplexScalar> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.entries.iter().zip(&other.entries).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: ComplexScalar) -> CVector {
        CVector {
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn normalized(&self) -> Result<CVector> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::DegenerateInput("zero vector cannot be normalized"));
        }
        Ok(self.scale(c64(1.0 / n, 0.0)))
    }

    pub fn sub(&self, other: &CVector) -> CVector {
        CVector {
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Index<usize> for CVector {
    type Output = ComplexScalar;
    fn index(&self, i: usize) -> &ComplexScalar {
        &self.entries[i]
    }
}

/// A square complex matrix in row-major order.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    dim: usize,
    data: Vec<ComplexScalar>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})[", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn new(dim: usize, data: Vec<ComplexScalar>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension("matrix"));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if !all_finite(&data) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<ComplexScalar>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<ComplexScalar>> = rows.iter().map(|r| r.iter().map(|&x| c64(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![c64(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = c64(1.0, 0.0);
        }
        m
    }

    pub fn diag(values: &[ComplexScalar]) -> Result<Self> {
        let dim = values.len();
        let mut data = vec![c64(0.0, 0.0); dim * dim];
        for (i, v) in values.iter().enumerate() {
            data[i * dim + i] = *v;
        }
        Self::new(dim, data)
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &CVector, v: &CVector) -> Result<Self> {
        if u.dim() != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: u.dim(),
                found: v.dim(),
            });
        }
        let dim = u.dim();
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(u[i] * v[j].conj());
            }
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[ComplexScalar] {
        &self.data
    }

    pub fn trace(&self) -> ComplexScalar {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: ComplexScalar) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn mul_vec(&self, v: &CVector) -> Result<CVector> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.dim(),
            });
        }
        let n = self.dim;
        let entries = (0..n)
            .map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum())
            .collect();
        Ok(CVector { entries })
    }

    /// `<u|M|v>`.
    pub fn sandwich(&self, u: &CVector, v: &CVector) -> Result<ComplexScalar> {
        u.inner(&self.mul_vec(v)?)
    }

    fn check_same(&self, other: &CMatrix) {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch");
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = ComplexScalar;
    fn index(&self, (i, j): (usize, usize)) -> &ComplexScalar {
        &self.data[i * self.dim + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.check_same(rhs);
        let n = self.dim;
        let mut data = vec![c64(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == c64(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        CMatrix { dim: n, data }
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.check_same(rhs);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.check_same(rhs);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn adjoint(m: &CMatrix) -> CMatrix {
    let n = m.dim;
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            data.push(m.data[j * n + i].conj());
        }
    }
    CMatrix { dim: n, data }
}

/// `‖M M† − M† M‖_F`; zero exactly for normal matrices.
pub fn normality_defect(m: &CMatrix) -> f64 {
    let ad = adjoint(m);
    frobenius_norm(&(&(m * &ad) - &(&ad * m)))
}

/// `‖M − M†‖_F`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    frobenius_norm(&(m - &adjoint(m)))
}

fn sort_lex(values: &mut [ComplexScalar]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

fn poly_eval(coeffs: &[ComplexScalar], x: ComplexScalar) -> (ComplexScalar, ComplexScalar) {
    // monic polynomial with coefficients from highest (excluding the leading 1) to constant
    let mut p = c64(1.0, 0.0);
    let mut dp = c64(0.0, 0.0);
    for c in coeffs {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn newton_polish(coeffs: &[ComplexScalar], mut x: ComplexScalar, steps: usize) -> ComplexScalar {
    for _ in 0..steps {
        let (p, dp) = poly_eval(coeffs, x);
        if p == c64(0.0, 0.0) || dp.norm() < f64::MIN_POSITIVE {
            break;
        }
        let candidate = x - p / dp;
        let (pc, _) = poly_eval(coeffs, candidate);
        if !(pc.norm() < p.norm()) {
            break;
        }
        x = candidate;
    }
    x
}

/// Eigenvalues of a 2×2 or 3×3 matrix from the characteristic polynomial.
///
/// Roots come from the quadratic formula or Cardano's method in complex
/// arithmetic, each polished by at most two Newton steps. The result is
/// sorted lexicographically by (re, im).
pub fn eigvals_closed(m: &CMatrix) -> Result<Vec<ComplexScalar>> {
    let mut roots = match m.dim {
        2 => {
            let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
            let half_sum = (a + d) * 0.5;
            let half_diff = (a - d) * 0.5;
            let disc = (half_diff * half_diff + b * c).sqrt();
            let coeffs = [-(a + d), a * d - b * c];
            vec![
                newton_polish(&coeffs, half_sum + disc, 2),
                newton_polish(&coeffs, half_sum - disc, 2),
            ]
        }
        3 => {
            let e = |i: usize, j: usize| m[(i, j)];
            let tr = e(0, 0) + e(1, 1) + e(2, 2);
            let minors = e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0) + e(0, 0) * e(2, 2) - e(0, 2) * e(2, 0)
                + e(1, 1) * e(2, 2)
                - e(1, 2) * e(2, 1);
            let det = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
                - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
            // λ³ + c2 λ² + c1 λ + c0
            let (c2, c1, c0) = (-tr, minors, -det);
            let shift = -c2 / 3.0;
            let p = c1 - c2 * c2 / 3.0;
            let q = c2 * c2 * c2 * (2.0 / 27.0) - c2 * c1 / 3.0 + c0;
            let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
            let plus = -q / 2.0 + disc;
            let minus = -q / 2.0 - disc;
            let u3 = if plus.norm() >= minus.norm() { plus } else { minus };
            let coeffs = [c2, c1, c0];
            let raw: Vec<ComplexScalar> = if u3.norm() == 0.0 {
                vec![shift; 3]
            } else {
                let u = u3.powf(1.0 / 3.0);
                let omega = c64(-0.5, 3f64.sqrt() / 2.0);
                let mut w = c64(1.0, 0.0);
                (0..3)
                    .map(|_| {
                        let uk = u * w;
                        w *= omega;
                        uk - p / (uk * 3.0) + shift
                    })
                    .collect()
            };
            raw.into_iter().map(|r| newton_polish(&coeffs, r, 2)).collect()
        }
        dim => return Err(Error::UnsupportedDimension { dim, supported: "2, 3" }),
    };
    sort_lex(&mut roots);
    Ok(roots)
}

type Dense = Vec<Vec<ComplexScalar>>;

fn to_dense(m: &CMatrix) -> Dense {
    (0..m.dim)
        .map(|i| m.data[i * m.dim..(i + 1) * m.dim].to_vec())
        .collect()
}

fn hessenberg(m: &CMatrix) -> Dense {
    let n = m.dim;
    let mut h = to_dense(m);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<ComplexScalar> = (k + 1..n).map(|i| h[i][k]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            c64(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H ← (I − 2vv†) H
        for j in 0..n {
            let s: ComplexScalar = (0..v.len()).map(|r| v[r].conj() * h[k + 1 + r][j]).sum();
            for r in 0..v.len() {
                h[k + 1 + r][j] -= v[r] * s * 2.0;
            }
        }
        // H ← H (I − 2vv†)
        for row in h.iter_mut() {
            let s: ComplexScalar = (0..v.len()).map(|c| row[k + 1 + c] * v[c]).sum();
            for c in 0..v.len() {
                row[k + 1 + c] -= s * v[c].conj() * 2.0;
            }
        }
        for row in h.iter_mut().skip(k + 2) {
            row[k] = c64(0.0, 0.0);
        }
    }
    h
}

fn givens(a: ComplexScalar, b: ComplexScalar) -> (f64, ComplexScalar) {
    if b.norm() == 0.0 {
        return (1.0, c64(0.0, 0.0));
    }
    if a.norm() == 0.0 {
        return (0.0, c64(1.0, 0.0));
    }
    let nrm = a.norm().hypot(b.norm());
    let c = a.norm() / nrm;
    let s = (a / a.norm()) * b.conj() / nrm;
    (c, s)
}

fn wilkinson_shift(a: ComplexScalar, b: ComplexScalar, c: ComplexScalar, d: ComplexScalar) -> ComplexScalar {
    let half_sum = (a + d) * 0.5;
    let half_diff = (a - d) * 0.5;
    let disc = (half_diff * half_diff + b * c).sqrt();
    let l1 = half_sum + disc;
    let l2 = half_sum - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur triangle of `m` by Hessenberg reduction and single-shift
/// QR iteration with Wilkinson shifts. Rotations are applied to the full
/// matrix so the result is unitarily similar to `m`.
fn schur_triangle(m: &CMatrix, tol: f64, max_iter: usize) -> Result<Dense> {
    let n = m.dim;
    let mut h = hessenberg(m);
    let scale = frobenius_norm(m);
    let mut hi = n - 1;
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    loop {
        if hi == 0 {
            break;
        }
        let mut l = hi;
        while l > 0 {
            let sub = h[l][l - 1].norm();
            let diag = h[l][l].norm() + h[l - 1][l - 1].norm();
            if sub <= tol * diag || sub <= f64::EPSILON * scale {
                h[l][l - 1] = c64(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        total += 1;
        since_deflation += 1;
        if total > max_iter {
            return Err(Error::IterationFailure {
                iterations: total - 1,
                unconverged: hi + 1,
                residual: h[hi][hi - 1].norm(),
            });
        }
        let mu = if since_deflation % 11 == 10 {
            // exceptional shift to break cycles
            h[hi][hi] + c64(h[hi][hi - 1].norm() * 0.75, h[hi][hi - 1].norm() * 0.5)
        } else {
            wilkinson_shift(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi])
        };
        for k in l..=hi {
            h[k][k] -= mu;
        }
        let mut rotations = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[k][k], h[k + 1][k]);
            for j in k..n {
                let (x, y) = (h[k][j], h[k + 1][j]);
                h[k][j] = x * c + s * y;
                h[k + 1][j] = -s.conj() * x + y * c;
            }
            rotations.push((k, c, s));
        }
        for (k, c, s) in rotations {
            for row in h.iter_mut().take((k + 2).min(hi) + 1) {
                let (x, y) = (row[k], row[k + 1]);
                row[k] = x * c + y * s.conj();
                row[k + 1] = -x * s + y * c;
            }
        }
        for k in l..=hi {
            h[k][k] += mu;
        }
    }
    Ok(h)
}

/// Eigenvalues of an arbitrary square matrix by complex Schur QR iteration.
pub fn eigvals_qr(m: &CMatrix, tol: f64, max_iter: usize) -> Result<Vec<ComplexScalar>> {
    let t = schur_triangle(m, tol, max_iter)?;
    let mut eig: Vec<ComplexScalar> = (0..m.dim).map(|i| t[i][i]).collect();
    sort_lex(&mut eig);
    Ok(eig)
}

/// Frobenius norm of the strictly upper part of the Schur triangle, which
/// equals `sqrt(‖M‖_F² − Σ|λ|²)` without the cancellation of the difference.
pub fn schur_departure(m: &CMatrix) -> Result<f64> {
    let n = m.dim;
    if n == 1 {
        return Ok(0.0);
    }
    let t = schur_triangle(m, DEFAULT_QR_TOL, 100 * n)?;
    let s: f64 = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| t[i][j].norm_sqr())
        .sum();
    Ok(s.sqrt())
}

/// [`eigvals_qr`] with the default tolerance and an iteration cap of `100·dim`.
pub fn eigvals_qr_default(m: &CMatrix) -> Result<Vec<ComplexScalar>> {
    eigvals_qr(m, DEFAULT_QR_TOL, 100 * m.dim)
}

/// Closed form for dimensions 2 and 3, QR otherwise.
pub fn eigvals(m: &CMatrix) -> Result<Vec<ComplexScalar>> {
    match m.dim {
        1 => Ok(vec![m[(0, 0)]]),
        2 | 3 => eigvals_closed(m),
        _ => eigvals_qr_default(m),
    }
}

/// Largest pairing distance between two spectra under greedy nearest matching.
///
/// Greedy matching is exact for well separated spectra; for tight clusters it
/// may overestimate the optimal distance.
pub fn spectrum_distance(a: &[ComplexScalar], b: &[ComplexScalar]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst = 0.0f64;
    for _ in 0..a.len() {
        let mut best = (f64::INFINITY, 0, 0);
        for (i, x) in a.iter().enumerate().filter(|(i, _)| !used_a[*i]) {
            for (j, y) in b.iter().enumerate().filter(|(j, _)| !used_b[*j]) {
                let d = (x - y).norm();
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        used_a[best.1] = true;
        used_b[best.2] = true;
        worst = worst.max(best.0);
    }
    worst
}

/// Spectral decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Returns eigenvalues in ascending order with the matching orthonormal
/// eigenvectors.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, Vec<CVector>) {
    let n = m.dim;
    let mut a = to_dense(m);
    let mut v: Dense = (0..n)
        .map(|i| (0..n).map(|j| c64(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    let scale = frobenius_norm(m).max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-16 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let (app, aqq) = (a[p][p].re, a[q][q].re);
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U = diag(1, conj(phase)) · [[c, s], [−s, c]]
                let u00 = c64(c, 0.0);
                let u01 = c64(s, 0.0);
                let u10 = phase.conj() * (-s);
                let u11 = phase.conj() * c;
                for row in a.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = x * u00 + y * u10;
                    row[q] = x * u01 + y * u11;
                }
                for k in 0..n {
                    let (x, y) = (a[p][k], a[q][k]);
                    a[p][k] = u00.conj() * x + u10.conj() * y;
                    a[q][k] = u01.conj() * x + u11.conj() * y;
                }
                a[p][q] = c64(0.0, 0.0);
                a[q][p] = c64(0.0, 0.0);
                a[p][p] = c64(a[p][p].re, 0.0);
                a[q][q] = c64(a[q][q].re, 0.0);
                for row in v.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = x * u00 + y * u10;
                    row[q] = x * u01 + y * u11;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].re.total_cmp(&a[j][j].re));
    let values = order.iter().map(|&i| a[i][i].re).collect();
    let vectors = order
        .iter()
        .map(|&k| CVector {
            entries: (0..n).map(|i| v[i][k]).collect(),
        })
        .collect();
    (values, vectors)
}
