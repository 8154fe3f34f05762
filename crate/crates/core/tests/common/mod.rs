//! Plain-loop complex arithmetic and proptest strategies shared by the
//! integration tests. Nothing here calls into the library's linear algebra.

#![allow(dead_code)]

pub use num_complex::Complex64 as C;
use proptest::prelude::*;

use wvnn::linalg::{CMatrix, CVector};
use wvnn::quantum::{observable_from_matrix, Observable};

pub type Rows = Vec<Vec<C>>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// `Σ conj(u_k) v_k`.
pub fn braket(u: &[C], v: &[C]) -> C {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn apply(m: &Rows, v: &[C]) -> Vec<C> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn matmul(a: &Rows, b: &Rows) -> Rows {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

pub fn dagger(a: &Rows) -> Rows {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i].conj()).collect()).collect()
}

pub fn frob_sq(a: &Rows) -> f64 {
    a.iter().flatten().map(|z| z.norm_sqr()).sum()
}

pub fn trace(a: &Rows) -> C {
    (0..a.len()).map(|i| a[i][i]).sum()
}

pub fn outer(u: &[C], v: &[C]) -> Rows {
    u.iter().map(|a| v.iter().map(|b| a * b.conj()).collect()).collect()
}

pub fn scale(a: &Rows, s: C) -> Rows {
    a.iter().map(|r| r.iter().map(|z| z * s).collect()).collect()
}

pub fn to_rows(m: &CMatrix) -> Rows {
    let d = m.dim();
    (0..d).map(|i| (0..d).map(|j| m[(i, j)]).collect()).collect()
}

pub fn to_matrix(a: &Rows) -> CMatrix {
    CMatrix::from_rows(a).unwrap()
}

pub fn to_vector(v: &[C]) -> CVector {
    CVector::new(v.to_vec()).unwrap()
}

/// `⟨ψ|O|ψ⟩` and `⟨ψ|O²|ψ⟩`.
pub fn moments(o: &Rows, psi: &[C]) -> (f64, f64) {
    let op = apply(o, psi);
    (braket(psi, &op).re, braket(&op, &op).re)
}

/// `sqrt(Σ|m_ij|² − Σ|λ|²)` for a rank-one matrix, where the only
/// eigenvalue that can be nonzero is the trace.
pub fn rank_one_departure(a: &Rows) -> f64 {
    (frob_sq(a) - trace(a).norm_sqr()).max(0.0).sqrt()
}

pub fn rel_err(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn component() -> impl Strategy<Value = f64> {
    -1.0..1.0f64
}

/// Unit vectors of dimension `dim`, rejecting near-zero draws before normalizing.
pub fn state(dim: usize) -> impl Strategy<Value = Vec<C>> {
    prop::collection::vec((component(), component()), dim)
        .prop_map(|v| v.into_iter().map(|(re, im)| c(re, im)).collect::<Vec<C>>())
        .prop_filter("nonzero", |v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-2)
        .prop_map(|v| {
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|z| z / n).collect()
        })
}

/// Hermitian `(G + G†)/2` with entries in the unit box.
pub fn hermitian(dim: usize) -> impl Strategy<Value = Rows> {
    prop::collection::vec((component(), component()), dim * dim).prop_map(move |g| {
        let g: Vec<C> = g.into_iter().map(|(re, im)| c(re, im)).collect();
        (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| (g[i * dim + j] + g[j * dim + i].conj()) * 0.5)
                    .collect()
            })
            .collect()
    })
}

pub fn general(dim: usize) -> impl Strategy<Value = Rows> {
    prop::collection::vec((component(), component()), dim * dim).prop_map(move |g| {
        (0..dim)
            .map(|i| (0..dim).map(|j| c(g[i * dim + j].0, g[i * dim + j].1)).collect())
            .collect()
    })
}

pub fn observable(rows: &Rows) -> Observable {
    observable_from_matrix(to_matrix(rows)).unwrap()
}

/// `(O, ψi, ψf)` in one of the given dimensions.
pub fn triple(dims: &'static [usize]) -> impl Strategy<Value = (Rows, Vec<C>, Vec<C>)> {
    prop::sample::select(dims).prop_flat_map(|d| (hermitian(d), state(d), state(d)))
}
