//! Seeded random observables and states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c64, CMatrix, CVector, ComplexScalar};
use crate::quantum::{observable_from_matrix, Observable};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut Rng64) -> ComplexScalar {
    c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `(G + G†)/2` with i.i.d. complex Gaussian `G`.
pub fn random_observable(rng: &mut Rng64, dim: usize) -> Observable {
    let g: Vec<ComplexScalar> = (0..dim * dim).map(|_| gaussian(rng)).collect();
    let mut h = vec![c64(0.0, 0.0); dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            h[r * dim + c] = (g[r * dim + c] + g[c * dim + r].conj()) * 0.5;
        }
    }
    observable_from_matrix(CMatrix::new(dim, h).expect("finite")).expect("Hermitian by construction")
}

/// Haar-distributed pure state.
pub fn random_state(rng: &mut Rng64, dim: usize) -> CVector {
    loop {
        let v = CVector::new((0..dim).map(|_| gaussian(rng)).collect()).expect("finite");
        if let Ok(u) = v.normalized() {
            return u;
        }
    }
}

/// A random eigenvector of `o` with a random global phase.
pub fn random_eigenstate(rng: &mut Rng64, o: &Observable) -> (f64, CVector) {
    let k = rng.gen_range(0..o.dim());
    let phase = ComplexScalar::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
    (o.spectrum()[k], o.eigenvectors()[k].scale(phase))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_normalized() {
        let a = random_state(&mut rng(3), 5);
        let b = random_state(&mut rng(3), 5);
        assert_eq!(a, b);
        assert!((a.norm() - 1.0).abs() < 1e-14);
        let o = random_observable(&mut rng(4), 3);
        assert_eq!(o.dim(), 3);
        let (l, v) = random_eigenstate(&mut rng(5), &o);
        let r = o.matrix().mul_vec(&v).unwrap().sub(&v.scale(c64(l, 0.0)));
        assert!(r.norm() < 1e-12);
    }
}
