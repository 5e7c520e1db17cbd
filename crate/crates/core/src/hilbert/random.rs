//! Seeded random states and operators for property tests and sweeps.
//!
//! Amplitudes are standard complex normal (independent N(0,1) real and
//! imaginary parts) and then normalized, which gives the unitarily invariant
//! measure on pure states.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{CMatrix, DensityMatrix, HermitianOperator, StateVector, C64};

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn complex_normal_vec<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<C64> {
    (0..dim).map(|_| complex_normal(rng)).collect()
}

/// Haar-random normalized pure state.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    loop {
        let v = StateVector::from_amplitudes(complex_normal_vec(rng, dim))
            .expect("dim > 0");
        if let Ok(n) = v.normalize() {
            return n;
        }
    }
}

/// Ginibre-induced full-rank density matrix `G G† / tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let g = CMatrix::from_fn(dim, |_, _| complex_normal(rng));
    let gg = g.mul(&g.adjoint()).expect("square");
    let tr = gg.trace().re;
    // symmetrize to remove rounding asymmetry before the Hermitian check
    let m = CMatrix::from_fn(dim, |i, j| 0.5 * (gg.get(i, j) + gg.get(j, i).conj()) / tr);
    DensityMatrix::new(m).expect("G G† is Hermitian")
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianOperator {
    let g = CMatrix::from_fn(dim, |_, _| complex_normal(rng));
    let m = CMatrix::from_fn(dim, |i, j| 0.5 * (g.get(i, j) + g.get(j, i).conj()));
    HermitianOperator::new(m).expect("symmetrized")
}

/// Random orthonormal basis via Gram-Schmidt on complex normal vectors.
pub fn random_orthonormal_basis<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while basis.len() < dim {
        let mut v = complex_normal_vec(rng, dim);
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for e in &basis {
                let overlap: C64 = e.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(e) {
                    *x -= overlap * y;
                }
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        basis.push(v.into_iter().map(|x| x / norm).collect());
    }
    basis
}
