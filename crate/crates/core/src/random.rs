//! Seeded generators for test corpora.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{star, AlgebraElement};
use crate::channels::ClassicalKernel;
use crate::groupoid::FiniteGroupoid;
use crate::numkit::{hermitian_eigen, ComplexMatrix, DEFAULT_EIG_TOL};
use crate::states::{DensityMatrix, DEFAULT_STATE_TOL};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn complex_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| unit_complex(rng))
}

/// Full-rank density matrix `B B† / Tr(B B†)`.
pub fn density(n: usize, rng: &mut impl Rng) -> DensityMatrix {
    let b =
        complex_matrix(n, n, rng).add(&ComplexMatrix::identity(n).scale(Complex64::new(0.5, 0.0)));
    let m = &b * &b.adjoint();
    let tr = m.trace().re;
    let d = m.scale(Complex64::new(1.0 / tr, 0.0)).hermitian_part();
    DensityMatrix::new(d, DEFAULT_STATE_TOL).expect("B B† is positive")
}

/// Probability vector with every entry at least `floor / n`.
pub fn distribution(n: usize, floor: f64, rng: &mut impl Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| floor + rng.gen_range(0.0..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn stochastic(rows: usize, cols: usize, rng: &mut impl Rng) -> ClassicalKernel {
    let k: Vec<Vec<f64>> = (0..rows).map(|_| distribution(cols, 0.0, rng)).collect();
    ClassicalKernel::new(&k).expect("normalized rows")
}

/// Trace-preserving Kraus family `A_i = B_i S^{-1/2}` with `S = Σ B_i† B_i`.
/// `count` is raised to `⌈n_in / n_out⌉` when smaller, so that `S` is invertible.
pub fn kraus(n_in: usize, n_out: usize, count: usize, rng: &mut impl Rng) -> Vec<ComplexMatrix> {
    let count = count.max(n_in.div_ceil(n_out.max(1))).max(1);
    let bs: Vec<ComplexMatrix> = (0..count)
        .map(|_| complex_matrix(n_out, n_in, rng))
        .collect();
    let s = bs
        .iter()
        .fold(ComplexMatrix::zeros(n_in, n_in), |acc, b| {
            acc.add(&(&b.adjoint() * b))
        })
        .hermitian_part();
    let eig = hermitian_eigen(&s, DEFAULT_EIG_TOL).expect("Hermitian by construction");
    let inv_sqrt = (0..n_in).fold(ComplexMatrix::zeros(n_in, n_in), |acc, k| {
        let v = eig.eigenvector(k);
        let w = 1.0 / eig.eigenvalues[k].sqrt();
        acc.add(&ComplexMatrix::from_fn(n_in, n_in, |i, j| {
            v[i] * v[j].conj() * w
        }))
    });
    bs.iter().map(|b| b * &inv_sqrt).collect()
}

pub fn element(g: &Arc<FiniteGroupoid>, rng: &mut impl Rng) -> AlgebraElement {
    let coeff = (0..g.num_elements()).map(|_| unit_complex(rng)).collect();
    AlgebraElement::new(g.clone(), coeff).expect("length matches")
}

/// `(b + b*) / 2` for a random `b`.
pub fn self_adjoint(g: &Arc<FiniteGroupoid>, rng: &mut impl Rng) -> AlgebraElement {
    let b = element(g, rng);
    b.add(&star(&b))
        .expect("same groupoid")
        .scale(Complex64::new(0.5, 0.0))
}
