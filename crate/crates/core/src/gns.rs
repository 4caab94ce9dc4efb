//! GNS construction for a state on a finite groupoid algebra.
//!
//! The spanning set is `{δ_α}`. Its Gram matrix under `⟨A|B⟩₀ = ρ₀(A*B)` is
//! split spectrally: eigenvectors at or below `rank_tol · λ_max` span the
//! Gelfand ideal, the rest (rescaled by `λ^{-1/2}`) form an orthonormal basis
//! of the quotient space.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{convolve, same_groupoid, star, AlgebraElement, AlgebraError};
use crate::groupoid::FiniteGroupoid;
use crate::numkit::{hermitian_eigen, inner, ComplexMatrix, NumError, DEFAULT_RANK_TOL};
use crate::states::{expectation, State, StateError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GnsError {
    #[error("state has a numerically zero Gram matrix")]
    DegenerateState,
    #[error("operands live on different groupoids")]
    GroupoidMismatch,
    #[error("expected a vector of length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

#[derive(Debug, Clone)]
pub struct GnsSpace {
    base_state: State,
    gram: ComplexMatrix,
    gram_spectrum: Vec<f64>,
    ideal_basis: Vec<Vec<Complex64>>,
    /// Columns are the quotient basis in spanning-set coordinates.
    quotient: ComplexMatrix,
    rank_tol: f64,
}

impl GnsSpace {
    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        self.base_state.groupoid()
    }

    pub fn base_state(&self) -> &State {
        &self.base_state
    }

    pub fn gram(&self) -> &ComplexMatrix {
        &self.gram
    }

    /// Ascending eigenvalues of the Gram matrix.
    pub fn gram_spectrum(&self) -> &[f64] {
        &self.gram_spectrum
    }

    pub fn ideal_basis(&self) -> &[Vec<Complex64>] {
        &self.ideal_basis
    }

    /// Quotient basis vectors in spanning-set coordinates, orthonormal under the Gram form.
    pub fn quotient_basis(&self) -> Vec<Vec<Complex64>> {
        (0..self.quotient.cols())
            .map(|k| self.quotient.column(k))
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.quotient.cols()
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    /// Coordinates of the class of a spanning-set vector in the quotient basis.
    pub fn project(&self, c: &[Complex64]) -> Result<Vec<Complex64>, GnsError> {
        self.check_len(c)?;
        let gc = self.gram.mat_vec(c);
        Ok((0..self.dim())
            .map(|k| inner(&self.quotient.column(k), &gc))
            .collect())
    }

    /// Class of the algebra unit, in the quotient basis.
    pub fn cyclic_vector(&self) -> Vec<Complex64> {
        let g = self.groupoid();
        let mut e = vec![Complex64::new(0.0, 0.0); g.num_elements()];
        for &u in g.units() {
            e[u] = Complex64::new(1.0, 0.0);
        }
        self.project(&e).expect("length matches")
    }

    fn check_len(&self, c: &[Complex64]) -> Result<(), GnsError> {
        let n = self.gram.rows();
        if c.len() != n {
            return Err(GnsError::DimensionMismatch {
                expected: n,
                found: c.len(),
            });
        }
        Ok(())
    }
}

/// Builds the GNS space of `rho`.
pub fn build_gns(rho: &State, rank_tol: f64) -> Result<GnsSpace, GnsError> {
    let g = rho.groupoid().clone();
    let n = g.num_elements();
    let basis: Vec<AlgebraElement> = (0..n)
        .map(|a| AlgebraElement::basis(g.clone(), a))
        .collect();
    let starred: Vec<AlgebraElement> = basis.iter().map(star).collect();
    let mut gram = ComplexMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            gram[(a, b)] = expectation(rho, &convolve(&starred[a], &basis[b])?)?;
        }
    }
    let eig = hermitian_eigen(&gram.hermitian_part(), f64::INFINITY)?;
    let lmax = eig.eigenvalues.last().copied().unwrap_or(0.0);
    if !(lmax > 0.0) {
        return Err(GnsError::DegenerateState);
    }
    let cutoff = rank_tol * lmax;
    let mut ideal_basis = Vec::new();
    let mut kept = Vec::new();
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvector(k);
        if lam > cutoff {
            let s = 1.0 / lam.sqrt();
            kept.push(v.into_iter().map(|z| z * s).collect::<Vec<_>>());
        } else {
            ideal_basis.push(v);
        }
    }
    // largest eigenvalues first
    kept.reverse();
    let quotient = ComplexMatrix::from_fn(n, kept.len(), |r, c| kept[c][r]);
    Ok(GnsSpace {
        base_state: rho.clone(),
        gram,
        gram_spectrum: eig.eigenvalues,
        ideal_basis,
        quotient,
        rank_tol,
    })
}

pub fn build_gns_default(rho: &State) -> Result<GnsSpace, GnsError> {
    build_gns(rho, DEFAULT_RANK_TOL)
}

/// Left multiplication by `a` on the spanning set: `L[γ, α] = a(γ ∘ α⁻¹)`.
fn left_multiplication(a: &AlgebraElement) -> ComplexMatrix {
    let g = a.groupoid();
    let n = g.num_elements();
    ComplexMatrix::from_fn(n, n, |gamma, alpha| {
        match g.compose(gamma, g.inverse(alpha)) {
            Some(beta) => a.get(beta),
            None => Complex64::new(0.0, 0.0),
        }
    })
}

/// Matrix of `π₀(a)` on the quotient basis.
pub fn gns_represent(space: &GnsSpace, a: &AlgebraElement) -> Result<ComplexMatrix, GnsError> {
    if !same_groupoid(a.groupoid(), space.groupoid()) {
        return Err(GnsError::GroupoidMismatch);
    }
    let q = &space.quotient;
    Ok(&(&(&q.adjoint() * &space.gram) * &left_multiplication(a)) * q)
}

/// `u† · gram · v` for spanning-set coordinates.
pub fn gns_inner(
    space: &GnsSpace,
    u: &[Complex64],
    v: &[Complex64],
) -> Result<Complex64, GnsError> {
    space.check_len(u)?;
    space.check_len(v)?;
    Ok(inner(u, &space.gram.mat_vec(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::fundamental_rep_pair;
    use crate::numkit::vec_norm;
    use crate::states::{state_from_density, DensityMatrix};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn qubit_state(d: &[f64; 2]) -> State {
        let g = Arc::new(FiniteGroupoid::pair(2));
        let d = DensityMatrix::new(ComplexMatrix::diag(&[c(d[0]), c(d[1])]), 1e-12).unwrap();
        state_from_density(&d, g).unwrap()
    }

    fn element(g: &Arc<FiniteGroupoid>, seed: u64) -> AlgebraElement {
        // deterministic pseudo-random coefficients
        let coeff = (0..g.num_elements())
            .map(|k| {
                let t = (seed as f64 + 1.0) * (k as f64 + 0.37);
                Complex64::new(t.sin(), (1.3 * t).cos())
            })
            .collect();
        AlgebraElement::new(g.clone(), coeff).unwrap()
    }

    #[test]
    fn dimensions_for_qubit_states() {
        let faithful = build_gns_default(&qubit_state(&[0.5, 0.5])).unwrap();
        assert_eq!(faithful.dim(), 4);
        let pure = build_gns_default(&qubit_state(&[1.0, 0.0])).unwrap();
        assert_eq!(pure.dim(), 2);
        assert_eq!(pure.ideal_basis().len(), 2);
        let lmax = pure.gram_spectrum().last().copied().unwrap();
        for v in pure.ideal_basis() {
            assert!(vec_norm(&pure.gram().mat_vec(v)) <= pure.rank_tol() * lmax);
        }
    }

    #[test]
    fn classical_gram_is_diagonal() {
        let g = Arc::new(FiniteGroupoid::trivial(2));
        let s = build_gns_default(&State::tracial(g)).unwrap();
        assert_eq!(s.dim(), 2);
        assert!(
            s.gram()
                .max_abs_diff(&ComplexMatrix::diag(&[c(0.5), c(0.5)]))
                < 1e-15
        );
    }

    #[test]
    fn unit_maps_to_identity() {
        let s = build_gns_default(&qubit_state(&[0.7, 0.3])).unwrap();
        let one = AlgebraElement::unit(s.groupoid().clone());
        let p = gns_represent(&s, &one).unwrap();
        assert!(p.max_abs_diff(&ComplexMatrix::identity(s.dim())) < 1e-12);
    }

    #[test]
    fn star_homomorphism_and_cyclic_vector() {
        for d in [[0.5, 0.5], [0.8, 0.2], [1.0, 0.0]] {
            let rho = qubit_state(&d);
            let s = build_gns_default(&rho).unwrap();
            let g = s.groupoid().clone();
            let omega = s.cyclic_vector();
            for seed in 0..5 {
                let a = element(&g, seed);
                let b = element(&g, seed + 11);
                let pa = gns_represent(&s, &a).unwrap();
                let pb = gns_represent(&s, &b).unwrap();
                let pab = gns_represent(&s, &convolve(&a, &b).unwrap()).unwrap();
                assert!(pab.max_abs_diff(&(&pa * &pb)) < 1e-10);
                let pstar = gns_represent(&s, &star(&a)).unwrap();
                assert!(pstar.max_abs_diff(&pa.adjoint()) < 1e-10);
                let lhs = inner(&omega, &pa.mat_vec(&omega));
                let rhs = expectation(&rho, &a).unwrap();
                assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn pure_state_gives_fundamental_representation() {
        let s = build_gns_default(&qubit_state(&[1.0, 0.0])).unwrap();
        let g = s.groupoid().clone();
        for seed in 0..4 {
            let a = element(&g, seed);
            let p = gns_represent(&s, &a).unwrap();
            let f = fundamental_rep_pair(&a).unwrap();
            assert!((p.trace() - f.trace()).norm() < 1e-10);
            let p2 = &p * &p;
            let f2 = &f * &f;
            assert!((p2.trace() - f2.trace()).norm() < 1e-10);
        }
    }

    #[test]
    fn inner_product_matches_gram() {
        let s = build_gns_default(&qubit_state(&[0.5, 0.5])).unwrap();
        let n = s.groupoid().num_elements();
        let e = |k: usize| {
            let mut v = vec![c(0.0); n];
            v[k] = c(1.0);
            v
        };
        for a in 0..n {
            for b in 0..n {
                assert_eq!(gns_inner(&s, &e(a), &e(b)).unwrap(), s.gram()[(a, b)]);
            }
        }
        assert!(matches!(
            gns_inner(&s, &[c(1.0)], &e(0)),
            Err(GnsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mismatched_groupoid() {
        let s = build_gns_default(&qubit_state(&[0.5, 0.5])).unwrap();
        let other = AlgebraElement::unit(Arc::new(FiniteGroupoid::trivial(2)));
        assert_eq!(
            gns_represent(&s, &other).unwrap_err(),
            GnsError::GroupoidMismatch
        );
    }
}
