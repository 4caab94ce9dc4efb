//! The convolution *-algebra ℂ[Γ] of a finite groupoid and its representations.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::groupoid::FiniteGroupoid;
use crate::numkit::ComplexMatrix;

const UNIFORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("operands live on different groupoids")]
    GroupoidMismatch,
    #[error("expected {expected} coefficients, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("groupoid is not a pair groupoid")]
    NotPairGroupoid,
    #[error("outcome measure is not uniform or fiber weights are not counting weights")]
    NonUniformP,
}

/// `Arc::ptr_eq` fast path, structural comparison otherwise.
pub fn same_groupoid(a: &Arc<FiniteGroupoid>, b: &Arc<FiniteGroupoid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A finite formal combination `Σ a_α α`.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    groupoid: Arc<FiniteGroupoid>,
    coeff: Vec<Complex64>,
}

impl AlgebraElement {
    pub fn new(groupoid: Arc<FiniteGroupoid>, coeff: Vec<Complex64>) -> Result<Self, AlgebraError> {
        if coeff.len() != groupoid.num_elements() {
            return Err(AlgebraError::DimensionMismatch {
                expected: groupoid.num_elements(),
                found: coeff.len(),
            });
        }
        Ok(Self { groupoid, coeff })
    }

    pub fn zero(groupoid: Arc<FiniteGroupoid>) -> Self {
        let n = groupoid.num_elements();
        Self {
            groupoid,
            coeff: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// The basis element `δ_α`.
    pub fn basis(groupoid: Arc<FiniteGroupoid>, alpha: usize) -> Self {
        let mut e = Self::zero(groupoid);
        e.coeff[alpha] = Complex64::new(1.0, 0.0);
        e
    }

    /// The algebra unit `Σ_x δ_{1_x}`.
    pub fn unit(groupoid: Arc<FiniteGroupoid>) -> Self {
        let mut e = Self::zero(groupoid);
        for x in 0..e.groupoid.num_outcomes() {
            let u = e.groupoid.unit(x);
            e.coeff[u] = Complex64::new(1.0, 0.0);
        }
        e
    }

    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        &self.groupoid
    }

    pub fn coeff(&self) -> &[Complex64] {
        &self.coeff
    }

    pub fn get(&self, alpha: usize) -> Complex64 {
        self.coeff[alpha]
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self {
            groupoid: self.groupoid.clone(),
            coeff: self.coeff.iter().map(|c| c * k).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_same(other)?;
        Ok(Self {
            groupoid: self.groupoid.clone(),
            coeff: self
                .coeff
                .iter()
                .zip(&other.coeff)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Largest coefficient modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, AlgebraError> {
        self.check_same(other)?;
        Ok(self
            .coeff
            .iter()
            .zip(&other.coeff)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn check_same(&self, other: &Self) -> Result<(), AlgebraError> {
        if same_groupoid(&self.groupoid, &other.groupoid) {
            Ok(())
        } else {
            Err(AlgebraError::GroupoidMismatch)
        }
    }
}

/// Convolution product, fixed by `λ(a·b) = λ(a)λ(b)`.
///
/// The δ^{1/2} factors of the regular representation cancel because δ is a
/// homomorphism, so `λ(δ_β)λ(δ_α) = λ(δ_{β∘α})` and the product reduces to
/// `(a·b)(γ) = Σ_{β∘α=γ} a(β) b(α)`.
pub fn convolve(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement, AlgebraError> {
    a.check_same(b)?;
    let g = &a.groupoid;
    let n = g.num_elements();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for beta in 0..n {
        let ab = a.coeff[beta];
        if ab == Complex64::new(0.0, 0.0) {
            continue;
        }
        for &alpha in g.target_fiber(g.source(beta)) {
            let r = g.compose(beta, alpha).expect("t(alpha) = s(beta)");
            out[r] += ab * b.coeff[alpha];
        }
    }
    Ok(AlgebraElement {
        groupoid: g.clone(),
        coeff: out,
    })
}

/// Involution matching the conjugate transpose of the regular representation:
/// `a*(α) = conj(a(α⁻¹)) · δ(α⁻¹)`.
pub fn star(a: &AlgebraElement) -> AlgebraElement {
    let g = &a.groupoid;
    let coeff = (0..g.num_elements())
        .map(|alpha| {
            let inv = g.inverse(alpha);
            a.coeff[inv].conj() * g.delta(inv)
        })
        .collect();
    AlgebraElement {
        groupoid: g.clone(),
        coeff,
    }
}

/// Left regular representation on `ℓ²(Γ)` in canonical element order:
/// `λ(a)[β, γ] = a(α) δ^{1/2}(α)` with `α = β ∘ γ⁻¹` when `s(β) = s(γ)`.
pub fn left_regular_rep(a: &AlgebraElement) -> ComplexMatrix {
    let g = &a.groupoid;
    let n = g.num_elements();
    let mut by_source: Vec<Vec<usize>> = vec![Vec::new(); g.num_outcomes()];
    for e in 0..n {
        by_source[g.source(e)].push(e);
    }
    let mut m = ComplexMatrix::zeros(n, n);
    for beta in 0..n {
        for &gamma in &by_source[g.source(beta)] {
            let alpha = g
                .compose(beta, g.inverse(gamma))
                .expect("s(beta) = s(gamma) = t(gamma^-1)");
            m[(beta, gamma)] = a.coeff[alpha] * g.delta(alpha).sqrt();
        }
    }
    m
}

/// Pair-groupoid lookup `idx[y * n + x]` of the transition `x → y`, after
/// checking that P is uniform and the fiber weights are counting weights.
pub(crate) fn uniform_pair_table(g: &FiniteGroupoid) -> Result<(usize, Vec<usize>), AlgebraError> {
    let table = g.pair_table().ok_or(AlgebraError::NotPairGroupoid)?;
    let n = g.num_outcomes();
    let u = 1.0 / n as f64;
    if g.p().iter().any(|p| (p - u).abs() > UNIFORM_TOL)
        || g.fiber_weights()
            .iter()
            .any(|w| (w - 1.0).abs() > UNIFORM_TOL)
    {
        return Err(AlgebraError::NonUniformP);
    }
    Ok((n, table))
}

/// Outcome representation of a pair groupoid algebra: `F[y, x] = a(x → y)`.
pub fn fundamental_rep_pair(a: &AlgebraElement) -> Result<ComplexMatrix, AlgebraError> {
    let (n, table) = uniform_pair_table(&a.groupoid)?;
    Ok(ComplexMatrix::from_fn(n, n, |y, x| {
        a.coeff[table[y * n + x]]
    }))
}

/// Inverse of [`fundamental_rep_pair`].
pub fn element_from_matrix(
    groupoid: Arc<FiniteGroupoid>,
    m: &ComplexMatrix,
) -> Result<AlgebraElement, AlgebraError> {
    let (n, table) = uniform_pair_table(&groupoid)?;
    if m.rows() != n || m.cols() != n {
        return Err(AlgebraError::DimensionMismatch {
            expected: n * n,
            found: m.rows() * m.cols(),
        });
    }
    let mut coeff = vec![Complex64::new(0.0, 0.0); n * n];
    for y in 0..n {
        for x in 0..n {
            coeff[table[y * n + x]] = m[(y, x)];
        }
    }
    AlgebraElement::new(groupoid, coeff)
}
