//! States as normalized positive-definite functions on a groupoid.
//!
//! A state is stored through its characteristic function φ, taken as a density
//! against ν: the expectation of `a` is `Σ_α a(α) φ(α) ν(α)`. On uniform pair
//! groupoids φ is interchangeable with a density matrix via
//! `D[x, y] = φ(x → y) · √(P(x) P(y))`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{same_groupoid, uniform_pair_table, AlgebraElement, AlgebraError};
use crate::groupoid::FiniteGroupoid;
use crate::numkit::{hermitian_eigen, psd_verdict, verdict_from_spectrum, ComplexMatrix, NumError};

/// Default tolerance for normalization, symmetry and fiber positivity.
pub const DEFAULT_STATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("operands live on different groupoids")]
    GroupoidMismatch,
    #[error("expected {expected} values, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("not a state: {0}")]
    InvalidState(Box<StateReport>),
    #[error("not a density matrix: {0}")]
    InvalidDensity(String),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

/// Outcome of [`check_state`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateReport {
    /// Smallest eigenvalue of each target-fiber matrix, by outcome.
    pub fiber_min_eigenvalues: Vec<f64>,
    /// Outcome index of the first fiber that failed the PSD test.
    pub failing_fiber: Option<usize>,
    pub positive: bool,
    /// `|Σ_x φ(1_x) ν(1_x) − 1|`.
    pub normalization_deficit: f64,
    pub normalized: bool,
    /// `max_α |φ(α⁻¹) − conj φ(α)|`.
    pub symmetry_deficit: f64,
    pub symmetric: bool,
    pub pass: bool,
}

impl std::fmt::Display for StateReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "positive={} (min fiber eigenvalue {:e}), normalization deficit {:e}, symmetry deficit {:e}",
            self.positive,
            self.fiber_min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min),
            self.normalization_deficit,
            self.symmetry_deficit
        )
    }
}

/// Fiber matrix `M^x[k, l] = φ(α_k⁻¹ ∘ α_l)` over `α_k, α_l ∈ Γ^x`.
pub fn fiber_matrix(g: &FiniteGroupoid, phi: &[Complex64], x: usize) -> ComplexMatrix {
    let fiber = g.target_fiber(x);
    ComplexMatrix::from_fn(fiber.len(), fiber.len(), |k, l| {
        let r = g
            .compose(g.inverse(fiber[k]), fiber[l])
            .expect("same-target elements compose after inversion");
        phi[r]
    })
}

pub(crate) fn fiber_positivity(
    matrices: impl Iterator<Item = ComplexMatrix>,
    tol: f64,
) -> Result<(Vec<f64>, Option<usize>), NumError> {
    let mut mins = Vec::new();
    let mut failing = None;
    for (x, m) in matrices.enumerate() {
        // the Hermitian part is tested; asymmetry is reported separately
        let eig = hermitian_eigen(&m.hermitian_part(), f64::INFINITY)?;
        let v = verdict_from_spectrum(&eig.eigenvalues, tol);
        if !v.is_psd && failing.is_none() {
            failing = Some(x);
        }
        mins.push(v.min_eigenvalue);
    }
    Ok((mins, failing))
}

/// Positivity, normalization and Hermitian-symmetry report for φ.
pub fn check_state(
    g: &FiniteGroupoid,
    phi: &[Complex64],
    tol: f64,
) -> Result<StateReport, StateError> {
    let n = g.num_elements();
    if phi.len() != n {
        return Err(StateError::DimensionMismatch {
            expected: n,
            found: phi.len(),
        });
    }
    if phi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(NumError::NonFinite.into());
    }
    let (fiber_min_eigenvalues, failing_fiber) =
        fiber_positivity((0..g.num_outcomes()).map(|x| fiber_matrix(g, phi, x)), tol)?;
    let norm: Complex64 = (0..g.num_outcomes())
        .map(|x| {
            let u = g.unit(x);
            phi[u] * g.nu(u)
        })
        .sum();
    let normalization_deficit = (norm - Complex64::new(1.0, 0.0)).norm();
    let symmetry_deficit = (0..n)
        .map(|a| (phi[g.inverse(a)] - phi[a].conj()).norm())
        .fold(0.0, f64::max);
    let positive = failing_fiber.is_none();
    let normalized = normalization_deficit <= tol;
    let symmetric = symmetry_deficit <= tol;
    Ok(StateReport {
        fiber_min_eigenvalues,
        failing_fiber,
        positive,
        normalization_deficit,
        normalized,
        symmetry_deficit,
        symmetric,
        pass: positive && normalized && symmetric,
    })
}

/// A validated characteristic function.
#[derive(Debug, Clone)]
pub struct State {
    groupoid: Arc<FiniteGroupoid>,
    phi: Vec<Complex64>,
}

impl State {
    /// Validates φ with [`check_state`] and wraps it on success.
    pub fn new(
        groupoid: Arc<FiniteGroupoid>,
        phi: Vec<Complex64>,
        tol: f64,
    ) -> Result<Self, StateError> {
        let report = check_state(&groupoid, &phi, tol)?;
        if !report.pass {
            return Err(StateError::InvalidState(Box::new(report)));
        }
        Ok(Self { groupoid, phi })
    }

    pub(crate) fn from_raw(groupoid: Arc<FiniteGroupoid>, phi: Vec<Complex64>) -> Self {
        Self { groupoid, phi }
    }

    /// The tracial state: φ(1_x) = 1, zero off the units.
    pub fn tracial(groupoid: Arc<FiniteGroupoid>) -> Self {
        let mut phi = vec![Complex64::new(0.0, 0.0); groupoid.num_elements()];
        for &u in groupoid.units() {
            phi[u] = Complex64::new(1.0 / groupoid.fiber_weights()[u], 0.0);
        }
        Self { groupoid, phi }
    }

    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        &self.groupoid
    }

    pub fn phi(&self) -> &[Complex64] {
        &self.phi
    }

    pub fn into_phi(self) -> Vec<Complex64> {
        self.phi
    }

    /// Largest entrywise difference of the characteristic functions.
    pub fn max_abs_diff(&self, other: &State) -> Result<f64, StateError> {
        if !same_groupoid(&self.groupoid, &other.groupoid) {
            return Err(StateError::GroupoidMismatch);
        }
        Ok(self
            .phi
            .iter()
            .zip(&other.phi)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// `ρ(λ(a)) = Σ_α a(α) φ(α) ν(α)`.
pub fn expectation(rho: &State, a: &AlgebraElement) -> Result<Complex64, StateError> {
    if !same_groupoid(&rho.groupoid, a.groupoid()) {
        return Err(StateError::GroupoidMismatch);
    }
    Ok(raw_expectation(&rho.groupoid, &rho.phi, a.coeff()))
}

pub(crate) fn raw_expectation(
    g: &FiniteGroupoid,
    phi: &[Complex64],
    coeff: &[Complex64],
) -> Complex64 {
    coeff
        .iter()
        .zip(phi)
        .zip(g.nu_all())
        .map(|((a, f), nu)| a * f * nu)
        .sum()
}

/// `p(x) = φ(1_x) ν(1_x)`.
pub fn outcome_distribution(rho: &State) -> Vec<f64> {
    raw_outcome_distribution(&rho.groupoid, &rho.phi)
}

pub fn raw_outcome_distribution(g: &FiniteGroupoid, phi: &[Complex64]) -> Vec<f64> {
    g.units().iter().map(|&u| phi[u].re * g.nu(u)).collect()
}

/// Hermitian, PSD, unit-trace matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, tol: f64) -> Result<Self, StateError> {
        if !matrix.is_square() {
            return Err(StateError::InvalidDensity("not square".into()));
        }
        let dev = matrix.hermitian_deviation();
        if dev > tol {
            return Err(StateError::InvalidDensity(format!(
                "not Hermitian (deviation {dev:e})"
            )));
        }
        let v = psd_verdict(&matrix, tol)?;
        if !v.is_psd {
            return Err(StateError::InvalidDensity(format!(
                "not positive semidefinite (min eigenvalue {:e})",
                v.min_eigenvalue
            )));
        }
        let tr = matrix.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol {
            return Err(StateError::InvalidDensity(format!(
                "trace {tr} differs from 1"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// Raw dictionary `D[x, y] = φ(x → y) √(P(x) P(y))`, no validation.
pub(crate) fn phi_to_matrix(
    g: &FiniteGroupoid,
    phi: &[Complex64],
) -> Result<ComplexMatrix, StateError> {
    let (n, table) = uniform_pair_table(g)?;
    let p = g.p();
    Ok(ComplexMatrix::from_fn(n, n, |x, y| {
        phi[table[y * n + x]] * (p[x] * p[y]).sqrt()
    }))
}

/// Raw inverse dictionary `φ(x → y) = D[x, y] / √(P(x) P(y))`.
pub(crate) fn matrix_to_phi(
    g: &FiniteGroupoid,
    d: &ComplexMatrix,
) -> Result<Vec<Complex64>, StateError> {
    let (n, table) = uniform_pair_table(g)?;
    if d.rows() != n || d.cols() != n {
        return Err(StateError::DimensionMismatch {
            expected: n * n,
            found: d.rows() * d.cols(),
        });
    }
    let p = g.p();
    let mut phi = vec![Complex64::new(0.0, 0.0); n * n];
    for x in 0..n {
        for y in 0..n {
            phi[table[y * n + x]] = d[(x, y)] / (p[x] * p[y]).sqrt();
        }
    }
    Ok(phi)
}

pub fn density_from_state(rho: &State) -> Result<DensityMatrix, StateError> {
    let m = phi_to_matrix(&rho.groupoid, &rho.phi)?;
    DensityMatrix::new(m, DEFAULT_STATE_TOL)
}

pub fn state_from_density(d: &DensityMatrix, g: Arc<FiniteGroupoid>) -> Result<State, StateError> {
    let phi = matrix_to_phi(&g, &d.matrix)?;
    State::new(g, phi, DEFAULT_STATE_TOL)
}
