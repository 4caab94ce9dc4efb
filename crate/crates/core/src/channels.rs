//! Classical and quantum Markov kernels.
//!
//! A [`QuantumKernel`] is a complex function on `Γ₁ × Γ₂`. States are pushed
//! forward by integrating against `ν₁`, observables are pulled back by
//! integrating against `ν₂`, and kernels compose by integrating over the middle
//! groupoid. On uniform pair groupoids a kernel is the same thing as a linear
//! map on density matrices, which is where complete positivity is checked.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{same_groupoid, uniform_pair_table, AlgebraElement, AlgebraError};
use crate::groupoid::FiniteGroupoid;
use crate::numkit::{psd_verdict, ComplexMatrix, NumError, PsdVerdict, DEFAULT_PSD_TOL};
use crate::states::{
    check_state, fiber_positivity, matrix_to_phi, phi_to_matrix, State, StateError,
};

const ROW_SUM_TOL: f64 = 1e-12;
/// Default tolerance for kernel axioms and Kraus completeness.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("operands live on different groupoids")]
    GroupoidMismatch,
    #[error("expected {expected} entries, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("row {row} of the stochastic matrix is invalid: {reason}")]
    RowSumViolation { row: usize, reason: String },
    #[error("groupoid is not trivial (classical)")]
    NotTrivial,
    #[error("pushed state is not positive definite on fiber {fiber} (min eigenvalue {min_eigenvalue:e})")]
    PositivityLost { fiber: String, min_eigenvalue: f64 },
    #[error("pushed state is not normalized (deficit {deficit:e})")]
    NormalizationLost { deficit: f64 },
    #[error("pushed state lost Hermitian symmetry (deficit {deficit:e})")]
    HermiticityLost { deficit: f64 },
    #[error("Kraus operators are not trace preserving (deviation {deviation:e})")]
    NonTracePreserving { deviation: f64 },
    #[error("no Kraus operators given")]
    EmptyKraus,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

/// Row-stochastic matrix `K[x, y] = Π(x, {y})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalKernel {
    rows: usize,
    cols: usize,
    k: Vec<f64>,
}

impl ClassicalKernel {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self, ChannelError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(ChannelError::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let mut k = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(ChannelError::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            if let Some(bad) = row.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(ChannelError::RowSumViolation {
                    row: i,
                    reason: format!("entry {bad} is negative or not finite"),
                });
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(ChannelError::RowSumViolation {
                    row: i,
                    reason: format!("sums to {s}"),
                });
            }
            k.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            k,
        })
    }

    pub fn identity(n: usize) -> Self {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(&rows).expect("identity is stochastic")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.k[x * self.cols + y]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.k.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    /// `p ↦ pK`.
    pub fn push(&self, p: &[f64]) -> Vec<f64> {
        assert_eq!(p.len(), self.rows);
        (0..self.cols)
            .map(|y| (0..self.rows).map(|x| p[x] * self.get(x, y)).sum())
            .collect()
    }

    /// `f ↦ Kf`.
    pub fn pull(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.cols);
        (0..self.rows)
            .map(|x| (0..self.cols).map(|y| self.get(x, y) * f[y]).sum())
            .collect()
    }

    /// Matrix product `self · other` (run `self` first).
    pub fn then(&self, other: &ClassicalKernel) -> Result<ClassicalKernel, ChannelError> {
        if self.cols != other.rows {
            return Err(ChannelError::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let rows: Vec<Vec<f64>> = (0..self.rows)
            .map(|x| {
                (0..other.cols)
                    .map(|z| {
                        (0..self.cols)
                            .map(|y| self.get(x, y) * other.get(y, z))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        // products of stochastic matrices are stochastic up to rounding
        Ok(ClassicalKernel {
            rows: self.rows,
            cols: other.cols,
            k: rows.concat(),
        })
    }
}

/// A complex kernel `Π : Γ₁ × Γ₂ → ℂ`, stored row-major over (α₁, α₂).
#[derive(Debug, Clone)]
pub struct QuantumKernel {
    source: Arc<FiniteGroupoid>,
    target: Arc<FiniteGroupoid>,
    pi: Vec<Complex64>,
}

impl QuantumKernel {
    pub fn new(
        source: Arc<FiniteGroupoid>,
        target: Arc<FiniteGroupoid>,
        pi: Vec<Complex64>,
    ) -> Result<Self, ChannelError> {
        let expected = source.num_elements() * target.num_elements();
        if pi.len() != expected {
            return Err(ChannelError::DimensionMismatch {
                expected,
                found: pi.len(),
            });
        }
        if pi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(NumError::NonFinite.into());
        }
        Ok(Self { source, target, pi })
    }

    pub fn source(&self) -> &Arc<FiniteGroupoid> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteGroupoid> {
        &self.target
    }

    pub fn get(&self, a1: usize, a2: usize) -> Complex64 {
        self.pi[a1 * self.target.num_elements() + a2]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.pi
    }

    pub fn max_abs_diff(&self, other: &QuantumKernel) -> Result<f64, ChannelError> {
        if !same_groupoid(&self.source, &other.source)
            || !same_groupoid(&self.target, &other.target)
        {
            return Err(ChannelError::GroupoidMismatch);
        }
        Ok(self
            .pi
            .iter()
            .zip(&other.pi)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn section(&self, a1: usize) -> &[Complex64] {
        let n2 = self.target.num_elements();
        &self.pi[a1 * n2..(a1 + 1) * n2]
    }
}

/// Axiom report produced by [`validate_kernel`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelReport {
    /// `max_α₁ |Σ_x Π(α₁, 1_x) ν₂(1_x) − [α₁ is a unit]|`.
    pub normalization_deficit: f64,
    pub normalized: bool,
    /// Smallest fiber eigenvalue of `Π(1_x, ·)` over all units of Γ₁.
    pub min_section_eigenvalue: f64,
    /// Smallest eigenvalue of the joint fiber matrices on `Γ₁ × Γ₂`.
    pub min_joint_eigenvalue: f64,
    /// `(x₁, x₂)` outcome ids of the first joint fiber that fails.
    pub failing_fiber: Option<(String, String)>,
    pub positive: bool,
    /// `max |conj Π(α₁, α₂) − δ₂(α₂) Π(α₁⁻¹, α₂⁻¹)|`.
    pub hermiticity_deficit: f64,
    pub hermitian: bool,
    pub pass: bool,
}

/// Checks normalization, positivity and hermiticity of a kernel.
///
/// Normalization is `Σ_x Π(α₁, 1_x) ν₂(1_x) = 1` on units of Γ₁ and `0`
/// elsewhere. Positivity asks `Π` to be positive definite as a function on
/// the product groupoid `Γ₁ × Γ₂`; restricted to a unit α₁ this is positive
/// definiteness of `Π(α₁, ·)` on Γ₂, and on pair groupoids it is exactly
/// positivity of the Choi matrix.
pub fn validate_kernel(pi: &QuantumKernel, tol: f64) -> Result<KernelReport, ChannelError> {
    let (g1, g2) = (&pi.source, &pi.target);
    let n1 = g1.num_elements();

    let mut normalization_deficit = 0.0f64;
    for a1 in 0..n1 {
        let s: Complex64 = g2.units().iter().map(|&u| pi.get(a1, u) * g2.nu(u)).sum();
        let want = if g1.is_unit(a1) { 1.0 } else { 0.0 };
        normalization_deficit = normalization_deficit.max((s - Complex64::new(want, 0.0)).norm());
    }

    let mut min_section_eigenvalue = f64::INFINITY;
    for &u in g1.units() {
        let sec = pi.section(u);
        let (mins, _) = fiber_positivity(
            (0..g2.num_outcomes()).map(|x| crate::states::fiber_matrix(g2, sec, x)),
            tol,
        )?;
        min_section_eigenvalue = mins.into_iter().fold(min_section_eigenvalue, f64::min);
    }

    let mut joint = Vec::new();
    let mut labels = Vec::new();
    for x1 in 0..g1.num_outcomes() {
        for x2 in 0..g2.num_outcomes() {
            joint.push(joint_fiber_matrix(pi, x1, x2));
            labels.push((g1.outcome_ids()[x1].clone(), g2.outcome_ids()[x2].clone()));
        }
    }
    let (mins, failing) = fiber_positivity(joint.into_iter(), tol)?;
    let min_joint_eigenvalue = mins.into_iter().fold(f64::INFINITY, f64::min);

    let scale = 1.0 + pi.pi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut hermiticity_deficit = 0.0f64;
    for a1 in 0..n1 {
        for a2 in 0..g2.num_elements() {
            let lhs = pi.get(a1, a2).conj();
            let rhs = pi.get(g1.inverse(a1), g2.inverse(a2)) * g2.delta(a2);
            hermiticity_deficit = hermiticity_deficit.max((lhs - rhs).norm());
        }
    }

    let normalized = normalization_deficit <= tol;
    let positive = failing.is_none();
    let hermitian = hermiticity_deficit <= tol * scale;
    Ok(KernelReport {
        normalization_deficit,
        normalized,
        min_section_eigenvalue,
        min_joint_eigenvalue,
        failing_fiber: failing.map(|i| labels[i].clone()),
        positive,
        hermiticity_deficit,
        hermitian,
        pass: normalized && positive && hermitian,
    })
}

/// Joint fiber matrix over `Γ₁^{x₁} × Γ₂^{x₂}` with entries
/// `δ₂(β_k)^{1/2} Π(α_k⁻¹ ∘ α_l, β_k⁻¹ ∘ β_l) δ₂(β_l)^{-1/2}`.
///
/// The twisted hermiticity of Π makes the unscaled matrix Hermitian only up to
/// this diagonal similarity, which leaves the spectrum unchanged.
fn joint_fiber_matrix(pi: &QuantumKernel, x1: usize, x2: usize) -> ComplexMatrix {
    let (g1, g2) = (&pi.source, &pi.target);
    let f1 = g1.target_fiber(x1);
    let f2 = g2.target_fiber(x2);
    let m = f2.len();
    let rel = |g: &FiniteGroupoid, a: usize, b: usize| {
        g.compose(g.inverse(a), b)
            .expect("same-target elements compose after inversion")
    };
    let scale: Vec<f64> = f2.iter().map(|&b| g2.delta(b).sqrt()).collect();
    ComplexMatrix::from_fn(f1.len() * m, f1.len() * m, |r, c| {
        let a = rel(g1, f1[r / m], f1[c / m]);
        let b = rel(g2, f2[r % m], f2[c % m]);
        pi.get(a, b) * (scale[r % m] / scale[c % m])
    })
}

/// `Π(α₁, α₂) = [α₁ = α₂] / ν(α₁)`.
pub fn identity_kernel(g: Arc<FiniteGroupoid>) -> QuantumKernel {
    let n = g.num_elements();
    let mut pi = vec![Complex64::new(0.0, 0.0); n * n];
    for a in 0..n {
        pi[a * n + a] = Complex64::new(1.0 / g.nu(a), 0.0);
    }
    QuantumKernel {
        source: g.clone(),
        target: g,
        pi,
    }
}

/// `(φ₁Π)(α₂) = Σ_{α₁} φ₁(α₁) Π(α₁, α₂) ν₁(α₁)` without validating the result.
pub fn push_raw(phi1: &[Complex64], pi: &QuantumKernel) -> Vec<Complex64> {
    let n2 = pi.target.num_elements();
    let mut out = vec![Complex64::new(0.0, 0.0); n2];
    for (a1, (f, nu)) in phi1.iter().zip(pi.source.nu_all()).enumerate() {
        let w = f * nu;
        if w == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (o, p) in out.iter_mut().zip(pi.section(a1)) {
            *o += w * p;
        }
    }
    out
}

/// Pushes a state through a kernel and checks that the result is a state.
pub fn push_state(rho: &State, pi: &QuantumKernel) -> Result<State, ChannelError> {
    push_state_with_tol(rho, pi, DEFAULT_KERNEL_TOL)
}

pub fn push_state_with_tol(
    rho: &State,
    pi: &QuantumKernel,
    tol: f64,
) -> Result<State, ChannelError> {
    if !same_groupoid(rho.groupoid(), &pi.source) {
        return Err(ChannelError::GroupoidMismatch);
    }
    let phi2 = push_raw(rho.phi(), pi);
    let report = check_state(&pi.target, &phi2, tol)?;
    if let Some(x) = report.failing_fiber {
        return Err(ChannelError::PositivityLost {
            fiber: pi.target.outcome_ids()[x].clone(),
            min_eigenvalue: report.fiber_min_eigenvalues[x],
        });
    }
    if !report.normalized {
        return Err(ChannelError::NormalizationLost {
            deficit: report.normalization_deficit,
        });
    }
    if !report.symmetric {
        return Err(ChannelError::HermiticityLost {
            deficit: report.symmetry_deficit,
        });
    }
    Ok(State::from_raw(pi.target.clone(), phi2))
}

/// `(Πf₂)(α₁) = Σ_{α₂} Π(α₁, α₂) f₂(α₂) ν₂(α₂)`.
pub fn pull_observable(
    pi: &QuantumKernel,
    f2: &AlgebraElement,
) -> Result<AlgebraElement, ChannelError> {
    if !same_groupoid(f2.groupoid(), &pi.target) {
        return Err(ChannelError::GroupoidMismatch);
    }
    let weighted: Vec<Complex64> = f2
        .coeff()
        .iter()
        .zip(pi.target.nu_all())
        .map(|(f, nu)| f * nu)
        .collect();
    let coeff = (0..pi.source.num_elements())
        .map(|a1| {
            pi.section(a1)
                .iter()
                .zip(&weighted)
                .map(|(p, w)| p * w)
                .sum()
        })
        .collect();
    Ok(AlgebraElement::new(pi.source.clone(), coeff)?)
}

/// `(Π₁₂ ∘ Π₂₃)(α₁, α₃) = Σ_{α₂} Π₁₂(α₁, α₂) Π₂₃(α₂, α₃) ν₂(α₂)`.
pub fn compose(p12: &QuantumKernel, p23: &QuantumKernel) -> Result<QuantumKernel, ChannelError> {
    if !same_groupoid(&p12.target, &p23.source) {
        return Err(ChannelError::GroupoidMismatch);
    }
    let n1 = p12.source.num_elements();
    let n3 = p23.target.num_elements();
    let mut pi = Vec::with_capacity(n1 * n3);
    for a1 in 0..n1 {
        pi.extend(push_raw(p12.section(a1), p23));
    }
    Ok(QuantumKernel {
        source: p12.source.clone(),
        target: p23.target.clone(),
        pi,
    })
}

/// Classical kernel on trivial groupoids: `Π(1_x, 1_y) = K[x, y] / P₂(y)`.
pub fn embed_classical(
    k: &ClassicalKernel,
    g1: Arc<FiniteGroupoid>,
    g2: Arc<FiniteGroupoid>,
) -> Result<QuantumKernel, ChannelError> {
    for g in [&g1, &g2] {
        if (0..g.num_elements()).any(|a| !g.is_unit(a)) {
            return Err(ChannelError::NotTrivial);
        }
    }
    if k.rows != g1.num_outcomes() || k.cols != g2.num_outcomes() {
        return Err(ChannelError::DimensionMismatch {
            expected: g1.num_outcomes() * g2.num_outcomes(),
            found: k.rows * k.cols,
        });
    }
    let (n1, n2) = (g1.num_elements(), g2.num_elements());
    let mut pi = vec![Complex64::new(0.0, 0.0); n1 * n2];
    for x in 0..k.rows {
        for y in 0..k.cols {
            let (a1, a2) = (g1.unit(x), g2.unit(y));
            pi[a1 * n2 + a2] = Complex64::new(k.get(x, y) / g2.nu(a2), 0.0);
        }
    }
    QuantumKernel::new(g1, g2, pi)
}

/// State-side linear map `Φ_*` on matrices, stored by its action on matrix units.
#[derive(Debug, Clone)]
pub struct PredualMap {
    n_in: usize,
    n_out: usize,
    /// `images[x * n_in + y] = Φ_*(E_xy)`.
    images: Vec<ComplexMatrix>,
}

impl PredualMap {
    pub fn from_fn(
        n_in: usize,
        n_out: usize,
        mut f: impl FnMut(&ComplexMatrix) -> ComplexMatrix,
    ) -> Self {
        let mut images = Vec::with_capacity(n_in * n_in);
        for x in 0..n_in {
            for y in 0..n_in {
                let mut e = ComplexMatrix::zeros(n_in, n_in);
                e[(x, y)] = Complex64::new(1.0, 0.0);
                let img = f(&e);
                assert_eq!((img.rows(), img.cols()), (n_out, n_out));
                images.push(img);
            }
        }
        Self {
            n_in,
            n_out,
            images,
        }
    }

    /// Map from Kraus operators: `Φ_*(X) = Σ A_k X A_k†`.
    pub fn from_kraus(kraus: &[ComplexMatrix]) -> Result<Self, ChannelError> {
        let first = kraus.first().ok_or(ChannelError::EmptyKraus)?;
        let (m, n) = (first.rows(), first.cols());
        for a in kraus {
            if (a.rows(), a.cols()) != (m, n) {
                return Err(ChannelError::DimensionMismatch {
                    expected: m * n,
                    found: a.rows() * a.cols(),
                });
            }
        }
        Ok(Self::from_fn(n, m, |x| {
            kraus.iter().fold(ComplexMatrix::zeros(m, m), |acc, a| {
                acc.add(&(&(a * x) * &a.adjoint()))
            })
        }))
    }

    pub fn input_dim(&self) -> usize {
        self.n_in
    }

    pub fn output_dim(&self) -> usize {
        self.n_out
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((x.rows(), x.cols()), (self.n_in, self.n_in));
        let mut out = ComplexMatrix::zeros(self.n_out, self.n_out);
        for i in 0..self.n_in {
            for j in 0..self.n_in {
                let c = x[(i, j)];
                if c != Complex64::new(0.0, 0.0) {
                    out = out.add(&self.images[i * self.n_in + j].scale(c));
                }
            }
        }
        out
    }

    /// `self` after `first`.
    pub fn after(&self, first: &PredualMap) -> PredualMap {
        assert_eq!(first.n_out, self.n_in);
        PredualMap::from_fn(first.n_in, self.n_out, |x| self.apply(&first.apply(x)))
    }

    /// Choi matrix `C = Σ_{xy} E_xy ⊗ Φ_*(E_xy)`.
    pub fn choi(&self) -> ComplexMatrix {
        let (n, m) = (self.n_in, self.n_out);
        ComplexMatrix::from_fn(n * m, n * m, |r, c| {
            let (x, u) = (r / m, r % m);
            let (y, v) = (c / m, c % m);
            self.images[x * n + y][(u, v)]
        })
    }

    /// `max ‖Tr Φ_*(E_xy) − δ_xy‖`.
    pub fn trace_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for x in 0..self.n_in {
            for y in 0..self.n_in {
                let want = if x == y { 1.0 } else { 0.0 };
                let tr = self.images[x * self.n_in + y].trace();
                worst = worst.max((tr - Complex64::new(want, 0.0)).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &PredualMap) -> f64 {
        assert_eq!((self.n_in, self.n_out), (other.n_in, other.n_out));
        self.images
            .iter()
            .zip(&other.images)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

/// State-side map of a kernel between uniform pair groupoids:
/// density dictionary, push, density dictionary back, extended linearly.
pub fn kernel_to_cp_map(pi: &QuantumKernel) -> Result<PredualMap, ChannelError> {
    let (n1, _) = uniform_pair_table(&pi.source)?;
    let (n2, _) = uniform_pair_table(&pi.target)?;
    let mut err = None;
    let map = PredualMap::from_fn(n1, n2, |x| {
        let out = matrix_to_phi(&pi.source, x)
            .map(|phi1| push_raw(&phi1, pi))
            .and_then(|phi2| phi_to_matrix(&pi.target, &phi2));
        match out {
            Ok(m) => m,
            Err(e) => {
                err.get_or_insert(e);
                ComplexMatrix::zeros(n2, n2)
            }
        }
    });
    match err {
        Some(e) => Err(e.into()),
        None => Ok(map),
    }
}

/// Kernel whose state-side map is `map`, between uniform pair groupoids.
pub fn kernel_from_predual(
    map: &PredualMap,
    g1: Arc<FiniteGroupoid>,
    g2: Arc<FiniteGroupoid>,
) -> Result<QuantumKernel, ChannelError> {
    let (n1, t1) = uniform_pair_table(&g1)?;
    let (n2, t2) = uniform_pair_table(&g2)?;
    if (map.n_in, map.n_out) != (n1, n2) {
        return Err(ChannelError::DimensionMismatch {
            expected: n1 * n2,
            found: map.n_in * map.n_out,
        });
    }
    let (e1, e2) = (g1.num_elements(), g2.num_elements());
    let mut pi = vec![Complex64::new(0.0, 0.0); e1 * e2];
    // φ₁ν₁(x→y) = D₁[x, y] and φ₂(u→v) = n₂ D₂[u, v]
    let scale = n2 as f64;
    for x in 0..n1 {
        for y in 0..n1 {
            let a1 = t1[y * n1 + x];
            let img = &map.images[x * n1 + y];
            for u in 0..n2 {
                for v in 0..n2 {
                    pi[a1 * e2 + t2[v * n2 + u]] = img[(u, v)] * scale;
                }
            }
        }
    }
    QuantumKernel::new(g1, g2, pi)
}

/// Kernel of the channel `X ↦ Σ A_k X A_k†` between uniform pair groupoids.
pub fn choi_to_kernel(
    kraus: &[ComplexMatrix],
    g1: Arc<FiniteGroupoid>,
    g2: Arc<FiniteGroupoid>,
) -> Result<QuantumKernel, ChannelError> {
    choi_to_kernel_with_tol(kraus, g1, g2, DEFAULT_KERNEL_TOL)
}

pub fn choi_to_kernel_with_tol(
    kraus: &[ComplexMatrix],
    g1: Arc<FiniteGroupoid>,
    g2: Arc<FiniteGroupoid>,
    tol: f64,
) -> Result<QuantumKernel, ChannelError> {
    let first = kraus.first().ok_or(ChannelError::EmptyKraus)?;
    let n = first.cols();
    let completeness = kraus.iter().fold(ComplexMatrix::zeros(n, n), |acc, a| {
        if a.cols() == n {
            acc.add(&(&a.adjoint() * a))
        } else {
            acc
        }
    });
    let map = PredualMap::from_kraus(kraus)?;
    let deviation = completeness.max_abs_diff(&ComplexMatrix::identity(n));
    if deviation > tol {
        return Err(ChannelError::NonTracePreserving { deviation });
    }
    kernel_from_predual(&map, g1, g2)
}

/// Kernel whose Choi matrix is `choi` (blocks indexed by input matrix units).
pub fn choi_matrix_to_kernel(
    choi: &ComplexMatrix,
    g1: Arc<FiniteGroupoid>,
    g2: Arc<FiniteGroupoid>,
) -> Result<QuantumKernel, ChannelError> {
    let (n1, n2) = (g1.num_outcomes(), g2.num_outcomes());
    if choi.rows() != n1 * n2 || choi.cols() != n1 * n2 {
        return Err(ChannelError::DimensionMismatch {
            expected: n1 * n1 * n2 * n2,
            found: choi.rows() * choi.cols(),
        });
    }
    let map = PredualMap::from_fn(n1, n2, |e| {
        let (x, y) = (0..n1 * n1)
            .map(|k| (k / n1, k % n1))
            .find(|&(x, y)| e[(x, y)] != Complex64::new(0.0, 0.0))
            .expect("matrix unit");
        ComplexMatrix::from_fn(n2, n2, |u, v| choi[(x * n2 + u, y * n2 + v)])
    });
    kernel_from_predual(&map, g1, g2)
}

/// Choi-matrix positivity of the kernel's state-side map.
pub fn cp_verdict(pi: &QuantumKernel) -> Result<PsdVerdict, ChannelError> {
    cp_verdict_with_tol(pi, DEFAULT_PSD_TOL)
}

pub fn cp_verdict_with_tol(pi: &QuantumKernel, psd_tol: f64) -> Result<PsdVerdict, ChannelError> {
    let map = kernel_to_cp_map(pi)?;
    Ok(psd_verdict(&map.choi().hermitian_part(), psd_tol)?)
}

/// True iff pushing `rho1` through `pi` lands on `rho2` within `tol`.
pub fn check_ncp_morphism(
    pi: &QuantumKernel,
    rho1: &State,
    rho2: &State,
    tol: f64,
) -> Result<bool, ChannelError> {
    if !same_groupoid(rho1.groupoid(), &pi.source) || !same_groupoid(rho2.groupoid(), &pi.target) {
        return Err(ChannelError::GroupoidMismatch);
    }
    let pushed = push_raw(rho1.phi(), pi);
    Ok(pushed
        .iter()
        .zip(rho2.phi())
        .all(|(a, b)| (a - b).norm() <= tol))
}

/// Pauli matrices `σ_x, σ_y, σ_z`.
pub fn pauli() -> [ComplexMatrix; 3] {
    let c = Complex64::new;
    [
        ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ]),
        ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 1.0), c(0.0, 0.0)],
        ]),
        ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(-1.0, 0.0)],
        ]),
    ]
    .map(|m| m.expect("2x2"))
}

/// Kraus operators of the qubit depolarizing channel `D ↦ (1−λ)D + λ I/2`.
pub fn depolarizing_kraus(lambda: f64) -> Vec<ComplexMatrix> {
    let [x, y, z] = pauli();
    let w = Complex64::new((lambda / 4.0).sqrt(), 0.0);
    vec![
        ComplexMatrix::identity(2).scale(Complex64::new((1.0 - 3.0 * lambda / 4.0).sqrt(), 0.0)),
        x.scale(w),
        y.scale(w),
        z.scale(w),
    ]
}

/// Kernel of the transpose map on `pair(n)`; positive but not completely positive.
pub fn transpose_kernel(g: Arc<FiniteGroupoid>) -> Result<QuantumKernel, ChannelError> {
    let n = g.num_outcomes();
    let map = PredualMap::from_fn(n, n, ComplexMatrix::transpose);
    kernel_from_predual(&map, g.clone(), g)
}
