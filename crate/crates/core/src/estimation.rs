//! One-parameter statistical models, the Fisher metric and Cramer-Rao bounds.
//!
//! A model is a curve `s ↦ φ_s` of characteristic functions on a fixed
//! groupoid. The derivative functional `Φ(B) = d/ds ρ_s(B)` is represented
//! inside the GNS space of the base state by a vector `ℓ` with
//! `⟨ℓ|B⟩₀ = Φ(B)`, and the Fisher metric is `⟨ℓ|ℓ⟩₀`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{convolve, same_groupoid, star, AlgebraElement, AlgebraError};
use crate::channels::{embed_classical, push_raw, ChannelError, ClassicalKernel};
use crate::gns::{gns_inner, GnsError, GnsSpace};
use crate::groupoid::FiniteGroupoid;
use crate::numkit::{min_norm_solve, ComplexMatrix, NumError};
use crate::states::{
    check_state, expectation, matrix_to_phi, State, StateError, DEFAULT_STATE_TOL,
};

pub const DEFAULT_STEP: f64 = 1e-5;
pub const FOLIUM_TOL: f64 = 1e-6;
pub const BOUND_TOL: f64 = 1e-12;
pub const P_FLOOR: f64 = 1e-12;
pub const SELF_ADJOINT_TOL: f64 = 1e-10;
pub const CONGRUENCE_TOL: f64 = 1e-10;
pub const UNBIASED_TOL: f64 = 1e-6;
pub const SATURATION_TOL: f64 = 1e-6;
const BASE_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimationError {
    #[error("parameter {s} lies outside the model interval [{lo}, {hi}]")]
    IntervalExceeded { s: f64, lo: f64, hi: f64 },
    #[error("finite-difference step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("state at s = {s} is invalid: {reason}")]
    InvalidCurveState { s: f64, reason: String },
    #[error("derivative leaves the folium of the base state (residual {residual:e})")]
    FoliumViolation { residual: f64 },
    #[error("Fisher information {g_f:e} is numerically zero")]
    ZeroInformation { g_f: f64 },
    #[error("probability of outcome {outcome} at s = {s} is {p:e}, below the support floor")]
    SupportBoundary { s: f64, outcome: String, p: f64 },
    #[error("model is not classical (groupoid has non-unit elements)")]
    NotClassical,
    #[error("estimator is not self-adjoint (deviation {deviation:e})")]
    NotSelfAdjoint { deviation: f64 },
    #[error("not a congruent embedding: K·L deviates from the identity by {deviation:e}")]
    NotCongruent { deviation: f64 },
    #[error("GNS space was not built from the model's base state (deviation {deviation:e})")]
    BaseStateMismatch { deviation: f64 },
    #[error("operands live on different groupoids")]
    GroupoidMismatch,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Gns(#[from] GnsError),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

type PhiCurve = dyn Fn(f64) -> Result<Vec<Complex64>, EstimationError> + Send + Sync;

/// A curve of characteristic functions on a fixed groupoid.
#[derive(Clone)]
pub struct StatisticalModel {
    groupoid: Arc<FiniteGroupoid>,
    curve: Arc<PhiCurve>,
    s0: f64,
    interval: (f64, f64),
    grid: Vec<f64>,
    state_tol: f64,
}

impl fmt::Debug for StatisticalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StatisticalModel")
            .field("s0", &self.s0)
            .field("interval", &self.interval)
            .field("grid", &self.grid)
            .field("elements", &self.groupoid.num_elements())
            .finish()
    }
}

impl StatisticalModel {
    /// Model from a curve of characteristic functions. The base state is validated.
    pub fn new(
        groupoid: Arc<FiniteGroupoid>,
        s0: f64,
        interval: (f64, f64),
        curve: impl Fn(f64) -> Vec<Complex64> + Send + Sync + 'static,
    ) -> Result<Self, EstimationError> {
        Self::try_new(groupoid, s0, interval, move |s| Ok(curve(s)))
    }

    pub fn try_new(
        groupoid: Arc<FiniteGroupoid>,
        s0: f64,
        interval: (f64, f64),
        curve: impl Fn(f64) -> Result<Vec<Complex64>, EstimationError> + Send + Sync + 'static,
    ) -> Result<Self, EstimationError> {
        let (lo, hi) = interval;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(EstimationError::InvalidModel(format!(
                "bad interval [{lo}, {hi}]"
            )));
        }
        if !s0.is_finite() {
            return Err(EstimationError::InvalidModel("s0 is not finite".into()));
        }
        let model = Self {
            groupoid,
            curve: Arc::new(curve),
            s0,
            interval,
            grid: Vec::new(),
            state_tol: DEFAULT_STATE_TOL,
        };
        model.state_at(s0)?;
        Ok(model)
    }

    /// Classical model on a trivial groupoid from a curve of distributions.
    pub fn classical(
        groupoid: Arc<FiniteGroupoid>,
        s0: f64,
        interval: (f64, f64),
        p: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self, EstimationError> {
        require_classical(&groupoid)?;
        let g = groupoid.clone();
        Self::new(groupoid, s0, interval, move |s| {
            let ps = p(s);
            let mut phi = vec![Complex64::new(0.0, 0.0); g.num_elements()];
            for (x, q) in ps.iter().enumerate().take(g.num_outcomes()) {
                let u = g.unit(x);
                phi[u] = Complex64::new(q / g.nu(u), 0.0);
            }
            phi
        })
    }

    /// Model on a uniform pair groupoid from a curve of density matrices.
    pub fn from_density_curve(
        groupoid: Arc<FiniteGroupoid>,
        s0: f64,
        interval: (f64, f64),
        d: impl Fn(f64) -> ComplexMatrix + Send + Sync + 'static,
    ) -> Result<Self, EstimationError> {
        let g = groupoid.clone();
        Self::try_new(groupoid, s0, interval, move |s| {
            Ok(matrix_to_phi(&g, &d(s))?)
        })
    }

    /// Natural cubic spline through states at knots, entrywise in φ.
    /// The interval must lie within the knot range unless there is one knot.
    pub fn interpolated(
        groupoid: Arc<FiniteGroupoid>,
        s0: f64,
        interval: (f64, f64),
        mut knots: Vec<(f64, State)>,
    ) -> Result<Self, EstimationError> {
        if knots.is_empty() {
            return Err(EstimationError::InvalidModel("no states given".into()));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        if knots.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(EstimationError::InvalidModel(
                "duplicate parameter value".into(),
            ));
        }
        if knots.iter().any(|(s, _)| !s.is_finite()) {
            return Err(EstimationError::InvalidModel(
                "parameter value is not finite".into(),
            ));
        }
        if knots
            .iter()
            .any(|(_, st)| !same_groupoid(st.groupoid(), &groupoid))
        {
            return Err(EstimationError::GroupoidMismatch);
        }
        let (first, last) = (knots[0].0, knots[knots.len() - 1].0);
        if knots.len() > 1 && (interval.0 < first || interval.1 > last) {
            return Err(EstimationError::InvalidModel(format!(
                "interval [{}, {}] extends beyond the states given on [{first}, {last}]",
                interval.0, interval.1
            )));
        }
        let xs: Vec<f64> = knots.iter().map(|(s, _)| *s).collect();
        let n = groupoid.num_elements();
        let mut splines = Vec::with_capacity(2 * n);
        for a in 0..n {
            let re: Vec<f64> = knots.iter().map(|(_, st)| st.phi()[a].re).collect();
            let im: Vec<f64> = knots.iter().map(|(_, st)| st.phi()[a].im).collect();
            splines.push(NaturalSpline::new(&xs, &re));
            splines.push(NaturalSpline::new(&xs, &im));
        }
        Self::new(groupoid, s0, interval, move |s| {
            splines
                .chunks(2)
                .map(|p| Complex64::new(p[0].eval(s), p[1].eval(s)))
                .collect()
        })
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_state_tol(mut self, tol: f64) -> Self {
        self.state_tol = tol;
        self
    }

    /// The same family in the parameter `t = s / factor`, i.e. `t ↦ curve(factor · t)`.
    pub fn reparametrized(&self, factor: f64) -> Result<Self, EstimationError> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(EstimationError::InvalidModel(format!(
                "bad scale factor {factor}"
            )));
        }
        let inner = self.clone();
        let mut m = Self::try_new(
            self.groupoid.clone(),
            self.s0 / factor,
            (self.interval.0 / factor, self.interval.1 / factor),
            move |t| inner.phi_at(factor * t),
        )?;
        m.grid = self.grid.iter().map(|s| s / factor).collect();
        m.state_tol = self.state_tol;
        Ok(m)
    }

    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        &self.groupoid
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Unvalidated characteristic function at `s`.
    pub fn phi_at(&self, s: f64) -> Result<Vec<Complex64>, EstimationError> {
        let (lo, hi) = self.interval;
        if !(s >= lo && s <= hi) {
            return Err(EstimationError::IntervalExceeded { s, lo, hi });
        }
        let phi = (self.curve)(s)?;
        let n = self.groupoid.num_elements();
        if phi.len() != n {
            return Err(StateError::DimensionMismatch {
                expected: n,
                found: phi.len(),
            }
            .into());
        }
        Ok(phi)
    }

    pub fn state_at(&self, s: f64) -> Result<State, EstimationError> {
        let phi = self.phi_at(s)?;
        let report = check_state(&self.groupoid, &phi, self.state_tol)?;
        if !report.pass {
            return Err(EstimationError::InvalidCurveState {
                s,
                reason: report.to_string(),
            });
        }
        Ok(State::new(self.groupoid.clone(), phi, self.state_tol)?)
    }

    pub fn base_state(&self) -> Result<State, EstimationError> {
        self.state_at(self.s0)
    }
}

fn require_classical(g: &FiniteGroupoid) -> Result<(), EstimationError> {
    if (0..g.num_elements()).any(|a| !g.is_unit(a)) {
        return Err(EstimationError::NotClassical);
    }
    Ok(())
}

fn check_step(h: f64) -> Result<(), EstimationError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(EstimationError::InvalidStep(h));
    }
    Ok(())
}

/// A self-adjoint algebra element used as an estimator.
#[derive(Debug, Clone)]
pub struct Estimator {
    a: AlgebraElement,
}

impl Estimator {
    pub fn new(a: AlgebraElement) -> Result<Self, EstimationError> {
        let scale = 1.0 + a.coeff().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let deviation = star(&a).max_abs_diff(&a)?;
        if deviation > SELF_ADJOINT_TOL * scale {
            return Err(EstimationError::NotSelfAdjoint { deviation });
        }
        Ok(Self { a })
    }

    pub fn element(&self) -> &AlgebraElement {
        &self.a
    }
}

/// `v_α = d/ds (φ_s(α) ν(α))` at `s₀` by central differences.
pub fn derivative_vector(
    model: &StatisticalModel,
    h: f64,
) -> Result<Vec<Complex64>, EstimationError> {
    check_step(h)?;
    let plus = model.state_at(model.s0 + h)?;
    let minus = model.state_at(model.s0 - h)?;
    let nu = model.groupoid.nu_all();
    Ok(plus
        .phi()
        .iter()
        .zip(minus.phi())
        .zip(nu)
        .map(|((p, m), w)| (p - m) * (w / (2.0 * h)))
        .collect())
}

/// Riesz representer of the derivative functional in spanning-set coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Representer {
    pub ell: Vec<Complex64>,
    pub folium_residual: f64,
    pub rank: usize,
}

fn check_space(model: &StatisticalModel, space: &GnsSpace) -> Result<(), EstimationError> {
    if !same_groupoid(&model.groupoid, space.groupoid()) {
        return Err(EstimationError::GroupoidMismatch);
    }
    let base = model.phi_at(model.s0)?;
    let deviation = base
        .iter()
        .zip(space.base_state().phi())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if deviation > BASE_MATCH_TOL {
        return Err(EstimationError::BaseStateMismatch { deviation });
    }
    Ok(())
}

/// Solves `⟨ℓ|δ_β⟩₀ = v_β` for all β, i.e. `gram · ℓ = conj(v)`.
pub fn riesz_representer(
    model: &StatisticalModel,
    space: &GnsSpace,
    h: f64,
) -> Result<Representer, EstimationError> {
    check_space(model, space)?;
    let v = derivative_vector(model, h)?;
    let rhs: Vec<Complex64> = v.iter().map(Complex64::conj).collect();
    let sol = min_norm_solve(&space.gram().hermitian_part(), &rhs, space.rank_tol())?;
    if !(sol.residual <= FOLIUM_TOL) {
        return Err(EstimationError::FoliumViolation {
            residual: sol.residual,
        });
    }
    Ok(Representer {
        ell: sol.x,
        folium_residual: sol.residual,
        rank: sol.rank,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FisherInfo {
    pub g_f: f64,
    /// Imaginary part of `ℓ† · gram · ℓ`; numerically zero for a valid model.
    pub imaginary_part: f64,
    pub folium_residual: f64,
}

pub fn fisher_information(
    model: &StatisticalModel,
    space: &GnsSpace,
    h: f64,
) -> Result<FisherInfo, EstimationError> {
    let r = riesz_representer(model, space, h)?;
    let q = gns_inner(space, &r.ell, &r.ell)?;
    Ok(FisherInfo {
        g_f: q.re,
        imaginary_part: q.im,
        folium_residual: r.folium_residual,
    })
}

/// `G_F = ⟨ℓ|ℓ⟩₀`.
pub fn fisher_metric(
    model: &StatisticalModel,
    space: &GnsSpace,
    h: f64,
) -> Result<f64, EstimationError> {
    Ok(fisher_information(model, space, h)?.g_f)
}

/// `G_F(ξ, ζ) = ⟨ℓ_ξ|ℓ_ζ⟩₀` for two representers in the same GNS space.
pub fn fisher_inner(
    space: &GnsSpace,
    xi: &Representer,
    zeta: &Representer,
) -> Result<Complex64, EstimationError> {
    Ok(gns_inner(space, &xi.ell, &zeta.ell)?)
}

/// `1 / G_F`.
pub fn cramer_rao_bound(
    model: &StatisticalModel,
    space: &GnsSpace,
    h: f64,
) -> Result<f64, EstimationError> {
    let g_f = fisher_metric(model, space, h)?;
    if !(g_f > BOUND_TOL) {
        return Err(EstimationError::ZeroInformation { g_f });
    }
    Ok(1.0 / g_f)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasPoint {
    pub s: f64,
    pub expectation: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnbiasedReport {
    pub points: Vec<BiasPoint>,
    pub max_deviation: f64,
    pub pass: bool,
}

/// `|ρ_s(A) − s|` on each grid point.
pub fn check_unbiased(
    model: &StatisticalModel,
    a: &Estimator,
    grid: &[f64],
    tol: f64,
) -> Result<UnbiasedReport, EstimationError> {
    if !same_groupoid(&model.groupoid, a.a.groupoid()) {
        return Err(EstimationError::GroupoidMismatch);
    }
    let mut points = Vec::with_capacity(grid.len());
    for &s in grid {
        let e = expectation(&model.state_at(s)?, &a.a)?;
        let deviation = (e - Complex64::new(s, 0.0)).norm();
        points.push(BiasPoint {
            s,
            expectation: e.re,
            deviation,
        });
    }
    let max_deviation = points.iter().map(|p| p.deviation).fold(0.0, f64::max);
    Ok(UnbiasedReport {
        pass: max_deviation <= tol,
        points,
        max_deviation,
    })
}

/// `s₀ + k h` for `k = −5..=5` inside the interval, merged with the model grid.
pub fn audit_grid(model: &StatisticalModel, h: f64) -> Vec<f64> {
    let (lo, hi) = model.interval;
    let mut grid: Vec<f64> = (-5..=5)
        .map(|k| model.s0 + k as f64 * h)
        .chain(model.grid.iter().copied())
        .filter(|s| *s >= lo && *s <= hi)
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CramerRaoAudit {
    /// `ρ₀(A* A)`.
    pub second_moment: f64,
    pub bound: f64,
    pub slack: f64,
    pub saturated: bool,
    pub fisher: f64,
    /// Largest `|ρ_s(A) − s|` over the audit grid.
    pub max_bias: f64,
    pub unbiased: bool,
}

pub fn cramer_rao_audit(
    model: &StatisticalModel,
    a: &Estimator,
    space: &GnsSpace,
    h: f64,
) -> Result<CramerRaoAudit, EstimationError> {
    let bound = cramer_rao_bound(model, space, h)?;
    let bias = check_unbiased(model, a, &audit_grid(model, h), UNBIASED_TOL)?;
    let aa = convolve(&star(&a.a), &a.a)?;
    let second_moment = expectation(space.base_state(), &aa)?.re;
    let slack = second_moment - bound;
    Ok(CramerRaoAudit {
        second_moment,
        bound,
        slack,
        saturated: slack <= SATURATION_TOL,
        fisher: 1.0 / bound,
        max_bias: bias.max_deviation,
        unbiased: bias.pass,
    })
}

fn outcome_probabilities(model: &StatisticalModel, s: f64) -> Result<Vec<f64>, EstimationError> {
    let phi = model.state_at(s)?.into_phi();
    let g = &model.groupoid;
    let p: Vec<f64> = (0..g.num_outcomes())
        .map(|x| {
            let u = g.unit(x);
            phi[u].re * g.nu(u)
        })
        .collect();
    if let Some((x, q)) = p.iter().enumerate().find(|(_, q)| !(**q > P_FLOOR)) {
        return Err(EstimationError::SupportBoundary {
            s,
            outcome: g.outcome_ids()[x].clone(),
            p: *q,
        });
    }
    Ok(p)
}

/// `Σ_x (∂_s ln p_s(x))² p_s(x)` at `s₀` by central differences.
pub fn classical_fisher_rao(model: &StatisticalModel, h: f64) -> Result<f64, EstimationError> {
    require_classical(&model.groupoid)?;
    check_step(h)?;
    let p0 = outcome_probabilities(model, model.s0)?;
    let pp = outcome_probabilities(model, model.s0 + h)?;
    let pm = outcome_probabilities(model, model.s0 - h)?;
    Ok(p0
        .iter()
        .zip(pp.iter().zip(&pm))
        .map(|(p, (a, b))| {
            let score = (a.ln() - b.ln()) / (2.0 * h);
            score * score * p
        })
        .sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CongruenceReport {
    pub fisher_before: f64,
    pub fisher_after: f64,
    pub deviation: f64,
}

/// Pushes a classical model through `K` and compares Fisher-Rao values.
/// `L` must be a left inverse (`K · L = I`) within `1e-10`.
pub fn congruent_invariance(
    model: &StatisticalModel,
    k: &ClassicalKernel,
    l: &ClassicalKernel,
    h: f64,
) -> Result<CongruenceReport, EstimationError> {
    require_classical(&model.groupoid)?;
    let n = model.groupoid.num_outcomes();
    if k.rows() != n {
        return Err(ChannelError::DimensionMismatch {
            expected: n,
            found: k.rows(),
        }
        .into());
    }
    let kl = k.then(l).map_err(|_| EstimationError::NotCongruent {
        deviation: f64::INFINITY,
    })?;
    let mut deviation = if kl.cols() == n { 0.0 } else { f64::INFINITY };
    if deviation == 0.0 {
        for x in 0..n {
            for y in 0..n {
                let want = if x == y { 1.0 } else { 0.0 };
                deviation = deviation.max((kl.get(x, y) - want).abs());
            }
        }
    }
    if deviation > CONGRUENCE_TOL {
        return Err(EstimationError::NotCongruent { deviation });
    }

    let target = Arc::new(FiniteGroupoid::trivial(k.cols()));
    let kernel = embed_classical(k, model.groupoid.clone(), target.clone())?;
    let inner = model.clone();
    let pushed = StatisticalModel::try_new(target, model.s0, model.interval, move |s| {
        Ok(push_raw(&inner.phi_at(s)?, &kernel))
    })?;
    let fisher_before = classical_fisher_rao(model, h)?;
    let fisher_after = classical_fisher_rao(&pushed, h)?;
    Ok(CongruenceReport {
        fisher_before,
        fisher_after,
        deviation: (fisher_before - fisher_after).abs(),
    })
}

/// Natural cubic spline; linear with two knots, constant with one.
#[derive(Debug, Clone)]
struct NaturalSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl NaturalSpline {
    fn new(xs: &[f64], ys: &[f64]) -> Self {
        let n = xs.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // tridiagonal system for interior second derivatives (Thomas algorithm)
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            let mut sub = vec![0.0; k];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                diag[i - 1] = 2.0 * (h0 + h1);
                sub[i - 1] = h0;
                rhs[i - 1] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
            }
            let sup = |i: usize| xs[i + 2] - xs[i + 1];
            for i in 1..k {
                let w = sub[i] / diag[i - 1];
                diag[i] -= w * sup(i - 1);
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - sup(i) * m[i + 2]) / diag[i];
            }
        }
        Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            m,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 1 {
            return self.ys[0];
        }
        let i = self.xs.partition_point(|&k| k <= x).clamp(1, n - 1) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::pauli;
    use crate::gns::build_gns_default;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn coin(s0: f64) -> StatisticalModel {
        let g = Arc::new(FiniteGroupoid::trivial(2));
        StatisticalModel::classical(g, s0, (-0.49, 0.49), |s| vec![0.5 + s, 0.5 - s]).unwrap()
    }

    fn qubit(s0: f64) -> StatisticalModel {
        let g = Arc::new(FiniteGroupoid::pair(2));
        StatisticalModel::from_density_curve(g, s0, (-0.9, 0.9), |s| {
            ComplexMatrix::identity(2)
                .add(&pauli()[2].scale(c(s)))
                .scale(c(0.5))
        })
        .unwrap()
    }

    fn gns(m: &StatisticalModel) -> GnsSpace {
        build_gns_default(&m.base_state().unwrap()).unwrap()
    }

    fn fisher(m: &StatisticalModel) -> f64 {
        fisher_metric(m, &gns(m), DEFAULT_STEP).unwrap()
    }

    fn element(g: &Arc<FiniteGroupoid>, m: &ComplexMatrix) -> AlgebraElement {
        crate::algebra::element_from_matrix(g.clone(), m).unwrap()
    }

    #[test]
    fn coin_derivative_and_score() {
        let m = coin(0.0);
        let v = derivative_vector(&m, DEFAULT_STEP).unwrap();
        assert!((v[0] - c(1.0)).norm() < 1e-9);
        assert!((v[1] - c(-1.0)).norm() < 1e-9);
        let r = riesz_representer(&m, &gns(&m), DEFAULT_STEP).unwrap();
        assert!((r.ell[0] - c(2.0)).norm() < 1e-8);
        assert!((r.ell[1] - c(-2.0)).norm() < 1e-8);
    }

    #[test]
    fn coin_fisher_and_bound() {
        let m = coin(0.0);
        assert!((fisher(&m) - 4.0).abs() < 1e-6);
        assert!((cramer_rao_bound(&m, &gns(&m), DEFAULT_STEP).unwrap() - 0.25).abs() < 1e-8);
        assert!((classical_fisher_rao(&m, DEFAULT_STEP).unwrap() - 4.0).abs() < 1e-6);
        let m = coin(0.25);
        assert!((classical_fisher_rao(&m, DEFAULT_STEP).unwrap() - 16.0 / 3.0).abs() < 1e-5);
        assert!((fisher(&m) - 16.0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn constant_curve_has_no_information() {
        let g = Arc::new(FiniteGroupoid::trivial(2));
        let m = StatisticalModel::classical(g, 0.0, (-1.0, 1.0), |_| vec![0.5, 0.5]).unwrap();
        assert!(derivative_vector(&m, DEFAULT_STEP)
            .unwrap()
            .iter()
            .all(|z| z.norm() == 0.0));
        let s = gns(&m);
        assert!(riesz_representer(&m, &s, DEFAULT_STEP)
            .unwrap()
            .ell
            .iter()
            .all(|z| z.norm() == 0.0));
        assert!(matches!(
            cramer_rao_bound(&m, &s, DEFAULT_STEP),
            Err(EstimationError::ZeroInformation { .. })
        ));
        assert_eq!(classical_fisher_rao(&m, DEFAULT_STEP).unwrap(), 0.0);
    }

    #[test]
    fn qubit_fisher() {
        let m = qubit(0.0);
        let v = derivative_vector(&m, DEFAULT_STEP).unwrap();
        let exact = matrix_to_phi(m.groupoid(), &pauli()[2].scale(c(0.5))).unwrap();
        for (a, (vi, e)) in v.iter().zip(&exact).enumerate() {
            assert!((vi - e * m.groupoid().nu(a)).norm() < 1e-8);
        }
        assert!((fisher(&m) - 1.0).abs() < 1e-6);
        assert!((fisher(&qubit(0.5)) - 4.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn qubit_representer_is_sigma_z() {
        let m = qubit(0.0);
        let s = gns(&m);
        let r = riesz_representer(&m, &s, DEFAULT_STEP).unwrap();
        let ell = AlgebraElement::new(m.groupoid().clone(), r.ell).unwrap();
        let f = crate::algebra::fundamental_rep_pair(&ell).unwrap();
        assert!(f.max_abs_diff(&pauli()[2]) < 1e-8, "{f:?}");
    }

    #[test]
    fn audits() {
        let m = coin(0.0);
        let g = m.groupoid().clone();
        let a =
            Estimator::new(AlgebraElement::new(g.clone(), vec![c(0.5), c(-0.5)]).unwrap()).unwrap();
        let grid = [-0.3, -0.1, 0.0, 0.2, 0.4];
        let r = check_unbiased(&m, &a, &grid, 1e-12).unwrap();
        assert!(r.pass, "{r:?}");
        let audit = cramer_rao_audit(&m, &a, &gns(&m), DEFAULT_STEP).unwrap();
        assert!((audit.second_moment - 0.25).abs() < 1e-12);
        assert!(audit.saturated && audit.unbiased);

        let zero = Estimator::new(AlgebraElement::zero(g)).unwrap();
        let r = check_unbiased(&m, &zero, &grid, 1e-12).unwrap();
        assert_eq!(r.points.iter().filter(|p| p.deviation > 1e-12).count(), 4);

        let q = qubit(0.0);
        let g = q.groupoid().clone();
        let [x, _, z] = pauli();
        let sz = Estimator::new(element(&g, &z)).unwrap();
        assert!(check_unbiased(&q, &sz, &grid, 1e-12).unwrap().pass);
        let s = gns(&q);
        let audit = cramer_rao_audit(&q, &sz, &s, DEFAULT_STEP).unwrap();
        assert!((audit.second_moment - 1.0).abs() < 1e-12 && audit.saturated);
        let zx = Estimator::new(element(&g, &z.add(&x))).unwrap();
        let audit = cramer_rao_audit(&q, &zx, &s, DEFAULT_STEP).unwrap();
        assert!(audit.unbiased);
        assert!((audit.second_moment - 2.0).abs() < 1e-12);
        assert!((audit.slack - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_non_self_adjoint() {
        let g = Arc::new(FiniteGroupoid::pair(2));
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            Estimator::new(element(&g, &m)),
            Err(EstimationError::NotSelfAdjoint { .. })
        ));
    }

    #[test]
    fn interval_is_enforced() {
        let g = Arc::new(FiniteGroupoid::trivial(2));
        let m =
            StatisticalModel::classical(g, 0.0, (0.0, 0.4), |s| vec![0.5 + s, 0.5 - s]).unwrap();
        assert!(matches!(
            derivative_vector(&m, DEFAULT_STEP),
            Err(EstimationError::IntervalExceeded { .. })
        ));
    }

    #[test]
    fn pure_rotation_leaves_folium() {
        let g = Arc::new(FiniteGroupoid::pair(2));
        let m = StatisticalModel::from_density_curve(g, 0.0, (-1.0, 1.0), |s| {
            let (co, si) = (s.cos(), s.sin());
            ComplexMatrix::from_real_rows(&[vec![co * co, co * si], vec![co * si, si * si]])
                .unwrap()
        })
        .unwrap();
        assert!(matches!(
            riesz_representer(&m, &gns(&m), DEFAULT_STEP),
            Err(EstimationError::FoliumViolation { .. })
        ));
    }

    #[test]
    fn support_boundary() {
        let g = Arc::new(FiniteGroupoid::trivial(2));
        let m =
            StatisticalModel::classical(g, 0.0, (-1.0, 1.0), |s| vec![1.0 - s * s, s * s]).unwrap();
        assert!(matches!(
            classical_fisher_rao(&m, DEFAULT_STEP),
            Err(EstimationError::SupportBoundary { .. })
        ));
    }

    #[test]
    fn congruent_embeddings() {
        let m = coin(0.1);
        let perm = ClassicalKernel::new(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let r = congruent_invariance(&m, &perm, &perm, DEFAULT_STEP).unwrap();
        assert!(r.deviation <= 1e-9);

        let split =
            ClassicalKernel::new(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0 / 3.0, 2.0 / 3.0]]).unwrap();
        let merge =
            ClassicalKernel::new(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let r = congruent_invariance(&m, &split, &merge, DEFAULT_STEP).unwrap();
        assert!(r.deviation <= 1e-6, "{r:?}");
        // closed form for the split coin: 1/p + 1/(1-p) with p = 0.6
        let exact = 1.0 / 0.6 + 1.0 / 0.4;
        assert!((r.fisher_after - exact).abs() < 1e-6);

        let collapse = ClassicalKernel::new(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            congruent_invariance(&m, &collapse, &collapse, DEFAULT_STEP),
            Err(EstimationError::NotCongruent { .. })
        ));
    }

    #[test]
    fn reparametrization_scales_fisher() {
        let m = qubit(0.3);
        let m2 = m.reparametrized(0.5).unwrap();
        assert!((fisher(&m2) - 0.25 * fisher(&m)).abs() < 1e-6);
        let m2 = m.reparametrized(2.0).unwrap();
        assert!((fisher(&m2) - 4.0 * fisher(&m)).abs() < 1e-6);
    }

    #[test]
    fn spline_reproduces_cubics() {
        // natural spline is exact for linear data and interpolates knots
        let xs = [0.0, 0.5, 1.5, 2.0];
        let lin = NaturalSpline::new(&xs, &xs.map(|x| 3.0 * x - 1.0));
        for x in [0.1, 0.7, 1.9] {
            assert!((lin.eval(x) - (3.0 * x - 1.0)).abs() < 1e-14);
        }
        let ys = [1.0, -2.0, 0.5, 4.0];
        let s = NaturalSpline::new(&xs, &ys);
        for (x, y) in xs.iter().zip(ys) {
            assert!((s.eval(*x) - y).abs() < 1e-14);
        }
        assert_eq!(NaturalSpline::new(&[1.0], &[7.0]).eval(3.0), 7.0);
    }

    #[test]
    fn interpolated_coin_matches_direct() {
        let g = Arc::new(FiniteGroupoid::trivial(2));
        let direct = coin(0.0);
        let knots = [-0.4, -0.1, 0.2, 0.4]
            .iter()
            .map(|&s| (s, direct.state_at(s).unwrap()))
            .collect();
        let m = StatisticalModel::interpolated(g, 0.0, (-0.4, 0.4), knots).unwrap();
        assert!((fisher(&m) - 4.0).abs() < 1e-6);
    }
}
