//! Finite groupoids with outcome measure, counting Haar system and modular function.
//!
//! Elements and outcomes are addressed by their position in canonical (file)
//! order. Composition follows the backwards convention: `compose(β, α)` is
//! `β ∘ α`, "first α, then β", defined exactly when `t(α) = s(β)`.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

const MEASURE_TOL: f64 = 1e-9;
const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroupoidError {
    #[error("groupoid has no outcomes")]
    Empty,
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("invalid id {0:?}: ids must be non-empty and must not contain '|'")]
    InvalidId(String),
    #[error("table {table} references undeclared id {id:?}")]
    UnknownId { table: &'static str, id: String },
    #[error("table {table} has no entry for {id:?}")]
    MissingEntry { table: &'static str, id: String },
    #[error("compose table lists ({beta}, {alpha}) more than once")]
    DuplicateCompose { beta: String, alpha: String },
    #[error("bad outcome measure: {0}")]
    BadMeasure(String),
    #[error("composition of {beta} after {alpha} is incoherent: {reason}")]
    CoherenceViolation {
        beta: String,
        alpha: String,
        reason: String,
    },
    #[error("unit law fails at {alpha}")]
    UnitViolation { alpha: String },
    #[error("inverse law fails at {alpha}")]
    InverseViolation { alpha: String },
    #[error("associativity fails for ({gamma} ∘ {beta}) ∘ {alpha}")]
    AssociativityViolation {
        gamma: String,
        beta: String,
        alpha: String,
    },
    #[error("fiber weights are not left invariant: weight({alpha} ∘ {beta}) != weight({beta})")]
    NotLeftInvariant { alpha: String, beta: String },
    #[error("modular function is not a homomorphism at ({beta}, {alpha})")]
    HomomorphismViolation { beta: String, alpha: String },
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("mixing weight {0} is not in (0, 1)")]
    BadWeight(f64),
    #[error("unknown outcome {0:?}")]
    UnknownOutcome(String),
}

/// Raw groupoid tables as they appear in a groupoid file, before validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupoidSpec {
    pub outcomes: Vec<String>,
    pub elements: Vec<String>,
    pub source: BTreeMap<String, String>,
    pub target: BTreeMap<String, String>,
    pub inverse: BTreeMap<String, String>,
    /// `[beta, alpha, beta ∘ alpha]`; absent pairs are undefined.
    pub compose: Vec<(String, String, String)>,
    pub units: BTreeMap<String, String>,
    #[serde(rename = "P")]
    pub p: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_weight: Option<BTreeMap<String, f64>>,
}

/// A validated finite groupoid with its measure data.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroupoid {
    elements: Vec<String>,
    outcomes: Vec<String>,
    source: Vec<usize>,
    target: Vec<usize>,
    inverse: Vec<usize>,
    units: Vec<usize>,
    compose: Vec<Option<usize>>,
    p: Vec<f64>,
    fiber_weight: Vec<f64>,
    nu: Vec<f64>,
    delta: Vec<f64>,
    fibers: Vec<Vec<usize>>,
    element_index: HashMap<String, usize>,
    outcome_index: HashMap<String, usize>,
}

fn index_ids(ids: &[String]) -> Result<HashMap<String, usize>, GroupoidError> {
    let mut map = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if id.is_empty() || id.contains('|') {
            return Err(GroupoidError::InvalidId(id.clone()));
        }
        if map.insert(id.clone(), i).is_some() {
            return Err(GroupoidError::DuplicateId(id.clone()));
        }
    }
    Ok(map)
}

fn lookup(
    map: &HashMap<String, usize>,
    table: &'static str,
    id: &str,
) -> Result<usize, GroupoidError> {
    map.get(id)
        .copied()
        .ok_or_else(|| GroupoidError::UnknownId {
            table,
            id: id.to_string(),
        })
}

/// Resolves a keyed table into a dense vector indexed by `keys`.
fn dense_table<V: Clone>(
    table: &'static str,
    raw: &BTreeMap<String, V>,
    keys: &[String],
    key_index: &HashMap<String, usize>,
) -> Result<Vec<V>, GroupoidError> {
    for k in raw.keys() {
        lookup(key_index, table, k)?;
    }
    keys.iter()
        .map(|k| {
            raw.get(k)
                .cloned()
                .ok_or_else(|| GroupoidError::MissingEntry {
                    table,
                    id: k.clone(),
                })
        })
        .collect()
}

/// Checks the groupoid axioms and derives the measure data.
pub fn validate(spec: &GroupoidSpec) -> Result<FiniteGroupoid, GroupoidError> {
    if spec.outcomes.is_empty() {
        return Err(GroupoidError::Empty);
    }
    let outcome_index = index_ids(&spec.outcomes)?;
    let element_index = index_ids(&spec.elements)?;
    let n = spec.elements.len();

    let resolve_elems = |table: &'static str,
                         raw: &BTreeMap<String, String>,
                         targets: &HashMap<String, usize>,
                         keys: &[String],
                         key_index: &HashMap<String, usize>|
     -> Result<Vec<usize>, GroupoidError> {
        dense_table(table, raw, keys, key_index)?
            .iter()
            .map(|v| lookup(targets, table, v))
            .collect()
    };
    let source = resolve_elems(
        "source",
        &spec.source,
        &outcome_index,
        &spec.elements,
        &element_index,
    )?;
    let target = resolve_elems(
        "target",
        &spec.target,
        &outcome_index,
        &spec.elements,
        &element_index,
    )?;
    let inverse = resolve_elems(
        "inverse",
        &spec.inverse,
        &element_index,
        &spec.elements,
        &element_index,
    )?;
    let units = resolve_elems(
        "units",
        &spec.units,
        &element_index,
        &spec.outcomes,
        &outcome_index,
    )?;

    let mut compose: Vec<Option<usize>> = vec![None; n * n];
    for (b, a, r) in &spec.compose {
        let bi = lookup(&element_index, "compose", b)?;
        let ai = lookup(&element_index, "compose", a)?;
        let ri = lookup(&element_index, "compose", r)?;
        if compose[bi * n + ai].is_some() {
            return Err(GroupoidError::DuplicateCompose {
                beta: b.clone(),
                alpha: a.clone(),
            });
        }
        compose[bi * n + ai] = Some(ri);
    }

    // measure
    let p = dense_table("P", &spec.p, &spec.outcomes, &outcome_index)?;
    if let Some(bad) = p.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(GroupoidError::BadMeasure(format!(
            "outcome probability {bad} is not strictly positive"
        )));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > MEASURE_TOL {
        return Err(GroupoidError::BadMeasure(format!(
            "outcome probabilities sum to {total}"
        )));
    }
    let fiber_weight = match &spec.fiber_weight {
        Some(raw) => dense_table("fiber_weight", raw, &spec.elements, &element_index)?,
        None => vec![1.0; n],
    };
    if let Some(bad) = fiber_weight.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(GroupoidError::BadMeasure(format!(
            "fiber weight {bad} is not strictly positive"
        )));
    }

    let g = FiniteGroupoid {
        elements: spec.elements.clone(),
        outcomes: spec.outcomes.clone(),
        source,
        target,
        inverse,
        units,
        compose,
        p,
        fiber_weight,
        nu: Vec::new(),
        delta: Vec::new(),
        fibers: Vec::new(),
        element_index,
        outcome_index,
    };
    g.check_coherence()?;
    g.check_units()?;
    g.check_inverses()?;
    g.check_associativity()?;
    g.check_left_invariance()?;
    g.finish()
}

impl FiniteGroupoid {
    fn id(&self, a: usize) -> String {
        self.elements[a].clone()
    }

    fn check_coherence(&self) -> Result<(), GroupoidError> {
        let n = self.elements.len();
        for b in 0..n {
            for a in 0..n {
                let composable = self.target[a] == self.source[b];
                let incoherent = |reason: &str| GroupoidError::CoherenceViolation {
                    beta: self.id(b),
                    alpha: self.id(a),
                    reason: reason.to_string(),
                };
                match self.compose[b * n + a] {
                    Some(_) if !composable => {
                        return Err(incoherent("defined on a non-composable pair"))
                    }
                    None if composable => return Err(incoherent("undefined on a composable pair")),
                    Some(r) => {
                        if self.source[r] != self.source[a] {
                            return Err(incoherent(
                                "source of the composite differs from s(alpha)",
                            ));
                        }
                        if self.target[r] != self.target[b] {
                            return Err(incoherent("target of the composite differs from t(beta)"));
                        }
                    }
                    None => {}
                }
            }
        }
        Ok(())
    }

    fn check_units(&self) -> Result<(), GroupoidError> {
        for (x, &u) in self.units.iter().enumerate() {
            if self.source[u] != x || self.target[u] != x {
                return Err(GroupoidError::UnitViolation { alpha: self.id(u) });
            }
        }
        for a in 0..self.elements.len() {
            let right = self.compose(a, self.units[self.source[a]]);
            let left = self.compose(self.units[self.target[a]], a);
            if right != Some(a) || left != Some(a) {
                return Err(GroupoidError::UnitViolation { alpha: self.id(a) });
            }
        }
        Ok(())
    }

    fn check_inverses(&self) -> Result<(), GroupoidError> {
        for a in 0..self.elements.len() {
            let i = self.inverse[a];
            let ok = self.compose(i, a) == Some(self.units[self.source[a]])
                && self.compose(a, i) == Some(self.units[self.target[a]]);
            if !ok {
                return Err(GroupoidError::InverseViolation { alpha: self.id(a) });
            }
        }
        Ok(())
    }

    fn check_associativity(&self) -> Result<(), GroupoidError> {
        let n = self.elements.len();
        let mut by_source: Vec<Vec<usize>> = vec![Vec::new(); self.outcomes.len()];
        for a in 0..n {
            by_source[self.source[a]].push(a);
        }
        for a in 0..n {
            for &b in &by_source[self.target[a]] {
                let ba = self.compose(b, a).expect("coherence checked");
                for &c in &by_source[self.target[b]] {
                    let cb = self.compose(c, b).expect("coherence checked");
                    if self.compose(cb, a) != self.compose(c, ba) {
                        return Err(GroupoidError::AssociativityViolation {
                            gamma: self.id(c),
                            beta: self.id(b),
                            alpha: self.id(a),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Left translation by α must carry the weights of `Γ^{s(α)}` onto those of `Γ^{t(α)}`.
    fn check_left_invariance(&self) -> Result<(), GroupoidError> {
        let n = self.elements.len();
        for a in 0..n {
            for b in 0..n {
                if self.target[b] != self.source[a] {
                    continue;
                }
                let ab = self.compose(a, b).expect("coherence checked");
                let (w1, w2) = (self.fiber_weight[ab], self.fiber_weight[b]);
                if (w1 - w2).abs() > WEIGHT_TOL * w1.max(w2) {
                    return Err(GroupoidError::NotLeftInvariant {
                        alpha: self.id(a),
                        beta: self.id(b),
                    });
                }
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<Self, GroupoidError> {
        let n = self.elements.len();
        self.nu = (0..n)
            .map(|a| self.fiber_weight[a] * self.p[self.target[a]])
            .collect();
        self.fibers = vec![Vec::new(); self.outcomes.len()];
        for a in 0..n {
            self.fibers[self.target[a]].push(a);
        }
        self.delta = modular_function(&self)?;
        Ok(self)
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn element_ids(&self) -> &[String] {
        &self.elements
    }

    pub fn outcome_ids(&self) -> &[String] {
        &self.outcomes
    }

    pub fn element_index(&self, id: &str) -> Option<usize> {
        self.element_index.get(id).copied()
    }

    pub fn outcome_index(&self, id: &str) -> Option<usize> {
        self.outcome_index.get(id).copied()
    }

    pub fn source(&self, a: usize) -> usize {
        self.source[a]
    }

    pub fn target(&self, a: usize) -> usize {
        self.target[a]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn unit(&self, x: usize) -> usize {
        self.units[x]
    }

    pub fn units(&self) -> &[usize] {
        &self.units
    }

    pub fn is_unit(&self, a: usize) -> bool {
        self.units[self.source[a]] == a
    }

    /// `β ∘ α` when `t(α) = s(β)`.
    pub fn compose(&self, beta: usize, alpha: usize) -> Option<usize> {
        self.compose[beta * self.elements.len() + alpha]
    }

    /// Outcome probabilities `P`.
    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn fiber_weights(&self) -> &[f64] {
        &self.fiber_weight
    }

    /// Total measure `ν(α) = ν^{t(α)}(α) · P(t(α))`.
    pub fn nu(&self, a: usize) -> f64 {
        self.nu[a]
    }

    pub fn nu_all(&self) -> &[f64] {
        &self.nu
    }

    /// Modular function `δ(α) = ν(α⁻¹) / ν(α)`.
    pub fn delta(&self, a: usize) -> f64 {
        self.delta[a]
    }

    pub fn delta_all(&self) -> &[f64] {
        &self.delta
    }

    /// True when δ ≡ 1, i.e. P is constant along every orbit (for counting weights).
    pub fn is_unimodular(&self) -> bool {
        self.delta.iter().all(|d| (d - 1.0).abs() <= 1e-12)
    }

    /// Target fiber `Γ^x = t⁻¹(x)` in canonical order.
    pub fn target_fiber(&self, x: usize) -> &[usize] {
        &self.fibers[x]
    }

    pub fn target_fiber_by_id(&self, x: &str) -> Result<&[usize], GroupoidError> {
        let xi = self
            .outcome_index(x)
            .ok_or_else(|| GroupoidError::UnknownOutcome(x.to_string()))?;
        Ok(self.target_fiber(xi))
    }

    /// For a pair groupoid over n outcomes: table `idx[y * n + x]` of the unique
    /// element `x → y`. `None` if some ordered pair has zero or several transitions.
    pub fn pair_table(&self) -> Option<Vec<usize>> {
        let m = self.outcomes.len();
        if self.elements.len() != m * m {
            return None;
        }
        let mut table = vec![usize::MAX; m * m];
        for a in 0..self.elements.len() {
            let slot = &mut table[self.target[a] * m + self.source[a]];
            if *slot != usize::MAX {
                return None;
            }
            *slot = a;
        }
        Some(table)
    }

    /// Raw tables describing this groupoid; `validate(&g.to_spec())` reproduces `g`.
    pub fn to_spec(&self) -> GroupoidSpec {
        let n = self.elements.len();
        let e = |a: usize| self.elements[a].clone();
        let o = |x: usize| self.outcomes[x].clone();
        let mut compose = Vec::new();
        for b in 0..n {
            for a in 0..n {
                if let Some(r) = self.compose(b, a) {
                    compose.push((e(b), e(a), e(r)));
                }
            }
        }
        let counting = self.fiber_weight.iter().all(|&w| w == 1.0);
        GroupoidSpec {
            outcomes: self.outcomes.clone(),
            elements: self.elements.clone(),
            source: (0..n).map(|a| (e(a), o(self.source[a]))).collect(),
            target: (0..n).map(|a| (e(a), o(self.target[a]))).collect(),
            inverse: (0..n).map(|a| (e(a), e(self.inverse[a]))).collect(),
            compose,
            units: (0..self.outcomes.len())
                .map(|x| (o(x), e(self.units[x])))
                .collect(),
            p: (0..self.outcomes.len())
                .map(|x| (o(x), self.p[x]))
                .collect(),
            fiber_weight: if counting {
                None
            } else {
                Some((0..n).map(|a| (e(a), self.fiber_weight[a])).collect())
            },
        }
    }

    /// Uniform-P pair groupoid on `n` outcomes.
    pub fn pair(n: usize) -> Self {
        construct_standard(&StandardKind::Pair(n), &vec![1.0 / n as f64; n])
            .expect("uniform pair groupoid is valid")
    }

    /// Uniform-P trivial groupoid on `n` outcomes.
    pub fn trivial(n: usize) -> Self {
        construct_standard(&StandardKind::Trivial(n), &vec![1.0 / n as f64; n])
            .expect("uniform trivial groupoid is valid")
    }

    /// Cyclic group ℤ_n as a one-outcome groupoid.
    pub fn cyclic(n: usize) -> Self {
        construct_standard(&StandardKind::Group(GroupTable::cyclic(n)), &[1.0])
            .expect("cyclic group table is valid")
    }
}

/// Modular function `δ(α) = ν(α⁻¹)/ν(α)`, checked to be a groupoid homomorphism.
pub fn modular_function(g: &FiniteGroupoid) -> Result<Vec<f64>, GroupoidError> {
    let n = g.num_elements();
    let nu: Vec<f64> = (0..n)
        .map(|a| g.fiber_weight[a] * g.p[g.target[a]])
        .collect();
    let delta: Vec<f64> = (0..n).map(|a| nu[g.inverse[a]] / nu[a]).collect();
    for b in 0..n {
        for a in 0..n {
            if let Some(r) = g.compose(b, a) {
                let lhs = delta[r];
                let rhs = delta[b] * delta[a];
                if (lhs - rhs).abs() > 1e-12 * lhs.max(rhs) {
                    return Err(GroupoidError::HomomorphismViolation {
                        beta: g.id(b),
                        alpha: g.id(a),
                    });
                }
            }
        }
    }
    for &u in &g.units {
        if (delta[u] - 1.0).abs() > 1e-12 {
            return Err(GroupoidError::HomomorphismViolation {
                beta: g.id(u),
                alpha: g.id(u),
            });
        }
    }
    Ok(delta)
}

/// Multiplication table of a finite group: `table[i][j]` is the index of `g_i g_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupTable {
    pub labels: Vec<String>,
    pub table: Vec<Vec<usize>>,
}

impl GroupTable {
    pub fn cyclic(n: usize) -> Self {
        Self {
            labels: (0..n).map(|k| format!("g{k}")).collect(),
            table: (0..n)
                .map(|i| (0..n).map(|j| (i + j) % n).collect())
                .collect(),
        }
    }

    fn identity_and_inverses(&self) -> Result<(usize, Vec<usize>), GroupoidError> {
        let n = self.labels.len();
        if n == 0 {
            return Err(GroupoidError::NotAGroup("empty table".into()));
        }
        if self.table.len() != n || self.table.iter().any(|r| r.len() != n) {
            return Err(GroupoidError::NotAGroup("table is not square".into()));
        }
        if self.table.iter().flatten().any(|&k| k >= n) {
            return Err(GroupoidError::NotAGroup("entry out of range".into()));
        }
        let t = &self.table;
        let e = (0..n)
            .find(|&e| (0..n).all(|g| t[e][g] == g && t[g][e] == g))
            .ok_or_else(|| GroupoidError::NotAGroup("no identity".into()))?;
        let inv = (0..n)
            .map(|g| {
                (0..n)
                    .find(|&h| t[g][h] == e && t[h][g] == e)
                    .ok_or_else(|| {
                        GroupoidError::NotAGroup(format!("{} has no inverse", self.labels[g]))
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if t[t[a][b]][c] != t[a][t[b][c]] {
                        return Err(GroupoidError::NotAGroup("not associative".into()));
                    }
                }
            }
        }
        Ok((e, inv))
    }
}

/// Standard groupoid families.
#[derive(Debug, Clone, PartialEq)]
pub enum StandardKind {
    /// All ordered pairs over n outcomes; `(y,x)` is the transition `x → y`.
    Pair(usize),
    /// Units only; the classical case.
    Trivial(usize),
    /// A group viewed as a one-outcome groupoid.
    Group(GroupTable),
}

fn outcome_names(n: usize) -> Vec<String> {
    (1..=n).map(|k| k.to_string()).collect()
}

fn prob_table(outcomes: &[String], p: &[f64]) -> Result<BTreeMap<String, f64>, GroupoidError> {
    if p.len() != outcomes.len() {
        return Err(GroupoidError::BadMeasure(format!(
            "expected {} probabilities, got {}",
            outcomes.len(),
            p.len()
        )));
    }
    Ok(outcomes.iter().cloned().zip(p.iter().copied()).collect())
}

pub fn pair_element_id(y: usize, x: usize) -> String {
    format!("({},{})", y + 1, x + 1)
}

pub fn construct_standard(kind: &StandardKind, p: &[f64]) -> Result<FiniteGroupoid, GroupoidError> {
    let spec = match kind {
        StandardKind::Pair(n) => {
            let n = *n;
            if n == 0 {
                return Err(GroupoidError::Empty);
            }
            let outcomes = outcome_names(n);
            let mut spec = GroupoidSpec {
                p: prob_table(&outcomes, p)?,
                outcomes: outcomes.clone(),
                ..Default::default()
            };
            for y in 0..n {
                for x in 0..n {
                    let id = pair_element_id(y, x);
                    spec.elements.push(id.clone());
                    spec.source.insert(id.clone(), outcomes[x].clone());
                    spec.target.insert(id.clone(), outcomes[y].clone());
                    spec.inverse.insert(id, pair_element_id(x, y));
                }
                spec.units
                    .insert(outcomes[y].clone(), pair_element_id(y, y));
            }
            for z in 0..n {
                for y in 0..n {
                    for x in 0..n {
                        spec.compose.push((
                            pair_element_id(z, y),
                            pair_element_id(y, x),
                            pair_element_id(z, x),
                        ));
                    }
                }
            }
            spec
        }
        StandardKind::Trivial(n) => {
            let n = *n;
            if n == 0 {
                return Err(GroupoidError::Empty);
            }
            let outcomes = outcome_names(n);
            let mut spec = GroupoidSpec {
                p: prob_table(&outcomes, p)?,
                outcomes: outcomes.clone(),
                ..Default::default()
            };
            for x in &outcomes {
                let id = format!("1_{x}");
                spec.elements.push(id.clone());
                spec.source.insert(id.clone(), x.clone());
                spec.target.insert(id.clone(), x.clone());
                spec.inverse.insert(id.clone(), id.clone());
                spec.units.insert(x.clone(), id.clone());
                spec.compose.push((id.clone(), id.clone(), id));
            }
            spec
        }
        StandardKind::Group(table) => {
            let (e, inv) = table.identity_and_inverses()?;
            let outcomes = vec!["*".to_string()];
            let l = &table.labels;
            let mut spec = GroupoidSpec {
                p: prob_table(&outcomes, p)?,
                outcomes: outcomes.clone(),
                elements: l.clone(),
                ..Default::default()
            };
            for (g, label) in l.iter().enumerate() {
                spec.source.insert(label.clone(), "*".into());
                spec.target.insert(label.clone(), "*".into());
                spec.inverse.insert(label.clone(), l[inv[g]].clone());
                for (h, other) in l.iter().enumerate() {
                    spec.compose
                        .push((label.clone(), other.clone(), l[table.table[g][h]].clone()));
                }
            }
            spec.units.insert("*".into(), l[e].clone());
            spec
        }
    };
    validate(&spec)
}

/// Disjoint union with `P = (w·P₁, (1−w)·P₂)`. Ids are prefixed `L:` and `R:`.
pub fn disjoint_union(
    g1: &FiniteGroupoid,
    g2: &FiniteGroupoid,
    w: f64,
) -> Result<FiniteGroupoid, GroupoidError> {
    if !(w > 0.0 && w < 1.0) {
        return Err(GroupoidError::BadWeight(w));
    }
    let mut spec = GroupoidSpec::default();
    let mut weights = BTreeMap::new();
    for (g, prefix, scale) in [(g1, "L:", w), (g2, "R:", 1.0 - w)] {
        let s = g.to_spec();
        let pe = |id: &String| format!("{prefix}{id}");
        spec.outcomes.extend(s.outcomes.iter().map(pe));
        spec.elements.extend(s.elements.iter().map(pe));
        spec.source
            .extend(s.source.iter().map(|(k, v)| (pe(k), pe(v))));
        spec.target
            .extend(s.target.iter().map(|(k, v)| (pe(k), pe(v))));
        spec.inverse
            .extend(s.inverse.iter().map(|(k, v)| (pe(k), pe(v))));
        spec.units
            .extend(s.units.iter().map(|(k, v)| (pe(k), pe(v))));
        spec.compose
            .extend(s.compose.iter().map(|(b, a, r)| (pe(b), pe(a), pe(r))));
        spec.p.extend(s.p.iter().map(|(k, v)| (pe(k), v * scale)));
        for (a, id) in s.elements.iter().enumerate() {
            weights.insert(pe(id), g.fiber_weights()[a]);
        }
    }
    if weights.values().any(|&w| w != 1.0) {
        spec.fiber_weight = Some(weights);
    }
    validate(&spec)
}

fn pair_id(a: &str, b: &str) -> String {
    format!("[{a};{b}]")
}

/// Cartesian product groupoid with `P = P₁ ⊗ P₂`; element `(α₁, α₂)` has id `[α₁;α₂]`.
pub fn product(g1: &FiniteGroupoid, g2: &FiniteGroupoid) -> Result<FiniteGroupoid, GroupoidError> {
    let (n1, n2) = (g1.num_elements(), g2.num_elements());
    let (m1, m2) = (g1.num_outcomes(), g2.num_outcomes());
    let e = |a: usize, b: usize| pair_id(&g1.elements[a], &g2.elements[b]);
    let o = |x: usize, y: usize| pair_id(&g1.outcomes[x], &g2.outcomes[y]);
    let mut spec = GroupoidSpec::default();
    for x in 0..m1 {
        for y in 0..m2 {
            spec.outcomes.push(o(x, y));
            spec.units.insert(o(x, y), e(g1.unit(x), g2.unit(y)));
            spec.p.insert(o(x, y), g1.p[x] * g2.p[y]);
        }
    }
    let mut weights = BTreeMap::new();
    for a in 0..n1 {
        for b in 0..n2 {
            let id = e(a, b);
            spec.elements.push(id.clone());
            spec.source
                .insert(id.clone(), o(g1.source(a), g2.source(b)));
            spec.target
                .insert(id.clone(), o(g1.target(a), g2.target(b)));
            spec.inverse
                .insert(id.clone(), e(g1.inverse(a), g2.inverse(b)));
            weights.insert(id, g1.fiber_weight[a] * g2.fiber_weight[b]);
        }
    }
    for b1 in 0..n1 {
        for a1 in 0..n1 {
            let Some(r1) = g1.compose(b1, a1) else {
                continue;
            };
            for b2 in 0..n2 {
                for a2 in 0..n2 {
                    if let Some(r2) = g2.compose(b2, a2) {
                        spec.compose.push((e(b1, b2), e(a1, a2), e(r1, r2)));
                    }
                }
            }
        }
    }
    if weights.values().any(|&w| w != 1.0) {
        spec.fiber_weight = Some(weights);
    }
    validate(&spec)
}

/// Left translation `β ↦ α ∘ β` from `Γ^{s(α)}` to `Γ^{t(α)}`; returns the image list.
pub fn left_translation(g: &FiniteGroupoid, alpha: usize) -> Vec<usize> {
    g.target_fiber(g.source(alpha))
        .iter()
        .map(|&b| g.compose(alpha, b).expect("composable by construction"))
        .collect()
}

/// True when `left_translation(g, α)` is a bijection onto `Γ^{t(α)}`.
pub fn left_translation_is_bijective(g: &FiniteGroupoid, alpha: usize) -> bool {
    let image = left_translation(g, alpha);
    let fiber: HashSet<usize> = g.target_fiber(g.target(alpha)).iter().copied().collect();
    let distinct: HashSet<usize> = image.iter().copied().collect();
    distinct.len() == image.len() && distinct == fiber
}
