//! JSON file formats.
//!
//! Every document carries `"fmt": "cencov-ncp/1"`. Files that need a groupoid
//! name it by reference: either a built-in id (`pair:N`, `trivial:N`,
//! `cyclic:N`, all with uniform P) or a path relative to the referencing file.
//! The `parse_*` functions take document text and never touch the filesystem
//! unless the [`Resolver`] allows it.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::algebra::{same_groupoid, AlgebraElement, AlgebraError};
use crate::channels::{
    choi_to_kernel_with_tol, embed_classical, ChannelError, ClassicalKernel, QuantumKernel,
};
use crate::estimation::{EstimationError, StatisticalModel};
use crate::groupoid::{validate, FiniteGroupoid, GroupoidError, GroupoidSpec};
use crate::numkit::ComplexMatrix;
use crate::states::{State, StateError};

pub const FORMAT_TAG: &str = "cencov-ncp/1";

const MAX_PAIR: usize = 8;
const MAX_TRIVIAL: usize = 64;
const MAX_CYCLIC: usize = 64;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("unsupported format tag {}, expected \"{FORMAT_TAG}\"", found.as_deref().unwrap_or("(missing)"))]
    Format { found: Option<String> },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("cannot resolve groupoid reference {0:?}")]
    Reference(String),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
}

fn schema(msg: impl Into<String>) -> IoError {
    IoError::Schema(msg.into())
}

/// Parses JSON text and checks the format tag.
pub fn parse_document(text: &str) -> Result<Value, IoError> {
    let v: Value = serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))?;
    let obj = v
        .as_object()
        .ok_or_else(|| schema("top level must be an object"))?;
    match obj.get("fmt") {
        Some(Value::String(s)) if s == FORMAT_TAG => Ok(v),
        Some(Value::String(s)) => Err(IoError::Format {
            found: Some(s.clone()),
        }),
        Some(other) => Err(IoError::Format {
            found: Some(other.to_string()),
        }),
        None => Err(IoError::Format { found: None }),
    }
}

fn from_value<T: DeserializeOwned>(v: Value) -> Result<T, IoError> {
    serde_json::from_value(v).map_err(|e| schema(e.to_string()))
}

/// Kinds of document, told apart by their keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Groupoid,
    Element,
    State,
    Kernel,
    ClassicalKernel,
    Kraus,
    Model,
    Pipeline,
}

impl FileKind {
    pub fn name(self) -> &'static str {
        match self {
            FileKind::Groupoid => "groupoid",
            FileKind::Element => "element",
            FileKind::State => "state",
            FileKind::Kernel => "kernel",
            FileKind::ClassicalKernel => "classical_kernel",
            FileKind::Kraus => "kraus",
            FileKind::Model => "model",
            FileKind::Pipeline => "pipeline",
        }
    }
}

pub fn detect_kind(doc: &Value) -> Result<FileKind, IoError> {
    let obj = doc
        .as_object()
        .ok_or_else(|| schema("top level must be an object"))?;
    let has = |k: &str| obj.contains_key(k);
    let kind = if has("elements") && has("compose") {
        FileKind::Groupoid
    } else if has("pi_re") || has("pi_im") || has("source_groupoid") {
        FileKind::Kernel
    } else if has("phi_re") || has("phi_im") {
        FileKind::State
    } else if has("coeff_re") || has("coeff_im") {
        FileKind::Element
    } else if has("K") {
        FileKind::ClassicalKernel
    } else if has("kraus") {
        FileKind::Kraus
    } else if has("states") && has("s0") {
        FileKind::Model
    } else if has("kernels") && has("initial_state") {
        FileKind::Pipeline
    } else {
        return Err(schema("cannot determine the document type from its keys"));
    };
    Ok(kind)
}

/// A groupoid reference as written in a file, with the directory it is relative to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupoidRef {
    pub reference: String,
    pub base: Option<PathBuf>,
}

impl GroupoidRef {
    pub fn builtin(id: &str) -> Self {
        Self {
            reference: id.to_string(),
            base: None,
        }
    }

    pub fn is_builtin(&self) -> bool {
        parse_builtin(&self.reference).is_some()
    }

    /// Reference to write into a file stored in `out_dir`: unchanged for
    /// built-ins and when `out_dir` is the original base, absolute otherwise.
    pub fn for_output(&self, out_dir: &Path) -> String {
        if self.is_builtin() {
            return self.reference.clone();
        }
        let base = self.base.clone().unwrap_or_default();
        if same_dir(&base, out_dir) || Path::new(&self.reference).is_absolute() {
            return self.reference.clone();
        }
        let joined = base.join(&self.reference);
        std::fs::canonicalize(&joined)
            .unwrap_or(joined)
            .to_string_lossy()
            .into_owned()
    }
}

fn same_dir(a: &Path, b: &Path) -> bool {
    let norm = |p: &Path| {
        let p = if p.as_os_str().is_empty() {
            Path::new(".")
        } else {
            p
        };
        std::fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf())
    };
    norm(a) == norm(b)
}

fn parse_builtin(reference: &str) -> Option<(&str, usize)> {
    let (kind, n) = reference.split_once(':')?;
    let n: usize = n.parse().ok()?;
    matches!(kind, "pair" | "trivial" | "cyclic").then_some((kind, n))
}

/// Resolves groupoid references and reads referenced files, with a cache so that
/// repeated references share one groupoid.
#[derive(Debug, Default)]
pub struct Resolver {
    allow_files: bool,
    cache: HashMap<String, Arc<FiniteGroupoid>>,
}

impl Resolver {
    /// Only built-in groupoid ids; any file access is an error.
    pub fn builtin_only() -> Self {
        Self::default()
    }

    pub fn with_files() -> Self {
        Self {
            allow_files: true,
            cache: HashMap::new(),
        }
    }

    pub fn read(&self, path: &Path) -> Result<String, IoError> {
        if !self.allow_files {
            return Err(IoError::Reference(path.to_string_lossy().into_owned()));
        }
        std::fs::read_to_string(path).map_err(|source| IoError::Read {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn groupoid(&mut self, r: &GroupoidRef) -> Result<Arc<FiniteGroupoid>, IoError> {
        if let Some((kind, n)) = parse_builtin(&r.reference) {
            return self.builtin(&r.reference, kind, n);
        }
        let path = resolve_path(r.base.as_deref(), &r.reference);
        let key = std::fs::canonicalize(&path)
            .unwrap_or_else(|_| path.clone())
            .to_string_lossy()
            .into_owned();
        if let Some(g) = self.cache.get(&key) {
            return Ok(g.clone());
        }
        let text = self.read(&path)?;
        let g = Arc::new(parse_groupoid(&text)?);
        self.cache.insert(key, g.clone());
        Ok(g)
    }

    fn builtin(&mut self, id: &str, kind: &str, n: usize) -> Result<Arc<FiniteGroupoid>, IoError> {
        if let Some(g) = self.cache.get(id) {
            return Ok(g.clone());
        }
        let cap = match kind {
            "pair" => MAX_PAIR,
            "trivial" => MAX_TRIVIAL,
            _ => MAX_CYCLIC,
        };
        if n == 0 || n > cap {
            return Err(IoError::Reference(format!("{id} (size must be 1..={cap})")));
        }
        let g = Arc::new(match kind {
            "pair" => FiniteGroupoid::pair(n),
            "trivial" => FiniteGroupoid::trivial(n),
            _ => FiniteGroupoid::cyclic(n),
        });
        self.cache.insert(id.to_string(), g.clone());
        Ok(g)
    }
}

fn resolve_path(base: Option<&Path>, reference: &str) -> PathBuf {
    let p = Path::new(reference);
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    }
}

/// Directory of a file path, usable as a reference base.
pub fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn parse_groupoid_spec(text: &str) -> Result<GroupoidSpec, IoError> {
    from_value(parse_document(text)?)
}

pub fn parse_groupoid(text: &str) -> Result<FiniteGroupoid, IoError> {
    Ok(validate(&parse_groupoid_spec(text)?)?)
}

fn complex_table(
    g: &FiniteGroupoid,
    re: &BTreeMap<String, f64>,
    im: &BTreeMap<String, f64>,
) -> Result<Vec<Complex64>, IoError> {
    let mut out = vec![Complex64::new(0.0, 0.0); g.num_elements()];
    for (part, table) in [(0, re), (1, im)] {
        for (id, v) in table {
            let a = g
                .element_index(id)
                .ok_or_else(|| schema(format!("unknown element id {id:?}")))?;
            if part == 0 {
                out[a].re = *v;
            } else {
                out[a].im = *v;
            }
        }
    }
    Ok(out)
}

#[derive(Deserialize)]
struct ElementDoc {
    groupoid: String,
    #[serde(default)]
    coeff_re: BTreeMap<String, f64>,
    #[serde(default)]
    coeff_im: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct ElementFile {
    pub element: AlgebraElement,
    pub groupoid_ref: GroupoidRef,
}

pub fn parse_element(
    text: &str,
    base: Option<&Path>,
    resolver: &mut Resolver,
) -> Result<ElementFile, IoError> {
    let doc: ElementDoc = from_value(parse_document(text)?)?;
    let groupoid_ref = GroupoidRef {
        reference: doc.groupoid,
        base: base.map(Path::to_path_buf),
    };
    let g = resolver.groupoid(&groupoid_ref)?;
    let coeff = complex_table(&g, &doc.coeff_re, &doc.coeff_im)?;
    Ok(ElementFile {
        element: AlgebraElement::new(g, coeff)?,
        groupoid_ref,
    })
}

#[derive(Deserialize)]
struct StateDoc {
    groupoid: String,
    #[serde(default)]
    phi_re: BTreeMap<String, f64>,
    #[serde(default)]
    phi_im: BTreeMap<String, f64>,
}

/// A characteristic function as read from disk, not yet validated as a state.
#[derive(Debug, Clone)]
pub struct StateFile {
    pub groupoid: Arc<FiniteGroupoid>,
    pub groupoid_ref: GroupoidRef,
    pub phi: Vec<Complex64>,
}

impl StateFile {
    pub fn into_state(self, tol: f64) -> Result<State, IoError> {
        Ok(State::new(self.groupoid, self.phi, tol)?)
    }
}

pub fn parse_state(
    text: &str,
    base: Option<&Path>,
    resolver: &mut Resolver,
) -> Result<StateFile, IoError> {
    let doc: StateDoc = from_value(parse_document(text)?)?;
    let groupoid_ref = GroupoidRef {
        reference: doc.groupoid,
        base: base.map(Path::to_path_buf),
    };
    let groupoid = resolver.groupoid(&groupoid_ref)?;
    let phi = complex_table(&groupoid, &doc.phi_re, &doc.phi_im)?;
    Ok(StateFile {
        groupoid,
        groupoid_ref,
        phi,
    })
}

#[derive(Deserialize)]
struct KernelDoc {
    source_groupoid: String,
    target_groupoid: String,
    #[serde(default)]
    pi_re: BTreeMap<String, f64>,
    #[serde(default)]
    pi_im: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[allow(non_snake_case)]
struct ClassicalDoc {
    K: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct MatrixDoc {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

#[derive(Deserialize)]
struct KrausDoc {
    kraus: Vec<MatrixDoc>,
}

/// A quantum kernel with the references of its two groupoids.
#[derive(Debug, Clone)]
pub struct KernelFile {
    pub kernel: QuantumKernel,
    pub source_ref: GroupoidRef,
    pub target_ref: GroupoidRef,
}

pub fn parse_kernel(
    text: &str,
    base: Option<&Path>,
    resolver: &mut Resolver,
) -> Result<KernelFile, IoError> {
    let doc: KernelDoc = from_value(parse_document(text)?)?;
    let mk = |r: String| GroupoidRef {
        reference: r,
        base: base.map(Path::to_path_buf),
    };
    let (source_ref, target_ref) = (mk(doc.source_groupoid), mk(doc.target_groupoid));
    let g1 = resolver.groupoid(&source_ref)?;
    let g2 = resolver.groupoid(&target_ref)?;
    let n2 = g2.num_elements();
    let mut pi = vec![Complex64::new(0.0, 0.0); g1.num_elements() * n2];
    for (part, table) in [(0, &doc.pi_re), (1, &doc.pi_im)] {
        for (key, v) in table {
            let (a1, a2) = key.split_once('|').ok_or_else(|| {
                schema(format!("kernel key {key:?} is not of the form \"a1|a2\""))
            })?;
            let i = g1
                .element_index(a1)
                .ok_or_else(|| schema(format!("unknown source element id {a1:?}")))?;
            let j = g2
                .element_index(a2)
                .ok_or_else(|| schema(format!("unknown target element id {a2:?}")))?;
            if part == 0 {
                pi[i * n2 + j].re = *v;
            } else {
                pi[i * n2 + j].im = *v;
            }
        }
    }
    Ok(KernelFile {
        kernel: QuantumKernel::new(g1, g2, pi)?,
        source_ref,
        target_ref,
    })
}

pub fn parse_classical_kernel(text: &str) -> Result<ClassicalKernel, IoError> {
    let doc: ClassicalDoc = from_value(parse_document(text)?)?;
    Ok(ClassicalKernel::new(&doc.K)?)
}

fn real_matrix(rows: &[Vec<f64>]) -> Result<ComplexMatrix, IoError> {
    ComplexMatrix::from_real_rows(rows).map_err(|e| schema(e.to_string()))
}

pub fn parse_kraus(text: &str) -> Result<Vec<ComplexMatrix>, IoError> {
    let doc: KrausDoc = from_value(parse_document(text)?)?;
    if doc.kraus.is_empty() {
        return Err(schema("\"kraus\" must list at least one operator"));
    }
    doc.kraus
        .iter()
        .map(|m| {
            let re = real_matrix(&m.re)?;
            match &m.im {
                None => Ok(re),
                Some(im) => {
                    let im = real_matrix(im)?;
                    if (im.rows(), im.cols()) != (re.rows(), re.cols()) {
                        return Err(schema("real and imaginary parts differ in shape"));
                    }
                    Ok(re.add(&im.scale(Complex64::new(0.0, 1.0))))
                }
            }
        })
        .collect()
}

/// Reads any kernel-like document: a quantum kernel file, a classical kernel
/// (embedded between `trivial:n` and `trivial:m`) or Kraus operators (between
/// `pair:n` and `pair:m`).
pub fn parse_any_kernel(
    text: &str,
    base: Option<&Path>,
    resolver: &mut Resolver,
    tol: f64,
) -> Result<KernelFile, IoError> {
    match detect_kind(&parse_document(text)?)? {
        FileKind::Kernel => parse_kernel(text, base, resolver),
        FileKind::ClassicalKernel => {
            let k = parse_classical_kernel(text)?;
            let source_ref = GroupoidRef::builtin(&format!("trivial:{}", k.rows()));
            let target_ref = GroupoidRef::builtin(&format!("trivial:{}", k.cols()));
            let kernel = embed_classical(
                &k,
                resolver.groupoid(&source_ref)?,
                resolver.groupoid(&target_ref)?,
            )?;
            Ok(KernelFile {
                kernel,
                source_ref,
                target_ref,
            })
        }
        FileKind::Kraus => {
            let kraus = parse_kraus(text)?;
            let source_ref = GroupoidRef::builtin(&format!("pair:{}", kraus[0].cols()));
            let target_ref = GroupoidRef::builtin(&format!("pair:{}", kraus[0].rows()));
            let kernel = choi_to_kernel_with_tol(
                &kraus,
                resolver.groupoid(&source_ref)?,
                resolver.groupoid(&target_ref)?,
                tol,
            )?;
            Ok(KernelFile {
                kernel,
                source_ref,
                target_ref,
            })
        }
        other => Err(schema(format!(
            "expected a kernel, found a {} document",
            other.name()
        ))),
    }
}

#[derive(Deserialize)]
struct ModelDoc {
    groupoid: String,
    s0: f64,
    interval: [f64; 2],
    #[serde(default)]
    grid: Vec<f64>,
    states: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct ModelFile {
    pub model: StatisticalModel,
    pub groupoid_ref: GroupoidRef,
}

/// Reads a model file and the state files it lists (relative to `base`).
pub fn parse_model(
    text: &str,
    base: Option<&Path>,
    resolver: &mut Resolver,
    tol: f64,
) -> Result<ModelFile, IoError> {
    let doc: ModelDoc = from_value(parse_document(text)?)?;
    let groupoid_ref = GroupoidRef {
        reference: doc.groupoid,
        base: base.map(Path::to_path_buf),
    };
    let g = resolver.groupoid(&groupoid_ref)?;
    let mut knots = Vec::with_capacity(doc.states.len());
    for (key, path) in &doc.states {
        let s: f64 = key
            .trim()
            .parse()
            .map_err(|_| schema(format!("state key {key:?} is not a number")))?;
        let path = resolve_path(base, path);
        let text = resolver.read(&path)?;
        let sf = parse_state(&text, Some(&base_dir(&path)), resolver)?;
        if !same_groupoid(&sf.groupoid, &g) {
            return Err(StateError::GroupoidMismatch.into());
        }
        knots.push((s, sf.into_state(tol)?));
    }
    let model =
        StatisticalModel::interpolated(g, doc.s0, (doc.interval[0], doc.interval[1]), knots)?
            .with_state_tol(tol)
            .with_grid(doc.grid);
    Ok(ModelFile {
        model,
        groupoid_ref,
    })
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct PipelineConfig {
    pub initial_state: String,
    pub kernels: Vec<String>,
}

pub fn parse_pipeline(text: &str) -> Result<PipelineConfig, IoError> {
    from_value(parse_document(text)?)
}

fn with_fmt(mut v: Value) -> Value {
    if let Value::Object(m) = &mut v {
        m.insert("fmt".into(), Value::String(FORMAT_TAG.into()));
    }
    v
}

fn split_table<'a>(
    ids: impl Iterator<Item = (String, &'a Complex64)>,
) -> (Map<String, Value>, Map<String, Value>) {
    let mut re = Map::new();
    let mut im = Map::new();
    for (id, z) in ids {
        if z.re != 0.0 {
            re.insert(id.clone(), json!(z.re));
        }
        if z.im != 0.0 {
            im.insert(id, json!(z.im));
        }
    }
    (re, im)
}

pub fn groupoid_to_json(g: &FiniteGroupoid) -> Value {
    with_fmt(serde_json::to_value(g.to_spec()).expect("groupoid tables serialize"))
}

pub fn element_to_json(a: &AlgebraElement, groupoid_ref: &str) -> Value {
    let ids = a.groupoid().element_ids();
    let (re, im) = split_table(ids.iter().cloned().zip(a.coeff()));
    with_fmt(json!({ "groupoid": groupoid_ref, "coeff_re": re, "coeff_im": im }))
}

pub fn state_to_json(g: &FiniteGroupoid, phi: &[Complex64], groupoid_ref: &str) -> Value {
    let (re, im) = split_table(g.element_ids().iter().cloned().zip(phi));
    with_fmt(json!({ "groupoid": groupoid_ref, "phi_re": re, "phi_im": im }))
}

pub fn kernel_to_json(k: &QuantumKernel, source_ref: &str, target_ref: &str) -> Value {
    let ids1 = k.source().element_ids();
    let ids2 = k.target().element_ids();
    let n2 = ids2.len();
    let keys = k
        .entries()
        .iter()
        .enumerate()
        .map(|(i, z)| (format!("{}|{}", ids1[i / n2], ids2[i % n2]), z));
    let (re, im) = split_table(keys);
    with_fmt(json!({
        "source_groupoid": source_ref,
        "target_groupoid": target_ref,
        "pi_re": re,
        "pi_im": im,
    }))
}

pub fn classical_kernel_to_json(k: &ClassicalKernel) -> Value {
    with_fmt(json!({ "K": k.to_rows() }))
}

pub fn kraus_to_json(kraus: &[ComplexMatrix]) -> Value {
    let part = |m: &ComplexMatrix, f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..m.rows())
            .map(|i| m.row(i).iter().map(f).collect())
            .collect()
    };
    let ops: Vec<Value> = kraus
        .iter()
        .map(|m| json!({ "re": part(m, |z| z.re), "im": part(m, |z| z.im) }))
        .collect();
    with_fmt(json!({ "kraus": ops }))
}

pub fn model_to_json(
    groupoid_ref: &str,
    s0: f64,
    interval: (f64, f64),
    grid: &[f64],
    states: &[(f64, String)],
) -> Value {
    let states: Map<String, Value> = states
        .iter()
        .map(|(s, p)| (format!("{s}"), Value::String(p.clone())))
        .collect();
    with_fmt(json!({
        "groupoid": groupoid_ref,
        "s0": s0,
        "interval": [interval.0, interval.1],
        "grid": grid,
        "states": states,
    }))
}

pub fn pipeline_to_json(cfg: &PipelineConfig) -> Value {
    with_fmt(json!({ "initial_state": cfg.initial_state, "kernels": cfg.kernels }))
}

/// Writes pretty-printed JSON with a trailing newline.
pub fn write_json(path: &Path, v: &Value) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(v).expect("values serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_tag_is_required() {
        assert!(matches!(
            parse_document("{}"),
            Err(IoError::Format { found: None })
        ));
        assert!(matches!(
            parse_document(r#"{"fmt":"cencov-ncp/2"}"#),
            Err(IoError::Format { found: Some(_) })
        ));
        assert!(matches!(parse_document("[1]"), Err(IoError::Schema(_))));
        assert!(matches!(parse_document("{"), Err(IoError::Json(_))));
    }

    #[test]
    fn groupoid_round_trip() {
        let g = FiniteGroupoid::pair(3);
        let text = groupoid_to_json(&g).to_string();
        assert_eq!(parse_groupoid(&text).unwrap(), g);
        assert_eq!(
            detect_kind(&parse_document(&text).unwrap()).unwrap(),
            FileKind::Groupoid
        );
    }

    #[test]
    fn state_with_builtin_groupoid() {
        let text = r#"{"fmt":"cencov-ncp/1","groupoid":"pair:2",
            "phi_re":{"(1,1)":1.0,"(2,2)":1.0}}"#;
        let mut r = Resolver::builtin_only();
        let sf = parse_state(text, None, &mut r).unwrap();
        let st = sf.into_state(1e-9).unwrap();
        assert_eq!(st.groupoid().num_elements(), 4);
    }

    #[test]
    fn builtin_caps_and_file_refs() {
        let mut r = Resolver::builtin_only();
        assert!(r.groupoid(&GroupoidRef::builtin("pair:9")).is_err());
        assert!(r.groupoid(&GroupoidRef::builtin("pair:0")).is_err());
        assert!(r.groupoid(&GroupoidRef::builtin("some/file.json")).is_err());
        let a = r.groupoid(&GroupoidRef::builtin("cyclic:3")).unwrap();
        let b = r.groupoid(&GroupoidRef::builtin("cyclic:3")).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn kernel_keys_round_trip() {
        let g = Arc::new(FiniteGroupoid::pair(2));
        let k = crate::channels::choi_to_kernel(
            &crate::channels::depolarizing_kraus(0.4),
            g.clone(),
            g,
        )
        .unwrap();
        let text = kernel_to_json(&k, "pair:2", "pair:2").to_string();
        let mut r = Resolver::builtin_only();
        let back = parse_kernel(&text, None, &mut r).unwrap();
        assert!(back.kernel.max_abs_diff(&k).unwrap() < 1e-15);
        let bad = text.replace("(1,1)|", "(1,1)-");
        assert!(matches!(
            parse_kernel(&bad, None, &mut r),
            Err(IoError::Schema(_))
        ));
    }

    #[test]
    fn kraus_and_classical_kernels() {
        let text = kraus_to_json(&[ComplexMatrix::identity(2)]).to_string();
        let mut r = Resolver::builtin_only();
        let k = parse_any_kernel(&text, None, &mut r, 1e-9).unwrap();
        assert_eq!(k.source_ref.reference, "pair:2");
        let text = r#"{"fmt":"cencov-ncp/1","K":[[0.5,0.5],[0.0,1.0]]}"#;
        let k = parse_any_kernel(text, None, &mut r, 1e-9).unwrap();
        assert_eq!(k.target_ref.reference, "trivial:2");
        let bad = r#"{"fmt":"cencov-ncp/1","K":[[0.5,0.6]]}"#;
        assert!(matches!(
            parse_classical_kernel(bad),
            Err(IoError::Channel(ChannelError::RowSumViolation { .. }))
        ));
    }

    #[test]
    fn unknown_element_is_schema_error() {
        let text = r#"{"fmt":"cencov-ncp/1","groupoid":"trivial:2","coeff_re":{"nope":1}}"#;
        let mut r = Resolver::builtin_only();
        assert!(matches!(
            parse_element(text, None, &mut r),
            Err(IoError::Schema(_))
        ));
    }

    #[test]
    fn output_refs() {
        let r = GroupoidRef {
            reference: "g.json".into(),
            base: Some(PathBuf::from("/tmp")),
        };
        assert_eq!(r.for_output(Path::new("/tmp")), "g.json");
        assert!(Path::new(&r.for_output(Path::new("/"))).is_absolute());
        assert_eq!(
            GroupoidRef::builtin("pair:2").for_output(Path::new("/x")),
            "pair:2"
        );
    }
}
