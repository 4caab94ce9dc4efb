use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use ncp::algebra::same_groupoid;
use ncp::channels::{
    compose as compose_kernels, cp_verdict_with_tol, pull_observable, push_raw,
    push_state_with_tol, validate_kernel,
};
use ncp::estimation::{
    classical_fisher_rao, cramer_rao_audit, cramer_rao_bound, fisher_information, Estimator,
    StatisticalModel,
};
use ncp::gns::build_gns;
use ncp::io::{
    base_dir, detect_kind, element_to_json, kernel_to_json, parse_any_kernel, parse_document,
    parse_element, parse_groupoid_spec, parse_model, parse_pipeline, parse_state, state_to_json,
    write_json, ElementFile, FileKind, KernelFile, ModelFile, Resolver, StateFile,
};
use ncp::numkit::DEFAULT_RANK_TOL;
use ncp::states::{check_state, outcome_distribution, raw_outcome_distribution};
use ncp::{groupoid, ChannelError, Classify, ErrorClass, State};
use serde_json::{json, Map, Value};

pub struct Context {
    pub tol: f64,
    pub h: f64,
    pub json: bool,
}

#[derive(Debug)]
pub struct CliError {
    pub class: ErrorClass,
    pub message: String,
}

impl CliError {
    pub fn to_json(&self) -> Value {
        let class = match self.class {
            ErrorClass::Validation => "validation",
            ErrorClass::Input => "input",
            ErrorClass::Numerical => "numerical",
        };
        json!({ "error": self.message, "class": class, "exit_code": self.class.exit_code() })
    }
}

impl<E: Classify + Display> From<E> for CliError {
    fn from(e: E) -> Self {
        Self {
            class: e.class(),
            message: e.to_string(),
        }
    }
}

pub type CmdResult = Result<u8, CliError>;

fn print_line(text: &str) {
    // a closed stdout (e.g. piped into `head`) is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

pub fn print_json(v: &Value) {
    print_line(&serde_json::to_string_pretty(v).expect("values serialize"));
}

/// Prints a report: pretty JSON with `--json`, `key: value` lines otherwise.
pub fn report(ctx: &Context, v: &Value) {
    if ctx.json {
        print_json(v);
        return;
    }
    if let Value::Object(m) = v {
        for (k, val) in m {
            match val {
                Value::String(s) => print_line(&format!("{k}: {s}")),
                other => print_line(&format!("{k}: {other}")),
            }
        }
    } else {
        print_line(&v.to_string());
    }
}

fn status(pass: bool) -> u8 {
    if pass {
        0
    } else {
        ErrorClass::Validation.exit_code() as u8
    }
}

fn read(resolver: &Resolver, path: &Path) -> Result<String, CliError> {
    Ok(resolver.read(path)?)
}

fn load_state(resolver: &mut Resolver, path: &Path) -> Result<StateFile, CliError> {
    let text = read(resolver, path)?;
    Ok(parse_state(&text, Some(&base_dir(path)), resolver)?)
}

fn load_kernel(
    ctx: &Context,
    resolver: &mut Resolver,
    path: &Path,
) -> Result<KernelFile, CliError> {
    let text = read(resolver, path)?;
    Ok(parse_any_kernel(
        &text,
        Some(&base_dir(path)),
        resolver,
        ctx.tol,
    )?)
}

fn load_element(resolver: &mut Resolver, path: &Path) -> Result<ElementFile, CliError> {
    let text = read(resolver, path)?;
    Ok(parse_element(&text, Some(&base_dir(path)), resolver)?)
}

fn load_model(ctx: &Context, resolver: &mut Resolver, path: &Path) -> Result<ModelFile, CliError> {
    let text = read(resolver, path)?;
    Ok(parse_model(
        &text,
        Some(&base_dir(path)),
        resolver,
        ctx.tol,
    )?)
}

fn output_dir(output: Option<&Path>) -> PathBuf {
    match output {
        Some(p) => {
            let d = base_dir(p);
            if d.as_os_str().is_empty() {
                PathBuf::from(".")
            } else {
                d
            }
        }
        None => PathBuf::from("."),
    }
}

/// Writes `doc` to `output` and reports `summary`, or prints `doc` when no output is given.
fn emit(
    ctx: &Context,
    output: Option<&Path>,
    doc: &Value,
    mut summary: Map<String, Value>,
) -> CmdResult {
    match output {
        Some(p) => {
            write_json(p, doc)?;
            summary.insert("output".into(), json!(p.to_string_lossy()));
            report(ctx, &Value::Object(summary));
        }
        None => print_json(doc),
    }
    Ok(0)
}

fn with_kind(kind: FileKind, v: Value) -> Value {
    let mut m = match v {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("report".into(), other);
            m
        }
    };
    m.insert("kind".into(), json!(kind.name()));
    Value::Object(m)
}

pub fn validate(ctx: &Context, file: &Path) -> CmdResult {
    let mut resolver = Resolver::with_files();
    let text = read(&resolver, file)?;
    let kind = detect_kind(&parse_document(&text)?)?;
    let (pass, body) = match validation_report(ctx, &mut resolver, kind, file, &text) {
        Ok(r) => r,
        Err(e) if e.class == ErrorClass::Validation => {
            (false, json!({ "pass": false, "violation": e.message }))
        }
        Err(e) => return Err(e),
    };
    report(ctx, &with_kind(kind, body));
    Ok(status(pass))
}

fn validation_report(
    ctx: &Context,
    resolver: &mut Resolver,
    kind: FileKind,
    file: &Path,
    text: &str,
) -> Result<(bool, Value), CliError> {
    Ok(match kind {
        FileKind::Groupoid => {
            let g = groupoid::validate(&parse_groupoid_spec(text)?)?;
            (
                true,
                json!({
                    "pass": true,
                    "elements": g.num_elements(),
                    "outcomes": g.num_outcomes(),
                    "unimodular": g.is_unimodular(),
                }),
            )
        }
        FileKind::Element => {
            let ef = load_element(resolver, file)?;
            let self_adjoint = Estimator::new(ef.element.clone()).is_ok();
            (
                true,
                json!({ "pass": true, "elements": ef.element.coeff().len(), "self_adjoint": self_adjoint }),
            )
        }
        FileKind::State => {
            let sf = load_state(resolver, file)?;
            let r = check_state(&sf.groupoid, &sf.phi, ctx.tol)?;
            (r.pass, serde_json::to_value(&r).expect("report serializes"))
        }
        FileKind::Kernel | FileKind::ClassicalKernel | FileKind::Kraus => {
            let kf = load_kernel(ctx, resolver, file)?;
            let r = validate_kernel(&kf.kernel, ctx.tol)?;
            (r.pass, serde_json::to_value(&r).expect("report serializes"))
        }
        FileKind::Model => {
            let mf = load_model(ctx, resolver, file)?;
            let (lo, hi) = mf.model.interval();
            (
                true,
                json!({ "pass": true, "s0": mf.model.s0(), "interval": [lo, hi] }),
            )
        }
        FileKind::Pipeline => run_pipeline(ctx, file)?,
    })
}

pub fn compose(ctx: &Context, k1: &Path, k2: &Path, output: Option<&Path>) -> CmdResult {
    let mut resolver = Resolver::with_files();
    let a = load_kernel(ctx, &mut resolver, k1)?;
    let b = load_kernel(ctx, &mut resolver, k2)?;
    let k = compose_kernels(&a.kernel, &b.kernel)?;
    let dir = output_dir(output);
    let doc = kernel_to_json(
        &k,
        &a.source_ref.for_output(&dir),
        &b.target_ref.for_output(&dir),
    );
    let mut summary = Map::new();
    summary.insert("pass".into(), json!(validate_kernel(&k, ctx.tol)?.pass));
    emit(ctx, output, &doc, summary)
}

pub fn push(ctx: &Context, state: &Path, kernel: &Path, output: Option<&Path>) -> CmdResult {
    let mut resolver = Resolver::with_files();
    let rho = load_state(&mut resolver, state)?.into_state(ctx.tol)?;
    let kf = load_kernel(ctx, &mut resolver, kernel)?;
    let pushed = push_state_with_tol(&rho, &kf.kernel, ctx.tol)?;
    let dir = output_dir(output);
    let doc = state_to_json(
        pushed.groupoid(),
        pushed.phi(),
        &kf.target_ref.for_output(&dir),
    );
    let mut summary = Map::new();
    summary.insert(
        "outcome_distribution".into(),
        json!(outcome_distribution(&pushed)),
    );
    emit(ctx, output, &doc, summary)
}

pub fn pull(ctx: &Context, kernel: &Path, observable: &Path, output: Option<&Path>) -> CmdResult {
    let mut resolver = Resolver::with_files();
    let kf = load_kernel(ctx, &mut resolver, kernel)?;
    let ef = load_element(&mut resolver, observable)?;
    let pulled = pull_observable(&kf.kernel, &ef.element)?;
    let dir = output_dir(output);
    let doc = element_to_json(&pulled, &kf.source_ref.for_output(&dir));
    emit(ctx, output, &doc, Map::new())
}

fn run_pipeline(ctx: &Context, config: &Path) -> Result<(bool, Value), CliError> {
    let mut resolver = Resolver::with_files();
    let cfg = parse_pipeline(&read(&resolver, config)?)?;
    let base = base_dir(config);
    let sf = load_state(&mut resolver, &base.join(&cfg.initial_state))?;
    let rho = sf.into_state(ctx.tol)?;
    let mut groupoid = rho.groupoid().clone();
    let mut phi = rho.into_phi();
    let mut groupoid_ref = None;
    let mut stages = Vec::new();
    let mut pass = true;
    for (i, path) in cfg.kernels.iter().enumerate() {
        let kf = load_kernel(ctx, &mut resolver, &base.join(path))?;
        if !same_groupoid(&groupoid, kf.kernel.source()) {
            return Err(CliError {
                message: format!("stage {i}: {}", ChannelError::GroupoidMismatch),
                class: ErrorClass::Validation,
            });
        }
        let kernel_pass = validate_kernel(&kf.kernel, ctx.tol)?.pass;
        phi = push_raw(&phi, &kf.kernel);
        groupoid = kf.kernel.target().clone();
        let r = check_state(&groupoid, &phi, ctx.tol)?;
        let min_eig = r
            .fiber_min_eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        stages.push(json!({
            "stage": i,
            "kernel": path,
            "kernel_pass": kernel_pass,
            "normalization_deficit": r.normalization_deficit,
            "normalized": r.normalized,
            "min_fiber_eigenvalue": min_eig,
            "positive": r.positive,
            "pass": r.pass && kernel_pass,
        }));
        groupoid_ref = Some(kf.target_ref);
        if !(r.pass && kernel_pass) {
            pass = false;
            break;
        }
    }
    let reference = match &groupoid_ref {
        Some(r) => r.for_output(&base),
        None => sf_reference(&cfg.initial_state, &base, &mut resolver)?,
    };
    let final_state = state_to_json(&groupoid, &phi, &reference);
    Ok((
        pass,
        json!({
            "pass": pass,
            "stages": stages,
            "final_state": final_state,
            "outcome_distribution": raw_outcome_distribution(&groupoid, &phi),
        }),
    ))
}

fn sf_reference(initial: &str, base: &Path, resolver: &mut Resolver) -> Result<String, CliError> {
    Ok(load_state(resolver, &base.join(initial))?
        .groupoid_ref
        .for_output(base))
}

pub fn pipeline(ctx: &Context, config: &Path) -> CmdResult {
    let (pass, body) = run_pipeline(ctx, config)?;
    report(ctx, &body);
    Ok(status(pass))
}

pub fn gns(ctx: &Context, state: &Path) -> CmdResult {
    let mut resolver = Resolver::with_files();
    let rho = load_state(&mut resolver, state)?.into_state(ctx.tol)?;
    let space = build_gns(&rho, DEFAULT_RANK_TOL)?;
    report(
        ctx,
        &json!({
            "elements": rho.groupoid().num_elements(),
            "dim": space.dim(),
            "ideal_dim": space.ideal_basis().len(),
            "gram_spectrum": space.gram_spectrum(),
        }),
    );
    Ok(0)
}

fn base_space(model: &StatisticalModel) -> Result<(State, ncp::GnsSpace), CliError> {
    let rho = model.base_state()?;
    let space = build_gns(&rho, DEFAULT_RANK_TOL)?;
    Ok((rho, space))
}

pub fn fisher(ctx: &Context, model: &Path) -> CmdResult {
    let mut resolver = Resolver::with_files();
    let mf = load_model(ctx, &mut resolver, model)?;
    let (_, space) = base_space(&mf.model)?;
    let info = fisher_information(&mf.model, &space, ctx.h)?;
    let classical = if mf.model.groupoid().num_elements() == mf.model.groupoid().num_outcomes() {
        Some(classical_fisher_rao(&mf.model, ctx.h)?)
    } else {
        None
    };
    report(
        ctx,
        &json!({
            "fisher": info.g_f,
            "imaginary_part": info.imaginary_part,
            "folium_residual": info.folium_residual,
            "classical_fisher_rao": classical,
            "agreement_deficit": classical.map(|c| (c - info.g_f).abs()),
            "s0": mf.model.s0(),
            "h": ctx.h,
        }),
    );
    Ok(0)
}

pub fn crb(ctx: &Context, model: &Path, estimator: Option<&Path>) -> CmdResult {
    let mut resolver = Resolver::with_files();
    let mf = load_model(ctx, &mut resolver, model)?;
    let (_, space) = base_space(&mf.model)?;
    let bound = cramer_rao_bound(&mf.model, &space, ctx.h)?;
    let mut out = Map::new();
    out.insert("bound".into(), json!(bound));
    out.insert("fisher".into(), json!(1.0 / bound));
    let mut pass = true;
    if let Some(path) = estimator {
        let ef = load_element(&mut resolver, path)?;
        let a = Estimator::new(ef.element)?;
        let audit = cramer_rao_audit(&mf.model, &a, &space, ctx.h)?;
        // the bound only applies to unbiased estimators
        pass = audit.unbiased;
        if let Value::Object(m) = serde_json::to_value(&audit).expect("audit serializes") {
            out.extend(m);
        }
    }
    report(ctx, &Value::Object(out));
    Ok(status(pass))
}

pub fn cp(ctx: &Context, kernel: &Path) -> CmdResult {
    let mut resolver = Resolver::with_files();
    let kf = load_kernel(ctx, &mut resolver, kernel)?;
    let v = cp_verdict_with_tol(&kf.kernel, ctx.tol)?;
    report(
        ctx,
        &json!({ "is_cp": v.is_psd, "min_choi_eigenvalue": v.min_eigenvalue }),
    );
    Ok(0)
}
