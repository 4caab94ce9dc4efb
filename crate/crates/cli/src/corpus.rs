//! Deterministic fixture corpus seeded by `--seed`.

use std::path::Path;
use std::sync::Arc;

use ncp::channels::{kernel_from_predual, PredualMap};
use ncp::io::{
    classical_kernel_to_json, element_to_json, groupoid_to_json, kernel_to_json, kraus_to_json,
    model_to_json, pipeline_to_json, state_to_json, write_json, IoError, PipelineConfig,
};
use ncp::numkit::ComplexMatrix;
use ncp::states::{state_from_density, DensityMatrix};
use ncp::{random, AlgebraElement, FiniteGroupoid};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::commands::{report, CmdResult, Context};

struct Writer<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl Writer<'_> {
    fn put(&mut self, name: &str, v: &Value) -> Result<(), IoError> {
        write_json(&self.dir.join(name), v)?;
        self.written.push(name.to_string());
        Ok(())
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn write_corpus(ctx: &Context, dir: &Path, seed: u64) -> CmdResult {
    std::fs::create_dir_all(dir).map_err(|source| IoError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut rng = random::seeded(seed);
    let mut w = Writer {
        dir,
        written: Vec::new(),
    };

    let pair2 = Arc::new(FiniteGroupoid::pair(2));
    let trivial2 = Arc::new(FiniteGroupoid::trivial(2));
    w.put("pair2.json", &groupoid_to_json(&pair2))?;
    w.put("trivial2.json", &groupoid_to_json(&trivial2))?;
    w.put("z3.json", &groupoid_to_json(&FiniteGroupoid::cyclic(3)))?;

    let mixed = state_from_density(&random::density(2, &mut rng), pair2.clone())?;
    w.put(
        "state_random.json",
        &state_to_json(&pair2, mixed.phi(), "pair2.json"),
    )?;
    let pure = DensityMatrix::new(ComplexMatrix::diag(&[c(1.0), c(0.0)]), ctx.tol)?;
    let pure = state_from_density(&pure, pair2.clone())?;
    w.put(
        "state_pure.json",
        &state_to_json(&pair2, pure.phi(), "pair2.json"),
    )?;

    let kraus = random::kraus(2, 2, 2, &mut rng);
    w.put("kraus_random.json", &kraus_to_json(&kraus))?;
    let map = PredualMap::from_kraus(&kraus)?;
    let k = kernel_from_predual(&map, pair2.clone(), pair2.clone())?;
    w.put(
        "kernel_random.json",
        &kernel_to_json(&k, "pair2.json", "pair2.json"),
    )?;
    let t = kernel_from_predual(
        &PredualMap::from_fn(2, 2, ComplexMatrix::transpose),
        pair2.clone(),
        pair2.clone(),
    )?;
    w.put(
        "transpose.json",
        &kernel_to_json(&t, "pair2.json", "pair2.json"),
    )?;
    w.put(
        "stochastic_random.json",
        &classical_kernel_to_json(&random::stochastic(2, 3, &mut rng)),
    )?;

    w.put(
        "pipeline.json",
        &pipeline_to_json(&PipelineConfig {
            initial_state: "state_random.json".into(),
            kernels: vec!["kernel_random.json".into(), "kraus_random.json".into()],
        }),
    )?;

    // coin p_s = (1/2 + s, 1/2 - s) and the qubit family (I + s σ_z) / 2
    let knots = [-0.4, 0.0, 0.4];
    let mut coin = Vec::new();
    let mut qubit = Vec::new();
    for (i, s) in knots.iter().enumerate() {
        let name = format!("coin_{i}.json");
        let phi = [c((0.5 + s) / 0.5), c((0.5 - s) / 0.5)];
        w.put(&name, &state_to_json(&trivial2, &phi, "trivial2.json"))?;
        coin.push((*s, name));

        let name = format!("qubit_{i}.json");
        let d = DensityMatrix::new(
            ComplexMatrix::diag(&[c((1.0 + s) / 2.0), c((1.0 - s) / 2.0)]),
            ctx.tol,
        )?;
        let st = state_from_density(&d, pair2.clone())?;
        w.put(&name, &state_to_json(&pair2, st.phi(), "pair2.json"))?;
        qubit.push((*s, name));
    }
    let grid = [-0.2, 0.1, 0.3];
    w.put(
        "coin_model.json",
        &model_to_json("trivial2.json", 0.0, (-0.4, 0.4), &grid, &coin),
    )?;
    w.put(
        "qubit_model.json",
        &model_to_json("pair2.json", 0.0, (-0.4, 0.4), &grid, &qubit),
    )?;
    let pm = AlgebraElement::new(trivial2.clone(), vec![c(0.5), c(-0.5)])?;
    w.put("pm_half.json", &element_to_json(&pm, "trivial2.json"))?;
    let sz = ncp::algebra::element_from_matrix(pair2.clone(), &ncp::channels::pauli()[2])?;
    w.put("sigma_z.json", &element_to_json(&sz, "pair2.json"))?;
    let obs = random::self_adjoint(&pair2, &mut rng);
    w.put(
        "observable_random.json",
        &element_to_json(&obs, "pair2.json"),
    )?;

    report(ctx, &json!({ "seed": seed, "written": w.written }));
    Ok(0)
}
