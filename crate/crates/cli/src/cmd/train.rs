//! `train`: one VQE ensemble per grid point plus the exact reference.
//!
//! Layout under `--out`:
//! `manifest.json`, `sweep.csv`, and per point `point_XX/` holding the run
//! files, `best_state.qsv1` and, while training, an `INCOMPLETE` marker.

use std::fs;
use std::path::Path;

use globalgate::analysis::RegionSpec;
use globalgate::ansatz::{AnsatzKind, Connectivity};
use globalgate::hamiltonian::{ground_energy, Method};
use globalgate::io::{read_json, save_state, write_csv_with_header, write_run, Manifest};
use globalgate::vqe::{train_ensemble, AggregateReport, GradientMethod, ModelSpec, TrainConfig};
use serde::Serialize;

use super::{create_dir, manifest, write_manifest};
use crate::config::{lattice, Model, TrainSection};
use crate::error::{CliError, Result};
use crate::Context;

const MARKER: &str = "INCOMPLETE";

#[derive(Serialize)]
struct SweepRow {
    param: f64,
    best_half_energy: f64,
    ed_energy: f64,
    best_half_gamma: Option<f64>,
}

/// Fills every default so the section is the complete record of the run.
pub fn resolve(mut s: TrainSection) -> Result<TrainSection> {
    let model = *s.model.get_or_insert(Model::Toric);
    let toric = model == Model::Toric;
    let text = s.lattice.take().unwrap_or_else(|| if toric { "2x2p" } else { "4x4" }.into());
    s.lattice = Some(lattice(&text)?.to_string());
    let (grid, other) = if toric { (&mut s.h, &s.j2) } else { (&mut s.j2, &s.h) };
    if other.is_some() {
        return Err(CliError::Config(format!(
            "{} grid does not apply to the {model:?} model",
            if toric { "j2" } else { "h" }
        )));
    }
    let grid = grid.get_or_insert_with(|| vec![0.0]);
    if grid.is_empty() {
        return Err(CliError::Config("empty parameter grid".into()));
    }
    s.ansatz.get_or_insert(AnsatzKind::Gzx);
    s.connectivity.get_or_insert(Connectivity::Neighbor);
    s.k.get_or_insert(if toric { 4 } else { 3 });
    s.instances.get_or_insert(100);
    s.max_epochs.get_or_insert(1000);
    s.early_stop_delta.get_or_insert(1e-4);
    s.order_param_interval.get_or_insert(if toric { 25 } else { 0 });
    s.gradient.get_or_insert(GradientMethod::Adjoint);
    let adam = s.adam.get_or_insert_with(Default::default);
    if let Some(step) = s.step_size.take() {
        adam.step_size = step;
    }
    Ok(s)
}

/// One training config per grid value.
pub fn grid_configs(s: &TrainSection, seed: u64) -> Result<Vec<(f64, TrainConfig)>> {
    let regions = match &s.regions {
        Some(path) => Some(RegionSpec::from_json(&fs::read_to_string(path)?)?),
        None => None,
    };
    let toric = s.model == Some(Model::Toric);
    let grid = if toric { s.h.as_ref() } else { s.j2.as_ref() };
    grid.into_iter()
        .flatten()
        .map(|&p| {
            let model = if toric { ModelSpec::Toric { h: p } } else { ModelSpec::Heisenberg { j2: p } };
            let mut c = TrainConfig::new(s.ansatz.unwrap(), lattice(s.lattice.as_deref().unwrap())?, s.k.unwrap(), model);
            c.connectivity = s.connectivity.unwrap();
            c.instances = s.instances.unwrap();
            c.max_epochs = s.max_epochs.unwrap();
            c.early_stop_delta = s.early_stop_delta.unwrap();
            c.order_param_interval = s.order_param_interval.unwrap();
            c.gradient = s.gradient.unwrap();
            c.adam = s.adam.unwrap();
            c.regions = regions.clone();
            c.seed = seed;
            c.validate()?;
            Ok((p, c))
        })
        .collect()
}

fn point_finished(dir: &Path) -> bool {
    dir.join("aggregate.json").is_file() && !dir.join(MARKER).exists()
}

pub fn run(ctx: &Context, section: TrainSection, resume: bool) -> Result<()> {
    let s = resolve(section)?;
    let configs = grid_configs(&s, ctx.seed)?;
    let seeds = (0..s.instances.unwrap() as u64).map(|i| ctx.seed.wrapping_add(i)).collect();
    let m = manifest("train", "train", &s, ctx.seed, seeds)?;
    let dir = ctx.out_dir();
    create_dir(&dir)?;
    if resume {
        let old: Manifest<serde_json::Value> = read_json(&dir.join("manifest.json"))
            .map_err(|e| CliError::Config(format!("nothing to resume in {}: {e}", dir.display())))?;
        if old != m {
            return Err(CliError::Config("--resume with a config that differs from manifest.json".into()));
        }
    } else {
        write_manifest(&dir, &m)?;
    }

    let mut rows = Vec::with_capacity(configs.len());
    for (i, (param, config)) in configs.iter().enumerate() {
        let point = dir.join(format!("point_{i:02}"));
        let problem = config.problem()?;
        let report: AggregateReport = if resume && point_finished(&point) {
            eprintln!("point {i}: already finished, skipping");
            read_json(&point.join("aggregate.json"))?
        } else {
            create_dir(&point)?;
            fs::write(point.join(MARKER), "training in progress\n")?;
            let ensemble = train_ensemble(config)?;
            write_run(&point, &ensemble)?;
            let best = &ensemble.runs[ensemble.report.best_instance];
            let mut state = problem.initial.clone();
            problem.circuit.run(&best.final_params, &mut state)?;
            save_state(&point.join("best_state.qsv1"), &state)?;
            fs::remove_file(point.join(MARKER))?;
            ensemble.report
        };
        let ed = ground_energy(&problem.hamiltonian, Method::Lanczos)?;
        eprintln!(
            "point {i} (param {param}): best-half {:.6}, best {:.6}, exact {:.6}, {}/{} converged",
            report.best_half_energy, report.best_energy, ed.energy, report.converged, report.instances
        );
        rows.push(SweepRow {
            param: *param,
            best_half_energy: report.best_half_energy,
            ed_energy: ed.energy,
            best_half_gamma: report.best_half_gamma,
        });
    }
    write_csv_with_header(
        &dir.join("sweep.csv"),
        &["param", "best_half_energy", "ed_energy", "best_half_gamma"],
        rows,
    )?;
    Ok(())
}
