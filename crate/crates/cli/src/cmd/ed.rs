//! `ed`: exact ground energies over an `h` or `j2` grid.
//!
//! Writes `ed.csv` (`param,energy,residual,method,analytic_energy`) and,
//! with `dump_states`, `state_XX.qsv1` per grid point.

use globalgate::hamiltonian::{ground_energy, Method};
use globalgate::io::{save_state, write_csv_with_header};
use globalgate::lattice::Lattice;
use globalgate::vqe::ModelSpec;
use serde::Serialize;

use super::{create_dir, manifest, write_manifest};
use crate::config::{lattice, EdSection, Model};
use crate::error::{CliError, Result};
use crate::Context;

#[derive(Serialize)]
struct Row {
    param: f64,
    energy: f64,
    residual: f64,
    method: Method,
    analytic_energy: Option<f64>,
}

/// Closed forms at the two ends of the toric field interpolation: all
/// stabilizers satisfied at `h = 0`, the fully polarised state at `h = 1`.
fn analytic(model: Model, lat: &Lattice, p: f64) -> Option<f64> {
    match model {
        Model::Toric if p == 0.0 => Some(-((lat.vertices.len() + lat.plaquettes.len()) as f64)),
        Model::Toric if p == 1.0 => Some(-(lat.n_sites as f64)),
        _ => None,
    }
}

pub fn resolve(mut s: EdSection) -> Result<EdSection> {
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
    if grid.get_or_insert_with(|| vec![0.0]).is_empty() {
        return Err(CliError::Config("empty parameter grid".into()));
    }
    s.method.get_or_insert(Method::Lanczos);
    s.dump_states.get_or_insert(false);
    Ok(s)
}

pub fn run(ctx: &Context, section: EdSection) -> Result<()> {
    let s = resolve(section)?;
    let model = s.model.unwrap();
    let lat = lattice(s.lattice.as_deref().unwrap())?.build()?;
    let grid = if model == Model::Toric { s.h.clone() } else { s.j2.clone() }.unwrap();
    let method = s.method.unwrap();
    let dir = ctx.out_dir();
    create_dir(&dir)?;
    write_manifest(&dir, &manifest("ed", "ed", &s, ctx.seed, vec![])?)?;

    let mut rows = Vec::with_capacity(grid.len());
    for (i, &p) in grid.iter().enumerate() {
        let spec = match model {
            Model::Toric => ModelSpec::Toric { h: p },
            Model::Heisenberg => ModelSpec::Heisenberg { j2: p },
        };
        let gs = ground_energy(&spec.hamiltonian(&lat)?, method)?;
        eprintln!("param {p}: E0 = {:.12}", gs.energy);
        if s.dump_states.unwrap() {
            save_state(&dir.join(format!("state_{i:02}.qsv1")), &gs.state)?;
        }
        rows.push(Row {
            param: p,
            energy: gs.energy,
            residual: gs.residual,
            method,
            analytic_energy: analytic(model, &lat, p),
        });
    }
    write_csv_with_header(
        &dir.join("ed.csv"),
        &["param", "energy", "residual", "method", "analytic_energy"],
        rows,
    )?;
    Ok(())
}
