//! `bp-scan`: gradient variances along a size or depth axis, or for every
//! parameter of a toric-code circuit.
//!
//! Writes `bp_<axis>_<ansatz>.csv` (`axis_value,variance,samples`) plus
//! `bp.json` with the full points; with `all_params`, `bp_params_<ansatz>.csv`.

use globalgate::analysis::{all_parameter_variances, bp_variance_scan, BpPoint, MuSelector, ScanAxis};
use globalgate::ansatz::{build, AnsatzKind};
use globalgate::hamiltonian::toric_code_hamiltonian;
use globalgate::io::{write_csv_with_header, write_json};
use serde::Serialize;

use super::{create_dir, manifest, write_manifest};
use crate::config::{lattice, Axis, BpSection};
use crate::error::Result;
use crate::Context;

#[derive(Serialize)]
struct Scan {
    ansatz: AnsatzKind,
    axis: ScanAxis,
    points: Vec<BpPoint>,
}

pub fn resolve(mut s: BpSection) -> Result<BpSection> {
    s.ansatz.get_or_insert_with(|| vec![AnsatzKind::Gz, AnsatzKind::Gzx]);
    s.samples.get_or_insert(1000);
    if *s.all_params.get_or_insert(false) {
        let text = s.lattice.take().unwrap_or_else(|| "2x2p".into());
        s.lattice = Some(lattice(&text)?.to_string());
        s.h.get_or_insert(0.0);
        s.k.get_or_insert(4);
        return Ok(s);
    }
    match *s.axis.get_or_insert(Axis::Size) {
        Axis::Size => {
            s.k.get_or_insert(6);
            s.sizes.get_or_insert_with(|| vec![8, 12, 16]);
        }
        Axis::Depth => {
            s.n.get_or_insert(16);
            s.depths.get_or_insert_with(|| vec![2, 4, 6, 8, 10, 12]);
        }
    }
    Ok(s)
}

pub fn run(ctx: &Context, section: BpSection) -> Result<()> {
    let s = resolve(section)?;
    let samples = s.samples.unwrap();
    let dir = ctx.out_dir();
    create_dir(&dir)?;
    write_manifest(&dir, &manifest("bp-scan", "bp_scan", &s, ctx.seed, vec![ctx.seed])?)?;

    if s.all_params.unwrap() {
        let lat = lattice(s.lattice.as_deref().unwrap())?.build()?;
        let h = toric_code_hamiltonian(&lat, s.h.unwrap())?;
        for &kind in s.ansatz.as_deref().unwrap() {
            let circuit = build(&lat, kind, s.k.unwrap())?;
            let vars = all_parameter_variances(&circuit, &h, samples, ctx.seed)?;
            write_csv_with_header(
                &dir.join(format!("bp_params_{}.csv", kind.name())),
                &["index", "variance", "samples"],
                vars.iter().enumerate().map(|(j, &v)| (j, v, samples)),
            )?;
            eprintln!("{}: {} parameter variances", kind.name(), vars.len());
        }
        return Ok(());
    }

    let (axis, label) = match s.axis.unwrap() {
        Axis::Size => (
            ScanAxis::Size {
                k: s.k.unwrap(),
                sizes: s.sizes.clone().unwrap(),
            },
            "size",
        ),
        Axis::Depth => (
            ScanAxis::Depth {
                n: s.n.unwrap(),
                depths: s.depths.clone().unwrap(),
            },
            "depth",
        ),
    };
    let mu = s.mu.map_or(MuSelector::LastQubitFirstRy, |index| MuSelector::Index { index });
    let mut scans = Vec::new();
    for &kind in s.ansatz.as_deref().unwrap() {
        let points = bp_variance_scan(kind, &axis, samples, mu, ctx.seed)?;
        for p in &points {
            eprintln!("{} {label} {}: variance {:.4e}", kind.name(), p.axis_value, p.variance);
        }
        write_csv_with_header(
            &dir.join(format!("bp_{label}_{}.csv", kind.name())),
            &["axis_value", "variance", "samples"],
            points.iter().map(|p| (p.axis_value, p.variance, p.samples)),
        )?;
        scans.push(Scan {
            ansatz: kind,
            axis: axis.clone(),
            points,
        });
    }
    write_json(&dir.join("bp.json"), &scans)?;
    Ok(())
}
