//! `express`: expressibility statistics per ansatz, or for Haar states.
//!
//! Writes `express.json` (full statistics), `express.csv` (one comparison
//! row per ensemble), `histogram_<name>.csv` and, on request,
//! `fidelities_<name>.csv`.

use globalgate::analysis::{
    ensemble_stats, porter_thomas_log_mass, CircuitEnsemble, EnsembleStats, HaarEnsemble, StateSource, StatsOptions,
    DEFAULT_MEMORY_BUDGET,
};
use globalgate::ansatz::{build, AnsatzKind};
use globalgate::io::{write_csv_with_header, write_json};
use serde::Serialize;

use super::{create_dir, manifest, write_manifest};
use crate::config::{lattice, ExpressSection};
use crate::error::Result;
use crate::Context;

#[derive(Serialize)]
struct Entry {
    name: String,
    n_qubits: usize,
    k: Option<usize>,
    stats: EnsembleStats,
}

#[derive(Serialize)]
struct Row {
    name: String,
    n_qubits: usize,
    k: Option<usize>,
    samples: usize,
    a1: f64,
    a1_samples: usize,
    a2: f64,
    a2_samples: usize,
    kl: f64,
    kl_degenerate: bool,
    kl_pairs: usize,
    f1: f64,
    f1_sem: f64,
    f2: f64,
    f2_sem: f64,
    haar_f1: f64,
    haar_f2: f64,
}

#[derive(Serialize)]
struct HistRow {
    bin: usize,
    lower: f64,
    upper: f64,
    count: usize,
    haar_probability: f64,
}

pub fn resolve(mut s: ExpressSection) -> Result<ExpressSection> {
    if s.haar_qubits.is_none() {
        let text = s.lattice.take().unwrap_or_else(|| "2x2p".into());
        s.lattice = Some(lattice(&text)?.to_string());
        s.ansatz.get_or_insert_with(|| vec![AnsatzKind::Gz, AnsatzKind::Gzx, AnsatzKind::GzxH]);
        s.k.get_or_insert(4);
    }
    let d = StatsOptions::default();
    s.samples.get_or_insert(10_000);
    s.a1_samples.get_or_insert(d.a1_samples);
    s.a2_samples.get_or_insert(d.a2_samples);
    s.kl_pairs.get_or_insert(d.kl_pairs);
    s.bins.get_or_insert(d.bins);
    s.degenerate.get_or_insert(false);
    s.fidelities.get_or_insert(false);
    s.memory_budget.get_or_insert(DEFAULT_MEMORY_BUDGET);
    Ok(s)
}

pub fn run(ctx: &Context, section: ExpressSection) -> Result<()> {
    let s = resolve(section)?;
    let opts = StatsOptions {
        bins: s.bins.unwrap(),
        kl_pairs: s.kl_pairs.unwrap(),
        a2_samples: s.a2_samples.unwrap(),
        a1_samples: s.a1_samples.unwrap(),
        memory_budget: s.memory_budget.unwrap(),
        keep_fidelities: s.fidelities.unwrap(),
    };
    let count = s.samples.unwrap();

    let mut sources: Vec<(String, Option<usize>, Box<dyn StateSource>)> = Vec::new();
    if let Some(n_qubits) = s.haar_qubits {
        sources.push((
            "haar".into(),
            None,
            Box::new(HaarEnsemble {
                n_qubits,
                count,
                seed: ctx.seed,
            }),
        ));
    } else {
        let lat = lattice(s.lattice.as_deref().unwrap())?.build()?;
        let k = s.k.unwrap();
        for &kind in s.ansatz.as_deref().unwrap() {
            let circuit = build(&lat, kind, k)?;
            let mut e = CircuitEnsemble::new(circuit, count, ctx.seed);
            if s.degenerate.unwrap() {
                e.fixed_params = Some(vec![0.0; e.circuit.param_count]);
            }
            sources.push((kind.name().into(), Some(k), Box::new(e)));
        }
    }

    let dir = ctx.out_dir();
    create_dir(&dir)?;
    write_manifest(&dir, &manifest("express", "express", &s, ctx.seed, vec![ctx.seed])?)?;
    let mut entries = Vec::new();
    for (name, k, source) in sources {
        let mut stats = ensemble_stats(source.as_ref(), &opts)?;
        eprintln!(
            "{name}: A1 {:.6} A2 {:.6} KL {:.6}{} F2 {:.4e} (Haar {:.4e})",
            stats.a1,
            stats.a2,
            stats.kl,
            if stats.kl_degenerate { " (degenerate)" } else { "" },
            stats.f2,
            stats.haar_f2
        );
        let bins = stats.histogram.len();
        let hist = stats.histogram.iter().enumerate().map(|(b, &count)| {
            let (lower, upper) = (b as f64 / bins as f64, (b + 1) as f64 / bins as f64);
            HistRow {
                bin: b,
                lower,
                upper,
                count,
                haar_probability: porter_thomas_log_mass(stats.d, lower, upper).exp(),
            }
        });
        write_csv_with_header(
            &dir.join(format!("histogram_{name}.csv")),
            &["bin", "lower", "upper", "count", "haar_probability"],
            hist,
        )?;
        let fids = std::mem::take(&mut stats.fidelity_samples);
        if opts.keep_fidelities {
            write_csv_with_header(&dir.join(format!("fidelities_{name}.csv")), &["fidelity"], fids.iter().map(|f| (f,)))?;
        }
        entries.push(Entry {
            name,
            n_qubits: source.n_qubits(),
            k,
            stats,
        });
    }

    let rows = entries.iter().map(|e| Row {
        name: e.name.clone(),
        n_qubits: e.n_qubits,
        k: e.k,
        samples: e.stats.sample_count,
        a1: e.stats.a1,
        a1_samples: e.stats.a1_samples,
        a2: e.stats.a2,
        a2_samples: e.stats.a2_samples,
        kl: e.stats.kl,
        kl_degenerate: e.stats.kl_degenerate,
        kl_pairs: e.stats.kl_pairs,
        f1: e.stats.f1,
        f1_sem: e.stats.f1_sem,
        f2: e.stats.f2,
        f2_sem: e.stats.f2_sem,
        haar_f1: e.stats.haar_f1,
        haar_f2: e.stats.haar_f2,
    });
    write_csv_with_header(
        &dir.join("express.csv"),
        &[
            "name", "n_qubits", "k", "samples", "a1", "a1_samples", "a2", "a2_samples", "kl", "kl_degenerate",
            "kl_pairs", "f1", "f1_sem", "f2", "f2_sem", "haar_f1", "haar_f2",
        ],
        rows,
    )?;
    write_json(&dir.join("express.json"), &entries)?;
    Ok(())
}
