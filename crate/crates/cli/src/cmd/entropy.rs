//! `entropy`: γ and its seven constituent entropies for a `qsv1` state.

use std::fs;

use globalgate::analysis::{default_toric_regions, entropy_breakdown, RegionSpec};
use globalgate::io::{load_state, write_json};
use serde::Serialize;

use super::create_dir;
use crate::config::{lattice, EntropySection};
use crate::error::{CliError, Result};
use crate::Context;

#[derive(Serialize)]
struct Report {
    regions: RegionSpec,
    #[serde(flatten)]
    breakdown: globalgate::analysis::EntropyBreakdown,
}

pub fn run(ctx: &Context, s: EntropySection) -> Result<()> {
    let path = s.state.ok_or_else(|| CliError::Config("--state is required".into()))?;
    let state = load_state(&path)?;
    let regions = match (&s.regions, &s.lattice) {
        (Some(file), _) => RegionSpec::from_json(&fs::read_to_string(file)?)?,
        (None, Some(text)) => default_toric_regions(&lattice(text)?.build()?)?,
        (None, None) => return Err(CliError::Config("give --regions or a toric --lattice".into())),
    };
    let b = entropy_breakdown(&state, &regions)?;
    println!("gamma  {:.12}", b.gamma);
    for (name, v) in [
        ("S_A", b.s_a),
        ("S_B", b.s_b),
        ("S_C", b.s_c),
        ("S_AB", b.s_ab),
        ("S_AC", b.s_ac),
        ("S_BC", b.s_bc),
        ("S_ABC", b.s_abc),
    ] {
        println!("{name:<6} {v:.12}");
    }
    if let Some(dir) = &ctx.out {
        create_dir(dir)?;
        write_json(&dir.join("entropy.json"), &Report { regions, breakdown: b })?;
    }
    Ok(())
}
