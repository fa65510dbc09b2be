//! Topological entanglement entropy from a three-region partition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeKind};
use crate::sim::{entanglement_entropy, StateVector};

/// Three disjoint qubit regions, serialized as `{"A":[..],"B":[..],"C":[..]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    #[serde(rename = "A")]
    pub a: Vec<usize>,
    #[serde(rename = "B")]
    pub b: Vec<usize>,
    #[serde(rename = "C")]
    pub c: Vec<usize>,
}

impl RegionSpec {
    pub fn new(a: Vec<usize>, b: Vec<usize>, c: Vec<usize>) -> Self {
        Self { a, b, c }
    }

    /// Checks the regions against an `n`-qubit register.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for (name, region) in [("A", &self.a), ("B", &self.b), ("C", &self.c)] {
            if region.is_empty() {
                return Err(Error::Argument(format!("region {name} is empty")));
            }
            for &q in region {
                if q >= n {
                    return Err(Error::Argument(format!(
                        "region {name} holds qubit {q}, register has {n}"
                    )));
                }
                if seen[q] {
                    return Err(Error::Argument(format!("qubit {q} appears in more than one region")));
                }
                seen[q] = true;
            }
        }
        if seen.iter().all(|&s| s) {
            return Err(Error::Argument("regions must leave at least one qubit outside".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Three two-edge groups around the most central interior vertex of a
/// toric-edge lattice: the up arm with the horizontal edge to its upper
/// left, the left arm with the vertical edge above it, and the right and
/// down arms together.
pub fn default_toric_regions(lattice: &Lattice) -> Result<RegionSpec> {
    if lattice.kind != LatticeKind::ToricEdge {
        return Err(Error::Argument("default regions need a toric-edge lattice".into()));
    }
    let (p_rows, p_cols) = lattice.dims;
    if p_rows < 2 || p_cols < 2 {
        return Err(Error::Argument(format!(
            "{p_rows}×{p_cols} plaquettes have no interior vertex"
        )));
    }
    let stride = 2 * p_cols + 1;
    let h = |r: usize, c: usize| r * stride + c;
    let v = |r: usize, c: usize| r * stride + p_cols + c;
    let (r, c) = (p_rows / 2, p_cols / 2);
    Ok(RegionSpec {
        a: vec![h(r - 1, c - 1), v(r - 1, c)],
        b: vec![v(r - 1, c - 1), h(r, c - 1)],
        c: vec![h(r, c), v(r, c)],
    })
}

/// γ together with the seven region entropies it is built from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyBreakdown {
    pub gamma: f64,
    pub s_a: f64,
    pub s_b: f64,
    pub s_c: f64,
    pub s_ab: f64,
    pub s_ac: f64,
    pub s_bc: f64,
    pub s_abc: f64,
}

pub fn entropy_breakdown(state: &StateVector, regions: &RegionSpec) -> Result<EntropyBreakdown> {
    regions.validate(state.qubit_count())?;
    let s = |parts: &[&Vec<usize>]| -> Result<f64> {
        let mut keep: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
        keep.sort_unstable();
        entanglement_entropy(state, &keep).map_err(|e| match e {
            Error::Size(m) => Error::Argument(m),
            other => other,
        })
    };
    let (a, b, c) = (&regions.a, &regions.b, &regions.c);
    let s_a = s(&[a])?;
    let s_b = s(&[b])?;
    let s_c = s(&[c])?;
    let s_ab = s(&[a, b])?;
    let s_ac = s(&[a, c])?;
    let s_bc = s(&[b, c])?;
    let s_abc = s(&[a, b, c])?;
    // S(X) = αL − γ, so the pairwise terms minus the singles and the triple
    // leave +γ
    let gamma = s_ab + s_ac + s_bc - s_a - s_b - s_c - s_abc;
    Ok(EntropyBreakdown {
        gamma,
        s_a,
        s_b,
        s_c,
        s_ab,
        s_ac,
        s_bc,
        s_abc,
    })
}

/// Kitaev-Preskill γ of `state` for the given regions.
pub fn topological_entropy(state: &StateVector, regions: &RegionSpec) -> Result<f64> {
    Ok(entropy_breakdown(state, regions)?.gamma)
}
