//! Parameterized global-gate circuit templates.
//!
//! Every layer starts with `R_Z(θ₁)`, `R_Y(θ₂)`, `R_Z(θ₃)` on each site (in
//! site order) and follows with the entangling layer of the chosen template:
//!
//! | kind     | entangling layer                                   | global gates |
//! |----------|----------------------------------------------------|--------------|
//! | `Gz`     | CZ(θ) on every link                                 | 1 per layer  |
//! | `Gzx`    | CZ(θ) on every link, then CX(θ) on every link      | 2 per layer  |
//! | `GzxH`   | CZ(θ) on odd-ordinal links, CX(θ) on even ones     | 2 per layer  |
//! | `Cartan` | RXX, RYY, RZZ on every link                         | not global   |
//!
//! Gate `i` of a circuit always owns parameter `i`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{link_parity, Lattice, LatticeKind};
use crate::sim::{gates, kernels, StateVector};
use num_complex::Complex64 as C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzKind {
    Gz,
    Gzx,
    GzxH,
    Cartan,
}

impl AnsatzKind {
    pub const ALL: [AnsatzKind; 4] = [Self::Gz, Self::Gzx, Self::GzxH, Self::Cartan];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gz => "gz",
            Self::Gzx => "gzx",
            Self::GzxH => "gzxh",
            Self::Cartan => "cartan",
        }
    }
}

impl fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnsatzKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "").as_str() {
            "gz" => Ok(Self::Gz),
            "gzx" => Ok(Self::Gzx),
            "gzxh" => Ok(Self::GzxH),
            "cartan" => Ok(Self::Cartan),
            other => Err(Error::Argument(format!("unknown ansatz '{other}'"))),
        }
    }
}

/// Which pairs the entangling layers act on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    /// The lattice's own link list.
    #[default]
    Neighbor,
    /// Square lattices only: all six pairs inside each plaquette.
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    #[serde(rename = "RZ")]
    Rz,
    #[serde(rename = "RY")]
    Ry,
    #[serde(rename = "CZ")]
    Cz,
    #[serde(rename = "CX")]
    Cx,
    #[serde(rename = "RXX")]
    Rxx,
    #[serde(rename = "RYY")]
    Ryy,
    #[serde(rename = "RZZ")]
    Rzz,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            Self::Rz | Self::Ry => 1,
            _ => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateInstr {
    pub kind: GateKind,
    /// One qubit, or `[control, target]` / `[a, b]` for two-qubit kinds.
    pub qubits: Vec<usize>,
    pub param_index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub n_qubits: usize,
    pub ansatz: AnsatzKind,
    pub connectivity: Connectivity,
    pub layers: usize,
    /// Number of two-qubit gate locations (links) per entangling layer.
    pub link_count: usize,
    pub param_count: usize,
    /// Global CZ/CX invocations; `None` for Cartan circuits.
    pub global_gate_count: Option<usize>,
    /// Half-open gate-index range `[start, end)` of each layer.
    pub layer_boundaries: Vec<(usize, usize)>,
    pub gates: Vec<GateInstr>,
}

/// GZ: `R₃` layer then CZ(θ) on every link, `k` times.
pub fn build_gz(lattice: &Lattice, k: usize) -> Result<CircuitSpec> {
    build(lattice, AnsatzKind::Gz, k)
}

/// GZX: `R₃` layer, CZ(θ) on every link, CX(θ) on every link, `k` times.
pub fn build_gzx(lattice: &Lattice, k: usize) -> Result<CircuitSpec> {
    build(lattice, AnsatzKind::Gzx, k)
}

/// GZX_H: `R₃` layer, CZ(θ) on odd-ordinal links, CX(θ) on even ones.
pub fn build_gzxh(lattice: &Lattice, k: usize) -> Result<CircuitSpec> {
    build(lattice, AnsatzKind::GzxH, k)
}

/// Cartan: `R₃` layer then RXX, RYY, RZZ on every link.
pub fn build_cartan(lattice: &Lattice, k: usize) -> Result<CircuitSpec> {
    build(lattice, AnsatzKind::Cartan, k)
}

/// Builds `kind` on the lattice's own links ("Neighbor" connectivity).
pub fn build(lattice: &Lattice, kind: AnsatzKind, k: usize) -> Result<CircuitSpec> {
    let links: Vec<(usize, usize)> = lattice.links.iter().map(|l| (l.a, l.b)).collect();
    let (odd, even) = link_parity(lattice);
    let odd = odd.iter().map(|l| (l.a, l.b)).collect();
    let even = even.iter().map(|l| (l.a, l.b)).collect();
    assemble(lattice.n_sites, kind, Connectivity::Neighbor, k, links, odd, even)
}

/// The 'All' variant: every pair among the four corners of each plaquette,
/// deduplicated across plaquettes and renumbered in emission order.
pub fn build_all_variant(lattice: &Lattice, k: usize, base: AnsatzKind) -> Result<CircuitSpec> {
    let links = all_to_all_plaquette_links(lattice)?;
    let odd = links.iter().step_by(2).cloned().collect();
    let even = links.iter().skip(1).step_by(2).cloned().collect();
    assemble(lattice.n_sites, base, Connectivity::All, k, links, odd, even)
}

/// Builds with either connectivity.
pub fn build_with(
    lattice: &Lattice,
    kind: AnsatzKind,
    connectivity: Connectivity,
    k: usize,
) -> Result<CircuitSpec> {
    match connectivity {
        Connectivity::Neighbor => build(lattice, kind, k),
        Connectivity::All => build_all_variant(lattice, k, kind),
    }
}

/// Per plaquette (row-major): left edge, top edge, right edge, bottom edge,
/// then the two diagonals; pairs emitted by earlier plaquettes are skipped.
pub fn all_to_all_plaquette_links(lattice: &Lattice) -> Result<Vec<(usize, usize)>> {
    if lattice.kind != LatticeKind::Square {
        return Err(Error::Argument(
            "all-to-all plaquette connectivity needs a square lattice".into(),
        ));
    }
    let mut seen = std::collections::HashSet::new();
    let mut links = Vec::new();
    for p in &lattice.plaquettes {
        let (tl, tr, br, bl) = (p[0], p[1], p[2], p[3]);
        for (a, b) in [(tl, bl), (tl, tr), (tr, br), (bl, br), (tl, br), (tr, bl)] {
            if seen.insert((a.min(b), a.max(b))) {
                links.push((a, b));
            }
        }
    }
    Ok(links)
}

fn assemble(
    n: usize,
    kind: AnsatzKind,
    connectivity: Connectivity,
    k: usize,
    links: Vec<(usize, usize)>,
    odd: Vec<(usize, usize)>,
    even: Vec<(usize, usize)>,
) -> Result<CircuitSpec> {
    if k < 1 {
        return Err(Error::Argument("ansatz needs at least one layer".into()));
    }
    let mut gates = Vec::new();
    let mut layer_boundaries = Vec::with_capacity(k);
    let push = |gates: &mut Vec<GateInstr>, kind: GateKind, qubits: Vec<usize>| {
        let param_index = gates.len();
        gates.push(GateInstr {
            kind,
            qubits,
            param_index,
        });
    };
    for _ in 0..k {
        let start = gates.len();
        for q in 0..n {
            push(&mut gates, GateKind::Rz, vec![q]);
            push(&mut gates, GateKind::Ry, vec![q]);
            push(&mut gates, GateKind::Rz, vec![q]);
        }
        match kind {
            AnsatzKind::Gz => {
                for &(a, b) in &links {
                    push(&mut gates, GateKind::Cz, vec![a, b]);
                }
            }
            AnsatzKind::Gzx => {
                for &(a, b) in &links {
                    push(&mut gates, GateKind::Cz, vec![a, b]);
                }
                for &(a, b) in &links {
                    push(&mut gates, GateKind::Cx, vec![a, b]);
                }
            }
            AnsatzKind::GzxH => {
                for &(a, b) in &odd {
                    push(&mut gates, GateKind::Cz, vec![a, b]);
                }
                for &(a, b) in &even {
                    push(&mut gates, GateKind::Cx, vec![a, b]);
                }
            }
            AnsatzKind::Cartan => {
                for &(a, b) in &links {
                    push(&mut gates, GateKind::Rxx, vec![a, b]);
                    push(&mut gates, GateKind::Ryy, vec![a, b]);
                    push(&mut gates, GateKind::Rzz, vec![a, b]);
                }
            }
        }
        layer_boundaries.push((start, gates.len()));
    }
    let global_gate_count = match kind {
        AnsatzKind::Gz => Some(k),
        AnsatzKind::Gzx | AnsatzKind::GzxH => Some(2 * k),
        AnsatzKind::Cartan => None,
    };
    Ok(CircuitSpec {
        n_qubits: n,
        ansatz: kind,
        connectivity,
        layers: k,
        link_count: links.len(),
        param_count: gates.len(),
        global_gate_count,
        layer_boundaries,
        gates,
    })
}

impl CircuitSpec {
    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                self.param_count,
                params.len()
            )));
        }
        Ok(())
    }

    /// Applies `U(θ)` to `state` in place.
    pub fn run(&self, params: &[f64], state: &mut StateVector) -> Result<()> {
        self.check_params(params)?;
        if state.qubit_count() != self.n_qubits {
            return Err(Error::Shape(format!(
                "{}-qubit circuit on a {}-qubit state",
                self.n_qubits,
                state.qubit_count()
            )));
        }
        let amps = state.amplitudes_mut();
        let mut i = 0;
        while i < self.gates.len() {
            let g = &self.gates[i];
            if g.kind.arity() == 1 {
                // fuse a run of single-qubit rotations on the same qubit
                let q = g.qubits[0];
                let mut j = i;
                let mut m = gates::identity2();
                while j < self.gates.len()
                    && self.gates[j].kind.arity() == 1
                    && self.gates[j].qubits[0] == q
                {
                    let theta = params[self.gates[j].param_index];
                    let u = match self.gates[j].kind {
                        GateKind::Rz => gates::rz(theta),
                        _ => gates::ry(theta),
                    };
                    m = u * m;
                    j += 1;
                }
                kernels::one_qubit(amps, q, &gates::to_array2(&m));
                i = j;
            } else {
                apply_gate(amps, g, params[g.param_index]);
                i += 1;
            }
        }
        Ok(())
    }

    /// `U(θ)|0…0⟩`.
    pub fn prepare(&self, params: &[f64]) -> Result<StateVector> {
        let mut s = StateVector::zero(self.n_qubits)?;
        self.run(params, &mut s)?;
        Ok(s)
    }

    /// Number of two-qubit gates.
    pub fn two_qubit_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind.arity() == 2).count()
    }

    /// Parameter of the `R_Y` acting on `qubit` in the first `R₃` layer.
    pub fn first_layer_ry(&self, qubit: usize) -> Option<usize> {
        (qubit < self.n_qubits).then(|| 3 * qubit + 1)
    }

    /// Parameters of the first `R_Z` of every `R₃` in the first layer.
    pub fn first_rz_sublayer(&self) -> Vec<usize> {
        (0..self.n_qubits).map(|q| 3 * q).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Applies `exp(−iθG)` for the gate's generator `G`; CZ and CX use
/// `G = −|11⟩⟨11|` and `G = −|1⟩⟨1|⊗|−⟩⟨−|`.
pub(crate) fn apply_gate(amps: &mut [C64], g: &GateInstr, theta: f64) {
    match g.kind {
        GateKind::Rz => {
            let d0 = C64::from_polar(1.0, -theta / 2.0);
            kernels::diagonal_one(amps, g.qubits[0], d0, d0.conj())
        }
        GateKind::Ry => kernels::one_qubit(amps, g.qubits[0], &gates::to_array2(&gates::ry(theta))),
        GateKind::Cz => kernels::phase_on_mask(
            amps,
            (1 << g.qubits[0]) | (1 << g.qubits[1]),
            C64::from_polar(1.0, theta),
        ),
        GateKind::Cx => kernels::cx_theta(amps, g.qubits[0], g.qubits[1], theta),
        GateKind::Rxx => kernels::rxx(amps, g.qubits[0], g.qubits[1], theta),
        GateKind::Ryy => kernels::ryy(amps, g.qubits[0], g.qubits[1], theta),
        GateKind::Rzz => kernels::rzz(amps, g.qubits[0], g.qubits[1], theta),
    }
}

/// `⟨l|G|r⟩` for the generator `G` of the gate (see [`apply_gate`]).
pub(crate) fn generator_overlap(l: &[C64], r: &[C64], g: &GateInstr) -> C64 {
    let bit = |q: usize| 1usize << q;
    match g.kind {
        GateKind::Rz => {
            let m = bit(g.qubits[0]);
            let s: C64 = l
                .iter()
                .zip(r)
                .enumerate()
                .map(|(i, (a, b))| if i & m == 0 { a.conj() * b } else { -(a.conj() * b) })
                .sum();
            s * 0.5
        }
        GateKind::Ry => {
            // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩
            let m = bit(g.qubits[0]);
            let mut s = C64::new(0.0, 0.0);
            kernels::for_each_clear(l.len(), m, |i| {
                let j = i | m;
                s += l[j].conj() * r[i] - l[i].conj() * r[j];
            });
            s * C64::new(0.0, 0.5)
        }
        GateKind::Cz => {
            let m = bit(g.qubits[0]) | bit(g.qubits[1]);
            let mut s = C64::new(0.0, 0.0);
            kernels::for_each_clear(l.len(), m, |i| {
                let j = i | m;
                s += l[j].conj() * r[j];
            });
            -s
        }
        GateKind::Cx => {
            let cm = bit(g.qubits[0]);
            let tm = bit(g.qubits[1]);
            let mut s = C64::new(0.0, 0.0);
            kernels::for_each_clear(l.len(), cm | tm, |i| {
                let i0 = i | cm;
                let i1 = i0 | tm;
                // |−⟩⟨−| = (I − X)/2
                let d = (r[i0] - r[i1]) * 0.5;
                s += l[i0].conj() * d - l[i1].conj() * d;
            });
            -s
        }
        GateKind::Rxx | GateKind::Ryy => {
            let am = bit(g.qubits[0]);
            let bm = bit(g.qubits[1]);
            let flip = am | bm;
            let yy = g.kind == GateKind::Ryy;
            let s: C64 = l
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let sign = if yy && ((i & am == 0) == (i & bm == 0)) { -1.0 } else { 1.0 };
                    a.conj() * r[i ^ flip] * sign
                })
                .sum();
            s * 0.5
        }
        GateKind::Rzz => {
            let am = bit(g.qubits[0]);
            let bm = bit(g.qubits[1]);
            let s: C64 = l
                .iter()
                .zip(r)
                .enumerate()
                .map(|(i, (a, b))| {
                    let v = a.conj() * b;
                    if (i & am == 0) == (i & bm == 0) { v } else { -v }
                })
                .sum();
            s * 0.5
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_chain, build_square, build_toric_edge};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gz_examples() {
        let c = build_gz(&build_chain(4).unwrap(), 1).unwrap();
        assert_eq!(c.gates.iter().filter(|g| g.kind.arity() == 1).count(), 12);
        assert_eq!(c.two_qubit_gate_count(), 3);
        assert_eq!((c.param_count, c.global_gate_count), (15, Some(1)));

        let t = build_gz(&build_toric_edge(2, 2).unwrap(), 1).unwrap();
        assert_eq!(t.param_count, 52);
        assert_eq!(build_gz(&build_chain(5).unwrap(), 4).unwrap().global_gate_count, Some(4));
        assert!(matches!(build_gz(&build_chain(4).unwrap(), 0), Err(Error::Argument(_))));
    }

    #[test]
    fn gzx_examples() {
        let toric = build_toric_edge(2, 2).unwrap();
        assert_eq!(build_gzx(&toric, 1).unwrap().param_count, 68);
        assert_eq!(build_gzx(&build_chain(4).unwrap(), 2).unwrap().param_count, 36);
        assert_eq!(build_gzx(&toric, 4).unwrap().global_gate_count, Some(8));
        // the CX layer reuses link order with the first endpoint as control
        let c = build_gzx(&build_chain(3).unwrap(), 1).unwrap();
        let cx: Vec<_> = c.gates.iter().filter(|g| g.kind == GateKind::Cx).map(|g| g.qubits.clone()).collect();
        assert_eq!(cx, vec![vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn gzxh_examples() {
        let c = build_gzxh(&build_chain(4).unwrap(), 1).unwrap();
        let two: Vec<_> = c
            .gates
            .iter()
            .filter(|g| g.kind.arity() == 2)
            .map(|g| (g.kind, g.qubits.clone()))
            .collect();
        assert_eq!(
            two,
            vec![(GateKind::Cz, vec![0, 1]), (GateKind::Cz, vec![2, 3]), (GateKind::Cx, vec![1, 2])]
        );
        assert_eq!(c.param_count, 15);

        let t = build_gzxh(&build_toric_edge(2, 2).unwrap(), 1).unwrap();
        let cz = t.gates.iter().filter(|g| g.kind == GateKind::Cz).count();
        let cx = t.gates.iter().filter(|g| g.kind == GateKind::Cx).count();
        assert_eq!((cz, cx, t.param_count), (8, 8, 52));
    }

    #[test]
    fn cartan_examples() {
        assert_eq!(build_cartan(&build_toric_edge(2, 2).unwrap(), 1).unwrap().param_count, 84);
        let c = build_cartan(&build_chain(2).unwrap(), 1).unwrap();
        assert_eq!(c.param_count, 9);
        assert_eq!(c.global_gate_count, None);

        // zero two-qubit angles leave only the single-qubit layer
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lattice = build_chain(3).unwrap();
        let circuit = build_cartan(&lattice, 1).unwrap();
        let mut params: Vec<f64> = (0..circuit.param_count).map(|_| rng.gen_range(0.0..6.0)).collect();
        for g in &circuit.gates {
            if g.kind.arity() == 2 {
                params[g.param_index] = 0.0;
            }
        }
        let full = circuit.prepare(&params).unwrap();
        let mut local = StateVector::zero(3).unwrap();
        for q in 0..3 {
            local
                .apply_one_qubit(q, &gates::r3(params[3 * q], params[3 * q + 1], params[3 * q + 2]))
                .unwrap();
        }
        assert!(full.fidelity(&local).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn all_variant_examples() {
        let one = build_square(2, 2).unwrap();
        assert_eq!(all_to_all_plaquette_links(&one).unwrap().len(), 6);
        let two = build_square(2, 3).unwrap();
        assert_eq!(all_to_all_plaquette_links(&two).unwrap().len(), 11);
        let c = build_all_variant(&two, 2, AnsatzKind::Gzx).unwrap();
        assert_eq!(c.param_count, 2 * (3 * 6 + 2 * 11));
        assert_eq!(c.connectivity, Connectivity::All);
        assert!(build_all_variant(&build_chain(4).unwrap(), 1, AnsatzKind::Gz).is_err());
        // 'Neighbor' is the plain square construction
        let n = build_with(&two, AnsatzKind::Gz, Connectivity::Neighbor, 1).unwrap();
        assert_eq!(n, build_gz(&two, 1).unwrap());
    }

    #[test]
    fn parameter_counts_hold_exhaustively() {
        let mut lattices = Vec::new();
        for n in 2..=16 {
            lattices.push(build_chain(n).unwrap());
        }
        for (r, c) in [(2, 2), (2, 3), (3, 3), (2, 4), (3, 4), (4, 4)] {
            lattices.push(build_square(r, c).unwrap());
        }
        for (r, c) in [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3)] {
            lattices.push(build_toric_edge(r, c).unwrap());
        }
        for lat in &lattices {
            let (n, m) = (lat.n_sites, lat.link_count());
            for k in 1..=6 {
                for kind in AnsatzKind::ALL {
                    let c = build(lat, kind, k).unwrap();
                    let per_layer = match kind {
                        AnsatzKind::Gz | AnsatzKind::GzxH => 3 * n + m,
                        AnsatzKind::Gzx => 3 * n + 2 * m,
                        AnsatzKind::Cartan => 3 * n + 3 * m,
                    };
                    assert_eq!(c.param_count, k * per_layer);
                    let mut used = vec![0; c.param_count];
                    for g in &c.gates {
                        used[g.param_index] += 1;
                        assert_eq!(g.qubits.len(), g.kind.arity());
                        if g.qubits.len() == 2 {
                            assert_ne!(g.qubits[0], g.qubits[1]);
                        }
                    }
                    assert!(used.iter().all(|&u| u == 1));
                    assert_eq!(c.layer_boundaries.len(), k);
                    assert_eq!(c.layer_boundaries.last().unwrap().1, c.gates.len());
                    if kind == AnsatzKind::GzxH {
                        let gz = build(lat, AnsatzKind::Gz, k).unwrap();
                        assert_eq!(c.two_qubit_gate_count(), gz.two_qubit_gate_count());
                    }
                }
            }
        }
    }

    #[test]
    fn entangling_layer_order_does_not_matter() {
        // Within one CZ (or disjoint-pair CX) layer, gate order is irrelevant.
        let lattice = build_toric_edge(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let state = StateVector::haar_random(12, &mut rng).unwrap();
        let circuit = build_gzx(&lattice, 1).unwrap();
        let params: Vec<f64> = (0..circuit.param_count).map(|_| rng.gen_range(0.0..6.3)).collect();
        let cz: Vec<&GateInstr> = circuit.gates.iter().filter(|g| g.kind == GateKind::Cz).collect();

        let run = |order: &[&GateInstr]| {
            let mut s = state.clone();
            for g in order {
                apply_gate(s.amplitudes_mut(), g, params[g.param_index]);
            }
            s
        };
        let forward = run(&cz);
        let mut shuffled = cz.clone();
        shuffled.reverse();
        shuffled.swap(1, 5);
        let backward = run(&shuffled);
        let diff = forward
            .amplitudes()
            .iter()
            .zip(backward.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-12);

        // CX gates on disjoint pairs (one per plaquette) commute too.
        let cx: Vec<&GateInstr> = circuit
            .gates
            .iter()
            .filter(|g| g.kind == GateKind::Cx)
            .step_by(4)
            .collect();
        let mut rev = cx.clone();
        rev.reverse();
        let a = run(&cx);
        let b = run(&rev);
        assert!(a.amplitudes().iter().zip(b.amplitudes()).all(|(x, y)| (x - y).norm() <= 1e-12));
    }

    #[test]
    fn fused_run_matches_gate_by_gate() {
        let lattice = build_square(2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in AnsatzKind::ALL {
            let c = build(&lattice, kind, 2).unwrap();
            let params: Vec<f64> = (0..c.param_count).map(|_| rng.gen_range(0.0..6.3)).collect();
            let fused = c.prepare(&params).unwrap();
            let mut plain = StateVector::zero(6).unwrap();
            for g in &c.gates {
                apply_gate(plain.amplitudes_mut(), g, params[g.param_index]);
            }
            assert!((fused.inner_product(&plain).unwrap().norm() - 1.0).abs() < 1e-12);
            let diff = fused
                .amplitudes()
                .iter()
                .zip(plain.amplitudes())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(diff < 1e-12);
        }
    }

    #[test]
    fn generator_overlaps_match_finite_differences() {
        // d/dθ exp(−iθG)|ψ⟩ at θ=0 equals −iG|ψ⟩.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let l = StateVector::haar_random(3, &mut rng).unwrap();
        let r = StateVector::haar_random(3, &mut rng).unwrap();
        let gates_under_test = [
            GateInstr { kind: GateKind::Rz, qubits: vec![1], param_index: 0 },
            GateInstr { kind: GateKind::Ry, qubits: vec![2], param_index: 0 },
            GateInstr { kind: GateKind::Cz, qubits: vec![0, 2], param_index: 0 },
            GateInstr { kind: GateKind::Cx, qubits: vec![2, 0], param_index: 0 },
            GateInstr { kind: GateKind::Rxx, qubits: vec![0, 1], param_index: 0 },
            GateInstr { kind: GateKind::Ryy, qubits: vec![1, 2], param_index: 0 },
            GateInstr { kind: GateKind::Rzz, qubits: vec![2, 0], param_index: 0 },
        ];
        let eps = 1e-6;
        for g in &gates_under_test {
            let mut plus = r.clone();
            apply_gate(plus.amplitudes_mut(), g, eps);
            let mut minus = r.clone();
            apply_gate(minus.amplitudes_mut(), g, -eps);
            let deriv = (l.inner_product(&plus).unwrap() - l.inner_product(&minus).unwrap()) / (2.0 * eps);
            let expected = C64::new(0.0, -1.0) * generator_overlap(l.amplitudes(), r.amplitudes(), g);
            assert!((deriv - expected).norm() < 1e-8, "{:?}", g.kind);
        }
    }
}
