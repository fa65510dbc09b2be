//! Pauli-sum Hamiltonians and their expectation values.

mod ed;

pub use ed::{ground_energy, lanczos, GroundState, LanczosOptions, Method};

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeKind};
use crate::sim::StateVector;

/// A real-weighted tensor product of Pauli letters, stored as bit masks.
///
/// Qubit `q` carries `X` if only bit `q` of `x_mask` is set, `Z` if only
/// bit `q` of `z_mask` is set, and `Y` if both are.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliString {
    pub coefficient: f64,
    x_mask: u64,
    z_mask: u64,
    n_qubits: usize,
}

impl PauliString {
    /// Parses letters where character `q` is the Pauli on qubit `q`.
    pub fn from_letters(coefficient: f64, letters: &str) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(Error::Validation("non-finite Pauli coefficient".into()));
        }
        let n = letters.chars().count();
        if n == 0 || n > 64 {
            return Err(Error::Size(format!("Pauli string of length {n}")));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (q, ch) in letters.chars().enumerate() {
            match ch.to_ascii_uppercase() {
                'I' => {}
                'X' => x |= 1 << q,
                'Y' => {
                    x |= 1 << q;
                    z |= 1 << q;
                }
                'Z' => z |= 1 << q,
                other => return Err(Error::Format(format!("unknown Pauli letter '{other}'"))),
            }
        }
        Ok(Self {
            coefficient,
            x_mask: x,
            z_mask: z,
            n_qubits: n,
        })
    }

    /// `coefficient · Π P_q` over the listed `(qubit, letter)` factors.
    pub fn from_factors(n: usize, coefficient: f64, factors: &[(usize, char)]) -> Result<Self> {
        let mut letters = vec!['I'; n];
        for &(q, p) in factors {
            if q >= n {
                return Err(Error::Index(format!("qubit {q} out of range for {n} qubits")));
            }
            letters[q] = p;
        }
        Self::from_letters(coefficient, &letters.into_iter().collect::<String>())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn letters(&self) -> String {
        (0..self.n_qubits)
            .map(|q| match ((self.x_mask >> q) & 1, (self.z_mask >> q) & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (1, 1) => 'Y',
                _ => 'Z',
            })
            .collect()
    }

    /// `i^{#Y}` for the letter string.
    fn y_phase(&self) -> C64 {
        match (self.x_mask & self.z_mask).count_ones() % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    /// Whether the two strings commute.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = (self.x_mask & other.z_mask).count_ones() + (self.z_mask & other.x_mask).count_ones();
        anti % 2 == 0
    }

    /// `⟨ψ|P|ψ⟩` without the coefficient.
    fn bare_expectation(&self, amps: &[C64]) -> C64 {
        // P|i⟩ = i^{#Y} (−1)^{|i ∧ z|} |i ⊕ x⟩
        let x = self.x_mask as usize;
        let z = self.z_mask as usize;
        let s: C64 = amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let v = amps[i ^ x].conj() * a;
                if (i & z).count_ones() % 2 == 0 { v } else { -v }
            })
            .sum();
        s * self.y_phase()
    }

    /// `out += coefficient · P ψ`.
    fn accumulate(&self, amps: &[C64], out: &mut [C64]) {
        let x = self.x_mask as usize;
        let z = self.z_mask as usize;
        let c = self.y_phase() * self.coefficient;
        for (i, a) in amps.iter().enumerate() {
            let v = c * a;
            out[i ^ x] += if (i & z).count_ones() % 2 == 0 { v } else { -v };
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+} {}", self.coefficient, self.letters())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct TermRecord {
    coefficient: f64,
    letters: String,
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TermRecord {
            coefficient: self.coefficient,
            letters: self.letters(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let t = TermRecord::deserialize(d)?;
        PauliString::from_letters(t.coefficient, &t.letters).map_err(serde::de::Error::custom)
    }
}

/// A Hermitian operator `Σ_t c_t P_t` with real `c_t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    pub n_qubits: usize,
    pub terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new(n_qubits: usize, terms: Vec<PauliString>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.n_qubits != n_qubits) {
            return Err(Error::Shape(format!(
                "term on {} qubits in a {n_qubits}-qubit sum",
                t.n_qubits
            )));
        }
        Ok(Self { n_qubits, terms })
    }

    fn check_state(&self, state: &StateVector) -> Result<()> {
        if state.qubit_count() != self.n_qubits {
            return Err(Error::Shape(format!(
                "{}-qubit Hamiltonian on a {}-qubit state",
                self.n_qubits,
                state.qubit_count()
            )));
        }
        Ok(())
    }

    /// `⟨ψ|H|ψ⟩`.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        self.check_state(state)?;
        let total: C64 = self
            .terms
            .iter()
            .map(|t| t.bare_expectation(state.amplitudes()) * t.coefficient)
            .sum();
        if total.im.abs() > 1e-9 {
            return Err(Error::Numerical(format!(
                "expectation has imaginary part {:.3e}",
                total.im
            )));
        }
        Ok(total.re)
    }

    /// `H|ψ⟩` as raw amplitudes (not normalized).
    pub fn apply(&self, amps: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); amps.len()];
        self.apply_into(amps, &mut out);
        out
    }

    pub(crate) fn apply_into(&self, amps: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        for t in &self.terms {
            t.accumulate(amps, out);
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Free-function form of [`PauliSum::expectation`].
pub fn expectation(state: &StateVector, h: &PauliSum) -> Result<f64> {
    h.expectation(state)
}

/// `H = −(1−h)[Σ_v A_v + Σ_p B_p] − h Σ_j Z_j` on a toric-edge lattice,
/// with X-star vertex terms `A_v` and Z-plaquette terms `B_p`.
///
/// Terms are ordered: vertices, plaquettes, fields. Zero-weight groups are
/// still listed, so the term count is always `V + P + N`.
pub fn toric_code_hamiltonian(lattice: &Lattice, h: f64) -> Result<PauliSum> {
    if lattice.kind != LatticeKind::ToricEdge {
        return Err(Error::Argument("toric code needs a toric-edge lattice".into()));
    }
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::Argument(format!("field h = {h} outside [0, 1]")));
    }
    let n = lattice.n_sites;
    let mut terms = Vec::with_capacity(lattice.vertices.len() + lattice.plaquettes.len() + n);
    for v in &lattice.vertices {
        let f: Vec<(usize, char)> = v.iter().map(|&q| (q, 'X')).collect();
        terms.push(PauliString::from_factors(n, -(1.0 - h), &f)?);
    }
    for p in &lattice.plaquettes {
        let f: Vec<(usize, char)> = p.iter().map(|&q| (q, 'Z')).collect();
        terms.push(PauliString::from_factors(n, -(1.0 - h), &f)?);
    }
    for q in 0..n {
        terms.push(PauliString::from_factors(n, -h, &[(q, 'Z')])?);
    }
    PauliSum::new(n, terms)
}

/// J1-J2 Heisenberg model on an open `rows × cols` square lattice with
/// `S = σ/2`: each bond contributes `(XX + YY + ZZ)/4`, scaled by `j2` for
/// plaquette diagonals.
pub fn heisenberg_j1j2(rows: usize, cols: usize, j2: f64) -> Result<PauliSum> {
    let lattice = crate::lattice::build_square(rows, cols)?;
    let n = lattice.n_sites;
    let mut terms = Vec::new();
    let mut bond = |a: usize, b: usize, w: f64| -> Result<()> {
        for p in ['X', 'Y', 'Z'] {
            terms.push(PauliString::from_factors(n, 0.25 * w, &[(a, p), (b, p)])?);
        }
        Ok(())
    };
    for l in &lattice.links {
        bond(l.a, l.b, 1.0)?;
    }
    if j2 != 0.0 {
        for p in &lattice.plaquettes {
            bond(p[0], p[2], j2)?;
            bond(p[1], p[3], j2)?;
        }
    }
    PauliSum::new(n, terms)
}

/// `Z` on one site.
pub fn z_probe(n: usize, site: usize) -> Result<PauliSum> {
    if site >= n {
        return Err(Error::Index(format!("site {site} out of range for {n} qubits")));
    }
    PauliSum::new(n, vec![PauliString::from_factors(n, 1.0, &[(site, 'Z')])?])
}
