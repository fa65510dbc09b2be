//! Lattice geometry and two-qubit gate ordering.
//!
//! A [`Lattice`] carries an ordered link list: the order in which the
//! two-qubit gates of one entangling layer are applied. Ordinals start at 1.
//!
//! Toric-edge lattices place qubits on the edges of a planar grid of
//! `(p_rows+1)×(p_cols+1)` vertices. Edges are numbered row by row: the
//! `p_cols` horizontal edges of vertex row `r`, then the `p_cols+1` vertical
//! edges hanging below it. Coordinates are doubled, so a horizontal edge
//! between vertices `(r,c)` and `(r,c+1)` sits at `(2r, 2c+1)` and a vertical
//! edge between `(r,c)` and `(r+1,c)` sits at `(2r+1, 2c)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    Chain,
    Square,
    ToricEdge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub a: usize,
    pub b: usize,
    pub ordinal: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    pub kind: LatticeKind,
    /// Chain: `(1, n)`. Square: `(rows, cols)` of sites. Toric: plaquette grid.
    pub dims: (usize, usize),
    pub n_sites: usize,
    pub coords: Vec<(i64, i64)>,
    pub links: Vec<Link>,
    /// Toric: edge qubits incident to each vertex (row-major vertices).
    #[serde(default)]
    pub vertices: Vec<Vec<usize>>,
    /// Toric: the 4 boundary edges of each plaquette as
    /// `[top, right, bottom, left]`. Square: the 4 corner sites as
    /// `[top-left, top-right, bottom-right, bottom-left]`.
    #[serde(default)]
    pub plaquettes: Vec<Vec<usize>>,
}

fn number_links(pairs: impl IntoIterator<Item = (usize, usize)>) -> Vec<Link> {
    pairs
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| Link { a, b, ordinal: i + 1 })
        .collect()
}

/// Open chain `0–1–…–(n−1)`.
pub fn build_chain(n: usize) -> Result<Lattice> {
    if n < 2 {
        return Err(Error::Size(format!("chain needs at least 2 sites, got {n}")));
    }
    Ok(Lattice {
        kind: LatticeKind::Chain,
        dims: (1, n),
        n_sites: n,
        coords: (0..n as i64).map(|i| (0, i)).collect(),
        links: number_links((0..n - 1).map(|i| (i, i + 1))),
        vertices: Vec::new(),
        plaquettes: Vec::new(),
    })
}

/// Open `rows × cols` square lattice; site `(r, c)` has index `r·cols + c`.
///
/// Links sweep sites row by row, left to right, emitting the bottom link
/// `(r,c)–(r+1,c)` and then the right link `(r,c)–(r,c+1)` at each site.
pub fn build_square(rows: usize, cols: usize) -> Result<Lattice> {
    if rows < 2 || cols < 2 {
        return Err(Error::Size(format!(
            "square lattice needs at least 2×2 sites, got {rows}×{cols}"
        )));
    }
    let site = |r: usize, c: usize| r * cols + c;
    let mut pairs = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if r + 1 < rows {
                pairs.push((site(r, c), site(r + 1, c)));
            }
            if c + 1 < cols {
                pairs.push((site(r, c), site(r, c + 1)));
            }
        }
    }
    let mut plaquettes = Vec::new();
    for r in 0..rows - 1 {
        for c in 0..cols - 1 {
            plaquettes.push(vec![
                site(r, c),
                site(r, c + 1),
                site(r + 1, c + 1),
                site(r + 1, c),
            ]);
        }
    }
    Ok(Lattice {
        kind: LatticeKind::Square,
        dims: (rows, cols),
        n_sites: rows * cols,
        coords: (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (r as i64, c as i64)))
            .collect(),
        links: number_links(pairs),
        vertices: Vec::new(),
        plaquettes,
    })
}

/// Edge-qubit lattice of a `p_rows × p_cols` plaquette grid.
///
/// Each plaquette contributes the rhombus of links
/// top→right→bottom→left→top; plaquettes are visited row by row.
pub fn build_toric_edge(p_rows: usize, p_cols: usize) -> Result<Lattice> {
    if p_rows < 1 || p_cols < 1 {
        return Err(Error::Size(format!(
            "toric lattice needs at least 1×1 plaquettes, got {p_rows}×{p_cols}"
        )));
    }
    let stride = 2 * p_cols + 1;
    let horizontal = |r: usize, c: usize| r * stride + c;
    let vertical = |r: usize, c: usize| r * stride + p_cols + c;
    let n = (p_rows + 1) * p_cols + p_rows * (p_cols + 1);

    let mut coords = vec![(0, 0); n];
    for r in 0..=p_rows {
        for c in 0..p_cols {
            coords[horizontal(r, c)] = (2 * r as i64, 2 * c as i64 + 1);
        }
    }
    for r in 0..p_rows {
        for c in 0..=p_cols {
            coords[vertical(r, c)] = (2 * r as i64 + 1, 2 * c as i64);
        }
    }

    let mut vertices = Vec::with_capacity((p_rows + 1) * (p_cols + 1));
    for r in 0..=p_rows {
        for c in 0..=p_cols {
            let mut edges = Vec::with_capacity(4);
            if r > 0 {
                edges.push(vertical(r - 1, c));
            }
            if c > 0 {
                edges.push(horizontal(r, c - 1));
            }
            if c < p_cols {
                edges.push(horizontal(r, c));
            }
            if r < p_rows {
                edges.push(vertical(r, c));
            }
            edges.sort_unstable();
            vertices.push(edges);
        }
    }

    let mut plaquettes = Vec::with_capacity(p_rows * p_cols);
    let mut pairs = Vec::with_capacity(4 * p_rows * p_cols);
    for r in 0..p_rows {
        for c in 0..p_cols {
            let top = horizontal(r, c);
            let right = vertical(r, c + 1);
            let bottom = horizontal(r + 1, c);
            let left = vertical(r, c);
            pairs.extend([(top, right), (right, bottom), (bottom, left), (left, top)]);
            plaquettes.push(vec![top, right, bottom, left]);
        }
    }

    Ok(Lattice {
        kind: LatticeKind::ToricEdge,
        dims: (p_rows, p_cols),
        n_sites: n,
        coords,
        links: number_links(pairs),
        vertices,
        plaquettes,
    })
}

/// Splits links into the odd-ordinal and even-ordinal groups, each in
/// emission order. On a chain the odd group is exactly the pairs `(k, k+1)`
/// with `k` even.
pub fn link_parity(lattice: &Lattice) -> (Vec<Link>, Vec<Link>) {
    lattice.links.iter().partition(|l| l.ordinal % 2 == 1)
}

impl Lattice {
    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Largest number of links touching a single site.
    pub fn max_site_degree(&self) -> usize {
        let mut deg = vec![0usize; self.n_sites];
        for l in &self.links {
            deg[l.a] += 1;
            deg[l.b] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }

    /// Index of the vertex `(r, c)` in [`Lattice::vertices`] (toric only).
    pub fn vertex_index(&self, r: usize, c: usize) -> Option<usize> {
        let (pr, pc) = self.dims;
        (self.kind == LatticeKind::ToricEdge && r <= pr && c <= pc).then(|| r * (pc + 1) + c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
