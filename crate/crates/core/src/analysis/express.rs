//! Expressibility of state ensembles: moment distances to the Haar
//! moments, fidelity-distribution KL divergence and frame potentials.

use std::borrow::Cow;
use std::ops::Range;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::CircuitSpec;
use crate::error::{Error, Result};
use crate::sim::{dot, StateVector};
use crate::vqe::InitSpec;

/// Default memory budget for holding ensemble states at once (1 GiB).
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 30;

/// KL value reported for degenerate fidelity distributions.
pub const KL_CAP: f64 = 100.0;

/// An indexable ensemble of pure states that may be generated on demand.
pub trait StateSource: Sync {
    fn len(&self) -> usize;
    fn n_qubits(&self) -> usize;
    fn block(&self, range: Range<usize>) -> Result<Cow<'_, [StateVector]>>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn dim(&self) -> usize {
        1 << self.n_qubits()
    }
}

impl StateSource for Vec<StateVector> {
    fn len(&self) -> usize {
        Vec::len(self)
    }
    fn n_qubits(&self) -> usize {
        self.first().map_or(0, |s| s.qubit_count())
    }
    fn block(&self, range: Range<usize>) -> Result<Cow<'_, [StateVector]>> {
        Ok(Cow::Borrowed(&self[range]))
    }
}

/// `U(θ_i)|0…0⟩` for i.i.d. parameter draws; state `i` only depends on
/// `(seed, i)`, so any subset can be regenerated.
#[derive(Clone, Debug)]
pub struct CircuitEnsemble {
    pub circuit: CircuitSpec,
    pub count: usize,
    pub seed: u64,
    pub init: InitSpec,
    /// Use these parameters for every sample instead of random draws.
    pub fixed_params: Option<Vec<f64>>,
}

impl CircuitEnsemble {
    pub fn new(circuit: CircuitSpec, count: usize, seed: u64) -> Self {
        Self {
            circuit,
            count,
            seed,
            init: InitSpec::default(),
            fixed_params: None,
        }
    }

    pub fn params(&self, i: usize) -> Vec<f64> {
        match &self.fixed_params {
            Some(p) => p.clone(),
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(i as u64);
                self.init.sample(self.circuit.param_count, &mut rng)
            }
        }
    }
}

impl StateSource for CircuitEnsemble {
    fn len(&self) -> usize {
        self.count
    }
    fn n_qubits(&self) -> usize {
        self.circuit.n_qubits
    }
    fn block(&self, range: Range<usize>) -> Result<Cow<'_, [StateVector]>> {
        let states = range
            .into_par_iter()
            .map(|i| self.circuit.prepare(&self.params(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Cow::Owned(states))
    }
}

/// Haar-random states, one RNG stream per sample.
#[derive(Clone, Copy, Debug)]
pub struct HaarEnsemble {
    pub n_qubits: usize,
    pub count: usize,
    pub seed: u64,
}

impl StateSource for HaarEnsemble {
    fn len(&self) -> usize {
        self.count
    }
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }
    fn block(&self, range: Range<usize>) -> Result<Cow<'_, [StateVector]>> {
        let states = range
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(i as u64);
                StateVector::haar_random(self.n_qubits, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Cow::Owned(states))
    }
}

/// Materializes `S` circuit states from parameters drawn with `seed`.
pub fn sample_states(circuit: &CircuitSpec, count: usize, seed: u64) -> Result<Vec<StateVector>> {
    if count < 2 {
        return Err(Error::Argument(format!("need at least 2 samples, got {count}")));
    }
    let e = CircuitEnsemble::new(circuit.clone(), count, seed);
    Ok(e.block(0..count)?.into_owned())
}

fn block_len(source: &dyn StateSource, budget: usize) -> usize {
    let per_state = source.dim() * std::mem::size_of::<C64>();
    (budget / per_state).clamp(1, source.len().max(1))
}

/// Gram matrix `G_jk = ⟨ψ_j|ψ_k⟩^t / S`, filled block by block so at most
/// two blocks of states are resident.
fn gram(source: &dyn StateSource, t: u32, budget: usize) -> Result<DMatrix<C64>> {
    let s = source.len();
    let b = (block_len(source, budget) / 2).max(1);
    let mut g = DMatrix::<C64>::zeros(s, s);
    let scale = 1.0 / s as f64;
    for i0 in (0..s).step_by(b) {
        let i1 = (i0 + b).min(s);
        let left = source.block(i0..i1)?;
        for j0 in (i0..s).step_by(b) {
            let j1 = (j0 + b).min(s);
            let right = if j0 == i0 { Cow::Borrowed(&left[..]) } else { source.block(j0..j1)? };
            let rows: Vec<Vec<C64>> = (i0..i1)
                .into_par_iter()
                .map(|i| {
                    (j0.max(i)..j1)
                        .map(|j| dot(left[i - i0].amplitudes(), right[j - j0].amplitudes()).powu(t) * scale)
                        .collect()
                })
                .collect();
            for (i, row) in (i0..i1).zip(rows) {
                for (j, v) in (j0.max(i)..j1).zip(row) {
                    g[(i, j)] = v;
                    g[(j, i)] = v.conj();
                }
            }
        }
    }
    Ok(g)
}

/// Haar moment constant `c` and the dimension of its support.
fn haar_moment(d: usize, t: u32) -> (f64, f64) {
    let d = d as f64;
    match t {
        1 => (1.0 / d, d),
        _ => (2.0 / (d * (d + 1.0)), d * (d + 1.0) / 2.0),
    }
}

/// `Σ|λ_i − c| + (D − r)c` over the `r = min(len, D)` largest eigenvalues;
/// the empirical moment lives inside the Haar moment's support.
///
/// Evaluated as `1 − Σ_rest λ + (D − 2r)c + 2Σ_{λ<c}(c − λ)` using
/// `tr G = 1` for normalized states. When `S < D` and no eigenvalue falls
/// below `c` this is exactly `1 + (D − 2S)c`, whatever the ensemble.
fn trace_distance_from_spectrum(mut ev: Vec<f64>, c: f64, support: f64) -> f64 {
    ev.sort_by(|a, b| b.total_cmp(a));
    let r = (ev.len() as f64).min(support) as usize;
    let rest: f64 = ev[r..].iter().sum();
    let below: f64 = ev[..r].iter().filter(|&&l| l < c).map(|l| c - l).sum();
    1.0 - rest + (support - 2.0 * r as f64) * c + 2.0 * below
}

fn check_moment(source: &dyn StateSource, t: u32) -> Result<()> {
    if !(1..=2).contains(&t) {
        return Err(Error::Unsupported(format!("moment order t = {t}; only 1 and 2 are defined")));
    }
    if source.len() < 2 {
        return Err(Error::Argument("moment distance needs at least 2 states".into()));
    }
    Ok(())
}

/// Trace distance `‖(1/S)Σ(|ψ⟩⟨ψ|)^{⊗t} − Haar_t‖₁` via the Gram spectrum.
pub fn moment_distance(source: &dyn StateSource, t: u32) -> Result<f64> {
    moment_distance_with_budget(source, t, DEFAULT_MEMORY_BUDGET)
}

pub fn moment_distance_with_budget(source: &dyn StateSource, t: u32, budget: usize) -> Result<f64> {
    check_moment(source, t)?;
    let (c, support) = haar_moment(source.dim(), t);
    let ev = gram(source, t, budget)?.symmetric_eigenvalues();
    Ok(trace_distance_from_spectrum(ev.iter().copied().collect(), c, support))
}

/// The same distance from the explicit `d^t × d^t` moment operator. Only
/// for small registers (`d^t ≤ 1024`).
pub fn moment_distance_direct(source: &dyn StateSource, t: u32) -> Result<f64> {
    check_moment(source, t)?;
    let d = source.dim();
    let big = d.pow(t);
    if big > 1024 {
        return Err(Error::Size(format!("direct moment needs a {big}-dimensional operator")));
    }
    let s = source.len();
    let states = source.block(0..s)?;
    let mut m = DMatrix::<C64>::zeros(big, big);
    for psi in states.iter() {
        let a = psi.amplitudes();
        let v: Vec<C64> = if t == 1 {
            a.to_vec()
        } else {
            (0..big).map(|idx| a[idx / d] * a[idx % d]).collect()
        };
        for i in 0..big {
            for j in 0..big {
                m[(i, j)] += v[i] * v[j].conj() / s as f64;
            }
        }
    }
    let (c, _) = haar_moment(d, t);
    // Haar moment: c on the symmetric subspace; its projector is (1 + SWAP)/2
    for i in 0..big {
        if t == 1 {
            m[(i, i)] -= c;
        } else {
            let (x, y) = (i / d, i % d);
            let swapped = y * d + x;
            m[(i, i)] -= c * 0.5;
            m[(swapped, i)] -= c * 0.5;
        }
    }
    Ok(m.symmetric_eigenvalues().iter().map(|l| l.abs()).sum())
}

/// Fidelities `|⟨ψ_i|ψ_j⟩|²` for `S(S−1)/2` pairs, or for the cyclic
/// offsets `(i, i+o mod S)`, `o = 1..=m`, when that exceeds `pair_budget`.
pub fn pair_fidelities(source: &dyn StateSource, pair_budget: usize, budget: usize) -> Result<Vec<f64>> {
    let s = source.len();
    let all = s * (s - 1) / 2;
    if all <= pair_budget {
        let states = source.block(0..s)?;
        return Ok((0..s)
            .into_par_iter()
            .flat_map_iter(|i| {
                let states = &states;
                (i + 1..s).map(move |j| dot(states[i].amplitudes(), states[j].amplitudes()).norm_sqr())
            })
            .collect());
    }
    let offsets = (pair_budget / s).clamp(1, (s - 1) / 2);
    let b = block_len(source, budget).saturating_sub(offsets).max(1);
    let mut out = Vec::with_capacity(s * offsets);
    for i0 in (0..s).step_by(b) {
        let i1 = (i0 + b).min(s);
        // the block plus the next `offsets` states, wrapping around
        let head = source.block(i0..(i1 + offsets).min(s))?;
        let wrap = (i1 + offsets).saturating_sub(s);
        let tail = if wrap > 0 { source.block(0..wrap)? } else { Cow::Owned(Vec::new()) };
        let get = |k: usize| -> &StateVector {
            let off = k - i0;
            if off < head.len() {
                &head[off]
            } else {
                &tail[off - head.len()]
            }
        };
        let chunk: Vec<f64> = (i0..i1)
            .into_par_iter()
            .flat_map_iter(|i| (1..=offsets).map(move |o| dot(get(i).amplitudes(), get(i + o).amplitudes()).norm_sqr()))
            .collect();
        out.extend(chunk);
    }
    Ok(out)
}

/// Per-bin Porter-Thomas mass `(1−a)^{d−1} − (1−b)^{d−1}` as a logarithm.
pub fn porter_thomas_log_mass(d: usize, a: f64, b: f64) -> f64 {
    let e = (d - 1) as f64;
    let la = (1.0 - a).ln();
    let lb = (1.0 - b).ln();
    e * la + (-(e * (lb - la)).exp_m1()).ln()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KlResult {
    pub kl: f64,
    /// Every fidelity fell in a single bin that carries little Haar mass.
    pub degenerate: bool,
    pub pairs: usize,
    pub bins: usize,
    pub histogram: Vec<usize>,
}

/// KL divergence of the fidelity histogram from the Porter-Thomas law.
pub fn fidelity_kl(fidelities: &[f64], d: usize, bins: usize) -> Result<KlResult> {
    if bins < 10 {
        return Err(Error::Argument(format!("need at least 10 bins, got {bins}")));
    }
    if fidelities.is_empty() {
        return Err(Error::Argument("no fidelities to bin".into()));
    }
    let mut histogram = vec![0usize; bins];
    for &f in fidelities {
        let k = ((f.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
        histogram[k] += 1;
    }
    let total = fidelities.len() as f64;
    let mut kl = 0.0;
    for (k, &count) in histogram.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let p = count as f64 / total;
        let ln_q = porter_thomas_log_mass(d, k as f64 / bins as f64, (k + 1) as f64 / bins as f64);
        kl += p * (p.ln() - ln_q);
    }
    // one occupied bin is only degenerate where the Haar law puts little
    // mass; at large d nearly all Haar fidelities share the first bin
    let occupied: Vec<usize> = (0..bins).filter(|&k| histogram[k] > 0).collect();
    let degenerate = occupied.len() == 1 && {
        let k = occupied[0];
        porter_thomas_log_mass(d, k as f64 / bins as f64, (k + 1) as f64 / bins as f64).exp() < 0.5
    };
    if degenerate || !kl.is_finite() {
        kl = kl.min(KL_CAP);
    }
    Ok(KlResult {
        kl: kl.max(0.0),
        degenerate,
        pairs: fidelities.len(),
        bins,
        histogram,
    })
}

/// Frame potential over disjoint pairs `(2i, 2i+1)`: mean of `F^t` and its
/// standard error.
pub fn frame_potential(source: &dyn StateSource, t: u32) -> Result<(f64, f64)> {
    frame_potential_with_budget(source, t, DEFAULT_MEMORY_BUDGET)
}

pub fn frame_potential_with_budget(source: &dyn StateSource, t: u32, budget: usize) -> Result<(f64, f64)> {
    if !(1..=2).contains(&t) {
        return Err(Error::Unsupported(format!("frame potential order t = {t}")));
    }
    let f = disjoint_pair_fidelities(source, budget)?;
    Ok(frame_from_fidelities(&f, t))
}

fn disjoint_pair_fidelities(source: &dyn StateSource, budget: usize) -> Result<Vec<f64>> {
    let pairs = source.len() / 2;
    if pairs == 0 {
        return Err(Error::Argument("frame potential needs at least 2 states".into()));
    }
    let b = (block_len(source, budget) / 2).max(1);
    let mut out = Vec::with_capacity(pairs);
    for p0 in (0..pairs).step_by(b) {
        let p1 = (p0 + b).min(pairs);
        let states = source.block(2 * p0..2 * p1)?;
        out.extend(states.chunks(2).map(|c| dot(c[0].amplitudes(), c[1].amplitudes()).norm_sqr()));
    }
    Ok(out)
}

fn frame_from_fidelities(f: &[f64], t: u32) -> (f64, f64) {
    let x: Vec<f64> = f.iter().map(|v| v.powi(t as i32)).collect();
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Haar frame potential `t!(d−1)!/(d+t−1)!` for `t ∈ {1, 2}`.
pub fn haar_frame_potential(d: usize, t: u32) -> f64 {
    haar_moment(d, t).0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatsOptions {
    pub bins: usize,
    /// Pair budget for the KL fidelity sample.
    pub kl_pairs: usize,
    /// Leading states used for the `t = 2` Gram eigensolve.
    pub a2_samples: usize,
    /// Leading states used for `t = 1`.
    pub a1_samples: usize,
    pub memory_budget: usize,
    pub keep_fidelities: bool,
}

impl Default for StatsOptions {
    fn default() -> Self {
        Self {
            bins: 75,
            kl_pairs: 100_000,
            a2_samples: 2000,
            a1_samples: 10_000,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            keep_fidelities: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub sample_count: usize,
    pub d: usize,
    pub a1: f64,
    pub a1_samples: usize,
    pub a2: f64,
    pub a2_samples: usize,
    pub kl: f64,
    pub kl_degenerate: bool,
    pub kl_pairs: usize,
    pub histogram: Vec<usize>,
    pub f1: f64,
    pub f1_sem: f64,
    pub f2: f64,
    pub f2_sem: f64,
    pub frame_pairs: usize,
    pub haar_f1: f64,
    pub haar_f2: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fidelity_samples: Vec<f64>,
}

/// A prefix `0..n` of another source.
struct Prefix<'a> {
    inner: &'a dyn StateSource,
    n: usize,
}

impl StateSource for Prefix<'_> {
    fn len(&self) -> usize {
        self.n
    }
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }
    fn block(&self, range: Range<usize>) -> Result<Cow<'_, [StateVector]>> {
        self.inner.block(range)
    }
}

/// All expressibility statistics for one ensemble.
pub fn ensemble_stats(source: &dyn StateSource, opts: &StatsOptions) -> Result<EnsembleStats> {
    let s = source.len();
    if s < 100 {
        return Err(Error::Argument(format!("need at least 100 samples, got {s}")));
    }
    let d = source.dim();
    let a1_n = opts.a1_samples.clamp(2, s);
    let a2_n = opts.a2_samples.clamp(2, s);
    let a1 = moment_auto(&Prefix { inner: source, n: a1_n }, 1, opts.memory_budget)?;
    let a2 = moment_auto(&Prefix { inner: source, n: a2_n }, 2, opts.memory_budget)?;
    let fid = pair_fidelities(source, opts.kl_pairs, opts.memory_budget)?;
    let kl = fidelity_kl(&fid, d, opts.bins)?;
    let disjoint = disjoint_pair_fidelities(source, opts.memory_budget)?;
    let (f1, f1_sem) = frame_from_fidelities(&disjoint, 1);
    let (f2, f2_sem) = frame_from_fidelities(&disjoint, 2);
    Ok(EnsembleStats {
        sample_count: s,
        d,
        a1,
        a1_samples: a1_n,
        a2,
        a2_samples: a2_n,
        kl: kl.kl,
        kl_degenerate: kl.degenerate,
        kl_pairs: kl.pairs,
        histogram: kl.histogram,
        f1,
        f1_sem,
        f2,
        f2_sem,
        frame_pairs: disjoint.len(),
        haar_f1: haar_frame_potential(d, 1),
        haar_f2: haar_frame_potential(d, 2),
        fidelity_samples: if opts.keep_fidelities { fid } else { Vec::new() },
    })
}

/// `A^(t)` from the accumulated moment operator, streaming states. For
/// `t = 2` it is written in an orthonormal basis of the symmetric subspace,
/// which holds both moments, so the operator is `D × D` with
/// `D = d(d+1)/2`.
fn moment_in_support(source: &dyn StateSource, t: u32, budget: usize) -> Result<f64> {
    check_moment(source, t)?;
    let (s, d) = (source.len(), source.dim());
    let (c, support) = haar_moment(d, t);
    let dim = support as usize;
    let b = block_len(source, budget);
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    let mut v = vec![C64::new(0.0, 0.0); dim];
    for i0 in (0..s).step_by(b) {
        let states = source.block(i0..(i0 + b).min(s))?;
        for psi in states.iter() {
            let a = psi.amplitudes();
            if t == 1 {
                v.copy_from_slice(a);
            } else {
                // |ψ⟩|ψ⟩ on the basis |xx⟩ and (|xy⟩ + |yx⟩)/√2, x < y
                let mut idx = 0;
                for x in 0..d {
                    v[idx] = a[x] * a[x];
                    idx += 1;
                    for y in x + 1..d {
                        v[idx] = a[x] * a[y] * std::f64::consts::SQRT_2;
                        idx += 1;
                    }
                }
            }
            for j in 0..dim {
                let cj = v[j].conj();
                for i in 0..dim {
                    m[(i, j)] += v[i] * cj;
                }
            }
        }
    }
    m /= C64::new(s as f64, 0.0);
    for i in 0..dim {
        m[(i, i)] -= c;
    }
    Ok(m.symmetric_eigenvalues().iter().map(|l| l.abs()).sum())
}

/// Picks the cheaper of the Gram and moment-operator routes.
fn moment_auto(source: &dyn StateSource, t: u32, budget: usize) -> Result<f64> {
    let (_, support) = haar_moment(source.dim(), t);
    if support <= source.len() as f64 {
        moment_in_support(source, t, budget)
    } else {
        moment_distance_with_budget(source, t, budget)
    }
}
