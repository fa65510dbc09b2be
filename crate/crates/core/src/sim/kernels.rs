//! Unchecked amplitude kernels. Callers validate qubit indices and unitarity.
//!
//! Every index `i` into the amplitude slice encodes a computational basis
//! state: bit `q` of `i` is the state of qubit `q`.

use num_complex::Complex64 as C64;

/// Applies a 2×2 matrix `m` (row-major) to qubit `q`.
pub fn one_qubit(amps: &mut [C64], q: usize, m: &[[C64; 2]; 2]) {
    let stride = 1usize << q;
    for chunk in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = m[0][0] * x + m[0][1] * y;
            *b = m[1][0] * x + m[1][1] * y;
        }
    }
}

/// Multiplies amplitudes with bit `q` clear by `d0` and set by `d1`.
pub fn diagonal_one(amps: &mut [C64], q: usize, d0: C64, d1: C64) {
    let stride = 1usize << q;
    for chunk in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = chunk.split_at_mut(stride);
        lo.iter_mut().for_each(|a| *a *= d0);
        hi.iter_mut().for_each(|b| *b *= d1);
    }
}

/// Multiplies every amplitude whose index contains all bits of `mask` by `phase`.
pub fn phase_on_mask(amps: &mut [C64], mask: usize, phase: C64) {
    // Enumerate supersets of `mask` directly instead of testing every index.
    let free = !mask & (amps.len() - 1);
    let mut sub = free;
    loop {
        amps[sub | mask] *= phase;
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & free;
    }
}

/// Calls `f(i)` for every index with the bits of `mask` all clear.
#[inline]
pub fn for_each_clear(dim: usize, mask: usize, mut f: impl FnMut(usize)) {
    let free = !mask & (dim - 1);
    let mut sub = free;
    loop {
        f(sub);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & free;
    }
}

/// `exp(iθ |1⟩⟨1|_c ⊗ |−⟩⟨−|_t)`.
pub fn cx_theta(amps: &mut [C64], control: usize, target: usize, theta: f64) {
    let e = C64::from_polar(1.0, theta);
    let diag = (C64::new(1.0, 0.0) + e) * 0.5;
    let off = (C64::new(1.0, 0.0) - e) * 0.5;
    let cm = 1usize << control;
    let tm = 1usize << target;
    for_each_clear(amps.len(), cm | tm, |i| {
        let i0 = i | cm;
        let i1 = i0 | tm;
        let (x, y) = (amps[i0], amps[i1]);
        amps[i0] = diag * x + off * y;
        amps[i1] = off * x + diag * y;
    });
}

/// `exp(−iθ/2 XX)` on qubits `a`, `b`.
pub fn rxx(amps: &mut [C64], a: usize, b: usize, theta: f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    let ms = C64::new(0.0, -s);
    let flip = (1usize << a) | (1usize << b);
    for_each_clear(amps.len(), 1usize << a, |i| {
        let j = i ^ flip;
        let (x, y) = (amps[i], amps[j]);
        amps[i] = x * c + ms * y;
        amps[j] = y * c + ms * x;
    });
}

/// `exp(−iθ/2 YY)` on qubits `a`, `b`.
pub fn ryy(amps: &mut [C64], a: usize, b: usize, theta: f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    let am = 1usize << a;
    let bm = 1usize << b;
    let flip = am | bm;
    // YY|j⟩ = −(−1)^{b_a + b_b} |j ⊕ flip⟩: sign −1 on equal bits, +1 otherwise.
    for_each_clear(amps.len(), am, |i| {
        let j = i ^ flip;
        let sign = if i & bm == 0 { -1.0 } else { 1.0 };
        let coupling = C64::new(0.0, -s * sign);
        let (x, y) = (amps[i], amps[j]);
        amps[i] = x * c + coupling * y;
        amps[j] = y * c + coupling * x;
    });
}

/// `exp(−iθ/2 ZZ)` on qubits `a`, `b`.
pub fn rzz(amps: &mut [C64], a: usize, b: usize, theta: f64) {
    let same = C64::from_polar(1.0, -theta / 2.0);
    let diff = C64::from_polar(1.0, theta / 2.0);
    let am = 1usize << a;
    let bm = 1usize << b;
    for (i, amp) in amps.iter_mut().enumerate() {
        let parity = ((i & am) != 0) ^ ((i & bm) != 0);
        *amp *= if parity { diff } else { same };
    }
}

/// Applies a 4×4 matrix on the pair (`hi`, `lo`); `hi` is the more significant
/// bit of the two-qubit sub-index.
pub fn two_qubit(amps: &mut [C64], hi: usize, lo: usize, m: &[[C64; 4]; 4]) {
    let hm = 1usize << hi;
    let lm = 1usize << lo;
    for_each_clear(amps.len(), hm | lm, |i| {
        let idx = [i, i | lm, i | hm, i | hm | lm];
        let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
        for (r, &target) in idx.iter().enumerate() {
            amps[target] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
        }
    });
}
