//! Two-dimensional complex FFT kernels.
//!
//! Power-of-two sizes use an iterative Stockham autosort scheme on planar
//! (split real/imaginary) buffers: radix-4 stages with a radix-2 tail for
//! odd log2, no bit-reversal pass, unit-stride inner loops. The column
//! pass is tiled into column panels that stay cache resident across all
//! stages. Other even sizes fall back to a direct DFT with a precomputed
//! twiddle table; they are meant for small experiment grids, not
//! production runs.
//!
//! Kernels are unnormalised in both directions; callers apply the `1/n^2`
//! analysis scaling. The forward sign is `exp(-i k x)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

const TAU: f64 = core::f64::consts::TAU;

/// One decimation-in-frequency stage of the pow2 pipeline.
///
/// Radix-4 stages store three twiddle runs of length `m = nn/4` starting at
/// `off` (powers p, 2p, 3p); the radix-2 tail stores `m = nn/2` values.
#[derive(Clone, Copy)]
struct StageDesc {
    nn: usize,
    radix4: bool,
    off: usize,
}

/// Precomputed twiddle tables for one transform size.
pub struct FftPlan {
    n: usize,
    kind: PlanKind,
}

enum PlanKind {
    Pow2 {
        fwd_re: Vec<f64>,
        fwd_im: Vec<f64>,
        inv_re: Vec<f64>,
        inv_im: Vec<f64>,
        stages: Vec<StageDesc>,
        odd_stage_count: bool,
    },
    /// Full twiddle circle for the direct O(n^2) DFT.
    Naive { tw_re: Vec<f64>, tw_im: Vec<f64> },
}

impl FftPlan {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2 && n % 2 == 0, "transform size must be even and >= 2");
        if n.is_power_of_two() {
            let mut stages = Vec::new();
            let mut fwd_re = Vec::new();
            let mut fwd_im = Vec::new();
            let push = |re: &mut Vec<f64>, im: &mut Vec<f64>, num: usize, den: usize| {
                let theta = -TAU * num as f64 / den as f64;
                re.push(math::cos(theta));
                im.push(math::sin(theta));
            };
            let mut nn = n;
            while nn >= 4 {
                stages.push(StageDesc {
                    nn,
                    radix4: true,
                    off: fwd_re.len(),
                });
                let m = nn / 4;
                for mult in 1..=3 {
                    for p in 0..m {
                        push(&mut fwd_re, &mut fwd_im, mult * p, nn);
                    }
                }
                nn /= 4;
            }
            if nn == 2 {
                stages.push(StageDesc {
                    nn,
                    radix4: false,
                    off: fwd_re.len(),
                });
                push(&mut fwd_re, &mut fwd_im, 0, 2);
            }
            let inv_re = fwd_re.clone();
            let inv_im: Vec<f64> = fwd_im.iter().map(|x| -x).collect();
            let odd_stage_count = stages.len() % 2 == 1;
            FftPlan {
                n,
                kind: PlanKind::Pow2 {
                    fwd_re,
                    fwd_im,
                    inv_re,
                    inv_im,
                    stages,
                    odd_stage_count,
                },
            }
        } else {
            let mut tw_re = Vec::with_capacity(n);
            let mut tw_im = Vec::with_capacity(n);
            for j in 0..n {
                let theta = -TAU * j as f64 / n as f64;
                tw_re.push(math::cos(theta));
                tw_im.push(math::sin(theta));
            }
            FftPlan {
                n,
                kind: PlanKind::Naive { tw_re, tw_im },
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Radix-2 Stockham butterfly stage (tail stage for odd log2 sizes).
///
/// `x` holds `s` interleaved sub-sequences of length `nn` (`x[q + s*p]`,
/// `q < s`, `p < nn`); outputs land at `y[q + s*(2p)]`, `y[q + s*(2p+1)]`.
///
/// Uses unchecked indexing in the butterfly loops: for `p < m` and `q < s`
/// every index is below `s * nn`, which the entry assertions bound by the
/// buffer lengths. Bounds checks here block vectorisation of the hot loops.
#[inline(always)]
fn stage2(
    x_re: &[f64],
    x_im: &[f64],
    y_re: &mut [f64],
    y_im: &mut [f64],
    nn: usize,
    s: usize,
    tw_re: &[f64],
    tw_im: &[f64],
) {
    let m = nn / 2;
    let len = s * nn;
    assert!(x_re.len() >= len && x_im.len() >= len && y_re.len() >= len && y_im.len() >= len);
    assert!(tw_re.len() >= m && tw_im.len() >= m);
    for p in 0..m {
        let a0 = s * p;
        let b0 = s * (p + m);
        let c0 = s * 2 * p;
        let d0 = c0 + s;
        // SAFETY: max input index b0+q <= s*(2m-1)+s-1 < s*nn; max output
        // index d0+q = s*(2p+1)+q < s*nn; both bounded by the asserts.
        unsafe {
            let wr = *tw_re.get_unchecked(p);
            let wi = *tw_im.get_unchecked(p);
            if p == 0 {
                for q in 0..s {
                    let ar = *x_re.get_unchecked(a0 + q);
                    let ai = *x_im.get_unchecked(a0 + q);
                    let br = *x_re.get_unchecked(b0 + q);
                    let bi = *x_im.get_unchecked(b0 + q);
                    *y_re.get_unchecked_mut(c0 + q) = ar + br;
                    *y_im.get_unchecked_mut(c0 + q) = ai + bi;
                    *y_re.get_unchecked_mut(d0 + q) = ar - br;
                    *y_im.get_unchecked_mut(d0 + q) = ai - bi;
                }
            } else {
                for q in 0..s {
                    let ar = *x_re.get_unchecked(a0 + q);
                    let ai = *x_im.get_unchecked(a0 + q);
                    let br = *x_re.get_unchecked(b0 + q);
                    let bi = *x_im.get_unchecked(b0 + q);
                    let dr = ar - br;
                    let di = ai - bi;
                    *y_re.get_unchecked_mut(c0 + q) = ar + br;
                    *y_im.get_unchecked_mut(c0 + q) = ai + bi;
                    *y_re.get_unchecked_mut(d0 + q) = dr * wr - di * wi;
                    *y_im.get_unchecked_mut(d0 + q) = dr * wi + di * wr;
                }
            }
        }
    }
}

/// Radix-4 decimation-in-frequency Stockham stage.
///
/// With `m = nn/4`, inputs `a,b,c,d` sit at sub-positions `p, p+m, p+2m,
/// p+3m` and map to outputs `4p..4p+3` via
///
/// ```text
/// t0 = a+c   t1 = b+d   t2 = a-c   t3 = -i(b-d)   (forward; +i inverse)
/// y[4p] = t0+t1   y[4p+1] = w^p(t2+t3)
/// y[4p+2] = w^2p(t0-t1)   y[4p+3] = w^3p(t2-t3)
/// ```
///
/// `tw` holds the three twiddle runs back to back: `w^p`, then `w^2p`,
/// then `w^3p`, each of length `m`. `INV` selects the sign of the `i`
/// factor; twiddle conjugation is baked into the tables.
#[inline(always)]
fn stage4<const INV: bool>(
    x_re: &[f64],
    x_im: &[f64],
    y_re: &mut [f64],
    y_im: &mut [f64],
    nn: usize,
    s: usize,
    tw_re: &[f64],
    tw_im: &[f64],
) {
    let m = nn / 4;
    let len = s * nn;
    assert!(x_re.len() >= len && x_im.len() >= len && y_re.len() >= len && y_im.len() >= len);
    assert!(tw_re.len() >= 3 * m && tw_im.len() >= 3 * m);
    for p in 0..m {
        let a0 = s * p;
        let b0 = s * (p + m);
        let c0 = s * (p + 2 * m);
        let d0 = s * (p + 3 * m);
        let e0 = s * 4 * p;
        let f0 = e0 + s;
        let g0 = e0 + 2 * s;
        let h0 = e0 + 3 * s;
        // SAFETY: max input index d0+q <= s*(4m-1)+s-1 < s*nn; max output
        // index h0+q = s*(4p+3)+q <= s*(4m-1)+s-1 < s*nn. Twiddle indices
        // p, m+p, 2m+p are < 3m. All bounded by the entry asserts.
        unsafe {
            let w1r = *tw_re.get_unchecked(p);
            let w1i = *tw_im.get_unchecked(p);
            let w2r = *tw_re.get_unchecked(m + p);
            let w2i = *tw_im.get_unchecked(m + p);
            let w3r = *tw_re.get_unchecked(2 * m + p);
            let w3i = *tw_im.get_unchecked(2 * m + p);
            if p == 0 {
                for q in 0..s {
                    let ar = *x_re.get_unchecked(a0 + q);
                    let ai = *x_im.get_unchecked(a0 + q);
                    let br = *x_re.get_unchecked(b0 + q);
                    let bi = *x_im.get_unchecked(b0 + q);
                    let cr = *x_re.get_unchecked(c0 + q);
                    let ci = *x_im.get_unchecked(c0 + q);
                    let dr = *x_re.get_unchecked(d0 + q);
                    let di = *x_im.get_unchecked(d0 + q);
                    let t0r = ar + cr;
                    let t0i = ai + ci;
                    let t1r = br + dr;
                    let t1i = bi + di;
                    let t2r = ar - cr;
                    let t2i = ai - ci;
                    let ur = br - dr;
                    let ui = bi - di;
                    let (t3r, t3i) = if INV { (-ui, ur) } else { (ui, -ur) };
                    *y_re.get_unchecked_mut(e0 + q) = t0r + t1r;
                    *y_im.get_unchecked_mut(e0 + q) = t0i + t1i;
                    *y_re.get_unchecked_mut(f0 + q) = t2r + t3r;
                    *y_im.get_unchecked_mut(f0 + q) = t2i + t3i;
                    *y_re.get_unchecked_mut(g0 + q) = t0r - t1r;
                    *y_im.get_unchecked_mut(g0 + q) = t0i - t1i;
                    *y_re.get_unchecked_mut(h0 + q) = t2r - t3r;
                    *y_im.get_unchecked_mut(h0 + q) = t2i - t3i;
                }
            } else {
                for q in 0..s {
                    let ar = *x_re.get_unchecked(a0 + q);
                    let ai = *x_im.get_unchecked(a0 + q);
                    let br = *x_re.get_unchecked(b0 + q);
                    let bi = *x_im.get_unchecked(b0 + q);
                    let cr = *x_re.get_unchecked(c0 + q);
                    let ci = *x_im.get_unchecked(c0 + q);
                    let dr = *x_re.get_unchecked(d0 + q);
                    let di = *x_im.get_unchecked(d0 + q);
                    let t0r = ar + cr;
                    let t0i = ai + ci;
                    let t1r = br + dr;
                    let t1i = bi + di;
                    let t2r = ar - cr;
                    let t2i = ai - ci;
                    let ur = br - dr;
                    let ui = bi - di;
                    let (t3r, t3i) = if INV { (-ui, ur) } else { (ui, -ur) };
                    *y_re.get_unchecked_mut(e0 + q) = t0r + t1r;
                    *y_im.get_unchecked_mut(e0 + q) = t0i + t1i;
                    let s1r = t2r + t3r;
                    let s1i = t2i + t3i;
                    *y_re.get_unchecked_mut(f0 + q) = math::fma(s1r, w1r, -(s1i * w1i));
                    *y_im.get_unchecked_mut(f0 + q) = math::fma(s1r, w1i, s1i * w1r);
                    let s2r = t0r - t1r;
                    let s2i = t0i - t1i;
                    *y_re.get_unchecked_mut(g0 + q) = math::fma(s2r, w2r, -(s2i * w2i));
                    *y_im.get_unchecked_mut(g0 + q) = math::fma(s2r, w2i, s2i * w2r);
                    let s3r = t2r - t3r;
                    let s3i = t2i - t3i;
                    *y_re.get_unchecked_mut(h0 + q) = math::fma(s3r, w3r, -(s3i * w3i));
                    *y_im.get_unchecked_mut(h0 + q) = math::fma(s3r, w3i, s3i * w3r);
                }
            }
        }
    }
}

/// First radix-4 stage for a single sequence (`s == 1`): the generic
/// kernel's inner loop has width one there and runs scalar, so this
/// variant iterates over the butterfly index instead. Reads are four
/// contiguous quarters; writes interleave with stride 4, which the
/// vectoriser handles as a strided-store group.
#[inline(always)]
fn stage4_s1<const INV: bool>(
    x_re: &[f64],
    x_im: &[f64],
    y_re: &mut [f64],
    y_im: &mut [f64],
    nn: usize,
    tw_re: &[f64],
    tw_im: &[f64],
) {
    let m = nn / 4;
    assert!(x_re.len() >= nn && x_im.len() >= nn && y_re.len() >= nn && y_im.len() >= nn);
    assert!(tw_re.len() >= 3 * m && tw_im.len() >= 3 * m);
    // SAFETY: input indices < 4m = nn; output indices 4p+3 < nn; twiddle
    // indices < 3m. All bounded by the entry asserts.
    unsafe {
        for p in 0..m {
            let ar = *x_re.get_unchecked(p);
            let ai = *x_im.get_unchecked(p);
            let br = *x_re.get_unchecked(p + m);
            let bi = *x_im.get_unchecked(p + m);
            let cr = *x_re.get_unchecked(p + 2 * m);
            let ci = *x_im.get_unchecked(p + 2 * m);
            let dr = *x_re.get_unchecked(p + 3 * m);
            let di = *x_im.get_unchecked(p + 3 * m);
            let w1r = *tw_re.get_unchecked(p);
            let w1i = *tw_im.get_unchecked(p);
            let w2r = *tw_re.get_unchecked(m + p);
            let w2i = *tw_im.get_unchecked(m + p);
            let w3r = *tw_re.get_unchecked(2 * m + p);
            let w3i = *tw_im.get_unchecked(2 * m + p);
            let t0r = ar + cr;
            let t0i = ai + ci;
            let t1r = br + dr;
            let t1i = bi + di;
            let t2r = ar - cr;
            let t2i = ai - ci;
            let ur = br - dr;
            let ui = bi - di;
            let (t3r, t3i) = if INV { (-ui, ur) } else { (ui, -ur) };
            let s1r = t2r + t3r;
            let s1i = t2i + t3i;
            let s2r = t0r - t1r;
            let s2i = t0i - t1i;
            let s3r = t2r - t3r;
            let s3i = t2i - t3i;
            let o = 4 * p;
            *y_re.get_unchecked_mut(o) = t0r + t1r;
            *y_im.get_unchecked_mut(o) = t0i + t1i;
            *y_re.get_unchecked_mut(o + 1) = math::fma(s1r, w1r, -(s1i * w1i));
            *y_im.get_unchecked_mut(o + 1) = math::fma(s1r, w1i, s1i * w1r);
            *y_re.get_unchecked_mut(o + 2) = math::fma(s2r, w2r, -(s2i * w2i));
            *y_im.get_unchecked_mut(o + 2) = math::fma(s2r, w2i, s2i * w2r);
            *y_re.get_unchecked_mut(o + 3) = math::fma(s3r, w3r, -(s3i * w3i));
            *y_im.get_unchecked_mut(o + 3) = math::fma(s3r, w3i, s3i * w3r);
        }
    }
}

/// Run the full stage pipeline over `s0` interleaved sequences (buffer
/// length `s0 * n`). Input is in `x`; the result lands in `x` when the
/// stage count is even, else in `y`.
fn stockham<const INV: bool>(
    x_re: &mut [f64],
    x_im: &mut [f64],
    y_re: &mut [f64],
    y_im: &mut [f64],
    s0: usize,
    tw_re: &[f64],
    tw_im: &[f64],
    stages: &[StageDesc],
) {
    let mut src: (&mut [f64], &mut [f64]) = (x_re, x_im);
    let mut dst: (&mut [f64], &mut [f64]) = (y_re, y_im);
    let mut s = s0;
    for st in stages {
        if st.radix4 {
            let m3 = 3 * (st.nn / 4);
            if s == 1 {
                stage4_s1::<INV>(
                    src.0,
                    src.1,
                    dst.0,
                    dst.1,
                    st.nn,
                    &tw_re[st.off..st.off + m3],
                    &tw_im[st.off..st.off + m3],
                );
            } else {
                stage4::<INV>(
                    src.0,
                    src.1,
                    dst.0,
                    dst.1,
                    st.nn,
                    s,
                    &tw_re[st.off..st.off + m3],
                    &tw_im[st.off..st.off + m3],
                );
            }
            s *= 4;
        } else {
            let m = st.nn / 2;
            stage2(
                src.0,
                src.1,
                dst.0,
                dst.1,
                st.nn,
                s,
                &tw_re[st.off..st.off + m],
                &tw_im[st.off..st.off + m],
            );
            s *= 2;
        }
        core::mem::swap(&mut src, &mut dst);
    }
}

/// Direct DFT along contiguous rows (fallback path).
fn naive_rows(
    x_re: &[f64],
    x_im: &[f64],
    y_re: &mut [f64],
    y_im: &mut [f64],
    n: usize,
    rows: usize,
    tw_re: &[f64],
    tw_im: &[f64],
    inverse: bool,
) {
    for r in 0..rows {
        let base = r * n;
        for k in 0..n {
            let mut acc_re = 0.0;
            let mut acc_im = 0.0;
            for j in 0..n {
                let idx = (j * k) % n;
                let (wr, wi) = if inverse {
                    (tw_re[idx], -tw_im[idx])
                } else {
                    (tw_re[idx], tw_im[idx])
                };
                let xr = x_re[base + j];
                let xi = x_im[base + j];
                acc_re += xr * wr - xi * wi;
                acc_im += xr * wi + xi * wr;
            }
            y_re[base + k] = acc_re;
            y_im[base + k] = acc_im;
        }
    }
}

/// Direct DFT along axis 0 (columns), vectorised over the row index.
fn naive_cols(
    x_re: &[f64],
    x_im: &[f64],
    y_re: &mut [f64],
    y_im: &mut [f64],
    n: usize,
    tw_re: &[f64],
    tw_im: &[f64],
    inverse: bool,
) {
    for k in 0..n {
        let out = k * n;
        for c in 0..n {
            y_re[out + c] = 0.0;
            y_im[out + c] = 0.0;
        }
        for p in 0..n {
            let idx = (p * k) % n;
            let (wr, wi) = if inverse {
                (tw_re[idx], -tw_im[idx])
            } else {
                (tw_re[idx], tw_im[idx])
            };
            let src = p * n;
            for c in 0..n {
                let xr = x_re[src + c];
                let xi = x_im[src + c];
                y_re[out + c] += xr * wr - xi * wi;
                y_im[out + c] += xr * wi + xi * wr;
            }
        }
    }
}

/// Column-panel width for large plans. A 64-column panel of a 256-point
/// transform occupies 256 KiB per ping-pong pair, so all stages run out of
/// L2 instead of streaming the whole plane once per stage.
const PANEL: usize = 64;

/// Planes at or above this size get the panel-tiled column pass.
const PANEL_MIN_N: usize = 256;

/// Base-address stagger between the four panel buffers, in f64 slots.
/// Keeps their page offsets distinct so stores to one stream do not
/// falsely alias loads from another (4K store-to-load conflicts).
const STAG: usize = 24;

/// Workspace buffers for in-place 2D transforms.
pub struct Scratch {
    re: Vec<f64>,
    im: Vec<f64>,
    panel_re: Vec<f64>,
    panel_im: Vec<f64>,
    ping_re: Vec<f64>,
    ping_im: Vec<f64>,
}

impl Scratch {
    pub fn new(n: usize) -> Self {
        let panel = if n >= PANEL_MIN_N && n.is_power_of_two() {
            n * PANEL
        } else {
            0
        };
        let pad = if panel == 0 { 0 } else { STAG };
        Scratch {
            re: vec![0.0; n * n],
            im: vec![0.0; n * n],
            panel_re: vec![0.0; panel],
            panel_im: vec![0.0; panel + pad],
            ping_re: vec![0.0; panel + 2 * pad],
            ping_im: vec![0.0; panel + 3 * pad],
        }
    }
}

/// Unnormalised 2D transform over `n x n` planar data, in place.
///
/// `re`/`im` are row-major planes of length `n^2`; `scratch` must come from
/// [`Scratch::new`] with the same `n`. Forward uses the `exp(-i k x)` sign.
pub fn fft2(plan: &FftPlan, re: &mut Vec<f64>, im: &mut Vec<f64>, scratch: &mut Scratch, inverse: bool) {
    let n = plan.n;
    debug_assert_eq!(re.len(), n * n);
    match &plan.kind {
        PlanKind::Pow2 {
            fwd_re,
            fwd_im,
            inv_re,
            inv_im,
            stages,
            odd_stage_count,
        } => {
            let (tw_re, tw_im) = if inverse { (inv_re, inv_im) } else { (fwd_re, fwd_im) };
            let run = |x_re: &mut [f64],
                       x_im: &mut [f64],
                       y_re: &mut [f64],
                       y_im: &mut [f64],
                       s0: usize| {
                if inverse {
                    stockham::<true>(x_re, x_im, y_re, y_im, s0, tw_re, tw_im, stages);
                } else {
                    stockham::<false>(x_re, x_im, y_re, y_im, s0, tw_re, tw_im, stages);
                }
            };
            // Row pass: independent length-n transforms on contiguous rows.
            for r in 0..n {
                let span = r * n..(r + 1) * n;
                run(
                    &mut re[span.clone()],
                    &mut im[span.clone()],
                    &mut scratch.re[span.clone()],
                    &mut scratch.im[span.clone()],
                    1,
                );
            }
            if *odd_stage_count {
                core::mem::swap(re, &mut scratch.re);
                core::mem::swap(im, &mut scratch.im);
            }
            if n >= PANEL_MIN_N {
                // Column pass, panel-tiled: gather PANEL columns into a
                // contiguous block, run every stage while it is cache
                // resident, scatter the result straight back.
                for c0 in (0..n).step_by(PANEL) {
                    for r in 0..n {
                        let src = r * n + c0;
                        let dst = r * PANEL;
                        scratch.panel_re[dst..dst + PANEL]
                            .copy_from_slice(&re[src..src + PANEL]);
                        scratch.panel_im[STAG + dst..STAG + dst + PANEL]
                            .copy_from_slice(&im[src..src + PANEL]);
                    }
                    {
                        let (panel_re, rest_im) = (&mut scratch.panel_re, &mut scratch.panel_im);
                        run(
                            panel_re,
                            &mut rest_im[STAG..],
                            &mut scratch.ping_re[2 * STAG..],
                            &mut scratch.ping_im[3 * STAG..],
                            PANEL,
                        );
                    }
                    let (out_re, out_im, off) = if *odd_stage_count {
                        (&scratch.ping_re, &scratch.ping_im, 2 * STAG)
                    } else {
                        (&scratch.panel_re, &scratch.panel_im, 0)
                    };
                    let im_off = off + STAG;
                    for r in 0..n {
                        let dst = r * n + c0;
                        let src = r * PANEL;
                        re[dst..dst + PANEL].copy_from_slice(&out_re[off + src..off + src + PANEL]);
                        im[dst..dst + PANEL]
                            .copy_from_slice(&out_im[im_off + src..im_off + src + PANEL]);
                    }
                }
            } else {
                // Column pass: one batched sweep, unit stride across each row.
                run(re, im, &mut scratch.re, &mut scratch.im, n);
                if *odd_stage_count {
                    core::mem::swap(re, &mut scratch.re);
                    core::mem::swap(im, &mut scratch.im);
                }
            }
        }
        PlanKind::Naive { tw_re, tw_im } => {
            naive_rows(re, im, &mut scratch.re, &mut scratch.im, n, n, tw_re, tw_im, inverse);
            naive_cols(&scratch.re, &scratch.im, re, im, n, tw_re, tw_im, inverse);
        }
    }
}
