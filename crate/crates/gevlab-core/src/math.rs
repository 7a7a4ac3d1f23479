//! Scalar math helpers routed through `libm` so the crate builds without
//! `std`, plus accurate summation for the large spectral reductions.

#![allow(dead_code)]

#[inline(always)]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline(always)]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline(always)]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline(always)]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline(always)]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline(always)]
pub fn cosh(x: f64) -> f64 {
    libm::cosh(x)
}

#[inline(always)]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline(always)]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline(always)]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline(always)]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline(always)]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline(always)]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

/// Fused multiply-add, `a * b + c` with a single rounding. The `std` path
/// lowers to the hardware instruction; the `libm` fallback computes the
/// same correctly rounded value in software, so results stay bit-identical
/// across both builds.
#[inline(always)]
pub fn fma(a: f64, b: f64, c: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        a.mul_add(b, c)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::fma(a, b, c)
    }
}

/// Pairwise (cascade) sum. Error grows like O(log n) in ulps instead of
/// O(n), which matters when Parseval identities are checked to 1e-12 on
/// 256^2-point grids.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of `f(i)` over `i in 0..n` without materialising a buffer.
pub fn pairwise_sum_fn<F: Fn(usize) -> f64 + Copy>(lo: usize, hi: usize, f: F) -> f64 {
    let n = hi - lo;
    if n <= 32 {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        return acc;
    }
    let mid = lo + n / 2;
    pairwise_sum_fn(lo, mid, f) + pairwise_sum_fn(mid, hi, f)
}

/// Natural log clamped below at e, so 1/log factors in the bound
/// calculators stay finite and positive in the small-data regime.
pub fn ln_clamped(x: f64) -> f64 {
    if x > core::f64::consts::E {
        ln(x)
    } else {
        1.0
    }
}

/// Zero the low `bits` mantissa bits of `x` (round toward zero).
///
/// Used when building the velocity from the vorticity: trimming the
/// mantissa of omega_hat / |k|^2 makes the subsequent products with the
/// integer wave-numbers exact, so `k . u_hat(k)` vanishes identically in
/// floating point and not merely to round-off.
#[inline(always)]
pub fn trim_mantissa(x: f64, bits: u32) -> f64 {
    if bits == 0 {
        return x;
    }
    let mask = !((1u64 << bits) - 1);
    f64::from_bits(x.to_bits() & mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive_on_small_input() {
        let xs: alloc::vec::Vec<f64> = (0..100).map(|i| i as f64 * 0.125).collect();
        let naive: f64 = xs.iter().sum();
        assert_eq!(pairwise_sum(&xs), naive); // exact for these dyadic values
        assert_eq!(pairwise_sum_fn(0, xs.len(), |i| xs[i]), pairwise_sum(&xs));
    }

    #[test]
    fn pairwise_sum_is_accurate_on_large_cancelling_input() {
        let n = 1 << 18;
        let xs: alloc::vec::Vec<f64> = (0..n).map(|i| 0.1 + (i as f64) * 1e-9).collect();
        let exact = 0.1 * n as f64 + 1e-9 * (n as f64 * (n as f64 - 1.0) / 2.0);
        let rel = abs(pairwise_sum(&xs) - exact) / exact;
        assert!(rel < 1e-14, "pairwise relative error {rel:.3e}");
    }

    #[test]
    fn ln_clamped_floors_at_one() {
        assert_eq!(ln_clamped(1.0), 1.0);
        assert_eq!(ln_clamped(0.0), 1.0);
        assert!((ln_clamped(100.0) - ln(100.0)).abs() == 0.0);
    }

    #[test]
    fn trim_mantissa_makes_small_integer_products_exact() {
        let x = core::f64::consts::PI / 7.0;
        let t = trim_mantissa(x, 7);
        assert!(abs(t - x) / x < 1e-14);
        for k1 in 1..=85u32 {
            let p = k1 as f64 * t;
            // 46 significant bits + 7 <= 53: the product is exact.
            assert_eq!(p / k1 as f64, t);
        }
    }
}
