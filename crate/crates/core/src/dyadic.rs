//! Exact base-2 exponents of powers of two.

const MANTISSA_MASK: u64 = (1 << 52) - 1;

/// Returns `e` when `|x| == 2^e` exactly (normal or subnormal), `None`
/// otherwise.
pub fn exact_log2(x: f64) -> Option<i32> {
    let a = x.abs();
    if !a.is_finite() || a == 0.0 {
        return None;
    }
    let bits = a.to_bits();
    let biased = (bits >> 52) as i32;
    let mantissa = bits & MANTISSA_MASK;
    if biased == 0 {
        // subnormal: a single mantissa bit set
        (mantissa.count_ones() == 1).then(|| mantissa.trailing_zeros() as i32 - 1074)
    } else {
        (mantissa == 0).then_some(biased - 1023)
    }
}

/// `log2|x|`, exact for powers of two.
pub fn log2_abs(x: f64) -> f64 {
    match exact_log2(x) {
        Some(e) => e as f64,
        None => x.abs().log2(),
    }
}
