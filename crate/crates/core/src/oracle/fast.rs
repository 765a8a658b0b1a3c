//! 62-fractional-bit reference evaluation on `u128`, used by the sweep
//! engines where millions of reference values are needed.
//!
//! Every function returns an approximation within [`ERR_UNITS`] units of
//! `2^-62`; callers classify against that bound and fall back to the
//! big-integer path when a result lands inside it.

pub const FRAC: u32 = 62;
pub const ONE: u128 = 1 << FRAC;
/// Absolute error bound of every function, in units of `2^-62`.
pub const ERR_UNITS: u128 = 256;

#[inline]
fn mul(a: u128, b: u128) -> u128 {
    debug_assert!(a < (1 << 64) && b < (1 << 64));
    (a * b) >> FRAC
}

/// `e^x` for `x` in `[0, 1.4)` at 62 fractional bits.
pub fn exp(x: u128) -> u128 {
    debug_assert!(x < (ONE * 14) / 10);
    let mut sum = ONE;
    let mut term = ONE;
    let mut k = 1u128;
    while term != 0 {
        term = mul(term, x) / k;
        sum += term;
        k += 1;
    }
    sum
}

/// `ln m` for `m` in `[1, 4)` at 62 fractional bits.
pub fn ln(m: u128) -> u128 {
    debug_assert!((ONE..4 * ONE).contains(&m));
    if m >= 2 * ONE {
        return ln2() + ln_unit(m >> 1);
    }
    ln_unit(m)
}

/// `ln m` for `m` in `[1, 2)`; `m >> 1` above loses at most one unit.
fn ln_unit(m: u128) -> u128 {
    if m == ONE {
        return 0;
    }
    let t = ((m - ONE) << FRAC) / (m + ONE);
    let t2 = mul(t, t);
    let mut pow = t;
    let mut sum = t;
    let mut k = 3u128;
    loop {
        pow = mul(pow, t2);
        if pow == 0 {
            break;
        }
        sum += pow / k;
        k += 2;
    }
    sum << 1
}

/// `ln 2` at 62 fractional bits, correctly rounded.
pub const fn ln2() -> u128 {
    // round(ln(2) * 2^62)
    0x2C5C_85FD_F473_DE6B
}

/// `ln(1 + 2^-n)` at 62 fractional bits.
pub fn ln1p_pow2(n: u32) -> u128 {
    if n == 0 {
        return ln2();
    }
    if n >= FRAC {
        return if n == FRAC { 1 } else { 0 };
    }
    ln(ONE + (ONE >> n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln2_constant() {
        let e = crate::oracle::bigfloat::series::ln2_fixed(120) >> (120 - 64) as usize;
        let c = (e.to_u64_digits()[0] as u128 + 2) >> 2;
        assert_eq!(c, ln2());
    }

    #[test]
    fn exp_and_ln_invert() {
        for i in 1..100u128 {
            let x = ONE * i / 150;
            let back = ln(exp(x));
            assert!(back.abs_diff(x) < 2 * ERR_UNITS, "x={x}");
        }
    }

    #[test]
    fn matches_f64_roughly() {
        let x = ONE / 2;
        let e = exp(x) as f64 / ONE as f64;
        assert!((e - 0.5f64.exp()).abs() < 1e-15);
        let l = ln(3 * ONE) as f64 / ONE as f64;
        assert!((l - 3f64.ln()).abs() < 1e-15);
    }
}
