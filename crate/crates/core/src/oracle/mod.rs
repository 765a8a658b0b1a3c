//! High-precision reference arithmetic.
//!
//! [`ref_exp`] and [`ref_ln`] are correctly rounded (nearest-even) at any
//! output width: evaluation starts with generous guard bits and doubles the
//! working precision whenever the approximation lies too close to a
//! rounding boundary to decide.

pub mod bigfloat;
pub mod fast;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

pub use bigfloat::{BigFloat, Context};

use crate::error::{Error, Result};
use crate::fixedpt::{RoundMode, UFix};
use bigfloat::series;

/// Bits above the output width evaluated on the first attempt.
const fn initial_work(out_width: u32) -> u32 {
    3 * out_width + 20
}

/// Round an approximation `approx * 2^-w` (absolute error below `err`
/// units) to `out` fractional bits, or `None` when too close to a tie.
fn decide_rne(approx: &BigUint, w: u32, out: u32, err: u64) -> Option<BigUint> {
    debug_assert!(w > out + 1);
    let shift = (w - out) as usize;
    let kept = approx >> shift;
    let rem = approx - (&kept << shift);
    let half = BigUint::one() << (shift - 1);
    let dist = if rem >= half { &rem - &half } else { &half - &rem };
    if dist <= BigUint::from(err) {
        return None;
    }
    Some(if rem > half { kept + 1u32 } else { kept })
}

/// Correctly rounded evaluation driver; `eval(w)` returns `f * 2^w` within
/// `4w + 64` units.
fn correctly_rounded(out: u32, min_work: u32, eval: impl Fn(u32) -> BigUint) -> BigUint {
    let mut w = initial_work(out).max(min_work);
    loop {
        let approx = eval(w);
        if approx.is_zero() {
            return approx;
        }
        if let Some(r) = decide_rne(&approx, w, out, 4 * u64::from(w) + 64) {
            return r;
        }
        w *= 2;
        assert!(w < 1 << 20, "unresolvable rounding (exact tie) in oracle");
    }
}

/// `x * 2^w` from a fixed-point input, truncating if `x` is wider.
fn scale(x: &UFix, w: u32) -> BigUint {
    let c = BigUint::from(x.code());
    if w >= x.width() {
        c << (w - x.width()) as usize
    } else {
        c >> (x.width() - w) as usize
    }
}

fn below_ln2_multiple(x: &UFix, k: u32) -> bool {
    let w = x.width() + 64;
    scale(x, w) < series::ln2_fixed(w) * k
}

/// `e^x * 2^w` for `x` in `[0, 2 ln 2)`.
pub(crate) fn exp_scaled(x: &UFix, w: u32) -> BigUint {
    let g = w + 8;
    let xs = scale(x, g);
    let l2 = series::ln2_fixed(g);
    let v = if xs >= l2 { series::exp_fixed(&(xs - l2), g) << 1usize } else { series::exp_fixed(&xs, g) };
    v >> 8usize
}

/// `ln(x) * 2^w` for `x` in `[1, 2)`.
pub(crate) fn ln_scaled(x: &UFix, w: u32) -> BigUint {
    let g = w + 8;
    series::ln_fixed(&scale(x, g), g) >> 8usize
}

/// Correctly rounded `e^x` for `x` in `[0, ln 2)`; one integer bit.
pub fn ref_exp(x: &UFix, out_width: u32) -> Result<UFix> {
    if !below_ln2_multiple(x, 1) {
        return Err(Error::Domain(format!("exp argument {x:?} not below ln 2")));
    }
    ref_exp_wide(x, out_width)
}

/// Correctly rounded `e^x` for `x` in `[0, 2 ln 2)`; two integer bits.
pub fn ref_exp_wide(x: &UFix, out_width: u32) -> Result<UFix> {
    if !below_ln2_multiple(x, 2) {
        return Err(Error::Domain(format!("exp argument {x:?} not below 2 ln 2")));
    }
    let code = correctly_rounded(out_width, x.width() + 8, |w| exp_scaled(x, w));
    UFix::with_int_bits(code.to_u128().ok_or(Error::FixedOverflow { width: out_width, int_bits: 2 })?, out_width, 2)
}

/// Correctly rounded `ln x` for `x` in `[1, 2)`.
pub fn ref_ln(x: &UFix, out_width: u32) -> Result<UFix> {
    let one = 1u128 << x.width();
    if x.code() < one || x.code() >= 2 * one {
        return Err(Error::Domain(format!("ln argument {x:?} not in [1, 2)")));
    }
    let code = correctly_rounded(out_width, x.width() + 8, |w| ln_scaled(x, w));
    UFix::new(code.to_u128().ok_or(Error::FixedOverflow { width: out_width, int_bits: 0 })?, out_width)
}

/// Correctly rounded `ln m` code at `out_width` bits for an exact `m` in `[1, 2)`.
pub fn ref_ln_big(m: &BigFloat, out_width: u32) -> Result<u128> {
    if m.is_negative() || m.ilog2() != Some(0) {
        return Err(Error::Domain(format!("ln argument {m:?} not in [1, 2)")));
    }
    // Flooring m at g bits perturbs ln m by less than one unit of 2^-g.
    let code = correctly_rounded(out_width, 0, |w| {
        let g = w + 8;
        series::ln_fixed(&m.to_scaled_floor(g), g) >> 8usize
    });
    code.to_u128().ok_or(Error::FixedOverflow { width: out_width, int_bits: 0 })
}

/// Correctly rounded `ln(1 + 2^-n)` at `width` fractional bits.
pub fn ln1p_pow2(n: u32, width: u32) -> UFix {
    if n == 0 {
        return ln2(width);
    }
    let code = correctly_rounded(width, n + 8, |w| {
        let g = w + 8;
        let one = BigUint::one() << g as usize;
        let m = if n > g { one.clone() } else { &one + (&one >> n as usize) };
        series::ln_fixed(&m, g) >> 8usize
    });
    UFix::new(code.to_u128().expect("ln(1+2^-n) fits"), width).expect("ln(1+2^-n) < 1")
}

/// `ln 2` rounded to nearest-even at `width` fractional bits.
pub fn ln2(width: u32) -> UFix {
    let w = width + 80;
    let c = series::ln2_fixed(w);
    let code = bigfloat::round_big_shr(&c, 80, RoundMode::NearestEven);
    UFix::new(code.to_u128().expect("ln 2 fits"), width).expect("ln 2 < 1")
}

/// Value of `e^x` at 62 fractional bits for the sweep engines; see [`fast`].
pub fn exp_reference62(x_code: u128, x_bits: u32) -> u128 {
    fast::exp(x_code << (fast::FRAC - x_bits))
}

/// Value of `ln x` (x at `x_bits` fractional bits, in `[1, 4)`) at 62 bits.
pub fn ln_reference62(x_code: u128, x_bits: u32) -> u128 {
    fast::ln(x_code << (fast::FRAC - x_bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exp_zero_is_one() {
        let r = ref_exp(&UFix::zero(23), 24).unwrap();
        assert_eq!(r.code(), 1 << 24);
    }

    #[test]
    fn ln_one_is_zero() {
        let r = ref_ln(&UFix::one(23), 23).unwrap();
        assert_eq!(r.code(), 0);
    }

    #[test]
    fn domain_errors() {
        assert!(ref_exp(&ln2(23), 24).is_err());
        assert!(ref_exp(&UFix::new(ln2(23).code() - 1, 23).unwrap(), 24).is_ok());
        assert!(ref_ln(&UFix::new(5, 4).unwrap(), 4).is_err());
        assert!(ref_ln(&UFix::with_int_bits(32, 4, 2).unwrap(), 4).is_err());
    }

    #[test]
    fn ln2_at_23_bits() {
        // 0.10110001011100100001100b; the next code down is 0.10110001011100100001011b.
        assert_eq!(ln2(23).code(), 0b10110001011100100001100);
    }

    #[test]
    fn ln_one_point_five() {
        // ln(1.5) * 2^23 = 3401287.8496...
        let x = UFix::with_int_bits(3 << 22, 23, 1).unwrap();
        assert_eq!(ref_ln(&x, 23).unwrap().code(), 3401288);
    }

    #[test]
    fn ln1p_table_entry() {
        // ln(1.0625) * 2^28 = 16273798.0021...
        assert_eq!(ln1p_pow2(4, 28).code(), 16273798);
    }

    #[test]
    fn exp_top_of_domain_stays_below_two() {
        let x = UFix::new(ln2(23).code() - 1, 23).unwrap();
        let r = ref_exp(&x, 24).unwrap();
        assert!(r.code() < 2 << 24);
        // e^x = 2 - 3.936 * 2^-24
        assert_eq!(r.code(), (2 << 24) - 4);
    }

    #[test]
    fn round_trip_within_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let l2 = ln2(60).code();
        for _ in 0..2000 {
            let c = rng.random_range(0..l2);
            let x = UFix::new(c, 60).unwrap();
            let e = ref_exp(&x, 60).unwrap();
            let l = ref_ln(&e, 60).unwrap();
            assert!(l.code().abs_diff(c) <= 4, "x={c} -> {}", l.code());
        }
    }

    #[test]
    fn fast_path_agrees_with_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let c = rng.random_range(0..(1u128 << 23));
            let big = exp_scaled(&UFix::new(c, 23).unwrap(), 62).to_u128().unwrap();
            if c < ln2(23).code() {
                assert!(exp_reference62(c, 23).abs_diff(big) <= fast::ERR_UNITS);
            }
            let m = (1u128 << 23) | c;
            let big = ln_scaled(&UFix::with_int_bits(m, 23, 1).unwrap(), 62).to_u128().unwrap();
            assert!(ln_reference62(m, 23).abs_diff(big) <= fast::ERR_UNITS);
        }
    }
}
