//! Unsigned fixed-point fractions with an explicit width.
//!
//! A [`UFix`] is the raw integer `code` interpreted as `code * 2^-width`,
//! optionally with a budget of integer bits above the binary point. All
//! arithmetic is exact on the codes; narrowing names its [`RoundMode`].

use std::fmt;

use crate::error::{Error, Result};

/// Rounding applied when bits are discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoundMode {
    Truncate,
    NearestEven,
}

/// Shift `code` right by `shift` bits, rounding the discarded bits.
///
/// The result may carry into one bit above the kept width (e.g. rounding
/// `0.111...1` up to `1.0`); callers decide whether that overflows.
#[inline]
pub fn round_shr(code: u128, shift: u32, mode: RoundMode) -> u128 {
    if shift == 0 {
        return code;
    }
    if shift >= 128 {
        // Everything is discarded; only RNE can produce 1 and only above half.
        return match mode {
            RoundMode::Truncate => 0,
            RoundMode::NearestEven => u128::from(shift == 128 && code > (1u128 << 127)),
        };
    }
    let kept = code >> shift;
    match mode {
        RoundMode::Truncate => kept,
        RoundMode::NearestEven => {
            let rem = code & ((1u128 << shift) - 1);
            let half = 1u128 << (shift - 1);
            if rem > half || (rem == half && kept & 1 == 1) {
                kept + 1
            } else {
                kept
            }
        }
    }
}

/// Unsigned fixed-point value `code * 2^-width` with `int_bits` integer bits.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct UFix {
    code: u128,
    width: u32,
    int_bits: u32,
}

impl UFix {
    pub const MAX_TOTAL_BITS: u32 = 127;

    /// A pure fraction (no integer bits).
    pub fn new(code: u128, width: u32) -> Result<Self> {
        Self::with_int_bits(code, width, 0)
    }

    pub fn with_int_bits(code: u128, width: u32, int_bits: u32) -> Result<Self> {
        let total = width + int_bits;
        if total > Self::MAX_TOTAL_BITS || (code >> total) != 0 {
            return Err(Error::FixedOverflow { width, int_bits });
        }
        Ok(Self { code, width, int_bits })
    }

    pub fn zero(width: u32) -> Self {
        Self { code: 0, width, int_bits: 0 }
    }

    pub fn one(width: u32) -> Self {
        Self { code: 1u128 << width, width, int_bits: 1 }
    }

    #[inline]
    pub fn code(&self) -> u128 {
        self.code
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn int_bits(&self) -> u32 {
        self.int_bits
    }

    pub fn is_zero(&self) -> bool {
        self.code == 0
    }

    /// Exact conversion of an `f64` in `[0, 2^int_bits)`.
    pub fn from_f64(v: f64, width: u32, int_bits: u32, mode: RoundMode) -> Result<Self> {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Domain(format!("{v} is not a finite non-negative value")));
        }
        if v == 0.0 {
            return Ok(Self::zero(width).widen_int(int_bits));
        }
        let bits = v.to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let (mant, exp) = if biased == 0 {
            ((bits & ((1 << 52) - 1)) as u128, -1074i64)
        } else {
            (((bits & ((1 << 52) - 1)) | (1 << 52)) as u128, biased - 1075)
        };
        // v = mant * 2^exp; want code = v * 2^width.
        let shift = exp + i64::from(width);
        let code = if shift >= 0 {
            if shift > 74 {
                return Err(Error::FixedOverflow { width, int_bits });
            }
            mant << shift
        } else {
            round_shr(mant, (-shift).min(200) as u32, mode)
        };
        Self::with_int_bits(code, width, int_bits)
    }

    pub fn to_f64(&self) -> f64 {
        // Exact for codes below 2^53; otherwise correctly rounded by the cast.
        (self.code as f64) * (-(self.width as f64)).exp2()
    }

    /// Same code with a larger integer-bit budget.
    pub fn widen_int(self, int_bits: u32) -> Self {
        Self { int_bits: self.int_bits.max(int_bits), ..self }
    }

    pub fn add(self, other: Self) -> Result<Self> {
        self.check_width(other)?;
        let int_bits = self.int_bits.max(other.int_bits);
        let code = self.code + other.code;
        Self::with_int_bits(code, self.width, int_bits)
    }

    /// Addition that grows the integer-bit budget by one instead of failing.
    pub fn add_grow(self, other: Self) -> Result<Self> {
        self.check_width(other)?;
        let int_bits = self.int_bits.max(other.int_bits) + 1;
        Self::with_int_bits(self.code + other.code, self.width, int_bits)
    }

    pub fn sub(self, other: Self) -> Result<Self> {
        self.check_width(other)?;
        let code = self.code.checked_sub(other.code).ok_or(Error::SubUnderflow)?;
        Ok(Self { code, width: self.width, int_bits: self.int_bits.max(other.int_bits) })
    }

    /// Sign-magnitude difference: `(negative, |self - other|)`.
    pub fn signed_sub(self, other: Self) -> Result<(bool, Self)> {
        self.check_width(other)?;
        let int_bits = self.int_bits.max(other.int_bits);
        Ok(if self.code >= other.code {
            (false, Self { code: self.code - other.code, width: self.width, int_bits })
        } else {
            (true, Self { code: other.code - self.code, width: self.width, int_bits })
        })
    }

    /// Shift right keeping the width; shifted-out bits are discarded.
    pub fn shr(self, n: u32) -> Self {
        let code = if n >= 128 { 0 } else { self.code >> n };
        Self { code, ..self }
    }

    /// Change the fractional width. Widening is exact; narrowing rounds.
    pub fn narrow(self, width: u32, mode: RoundMode) -> Result<Self> {
        if width >= self.width {
            let extra = width - self.width;
            if self.code != 0 && self.code.leading_zeros() <= extra {
                return Err(Error::FixedOverflow { width, int_bits: self.int_bits });
            }
            return Self::with_int_bits(self.code << extra, width, self.int_bits);
        }
        let code = round_shr(self.code, self.width - width, mode);
        Self::with_int_bits(code, width, self.int_bits)
    }

    fn check_width(&self, other: Self) -> Result<()> {
        if self.width != other.width {
            return Err(Error::WidthMismatch(self.width, other.width));
        }
        Ok(())
    }
}

impl fmt::Debug for UFix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UFix({:#x}@{}", self.code, self.width)?;
        if self.int_bits > 0 {
            write!(f, "+{}i", self.int_bits)?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for UFix {
    /// Binary fixed-point rendering, e.g. `b0.1011`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let int = self.code >> self.width;
        write!(f, "b{:b}.", int)?;
        for i in (0..self.width).rev() {
            write!(f, "{}", (self.code >> i) & 1)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn add_quarters() {
        let q = UFix::new(0x40, 8).unwrap();
        assert_eq!(q.add(q).unwrap(), UFix::new(0x80, 8).unwrap());
    }

    #[test]
    fn add_overflow_is_rejected() {
        let h = UFix::new(0x80, 8).unwrap();
        assert!(matches!(h.add(h), Err(Error::FixedOverflow { .. })));
        assert_eq!(h.add_grow(h).unwrap().code(), 0x100);
    }

    #[test]
    fn shr_discards_low_bits() {
        let v = UFix::new(0b1011, 4).unwrap();
        assert_eq!(v.shr(2).code(), 0b0010);
        assert_eq!(v.shr(2).width(), 4);
    }

    #[test]
    fn narrow_tie_goes_to_even() {
        let v = UFix::new(0b0000_1000, 8).unwrap();
        assert_eq!(v.narrow(4, RoundMode::NearestEven).unwrap().code(), 0);
        let v = UFix::new(0b0001_1000, 8).unwrap();
        assert_eq!(v.narrow(4, RoundMode::NearestEven).unwrap().code(), 0b0010);
        assert_eq!(v.narrow(4, RoundMode::Truncate).unwrap().code(), 0b0001);
    }

    #[test]
    fn narrow_carry_needs_integer_bit() {
        let v = UFix::new(0xff, 8).unwrap();
        assert!(v.narrow(4, RoundMode::NearestEven).is_err());
        let v = v.widen_int(1);
        assert_eq!(v.narrow(4, RoundMode::NearestEven).unwrap().code(), 0x10);
    }

    #[test]
    fn sub_underflow() {
        let a = UFix::new(1, 4).unwrap();
        let b = UFix::new(2, 4).unwrap();
        assert_eq!(a.sub(b), Err(Error::SubUnderflow));
        assert_eq!(a.signed_sub(b).unwrap(), (true, a));
    }

    #[test]
    fn width_mismatch() {
        let a = UFix::new(1, 4).unwrap();
        let b = UFix::new(1, 5).unwrap();
        assert_eq!(a.add(b), Err(Error::WidthMismatch(4, 5)));
    }

    #[test]
    fn from_f64_zero_and_exact() {
        assert_eq!(UFix::from_f64(0.0, 23, 0, RoundMode::NearestEven).unwrap().code(), 0);
        let v = UFix::from_f64(0.5, 23, 0, RoundMode::NearestEven).unwrap();
        assert_eq!(v.code(), 0x40_0000);
        assert!(UFix::from_f64(1.5, 23, 0, RoundMode::NearestEven).is_err());
        assert_eq!(UFix::from_f64(1.5, 23, 1, RoundMode::NearestEven).unwrap().code(), 3 << 22);
    }

    #[test]
    fn display_binary() {
        let v = UFix::new(0b0110, 4).unwrap();
        assert_eq!(v.to_string(), "b0.0110");
    }

    proptest! {
        #[test]
        fn real_round_trip(code in 0u128..(1u128 << 40), width in 40u32..52) {
            let u = UFix::new(code, width).unwrap();
            for mode in [RoundMode::Truncate, RoundMode::NearestEven] {
                prop_assert_eq!(UFix::from_f64(u.to_f64(), width, 0, mode).unwrap(), u);
            }
        }

        #[test]
        fn add_sub_match_integers(a in 0u128..(1u128 << 62), b in 0u128..(1u128 << 62)) {
            let x = UFix::new(a, 62).unwrap().widen_int(1);
            let y = UFix::new(b, 62).unwrap();
            prop_assert_eq!(x.add(y).unwrap().code(), a + b);
            let (neg, d) = x.signed_sub(y).unwrap();
            prop_assert_eq!(neg, a < b);
            prop_assert_eq!(d.code(), a.abs_diff(b));
        }

        #[test]
        fn rne_error_within_half_ulp(code in 0u128..(1u128 << 60), w in 1u32..40) {
            let u = UFix::new(code, 60).unwrap().widen_int(1);
            let n = u.narrow(w, RoundMode::NearestEven).unwrap();
            let back = n.code() << (60 - w);
            let half = 1u128 << (60 - w - 1);
            prop_assert!(back.abs_diff(code) <= half);
        }
    }
}
