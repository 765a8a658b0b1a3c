//! Binary floating point with arbitrary precision, correctly rounded to
//! nearest-even at the precision of a [`Context`].
//!
//! Values are stored canonically as `(-1)^neg * mant * 2^exp` with an odd
//! (or zero) mantissa, so structural equality is numeric equality.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fixedpt::{RoundMode, UFix};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BigFloat {
    neg: bool,
    mant: BigUint,
    exp: i64,
}

impl BigFloat {
    pub fn zero() -> Self {
        Self { neg: false, mant: BigUint::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Self::from_parts(false, BigUint::one(), 0)
    }

    /// `(-1)^neg * mant * 2^exp`, exact.
    pub fn from_parts(neg: bool, mant: BigUint, exp: i64) -> Self {
        let mut v = Self { neg, mant, exp };
        v.canonicalize();
        v
    }

    pub fn from_u128(v: u128) -> Self {
        Self::from_parts(false, BigUint::from(v), 0)
    }

    pub fn from_i64(v: i64) -> Self {
        Self::from_parts(v < 0, BigUint::from(v.unsigned_abs()), 0)
    }

    /// Exact conversion; non-finite inputs are rejected.
    pub fn from_f64(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::Domain(format!("{v} is not finite")));
        }
        let bits = v.to_bits();
        let neg = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if biased == 0 { (frac, -1074) } else { (frac | (1 << 52), biased - 1075) };
        Ok(Self::from_parts(neg, BigUint::from(mant), exp))
    }

    pub fn from_ufix(u: &UFix) -> Self {
        Self::from_parts(false, BigUint::from(u.code()), -i64::from(u.width()))
    }

    fn canonicalize(&mut self) {
        if self.mant.is_zero() {
            self.neg = false;
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.neg
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    /// `floor(log2 |v|)`; `None` for zero.
    pub fn ilog2(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exp + self.mant.bits() as i64 - 1)
        }
    }

    pub fn neg(&self) -> Self {
        let mut v = self.clone();
        if !v.is_zero() {
            v.neg = !v.neg;
        }
        v
    }

    pub fn abs(&self) -> Self {
        Self { neg: false, ..self.clone() }
    }

    /// Multiply by `2^k`, exact.
    pub fn ldexp(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self { exp: self.exp + k, ..self.clone() }
    }

    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        let (la, lb) = (self.ilog2().unwrap(), other.ilog2().unwrap());
        if la != lb {
            return la.cmp(&lb);
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        a.cmp(&b)
    }

    /// Exact sum (no rounding). Intended for small exponent spreads.
    pub fn add_exact(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        if self.neg == other.neg {
            Self::from_parts(self.neg, a + b, e)
        } else if a >= b {
            Self::from_parts(self.neg, a - b, e)
        } else {
            Self::from_parts(other.neg, b - a, e)
        }
    }

    pub fn mul_exact(&self, other: &Self) -> Self {
        Self::from_parts(self.neg != other.neg, &self.mant * &other.mant, self.exp + other.exp)
    }

    /// Nearest `f64`, ties to even, with IEEE gradual underflow.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let l = self.ilog2().unwrap();
        if l > 1023 {
            return if self.neg { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        // Precision available at this binade, accounting for subnormals.
        let prec = if l >= -1022 { 53 } else { (53 - (-1022 - l)).max(0) };
        if prec == 0 {
            // Below half the smallest subnormal, or exactly at it.
            let half_min = Self::one().ldexp(-1075);
            let r = if self.cmp_abs(&half_min) == Ordering::Greater { f64::from_bits(1) } else { 0.0 };
            return if self.neg { -r } else { r };
        }
        let r = Context::new(prec as u32).round(self);
        if r.is_zero() {
            return 0.0;
        }
        let m = r.mant.to_u64().unwrap() as f64;
        // Two exact scalings keep both factors inside the normal range.
        let e = r.exp.clamp(-2200, 2200) as i32;
        let v = m * 2f64.powi(e / 2) * 2f64.powi(e - e / 2);
        if self.neg {
            -v
        } else {
            v
        }
    }

    /// Round to a fixed-point value with `width` fractional and `int_bits`
    /// integer bits. Negative inputs are rejected.
    pub fn to_ufix(&self, width: u32, int_bits: u32, mode: RoundMode) -> Result<UFix> {
        if self.neg {
            return Err(Error::Domain("negative value cannot become an unsigned fraction".into()));
        }
        let shift = self.exp + i64::from(width);
        let code = if shift >= 0 {
            if self.mant.bits() as i64 + shift > 127 {
                return Err(Error::FixedOverflow { width, int_bits });
            }
            &self.mant << shift as usize
        } else {
            round_big_shr(&self.mant, (-shift) as u64, mode)
        };
        let code = code.to_u128().ok_or(Error::FixedOverflow { width, int_bits })?;
        UFix::with_int_bits(code, width, int_bits)
    }
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:#x}p{}", if self.neg { "-" } else { "+" }, self.mant, self.exp)
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

/// `floor` or nearest-even of `m / 2^shift`.
pub(crate) fn round_big_shr(m: &BigUint, shift: u64, mode: RoundMode) -> BigUint {
    if shift == 0 {
        return m.clone();
    }
    let kept = m >> shift as usize;
    if mode == RoundMode::Truncate {
        return kept;
    }
    if m.bits() < shift {
        // Entirely below the kept position: rounds up only above half.
        let half = BigUint::one() << (shift - 1) as usize;
        return if *m > half { BigUint::one() } else { BigUint::zero() };
    }
    let half_bit = m.bit(shift - 1);
    if !half_bit {
        return kept;
    }
    let below_half = m.trailing_zeros().is_some_and(|tz| tz < shift - 1);
    if below_half || kept.bit(0) {
        kept + 1u32
    } else {
        kept
    }
}

/// Precision context: every operation rounds its result to `prec` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Context {
    prec: u32,
}

impl Context {
    pub const DEFAULT_PREC: u32 = 128;

    pub fn new(prec: u32) -> Self {
        assert!(prec >= 1, "precision must be at least one bit");
        Self { prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn round(&self, v: &BigFloat) -> BigFloat {
        let bits = v.mant.bits();
        if bits <= u64::from(self.prec) {
            return v.clone();
        }
        let shift = bits - u64::from(self.prec);
        let m = round_big_shr(&v.mant, shift, RoundMode::NearestEven);
        BigFloat::from_parts(v.neg, m, v.exp + shift as i64)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        if a.is_zero() {
            return self.round(b);
        }
        if b.is_zero() {
            return self.round(a);
        }
        let (la, lb) = (a.ilog2().unwrap(), b.ilog2().unwrap());
        let (big, small, lbig, lsmall) = if la >= lb { (a, b, la, lb) } else { (b, a, lb, la) };
        // A summand below every bit of the other and below a sixteenth of its
        // ulp only decides direction, so it is replaced by a same-signed
        // sticky bit to keep the exact sum small.
        let top = big.exp.min(lbig - i64::from(self.prec) - 4);
        if lsmall < top {
            let sticky = BigFloat::from_parts(small.neg, BigUint::one(), top - 1);
            return self.round(&big.add_exact(&sticky));
        }
        self.round(&a.add_exact(b))
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        self.add(a, &b.neg())
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        self.round(&a.mul_exact(b))
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> Result<BigFloat> {
        if b.is_zero() {
            return Err(Error::DivideByZero);
        }
        if a.is_zero() {
            return Ok(BigFloat::zero());
        }
        // Quotient with prec + 2 significant bits plus a sticky bit.
        let shift = (u64::from(self.prec) + 2 + b.mant.bits()).saturating_sub(a.mant.bits());
        let num = &a.mant << shift as usize;
        let q = &num / &b.mant;
        let inexact = !(&q * &b.mant == num);
        let q = (q << 1usize) + u32::from(inexact);
        let v = BigFloat::from_parts(a.neg != b.neg, q, a.exp - b.exp - shift as i64 - 1);
        Ok(self.round(&v))
    }

    pub fn sqrt(&self, a: &BigFloat) -> Result<BigFloat> {
        if a.is_zero() {
            return Ok(BigFloat::zero());
        }
        if a.neg {
            return Err(Error::NegativeSqrt);
        }
        // Scale so the integer root has prec + 2 bits and the exponent is even.
        let want = 2 * (u64::from(self.prec) + 2);
        let mut shift = want.saturating_sub(a.mant.bits()) as i64;
        if (a.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let n = &a.mant << shift as usize;
        let r = n.sqrt();
        let inexact = !(&r * &r == n);
        let r = (r << 1usize) + u32::from(inexact);
        let v = BigFloat::from_parts(false, r, (a.exp - shift) / 2 - 1);
        Ok(self.round(&v))
    }

    /// Inner product with a single rounding of the exact sum.
    pub fn dot(&self, a: &[BigFloat], b: &[BigFloat]) -> BigFloat {
        assert_eq!(a.len(), b.len(), "dot operands differ in length");
        let wide = Context::new(self.prec * 2 + 64);
        let mut acc = BigFloat::zero();
        for (x, y) in a.iter().zip(b) {
            acc = wide.add(&acc, &x.mul_exact(y));
        }
        self.round(&acc)
    }

    pub fn norm2(&self, v: &[BigFloat]) -> BigFloat {
        let s = self.dot(v, v);
        self.sqrt(&s).expect("sum of squares is non-negative")
    }

    pub fn ln2(&self) -> BigFloat {
        let w = self.prec + 64;
        let c = series::ln2_fixed(w);
        self.round(&BigFloat::from_parts(false, c, -i64::from(w)))
    }

    pub fn exp(&self, x: &BigFloat) -> BigFloat {
        if x.is_zero() {
            return BigFloat::one();
        }
        let int_bits = x.ilog2().unwrap().max(0) as u32 + 2;
        let w = self.prec + 64 + int_bits;
        let ln2 = series::ln2_fixed(w + int_bits);
        // x = k ln2 + r with r in [0, ln2).
        let xs = x.to_scaled_signed(w + int_bits);
        let ln2_i = num_bigint::BigInt::from(ln2);
        let k = num_integer::Integer::div_floor(&xs, &ln2_i);
        let r = (&xs - &k * &ln2_i).to_biguint().unwrap() >> int_bits as usize;
        let e = series::exp_fixed(&r, w);
        let k = k.to_i64().expect("exponent fits i64");
        self.round(&BigFloat::from_parts(false, e, k - i64::from(w)))
    }

    pub fn ln(&self, x: &BigFloat) -> Result<BigFloat> {
        if x.is_zero() || x.neg {
            return Err(Error::Domain("ln of a non-positive value".into()));
        }
        let e = x.ilog2().unwrap();
        let w = self.prec + 64 + 64;
        // m = x / 2^e in [1, 2), at w fractional bits.
        let m = x.ldexp(-e).to_scaled_floor(w);
        let lm = series::ln_fixed(&m, w);
        let mut r = BigFloat::from_parts(false, lm, -i64::from(w));
        if e != 0 {
            let l2 = BigFloat::from_parts(false, series::ln2_fixed(w), -i64::from(w));
            r = r.add_exact(&BigFloat::from_i64(e).mul_exact(&l2));
        }
        Ok(self.round(&r))
    }

    pub fn cmp(&self, a: &BigFloat, b: &BigFloat) -> Ordering {
        cmp(a, b)
    }
}

pub fn cmp(a: &BigFloat, b: &BigFloat) -> Ordering {
    match (a.neg, b.neg) {
        (false, true) => Ordering::Greater,
        (true, false) => Ordering::Less,
        (false, false) => a.cmp_abs(b),
        (true, true) => b.cmp_abs(a),
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(cmp(self, other))
    }
}

impl BigFloat {
    /// `floor(|v| * 2^w)` as an integer.
    pub(crate) fn to_scaled_floor(&self, w: u32) -> BigUint {
        let s = self.exp + i64::from(w);
        if s >= 0 {
            &self.mant << s as usize
        } else {
            &self.mant >> (-s) as usize
        }
    }

    /// `floor(v * 2^w)` as a signed integer.
    pub(crate) fn to_scaled_signed(&self, w: u32) -> num_bigint::BigInt {
        let s = self.exp + i64::from(w);
        let m = num_bigint::BigInt::from(self.mant.clone());
        let m = if self.neg { -m } else { m };
        if s >= 0 {
            m << s as usize
        } else {
            num_integer::Integer::div_floor(&m, &(num_bigint::BigInt::one() << (-s) as usize))
        }
    }
}

/// Fixed-point series on big integers. Every result is within a few units
/// of the last place of the requested width (documented per function).
pub(crate) mod series {
    use num_bigint::BigUint;
    use num_traits::{One, Zero};

    /// `e^x` for `x` in `[0, 1)` given as `x * 2^w`; error below `w/4 + 4`
    /// units of `2^-w` (one truncation per term).
    pub fn exp_fixed(x: &BigUint, w: u32) -> BigUint {
        let one = BigUint::one() << w as usize;
        let mut sum = one.clone();
        let mut term = one;
        let mut k = 1u32;
        loop {
            term = ((term * x) >> w as usize) / k;
            if term.is_zero() {
                break;
            }
            sum += &term;
            k += 1;
        }
        sum
    }

    /// `ln m` for `m` in `[1, 2)` given as `m * 2^w`, via `2 atanh((m-1)/(m+1))`.
    /// Error below `w/2 + 8` units of `2^-w`.
    pub fn ln_fixed(m: &BigUint, w: u32) -> BigUint {
        let one = BigUint::one() << w as usize;
        if *m == one {
            return BigUint::zero();
        }
        let num = (m - &one) << w as usize;
        let t = num / (m + &one);
        atanh2_fixed(&t, w)
    }

    /// `2 atanh(t)` for fixed-point `t <= 1/3`.
    fn atanh2_fixed(t: &BigUint, w: u32) -> BigUint {
        let t2 = (t * t) >> w as usize;
        let mut pow = t.clone();
        let mut sum = t.clone();
        let mut k = 3u32;
        loop {
            pow = (pow * &t2) >> w as usize;
            if pow.is_zero() {
                break;
            }
            sum += &pow / k;
            k += 2;
        }
        sum << 1usize
    }

    /// `ln 2 = 2 atanh(1/3)`.
    pub fn ln2_fixed(w: u32) -> BigUint {
        let g = w + 16;
        let t = (BigUint::one() << g as usize) / 3u32;
        atanh2_fixed(&t, g) >> 16usize
    }
}
