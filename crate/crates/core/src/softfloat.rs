//! IEEE 754 binary32/binary64 emulated on integers: round to nearest-even,
//! subnormal inputs read as zero and subnormal results flushed to zero.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::{ToPrimitive, Zero};

use crate::oracle::BigFloat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Binary32,
    Binary64,
}

impl Format {
    pub const fn frac_bits(self) -> u32 {
        match self {
            Format::Binary32 => 23,
            Format::Binary64 => 52,
        }
    }

    pub const fn exp_bits(self) -> u32 {
        match self {
            Format::Binary32 => 8,
            Format::Binary64 => 11,
        }
    }

    /// Significand precision including the implicit bit.
    pub const fn precision(self) -> u32 {
        self.frac_bits() + 1
    }

    pub const fn bias(self) -> i64 {
        (1 << (self.exp_bits() - 1)) - 1
    }

    pub const fn emin(self) -> i64 {
        1 - self.bias()
    }

    pub const fn emax(self) -> i64 {
        self.bias()
    }

    const fn width(self) -> u32 {
        1 + self.exp_bits() + self.frac_bits()
    }

    const fn quiet_nan(self) -> u64 {
        match self {
            Format::Binary32 => 0x7fc0_0000,
            Format::Binary64 => 0x7ff8_0000_0000_0000,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SoftFloat {
    fmt: Format,
    bits: u64,
}

/// Unpacked operand: `(-1)^neg * m * 2^e` for finite values.
#[derive(Debug, Clone, Copy)]
enum Unpacked {
    Nan,
    Inf(bool),
    Zero(bool),
    Finite { neg: bool, m: u64, e: i64 },
}

impl SoftFloat {
    pub fn from_bits(fmt: Format, bits: u64) -> Self {
        let mask = if fmt.width() == 64 { u64::MAX } else { (1u64 << fmt.width()) - 1 };
        Self { fmt, bits: bits & mask }
    }

    pub fn from_f32(v: f32) -> Self {
        Self { fmt: Format::Binary32, bits: u64::from(v.to_bits()) }
    }

    pub fn from_f64(v: f64) -> Self {
        Self { fmt: Format::Binary64, bits: v.to_bits() }
    }

    pub fn zero(fmt: Format) -> Self {
        Self { fmt, bits: 0 }
    }

    pub fn one(fmt: Format) -> Self {
        Self { fmt, bits: (fmt.bias() as u64) << fmt.frac_bits() }
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn format(&self) -> Format {
        self.fmt
    }

    pub fn to_f64(&self) -> f64 {
        match self.fmt {
            Format::Binary64 => f64::from_bits(self.bits),
            Format::Binary32 => f64::from(f32::from_bits(self.bits as u32)),
        }
    }

    fn sign(&self) -> bool {
        self.bits >> (self.fmt.width() - 1) == 1
    }

    fn unpack(&self) -> Unpacked {
        let f = self.fmt.frac_bits();
        let frac = self.bits & ((1u64 << f) - 1);
        let biased = ((self.bits >> f) & ((1u64 << self.fmt.exp_bits()) - 1)) as i64;
        let neg = self.sign();
        if biased == (1 << self.fmt.exp_bits()) - 1 {
            return if frac == 0 { Unpacked::Inf(neg) } else { Unpacked::Nan };
        }
        if biased == 0 {
            return Unpacked::Zero(neg);
        }
        Unpacked::Finite { neg, m: frac | (1 << f), e: biased - self.fmt.bias() - i64::from(f) }
    }

    pub fn is_nan(&self) -> bool {
        matches!(self.unpack(), Unpacked::Nan)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.unpack(), Unpacked::Inf(_))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.unpack(), Unpacked::Zero(_))
    }

    pub fn is_negative(&self) -> bool {
        self.sign()
    }

    fn nan(fmt: Format) -> Self {
        Self { fmt, bits: fmt.quiet_nan() }
    }

    fn inf(fmt: Format, neg: bool) -> Self {
        let e = ((1u64 << fmt.exp_bits()) - 1) << fmt.frac_bits();
        Self { fmt, bits: e | (u64::from(neg) << (fmt.width() - 1)) }
    }

    fn signed_zero(fmt: Format, neg: bool) -> Self {
        Self { fmt, bits: u64::from(neg) << (fmt.width() - 1) }
    }

    /// Round `(-1)^neg * (m + sticky') * 2^e` to the format, where a set
    /// `sticky` means nonzero bits exist below `m`'s LSB.
    fn round_pack(fmt: Format, neg: bool, m: u128, e: i64, sticky: bool) -> Self {
        debug_assert!(m != 0);
        let p = fmt.precision();
        let len = 128 - m.leading_zeros();
        let (mut sig, mut exp) = if len > p {
            let sh = len - p;
            let kept = m >> sh;
            let rem = m & ((1u128 << sh) - 1);
            let half = 1u128 << (sh - 1);
            let up = rem > half || (rem == half && (sticky || kept & 1 == 1));
            (kept + u128::from(up), e + i64::from(sh))
        } else {
            (m << (p - len), e - i64::from(p - len))
        };
        if sig >> p == 1 {
            sig >>= 1;
            exp += 1;
        }
        // Unbiased exponent of the leading bit.
        let lead = exp + i64::from(p - 1);
        if lead > fmt.emax() {
            return Self::inf(fmt, neg);
        }
        if lead < fmt.emin() {
            return Self::signed_zero(fmt, neg);
        }
        let biased = (lead + fmt.bias()) as u64;
        let frac = (sig as u64) & ((1u64 << fmt.frac_bits()) - 1);
        Self { fmt, bits: frac | (biased << fmt.frac_bits()) | (u64::from(neg) << (fmt.width() - 1)) }
    }

    /// Exact signed sum of two finite terms `m * 2^e` with `m < 2^107`.
    fn sum_terms(fmt: Format, a: (bool, u128, i64), b: (bool, u128, i64)) -> Self {
        let (big, small) = if a.2 >= b.2 { (a, b) } else { (b, a) };
        let d = (big.2 - small.2) as u64;
        let small_top = small.2 + i64::from(128 - small.1.leading_zeros());
        if small_top <= big.2 - 3 && big.1.leading_zeros() > 4 {
            // Below an eighth of big's LSB: a jammed bit decides direction.
            let m = (big.1 << 3) as i128;
            let r = if big.0 == small.0 { m + 1 } else { m - 1 };
            return Self::round_pack(fmt, big.0, r as u128, big.2 - 3, true);
        }
        if d <= 20 {
            let x = (big.1 << d) as i128 * if big.0 { -1 } else { 1 };
            let y = small.1 as i128 * if small.0 { -1 } else { 1 };
            let s = x + y;
            if s == 0 {
                return Self::signed_zero(fmt, false);
            }
            return Self::round_pack(fmt, s < 0, s.unsigned_abs(), small.2, false);
        }
        // Wide alignment: exact big-integer sum, then compress with sticky.
        let x = BigUint::from(big.1) << d as usize;
        let y = BigUint::from(small.1);
        let (neg, s) = if big.0 == small.0 {
            (big.0, x + y)
        } else {
            match x.cmp(&y) {
                Ordering::Greater => (big.0, x - y),
                Ordering::Less => (small.0, y - x),
                Ordering::Equal => return Self::signed_zero(fmt, false),
            }
        };
        let bits = s.bits();
        let sh = bits.saturating_sub(120);
        let sticky = sh > 0 && s.trailing_zeros().is_some_and(|t| t < sh);
        let m = (s >> sh as usize).to_u128().unwrap();
        Self::round_pack(fmt, neg, m, small.2 + sh as i64, sticky)
    }

    pub fn add(&self, o: &Self) -> Self {
        let fmt = self.fmt;
        match (self.unpack(), o.unpack()) {
            (Unpacked::Nan, _) | (_, Unpacked::Nan) => Self::nan(fmt),
            (Unpacked::Inf(a), Unpacked::Inf(b)) if a != b => Self::nan(fmt),
            (Unpacked::Inf(a), _) | (_, Unpacked::Inf(a)) => Self::inf(fmt, a),
            (Unpacked::Zero(a), Unpacked::Zero(b)) => Self::signed_zero(fmt, a && b),
            (Unpacked::Zero(_), _) => o.canonical(),
            (_, Unpacked::Zero(_)) => self.canonical(),
            (Unpacked::Finite { neg: na, m: ma, e: ea }, Unpacked::Finite { neg: nb, m: mb, e: eb }) => {
                Self::sum_terms(fmt, (na, u128::from(ma), ea), (nb, u128::from(mb), eb))
            }
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        if self.is_nan() {
            return *self;
        }
        Self { fmt: self.fmt, bits: self.bits ^ (1u64 << (self.fmt.width() - 1)) }
    }

    pub fn abs(&self) -> Self {
        Self { fmt: self.fmt, bits: self.bits & !(1u64 << (self.fmt.width() - 1)) }
    }

    /// Same value with subnormal encodings replaced by zero.
    fn canonical(&self) -> Self {
        match self.unpack() {
            Unpacked::Zero(n) => Self::signed_zero(self.fmt, n),
            _ => *self,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let fmt = self.fmt;
        let neg = self.sign() != o.sign();
        match (self.unpack(), o.unpack()) {
            (Unpacked::Nan, _) | (_, Unpacked::Nan) => Self::nan(fmt),
            (Unpacked::Inf(_), Unpacked::Zero(_)) | (Unpacked::Zero(_), Unpacked::Inf(_)) => Self::nan(fmt),
            (Unpacked::Inf(_), _) | (_, Unpacked::Inf(_)) => Self::inf(fmt, neg),
            (Unpacked::Zero(_), _) | (_, Unpacked::Zero(_)) => Self::signed_zero(fmt, neg),
            (Unpacked::Finite { m: ma, e: ea, .. }, Unpacked::Finite { m: mb, e: eb, .. }) => {
                Self::round_pack(fmt, neg, u128::from(ma) * u128::from(mb), ea + eb, false)
            }
        }
    }

    pub fn div(&self, o: &Self) -> Self {
        let fmt = self.fmt;
        let neg = self.sign() != o.sign();
        match (self.unpack(), o.unpack()) {
            (Unpacked::Nan, _) | (_, Unpacked::Nan) => Self::nan(fmt),
            (Unpacked::Inf(_), Unpacked::Inf(_)) | (Unpacked::Zero(_), Unpacked::Zero(_)) => Self::nan(fmt),
            (Unpacked::Inf(_), _) | (_, Unpacked::Zero(_)) => Self::inf(fmt, neg),
            (_, Unpacked::Inf(_)) | (Unpacked::Zero(_), _) => Self::signed_zero(fmt, neg),
            (Unpacked::Finite { m: ma, e: ea, .. }, Unpacked::Finite { m: mb, e: eb, .. }) => {
                let sh = fmt.precision() + 3;
                let num = u128::from(ma) << sh;
                let q = num / u128::from(mb);
                let sticky = q * u128::from(mb) != num;
                Self::round_pack(fmt, neg, q, ea - eb - i64::from(sh), sticky)
            }
        }
    }

    pub fn sqrt(&self) -> Self {
        let fmt = self.fmt;
        match self.unpack() {
            Unpacked::Nan => Self::nan(fmt),
            Unpacked::Zero(n) => Self::signed_zero(fmt, n),
            Unpacked::Inf(false) => *self,
            Unpacked::Inf(true) | Unpacked::Finite { neg: true, .. } => Self::nan(fmt),
            Unpacked::Finite { m, e, .. } => {
                // Root of m * 2^(e - 2k) with p + 3 bits; the exponent made even.
                let want = 2 * (fmt.precision() + 3);
                let mut sh = want - (64 - m.leading_zeros());
                if (e - i64::from(sh)).rem_euclid(2) != 0 {
                    sh += 1;
                }
                let n = u128::from(m) << sh;
                let r = n.sqrt();
                Self::round_pack(fmt, false, r, (e - i64::from(sh)) / 2, r * r != n)
            }
        }
    }

    /// `self * b + c` with a single rounding.
    pub fn fma(&self, b: &Self, c: &Self) -> Self {
        let fmt = self.fmt;
        let pneg = self.sign() != b.sign();
        let (ua, ub, uc) = (self.unpack(), b.unpack(), c.unpack());
        if matches!(ua, Unpacked::Nan) || matches!(ub, Unpacked::Nan) || matches!(uc, Unpacked::Nan) {
            return Self::nan(fmt);
        }
        let prod_inf = matches!(ua, Unpacked::Inf(_)) || matches!(ub, Unpacked::Inf(_));
        let prod_zero = matches!(ua, Unpacked::Zero(_)) || matches!(ub, Unpacked::Zero(_));
        if prod_inf && prod_zero {
            return Self::nan(fmt);
        }
        if prod_inf {
            return match uc {
                Unpacked::Inf(cn) if cn != pneg => Self::nan(fmt),
                _ => Self::inf(fmt, pneg),
            };
        }
        if let Unpacked::Inf(cn) = uc {
            return Self::inf(fmt, cn);
        }
        if prod_zero {
            return match uc {
                Unpacked::Zero(cn) => Self::signed_zero(fmt, pneg && cn),
                _ => c.canonical(),
            };
        }
        let (Unpacked::Finite { m: ma, e: ea, .. }, Unpacked::Finite { m: mb, e: eb, .. }) = (ua, ub) else {
            unreachable!("finite product operands");
        };
        let prod = (pneg, u128::from(ma) * u128::from(mb), ea + eb);
        match uc {
            Unpacked::Zero(_) => Self::round_pack(fmt, pneg, prod.1, prod.2, false),
            Unpacked::Finite { neg, m, e } => Self::sum_terms(fmt, prod, (neg, u128::from(m), e)),
            _ => unreachable!("special addends handled above"),
        }
    }

    /// Exact value of a finite operand; `None` for infinity and NaN.
    pub fn to_big(&self) -> Option<BigFloat> {
        match self.unpack() {
            Unpacked::Zero(_) => Some(BigFloat::zero()),
            Unpacked::Finite { neg, m, e } => Some(BigFloat::from_parts(neg, m.into(), e)),
            _ => None,
        }
    }

    /// Nearest representable value (RNE, flush-to-zero, overflow to inf).
    pub fn from_big(fmt: Format, v: &BigFloat) -> Self {
        if v.is_zero() {
            return Self::zero(fmt);
        }
        let m = v.mantissa();
        let bits = m.bits();
        let sh = bits.saturating_sub(120);
        let sticky = sh > 0 && m.trailing_zeros().is_some_and(|t| t < sh);
        let top = (m >> sh as usize).to_u128().unwrap();
        debug_assert!(!top.is_zero());
        Self::round_pack(fmt, v.is_negative(), top, v.exponent() + sh as i64, sticky)
    }
}

impl fmt::Debug for SoftFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = (self.fmt.width() / 4) as usize;
        write!(f, "{:?}({:#0w$x} = {:e})", self.fmt, self.bits, self.to_f64(), w = w + 2)
    }
}
