//! Dual-base log-domain numbers `±2^a * e^b` with `b` in `[0, ln 2)`.
//!
//! Multiplication and division add or subtract the `(a, b)` pairs;
//! whenever `b` leaves `[0, ln2_F)` one `ln2_F` is moved into `a`. Integer
//! powers and square roots scale `a * ln2_F + b` and reduce it again.
//! Exponents past the top of the `E`-bit range saturate to infinity and
//! those below it flush to zero.

use std::fmt;

use crate::config::FlmaConfig;
use crate::error::{Error, Result};
use crate::oracle::{self, BigFloat, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Class {
    Zero,
    Finite,
    Inf,
    NaN,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct DualBase {
    class: Class,
    neg: bool,
    a: i64,
    b: u128,
}

impl DualBase {
    pub const ZERO: Self = Self { class: Class::Zero, neg: false, a: 0, b: 0 };
    pub const ONE: Self = Self { class: Class::Finite, neg: false, a: 0, b: 0 };
    pub const NAN: Self = Self { class: Class::NaN, neg: false, a: 0, b: 0 };

    pub fn inf(neg: bool) -> Self {
        Self { class: Class::Inf, neg, a: 0, b: 0 }
    }

    /// Checked constructor for a finite value.
    pub fn new(neg: bool, a: i64, b: u128, cfg: &FlmaConfig) -> Result<Self> {
        if b >= cfg.ln2_f {
            return Err(Error::InvalidEncoding(format!("b code {b:#x} not below ln2_F = {:#x}", cfg.ln2_f)));
        }
        if a < cfg.exp_min() || a > cfg.exp_max() {
            return Err(Error::ExponentRange(a));
        }
        Ok(Self { class: Class::Finite, neg, a, b })
    }

    /// Finite value with range handling: overflow to infinity, underflow
    /// to zero. `b` must already be normalized.
    pub(crate) fn finite(neg: bool, a: i64, b: u128, cfg: &FlmaConfig) -> Self {
        debug_assert!(b < cfg.ln2_f);
        if a > cfg.exp_max() {
            Self::inf(neg)
        } else if a < cfg.exp_min() {
            Self::ZERO
        } else {
            Self { class: Class::Finite, neg, a, b }
        }
    }

    pub fn class(&self) -> Class {
        self.class
    }

    pub fn is_zero(&self) -> bool {
        self.class == Class::Zero
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.class, Class::Zero | Class::Finite)
    }

    pub fn is_negative(&self) -> bool {
        self.neg
    }

    /// Base-2 exponent `a`.
    pub fn exponent(&self) -> i64 {
        self.a
    }

    /// Raw code of the base-e exponent `b` at `F` fractional bits.
    pub fn fraction(&self) -> u128 {
        self.b
    }

    pub fn neg(&self) -> Self {
        match self.class {
            Class::Zero | Class::NaN => *self,
            _ => Self { neg: !self.neg, ..*self },
        }
    }

    pub fn abs(&self) -> Self {
        Self { neg: false, ..*self }
    }

    /// `a * ln2_F + b` as a single code.
    pub(crate) fn log_code(&self, cfg: &FlmaConfig) -> i128 {
        i128::from(self.a) * cfg.ln2_f as i128 + self.b as i128
    }

    pub fn mul(&self, y: &Self, cfg: &FlmaConfig) -> Self {
        let neg = self.neg != y.neg;
        match (self.class, y.class) {
            (Class::NaN, _) | (_, Class::NaN) => Self::NAN,
            (Class::Inf, Class::Zero) | (Class::Zero, Class::Inf) => Self::NAN,
            (Class::Inf, _) | (_, Class::Inf) => Self::inf(neg),
            (Class::Zero, _) | (_, Class::Zero) => Self::ZERO,
            (Class::Finite, Class::Finite) => {
                let sum = self.b + y.b;
                let (a, b) = if sum >= cfg.ln2_f { (self.a + y.a + 1, sum - cfg.ln2_f) } else { (self.a + y.a, sum) };
                Self::finite(neg, a, b, cfg)
            }
        }
    }

    pub fn div(&self, y: &Self, cfg: &FlmaConfig) -> Result<Self> {
        let neg = self.neg != y.neg;
        Ok(match (self.class, y.class) {
            (Class::NaN, _) | (_, Class::NaN) => Self::NAN,
            (_, Class::Zero) => return Err(Error::DivideByZero),
            (Class::Inf, Class::Inf) => Self::NAN,
            (Class::Inf, _) => Self::inf(neg),
            (_, Class::Inf) | (Class::Zero, _) => Self::ZERO,
            (Class::Finite, Class::Finite) => {
                let (a, b) = if self.b >= y.b {
                    (self.a - y.a, self.b - y.b)
                } else {
                    (self.a - y.a - 1, self.b + cfg.ln2_f - y.b)
                };
                Self::finite(neg, a, b, cfg)
            }
        })
    }

    pub fn pow_int(&self, n: i32, cfg: &FlmaConfig) -> Result<Self> {
        let neg = self.neg && n % 2 != 0;
        Ok(match self.class {
            Class::NaN => Self::NAN,
            Class::Zero if n <= 0 => return Err(Error::UndefinedPower(if n == 0 { "0^0" } else { "0^negative" })),
            Class::Zero => Self::ZERO,
            _ if n == 0 => Self::ONE,
            Class::Inf if n < 0 => Self::ZERO,
            Class::Inf => Self::inf(neg),
            Class::Finite => {
                let l2 = cfg.ln2_f as i128;
                let nb = i128::from(n) * self.b as i128;
                let k = nb.div_euclid(l2);
                let b = nb.rem_euclid(l2) as u128;
                let a = i128::from(n) * i128::from(self.a) + k;
                let a = a.clamp(i128::from(i64::MIN / 2), i128::from(i64::MAX / 2)) as i64;
                Self::finite(neg, a, b, cfg)
            }
        })
    }

    pub fn sqrt(&self, cfg: &FlmaConfig) -> Result<Self> {
        match self.class {
            Class::NaN => return Ok(Self::NAN),
            Class::Zero => return Ok(Self::ZERO),
            _ if self.neg => return Err(Error::NegativeSqrt),
            Class::Inf => return Ok(*self),
            Class::Finite => {}
        }
        let (a, twice) = if self.a.rem_euclid(2) == 0 { (self.a / 2, self.b) } else { ((self.a - 1).div_euclid(2), self.b + cfg.ln2_f) };
        let mut b = twice >> 1;
        if twice & 1 == 1 && b & 1 == 1 {
            b += 1;
        }
        Ok(if b >= cfg.ln2_f { Self::finite(false, a + 1, b - cfg.ln2_f, cfg) } else { Self::finite(false, a, b, cfg) })
    }

    /// Nearest dual-base value: `a = floor(log2 |v|)`, `b = RNE_F(ln(|v| / 2^a))`.
    pub fn encode(v: &BigFloat, cfg: &FlmaConfig) -> Result<Self> {
        if v.is_zero() {
            return Ok(Self::ZERO);
        }
        let mut a = v.ilog2().expect("nonzero");
        let m = v.abs().ldexp(-a);
        let mut b = oracle::ref_ln_big(&m, cfg.f_bits)?;
        if b >= cfg.ln2_f {
            a += 1;
            b -= cfg.ln2_f;
        }
        if a < cfg.exp_min() || a > cfg.exp_max() {
            return Err(Error::ExponentRange(a));
        }
        Ok(Self { class: Class::Finite, neg: v.is_negative(), a, b })
    }

    pub fn encode_f64(v: f64, cfg: &FlmaConfig) -> Result<Self> {
        if v.is_nan() {
            return Ok(Self::NAN);
        }
        if v.is_infinite() {
            return Ok(Self::inf(v < 0.0));
        }
        Self::encode(&BigFloat::from_f64(v)?, cfg)
    }

    /// `±2^a * e^(b / 2^F)` rounded to `prec` bits.
    pub fn decode(&self, prec: u32, cfg: &FlmaConfig) -> Result<BigFloat> {
        match self.class {
            Class::Zero => Ok(BigFloat::zero()),
            Class::Inf | Class::NaN => Err(Error::InvalidEncoding(format!("{self:?} has no finite value"))),
            Class::Finite => {
                if self.b >= cfg.ln2_f {
                    return Err(Error::InvalidEncoding(format!("b code {:#x} is in the unused range", self.b)));
                }
                let ctx = Context::new(prec);
                let x = BigFloat::from_parts(false, self.b.into(), -i64::from(cfg.f_bits));
                let v = ctx.exp(&x).ldexp(self.a);
                Ok(if self.neg { v.neg() } else { v })
            }
        }
    }

    pub fn to_f64(&self, cfg: &FlmaConfig) -> f64 {
        match self.class {
            Class::NaN => f64::NAN,
            Class::Inf if self.neg => f64::NEG_INFINITY,
            Class::Inf => f64::INFINITY,
            _ => self.decode(64, cfg).expect("finite").to_f64(),
        }
    }

    /// Bit-packed form: `b` in bits `[0, F)`, `a` two's complement in
    /// `[F, F+E)`, sign at `F+E`, class in the two bits above it
    /// (`00` finite, `01` zero, `10` infinity, `11` NaN).
    pub fn to_bits(&self, cfg: &FlmaConfig) -> u128 {
        let f = cfg.f_bits;
        let e = cfg.e_bits;
        let class: u128 = match self.class {
            Class::Finite => 0,
            Class::Zero => 1,
            Class::Inf => 2,
            Class::NaN => 3,
        };
        let a = (self.a as u128) & ((1u128 << e) - 1);
        let (a, b) = if self.class == Class::Finite { (a, self.b) } else { (0, 0) };
        b | (a << f) | (u128::from(self.neg) << (f + e)) | (class << (f + e + 1))
    }

    pub fn from_bits(bits: u128, cfg: &FlmaConfig) -> Result<Self> {
        let f = cfg.f_bits;
        let e = cfg.e_bits;
        if bits >> (f + e + 3) != 0 {
            return Err(Error::InvalidEncoding(format!("{bits:#x} has bits above the {}-bit layout", f + e + 3)));
        }
        let b = bits & ((1u128 << f) - 1);
        let raw = ((bits >> f) & ((1u128 << e) - 1)) as i64;
        let a = if raw >> (e - 1) == 1 { raw - (1i64 << e) } else { raw };
        let neg = (bits >> (f + e)) & 1 == 1;
        match bits >> (f + e + 1) {
            0 => Self::new(neg, a, b, cfg),
            class => {
                if b != 0 || raw != 0 {
                    return Err(Error::InvalidEncoding(format!("{bits:#x}: special value with payload")));
                }
                Ok(match class {
                    1 if !neg => Self::ZERO,
                    1 => return Err(Error::InvalidEncoding("negative zero is not canonical".into())),
                    2 => Self::inf(neg),
                    _ => Self::NAN,
                })
            }
        }
    }

    /// `+ a=0 b=0x000000` style text, `b` padded to `ceil(F/4)` digits.
    pub fn display(&self, cfg: &FlmaConfig) -> String {
        let sign = if self.neg { '-' } else { '+' };
        match self.class {
            Class::Zero => "+ zero".into(),
            Class::Inf => format!("{sign} inf"),
            Class::NaN => "nan".into(),
            Class::Finite => {
                let digits = cfg.f_bits.div_ceil(4) as usize;
                format!("{sign} a={} b={:#0w$x}", self.a, self.b, w = digits + 2)
            }
        }
    }
}

impl fmt::Debug for DualBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.neg { '-' } else { '+' };
        match self.class {
            Class::Finite => write!(f, "{s}2^{}*e^({:#x})", self.a, self.b),
            c => write!(f, "{s}{c:?}"),
        }
    }
}

/// Log-ulp distance between same-signed values: codes counted along the
/// normalized sequence, each exponent step worth `ln2_F` codes.
pub fn log_ulp_distance(x: &DualBase, y: &DualBase, cfg: &FlmaConfig) -> Result<u128> {
    match (x.class, y.class) {
        (Class::Zero, Class::Zero) => Ok(0),
        (Class::Finite, Class::Finite) => {
            if x.neg != y.neg {
                return Err(Error::MixedSigns);
            }
            Ok(x.log_code(cfg).abs_diff(y.log_code(cfg)))
        }
        _ => Err(Error::Domain(format!("log-ulp distance undefined between {x:?} and {y:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> FlmaConfig {
        FlmaConfig::log32()
    }

    fn code(v: f64, f: u32) -> u128 {
        (v * 2f64.powi(f as i32)).round() as u128
    }

    #[test]
    fn multiply_renormalizes() {
        let c = cfg();
        let x = DualBase::new(false, 1, code(0.4, 23), &c).unwrap();
        let y = DualBase::new(false, -1, code(0.3, 23), &c).unwrap();
        let p = x.mul(&y, &c);
        assert_eq!(p.exponent(), 1);
        assert_eq!(p.fraction(), code(0.4, 23) + code(0.3, 23) - c.ln2_f);
    }

    #[test]
    fn divide_borrows() {
        let c = cfg();
        let x = DualBase::new(false, 0, code(0.3, 23), &c).unwrap();
        let y = DualBase::new(false, 0, code(0.4, 23), &c).unwrap();
        let q = x.div(&y, &c).unwrap();
        assert_eq!((q.exponent(), q.fraction()), (-1, code(0.3, 23) + c.ln2_f - code(0.4, 23)));
        assert_eq!(x.div(&x, &c).unwrap(), DualBase::ONE);
        assert!(matches!(x.div(&DualBase::ZERO, &c), Err(Error::DivideByZero)));
    }

    #[test]
    fn power_reduces_modulo_ln2() {
        let c = cfg();
        let x = DualBase::new(false, 0, c.ln2_f - 1, &c).unwrap();
        let sq = x.pow_int(2, &c).unwrap();
        assert_eq!((sq.exponent(), sq.fraction()), (1, 2 * (c.ln2_f - 1) - c.ln2_f));
        assert_eq!(sq, x.mul(&x, &c));
        assert_eq!(x.pow_int(0, &c).unwrap(), DualBase::ONE);
        assert_eq!(x.pow_int(-1, &c).unwrap(), DualBase::ONE.div(&x, &c).unwrap());
        assert!(DualBase::ZERO.pow_int(0, &c).is_err());
        assert!(DualBase::ZERO.pow_int(-2, &c).is_err());
        let m = x.neg();
        assert!(m.pow_int(3, &c).unwrap().is_negative());
        assert!(!m.pow_int(2, &c).unwrap().is_negative());
    }

    #[test]
    fn square_roots() {
        let c = cfg();
        assert_eq!(DualBase::ONE.sqrt(&c).unwrap(), DualBase::ONE);
        let four = DualBase::new(false, 2, 0, &c).unwrap();
        assert_eq!(four.sqrt(&c).unwrap(), DualBase::new(false, 1, 0, &c).unwrap());
        let two = DualBase::new(false, 1, 0, &c).unwrap();
        let r = two.sqrt(&c).unwrap();
        assert_eq!((r.exponent(), r.fraction()), (0, c.ln2_f / 2));
        let back = r.mul(&r, &c);
        assert!(log_ulp_distance(&back, &two, &c).unwrap() <= 1);
        assert!(matches!(two.neg().sqrt(&c), Err(Error::NegativeSqrt)));
        // Odd exponent with b = ln2_F - 1 halves onto a tie above ln2_F - 1.
        let x = DualBase::new(false, 1, c.ln2_f - 1, &c).unwrap();
        let r = x.sqrt(&c).unwrap();
        assert!(r.fraction() < c.ln2_f);
    }

    #[test]
    fn encode_examples() {
        let c = cfg();
        assert_eq!(DualBase::encode_f64(1.0, &c).unwrap(), DualBase::ONE);
        let y = DualBase::encode_f64(1.0 - 2f64.powi(-24), &c).unwrap();
        assert_eq!((y.exponent(), y.fraction()), (-1, 0b10110001011100100001011));
        assert_eq!(DualBase::encode_f64(0.0, &c).unwrap(), DualBase::ZERO);
        assert!(matches!(DualBase::encode_f64(1e300, &c), Err(Error::ExponentRange(_))));
        let v = DualBase::encode_f64(-3.0, &c).unwrap();
        assert!(v.is_negative());
        assert!((v.to_f64(&c) + 3.0).abs() < 3.0 * 1e-7);
    }

    #[test]
    fn display_text() {
        let c = cfg();
        assert_eq!(DualBase::ONE.display(&c), "+ a=0 b=0x000000");
        let v = DualBase::new(true, -3, 0x1234, &c).unwrap();
        assert_eq!(v.display(&c), "- a=-3 b=0x001234");
    }

    #[test]
    fn bit_layout_round_trips() {
        let c = cfg();
        for v in [DualBase::ZERO, DualBase::ONE, DualBase::inf(true), DualBase::NAN, DualBase::new(true, -128, 77, &c).unwrap(), DualBase::new(false, 127, c.ln2_f - 1, &c).unwrap()] {
            let bits = v.to_bits(&c);
            assert!(bits < 1 << 34);
            assert_eq!(DualBase::from_bits(bits, &c).unwrap(), v);
        }
        assert!(DualBase::from_bits(c.ln2_f, &c).is_err());
        assert!(DualBase::from_bits(1 << 40, &c).is_err());
    }

    #[test]
    fn range_saturates() {
        let c = cfg();
        let big = DualBase::new(false, 127, 0, &c).unwrap();
        assert_eq!(big.mul(&big, &c).class(), Class::Inf);
        let small = DualBase::new(false, -128, 0, &c).unwrap();
        assert!(small.mul(&small, &c).is_zero());
        assert_eq!(DualBase::inf(false).mul(&DualBase::ZERO, &c).class(), Class::NaN);
    }

    #[test]
    fn distance_examples() {
        let c = cfg();
        let x = DualBase::new(false, -23, 0, &c).unwrap();
        let y = DualBase::new(false, -24, 0b10101101010100101000101, &c).unwrap();
        assert_eq!(log_ulp_distance(&x, &y, &c).unwrap(), 135_111);
        assert_eq!(log_ulp_distance(&x, &x, &c).unwrap(), 0);
        assert!(matches!(log_ulp_distance(&x, &y.neg(), &c), Err(Error::MixedSigns)));
    }
}
