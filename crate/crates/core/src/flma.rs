//! Log-linear multiply-add: multiplication in the dual-base log domain,
//! addition in a linear floating-point accumulator.
//!
//! [`Flma`] owns a configuration plus the precomputed exp and ln kernels.
//! `p` converts a log-domain value to a [`LinearFloat`] by evaluating
//! `e^b`; `q` converts back by evaluating `ln` on the significand. A sum of
//! products `q(sum p(x_i + y_i))` never rounds a product in the log domain:
//! the exponent sum feeds the extended exp kernel directly.

use crate::config::FlmaConfig;
use crate::dualbase::{Class, DualBase};
use crate::error::{Error, Result};
use crate::fixedpt::{round_shr, RoundMode};
use crate::oracle::BigFloat;
use crate::shiftadd::{ExpKernel, LogKernel};

/// Linear-domain float `±sig * 2^(exp - A)` with `sig` in `[2^A, 2^(A+1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinearFloat {
    class: Class,
    neg: bool,
    exp: i64,
    sig: u128,
}

impl LinearFloat {
    pub const ZERO: Self = Self { class: Class::Zero, neg: false, exp: 0, sig: 0 };
    pub const NAN: Self = Self { class: Class::NaN, neg: false, exp: 0, sig: 0 };

    pub fn inf(neg: bool) -> Self {
        Self { class: Class::Inf, neg, exp: 0, sig: 0 }
    }

    pub fn class(&self) -> Class {
        self.class
    }

    pub fn is_negative(&self) -> bool {
        self.neg
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    /// Significand code with one integer bit and `A` fractional bits.
    pub fn significand(&self) -> u128 {
        self.sig
    }

    pub fn neg(&self) -> Self {
        match self.class {
            Class::Zero | Class::NaN => *self,
            _ => Self { neg: !self.neg, ..*self },
        }
    }

    /// Exact value; `None` for infinity and NaN.
    pub fn to_big(&self, cfg: &FlmaConfig) -> Option<BigFloat> {
        match self.class {
            Class::Zero => Some(BigFloat::zero()),
            Class::Finite => Some(BigFloat::from_parts(self.neg, self.sig.into(), self.exp - i64::from(cfg.acc_bits))),
            _ => None,
        }
    }

    /// Normalized finite value with range handling.
    fn finite(neg: bool, exp: i64, sig: u128, cfg: &FlmaConfig) -> Self {
        debug_assert_eq!(sig >> cfg.acc_bits, 1);
        if exp > cfg.exp_max() {
            Self::inf(neg)
        } else if exp < cfg.exp_min() {
            Self::ZERO
        } else {
            Self { class: Class::Finite, neg, exp, sig }
        }
    }

    pub fn new(neg: bool, exp: i64, sig: u128, cfg: &FlmaConfig) -> Result<Self> {
        if sig >> cfg.acc_bits != 1 {
            return Err(Error::InvalidEncoding(format!("significand {sig:#x} not normalized at A={}", cfg.acc_bits)));
        }
        if exp < cfg.exp_min() || exp > cfg.exp_max() {
            return Err(Error::ExponentRange(exp));
        }
        Ok(Self { class: Class::Finite, neg, exp, sig })
    }
}

/// Guard, round and sticky bits carried through [`Flma::lf_add`].
const GRS: u32 = 3;

#[derive(Debug, Clone)]
pub struct Flma {
    cfg: FlmaConfig,
    exp: ExpKernel,
    log: LogKernel,
}

impl Flma {
    pub fn new(cfg: FlmaConfig) -> Result<Self> {
        Ok(Self { exp: ExpKernel::new(cfg.exp)?, log: LogKernel::new(cfg.log)?, cfg })
    }

    pub fn log32() -> Self {
        Self::new(FlmaConfig::log32()).expect("preset")
    }

    pub fn config(&self) -> &FlmaConfig {
        &self.cfg
    }

    /// `p(x)`: exponent `a`, significand `e^b` at `F + alpha` bits.
    pub fn p_convert(&self, x: &DualBase) -> LinearFloat {
        let c = &self.cfg;
        match x.class() {
            Class::Zero => LinearFloat::ZERO,
            Class::NaN => LinearFloat::NAN,
            Class::Inf => LinearFloat::inf(x.is_negative()),
            Class::Finite => {
                let yb = c.exp.y_bits;
                let mut y = self.exp.eval(x.fraction());
                let mut e = x.exponent();
                if y >> yb >= 2 {
                    y >>= 1;
                    e += 1;
                }
                LinearFloat::finite(x.is_negative(), e, y << (c.acc_bits - yb), c)
            }
        }
    }

    /// `q(v)`: significand narrowed to `F + beta` bits, then `ln` to `F`.
    pub fn q_convert(&self, v: &LinearFloat) -> DualBase {
        let c = &self.cfg;
        match v.class {
            Class::Zero => DualBase::ZERO,
            Class::NaN => DualBase::NAN,
            Class::Inf => DualBase::inf(v.neg),
            Class::Finite => {
                let xb = c.log.x_bits;
                let mut exp = v.exp;
                let mut m = if c.acc_bits >= xb {
                    round_shr(v.sig, c.acc_bits - xb, RoundMode::NearestEven)
                } else {
                    v.sig << (xb - c.acc_bits)
                };
                if m >> xb >= 2 {
                    m >>= 1;
                    exp += 1;
                }
                let mut b = self.log.eval(m);
                if b >= c.ln2_f {
                    b -= c.ln2_f;
                    exp += 1;
                }
                DualBase::finite(v.neg, exp, b, c)
            }
        }
    }

    /// Floating add at `A` fractional bits rounded to nearest-even.
    pub fn lf_add(&self, u: &LinearFloat, v: &LinearFloat) -> LinearFloat {
        let c = &self.cfg;
        match (u.class, v.class) {
            (Class::NaN, _) | (_, Class::NaN) => return LinearFloat::NAN,
            (Class::Inf, Class::Inf) if u.neg != v.neg => return LinearFloat::NAN,
            (Class::Inf, _) => return *u,
            (_, Class::Inf) => return *v,
            (Class::Zero, _) => return *v,
            (_, Class::Zero) => return *u,
            (Class::Finite, Class::Finite) => {}
        }
        let (big, small) = if (u.exp, u.sig) >= (v.exp, v.sig) { (u, v) } else { (v, u) };
        let top = c.acc_bits + GRS;
        let bm = big.sig << GRS;
        let d = (big.exp - small.exp) as u64;
        let sm = if d > u64::from(top) + 1 {
            1
        } else {
            let s = small.sig << GRS;
            let d = d as u32;
            (s >> d) | u128::from(s & ((1u128 << d) - 1) != 0)
        };
        let mut exp = big.exp;
        let mut m = if big.neg == small.neg { bm + sm } else { bm - sm };
        if m == 0 {
            return LinearFloat::ZERO;
        }
        let msb = 127 - m.leading_zeros();
        if msb > top {
            m = (m >> 1) | (m & 1);
            exp += 1;
        } else if msb < top {
            // Only exact (d <= 1) cancellations shift by more than one bit.
            m <<= top - msb;
            exp -= i64::from(top - msb);
        }
        let mut sig = round_shr(m, GRS, RoundMode::NearestEven);
        if sig >> c.acc_bits == 2 {
            sig >>= 1;
            exp += 1;
        }
        LinearFloat::finite(big.neg, exp, sig, c)
    }

    pub fn lf_sub(&self, u: &LinearFloat, v: &LinearFloat) -> LinearFloat {
        self.lf_add(u, &v.neg())
    }

    pub fn mul(&self, x: &DualBase, y: &DualBase) -> DualBase {
        x.mul(y, &self.cfg)
    }

    pub fn div(&self, x: &DualBase, y: &DualBase) -> Result<DualBase> {
        x.div(y, &self.cfg)
    }

    pub fn sqrt(&self, x: &DualBase) -> Result<DualBase> {
        x.sqrt(&self.cfg)
    }

    pub fn pow_int(&self, x: &DualBase, n: i32) -> Result<DualBase> {
        x.pow_int(n, &self.cfg)
    }

    /// `q(p(x) + p(y))`.
    pub fn add(&self, x: &DualBase, y: &DualBase) -> DualBase {
        self.q_convert(&self.lf_add(&self.p_convert(x), &self.p_convert(y)))
    }

    pub fn sub(&self, x: &DualBase, y: &DualBase) -> DualBase {
        self.add(x, &y.neg())
    }

    /// `p(x * y)` without rounding the product in the log domain: the
    /// unreduced `b_x + b_y` goes through the extended exp kernel.
    pub fn fused_term(&self, x: &DualBase, y: &DualBase) -> LinearFloat {
        let c = &self.cfg;
        let neg = x.is_negative() != y.is_negative();
        match (x.class(), y.class()) {
            (Class::NaN, _) | (_, Class::NaN) => return LinearFloat::NAN,
            (Class::Inf, Class::Zero) | (Class::Zero, Class::Inf) => return LinearFloat::NAN,
            (Class::Inf, _) | (_, Class::Inf) => return LinearFloat::inf(neg),
            (Class::Zero, _) | (_, Class::Zero) => return LinearFloat::ZERO,
            (Class::Finite, Class::Finite) => {}
        }
        let yb = c.exp.y_bits;
        let mut exp = x.exponent() + y.exponent();
        let (e, carry) = self.exp.eval_extended(x.fraction() + y.fraction());
        // Significand at yb + 1 fractional bits in [1, 2).
        let (m, frac) = if carry {
            exp += 1;
            (e, yb + 1)
        } else {
            (e << 1, yb + 1)
        };
        let mut sig = if c.acc_bits >= frac {
            m << (c.acc_bits - frac)
        } else {
            round_shr(m, frac - c.acc_bits, RoundMode::NearestEven)
        };
        if sig >> c.acc_bits >= 2 {
            sig >>= 1;
            exp += 1;
        }
        LinearFloat::finite(neg, exp, sig, c)
    }

    /// Unreduced linear sum of `fused_term(x_i, y_i)` in input order.
    pub fn accumulate(&self, xs: &[DualBase], ys: &[DualBase]) -> Result<LinearFloat> {
        if xs.len() != ys.len() {
            return Err(Error::Domain(format!("inner product of lengths {} and {}", xs.len(), ys.len())));
        }
        Ok(xs.iter().zip(ys).fold(LinearFloat::ZERO, |acc, (x, y)| self.lf_add(&acc, &self.fused_term(x, y))))
    }

    /// `q(sum_i p(x_i + y_i))`, accumulated left to right.
    pub fn inner_product(&self, xs: &[DualBase], ys: &[DualBase]) -> Result<DualBase> {
        Ok(self.q_convert(&self.accumulate(xs, ys)?))
    }

    pub fn encode(&self, v: &BigFloat) -> Result<DualBase> {
        DualBase::encode(v, &self.cfg)
    }

    pub fn encode_f64(&self, v: f64) -> Result<DualBase> {
        DualBase::encode_f64(v, &self.cfg)
    }

    pub fn decode(&self, x: &DualBase, prec: u32) -> Result<BigFloat> {
        x.decode(prec, &self.cfg)
    }
}
