//! Restoring shift-and-add `e^x` and `ln x` with a single explicit Euler
//! correction step evaluated through a truncated multiplier or divider.
//!
//! Both kernels work on raw `u128` codes internally. [`ExpKernel`] and
//! [`LogKernel`] precompute the `ln(1 + 2^-n)` constants once; the free
//! functions [`exp_kernel`] and [`ln_kernel`] are conveniences over them.

mod params;

pub use params::{required_iterations, ExpParams, KernelKind, LogParams};

use crate::error::{Error, Result};
use crate::fixedpt::{round_shr, RoundMode, UFix};
use crate::oracle;

/// Per-iteration diagnostics of one kernel evaluation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KernelTrace {
    /// `d_n` for each executed iteration, in order.
    pub digits: Vec<bool>,
    /// Residual `L_n` code entering each iteration (exp) or running sum (ln).
    pub l_codes: Vec<u128>,
    pub l_final: u128,
    pub e_final: u128,
}

/// `ln(1 + 2^-n)` rounded to nearest-even at `ell` bits, for `n = 0..count`.
fn constant_table(count: u32, ell: u32) -> Vec<u128> {
    (0..count).map(|n| oracle::ln1p_pow2(n, ell).code()).collect()
}

/// Shift `v` from `from` fractional bits to `to`, truncating when narrowing.
#[inline]
fn align(v: u128, from: u32, to: u32) -> u128 {
    if to >= from {
        v << (to - from)
    } else {
        v >> (from - to)
    }
}

/// Precomputed `e^x` kernel.
#[derive(Debug, Clone)]
pub struct ExpKernel {
    cfg: ExpParams,
    consts: Vec<u128>,
    /// `RNE_x_bits(ln 2)`; inputs must lie below it.
    limit: u128,
}

impl ExpKernel {
    pub fn new(cfg: ExpParams) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            consts: constant_table(cfg.iterations, cfg.ell),
            limit: oracle::ln2(cfg.x_bits).code(),
        })
    }

    pub fn params(&self) -> &ExpParams {
        &self.cfg
    }

    /// Exclusive upper bound on input codes.
    pub fn input_limit(&self) -> u128 {
        self.limit
    }

    /// `e^x` for `x_code * 2^-x_bits` in `[0, ln 2)`; returns the output
    /// code at `y_bits` fractional bits (one integer bit).
    #[inline]
    pub fn eval(&self, x_code: u128) -> u128 {
        self.run(x_code, None)
    }

    pub fn eval_traced(&self, x_code: u128) -> (u128, KernelTrace) {
        let mut t = KernelTrace::default();
        let y = self.run(x_code, Some(&mut t));
        (y, t)
    }

    #[inline(always)]
    fn run(&self, x_code: u128, mut trace: Option<&mut KernelTrace>) -> u128 {
        let c = &self.cfg;
        debug_assert!(x_code < self.limit);
        let mut l = x_code << (c.ell - c.x_bits);
        let mut e = 1u128 << c.p;
        // n = 0 compares against ln 2 and never fires below ln 2.
        for n in 1..c.iterations {
            let k = self.consts[n as usize];
            let d = l >= k;
            if let Some(t) = trace.as_deref_mut() {
                t.digits.push(d);
                t.l_codes.push(l);
            }
            if d {
                l -= k;
                e += e >> n;
            }
        }
        if let Some(t) = trace {
            t.l_final = l;
            t.e_final = e;
        }
        let ef = e - (1u128 << c.p);
        let y = e + align(l, c.ell, c.p) + truncated_mul_raw(l, ef, c);
        round_shr(y, c.p - c.y_bits, RoundMode::NearestEven)
    }

    /// Extended evaluation on `[0, 2 ln 2)` with an integer bit on the
    /// residual and the `ln 2` iteration enabled. Returns the significand
    /// code in `[1, 4]` at `y_bits` fractional bits and whether it is `>= 2`.
    pub fn eval_extended(&self, x_code: u128) -> (u128, bool) {
        let c = &self.cfg;
        debug_assert!(x_code < 2 * self.limit);
        let mut l = x_code << (c.ell - c.x_bits);
        let mut e = 1u128 << c.p;
        for n in 0..c.iterations {
            let k = self.consts[n as usize];
            if l >= k {
                l -= k;
                e += e >> n;
            }
        }
        let whole = e >> c.p;
        let ef = e & ((1u128 << c.p) - 1);
        let y = e + align(l * whole, c.ell, c.p) + truncated_mul_raw(l, ef, c);
        let y = round_shr(y, c.p - c.y_bits, RoundMode::NearestEven);
        (y, y >= 2u128 << c.y_bits)
    }
}

/// Truncated Euler-step product `L^f * E^f` at `p` fractional bits.
///
/// `lf` holds `ell` fractional bits with `I - 2` known-zero MSBs; `ef` holds
/// `p` fractional bits. Each operand keeps `ell - (I-2) - r` bits: `lf` drops
/// its `r` LSBs, `ef` keeps its top MSBs. The exact product of the truncated
/// operands is shifted to `p` fractional bits (floor: the carry out of the
/// discarded LSBs is kept), padding with zero LSBs when it is too short.
#[inline(always)]
fn truncated_mul_raw(lf: u128, ef: u128, c: &ExpParams) -> u128 {
    let keep = c.multiplier_width();
    let lt = lf >> c.r;
    let et = align(ef, c.p, keep);
    let prod = lt * et;
    let unit = i64::from(c.ell - c.r) + i64::from(keep);
    let drop = unit - i64::from(c.p);
    if drop >= 0 {
        prod >> drop as u32
    } else {
        prod << (-drop) as u32
    }
}

/// Truncated multiplier on fixed-point operands; see the kernel docs.
pub fn truncated_mul(lf: UFix, ef: UFix, cfg: &ExpParams) -> Result<UFix> {
    cfg.validate()?;
    if lf.width() != cfg.ell || ef.width() != cfg.p {
        return Err(Error::WidthMismatch(lf.width(), cfg.ell));
    }
    let zero_msbs = cfg.iterations - 2;
    if lf.code() >> (cfg.ell - zero_msbs.min(cfg.ell)) != 0 {
        return Err(Error::Domain(format!("L^f must have {zero_msbs} zero MSBs")));
    }
    UFix::new(truncated_mul_raw(lf.code(), ef.code(), cfg), cfg.p)
}

fn check_width(x: &UFix, bits: u32) -> Result<()> {
    if x.width() != bits {
        return Err(Error::WidthMismatch(x.width(), bits));
    }
    Ok(())
}

/// `e^x` for `x` in `[0, ln 2)`; result in `[1, 2]` with one integer bit.
pub fn exp_kernel(x: &UFix, cfg: &ExpParams) -> Result<UFix> {
    let k = ExpKernel::new(*cfg)?;
    check_width(x, cfg.x_bits)?;
    if x.code() >= k.limit {
        return Err(Error::Domain(format!("exp argument {x:?} not below RNE(ln 2)")));
    }
    UFix::with_int_bits(k.eval(x.code()), cfg.y_bits, 2)
}

/// `e^x` for `x` in `[0, 2 ln 2)`; significand in `[1, 4)` and carry flag.
pub fn exp_kernel_extended(x: &UFix, cfg: &ExpParams) -> Result<(UFix, bool)> {
    let k = ExpKernel::new(*cfg)?;
    check_width(x, cfg.x_bits)?;
    if x.code() >= 2 * k.limit {
        return Err(Error::Domain(format!("extended exp argument {x:?} not below 2 RNE(ln 2)")));
    }
    let (y, carry) = k.eval_extended(x.code());
    Ok((UFix::with_int_bits(y, cfg.y_bits, 3)?, carry))
}

/// Precomputed `ln x` kernel.
#[derive(Debug, Clone)]
pub struct LogKernel {
    cfg: LogParams,
    consts: Vec<u128>,
}

impl LogKernel {
    pub fn new(cfg: LogParams) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, consts: constant_table(cfg.iterations, cfg.ell) })
    }

    pub fn params(&self) -> &LogParams {
        &self.cfg
    }

    /// `ln x` for `x_code * 2^-x_bits` in `[1, 2)`; returns the output code
    /// at `y_bits` fractional bits.
    #[inline]
    pub fn eval(&self, x_code: u128) -> u128 {
        self.run(x_code, None)
    }

    pub fn eval_traced(&self, x_code: u128) -> (u128, KernelTrace) {
        let mut t = KernelTrace::default();
        let y = self.run(x_code, Some(&mut t));
        (y, t)
    }

    #[inline(always)]
    fn run(&self, x_code: u128, mut trace: Option<&mut KernelTrace>) -> u128 {
        let c = &self.cfg;
        debug_assert!(x_code >> c.x_bits == 1);
        let x = x_code << (c.p - c.x_bits);
        let mut e = 1u128 << c.p;
        let mut l = 0u128;
        for n in 1..c.iterations {
            // E_n (1 + 2^-n) <= x, compared exactly at p + n bits.
            let d = (e << n) + e <= x << n;
            if let Some(t) = trace.as_deref_mut() {
                t.digits.push(d);
                t.l_codes.push(l);
            }
            if d {
                e += e >> n;
                l += self.consts[n as usize];
            }
        }
        if let Some(t) = trace {
            t.l_final = l;
            t.e_final = e;
        }
        let y = l + truncated_div_raw(x - e, e, c);
        round_shr(y, c.ell - c.y_bits, RoundMode::NearestEven)
    }
}

/// Truncated Euler-step quotient `(x - E_I) / E_I` at `ell` fractional bits.
///
/// The dividend (at `p` bits) loses its `r` LSBs, the divisor keeps its
/// integer bit and `s` fractional MSBs, and the exact integer quotient is
/// truncated toward zero.
#[inline(always)]
fn truncated_div_raw(num: u128, den: u128, c: &LogParams) -> u128 {
    let nt = num >> c.r;
    let dt = den >> (c.p - c.s);
    let shift = i64::from(c.ell) + i64::from(c.r) + i64::from(c.s) - i64::from(c.p);
    if shift >= 0 {
        (nt << shift as u32) / dt
    } else {
        nt / (dt << (-shift) as u32)
    }
}

/// Truncated divider on fixed-point operands; `den` must lie in `[1, 2)`.
pub fn truncated_div(num: UFix, den: UFix, cfg: &LogParams) -> Result<UFix> {
    cfg.validate()?;
    if num.width() != cfg.p || den.width() != cfg.p {
        return Err(Error::WidthMismatch(num.width(), cfg.p));
    }
    if den.code() >> cfg.p != 1 {
        return Err(Error::Domain("divisor must lie in [1, 2)".into()));
    }
    let z = cfg.known_zero_msbs();
    if num.code() >> (cfg.p - z) != 0 {
        return Err(Error::Domain(format!("dividend must have {z} zero MSBs")));
    }
    UFix::new(truncated_div_raw(num.code(), den.code(), cfg), cfg.ell)
}

/// `ln x` for `x` in `[1, 2)`; result in `[0, ln 2]`.
pub fn ln_kernel(x: &UFix, cfg: &LogParams) -> Result<UFix> {
    let k = LogKernel::new(*cfg)?;
    check_width(x, cfg.x_bits)?;
    if x.code() >> cfg.x_bits != 1 {
        return Err(Error::Domain(format!("ln argument {x:?} not in [1, 2)")));
    }
    UFix::new(k.eval(x.code()), cfg.y_bits)
}
