//! System parameters binding the shift-and-add kernels to the dual-base
//! arithmetic, and the two named presets.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::oracle;
use crate::shiftadd::{required_iterations, ExpParams, KernelKind, LogParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Log32,
    Log64,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Log32 => "log32",
            Preset::Log64 => "log64",
        }
    }

    /// Kernel guard bits on top of `F`: `ell = p = F + guard + alpha`.
    fn guard(self) -> u32 {
        match self {
            Preset::Log32 => 4,
            Preset::Log64 => 6,
        }
    }

    fn base(self) -> (u32, u32) {
        match self {
            Preset::Log32 => (8, 23),
            Preset::Log64 => (11, 52),
        }
    }

    pub fn config(self) -> FlmaConfig {
        let (e, f) = self.base();
        FlmaConfig::derived(self, e, f, 1, 1, None).expect("presets are valid")
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log32" => Ok(Preset::Log32),
            "log64" => Ok(Preset::Log64),
            _ => Err(Error::InvalidConfig(format!("unknown preset `{s}` (expected log32 or log64)"))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters of one FLMA system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FlmaConfig {
    /// Bits of the two's complement base-2 exponent `a`.
    pub e_bits: u32,
    /// Fractional bits of the base-e exponent `b`.
    pub f_bits: u32,
    pub alpha: u32,
    pub beta: u32,
    /// Fractional bits of the linear-domain accumulator.
    pub acc_bits: u32,
    /// `p(.)` kernel: `b` at `F` bits to a significand at `F + alpha`.
    pub exp: ExpParams,
    /// `q(.)` kernel: significand at `F + beta` bits to `b` at `F`.
    pub log: LogParams,
    /// `RNE_F(ln 2)`; every normalized `b` code lies below it.
    pub ln2_f: u128,
}

/// Parameter overrides applied on top of a preset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub e_bits: Option<u32>,
    pub f_bits: Option<u32>,
    pub alpha: Option<u32>,
    pub beta: Option<u32>,
    pub acc_bits: Option<u32>,
}

impl FlmaConfig {
    /// Kernels derived from `(F, alpha, beta)` the way `preset` derives its
    /// own: exp `I` from the `F + alpha` accuracy target, log `I` two above
    /// the `F + beta` target, `ell = p = F + guard + extra`.
    pub fn derived(preset: Preset, e_bits: u32, f_bits: u32, alpha: u32, beta: u32, acc_bits: Option<u32>) -> Result<Self> {
        if f_bits == 0 || f_bits > 62 {
            return Err(Error::InvalidConfig(format!("F={f_bits} must be in 1..=62")));
        }
        let g = preset.guard();
        let exp_bits = f_bits + alpha;
        let log_bits = f_bits + beta;
        let exp_i = required_iterations(2f64.powi(-(exp_bits as i32)), KernelKind::Exp);
        let log_i = required_iterations(2f64.powi(-(log_bits as i32)), KernelKind::Log) + 2;
        let ep = f_bits + g + alpha;
        let lp = f_bits + g + beta;
        let exp = ExpParams::new(f_bits, exp_bits, exp_i, ep, ep, 2)?;
        let log = LogParams::new(log_bits, f_bits, log_i, lp, lp, 3, 9)?;
        Self::new(e_bits, f_bits, alpha, beta, acc_bits.unwrap_or(f_bits + alpha), exp, log)
    }

    pub fn new(e_bits: u32, f_bits: u32, alpha: u32, beta: u32, acc_bits: u32, exp: ExpParams, log: LogParams) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(2..=32).contains(&e_bits) {
            return bad(format!("E={e_bits} must be in 2..=32"));
        }
        if f_bits == 0 || f_bits > 62 {
            return bad(format!("F={f_bits} must be in 1..=62"));
        }
        if alpha < 1 {
            return bad("alpha must be at least 1 for a unique p(.) conversion".into());
        }
        if beta < 1 {
            return bad("beta must be at least 1 for a unique q(.) conversion".into());
        }
        if acc_bits < f_bits + alpha {
            return bad(format!("A={acc_bits} must be >= F + alpha = {}", f_bits + alpha));
        }
        if acc_bits > 120 {
            return bad(format!("A={acc_bits} above 120 bits unsupported"));
        }
        exp.validate()?;
        log.validate()?;
        if exp.x_bits != f_bits || exp.y_bits != f_bits + alpha {
            return bad(format!(
                "exp kernel widths x={} y={} must be F={} and F + alpha={}",
                exp.x_bits,
                exp.y_bits,
                f_bits,
                f_bits + alpha
            ));
        }
        if log.x_bits != f_bits + beta || log.y_bits != f_bits {
            return bad(format!(
                "log kernel widths x={} y={} must be F + beta={} and F={}",
                log.x_bits,
                log.y_bits,
                f_bits + beta,
                f_bits
            ));
        }
        Ok(Self { e_bits, f_bits, alpha, beta, acc_bits, exp, log, ln2_f: oracle::ln2(f_bits).code() })
    }

    /// Preset with `(E, F, alpha, beta, A)` overrides; kernels are rederived
    /// whenever any override is present.
    pub fn with_overrides(preset: Preset, o: &Overrides) -> Result<Self> {
        if *o == Overrides::default() {
            return Ok(preset.config());
        }
        let (e, f) = preset.base();
        Self::derived(
            preset,
            o.e_bits.unwrap_or(e),
            o.f_bits.unwrap_or(f),
            o.alpha.unwrap_or(1),
            o.beta.unwrap_or(1),
            o.acc_bits,
        )
    }

    pub fn log32() -> Self {
        Preset::Log32.config()
    }

    pub fn log64() -> Self {
        Preset::Log64.config()
    }

    pub fn exp_min(&self) -> i64 {
        -(1i64 << (self.e_bits - 1))
    }

    pub fn exp_max(&self) -> i64 {
        (1i64 << (self.e_bits - 1)) - 1
    }

    /// `key=value` description of every parameter, for output headers.
    pub fn describe(&self) -> Vec<(String, String)> {
        let e = &self.exp;
        let l = &self.log;
        vec![
            ("E".into(), self.e_bits.to_string()),
            ("F".into(), self.f_bits.to_string()),
            ("alpha".into(), self.alpha.to_string()),
            ("beta".into(), self.beta.to_string()),
            ("A".into(), self.acc_bits.to_string()),
            ("exp".into(), format!("x={} y={} I={} ell={} p={} r={}", e.x_bits, e.y_bits, e.iterations, e.ell, e.p, e.r)),
            ("log".into(), format!("x={} y={} I={} ell={} p={} r={} s={}", l.x_bits, l.y_bits, l.iterations, l.ell, l.p, l.r, l.s)),
            ("ln2_F".into(), format!("{:#x}", self.ln2_f)),
        ]
    }
}
