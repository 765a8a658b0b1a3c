use crate::error::{Error, Result};

/// Configuration of the `e^x` kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExpParams {
    pub x_bits: u32,
    pub y_bits: u32,
    /// Terminal iteration index `I`; recurrences run `n = 1..I`.
    pub iterations: u32,
    /// Fractional bits of the residual `L_n`.
    pub ell: u32,
    /// Fractional bits of the product `E_n`.
    pub p: u32,
    /// Extra LSBs dropped from both multiplier operands.
    pub r: u32,
}

/// Configuration of the `ln x` kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LogParams {
    pub x_bits: u32,
    pub y_bits: u32,
    pub iterations: u32,
    pub ell: u32,
    pub p: u32,
    /// Dividend LSBs dropped before the Euler-step division.
    pub r: u32,
    /// Divisor fractional bits kept.
    pub s: u32,
}

// Widest fixed-point word the kernels hold in a u128 with headroom for
// the exact `E_n * (1 + 2^-n)` comparison.
const MAX_BITS: u32 = 100;

impl ExpParams {
    pub fn new(x_bits: u32, y_bits: u32, iterations: u32, ell: u32, p: u32, r: u32) -> Result<Self> {
        let cfg = Self { x_bits, y_bits, iterations, ell, p, r };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `x_bits = y_bits = bits` with `ell = p`.
    pub fn square(bits: u32, iterations: u32, ell_p: u32, r: u32) -> Result<Self> {
        Self::new(bits, bits, iterations, ell_p, ell_p, r)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.iterations < 3 {
            return bad(format!("exp iterations I={} must be at least 3", self.iterations));
        }
        if self.x_bits == 0 || self.y_bits == 0 {
            return bad("exp x_bits and y_bits must be positive".into());
        }
        if self.ell < self.x_bits {
            return bad(format!("exp ell={} must be >= x_bits={}", self.ell, self.x_bits));
        }
        if self.p < self.y_bits {
            return bad(format!("exp p={} must be >= y_bits={}", self.p, self.y_bits));
        }
        if self.r > 4 {
            return bad(format!("exp r={} must be in 0..=4", self.r));
        }
        if self.ell.max(self.p) > MAX_BITS {
            return bad(format!("exp ell/p above {MAX_BITS} bits unsupported"));
        }
        if self.multiplier_width() == 0 {
            return bad(format!(
                "exp multiplier operands vanish: ell - (I - 2) - r = {} - {} - {} <= 0",
                self.ell,
                self.iterations - 2,
                self.r
            ));
        }
        Ok(())
    }

    /// Bits kept from each truncated multiplier operand: `ell - (I-2) - r`.
    pub fn multiplier_width(&self) -> u32 {
        self.ell.saturating_sub(self.iterations - 2).saturating_sub(self.r)
    }

    /// Product bits retained after alignment to `p`: `p - I + 2`.
    pub fn product_bits(&self) -> u32 {
        self.p + 2 - self.iterations.min(self.p + 2)
    }

    /// Product LSBs below the `p` alignment whose carry is absorbed.
    pub fn product_dropped_bits(&self) -> i64 {
        i64::from(self.ell - self.r) + i64::from(self.multiplier_width()) - i64::from(self.p)
    }
}

impl LogParams {
    pub fn new(x_bits: u32, y_bits: u32, iterations: u32, ell: u32, p: u32, r: u32, s: u32) -> Result<Self> {
        let cfg = Self { x_bits, y_bits, iterations, ell, p, r, s };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn square(bits: u32, iterations: u32, ell_p: u32, r: u32, s: u32) -> Result<Self> {
        Self::new(bits, bits, iterations, ell_p, ell_p, r, s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.iterations < 3 {
            return bad(format!("log iterations I={} must be at least 3", self.iterations));
        }
        if self.x_bits == 0 || self.y_bits == 0 {
            return bad("log x_bits and y_bits must be positive".into());
        }
        if self.ell < self.y_bits {
            return bad(format!("log ell={} must be >= y_bits={}", self.ell, self.y_bits));
        }
        if self.p < self.x_bits {
            return bad(format!("log p={} must be >= x_bits={}", self.p, self.x_bits));
        }
        if self.r > 4 {
            return bad(format!("log r={} must be in 0..=4", self.r));
        }
        if self.s == 0 || self.s > self.p {
            return bad(format!("log s={} must be in 1..=p", self.s));
        }
        if self.ell.max(self.p) > MAX_BITS || self.p + self.iterations + 2 > 127 {
            return bad(format!("log ell/p above {MAX_BITS} bits or p + I above 125 unsupported"));
        }
        if self.dividend_width() == 0 {
            return bad("log dividend vanishes: p - max(0, I-3) - r <= 0".into());
        }
        Ok(())
    }

    /// Dividend bits after dropping known-zero MSBs and `r` LSBs.
    pub fn dividend_width(&self) -> u32 {
        self.p.saturating_sub(self.known_zero_msbs()).saturating_sub(self.r)
    }

    pub fn divisor_width(&self) -> u32 {
        1 + self.s
    }

    pub fn known_zero_msbs(&self) -> u32 {
        self.iterations.saturating_sub(3)
    }
}

/// Which kernel an iteration-count target refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Exp,
    Log,
}

/// Smallest terminal iteration `I` meeting accuracy `eps` with one Euler
/// step, using the residual bound `L_I < 2^(1-I)`. Clamped to at least 3.
///
/// exp requires `L_I <= sqrt(2 eps / e^1.56)`; log requires
/// `x - E_I <= sqrt(2 eps)`.
pub fn required_iterations(eps: f64, kind: KernelKind) -> u32 {
    assert!(eps > 0.0 && eps < 1.0, "accuracy target must lie in (0, 1)");
    let log2_bound = match kind {
        KernelKind::Exp => 0.5 * (1.0 + eps.log2() - 1.56 * std::f64::consts::LOG2_E),
        KernelKind::Log => 0.5 * (1.0 + eps.log2()),
    };
    // 2^(1-I) <= 2^log2_bound  <=>  I >= 1 - log2_bound
    let i = (1.0 - log2_bound).ceil();
    (i as u32).max(3)
}
