//! Log-ulp accuracy of FLMA addition against correctly rounded sums.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::kernel::decide62;
use crate::config::FlmaConfig;
use crate::dualbase::{log_ulp_distance, Class, DualBase};
use crate::error::{Error, Result};
use crate::flma::Flma;
use crate::oracle::{fast, BigFloat, Context};

/// Nearest dual-base value to the exact sum `x + y` (ties cannot occur for
/// non-trivial fractions, so this is the `<= 0.5` log-ulp reference).
/// Out-of-range results saturate like the arithmetic itself.
pub fn reference_sum(x: &DualBase, y: &DualBase, cfg: &FlmaConfig) -> Result<DualBase> {
    match (x.class(), y.class()) {
        (Class::NaN, _) | (_, Class::NaN) => return Ok(DualBase::NAN),
        (Class::Inf, Class::Inf) if x.is_negative() != y.is_negative() => return Ok(DualBase::NAN),
        (Class::Inf, _) => return Ok(*x),
        (_, Class::Inf) | (Class::Zero, _) => return Ok(*y),
        (_, Class::Zero) => return Ok(*x),
        _ => {}
    }
    if *x == y.neg() {
        return Ok(DualBase::ZERO);
    }
    if x.fraction() == 0 && y.fraction() == 0 {
        let s = dyadic(x).add_exact(&dyadic(y));
        return Ok(match DualBase::encode(&s, cfg) {
            Err(Error::ExponentRange(a)) => DualBase::finite(s.is_negative(), a, 0, cfg),
            r => r?,
        });
    }

    const GUARD: u32 = 16;
    let f = cfg.f_bits;
    for prec in (7..=14).map(|k| 1u32 << k) {
        let w = prec + 8;
        let (vx, vy) = (x.decode(w, cfg)?, y.decode(w, cfg)?);
        let s = vx.add_exact(&vy);
        let Some(e) = s.ilog2() else { continue };
        let mag = vx.abs().add_exact(&vy.abs()).ilog2().expect("nonzero");
        // Each operand is within 2^-w relative, so s is within 2^q relative
        // and ln(m) within 2^(q+1) absolute.
        let q = mag + 2 - i64::from(w) - e;
        if q + 1 + i64::from(f) > -i64::from(GUARD) {
            continue;
        }
        let m = s.abs().ldexp(-e);
        let lm = Context::new(prec + 32).ln(&m)?;
        let u = lm.to_scaled_floor(f + GUARD);
        let low: u64 = (&u % (1u64 << GUARD)).try_into().expect("below 2^GUARD");
        let half = 1u64 << (GUARD - 1);
        if low.abs_diff(half) <= 2 {
            continue;
        }
        let b: u128 = (u >> GUARD as usize).try_into().expect("fraction fits");
        let b = b + u128::from(low > half);
        let (a, b) = if b >= cfg.ln2_f { (e + 1, b - cfg.ln2_f) } else { (e, b) };
        return Ok(DualBase::finite(s.is_negative(), a, b, cfg));
    }
    Err(Error::Domain(format!("sum of {x:?} and {y:?} could not be rounded")))
}

fn dyadic(x: &DualBase) -> BigFloat {
    BigFloat::from_parts(x.is_negative(), 1u32.into(), x.exponent())
}

/// Sample set for the addition sweep: `x` and `y` both in `[1, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AddPlan {
    /// Evenly spaced `x` fraction codes; `None` visits every code.
    pub x_points: Option<u64>,
    /// Number of `y` fraction codes drawn uniformly from ChaCha8(`seed`).
    pub y_count: u32,
    pub seed: u64,
}

impl AddPlan {
    pub const REDUCED: AddPlan = AddPlan { x_points: Some(4096), y_count: 64, seed: 1 };

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn x_codes(&self, ln2_f: u128) -> Vec<u128> {
        match self.x_points {
            None => (0..ln2_f).collect(),
            Some(n) => (0..u128::from(n)).map(|i| i * ln2_f / u128::from(n)).collect(),
        }
    }

    pub fn y_codes(&self, ln2_f: u128) -> Vec<u128> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.y_count).map(|_| rng.random_range(0..ln2_f)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddStats {
    pub alpha: u32,
    pub beta: u32,
    pub samples: u64,
    pub max_logulp: u128,
    /// Counts of log-ulp distance 0, 1, 2 and more.
    pub hist: [u64; 4],
}

impl AddStats {
    fn new(cfg: &FlmaConfig) -> Self {
        Self { alpha: cfg.alpha, beta: cfg.beta, samples: 0, max_logulp: 0, hist: [0; 4] }
    }

    fn record(&mut self, d: u128) {
        self.samples += 1;
        self.max_logulp = self.max_logulp.max(d);
        self.hist[d.min(3) as usize] += 1;
    }

    fn merge(&mut self, o: &AddStats) {
        self.samples += o.samples;
        self.max_logulp = self.max_logulp.max(o.max_logulp);
        for (a, b) in self.hist.iter_mut().zip(o.hist) {
            *a += b;
        }
    }

    pub fn incorrect(&self) -> u64 {
        self.samples - self.hist[0]
    }

    pub fn frac_incorrect(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.incorrect() as f64 / self.samples as f64
        }
    }
}

// Error of the fast sum reference in units of 2^-62: two exponentials,
// halving, and one logarithm each contribute at most ERR_UNITS + 1.
const SUM_ERR_UNITS: u128 = 4 * fast::ERR_UNITS;

/// 62-bit shortcut for `x + y` with both in `[1, 2)`; `None` near a midpoint.
fn fast_sum(ex: u128, ey: u128, f_bits: u32, ln2_f: u128) -> Option<(i64, u128)> {
    let lm = fast::ln((ex + ey) >> 1);
    let b = decide62(lm, f_bits, SUM_ERR_UNITS)?;
    Some(if b >= ln2_f { (2, b - ln2_f) } else { (1, b) })
}

/// Compare `flma.add` with [`reference_sum`] for every configuration on
/// one shared sample set. All configurations must share `E` and `F`.
pub fn sweep_flma_add(flmas: &[Flma], plan: &AddPlan) -> Result<Vec<AddStats>> {
    let Some(first) = flmas.first() else { return Ok(Vec::new()) };
    let cfg0 = *first.config();
    if flmas.iter().any(|m| m.config().f_bits != cfg0.f_bits || m.config().e_bits != cfg0.e_bits) {
        return Err(Error::InvalidConfig("add sweep configurations must share E and F".into()));
    }
    let f = cfg0.f_bits;
    if f + 10 > fast::FRAC {
        return Err(Error::InvalidConfig(format!("add sweep supports F <= {}, got {f}", fast::FRAC - 10)));
    }
    let xs = plan.x_codes(cfg0.ln2_f);
    let ys = plan.y_codes(cfg0.ln2_f);
    let exp62 = |b: u128| fast::exp(b << (fast::FRAC - f));
    let ey: Vec<u128> = ys.iter().map(|&b| exp62(b)).collect();
    let yv: Vec<DualBase> = ys.iter().map(|&b| DualBase::finite(false, 0, b, &cfg0)).collect();

    let partial: Vec<Vec<AddStats>> = xs
        .par_chunks(64)
        .map(|chunk| {
            let mut acc: Vec<AddStats> = flmas.iter().map(|m| AddStats::new(m.config())).collect();
            for &bx in chunk {
                let x = DualBase::finite(false, 0, bx, &cfg0);
                let ex = exp62(bx);
                for (y, &e) in yv.iter().zip(&ey) {
                    let reference = match fast_sum(ex, e, f, cfg0.ln2_f) {
                        Some((a, b)) => DualBase::finite(false, a, b, &cfg0),
                        None => reference_sum(&x, y, &cfg0)?,
                    };
                    for (m, st) in flmas.iter().zip(acc.iter_mut()) {
                        st.record(log_ulp_distance(&m.add(&x, y), &reference, m.config())?);
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let mut out: Vec<AddStats> = flmas.iter().map(|m| AddStats::new(m.config())).collect();
    for p in &partial {
        for (o, s) in out.iter_mut().zip(p) {
            o.merge(s);
        }
    }
    Ok(out)
}
