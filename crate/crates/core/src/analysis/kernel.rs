//! Exhaustive and sampled ulp sweeps of the shift-and-add kernels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::UlpStats;
use crate::error::{Error, Result};
use crate::fixedpt::{round_shr, RoundMode, UFix};
use crate::oracle::{self, fast};
use crate::shiftadd::{ExpKernel, ExpParams, KernelKind, LogKernel, LogParams};

/// Above this input width exhaustive sweeps are refused.
pub const MAX_EXHAUSTIVE_BITS: u32 = 24;

const CHUNK: u128 = 1 << 15;

/// Which inputs a sweep visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Exhaustive,
    /// `count` uniform input codes from the seeded ChaCha8 stream, visited
    /// in ascending order (monotonicity is checked between neighbours).
    Sampled { count: u64, seed: u64 },
}

/// 62-bit reference values of `e^x` or `ln x` over every input code of one
/// width, shared by all kernel configurations with those widths.
#[derive(Debug, Clone)]
pub struct RefTable {
    kind: KernelKind,
    x_bits: u32,
    start: u128,
    values: Vec<u64>,
}

impl RefTable {
    pub fn build(kind: KernelKind, x_bits: u32) -> Result<Self> {
        if x_bits > MAX_EXHAUSTIVE_BITS {
            return Err(Error::Domain(format!("reference table over {x_bits}-bit inputs is too large")));
        }
        let (start, end) = domain(kind, x_bits);
        let values = (start as usize..end as usize)
            .into_par_iter()
            .with_min_len(1 << 12)
            .map(|x| reference62(kind, x as u128, x_bits) as u64)
            .collect();
        Ok(Self { kind, x_bits, start, values })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn x_bits(&self) -> u32 {
        self.x_bits
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    fn get(&self, x: u128) -> u128 {
        u128::from(self.values[(x - self.start) as usize])
    }
}

/// Input code range `[start, end)`: `[0, RNE(ln 2))` for exp, `[1, 2)` for ln.
pub fn domain(kind: KernelKind, x_bits: u32) -> (u128, u128) {
    match kind {
        KernelKind::Exp => (0, oracle::ln2(x_bits).code()),
        KernelKind::Log => (1 << x_bits, 2 << x_bits),
    }
}

fn reference62(kind: KernelKind, x: u128, x_bits: u32) -> u128 {
    match kind {
        KernelKind::Exp => oracle::exp_reference62(x, x_bits),
        KernelKind::Log => oracle::ln_reference62(x, x_bits),
    }
}

fn reference_exact(kind: KernelKind, x: u128, x_bits: u32, y_bits: u32) -> u128 {
    let r = match kind {
        KernelKind::Exp => oracle::ref_exp(&UFix::new(x, x_bits).expect("code in range"), y_bits),
        KernelKind::Log => oracle::ref_ln(&UFix::with_int_bits(x, x_bits, 1).expect("code in range"), y_bits),
    };
    r.expect("input inside the kernel domain").code()
}

/// Correctly rounded code from a 62-bit value known to within
/// [`fast::ERR_UNITS`], or `None` when the error interval holds a midpoint.
#[inline]
pub(crate) fn decide62(v: u128, y_bits: u32, err: u128) -> Option<u128> {
    let sh = fast::FRAC - y_bits;
    let lo = round_shr(v.saturating_sub(err), sh, RoundMode::NearestEven);
    let hi = round_shr(v + err, sh, RoundMode::NearestEven);
    (lo == hi).then_some(lo)
}

/// One output sample: kernel code, correctly rounded code, and the 62-bit
/// reference used for the true-error statistic.
#[derive(Debug, Clone, Copy)]
struct Sample {
    y: u128,
    cr: u128,
    v62: u128,
}

struct Evaluator<'a> {
    kind: KernelKind,
    x_bits: u32,
    y_bits: u32,
    eval: &'a (dyn Fn(u128) -> u128 + Sync),
    table: Option<&'a RefTable>,
}

impl Evaluator<'_> {
    fn sample(&self, x: u128) -> Sample {
        let y = (self.eval)(x);
        let v62 = match self.table {
            Some(t) => t.get(x),
            None => reference62(self.kind, x, self.x_bits),
        };
        let cr = if self.y_bits + 10 <= fast::FRAC {
            decide62(v62, self.y_bits, fast::ERR_UNITS)
        } else {
            None
        }
        .unwrap_or_else(|| reference_exact(self.kind, x, self.x_bits, self.y_bits));
        Sample { y, cr, v62 }
    }

    fn stats(&self, xs: impl Iterator<Item = u128>) -> Chunk {
        let mut c = Chunk::default();
        let sh = fast::FRAC.saturating_sub(self.y_bits);
        let scale = (sh as f64).exp2();
        for x in xs {
            let s = self.sample(x);
            let true_err = if self.y_bits <= fast::FRAC {
                (s.y << sh).abs_diff(s.v62) as f64 / scale
            } else {
                f64::NAN
            };
            c.stats.record(s.y.abs_diff(s.cr), true_err);
            if let Some(prev) = c.last {
                if s.y < prev {
                    c.stats.monotonicity_violations += 1;
                }
            } else {
                c.first = Some(s.y);
            }
            c.last = Some(s.y);
        }
        c
    }
}

#[derive(Default)]
struct Chunk {
    stats: UlpStats,
    first: Option<u128>,
    last: Option<u128>,
}

fn merge_chunks(chunks: Vec<Chunk>) -> UlpStats {
    let mut out = UlpStats::default();
    let mut last: Option<u128> = None;
    for c in chunks {
        if let (Some(prev), Some(first)) = (last, c.first) {
            if first < prev {
                out.monotonicity_violations += 1;
            }
        }
        out.merge(&c.stats);
        last = c.last.or(last);
    }
    out
}

fn run(ev: &Evaluator<'_>, sampling: Sampling) -> Result<UlpStats> {
    let (start, end) = domain(ev.kind, ev.x_bits);
    match sampling {
        Sampling::Exhaustive => {
            if ev.x_bits > MAX_EXHAUSTIVE_BITS {
                return Err(Error::Domain(format!(
                    "exhaustive sweep over {}-bit inputs exceeds the {MAX_EXHAUSTIVE_BITS}-bit limit",
                    ev.x_bits
                )));
            }
            let starts: Vec<u128> = (start..end).step_by(CHUNK as usize).collect();
            let chunks = starts.par_iter().map(|&s| ev.stats(s..(s + CHUNK).min(end))).collect();
            Ok(merge_chunks(chunks))
        }
        Sampling::Sampled { count, seed } => {
            let xs = sample_codes(start, end, count, seed);
            let chunks = xs.par_chunks(CHUNK as usize).map(|c| ev.stats(c.iter().copied())).collect();
            Ok(merge_chunks(chunks))
        }
    }
}

/// Sorted, de-duplicated uniform codes in `[start, end)`.
pub fn sample_codes(start: u128, end: u128, count: u64, seed: u64) -> Vec<u128> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs: Vec<u128> = (0..count).map(|_| rng.random_range(start..end)).collect();
    xs.sort_unstable();
    xs.dedup();
    xs
}

/// Ulp statistics of the `e^x` kernel against correctly rounded `e^x`.
pub fn sweep_exp(cfg: &ExpParams, sampling: Sampling, table: Option<&RefTable>) -> Result<UlpStats> {
    let k = ExpKernel::new(*cfg)?;
    check_table(table, KernelKind::Exp, cfg.x_bits)?;
    let eval = |x| k.eval(x);
    run(&Evaluator { kind: KernelKind::Exp, x_bits: cfg.x_bits, y_bits: cfg.y_bits, eval: &eval, table }, sampling)
}

/// Ulp statistics of the `ln x` kernel against correctly rounded `ln x`.
pub fn sweep_log(cfg: &LogParams, sampling: Sampling, table: Option<&RefTable>) -> Result<UlpStats> {
    let k = LogKernel::new(*cfg)?;
    check_table(table, KernelKind::Log, cfg.x_bits)?;
    let eval = |x| k.eval(x);
    run(&Evaluator { kind: KernelKind::Log, x_bits: cfg.x_bits, y_bits: cfg.y_bits, eval: &eval, table }, sampling)
}

/// Sweep an arbitrary evaluator over the exp or ln domain; used to check
/// the engine itself against brute force.
pub fn sweep_fn(
    kind: KernelKind,
    x_bits: u32,
    y_bits: u32,
    eval: &(dyn Fn(u128) -> u128 + Sync),
    sampling: Sampling,
) -> Result<UlpStats> {
    run(&Evaluator { kind, x_bits, y_bits, eval, table: None }, sampling)
}

fn check_table(table: Option<&RefTable>, kind: KernelKind, x_bits: u32) -> Result<()> {
    match table {
        Some(t) if t.kind != kind || t.x_bits != x_bits => Err(Error::Domain(format!(
            "reference table is {:?} over {} bits, sweep needs {kind:?} over {x_bits}",
            t.kind, t.x_bits
        ))),
        _ => Ok(()),
    }
}

/// Cartesian parameter grid for kernel sweeps; `ell = p` throughout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelGrid {
    pub x_bits: u32,
    pub y_bits: u32,
    pub iterations: Vec<u32>,
    pub ell_p: Vec<u32>,
    pub r: Vec<u32>,
    /// Divisor bits; ignored by exp sweeps.
    pub s: Vec<u32>,
}

impl KernelGrid {
    pub fn exp_points(&self) -> Result<Vec<ExpParams>> {
        self.check()?;
        let mut out = Vec::new();
        for &i in &self.iterations {
            for &l in &self.ell_p {
                for &r in &self.r {
                    out.push(ExpParams::new(self.x_bits, self.y_bits, i, l, l, r)?);
                }
            }
        }
        Ok(out)
    }

    pub fn log_points(&self) -> Result<Vec<LogParams>> {
        self.check()?;
        if self.s.is_empty() {
            return Err(Error::InvalidConfig("log grid needs at least one s value".into()));
        }
        let mut out = Vec::new();
        for &i in &self.iterations {
            for &l in &self.ell_p {
                for &r in &self.r {
                    for &s in &self.s {
                        out.push(LogParams::new(self.x_bits, self.y_bits, i, l, l, r, s)?);
                    }
                }
            }
        }
        Ok(out)
    }

    fn check(&self) -> Result<()> {
        if self.iterations.is_empty() || self.ell_p.is_empty() || self.r.is_empty() {
            return Err(Error::InvalidConfig("kernel grid lists must be non-empty".into()));
        }
        Ok(())
    }
}

/// Exhaustive exp sweep over a grid with one shared reference table.
pub fn sweep_exp_grid(points: &[ExpParams], sampling: Sampling) -> Result<Vec<(ExpParams, UlpStats)>> {
    let table = shared_table(KernelKind::Exp, points.iter().map(|p| p.x_bits), sampling)?;
    points.iter().map(|p| Ok((*p, sweep_exp(p, sampling, table.as_ref().filter(|t| t.x_bits == p.x_bits))?))).collect()
}

pub fn sweep_log_grid(points: &[LogParams], sampling: Sampling) -> Result<Vec<(LogParams, UlpStats)>> {
    let table = shared_table(KernelKind::Log, points.iter().map(|p| p.x_bits), sampling)?;
    points.iter().map(|p| Ok((*p, sweep_log(p, sampling, table.as_ref().filter(|t| t.x_bits == p.x_bits))?))).collect()
}

/// A table pays off when several exhaustive points share one input width.
fn shared_table(kind: KernelKind, widths: impl Iterator<Item = u32>, sampling: Sampling) -> Result<Option<RefTable>> {
    let widths: Vec<u32> = widths.collect();
    if sampling != Sampling::Exhaustive || widths.len() < 2 || widths.iter().any(|&w| w != widths[0]) {
        return Ok(None);
    }
    RefTable::build(kind, widths[0]).map(Some)
}
