//! Fuzz and exhaustive property harnesses shared by the integration tests
//! and the acceptance runner. Each returns a summary on success and a
//! description of the first counterexample on failure.

#![allow(dead_code)]

use std::cmp::Ordering;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use flma::dualbase::{log_ulp_distance, Class, DualBase};
use flma::fixedpt::{RoundMode, UFix};
use flma::oracle::{self, BigFloat, Context};
use flma::softfloat::{Format, SoftFloat};
use flma::{Flma, FlmaConfig};

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

// ---------------------------------------------------------------------------
// Softfloat against exact big-number arithmetic.

#[derive(Debug, Clone, Copy)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Sqrt,
    Fma,
}

const OPS: [Op; 6] = [Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Sqrt, Op::Fma];

/// Expected result before packing.
enum Want {
    Nan,
    Inf,
    Value(BigFloat),
}

/// Round-to-odd encoding of `num / den` with at least `bits` significant
/// bits: exact when the division is, otherwise a sticky LSB marks the rest.
fn odd_quotient(a: &BigFloat, b: &BigFloat, bits: u32) -> BigFloat {
    let k = u64::from(bits) + 2 + b.mantissa().bits();
    let num = a.mantissa() << k as usize;
    let q = &num / b.mantissa();
    let sticky = u8::from(&q * b.mantissa() != num);
    let m = (q << 1usize) + BigUint::from(sticky);
    BigFloat::from_parts(a.is_negative() != b.is_negative(), m, a.exponent() - b.exponent() - k as i64 - 1)
}

fn odd_sqrt(a: &BigFloat, bits: u32) -> BigFloat {
    // a = m 2^e with e made even, then scaled so the root has `bits` bits.
    let (mut m, mut e) = (a.mantissa().clone(), a.exponent());
    if e % 2 != 0 {
        m <<= 1usize;
        e -= 1;
    }
    let k = u64::from(bits) + 2;
    let scaled = m << (2 * k) as usize;
    let s = scaled.sqrt();
    let sticky = u8::from(&s * &s != scaled);
    BigFloat::from_parts(false, (s << 1usize) + BigUint::from(sticky), e / 2 - k as i64 - 1)
}

fn want(op: Op, x: &BigFloat, y: &BigFloat, z: &BigFloat, p: u32) -> Want {
    match op {
        Op::Add => Want::Value(x.add_exact(y)),
        Op::Sub => Want::Value(x.add_exact(&y.neg())),
        Op::Mul => Want::Value(x.mul_exact(y)),
        Op::Fma => Want::Value(x.mul_exact(y).add_exact(z)),
        Op::Div if y.is_zero() && x.is_zero() => Want::Nan,
        Op::Div if y.is_zero() => Want::Inf,
        Op::Div if x.is_zero() => Want::Value(BigFloat::zero()),
        Op::Div => Want::Value(odd_quotient(x, y, p + 2)),
        Op::Sqrt if x.is_zero() => Want::Value(BigFloat::zero()),
        Op::Sqrt if x.is_negative() => Want::Nan,
        Op::Sqrt => Want::Value(odd_sqrt(x, p + 2)),
    }
}

/// Operand that is normal or zero most of the time, with exponents either
/// uniform over the format or clustered around `near`.
fn operand(r: &mut ChaCha8Rng, fmt: Format, near: Option<i64>) -> SoftFloat {
    let f = fmt.frac_bits();
    let width = 1 + fmt.exp_bits() + f;
    loop {
        let raw: u64 = r.random::<u64>() & if width == 64 { u64::MAX } else { (1 << width) - 1 };
        let frac = raw & ((1 << f) - 1);
        let sign = raw >> (width - 1) & 1;
        let biased = match (near, r.random_range(0..8)) {
            (_, 0) => 0,
            (Some(c), 1..=5) => (c + r.random_range(-(f as i64) - 3..=f as i64 + 3)).clamp(1, 2 * fmt.bias()),
            (None, 1..=4) => fmt.bias() + r.random_range(-40..=40),
            _ => ((raw >> f) & ((1 << fmt.exp_bits()) - 1)) as i64,
        };
        let biased = biased as u64;
        if biased == (1 << fmt.exp_bits()) - 1 {
            continue;
        }
        let frac = if biased == 0 && r.random_bool(0.5) { 0 } else { frac };
        return SoftFloat::from_bits(fmt, frac | (biased << f) | (sign << (width - 1)));
    }
}

fn biased_exp(v: &SoftFloat) -> i64 {
    let f = v.format().frac_bits();
    ((v.bits() >> f) & ((1 << v.format().exp_bits()) - 1)) as i64
}

fn check_one(op: Op, x: &SoftFloat, y: &SoftFloat, z: &SoftFloat) -> Result<(), String> {
    let fmt = x.format();
    let got = match op {
        Op::Add => x.add(y),
        Op::Sub => x.sub(y),
        Op::Mul => x.mul(y),
        Op::Div => x.div(y),
        Op::Sqrt => x.sqrt(),
        Op::Fma => x.fma(y, z),
    };
    let big = |v: &SoftFloat| v.to_big().expect("finite operand");
    let p = fmt.precision();
    let ok = match want(op, &big(x), &big(y), &big(z), p) {
        Want::Nan => got.is_nan(),
        // A zero divisor keeps its sign, which the exact value drops.
        Want::Inf => got.is_infinite() && got.is_negative() == (x.is_negative() != y.is_negative()),
        Want::Value(v) if v.is_zero() => got.is_zero(),
        Want::Value(v) => {
            let r = Context::new(p).round(&v);
            let lead = r.ilog2().expect("nonzero");
            if lead > fmt.emax() {
                got.is_infinite() && got.is_negative() == r.is_negative()
            } else if lead < fmt.emin() {
                got.is_zero()
            } else {
                got.to_big().is_some_and(|g| g == r)
            }
        }
    };
    if ok {
        Ok(())
    } else {
        Err(format!("{op:?}({x:?}, {y:?}, {z:?}) gave {got:?}"))
    }
}

/// `count` random operations spread over all six kinds.
pub fn softfloat_fuzz(fmt: Format, count: u64, seed: u64) -> Result<String, String> {
    const CHUNK: u64 = 1 << 14;
    let chunks = count.div_ceil(CHUNK);
    (0..chunks).into_par_iter().try_for_each(|c| {
        let mut r = rng(seed, c);
        for _ in 0..CHUNK.min(count - c * CHUNK) {
            let op = OPS[r.random_range(0..OPS.len())];
            let x = operand(&mut r, fmt, None);
            let near = matches!(op, Op::Add | Op::Sub | Op::Fma).then(|| biased_exp(&x));
            let y = operand(&mut r, fmt, near);
            let z = operand(&mut r, fmt, near);
            check_one(op, &x, &y, &z)?;
        }
        Ok::<(), String>(())
    })?;
    Ok(format!("{count} {fmt:?} ops bit-exact"))
}

// ---------------------------------------------------------------------------
// Correctly rounded exp / ln against re-evaluation at doubled precision.

fn doubled(v: &BigFloat, out_width: u32, int_bits: u32) -> u128 {
    v.to_ufix(out_width, int_bits, RoundMode::NearestEven).expect("in range").code()
}

pub fn reference_recheck(count: u64, seed: u64) -> Result<String, String> {
    let mut r = rng(seed, 0);
    let ln2 = oracle::ln2(60).to_f64();
    for i in 0..count {
        let xb = if i % 2 == 0 { 23 } else { 52 };
        let w = xb + 1;
        let ctx = Context::new(2 * w + 64);
        let lim = (ln2 * 2f64.powi(xb as i32)) as u128;
        let x = UFix::new(r.random_range(0..lim), xb).unwrap();
        let got = oracle::ref_exp(&x, w).map_err(|e| e.to_string())?.code();
        let again = doubled(&ctx.exp(&BigFloat::from_ufix(&x)), w, 2);
        if got != again {
            return Err(format!("ref_exp({x:?}, {w}) = {got:#x}, doubled precision gives {again:#x}"));
        }
        let m = UFix::with_int_bits(r.random_range(1u128 << xb..2u128 << xb), xb, 1).unwrap();
        let got = oracle::ref_ln(&m, xb).map_err(|e| e.to_string())?.code();
        let again = doubled(&ctx.ln(&BigFloat::from_ufix(&m)).map_err(|e| e.to_string())?, xb, 0);
        if got != again {
            return Err(format!("ref_ln({m:?}, {xb}) = {got:#x}, doubled precision gives {again:#x}"));
        }
    }
    Ok(format!("{count} exp and {count} ln points agree"))
}

// ---------------------------------------------------------------------------
// Dual-base properties.

fn random_db(r: &mut ChaCha8Rng, cfg: &FlmaConfig) -> DualBase {
    match r.random_range(0..64) {
        0 => DualBase::ZERO,
        1 => DualBase::inf(r.random()),
        _ => {
            let a = r.random_range(-20..=20);
            DualBase::new(r.random(), a, r.random_range(0..cfg.ln2_f), cfg).unwrap()
        }
    }
}

fn well_formed(v: &DualBase, cfg: &FlmaConfig) -> bool {
    match v.class() {
        Class::Finite => DualBase::new(v.is_negative(), v.exponent(), v.fraction(), cfg).is_ok(),
        _ => DualBase::from_bits(v.to_bits(cfg), cfg).is_ok_and(|w| w == *v),
    }
}

/// Random chains of mul, div, sqrt, powers, add and sub stay normalized.
pub fn normalization_closure(flma: &Flma, chains: u64, seed: u64) -> Result<String, String> {
    const CHUNK: u64 = 1 << 13;
    let cfg = *flma.config();
    (0..chains.div_ceil(CHUNK)).into_par_iter().try_for_each(|c| {
        let mut r = rng(seed, c);
        for _ in 0..CHUNK.min(chains - c * CHUNK) {
            let mut v = random_db(&mut r, &cfg);
            for _ in 0..6 {
                let w = random_db(&mut r, &cfg);
                let next = match r.random_range(0..6) {
                    0 => flma.mul(&v, &w),
                    1 => flma.div(&v, &w).unwrap_or(DualBase::NAN),
                    2 => flma.sqrt(&v.abs()).unwrap_or(DualBase::NAN),
                    3 => flma.pow_int(&v, r.random_range(-3..=3)).unwrap_or(DualBase::NAN),
                    4 => flma.add(&v, &w),
                    _ => flma.sub(&v, &w),
                };
                if !well_formed(&next, &cfg) {
                    return Err(format!("{v:?} op {w:?} produced malformed {next:?}"));
                }
                v = if next.class() == Class::Finite { next } else { random_db(&mut r, &cfg) };
            }
        }
        Ok(())
    })?;
    Ok(format!("{chains} chains of 6 ops stay normalized"))
}

/// `p` is strictly increasing over every fraction code of one binade.
pub fn p_injective(flma: &Flma) -> Result<String, String> {
    let cfg = flma.config();
    let sig = |b: u128| {
        let l = flma.p_convert(&DualBase::new(false, 0, b, cfg).unwrap());
        (l.exponent(), l.significand())
    };
    const CHUNK: u128 = 1 << 16;
    let n = cfg.ln2_f;
    (0..n.div_ceil(CHUNK) as usize).into_par_iter().try_for_each(|c| {
        let lo = c as u128 * CHUNK;
        let hi = (lo + CHUNK + 1).min(n);
        let mut prev = sig(lo);
        for b in lo + 1..hi {
            let cur = sig(b);
            if cur.cmp(&prev) != Ordering::Greater {
                return Err(format!("p(b={:#x}) = {cur:?} does not exceed p(b={:#x}) = {prev:?}", b, b - 1));
            }
            prev = cur;
        }
        Ok(())
    })?;
    Ok(format!("p strictly increasing over {n} codes"))
}

/// Largest log-ulp distance between `x` and `q(p(x))` over one binade.
pub fn q_after_p_max(flma: &Flma) -> Result<u128, String> {
    let cfg = flma.config();
    (0..cfg.ln2_f as usize)
        .into_par_iter()
        .with_min_len(1 << 12)
        .map(|b| {
            let x = DualBase::new(false, 0, b as u128, cfg).unwrap();
            log_ulp_distance(&x, &flma.q_convert(&flma.p_convert(&x)), cfg).map_err(|e| e.to_string())
        })
        .try_reduce(|| 0, |a, b| Ok(a.max(b)))
}

pub fn lf_add_commutes(flma: &Flma, count: u64, seed: u64) -> Result<String, String> {
    let cfg = *flma.config();
    let mut r = rng(seed, 0);
    for _ in 0..count {
        let u = flma.p_convert(&random_db(&mut r, &cfg));
        let v = flma.p_convert(&random_db(&mut r, &cfg));
        let (uv, vu) = (flma.lf_add(&u, &v), flma.lf_add(&v, &u));
        let same = uv == vu || (uv.class() == Class::NaN && vu.class() == Class::NaN);
        if !same {
            return Err(format!("lf_add({u:?}, {v:?}) = {uv:?} but reversed gives {vu:?}"));
        }
    }
    Ok(format!("{count} lf_add pairs commute"))
}
