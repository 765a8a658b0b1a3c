use rayon::prelude::*;

use super::qr::{backsolve, householder_qr};
use super::{Arith, FlmaArith, Matrix, OracleArith, SoftArith, SpectralBase, GEN_PREC};
use crate::error::{Error, Result};
use crate::flma::Flma;
use crate::oracle::{BigFloat, Context};
use crate::softfloat::Format;
use crate::stats::{median, spearman};

/// A least-squares system with its high-precision reference solution.
#[derive(Debug, Clone)]
pub struct LsqProblem {
    a: Matrix<BigFloat>,
    b: Vec<BigFloat>,
    x_ref: Vec<BigFloat>,
}

impl LsqProblem {
    pub fn new(a: Matrix<BigFloat>, b: Vec<BigFloat>) -> Result<Self> {
        if a.rows() != b.len() {
            return Err(Error::Domain(format!("{} rows but {} right-hand entries", a.rows(), b.len())));
        }
        let x_ref = solve(&OracleArith::new(GEN_PREC), &a, &b)?;
        Ok(Self { a, b, x_ref })
    }

    pub fn a(&self) -> &Matrix<BigFloat> {
        &self.a
    }

    pub fn b(&self) -> &[BigFloat] {
        &self.b
    }

    pub fn x_ref(&self) -> &[BigFloat] {
        &self.x_ref
    }

    /// Round `A`, `b` into the arithmetic, then QR and backsolve there.
    pub fn solve<A: Arith>(&self, ar: &A) -> Result<Vec<A::T>> {
        solve(ar, &self.a, &self.b)
    }
}

fn solve<A: Arith>(ar: &A, a: &Matrix<BigFloat>, b: &[BigFloat]) -> Result<Vec<A::T>> {
    let a = a.try_map(|v| ar.from_big(v))?;
    let b: Vec<A::T> = b.iter().map(|v| ar.from_big(v)).collect::<Result<_>>()?;
    let qr = householder_qr(ar, &a)?;
    backsolve(ar, qr.r(), &qr.apply_qt(ar, &b))
}

/// `||x - x_r||_2` with `x` solved in `ar`. A solution containing an
/// infinity or NaN scores `+inf`; singular pivots propagate.
pub fn lsq_error<A: Arith>(problem: &LsqProblem, ar: &A) -> Result<f64> {
    let x = match problem.solve(ar) {
        Ok(x) => x,
        Err(Error::DivideByZero | Error::NegativeSqrt) => return Ok(f64::INFINITY),
        Err(e) => return Err(e),
    };
    let ctx = Context::new(GEN_PREC);
    let mut diff = Vec::with_capacity(x.len());
    for (xi, ri) in x.iter().zip(&problem.x_ref) {
        match ar.to_big(xi) {
            Ok(v) => diff.push(ctx.sub(&v, ri)),
            Err(_) => return Ok(f64::INFINITY),
        }
    }
    Ok(ctx.norm2(&diff).to_f64())
}

/// Arithmetics compared by the benchmark, in output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchArith {
    Flma,
    Sf32,
    Sf64,
    Oracle,
}

impl BenchArith {
    pub const ALL: [BenchArith; 4] = [BenchArith::Flma, BenchArith::Sf32, BenchArith::Sf64, BenchArith::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            BenchArith::Flma => "flma",
            BenchArith::Sf32 => "sf32",
            BenchArith::Sf64 => "sf64",
            BenchArith::Oracle => "oracle",
        }
    }
}

/// Precision of the `oracle` contestant; the reference itself runs at
/// [`GEN_PREC`], so this one has a measurable error.
pub const ORACLE_CONTESTANT_PREC: u32 = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub kappa: f64,
    pub trial: u32,
    pub arithmetic: &'static str,
    pub error_l2: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct BenchSpec<'a> {
    pub n: usize,
    pub kappas: &'a [f64],
    pub trials: u32,
    pub seed: u64,
    pub ariths: &'a [BenchArith],
}

/// Every (κ, trial, arithmetic) error, ordered by κ, then trial, then the
/// order of `spec.ariths`.
pub fn run_bench(flma: &Flma, spec: &BenchSpec<'_>) -> Result<Vec<BenchRow>> {
    let bases: Vec<SpectralBase> =
        (0..spec.trials).into_par_iter().map(|t| SpectralBase::generate(spec.n, spec.seed, t)).collect::<Result<_>>()?;
    let jobs: Vec<(usize, u32)> =
        (0..spec.kappas.len()).flat_map(|k| (0..spec.trials).map(move |t| (k, t))).collect();
    let fa = FlmaArith::new(flma.clone());
    let rows: Vec<Vec<BenchRow>> = jobs
        .par_iter()
        .map(|&(k, t)| {
            let kappa = spec.kappas[k];
            let base = &bases[t as usize];
            let problem = LsqProblem::new(base.matrix(kappa)?, base.rhs().to_vec())?;
            spec.ariths
                .par_iter()
                .map(|&which| {
                    let error_l2 = match which {
                        BenchArith::Flma => lsq_error(&problem, &fa),
                        BenchArith::Sf32 => lsq_error(&problem, &SoftArith::new(Format::Binary32)),
                        BenchArith::Sf64 => lsq_error(&problem, &SoftArith::new(Format::Binary64)),
                        BenchArith::Oracle => lsq_error(&problem, &OracleArith::new(ORACLE_CONTESTANT_PREC)),
                    }?;
                    Ok(BenchRow { kappa, trial: t, arithmetic: which.name(), error_l2, seed: spec.seed })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArithSummary {
    pub arithmetic: &'static str,
    /// `(kappa, median error)` in first-seen κ order.
    pub medians: Vec<(f64, f64)>,
    pub spearman: Option<f64>,
}

/// Median error per κ and the rank correlation of those medians with κ.
pub fn summarize(rows: &[BenchRow]) -> Vec<ArithSummary> {
    let mut names: Vec<&'static str> = Vec::new();
    let mut kappas: Vec<f64> = Vec::new();
    for r in rows {
        if !names.contains(&r.arithmetic) {
            names.push(r.arithmetic);
        }
        if !kappas.contains(&r.kappa) {
            kappas.push(r.kappa);
        }
    }
    names
        .into_iter()
        .map(|name| {
            let medians: Vec<(f64, f64)> = kappas
                .iter()
                .filter_map(|&k| {
                    let errs: Vec<f64> =
                        rows.iter().filter(|r| r.arithmetic == name && r.kappa == k).map(|r| r.error_l2).collect();
                    median(&errs).map(|m| (k, m))
                })
                .collect();
            let (ks, ms): (Vec<f64>, Vec<f64>) = medians.iter().copied().unzip();
            ArithSummary { arithmetic: name, spearman: spearman(&ks, &ms), medians }
        })
        .collect()
}
