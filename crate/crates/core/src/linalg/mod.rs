//! Dense linear algebra over interchangeable element arithmetics.
//!
//! Every algorithm is written against [`Arith`], so the same Householder
//! QR runs in FLMA, emulated binary32/binary64 and the big-float oracle.

mod bench;
mod generate;
mod qr;

use std::fmt;
use std::ops::{Index, IndexMut};

pub use bench::{
    lsq_error, run_bench, summarize, ArithSummary, BenchArith, BenchRow, BenchSpec, LsqProblem, ORACLE_CONTESTANT_PREC,
};
pub use generate::{gen_conditioned, jacobi_eigen, symmetric_singular_values, CondSpec, SpectralBase, GEN_PREC};
pub use qr::{backsolve, householder_qr, Qr};

use crate::error::{Error, Result};
use crate::flma::Flma;
use crate::oracle::{BigFloat, Context};
use crate::softfloat::{Format, SoftFloat};
use crate::DualBase;

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    pub(super) data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn filled(rows: usize, cols: usize, v: T) -> Self {
        Self { rows, cols, data: vec![v; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Domain("ragged matrix rows".into()));
        }
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn try_map<U>(&self, f: impl FnMut(&T) -> Result<U>) -> Result<Matrix<U>> {
        Ok(Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect::<Result<_>>()? })
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut l = f.debug_list();
        for i in 0..self.rows {
            l.entry(&&self.data[i * self.cols..(i + 1) * self.cols]);
        }
        l.finish()
    }
}

/// Element arithmetic used by the solvers.
pub trait Arith: Sync {
    type T: Clone + Send + Sync + fmt::Debug;

    fn name(&self) -> &'static str;
    fn from_big(&self, v: &BigFloat) -> Result<Self::T>;
    /// Exact value of an element; errors for infinities and NaN.
    fn to_big(&self, v: &Self::T) -> Result<BigFloat>;
    fn zero(&self) -> Self::T;
    fn add(&self, a: &Self::T, b: &Self::T) -> Self::T;
    fn sub(&self, a: &Self::T, b: &Self::T) -> Self::T;
    fn mul(&self, a: &Self::T, b: &Self::T) -> Self::T;
    fn div(&self, a: &Self::T, b: &Self::T) -> Result<Self::T>;
    fn sqrt(&self, a: &Self::T) -> Result<Self::T>;
    fn neg(&self, a: &Self::T) -> Self::T;
    fn is_zero(&self, a: &Self::T) -> bool;
    fn is_negative(&self, a: &Self::T) -> bool;

    /// Sequential multiply-accumulate.
    fn dot(&self, a: &[Self::T], b: &[Self::T]) -> Self::T {
        a.iter().zip(b).fold(self.zero(), |acc, (x, y)| self.add(&acc, &self.mul(x, y)))
    }

    fn two(&self) -> Self::T {
        self.from_big(&BigFloat::from_i64(2)).expect("2 is representable")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OracleArith {
    ctx: Context,
}

impl OracleArith {
    pub fn new(prec: u32) -> Self {
        Self { ctx: Context::new(prec) }
    }
}

impl Arith for OracleArith {
    type T = BigFloat;

    fn name(&self) -> &'static str {
        "oracle"
    }

    fn from_big(&self, v: &BigFloat) -> Result<BigFloat> {
        Ok(self.ctx.round(v))
    }

    fn to_big(&self, v: &BigFloat) -> Result<BigFloat> {
        Ok(v.clone())
    }

    fn zero(&self) -> BigFloat {
        BigFloat::zero()
    }

    fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        self.ctx.add(a, b)
    }

    fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        self.ctx.sub(a, b)
    }

    fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        self.ctx.mul(a, b)
    }

    fn div(&self, a: &BigFloat, b: &BigFloat) -> Result<BigFloat> {
        self.ctx.div(a, b)
    }

    fn sqrt(&self, a: &BigFloat) -> Result<BigFloat> {
        self.ctx.sqrt(a)
    }

    fn neg(&self, a: &BigFloat) -> BigFloat {
        a.neg()
    }

    fn is_zero(&self, a: &BigFloat) -> bool {
        a.is_zero()
    }

    fn is_negative(&self, a: &BigFloat) -> bool {
        a.is_negative()
    }

    fn dot(&self, a: &[BigFloat], b: &[BigFloat]) -> BigFloat {
        self.ctx.dot(a, b)
    }
}

/// Emulated IEEE arithmetic; inner products chain fused multiply-adds.
#[derive(Debug, Clone, Copy)]
pub struct SoftArith {
    fmt: Format,
}

impl SoftArith {
    pub fn new(fmt: Format) -> Self {
        Self { fmt }
    }
}

fn finite_or_err(v: Option<BigFloat>, what: &dyn fmt::Debug) -> Result<BigFloat> {
    v.ok_or_else(|| Error::Domain(format!("{what:?} is not finite")))
}

impl Arith for SoftArith {
    type T = SoftFloat;

    fn name(&self) -> &'static str {
        match self.fmt {
            Format::Binary32 => "sf32",
            Format::Binary64 => "sf64",
        }
    }

    fn from_big(&self, v: &BigFloat) -> Result<SoftFloat> {
        Ok(SoftFloat::from_big(self.fmt, v))
    }

    fn to_big(&self, v: &SoftFloat) -> Result<BigFloat> {
        finite_or_err(v.to_big(), v)
    }

    fn zero(&self) -> SoftFloat {
        SoftFloat::zero(self.fmt)
    }

    fn add(&self, a: &SoftFloat, b: &SoftFloat) -> SoftFloat {
        a.add(b)
    }

    fn sub(&self, a: &SoftFloat, b: &SoftFloat) -> SoftFloat {
        a.sub(b)
    }

    fn mul(&self, a: &SoftFloat, b: &SoftFloat) -> SoftFloat {
        a.mul(b)
    }

    fn div(&self, a: &SoftFloat, b: &SoftFloat) -> Result<SoftFloat> {
        if b.is_zero() {
            return Err(Error::DivideByZero);
        }
        Ok(a.div(b))
    }

    fn sqrt(&self, a: &SoftFloat) -> Result<SoftFloat> {
        if a.is_negative() && !a.is_zero() {
            return Err(Error::NegativeSqrt);
        }
        Ok(a.sqrt())
    }

    fn neg(&self, a: &SoftFloat) -> SoftFloat {
        a.neg()
    }

    fn is_zero(&self, a: &SoftFloat) -> bool {
        a.is_zero()
    }

    fn is_negative(&self, a: &SoftFloat) -> bool {
        a.is_negative()
    }

    fn dot(&self, a: &[SoftFloat], b: &[SoftFloat]) -> SoftFloat {
        a.iter().zip(b).fold(self.zero(), |acc, (x, y)| x.fma(y, &acc))
    }
}

/// FLMA elements: log-domain mul/div/sqrt, `q(p + p)` adds, and fused
/// `q(sum p(x_i + y_i))` inner products.
#[derive(Debug, Clone)]
pub struct FlmaArith {
    flma: Flma,
}

impl FlmaArith {
    pub fn new(flma: Flma) -> Self {
        Self { flma }
    }

    pub fn flma(&self) -> &Flma {
        &self.flma
    }
}

impl Arith for FlmaArith {
    type T = DualBase;

    fn name(&self) -> &'static str {
        "flma"
    }

    fn from_big(&self, v: &BigFloat) -> Result<DualBase> {
        self.flma.encode(v)
    }

    fn to_big(&self, v: &DualBase) -> Result<BigFloat> {
        self.flma.decode(v, 160)
    }

    fn zero(&self) -> DualBase {
        DualBase::ZERO
    }

    fn add(&self, a: &DualBase, b: &DualBase) -> DualBase {
        self.flma.add(a, b)
    }

    fn sub(&self, a: &DualBase, b: &DualBase) -> DualBase {
        self.flma.sub(a, b)
    }

    fn mul(&self, a: &DualBase, b: &DualBase) -> DualBase {
        self.flma.mul(a, b)
    }

    fn div(&self, a: &DualBase, b: &DualBase) -> Result<DualBase> {
        self.flma.div(a, b)
    }

    fn sqrt(&self, a: &DualBase) -> Result<DualBase> {
        self.flma.sqrt(a)
    }

    fn neg(&self, a: &DualBase) -> DualBase {
        a.neg()
    }

    fn is_zero(&self, a: &DualBase) -> bool {
        a.is_zero()
    }

    fn is_negative(&self, a: &DualBase) -> bool {
        a.is_negative()
    }

    fn dot(&self, a: &[DualBase], b: &[DualBase]) -> DualBase {
        self.flma.inner_product(a, b).expect("equal lengths")
    }

    fn two(&self) -> DualBase {
        DualBase::new(false, 1, 0, self.flma.config()).expect("2 is representable")
    }
}
