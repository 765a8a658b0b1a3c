use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Matrix;
use crate::error::{Error, Result};
use crate::oracle::{BigFloat, Context};

/// Working precision of the generator and of reference solves.
pub const GEN_PREC: u32 = 256;

const MAX_SWEEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondSpec {
    pub n: usize,
    pub kappa: f64,
    pub seed: u64,
    pub trial: u32,
}

impl CondSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!("dimension {} below 2", self.n)));
        }
        if !(self.kappa >= 1.0 && self.kappa.is_finite()) {
            return Err(Error::Domain(format!("condition number {} must be finite and >= 1", self.kappa)));
        }
        Ok(())
    }
}

/// Symmetric random matrix decomposed once, re-assembled per target κ.
#[derive(Debug, Clone)]
pub struct SpectralBase {
    vectors: Matrix<BigFloat>,
    values: Vec<BigFloat>,
    b: Vec<BigFloat>,
}

/// Cyclic Jacobi on a symmetric matrix. Returns eigenvalues and the matrix
/// whose columns are the eigenvectors.
pub fn jacobi_eigen(m: &Matrix<BigFloat>, prec: u32) -> Result<(Vec<BigFloat>, Matrix<BigFloat>)> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::Domain("Jacobi needs a square matrix".into()));
    }
    let ctx = Context::new(prec);
    let mut a = m.map(|v| ctx.round(v));
    let mut v = Matrix::filled(n, n, BigFloat::zero());
    for i in 0..n {
        v[(i, i)] = BigFloat::one();
    }
    let one = BigFloat::one();
    // Off-diagonals below 2^-(prec+8) of the Frobenius norm are treated as zero.
    let floor = ctx.norm2(&a.data).ilog2().unwrap_or(0) - prec as i64 - 8;
    let negligible = |apq: &BigFloat| apq.ilog2().is_none_or(|e| e < floor);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)].clone();
                if negligible(&apq) {
                    continue;
                }
                rotated = true;
                let theta = ctx.div(&ctx.sub(&a[(q, q)], &a[(p, p)]), &apq.ldexp(1))?;
                let root = ctx.sqrt(&ctx.add(&ctx.mul(&theta, &theta), &one))?;
                let mut t = ctx.div(&one, &ctx.add(&theta.abs(), &root))?;
                if theta.is_negative() {
                    t = t.neg();
                }
                let c = ctx.div(&one, &ctx.sqrt(&ctx.add(&ctx.mul(&t, &t), &one))?)?;
                let s = ctx.mul(&t, &c);
                let tau = ctx.div(&s, &ctx.add(&one, &c))?;
                let rot = |g: &BigFloat, h: &BigFloat| {
                    (
                        ctx.sub(g, &ctx.mul(&s, &ctx.add(h, &ctx.mul(g, &tau)))),
                        ctx.add(h, &ctx.mul(&s, &ctx.sub(g, &ctx.mul(h, &tau)))),
                    )
                };

                let tapq = ctx.mul(&t, &apq);
                a[(p, p)] = ctx.sub(&a[(p, p)], &tapq);
                a[(q, q)] = ctx.add(&a[(q, q)], &tapq);
                a[(p, q)] = BigFloat::zero();
                a[(q, p)] = BigFloat::zero();
                for r in (0..n).filter(|&r| r != p && r != q) {
                    let (gp, gq) = rot(&a[(r, p)], &a[(r, q)]);
                    a[(p, r)] = gp.clone();
                    a[(r, p)] = gp;
                    a[(q, r)] = gq.clone();
                    a[(r, q)] = gq;
                }
                for r in 0..n {
                    let (gp, gq) = rot(&v[(r, p)], &v[(r, q)]);
                    v[(r, p)] = gp;
                    v[(r, q)] = gq;
                }
            }
        }
        if !rotated {
            return Ok(((0..n).map(|i| a[(i, i)].clone()).collect(), v));
        }
    }
    Err(Error::NoConvergence(MAX_SWEEPS))
}

/// Singular values of a symmetric matrix: |eigenvalues|, descending.
pub fn symmetric_singular_values(m: &Matrix<BigFloat>, prec: u32) -> Result<Vec<BigFloat>> {
    let (vals, _) = jacobi_eigen(m, prec)?;
    let mut s: Vec<BigFloat> = vals.iter().map(BigFloat::abs).collect();
    s.sort_by(|x, y| y.cmp_abs(x));
    Ok(s)
}

impl SpectralBase {
    /// Sample `M` (upper triangle mirrored, entries U(-2,2)) and `b`
    /// (entries U(0,1)) from the ChaCha8 stream `trial` of `seed`, then
    /// diagonalize `M`.
    pub fn generate(n: usize, seed: u64, trial: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("dimension {n} below 2")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let mut m = Matrix::filled(n, n, BigFloat::zero());
        for i in 0..n {
            for j in i..n {
                let u: f64 = rng.random();
                let v = BigFloat::from_f64(4.0 * u - 2.0)?;
                m[(j, i)] = v.clone();
                m[(i, j)] = v;
            }
        }
        let b = (0..n).map(|_| BigFloat::from_f64(rng.random::<f64>())).collect::<Result<_>>()?;
        let (values, vectors) = jacobi_eigen(&m, GEN_PREC)?;
        Ok(Self { vectors, values, b })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn rhs(&self) -> &[BigFloat] {
        &self.b
    }

    /// `U diag(l') U^T` where `ln |l'|` is the affine image of `ln |l|`
    /// onto `[ln(s_max / kappa), ln s_max]`; signs are kept.
    pub fn matrix(&self, kappa: f64) -> Result<Matrix<BigFloat>> {
        if !(kappa >= 1.0 && kappa.is_finite()) {
            return Err(Error::Domain(format!("condition number {kappa} must be finite and >= 1")));
        }
        let ctx = Context::new(GEN_PREC);
        let n = self.n();
        if self.values.iter().any(BigFloat::is_zero) {
            return Err(Error::Domain("generated matrix is singular".into()));
        }
        let logs: Vec<BigFloat> = self.values.iter().map(|l| ctx.ln(&l.abs())).collect::<Result<_>>()?;
        let max = logs.iter().max_by(|x, y| ctx.cmp(x, y)).expect("n >= 2").clone();
        let min = logs.iter().min_by(|x, y| ctx.cmp(x, y)).expect("n >= 2").clone();
        let span = ctx.sub(&max, &min);
        let ln_kappa = ctx.ln(&BigFloat::from_f64(kappa)?)?;
        let scaled: Vec<BigFloat> = if span.is_zero() {
            if kappa != 1.0 {
                return Err(Error::Domain("flat spectrum cannot be stretched".into()));
            }
            self.values.clone()
        } else {
            let gain = ctx.div(&ln_kappa, &span)?;
            self.values
                .iter()
                .zip(&logs)
                .map(|(l, ll)| {
                    let shrink = ctx.mul(&ctx.sub(&max, ll), &gain);
                    let mag = ctx.exp(&ctx.sub(&max, &shrink));
                    if l.is_negative() {
                        mag.neg()
                    } else {
                        mag
                    }
                })
                .collect()
        };

        let w: Vec<Vec<BigFloat>> =
            (0..n).map(|i| (0..n).map(|k| ctx.mul(&self.vectors[(i, k)], &scaled[k])).collect()).collect();
        let mut a = Matrix::filled(n, n, BigFloat::zero());
        for i in 0..n {
            for j in i..n {
                let v = ctx.dot(&w[i], self.vectors.row(j));
                a[(j, i)] = v.clone();
                a[(i, j)] = v;
            }
        }
        Ok(a)
    }
}

/// Conditioned system `(A, b)` for one trial.
pub fn gen_conditioned(spec: &CondSpec) -> Result<(Matrix<BigFloat>, Vec<BigFloat>)> {
    spec.validate()?;
    let base = SpectralBase::generate(spec.n, spec.seed, spec.trial)?;
    Ok((base.matrix(spec.kappa)?, base.b))
}

