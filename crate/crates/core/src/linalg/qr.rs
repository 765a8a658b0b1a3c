use super::{Arith, Matrix};
use crate::error::{Error, Result};

/// `H = I - tau v v^T` acting on rows `k..`.
#[derive(Debug, Clone)]
struct Reflector<T> {
    k: usize,
    v: Vec<T>,
    tau: T,
}

/// Householder factorization `A = Q R` with `Q` kept as reflectors.
#[derive(Debug, Clone)]
pub struct Qr<T> {
    r: Matrix<T>,
    reflectors: Vec<Reflector<T>>,
}

impl<T: Clone> Qr<T> {
    pub fn r(&self) -> &Matrix<T> {
        &self.r
    }

    /// Number of non-trivial reflectors.
    pub fn reflector_count(&self) -> usize {
        self.reflectors.len()
    }

    /// `Q^T b`.
    pub fn apply_qt<A: Arith<T = T>>(&self, ar: &A, b: &[T]) -> Vec<T> {
        let mut b = b.to_vec();
        for h in &self.reflectors {
            apply(ar, h, &mut b[h.k..]);
        }
        b
    }

    /// `Q x`, reflectors applied in reverse.
    pub fn apply_q<A: Arith<T = T>>(&self, ar: &A, x: &[T]) -> Vec<T> {
        let mut x = x.to_vec();
        for h in self.reflectors.iter().rev() {
            apply(ar, h, &mut x[h.k..]);
        }
        x
    }
}

fn apply<A: Arith>(ar: &A, h: &Reflector<A::T>, x: &mut [A::T]) {
    let s = ar.dot(&h.v, x);
    let f = ar.mul(&h.tau, &s);
    for (xi, vi) in x.iter_mut().zip(&h.v) {
        *xi = ar.sub(xi, &ar.mul(&f, vi));
    }
}

/// Householder QR computed entirely in the element arithmetic, with
/// `v = a + sign(a_1) ||a|| e_1`. A column whose trailing part is exactly
/// zero gets no reflector.
pub fn householder_qr<A: Arith>(ar: &A, a: &Matrix<A::T>) -> Result<Qr<A::T>> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::Domain(format!("QR needs rows >= cols, got {m}x{n}")));
    }
    let mut r = a.clone();
    let mut reflectors = Vec::new();
    for k in 0..n.min(m - 1) {
        let x: Vec<A::T> = (k..m).map(|i| r[(i, k)].clone()).collect();
        let norm = ar.sqrt(&ar.dot(&x, &x))?;
        if ar.is_zero(&norm) {
            continue;
        }
        let alpha = if ar.is_negative(&x[0]) { ar.neg(&norm) } else { norm };
        let mut v = x;
        v[0] = ar.add(&v[0], &alpha);
        let vtv = ar.dot(&v, &v);
        if ar.is_zero(&vtv) {
            continue;
        }
        let h = Reflector { k, tau: ar.div(&ar.two(), &vtv)?, v };
        for j in k + 1..n {
            let mut col: Vec<A::T> = (k..m).map(|i| r[(i, j)].clone()).collect();
            apply(ar, &h, &mut col);
            for (i, c) in (k..m).zip(col) {
                r[(i, j)] = c;
            }
        }
        r[(k, k)] = ar.neg(&alpha);
        for i in k + 1..m {
            r[(i, k)] = ar.zero();
        }
        reflectors.push(h);
    }
    Ok(Qr { r, reflectors })
}

/// Solve `R x = c` for upper-triangular `R`.
pub fn backsolve<A: Arith>(ar: &A, r: &Matrix<A::T>, c: &[A::T]) -> Result<Vec<A::T>> {
    let n = r.cols();
    if r.rows() < n || c.len() < n {
        return Err(Error::Domain(format!("backsolve shapes {}x{n} and {}", r.rows(), c.len())));
    }
    let mut x = vec![ar.zero(); n];
    for i in (0..n).rev() {
        let s = ar.dot(&r.row(i)[i + 1..], &x[i + 1..]);
        let t = ar.sub(&c[i], &s);
        if ar.is_zero(&r[(i, i)]) {
            return Err(Error::Singular(i));
        }
        x[i] = ar.div(&t, &r[(i, i)])?;
    }
    Ok(x)
}
