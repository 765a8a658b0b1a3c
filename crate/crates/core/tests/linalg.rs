use flma::linalg::{
    backsolve, gen_conditioned, householder_qr, lsq_error, run_bench, summarize, symmetric_singular_values, Arith,
    BenchArith, BenchSpec, CondSpec, FlmaArith, LsqProblem, Matrix, OracleArith, SoftArith, SpectralBase, GEN_PREC,
};
use flma::oracle::{BigFloat, Context};
use flma::softfloat::Format;
use flma::Flma;

fn big(v: f64) -> BigFloat {
    BigFloat::from_f64(v).unwrap()
}

fn matrix(rows: &[&[f64]]) -> Matrix<BigFloat> {
    Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| big(v)).collect()).collect()).unwrap()
}

fn to_f64<A: Arith>(ar: &A, v: &A::T) -> f64 {
    ar.to_big(v).unwrap().to_f64()
}

fn cond(a: &Matrix<BigFloat>) -> f64 {
    let s = symmetric_singular_values(a, GEN_PREC).unwrap();
    let ctx = Context::new(GEN_PREC);
    ctx.div(&s[0], s.last().unwrap()).unwrap().to_f64()
}

#[test]
fn identity_factors_trivially() {
    let ar = OracleArith::new(128);
    let i3 = matrix(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
    let qr = householder_qr(&ar, &i3).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(qr.r()[(i, j)].to_f64().abs(), if i == j { 1.0 } else { 0.0 });
        }
    }
    let c: Vec<BigFloat> = [1.0, -2.0, 3.5].iter().map(|&v| big(v)).collect();
    let x = backsolve(&ar, &i3, &c).unwrap();
    assert_eq!(x, c);
}

#[test]
fn reflector_sends_column_to_minus_norm() {
    let a = matrix(&[&[3.0, 0.0], &[4.0, 0.0]]);
    let o = OracleArith::new(128);
    let r = householder_qr(&o, &a).unwrap();
    assert_eq!(r.r()[(0, 0)].to_f64(), -5.0);
    assert!(r.r()[(1, 0)].is_zero());

    let f = FlmaArith::new(Flma::log32());
    let af = a.try_map(|v| f.from_big(v)).unwrap();
    let r = householder_qr(&f, &af).unwrap();
    assert!((to_f64(&f, &r.r()[(0, 0)]) + 5.0).abs() < 5.0 * 4e-7);

    let s = SoftArith::new(Format::Binary32);
    let as_ = a.try_map(|v| s.from_big(v)).unwrap();
    assert_eq!(to_f64(&s, &householder_qr(&s, &as_).unwrap().r()[(0, 0)]), -5.0);
}

#[test]
fn oracle_q_is_orthogonal_and_reconstructs() {
    let (a, _) = gen_conditioned(&CondSpec { n: 16, kappa: 1e3, seed: 3, trial: 0 }).unwrap();
    let ar = OracleArith::new(GEN_PREC);
    let qr = householder_qr(&ar, &a).unwrap();
    let n = 16;
    let ctx = Context::new(GEN_PREC);
    let mut worst_orth = 0f64;
    let mut worst_rec = 0f64;
    for j in 0..n {
        let mut e = vec![BigFloat::zero(); n];
        e[j] = BigFloat::one();
        // Column j of Q, then Q^T applied to it must return e_j.
        let qj = qr.apply_q(&ar, &e);
        let back = qr.apply_qt(&ar, &qj);
        for (i, v) in back.iter().enumerate() {
            let want = if i == j { BigFloat::one() } else { BigFloat::zero() };
            worst_orth = worst_orth.max(ctx.sub(v, &want).abs().to_f64());
        }
        // Q R e_j = A e_j.
        let rj = qr.r().col(j);
        let aj = qr.apply_q(&ar, &rj);
        for (i, v) in aj.iter().enumerate() {
            worst_rec = worst_rec.max(ctx.sub(v, &a[(i, j)]).abs().to_f64());
        }
    }
    assert!(worst_orth < 1e-30, "orthogonality {worst_orth:e}");
    assert!(worst_rec < 1e-30, "reconstruction {worst_rec:e}");
}

#[test]
fn small_triangular_system_is_exact_everywhere() {
    let r = matrix(&[&[2.0, 1.0], &[0.0, 4.0]]);
    let c = [big(4.0), big(8.0)];
    fn check<A: Arith>(ar: &A, r: &Matrix<BigFloat>, c: &[BigFloat]) {
        let rt = r.try_map(|v| ar.from_big(v)).unwrap();
        let ct: Vec<_> = c.iter().map(|v| ar.from_big(v).unwrap()).collect();
        let x = backsolve(ar, &rt, &ct).unwrap();
        assert_eq!([to_f64(ar, &x[0]), to_f64(ar, &x[1])], [1.0, 2.0], "{}", ar.name());
    }
    check(&OracleArith::new(64), &r, &c);
    check(&SoftArith::new(Format::Binary32), &r, &c);
    check(&SoftArith::new(Format::Binary64), &r, &c);
    check(&FlmaArith::new(Flma::log32()), &r, &c);
    let singular = matrix(&[&[2.0, 1.0], &[0.0, 0.0]]);
    assert!(backsolve(&OracleArith::new(64), &singular, &c).is_err());
}

#[test]
fn generator_hits_target_condition() {
    let (a, b) = gen_conditioned(&CondSpec { n: 8, kappa: 1e6, seed: 42, trial: 0 }).unwrap();
    let k = cond(&a);
    assert!((k / 1e6 - 1.0).abs() < 1e-3, "kappa {k}");
    let (a2, b2) = gen_conditioned(&CondSpec { n: 8, kappa: 1e6, seed: 42, trial: 0 }).unwrap();
    assert_eq!(a, a2);
    assert_eq!(b, b2);
    let (a3, _) = gen_conditioned(&CondSpec { n: 8, kappa: 1e6, seed: 42, trial: 1 }).unwrap();
    assert_ne!(a3, a);
}

#[test]
fn unit_condition_has_flat_spectrum() {
    let (a, _) = gen_conditioned(&CondSpec { n: 6, kappa: 1.0, seed: 5, trial: 0 }).unwrap();
    assert!((cond(&a) - 1.0).abs() < 1e-20);
    assert!(gen_conditioned(&CondSpec { n: 1, kappa: 1.0, seed: 5, trial: 0 }).is_err());
    assert!(gen_conditioned(&CondSpec { n: 4, kappa: 0.5, seed: 5, trial: 0 }).is_err());
}

#[test]
fn matrices_share_eigenvectors_across_kappa() {
    let base = SpectralBase::generate(6, 8, 0).unwrap();
    let a = base.matrix(1e2).unwrap();
    let b = base.matrix(1e8).unwrap();
    assert!((cond(&a) / 1e2 - 1.0).abs() < 1e-6);
    assert!((cond(&b) / 1e8 - 1.0).abs() < 1e-6);
    assert_eq!(base.rhs().len(), 6);
}

#[test]
fn errors_order_by_precision_and_condition() {
    let (a, b) = gen_conditioned(&CondSpec { n: 8, kappa: 1.0, seed: 1, trial: 0 }).unwrap();
    let p = LsqProblem::new(a, b).unwrap();
    let oracle = lsq_error(&p, &OracleArith::new(128)).unwrap();
    let sf64 = lsq_error(&p, &SoftArith::new(Format::Binary64)).unwrap();
    let sf32 = lsq_error(&p, &SoftArith::new(Format::Binary32)).unwrap();
    let fl = lsq_error(&p, &FlmaArith::new(Flma::log32())).unwrap();
    assert!(oracle < 1e-25);
    assert!(sf64 < 1e-13 && sf64 > oracle);
    assert!(sf32 < 8.0 * 1e-6 && sf32 > sf64);
    assert!(fl < 8.0 * 1e-6 && fl > sf64);

    let (a, b) = gen_conditioned(&CondSpec { n: 8, kappa: 1e10, seed: 1, trial: 0 }).unwrap();
    let ill = lsq_error(&LsqProblem::new(a, b).unwrap(), &SoftArith::new(Format::Binary32)).unwrap();
    assert!(ill > 1e3 * sf32);
}

#[test]
fn bench_rows_are_ordered_and_reproducible() {
    let kappas = [1.0, 1e4];
    let spec = BenchSpec { n: 4, kappas: &kappas, trials: 2, seed: 7, ariths: &BenchArith::ALL };
    let f = Flma::log32();
    let rows = run_bench(&f, &spec).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 4);
    assert_eq!((rows[0].kappa, rows[0].trial, rows[0].arithmetic), (1.0, 0, "flma"));
    assert_eq!((rows[5].kappa, rows[5].trial, rows[5].arithmetic), (1.0, 1, "sf32"));
    assert_eq!(rows, run_bench(&f, &spec).unwrap());
    let s = summarize(&rows);
    assert_eq!(s.len(), 4);
    assert!(s.iter().all(|a| a.medians.len() == 2));
}
