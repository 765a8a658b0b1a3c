mod common;

use proptest::prelude::*;

use flma::dualbase::{log_ulp_distance, Class, DualBase};
use flma::fixedpt::{RoundMode, UFix};
use flma::softfloat::SoftFloat;
use flma::{Flma, FlmaConfig};

const LN2_F: u128 = 0x58_b90c;

fn db() -> impl Strategy<Value = DualBase> {
    (any::<bool>(), -60i64..=60, 0..LN2_F).prop_map(|(s, a, b)| DualBase::new(s, a, b, &FlmaConfig::log32()).unwrap())
}

fn positive() -> impl Strategy<Value = DualBase> {
    (-60i64..=60, 0..LN2_F).prop_map(|(a, b)| DualBase::new(false, a, b, &FlmaConfig::log32()).unwrap())
}

#[test]
fn normalization_closure() {
    common::normalization_closure(&Flma::log32(), 200_000, 21).unwrap();
}

#[test]
fn p_is_injective_on_log32() {
    common::p_injective(&Flma::log32()).unwrap();
}

#[test]
fn q_inverts_p_within_one_code() {
    assert!(common::q_after_p_max(&Flma::log32()).unwrap() <= 1);
}

#[test]
fn lf_add_commutes() {
    common::lf_add_commutes(&Flma::log32(), 100_000, 22).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn bits_round_trip(x in db()) {
        let cfg = FlmaConfig::log32();
        prop_assert_eq!(DualBase::from_bits(x.to_bits(&cfg), &cfg).unwrap(), x);
    }

    #[test]
    fn encode_inverts_decode(x in db()) {
        let f = Flma::log32();
        prop_assert_eq!(f.encode(&f.decode(&x, 128).unwrap()).unwrap(), x);
    }

    #[test]
    fn mul_commutes_and_one_is_neutral(x in db(), y in db()) {
        let f = Flma::log32();
        prop_assert_eq!(f.mul(&x, &y), f.mul(&y, &x));
        prop_assert_eq!(f.mul(&x, &DualBase::ONE), x);
    }

    #[test]
    fn div_undoes_mul_within_one_code(x in db(), y in db()) {
        let f = Flma::log32();
        let back = f.div(&f.mul(&x, &y), &y).unwrap();
        prop_assert!(log_ulp_distance(&back, &x, f.config()).unwrap() <= 1);
    }

    #[test]
    fn sqrt_of_square_within_one_code(x in positive()) {
        let f = Flma::log32();
        let r = f.sqrt(&f.mul(&x, &x)).unwrap();
        prop_assert!(log_ulp_distance(&r, &x, f.config()).unwrap() <= 1);
    }

    #[test]
    fn distance_is_a_metric(x in positive(), y in positive(), z in positive()) {
        let cfg = FlmaConfig::log32();
        let d = |a: &DualBase, b: &DualBase| log_ulp_distance(a, b, &cfg).unwrap();
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert_eq!(d(&x, &y) == 0, x == y);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z));
    }

    #[test]
    fn add_commutes_and_cancels(x in db(), y in db()) {
        let f = Flma::log32();
        prop_assert_eq!(f.add(&x, &y), f.add(&y, &x));
        prop_assert_eq!(f.sub(&x, &x).class(), Class::Zero);
        prop_assert_eq!(f.add(&x, &DualBase::ZERO), f.q_convert(&f.p_convert(&x)));
    }

    #[test]
    fn add_sign_follows_larger_operand(x in positive(), y in positive()) {
        let f = Flma::log32();
        let s = f.sub(&x, &y);
        let cfg = f.config();
        let (lx, ly) = (x.exponent() * LN2_F as i64 + x.fraction() as i64, y.exponent() * LN2_F as i64 + y.fraction() as i64);
        if lx > ly + 1 {
            prop_assert!(!s.is_negative() && s.class() == Class::Finite);
        } else if ly > lx + 1 {
            prop_assert!(s.is_negative() && s.class() == Class::Finite);
        }
        prop_assert!(DualBase::from_bits(s.to_bits(cfg), cfg).is_ok());
    }

    #[test]
    fn softfloat_matches_native_binary32(a in any::<f32>(), b in any::<f32>()) {
        let (x, y) = (SoftFloat::from_f32(a), SoftFloat::from_f32(b));
        let normal = |v: f32| v.is_normal() || v == 0.0;
        prop_assume!(normal(a) && normal(b));
        for (got, want) in [(x.add(&y), a + b), (x.mul(&y), a * b), (x.div(&y), a / b)] {
            if want.is_nan() {
                prop_assert!(got.is_nan());
            } else if normal(want) || want.is_infinite() {
                prop_assert_eq!(got.bits() as u32, want.to_bits());
            } else {
                prop_assert!(got.is_zero());
            }
        }
    }

    #[test]
    fn narrowing_is_within_half_ulp(code in 0u128..1 << 40, keep in 1u32..40) {
        let x = UFix::new(code, 40).unwrap();
        let y = x.narrow(keep, RoundMode::NearestEven);
        // Rounding up to one needs an integer bit; otherwise the error is at most half a unit.
        if let Ok(y) = y {
            let err = (y.to_f64() - x.to_f64()).abs();
            prop_assert!(err <= 0.5 * 2f64.powi(-(keep as i32)));
        }
    }
}
