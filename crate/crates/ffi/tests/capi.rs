use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use flma_ffi::*;

struct Ctx(*mut FlmaContext);

impl Ctx {
    fn new(preset: u32) -> Self {
        let mut p = ptr::null_mut();
        assert_eq!(unsafe { flma_context_new(preset, &mut p) }, FlmaStatus::Ok);
        assert!(!p.is_null());
        Ctx(p)
    }

    fn enc(&self, v: f64) -> FlmaValue {
        let mut out = zero();
        assert_eq!(unsafe { flma_encode_f64(self.0, v, &mut out) }, FlmaStatus::Ok);
        out
    }

    fn f64(&self, x: &FlmaValue) -> f64 {
        let mut out = f64::NAN;
        assert_eq!(unsafe { flma_to_f64(self.0, x, &mut out) }, FlmaStatus::Ok);
        out
    }
}

impl Drop for Ctx {
    fn drop(&mut self) {
        unsafe { flma_context_free(self.0) };
    }
}

fn zero() -> FlmaValue {
    FlmaValue { kind: FLMA_CLASS_ZERO, negative: false, a: 0, b: 0 }
}

fn last_error() -> String {
    let p = flma_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

#[test]
fn encode_decode_and_bits() {
    let c = Ctx::new(FLMA_PRESET_LOG32);
    assert_eq!(c.enc(1.0), FlmaValue { kind: FLMA_CLASS_FINITE, negative: false, a: 0, b: 0 });
    let x = c.enc(-2.5);
    assert_eq!((x.negative, x.a, x.b), (true, 1, 0x1c_8ff8));
    assert!((c.f64(&x) + 2.5).abs() < 2.5 * 1e-7);
    assert_eq!(c.enc(f64::INFINITY).kind, FLMA_CLASS_INF);
    assert_eq!(c.enc(f64::NAN).kind, FLMA_CLASS_NAN);
    assert_eq!(c.enc(0.0).kind, FLMA_CLASS_ZERO);

    let mut bits = 0u64;
    assert_eq!(unsafe { flma_to_bits(c.0, &x, &mut bits) }, FlmaStatus::Ok);
    let mut back = zero();
    assert_eq!(unsafe { flma_from_bits(c.0, bits, &mut back) }, FlmaStatus::Ok);
    assert_eq!(back, x);
    assert_eq!(unsafe { flma_from_bits(c.0, u64::MAX, &mut back) }, FlmaStatus::InvalidEncoding);
    assert_eq!(back, x, "out untouched on failure");

    // The 66-bit log64 layout puts the class above bit 63.
    let wide = Ctx::new(FLMA_PRESET_LOG64);
    let y = wide.enc(3.0);
    assert!((wide.f64(&y) - 3.0).abs() < 1e-14);
    assert_eq!(unsafe { flma_to_bits(wide.0, &wide.enc(f64::INFINITY), &mut bits) }, FlmaStatus::Range);
}

#[test]
fn arithmetic_matches_core() {
    let c = Ctx::new(FLMA_PRESET_LOG32);
    let (x, y) = (c.enc(4.0), c.enc(0.25));
    let mut out = zero();
    unsafe {
        assert_eq!(flma_mul(c.0, &x, &y, &mut out), FlmaStatus::Ok);
        assert_eq!(c.f64(&out), 1.0);
        assert_eq!(flma_div(c.0, &x, &y, &mut out), FlmaStatus::Ok);
        assert_eq!(c.f64(&out), 16.0);
        assert_eq!(flma_sqrt(c.0, &x, &mut out), FlmaStatus::Ok);
        assert_eq!(c.f64(&out), 2.0);
        assert_eq!(flma_pow_int(c.0, &x, -2, &mut out), FlmaStatus::Ok);
        assert_eq!(c.f64(&out), 0.0625);
        assert_eq!(flma_add(c.0, &x, &x, &mut out), FlmaStatus::Ok);
        assert_eq!(c.f64(&out), 8.0);
        assert_eq!(flma_sub(c.0, &x, &x, &mut out), FlmaStatus::Ok);
        assert_eq!(out.kind, FLMA_CLASS_ZERO);

        // Outputs may alias inputs.
        let mut acc = c.enc(3.0);
        let acc_ptr: *mut FlmaValue = &mut acc;
        assert_eq!(flma_add(c.0, acc_ptr, &y, acc_ptr), FlmaStatus::Ok);
        let f = flma::Flma::log32();
        let want = f.add(&f.encode_f64(3.0).unwrap(), &f.encode_f64(0.25).unwrap());
        assert_eq!((acc.a, acc.b), (want.exponent(), want.fraction() as u64));
    }
}

#[test]
fn inner_product_of_powers_of_two() {
    let c = Ctx::new(FLMA_PRESET_LOG32);
    let xs: Vec<_> = [1.0, 2.0, -4.0, 0.5].iter().map(|&v| c.enc(v)).collect();
    let ys: Vec<_> = [4.0, 0.25, 1.0, -2.0].iter().map(|&v| c.enc(v)).collect();
    let mut out = zero();
    assert_eq!(unsafe { flma_inner_product(c.0, xs.as_ptr(), ys.as_ptr(), 4, &mut out) }, FlmaStatus::Ok);
    assert_eq!(c.f64(&out), -0.5);
    assert_eq!(unsafe { flma_inner_product(c.0, ptr::null(), ptr::null(), 0, &mut out) }, FlmaStatus::Ok);
    assert_eq!(out.kind, FLMA_CLASS_ZERO);
    assert_eq!(unsafe { flma_inner_product(c.0, ptr::null(), ys.as_ptr(), 4, &mut out) }, FlmaStatus::NullPointer);
}

#[test]
fn errors_carry_status_and_message() {
    let c = Ctx::new(FLMA_PRESET_LOG32);
    let (one, z) = (c.enc(1.0), zero());
    let mut out = zero();
    unsafe {
        assert_eq!(flma_div(c.0, &one, &z, &mut out), FlmaStatus::DivideByZero);
        assert!(last_error().contains("division by zero"));
        assert_eq!(flma_sqrt(c.0, &c.enc(-1.0), &mut out), FlmaStatus::NegativeSqrt);
        assert_eq!(flma_mul(ptr::null(), &one, &one, &mut out), FlmaStatus::NullPointer);
        assert_eq!(last_error(), "ctx is null");
        assert_eq!(flma_mul(c.0, &one, &one, ptr::null_mut()), FlmaStatus::NullPointer);
        let bogus = FlmaValue { kind: 9, ..one };
        assert_eq!(flma_add(c.0, &bogus, &one, &mut out), FlmaStatus::InvalidArgument);
        // b at or above RNE(ln 2) is not a normalized code.
        let unnormal = FlmaValue { b: 0x58_b90c, ..one };
        assert_ne!(flma_add(c.0, &unnormal, &one, &mut out), FlmaStatus::Ok);

        let mut p = ptr::null_mut();
        assert_eq!(flma_context_new(7, &mut p), FlmaStatus::InvalidConfig);
        assert!(p.is_null());
        assert_eq!(flma_context_new_custom(FLMA_PRESET_LOG32, 1, 23, 1, 1, 0, &mut p), FlmaStatus::InvalidConfig);
        assert!(last_error().contains("E=1"), "{}", last_error());
        flma_context_free(ptr::null_mut());
    }
    let s = unsafe { CStr::from_ptr(flma_status_string(FlmaStatus::Range)) };
    assert_eq!(s.to_str().unwrap(), "value out of range");
}

#[test]
fn custom_context_reports_params() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { flma_context_new_custom(FLMA_PRESET_LOG32, 8, 23, 2, 1, 0, &mut p) }, FlmaStatus::Ok);
    let c = Ctx(p);
    let mut params = FlmaParams::default();
    assert_eq!(unsafe { flma_context_params(c.0, &mut params) }, FlmaStatus::Ok);
    assert_eq!(params, FlmaParams { e_bits: 8, f_bits: 23, alpha: 2, beta: 1, acc_bits: 25 });
    assert_eq!(c.f64(&c.enc(0.5)), 0.5);
}

#[test]
fn kernels_evaluate_known_codes() {
    let mut k = ptr::null_mut();
    unsafe {
        assert_eq!(flma_exp_kernel_new(23, 24, 14, 28, 28, 2, &mut k), FlmaStatus::Ok);
        let mut y = 0u64;
        assert_eq!(flma_kernel_eval(k, 0x40_0000, &mut y), FlmaStatus::Ok);
        assert_eq!(y, 0x1a6_1299);
        let (mut lo, mut hi) = (1u64, 0u64);
        assert_eq!(flma_kernel_domain(k, &mut lo, &mut hi), FlmaStatus::Ok);
        assert_eq!(lo, 0);
        assert_eq!(flma_kernel_eval(k, hi, &mut y), FlmaStatus::InvalidArgument);
        flma_kernel_free(k);

        assert_eq!(flma_log_kernel_new(24, 23, 15, 28, 28, 3, 9, &mut k), FlmaStatus::Ok);
        assert_eq!(flma_kernel_eval(k, 0x180_0000, &mut y), FlmaStatus::Ok);
        assert_eq!(y, 0x33_e648);
        assert_eq!(flma_kernel_eval(k, 0xff_ffff, &mut y), FlmaStatus::InvalidArgument);
        flma_kernel_free(k);

        assert_eq!(flma_exp_kernel_new(23, 23, 14, 10, 28, 2, &mut k), FlmaStatus::InvalidConfig);
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(dir.join("include/flma.h")).unwrap();
    for sym in ["flma_context_new", "flma_inner_product", "flma_kernel_eval", "FLMA_STATUS_DIVIDE_BY_ZERO", "FLMA_CLASS_NAN"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let out = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror", "-pedantic", "-fsyntax-only"])
        .arg(format!("-I{}", dir.join("include").display()))
        .arg(dir.join("tests/use_header.c"))
        .output()
        .unwrap_or_else(|e| panic!("running {cc}: {e}"));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
