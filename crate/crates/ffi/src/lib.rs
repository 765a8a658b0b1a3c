//! C ABI over the `flma` crate.
//!
//! Every function returns an [`FlmaStatus`] and writes results through out
//! pointers. On failure the out pointer is left untouched and a message is
//! available from [`flma_last_error`] on the calling thread. Panics never
//! cross the boundary; they surface as `FLMA_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use flma::analysis::kernel;
use flma::dualbase::Class;
use flma::shiftadd::{ExpKernel, ExpParams, KernelKind, LogKernel, LogParams};
use flma::{DualBase, Error, Flma, FlmaConfig, Preset};

pub const FLMA_PRESET_LOG32: u32 = 0;
pub const FLMA_PRESET_LOG64: u32 = 1;

pub const FLMA_CLASS_ZERO: u32 = 0;
pub const FLMA_CLASS_FINITE: u32 = 1;
pub const FLMA_CLASS_INF: u32 = 2;
pub const FLMA_CLASS_NAN: u32 = 3;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlmaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    DivideByZero = 4,
    NegativeSqrt = 5,
    Range = 6,
    InvalidEncoding = 7,
    Singular = 8,
    Panic = 9,
}

/// A dual-base value `(-1)^negative * 2^a * e^(b / 2^F)`.
///
/// `kind` is one of the `FLMA_CLASS_*` constants. `a` and `b` are only
/// meaningful for finite values and are zero otherwise.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlmaValue {
    pub kind: u32,
    pub negative: bool,
    pub a: i64,
    pub b: u64,
}

/// Parameters of a context, as reported by [`flma_context_params`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlmaParams {
    pub e_bits: u32,
    pub f_bits: u32,
    pub alpha: u32,
    pub beta: u32,
    pub acc_bits: u32,
}

/// Opaque arithmetic context.
pub struct FlmaContext {
    flma: Flma,
}

/// Opaque exp or ln kernel.
pub struct FlmaKernel {
    imp: KernelImpl,
}

enum KernelImpl {
    Exp(ExpKernel),
    Log(LogKernel),
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(FlmaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidConfig(_) => FlmaStatus::InvalidConfig,
            Error::DivideByZero => FlmaStatus::DivideByZero,
            Error::NegativeSqrt => FlmaStatus::NegativeSqrt,
            Error::ExponentRange(_) | Error::FixedOverflow { .. } => FlmaStatus::Range,
            Error::InvalidEncoding(_) => FlmaStatus::InvalidEncoding,
            Error::Singular(_) => FlmaStatus::Singular,
            _ => FlmaStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: FlmaStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FlmaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FlmaStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            FlmaStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(FlmaStatus::NullPointer, format!("{what} is null")))
}

unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(fail(FlmaStatus::NullPointer, format!("{what} is null")));
    }
    p.write(v);
    Ok(())
}

fn to_c(x: &DualBase) -> FlmaValue {
    let (class, a, b) = match x.class() {
        Class::Zero => (FLMA_CLASS_ZERO, 0, 0),
        Class::Finite => (FLMA_CLASS_FINITE, x.exponent(), x.fraction() as u64),
        Class::Inf => (FLMA_CLASS_INF, 0, 0),
        Class::NaN => (FLMA_CLASS_NAN, 0, 0),
    };
    FlmaValue { kind: class, negative: x.is_negative(), a, b }
}

fn from_c(v: &FlmaValue, cfg: &FlmaConfig) -> Result<DualBase, Failure> {
    Ok(match v.kind {
        FLMA_CLASS_ZERO => DualBase::ZERO,
        FLMA_CLASS_FINITE => DualBase::new(v.negative, v.a, u128::from(v.b), cfg)?,
        FLMA_CLASS_INF => DualBase::inf(v.negative),
        FLMA_CLASS_NAN => DualBase::NAN,
        c => return Err(fail(FlmaStatus::InvalidArgument, format!("unknown value kind {c}"))),
    })
}

fn preset(p: u32) -> Result<Preset, Failure> {
    match p {
        FLMA_PRESET_LOG32 => Ok(Preset::Log32),
        FLMA_PRESET_LOG64 => Ok(Preset::Log64),
        _ => Err(fail(FlmaStatus::InvalidConfig, format!("unknown preset {p}"))),
    }
}

fn new_context(cfg: FlmaConfig, out: *mut *mut FlmaContext) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(FlmaStatus::NullPointer, "out is null"));
    }
    let ctx = Box::new(FlmaContext { flma: Flma::new(cfg)? });
    unsafe { out.write(Box::into_raw(ctx)) };
    Ok(())
}

/// Message for the last failed call on this thread, or null if none.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn flma_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn flma_status_string(status: FlmaStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        FlmaStatus::Ok => b"ok\0",
        FlmaStatus::NullPointer => b"null pointer\0",
        FlmaStatus::InvalidArgument => b"invalid argument\0",
        FlmaStatus::InvalidConfig => b"invalid configuration\0",
        FlmaStatus::DivideByZero => b"division by zero\0",
        FlmaStatus::NegativeSqrt => b"square root of a negative value\0",
        FlmaStatus::Range => b"value out of range\0",
        FlmaStatus::InvalidEncoding => b"invalid encoding\0",
        FlmaStatus::Singular => b"singular system\0",
        FlmaStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

/// Creates a context for one of the `FLMA_PRESET_*` presets.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn flma_context_new(preset_id: u32, out: *mut *mut FlmaContext) -> FlmaStatus {
    guard(|| new_context(preset(preset_id)?.config(), out))
}

/// Creates a context with kernels derived from `(E, F, alpha, beta)` the way
/// `preset_id` derives its own. `acc_bits = 0` selects `F + alpha`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn flma_context_new_custom(
    preset_id: u32,
    e_bits: u32,
    f_bits: u32,
    alpha: u32,
    beta: u32,
    acc_bits: u32,
    out: *mut *mut FlmaContext,
) -> FlmaStatus {
    guard(|| {
        let acc = (acc_bits != 0).then_some(acc_bits);
        new_context(FlmaConfig::derived(preset(preset_id)?, e_bits, f_bits, alpha, beta, acc)?, out)
    })
}

/// # Safety
/// `ctx` must be null or a pointer returned by a `flma_context_new*` call
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn flma_context_free(ctx: *mut FlmaContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// # Safety
/// `ctx` must be a live context; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn flma_context_params(ctx: *const FlmaContext, out: *mut FlmaParams) -> FlmaStatus {
    guard(|| {
        let c = borrow(ctx, "ctx")?.flma.config();
        let p = FlmaParams { e_bits: c.e_bits, f_bits: c.f_bits, alpha: c.alpha, beta: c.beta, acc_bits: c.acc_bits };
        write(out, p, "out")
    })
}

/// Nearest dual-base value to `v`. NaN and infinities map to their classes.
///
/// # Safety
/// `ctx` must be a live context; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn flma_encode_f64(ctx: *const FlmaContext, v: f64, out: *mut FlmaValue) -> FlmaStatus {
    guard(|| {
        let x = borrow(ctx, "ctx")?.flma.encode_f64(v)?;
        write(out, to_c(&x), "out")
    })
}

/// Value of `x` rounded to the nearest double.
///
/// # Safety
/// `ctx` must be a live context; `x` must be readable; `out` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn flma_to_f64(ctx: *const FlmaContext, x: *const FlmaValue, out: *mut f64) -> FlmaStatus {
    guard(|| {
        let f = &borrow(ctx, "ctx")?.flma;
        let v = from_c(borrow(x, "x")?, f.config())?;
        write(out, v.to_f64(f.config()), "out")
    })
}

/// Packed code of `x`: class, sign, `a` and `b` from high to low bits.
/// Fails with `FLMA_STATUS_RANGE` when the layout is wider than 64 bits.
///
/// # Safety
/// `ctx` must be a live context; `x` must be readable; `out` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn flma_to_bits(ctx: *const FlmaContext, x: *const FlmaValue, out: *mut u64) -> FlmaStatus {
    guard(|| {
        let cfg = borrow(ctx, "ctx")?.flma.config();
        let bits = from_c(borrow(x, "x")?, cfg)?.to_bits(cfg);
        let bits = u64::try_from(bits).map_err(|_| fail(FlmaStatus::Range, format!("code {bits:#x} exceeds 64 bits")))?;
        write(out, bits, "out")
    })
}

/// # Safety
/// `ctx` must be a live context; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn flma_from_bits(ctx: *const FlmaContext, bits: u64, out: *mut FlmaValue) -> FlmaStatus {
    guard(|| {
        let cfg = borrow(ctx, "ctx")?.flma.config();
        write(out, to_c(&DualBase::from_bits(u128::from(bits), cfg)?), "out")
    })
}

unsafe fn binary(
    ctx: *const FlmaContext,
    x: *const FlmaValue,
    y: *const FlmaValue,
    out: *mut FlmaValue,
    op: impl FnOnce(&Flma, &DualBase, &DualBase) -> Result<DualBase, Error>,
) -> FlmaStatus {
    guard(|| {
        let f = &borrow(ctx, "ctx")?.flma;
        let x = from_c(borrow(x, "x")?, f.config())?;
        let y = from_c(borrow(y, "y")?, f.config())?;
        write(out, to_c(&op(f, &x, &y)?), "out")
    })
}

/// # Safety
/// `ctx` must be a live context; `x` and `y` must be readable; `out` must be
/// valid for writes. `out` may alias an input.
#[no_mangle]
pub unsafe extern "C" fn flma_add(ctx: *const FlmaContext, x: *const FlmaValue, y: *const FlmaValue, out: *mut FlmaValue) -> FlmaStatus {
    binary(ctx, x, y, out, |f, x, y| Ok(f.add(x, y)))
}

/// # Safety
/// Same contract as [`flma_add`].
#[no_mangle]
pub unsafe extern "C" fn flma_sub(ctx: *const FlmaContext, x: *const FlmaValue, y: *const FlmaValue, out: *mut FlmaValue) -> FlmaStatus {
    binary(ctx, x, y, out, |f, x, y| Ok(f.sub(x, y)))
}

/// # Safety
/// Same contract as [`flma_add`].
#[no_mangle]
pub unsafe extern "C" fn flma_mul(ctx: *const FlmaContext, x: *const FlmaValue, y: *const FlmaValue, out: *mut FlmaValue) -> FlmaStatus {
    binary(ctx, x, y, out, |f, x, y| Ok(f.mul(x, y)))
}

/// # Safety
/// Same contract as [`flma_add`].
#[no_mangle]
pub unsafe extern "C" fn flma_div(ctx: *const FlmaContext, x: *const FlmaValue, y: *const FlmaValue, out: *mut FlmaValue) -> FlmaStatus {
    binary(ctx, x, y, out, |f, x, y| f.div(x, y))
}

/// # Safety
/// `ctx` must be a live context; `x` must be readable; `out` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn flma_sqrt(ctx: *const FlmaContext, x: *const FlmaValue, out: *mut FlmaValue) -> FlmaStatus {
    binary(ctx, x, x, out, |f, x, _| f.sqrt(x))
}

/// `x^n` for integer `n`.
///
/// # Safety
/// Same contract as [`flma_sqrt`].
#[no_mangle]
pub unsafe extern "C" fn flma_pow_int(ctx: *const FlmaContext, x: *const FlmaValue, n: i32, out: *mut FlmaValue) -> FlmaStatus {
    binary(ctx, x, x, out, |f, x, _| f.pow_int(x, n))
}

/// Fused inner product of `xs[0..n]` and `ys[0..n]`: each product is taken
/// to the linear domain, summed in order and converted back once.
///
/// # Safety
/// `ctx` must be a live context; `xs` and `ys` must each point to `n`
/// readable values (or may be null when `n == 0`); `out` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn flma_inner_product(
    ctx: *const FlmaContext,
    xs: *const FlmaValue,
    ys: *const FlmaValue,
    n: usize,
    out: *mut FlmaValue,
) -> FlmaStatus {
    guard(|| {
        let f = &borrow(ctx, "ctx")?.flma;
        let slice = |p: *const FlmaValue, what: &str| -> Result<Vec<DualBase>, Failure> {
            if n == 0 {
                return Ok(Vec::new());
            }
            if p.is_null() {
                return Err(fail(FlmaStatus::NullPointer, format!("{what} is null")));
            }
            std::slice::from_raw_parts(p, n).iter().map(|v| from_c(v, f.config())).collect()
        };
        let (xs, ys) = (slice(xs, "xs")?, slice(ys, "ys")?);
        write(out, to_c(&f.inner_product(&xs, &ys)?), "out")
    })
}

fn new_kernel(imp: KernelImpl, out: *mut *mut FlmaKernel) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(FlmaStatus::NullPointer, "out is null"));
    }
    unsafe { out.write(Box::into_raw(Box::new(FlmaKernel { imp }))) };
    Ok(())
}

/// Shift-and-add `e^x` kernel: `x_bits` fractional input bits in `[0, ln 2)`,
/// `y_bits` fractional output bits, `iterations` steps, `ell`-bit constants,
/// `p`-bit datapath, `r` extra multiplier bits.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn flma_exp_kernel_new(
    x_bits: u32,
    y_bits: u32,
    iterations: u32,
    ell: u32,
    p: u32,
    r: u32,
    out: *mut *mut FlmaKernel,
) -> FlmaStatus {
    guard(|| {
        let k = ExpKernel::new(ExpParams::new(x_bits, y_bits, iterations, ell, p, r)?)?;
        new_kernel(KernelImpl::Exp(k), out)
    })
}

/// Shift-and-add `ln x` kernel for `x` in `[1, 2)`; `s` is the fractional
/// width of the truncated divisor.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn flma_log_kernel_new(
    x_bits: u32,
    y_bits: u32,
    iterations: u32,
    ell: u32,
    p: u32,
    r: u32,
    s: u32,
    out: *mut *mut FlmaKernel,
) -> FlmaStatus {
    guard(|| {
        let k = LogKernel::new(LogParams::new(x_bits, y_bits, iterations, ell, p, r, s)?)?;
        new_kernel(KernelImpl::Log(k), out)
    })
}

/// # Safety
/// `k` must be null or a live kernel handle.
#[no_mangle]
pub unsafe extern "C" fn flma_kernel_free(k: *mut FlmaKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// Half-open range `[lo, hi)` of valid input codes.
///
/// # Safety
/// `k` must be a live kernel; `lo` and `hi` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn flma_kernel_domain(k: *const FlmaKernel, lo: *mut u64, hi: *mut u64) -> FlmaStatus {
    guard(|| {
        let (l, h) = domain(&borrow(k, "kernel")?.imp);
        let narrow = |v: u128| u64::try_from(v).map_err(|_| fail(FlmaStatus::Range, "domain exceeds 64 bits"));
        let (l, h) = (narrow(l)?, narrow(h)?);
        if lo.is_null() || hi.is_null() {
            return Err(fail(FlmaStatus::NullPointer, "lo or hi is null"));
        }
        lo.write(l);
        hi.write(h);
        Ok(())
    })
}

fn domain(imp: &KernelImpl) -> (u128, u128) {
    match imp {
        KernelImpl::Exp(k) => kernel::domain(KernelKind::Exp, k.params().x_bits),
        KernelImpl::Log(k) => kernel::domain(KernelKind::Log, k.params().x_bits),
    }
}

/// Evaluates the kernel on one input code.
///
/// # Safety
/// `k` must be a live kernel; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn flma_kernel_eval(k: *const FlmaKernel, x_code: u64, out: *mut u64) -> FlmaStatus {
    guard(|| {
        let imp = &borrow(k, "kernel")?.imp;
        let (lo, hi) = domain(imp);
        let x = u128::from(x_code);
        if !(lo..hi).contains(&x) {
            return Err(fail(FlmaStatus::InvalidArgument, format!("input code {x_code:#x} outside [{lo:#x}, {hi:#x})")));
        }
        let y = match imp {
            KernelImpl::Exp(k) => k.eval(x),
            KernelImpl::Log(k) => k.eval(x),
        };
        let y = u64::try_from(y).map_err(|_| fail(FlmaStatus::Range, format!("output code {y:#x} exceeds 64 bits")))?;
        write(out, y, "out")
    })
}
