//! `1 - y` for `y` a few codes below one, across conversion widths `alpha`.

use rayon::prelude::*;

use super::add::reference_sum;
use crate::config::{FlmaConfig, Preset};
use crate::dualbase::{log_ulp_distance, DualBase};
use crate::error::Result;
use crate::flma::Flma;
use crate::oracle::{BigFloat, Context};

/// Precision of the linear-domain error measurement.
const ABS_PREC: u32 = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct CancelRow {
    pub alpha: u32,
    pub k_lo: u32,
    pub k_hi: u32,
    /// `u128::MAX` when a result collapsed to zero.
    pub max_logulp: u128,
    pub max_abs_err: f64,
    /// `k` attaining `max_abs_err`.
    pub worst_k: u32,
}

/// The `k`-th dual-base code below one: `2^-1 e^((ln2_F - k) / 2^F)`.
pub fn below_one(k: u32, cfg: &FlmaConfig) -> Result<DualBase> {
    DualBase::new(false, -1, cfg.ln2_f - u128::from(k), cfg)
}

struct Case {
    k: u32,
    y: DualBase,
    reference: DualBase,
    exact: BigFloat,
}

/// For each `alpha` (with `beta = 1` and the preset's `E`, `F`), subtract
/// every `below_one(k)` for `k = 1..=k_max` from one.
pub fn cancel_study(preset: Preset, alphas: &[u32], k_max: u32) -> Result<Vec<CancelRow>> {
    let base = preset.config();
    let ctx = Context::new(ABS_PREC);
    let cases: Vec<Case> = (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let y = below_one(k, &base)?;
            let reference = reference_sum(&DualBase::ONE, &y.neg(), &base)?;
            let exact = ctx.sub(&BigFloat::one(), &y.decode(ABS_PREC + 32, &base)?);
            Ok(Case { k, y, reference, exact })
        })
        .collect::<Result<_>>()?;

    alphas
        .iter()
        .map(|&alpha| {
            let cfg = FlmaConfig::derived(preset, base.e_bits, base.f_bits, alpha, 1, None)?;
            let flma = Flma::new(cfg)?;
            let per_k: Vec<(u32, u128, f64)> = cases
                .par_iter()
                .map(|c| {
                    let r = flma.sub(&DualBase::ONE, &c.y);
                    let d = if r.is_zero() { u128::MAX } else { log_ulp_distance(&r, &c.reference, flma.config())? };
                    let got = flma.decode(&r, ABS_PREC)?;
                    Ok((c.k, d, ctx.sub(&got, &c.exact).abs().to_f64()))
                })
                .collect::<Result<_>>()?;
            let mut row =
                CancelRow { alpha, k_lo: 1, k_hi: k_max, max_logulp: 0, max_abs_err: 0.0, worst_k: 0 };
            for (k, d, e) in per_k {
                row.max_logulp = row.max_logulp.max(d);
                if e > row.max_abs_err {
                    row.max_abs_err = e;
                    row.worst_k = k;
                }
            }
            Ok(row)
        })
        .collect()
}
