//! CSV reports. Each file starts with `# key: value` lines describing the
//! resolved configuration, followed by a header row and data rows.

use std::io::Write;

use super::{AddStats, CancelRow, UlpStats};
use crate::error::{Error, Result};
use crate::linalg::BenchRow;
use crate::shiftadd::{ExpParams, LogParams};

pub const KERNEL_COLUMNS: [&str; 16] = [
    "I",
    "ell",
    "p",
    "r",
    "s",
    "x_bits",
    "y_bits",
    "samples",
    "max_ulp",
    "frac_le_half",
    "frac_half_to_1",
    "frac_1_to_2",
    "frac_gt_2",
    "max_true_ulp",
    "violations",
    "monotone",
];

pub const ADD_COLUMNS: [&str; 9] =
    ["alpha", "beta", "samples", "max_logulp", "frac_incorrect", "n_0", "n_1", "n_2", "n_gt_2"];

pub const CANCEL_COLUMNS: [&str; 6] = ["alpha", "k_range", "max_logulp", "max_abs_err", "worst_k", "beta"];

pub const QR_COLUMNS: [&str; 5] = ["kappa", "trial", "arithmetic", "error_l2", "seed"];

/// Kernel configuration columns common to exp and log rows.
#[derive(Debug, Clone, Copy)]
pub struct KernelPoint {
    pub iterations: u32,
    pub ell: u32,
    pub p: u32,
    pub r: u32,
    pub s: Option<u32>,
    pub x_bits: u32,
    pub y_bits: u32,
}

impl From<&ExpParams> for KernelPoint {
    fn from(c: &ExpParams) -> Self {
        Self { iterations: c.iterations, ell: c.ell, p: c.p, r: c.r, s: None, x_bits: c.x_bits, y_bits: c.y_bits }
    }
}

impl From<&LogParams> for KernelPoint {
    fn from(c: &LogParams) -> Self {
        Self { iterations: c.iterations, ell: c.ell, p: c.p, r: c.r, s: Some(c.s), x_bits: c.x_bits, y_bits: c.y_bits }
    }
}

pub fn kernel_row(k: &KernelPoint, st: &UlpStats) -> Vec<String> {
    vec![
        k.iterations.to_string(),
        k.ell.to_string(),
        k.p.to_string(),
        k.r.to_string(),
        k.s.map_or_else(String::new, |s| s.to_string()),
        k.x_bits.to_string(),
        k.y_bits.to_string(),
        st.total.to_string(),
        format!("{:.6}", st.max_ulp()),
        format!("{:.6}", st.fraction(0)),
        format!("{:.6}", st.fraction(1)),
        format!("{:.6}", st.fraction(2)),
        format!("{:.6}", st.fraction(3)),
        format!("{:.6}", st.max_true_error),
        st.monotonicity_violations.to_string(),
        st.monotone().to_string(),
    ]
}

pub fn add_row(st: &AddStats) -> Vec<String> {
    let mut v = vec![
        st.alpha.to_string(),
        st.beta.to_string(),
        st.samples.to_string(),
        st.max_logulp.to_string(),
        format!("{:.9}", st.frac_incorrect()),
    ];
    v.extend(st.hist.iter().map(u64::to_string));
    v
}

pub fn cancel_row(c: &CancelRow) -> Vec<String> {
    vec![
        c.alpha.to_string(),
        format!("{}..{}", c.k_lo, c.k_hi),
        if c.max_logulp == u128::MAX { "inf".into() } else { c.max_logulp.to_string() },
        format!("{:.6e}", c.max_abs_err),
        c.worst_k.to_string(),
        "1".into(),
    ]
}

pub fn qr_row(r: &BenchRow) -> Vec<String> {
    vec![
        format!("{:e}", r.kappa),
        r.trial.to_string(),
        r.arithmetic.into(),
        format!("{:.6e}", r.error_l2),
        r.seed.to_string(),
    ]
}

/// Write `# key: value` metadata, then the header and rows.
pub fn write_csv<W: Write>(
    mut out: W,
    meta: &[(String, String)],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    for (k, v) in meta {
        writeln!(out, "# {k}: {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
