//! Accuracy sweeps: kernel ulp statistics, FLMA addition log-ulp grids,
//! the cancellation study, and the CSV reports they emit.

pub mod add;
pub mod cancel;
pub mod kernel;
pub mod report;

pub use add::{reference_sum, sweep_flma_add, AddPlan, AddStats};
pub use cancel::{cancel_study, CancelRow};
pub use kernel::{sweep_exp, sweep_exp_grid, sweep_log, sweep_log_grid, KernelGrid, RefTable, Sampling};

/// Error bands in output ulps: `[0, 0.5]`, `(0.5, 1]`, `(1, 2]`, `> 2`.
pub const BANDS: [&str; 4] = ["[0,0.5]", "(0.5,1]", "(1,2]", ">2"];

/// Kernel error statistics.
///
/// A result equal to the correctly rounded value scores its true distance
/// (at most half an ulp); any other result scores its integer code distance
/// from the correctly rounded value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UlpStats {
    pub total: u64,
    pub bands: [u64; 4],
    /// Largest `|y - CR|` in codes.
    pub max_code_distance: u128,
    /// Largest true error of a correctly rounded result, in ulps.
    pub max_rounded_error: f64,
    /// Largest `|y - f(x)|` in ulps, from the 62-bit reference.
    pub max_true_error: f64,
    pub monotonicity_violations: u64,
}

impl UlpStats {
    pub(crate) fn record(&mut self, code_distance: u128, true_err: f64) {
        self.total += 1;
        let band = match code_distance {
            0 => 0,
            1 => 1,
            2 => 2,
            _ => 3,
        };
        self.bands[band] += 1;
        self.max_code_distance = self.max_code_distance.max(code_distance);
        if code_distance == 0 {
            self.max_rounded_error = self.max_rounded_error.max(true_err);
        }
        self.max_true_error = self.max_true_error.max(true_err);
    }

    /// Associative merge; monotonicity across the seam is the caller's job.
    pub fn merge(&mut self, o: &UlpStats) {
        self.total += o.total;
        for (a, b) in self.bands.iter_mut().zip(o.bands) {
            *a += b;
        }
        self.max_code_distance = self.max_code_distance.max(o.max_code_distance);
        self.max_rounded_error = self.max_rounded_error.max(o.max_rounded_error);
        self.max_true_error = self.max_true_error.max(o.max_true_error);
        self.monotonicity_violations += o.monotonicity_violations;
    }

    /// Maximum error under the band metric.
    pub fn max_ulp(&self) -> f64 {
        if self.max_code_distance > 0 {
            self.max_code_distance as f64
        } else {
            self.max_rounded_error
        }
    }

    pub fn fraction(&self, band: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.bands[band] as f64 / self.total as f64
        }
    }

    pub fn monotone(&self) -> bool {
        self.monotonicity_violations == 0
    }

    /// At most one ulp everywhere and monotone.
    pub fn within_one_ulp(&self) -> bool {
        self.max_code_distance <= 1 && self.monotone()
    }
}
