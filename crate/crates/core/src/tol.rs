//! Numerical tolerances and run configuration shared by every module.

use serde::{Deserialize, Serialize};

/// Singular values at or below this are treated as zero when ranking spans.
pub const RANK_TOL: f64 = 1e-9;
/// Frobenius residual below which an element counts as a member of a span.
pub const MEMBER_TOL: f64 = 1e-8;
/// Eigenvalue floor for accepting a Choi certificate as positive.
pub const FEAS_TOL: f64 = 1e-7;
/// Relative margin a falsifier must exceed.
pub const FALSIFIER_MARGIN: f64 = 1e-6;
/// Eigenvalue clusters closer than this are merged.
pub const GAP_TOL: f64 = 1e-6;
/// Gaps between `GAP_TOL` and this are ambiguous and trigger a resample.
pub const GAP_AMBIGUOUS: f64 = 1e-5;
/// Residual allowed when re-verifying constructed maps and certificates.
pub const VERIFY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub rank_tol: f64,
    pub member_tol: f64,
    pub feas_tol: f64,
    pub margin: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub max_words: usize,
    pub seed: u64,
    /// Run the falsifier even after a certificate was found.
    pub cross_check: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            rank_tol: RANK_TOL,
            member_tol: MEMBER_TOL,
            feas_tol: FEAS_TOL,
            margin: FALSIFIER_MARGIN,
            max_iter: 50_000,
            restarts: 32,
            max_words: 200_000,
            seed: 0x5eed_cafe,
            cross_check: false,
        }
    }
}

impl Config {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_feas_tol(mut self, tol: f64) -> Self {
        self.feas_tol = tol;
        self
    }

    pub fn with_cross_check(mut self, on: bool) -> Self {
        self.cross_check = on;
        self
    }
}
