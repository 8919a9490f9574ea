//! Tunable constants. The paper leaves most of these unpinned ("a constant
//! C", "sufficiently small delta"); defaults here are the values the test
//! suite validates against.

/// Sparsifier cut-accuracy divisor: target cut error is `delta / C`.
pub const SPARSIFY_C: f64 = 8.0;

/// Sampling-probability constant `c0` in `p = c0 * y * ln(n) / (delta^2 * k)`.
pub const SPARSIFY_C0: f64 = 16.0;

/// Johnson-Lindenstrauss dimension constant in `k = ceil(C/eps^2 * ln n)`.
pub const JL_C: f64 = 8.0;

/// Hard multiplier on theoretical iteration bounds before a run aborts.
pub const ITER_CAP_FACTOR: usize = 10;

/// Construction: internal error parameter as a fraction of eps.
pub const CONSTRUCT_DELTA_DIV: f64 = 20.0;

/// Estimation: internal error parameter as a fraction of eps.
pub const ESTIMATE_DELTA_DIV: f64 = 4.0;

/// Packing engine: cap on framework iterations per guess rung at desk scale.
pub const PACK_ITER_CAP: usize = 80;

/// Covering engine: iteration budget constant `c1` in `ceil(c1 * ln n / delta^2)`.
pub const COVER_ITER_C1: f64 = 0.6;

/// Inner MWU: round budget constant `cT` in `ceil(cT * ln n / delta^2)`.
pub const MWU_ROUND_C: f64 = 2.0;

/// Largest instance for which frameworks enumerate the full odd-set family
/// when monitoring potentials and invariants.
pub const MONITOR_N_LIMIT: usize = 14;

/// Numerical slack for feasibility audits.
pub const FEAS_TOL: f64 = 1e-7;
