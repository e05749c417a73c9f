//! Global numerical tolerances.

/// Relative tolerance for every rank decision (kernels, Gram ranks, spans).
pub const EPS_RANK: f64 = 1e-9;

/// Absolute tolerance for equivalence, Born-rule and lifting checks.
pub const CHECK_TOL: f64 = 1e-9;

/// Hermiticity, positivity and trace slack accepted for densities.
pub const STATE_TOL: f64 = 1e-12;

/// Relative eigenvalue gap used when splitting central blocks.
pub const CLUSTER_GAP: f64 = 1e-7;

/// Label alignment tolerance when matching outcome values of two PVMs.
pub const LABEL_TOL: f64 = 1e-7;

/// Weight below which a sector is dropped from the support of a measure.
pub const NULL_WEIGHT: f64 = 1e-12;
