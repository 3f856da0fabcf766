//! Numerical thresholds shared across the library.

/// Algebraic identities on jet-exact inputs.
pub const TAU_ALG: f64 = 1e-9;
/// Relative threshold for rank and annihilation decisions.
pub const TAU_RANK: f64 = 1e-7;
/// Eigenvalue separations below this (relative) are too close to call.
pub const TAU_CLUSTER: f64 = 1e-4;
/// `|det g|` below this is treated as a degenerate metric.
pub const TAU_DEGENERATE: f64 = 1e-12;
/// Structural classifiers over a grid (umbilical, isoparametric, ...).
pub const TAU_CLASS: f64 = 1e-6;
/// Gram-relation drift allowed for an integrated frame.
pub const TAU_FRAME: f64 = 1e-8;
/// Soliton verdict threshold for entries given in closed form.
pub const TAU_SOL_CLOSED: f64 = 1e-6;
/// Soliton verdict threshold for entries built by integrating a frame.
pub const TAU_SOL_INTEGRATED: f64 = 1e-4;
/// Fraction of each axis width trimmed from a declared box before sampling.
pub const DOMAIN_MARGIN: f64 = 1e-2;
