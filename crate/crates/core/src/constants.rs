/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.0545718e-34;

/// Sodium mass used by the reference configuration (kg).
pub const SODIUM_MASS: f64 = 3.82e-26;

/// Default inter-laser free-flight distance (m).
pub const DEFAULT_GAP: f64 = 0.1;

/// Absolute floor below which conversion and extraction denominators count as zero.
pub const DENOMINATOR_FLOOR: f64 = 1e-300;

/// Condition number above which a 4x4 inversion is logged as ill-conditioned.
pub const CONDITION_WARN: f64 = 1e12;
