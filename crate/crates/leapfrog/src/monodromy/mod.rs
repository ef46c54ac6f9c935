//! Coupled ±1-mode system, its monodromy matrix and the small-divisor sampling.

pub mod cantor;
mod system;

pub use cantor::{cantor_measure, divisor, mu, CantorConfig, DivisorScan, DivisorValue, ExcludedInterval, FrequencyTable, Radius};
pub use system::{
    a0_matrix, a0_reference, det_identity, exp_a0, exp_a0_numeric, fundamental_matrix, singular_scan, solve_mode_one, CMatrix4,
    CVector4, ModeOneSolution, ModeOneSystem, MonodromyReport, SingularRoot, SingularScan,
};
