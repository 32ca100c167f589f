//! Twisted transfer operators and the diagnostics built on them.

pub mod cancellation;
pub mod density;
pub mod interpolation;
pub mod lasota_yorke;
pub mod operator;
pub mod scan;

pub use cancellation::{pairwise_cancellation, CancellationOptions, CancellationTable, PairEntry};
pub use density::{invariant_density, DensityOptions, InvariantDensity};
pub use interpolation::{sup_interpolation_check, SupInterpolationReport};
pub use lasota_yorke::{ly_constants, LyReport};
pub use operator::{
    apply_twisted, apply_twisted_observable, apply_twisted_upto, apply_twisted_upto_many, DiscreteOperator, OneStepKernel, TwistParameter,
    DEFAULT_WORD_BUDGET,
};
pub use scan::{norm_decay_scan, random_trig_probes, DecayScanResult, ProbeFamily, ScanOptions, Schedule, ScheduleOverrides};
