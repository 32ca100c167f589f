//! Simulation of the suspension semiflow and Monte-Carlo correlation decay.

pub mod correlation;
pub mod fit;
pub mod flow;
pub mod observables;
pub mod sampling;

pub use correlation::{mc_correlation, CorrelationCurve};
pub use fit::{fit_decay_rate, DecayFit};
pub use flow::{flow_step, flow_step_counted, FlowState};
pub use observables::FlowObservable;
pub use sampling::{sample_nu_tau, NuTauSampler, SHARDS};
