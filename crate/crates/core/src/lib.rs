//! Fractional-order super-twisting sliding-mode observers for joint state and
//! fault estimation in observable-form nonlinear fractional systems.
//!
//! The numerics are generic over [`Real`] (`f32`/`f64`); the `*64` aliases
//! below fix the scalar to `f64`, which is what the harness and CLI use.

// `!(x > 0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod error;
pub mod fde;
pub mod fraccalc;
pub mod harness;
pub mod metrics;
pub mod observer;
pub mod plant;
pub mod scalar;
pub mod validate;

pub use error::{Error, Result};
pub use fde::{integrate, memory_truncation_error, FnField, Memory, SimGrid, Trace, VectorField};
pub use fraccalc::{gamma, gl_derivative, gl_weights, ln_gamma, mittag_leffler, FracOrder, GlWeightTable};
pub use harness::{compare_observers, run_experiment, Comparison, ExperimentConfig, Experiment, MetricsReport};
pub use metrics::{chattering_index, settle_time};
pub use observer::{
    fsta_rhs, gates, sta_convergence_time, FstaParams, GateMode, GateVector, ObserverGains, ObserverSpec,
    ObserverState, Variant,
};
pub use plant::{assemble_field, fault_value, FaultKind, FaultSignal, NoiseSpec, PlantModel};
pub use scalar::Real;
pub use validate::{run_checks, Check, CheckReport};

pub type FracOrder64 = FracOrder<f64>;
pub type SimGrid64 = SimGrid<f64>;
pub type Trace64 = Trace<f64>;
pub type PlantModel64 = PlantModel<f64>;
pub type FaultSignal64 = FaultSignal<f64>;
pub type ObserverGains64 = ObserverGains<f64>;
pub type ObserverState64 = ObserverState<f64>;

pub type FracOrder32 = FracOrder<f32>;
pub type Trace32 = Trace<f32>;
