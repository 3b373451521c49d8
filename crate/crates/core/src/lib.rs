//! Online identification of time-varying linear-regression parameters under
//! finite excitation.
//!
//! The regression `y(t) = Θᵀ(t)·ω(t) + d(t)` with drifting parameters `Θ(t)`
//! and bounded disturbance is turned, interval by interval, into a regression
//! with piecewise-constant parameters: on a regular grid the parameters are
//! approximated to first order by `θ_i = [Θ(t_i); Θ̇(t_i)]` against a lifted
//! regressor. Interval-reset integral filters with exponential forgetting
//! condense the lifted regression into a filtered Gram matrix, whose
//! determinant and adjugate yield a scalar regression in the original
//! dimension. A two-branch law then drives the estimate: a high-gain update
//! while the scalar regressor is excited, and a leaky gradient step that keeps
//! the estimate bounded when it is not — including after excitation is lost
//! for good.
//!
//! The crate ships as a library plus a CLI harness:
//!
//! - [`signals`]: scenario description and ground-truth evaluation;
//! - [`lift`]: time grid and the first-order lift;
//! - [`filter`]: interval-reset integral filters;
//! - [`mixing`]: determinant/adjugate and eigenvalue kernels, scalar mixing;
//! - [`estimator`]: the switching estimation law;
//! - [`excitation`]: finite-excitation verification on sampled regressors;
//! - [`bounds`]: theoretical error-bound constants and trace audits;
//! - [`harness`]: the simulation loop, experiment presets, config parsing and
//!   CSV traces.
//!
//! ```
//! use idrem::harness::{preset, run_scenario, Preset};
//!
//! let mut scenario = preset(Preset::Experiment1);
//! scenario.t_end = 1.0; // trim the horizon for the doctest
//! scenario.fe_end = None;
//! let trace = run_scenario(&scenario).unwrap();
//! assert!(trace.err_inst.last().unwrap() < &0.5);
//! ```

pub mod bounds;
pub mod error;
pub mod estimator;
pub mod excitation;
pub mod filter;
pub mod harness;
pub mod lift;
pub mod mixing;
pub mod rng;
pub mod signals;

pub use error::{Error, Result};
