//! Average age of information for single-server, bufferless (G/G/1/1)
//! queues under the blocking and preemption-in-service disciplines.
//!
//! * [`distributions`]: parametric interarrival and service distributions.
//! * [`blocking`] and [`preemption`]: exact ages, closed forms and upper bounds.
//! * [`simulator`]: discrete-event simulation of the age process, used as an
//!   independent check of every formula.
//! * [`experiments`]: sweeps, fixed-mean comparisons, truncation reports and
//!   cross-validation against the simulator.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blocking;
pub mod distributions;
mod error;
pub mod estimate;
pub mod experiments;
pub mod format;
pub mod model;
pub mod preemption;
pub mod rng;
pub mod simulator;

pub use distributions::{DistributionSpec, Family, SampleStream};
pub use error::{AoiError, Result};
pub use estimate::{AgeEstimate, Flags, Method, MonteCarloConfig};
pub use model::{Discipline, QueueModel};
pub use simulator::{CycleRecord, CycleSummary, SimConfig};
