//! Dual-engine classification workbench built around columnar spiking
//! networks.
//!
//! Two engines implement the same competitive learning scheme:
//!
//! - [`snn`] — a time-stepped simulator of the column/microcolumn spiking
//!   architecture (LIF neurons, gated activity, winner-take-all arbitration,
//!   anti-Hebbian and dopamine plasticity);
//! - [`digital`] — its continuous numeric analogue, an online classifier over
//!   spike-count vectors.
//!
//! Both share the synaptic-resource arithmetic in [`plasticity`]. The
//! remaining modules supply MNIST ingestion and spike encoding ([`data`]),
//! the experiment runner and reports ([`harness`]), model serialization
//! ([`model_io`]), and the paired t-test ([`stats`]).

pub mod data;
pub mod digital;
pub mod error;
pub mod harness;
pub mod model_io;
pub mod plasticity;
pub mod snn;
pub mod stats;

pub use error::{Error, Result};
pub use plasticity::PlasticityParams;
