//! Long-range percolation on the n-cycle and the rearrangement processes it
//! controls.
//!
//! The crate is organised around one random graph and three processes that
//! can be coupled to it:
//!
//! * [`graph`]: the percolation process `G(t)` on the cycle, where each event
//!   opens an edge whose length is drawn from a [`DistanceDistribution`].
//! * [`transposition`]: the random transposition walk driven by the same event
//!   stream, with exact cycle counting and the coagulation/fragmentation
//!   bookkeeping `delta = N - 2F`.
//! * [`reversal`] and [`breakpoint`]: random `L`-reversals of a signed gene
//!   order and the breakpoint-graph distance `n + 1 - c`.
//! * [`brw`]: branching random walks (plain, killed, erased) that describe the
//!   local exploration of a component.
//!
//! [`theory`] holds the limiting curves (`u(c)`, `theta(c)`, Borel-Tanner) and
//! [`estimator`] turns an observed distance into an estimate of the number of
//! events, either through the mean-field curve or a simulated calibration
//! curve.
//!
//! Every simulation is deterministic given its seed. Replica ensembles are run
//! through [`replicas`], which derives per-replica streams from a master seed
//! and returns results in replica order regardless of scheduling.

pub mod breakpoint;
pub mod brw;
pub mod distribution;
pub mod error;
pub mod estimator;
pub mod graph;
pub mod replicas;
pub mod reversal;
pub mod stats;
pub mod theory;
pub mod transposition;
mod unionfind;

pub use distribution::{DistanceDistribution, DistanceSpec};
pub use error::{Error, Result};
