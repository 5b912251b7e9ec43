//! Simulation laboratory for the totally asymmetric simple exclusion process
//! started from a two-sided Bernoulli shock, with a tagged second-class
//! particle, and for three coupled descriptions of the same randomness:
//!
//! * event-driven particle dynamics ([`tasep`]),
//! * the height/server representation and the interface processes whose
//!   envelope reproduces it exactly on shared clocks ([`server`]),
//! * last-passage percolation, whose passage times are the interface's
//!   hitting times ([`lpp`]),
//!
//! together with the hydrodynamic limit objects (rarefaction fan, Hopf-Lax
//! integral solution) in [`hydro`] and the statistical experiments that
//! compare microscopic runs against the limit laws in [`experiments`].
//!
//! All randomness flows through deterministic counter-based streams
//! ([`rng`], [`harris`]); every run is reproducible bit for bit from its
//! seed, and coupled processes can share clocks exactly.

pub mod error;
pub mod events;
pub mod experiments;
pub mod harris;
pub mod rng;
pub mod hydro;
pub mod lpp;
pub mod server;
pub mod stats;
pub mod tasep;

pub use error::{Error, Result};
