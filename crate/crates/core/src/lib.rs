//! Delay analysis for heterogeneous multi-hop body-area-network paths.
//!
//! A sensor reading leaves the body over a ZigBee hop, crosses an access
//! network (WLAN, WiMAX or UMTS) and finally reaches the health-monitoring
//! endpoint through an IP cloud. This crate carries everything that does not
//! need an operating system:
//!
//! - [`model`]: technology profiles, scenarios and their validation rules.
//! - [`csma_analytics`]: closed-form CSMA/CA delay components, contention
//!   probabilities and expected backoff delays.
//! - [`linksim`]: a seeded discrete-event simulator for contention and
//!   deterministic links, chained store-and-forward into paths.
//! - [`pathcomposer`]: three-hop delay composition, sample statistics,
//!   analytic-versus-simulated comparison and parameter sweeps.
//!
//! File formats, report rendering and the command-line front end live in the
//! `medlink` crate.

#![no_std]

extern crate alloc;

pub mod csma_analytics;
pub mod error;
pub mod linksim;
pub mod model;
pub mod pathcomposer;
pub mod rng;

pub use error::Error;

/// Durations are carried as floating-point seconds throughout.
pub type Seconds = f64;
