//! Link-level simulator for LTE downlink jamming vulnerability analysis.
//!
//! The crate synthesizes standard-compliant downlink frames, overlays
//! protocol-aware interference at controlled jammer-to-signal ratios,
//! runs a software receiver over the composite, and reduces the observed
//! error rates to per-channel denial-of-service thresholds and
//! bandwidth-scaling curves.

pub mod cell;
pub mod coding;
pub mod error;
pub mod harness;
pub mod iq;
pub mod jamming;
pub mod metrics;
pub mod ofdm;
pub mod rx;
pub mod sequences;
pub mod sync;
pub mod tx;

pub use error::{Result, SimError};
