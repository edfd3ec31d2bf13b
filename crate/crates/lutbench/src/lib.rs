//! Benchmarks piecewise-linear look-up-table interpolation against
//! PCA-compressed Gaussian-process emulation for reconstructing
//! top-of-atmosphere radiance spectra over a six-variable atmosphere model.
//!
//! The crate bundles everything the comparison needs:
//!
//! * [`rtm`] — a deterministic analytic radiance model standing in for a
//!   heavyweight radiative-transfer code, used as exact ground truth;
//! * [`sampling`] — Latin hypercube designs and bounds-box vertices;
//! * [`simplex`] — Delaunay triangulation plus barycentric interpolation,
//!   the baseline method;
//! * [`gpr`] — PCA spectral compression with one Gaussian process per
//!   retained component, the emulation method;
//! * [`metrics`] — RMSE/NRMSE and residual percentile statistics;
//! * [`store`] — a bit-exact container format for tables and models;
//! * [`bench`] — the end-to-end experiment behind the `lutbench` binary.
//!
//! A guided tour with runnable examples lives in the `book/` directory of
//! the repository; its code snippets are compiled and run as part of
//! `cargo test`.

pub mod bench;
pub mod error;
pub mod gpr;
pub mod metrics;
pub mod numerics;
pub mod rng;
pub mod rtm;
pub mod sampling;
pub mod simplex;
pub mod store;

mod book;

pub use error::{Error, Result};
