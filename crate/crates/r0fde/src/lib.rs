//! Basic reproduction numbers and stability classification for linear
//! autonomous delay differential equations written in next-generation
//! F - V form.
//!
//! The crate computes R0 three independent ways — the matrix formula
//! r(F-hat V-hat^{-1}), the sign of the principal characteristic root of
//! F - V, and bisection on the spectral radius of the mu-scaled solution
//! map — and cross-checks them numerically. A four-stage tick population
//! model ships as the worked application, including nonlinear simulation
//! and a threshold-dichotomy harness.
//!
//! Modules mirror the pipeline:
//!
//! * [`linalg`] — dense matrices, LU, eigenvalues, order predicates
//! * [`delay_op`] — discrete-delay operators and sampled history segments
//! * [`spectral`] — characteristic matrix and the principal root
//! * [`semigroup`] — method-of-steps integration, solution-map
//!   discretization, monodromy power iteration
//! * [`r0_engine`] — model validation and the three R0 routes
//! * [`tick_model`] — the tick application
//! * [`spec_io`] — JSON model specs for the CLI

pub mod config;
pub mod delay_op;
pub mod linalg;
pub mod r0_engine;
pub mod sampling;
pub mod semigroup;
pub mod spec_io;
pub mod spectral;
pub mod svg;
pub mod tick_model;

mod error;
pub use error::{Assumption, Error, Result};
