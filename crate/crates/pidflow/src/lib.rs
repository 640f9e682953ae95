//! Simulator for continuous-time distributed optimization with PID-type
//! consensus feedback.
//!
//! A network of agents minimizes the sum of private local cost functions by
//! following coupled gradient-flow dynamics over an undirected connected
//! graph. The disagreement between neighbors is fed back through
//! proportional, integral, and derivative terms, which yields exponential
//! convergence of every agent's estimate to the global minimizer.
//!
//! The crate provides:
//!
//! - [`graph`]: weighted undirected graphs, their Laplacians, and the
//!   positive-definite companion matrix used by the Lyapunov diagnostics;
//! - [`objectives`]: quadratic and trigonometrically perturbed local costs
//!   with an independent centralized-minimizer oracle;
//! - [`dynamics`]: the first-order and second-order PID vector fields, a
//!   reduced-communication variant, and a friction-free baseline preset;
//! - [`integrator`]: fixed-step classical RK4 with trajectory recording and
//!   divergence detection;
//! - [`analysis`]: convergence metrics, exponential-rate fitting, Lyapunov
//!   evaluation, and the gain-condition checker for the second-order
//!   dynamics;
//! - [`cli`]: a config-driven experiment runner emitting CSV, JSON, and SVG
//!   artifacts.
//!
//! With the default `parallel` feature, batch work (metric series over
//! recorded trajectories, independent comparison runs) is distributed with
//! rayon; disabling the feature falls back to equivalent sequential code.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod integrator;
pub mod objectives;
pub mod output;
pub mod plot;
pub mod runner;
pub mod stacked;

pub use error::{Error, Result};
