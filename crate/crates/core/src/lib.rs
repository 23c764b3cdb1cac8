//! Self-controlled importance sampling by unconstrained Robbins-Monro
//! stochastic approximation.
//!
//! The crate finds a variance-minimising change of measure for
//! `E[F(X)]` without projections or truncations, for three families:
//!
//! * mean translation of a strongly unimodal density ([`static_is::TranslationDriver`]),
//! * exponential tilting / Esscher transform ([`static_is::EsscherDriver`]),
//! * Girsanov drift change of a path-dependent SDE ([`path_engine::FunctionalProblem`]).
//!
//! The optimised parameter is then plugged into a two-stage or purely
//! adaptive Monte Carlo estimator ([`mc_estimator`]).

pub mod barrier;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod mc_estimator;
pub mod path_engine;
pub mod quadrature;
pub mod rng;
pub mod static_is;
pub mod stochastic_approx;

pub use error::{Error, Result};
