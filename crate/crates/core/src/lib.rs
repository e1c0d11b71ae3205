//! Egocentric 2.5D safe-RL scenarios.
//!
//! `world` holds the tile simulation and renderer, `scenarios` the per-task
//! rules, and `env` the constrained step API that training code talks to.

pub mod catalog;
pub mod env;
pub mod rng;
pub mod scenarios;
pub mod world;
