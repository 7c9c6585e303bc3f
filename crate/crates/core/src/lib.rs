//! Specker's principle, no-signalling boxes and the three toy models that
//! each give up one of maximal entanglement, non-maximal measurements or
//! no-signalling.

pub mod behavior;
pub mod io;
mod lp;
pub mod models;
pub mod protocols;
pub mod quantumref;
pub mod rational;
pub mod scenario;
pub mod theorem;

pub use rational::Rational;
