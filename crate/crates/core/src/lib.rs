//! Neuroevolution of Hebbian foraging animats.
//!
//! Networks are encoded either directly as a connectivity/weight matrix or
//! as a constrained L-system whose expansion produces that matrix. A rank
//! based genetic algorithm evolves populations of either encoding in a grid
//! world scattered with food.

pub mod animat;
pub mod error;
pub mod evolution;
pub mod genome;
pub mod harness;
pub mod hebbnet;
pub mod rng;
pub mod world;

pub use error::{Error, Result};
