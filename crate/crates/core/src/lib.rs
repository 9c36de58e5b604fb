//! Error exponents of constant-composition random codes under ML and MMI
//! decoding, joint source-channel coding bounds, and Monte Carlo checks.
//!
//! All information quantities are in nats.

pub mod cli;
pub mod decode;
pub mod error;
pub mod exponent;
pub mod limits;
pub mod optim;
pub mod prob;
pub mod rng;
pub mod sim;
pub mod types;

pub use error::{Error, Result};
pub use prob::{Alphabet, Channel, CondDist, Dist};
pub use rng::Seed;
pub use types::{JointTypeCounts, TypeCounts};
