//! Circuits, codes and simulators for flag-based fault-tolerant rotation gadgets.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod angle;
pub mod codes;
pub mod constructors;
pub mod error;
pub mod faults;
pub mod harness;
pub mod ir;
pub mod noise;
pub mod pauli;
pub mod stab;
pub mod sv;

pub use angle::DyadicAngle;
pub use error::{Error, ParseError, Result};
pub use pauli::{Pauli, PauliString};
