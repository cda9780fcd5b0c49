//! Constructive gales and supergales over Cantor space with rigorous
//! dyadic enclosures.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: exact dyadics and outward-rounded intervals.
//! - [`measures`]: probability measures on binary strings and balance
//!   certificates.
//! - [`gales`]: gale representations, the gale-law check, success traces.
//! - [`construct`]: the supergale-to-gale conversion.
//! - [`io`]: text formats for measures, gales and conversion plans.
//! - [`cli`]: the command implementations behind the `galekit` binary.

pub mod cli;
pub mod construct;
mod error;
pub mod gales;
pub mod io;
pub mod measures;
pub mod numerics;

pub use error::{Error, Result};
