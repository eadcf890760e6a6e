//! Weak infeasibility of block-structured linear matrix inequalities:
//! alternative spectrahedra, irreducible infeasible subsystems and
//! block-sparse uniqueness.

#![no_std]

extern crate alloc;

pub mod altsys;
pub mod error;
pub mod iis;
pub mod pencil;
pub mod recovery;
pub mod sdpsolve;
pub mod symcore;

pub use error::{Error, Result};
