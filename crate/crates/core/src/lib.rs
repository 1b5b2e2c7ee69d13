//! Classical polar spaces over small finite fields, complements of subspaces
//! contained in a hyperplane, and recovery of the ambient polar space from
//! the incidence data of the complement alone.

pub mod algebra;
pub mod error;
pub mod incidence;
pub mod polar;

pub use error::{Error, Result};
pub mod complement;
pub mod reconstruct;
pub mod verify;
pub mod cli;
