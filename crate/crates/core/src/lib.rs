//! Exterior differential forms with exact symbolic coefficients, and tools
//! for analyzing nonidentical relations `dψ = ω`.

#![allow(clippy::needless_range_loop)]

pub mod cases;
pub mod characteristics;
pub mod connection;
mod error;
pub mod expr;
pub mod forms;
pub mod linalg;
pub mod relations;
pub mod testing;

pub use connection::{Classification, Connection, CovariantSign};
pub use error::{Error, Result};
pub use expr::{parse, parse_with, Expr, ParseContext, Verdict, ZeroTest};
pub use forms::{Chart, CommutatorReport, Form, Pseudostructure};
