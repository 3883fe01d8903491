//! Exact verification of discrete weak quasi-Hopf algebras and fusion data.

#![allow(clippy::needless_range_loop)]

pub mod blockalg;
pub mod cli;
pub mod fixtures;
pub mod fusion;
pub mod par;
pub mod pointed;
pub mod quasitri;
pub mod report;
pub mod scalars;
pub mod tannaka;
pub mod textfmt;
pub mod uqsl2;
pub mod wqh;

pub use scalars::{cyc, q_factorial, q_integer, Certified, CycScalar, Embedding, ScalarError};
