#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atoms;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod lmo;
pub mod objectives;
pub mod solvers;
