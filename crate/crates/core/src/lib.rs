//! Vielbein formulation of General Relativity in `m` dimensions and its
//! constrained five-dimensional Kaluza lift, evaluated pointwise with exact
//! jet derivatives and checked against coordinate-based oracles.

pub mod expr;
pub mod tensor;
pub mod field;
pub mod frame;
pub mod jbundle;
pub mod kaluza;
pub mod solutions;
pub mod job;
