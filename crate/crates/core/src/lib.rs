//! Symbolic and numeric toolkit for boundary phase spaces of Lagrangian
//! field theories.

pub mod calc_var;
pub mod cli;
pub mod expr;
pub mod lattice;
pub mod pointlin;
pub mod theories;
