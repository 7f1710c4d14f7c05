//! Variational calculus on jet spaces: Euler-Lagrange densities, Noether
//! boundary forms, presymplectic forms and Cauchy constraints.

mod form;
mod split;
mod theory;

use thiserror::Error;

use crate::expr::ExprError;

pub use form::{vertical_delta, LocalVarForm};
pub use split::{
    boundary_name, boundary_restrict, boundary_restrict_form, constraint_extract, ibp_split,
    variation, BoundaryEnd, BoundarySplit, Constraint,
};
pub use theory::{BackgroundDecl, FieldDecl, MetricSplit, Substitution, TheorySpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VarError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("vertical degree {0} cannot be raised further")]
    DegreeOverflow(usize),
    #[error("malformed theory: {0}")]
    Malformed(String),
}
