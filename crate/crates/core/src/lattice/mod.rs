//! Numeric checks on a periodic lattice discretization of the boundary.
//!
//! Boundary densities coming out of the symbolic pipeline are evaluated
//! site by site, tangential derivatives become centered differences, and
//! the Noether form is turned into an antisymmetric matrix over the
//! flattened state.

pub mod checks;
mod density;
pub mod em;
mod grid;
pub mod pc;
pub mod point;
pub mod scalar;
mod state;
mod twoform;

use thiserror::Error;

use crate::calc_var::{constraint_extract, ibp_split, variation, Constraint, LocalVarForm, TheorySpec, VarError};
use crate::expr::{Expr, ExprError};
use crate::pointlin::PointError;

pub use density::CompiledDensity;
pub use grid::LatticeGrid;
pub use state::{Environment, FieldState, FunctionTable, Slot, StateLayout};
pub use twoform::{
    assemble_two_form, cgls, dense_min_norm, hamiltonian_vector_field, null_space, poisson_bracket,
    restrict, singular_values, smallest_right_vectors, two_form_rank, HamiltonianField, SparseMatrix, TwoFormMatrix,
    DENSE_LIMIT, RANK_TOLERANCE,
};

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Var(#[from] VarError),
    #[error(transparent)]
    Point(#[from] PointError),
    #[error("time step {dt} exceeds the grid spacing {h}")]
    Cfl { dt: f64, h: f64 },
    #[error("hamiltonian vector field residual {residual:e} exceeds {threshold:e}")]
    IllDefinedBracket { residual: f64, threshold: f64 },
    #[error("state is off the constraint surface (violation {violation:e})")]
    OffSurface { violation: f64 },
}

/// A local density, optionally smeared by a site array.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    pub name: String,
    pub density: Expr,
    pub smear: Option<Vec<f64>>,
}

impl Functional {
    pub fn new(name: &str, density: Expr) -> Self {
        Functional {
            name: name.to_string(),
            density,
            smear: None,
        }
    }

    pub fn smeared(mut self, smear: Vec<f64>) -> Self {
        self.smear = Some(smear);
        self
    }
}

/// A theory prepared for lattice work: its restricted Noether form, its
/// constraints and the state layout they need.
#[derive(Clone, Debug)]
pub struct LatticeModel {
    pub theory: TheorySpec,
    pub env: Environment,
    pub alpha: LocalVarForm,
    pub constraints: Vec<Constraint>,
    pub layout: StateLayout,
}

impl LatticeModel {
    pub fn new(theory: TheorySpec, env: Environment) -> Result<Self, LatticeError> {
        let split = ibp_split(&variation(&theory), &theory)?;
        let constraints = constraint_extract(&theory, &split)?;
        let mut exprs: Vec<Expr> = constraints.iter().map(|c| c.raw.clone()).collect();
        for (gens, c) in split.alpha.terms() {
            exprs.push(c.clone());
            exprs.extend(gens.iter().map(|g| Expr::var(g.clone())));
        }
        let layout = StateLayout::from_exprs(&exprs);
        Ok(LatticeModel {
            theory,
            env,
            alpha: split.alpha,
            constraints,
            layout,
        })
    }

    /// Adds slots for symbols of extra functionals.
    pub fn extend_layout(&mut self, exprs: &[Expr]) {
        self.layout = self.layout.merge(&StateLayout::from_exprs(exprs));
    }

    pub fn zero_state(&self, grid: LatticeGrid) -> FieldState {
        FieldState::zeros(grid, self.layout.clone())
    }

    pub fn two_form(&self, state: &FieldState) -> Result<TwoFormMatrix, LatticeError> {
        assemble_two_form(&self.theory, &self.alpha, state, &self.env)
    }

    pub fn compile(&self, e: &Expr, state: &FieldState) -> Result<CompiledDensity, LatticeError> {
        CompiledDensity::new(e, &self.theory, state, &self.env)
    }

    pub fn functional_value(&self, f: &Functional, state: &FieldState) -> Result<f64, LatticeError> {
        self.compile(&f.density, state)?.integrate(state, &self.env, f.smear.as_deref())
    }

    /// Exact derivative of the discretized functional.
    pub fn functional_gradient(&self, f: &Functional, state: &FieldState) -> Result<Vec<f64>, LatticeError> {
        self.compile(&f.density, state)?.gradient(state, &self.env, f.smear.as_deref())
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.name == name)
    }
}

/// Result of sampling brackets among constraint functionals.
#[derive(Clone, Debug, PartialEq)]
pub struct CoisotropyReport {
    pub max_bracket: f64,
    pub violation: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Largest sampled `|{C_i, C_j}|` at a state whose largest constraint
/// value is `violation`. The threshold is `tol` scaled up by the violation;
/// states further than `max_violation` from the surface are refused.
pub fn coisotropy_check(
    m: &TwoFormMatrix,
    gradients: &[Vec<f64>],
    violation: f64,
    tol: f64,
    residual_threshold: f64,
    max_violation: f64,
) -> Result<CoisotropyReport, LatticeError> {
    if violation > max_violation {
        return Err(LatticeError::OffSurface { violation });
    }
    let threshold = tol * (1.0f64).max(violation / 1e-9);
    let fields: Vec<HamiltonianField> = gradients.iter().map(|g| hamiltonian_vector_field(m, g)).collect();
    if let Some(bad) = fields.iter().find(|f| f.residual > residual_threshold) {
        return Err(LatticeError::IllDefinedBracket {
            residual: bad.residual,
            threshold: residual_threshold,
        });
    }
    let mut max_bracket = 0.0f64;
    for (i, fi) in fields.iter().enumerate() {
        for (j, gj) in gradients.iter().enumerate() {
            if i != j {
                let b: f64 = fi.x.iter().zip(gj).map(|(x, y)| x * y).sum();
                max_bracket = max_bracket.max(b.abs());
            }
        }
    }
    Ok(CoisotropyReport {
        max_bracket,
        violation,
        threshold,
        passed: max_bracket <= threshold,
    })
}
