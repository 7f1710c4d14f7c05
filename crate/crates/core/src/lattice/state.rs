//! Lattice states: flat arrays of boundary field values, plus the uniform
//! background values and function tables they are evaluated against.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::calc_var::TheorySpec;
use crate::expr::{Expr, JetVar};

use super::grid::LatticeGrid;
use super::LatticeError;

/// A boundary field component, one array entry per site.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub field: String,
    pub component: Vec<u8>,
}

impl Slot {
    pub fn new(field: &str, component: &[u8]) -> Self {
        Slot {
            field: field.to_string(),
            component: component.to_vec(),
        }
    }

    pub fn of(v: &JetVar) -> Self {
        Slot::new(&v.field, &v.component)
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&JetVar::field(&self.field, &self.component).render(None))
    }
}

/// Ordered list of slots; the state vector is slot-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateLayout {
    slots: Vec<Slot>,
}

impl StateLayout {
    pub fn new(mut slots: Vec<Slot>) -> Self {
        slots.sort();
        slots.dedup();
        StateLayout { slots }
    }

    /// Every varied symbol occurring in the given expressions.
    pub fn from_exprs<'a>(exprs: impl IntoIterator<Item = &'a Expr>) -> Self {
        let mut set = BTreeSet::new();
        for e in exprs {
            for v in e.vars().into_iter().filter(|v| v.is_varied()) {
                set.insert(Slot::of(&v));
            }
        }
        StateLayout::new(set.into_iter().collect())
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn index(&self, s: &Slot) -> Option<usize> {
        self.slots.binary_search(s).ok()
    }

    pub fn merge(&self, other: &StateLayout) -> StateLayout {
        StateLayout::new(self.slots.iter().chain(&other.slots).cloned().collect())
    }
}

pub type FunctionTable = BTreeMap<String, Arc<dyn Fn(u32, f64) -> Option<f64> + Send + Sync>>;

/// Background values (uniform over the grid) and numeric functions.
#[derive(Clone, Default)]
pub struct Environment {
    backgrounds: BTreeMap<Slot, f64>,
    functions: FunctionTable,
}

impl fmt::Debug for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Environment")
            .field("backgrounds", &self.backgrounds)
            .field("functions", &self.functions.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Environment {
    /// Unit backgrounds and, for a split metric, the flat spatial metric.
    pub fn flat(t: &TheorySpec) -> Self {
        let mut env = Environment::default();
        if let Some(split) = &t.metric_split {
            let tang = t.tangential();
            env.set_metric(split.inverse_name().as_str(), &split.sqrt_det_name(), &tang, &identity(tang.len()))
                .expect("identity is positive definite");
        }
        env
    }

    pub fn set_background(&mut self, name: &str, component: &[u8], value: f64) {
        self.backgrounds.insert(Slot::new(name, component), value);
    }

    /// Installs the inverse and square-root determinant of a constant spatial
    /// metric `h`, given on the tangential coordinates `coords`.
    pub fn set_metric(
        &mut self,
        inverse: &str,
        sqrt_det: &str,
        coords: &[usize],
        h: &[Vec<f64>],
    ) -> Result<(), LatticeError> {
        let n = coords.len();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| h[i][j]);
        let chol = m
            .clone()
            .cholesky()
            .ok_or_else(|| LatticeError::Shape("spatial metric must be positive definite".into()))?;
        let inv = chol.inverse();
        for (a, &i) in coords.iter().enumerate() {
            for (b, &j) in coords.iter().enumerate() {
                if i <= j {
                    self.set_background(inverse, &[i as u8, j as u8], inv[(a, b)]);
                }
            }
        }
        self.set_background(sqrt_det, &[], m.determinant().sqrt());
        Ok(())
    }

    pub fn set_function<F>(&mut self, name: &str, f: F)
    where
        F: Fn(u32, f64) -> Option<f64> + Send + Sync + 'static,
    {
        self.functions.insert(name.to_string(), Arc::new(f));
    }

    /// Background value; unset backgrounds default to one.
    pub fn background(&self, name: &str, component: &[u8]) -> f64 {
        self.backgrounds
            .get(&Slot::new(name, component))
            .copied()
            .unwrap_or(1.0)
    }

    pub fn call(&self, name: &str, order: u32, x: f64) -> Option<f64> {
        self.functions.get(name).and_then(|f| f(order, x))
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

/// Field values over a grid, stored slot-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub grid: LatticeGrid,
    pub layout: StateLayout,
    pub values: Vec<f64>,
}

impl FieldState {
    pub fn zeros(grid: LatticeGrid, layout: StateLayout) -> Self {
        let n = grid.sites() * layout.len();
        FieldState {
            grid,
            layout,
            values: vec![0.0; n],
        }
    }

    pub fn from_values(grid: LatticeGrid, layout: StateLayout, values: Vec<f64>) -> Result<Self, LatticeError> {
        if values.len() != grid.sites() * layout.len() {
            return Err(LatticeError::Shape(format!(
                "{} values for {} slots on {} sites",
                values.len(),
                layout.len(),
                grid.sites()
            )));
        }
        Ok(FieldState { grid, layout, values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn slot_values(&self, slot: usize) -> &[f64] {
        let n = self.grid.sites();
        &self.values[slot * n..(slot + 1) * n]
    }

    pub fn slot_values_mut(&mut self, slot: usize) -> &mut [f64] {
        let n = self.grid.sites();
        &mut self.values[slot * n..(slot + 1) * n]
    }

    pub fn field(&self, s: &Slot) -> Option<&[f64]> {
        self.layout.index(s).map(|i| self.slot_values(i))
    }

    pub fn field_mut(&mut self, s: &Slot) -> Option<&mut [f64]> {
        let i = self.layout.index(s)?;
        Some(self.slot_values_mut(i))
    }

    /// Flat index of `slot` at `site`.
    pub fn flat(&self, slot: usize, site: usize) -> usize {
        slot * self.grid.sites() + site
    }
}
