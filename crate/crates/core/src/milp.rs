//! Solver-agnostic MILP artifact: typed variables, linear constraints and a
//! linear objective, with stable deterministic ordering.
//!
//! Model generators append variables and constraints in a fixed order; the
//! artifact can then be serialized to MPS (see [`crate::solver::mps`]),
//! summarized structurally, or re-checked against a candidate solution.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Handle to a variable inside one [`ModelArtifact`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lb: f64,
    pub ub: f64,
}

/// Constraint sense, row form `terms (sense) rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sense::Le => write!(f, "<="),
            Sense::Ge => write!(f, ">="),
            Sense::Eq => write!(f, "="),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    /// Constraint family label used for structural summaries.
    pub family: &'static str,
    /// Coefficients; at most one entry per variable, no exact zeros.
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate constraint name `{0}`")]
    DuplicateConstraint(String),
    #[error("invalid bounds [{lb}, {ub}] for variable `{name}`")]
    InvalidBounds { name: String, lb: f64, ub: f64 },
    #[error("constraint `{0}` has no terms")]
    EmptyConstraint(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

/// Structural metadata carried alongside the matrix.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ModelMeta {
    pub variant: Option<String>,
    pub formulation: Option<String>,
    /// Canonical names of investment decision variables (for cost splits).
    pub investment_vars: Vec<String>,
}

/// A complete linear model: variables, constraints, minimization objective.
#[derive(Debug, Clone, Default)]
pub struct ModelArtifact {
    pub name: String,
    vars: Vec<Variable>,
    cons: Vec<Constraint>,
    obj: Vec<f64>,
    by_name: BTreeMap<String, VarId>,
    con_names: BTreeMap<String, usize>,
    pub meta: ModelMeta,
}

impl ModelArtifact {
    pub fn new(name: impl Into<String>) -> Self {
        ModelArtifact {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lb: f64,
        ub: f64,
    ) -> Result<VarId, ModelError> {
        let name = name.into();
        if lb > ub || lb.is_nan() || ub.is_nan() {
            return Err(ModelError::InvalidBounds { name, lb, ub });
        }
        if self.by_name.contains_key(&name) {
            return Err(ModelError::DuplicateVariable(name));
        }
        let id = VarId(self.vars.len());
        self.by_name.insert(name.clone(), id);
        self.vars.push(Variable { name, kind, lb, ub });
        self.obj.push(0.0);
        Ok(id)
    }

    /// Adds a constraint; duplicate variable terms are merged and exact-zero
    /// coefficients dropped.
    pub fn add_con(
        &mut self,
        family: &'static str,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<(), ModelError> {
        let name = name.into();
        if self.con_names.contains_key(&name) {
            return Err(ModelError::DuplicateConstraint(name));
        }
        let mut merged: BTreeMap<VarId, f64> = BTreeMap::new();
        for (v, c) in terms {
            debug_assert!(v.0 < self.vars.len(), "term references undeclared variable");
            *merged.entry(v).or_insert(0.0) += c;
        }
        let terms: Vec<(VarId, f64)> = merged.into_iter().filter(|(_, c)| *c != 0.0).collect();
        if terms.is_empty() {
            return Err(ModelError::EmptyConstraint(name));
        }
        self.con_names.insert(name.clone(), self.cons.len());
        self.cons.push(Constraint {
            name,
            family,
            terms,
            sense,
            rhs,
        });
        Ok(())
    }

    /// Accumulates `coeff` onto the objective coefficient of `var`.
    pub fn add_obj(&mut self, var: VarId, coeff: f64) {
        self.obj[var.0] += coeff;
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_cons(&self) -> usize {
        self.cons.len()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn cons(&self) -> &[Constraint] {
        &self.cons
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    /// Handle for the variable at `index` (declaration order).
    pub fn id_at(&self, index: usize) -> VarId {
        assert!(index < self.vars.len(), "variable index out of range");
        VarId(index)
    }

    pub fn objective_coeff(&self, id: VarId) -> f64 {
        self.obj[id.0]
    }

    /// Replaces a variable's bounds (used to fix investment decisions).
    pub fn set_bounds(&mut self, id: VarId, lb: f64, ub: f64) -> Result<(), ModelError> {
        if lb > ub || lb.is_nan() || ub.is_nan() {
            return Err(ModelError::InvalidBounds {
                name: self.vars[id.0].name.clone(),
                lb,
                ub,
            });
        }
        self.vars[id.0].lb = lb;
        self.vars[id.0].ub = ub;
        Ok(())
    }

    /// Objective value of a dense candidate point (aligned with variables).
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.obj
            .iter()
            .zip(values)
            .map(|(c, v)| c * v)
            .sum()
    }

    /// Left-hand-side activity of constraint `i` at a dense candidate point.
    pub fn activity(&self, i: usize, values: &[f64]) -> f64 {
        self.cons[i]
            .terms
            .iter()
            .map(|(v, c)| c * values[v.0])
            .sum()
    }

    /// Per-family constraint counts, plus variable counts by kind.
    pub fn summary(&self) -> ModelSummary {
        let mut families: BTreeMap<String, usize> = BTreeMap::new();
        for c in &self.cons {
            *families.entry(c.family.to_string()).or_insert(0) += 1;
        }
        let n_binary = self
            .vars
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .count();
        ModelSummary {
            name: self.name.clone(),
            variant: self.meta.variant.clone(),
            formulation: self.meta.formulation.clone(),
            n_vars: self.vars.len(),
            n_binary,
            n_cons: self.cons.len(),
            families,
        }
    }
}

/// JSON-serializable structural summary (counts per constraint family).
#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub name: String,
    pub variant: Option<String>,
    pub formulation: Option<String>,
    pub n_vars: usize,
    pub n_binary: usize,
    pub n_cons: usize,
    pub families: BTreeMap<String, usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_duplicate_terms_and_drops_zeros() {
        let mut m = ModelArtifact::new("t");
        let x = m.add_var("x", VarKind::Continuous, 0.0, 1.0).unwrap();
        let y = m.add_var("y", VarKind::Continuous, 0.0, 1.0).unwrap();
        m.add_con("f", "c", vec![(x, 1.0), (x, 2.0), (y, 0.0)], Sense::Le, 5.0)
            .unwrap();
        assert_eq!(m.cons()[0].terms, vec![(x, 3.0)]);
    }

    #[test]
    fn rejects_duplicate_names() {
        let mut m = ModelArtifact::new("t");
        m.add_var("x", VarKind::Continuous, 0.0, 1.0).unwrap();
        assert!(matches!(
            m.add_var("x", VarKind::Binary, 0.0, 1.0),
            Err(ModelError::DuplicateVariable(_))
        ));
    }

    #[test]
    fn summary_counts_families() {
        let mut m = ModelArtifact::new("t");
        let x = m.add_var("x", VarKind::Binary, 0.0, 1.0).unwrap();
        m.add_con("a", "c1", vec![(x, 1.0)], Sense::Ge, 0.0).unwrap();
        m.add_con("a", "c2", vec![(x, 1.0)], Sense::Le, 1.0).unwrap();
        m.add_con("b", "c3", vec![(x, 1.0)], Sense::Eq, 1.0).unwrap();
        let s = m.summary();
        assert_eq!(s.families["a"], 2);
        assert_eq!(s.families["b"], 1);
        assert_eq!(s.n_binary, 1);
    }
}
