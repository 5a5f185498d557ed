//! Independent feasibility re-check: substitutes parsed solution values into
//! every constraint and bound of the emitted model, without trusting the
//! solver's own residual report.

use serde::Serialize;

use crate::milp::{ModelArtifact, Sense};
use crate::solver::SolutionRecord;

/// Outcome of re-checking a solution against an artifact.
#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    /// Largest absolute violation across constraints and bounds.
    pub max_violation: f64,
    /// Name of the worst-violated constraint or variable bound, if any
    /// violation exceeds the tolerance.
    pub worst: Option<String>,
    /// Number of constraints/bounds violated beyond the tolerance.
    pub n_violations: usize,
    /// Objective recomputed from the values.
    pub objective: f64,
    pub tolerance: f64,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.n_violations == 0
    }

    /// Relative mismatch between the recomputed objective and a reported one.
    pub fn objective_gap(&self, reported: f64) -> f64 {
        let denom = reported.abs().max(1.0);
        (self.objective - reported).abs() / denom
    }
}

/// Dense value vector in variable declaration order; absent names read as 0,
/// matching the parse-time defaulting rule.
pub fn dense_values(model: &ModelArtifact, record: &SolutionRecord) -> Vec<f64> {
    model
        .vars()
        .iter()
        .map(|v| record.value(&v.name))
        .collect()
}

/// Re-checks every constraint and variable bound at absolute tolerance `tol`.
pub fn check_solution(model: &ModelArtifact, record: &SolutionRecord, tol: f64) -> FeasibilityReport {
    let x = dense_values(model, record);
    let mut max_violation = 0.0f64;
    let mut worst = None;
    let mut n_violations = 0usize;

    let mut note = |violation: f64, name: &str| {
        if violation > tol {
            n_violations += 1;
        }
        if violation > max_violation {
            max_violation = violation;
            if violation > tol {
                worst = Some(name.to_string());
            }
        }
    };

    for (i, c) in model.cons().iter().enumerate() {
        let lhs = model.activity(i, &x);
        let violation = match c.sense {
            Sense::Le => (lhs - c.rhs).max(0.0),
            Sense::Ge => (c.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - c.rhs).abs(),
        };
        note(violation, &c.name);
    }
    for (i, v) in model.vars().iter().enumerate() {
        let val = x[i];
        let below = (v.lb - val).max(0.0);
        let above = (val - v.ub).max(0.0);
        note(below.max(above), &v.name);
    }

    FeasibilityReport {
        max_violation,
        worst,
        n_violations,
        objective: model.objective_value(&x),
        tolerance: tol,
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::milp::{ModelArtifact, Sense, VarKind};
    use crate::solver::SolutionStatus;

    fn record(values: &[(&str, f64)]) -> SolutionRecord {
        SolutionRecord {
            status: SolutionStatus::Optimal,
            objective: None,
            values: values
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect::<BTreeMap<_, _>>(),
            log_path: None,
            wall_time_s: 0.0,
            missing_defaulted: 0,
            message: None,
        }
    }

    fn model() -> ModelArtifact {
        let mut m = ModelArtifact::new("t");
        let x = m.add_var("x", VarKind::Continuous, 0.0, 10.0).unwrap();
        let y = m.add_var("y", VarKind::Continuous, 0.0, 10.0).unwrap();
        m.add_obj(x, 2.0);
        m.add_con("f", "sum_le", vec![(x, 1.0), (y, 1.0)], Sense::Le, 5.0)
            .unwrap();
        m.add_con("f", "link_eq", vec![(x, 1.0), (y, -1.0)], Sense::Eq, 1.0)
            .unwrap();
        m
    }

    #[test]
    fn feasible_point_passes() {
        let rep = check_solution(&model(), &record(&[("x", 3.0), ("y", 2.0)]), 1e-6);
        assert!(rep.is_feasible());
        assert_eq!(rep.objective, 6.0);
    }

    #[test]
    fn violations_detected_and_named() {
        let rep = check_solution(&model(), &record(&[("x", 6.0), ("y", 2.0)]), 1e-6);
        assert!(!rep.is_feasible());
        assert_eq!(rep.n_violations, 2); // sum_le and link_eq both break
        assert_eq!(rep.worst.as_deref(), Some("sum_le"));
        assert!((rep.max_violation - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bound_violations_detected() {
        let rep = check_solution(&model(), &record(&[("x", -0.5), ("y", -1.5)]), 1e-6);
        assert!(rep.n_violations >= 2);
    }
}
