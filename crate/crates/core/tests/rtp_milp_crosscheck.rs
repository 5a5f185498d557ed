//! Cross-validates the dynamic program against the emitted big-M selection
//! MILP solved externally.

use replan_core::breakpoints::{
    build_rtp_milp, emit_rtp_milp, optimal_breakpoints, DayProfile, DEFAULT_BIG_M,
};
use replan_core::solver::{
    default_profile, invoke_solver, mps, parse_solution, SolutionStatus,
};

#[test]
fn emitted_milp_matches_dp_on_frozen_toy() {
    let p = DayProfile::new(vec![vec![0.0, 4.0, 2.0, 1.0, 0.0]]);
    let dp = optimal_breakpoints(&p, 3).unwrap();
    assert!((dp.objective - 1.0).abs() < 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy.mps");
    let report = emit_rtp_milp(&p, 3, DEFAULT_BIG_M, &path).unwrap();
    assert!(report.warnings.is_empty());
    let varmap = mps::read_varmap(&report.varmap_path).unwrap();
    let raw = invoke_solver(&path, &default_profile(), 1e-9, 60.0).unwrap();
    let rec = parse_solution(&raw.sol_path, default_profile().adapter, &varmap).unwrap();
    assert_eq!(rec.status, SolutionStatus::Optimal);
    assert!(
        (rec.objective.unwrap() - dp.objective).abs() < 1e-6,
        "solver {} vs dp {}",
        rec.objective.unwrap(),
        dp.objective
    );
    // The solver's selected points agree with the DP choice.
    for t in 0..5 {
        let picked = rec.binary_value(&format!("I[{t}]"), 1e-6).unwrap() == 1.0;
        assert_eq!(picked, dp.indices.contains(&t), "I[{t}] mismatch");
    }
}

#[test]
fn full_selection_milp_optimum_is_zero() {
    let p = DayProfile::new(vec![vec![0.1, 0.9, 0.4, 0.6, 0.2]]);
    let (model, _) = build_rtp_milp(&p, 5, DEFAULT_BIG_M).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let rec = replan_core::solver::solve_model(
        &model,
        dir.path(),
        "full",
        &default_profile(),
        1e-9,
        60.0,
    )
    .unwrap();
    assert_eq!(rec.status, SolutionStatus::Optimal);
    assert!(rec.objective.unwrap().abs() < 1e-9);
}
