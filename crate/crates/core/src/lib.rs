//! Reduction of year-long multi-area load/wind series to representative days
//! and unequal representative time points, plus generation of the matching
//! transmission / storage / wind co-planning MILP in reference and reduced
//! variants, an external-solver bridge, and reduction-error evaluation.
//!
//! The pipeline stages map onto the modules below:
//!
//! * [`ingest`] — hourly CSV loading, factor normalization, day slicing
//! * [`cluster`] — extreme-day aware representative-day extraction and
//!   sequentially-linked-day mapping
//! * [`breakpoints`] — sparse time-point selection inside each day (exact DP
//!   with an optional MILP cross-check emission) and greedy allocation
//! * [`milp`] — the solver-agnostic model artifact shared by all generators
//! * [`planning`] — the co-planning model generator (REF / RD / RDTP,
//!   piecewise-linear or piecewise-constant)
//! * [`solver`] — MPS persistence, subprocess solver invocation, solution
//!   parsing and independent feasibility re-checking
//! * [`evaluate`] — fixed-investment error metric, reconstruction fidelity,
//!   report emission
//! * [`synth`] — seeded synthetic datasets and toy instances for tests and
//!   demos

pub mod breakpoints;
pub mod cluster;
pub mod evaluate;
pub mod ingest;
pub mod milp;
pub mod planning;
pub mod solver;
pub mod synth;
