//! Sparse time-point selection inside a day: pick r̄ of the T hourly
//! instants (always including both ends) so the piecewise-linear
//! interpolation through the selected points minimizes the integrated
//! absolute error over all areas and features.
//!
//! The selection problem is solved exactly by dynamic programming over
//! segments. Inside a run of unselected points the optimal approximation is
//! forced onto the chord between the bracketing selected points (the
//! neighbour-averaging constraints pin interior values to the linear
//! interpolant), so the objective decomposes per segment and
//! `best(j, k) = min_i best(i, k-1) + segment_cost(i, j)` is exact. An
//! optional big-M MILP emission of the original formulation is kept purely
//! as a cross-validation oracle.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ingest::{DayMatrix, Feature, DAY_POINTS};
use crate::milp::{ModelArtifact, Sense, VarKind};
use crate::solver::mps;

#[derive(Debug, Error)]
pub enum BreakpointError {
    #[error("requested {requested} points outside valid range 2..={points}")]
    CountOutOfRange { requested: usize, points: usize },
    #[error("segment bounds i={i} >= j={j}")]
    BadSegment { i: usize, j: usize },
    #[error("allocation needs 2 <= r_min <= r_avg (got r_min={r_min}, r_avg={r_avg})")]
    BadAllocation { r_min: usize, r_avg: usize },
    #[error("budget {budget} exceeds the {capacity} available time points")]
    BudgetExceedsCapacity { budget: usize, capacity: usize },
    #[error("no days to allocate over")]
    NoDays,
    #[error(transparent)]
    Mps(#[from] mps::MpsError),
    #[error(transparent)]
    Model(#[from] crate::milp::ModelError),
}

/// The per-day view the selector operates on: one row per (area, feature)
/// series, `n_points` hourly instants each.
#[derive(Debug, Clone)]
pub struct DayProfile {
    n_points: usize,
    series: Vec<Vec<f64>>,
}

impl DayProfile {
    pub fn new(series: Vec<Vec<f64>>) -> Self {
        let n_points = series.first().map(|s| s.len()).unwrap_or(0);
        assert!(series.iter().all(|s| s.len() == n_points));
        assert!(n_points >= 2, "a day needs at least two time points");
        DayProfile { n_points, series }
    }

    pub fn from_day(day: &DayMatrix) -> Self {
        let mut series = Vec::with_capacity(day.n_areas() * 2);
        for a in 0..day.n_areas() {
            for f in Feature::ALL {
                series.push((0..DAY_POINTS).map(|t| day.get(a, f, t)).collect());
            }
        }
        DayProfile::new(series)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_series(&self) -> usize {
        self.series.len()
    }

    pub fn series(&self) -> &[Vec<f64>] {
        &self.series
    }

    pub fn max_abs(&self) -> f64 {
        self.series
            .iter()
            .flat_map(|s| s.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Selected time points of one representative day.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDaySelection {
    pub rd_index: usize,
    /// Strictly increasing selected indices; first 0, last T-1.
    pub indices: Vec<usize>,
    /// Interval durations in hours, `indices[k+1] - indices[k]`; filled by
    /// [`finalize_selection`].
    pub deltas: Vec<u32>,
    /// Total absolute interpolation error at this selection.
    pub objective: f64,
}

impl SparseDaySelection {
    /// r_d, the number of selected points.
    pub fn count(&self) -> usize {
        self.indices.len()
    }
}

/// Sum over series of absolute residuals of interior points against the
/// chord from point `i` to point `j`.
pub fn segment_cost(profile: &DayProfile, i: usize, j: usize) -> Result<f64, BreakpointError> {
    if i >= j || j >= profile.n_points {
        return Err(BreakpointError::BadSegment { i, j });
    }
    let mut total = 0.0;
    for s in &profile.series {
        let yi = s[i];
        let yj = s[j];
        let span = (j - i) as f64;
        for t in (i + 1)..j {
            let interp = yi + (yj - yi) * ((t - i) as f64) / span;
            total += (s[t] - interp).abs();
        }
    }
    Ok(total)
}

fn all_segment_costs(profile: &DayProfile) -> Vec<Vec<f64>> {
    let t_max = profile.n_points;
    let mut cost = vec![vec![0.0; t_max]; t_max];
    for i in 0..t_max {
        for j in (i + 1)..t_max {
            cost[i][j] = segment_cost(profile, i, j).expect("bounds checked");
        }
    }
    cost
}

/// Globally optimal selection of `requested` indices including both ends,
/// minimizing the summed segment costs; ties break toward the
/// lexicographically smallest index vector.
pub fn optimal_breakpoints(
    profile: &DayProfile,
    requested: usize,
) -> Result<SparseDaySelection, BreakpointError> {
    let t_max = profile.n_points;
    if requested < 2 || requested > t_max {
        return Err(BreakpointError::CountOutOfRange {
            requested,
            points: t_max,
        });
    }
    let cost = all_segment_costs(profile);
    let last = t_max - 1;
    // f[i][m]: minimal cost from selected point i to the end using m more
    // selected points.
    let m_max = requested - 1;
    let mut f = vec![vec![f64::INFINITY; m_max + 1]; t_max];
    f[last][0] = 0.0;
    for m in 1..=m_max {
        // With m more points after i, the next index j leaves m-1 points to
        // place strictly between j and last inclusive of last.
        for i in 0..last {
            let j_hi = last - (m - 1);
            if j_hi <= i {
                continue;
            }
            let mut best = f64::INFINITY;
            for j in (i + 1)..=j_hi {
                let c = cost[i][j] + f[j][m - 1];
                if c < best {
                    best = c;
                }
            }
            f[i][m] = best;
        }
    }
    let objective = f[0][m_max];
    debug_assert!(objective.is_finite());

    // Front-to-back reconstruction choosing the smallest next index that
    // attains the optimum (same arithmetic as the fill, so exact equality).
    let mut indices = vec![0usize];
    let mut i = 0usize;
    let mut m = m_max;
    while m > 0 {
        let j_hi = last - (m - 1);
        let mut chosen = None;
        for j in (i + 1)..=j_hi {
            if cost[i][j] + f[j][m - 1] == f[i][m] {
                chosen = Some(j);
                break;
            }
        }
        let j = chosen.expect("an optimal successor exists");
        indices.push(j);
        i = j;
        m -= 1;
    }
    debug_assert_eq!(*indices.last().unwrap(), last);

    Ok(SparseDaySelection {
        rd_index: 0,
        indices,
        deltas: Vec::new(),
        objective,
    })
}

/// Fills the interval durations Δ from consecutive index differences.
pub fn finalize_selection(mut sel: SparseDaySelection) -> SparseDaySelection {
    sel.deltas = sel
        .indices
        .windows(2)
        .map(|w| (w[1] - w[0]) as u32)
        .collect();
    sel
}

/// How representative time points are spread across days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllocationMode {
    /// Every day receives exactly `r_avg` points.
    Equal,
    /// Greedy minimax: start at `r_min`, repeatedly add a point to the day
    /// with the largest remaining error until the budget `|D|·r_avg` is
    /// spent.
    Adaptive,
}

/// Result of [`allocate_rtps`] plus the per-iteration maximum objective
/// trace of the greedy loop (empty in equal mode).
#[derive(Debug, Clone)]
pub struct Allocation {
    pub selections: Vec<SparseDaySelection>,
    pub max_trace: Vec<f64>,
}

/// Allocates time points across days and solves each day at its final count.
pub fn allocate_rtps(
    profiles: &[DayProfile],
    r_avg: usize,
    r_min: usize,
    mode: AllocationMode,
) -> Result<Allocation, BreakpointError> {
    if profiles.is_empty() {
        return Err(BreakpointError::NoDays);
    }
    if r_min < 2 || r_min > r_avg {
        return Err(BreakpointError::BadAllocation { r_min, r_avg });
    }
    let capacity: usize = profiles.iter().map(|p| p.n_points).sum();
    let budget = profiles.len() * r_avg;
    if budget > capacity {
        return Err(BreakpointError::BudgetExceedsCapacity { budget, capacity });
    }
    for p in profiles {
        if r_min > p.n_points {
            return Err(BreakpointError::CountOutOfRange {
                requested: r_min,
                points: p.n_points,
            });
        }
    }

    let mut memo: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let objective = |d: usize, r: usize, memo: &mut BTreeMap<(usize, usize), f64>| -> f64 {
        if let Some(v) = memo.get(&(d, r)) {
            return *v;
        }
        let v = optimal_breakpoints(&profiles[d], r)
            .expect("count within range")
            .objective;
        memo.insert((d, r), v);
        v
    };

    let mut counts: Vec<usize> = match mode {
        AllocationMode::Equal => vec![r_avg; profiles.len()],
        AllocationMode::Adaptive => vec![r_min; profiles.len()],
    };
    let mut max_trace = Vec::new();
    if mode == AllocationMode::Adaptive {
        let mut spent: usize = counts.iter().sum();
        while spent < budget {
            // Day with the largest mismatch among those not yet at full
            // resolution; ties go to the lowest index.
            let mut best: Option<(usize, f64)> = None;
            let mut current_max = 0.0f64;
            for d in 0..profiles.len() {
                let o = objective(d, counts[d], &mut memo);
                current_max = current_max.max(o);
                if counts[d] < profiles[d].n_points {
                    let better = match best {
                        None => true,
                        Some((_, bo)) => o > bo,
                    };
                    if better {
                        best = Some((d, o));
                    }
                }
            }
            max_trace.push(current_max);
            let (d, _) = best.expect("budget <= capacity leaves headroom");
            counts[d] += 1;
            spent += 1;
        }
        // Record the post-loop maximum as the final trace entry.
        let final_max = (0..profiles.len())
            .map(|d| objective(d, counts[d], &mut memo))
            .fold(0.0f64, f64::max);
        max_trace.push(final_max);
    }

    let selections = profiles
        .iter()
        .enumerate()
        .map(|(d, p)| {
            let mut sel = optimal_breakpoints(p, counts[d]).expect("count within range");
            sel.rd_index = d;
            Ok(finalize_selection(sel))
        })
        .collect::<Result<Vec<_>, BreakpointError>>()?;
    Ok(Allocation {
        selections,
        max_trace,
    })
}

/// Outcome of an MILP emission: file locations plus validation warnings.
#[derive(Debug, Clone)]
pub struct EmitReport {
    pub mps_path: PathBuf,
    pub varmap_path: PathBuf,
    pub warnings: Vec<String>,
}

/// Builds the big-M selection MILP for one day: binary pick variables per
/// time point, interpolation values pinned by neighbour-averaging rows, and
/// split positive/negative residuals in the objective. Used only to
/// cross-validate the dynamic program.
pub fn build_rtp_milp(
    profile: &DayProfile,
    requested: usize,
    big_m: f64,
) -> Result<(ModelArtifact, Vec<String>), BreakpointError> {
    let t_max = profile.n_points;
    if requested < 2 || requested > t_max {
        return Err(BreakpointError::CountOutOfRange {
            requested,
            points: t_max,
        });
    }
    let mut warnings = Vec::new();
    let max_abs = profile.max_abs();
    if big_m < max_abs {
        warnings.push(format!(
            "big-M {big_m} is below max |y| = {max_abs}; the selection constraints may cut the optimum"
        ));
    } else if big_m < 2.0 * max_abs {
        warnings.push(format!(
            "big-M {big_m} is below the safe threshold 2·max|y| = {}",
            2.0 * max_abs
        ));
    }

    let mut m = ModelArtifact::new("rtp_selection");
    let last = t_max - 1;
    let pick: Vec<_> = (0..t_max)
        .map(|t| {
            let fixed = t == 0 || t == last;
            let lb = if fixed { 1.0 } else { 0.0 };
            m.add_var(format!("I[{t}]"), VarKind::Binary, lb, 1.0)
        })
        .collect::<Result<_, _>>()?;
    let mut approx = Vec::with_capacity(profile.n_series());
    let mut err_pos = Vec::with_capacity(profile.n_series());
    let mut err_neg = Vec::with_capacity(profile.n_series());
    for s in 0..profile.n_series() {
        let mut zs = Vec::with_capacity(t_max);
        let mut ps = Vec::with_capacity(t_max);
        let mut ns = Vec::with_capacity(t_max);
        for t in 0..t_max {
            zs.push(m.add_var(
                format!("Z[{s},{t}]"),
                VarKind::Continuous,
                f64::NEG_INFINITY,
                f64::INFINITY,
            )?);
            let p = m.add_var(format!("ERp[{s},{t}]"), VarKind::Continuous, 0.0, f64::INFINITY)?;
            let n = m.add_var(format!("ERm[{s},{t}]"), VarKind::Continuous, 0.0, f64::INFINITY)?;
            m.add_obj(p, 1.0);
            m.add_obj(n, 1.0);
            ps.push(p);
            ns.push(n);
        }
        approx.push(zs);
        err_pos.push(ps);
        err_neg.push(ns);
    }

    m.add_con(
        "count",
        "count",
        pick.iter().map(|&v| (v, 1.0)).collect(),
        Sense::Eq,
        requested as f64,
    )?;
    for (s, series) in profile.series.iter().enumerate() {
        for t in 0..t_max {
            let y = series[t];
            let z = approx[s][t];
            m.add_con(
                "er_def",
                format!("er_def[{s},{t}]"),
                vec![(err_pos[s][t], 1.0), (err_neg[s][t], -1.0), (z, 1.0)],
                Sense::Eq,
                y,
            )?;
            // Selected -> Z equals the data value.
            m.add_con(
                "sel_ub",
                format!("sel_ub[{s},{t}]"),
                vec![(z, 1.0), (pick[t], big_m)],
                Sense::Le,
                y + big_m,
            )?;
            m.add_con(
                "sel_lb",
                format!("sel_lb[{s},{t}]"),
                vec![(z, 1.0), (pick[t], -big_m)],
                Sense::Ge,
                y - big_m,
            )?;
            // Unselected interior -> Z equals the neighbour average.
            if t > 0 && t < last {
                m.add_con(
                    "avg_ub",
                    format!("avg_ub[{s},{t}]"),
                    vec![
                        (z, 1.0),
                        (approx[s][t - 1], -0.5),
                        (approx[s][t + 1], -0.5),
                        (pick[t], -big_m),
                    ],
                    Sense::Le,
                    0.0,
                )?;
                m.add_con(
                    "avg_lb",
                    format!("avg_lb[{s},{t}]"),
                    vec![
                        (z, 1.0),
                        (approx[s][t - 1], -0.5),
                        (approx[s][t + 1], -0.5),
                        (pick[t], big_m),
                    ],
                    Sense::Ge,
                    0.0,
                )?;
            }
        }
    }
    Ok((m, warnings))
}

/// Default big-M for [`emit_rtp_milp`]; factors live in [0, ~1.5] so this is
/// comfortably above 2·max|y|.
pub const DEFAULT_BIG_M: f64 = 10.0;

/// Writes the selection MILP as MPS (plus varmap sidecar) for external
/// cross-validation of the dynamic program.
pub fn emit_rtp_milp(
    profile: &DayProfile,
    requested: usize,
    big_m: f64,
    path: &Path,
) -> Result<EmitReport, BreakpointError> {
    let (model, warnings) = build_rtp_milp(profile, requested, big_m)?;
    mps::write_mps(&model, path)?;
    let varmap_path = path.with_extension("varmap.csv");
    mps::write_varmap(&model, &varmap_path)?;
    Ok(EmitReport {
        mps_path: path.to_path_buf(),
        varmap_path,
        warnings,
    })
}

/// Emits `rtps.csv` (rd_index, k, J, delta); the terminal point of each day
/// carries delta 0.
pub fn write_rtps_csv(selections: &[SparseDaySelection], path: &Path) -> Result<(), std::io::Error> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    writeln!(w, "rd_index,k,j,delta")?;
    for sel in selections {
        for (k, &j) in sel.indices.iter().enumerate() {
            let delta = sel.deltas.get(k).copied().unwrap_or(0);
            writeln!(w, "{},{},{},{}", sel.rd_index, k, j, delta)?;
        }
    }
    w.flush()
}

/// Emits `rtp_errors.csv` (rd_index, r_d, objective).
pub fn write_rtp_errors_csv(
    selections: &[SparseDaySelection],
    path: &Path,
) -> Result<(), std::io::Error> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    writeln!(w, "rd_index,r_d,objective")?;
    for sel in selections {
        writeln!(w, "{},{},{}", sel.rd_index, sel.count(), sel.objective)?;
    }
    w.flush()
}

/// Reads `rtps.csv` back into selections.
pub fn read_rtps_csv(path: &Path) -> Result<Vec<SparseDaySelection>, BreakpointError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        BreakpointError::Mps(mps::MpsError::Io {
            path: path.display().to_string(),
            source: e,
        })
    })?;
    let mut by_rd: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        if n == 0 || line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let bad = || {
            BreakpointError::Mps(mps::MpsError::Malformed {
                line: n + 1,
                msg: format!("bad rtps row `{line}`"),
            })
        };
        if cols.len() != 4 {
            return Err(bad());
        }
        let rd: usize = cols[0].parse().map_err(|_| bad())?;
        let k: usize = cols[1].parse().map_err(|_| bad())?;
        let j: usize = cols[2].parse().map_err(|_| bad())?;
        by_rd.entry(rd).or_default().push((k, j));
    }
    let mut out = Vec::new();
    for (rd, mut pairs) in by_rd {
        pairs.sort_unstable();
        let indices: Vec<usize> = pairs.into_iter().map(|(_, j)| j).collect();
        out.push(finalize_selection(SparseDaySelection {
            rd_index: rd,
            indices,
            deltas: Vec::new(),
            objective: 0.0,
        }));
    }
    Ok(out)
}
