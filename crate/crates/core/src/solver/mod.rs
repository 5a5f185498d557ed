//! External MILP solver bridge: model persistence, subprocess invocation
//! through configurable profiles, solution parsing and independent
//! feasibility re-checking.
//!
//! A profile is a command template plus a solution-format adapter. Two
//! adapters ship with the crate: `generic` (whitespace `name value` lines,
//! optionally with `=status=` / `=obj=` headers) and `highs` (the native
//! HiGHS solution file). The default profile runs an embedded Python driver
//! that solves via scipy's HiGHS backend, writing the generic format.

pub mod feasibility;
pub mod mps;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{ModelArtifact, VarKind};
use mps::VarMap;

/// Embedded default driver (scipy/HiGHS); materialized next to the MPS file
/// when a command template references `{driver}`.
const DRIVER_PY: &str = include_str!("driver.py");

/// Environment variable overriding the first command token of any profile.
pub const SOLVER_BIN_ENV: &str = "REPLAN_SOLVER_BIN";

/// Extra wall-clock grace on top of the solver-side time limit before the
/// subprocess is killed (covers model read time in the driver).
const KILL_GRACE_S: f64 = 60.0;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("solver binary `{0}` not found")]
    BinaryNotFound(String),
    #[error("solver timed out after {0:.1}s (hard kill)")]
    Timeout(f64),
    #[error("solver exited with {code:?}; log tail:\n{tail}")]
    SolverFailed { code: Option<i32>, tail: String },
    #[error("malformed solution file {path} line {line}: {msg}")]
    MalformedSolution {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("solution names variable `{0}` absent from the name map")]
    UnknownVariable(String),
    #[error("unknown adapter `{0}` (expected `generic` or `highs`)")]
    UnknownAdapter(String),
    #[error(transparent)]
    Mps(#[from] mps::MpsError),
    #[error("binary variable `{name}` has non-integral value {value}")]
    FractionalBinary { name: String, value: f64 },
}

fn io_err(path: &Path, source: std::io::Error) -> SolveError {
    SolveError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Solution-format adapter selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Adapter {
    Generic,
    Highs,
}

impl FromStr for Adapter {
    type Err = SolveError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "generic" => Ok(Adapter::Generic),
            "highs" => Ok(Adapter::Highs),
            other => Err(SolveError::UnknownAdapter(other.to_string())),
        }
    }
}

/// Command template plus output adapter. Placeholders: `{mps}`, `{sol}`,
/// `{gap}`, `{timeout}`, `{driver}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverProfile {
    pub name: String,
    pub command: Vec<String>,
    pub adapter: Adapter,
}

/// Profiles available without configuration.
pub fn builtin_profiles() -> BTreeMap<String, SolverProfile> {
    let mut m = BTreeMap::new();
    m.insert(
        "scipy".to_string(),
        SolverProfile {
            name: "scipy".to_string(),
            command: vec![
                "python3".into(),
                "{driver}".into(),
                "{mps}".into(),
                "{sol}".into(),
                "--gap".into(),
                "{gap}".into(),
                "--timeout".into(),
                "{timeout}".into(),
            ],
            adapter: Adapter::Generic,
        },
    );
    m.insert(
        "highs".to_string(),
        SolverProfile {
            name: "highs".to_string(),
            command: vec![
                "highs".into(),
                "--options_file".into(),
                "".into(),
                "--solution_file".into(),
                "{sol}".into(),
                "--time_limit".into(),
                "{timeout}".into(),
                "{mps}".into(),
            ],
            adapter: Adapter::Highs,
        },
    );
    // The highs profile's empty options_file token is dropped at expansion.
    m.get_mut("highs").unwrap().command.retain(|t| !t.is_empty());
    m
}

pub fn default_profile() -> SolverProfile {
    builtin_profiles().remove("scipy").expect("builtin")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionStatus {
    Optimal,
    FeasibleGap,
    Infeasible,
    Error,
}

impl fmt::Display for SolutionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolutionStatus::Optimal => "optimal",
            SolutionStatus::FeasibleGap => "feasible-gap",
            SolutionStatus::Infeasible => "infeasible",
            SolutionStatus::Error => "error",
        };
        write!(f, "{s}")
    }
}

/// A parsed solver result with canonical variable names restored.
#[derive(Debug, Clone)]
pub struct SolutionRecord {
    pub status: SolutionStatus,
    pub objective: Option<f64>,
    /// Values keyed by canonical variable name; variables the solver did not
    /// report are present with value 0.
    pub values: BTreeMap<String, f64>,
    pub log_path: Option<PathBuf>,
    pub wall_time_s: f64,
    /// Number of declared variables missing from the solution file.
    pub missing_defaulted: usize,
    pub message: Option<String>,
}

impl SolutionRecord {
    pub fn value(&self, name: &str) -> f64 {
        self.values.get(name).copied().unwrap_or(0.0)
    }

    /// Value of a binary variable snapped to {0,1}; errors when it is more
    /// than `tol` away from an integer.
    pub fn binary_value(&self, name: &str, tol: f64) -> Result<f64, SolveError> {
        let v = self.value(name);
        let r = v.round();
        if (v - r).abs() > tol {
            return Err(SolveError::FractionalBinary {
                name: name.to_string(),
                value: v,
            });
        }
        Ok(r.clamp(0.0, 1.0))
    }
}

/// Raw result of one subprocess invocation.
#[derive(Debug, Clone)]
pub struct RawSolve {
    pub sol_path: PathBuf,
    pub log_path: PathBuf,
    pub wall_time_s: f64,
}

fn expand(token: &str, mps: &Path, sol: &Path, gap: f64, timeout: f64, driver: &Path) -> String {
    token
        .replace("{mps}", &mps.display().to_string())
        .replace("{sol}", &sol.display().to_string())
        .replace("{gap}", &format!("{gap}"))
        .replace("{timeout}", &format!("{timeout}"))
        .replace("{driver}", &driver.display().to_string())
}

/// Writes the embedded driver script next to `dir` atomically.
fn materialize_driver(dir: &Path) -> Result<PathBuf, SolveError> {
    let target = dir.join("replan_driver.py");
    let tmp = dir.join(format!(".replan_driver.{}.tmp", std::process::id()));
    fs::write(&tmp, DRIVER_PY).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, &target).map_err(|e| io_err(&target, e))?;
    Ok(target)
}

/// Runs the profile's command on an MPS file. The solver-side time limit is
/// passed through the template; a hard kill fires after `timeout_s` plus a
/// fixed grace period. Stdout/stderr are captured into a log file.
pub fn invoke_solver(
    mps_path: &Path,
    profile: &SolverProfile,
    gap: f64,
    timeout_s: f64,
) -> Result<RawSolve, SolveError> {
    let dir = mps_path.parent().unwrap_or_else(|| Path::new("."));
    let stem = mps_path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "model".to_string());
    let sol_path = dir.join(format!("{stem}.sol"));
    let log_path = dir.join(format!("{stem}.solve.log"));
    let needs_driver = profile.command.iter().any(|t| t.contains("{driver}"));
    let driver = if needs_driver {
        materialize_driver(dir)?
    } else {
        PathBuf::new()
    };

    let mut tokens: Vec<String> = profile
        .command
        .iter()
        .map(|t| expand(t, mps_path, &sol_path, gap, timeout_s, &driver))
        .collect();
    if tokens.is_empty() {
        return Err(SolveError::BinaryNotFound(String::new()));
    }
    if let Ok(bin) = std::env::var(SOLVER_BIN_ENV) {
        if !bin.is_empty() {
            tokens[0] = bin;
        }
    }

    let log = fs::File::create(&log_path).map_err(|e| io_err(&log_path, e))?;
    let log_err = log.try_clone().map_err(|e| io_err(&log_path, e))?;
    let start = Instant::now();
    let mut child = Command::new(&tokens[0])
        .args(&tokens[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::from(log))
        .stderr(Stdio::from(log_err))
        .spawn()
        .map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                SolveError::BinaryNotFound(tokens[0].clone())
            } else {
                io_err(Path::new(&tokens[0]), e)
            }
        })?;

    let hard_limit = Duration::from_secs_f64((timeout_s + KILL_GRACE_S).max(1.0));
    let status = loop {
        if let Some(status) = child.try_wait().map_err(|e| io_err(mps_path, e))? {
            break status;
        }
        if start.elapsed() > hard_limit {
            let _ = child.kill();
            let _ = child.wait();
            return Err(SolveError::Timeout(start.elapsed().as_secs_f64()));
        }
        std::thread::sleep(Duration::from_millis(20));
    };
    let wall = start.elapsed().as_secs_f64();

    if !status.success() {
        let tail = log_tail(&log_path, 2000);
        return Err(SolveError::SolverFailed {
            code: status.code(),
            tail,
        });
    }
    Ok(RawSolve {
        sol_path,
        log_path,
        wall_time_s: wall,
    })
}

fn log_tail(path: &Path, max: usize) -> String {
    let mut s = String::new();
    if let Ok(mut f) = fs::File::open(path) {
        let _ = f.read_to_string(&mut s);
    }
    if s.len() > max {
        s.split_off(s.len() - max)
    } else {
        s
    }
}

/// Parses a raw solution file, restoring canonical names through `varmap`.
/// Declared variables missing from the file default to 0 and are counted.
pub fn parse_solution(
    sol_path: &Path,
    adapter: Adapter,
    varmap: &VarMap,
) -> Result<SolutionRecord, SolveError> {
    let text = fs::read_to_string(sol_path).map_err(|e| io_err(sol_path, e))?;
    let (status, objective, mps_values, message) = match adapter {
        Adapter::Generic => parse_generic(&text, sol_path)?,
        Adapter::Highs => parse_highs(&text, sol_path)?,
    };
    let mut values = BTreeMap::new();
    for (mps_name, v) in &mps_values {
        match varmap.cols.get(mps_name) {
            Some(canon) => {
                values.insert(canon.clone(), *v);
            }
            None => return Err(SolveError::UnknownVariable(mps_name.clone())),
        }
    }
    let mut missing = 0usize;
    if status != SolutionStatus::Infeasible && status != SolutionStatus::Error {
        for canon in varmap.cols.values() {
            if !values.contains_key(canon) {
                values.insert(canon.clone(), 0.0);
                missing += 1;
            }
        }
    }
    Ok(SolutionRecord {
        status,
        objective,
        values,
        log_path: None,
        wall_time_s: 0.0,
        missing_defaulted: missing,
        message,
    })
}

type RawParsed = (
    SolutionStatus,
    Option<f64>,
    Vec<(String, f64)>,
    Option<String>,
);

fn parse_generic(text: &str, path: &Path) -> Result<RawParsed, SolveError> {
    let mut status = SolutionStatus::Optimal;
    let mut saw_status = false;
    let mut objective = None;
    let mut values = Vec::new();
    let mut message = None;
    for (n, line) in text.lines().enumerate() {
        let malformed = |msg: String| SolveError::MalformedSolution {
            path: path.display().to_string(),
            line: n + 1,
            msg,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if message.is_none() && !rest.trim().is_empty() {
                message = Some(rest.trim().to_string());
            }
            continue;
        }
        let mut toks = line.split_whitespace();
        let key = toks.next().unwrap();
        let val = toks.next();
        if toks.next().is_some() {
            return Err(malformed(format!("expected `name value`, got `{line}`")));
        }
        match key {
            "=status=" => {
                saw_status = true;
                status = match val {
                    Some("optimal") => SolutionStatus::Optimal,
                    Some("feasible-gap") => SolutionStatus::FeasibleGap,
                    Some("infeasible") => SolutionStatus::Infeasible,
                    Some("unbounded") => {
                        message = Some("unbounded".to_string());
                        SolutionStatus::Error
                    }
                    Some("error") | None => SolutionStatus::Error,
                    Some(other) => return Err(malformed(format!("unknown status `{other}`"))),
                };
            }
            "=obj=" => {
                let v = val.ok_or_else(|| malformed("missing objective value".into()))?;
                objective = Some(
                    v.parse()
                        .map_err(|_| malformed(format!("bad objective `{v}`")))?,
                );
            }
            name => {
                let v = val.ok_or_else(|| malformed(format!("missing value for `{name}`")))?;
                let parsed: f64 = v
                    .parse()
                    .map_err(|_| malformed(format!("bad value `{v}` for `{name}`")))?;
                values.push((name.to_string(), parsed));
            }
        }
    }
    if !saw_status && values.is_empty() {
        return Err(SolveError::MalformedSolution {
            path: path.display().to_string(),
            line: 0,
            msg: "empty solution file".to_string(),
        });
    }
    Ok((status, objective, values, message))
}

/// Parses the native HiGHS solution-file layout (`Model status` header,
/// `Objective` line, `# Columns` section).
fn parse_highs(text: &str, path: &Path) -> Result<RawParsed, SolveError> {
    let mut lines = text.lines().enumerate().peekable();
    let mut status_str = String::new();
    let mut objective = None;
    let mut values = Vec::new();
    while let Some((n, line)) = lines.next() {
        let line = line.trim();
        if line == "Model status" {
            if let Some((_, s)) = lines.next() {
                status_str = s.trim().to_string();
            }
        } else if let Some(rest) = line.strip_prefix("Objective") {
            let v = rest.trim();
            objective = Some(v.parse().map_err(|_| SolveError::MalformedSolution {
                path: path.display().to_string(),
                line: n + 1,
                msg: format!("bad objective `{v}`"),
            })?);
        } else if let Some(rest) = line.strip_prefix("# Columns") {
            let count: usize = rest.trim().parse().unwrap_or(0);
            for _ in 0..count {
                let (m, vline) = lines.next().ok_or_else(|| SolveError::MalformedSolution {
                    path: path.display().to_string(),
                    line: n + 1,
                    msg: "truncated columns section".to_string(),
                })?;
                let mut toks = vline.split_whitespace();
                let (name, val) = match (toks.next(), toks.next()) {
                    (Some(a), Some(b)) => (a, b),
                    _ => {
                        return Err(SolveError::MalformedSolution {
                            path: path.display().to_string(),
                            line: m + 1,
                            msg: format!("expected `name value`, got `{vline}`"),
                        })
                    }
                };
                let parsed: f64 = val.parse().map_err(|_| SolveError::MalformedSolution {
                    path: path.display().to_string(),
                    line: m + 1,
                    msg: format!("bad value `{val}`"),
                })?;
                values.push((name.to_string(), parsed));
            }
            break;
        }
    }
    let status = match status_str.as_str() {
        "Optimal" => SolutionStatus::Optimal,
        "Time limit reached" if !values.is_empty() => SolutionStatus::FeasibleGap,
        "Infeasible" => SolutionStatus::Infeasible,
        "" => {
            return Err(SolveError::MalformedSolution {
                path: path.display().to_string(),
                line: 0,
                msg: "missing `Model status` header".to_string(),
            })
        }
        other => {
            return Ok((
                SolutionStatus::Error,
                objective,
                values,
                Some(other.to_string()),
            ))
        }
    };
    Ok((status, objective, values, None))
}

/// Convenience wrapper: persist `model` under `dir/stem.{mps,varmap.csv}`,
/// invoke the profile, parse and sanity-check the result.
pub fn solve_model(
    model: &ModelArtifact,
    dir: &Path,
    stem: &str,
    profile: &SolverProfile,
    gap: f64,
    timeout_s: f64,
) -> Result<SolutionRecord, SolveError> {
    let mps_path = dir.join(format!("{stem}.mps"));
    let varmap_path = dir.join(format!("{stem}.varmap.csv"));
    mps::write_mps(model, &mps_path)?;
    mps::write_varmap(model, &varmap_path)?;
    let varmap = mps::read_varmap(&varmap_path)?;
    let raw = invoke_solver(&mps_path, profile, gap, timeout_s)?;
    let mut record = parse_solution(&raw.sol_path, profile.adapter, &varmap)?;
    record.log_path = Some(raw.log_path);
    record.wall_time_s = raw.wall_time_s;
    if record.status == SolutionStatus::Optimal {
        validate_binaries(model, &record, 1e-6)?;
    }
    Ok(record)
}

/// Checks that every binary variable carries an integral value (within
/// `tol`); values like 0.9999995 are accepted.
pub fn validate_binaries(
    model: &ModelArtifact,
    record: &SolutionRecord,
    tol: f64,
) -> Result<(), SolveError> {
    for v in model.vars() {
        if v.kind == VarKind::Binary {
            let val = record.value(&v.name);
            if (val - val.round()).abs() > tol {
                return Err(SolveError::FractionalBinary {
                    name: v.name.clone(),
                    value: val,
                });
            }
        }
    }
    Ok(())
}
