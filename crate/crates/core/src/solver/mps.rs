//! Deterministic MPS serialization with 8-char-safe names and a sidecar
//! name map, plus a reader used for round-trip verification.
//!
//! Emission rules are fixed so the same model always produces identical
//! bytes: one coefficient per line, entries in declaration order, shortest
//! round-trip decimal formatting, zero objective coefficients omitted and
//! zero right-hand sides omitted (MPS defaults).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::milp::{ModelArtifact, Sense, VarKind};

#[derive(Debug, Error)]
pub enum MpsError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed MPS at line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

fn io_err(path: &Path, source: std::io::Error) -> MpsError {
    MpsError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn mps_col_name(i: usize) -> String {
    format!("C{:07}", i + 1)
}

pub fn mps_row_name(i: usize) -> String {
    format!("R{:07}", i + 1)
}

pub const OBJ_ROW: &str = "COST";

/// Formats a coefficient with shortest round-trip representation, with
/// negative zero normalized.
fn num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v}")
}

/// Writes `model` as a fixed-style MPS file. Deterministic and byte-stable.
pub fn write_mps(model: &ModelArtifact, path: &Path) -> Result<(), MpsError> {
    let f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(f);
    let res = (|| -> std::io::Result<()> {
        writeln!(w, "NAME          {}", sanitize_name(&model.name))?;
        writeln!(w, "ROWS")?;
        writeln!(w, " N  {OBJ_ROW}")?;
        for (j, c) in model.cons().iter().enumerate() {
            let s = match c.sense {
                Sense::Le => "L",
                Sense::Ge => "G",
                Sense::Eq => "E",
            };
            writeln!(w, " {}  {}", s, mps_row_name(j))?;
        }
        writeln!(w, "COLUMNS")?;
        // Entries grouped per column in variable order; constraint entries
        // gathered first.
        let mut col_entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_vars()];
        for (j, c) in model.cons().iter().enumerate() {
            for (v, coeff) in &c.terms {
                col_entries[v.index()].push((j, *coeff));
            }
        }
        let mut in_integer = false;
        let mut marker = 0usize;
        for (i, v) in model.vars().iter().enumerate() {
            let want_integer = v.kind == VarKind::Binary;
            if want_integer != in_integer {
                let tag = if want_integer { "INTORG" } else { "INTEND" };
                writeln!(w, "    MK{:06}  'MARKER'                 '{}'", marker, tag)?;
                marker += 1;
                in_integer = want_integer;
            }
            let col = mps_col_name(i);
            let obj = model.objective_coeff(model.id_at(i));
            let mut wrote_any = false;
            if obj != 0.0 {
                writeln!(w, "    {}  {}      {}", col, OBJ_ROW, num(obj))?;
                wrote_any = true;
            }
            for (j, coeff) in &col_entries[i] {
                writeln!(w, "    {}  {}  {}", col, mps_row_name(*j), num(*coeff))?;
                wrote_any = true;
            }
            if !wrote_any {
                // Orphan column: pin it into the file with a zero objective
                // entry so every declared variable survives a round trip.
                writeln!(w, "    {}  {}      0", col, OBJ_ROW)?;
            }
        }
        if in_integer {
            writeln!(w, "    MK{:06}  'MARKER'                 'INTEND'", marker)?;
        }
        writeln!(w, "RHS")?;
        for (j, c) in model.cons().iter().enumerate() {
            if c.rhs != 0.0 {
                writeln!(w, "    RHS       {}  {}", mps_row_name(j), num(c.rhs))?;
            }
        }
        writeln!(w, "BOUNDS")?;
        for (i, v) in model.vars().iter().enumerate() {
            let col = mps_col_name(i);
            let integer = v.kind == VarKind::Binary;
            if v.lb == v.ub {
                writeln!(w, " FX BND       {}  {}", col, num(v.lb))?;
            } else if v.lb == f64::NEG_INFINITY && v.ub == f64::INFINITY {
                writeln!(w, " FR BND       {}", col)?;
            } else {
                if v.lb == f64::NEG_INFINITY {
                    writeln!(w, " MI BND       {}", col)?;
                } else if v.lb != 0.0 || integer {
                    writeln!(w, " LO BND       {}  {}", col, num(v.lb))?;
                }
                if v.ub != f64::INFINITY {
                    writeln!(w, " UP BND       {}  {}", col, num(v.ub))?;
                }
            }
        }
        writeln!(w, "ENDATA")?;
        w.flush()
    })();
    res.map_err(|e| io_err(path, e))
}

fn sanitize_name(name: &str) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect();
    if cleaned.is_empty() {
        "MODEL".to_string()
    } else {
        cleaned
    }
}

/// Sidecar map between MPS names and canonical names.
#[derive(Debug, Clone, Default)]
pub struct VarMap {
    /// mps column name -> canonical variable name
    pub cols: BTreeMap<String, String>,
    /// mps row name -> canonical constraint name
    pub rows: BTreeMap<String, String>,
}

pub fn write_varmap(model: &ModelArtifact, path: &Path) -> Result<(), MpsError> {
    let f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(f);
    let res = (|| -> std::io::Result<()> {
        writeln!(w, "mps_name,kind,name")?;
        for (i, v) in model.vars().iter().enumerate() {
            writeln!(w, "{},col,{}", mps_col_name(i), v.name)?;
        }
        writeln!(w, "{},row,objective", OBJ_ROW)?;
        for (j, c) in model.cons().iter().enumerate() {
            writeln!(w, "{},row,{}", mps_row_name(j), c.name)?;
        }
        w.flush()
    })();
    res.map_err(|e| io_err(path, e))
}

pub fn read_varmap(path: &Path) -> Result<VarMap, MpsError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut map = VarMap::default();
    for (n, line) in text.lines().enumerate() {
        if n == 0 || line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, ',');
        let (mps, kind, name) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => {
                return Err(MpsError::Malformed {
                    line: n + 1,
                    msg: format!("expected `mps_name,kind,name`, got `{line}`"),
                })
            }
        };
        match kind {
            "col" => {
                map.cols.insert(mps.to_string(), name.to_string());
            }
            "row" => {
                map.rows.insert(mps.to_string(), name.to_string());
            }
            other => {
                return Err(MpsError::Malformed {
                    line: n + 1,
                    msg: format!("unknown kind `{other}`"),
                })
            }
        }
    }
    Ok(map)
}

/// Parsed MPS content retaining everything needed to compare coefficient
/// matrices: rows with senses, entries, right-hand sides, bounds and the
/// integer marker set.
#[derive(Debug, Clone, Default)]
pub struct ParsedMps {
    pub name: String,
    pub obj_row: String,
    pub rows: Vec<(String, Sense)>,
    /// (column, row, coefficient) in file order; includes objective entries.
    pub entries: Vec<(String, String, f64)>,
    pub rhs: BTreeMap<String, f64>,
    /// column -> (lb, ub); columns absent keep the default [0, +inf).
    pub bounds: BTreeMap<String, (f64, f64)>,
    pub integer: BTreeSet<String>,
    pub columns: Vec<String>,
}

/// Reads back an MPS file emitted by [`write_mps`] (whitespace-tokenized).
pub fn parse_mps(path: &Path) -> Result<ParsedMps, MpsError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut out = ParsedMps::default();
    let mut section = String::new();
    let mut in_integer = false;
    let mut seen_cols: BTreeSet<String> = BTreeSet::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        if raw.starts_with('*') || raw.trim().is_empty() {
            continue;
        }
        let malformed = |msg: &str| MpsError::Malformed {
            line: line_no,
            msg: msg.to_string(),
        };
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') {
            section = toks[0].to_string();
            if section == "NAME" && toks.len() > 1 {
                out.name = toks[1].to_string();
            }
            continue;
        }
        match section.as_str() {
            "ROWS" => {
                if toks.len() != 2 {
                    return Err(malformed("ROWS line needs `sense name`"));
                }
                match toks[0] {
                    "N" => out.obj_row = toks[1].to_string(),
                    "L" => out.rows.push((toks[1].to_string(), Sense::Le)),
                    "G" => out.rows.push((toks[1].to_string(), Sense::Ge)),
                    "E" => out.rows.push((toks[1].to_string(), Sense::Eq)),
                    s => return Err(malformed(&format!("unknown row sense `{s}`"))),
                }
            }
            "COLUMNS" => {
                if toks.len() >= 3 && toks[1] == "'MARKER'" {
                    match toks[2] {
                        "'INTORG'" => in_integer = true,
                        "'INTEND'" => in_integer = false,
                        m => return Err(malformed(&format!("unknown marker `{m}`"))),
                    }
                    continue;
                }
                if toks.len() < 3 || toks.len() % 2 == 0 {
                    return Err(malformed("COLUMNS line needs `col row value [row value]`"));
                }
                let col = toks[0].to_string();
                if seen_cols.insert(col.clone()) {
                    out.columns.push(col.clone());
                    if in_integer {
                        out.integer.insert(col.clone());
                    }
                }
                for pair in toks[1..].chunks(2) {
                    let val: f64 = pair[1]
                        .parse()
                        .map_err(|_| malformed(&format!("bad number `{}`", pair[1])))?;
                    out.entries.push((col.clone(), pair[0].to_string(), val));
                }
            }
            "RHS" => {
                if toks.len() < 3 || toks.len() % 2 == 0 {
                    return Err(malformed("RHS line needs `set row value [row value]`"));
                }
                for pair in toks[1..].chunks(2) {
                    let val: f64 = pair[1]
                        .parse()
                        .map_err(|_| malformed(&format!("bad number `{}`", pair[1])))?;
                    out.rhs.insert(pair[0].to_string(), val);
                }
            }
            "BOUNDS" => {
                if toks.len() < 3 {
                    return Err(malformed("BOUNDS line needs `type set col [value]`"));
                }
                let col = toks[2].to_string();
                let entry = out
                    .bounds
                    .entry(col)
                    .or_insert((0.0, f64::INFINITY));
                let val = || -> Result<f64, MpsError> {
                    toks.get(3)
                        .ok_or_else(|| malformed("bound type needs a value"))?
                        .parse()
                        .map_err(|_| malformed("bad bound value"))
                };
                match toks[0] {
                    "UP" => entry.1 = val()?,
                    "LO" => entry.0 = val()?,
                    "FX" => {
                        let v = val()?;
                        *entry = (v, v);
                    }
                    "FR" => *entry = (f64::NEG_INFINITY, f64::INFINITY),
                    "MI" => entry.0 = f64::NEG_INFINITY,
                    "BV" => *entry = (0.0, 1.0),
                    t => return Err(malformed(&format!("unknown bound type `{t}`"))),
                }
            }
            "ENDATA" => {}
            s => {
                return Err(malformed(&format!("unexpected section `{s}`")));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{ModelArtifact, VarKind};

    fn toy() -> ModelArtifact {
        let mut m = ModelArtifact::new("toy");
        let x = m.add_var("x", VarKind::Continuous, 0.0, 4.0).unwrap();
        let y = m.add_var("yes", VarKind::Binary, 0.0, 1.0).unwrap();
        let z = m
            .add_var("z_free", VarKind::Continuous, f64::NEG_INFINITY, f64::INFINITY)
            .unwrap();
        m.add_obj(x, 1.5);
        m.add_obj(y, -2.0);
        m.add_con("fam", "c1", vec![(x, 1.0), (y, 3.0)], Sense::Le, 7.5)
            .unwrap();
        m.add_con("fam", "c2", vec![(x, -1.0), (z, 1.0)], Sense::Eq, 0.0)
            .unwrap();
        m
    }

    #[test]
    fn emission_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.mps");
        let p2 = dir.path().join("b.mps");
        let m = toy();
        write_mps(&m, &p1).unwrap();
        write_mps(&m, &p2).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    }

    #[test]
    fn free_variable_gets_fr_bound() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.mps");
        write_mps(&toy(), &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.contains(" FR BND       C0000003"));
    }

    #[test]
    fn roundtrip_recovers_matrix() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.mps");
        let m = toy();
        write_mps(&m, &p).unwrap();
        let parsed = parse_mps(&p).unwrap();

        assert_eq!(parsed.rows.len(), m.num_cons());
        for (j, c) in m.cons().iter().enumerate() {
            assert_eq!(parsed.rows[j], (mps_row_name(j), c.sense));
        }
        // Rebuild triplets from the artifact and compare.
        let mut expect: Vec<(String, String, f64)> = Vec::new();
        for (i, _) in m.vars().iter().enumerate() {
            let oc = m.objective_coeff(m.id_at(i));
            if oc != 0.0 {
                expect.push((mps_col_name(i), OBJ_ROW.to_string(), oc));
            }
            for (j, c) in m.cons().iter().enumerate() {
                for (v, coeff) in &c.terms {
                    if v.index() == i {
                        expect.push((mps_col_name(i), mps_row_name(j), *coeff));
                    }
                }
            }
        }
        // The orphan zero entry rule only fires for columns with no entries.
        let mut got = parsed.entries.clone();
        got.retain(|(_, _, v)| *v != 0.0);
        let mut expect_sorted = expect;
        expect_sorted.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
        got.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
        assert_eq!(expect_sorted, got);

        assert_eq!(parsed.rhs.get("R0000001"), Some(&7.5));
        assert_eq!(parsed.rhs.get("R0000002"), None);
        assert!(parsed.integer.contains("C0000002"));
        assert_eq!(parsed.bounds.get("C0000001"), Some(&(0.0, 4.0)));
        assert_eq!(
            parsed.bounds.get("C0000003"),
            Some(&(f64::NEG_INFINITY, f64::INFINITY))
        );
    }

    #[test]
    fn varmap_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("varmap.csv");
        let m = toy();
        write_varmap(&m, &p).unwrap();
        let vm = read_varmap(&p).unwrap();
        assert_eq!(vm.cols.get("C0000002").map(String::as_str), Some("yes"));
        assert_eq!(vm.rows.get("R0000002").map(String::as_str), Some("c2"));
    }
}
