#!/usr/bin/env python3
"""MILP driver: parse an MPS file, solve with scipy's HiGHS backend, and
write a `name value` solution file.

Usage: driver.py MPS_PATH SOL_PATH [--gap G] [--timeout SECONDS]

Solution file format (generic whitespace name/value):
    =status= optimal | feasible-gap | infeasible | unbounded | error
    =obj= <objective value>            (when a solution exists)
    <column name> <value>              (one line per column, file order)
"""

import argparse
import sys

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

INF = float("inf")


def parse_mps(path):
    rows = []          # (name, sense) excluding objective
    row_index = {}
    obj_row = None
    columns = []       # file order
    col_index = {}
    integer = set()
    entries = []       # (col_i, row_name, value)
    rhs = {}
    bounds = {}        # col -> [lb, ub]
    section = None
    in_integer = False

    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line or line.startswith("*"):
                continue
            if not line.startswith(" "):
                section = line.split()[0]
                continue
            toks = line.split()
            if section == "ROWS":
                sense, name = toks
                if sense == "N":
                    obj_row = name
                else:
                    row_index[name] = len(rows)
                    rows.append((name, sense))
            elif section == "COLUMNS":
                if len(toks) >= 3 and toks[1] == "'MARKER'":
                    in_integer = toks[2] == "'INTORG'"
                    continue
                col = toks[0]
                if col not in col_index:
                    col_index[col] = len(columns)
                    columns.append(col)
                    if in_integer:
                        integer.add(col)
                ci = col_index[col]
                for k in range(1, len(toks), 2):
                    entries.append((ci, toks[k], float(toks[k + 1])))
            elif section == "RHS":
                for k in range(1, len(toks), 2):
                    rhs[toks[k]] = float(toks[k + 1])
            elif section == "BOUNDS":
                btype, col = toks[0], toks[2]
                lbub = bounds.setdefault(col, [0.0, INF])
                if btype == "UP":
                    lbub[1] = float(toks[3])
                elif btype == "LO":
                    lbub[0] = float(toks[3])
                elif btype == "FX":
                    v = float(toks[3])
                    lbub[0] = lbub[1] = v
                elif btype == "FR":
                    lbub[0], lbub[1] = -INF, INF
                elif btype == "MI":
                    lbub[0] = -INF
                elif btype == "BV":
                    lbub[0], lbub[1] = 0.0, 1.0
                else:
                    raise ValueError("unknown bound type " + btype)
    if obj_row is None:
        raise ValueError("no objective (N) row")
    return rows, row_index, obj_row, columns, integer, entries, rhs, bounds


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("mps")
    ap.add_argument("sol")
    ap.add_argument("--gap", type=float, default=1e-4)
    ap.add_argument("--timeout", type=float, default=3600.0)
    args = ap.parse_args()

    rows, row_index, obj_row, columns, integer, entries, rhs, bounds = parse_mps(args.mps)

    n = len(columns)
    m = len(rows)
    c = np.zeros(n)
    data, ri, ci = [], [], []
    for col_i, row_name, val in entries:
        if row_name == obj_row:
            c[col_i] += val
        else:
            ri.append(row_index[row_name])
            ci.append(col_i)
            data.append(val)
    a_mat = sparse.csc_matrix((data, (ri, ci)), shape=(m, n))

    lo = np.empty(m)
    hi = np.empty(m)
    for i, (name, sense) in enumerate(rows):
        b = rhs.get(name, 0.0)
        if sense == "L":
            lo[i], hi[i] = -INF, b
        elif sense == "G":
            lo[i], hi[i] = b, INF
        else:
            lo[i], hi[i] = b, b

    lb = np.zeros(n)
    ub = np.full(n, INF)
    for col, (l, u) in bounds.items():
        i = col_index_of(columns, col)
        lb[i], ub[i] = l, u
    integrality = np.array([1 if col in integer else 0 for col in columns])

    options = {"mip_rel_gap": args.gap, "time_limit": args.timeout, "presolve": True}
    constraints = LinearConstraint(a_mat, lo, hi) if m > 0 else ()
    res = milp(
        c,
        constraints=constraints,
        integrality=integrality,
        bounds=Bounds(lb, ub),
        options=options,
    )

    with open(args.sol, "w") as out:
        if res.status == 0:
            status = "optimal"
        elif res.status == 1 and res.x is not None:
            status = "feasible-gap"
        elif res.status == 1:
            status = "error"
        elif res.status == 2:
            status = "infeasible"
        elif res.status == 3:
            status = "unbounded"
        else:
            status = "error"
        out.write("=status= %s\n" % status)
        if res.x is not None:
            out.write("=obj= %r\n" % float(res.fun))
            for i, col in enumerate(columns):
                out.write("%s %r\n" % (col, float(res.x[i])))
        else:
            out.write("# %s\n" % res.message.replace("\n", " "))
    print("driver: status=%s" % status)
    return 0


_COL_CACHE = {}


def col_index_of(columns, col):
    if not _COL_CACHE:
        for i, name in enumerate(columns):
            _COL_CACHE[name] = i
    return _COL_CACHE[col]


if __name__ == "__main__":
    sys.exit(main())
