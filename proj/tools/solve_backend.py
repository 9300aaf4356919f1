#!/usr/bin/env python3
"""File-based MILP solve backend on top of scipy's HiGHS interface.

Usage: solve_backend.py MODEL REPORT [--gap G] [--time-limit S]

MODEL is either the native JSON model dump or a CPLEX-dialect LP file
(decided by extension). REPORT is written as a JSON object with keys
status, objective, bound, wall_time_s, solution and message. Exit code is
0 whenever a report was written; the status field carries the outcome.
"""

import argparse
import json
import math
import os
import re
import sys
import time

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

INF = math.inf


def load_model_json(path):
    with open(path) as fh:
        doc = json.load(fh)
    variables = []
    for raw in doc["variables"]:
        kind = raw.get("kind", "continuous")
        variables.append(
            {
                "name": raw["name"],
                "kind": kind,
                "lb": raw.get("lb", -INF),  # absent bound means unbounded
                "ub": raw.get("ub", INF),
                "obj": raw.get("obj", 0.0),
            }
        )
    rows = [
        {"sense": r["sense"], "rhs": r["rhs"], "coefs": r.get("coefs", [])}
        for r in doc["rows"]
    ]
    return variables, rows


_TERM = re.compile(r"([+-]?)\s*(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)?\s*([A-Za-z_.][A-Za-z0-9_.]*)")


class LpReader:
    """Parses the LP dialect written by the export side (and close kin)."""

    def __init__(self):
        self.variables = []
        self.var_id = {}

    def ensure(self, name):
        if name not in self.var_id:
            self.var_id[name] = len(self.variables)
            self.variables.append(
                {"name": name, "kind": "continuous", "lb": 0.0, "ub": INF, "obj": 0.0}
            )
        return self.var_id[name]

    def parse_expr(self, expr):
        coefs = {}
        for sign, num, name in _TERM.findall(expr):
            factor = -1.0 if sign == "-" else 1.0
            value = float(num) if num else 1.0
            idx = self.ensure(name)
            coefs[idx] = coefs.get(idx, 0.0) + factor * value
        return coefs

    def load(self, path):
        with open(path) as fh:
            text = fh.read()
        lines = [ln.split("\\")[0].rstrip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln.strip()]
        section = None
        obj_lines, row_lines, bound_lines, binary_names = [], [], [], []
        for ln in lines:
            key = ln.strip().lower()
            if key in ("minimize", "maximize", "min", "max"):
                section = "obj"
                continue
            if key in ("subject to", "st", "s.t."):
                section = "rows"
                continue
            if key == "bounds":
                section = "bounds"
                continue
            if key in ("binary", "binaries", "bin"):
                section = "binary"
                continue
            if key in ("general", "generals", "end"):
                section = "skip"
                continue
            if section == "obj":
                obj_lines.append(ln.strip())
            elif section == "rows":
                row_lines.append(ln.strip())
            elif section == "bounds":
                bound_lines.append(ln.strip())
            elif section == "binary":
                binary_names.extend(ln.split())

        obj_expr = " ".join(obj_lines).split(":", 1)[-1]
        for idx, coef in self.parse_expr(obj_expr).items():
            self.variables[idx]["obj"] = coef

        rows = []
        joined = []
        for ln in row_lines:
            if ":" in ln:
                joined.append(ln)
            elif joined:
                joined[-1] += " " + ln
        for ln in joined:
            body = ln.split(":", 1)[1]
            m = re.search(r"(<=|>=|=)", body)
            sense = {"<=": "L", ">=": "G", "=": "E"}[m.group(1)]
            coefs = self.parse_expr(body[: m.start()])
            rows.append(
                {
                    "sense": sense,
                    "rhs": float(body[m.end():]),
                    "coefs": [[i, c] for i, c in coefs.items()],
                }
            )

        def as_bound(token):
            token = token.strip().lower()
            if token in ("-inf", "-infinity", "-1e30", "-1e308"):
                return -INF
            if token in ("inf", "+inf", "infinity", "1e30", "1e308"):
                return INF
            return float(token)

        for ln in bound_lines:
            if ln.lower().endswith(" free"):
                idx = self.ensure(ln[: ln.lower().rfind(" free")].strip())
                self.variables[idx]["lb"] = -INF
                self.variables[idx]["ub"] = INF
                continue
            parts = [p.strip() for p in re.split(r"(<=|>=|=)", ln)]
            if len(parts) == 5:
                idx = self.ensure(parts[2])
                self.variables[idx]["lb"] = as_bound(parts[0])
                self.variables[idx]["ub"] = as_bound(parts[4])
            elif len(parts) == 3:
                a, op, b = parts
                if re.match(r"^[A-Za-z_.]", a):
                    idx = self.ensure(a)
                    if op == "<=":
                        self.variables[idx]["ub"] = as_bound(b)
                    elif op == ">=":
                        self.variables[idx]["lb"] = as_bound(b)
                    else:
                        self.variables[idx]["lb"] = self.variables[idx]["ub"] = as_bound(b)
                else:
                    idx = self.ensure(b)
                    if op == "<=":
                        self.variables[idx]["lb"] = as_bound(a)
                    else:
                        self.variables[idx]["ub"] = as_bound(a)
        for name in binary_names:
            idx = self.ensure(name)
            self.variables[idx]["kind"] = "binary"
            self.variables[idx]["lb"] = 0.0
            self.variables[idx]["ub"] = 1.0
        return self.variables, rows


def run(variables, rows, gap, time_limit):
    n = len(variables)
    c = np.array([v["obj"] for v in variables])
    integrality = np.array([1 if v["kind"] == "binary" else 0 for v in variables])
    lb = np.array([v["lb"] for v in variables])
    ub = np.array([v["ub"] for v in variables])

    data, ri, ci, lo, hi = [], [], [], [], []
    for k, r in enumerate(rows):
        for idx, coef in r["coefs"]:
            ri.append(k)
            ci.append(idx)
            data.append(coef)
        if r["sense"] == "L":
            lo.append(-INF)
            hi.append(r["rhs"])
        elif r["sense"] == "G":
            lo.append(r["rhs"])
            hi.append(INF)
        else:
            lo.append(r["rhs"])
            hi.append(r["rhs"])
    A = sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), n))

    options = {"mip_rel_gap": gap, "time_limit": time_limit, "presolve": True}
    extra = os.environ.get("DDRO_HIGHS_OPTS", "")
    if extra:
        options.update(json.loads(extra))
    t0 = time.perf_counter()
    res = milp(
        c=c,
        constraints=LinearConstraint(A, np.array(lo), np.array(hi)),
        integrality=integrality,
        bounds=Bounds(lb, ub),
        options=options,
    )
    wall = time.perf_counter() - t0

    status_map = {0: "optimal", 1: "limit", 2: "infeasible", 3: "unbounded", 4: "error"}
    report = {
        "status": status_map.get(res.status, "error"),
        "wall_time_s": wall,
        "message": str(res.message),
    }
    if res.x is not None:
        report["objective"] = float(res.fun)
        bound = getattr(res, "mip_dual_bound", None)
        report["bound"] = float(bound) if bound is not None else float(res.fun)
        report["solution"] = [float(v) for v in res.x]
    return report


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("model")
    ap.add_argument("report")
    ap.add_argument("--gap", type=float, default=0.01)
    ap.add_argument("--time-limit", type=float, default=1e9)
    args = ap.parse_args()

    try:
        if args.model.endswith(".lp"):
            variables, rows = LpReader().load(args.model)
        else:
            variables, rows = load_model_json(args.model)
        report = run(variables, rows, args.gap, args.time_limit)
    except Exception as exc:  # report-style failure, never a crash
        report = {"status": "error", "message": f"{type(exc).__name__}: {exc}"}
    with open(args.report, "w") as fh:
        json.dump(report, fh)
    return 0


if __name__ == "__main__":
    sys.exit(main())
