#!/usr/bin/env python3
"""Re-solve exported problems with external solvers.

MPS files go to HiGHS (through scipy) and must reproduce the theta reported by
`lipopt bound` within 1e-6. SDPA files go to cvxpy; the Shor bound must not be
below the vertex oracle. Exits 77 when scipy or cvxpy is missing.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

try:
    import numpy as np
    import scipy.sparse as sp
    from scipy.optimize import linprog
    import cvxpy as cp
except ImportError as exc:  # pragma: no cover
    print(f"skipping: {exc}")
    sys.exit(77)

ONE11 = {
    "activation": "elu",
    "layers": [
        {"rows": 1, "cols": 1, "entries": [[0, 0, 1]]},
        {"rows": 1, "cols": 1, "entries": [[0, 0, 1]]},
    ],
}


def run(cli, *args):
    res = subprocess.run([cli, *args], capture_output=True, text=True)
    if res.returncode != 0:
        raise RuntimeError(f"{' '.join(args)} exited {res.returncode}: {res.stderr}")
    return res.stdout


def parse_mps(text):
    rows, cols, rhs, free = {}, {}, {}, set()
    entries = []
    section = None
    for line in text.splitlines():
        if not line.strip():
            continue
        if not line.startswith(" "):
            section = line.split()[0]
            continue
        f = line.split()
        if section == "ROWS":
            if f[0] == "E":
                rows[f[1]] = len(rows)
        elif section == "COLUMNS":
            col = cols.setdefault(f[0], len(cols))
            entries.append((f[1], col, float(f[2])))
        elif section == "RHS":
            rhs[f[1]] = float(f[2])
        elif section == "BOUNDS":
            assert f[0] == "FR", f
            free.add(f[2])
    c = np.zeros(len(cols))
    A = sp.lil_matrix((len(rows), len(cols)))
    for row, col, v in entries:
        if row == "COST":
            c[col] = v
        else:
            A[rows[row], col] = v
    b = np.zeros(len(rows))
    for row, v in rhs.items():
        b[rows[row]] = v
    names = sorted(cols, key=cols.get)
    bounds = [(None, None) if n in free else (0, None) for n in names]
    return c, A.tocsr(), b, bounds


def check_mps(cli, net, k):
    reported = json.loads(run(cli, "bound", "--net", net, "--k", str(k)))
    c, A, b, bounds = parse_mps(run(cli, "export", "--net", net, "--format", "mps", "--k", str(k)))
    res = linprog(c, A_eq=A, b_eq=b, bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"HiGHS status {res.status} on {net}")
    diff = abs(res.fun - reported["theta"])
    print(f"mps {Path(net).name} k={k}: lipopt {reported['theta']:.10g} highs {res.fun:.10g} diff {diff:.2e}")
    return diff <= 1e-6


def parse_sdpa(text):
    lines = [l for l in text.splitlines() if l and l[0] not in '"*']
    m = int(lines[0])
    sizes = [int(v) for v in lines[2].split()]
    cvec = [float(v) for v in lines[3].split()]
    mats = [[] for _ in range(m + 1)]
    for l in lines[4:]:
        mat, blk, i, j, v = l.split()
        mats[int(mat)].append((int(blk), int(i) - 1, int(j) - 1, float(v)))
    return sizes, cvec, mats


def sdpa_value(text):
    sizes, cvec, mats = parse_sdpa(text)
    X = cp.Variable((sizes[0], sizes[0]), symmetric=True)
    s = cp.Variable(-sizes[1], nonneg=True) if len(sizes) > 1 else None

    def inner(entries):
        terms = []
        for blk, i, j, v in entries:
            if blk == 1:
                terms.append(v * X[i, j] if i == j else 2 * v * X[i, j])
            else:
                terms.append(v * s[i])
        return cp.sum(cp.hstack(terms)) if terms else 0

    cons = [X >> 0] + [inner(mats[i]) == cvec[i - 1] for i in range(1, len(mats))]
    prob = cp.Problem(cp.Maximize(inner(mats[0])), cons)
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"cvxpy status {prob.status}")
    return prob.value


def check_sdpa(cli, net):
    oracle = json.loads(run(cli, "baseline", "--net", net, "--method", "oracle"))["value"]
    value = sdpa_value(run(cli, "export", "--net", net, "--format", "sdpa"))
    print(f"sdpa {Path(net).name}: shor {value:.10g} oracle {oracle:.10g}")
    return value >= oracle - 1e-6


def main():
    if len(sys.argv) != 2:
        print("usage: crosscheck.py LIPOPT_BINARY")
        return 2
    cli = sys.argv[1]
    ok = True
    with tempfile.TemporaryDirectory() as tmp:
        one = Path(tmp) / "one11.json"
        one.write_text(json.dumps(ONE11))
        nets = [str(one)]
        for arch, r, seed in (("5x5x1", "2", 3), ("6x4x1", "full", 4), ("3x3x3x1", "2", 5)):
            path = Path(tmp) / f"net_{arch}_{r}_{seed}.json"
            run(cli, "gen-random", "--arch", arch, "--sparsity", r, "--gen-seed", str(seed), "-o", str(path))
            nets.append(str(path))
        for net in nets:
            depth = len(json.loads(Path(net).read_text())["layers"])
            for k in (depth, depth + 1):
                ok &= check_mps(cli, net, k)
            if depth == 2:
                ok &= check_sdpa(cli, net)
    print("crosscheck", "ok" if ok else "FAILED")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
