"""Deterministic CSV/JSON emission.

Floats are written with 17 significant digits in lowercase scientific form,
CSV uses LF line endings, and JSON keys are sorted, so equal inputs give
byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .dynamics import iter_rows

SCHEMA_VERSION = "qtrap-output/1"

COLUMNS = {
    "stability": ("a", "q", "stable", "monodromy_trace", "growth_exponent"),
    "evolve": ("t", "z_cl", "p_cl", "re_eps", "im_eps", "phi", "phi_dot", "wronskian_err"),
    "uncertainty": ("t", "var_z", "var_p", "cov_zp", "heisenberg_zp", "schrodinger_rhs",
                    "heisenberg_ZP", "B_re", "B_im", "muss_residual"),
    "mode": ("t", "re_eps", "im_eps", "re_deps", "im_deps", "wronskian_err"),
    "wavefunction": ("z", "re_psi", "im_psi", "prob_density"),
}


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    x = float(value)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".16e")


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} fields, expected {len(columns)}")
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": _jsonable(value.real), "im": _jsonable(value.imag)}
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        # JSON has no nan/inf literals
        return x if math.isfinite(x) else fmt(x)
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    return value


def json_text(payload: dict) -> str:
    body = dict(_jsonable(payload))
    body["schema"] = SCHEMA_VERSION
    return json.dumps(body, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def table_text(kind: str, rows, fmt_name: str = "csv") -> str:
    columns = COLUMNS[kind]
    rows = list(rows)
    if fmt_name == "csv":
        return csv_text(columns, rows)
    return json_text({"kind": kind, "columns": list(columns),
                      "rows": [[fmt(v) if isinstance(v, str) else v for v in r] for r in rows]})


def emit(text: str, path: str | Path | None) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def mode_csv(sol, times) -> str:
    return csv_text(COLUMNS["mode"], iter_rows(sol, times))


def wavefunction_csv(grid, psi) -> str:
    psi = np.asarray(psi)
    return csv_text(COLUMNS["wavefunction"],
                    zip(grid, psi.real, psi.imag, np.abs(psi) ** 2))


def moments_json(m) -> str:
    return json_text({"kind": "moments", **m.to_dict()})
