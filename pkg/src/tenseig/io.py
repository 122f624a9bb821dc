"""Tensor documents, result files and basin grids.

Tensor documents are JSON objects ``{"order", "dim", "format", ...}`` with
``format`` one of

* ``dense``: ``"entries"``, all ``n**m`` values in row-major order (flat or nested);
* ``coordinate``: ``"entries"``, a list of ``[i1, ..., im, value]`` (0-based);
  each entry is copied to every permutation of its index;
* ``polynomial``: ``"terms"``, a list of ``{"exponents": [...], "coefficient": c}``.

A plain-text coordinate file (one ``i1 ... im value`` line per entry, ``#``
comments, optional ``# order m dim n`` header) is also accepted.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _core
from .enumeration import EnumerationResult, _Matcher, _outcomes
from .errors import AsymmetricInput, ConflictingEntries, DimNot3, ParseError
from .newton import NEWTON_METHODS, SolveOutcome, SolverConfig
from .spectral import Eigenpair, StabilityReport
from .tensor import Polynomial, SymmetricTensor, _check_size, from_polynomial, symmetrize

SYMMETRY_TOL = 1e-12
ENTRY_TOL = 1e-12
_HEADER = re.compile(r"#\s*order\s+(\d+)\s+dim\s+(\d+)", re.I)


def _g(v: float) -> str:
    return "%.17g" % v


# ---------------------------------------------------------------- tensors


def _dense(m, n, entries) -> SymmetricTensor:
    a = np.asarray(entries, dtype=float)
    if a.size != n**m:
        raise ParseError(f"dense payload has {a.size} entries, expected {n}**{m} = {n**m}")
    a = a.reshape((n,) * m)
    if not np.all(np.isfinite(a)):
        raise ParseError("non-finite entry")
    for k in range(m - 1):
        gap = float(np.max(np.abs(a - np.swapaxes(a, k, k + 1))))
        if gap > SYMMETRY_TOL:
            raise AsymmetricInput(f"entries differ by {gap:.3e} under swapping modes {k} and {k + 1}")
    return symmetrize(m, n, a)


def _coordinate(m, n, entries) -> SymmetricTensor:
    seen: dict = {}
    for row in entries:
        if len(row) != m + 1:
            raise ParseError(f"coordinate entry {row!r} needs {m} indices and a value")
        try:
            idx = tuple(int(i) for i in row[:m])
            val = float(row[m])
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad coordinate entry {row!r}") from exc
        if any(i < 0 or i >= n for i in idx) or any(float(i) != float(r) for i, r in zip(idx, row[:m])):
            raise ParseError(f"index {row[:m]!r} outside [0, {n})")
        if not math.isfinite(val):
            raise ParseError(f"non-finite value at {idx}")
        key = tuple(sorted(idx))
        if key in seen and abs(seen[key] - val) > ENTRY_TOL:
            raise ConflictingEntries(f"index {key} given as {seen[key]!r} and {val!r}")
        seen.setdefault(key, val)
    data = np.zeros((n,) * m)
    for key, val in seen.items():
        for perm in set(itertools.permutations(key)):
            data[perm] = val
    return SymmetricTensor(data)


def _polynomial(m, n, terms) -> SymmetricTensor:
    try:
        pairs = [(tuple(int(e) for e in t["exponents"]), float(t["coefficient"])) for t in terms]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError("polynomial terms need 'exponents' and 'coefficient'") from exc
    try:
        return from_polynomial(Polynomial.from_terms(m, n, pairs))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def parse_tensor_document(doc: dict) -> SymmetricTensor:
    if not isinstance(doc, dict):
        raise ParseError("tensor document must be a JSON object")
    try:
        m, n, fmt = int(doc["order"]), int(doc["dim"]), doc["format"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError("tensor document needs integer 'order', 'dim' and a 'format'") from exc
    if m < 2 or n < 1:
        raise ParseError(f"invalid order {m} / dim {n}")
    _check_size(m, n)
    if fmt == "dense":
        return _dense(m, n, doc.get("entries", []))
    if fmt == "coordinate":
        return _coordinate(m, n, doc.get("entries", []))
    if fmt == "polynomial":
        return _polynomial(m, n, doc.get("terms", []))
    raise ParseError(f"unknown tensor format {fmt!r}")


def parse_coordinate_text(text: str) -> SymmetricTensor:
    m = n = None
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            hdr = _HEADER.match(s)
            if hdr:
                m, n = int(hdr.group(1)), int(hdr.group(2))
            continue
        parts = s.split()
        try:
            rows.append([int(p) for p in parts[:-1]] + [float(parts[-1])])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: cannot parse {s!r}") from exc
    if not rows:
        raise ParseError("no entries")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ParseError("rows have differing numbers of indices")
    if m is None:
        m = widths.pop() - 1
        n = 1 + max(max(r[:-1]) for r in rows)
    if m < 2:
        raise ParseError("need at least two indices per entry")
    _check_size(m, n)
    return _coordinate(m, n, rows)


def read_tensor(path) -> SymmetricTensor:
    """Load a tensor from a JSON document or a plain-text coordinate file."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
        return parse_tensor_document(doc)
    return parse_coordinate_text(text)


def tensor_document(T: SymmetricTensor, fmt: str = "dense") -> dict:
    doc = {"order": T.order, "dim": T.dim, "format": fmt}
    if fmt == "dense":
        doc["entries"] = [float(v) for v in T.flat]
    elif fmt == "coordinate":
        doc["entries"] = [
            [*idx, float(T.data[idx])]
            for idx in itertools.combinations_with_replacement(range(T.dim), T.order)
            if T.data[idx] != 0.0
        ]
    else:
        raise ValueError(f"cannot write tensor format {fmt!r}")
    return doc


def write_tensor(T: SymmetricTensor, path, fmt: str = "dense") -> None:
    """Write ``T`` as a dense/coordinate JSON document or as ``text`` coordinates."""
    if fmt == "text":
        lines = [f"# order {T.order} dim {T.dim}"]
        for idx in itertools.combinations_with_replacement(range(T.dim), T.order):
            if T.data[idx] != 0.0:
                lines.append(" ".join(map(str, idx)) + " " + _g(T.data[idx]))
        Path(path).write_text("\n".join(lines) + "\n")
        return
    Path(path).write_text(json.dumps(tensor_document(T, fmt)) + "\n")


# ---------------------------------------------------------------- results


def _stability_dict(s: StabilityReport | None):
    if s is None:
        return None
    return {
        "hp_spectrum": [float(v) for v in s.hp_spectrum],
        "gamma": float(s.gamma),
        "rank": int(s.rank),
        "rank_tol": float(s.rank_tol),
        "power_class": s.power_class,
        "newton_stable": bool(s.newton_stable),
    }


def _pair_dict(p: Eigenpair) -> dict:
    return {
        "x": [float(v) for v in p.x],
        "eigenvalue": float(p.eigenvalue),
        "residual": float(p.residual),
        "source": p.source,
        "hits": int(p.hits),
        "first_hit": int(p.first_hit),
        "stability": _stability_dict(p.stability),
    }


def result_document(result) -> dict:
    """JSON-ready dict for an :class:`EnumerationResult`, :class:`SolveOutcome` or list of pairs.

    Wall-clock durations are left out so files are reproducible byte for byte.
    """
    if isinstance(result, EnumerationResult):
        return {
            "kind": "enumeration",
            "tensor": result.tensor,
            "method": result.method,
            "starts": result.starts,
            "seed": result.seed,
            "status": result.status,
            "failures": result.failures,
            "failure_kinds": dict(result.failure_kinds),
            "last_new_start": result.last_new_start,
            "pairs": [_pair_dict(p) for p in result.pairs],
        }
    if isinstance(result, SolveOutcome):
        return {
            "kind": "solve",
            "method": result.method,
            "status": result.status,
            "x": [float(v) for v in result.x],
            "eigenvalue": float(result.eigenvalue),
            "iterations": int(result.iterations),
            "residual": float(result.residual),
        }
    return {"kind": "pairs", "pairs": [_pair_dict(p) for p in result]}


def _pair_from(d: dict) -> Eigenpair:
    st = d.get("stability")
    rep = None
    if st:
        rep = StabilityReport(
            np.array(st["hp_spectrum"], dtype=float), float(st["gamma"]), int(st["rank"]), float(st["rank_tol"]),
            st["power_class"], bool(st["newton_stable"]),
        )
    return Eigenpair(
        np.array(d["x"], dtype=float), float(d["eigenvalue"]), float(d.get("residual", 0.0)), d.get("source", ""),
        rep, int(d.get("hits", 0)), int(d.get("first_hit", -1)),
    )


CSV_COLUMNS = ("pair", "eigenvalue", "abs_eigenvalue", "hits", "residual", "gamma", "rank", "power_class",
               "newton_stable")


def _pairs_of(result):
    if isinstance(result, EnumerationResult):
        return result.pairs
    if isinstance(result, SolveOutcome):
        return [Eigenpair(result.x, result.eigenvalue, result.residual, result.method)]
    return list(result)


def result_csv(result) -> str:
    """One row per eigenpair; columns ``CSV_COLUMNS`` followed by ``x0 .. x{n-1}``."""
    pairs = _pairs_of(result)
    n = len(pairs[0].x) if pairs else 0
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(CSV_COLUMNS) + [f"x{i}" for i in range(n)])
    for k, p in enumerate(pairs):
        s = p.stability
        w.writerow(
            [k, _g(p.eigenvalue), _g(abs(p.eigenvalue)), p.hits, _g(p.residual),
             _g(s.gamma) if s else "", s.rank if s else "", s.power_class if s else "",
             int(s.newton_stable) if s else ""]
            + [_g(v) for v in p.x]
        )
    return buf.getvalue()


def write_result(result, path, fmt: str = "json") -> None:
    if fmt == "json":
        text = json.dumps(result_document(result), indent=1) + "\n"
    elif fmt == "csv":
        text = result_csv(result)
    else:
        raise ValueError(f"unknown result format {fmt!r}")
    Path(path).write_text(text)


def read_result(path):
    """Read back a file from :func:`write_result`.

    JSON enumeration files give an :class:`EnumerationResult`, solve files a
    :class:`SolveOutcome`; CSV files and pair lists give a list of
    :class:`Eigenpair` (stability fields in CSV are summary only).
    """
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
        kind = doc.get("kind")
        if kind == "enumeration":
            return EnumerationResult(
                tensor=doc["tensor"], method=doc["method"], starts=int(doc["starts"]), seed=doc["seed"],
                pairs=[_pair_from(p) for p in doc["pairs"]], failures=int(doc["failures"]),
                failure_kinds=dict(doc["failure_kinds"]), last_new_start=int(doc["last_new_start"]),
                status=doc["status"],
            )
        if kind == "solve":
            return SolveOutcome(doc["status"], np.array(doc["x"], dtype=float), float(doc["eigenvalue"]),
                                int(doc["iterations"]), float(doc["residual"]), doc["method"])
        if "pairs" in doc:
            return [_pair_from(p) for p in doc["pairs"]]
        raise ParseError("unrecognised result document")
    rows = list(csv.DictReader(io.StringIO(text)))
    pairs = []
    for r in rows:
        xs = sorted((k for k in r if re.fullmatch(r"x\d+", k)), key=lambda k: int(k[1:]))
        try:
            pairs.append(Eigenpair(np.array([float(r[k]) for k in xs]), float(r["eigenvalue"]),
                                   float(r["residual"]), "", None, int(r["hits"])))
        except (KeyError, ValueError) as exc:
            raise ParseError(f"bad result row {r!r}") from exc
    return pairs


# ---------------------------------------------------------------- basins


@dataclass
class BasinGrid:
    resolution: int
    method: str
    rows: np.ndarray  # (theta index, phi index, pair id or -1, iterations)
    pairs: list = field(default_factory=list)  # canonical vectors, indexed by pair id

    def theta(self, i):
        return math.pi * i / (self.resolution - 1)

    def phi(self, j):
        return math.pi * j / self.resolution


def _grid_points(R):
    th = np.pi * np.arange(R) / (R - 1)
    ph = np.pi * np.arange(2 * R) / R
    T, P = np.meshgrid(th, ph, indexing="ij")
    X = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1)
    return X.reshape(-1, 3)


def basin_map(T: SymmetricTensor, config: SolverConfig = SolverConfig(), resolution: int = 60, backend=None) -> BasinGrid:
    """Run ``config.method`` from every node of an equirectangular ``R x 2R`` grid on the sphere.

    Node ``(i, j)`` is ``(sin t cos p, sin t sin p, cos t)`` with ``t = pi i/(R-1)``
    and ``p = pi j/R``. Pair ids count distinct limits in scan order.
    """
    if T.dim != 3:
        raise DimNot3(f"basin maps need dim 3, got {T.dim}")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    R = resolution
    X0 = _grid_points(R)
    kern = _core.get_backend(backend)
    if config.method in NEWTON_METHODS:
        X, iters, status = kern.newton_batch(T.flat, 3, T.order, X0, NEWTON_METHODS[config.method], config.delta,
                                             config.kmax)
    else:
        variant = {"hopm": 0, "shopm": 1, "ashopm": 2}[config.method]
        X, iters, status = kern.power_batch(T.flat, 3, T.order, X0, variant, config.alpha, config.tau,
                                            1 if config.direction == "max" else -1, config.delta, config.kmax)
    Xc, _, _, kind = _outcomes(T, X, status)
    matcher = _Matcher(3)
    ids = np.full(len(X0), -1, dtype=np.int64)
    for k in np.flatnonzero(kind == -1):
        ids[k], _ = matcher.assign(Xc[k])
    ii, jj = np.divmod(np.arange(len(X0)), 2 * R)
    rows = np.stack([ii, jj, ids, iters.astype(np.int64)], axis=1)
    return BasinGrid(R, config.method, rows, [x.copy() for x in matcher.reps])


def basin_csv(grid: BasinGrid) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta_index", "phi_index", "theta", "phi", "pair", "iterations"])
    for i, j, pid, it in grid.rows:
        w.writerow([i, j, _g(grid.theta(i)), _g(grid.phi(j)), pid, it])
    return buf.getvalue()


def basin_pairs_csv(grid: BasinGrid) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["pair", "x0", "x1", "x2"])
    for k, x in enumerate(grid.pairs):
        w.writerow([k] + [_g(v) for v in x])
    return buf.getvalue()
