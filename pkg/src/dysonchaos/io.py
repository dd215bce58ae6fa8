"""Plain-text file formats.

All floats are written with 17 significant digits so values round-trip.
CSV files may start with ``# key: value`` metadata lines.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .couplings import CouplingSet
from .errors import ValidationError
from .graphgen import Graph, GraphSpec


def fmt(x) -> str:
    return format(float(x), ".17g")


def _meta_lines(metadata: dict | None) -> list[str]:
    return [f"# {k}: {v}" for k, v in (metadata or {}).items()]


def _write(path, lines):
    Path(path).write_text("\n".join(lines) + "\n")


def _split_meta(path) -> tuple[dict, list[str]]:
    meta, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    return meta, body


def write_graph(path, g: Graph) -> None:
    """``N k p seed`` header, then ``index u v`` per edge."""
    spec = g.spec
    k = spec.k if spec else g.n_edges // g.n_vertices
    p = spec.p if spec else 0.0
    seed = spec.seed if spec else 0
    lines = [f"{g.n_vertices} {k} {fmt(p)} {seed}"]
    lines += [f"{e} {u} {v}" for e, (u, v) in enumerate(g.edge_list())]
    _write(path, lines)


def read_graph(path) -> Graph:
    lines = Path(path).read_text().split("\n")
    n, k, p, seed = lines[0].split()
    rows = [tuple(map(int, ln.split())) for ln in lines[1:] if ln.strip()]
    if [r[0] for r in rows] != list(range(len(rows))):
        raise ValidationError(f"{path}: edge indices must run 0..n_E-1 in order")
    edges = np.array([r[1:] for r in rows], dtype=np.int64).reshape(-1, 2)
    spec = GraphSpec(int(n), int(k), float(p), int(seed))
    return Graph(int(n), edges, spec=spec)


def write_couplings(path, c: CouplingSet) -> None:
    """``n_E seed sigma`` header, then ``index value``."""
    lines = [f"{len(c.values)} {c.seed} {fmt(c.sigma)}"]
    lines += [f"{e} {fmt(v)}" for e, v in enumerate(c.values)]
    _write(path, lines)


def read_couplings(path) -> CouplingSet:
    lines = [ln for ln in Path(path).read_text().split("\n") if ln.strip()]
    n_e, seed, sigma = lines[0].split()
    values = np.array([float(ln.split()[1]) for ln in lines[1:]])
    if len(values) != int(n_e):
        raise ValidationError(f"{path}: header says {n_e} couplings, found {len(values)}")
    return CouplingSet(values, float(sigma), int(seed))


def write_spectrum(path, spectrum, metadata: dict | None = None) -> None:
    """``index,eigenvalue,residual`` rows; residual is ``nan`` when not computed."""
    meta = dict(spectrum.metadata)
    window = spectrum.window
    meta["window"] = "full" if isinstance(window, str) else f"{fmt(window[0])},{fmt(window[1])}"
    meta["converged"] = spectrum.converged
    if spectrum.count_estimate is not None:
        meta["count_estimate"] = fmt(spectrum.count_estimate)
    meta.update(metadata or {})
    res = spectrum.residuals
    lines = _meta_lines(meta) + ["index,eigenvalue,residual"]
    for i, e in enumerate(spectrum.eigenvalues):
        r = fmt(res[i]) if res is not None else "nan"
        lines.append(f"{i},{fmt(e)},{r}")
    _write(path, lines)


def read_spectrum(path):
    from .eigensolve import Spectrum

    meta, body = _split_meta(path)
    rows = [ln.split(",") for ln in body[1:]]
    eig = np.array([float(r[1]) for r in rows])
    res = np.array([float(r[2]) for r in rows])
    window = meta.pop("window", "full")
    if window != "full":
        window = tuple(float(x) for x in window.split(","))
    converged = meta.pop("converged", "True") == "True"
    est = meta.pop("count_estimate", None)
    return Spectrum(eig, None if np.all(np.isnan(res)) else res, window, meta, converged,
                    None if est is None else float(est))


def write_stats(path, rows, metadata: dict | None = None) -> None:
    """``realization_index,mean_r,count`` rows from ``(index, mean_r, count)`` tuples."""
    lines = _meta_lines(metadata) + ["realization_index,mean_r,count"]
    lines += [f"{i},{fmt(m)},{int(n)}" for i, m, n in rows]
    _write(path, lines)


def write_histogram(path, hist, metadata: dict | None = None) -> None:
    meta = dict(metadata or {})
    meta.update(below=hist.below, above=hist.above)
    lines = _meta_lines(meta) + ["bin_left,bin_right,count"]
    lines += [f"{fmt(a)},{fmt(b)},{int(c)}" for a, b, c in zip(hist.edges[:-1], hist.edges[1:], hist.counts)]
    _write(path, lines)


def write_tensor(path, T, tau: float = 1e-3, metadata: dict | None = None) -> None:
    """Entries with ``|T| > tau * max|T|`` as ``a,b,c,d,value`` with 1-based mode labels."""
    from .dyson import extensivity_measures

    support, pr = extensivity_measures(T, tau)
    meta = {"tau": fmt(tau), "participation_ratio": fmt(pr), "support_count": support,
            "n_modes": T.n_modes}
    meta.update(metadata or {})
    a = np.abs(T.values)
    keep = np.flatnonzero(a > tau * a.max())
    lines = _meta_lines(meta) + ["a,b,c,d,value"]
    for i in keep:
        a_, b_, c_, d_ = (int(x) + 1 for x in T.indices[i])
        lines.append(f"{a_},{b_},{c_},{d_},{fmt(T.values[i])}")
    _write(path, lines)


def write_table(path, header: list[str], rows, metadata: dict | None = None) -> None:
    """Generic CSV; floats at 17 significant digits, ints verbatim."""
    def cell(x):
        if isinstance(x, (bool, np.bool_)):
            return str(bool(x))
        if isinstance(x, (int, np.integer)):
            return str(int(x))
        if isinstance(x, float) and math.isnan(x):
            return "nan"
        return fmt(x)

    lines = _meta_lines(metadata) + [",".join(header)]
    lines += [",".join(cell(x) for x in row) for row in rows]
    _write(path, lines)


def read_table(path) -> tuple[dict, list[str], list[list[str]]]:
    meta, body = _split_meta(path)
    return meta, body[0].split(","), [ln.split(",") for ln in body[1:]]
