"""Seeded experiment sweeps over graphs and coupling realizations.

Each experiment expands into independent tasks. A task is a pure function of
its recorded inputs (sizes, ``p`` and the derived seeds), its result is
cached as a JSON record under ``<out>/records/``, and tables are written in
task order, so output files do not depend on the number of workers and an
interrupted run resumes where it stopped.

Seeds are derived as the first 8 bytes (little-endian) of
``blake2b("<base_seed>:<tag>:<i1,i2,...>")``.
"""
from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import io
from .couplings import sample_couplings
from .dyson import single_particle_rstats
from .eigensolve import FilterConfig, SpectralWindow, dense_eigh, filter_diagonalize
from .errors import ValidationError
from .fermion import SECTORS, assemble_hamiltonian
from .graphgen import GraphSpec, watts_strogatz
from .stats import histogram, mean_r_central

SCHEMA_VERSION = 1
KINDS = ("fig2", "fig3", "fig4", "histogram", "custom")
SEED_TAGS = ("graph", "coupling", "solver")


def derive_seed(base_seed: int, stream_tag: str, index) -> int:
    """64-bit seed for item ``index`` (an int or tuple of ints) of a named stream."""
    if stream_tag not in SEED_TAGS:
        raise ValidationError(f"unknown seed stream {stream_tag!r}")
    idx = index if isinstance(index, (tuple, list)) else (index,)
    text = f"{int(base_seed)}:{stream_tag}:{','.join(str(int(i)) for i in idx)}"
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass
class ExperimentConfig:
    kind: str
    n_list: list[int]
    p_list: list[float] = field(default_factory=lambda: [0.0])
    k: int = 2
    realizations: int = 10
    graphs: int = 1
    base_seed: int = 0
    method: str = "dense"
    window_fraction: float = 0.2
    impurity: bool = True
    sector: str = "even"
    bins: int = 14
    hist_range: tuple[float, float] = (0.35, 0.70)
    filter_degree: int = 256
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ValidationError(f"unsupported schema_version {self.schema_version}")
        if self.kind not in KINDS:
            raise ValidationError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.method not in ("dense", "filter"):
            raise ValidationError(f"method must be 'dense' or 'filter', got {self.method!r}")
        if self.sector not in SECTORS:
            raise ValidationError(f"unknown sector {self.sector!r}")
        if self.realizations < 1 or self.graphs < 1:
            raise ValidationError("realizations and graphs must be positive")
        if not self.n_list or not self.p_list:
            raise ValidationError("n and p lists must be non-empty")
        for n in self.n_list:
            GraphSpec(n, self.k, 0.0)
        for p in self.p_list:
            GraphSpec(self.n_list[0], self.k, p)
        if not 0.0 < self.window_fraction <= 1.0:
            raise ValidationError("window_fraction must lie in (0, 1]")

    def digest(self) -> str:
        text = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


_LIST_INT = ("n_list",)
_LIST_FLOAT = ("p_list",)
_ALIASES = {"n": "n_list", "p": "p_list"}


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines (``#`` starts a comment); ``schema_version`` is required.

    Lists are comma separated; ``hist_range`` is ``lo, hi``; booleans are
    ``true``/``false``.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValidationError(f"config line {lineno}: expected 'key = value'")
        key = _ALIASES.get(key.strip(), key.strip())
        raw[key] = value.strip()
    if "schema_version" not in raw:
        raise ValidationError("config is missing schema_version")
    known = ExperimentConfig.__dataclass_fields__
    unknown = set(raw) - set(known)
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    kw = {}
    for key, value in raw.items():
        try:
            if key in _LIST_INT:
                kw[key] = [int(v) for v in value.split(",")]
            elif key in _LIST_FLOAT:
                kw[key] = [float(v) for v in value.split(",")]
            elif key == "hist_range":
                lo, hi = (float(v) for v in value.split(","))
                kw[key] = (lo, hi)
            elif key == "impurity":
                if value.lower() not in ("true", "false"):
                    raise ValueError(value)
                kw[key] = value.lower() == "true"
            elif key in ("kind", "method", "sector"):
                kw[key] = value
            elif key == "window_fraction":
                kw[key] = float(value)
            else:
                kw[key] = int(value)
        except ValueError as exc:
            raise ValidationError(f"bad value for {key}: {value!r}") from exc
    if "kind" not in kw or "n_list" not in kw:
        raise ValidationError("config needs at least kind and n")
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


# -- tasks -----------------------------------------------------------------

def _task_key(inputs: dict) -> str:
    return hashlib.sha256(json.dumps(inputs, sort_keys=True).encode()).hexdigest()[:20]


def many_body_task(N, k, p, graph_seed, coupling_seed, *, impurity=True, sector="even",
                   method="dense", window_fraction=0.2, solver_seed=0, filter_degree=256) -> dict:
    return dict(task="many_body", N=int(N), k=int(k), p=float(p), graph_seed=int(graph_seed),
                coupling_seed=int(coupling_seed), impurity=bool(impurity), sector=sector,
                method=method, window_fraction=float(window_fraction),
                solver_seed=int(solver_seed), filter_degree=int(filter_degree))


def single_particle_task(N, k, p, graph_seed, coupling_seed, *, window_fraction=0.2) -> dict:
    return dict(task="single_particle", N=int(N), k=int(k), p=float(p), graph_seed=int(graph_seed),
                coupling_seed=int(coupling_seed), window_fraction=float(window_fraction))


def run_task(inputs: dict) -> dict:
    """Execute one task single-threaded; returns its outputs."""
    with threadpool_limits(limits=1):
        g = watts_strogatz(GraphSpec(inputs["N"], inputs["k"], inputs["p"], inputs["graph_seed"]))
        c = sample_couplings(g, inputs["coupling_seed"])
        if inputs["task"] == "single_particle":
            st = single_particle_rstats(g, c, inputs["window_fraction"])
            return {"mean_r": st.mean_r, "count": st.count, "degenerate": st.degenerate_count}
        H = assemble_hamiltonian(g, c, impurity=inputs["impurity"], sector=inputs["sector"])
        if inputs["method"] == "dense":
            spec = dense_eigh(H)
            st = mean_r_central(spec, inputs["window_fraction"])
            return {"mean_r": st.mean_r, "count": st.count, "degenerate": st.degenerate_count}
        cfg = FilterConfig(polynomial_degree=inputs["filter_degree"])
        spec = filter_diagonalize(H, SpectralWindow(inputs["window_fraction"]), cfg, inputs["solver_seed"])
        st = mean_r_central(spec, inputs["window_fraction"])
        return {"mean_r": st.mean_r, "count": st.count, "degenerate": st.degenerate_count,
                "converged": spec.converged}


def _timed(inputs: dict) -> tuple[dict, float]:
    t0 = time.perf_counter()
    out = run_task(inputs)
    return out, time.perf_counter() - t0


def execute(tasks: list[dict], records_dir, jobs: int = 1, config_hash: str = "") -> list[dict]:
    """Run tasks (skipping those with a stored record) and return outputs in task order."""
    records_dir = Path(records_dir)
    records_dir.mkdir(parents=True, exist_ok=True)
    keys = [_task_key(t) for t in tasks]
    results: dict[str, dict] = {}
    for key in dict.fromkeys(keys):
        path = records_dir / f"{key}.json"
        if path.exists():
            rec = json.loads(path.read_text())
            if rec.get("status") == "done":
                results[key] = rec["outputs"]
    todo_keys = [k for k in dict.fromkeys(keys) if k not in results]
    todo = [tasks[keys.index(k)] for k in todo_keys]

    def store(key, inputs, outputs, elapsed):
        rec = {"config_hash": config_hash, "key": key, "inputs": inputs, "outputs": outputs,
               "status": "done", "seconds": elapsed}
        tmp = records_dir / f"{key}.json.tmp"
        tmp.write_text(json.dumps(rec, sort_keys=True, indent=1))
        tmp.replace(records_dir / f"{key}.json")
        results[key] = outputs

    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for key, inputs, (out, dt) in zip(todo_keys, todo, pool.map(_timed, todo)):
                store(key, inputs, out, dt)
    else:
        for key, inputs in zip(todo_keys, todo):
            out, dt = _timed(inputs)
            store(key, inputs, out, dt)
    return [results[k] for k in keys]


# -- experiments -----------------------------------------------------------

def _metadata(cfg: ExperimentConfig) -> dict:
    return {"schema_version": cfg.schema_version, "kind": cfg.kind, "config_hash": cfg.digest(),
            "base_seed": cfg.base_seed, "k": cfg.k, "method": cfg.method,
            "window_fraction": io.fmt(cfg.window_fraction), "sector": cfg.sector,
            "seed_rule": "blake2b-64(base_seed:tag:indices)"}


def _std(x) -> float:
    return float(np.std(x, ddof=1)) if len(x) > 1 else 0.0


def _mb(cfg, N, p, graph_seed, coupling_seed, impurity=None, solver_index=0):
    return many_body_task(
        N, cfg.k, p, graph_seed, coupling_seed,
        impurity=cfg.impurity if impurity is None else impurity, sector=cfg.sector,
        method=cfg.method, window_fraction=cfg.window_fraction,
        solver_seed=derive_seed(cfg.base_seed, "solver", solver_index),
        filter_degree=cfg.filter_degree,
    )


def _write_plot(out: Path, name: str, series: list[dict]):
    (out / f"{name}_plot.json").write_text(json.dumps({"series": series}, indent=1, sort_keys=True) + "\n")


def run_fig2(cfg: ExperimentConfig, out_dir, jobs: int = 1) -> list[tuple]:
    """Per ``p``: one rewired graph, many couplings; each coupling also on the base circulant.

    Returns rows ``(N, p, graph_seed, realization_index, coupling_seed,
    mean_r_rewired, mean_r_base)``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    plan, tasks = [], []
    for N in cfg.n_list:
        cseeds = [derive_seed(cfg.base_seed, "coupling", (N, r)) for r in range(cfg.realizations)]
        for i, p in enumerate(cfg.p_list):
            gseed = derive_seed(cfg.base_seed, "graph", (N, i))
            for r, cs in enumerate(cseeds):
                plan.append((N, p, gseed, r, cs))
                tasks.append(_mb(cfg, N, p, gseed, cs, solver_index=r))
                tasks.append(_mb(cfg, N, 0.0, 0, cs, solver_index=r))
    res = execute(tasks, out / "records", jobs, cfg.digest())
    rows = [(*pl, res[2 * j]["mean_r"], res[2 * j + 1]["mean_r"]) for j, pl in enumerate(plan)]
    io.write_table(out / "fig2.csv",
                   ["N", "p", "graph_seed", "realization_index", "coupling_seed", "mean_r_rewired", "mean_r_base"],
                   rows, _metadata(cfg))
    series = []
    for N in cfg.n_list:
        for p in cfg.p_list:
            sel = [r for r in rows if r[0] == N and r[1] == p]
            series.append({"label": f"N={N} p={p}", "style": "solid", "x": [r[3] for r in sel], "y": [r[5] for r in sel]})
            series.append({"label": f"N={N} p={p} base", "style": "dashed", "x": [r[3] for r in sel], "y": [r[6] for r in sel]})
    _write_plot(out, "fig2", series)
    return rows


def _p0_sweep(cfg, out, jobs):
    p = cfg.p_list[0]
    plan, tasks = [], []
    for N in cfg.n_list:
        gseed = derive_seed(cfg.base_seed, "graph", (N, 0))
        for r in range(cfg.realizations):
            cs = derive_seed(cfg.base_seed, "coupling", (N, r))
            plan.append((N, r, cs))
            tasks.append(_mb(cfg, N, p, gseed, cs, solver_index=r))
    res = execute(tasks, out / "records", jobs, cfg.digest())
    per_n: dict[int, list] = {N: [] for N in cfg.n_list}
    for (N, r, cs), o in zip(plan, res):
        per_n[N].append((r, o["mean_r"], o["count"]))
    return per_n


def run_fig3(cfg: ExperimentConfig, out_dir, jobs: int = 1) -> list[tuple]:
    """Mean and spread of ``<r>`` over couplings on the base circulant, per ``N``.

    Uses the first entry of ``p_list`` (normally 0). Returns rows
    ``(N, mean, std, realizations)``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    per_n = _p0_sweep(cfg, out, jobs)
    rows = []
    for N, recs in per_n.items():
        vals = [m for _, m, _ in recs]
        rows.append((N, float(np.mean(vals)), _std(vals), len(vals)))
        io.write_stats(out / f"fig3_N{N}.csv", recs, {**_metadata(cfg), "N": N})
    io.write_table(out / "fig3.csv", ["N", "mean_r", "std_r", "realizations"], rows, _metadata(cfg))
    _write_plot(out, "fig3", [{"label": "mean_r", "style": "band", "x": [r[0] for r in rows],
                               "y": [r[1] for r in rows], "err": [r[2] for r in rows]}])
    return rows


def run_histogram(cfg: ExperimentConfig, out_dir, jobs: int = 1) -> dict:
    """Histograms of per-realization ``<r>`` on shared bins, one file per ``N``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    per_n = _p0_sweep(cfg, out, jobs)
    hists = {}
    for N, recs in per_n.items():
        h = histogram([m for _, m, _ in recs], cfg.bins, cfg.hist_range)
        io.write_histogram(out / f"hist_N{N}.csv", h, {**_metadata(cfg), "N": N})
        io.write_stats(out / f"hist_N{N}_samples.csv", recs, {**_metadata(cfg), "N": N})
        hists[N] = h
    return hists


def run_fig4(cfg: ExperimentConfig, out_dir, jobs: int = 1) -> list[tuple]:
    """Single-particle ``<r>`` versus ``p``, pooled over graphs x couplings.

    Graph ``g`` uses the same seed for every ``p`` and coupling ``(g, c)`` the
    same seed for every ``p``, so neighbouring ``p`` values are coupled.
    Returns rows ``(N, p, mean, std, records)``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    plan, tasks = [], []
    for N in cfg.n_list:
        for p in cfg.p_list:
            for g in range(cfg.graphs):
                gseed = derive_seed(cfg.base_seed, "graph", (N, g))
                for c in range(cfg.realizations):
                    cs = derive_seed(cfg.base_seed, "coupling", (N, g, c))
                    plan.append((N, p, g, gseed, c, cs))
                    tasks.append(single_particle_task(N, cfg.k, p, gseed, cs, window_fraction=cfg.window_fraction))
    res = execute(tasks, out / "records", jobs, cfg.digest())
    recs = [(*pl, o["mean_r"], o["count"]) for pl, o in zip(plan, res)]
    io.write_table(out / "fig4_records.csv",
                   ["N", "p", "graph_index", "graph_seed", "coupling_index", "coupling_seed", "mean_r", "count"],
                   recs, _metadata(cfg))
    rows = []
    for N in cfg.n_list:
        for p in cfg.p_list:
            vals = [r[6] for r in recs if r[0] == N and r[1] == p]
            rows.append((N, p, float(np.mean(vals)), _std(vals), len(vals)))
    io.write_table(out / "fig4.csv", ["N", "p", "mean_r", "std_r", "records"], rows, _metadata(cfg))
    _write_plot(out, "fig4", [{"label": f"N={N}", "style": "line", "x": [r[1] for r in rows if r[0] == N],
                               "y": [r[2] for r in rows if r[0] == N]} for N in cfg.n_list])
    return rows


def run_custom(cfg: ExperimentConfig, out_dir, jobs: int = 1) -> list[tuple]:
    """Many-body ``<r>`` on the full grid ``N x p x graphs x realizations``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    plan, tasks = [], []
    for N in cfg.n_list:
        for p in cfg.p_list:
            for g in range(cfg.graphs):
                gseed = derive_seed(cfg.base_seed, "graph", (N, g))
                for c in range(cfg.realizations):
                    cs = derive_seed(cfg.base_seed, "coupling", (N, g, c))
                    plan.append((N, p, g, gseed, c, cs))
                    tasks.append(_mb(cfg, N, p, gseed, cs, solver_index=c))
    res = execute(tasks, out / "records", jobs, cfg.digest())
    rows = [(*pl, o["mean_r"], o["count"]) for pl, o in zip(plan, res)]
    io.write_table(out / "custom.csv",
                   ["N", "p", "graph_index", "graph_seed", "coupling_index", "coupling_seed", "mean_r", "count"],
                   rows, _metadata(cfg))
    return rows


RUNNERS = {"fig2": run_fig2, "fig3": run_fig3, "fig4": run_fig4, "histogram": run_histogram, "custom": run_custom}


def run_experiment(cfg: ExperimentConfig, out_dir, jobs: int = 1):
    return RUNNERS[cfg.kind](cfg, out_dir, jobs)
