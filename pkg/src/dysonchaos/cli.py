"""Command-line entry point: ``dysonchaos <subcommand> ...``.

Exit codes: 0 success, 2 validation error, 3 capability error, 4 non-convergence.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import io
from .couplings import coupling_matrix, sample_couplings
from .dyson import bogoliubov, extensivity_measures, rotate_quartic, single_particle_rstats, single_particle_spectrum
from .eigensolve import FilterConfig, Spectrum, SpectralWindow, dense_eigh, filter_diagonalize
from .errors import CapabilityError, ConvergenceError, GenerationError, ValidationError
from .fermion import assemble_hamiltonian, dump_hamiltonian
from .graphgen import GraphSpec, watts_strogatz
from .pipeline import load_config, run_experiment
from .stats import mean_r_central

EXIT_OK, EXIT_VALIDATION, EXIT_CAPABILITY, EXIT_CONVERGENCE = 0, 2, 3, 4


def _graph_args(p: argparse.ArgumentParser):
    p.add_argument("--graph", type=Path, help="graph file (overrides --n/--k/--p/--seed)")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--p", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0, help="graph seed")
    p.add_argument("--couplings", type=Path, help="coupling file (overrides --coupling-seed)")
    p.add_argument("--coupling-seed", type=int, default=0)
    p.add_argument("--save-couplings", type=Path)


def _load_inputs(a):
    if a.graph:
        g = io.read_graph(a.graph)
    elif a.n is None:
        raise ValidationError("give --graph or --n")
    else:
        g = watts_strogatz(GraphSpec(a.n, a.k, a.p, a.seed))
    c = io.read_couplings(a.couplings) if a.couplings else sample_couplings(g, a.coupling_seed)
    if a.save_couplings:
        io.write_couplings(a.save_couplings, c)
    return g, c


def cmd_generate_graph(a):
    g = watts_strogatz(GraphSpec(a.n, a.k, a.p, a.seed))
    io.write_graph(a.out, g)
    print(f"wrote {g.n_edges} edges to {a.out}")


def cmd_single_particle(a):
    g, c = _load_inputs(a)
    levels = single_particle_spectrum(g, c)
    st = single_particle_rstats(g, c, a.fraction)
    if a.out:
        io.write_spectrum(a.out, Spectrum(levels, metadata={"method": "single_particle", "coupling_seed": c.seed}))
    print(f"mean_r {io.fmt(st.mean_r)} count {st.count} degenerate {st.degenerate_count}")


def cmd_many_body(a):
    g, c = _load_inputs(a)
    H = assemble_hamiltonian(g, c, impurity=not a.no_impurity, sector=a.sector)
    if a.dump_matrix:
        dump_hamiltonian(H, a.dump_matrix)
    if a.method == "dense":
        spec = dense_eigh(H)
    else:
        cfg = FilterConfig(polynomial_degree=a.degree, max_iterations=a.max_iterations)
        spec = filter_diagonalize(H, SpectralWindow(a.fraction), cfg, seed=a.solver_seed)
    if a.out:
        io.write_spectrum(a.out, spec)
    if not spec.converged:
        raise ConvergenceError(f"filter diagonalization incomplete with {len(spec)} levels; partial spectrum written")
    st = mean_r_central(spec, a.fraction)
    print(f"levels {len(spec)} mean_r {io.fmt(st.mean_r)} count {st.count}")


def cmd_r_stats(a):
    spec = io.read_spectrum(a.spectrum)
    st = mean_r_central(spec, a.fraction)
    if a.out:
        io.write_stats(a.out, [(0, st.mean_r, st.count)], {"source": a.spectrum, "fraction": a.fraction})
    print(f"mean_r {io.fmt(st.mean_r)} count {st.count} degenerate {st.degenerate_count}")


def cmd_bogoliubov(a):
    g, c = _load_inputs(a)
    fac = bogoliubov(coupling_matrix(g, c))
    T = rotate_quartic(fac.O)
    support, pr = extensivity_measures(T, a.tau)
    if a.out:
        io.write_tensor(a.out, T, a.tau, {"coupling_seed": c.seed})
    print(f"participation_ratio {io.fmt(pr)} support_count {support} of {len(T)}")


def cmd_experiment(a):
    cfg = load_config(a.config)
    if cfg.kind != a.kind:
        raise ValidationError(f"config kind {cfg.kind!r} does not match {a.kind!r}")
    run_experiment(cfg, a.out, a.jobs)
    print(f"{cfg.kind} written to {a.out}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dysonchaos")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-graph", help="write a Watts-Strogatz graph file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_generate_graph)

    p = sub.add_parser("single-particle", help="spectrum and <r> of the hopping matrix iJ")
    _graph_args(p)
    p.add_argument("--fraction", type=float, default=0.2)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_single_particle)

    p = sub.add_parser("many-body", help="many-body spectrum in one parity sector")
    _graph_args(p)
    p.add_argument("--sector", choices=("even", "odd"), default="even")
    p.add_argument("--no-impurity", action="store_true")
    p.add_argument("--method", choices=("dense", "filter"), default="dense")
    p.add_argument("--fraction", type=float, default=0.2)
    p.add_argument("--degree", type=int, default=256)
    p.add_argument("--max-iterations", type=int, default=60)
    p.add_argument("--solver-seed", type=int, default=0)
    p.add_argument("--dump-matrix", type=Path)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_many_body)

    p = sub.add_parser("r-stats", help="<r> over the central part of a spectrum file")
    p.add_argument("--spectrum", type=Path, required=True)
    p.add_argument("--fraction", type=float, default=0.2)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_r_stats)

    p = sub.add_parser("bogoliubov", help="rotated impurity tensor and its extensivity")
    _graph_args(p)
    p.add_argument("--tau", type=float, default=1e-3)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_bogoliubov)

    p = sub.add_parser("experiment", help="run a configured sweep")
    p.add_argument("kind", choices=("fig2", "fig3", "fig4", "histogram", "custom"))
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    try:
        a.func(a)
    except (ValidationError, GenerationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CapabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
