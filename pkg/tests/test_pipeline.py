import json

import numpy as np
import pytest

from dysonchaos import io, pipeline
from dysonchaos.errors import ValidationError
from dysonchaos.pipeline import (
    ExperimentConfig,
    derive_seed,
    execute,
    many_body_task,
    parse_config,
    run_fig2,
    run_fig3,
    run_fig4,
    run_histogram,
    run_task,
)

diptest = pytest.importorskip("diptest")


def cfg(**kw):
    base = dict(kind="fig3", n_list=[12], realizations=3)
    base.update(kw)
    return ExperimentConfig(**base)


# ---------------------------------------------------------------- configuration


def test_parse_config():
    c = parse_config(
        """
        # fig 4 at desk scale
        schema_version = 1
        kind = fig4
        n = 100, 200
        p = 0, 0.5, 1
        graphs = 5
        realizations = 30
        impurity = false
        hist_range = 0.3, 0.8
        """
    )
    assert c.kind == "fig4" and c.n_list == [100, 200] and c.p_list == [0.0, 0.5, 1.0]
    assert c.graphs == 5 and c.realizations == 30 and not c.impurity
    assert c.hist_range == (0.3, 0.8)


@pytest.mark.parametrize(
    "text",
    [
        "kind = fig3\nn = 12",  # schema_version missing
        "schema_version = 2\nkind = fig3\nn = 12",
        "schema_version = 1\nkind = fig9\nn = 12",
        "schema_version = 1\nkind = fig3\nn = 13",
        "schema_version = 1\nkind = fig3\nn = 12\ncolour = red",
        "schema_version = 1\nkind = fig3\nn = 12\nrealizations = many",
        "schema_version = 1\nkind = fig3\nn = 12\np = 1.5",
        "schema_version = 1\nkind = fig3\nn = 12\nmethod = lanczos",
        "schema_version = 1\nkind = fig3\nn = 12\nimpurity = maybe",
        "schema_version = 1\nkind fig3",
        "schema_version = 1\nn = 12",
    ],
)
def test_parse_config_errors(text):
    with pytest.raises(ValidationError):
        parse_config(text)


def test_config_digest_changes():
    assert cfg().digest() == cfg().digest()
    assert cfg().digest() != cfg(base_seed=1).digest()


# ---------------------------------------------------------------- seeds


def test_derive_seed_basics():
    assert derive_seed(0, "graph", 0) == derive_seed(0, "graph", 0)
    assert derive_seed(0, "graph", 0) != derive_seed(0, "coupling", 0)
    assert derive_seed(0, "graph", (1, 2)) != derive_seed(0, "graph", (2, 1))
    assert derive_seed(0, "graph", (12, 0)) != derive_seed(0, "graph", (1, 20))
    assert 0 <= derive_seed(5, "solver", 9) < 2**64
    with pytest.raises(ValidationError):
        derive_seed(0, "noise", 0)


def test_derive_seed_no_collisions():
    seeds = {derive_seed(0, tag, i) for tag in ("graph", "coupling") for i in range(500_000)}
    assert len(seeds) == 10**6


# ---------------------------------------------------------------- execution


def test_run_task_reproducible_from_inputs():
    t = many_body_task(12, 2, 0.5, 11, 22)
    assert run_task(t) == run_task(json.loads(json.dumps(t)))


def test_resume_only_missing(tmp_path, monkeypatch):
    tasks = [many_body_task(12, 2, 0.3, 1, s) for s in range(4)]
    first = execute(tasks, tmp_path)
    records = sorted(tmp_path.glob("*.json"))
    assert len(records) == 4
    records[1].unlink()
    calls = []
    real = pipeline.run_task
    monkeypatch.setattr(pipeline, "run_task", lambda t: calls.append(t) or real(t))
    again = execute(tasks, tmp_path)
    assert len(calls) == 1 and again == first


def test_unfinished_record_is_rerun(tmp_path, monkeypatch):
    tasks = [many_body_task(12, 2, 0.3, 1, 0)]
    execute(tasks, tmp_path)
    rec = next(tmp_path.glob("*.json"))
    data = json.loads(rec.read_text())
    data["status"] = "running"
    rec.write_text(json.dumps(data))
    calls = []
    real = pipeline.run_task
    monkeypatch.setattr(pipeline, "run_task", lambda t: calls.append(t) or real(t))
    execute(tasks, tmp_path)
    assert len(calls) == 1


def test_record_contents(tmp_path):
    t = many_body_task(12, 2, 0.3, 1, 2)
    execute([t], tmp_path, config_hash="abc")
    rec = json.loads(next(tmp_path.glob("*.json")).read_text())
    assert rec["inputs"] == t and rec["status"] == "done" and rec["config_hash"] == "abc"
    assert set(rec["outputs"]) >= {"mean_r", "count"} and rec["seconds"] >= 0


def test_jobs_do_not_change_outputs(tmp_path):
    c = cfg(kind="fig2", n_list=[12], p_list=[0.2, 0.9], realizations=3)
    run_fig2(c, tmp_path / "a", jobs=1)
    run_fig2(c, tmp_path / "b", jobs=2)
    for name in ("fig2.csv", "fig2_plot.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


# ---------------------------------------------------------------- experiments


def test_fig2_table(tmp_path):
    c = cfg(kind="fig2", n_list=[12], p_list=[0.5], realizations=4)
    rows = run_fig2(c, tmp_path)
    assert len(rows) == 4 and [r[3] for r in rows] == [0, 1, 2, 3]
    assert len({r[4] for r in rows}) == 4 and len({r[2] for r in rows}) == 1
    meta, header, body = io.read_table(tmp_path / "fig2.csv")
    assert header[-2:] == ["mean_r_rewired", "mean_r_base"] and len(body) == 4
    assert meta["seed_rule"].startswith("blake2b")
    # the base column reruns the same couplings on the circulant graph
    r = rows[2]
    base = run_task(many_body_task(12, 2, 0.0, 0, r[4], solver_seed=derive_seed(0, "solver", 2)))
    assert base["mean_r"] == r[6]


def test_fig3_deterministic(tmp_path):
    c = cfg(n_list=[12, 14], realizations=3)
    a = run_fig3(c, tmp_path / "a")
    b = run_fig3(c, tmp_path / "b")
    assert a == b and [r[0] for r in a] == [12, 14] and all(r[3] == 3 for r in a)
    assert (tmp_path / "a" / "fig3.csv").read_bytes() == (tmp_path / "b" / "fig3.csv").read_bytes()
    assert (tmp_path / "a" / "fig3_N14.csv").exists()


def test_fig4_bookkeeping(tmp_path):
    c = cfg(kind="fig4", n_list=[100], p_list=[0.0, 1.0], graphs=5, realizations=3)
    rows = run_fig4(c, tmp_path)
    assert [r[4] for r in rows] == [15, 15]
    _, _, recs = io.read_table(tmp_path / "fig4_records.csv")
    assert len(recs) == 30
    # graph and coupling seeds are shared across p
    by_p = {p: [r[3:6:2] for r in recs if float(r[1]) == p] for p in (0.0, 1.0)}
    assert by_p[0.0] == by_p[1.0]


@pytest.mark.slow
def test_fig4_bookkeeping_150(tmp_path):
    c = cfg(kind="fig4", n_list=[100], p_list=[0.5], graphs=5, realizations=30)
    assert run_fig4(c, tmp_path)[0][4] == 150


def test_histogram_counts(tmp_path):
    c = cfg(kind="histogram", n_list=[12], realizations=20, bins=7)
    h = run_histogram(c, tmp_path)[12]
    assert h.total + h.below + h.above == 20 and len(h.counts) == 7
    _, header, rows = io.read_table(tmp_path / "hist_N12.csv")
    assert header == ["bin_left", "bin_right", "count"] and len(rows) == 7
    assert float(rows[0][0]) == 0.35 and float(rows[-1][1]) == 0.70


@pytest.mark.slow
def test_histogram_unimodal_n16(tmp_path):
    c = cfg(kind="histogram", n_list=[16], realizations=200)
    run_histogram(c, tmp_path)
    _, _, rows = io.read_table(tmp_path / "hist_N16_samples.csv")
    samples = np.array([float(r[1]) for r in rows])
    dip, pval = diptest.diptest(samples)
    assert pval > 0.05


def test_impurity_off_is_not_chaotic(tmp_path):
    c = cfg(kind="custom", n_list=[16], p_list=[0.3, 1.0], realizations=4, impurity=False)
    rows = pipeline.run_custom(c, tmp_path)
    assert np.mean([r[6] for r in rows]) < 0.45


def test_filter_method_in_pipeline(tmp_path):
    c = cfg(n_list=[14], realizations=2)
    f = cfg(n_list=[14], realizations=2, method="filter", filter_degree=128)
    dense = run_fig3(c, tmp_path / "d")
    filt = run_fig3(f, tmp_path / "f")
    # both restrict to the centre; the filter window is by energy, dense by rank
    assert abs(dense[0][1] - filt[0][1]) < 0.15
