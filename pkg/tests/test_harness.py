import csv
import io
import json

import numpy as np
import pytest

from mfbm import CbmParams, QbmParams, gen_random_model, run_compare, run_sweep
from mfbm.harness import reports_to_csv, reports_to_doc
from mfbm.modelfile import ModelFile


def test_zero_model_has_zero_errors():
    rep = run_compare(ModelFile("classical", 4, CbmParams.zeros(4)))
    assert np.all(rep.abs_error == 0)
    rep = run_compare(ModelFile("quantum", 2, QbmParams.zeros(2)))
    assert np.all(rep.abs_error == 0)


def test_classical_shape():
    rep = run_compare(gen_random_model("classical", 6, (1, 0.1, 0.1), seed=2))
    assert len(list(rep.rows())) == 6
    assert rep.solver.converged
    rows = list(csv.DictReader(io.StringIO(reports_to_csv([rep]))))
    assert len(rows) == 6
    for row in rows:
        assert float(row["abs_error"]) == abs(float(row["exact"]) - float(row["meanfield"]))


def test_diagonal_quantum_matches_classical():
    cl = gen_random_model("classical", 4, (1, 0.2, 0.2), seed=3)
    q = ModelFile("quantum", 4, QbmParams.from_classical(cl.params))
    rc, rq = run_compare(cl), run_compare(q)
    z = [k for k, s in enumerate(rq.spins) if s == 3]
    np.testing.assert_allclose(rq.meanfield[z], rc.meanfield, atol=1e-9)
    np.testing.assert_allclose(rq.exact[z], rc.exact, atol=1e-9)
    assert abs(rq.divergence_e - rc.divergence_e) <= 1e-9
    assert abs(rq.divergence_m - rc.divergence_m) <= 1e-9


def test_sweep_order_and_zero_point(monkeypatch):
    base = gen_random_model("classical", 4, (1, 1, 1), seed=6)
    grid = [0.0, 0.05, 0.1]
    reports = run_sweep(base, grid)
    assert [r.scale for r in reports] == grid
    assert np.max(reports[0].abs_error) <= 1e-9
    monkeypatch.setenv("MFBM_THREADS", "3")
    threaded = run_sweep(base, grid)
    assert reports_to_csv(threaded) == reports_to_csv(reports)


def test_single_point_and_bad_grid():
    base = gen_random_model("classical", 3, (1, 1, 1), seed=6)
    assert len(run_sweep(base, [0.2])) == 1
    with pytest.raises(ValueError):
        run_sweep(base, [])
    with pytest.raises(ValueError):
        run_sweep(base, [0.2, 0.1])


def test_doc_format():
    rep = run_compare(gen_random_model("quantum", 2, (1, 0.2, 0.2), seed=1))
    doc = json.loads(reports_to_doc([rep]))
    (r,) = doc["reports"]
    assert r["kind"] == "quantum" and len(r["rows"]) == 6
    assert "wall_time" not in r
    assert "wall_time" in json.loads(reports_to_doc([rep], timing=True))["reports"][0]
