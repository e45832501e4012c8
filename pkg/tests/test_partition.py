import numpy as np
import pytest
import scipy.linalg as sla

import csrp.partition as partition
from csrp.errors import ConfigurationError
from csrp.lie_algebra import load_preset
from csrp.partition import (
    fitted_order,
    geometric_ns,
    setup_partition,
    sweep,
    truncation_table,
    z_direct,
    z_limit,
    z_n,
)
from csrp.splitting import canonical_preset


@pytest.fixture(scope="module")
def small():
    lie = load_preset("su2")
    return setup_partition(canonical_preset(1, lie), lie, 3)


def dense_single_step(setup, eps, lam):
    ts = setup.tspace
    ob = ts.lift_bose(setup.interactions.o_b).toarray()
    obf = setup.interactions.o_bf.matrix.toarray()
    step = np.diag(np.exp(-eps * ts.number_total())) @ sla.expm(1j * lam * obf) @ sla.expm(1j * lam * ob)
    return ts.vacuum_pairing(step @ ts.vacuum())


def test_free_sequence_is_exactly_one(small):
    assert all(z_n(small, 0.3, 0.0, n) == 1.0 for n in (1, 2, 3, 7, 16))


def test_single_step_matches_dense_exponentials(small):
    assert z_n(small, 0.2, 0.7, 1) == pytest.approx(dense_single_step(small, 0.2, 0.7), abs=1e-11)


@pytest.mark.parametrize("order", ["bf-b", "b-bf"])
def test_trotter_sequence_approaches_direct(small, order):
    zd = z_direct(small, 0.1, 0.5)
    errors = [abs(z_n(small, 0.1, 0.5, n, order) - zd) for n in (8, 32, 128)]
    assert errors[0] > errors[1] > errors[2]
    assert fitted_order([8, 32, 128], errors) >= 0.9


def test_direct_routes_agree(small, monkeypatch):
    dense = z_direct(small, 0.1, 0.5)
    monkeypatch.setattr(partition, "DENSE_DIRECT_LIMIT", 0)
    assert z_direct(small, 0.1, 0.5) == pytest.approx(dense, abs=1e-10)


def test_seed_does_not_change_results():
    lie = load_preset("su2")
    spec = canonical_preset(2, lie)
    a, b = setup_partition(spec, lie, 3, seed=1), setup_partition(spec, lie, 3, seed=99)
    assert abs(z_n(a, 0.1, 0.4, 4) - z_n(b, 0.1, 0.4, 4)) <= 1e-10


def test_fitted_order_on_synthetic_errors():
    ns = [2, 4, 8, 16]
    assert fitted_order(ns, [3.0 / n ** 2 for n in ns]) == pytest.approx(2.0)
    assert fitted_order(ns, [0.0, 0.0, 0.0, 1.0]) == float("inf")


def test_geometric_ns():
    assert geometric_ns(10) == [1, 2, 4, 8]
    assert geometric_ns(256)[-1] == 256


def test_argument_errors(small):
    with pytest.raises(ConfigurationError):
        z_n(small, 0.1, 0.5, 4, order="b-b")
    with pytest.raises(ConfigurationError):
        z_n(small, 0.1, 0.5, 0)


def test_z_limit_rows(small):
    run = z_limit(small, 0.1, 0.5, n_max=8, direct=True)
    rows = run.rows()
    assert [r["n"] for r in rows] == [1, 2, 4, 8]
    assert rows[-1]["cauchy_diff"] == "" and rows[0]["cauchy_diff"] == pytest.approx(run.cauchy[0])
    assert all(r["wall_ms"] == "" for r in rows)
    assert all(isinstance(r["wall_ms"], float) for r in run.rows(timing=True))
    assert run.to_dict()["z_direct"] == [run.z_direct.real, run.z_direct.imag]


def test_sweep_grid_order():
    lie = load_preset("u1")
    rows = sweep(canonical_preset(3, lie), lie, eps=[0.1, 0.2], lam=[0.0, 1.0], degrees=[2, 3], n_max=4)
    assert len(rows) == 2 * 2 * 2 * 3
    assert [(r["d"], r["eps"], r["lambda"]) for r in rows[::3]] == [
        (d, e, l) for d in (2, 3) for e in (0.1, 0.2) for l in (0.0, 1.0)]


def test_truncation_table():
    lie = load_preset("su2")
    table = truncation_table(canonical_preset(1, lie), lie, [1, 2, 3], 0.1, 0.5, 4)
    assert [r["d"] for r in table] == [1, 2, 3] and table[0]["delta"] == ""
    assert all(r["delta"] >= 0 for r in table[1:])
