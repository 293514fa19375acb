import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iiaflow.errors import ApplicabilityError
from iiaflow.geometry import Geometry, flat_standard_jet, perturb_closedness, sample_typeiia_jet
from iiaflow.identities import (
    CATALOG,
    CheckStats,
    F_evaluated,
    F_evaluated_second_slot,
    F_explicit,
    SuiteReport,
    get_check,
    residual,
    run_check,
    run_on_sample,
    run_suite,
)

TOL = 1e-8


@pytest.fixture(scope="module")
def flat():
    return Geometry(flat_standard_jet())


def test_catalog_is_complete():
    ids = [c.id for c in CATALOG]
    assert ids == [f"ID-{n:02d}" for n in range(1, 30)]
    assert len({c.name for c in CATALOG}) == 29


def test_lookup_by_id_and_name():
    assert get_check("ID-07") is get_check("N-type")
    with pytest.raises(KeyError):
        get_check("ID-99")


def test_residual_is_normalized_by_largest_term():
    assert residual(np.array([1e6 + 1.0]), np.array([1e6])) == pytest.approx(1e-6)
    assert residual(np.array([2.0]), np.array([1.0]), np.array([1e4])) == pytest.approx(1e-4)
    assert residual(np.array([1e-3]), np.array([0.0])) == pytest.approx(1e-3)


def test_J_action_exact_on_flat(flat):
    assert run_check(get_check("ID-03"), flat) <= 1e-13


def test_metric_flow_on_random_jets(jet_geometries):
    for G in jet_geometries:
        assert run_check(get_check("ID-26"), G) <= TOL


def test_quadratic_N_identities_trivial_when_integrable(flat, catalog):
    assert np.abs(flat.N).max() == 0.0
    assert run_check(get_check("ID-10"), flat) == 0.0


@pytest.mark.parametrize("check", CATALOG, ids=lambda c: f"{c.id}-{c.name}")
def test_check_holds_on_samples(check, jet_geometries, invariant_geometries):
    samples = jet_geometries + (invariant_geometries if check.applies_to("invariant") else [])
    for G in samples:
        assert run_check(check, G) <= TOL, G.kind


@pytest.mark.parametrize("check", CATALOG, ids=lambda c: c.id)
def test_check_vanishes_on_flat(check, flat):
    assert run_check(check, flat) <= 1e-12


def test_jet_only_check_refuses_invariant_sample(invariant_geometries):
    with pytest.raises(ApplicabilityError):
        run_check(get_check("ID-15"), invariant_geometries[0])


def test_curvature_F_two_ways(jet_geometries):
    for G in jet_geometries:
        F = F_explicit(G)
        assert residual(F, F_evaluated(G)) <= TOL


def test_curvature_F_with_second_slot_twisted_fails(jet_geometries):
    # twisting the second index of the Ricci-type contraction instead of the first is not equivalent
    worst = max(residual(F_explicit(G), F_evaluated_second_slot(G)) for G in jet_geometries)
    assert worst > 1e-2


def test_flat_suite_is_exact():
    report = run_suite(trials=1, flat=True)
    assert len(report.stats) == 29
    assert all(s.max <= 1e-12 for s in report.stats.values())


def test_suite_is_deterministic():
    a = run_suite(seed=3, trials=2, check_filter=["ID-01", "ID-26"])
    b = run_suite(seed=3, trials=2, check_filter=["ID-01", "ID-26"])
    assert a.to_json() == b.to_json()


def test_sharding_does_not_change_the_report():
    single = run_suite(seed=5, trials=3, check_filter=["ID-02", "ID-12"])
    sharded = run_suite(seed=5, trials=3, check_filter=["ID-02", "ID-12"], workers=2)
    a, b = single.to_dict(), sharded.to_dict()
    for x, y in zip(a["checks"], b["checks"]):
        assert x["max"] == y["max"] and x["samples"] == y["samples"]
        assert x["mean"] == pytest.approx(y["mean"], rel=1e-12)


def test_report_schema():
    report = run_suite(seed=1, trials=1, check_filter=["ID-05"])
    data = json.loads(report.to_json())
    assert set(data) == {"seed", "trials", "tolerance", "checks"}
    (entry,) = data["checks"]
    assert set(entry) == {"id", "anchor", "samples", "max", "mean", "pass"}
    # one jet and one invariant sample per cataloged algebra
    assert entry["samples"] == 4 and entry["pass"] is True


def test_run_on_stored_sample_skips_inapplicable(invariant_geometries):
    report = run_on_sample(invariant_geometries[0])
    assert "ID-15" not in report.stats
    assert report.all_passed


def test_failed_check_is_reported():
    G = Geometry(perturb_closedness(flat_standard_jet(), 1e-3, seed=0))
    report = run_on_sample(G, tolerance=TOL, check_filter=["ID-15", "ID-26"])
    assert not report.all_passed
    assert not report.to_dict()["checks"][0]["pass"]


def test_trials_must_be_positive():
    with pytest.raises(ValueError):
        run_suite(trials=0)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=3, max_size=3), st.lists(st.floats(0, 1), min_size=1, max_size=4))
def test_stats_merge_is_associative_and_commutative(xs, ys):
    def stats(values):
        s = CheckStats("ID-01", "")
        for v in values:
            s.add(v)
        return SuiteReport(0, len(values), TOL, {"ID-01": s})

    a, b, c = stats(xs[:1]), stats(xs[1:]), stats(ys)
    left = a.merge(b).merge(c).stats["ID-01"]
    right = c.merge(b.merge(a)).stats["ID-01"]
    assert left.max == right.max and left.count == right.count
    assert left.total == pytest.approx(right.total)


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10**6))
def test_breaking_closedness_raises_residuals(seed):
    flat = Geometry(flat_standard_jet())
    broken = Geometry(perturb_closedness(flat_standard_jet(), 1e-3, seed=seed))
    for key in ("ID-15", "ID-26"):
        assert run_check(get_check(key), broken) > 1e6 * max(run_check(get_check(key), flat), 1e-16)


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.3, 3.0, 10.0]))
def test_metric_flow_holds_across_scales(seed, scale):
    G = Geometry(sample_typeiia_jet(seed, scale=scale))
    assert run_check(get_check("ID-26"), G) <= TOL
