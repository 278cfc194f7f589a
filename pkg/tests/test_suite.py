import math

import numpy as np
import pytest

from mpmo.bf import bf_distance, bf_ps_sample
from mpmo.core import ContractViolation
from mpmo.metrics import mpigd
from mpmo.suite import (
    PROBLEM_IDS,
    SUITE,
    build_reference_front,
    is_filter_fixpoint,
    load_or_build_front,
    make_suite_problem,
    read_front,
    write_front,
)
from oracles import mp_filter

# reference-front sizes at n = 10, default resolution and seed (frozen)
FRONT_SIZES_D10 = {"E1": 56, "E2": 349, "E3": 11430, "E4": 1082, "E5": 930, "E6": 104,
                   "E7": 80, "E8": 409, "E9": 1900, "E10": 608, "E11": 212}


def test_compositions():
    assert SUITE["E3"][1] == ("BF3", math.pi / 2)
    assert [p for p, _ in SUITE["E11"]] == ["BF6"] * 3
    assert [t for _, t in SUITE["E10"]] == [0.0, 1.0, 1.5]
    assert len(PROBLEM_IDS) == 11


def test_make_suite_problem_examples():
    p = make_suite_problem("E1", 10)
    assert p.M == 2 and p.arities == (2, 2)
    assert p.bounds.lower.tolist() == [1.0] + [0.0] * 9
    assert p.bounds.upper.tolist() == [4.0] + [1.0] * 9
    assert make_suite_problem("E9", 10).arities == (3, 3, 3)
    parts = p.evaluate([2.5] + [0.5] * 9)
    assert np.allclose(parts[0], [0.8, 1.25], atol=1e-15)
    assert np.allclose(parts[1], [1.2, 2.5 / 3], atol=1e-15)
    with pytest.raises(ContractViolation):
        make_suite_problem("E12", 10)


@pytest.mark.parametrize("pid", PROBLEM_IDS)
def test_party_ps_samples_have_unit_distance(pid):
    for family, t in SUITE[pid]:
        X = bf_ps_sample(family, t, 200, 0, 10)
        assert np.all(np.abs(bf_distance(family, X, t) - 1.0) <= 1e-9)


def test_e1_common_optimum_survives():
    # resolution 1001 puts x1 = 2.5 exactly on the sampling grid
    front = build_reference_front("E1", 2, resolution=1001)
    assert np.any(np.all(front.decisions == np.array([2.5, 0.5]), axis=1))


def test_resolution_minimum():
    with pytest.raises(ContractViolation):
        build_reference_front("E1", 10, resolution=50)


def test_front_matches_pairwise_filter_oracle():
    p = make_suite_problem("E7", 10)
    cand = np.unique(p.ps_sampler(120, 0), axis=0)
    F = p.evaluate_batch(cand)
    front = build_reference_front("E7", 10, resolution=120)
    assert np.array_equal(front.points, F[mp_filter(F.tolist(), p.arities)])


@pytest.mark.parametrize("pid", PROBLEM_IDS)
def test_default_fronts(pid):
    front = load_or_build_front(pid, 10)
    assert front.points.shape[0] == FRONT_SIZES_D10[pid]
    assert is_filter_fixpoint(front)


def test_fronts_non_empty_at_all_dimensions():
    for n in (30, 50):
        for pid in ("E1", "E6", "E11"):
            assert load_or_build_front(pid, n).points.shape[0] > 0


def test_front_reproducible_and_round_trips(tmp_path):
    a = build_reference_front("E5", 10, resolution=500, seed=3)
    b = build_reference_front("E5", 10, resolution=500, seed=3)
    assert np.array_equal(a.points, b.points)
    path = write_front(a, tmp_path / "e5.txt")
    header = path.read_text().splitlines()[0]
    assert header.startswith("# E5 M=2 arities=3,3 n=10 resolution=500 seed=3")
    c = read_front(path)
    assert np.array_equal(c.points, a.points)
    assert c.version_id == a.version_id


def test_cached_front_loaded_from_disk(tmp_path):
    a = load_or_build_front("E2", 10, 300, 0, tmp_path)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    b = load_or_build_front("E2", 10, 300, 0, tmp_path)
    assert np.array_equal(a.points, b.points)


def test_read_front_rejects_bad_files(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 3\n")
    with pytest.raises(ContractViolation):
        read_front(bad)
    bad.write_text("# E1 M=2 arities=2,2 n=10 resolution=100 seed=0 version=1\n1 2 3\n")
    with pytest.raises(ContractViolation):
        read_front(bad)


@pytest.mark.parametrize("pid", ["E1", "E2", "E5"])
def test_front_converges_with_resolution(pid):
    big = load_or_build_front(pid, 10)
    coarse = mpigd(big, build_reference_front(pid, 10, resolution=100).points)
    fine = mpigd(big, build_reference_front(pid, 10, resolution=1000).points)
    assert fine < coarse
    assert fine < 0.05
