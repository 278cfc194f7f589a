import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpmo.core import ContractViolation
from mpmo.uav import (
    CASES,
    GENOME_LENGTH,
    FATALITY_KERNELS,
    Path,
    WorldConfig,
    all_objectives,
    constraint_violations,
    decode_batch,
    decode_path,
    f_distance,
    f_eco,
    f_fatal,
    f_fuel,
    f_height,
    f_length,
    f_noise,
    generate_world,
    load_world,
    make_uav_case,
    property_risk,
    register_fatality_kernel,
    save_world,
    smooth_genomes,
    write_path,
)

HOVER_10M = 1.38 ** 1.5 * math.sqrt(9.81 ** 3 / (2 * 1.225 * 0.1 * 4))  # energy of a 10 m level leg


@pytest.fixture(scope="module")
def world():
    return generate_world(1)


def _world_with(world, **changes):
    w = generate_world(world.seed, replace(world.config, **changes))
    return w


def _level_path_over(world, cx, cy, z):
    xs = np.linspace(cx - 1, cx + 1, 5)
    return Path(np.column_stack([xs, np.full(5, cy), np.full(5, z)]), world.config.cell_size)


def test_world_determinism_and_round_trip(world, tmp_path):
    again = generate_world(1)
    assert np.array_equal(world.pop_centers, again.pop_centers)
    assert world.version_id == again.version_id
    loaded = load_world(save_world(world, tmp_path / "w.json"))
    assert loaded.version_id == world.version_id
    assert generate_world(2).version_id != world.version_id


def test_world_peak_density(world):
    g = np.linspace(0, 50, 201)
    gx, gy = np.meshgrid(g, g)
    assert world.density_p(gx, gy).max() == pytest.approx(world.config.peak_density, rel=1e-9)
    assert world.density_p(gx, gy).min() >= 0.0


def test_radial_decay_single_center():
    w = generate_world(5, WorldConfig(n_centers=1))
    cx, cy = w.pop_centers[0, :2]
    r = np.linspace(0, 20, 50)
    for ang in (0.0, 1.0, 2.5):
        vals = w.density_p(cx + r * math.cos(ang), cy + r * math.sin(ang))
        assert np.all(np.diff(vals) <= 0)


def test_world_config_validation():
    with pytest.raises(ContractViolation):
        WorldConfig(h_min=150.0)
    with pytest.raises(ContractViolation):
        WorldConfig(weight=0.0)


def test_decode_examples(world):
    p = decode_path(np.full(GENOME_LENGTH, 0.5), world)
    assert p.points.shape == (46, 3)
    assert np.all(p.points[1:-1, 1] == 23.0) and np.all(p.points[:, 2] == 65.0)
    p = decode_path(np.zeros(GENOME_LENGTH), world)
    assert np.all(p.points[1:-1, 1] == 1.0) and np.all(p.points[:, 2] == 10.0)
    for g in (np.zeros(88), np.ones(88), np.random.default_rng(0).random(88)):
        q = decode_path(g, world)
        assert q.points[0, :2].tolist() == [1.0, 1.0] and q.points[-1, :2].tolist() == [45.0, 45.0]
        assert q.points[1:-1, 0].tolist() == list(range(2, 46))
    flagged = decode_path(np.full(88, 1.5), world)
    assert flagged.diagnostics["clamped_genes"] and np.all(flagged.points[1:-1, 1] == 45.0)
    with pytest.raises(ContractViolation):
        decode_path(np.zeros(87), world)


def test_length_examples(world):
    two = Path(np.array([[0, 0, 50], [1, 0, 50], [2, 0, 50]], dtype=float))
    assert f_length(two) == 200.0
    straight = Path(np.column_stack([np.linspace(1, 45, 5), np.linspace(1, 45, 5), np.full(5, 30.0)]))
    assert f_length(straight) == pytest.approx(math.hypot(44, 44) * 100)
    rnd = decode_path(np.random.default_rng(1).random(88), world)
    assert f_length(rnd, world) >= f_length(straight)


def test_fuel_examples(world):
    level = Path(np.array([[0, 0, 0], [0.1, 0, 0], [0.2, 0, 0]], dtype=float))
    assert HOVER_10M == pytest.approx(50.3, abs=0.05)
    assert f_fuel(level, world) == pytest.approx(2 * HOVER_10M, rel=1e-12)
    climb = Path(np.array([[0, 0, 0], [0.1, 0, 0], [0.2, 0, 5]], dtype=float))
    climb_leg = math.hypot(10, 5)
    rho = 1.225 * math.exp(-(5 / 1000) / (2 * 10.7))
    hover = 1.38 ** 1.5 * math.sqrt(9.81 ** 3 / (2 * rho * 0.1 * 4)) * climb_leg / 10
    assert f_fuel(climb, world) == pytest.approx(HOVER_10M + hover + 5 * 1.38 * 9.81, rel=1e-12)
    assert 5 * 1.38 * 9.81 == pytest.approx(67.69, abs=0.005)
    down = Path(np.array([[0, 0, 5], [0.1, 0, 5], [0.2, 0, 0]], dtype=float))
    assert f_fuel(down, world) < f_fuel(climb, world) - 60


def test_height_examples():
    assert f_height(Path(np.array([[0, 0, 10], [1, 0, 15], [2, 0, 12]], dtype=float))) == 8.0
    assert f_height(Path(np.array([[0, 0, 10], [1, 0, 10], [2, 0, 10]], dtype=float))) == 0.0


def test_distance_examples(world):
    over = Path(np.array([[1, 1, 30], [25, 30, 30], [34, 20, 30], [40, 35, 30], [45, 45, 30]], dtype=float))
    assert f_distance(over, world) == 0.0
    single = _world_with(world, uhps=((10.0, 3.0),))
    line = Path(np.array([[0, 0, 30], [10, 0, 30], [20, 0, 30]], dtype=float))
    assert f_distance(line, single) == pytest.approx(300.0)
    denser = Path(np.array([[0, 0, 30], [5, 0, 30], [10, 0, 30], [10, 3, 30], [20, 0, 30]], dtype=float))
    assert f_distance(denser, single) <= f_distance(line, single)


def test_fatality_examples(world):
    cx, cy = world.pop_centers[np.argmax(world.pop_centers[:, 2]), :2]
    dense = _level_path_over(world, cx, cy, 60.0)
    empty = Path(dense.points - np.array([cx - 2.0, cy - 49.0, 0.0]))
    assert f_fatal(dense, world) > f_fatal(empty, world) >= 0.0
    doubled = _world_with(world, p_crash_per_hour=2e-4)
    assert f_fatal(dense, doubled) == pytest.approx(2 * f_fatal(dense, world), rel=1e-12)
    nobody = _world_with(world, peak_density=0.0)
    rnd = decode_path(np.random.default_rng(2).random(88), nobody)
    assert f_fatal(rnd, nobody) == 0.0 and f_noise(rnd, nobody) == 0.0


def test_custom_fatality_kernel(world):
    register_fatality_kernel("constant-half", lambda z, e0, cfg: np.full_like(z, 0.5))
    try:
        w = _world_with(world, fatality_kernel="constant-half")
        p = _level_path_over(w, 25, 25, 50.0)
        base = _world_with(world)
        assert f_fatal(p, w) != f_fatal(p, base)
    finally:
        FATALITY_KERNELS.pop("constant-half")


def test_property_risk_examples(world):
    cfg = world.config
    median = math.exp(cfg.building_mu)
    psi = float(property_risk(np.array([median]), cfg)[0])
    assert psi == pytest.approx(0.02493, abs=1e-5)
    assert psi == pytest.approx(1 / (median * cfg.building_sigma * math.sqrt(2 * math.pi)), rel=1e-12)
    assert np.all(property_risk(np.array([0.5, 5.0, 21.0]), cfg) == psi)
    assert property_risk(np.array([120.0]), cfg)[0] < property_risk(np.array([30.0]), cfg)[0]
    with pytest.raises(ContractViolation):
        property_risk(np.array([0.0, 10.0]), cfg)
    p = Path(np.array([[0, 0, 10], [1, 0, 15], [2, 0, 21]], dtype=float))
    assert f_eco(p, world) == pytest.approx(3 * psi)


def test_noise_examples(world):
    cx, cy = world.pop_centers[0, :2]
    values = [f_noise(_level_path_over(world, cx, cy, z), world) for z in (20.0, 40.0, 60.0, 80.0)]
    assert values[0] > 0 and all(a > b for a, b in zip(values, values[1:]))
    quiet = _world_with(world, noise_threshold_db=-1e9)
    half = _world_with(world, noise_threshold_db=-1e9, noise_source_db=40.0)
    p = _level_path_over(world, cx, cy, 30.0)
    assert f_noise(p, half) == pytest.approx(0.5 * f_noise(p, quiet), rel=1e-12)
    far = _world_with(world, noise_source_db=41.0)  # heard above 40 dB only within ~1.1 m
    assert f_noise(p, far) == 0.0


def test_constraint_examples(world):
    turn = Path(np.array([[0, 0, 50], [1, 0, 50], [1, 1, 50]], dtype=float))
    assert constraint_violations(turn, world) == pytest.approx([0.0, math.pi / 6, 0.0])
    level = Path(np.array([[0, 0, 50], [1, 0, 50], [2, 0, 50]], dtype=float))
    assert constraint_violations(level, world).tolist() == [0.0, 0.0, 0.0]
    climb = Path(np.array([[0, 0, 50], [1, 0, 150], [2, 0, 150]], dtype=float))
    v = constraint_violations(climb, world)
    assert v[2] == 0.0 and v[0] == pytest.approx(60.0)
    stall = Path(np.array([[0, 0, 50], [1, 0, 50], [1, 0, 60], [2, 0, 60]], dtype=float))
    constraint_violations(stall, world)
    assert stall.diagnostics["skipped_segments"] == 1


@pytest.mark.parametrize("case", CASES)
def test_cases_shape(case, world):
    prob = make_uav_case(case, world)
    assert prob.n == 88 and prob.arities == (2, 2) and prob.M == 2
    X = np.random.default_rng(3).random((4, 88))
    F = prob.evaluate_batch(X)
    assert F.shape == (4, 4) and np.all(F >= 0)
    assert np.array_equal(F, prob.evaluate_batch(X))
    assert prob.constraint_evaluator(X).shape == (4, 3)


def test_case_compositions(world):
    X = np.random.default_rng(4).random((3, 88))
    X[0, 1::2] = 0.3  # level path
    objs = all_objectives(decode_batch(X, world.config), world)
    c1, c2, c3, c4 = (make_uav_case(c, world).evaluate_batch(X) for c in ("C1", "C2", "C3", "C4"))
    assert c2[0, 0] == objs["length"][0]
    assert np.array_equal(c1[:, :2], c4[:, :2])
    assert np.array_equal(c3[:, 0], objs["fuel"])
    assert np.array_equal(c1[:, 2:], np.column_stack([objs["fatal"], objs["eco"]]))
    assert np.array_equal(c4[:, 3], objs["noise"])
    with pytest.raises(ContractViolation):
        make_uav_case("C7", world)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=88, max_size=88))
def test_objectives_non_negative(genes):
    w = generate_world(1)
    objs = all_objectives(decode_batch(np.array(genes), w.config), w)
    assert all(v[0] >= 0 for v in objs.values())


def test_altitude_trade_off(world):
    cx, cy = world.pop_centers[0, :2]
    low = _level_path_over(world, cx, cy, 30.0)
    low.points[:, 2] += np.array([0, 3, 1, 4, 2])
    high = Path(low.points + np.array([0, 0, 15.0]))
    assert f_noise(high, world) < f_noise(low, world)
    assert f_fuel(high, world) > f_fuel(low, world)
    assert f_eco(high, world) < f_eco(low, world)


def test_smooth_genomes_feasible(world):
    G = smooth_genomes(np.random.default_rng(0), 50, world.config)
    assert G.shape == (50, 88) and G.min() >= 0 and G.max() <= 1
    prob = make_uav_case("C1", world)
    assert np.mean(prob.violations(G) == 0) >= 0.9


def test_write_path(world, tmp_path):
    p = decode_path(np.full(88, 0.5), world)
    rows = np.loadtxt(write_path(p, tmp_path / "p.txt"))
    assert rows.shape == (46, 4) and rows[-1, 0] == 45
