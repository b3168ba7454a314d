import numpy as np
import pytest

import harnackflow as hf
from harnackflow.errors import (
    NodesOutOfRangeError,
    TimesNotStoredError,
    WindowTooNarrowError,
)
from helpers import enumerate_action

R0, F0 = 1.0, 0.5


@pytest.fixture(scope="module")
def sphere_small_traj():
    n = 24
    geom = hf.SphereGeometry(n)
    state = hf.FlowState(0.0, geom.with_phi(0.1 * geom.cos_theta), 0.5 + 0.2 * geom.cos_theta)
    return hf.run(state, 0.04, 1e-3, 0.01, c=-1.0)  # 5 snapshots


@pytest.fixture(scope="module")
def torus_small_traj():
    n = 5
    geom = hf.TorusGeometry(n, 1.0)
    x, y = geom.coords()
    geom = geom.with_phi(0.1 * np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y))
    f = 0.6 + 0.2 * np.sin(2 * np.pi * x) * np.ones((1, n))
    state = hf.FlowState(0.0, geom, f)
    return hf.run(state, 0.003, 1e-4, 1e-3, c=-1.0)  # 4 snapshots, curved weights


def test_sphere_constant_gamma_closed_form(sphere_constant_traj):
    # x1 = x2 on the round sphere: the constant path is optimal and
    # Gamma = integral of R dt = ln((r0^2 - 2 t1)/(r0^2 - 2 t2)).
    t1, t2 = 0.05, 0.2
    node = sphere_constant_traj.geom.n // 2
    gamma, path = hf.min_action(sphere_constant_traj, (node, t1), (node, t2))
    expected = np.log((R0**2 - 2 * t1) / (R0**2 - 2 * t2))
    assert abs(gamma - expected) <= 1e-2 * expected
    assert path.nodes[0] == node and path.nodes[-1] == node


def test_sphere_constant_margin_closed_form(sphere_constant_traj):
    # margin = 2 ln(t2/t1) + Gamma/2 + ln(f(t2)/f(t1)) = 2 ln(t2/t1) + (3/2) Gamma
    t1, t2 = 0.05, 0.2
    node = sphere_constant_traj.geom.n // 2
    margin = hf.check_integrated_harnack(sphere_constant_traj, (node, t1), (node, t2))
    gamma_true = np.log((R0**2 - 2 * t1) / (R0**2 - 2 * t2))
    expected = 2 * np.log(t2 / t1) + 1.5 * gamma_true
    assert abs(margin - expected) <= 1e-2
    assert margin >= -1e-2


def test_flat_torus_straight_path(torus_plain_traj):
    # R = 0: Gamma = d(x1, x2)^2 / (t2 - t1) with the grid-graph distance,
    # attained when the per-step displacement divides evenly.
    traj = torus_plain_traj
    n = traj.geom.n
    h = traj.geom.h
    t1 = traj.times[4]
    t2 = traj.times[9]  # 5 transitions
    x1 = (3, 5)
    x2 = (3 + 6, 5 + 4)  # taxicab distance 10 = 2 per transition
    gamma, _ = hf.min_action(traj, (x1, t1), (x2, t2), window=2)
    expected = (10 * h) ** 2 / (t2 - t1)
    assert abs(gamma - expected) <= 1e-2 * expected


def test_dp_equals_enumeration_sphere(sphere_small_traj):
    traj = sphere_small_traj
    t1, t2 = traj.times[0], traj.times[4]
    for x1, x2 in ((3, 5), (10, 10), (20, 17)):
        gamma, _ = hf.min_action(traj, (x1, t1), (x2, t2), window=2)
        brute = enumerate_action(traj, (x1, t1), (x2, t2), window=2)
        assert gamma == brute


def test_dp_equals_enumeration_torus(torus_small_traj):
    traj = torus_small_traj
    t1, t2 = traj.times[0], traj.times[3]
    for x1, x2 in ((0, 7), (12, 12), (6, 18)):
        gamma, _ = hf.min_action(traj, (x1, t1), (x2, t2), window=1)
        brute = enumerate_action(traj, (x1, t1), (x2, t2), window=1)
        assert gamma == brute


def test_torus_window_distances_match_dijkstra(torus_small_traj):
    # Independent oracle: heap-based shortest path over the same weighted
    # 4-neighbor graph, with intermediate offsets confined to the window box.
    import heapq

    traj = torus_small_traj
    window = 2
    k = 1
    geom_a, geom_b = traj[k].geom, traj[k + 1].geom
    phi_mid = 0.5 * (geom_a.phi + geom_b.phi)
    n, h = geom_a.n, geom_a.h
    dist_fn = hf.layer_distance_fn(traj, k, window)

    def edge(p, q):
        return float(np.exp(0.5 * (phi_mid[p] + phi_mid[q])) * h)

    def dijkstra_box(src):
        si, sj = src
        best = {(0, 0): 0.0}
        heap = [(0.0, (0, 0))]
        while heap:
            d, (a, b) = heapq.heappop(heap)
            if d > best.get((a, b), np.inf):
                continue
            for da, db in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                na, nb = a + da, b + db
                if abs(na) > window or abs(nb) > window:
                    continue
                p = ((si + a) % n, (sj + b) % n)
                q = ((si + na) % n, (sj + nb) % n)
                nd = d + edge(p, q)
                if nd < best.get((na, nb), np.inf) - 1e-15:
                    best[(na, nb)] = nd
                    heapq.heappush(heap, (nd, (na, nb)))
        return best

    for src in ((0, 0), (2, 3), (4, 1)):
        best = dijkstra_box(src)
        flat_src = src[0] * n + src[1]
        for (a, b), expected in best.items():
            q = ((src[0] + a) % n, (src[1] + b) % n)
            got = dist_fn(flat_src, q[0] * n + q[1])
            assert got == pytest.approx(expected, rel=1e-12, abs=1e-14)


def test_gamma_monotone_in_window(sphere_small_traj):
    traj = sphere_small_traj
    t1, t2 = traj.times[0], traj.times[4]
    values = [hf.min_action(traj, (2, t1), (14, t2), window=w)[0] for w in (3, 4, 6)]
    assert values[0] >= values[1] >= values[2]


def test_path_metadata(sphere_small_traj):
    traj = sphere_small_traj
    gamma, path = hf.min_action(traj, (3, traj.times[1]), (6, traj.times[3]), window=3)
    assert path.snapshots == (1, 2, 3)
    assert len(path.nodes) == 3
    assert path.action == gamma
    assert np.isfinite(gamma)


def test_times_must_be_stored(sphere_small_traj):
    traj = sphere_small_traj
    with pytest.raises(TimesNotStoredError):
        hf.min_action(traj, (0, 0.005), (3, traj.times[3]))
    with pytest.raises(TimesNotStoredError):
        hf.min_action(traj, (0, traj.times[3]), (3, traj.times[1]))  # reversed


def test_nodes_out_of_range(sphere_small_traj):
    traj = sphere_small_traj
    with pytest.raises(NodesOutOfRangeError):
        hf.min_action(traj, (40, traj.times[0]), (3, traj.times[2]))


def test_window_too_narrow(sphere_small_traj):
    traj = sphere_small_traj
    with pytest.raises(WindowTooNarrowError):
        hf.min_action(traj, (0, traj.times[2]), (20, traj.times[3]), window=2)


def test_random_pairs_certify(sphere_cosine_traj):
    rng = np.random.default_rng(3)
    pairs = hf.random_pairs(sphere_cosine_traj, 5, rng, t_min=0.02)
    assert len(pairs) == 5
    for p1, p2 in pairs:
        margin = hf.check_integrated_harnack(sphere_cosine_traj, p1, p2)
        assert margin >= -1e-2


def test_action_csv(tmp_path):
    rows = [(0, 0.1, 3, 0.2, 1.5, 0.25)]
    path = tmp_path / "action.csv"
    hf.write_action_csv(rows, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x1,t1,x2,t2,gamma,margin"
    assert lines[1] == "0,0.1,3,0.2,1.5,0.25"
