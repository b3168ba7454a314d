"""Shared test oracles."""

import numpy as np

import harnackflow as hf


def enumerate_action(traj, point1, point2, window):
    """Brute-force minimum over all window-constrained node paths.

    Costs accumulate exactly like the DP does (depart + squared distance
    + arrival), using the shared layer distances, so the minimum must
    equal the DP value bit for bit.
    """
    (x1, t1), (x2, t2) = point1, point2
    times = traj.times
    k1 = int(np.argmin(np.abs(times - t1)))
    k2 = int(np.argmin(np.abs(times - t2)))
    n_nodes = traj.geom.node_count
    dt = traj.dt_out
    layers = []
    for k in range(k1, k2):
        dist = hf.layer_distance_fn(traj, k, window)
        r_a = traj[k].geom.scalar_curvature().ravel()
        r_b = traj[k + 1].geom.scalar_curvature().ravel()
        layers.append((dist, r_a, r_b))
    best = np.inf
    stack = [(x1, 0.0, 0)]
    while stack:
        node, cost, depth = stack.pop()
        if depth == len(layers):
            if node == x2 and cost < best:
                best = cost
            continue
        dist, r_a, r_b = layers[depth]
        for q in range(n_nodes):
            d = dist(node, q)
            if not np.isfinite(d):
                continue
            step_cost = ((cost + 0.5 * r_a[node] * dt) + d * d / dt) + 0.5 * r_b[q] * dt
            stack.append((q, step_cost, depth + 1))
    return best
