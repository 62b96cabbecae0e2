#!/usr/bin/env python3
"""Regenerates the JSON fixtures in this directory.

    python3 scenarios/generate.py
"""
import json
import math
import os

HERE = os.path.dirname(os.path.abspath(__file__))


def arc(cx, cy, r, a0, a1, n=24):
    return [[round(cx + r * math.cos(a0 + (a1 - a0) * k / n), 6),
             round(cy + r * math.sin(a0 + (a1 - a0) * k / n), 6)] for k in range(n + 1)]


def rot(p, quarter):
    x, y = p
    for _ in range(quarter % 4):
        x, y = -y, x
    return [x, y]


def four_way():
    # Approach from the south heading north; the other arms are rotations.
    # Lanes sit right of the centerline: inner 2 m (left turn), 5 m
    # (straight), 8 m (right turn). Box half-size 12 m, arms 60 m.
    B, L = 12.0, 60.0
    d_left, d_straight, d_right = 2.0, 5.0, 8.0
    base = {
        "straight": [[d_straight, -L], [d_straight, L]],
        "left": [[d_left, -L], [d_left, -B]]
        + arc(-B, -B, B + d_left, 0.0, math.pi / 2)[1:-1]
        + [[-B, d_left], [-L, d_left]],
        "right": [[d_right, -L], [d_right, -B]]
        + arc(B, -B, B - d_right, math.pi, math.pi / 2)[1:-1]
        + [[B, -d_right], [L, -d_right]],
    }
    routes = []
    rid = 0
    for rank_base, kind in ((0, "straight"), (4, "left"), (8, "right")):
        for q in range(4):
            routes.append({
                "id": rid,
                "polyline": [rot(p, q) for p in base[kind]],
                "lane_width": 3.0,
                "speed_limit": 13.9,
                "priority_rank": rank_base + q,
            })
            rid += 1
    spawns = []
    speeds = [12.0, 10.0, 11.0, 9.0, 13.0]
    for r in range(12):
        spawns.append({"tick": (r * 7) % 24, "route_id": r, "class": "car",
                       "desired_speed": speeds[r % 5]})
    extra = [(0, "bus"), (1, "car"), (2, "police"), (3, "car"),
             (4, "car"), (5, "bus"), (6, "car"), (7, "police")]
    for k, (r, cls) in enumerate(extra):
        spawns.append({"tick": 40 + 5 * k, "route_id": r, "class": cls,
                       "desired_speed": speeds[(k + 2) % 5]})
    return {
        "resolution": 1.0,
        # adjacent left-turn arcs cross at a shallow lattice angle and share
        # three consecutive nodes
        "max_shared_run": 3,
        "routes": routes,
        "spawns": spawns,
        "params": {"tick_dt": 1.0 / 24.0, "seed": 7},
        "intersection_pads": [{"center": [0.0, 0.0], "width": 2 * B, "length": 2 * B}],
    }


def crossing():
    return {
        "resolution": 1.0,
        "routes": [
            {"id": 0, "polyline": [[-50.0, 0.0], [50.0, 0.0]], "speed_limit": 15.0,
             "priority_rank": 0},
            {"id": 1, "polyline": [[0.0, -50.0], [0.0, 50.0]], "speed_limit": 15.0,
             "priority_rank": 1},
        ],
        "spawns": [
            {"tick": 0, "route_id": 0, "class": "car", "desired_speed": 10.0},
            {"tick": 0, "route_id": 1, "class": "car", "desired_speed": 10.0},
        ],
        "params": {"tick_dt": 1.0 / 24.0},
        "intersection_pads": [{"center": [0.0, 0.0], "width": 6.0, "length": 6.0}],
    }


def starvation():
    # Route 0 carries a dense stream that always sweeps the crossing; the
    # single vehicle on route 1 only gets through by aging.
    spawns = [{"tick": 12 * k, "route_id": 0, "class": "car", "desired_speed": 10.0}
              for k in range(170)]
    spawns.insert(3, {"tick": 30, "route_id": 1, "class": "car", "desired_speed": 10.0})
    return {
        "resolution": 1.0,
        "routes": [
            {"id": 0, "polyline": [[-60.0, 0.0], [60.0, 0.0]], "speed_limit": 10.0,
             "priority_rank": 0},
            {"id": 1, "polyline": [[0.0, -40.0], [0.0, 40.0]], "speed_limit": 10.0,
             "priority_rank": 1},
        ],
        "spawns": spawns,
        "params": {"tick_dt": 1.0 / 24.0, "aging_enabled": False, "aging_max_wait": 120},
    }


def perf_grid(vehicles_per_route=10):
    # 50 eastbound and 50 northbound roads, 10 m apart, with 50 m of queue
    # room before the first crossing so every spawn fits.
    routes = []
    for k in range(50):
        routes.append({"id": k, "polyline": [[-50.0, 10.0 * k], [500.0, 10.0 * k]],
                       "speed_limit": 12.0, "priority_rank": 0})
    for k in range(50):
        routes.append({"id": 50 + k,
                       "polyline": [[10.0 * k + 5.0, -55.0], [10.0 * k + 5.0, 495.0]],
                       "speed_limit": 12.0, "priority_rank": 1})
    spawns = []
    for n in range(vehicles_per_route):
        for r in range(100):
            spawns.append({"tick": 0, "route_id": r, "class": "car",
                           "desired_speed": 8.0 + (r + n) % 5})
    return {
        "resolution": 1.0,
        "routes": routes,
        "spawns": spawns,
        "params": {"tick_dt": 1.0 / 24.0, "aging_enabled": True, "aging_max_wait": 96},
    }


def overlap_bad():
    return {
        "resolution": 1.0,
        "routes": [
            {"id": 0, "polyline": [[0.0, 0.0], [20.0, 0.0]], "speed_limit": 10.0},
            {"id": 1, "polyline": [[5.0, 0.0], [15.0, 0.0]], "speed_limit": 10.0},
        ],
    }


def main():
    fixtures = {
        "four_way.json": four_way(),
        "crossing.json": crossing(),
        "starvation.json": starvation(),
        "perf_grid.json": perf_grid(),
        "overlap_bad.json": overlap_bad(),
    }
    for name, doc in fixtures.items():
        with open(os.path.join(HERE, name), "w") as f:
            json.dump(doc, f, indent=1)
            f.write("\n")


if __name__ == "__main__":
    main()
