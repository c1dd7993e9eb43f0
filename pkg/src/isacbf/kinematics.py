"""Vehicle kinematics on a straight road past the RSU.

The RSU sits at the origin with its ULA along the road (+x axis); vehicles
drive in +x at a constant lateral offset.  Angles are measured from the array
axis so that cos(theta) enters the steering phases directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SimConfig

# nominal starting positions; vehicles beyond the third extend in +x
_BASE_ANCHORS = ((15.0, 20.0), (25.0, 20.0), (35.0, 20.0))
_ANCHOR_SPACING = 10.0


@dataclass(frozen=True)
class VehicleState:
    x: float
    y: float
    v: float
    theta: float      # angle to RSU, rad, in (0, pi)
    dist: float       # range to RSU, m
    radial_v: float   # LoS-projected speed, m/s, positive = receding


def derive_geometry(x: float, y: float, v: float) -> tuple[float, float, float]:
    """Angle/range/radial-speed triple for a vehicle at (x, y) moving in +x."""
    dist = math.hypot(x, y)
    if dist == 0.0:
        raise ValueError("vehicle cannot be at the RSU origin")
    theta = math.atan2(y, x)
    radial_v = v * x / dist
    return theta, dist, radial_v


def make_state(x: float, y: float, v: float) -> VehicleState:
    theta, dist, radial_v = derive_geometry(x, y, v)
    return VehicleState(x=x, y=y, v=v, theta=theta, dist=dist, radial_v=radial_v)


def anchor_points(k: int) -> list[tuple[float, float]]:
    anchors = list(_BASE_ANCHORS)
    while len(anchors) < k:
        last = anchors[-1]
        anchors.append((last[0] + _ANCHOR_SPACING, last[1]))
    return anchors[:k]


def init_vehicles(config: SimConfig, rng: np.random.Generator) -> list[VehicleState]:
    """Place K vehicles at jittered anchors with uniform initial speeds.

    Draw order per vehicle is (dx, dy, v): two standard normals for position
    jitter, then U(v_min, v_max) for speed.
    """
    states = []
    for ax, ay in anchor_points(config.n_vehicles):
        dx = rng.standard_normal()
        dy = rng.standard_normal()
        v = rng.uniform(config.v_min, config.v_max)
        states.append(make_state(ax + dx, ay + dy, v))
    return states


def step_motion(state: VehicleState, config: SimConfig,
                rng: np.random.Generator) -> VehicleState:
    """Advance one slot: redraw the slot-average speed, move parallel to the road.

    The new speed is the average velocity within the slot, so the position
    advances with it: x' = x + v_new * slot_dur.
    """
    v_new = rng.uniform(config.v_min, config.v_max)
    return make_state(state.x + v_new * config.slot_dur, state.y, v_new)
