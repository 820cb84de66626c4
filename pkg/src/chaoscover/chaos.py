"""Arnold system coupled to unicycle kinematics, integrated with RK4.

The augmented state is ``(x, y, z, X, Y)``: three Arnold coordinates plus
the robot position in the map frame. The robot heading is the Arnold
coordinate selected by the DS index, so the robot moves at constant speed
``v`` in the direction given by that coordinate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class DsIndex(enum.IntEnum):
    X = 0
    Y = 1
    Z = 2

    def alternates(self) -> tuple["DsIndex", "DsIndex"]:
        """The other two indices in fixed cyclic order (x -> y, z; y -> z, x; ...)."""
        return DsIndex((self + 1) % 3), DsIndex((self + 2) % 3)


@dataclass(frozen=True)
class ArnoldParams:
    A: float = 0.5
    B: float = 0.25
    C: float = 0.25
    v: float = 0.22
    dt: float = 2.75

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.v > 0:
            raise ValueError(f"v must be positive, got {self.v}")


class AugmentedState(NamedTuple):
    x: float
    y: float
    z: float
    X: float
    Y: float

    @property
    def ds(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    @property
    def position(self) -> tuple[float, float]:
        return (self.X, self.Y)


DEFAULT_IC = (0.0, 1.0, 0.0)


def derivatives(s, p: ArnoldParams, idx=DsIndex.X, v=None):
    """Time derivative of the augmented state."""
    x, y, z = s[0], s[1], s[2]
    speed = p.v if v is None else v
    theta = (x, y, z)[idx]
    return (
        p.A * math.sin(z) + p.C * math.cos(y),
        p.B * math.sin(x) + p.C * math.cos(z),
        p.C * math.sin(y) + p.B * math.cos(x),
        speed * math.cos(theta),
        speed * math.sin(theta),
    )


def rk4_step(s, p: ArnoldParams, idx=DsIndex.X, dt=None) -> AugmentedState:
    """Advance the joint 5-D system by one RK4 step (``p.dt`` unless given)."""
    h = p.dt if dt is None else dt
    s = tuple(s)
    k1, k2, k3, k4 = rk4_stages(s, p, idx, h)
    return AugmentedState(*(
        a + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        for a, b1, b2, b3, b4 in zip(s, k1, k2, k3, k4)
    ))


def rk4_stages(s, p: ArnoldParams, idx=DsIndex.X, dt=None):
    """The four stage derivatives of one RK4 step, for invariant checks."""
    h = p.dt if dt is None else dt
    s = tuple(s)
    k1 = derivatives(s, p, idx)
    k2 = derivatives([a + 0.5 * h * b for a, b in zip(s, k1)], p, idx)
    k3 = derivatives([a + 0.5 * h * b for a, b in zip(s, k2)], p, idx)
    k4 = derivatives([a + h * b for a, b in zip(s, k3)], p, idx)
    return k1, k2, k3, k4


def integrate(s0, p: ArnoldParams, n_steps: int, idx=DsIndex.X, dt=None) -> np.ndarray:
    """Trajectory of ``n_steps`` RK4 steps; row 0 is ``s0``."""
    out = np.empty((n_steps + 1, 5))
    s = AugmentedState(*s0)
    out[0] = s
    for i in range(1, n_steps + 1):
        s = rk4_step(s, p, idx, dt)
        out[i] = s
    return out


def sensitivity_probe(s1, s2, p: ArnoldParams, idx=DsIndex.X, horizon: int = 1000) -> np.ndarray:
    """Euclidean separation of the Arnold coordinates of two orbits, per step.

    Element 0 is the initial separation; element ``k`` the separation after
    ``k`` steps.
    """
    a = integrate(s1, p, horizon, idx)
    b = integrate(s2, p, horizon, idx)
    return np.linalg.norm(a[:, :3] - b[:, :3], axis=1)
