"""Kinematics and elastostatics of an n-segment serial chain.

The base is fixed at the origin and the straight configuration ``q = 0``
places the end-effector at ``(2nb, 0)``. The first joint sits at ``(b, 0)``,
consecutive joints are ``2b`` apart, and the tip is ``b`` past the last joint.

Loads are forces applied by the environment on the end-effector; the static
balance is ``M(q) + J^T F = 0`` with ``M`` the vector of restoring joint
torques.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .numerics import pseudo_inverse_transpose_apply
from .segment import SegmentGeometry, SpringControl, segment_energy, segment_torque


class EndLoad(NamedTuple):
    Fx: float
    Fy: float


class Deflection(NamedTuple):
    """End-effector displacement; ``dx`` points toward the base."""

    dx: float
    dy: float


@dataclass(frozen=True)
class ChainModel:
    n: int
    geom: SegmentGeometry
    springs: tuple[SpringControl, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        object.__setattr__(self, "springs", tuple(self.springs))
        if len(self.springs) != self.n:
            raise ValueError(f"expected {self.n} spring controls, got {len(self.springs)}")

    @classmethod
    def uniform(cls, n: int, a: float, b: float, k: float, L0: float) -> "ChainModel":
        return cls(n, SegmentGeometry(a, b), (SpringControl.symmetric(k, L0),) * n)

    @property
    def b(self) -> float:
        return self.geom.b

    @property
    def reach(self) -> float:
        return 2 * self.n * self.geom.b

    @property
    def eta(self) -> np.ndarray:
        eta = np.full(self.n, 2.0)
        eta[-1] = 1.0
        return eta


def _q(model: ChainModel, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (model.n,):
        raise ValueError(f"expected {model.n} joint angles, got shape {q.shape}")
    return q


def forward_kinematics(model: ChainModel, q) -> tuple[float, float]:
    q = _q(model, q)
    S = np.cumsum(q)
    b = model.b
    x = b * (1.0 + float(np.sum(model.eta * np.cos(S))))
    y = b * float(np.sum(model.eta * np.sin(S)))
    return x, y


def deflection(model: ChainModel, q) -> Deflection:
    x, y = forward_kinematics(model, q)
    return Deflection(model.reach - x, y)


def joint_positions(model: ChainModel, q) -> np.ndarray:
    """Base, joints and tip as an ``(n + 2, 2)`` array (for drawing)."""
    q = _q(model, q)
    S = np.cumsum(q)
    steps = model.b * model.eta[:, None] * np.column_stack([np.cos(S), np.sin(S)])
    pts = np.vstack([[0.0, 0.0], [model.b, 0.0], [model.b, 0.0] + np.cumsum(steps, axis=0)])
    return pts


def jacobian(model: ChainModel, q) -> np.ndarray:
    """``d(x, y)/dq`` as a 2 x n matrix."""
    q = _q(model, q)
    S = np.cumsum(q)
    b = model.b
    # column m sums links m..n
    sx = np.cumsum((model.eta * np.sin(S))[::-1])[::-1]
    cx = np.cumsum((model.eta * np.cos(S))[::-1])[::-1]
    return b * np.vstack([-sx, cx])


def joint_torques(model: ChainModel, q) -> np.ndarray:
    q = _q(model, q)
    return np.array([segment_torque(model.geom, s, qi) for s, qi in zip(model.springs, q)])


def total_energy(model: ChainModel, q) -> float:
    q = _q(model, q)
    return float(sum(segment_energy(model.geom, s, qi) for s, qi in zip(model.springs, q)))


def energy_gradient(model: ChainModel, q) -> np.ndarray:
    return -joint_torques(model, q)


def equilibrium_residual(model: ChainModel, q, load: Sequence[float], target: Sequence[float]) -> np.ndarray:
    """Torque balance (n rows) followed by the tip-position mismatch (2 rows)."""
    q = _q(model, q)
    F = np.asarray(load, dtype=float)
    torque = joint_torques(model, q) + jacobian(model, q).T @ F
    d = deflection(model, q)
    return np.concatenate([torque, [d.dx - target[0], d.dy - target[1]]])


def end_force_from_config(model: ChainModel, q) -> EndLoad:
    """Least-squares end force balancing the joint torques: ``-(J J^T)^-1 J M``."""
    q = _q(model, q)
    F = -pseudo_inverse_transpose_apply(jacobian(model, q), joint_torques(model, q))
    return EndLoad(float(F[0]), float(F[1]))
