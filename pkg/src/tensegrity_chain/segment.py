"""Mechanics of one dual-triangle segment.

Two rigid triangles share an apex at a passive revolute joint. Each triangle
reaches a distance ``b`` along the segment axis and ``a`` to either side of it;
two linear springs join the upper and the lower base vertices. With the joint
angle ``q`` the spring lengths are ``L_i = 2c cos(theta_i / 2)`` where
``theta_1 = 2 beta + q``, ``theta_2 = 2 beta - q``.

Sign convention: ``M(q)`` is the internal restoring torque, so static
equilibrium under an external torque reads ``M(q) + M_ext = 0`` and the stored
energy satisfies ``dE/dq = -M(q)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateConfiguration

ADMISSIBLE_MARGIN = 1e-9


@dataclass(frozen=True)
class SegmentGeometry:
    """Triangle half-height ``a`` and half-length ``b``."""

    a: float
    b: float

    def __post_init__(self):
        # a == 0 is accepted: the limiting thin-triangle case still has closed forms
        if not (self.a >= 0 and self.b > 0) or not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError(f"need a >= 0 and b > 0, got a={self.a}, b={self.b}")

    @property
    def c(self) -> float:
        return math.hypot(self.a, self.b)

    @property
    def beta(self) -> float:
        return math.atan2(self.a, self.b)

    @property
    def q_limit(self) -> float:
        """Largest admissible ``|q|`` (strict)."""
        return math.pi - 2 * self.beta - ADMISSIBLE_MARGIN


@dataclass(frozen=True)
class SpringControl:
    k1: float
    L1_0: float
    k2: float
    L2_0: float

    def __post_init__(self):
        if not (self.k1 > 0 and self.k2 > 0):
            raise ValueError("spring stiffnesses must be positive")
        if not (self.L1_0 >= 0 and self.L2_0 >= 0):
            raise ValueError("free lengths must be non-negative")

    @classmethod
    def symmetric(cls, k: float, L0: float) -> "SpringControl":
        return cls(k, L0, k, L0)

    @property
    def is_symmetric(self) -> bool:
        return self.k1 == self.k2 and self.L1_0 == self.L2_0


def _require_symmetric(springs: SpringControl) -> None:
    if not springs.is_symmetric:
        raise ValueError("closed form needs k1 == k2 and L1_0 == L2_0")


def _check_admissible(geom: SegmentGeometry, q: float) -> None:
    if not abs(q) < geom.q_limit:
        raise DegenerateConfiguration(
            f"|q|={abs(q):.6g} outside admissible range {geom.q_limit:.6g}"
        )


def spring_lengths(geom: SegmentGeometry, q: float) -> tuple[float, float]:
    _check_admissible(geom, q)
    # 2c cos(beta +- q/2) expanded with c cos(beta) = b, c sin(beta) = a: exact 2b at q = 0
    cq, sq = math.cos(q / 2), math.sin(q / 2)
    return 2 * (geom.b * cq - geom.a * sq), 2 * (geom.b * cq + geom.a * sq)


def segment_torque(geom: SegmentGeometry, springs: SpringControl, q: float) -> float:
    """Restoring torque ``M1 + M2`` from the two spring forces.

    Works for asymmetric controls; in the symmetric case it coincides with
    :func:`symmetric_torque`.
    """
    L1, L2 = spring_lengths(geom, q)
    c2 = geom.c**2
    th1 = 2 * geom.beta + q
    th2 = 2 * geom.beta - q
    M1 = springs.k1 * (1 - springs.L1_0 / L1) * c2 * math.sin(th1)
    M2 = -springs.k2 * (1 - springs.L2_0 / L2) * c2 * math.sin(th2)
    return M1 + M2


def symmetric_torque(geom: SegmentGeometry, springs: SpringControl, q: float) -> float:
    """Closed-form torque for equal springs: ``2ck[c cos2b sin q - L0 cos b sin(q/2)]``."""
    _require_symmetric(springs)
    _check_admissible(geom, q)
    c, beta, k, L0 = geom.c, geom.beta, springs.k1, springs.L1_0
    return 2 * c * k * (c * math.cos(2 * beta) * math.sin(q) - L0 * math.cos(beta) * math.sin(q / 2))


def torque_derivative(geom: SegmentGeometry, springs: SpringControl, q: float) -> float:
    _require_symmetric(springs)
    _check_admissible(geom, q)
    c, beta, k, L0 = geom.c, geom.beta, springs.k1, springs.L1_0
    return c * k * (2 * c * math.cos(2 * beta) * math.cos(q) - L0 * math.cos(beta) * math.cos(q / 2))


def monotonicity_margin(geom: SegmentGeometry, springs: SpringControl) -> float:
    """``L0 - 2b(1 - (a/b)^2)``; positive when the torque-angle curve is monotonic."""
    _require_symmetric(springs)
    return springs.L1_0 - 2 * geom.b * (1 - (geom.a / geom.b) ** 2)


def equivalent_stiffness(geom: SegmentGeometry, springs: SpringControl) -> float:
    """Joint stiffness ``K_eq = dM/dq`` at ``q = 0``: ``k[2(b^2 - a^2) - b L0]``.

    Negative for a restoring joint. Has torque units (force x length); for
    ``b = 1`` it reduces to ``(k/b)[2(b^2 - a^2) - b L0]``.
    """
    _require_symmetric(springs)
    a, b, k, L0 = geom.a, geom.b, springs.k1, springs.L1_0
    return k * (2 * (b * b - a * a) - b * L0)


def segment_energy(geom: SegmentGeometry, springs: SpringControl, q: float) -> float:
    L1, L2 = spring_lengths(geom, q)
    return 0.5 * springs.k1 * (L1 - springs.L1_0) ** 2 + 0.5 * springs.k2 * (L2 - springs.L2_0) ** 2

