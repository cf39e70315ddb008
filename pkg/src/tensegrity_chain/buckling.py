"""Linearized buckling analysis of the straight configuration.

Around ``q = 0`` the Jacobian is ``b [S1 q | S0]^T`` and the joint torques are
``K_eq q``. Eliminating the lateral constraint ``S0^T q = 0`` leaves the
pencil ``(A Fx + B) v = 0`` with ``v = (q, Fy)``; its eigenvalues ``lambda =
-1/Fx`` give the axial loads that admit a bent equilibrium, and the largest
``|lambda|`` fixes the critical force.

``K_eq`` from the torque slope is negative for a restoring joint. By default
``B`` is built with ``|K_eq|``, which reproduces the reference eigen-table
(eigenvalues negative, ``Fy`` component sign flipped relative to the physical
problem). ``signed=True`` uses the physical sign instead; the spectrum then
flips sign and the last eigenvector component changes sign. Either way the
critical force ``-1/max|lambda|`` is the same compressive load.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chain import ChainModel
from .errors import DegenerateMode, SingularB, SingularMatrix, SpectrumCountMismatch
from .numerics import eigen_real, normalize_eigenvector, solve_linear
from .segment import equivalent_stiffness
from .shapes import shape_label, sign_pattern

ZERO_EIGENVALUE_TOL = 1e-9


@dataclass(frozen=True)
class SMatrices:
    S1: np.ndarray
    S0: np.ndarray


@dataclass(frozen=True)
class BucklingMode:
    """One nonzero eigenpair with its shape descriptors.

    ``alpha`` is the unit eigenvector ``(q_1..q_n, Fy)``; ``fy_coefficient``
    is the physical ``Fy`` per unit amplitude, i.e. ``alpha[n]`` with the sign
    fixed when ``B`` was built from ``|K_eq|``.
    """

    eigenvalue: float
    alpha: np.ndarray
    mu_x: float
    mu_eq: float
    shape: tuple[str, str]
    fy_coefficient: float


@dataclass(frozen=True)
class BucklingSolution:
    n: int
    b: float
    modes: list[BucklingMode]
    Fx0: float
    K_eq: float
    K_eq_used: float
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def dominant(self) -> BucklingMode:
        return self.modes[0]


def build_s_matrices(n: int) -> SMatrices:
    if n < 2:
        raise ValueError("n must be >= 2")
    i = np.arange(1, n + 1)
    S1 = -(2 * (n - np.maximum.outer(i, i)) + 1).astype(float)
    S0 = (2 * (n - i) + 1).astype(float)
    return SMatrices(S1, S0)


def assemble_AB(n: int, K_eq: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    if K_eq == 0 or not b > 0:
        raise ValueError("need K_eq != 0 and b > 0")
    S = build_s_matrices(n)
    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = S.S1
    B = np.zeros((n + 1, n + 1))
    B[:n, :n] = (K_eq / b) * np.eye(n)
    B[:n, n] = S.S0
    B[n, :n] = S.S0
    return A, B


def mode_deflection_factor(alpha) -> float:
    """Axial deflection per squared amplitude: ``dx / b = mu_x t^2``."""
    a = np.asarray(alpha, dtype=float)
    s = np.cumsum(a)
    return float(np.sum(s[:-1] ** 2) + 0.5 * s[-1] ** 2)


def mode_energy_factor(alpha) -> float:
    """``sum(alpha^2) / mu_x``; the stored energy is ``mu_eq |K_eq| dx / (2b)``."""
    a = np.asarray(alpha, dtype=float)
    if not np.any(a):
        raise DegenerateMode("alpha is identically zero")
    mu_x = mode_deflection_factor(a)
    if mu_x < 1e-12 * float(a @ a):
        raise DegenerateMode(f"mode gives no axial deflection (mu_x={mu_x:.3e})")
    return float(a @ a) / mu_x


def classify_mode_shape(alpha) -> tuple[str, str]:
    """Shape labels of the mirror pair ``q = +alpha t`` and ``q = -alpha t``."""
    a = np.asarray(alpha, dtype=float)
    if a.size == 4:
        return shape_label(a).value, shape_label(-a).value
    return sign_pattern(a), sign_pattern(-a)


def solve_buckling(model: ChainModel, *, signed: bool = False) -> BucklingSolution:
    """Critical force and buckling modes of the straight chain.

    Raises:
        SpectrumCountMismatch: if ``n >= 3`` and the number of nonzero
            eigenvalues differs from ``n - 1``.
    """
    springs = model.springs[0]
    if any(s != springs for s in model.springs) or not springs.is_symmetric:
        raise ValueError("buckling analysis needs identical symmetric spring controls")
    n, b = model.n, model.b
    K = equivalent_stiffness(model.geom, springs)
    if abs(K) <= 1e-12:
        raise ValueError("K_eq vanishes; the straight configuration is neutrally stable")
    K_used = K if signed else abs(K)
    A, B = assemble_AB(n, K_used, b)
    try:
        M = solve_linear(B, A)
    except SingularMatrix as exc:
        raise SingularB(str(exc)) from exc

    pairs = eigen_real(M)
    eigenvalues = np.array([p.eigenvalue for p in pairs])
    rho = abs(eigenvalues[0])
    kept = [p for p in pairs if abs(p.eigenvalue) > ZERO_EIGENVALUE_TOL * rho]
    if n >= 3 and len(kept) != n - 1:
        raise SpectrumCountMismatch(f"{len(kept)} nonzero eigenvalues for n={n}")
    if not kept:
        raise SpectrumCountMismatch("no nonzero eigenvalue")

    flip = 1.0 if K_used == K else -1.0
    modes = []
    for p in kept:
        alpha = normalize_eigenvector(p.eigenvector)
        q_part = alpha[:n]
        modes.append(
            BucklingMode(
                eigenvalue=p.eigenvalue,
                alpha=alpha,
                mu_x=mode_deflection_factor(q_part),
                mu_eq=mode_energy_factor(q_part),
                shape=classify_mode_shape(q_part),
                fy_coefficient=flip * float(alpha[n]),
            )
        )
    Fx0 = -1.0 / max(abs(m.eigenvalue) for m in modes)
    return BucklingSolution(n, b, modes, Fx0, K, K_used, eigenvalues)


@dataclass(frozen=True)
class PostBucklingState:
    q: np.ndarray
    Fx: float
    Fy: float
    energy: float


def post_buckling_prediction(
    solution: BucklingSolution, mode: BucklingMode, delta_x: float, *, branch: int = 1
) -> PostBucklingState:
    """Asymptotic equilibrium along ``mode`` at axial deflection ``delta_x``.

    ``branch=+1`` takes ``t > 0`` and ``branch=-1`` its mirror image.
    """
    if delta_x < 0:
        raise ValueError("delta_x must be >= 0")
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    n, b = solution.n, solution.b
    if mode.mu_x < 1e-12:
        raise DegenerateMode("mode gives no axial deflection")
    t = branch * math.sqrt(delta_x / (b * mode.mu_x))
    q = mode.alpha[:n] * t
    energy = mode.mu_eq * abs(solution.K_eq) * delta_x / (2 * b)
    return PostBucklingState(q, solution.Fx0, mode.fy_coefficient * t, energy)


def lateral_force_coefficient(mode: BucklingMode, b: float) -> float:
    """``Fy / sqrt(dx)`` for the ``t > 0`` branch."""
    return mode.fy_coefficient / math.sqrt(b * mode.mu_x)


def linearized_deflection(model: ChainModel, q) -> tuple[float, float]:
    """Second-order ``dx`` and first-order ``dy`` of the tip for small angles."""
    q = np.asarray(q, dtype=float)
    s = np.cumsum(q)
    b = model.b
    dx = b * (np.sum(s[:-1] ** 2) + 0.5 * s[-1] ** 2)
    dy = b * (2 * np.sum(s[:-1]) + s[-1])
    return float(dx), float(dy)
