"""Equilibria of the loaded chain by the energy method.

The end-effector is held at a prescribed deflection and the joint angles
settle where the elastic energy is stationary on that constraint set; the
Lagrange multipliers are the end force. For ``n = 4`` the constraint can be
solved in closed form for any two angles given the other two, which turns
the energy into a function of two variables that can be tabulated.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from . import chain
from .buckling import solve_buckling
from .chain import ChainModel, Deflection, EndLoad
from .errors import (
    DegenerateConfiguration,
    Indeterminate,
    NoConvergence,
    NoEquilibriumFound,
    RankDeficient,
    SingularJacobian,
    TensegrityError,
)
from .numerics import MERGE_RADIUS, central_jacobian, minimize_multistart, newton_solve
from .shapes import Shape, shape_label

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8
HESSIAN_TOL = 1e-8
SEED_SIGMA = 0.2
HESSIAN_STEP = 1e-6


class Stability(str, Enum):
    STABLE = "StableMinimum"
    SADDLE = "Saddle"
    MAXIMUM = "Maximum"


@dataclass(frozen=True)
class Equilibrium:
    q: np.ndarray
    load: EndLoad
    deflection: Deflection
    energy: float
    stability: Stability
    shape: Shape
    hessian_eigenvalues: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))


# -- two-link reduction -------------------------------------------------------


def _wrap(angle):
    return (np.asarray(angle) + np.pi) % (2 * np.pi) - np.pi


def _rot(angle, v):
    c, s = np.cos(angle), np.sin(angle)
    return c * v[0] - s * v[1], s * v[0] + c * v[1]


def _two_link_solutions(model: ChainModel, known: dict[int, np.ndarray], target: Sequence[float]):
    """Vectorized closed-form completion of the two unknown angles.

    Returns the two unknown indices and, per elbow branch, the completed
    angle arrays plus a reachability mask.
    """
    n, b = model.n, model.b
    u1, u2 = sorted(set(range(n)) - set(known))
    shape = np.broadcast(*known.values()).shape
    known = {i: np.broadcast_to(np.asarray(v, float), shape) for i, v in known.items()}
    eta = model.eta

    # pose of joint u1 from the fixed angles before it
    px = np.full(shape, b)
    py = np.zeros(shape)
    phi = np.zeros(shape)
    for l in range(u1):
        phi = phi + known[l]
        px = px + 2 * b * np.cos(phi)
        py = py + 2 * b * np.sin(phi)

    # rigid link u1 -> joint u2, in the frame after rotating joint u1
    w1x, w1y, psi = np.zeros(shape), np.zeros(shape), np.zeros(shape)
    for l in range(u1, u2):
        if l > u1:
            psi = psi + known[l]
        w1x = w1x + 2 * b * np.cos(psi)
        w1y = w1y + 2 * b * np.sin(psi)
    between = psi

    # rigid tail joint u2 -> tip
    w2x, w2y, psi = np.zeros(shape), np.zeros(shape), np.zeros(shape)
    for l in range(u2, n):
        if l > u2:
            psi = psi + known[l]
        w2x = w2x + eta[l] * b * np.cos(psi)
        w2y = w2y + eta[l] * b * np.sin(psi)

    tx = model.reach - target[0]
    ty = target[1]
    dx, dy = _rot(-phi, (tx - px, ty - py))
    l1 = np.hypot(w1x, w1y)
    l2 = np.hypot(w2x, w2y)
    g1 = np.arctan2(w1y, w1x)
    g2 = np.arctan2(w2y, w2x)
    cos_gamma = (dx * dx + dy * dy - l1 * l1 - l2 * l2) / (2 * l1 * l2)
    reachable = np.abs(cos_gamma) <= 1.0
    gamma0 = np.arccos(np.clip(cos_gamma, -1.0, 1.0))

    branches = []
    for sign in (1.0, -1.0):
        gamma = sign * gamma0
        A = np.arctan2(dy, dx) - np.arctan2(l2 * np.sin(gamma), l1 + l2 * np.cos(gamma))
        theta1 = _wrap(A - g1)
        theta2 = _wrap(A + gamma - g2 - theta1 - between)
        branches.append((theta1, theta2))
    return (u1, u2), branches, reachable


def reduce_two_link(
    model: ChainModel, known: tuple[int, float, int, float], target: Sequence[float]
) -> list[np.ndarray]:
    """Full configurations matching ``target`` with two angles prescribed.

    ``known = (i, q_i, j, q_j)``. Returns zero, one or two configurations
    (elbow branches; a single one on the workspace boundary). Configurations
    outside the admissible joint range are discarded.
    """
    if model.n != 4:
        raise ValueError("two-link reduction is implemented for n = 4")
    i, qi, j, qj = known
    if i == j:
        raise ValueError("known indices must differ")
    (u1, u2), branches, reachable = _two_link_solutions(model, {i: qi, j: qj}, target)
    if not bool(reachable):
        return []
    out: list[np.ndarray] = []
    for t1, t2 in branches:
        q = np.zeros(4)
        q[i], q[j], q[u1], q[u2] = qi, qj, float(t1), float(t2)
        if np.all(np.abs(q) < model.geom.q_limit) and all(np.linalg.norm(q - o) > 1e-12 for o in out):
            out.append(q)
    return out


def _energy_grid(model: ChainModel, Q: list[np.ndarray]) -> np.ndarray:
    """Total energy over stacked angle arrays; NaN where a spring collapses."""
    g = model.geom
    E = np.zeros_like(Q[0])
    bad = np.zeros(Q[0].shape, dtype=bool)
    for s, q in zip(model.springs, Q):
        bad |= ~(np.abs(q) < g.q_limit)
        L1 = 2 * (g.b * np.cos(q / 2) - g.a * np.sin(q / 2))
        L2 = 2 * (g.b * np.cos(q / 2) + g.a * np.sin(q / 2))
        E = E + 0.5 * s.k1 * (L1 - s.L1_0) ** 2 + 0.5 * s.k2 * (L2 - s.L2_0) ** 2
    E[bad] = np.nan
    return E


@dataclass(frozen=True)
class GridSpec:
    lo: float = -math.pi / 2
    hi: float = math.pi / 2
    num: int = 201

    def __post_init__(self):
        if self.num < 2 or not self.hi > self.lo:
            raise ValueError("grid needs num >= 2 and hi > lo")

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.num)

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.num - 1)


@dataclass(frozen=True)
class EnergyLandscape:
    """Energy over two free angles, the other two solved from the tip constraint.

    ``sheets[k]`` holds the energy on elbow branch ``k`` (NaN where
    infeasible); ``energy`` is the per-cell minimum over branches and
    ``branch`` the branch attaining it (-1 when infeasible).
    """

    pair: tuple[int, int]
    axis_i: np.ndarray
    axis_j: np.ndarray
    sheets: np.ndarray
    configs: np.ndarray = field(repr=False)

    @property
    def feasible(self) -> np.ndarray:
        return np.any(np.isfinite(self.sheets), axis=0)

    @property
    def energy(self) -> np.ndarray:
        s = np.where(np.isfinite(self.sheets), self.sheets, np.inf)
        E = s.min(axis=0)
        return np.where(np.isfinite(E), E, np.nan)

    @property
    def branch(self) -> np.ndarray:
        s = np.where(np.isfinite(self.sheets), self.sheets, np.inf)
        br = s.argmin(axis=0)
        return np.where(self.feasible, br, -1)


def energy_landscape(
    model: ChainModel, target: Sequence[float], pair: tuple[int, int] = (0, 3), grid: GridSpec = GridSpec()
) -> EnergyLandscape:
    if model.n != 4:
        raise ValueError("energy landscapes are implemented for n = 4")
    i, j = pair
    if i == j:
        raise ValueError("pair indices must differ")
    ax = grid.axis
    Qi, Qj = np.meshgrid(ax, ax, indexing="ij")
    (u1, u2), branches, reachable = _two_link_solutions(model, {i: Qi, j: Qj}, target)
    sheets = np.empty((2,) + Qi.shape)
    configs = np.empty((2,) + Qi.shape + (4,))
    for k, (t1, t2) in enumerate(branches):
        Q = [None] * 4
        Q[i], Q[j], Q[u1], Q[u2] = Qi, Qj, t1, t2
        E = _energy_grid(model, Q)
        E[~reachable] = np.nan
        sheets[k] = E
        configs[k] = np.stack(Q, axis=-1)
    return EnergyLandscape((i, j), ax, ax, sheets, configs)


@dataclass(frozen=True)
class CriticalCell:
    branch: int
    index: tuple[int, int]
    kind: str  # "min", "max" or "saddle"
    q: np.ndarray
    energy: float


def _nearest_corner(gi, gj, cells, offsets, gnorm) -> int:
    """Corner of a 2x2 block closest to the zero of the fitted linear gradient field."""
    X = np.array([[1.0, di, dj] for di, dj in offsets])
    G = np.array([[gi[c], gj[c]] for c in cells])
    coef, *_ = np.linalg.lstsq(X, G, rcond=None)
    H = coef[1:].T  # gradient change per unit step along (i, j)
    try:
        d = np.clip(np.linalg.solve(H, -coef[0]), 0.0, 1.0)
    except np.linalg.LinAlgError:
        return int(np.argmin(gnorm))
    return offsets.index((int(round(d[0])), int(round(d[1]))))


def critical_cells(landscape: EnergyLandscape) -> list[CriticalCell]:
    """Grid cells of each branch sheet that contain a zero of the energy gradient.

    The gradient (central differences on the sheet) is followed around every
    2x2 block of feasible cells; a winding number of -1 marks a saddle and +1
    an extremum, told apart by whether the gradient points out of the block
    (minimum) or into it (maximum). The reported cell is the block corner
    nearest the zero of a linear fit of the gradient over the four corners.
    """
    h_i = landscape.axis_i[1] - landscape.axis_i[0]
    h_j = landscape.axis_j[1] - landscape.axis_j[0]
    out = []
    for k, E in enumerate(landscape.sheets):
        gi, gj = np.gradient(E, h_i, h_j)
        ang = np.arctan2(gj, gi)
        # corners in counter-clockwise order: (0,0) (1,0) (1,1) (0,1)
        corners = [(slice(None, -1), slice(None, -1)), (slice(1, None), slice(None, -1)),
                   (slice(1, None), slice(1, None)), (slice(None, -1), slice(1, None))]
        a = [ang[c] for c in corners]
        winding = sum(_wrap(a[(m + 1) % 4] - a[m]) for m in range(4)) / (2 * np.pi)
        ok = np.all([np.isfinite(gi[c]) & np.isfinite(gj[c]) for c in corners], axis=0)
        index = np.where(ok, np.rint(winding), 0).astype(int)
        offsets = [(0, 0), (1, 0), (1, 1), (0, 1)]
        for a0, c0 in zip(*np.nonzero(index != 0)):
            cells = [(int(a0) + di, int(c0) + dj) for di, dj in offsets]
            g = [np.hypot(gi[c], gj[c]) for c in cells]
            if index[a0, c0] < 0:
                kind = "saddle"
            else:
                # outward flux of the gradient around the block
                flux = sum(gi[c] * (di - 0.5) * h_i + gj[c] * (dj - 0.5) * h_j for c, (di, dj) in zip(cells, offsets))
                kind = "min" if flux > 0 else "max"
            best = cells[_nearest_corner(gi, gj, cells, offsets, g)]
            out.append(CriticalCell(k, best, kind, landscape.configs[k][best].copy(), float(E[best])))
    return out


def landscape_minima(
    model: ChainModel, target: Sequence[float], pair: tuple[int, int] = (0, 3), *, n_starts: int = 40, seed: int = 0
) -> list[np.ndarray]:
    """Local minima of the reduced two-variable energy, searched by multistart.

    The reduced energy is the lower of the two elbow branches. Outside the
    reachable set the clipped completion is used with a smooth penalty on
    the tip error, which pulls the minimizer back inside. Returns full
    configurations.
    """
    if model.n != 4:
        raise ValueError("reduced energy is implemented for n = 4")
    i, j = pair
    lim = min(model.geom.q_limit, math.pi / 2)

    def completions(x):
        (u1, u2), branches, _ = _two_link_solutions(model, {i: x[0], j: x[1]}, target)
        for t1, t2 in branches:
            q = np.zeros(4)
            q[i], q[j], q[u1], q[u2] = x[0], x[1], float(t1), float(t2)
            yield q

    def reduced(x):
        best = math.inf
        for q in completions(x):
            err = np.hypot(*np.subtract(chain.deflection(model, q), target))
            try:
                best = min(best, chain.total_energy(model, q) + 1e4 * err**2)
            except DegenerateConfiguration:
                pass
        return best if math.isfinite(best) else 1e6

    found = []
    for x in minimize_multistart(reduced, [(-lim, lim)] * 2, n_starts, seed=seed):
        qs = reduce_two_link(model, (i, x[0], j, x[1]), target)
        if qs:
            found.append(min(qs, key=lambda q: chain.total_energy(model, q)))
    return found


# -- full equilibrium solve ----------------------------------------------------


def solve_equilibrium(model: ChainModel, target: Sequence[float], q0, F0=None):
    """Newton solve of torque balance plus tip constraint from ``(q0, F0)``.

    Returns ``(q, F)``.
    """
    n = model.n
    q0 = np.asarray(q0, dtype=float)
    if F0 is None:
        try:
            F0 = chain.end_force_from_config(model, q0)
        except (RankDeficient, DegenerateConfiguration):
            F0 = (0.0, 0.0)

    def residual(z):
        return chain.equilibrium_residual(model, z[:n], z[n:], target)

    z = newton_solve(residual, np.concatenate([q0, F0]))
    return z[:n], z[n:]


def projected_hessian(model: ChainModel, q, F) -> np.ndarray:
    """Second variation of the energy along the tip-constraint manifold.

    Hessian of ``E - F . p`` (finite differences of its analytic gradient)
    projected onto the null space of the position Jacobian.
    """
    q = np.asarray(q, dtype=float)
    F = np.asarray(F, dtype=float)

    def lagrangian_gradient(x):
        return chain.energy_gradient(model, x) - chain.jacobian(model, x).T @ F

    H = central_jacobian(lagrangian_gradient, q, h=HESSIAN_STEP)
    H = 0.5 * (H + H.T)
    Z = scipy.linalg.null_space(chain.jacobian(model, q))
    return Z.T @ H @ Z


def classify(model: ChainModel, q, F) -> tuple[Stability, np.ndarray]:
    """Stability from the projected Hessian spectrum.

    Raises:
        Indeterminate: if an eigenvalue lies within +-1e-8.
    """
    Hp = projected_hessian(model, q, F)
    w = np.linalg.eigvalsh(Hp) if Hp.size else np.zeros(0)
    if np.any(np.abs(w) <= HESSIAN_TOL):
        raise Indeterminate(f"projected Hessian eigenvalues {w}")
    if np.all(w > 0):
        return Stability.STABLE, w
    if np.all(w < 0):
        return Stability.MAXIMUM, w
    return Stability.SADDLE, w


def _straight(model: ChainModel) -> Equilibrium:
    q = np.zeros(model.n)
    return Equilibrium(
        q, EndLoad(0.0, 0.0), Deflection(0.0, 0.0), chain.total_energy(model, q), Stability.STABLE, Shape.STRAIGHT
    )


def _seeds(model: ChainModel, target: Sequence[float], n_random: int, rng: np.random.Generator) -> list[np.ndarray]:
    n, b = model.n, model.b
    seeds: list[np.ndarray] = []
    dx = max(float(target[0]), 0.0)
    try:
        sol = solve_buckling(model)
    except (ValueError, TensegrityError):
        sol = None
    if sol is not None and dx > 0:
        for mode in sol.modes:
            t = math.sqrt(dx / (b * mode.mu_x))
            seeds += [mode.alpha[:n] * t, -mode.alpha[:n] * t]
    if n == 4:
        land = energy_landscape(model, target, (0, 3), GridSpec(num=101))
        seeds += [c.q for c in critical_cells(land)]
    scale = SEED_SIGMA
    if dx > 0:
        scale = min(SEED_SIGMA, 2 * math.sqrt(dx / b))
    seeds += list(rng.normal(0.0, scale, size=(n_random, n)))
    return seeds


def find_equilibria(
    model: ChainModel,
    target: Sequence[float],
    *,
    seeds: Iterable | None = None,
    n_random: int = 24,
    seed: int = 0,
) -> list[Equilibrium]:
    """All equilibria reachable from the default and extra seeds.

    Seeds: buckling mode shapes scaled to the target, landscape critical
    cells for ``n = 4``, and Gaussian small-angle perturbations. Each seed is
    refined by Newton on the full system, then deduplicated and classified.
    Sorted by energy; mirror ties put ``q_1 < 0`` first.

    Raises:
        NoEquilibriumFound: if no seed converges.
    """
    if model.n < 2:
        raise ValueError("need n >= 2")
    target = Deflection(float(target[0]), float(target[1]))
    if target.dx == 0 and target.dy == 0:
        return [_straight(model)]
    if target.dx < 0:
        raise NoEquilibriumFound("tip cannot move beyond the straight reach")
    rng = np.random.default_rng(seed)
    starts = [np.asarray(s, float) for s in (seeds or [])] + _seeds(model, target, n_random, rng)

    found: list[Equilibrium] = []
    for q0 in starts:
        try:
            q, F = solve_equilibrium(model, target, q0)
        except (NoConvergence, SingularJacobian, TensegrityError) as exc:
            log.debug("seed %s failed: %s", q0, exc)
            continue
        q = _wrap(q)
        if np.any(np.abs(q) >= model.geom.q_limit):
            continue
        if any(np.linalg.norm(q - e.q) <= MERGE_RADIUS for e in found):
            continue
        res = chain.equilibrium_residual(model, q, F, target)
        if np.max(np.abs(res)) > RESIDUAL_TOL:
            continue
        try:
            stability, w = classify(model, q, F)
        except Indeterminate as exc:
            log.warning("skipping degenerate critical point: %s", exc)
            continue
        found.append(
            Equilibrium(
                q,
                EndLoad(float(F[0]), float(F[1])),
                chain.deflection(model, q),
                chain.total_energy(model, q),
                stability,
                shape_label(q),
                w,
            )
        )
    if not found:
        raise NoEquilibriumFound(f"no seed converged for target {tuple(target)}")
    return sorted(found, key=lambda e: (round(e.energy, 10), e.q[0]))


def global_minimum(equilibria: Sequence[Equilibrium]) -> Equilibrium:
    stable = [e for e in equilibria if e.stability is Stability.STABLE]
    if not stable:
        raise NoEquilibriumFound("no stable equilibrium")
    return min(stable, key=lambda e: (round(e.energy, 10), e.q[0]))


@dataclass(frozen=True)
class SweepRow:
    deflection: Deflection
    load: EndLoad | None
    energy: float
    shape: str
    stability: str
    status: str
    q: np.ndarray | None = field(repr=False, default=None)


def force_deflection_sweep(
    model: ChainModel, path: Sequence[Sequence[float]], *, n_random: int = 24, seed: int = 0
) -> list[SweepRow]:
    """Force of the globally minimal stable equilibrium along a deflection path.

    Each point is seeded with the previous solution (scaled to the new
    deflection) on top of the usual multistart seeds; the reported state is
    the lowest-energy stable equilibrium among everything found.
    """
    rows: list[SweepRow] = []
    prev: np.ndarray | None = None
    prev_dx = 0.0
    for p in path:
        target = Deflection(float(p[0]), float(p[1]))
        extra = []
        if prev is not None and prev_dx > 0 and target.dx > 0:
            extra.append(prev * math.sqrt(target.dx / prev_dx))
        try:
            eqs = find_equilibria(model, target, seeds=extra, n_random=n_random, seed=seed)
            best = global_minimum(eqs)
        except NoEquilibriumFound as exc:
            rows.append(SweepRow(target, None, math.nan, "", "", f"gap: {exc}"))
            continue
        rows.append(SweepRow(target, best.load, best.energy, best.shape.value, best.stability.value, "ok", best.q))
        prev, prev_dx = best.q, target.dx
    return rows
