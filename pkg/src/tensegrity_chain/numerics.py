"""Small dense numerical kernel: linear solves, pseudo-inverse, real eigenpairs,
multistart minimization and Newton's method.

Matrices here are tiny (at most a few dozen rows), so everything is dense and
LAPACK-backed through numpy/scipy. The wrappers exist to pin down the
conventions the rest of the package relies on: error types, eigenvector
normalization and ordering, finite-difference steps.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import (
    ComplexSpectrum,
    NoConvergence,
    RankDeficient,
    SingularJacobian,
    SingularMatrix,
    TensegrityError,
)

log = logging.getLogger(__name__)

GRADIENT_STEP = 1e-6
JACOBIAN_STEP = 1e-7
PIVOT_TOL = 1e-14
MERGE_RADIUS = 1e-4
SIGNIFICANT_COMPONENT = 1e-9


@dataclass(frozen=True)
class EigenPair:
    eigenvalue: float
    eigenvector: np.ndarray


def solve_linear(A, b) -> np.ndarray:
    """Solve ``A x = b`` by LU with partial pivoting.

    Raises:
        SingularMatrix: if a pivot smaller than 1e-14 in magnitude shows up.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    if np.min(np.abs(np.diag(lu))) < PIVOT_TOL:
        raise SingularMatrix("pivot below 1e-14 during LU factorization")
    return scipy.linalg.lu_solve((lu, piv), b)


def _gram(J) -> np.ndarray:
    J = np.asarray(J, dtype=float)
    if J.ndim != 2 or J.shape[0] != 2:
        raise ValueError(f"expected a 2xn matrix, got shape {J.shape}")
    G = J @ J.T
    if np.linalg.eigvalsh(G)[0] <= 1e-10:
        raise RankDeficient("J J^T is numerically singular")
    return G


def pseudo_inverse_apply(J, rhs) -> np.ndarray:
    """Minimum-norm solution of ``J x = rhs``, i.e. ``J^T (J J^T)^-1 rhs``."""
    J = np.asarray(J, dtype=float)
    G = _gram(J)
    return J.T @ solve_linear(G, rhs)


def pseudo_inverse_transpose_apply(J, tau) -> np.ndarray:
    """Least-squares solution ``f`` of ``J^T f = tau``, i.e. ``(J J^T)^-1 J tau``.

    This is the form used to recover an end force from joint torques.
    """
    J = np.asarray(J, dtype=float)
    G = _gram(J)
    return solve_linear(G, J @ np.asarray(tau, dtype=float))


def normalize_eigenvector(v) -> np.ndarray:
    """Unit 2-norm, first component of magnitude > 1e-9 made positive."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if not norm > 0:
        raise ValueError("cannot normalize a zero vector")
    v = v / norm
    for x in v:
        if abs(x) > SIGNIFICANT_COMPONENT:
            if x < 0:
                v = -v
            break
    return v


def eigen_real(M) -> list[EigenPair]:
    """Eigenpairs of a real matrix whose spectrum is real.

    Pairs are sorted by descending ``|lambda|`` (ties broken by descending
    value) and eigenvectors are normalized with :func:`normalize_eigenvector`.

    Raises:
        ComplexSpectrum: if any eigenvalue has an imaginary part above
            ``1e-8 * ||M||_inf``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    scale = max(np.linalg.norm(M, np.inf), 1.0)
    w, V = np.linalg.eig(M)
    if np.any(np.abs(w.imag) > 1e-8 * scale):
        raise ComplexSpectrum(f"complex eigenvalues: {w[np.abs(w.imag) > 1e-8 * scale]}")
    w = w.real
    V = V.real
    order = sorted(range(len(w)), key=lambda i: (-abs(w[i]), -w[i]))
    return [EigenPair(float(w[i]), normalize_eigenvector(V[:, i])) for i in order]


def central_gradient(f: Callable, x, h: float = GRADIENT_STEP) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def central_jacobian(F: Callable, x, h: float = JACOBIAN_STEP) -> np.ndarray:
    """Jacobian of a vector field by central differences (columns = variables)."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        step = h * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = step
        cols.append((np.asarray(F(x + e)) - np.asarray(F(x - e))) / (2 * step))
    return np.column_stack(cols)


def newton_solve(
    F: Callable,
    x0,
    *,
    jac: Callable | None = None,
    tol: float = 1e-10,
    max_iter: int = 100,
) -> np.ndarray:
    """Newton's method with a backtracking line search on ``||F||_2``.

    The Jacobian defaults to central differences with step 1e-7.

    Raises:
        NoConvergence: if ``||F(x)||_inf > tol`` after ``max_iter`` iterations
            or the line search stalls.
        SingularJacobian: if the Jacobian cannot be factorized.
    """
    x = np.array(x0, dtype=float, ndmin=1)
    scalar = np.ndim(x0) == 0
    fun = (lambda z: np.atleast_1d(F(z[0]))) if scalar else (lambda z: np.atleast_1d(F(z)))
    jac_fun = None
    if jac is not None:
        jac_fun = (lambda z: np.atleast_2d(jac(z[0]))) if scalar else (lambda z: np.atleast_2d(jac(z)))

    r = fun(x)
    for _ in range(max_iter + 1):
        if not np.all(np.isfinite(r)):
            raise NoConvergence("residual became non-finite")
        if np.max(np.abs(r)) <= tol:
            return float(x[0]) if scalar else x
        J = jac_fun(x) if jac_fun is not None else central_jacobian(fun, x)
        try:
            dx = solve_linear(J, -r)
        except SingularMatrix as exc:
            raise SingularJacobian(str(exc)) from exc
        norm0 = np.linalg.norm(r)
        step = 1.0
        while True:
            x_new = x + step * dx
            try:
                r_new = fun(x_new)
                ok = np.all(np.isfinite(r_new)) and np.linalg.norm(r_new) < (1 - 1e-4 * step) * norm0
            except (ArithmeticError, TensegrityError):
                # trial point left the residual's domain (e.g. a spring collapsed)
                ok = False
            if ok:
                break
            step *= 0.5
            if step < 1e-10:
                raise NoConvergence(f"line search failed (|F|={np.max(np.abs(r)):.3e})")
        x, r = x_new, r_new
    raise NoConvergence(f"no convergence after {max_iter} iterations (|F|={np.max(np.abs(r)):.3e})")


def _merge(points: list[np.ndarray], values: list[float], radius: float):
    kept: list[tuple[np.ndarray, float]] = []
    for p, v in sorted(zip(points, values), key=lambda pv: pv[1]):
        if all(np.linalg.norm(p - k) > radius for k, _ in kept):
            kept.append((p, v))
    return kept


def minimize_multistart(
    f: Callable,
    bounds: Sequence[tuple[float, float]],
    n_starts: int,
    *,
    seed: int = 0,
    starts: Sequence | None = None,
    max_iter: int = 500,
    grad_tol: float = 1e-6,
) -> list[np.ndarray]:
    """Collect distinct local minima of ``f`` inside a box.

    Each start runs L-BFGS-B, then a Newton polish on the finite-difference
    gradient. Starts that fail to reach ``||grad|| <= grad_tol`` (central
    differences, step 1e-6) are dropped. Minima closer than 1e-4 are merged,
    keeping the lower one. Result is sorted by ascending ``f``.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    rng = np.random.default_rng(seed)
    x0s = [np.asarray(s, dtype=float) for s in (starts or [])]
    x0s += list(lo + (hi - lo) * rng.random((n_starts, lo.size)))

    def grad(x):
        return central_gradient(f, x)

    found, values = [], []
    for x0 in x0s:
        try:
            res = scipy.optimize.minimize(
                f, x0, jac=grad, method="L-BFGS-B", bounds=list(zip(lo, hi)),
                options={"maxiter": max_iter, "gtol": 1e-12, "ftol": 1e-15},
            )
            x = res.x
            if np.linalg.norm(grad(x)) > grad_tol:
                x = newton_solve(grad, x, tol=grad_tol / 10, max_iter=20)
        except (NoConvergence, SingularJacobian):
            log.debug("start %s dropped", x0)
            continue
        x = np.asarray(x, dtype=float)
        if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
            continue
        if not np.isfinite(f(x)) or np.linalg.norm(grad(x)) > grad_tol:
            continue
        found.append(x)
        values.append(float(f(x)))
    return [p for p, _ in _merge(found, values, MERGE_RADIUS)]
