"""Acceptance checks for the twelve headline properties of the library.

Each check returns ``(passed, detail)``; the pytest wrapper prints one
``PASS``/``FAIL`` line per criterion and then asserts. Run the file directly
(``python3 tests/test_acceptance.py``) for the summary lines alone.
"""

from __future__ import annotations

import math
import sys
from collections import Counter

import numpy as np
import pytest

from tensegrity_chain import chain
from tensegrity_chain.buckling import (
    lateral_force_coefficient,
    linearized_deflection,
    mode_energy_factor,
    solve_buckling,
)
from tensegrity_chain.chain import ChainModel, Deflection
from tensegrity_chain.equilibria import Stability, find_equilibria, force_deflection_sweep
from tensegrity_chain.errors import SpectrumCountMismatch
from tensegrity_chain.segment import SegmentGeometry, SpringControl, monotonicity_margin, torque_derivative
from tensegrity_chain.shapes import Shape

UNIT = ChainModel.uniform(4, a=1.0, b=1.0, k=1.0, L0=1.0)
REFERENCE_EIGENVALUES = np.array([-1.746, -0.734, -0.520])
REFERENCE_ROWS = np.array(
    [
        [0.525, -0.227, -0.719, -0.388, -0.075],
        [0.352, -0.707, 0.162, 0.590, -0.050],
        [0.124, -0.387, 0.589, -0.699, -0.018],
    ]
)
REFERENCE_MU_EQ = np.array([1.1447, 2.7272, 3.8429])
SMALL_DX = np.linspace(0.005, 0.05, 10)

_cache: dict = {}


def _solution():
    if "solution" not in _cache:
        _cache["solution"] = solve_buckling(UNIT)
    return _cache["solution"]


def _sweep():
    if "sweep" not in _cache:
        _cache["sweep"] = force_deflection_sweep(UNIT, [(d, 0.0) for d in SMALL_DX])
    return _cache["sweep"]


def criterion_1():
    sol = _solution()
    lam = np.array([m.eigenvalue for m in sol.modes])
    zeros = int(np.sum(np.abs(sol.eigenvalues) < 1e-9))
    err = np.max(np.abs(lam - REFERENCE_EIGENVALUES)) if lam.size == 3 else math.inf
    return err <= 1e-3 and zeros == 2, f"max |dlambda| = {err:.2e}, zeros = {zeros}"


def criterion_2():
    sol = _solution()
    err = max(np.max(np.abs(m.alpha - row)) for m, row in zip(sol.modes, REFERENCE_ROWS))
    return err <= 2e-3, f"max |dalpha| = {err:.2e}"


def criterion_3():
    sol = _solution()
    mu = np.array([m.mu_eq for m in sol.modes])
    err = np.abs(mu - REFERENCE_MU_EQ)
    shapes = [m.shape[0] for m in sol.modes]
    order_ok = shapes[int(np.argmin(mu))] == "U" and shapes[int(np.argmax(mu))] == "Z"
    # the reference factors follow from the three-decimal eigenvector rows; shown for comparison
    rows = np.array([mode_energy_factor(r[:4]) for r in REFERENCE_ROWS])
    detail = (
        f"computed mu_eq = {np.round(mu, 5).tolist()}, |d| = {np.round(err, 5).tolist()}; "
        f"from reference rows = {np.round(rows, 5).tolist()}; U min / Z max: {order_ok}"
    )
    return bool(np.all(err <= 1e-3)) and order_ok, detail


def criterion_4():
    sol = _solution()
    analytic = abs(abs(sol.Fx0) - 1 / 1.746)
    fx = np.array([r.load.Fx for r in _sweep()])
    rel = np.max(np.abs(fx - sol.Fx0)) / abs(sol.Fx0)
    return analytic <= 1e-3 and rel <= 0.05, f"|Fx0| = {abs(sol.Fx0):.6f}, sweep plateau max rel dev = {rel:.2%}"


def criterion_5():
    eqs = find_equilibria(UNIT, Deflection(0.02, 0.0))
    stab = Counter(e.stability for e in eqs)
    shapes = Counter(e.shape for e in eqs)
    ok = (
        len(eqs) == 6
        and stab == {Stability.STABLE: 2, Stability.SADDLE: 2, Stability.MAXIMUM: 2}
        and shapes == {Shape.U: 2, Shape.Z: 2, Shape.ZU: 2}
    )
    return ok, f"{len(eqs)} equilibria; " + ", ".join(f"{k.value}x{v}" for k, v in sorted(stab.items()))


def criterion_6():
    rows = _sweep()
    ratio = np.array([r.load.Fy / math.sqrt(r.deflection.dx) for r in rows])
    spread = np.ptp(ratio) / np.max(np.abs(ratio))
    # the reported stable state is the q1 < 0 member of the mirror pair, i.e. t < 0
    predicted = -lateral_force_coefficient(_solution().dominant, UNIT.b)
    rel = abs(np.mean(ratio) - predicted) / abs(predicted)
    return spread <= 0.05 and rel <= 0.10, f"Fy/sqrt(dx) spread = {spread:.2%}, vs prediction {predicted:.5f}: {rel:.2%}"


def criterion_7():
    rng = np.random.default_rng(7)
    h = 1e-6
    worst = 0.0
    for n in range(2, 9):
        model = ChainModel.uniform(n, 1.0, 1.0, 1.0, 1.0)
        for _ in range(100):
            q = rng.uniform(-0.8, 0.8, size=n)
            J = chain.jacobian(model, q)
            fd = np.column_stack(
                [
                    np.subtract(chain.forward_kinematics(model, q + h * e), chain.forward_kinematics(model, q - h * e))
                    / (2 * h)
                    for e in np.eye(n)
                ]
            )
            worst = max(worst, np.max(np.abs(J - fd)) / np.max(np.abs(J)))
    return worst <= 1e-6, f"max relative error = {worst:.2e} over 700 configurations"


def criterion_8():
    rng = np.random.default_rng(8)
    h = 1e-6
    worst = 0.0
    for _ in range(100):
        q = rng.uniform(-0.8, 0.8, size=4)
        M = chain.joint_torques(UNIT, q)
        g = np.array(
            [(chain.total_energy(UNIT, q + h * e) - chain.total_energy(UNIT, q - h * e)) / (2 * h) for e in np.eye(4)]
        )
        worst = max(worst, np.max(np.abs(g + M) / np.maximum(np.abs(M), 1e-3)))
    return worst <= 1e-6, f"max componentwise relative error = {worst:.2e}"


def criterion_9():
    counts = {}
    for n in range(3, 13):
        try:
            counts[n] = len(solve_buckling(ChainModel.uniform(n, 1.0, 1.0, 1.0, 1.0)).modes)
        except SpectrumCountMismatch:
            counts[n] = None
    ok = all(counts[n] == n - 1 for n in counts)
    return ok, "modes per n: " + ", ".join(f"{n}:{c}" for n, c in counts.items())


def criterion_10():
    alpha = _solution().dominant.alpha[:4]
    ts = (1e-2, 5e-3, 2.5e-3)
    errs = []
    for t in ts:
        q = alpha * t
        errs.append(np.linalg.norm(np.subtract(chain.deflection(UNIT, q), linearized_deflection(UNIT, q))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    return bool(np.all(np.abs(orders - 3) <= 0.2)), f"observed orders = {np.round(orders, 3).tolist()}"


def criterion_11():
    """Two segments, tip held on the axis: walk the constraint curve on a dense grid of q1."""
    model = ChainModel.uniform(2, 1.0, 1.0, 1.0, 1.0)
    q1 = np.linspace(-0.3, 0.3, 600_001)
    # y = b (2 sin q1 + sin(q1 + q2)) = 0 on the branch through the straight chain
    q2 = np.arcsin(-2 * np.sin(q1)) - q1
    seg = model.geom
    energy = np.zeros_like(q1)
    for q in (q1, q2):
        L1 = 2 * (seg.b * np.cos(q / 2) - seg.a * np.sin(q / 2))
        L2 = 2 * (seg.b * np.cos(q / 2) + seg.a * np.sin(q / 2))
        energy += 0.5 * (L1 - 1.0) ** 2 + 0.5 * (L2 - 1.0) ** 2
    dx = model.reach - model.b * (1 + 2 * np.cos(q1) + np.cos(q1 + q2))
    E0 = energy[np.argmin(np.abs(q1))]
    # lowest energy at each axial deflection, then the work slope dE/d(dx) at onset
    bins = np.linspace(0.0, 0.01, 41)[1:]
    best = []
    for d in bins:
        sel = np.abs(dx - d) <= 2e-6
        best.append(np.min(energy[sel]) - E0)
    slope = np.polyfit(bins, best, 2)[1]
    Fx0 = solve_buckling(model).Fx0
    rel = abs(slope - abs(Fx0)) / abs(Fx0)
    return rel <= 0.05, f"brute-force onset force {slope:.5f} vs |Fx0| = {abs(Fx0):.5f} ({rel:.2%})"


def criterion_12():
    mismatches = 0
    checked = 0
    for ratio in np.linspace(0.2, 2.0, 20):
        for L0 in np.linspace(0.0, 3.0, 20):
            g = SegmentGeometry(ratio, 1.0)
            s = SpringControl.symmetric(1.0, L0)
            m = monotonicity_margin(g, s)
            if abs(m) > 1e-6:
                checked += 1
                mismatches += np.sign(m) != np.sign(-torque_derivative(g, s, 0.0))
    return mismatches == 0, f"{checked} grid points, {mismatches} sign mismatches"


CRITERIA = [
    (1, "Reference eigenvalues", criterion_1),
    (2, "Reference eigenvectors", criterion_2),
    (3, "Reference energy factors", criterion_3),
    (4, "Critical force", criterion_4),
    (5, "Six equilibria", criterion_5),
    (6, "Post-buckling force law", criterion_6),
    (7, "Jacobian correctness", criterion_7),
    (8, "Energy-gradient consistency", criterion_8),
    (9, "n-1 nonzero modes", criterion_9),
    (10, "Linearization order", criterion_10),
    (11, "Brute-force oracle, n=2", criterion_11),
    (12, "Monotonicity frontier", criterion_12),
]


def _line(number, name, passed, detail):
    return f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {name}: {detail}"


@pytest.mark.parametrize("number, name, check", CRITERIA, ids=[f"c{n:02d}" for n, _, _ in CRITERIA])
def test_criterion(number, name, check, capsys):
    passed, detail = check()
    with capsys.disabled():
        print("\n" + _line(number, name, passed, detail))
    assert passed, detail


if __name__ == "__main__":
    results = [(n, name, *check()) for n, name, check in CRITERIA]
    for r in results:
        print(_line(*r))
    sys.exit(0 if all(r[2] for r in results) else 1)
