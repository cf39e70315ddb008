"""Sign-pattern shape labels for post-buckling configurations."""

from __future__ import annotations

from enum import Enum

import numpy as np

SIGN_DEADBAND = 1e-9


class Shape(str, Enum):
    U = "U"
    Z = "Z"
    ZU = "ZU"
    STRAIGHT = "Straight"
    OTHER = "Other"


_PATTERNS = {
    "-+++": Shape.U,
    "+---": Shape.U,
    "-+-+": Shape.Z,
    "+-+-": Shape.Z,
    "-+--": Shape.ZU,
    "+-++": Shape.ZU,
}


def sign_pattern(q) -> str:
    """``'+'``/``'-'`` per joint, ``'0'`` inside the dead-band."""
    return "".join("0" if abs(x) < SIGN_DEADBAND else ("+" if x > 0 else "-") for x in np.asarray(q, float))


def shape_label(q) -> Shape:
    q = np.asarray(q, dtype=float)
    pattern = sign_pattern(q)
    if set(pattern) == {"0"}:
        return Shape.STRAIGHT
    if q.size != 4:
        return Shape.OTHER
    return _PATTERNS.get(pattern, Shape.OTHER)
