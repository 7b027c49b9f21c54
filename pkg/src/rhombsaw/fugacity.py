"""Walks with a surface fugacity on a pi/3 boundary column.

A walk gets a factor y for every visit to one of the boundary half-triangles
of a pi/3 column on the left (``y``) or on the right (``y_right``) side of
the strip. Bridges with left fugacity stay summable up to y_c(T), which
decreases towards 1 + sqrt(2) as T grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .enumeration import FugacityError, accumulate, arc_tables, rect_partition
from .tiling import build_rect
from .transfer import TransferMatrix, strip_partition, yc_strip
from .weights import PI, y_star

Y_STAR = y_star()
COS_3PI_8 = math.cos(3 * PI / 8)


@dataclass(frozen=True)
class FugacityParams:
    x: float = 1.0
    y: float = 1.0

    def __post_init__(self):
        if self.x < 0 or self.y < 0:
            raise ValueError("fugacities must be non-negative")

    @property
    def y_star(self) -> float:
        return Y_STAR


def b_coefficient(y: float) -> float:
    """Coefficient of the bridge sum in the right-fugacity sum rule; 1 at y = 1, 0 at y*."""
    if y <= 0:
        raise ValueError("y must be positive")
    return (Y_STAR - y) / (y * (Y_STAR - 1.0))


def saw_partition_truncated(thetas, L: int, x: float = 1.0, y: float = 1.0,
                            max_steps: int | None = None) -> float:
    """Sum of w x^length y^visits over non-empty walks from the origin inside Rect(T, L)."""
    dom = build_rect(thetas, L)
    sums = accumulate(dom, dom.origin, x=x, y=y, max_steps=max_steps)
    return sums.total(range(dom.n_mid))  # the empty walk is not enumerated


@dataclass
class SumRuleCheck:
    thetas: tuple
    L: int
    y: float
    A: float
    B: float
    D: float
    E: float
    coefficient: float
    residual: float

    @property
    def all_positive(self) -> bool:
        return min(self.A, self.B, self.D, self.E) > 0


def check_fugacity_sum_rule(thetas, L: int, y: float, max_steps: int | None = None) -> SumRuleCheck:
    """Residual of cos(3pi/8) A + c(y) B + D + E - 1 with right-boundary fugacity y."""
    if abs(thetas[-1] - PI / 3) > 1e-12:
        raise FugacityError("the right fugacity sum rule needs theta_T = pi/3")
    rep = rect_partition(thetas, L, y_right=y, max_steps=max_steps)
    c = b_coefficient(y)
    return SumRuleCheck(tuple(thetas), L, y, rep.A, rep.B, rep.D, rep.E, c,
                        rep.identity_residual(b_coefficient=c))


def bridge_bound(y: float) -> float:
    """Upper bound on B_T(y) valid for every width, for 0 <= y < 1 + sqrt(2)."""
    if y >= Y_STAR:
        raise ValueError("the bridge bound is vacuous for y >= 1 + sqrt(2)")
    return math.sqrt(2.0) * y / (Y_STAR - y)


def check_bridge_bound(thetas, y: float) -> tuple[float, float]:
    """(B_T(1, y), bound) with B_T from the transfer matrix."""
    bound = bridge_bound(y)
    rep = strip_partition(thetas, y=y)
    if not rep.converged:
        raise RuntimeError(f"bridge series did not converge at y={y}")
    return rep.B, bound


def bridge_reversal_pair(thetas, L: int, y: float, max_steps: int | None = None) -> tuple[float, float]:
    """Bridges with left fugacity, and their images under rotation by pi.

    The rotation maps Rect(thetas, L) onto Rect(reversed thetas, L), the
    left boundary onto the right one and row r onto row -r. Reversing the
    walks, a bridge from left row 0 to right row r becomes a walk from left
    row -r to right row 0 with right-side fugacity. Both sums are returned.
    """
    left = rect_partition(thetas, L, y=y, max_steps=max_steps).B
    rev = tuple(reversed(thetas))
    dom = build_rect(rev, L)
    T = len(rev)
    tables = arc_tables(dom, right_fugacity=True)
    end = dom.mid(T, 0, "E")
    total = 0.0
    for r in range(-L, L + 1):
        s = accumulate(dom, dom.mid(1, -r, "W"), ends=[end], y_right=y,
                       max_steps=max_steps, tables=tables)
        total += float(s.weight[end])
    return left, total


def strip_bridge_reversal(thetas, y: float, L: int = 400) -> tuple[float, float]:
    """B_T(y) with left fugacity on thetas and right fugacity on the reversed sequence."""
    a = TransferMatrix(thetas, y=y).rect(L)["B"]
    b = TransferMatrix(tuple(reversed(thetas)), y_right=y).rect(L)["B"]
    return a, b


@dataclass
class YcRow:
    T: int
    y_c: float
    gap: float
    y_c_mixed: float | None = None


def yc_convergence_report(T_max: int, mixed=None, tol: float = 1e-9) -> list[YcRow]:
    """y_c(T) for the pi/3 strip, T = 1..T_max, optionally next to a mixed sequence.

    ``mixed`` is a sequence of at least T_max angles starting with pi/3; row T
    uses its first T entries.
    """
    rows = []
    for T in range(1, T_max + 1):
        yc = yc_strip((PI / 3,) * T, tol=tol)
        row = YcRow(T, yc, yc - Y_STAR)
        if mixed is not None and T <= len(mixed):
            row.y_c_mixed = yc_strip(tuple(mixed[:T]), tol=tol)
        rows.append(row)
    return rows


def yc_report_violations(rows: list[YcRow]) -> list[str]:
    """Statements about the y_c table that fail; empty when all hold."""
    bad = []
    for prev, cur in zip(rows, rows[1:]):
        if not cur.y_c < prev.y_c:
            bad.append(f"y_c not decreasing at T={cur.T}")
        if not cur.gap < prev.gap:
            bad.append(f"gap not shrinking at T={cur.T}")
    for r in rows:
        if not r.y_c > Y_STAR:
            bad.append(f"y_c({r.T}) <= 1+sqrt(2)")
        if r.y_c_mixed is not None and r.y_c_mixed > r.y_c + 1e-9:
            bad.append(f"mixed sequence exceeds pi/3 value at T={r.T}")
    return bad
