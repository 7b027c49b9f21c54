"""Walks on the hexagonal lattice inside equilateral triangles.

``Tri_L`` is the triangle of side 2L+1 inscribed in the width-(2L+1) pi/3
strip, with its vertical side on the strip boundary and the origin at the
middle of that side. Every step of a walk cuts one corner of a unit
triangle, so a walk of n steps weighs u1(pi/3)**n.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

from .enumeration import accumulate
from .tiling import build_triangle
from .transfer import strip_partition
from .weights import PI

DEFAULT_L_CAP = 3
COS_3PI_8 = math.cos(3 * PI / 8)
COS_PI_8 = math.cos(PI / 8)


class TriangleError(ValueError):
    pass


@dataclass
class TrianglePartition:
    L: int
    A_delta: float
    D_delta: float
    ang: dict = field(default_factory=dict)  # K -> weight of walks ending K units along the top
    walk_count: int = 0

    @property
    def T(self) -> int:
        return 2 * self.L + 1

    @property
    def identity_residual(self) -> float:
        return COS_3PI_8 * self.A_delta + COS_PI_8 * self.D_delta - 1.0

    @property
    def symmetry_residual(self) -> float:
        return self.D_delta - 2.0 * sum(self.ang.values())


def tri_partition(L: int, L_cap: int = DEFAULT_L_CAP, max_steps: int | None = None) -> TrianglePartition:
    """Partition functions of walks from the origin of ``Tri_L`` to its sides.

    ``A_delta`` sums walks ending on the vertical side, ``D_delta`` walks
    ending on either slanted side.
    """
    if L < 0:
        raise TriangleError("L must be >= 0")
    if L > L_cap:
        raise TriangleError(f"L={L} above the brute-force cap {L_cap}")
    dom = build_triangle(L)
    sums = accumulate(dom, dom.origin, max_steps=max_steps)
    A = float(sums.total(dom.boundary_set("alpha")))
    D = float(sums.total(dom.boundary_set("top")) + sums.total(dom.boundary_set("bottom")))
    ang: dict[int, float] = {}
    for m, K in dom.params["ang_position"].items():
        ang[K] = ang.get(K, 0.0) + float(sums.weight[m])
    return TrianglePartition(L, A, D, dict(sorted(ang.items())), int(sums.count.sum()))


@dataclass
class BridgeRow:
    T: int
    A: float
    B: float
    D_delta: float | None = None
    bound: float | None = None
    partial_sum: float = 0.0

    @property
    def holds(self) -> bool | None:
        if self.bound is None:
            return None
        return self.B <= self.bound + 1e-9


def bridge_decay_report(T_max: int, L_cap: int = DEFAULT_L_CAP) -> list[BridgeRow]:
    """Strip quantities A_T, B_T at pi/3 for T = 1..T_max, with the triangle bound on odd T.

    ``partial_sum`` accumulates sum (1/T) B_T**3, whose finiteness is the
    quantitative content behind the decay of B_T; it is reported only.
    """
    rows = []
    partial = 0.0
    for T in range(1, T_max + 1):
        rep = strip_partition((PI / 3,) * T)
        partial += rep.B ** 3 / T
        row = BridgeRow(T, rep.A, rep.B, partial_sum=partial)
        if T % 2 == 1 and (T - 1) // 2 <= L_cap:
            tri = tri_partition((T - 1) // 2, L_cap=L_cap)
            row.D_delta = tri.D_delta
            row.bound = COS_PI_8 * tri.D_delta
        rows.append(row)
    return rows


def concatenation_report(L: int = 1, L_cap: int | None = None, width: int = 8) -> dict:
    """Both sides of the three-walk concatenation inequality at scale ``L``.

    The left side needs ``Ang`` on triangles up to ``Tri_{4L}``; the right
    side sums G(0, k), k = L..9L, in the half-plane, here replaced by a
    finite-width strip so it is only a truncated lower bound. Reported, never
    asserted.
    """
    if L_cap is None:
        L_cap = int(os.environ.get("SAW_TRI_CAP", 4 * L))
    need = 4 * L
    if need > L_cap:
        raise TriangleError(f"needs Tri_{need}, above the cap {L_cap}")
    tri = {ell: tri_partition(ell, L_cap=L_cap) for ell in range(need + 1)}
    lhs = 0.0
    for K1, a1 in tri[L].ang.items():
        for K2, a2 in tri[K1].ang.items():
            lhs += a1 * a2 * sum(tri[K2].ang.values())
    from .transfer import TransferMatrix

    tm = TransferMatrix((PI / 3,) * width)
    rows = 9 * L
    rhs = sum(tm.endpoint_two_point(rows, "alpha", k) for k in range(L, 9 * L + 1))
    return {"L": L, "lhs": lhs, "rhs_truncated_lower_bound": rhs, "strip_width": width,
            "strip_rows": rows, "caveat": "rhs is a truncated lower bound of the half-plane sum"}
