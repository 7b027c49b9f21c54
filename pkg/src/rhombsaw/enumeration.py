"""Exhaustive depth-first enumeration of self-avoiding walks in a finite domain.

A walk is a sequence of arcs ``(face, entry side, exit side)``. Each mid-edge
is crossed at most once; a rhombus may carry two arcs only if they cut off
its two opposite corners of equal angle, and then contributes the double-arc
weight once. Two routes are provided: :func:`enumerate_walks` streams
:class:`Walk` objects (for inspection and per-walk checks), and
:func:`accumulate` sums weights per endpoint in compiled code.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .tiling import Domain, DomainError, build_rect
from .weights import PI, local_weights, wrap_angle

DEFAULT_MAX_STEPS = 10**9
PARAFERMION_SPIN = 5.0 / 8.0
SUM_RULE_SPIN = 3.0 / 8.0


class EnumerationOverflow(RuntimeError):
    """The walk enumeration exceeded its step cap."""


class FugacityError(ValueError):
    """Boundary fugacity requested on a column whose angle is not pi/3."""


def max_steps_default() -> int:
    return int(os.environ.get("SAW_MAX_WALKS", DEFAULT_MAX_STEPS))


def _is_pi3(theta) -> bool:
    return abs(theta - PI / 3) < 1e-12


class KahanSum:
    """Neumaier-compensated running sum (real or complex)."""

    __slots__ = ("total", "comp")

    def __init__(self, start=0.0):
        self.total = start
        self.comp = 0.0 * start

    def add(self, value):
        t = self.total + value
        if _mag(self.total) >= _mag(value):
            self.comp += (self.total - t) + value
        else:
            self.comp += (value - t) + self.total
        self.total = t

    @property
    def value(self):
        return self.total + self.comp


def _mag(z):
    return abs(z.real) + abs(z.imag) if isinstance(z, complex) else abs(z)


# --- per-arc tables ---------------------------------------------------------

@dataclass
class ArcTables:
    """Per (face, entry side, exit side) arc data for a domain."""

    weight: np.ndarray      # single-arc weight
    double: np.ndarray      # multiplier turning a first arc weight into the double-state weight
    corner: np.ndarray      # True for corner arcs, False for straights
    length: np.ndarray
    turning: np.ndarray
    left_visits: np.ndarray
    right_visits: np.ndarray


def arc_tables(domain: Domain, left_fugacity: bool = False, right_fugacity: bool = False) -> ArcTables:
    nf = len(domain.faces)
    shape = (nf, 4, 4)
    weight = np.zeros(shape)
    double = np.zeros(shape)
    corner = np.zeros(shape, dtype=np.bool_)
    length = np.zeros(shape)
    turning = np.zeros(shape)
    lv = np.zeros(shape, dtype=np.int64)
    rv = np.zeros(shape, dtype=np.int64)
    T = domain.params.get("T")
    thetas = domain.params.get("thetas")
    if left_fugacity and (thetas is None or not _is_pi3(thetas[0])):
        raise FugacityError("left boundary fugacity needs theta_1 = pi/3")
    if right_fugacity and (thetas is None or not _is_pi3(thetas[-1])):
        raise FugacityError("right boundary fugacity needs theta_T = pi/3")
    for f, face in enumerate(domain.faces):
        n = face.nsides
        names = face.side_names
        for a in range(n):
            for b in range(n):
                if a == b:
                    continue
                turning[f, a, b] = wrap_angle(domain.normal[f, b] - domain.normal[f, a] - PI)
                if n == 3 or (b - a) % 4 in (1, 3):
                    # corner between consecutive sides s and s+1 is corner[f, s]
                    s = a if (b - a) % n == 1 else b
                    phi = domain.corner[f, s]
                    tab = local_weights(phi)
                    weight[f, a, b] = tab.u1
                    double[f, a, b] = tab.w1 / tab.u1
                    corner[f, a, b] = True
                    length[f, a, b] = 3.0 * phi / PI
                else:
                    weight[f, a, b] = local_weights(domain.corner[f, a]).v
                    length[f, a, b] = 2.0
                if names is not None:
                    used = {names[a], names[b]}
                    if left_fugacity and face.column == 1:
                        lv[f, a, b] = int(bool(used & {"W", "N"}))
                    if right_fugacity and face.column == T:
                        rv[f, a, b] = int(bool(used & {"S", "E"}))
    return ArcTables(weight, double, corner, length, turning, lv, rv)


# --- walks ------------------------------------------------------------------

@dataclass
class Walk:
    domain: Domain = field(repr=False)
    start: int
    steps: tuple  # ((face, entry side, exit side), ...)

    @property
    def end(self) -> int:
        if not self.steps:
            return self.start
        f, _, b = self.steps[-1]
        return int(self.domain.face_mid[f, b])

    def mids(self) -> list[int]:
        return [self.start] + [int(self.domain.face_mid[f, b]) for f, _, b in self.steps]

    def _faces(self) -> dict:
        out: dict = {}
        for f, a, b in self.steps:
            out.setdefault(f, []).append((a, b))
        return out

    def weight(self, tables: ArcTables, x: float = 1.0, y: float = 1.0, y_right: float = 1.0) -> float:
        w = 1.0
        for f, arcs in self._faces().items():
            a, b = arcs[0]
            if len(arcs) == 1:
                w *= tables.weight[f, a, b]
            else:
                # both arcs cut corners of the same angle; the pair weighs w1 of that angle
                w *= tables.weight[f, a, b] * tables.double[f, a, b]
        return w * x ** self.length(tables) * y ** self.b(tables) * y_right ** self.b_right(tables)

    def length(self, tables: ArcTables) -> float:
        return float(sum(tables.length[f, a, b] for f, a, b in self.steps))

    def winding(self, tables: ArcTables) -> float:
        return float(sum(tables.turning[f, a, b] for f, a, b in self.steps))

    def b(self, tables: ArcTables) -> int:
        return int(sum(tables.left_visits[f, a, b] for f, a, b in self.steps))

    def b_right(self, tables: ArcTables) -> int:
        return int(sum(tables.right_visits[f, a, b] for f, a, b in self.steps))

    def is_self_avoiding(self) -> bool:
        mids = self.mids()
        if len(set(mids)) != len(mids):
            return False
        for f, arcs in self._faces().items():
            if len(arcs) > 2:
                return False
            if len(arcs) == 2:
                n = self.domain.nsides[f]
                sides = {arcs[0][0], arcs[0][1], arcs[1][0], arcs[1][1]}
                if n != 4 or len(sides) != 4:
                    return False
                if any((b - a) % 2 == 0 for a, b in arcs):
                    return False
                # two corner arcs must cut opposite corners
                c0 = _corner_of(arcs[0])
                c1 = _corner_of(arcs[1])
                if (c0 - c1) % 4 != 2:
                    return False
        return True

    def reversed(self) -> "Walk":
        steps = tuple((f, b, a) for f, a, b in reversed(self.steps))
        return Walk(self.domain, self.end, steps)


def _corner_of(arc) -> int:
    a, b = arc
    return a if (b - a) % 4 == 1 else b


def _check_mid(domain: Domain, m: int, what: str):
    if not (0 <= int(m) < domain.n_mid):
        raise DomainError(f"{what} mid-edge {m} not in domain")


def enumerate_walks(domain: Domain, start: int, ends=None, max_steps: int | None = None):
    """Yield every self-avoiding walk from ``start`` ending in ``ends``.

    ``ends=None`` means any mid-edge. The empty walk is never produced.
    Order is lexicographic in (face, exit side) choices.
    """
    _check_mid(domain, start, "start")
    end_set = None if ends is None else {int(e) for e in ends}
    cap = max_steps_default() if max_steps is None else max_steps
    used = np.zeros(domain.n_mid, dtype=bool)
    used[start] = True
    narcs = np.zeros(len(domain.faces), dtype=np.int64)
    first: dict[int, tuple[int, int]] = {}
    steps: list = []
    counter = [0]

    def grow(f: int, a: int):
        n = domain.nsides[f]
        for b in range(n):
            if b == a:
                continue
            m = int(domain.face_mid[f, b])
            if used[m]:
                continue
            if narcs[f] == 1:
                fa, fb = first[f]
                if n != 4 or (fb - fa) % 2 == 0 or (b - a) % 2 == 0:
                    continue
            elif narcs[f] >= 2:
                continue
            counter[0] += 1
            if counter[0] > cap:
                raise EnumerationOverflow(f"more than {cap} steps")
            used[m] = True
            narcs[f] += 1
            if narcs[f] == 1:
                first[f] = (a, b)
            steps.append((f, a, b))
            if end_set is None or m in end_set:
                yield Walk(domain, start, tuple(steps))
            g, c = domain.across[f, b]
            if g >= 0:
                yield from grow(int(g), int(c))
            steps.pop()
            if narcs[f] == 1:
                del first[f]
            narcs[f] -= 1
            used[m] = False

    for f, a in domain.mid_faces[start]:
        yield from grow(f, a)


# --- compiled accumulator ---------------------------------------------------

@njit(cache=True)
def _kahan_add(s, c, i, v):
    t = s[i] + v
    if abs(s[i]) >= abs(v):
        c[i] += (s[i] - t) + v
    else:
        c[i] += (v - t) + s[i]
    s[i] = t


@njit(cache=True)
def _dfs_kernel(start, face_mid, nsides, across, mid_faces, single, double, corner,
                length, turning, lvis, rvis, is_end, spin_a, spin_b, max_steps,
                out_w, out_a, out_b_re, out_b_im, comp, out_n,
                wind_min, wind_max, max_b_minus_len):
    """Sums per end mid-edge of weight, weight*cos(spin_a*wind) and weight*exp(-i spin_b wind)."""
    n_mid = face_mid.max() + 1
    nf = face_mid.shape[0]
    used = np.zeros(n_mid, dtype=np.bool_)
    used[start] = True
    narcs = np.zeros(nf, dtype=np.int64)
    first_straight = np.zeros(nf, dtype=np.bool_)
    depth_cap = 2 * nf + 2
    fr_face = np.empty(depth_cap, dtype=np.int64)
    fr_in = np.empty(depth_cap, dtype=np.int64)
    fr_next = np.empty(depth_cap, dtype=np.int64)
    fr_w = np.empty(depth_cap)
    fr_wind = np.empty(depth_cap)
    fr_len = np.empty(depth_cap)
    fr_b = np.empty(depth_cap, dtype=np.int64)
    steps = 0
    for k in range(mid_faces.shape[1]):
        f0 = mid_faces[start, k, 0]
        if f0 < 0:
            continue
        d = 0
        fr_face[0] = f0
        fr_in[0] = mid_faces[start, k, 1]
        fr_next[0] = 0
        fr_w[0] = 1.0
        fr_wind[0] = 0.0
        fr_len[0] = 0.0
        fr_b[0] = 0
        while d >= 0:
            f = fr_face[d]
            a = fr_in[d]
            b = fr_next[d]
            if b >= nsides[f]:
                # exhausted: pop and undo the arc of the parent frame
                d -= 1
                if d >= 0:
                    pf = fr_face[d]
                    pb = fr_next[d] - 1
                    used[face_mid[pf, pb]] = False
                    narcs[pf] -= 1
                continue
            fr_next[d] = b + 1
            if b == a:
                continue
            m = face_mid[f, b]
            if used[m]:
                continue
            if narcs[f] == 0:
                factor = single[f, a, b]
            elif narcs[f] == 1:
                if first_straight[f] or not corner[f, a, b]:
                    continue
                factor = double[f, a, b]
            else:
                continue
            steps += 1
            if steps > max_steps:
                return -1
            used[m] = True
            narcs[f] += 1
            if narcs[f] == 1:
                first_straight[f] = not corner[f, a, b]
            w = fr_w[d] * factor
            wind = fr_wind[d] + turning[f, a, b]
            ln = fr_len[d] + length[f, a, b]
            bb = fr_b[d] + lvis[f, a, b] + rvis[f, a, b]
            if is_end[m]:
                _kahan_add(out_w, comp[0], m, w)
                _kahan_add(out_a, comp[1], m, w * math.cos(spin_a * wind))
                _kahan_add(out_b_re, comp[2], m, w * math.cos(spin_b * wind))
                _kahan_add(out_b_im, comp[3], m, -w * math.sin(spin_b * wind))
                out_n[m] += 1
                if wind < wind_min[m]:
                    wind_min[m] = wind
                if wind > wind_max[m]:
                    wind_max[m] = wind
                if bb - ln > max_b_minus_len[0]:
                    max_b_minus_len[0] = bb - ln
            g = across[f, b, 0]
            if g >= 0:
                d += 1
                fr_face[d] = g
                fr_in[d] = across[f, b, 1]
                fr_next[d] = 0
                fr_w[d] = w
                fr_wind[d] = wind
                fr_len[d] = ln
                fr_b[d] = bb
            else:
                used[m] = False
                narcs[f] -= 1
    return steps


@dataclass
class EndSums:
    """Per-endpoint sums produced by :func:`accumulate`."""

    domain: Domain = field(repr=False)
    start: int
    weight: np.ndarray          # sum of weights
    cos_weight: np.ndarray      # sum of weight * cos(3/8 wind)
    observable: np.ndarray      # sum of weight * exp(-i 5/8 wind)
    count: np.ndarray
    wind_min: np.ndarray
    wind_max: np.ndarray
    max_b_minus_length: float
    steps: int

    def total(self, mids, field_name: str = "weight"):
        arr = getattr(self, field_name)
        acc = KahanSum(0j if np.iscomplexobj(arr) else 0.0)
        for m in sorted(int(x) for x in mids):
            acc.add(arr[m])
        return acc.value


def _pack_mid_faces(domain: Domain) -> np.ndarray:
    out = -np.ones((domain.n_mid, 2, 2), dtype=np.int64)
    for m, inc in enumerate(domain.mid_faces):
        for k, (f, s) in enumerate(inc):
            out[m, k] = (f, s)
    return out


def accumulate(domain: Domain, start: int, ends=None, x: float = 1.0, y: float = 1.0,
               y_right: float = 1.0, max_steps: int | None = None,
               tables: ArcTables | None = None) -> EndSums:
    """Sum walk weights from ``start`` grouped by endpoint.

    ``x`` weights the length, ``y`` the visits to boundary triangles of
    column 1 and ``y_right`` those of the last column.
    """
    _check_mid(domain, start, "start")
    if tables is None:
        tables = arc_tables(domain, left_fugacity=(y != 1.0), right_fugacity=(y_right != 1.0))
    single = tables.weight * x ** tables.length
    single = single * y ** tables.left_visits * y_right ** tables.right_visits
    double = tables.double * x ** tables.length
    double = double * y ** tables.left_visits * y_right ** tables.right_visits
    n = domain.n_mid
    is_end = np.zeros(n, dtype=np.bool_)
    if ends is None:
        is_end[:] = True
    else:
        for e in ends:
            _check_mid(domain, e, "end")
            is_end[int(e)] = True
    out = [np.zeros(n) for _ in range(4)]
    comp = np.zeros((4, n))
    count = np.zeros(n, dtype=np.int64)
    wmin = np.full(n, np.inf)
    wmax = np.full(n, -np.inf)
    mbl = np.full(1, -np.inf)
    cap = max_steps_default() if max_steps is None else max_steps
    steps = _dfs_kernel(int(start), domain.face_mid, domain.nsides, domain.across,
                        _pack_mid_faces(domain), single, double, tables.corner,
                        tables.length, tables.turning, tables.left_visits, tables.right_visits,
                        is_end, SUM_RULE_SPIN, PARAFERMION_SPIN, cap,
                        out[0], out[1], out[2], out[3], comp, count, wmin, wmax, mbl)
    if steps < 0:
        raise EnumerationOverflow(f"more than {cap} steps")
    w, a, bre, bim = (o + c for o, c in zip(out, comp))
    return EndSums(domain, int(start), w, a, bre + 1j * bim, count, wmin, wmax, float(mbl[0]), int(steps))


# --- partition functions ----------------------------------------------------

def two_point(domain: Domain, a: int, b: int, allow_empty: bool = False, **kw) -> float:
    """Sum of weights of walks from ``a`` to ``b`` inside ``domain``."""
    if a == b:
        if allow_empty:
            return 1.0
        raise ValueError("two_point needs a != b (pass allow_empty=True for the empty walk)")
    sums = accumulate(domain, a, ends=[b], **kw)
    return float(sums.weight[b])


@dataclass
class PartitionReport:
    A: float
    B: float
    D: float
    E: float
    endpoints: dict      # mid-edge -> (G value, (min winding, max winding))
    walk_count: int
    T: int
    L: int
    thetas: tuple
    x: float
    y: float
    y_right: float = 1.0
    labels: dict = field(default_factory=dict, repr=False)

    def identity_residual(self, b_coefficient: float = 1.0) -> float:
        return math.cos(3 * PI / 8) * self.A + b_coefficient * self.B + self.D + self.E - 1.0


def rect_partition(thetas, L: int, x: float = 1.0, y: float = 1.0, y_right: float = 1.0,
                   max_steps: int | None = None) -> PartitionReport:
    """A, B, D, E of the rectangle rows -L..L by exhaustive enumeration from the origin."""
    dom = build_rect(thetas, L)
    sums = accumulate(dom, dom.origin, ends=None, x=x, y=y, y_right=y_right, max_steps=max_steps)
    return _report_from_sums(dom, sums, x, y, y_right)


def _report_from_sums(dom: Domain, sums: EndSums, x, y, y_right) -> PartitionReport:
    classes = {c: dom.boundary_set(c) for c in ("alpha", "beta", "delta", "epsilon")}
    alpha = [m for m in classes["alpha"] if m != dom.origin]
    endpoints = {}
    for m in sorted(dom.boundary):
        if m == dom.origin:
            continue
        endpoints[m] = (float(sums.weight[m]), (float(sums.wind_min[m]), float(sums.wind_max[m])))
    return PartitionReport(
        A=float(sums.total(alpha)),
        B=float(sums.total(classes["beta"])),
        D=float(sums.total(classes["delta"], "cos_weight")),
        E=float(sums.total(classes["epsilon"], "cos_weight")),
        endpoints=endpoints,
        walk_count=int(sums.count.sum()),
        T=dom.params["T"], L=dom.params["L"], thetas=tuple(dom.params["thetas"]),
        x=x, y=y, y_right=y_right,
        labels={m: dom.label_of(m) for m in endpoints},
    )


def observable(domain: Domain, fugacity: float | None = None, max_steps: int | None = None) -> dict:
    """Parafermionic observable F(z) = sum over walks 0 -> z of w exp(-i 5/8 wind).

    With ``fugacity`` y, walks get y per visit to a boundary triangle of the
    last column (which must have angle pi/3). F(0) includes the empty walk.
    """
    y_right = 1.0 if fugacity is None else float(fugacity)
    tables = arc_tables(domain, right_fugacity=fugacity is not None)
    sums = accumulate(domain, domain.origin, ends=None, y_right=y_right,
                      max_steps=max_steps, tables=tables)
    F = {m: complex(sums.observable[m]) for m in range(domain.n_mid)}
    F[domain.origin] += 1.0
    return F


def cr_residuals(domain: Domain, F: dict) -> np.ndarray:
    """F(z_E) - F(z_W) - exp(i theta) (F(z_S) - F(z_N)) for every rect face."""
    out = []
    for f, face in enumerate(domain.faces):
        names = face.side_names
        mid = {names[s]: int(domain.face_mid[f, s]) for s in range(4)}
        theta = domain.params["thetas"][face.column - 1]
        out.append(F[mid["E"]] - F[mid["W"]] - np.exp(1j * theta) * (F[mid["S"]] - F[mid["N"]]))
    return np.asarray(out)
