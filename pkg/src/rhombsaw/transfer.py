"""Row-to-row transfer matrices over link patterns for walks in strips.

A state lives on the horizontal cut above a row: each of the T top mid-edges
is empty, one end of a pair of strands joined below the cut (``OPEN`` /
``CLOSE`` brackets), the strand from the origin (``ORIGIN``) or the strand
from the walk's far endpoint (``FREE``). The class of the far endpoint
(alpha, beta or epsilon side) travels with the state. Completed walks move to
absorbing ``done`` states, one per endpoint class.

Row transitions are generated once per width and insertion pattern by a
left-to-right sweep over the row's plaquettes, and stored as lists of local
states so that weights can be re-evaluated cheaply for any angles and
fugacity.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .weights import PI, LocalState, arc_triangle_visits, local_weights, state_weight

EMPTY, OPEN, CLOSE, ORIGIN, FREE = 0, 1, 2, 3, 4
NOCLASS, ALPHA, BETA, EPS = 0, 1, 2, 3
CLASS_NAMES = {ALPHA: "alpha", BETA: "beta", EPS: "epsilon"}
DONE = -1
DEFAULT_WIDTH_CAP = 8

S = LocalState


class TransferError(ValueError):
    pass


@dataclass(frozen=True)
class RowKind:
    """Insertions available in a row.

    ``origin``: the walk starts at the left mid-edge of this row.
    ``alpha`` / ``beta``: the walk may end on the left / right boundary here.
    """

    origin: bool = False
    alpha: bool = True
    beta: bool = True

    def __post_init__(self):
        if self.origin and self.alpha:
            raise TransferError("the origin row cannot also host an alpha endpoint")


BULK = RowKind()
ORIGIN_ROW = RowKind(origin=True, alpha=False, beta=True)


def _partner(line, i) -> int:
    step = 1 if line[i] == OPEN else -1
    depth = 0
    j = i
    while True:
        c = line[j]
        if c == OPEN:
            depth += step
        elif c == CLOSE:
            depth -= step
        if depth == 0:
            return j
        j += step


def _join(line: list, i: int, j: int):
    """Connect the strands ending at positions i and j; returns 'ok', 'done' or None."""
    a, b = line[i], line[j]
    pair = (OPEN, CLOSE)
    if a in pair and b in pair:
        pa, pb = _partner(line, i), _partner(line, j)
        if pa == j:
            return None  # closed loop
        line[i] = line[j] = EMPTY
        lo, hi = sorted((pa, pb))
        line[lo], line[hi] = OPEN, CLOSE
        return "ok"
    if a in pair or b in pair:
        p, other = (i, b) if a in pair else (j, a)
        line[_partner(line, p)] = other
        line[i] = line[j] = EMPTY
        return "ok"
    if {a, b} == {ORIGIN, FREE}:
        line[i] = line[j] = EMPTY
        return "done" if not any(line) else None
    return None


def _plaquette(line: list, j: int):
    """All ways to fill the plaquette whose W and S mid-edges sit at j, j+1.

    Yields (local state, new line, finished flag).
    """
    w, s = line[j], line[j + 1]
    if not w and not s:
        yield S.E0, line, False
        new = list(line)
        new[j], new[j + 1] = OPEN, CLOSE
        yield S.A_NE, new, False
    elif w and not s:
        yield S.A_WN, line, False
        new = list(line)
        new[j], new[j + 1] = EMPTY, w
        yield S.S_WE, new, False
    elif s and not w:
        yield S.A_SE, line, False
        new = list(line)
        new[j], new[j + 1] = s, EMPTY
        yield S.S_NS, new, False
    else:
        yield S.D_WN_SE, line, False
        new = list(line)
        res = _join(new, j, j + 1)
        if res is not None:
            yield S.A_WS, new, res == "done"
        new = list(line)
        res = _join(new, j, j + 1)
        if res == "ok":
            new[j], new[j + 1] = OPEN, CLOSE
            yield S.D_WS_NE, new, False


def row_transitions(state: tuple, T: int, kind: RowKind) -> list[tuple[tuple, tuple]]:
    """Every (next state, local states of the row) reachable from ``state``."""
    if state[0] == DONE:
        return [(state, (S.E0,) * T)]
    statuses, zcls = list(state[:T]), state[T]
    starts = []
    if kind.origin:
        if ORIGIN in statuses:
            raise TransferError("origin inserted twice")
        starts.append(([ORIGIN] + statuses, zcls))
    else:
        starts.append(([EMPTY] + statuses, zcls))
        if kind.alpha and zcls == NOCLASS:
            starts.append(([FREE] + statuses, ALPHA))
    out = []

    def sweep(j, line, z, chosen, finished):
        if finished:
            out.append(((DONE, z), tuple(chosen) + (S.E0,) * (T - j)))
            return
        if j == T:
            _close_row(line, z, chosen)
            return
        for st, new, fin in _plaquette(line, j):
            sweep(j + 1, new, z, chosen + [st], fin)

    def _close_row(line, z, chosen):
        e = line[T]
        if e == EMPTY:
            out.append((tuple(line[:T]) + (z,), tuple(chosen)))
            return
        if not kind.beta:
            return
        new = list(line)
        new[T] = EMPTY
        if e in (OPEN, CLOSE):
            if z != NOCLASS:
                return
            new[_partner(line, T)] = FREE
            out.append((tuple(new[:T]) + (BETA,), tuple(chosen)))
        elif e == ORIGIN:
            if z == NOCLASS and not any(new):
                out.append(((DONE, BETA), tuple(chosen)))

    for line, z in starts:
        sweep(0, line, z, [], False)
    return out


def empty_state(T: int) -> tuple:
    return (EMPTY,) * T + (NOCLASS,)


def bottom_states(T: int) -> list[tuple[tuple, int]]:
    """Cut below the lowest row: empty, or the walk's end on column k (epsilon)."""
    out = [(empty_state(T), 0)]
    for k in range(T):
        st = [EMPTY] * T
        st[k] = FREE
        out.append((tuple(st) + (EPS,), k + 1))
    return out


@dataclass
class StateSpace:
    T: int
    states: list
    index: dict
    kinds: dict  # RowKind -> (src, dst, local states)

    @property
    def n(self) -> int:
        return len(self.states)


def state_space(T: int, width_cap: int = DEFAULT_WIDTH_CAP) -> StateSpace:
    """Reachable link patterns of width T and their row transitions (cached)."""
    if T < 1:
        raise TransferError("width must be >= 1")
    if T > width_cap:
        raise TransferError(f"width {T} above cap {width_cap}")
    return _state_space(T)


@functools.lru_cache(maxsize=None)
def _state_space(T: int) -> StateSpace:
    kinds = (BULK, ORIGIN_ROW, RowKind(alpha=False, beta=True),
             RowKind(alpha=True, beta=False), RowKind(alpha=False, beta=False),
             RowKind(origin=True, alpha=False, beta=False))
    states = [s for s, _ in bottom_states(T)] + [(DONE, c) for c in (ALPHA, BETA, EPS)]
    index = {s: i for i, s in enumerate(states)}
    trans = {k: {} for k in kinds}
    frontier = list(states)
    while frontier:
        nxt = []
        for st in frontier:
            for kind in kinds:
                if kind.origin and st[0] != DONE and ORIGIN in st[:T]:
                    continue
                res = row_transitions(st, T, kind)
                trans[kind][st] = res
                for dst, _ in res:
                    if dst not in index:
                        index[dst] = len(states)
                        states.append(dst)
                        nxt.append(dst)
        frontier = nxt
    packed = {}
    for kind in kinds:
        src, dst, loc = [], [], []
        for st, res in trans[kind].items():
            for d, chosen in res:
                src.append(index[st])
                dst.append(index[d])
                loc.append(chosen)
        packed[kind] = (np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64),
                        np.asarray(loc, dtype=np.int8).reshape(len(src), T))
    return StateSpace(T, states, index, packed)


_LEFT_VISITS = np.array([sum(arc_triangle_visits(a, frozenset("WN")) for a in s.arcs) for s in S])
_RIGHT_VISITS = np.array([sum(arc_triangle_visits(a, frozenset("SE")) for a in s.arcs) for s in S])


def _is_pi3(theta: float) -> bool:
    return abs(theta - PI / 3) < 1e-12


def weight_table(thetas) -> np.ndarray:
    """(T, 9) array of local state weights per column."""
    return np.array([[state_weight(s, th) for s in S] for th in thetas])


class TransferMatrix:
    """Numeric row transfer matrices for one angle sequence and fugacity pair."""

    def __init__(self, thetas, y: float = 1.0, y_right: float = 1.0,
                 width_cap: int = DEFAULT_WIDTH_CAP):
        self.thetas = tuple(float(t) for t in thetas)
        self.T = len(self.thetas)
        if y != 1.0 and not _is_pi3(self.thetas[0]):
            raise TransferError("fugacity y != 1 needs theta_1 = pi/3")
        if y_right != 1.0 and not _is_pi3(self.thetas[-1]):
            raise TransferError("right fugacity needs theta_T = pi/3")
        self.y, self.y_right = float(y), float(y_right)
        self.space = state_space(self.T, width_cap)
        self._wt = weight_table(self.thetas)
        self._mats: dict = {}

    def matrix(self, kind: RowKind = BULK) -> sp.csr_matrix:
        """Sparse matrix M with M[dst, src] the total weight of a row of ``kind``."""
        if kind not in self._mats:
            src, dst, loc = self.space.kinds[kind]
            T = self.T
            w = np.ones(len(src))
            for k in range(T):
                w *= self._wt[k, loc[:, k]]
            if self.y != 1.0:
                w *= self.y ** _LEFT_VISITS[loc[:, 0]]
            if self.y_right != 1.0:
                w *= self.y_right ** _RIGHT_VISITS[loc[:, T - 1]]
            n = self.space.n
            self._mats[kind] = sp.csr_matrix((w, (dst, src)), shape=(n, n))
        return self._mats[kind]

    def row_weight(self, src: tuple, dst: tuple, kind: RowKind = BULK) -> float:
        idx = self.space.index
        return float(self.matrix(kind)[idx[dst], idx[src]])

    def bottom_vector(self) -> np.ndarray:
        v = np.zeros(self.space.n)
        for st, k in bottom_states(self.T):
            if k == 0:
                v[self.space.index[st]] = 1.0
            else:
                wind = self.thetas[k - 1] - PI
                v[self.space.index[st]] = math.cos(3 * wind / 8)
        return v

    def top_functionals(self) -> dict[str, np.ndarray]:
        n, idx, T = self.space.n, self.space.index, self.T
        out = {name: np.zeros(n) for name in ("A", "B", "D", "E")}
        out["A"][idx[(DONE, ALPHA)]] = 1.0
        out["B"][idx[(DONE, BETA)]] = 1.0
        out["E"][idx[(DONE, EPS)]] = 1.0
        for k in range(T):
            st = [EMPTY] * T
            st[k] = ORIGIN
            key = tuple(st) + (NOCLASS,)
            if key in idx:
                out["D"][idx[key]] = math.cos(3 * self.thetas[k] / 8)
        return out

    def sweep(self, kinds, functionals=("A", "B", "D", "E")) -> dict[str, float]:
        """Apply rows bottom to top and evaluate the top functionals."""
        v = self.bottom_vector()
        for kind in kinds:
            v = self.matrix(kind) @ v
        tops = self.top_functionals()
        return {name: float(tops[name] @ v) for name in functionals}

    def rect(self, L: int) -> dict[str, float]:
        """A, B, D, E of Rect(T, L)."""
        kinds = [BULK] * L + [ORIGIN_ROW] + [BULK] * L
        return self.sweep(kinds)

    def rect_series(self, L_max: int):
        """Yield (L, {A, B, D, E}) for L = 0, 1, ... using two incremental recursions."""
        Mb = self.matrix(BULK)
        Mo = self.matrix(ORIGIN_ROW)
        MbT = Mb.T.tocsr()
        u = self.bottom_vector()
        taus = self.top_functionals()
        for L in range(L_max + 1):
            mid = Mo @ u
            yield L, {name: float(tau @ mid) for name, tau in taus.items()}
            u = Mb @ u
            taus = {name: MbT @ tau for name, tau in taus.items()}

    def endpoint_two_point(self, L: int, side: str, row: int, start_row: int = 0) -> float:
        """G(a, b) in Rect(T, L), a the left mid-edge of ``start_row``, b the
        alpha (left) or beta (right) boundary mid-edge of ``row``."""
        if side not in ("alpha", "beta"):
            raise TransferError(f"unknown side {side!r}")
        if not (-L <= row <= L and -L <= start_row <= L):
            raise TransferError("row outside rectangle")
        if side == "alpha" and row == start_row:
            raise TransferError("endpoint coincides with the start")
        kinds = []
        for r in range(-L, L + 1):
            kinds.append(RowKind(origin=(r == start_row),
                                 alpha=(side == "alpha" and r == row),
                                 beta=(side == "beta" and r == row)))
        name = "A" if side == "alpha" else "B"
        return self.sweep(kinds, functionals=(name,))[name]

    def sector(self, which: str = "origin") -> np.ndarray:
        """Indices of active states: with the origin strand, or below the origin row."""
        T = self.T
        out = []
        for i, st in enumerate(self.space.states):
            if st[0] == DONE or not any(st[:T]):
                continue
            has_origin = ORIGIN in st[:T]
            if which == "origin" and has_origin:
                out.append(i)
            elif which == "below" and not has_origin and st[T] != EPS:
                out.append(i)
        return np.asarray(out, dtype=np.int64)


# --- strip partition functions ----------------------------------------------

@dataclass
class SeriesReport:
    T: int
    thetas: tuple
    y: float
    A: float
    B: float
    D: float
    E: float
    L: int
    converged: bool
    increment: float
    history: list = field(default_factory=list, repr=False)
    spectral_radius: float | None = None
    y_c: float | None = None
    y_c_bracket: tuple | None = None

    @property
    def strip_residual(self) -> float:
        return math.cos(3 * PI / 8) * self.A + self.B - 1.0

    @property
    def rect_residual(self) -> float:
        return math.cos(3 * PI / 8) * self.A + self.B + self.D + self.E - 1.0


def strip_partition(thetas, L: int | None = None, y: float = 1.0, eps: float = 1e-12,
                    L_max: int = 200, patience: int = 3,
                    width_cap: int = DEFAULT_WIDTH_CAP) -> SeriesReport:
    """A, B (and D, E) of Rect(T, L); with ``L=None`` iterate L until A and B settle.

    The stop rule is a relative increment below ``eps`` for ``patience``
    consecutive L. Reaching ``L_max`` first returns ``converged=False``.
    """
    tm = TransferMatrix(thetas, y=y, width_cap=width_cap)
    last = L if L is not None else L_max
    history = []
    prev = None
    quiet = 0
    converged = False
    inc = math.inf
    vals = None
    for ell, vals in tm.rect_series(last):
        history.append((ell, vals))
        if prev is not None:
            inc = max(abs(vals["A"] - prev["A"]) / max(abs(vals["A"]), 1e-300),
                      abs(vals["B"] - prev["B"]) / max(abs(vals["B"]), 1e-300))
            if not math.isfinite(vals["A"]) or not math.isfinite(vals["B"]):
                break
            quiet = quiet + 1 if inc < eps else 0
            if L is None and quiet >= patience:
                converged = True
                break
        prev = vals
    if L is not None:
        converged = True
    return SeriesReport(tm.T, tm.thetas, y, vals["A"], vals["B"], vals["D"], vals["E"],
                        history[-1][0], converged, inc, history)


# --- spectral radius and critical fugacity -----------------------------------

def power_iteration(M, tol: float = 1e-12, max_iter: int = 200000, shift: float = 1.0) -> float:
    """Spectral radius of a non-negative matrix by shifted power iteration.

    The shift removes the periodicity of imprimitive blocks; convergence is
    declared when the Rayleigh-type ratio moves by less than ``tol``.
    """
    n = M.shape[0]
    if n == 0:
        return 0.0
    v = np.full(n, 1.0 / math.sqrt(n))
    est = 0.0
    for _ in range(max_iter):
        w = M @ v + shift * v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        new = float(v @ w) / float(v @ v) - shift
        v = w / norm
        if abs(new - est) < tol:
            return new
        est = new
    return est


def growth_rate(thetas, y: float, tol: float = 1e-12, width_cap: int = DEFAULT_WIDTH_CAP) -> float:
    """Dominant eigenvalue of the bulk row operator on walks in progress."""
    tm = TransferMatrix(thetas, y=y, width_cap=width_cap)
    M = tm.matrix(BULK)
    rates = []
    for which in ("origin", "below"):
        idx = tm.sector(which)
        if len(idx):
            rates.append(power_iteration(M[idx][:, idx], tol=tol))
    return max(rates)


class BracketError(RuntimeError):
    pass


def yc_strip(thetas, tol: float = 1e-9, bracket=(1.0, 6.0),
             width_cap: int = DEFAULT_WIDTH_CAP) -> float:
    """Fugacity at which the strip growth rate reaches 1 (bisection)."""
    if not _is_pi3(thetas[0]):
        raise TransferError("critical fugacity needs theta_1 = pi/3")
    lo, hi = bracket
    f_lo = growth_rate(thetas, lo, width_cap=width_cap) - 1.0
    f_hi = growth_rate(thetas, hi, width_cap=width_cap) - 1.0
    if f_lo >= 0 or f_hi <= 0:
        raise BracketError(f"growth rate does not cross 1 on {bracket}: "
                           f"Lambda({lo})={f_lo + 1:.6g}, Lambda({hi})={f_hi + 1:.6g}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if growth_rate(thetas, mid, width_cap=width_cap) < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def width_one_closed_form(theta: float) -> dict[str, float]:
    """A and B of the width-1 strip summed as geometric series."""
    t = local_weights(theta)
    return {"A": 2 * t.u1 * t.u2 / (1 - t.v), "B": t.v + (t.u1 ** 2 + t.u2 ** 2) / (1 - t.v)}
