"""Yang-Baxter equation for the plaquette weights and its consequences.

The local check compares the two tilings of a three-rhombus hexagon. For
every way of connecting boundary mid-edges of the hexagon by disjoint paths,
the total weight of local configurations realising that connectivity must be
the same in both tilings. Closed loops are discarded (loop weight zero).
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from .enumeration import two_point
from .tiling import (Domain, DomainError, _key, add_top_rhombus, build_hexagon, build_rect,
                     slide_down, transpose)
from .transfer import TransferMatrix
from .weights import PI, local_weights

# --- exhaustive local check -------------------------------------------------

# local states of a quadrilateral as tuples of arcs between side indices
QUAD_STATES = (
    (),
    ((0, 1),), ((1, 2),), ((2, 3),), ((3, 0),),
    ((0, 2),), ((1, 3),),
    ((0, 1), (2, 3)), ((1, 2), (3, 0)),
)


def _state_factor(state) -> tuple:
    """(kind, corner side) describing the weight of a quadrilateral state."""
    if not state:
        return ("one", 0)
    if len(state) == 2:
        return ("w1", state[0][0])
    a, b = state[0]
    if (b - a) % 4 == 2:
        return ("v", 0)
    return ("u1", a)


@dataclass(frozen=True)
class _Config:
    connectivity: frozenset  # frozenset of frozensets of boundary point keys
    factors: tuple           # ((face, kind, corner side), ...)


def _configs(dom: Domain) -> list[_Config]:
    nf = len(dom.faces)
    internal = set(dom.internal_mids())
    out = []
    for states in itertools.product(QUAD_STATES, repeat=nf):
        degree: dict[int, int] = {}
        adj: dict[int, list[int]] = {}
        for f, st in enumerate(states):
            for a, b in st:
                ma, mb = int(dom.face_mid[f, a]), int(dom.face_mid[f, b])
                for m, o in ((ma, mb), (mb, ma)):
                    degree[m] = degree.get(m, 0) + 1
                    adj.setdefault(m, []).append(o)
        if any(degree.get(m, 0) == 1 for m in internal):
            continue
        ends = sorted(m for m in degree if m not in internal)
        seen = set()
        pairs = []
        for e in ends:
            if e in seen:
                continue
            prev, cur = None, e
            seen.add(cur)
            while True:
                nxt = [o for o in adj[cur] if o != prev]
                if not nxt:
                    break
                prev, cur = cur, nxt[0]
                seen.add(cur)
            pairs.append(frozenset((_key(dom.mid_xy[e]), _key(dom.mid_xy[cur]))))
        if len(seen) != len(degree):
            continue  # a closed loop survives
        factors = tuple((f,) + _state_factor(st) for f, st in enumerate(states))
        out.append(_Config(frozenset(pairs), factors))
    return out


def _topology(dom: Domain) -> tuple:
    return (dom.face_mid.tobytes(), dom.across.tobytes())


@functools.lru_cache(maxsize=8)
def _cached_configs(which: int, topology: tuple):
    ref = build_hexagon(0.0, PI / 3, 2 * PI / 3)[which]
    if _topology(ref) != topology:
        return None
    return _configs(ref)


def _config_table(dom: Domain, which: int) -> list[_Config]:
    cfgs = _cached_configs(which, _topology(dom))
    return cfgs if cfgs is not None else _configs(dom)


def _evaluate(dom: Domain, configs) -> dict:
    """Total weight per connectivity class, keyed by point coordinates."""
    tabs = [{s: local_weights(dom.corner[f, s]) for s in range(4)} for f in range(len(dom.faces))]
    out: dict = {}
    for cfg in configs:
        w = 1.0
        for f, kind, s in cfg.factors:
            if kind != "one":
                w *= getattr(tabs[f][s], kind)
        out[cfg.connectivity] = out.get(cfg.connectivity, 0.0) + w
    return out


def canonical_directions(d1: float, d2: float, d3: float) -> tuple[float, float, float]:
    """Edge directions reduced mod pi and sorted, so that they span less than pi."""
    ds = sorted(d % PI for d in (d1, d2, d3))
    return tuple(ds)


def yb_class_weights(d1: float, d2: float, d3: float) -> tuple[dict, dict]:
    """Connectivity-class weights of both tilings of the hexagon."""
    H, H2 = build_hexagon(*canonical_directions(d1, d2, d3))
    return _evaluate(H, _config_table(H, 0)), _evaluate(H2, _config_table(H2, 1))


def check_yb(d1: float, d2: float, d3: float) -> float:
    """Largest absolute difference of class weights between the two tilings."""
    a, b = yb_class_weights(d1, d2, d3)
    return max(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in set(a) | set(b))


def yb_grid(n: int = 20, lo: float = 0.1, hi: float = PI - 0.1, degenerate_tol: float = 1e-9):
    """Residuals over an n x n grid of consecutive direction gaps.

    Points where the three directions coincide mod pi do not span a hexagon;
    they are returned separately rather than evaluated.
    """
    gaps = np.linspace(lo, hi, n)
    residuals, skipped = [], []
    for g1 in gaps:
        for g2 in gaps:
            if abs((g1 + g2) % PI) < degenerate_tol or abs((g1 + g2) % PI - PI) < degenerate_tol:
                skipped.append((float(g1), float(g2)))
                continue
            residuals.append(((float(g1), float(g2)), check_yb(0.0, g1, g1 + g2)))
    return residuals, skipped


def yb_random(count: int = 400, seed: int = 0):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        d = rng.uniform(0.0, PI, size=3)
        ds = canonical_directions(*d)
        if min(ds[1] - ds[0], ds[2] - ds[1], PI - (ds[2] - ds[0])) < 1e-6:
            continue
        out.append((tuple(float(x) for x in d), check_yb(*d)))
    return out


# --- slides in finite domains ---------------------------------------------

def _hexagon_interior(domain: Domain, site) -> set[int]:
    site = set(int(f) for f in site)
    out = set()
    for m, inc in enumerate(domain.mid_faces):
        if len(inc) == 2 and inc[0][0] in site and inc[1][0] in site:
            out.add(m)
    return out


def check_slide_invariance(domain: Domain, site, a: int, b: int, moved=None):
    """G(a, b) before and after the Yang-Baxter move at ``site``.

    ``moved`` is an already computed rearranged domain (as produced by
    :func:`rhombsaw.tiling.slide_down`), otherwise the site is flipped here.
    """
    from .tiling import yb_slide

    inner = _hexagon_interior(domain, site)
    if a in inner or b in inner:
        raise DomainError("endpoints must not lie inside the hexagon")
    after = moved if moved is not None else yb_slide(domain, site)
    g0 = two_point(domain, a, b)
    a2 = after.mid_at(domain.mid_xy[a])
    b2 = after.mid_at(domain.mid_xy[b])
    g1 = two_point(after, a2, b2)
    return g0, g1, abs(g0 - g1)


def slide_chain(thetas, L: int, i: int) -> list[Domain]:
    """Domains obtained by pushing a rhombus glued on top of columns i, i+1 to the bottom.

    The first domain is Rect(thetas, L) plus the top rhombus; every further
    one is a single Yang-Baxter move. The last is Rect(thetas o tau_i, L)
    plus a rhombus below, which takes 2L+1 moves.
    """
    dom, face = add_top_rhombus(build_rect(thetas, L), i)
    chain = [dom]
    for _ in range(2 * L + 1):
        dom, face = slide_down(dom, face)
        chain.append(dom)
    return chain


def chain_two_points(chain, a_xy, b_xy) -> list[float]:
    return [two_point(d, d.mid_at(a_xy), d.mid_at(b_xy)) for d in chain]


# --- strips: column swaps and monotonicity -----------------------------------

def rect_two_point(thetas, L: int, b_row: int, a_row: int = 0, side: str = "alpha") -> float:
    """G(a, b) in Rect(thetas, L) for a on the left boundary, by transfer matrix."""
    return TransferMatrix(thetas).endpoint_two_point(L, side, b_row, start_row=a_row)


def column_swap_experiment(thetas, i: int, a_row: int = 0, b_row: int = 1, Ls=range(1, 31)) -> list[tuple]:
    """|G_Rect(thetas) - G_Rect(thetas o tau_i)| for each L, a and b on the left boundary."""
    if not 1 <= i < len(thetas):
        raise ValueError("need 1 <= i < T")
    swapped = transpose(thetas, i)
    tm, tm2 = TransferMatrix(thetas), TransferMatrix(swapped)
    out = []
    for L in Ls:
        if not (-L <= a_row <= L and -L <= b_row <= L):
            continue
        g = tm.endpoint_two_point(L, "alpha", b_row, start_row=a_row)
        g2 = tm2.endpoint_two_point(L, "alpha", b_row, start_row=a_row)
        out.append((L, g, g2, abs(g - g2)))
    return out


def arc_weight(theta: float, k: int) -> float:
    """Weight of a last-column arc made of a u1 rhombus, k straights and a u2 rhombus."""
    t = local_weights(theta)
    return t.u1 * t.v ** k * t.u2


def arc_weight_ratios(ks=range(7), thetas=None) -> np.ndarray:
    """Ratios arc_weight(theta, k) / arc_weight(pi/3, k) on a grid of probabilistic angles."""
    if thetas is None:
        thetas = np.linspace(PI / 3, 2 * PI / 3, 61)
    return np.array([[arc_weight(th, k) / arc_weight(PI / 3, k) for th in thetas] for k in ks])


def strip_bound(thetas, L: int, a_row: int, b_row: int, reference=None) -> tuple[float, float]:
    """(G_Rect(thetas), G_Rect(reference)) at matched truncation; reference defaults to all pi/3."""
    if reference is None:
        reference = (PI / 3,) * len(thetas)
    return (rect_two_point(thetas, L, b_row, a_row), rect_two_point(reference, L, b_row, a_row))


def last_column_bound(thetas, L: int, a_row: int, b_row: int) -> tuple[float, float]:
    """G with the given angles and with the last angle replaced by pi/3."""
    ref = tuple(thetas[:-1]) + (PI / 3,)
    return strip_bound(thetas, L, a_row, b_row, reference=ref)


def universality_table(thetas, a_row: int, b_row: int, Ls) -> list[tuple]:
    """(L, G_Theta, G_pi/3, difference) for growing truncations."""
    out = []
    for L in Ls:
        g, g3 = strip_bound(thetas, L, a_row, b_row)
        out.append((L, g, g3, g - g3))
    return out
