"""Finite plaquette complexes: rectangles of rhombus columns, pi/3 triangles,
three-rhombus hexagons and the tilings produced by Yang-Baxter slides.

Every domain is a list of convex polygons (rhombi or unit triangles) glued
along common sides. Walks live on side midpoints ("mid-edges"), which are
identified between neighbouring faces by their coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .weights import PI, check_angle, parse_angle

_MATCH_TOL = 1e-7
# rect faces list their vertices as BL, BR, TR, TL, hence sides S, E, N, W
RECT_SIDE_NAMES = ("S", "E", "N", "W")


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class Face:
    vertices: tuple  # counter-clockwise ((x, y), ...)
    column: int | None = None
    row: int | None = None
    side_names: tuple | None = None

    @property
    def nsides(self) -> int:
        return len(self.vertices)

    @property
    def kind(self) -> str:
        return "triangle" if self.nsides == 3 else "rhombus"

    def centroid(self) -> np.ndarray:
        return np.mean(np.asarray(self.vertices), axis=0)


def _ccw(vertices) -> tuple:
    pts = np.asarray(vertices, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    if area < 0:
        pts = pts[::-1]
    return tuple((float(a), float(b)) for a, b in pts)


def _interior_angle(prev_pt, pt, next_pt) -> float:
    a = np.subtract(prev_pt, pt)
    b = np.subtract(next_pt, pt)
    c = float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))
    return math.acos(max(-1.0, min(1.0, c)))


class _PointIndex:
    """Tolerance-based identification of points in the plane."""

    def __init__(self, tol: float = _MATCH_TOL):
        self.tol = tol
        self.cells: dict[tuple[int, int], list[int]] = {}
        self.points: list[tuple[float, float]] = []

    def _cell(self, p):
        return (math.floor(p[0] / self.tol), math.floor(p[1] / self.tol))

    def find(self, p) -> int | None:
        cx, cy = self._cell(p)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for idx in self.cells.get((cx + dx, cy + dy), ()):
                    q = self.points[idx]
                    if abs(q[0] - p[0]) <= self.tol and abs(q[1] - p[1]) <= self.tol:
                        return idx
        return None

    def add(self, p) -> int:
        idx = self.find(p)
        if idx is None:
            idx = len(self.points)
            self.points.append((float(p[0]), float(p[1])))
            self.cells.setdefault(self._cell(p), []).append(idx)
        return idx


@dataclass
class Domain:
    """An immutable plaquette complex with mid-edge graph and boundary classes.

    ``face_mid[f, s]`` is the mid-edge on side ``s`` of face ``f`` (-1 padding
    for triangles); ``normal[f, s]`` its outward normal direction and
    ``corner[f, s]`` the interior angle between sides ``s`` and ``s + 1``.
    """

    kind: str
    faces: tuple
    params: dict = field(default_factory=dict)
    boundary_hint: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        nf = len(self.faces)
        self.face_mid = -np.ones((nf, 4), dtype=np.int64)
        self.normal = np.zeros((nf, 4))
        self.corner = np.zeros((nf, 4))
        self.nsides = np.array([f.nsides for f in self.faces], dtype=np.int64)
        index = _PointIndex()
        incid: dict[int, list[tuple[int, int]]] = {}
        for fi, face in enumerate(self.faces):
            vs = face.vertices
            n = len(vs)
            for s in range(n):
                p, q = np.asarray(vs[s]), np.asarray(vs[(s + 1) % n])
                mid = index.add(0.5 * (p + q))
                self.face_mid[fi, s] = mid
                d = q - p
                # outward normal of a counter-clockwise polygon points right of the edge
                self.normal[fi, s] = math.atan2(-d[0], d[1])
                self.corner[fi, s] = _interior_angle(vs[s], vs[(s + 1) % n], vs[(s + 2) % n])
                incid.setdefault(mid, []).append((fi, s))
        self.mid_xy = np.asarray(index.points)
        self.n_mid = len(index.points)
        self.mid_faces = tuple(tuple(incid[m]) for m in range(self.n_mid))
        for m, inc in enumerate(self.mid_faces):
            if len(inc) > 2:
                raise DomainError(f"mid-edge {m} shared by {len(inc)} faces")
        # other[f, s] = (face, side) across side s, or (-1, -1) on the boundary
        self.across = -np.ones((nf, 4, 2), dtype=np.int64)
        for inc in self.mid_faces:
            if len(inc) == 2:
                (f1, s1), (f2, s2) = inc
                self.across[f1, s1] = (f2, s2)
                self.across[f2, s2] = (f1, s1)
        self._index = index
        self.boundary = {}
        for m, inc in enumerate(self.mid_faces):
            if len(inc) == 1:
                self.boundary[m] = self.boundary_hint.get(m, "boundary")
        self.labels = {}
        for fi, face in enumerate(self.faces):
            if face.side_names is not None and face.column is not None:
                for s, name in enumerate(face.side_names):
                    self.labels.setdefault((face.column, face.row, name), int(self.face_mid[fi, s]))

    # --- lookups -------------------------------------------------------------

    def mid_at(self, point) -> int:
        idx = self._index.find(point)
        if idx is None:
            raise DomainError(f"no mid-edge at {point}")
        return idx

    def mid(self, column: int, row: int, side: str) -> int:
        """Mid-edge id from lattice coordinates; (k, r, E) and (k+1, r, W) agree."""
        key = (column, row, side)
        if key in self.labels:
            return self.labels[key]
        alt = {"E": (column + 1, row, "W"), "W": (column - 1, row, "E"),
               "N": (column, row + 1, "S"), "S": (column, row - 1, "N")}[side]
        if alt in self.labels:
            return self.labels[alt]
        raise DomainError(f"mid-edge {key} not in domain")

    def label_of(self, m: int):
        """Canonical lattice label, preferring W over E and S over N."""
        best = None
        for (k, r, side), mm in self.labels.items():
            if mm == m:
                cand = (k, r, side)
                if side == "E":
                    cand = (k + 1, r, "W")
                elif side == "N":
                    cand = (k, r + 1, "S")
                if best is None or cand < best:
                    best = cand
        return best

    def boundary_set(self, cls: str) -> list[int]:
        return sorted(m for m, c in self.boundary.items() if c == cls)

    @property
    def origin(self) -> int:
        if "origin" not in self.params:
            raise DomainError("domain has no origin")
        return self.params["origin"]

    def face_index(self, column: int, row: int) -> int:
        for fi, f in enumerate(self.faces):
            if f.column == column and f.row == row:
                return fi
        raise DomainError(f"no face at column {column}, row {row}")

    def internal_mids(self) -> list[int]:
        return [m for m, inc in enumerate(self.mid_faces) if len(inc) == 2]

    def signature(self) -> frozenset:
        """Set of rounded face vertex sets, for comparing tilings."""
        out = set()
        for f in self.faces:
            out.add(frozenset((round(x, 7) + 0.0, round(y, 7) + 0.0) for x, y in f.vertices))
        return frozenset(out)


# --- angle sequences --------------------------------------------------------

def angle_sequence(thetas) -> tuple[float, ...]:
    seq = tuple(check_angle(t) for t in thetas)
    if not seq:
        raise DomainError("empty angle sequence")
    return seq


def transpose(thetas, i: int) -> tuple[float, ...]:
    """Swap columns ``i`` and ``i + 1`` (1-based)."""
    seq = list(thetas)
    if not 1 <= i < len(seq):
        raise DomainError(f"transposition index {i} out of range for T={len(seq)}")
    seq[i - 1], seq[i] = seq[i], seq[i - 1]
    return tuple(seq)


def replace(thetas, k: int, theta: float) -> tuple[float, ...]:
    seq = list(thetas)
    seq[k - 1] = theta
    return tuple(seq)


def read_angle_file(path) -> list[float]:
    """One angle token per line; ``#`` starts a comment."""
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(parse_angle(line))
    return out


# --- builders ---------------------------------------------------------------

def column_offsets(thetas):
    """Left-edge abscissa and vertical offset of every column."""
    xs, ss = [0.0], [0.0]
    for th in thetas:
        xs.append(xs[-1] + math.sin(th))
        ss.append(ss[-1] - math.cos(th))
    return xs, ss


def rect_face(thetas, xs, ss, k: int, r: int) -> Face:
    th = thetas[k - 1]
    x, s = xs[k - 1], ss[k - 1]
    tl = (x, r + 0.5 + s)
    bl = (x, r - 0.5 + s)
    d = (math.sin(th), -math.cos(th))
    tr = (tl[0] + d[0], tl[1] + d[1])
    br = (bl[0] + d[0], bl[1] + d[1])
    return Face((bl, br, tr, tl), column=k, row=r, side_names=RECT_SIDE_NAMES)


def build_rect(thetas, L: int) -> Domain:
    """Rows -L..L of the strip of width ``len(thetas)``; origin is W of (1, 0)."""
    thetas = angle_sequence(thetas)
    if L < 0:
        raise DomainError("L must be >= 0")
    T = len(thetas)
    xs, ss = column_offsets(thetas)
    faces = tuple(rect_face(thetas, xs, ss, k, r)
                  for k in range(1, T + 1) for r in range(-L, L + 1))
    dom = Domain("rect", faces, params={"T": T, "L": L, "thetas": thetas})
    hint = {}
    for r in range(-L, L + 1):
        hint[dom.mid(1, r, "W")] = "alpha"
        hint[dom.mid(T, r, "E")] = "beta"
    for k in range(1, T + 1):
        hint[dom.mid(k, L, "N")] = "delta"
        hint[dom.mid(k, -L, "S")] = "epsilon"
    dom.boundary.update(hint)
    dom.boundary_hint = hint
    dom.params["origin"] = dom.mid(1, 0, "W")
    return dom


def build_strip_trunc(thetas, L: int) -> Domain:
    """Same faces as :func:`build_rect`, tagged as a truncation of the infinite strip."""
    dom = build_rect(thetas, L)
    dom.kind = "strip_trunc"
    return dom


def build_triangle(L: int) -> Domain:
    """Equilateral triangle of side 2L+1 made of unit pi/3 triangles.

    Its vertical side lies on the boundary of the width-(2L+1) pi/3 strip with
    midpoint at the origin. Boundary classes: ``alpha`` (vertical side),
    ``top`` and ``bottom`` (slanted sides). ``params['ang_position']`` maps each
    top mid-edge to its distance K (in edges) from the vertical side.
    """
    if L < 0:
        raise DomainError("L must be >= 0")
    T = 2 * L + 1
    thetas = (PI / 3,) * T
    xs, ss = column_offsets(thetas)
    h = T * math.sqrt(3) / 2
    top_v, bot_v, apex = np.array([0.0, L + 0.5]), np.array([0.0, -L - 0.5]), np.array([h, 0.0])

    def inside(p):
        eps = 1e-9
        return (p[0] > eps and
                _side(top_v, apex, p) < -eps and
                _side(bot_v, apex, p) > eps)

    faces = []
    for k in range(1, T + 1):
        for r in range(-T - 1, T + 2):
            bl, br, tr, tl = rect_face(thetas, xs, ss, k, r).vertices
            for tri in ((tl, bl, tr), (bl, br, tr)):
                c = np.mean(np.asarray(tri), axis=0)
                if inside(c):
                    faces.append(Face(_ccw(tri), column=k, row=r))
    dom = Domain("triangle", tuple(faces), params={"L": L, "T": T})
    hint, ang = {}, {}
    for m in list(dom.boundary):
        p = dom.mid_xy[m]
        if abs(p[0]) < 1e-9:
            hint[m] = "alpha"
        elif abs(_side(top_v, apex, p)) < 1e-9:
            hint[m] = "top"
            ang[m] = int(math.floor(np.linalg.norm(p - top_v)))
        elif abs(_side(bot_v, apex, p)) < 1e-9:
            hint[m] = "bottom"
        else:
            raise DomainError(f"unclassified boundary mid-edge at {p}")
    dom.boundary.update(hint)
    dom.boundary_hint = hint
    dom.params["origin"] = dom.mid_at((0.0, 0.0))
    dom.params["ang_position"] = ang
    return dom


def _side(a, b, p) -> float:
    """Cross product sign of p relative to the directed line a->b."""
    return float((b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]))


def _unit(phi):
    return np.array([math.cos(phi), math.sin(phi)])


def _rhombus(p, e1, e2) -> Face:
    p = np.asarray(p, dtype=float)
    return Face(_ccw([p, p + e1, p + e1 + e2, p + e2]))


def hexagon_tilings(base, e1, e2, e3) -> tuple[tuple[Face, ...], tuple[Face, ...]]:
    """The two rhombus tilings of the hexagon spanned by e1, e2, e3 at ``base``.

    The first has interior vertex base+e2, the second base+e1+e3.
    """
    base = np.asarray(base, dtype=float)
    first = (_rhombus(base, e1, e2), _rhombus(base + e2, e1, e3), _rhombus(base, e2, e3))
    second = (_rhombus(base + e1, e2, e3), _rhombus(base, e1, e3), _rhombus(base + e3, e1, e2))
    return first, second


def build_hexagon(d1: float, d2: float, d3: float) -> tuple[Domain, Domain]:
    """Hexagon with edge directions d1 < d2 < d3 (d3 - d1 < pi), tiled two ways."""
    if not (0 < d2 - d1 < PI and 0 < d3 - d2 < PI and 0 < d3 - d1 < PI):
        raise DomainError(f"degenerate hexagon directions {(d1, d2, d3)}")
    e1, e2, e3 = _unit(d1), _unit(d2), _unit(d3)
    first, second = hexagon_tilings((0.0, 0.0), e1, e2, e3)
    params = {"directions": (d1, d2, d3)}
    return Domain("hexagon", first, dict(params)), Domain("hexagon", second, dict(params))


# --- Yang-Baxter slides -----------------------------------------------------

def _key(p):
    return (round(float(p[0]), 7) + 0.0, round(float(p[1]), 7) + 0.0)


def hexagon_site(domain: Domain, site) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, bool]:
    """Check that three faces tile a hexagon; return (base, e1, e2, e3, is_first)."""
    site = tuple(int(f) for f in site)
    if len(set(site)) != 3:
        raise DomainError("a hexagon site needs three distinct faces")
    faces = [domain.faces[f] for f in site]
    if any(f.nsides != 4 for f in faces):
        raise DomainError("hexagon site faces must be rhombi")
    counts: dict = {}
    pts = {}
    dirs = []
    for f in faces:
        vs = np.asarray(f.vertices)
        for i in range(4):
            k = _key(vs[i])
            counts[k] = counts.get(k, 0) + 1
            pts[k] = vs[i]
            d = vs[(i + 1) % 4] - vs[i]
            a = math.atan2(d[1], d[0]) % PI
            if not any(abs(a - b) < 1e-7 or abs(abs(a - b) - PI) < 1e-7 for b in dirs):
                dirs.append(a)
    shared = [k for k, c in counts.items() if c == 3]
    if len(dirs) != 3 or len(shared) != 1 or len(counts) != 7:
        raise DomainError("faces do not form a three-rhombus hexagon")
    dirs.sort()
    e1, e2, e3 = (_unit(a) for a in dirs)
    outer = [pts[k] for k in counts if counts[k] != 3]
    center = np.mean(outer, axis=0)
    base = center - 0.5 * (e1 + e2 + e3)
    interior = pts[shared[0]]
    if np.allclose(interior, base + e2, atol=1e-7):
        is_first = True
    elif np.allclose(interior, base + e1 + e3, atol=1e-7):
        is_first = False
    else:
        raise DomainError("faces do not form a three-rhombus hexagon")
    expected = {_key(base + v) for v in (0 * e1, e1, e1 + e2, e1 + e2 + e3, e2 + e3, e3)}
    if expected != {_key(p) for p in outer}:
        raise DomainError("faces do not form a three-rhombus hexagon")
    return base, e1, e2, e3, is_first


def yb_slide(domain: Domain, site) -> Domain:
    """Rearrange the three rhombi at ``site`` into the other tiling of their hexagon."""
    base, e1, e2, e3, is_first = hexagon_site(domain, site)
    first, second = hexagon_tilings(base, e1, e2, e3)
    new = second if is_first else first
    site = set(int(f) for f in site)
    faces = [f for i, f in enumerate(domain.faces) if i not in site] + list(new)
    return _custom_from(domain, faces)


def _custom_from(domain: Domain, faces) -> Domain:
    hint_xy = {_key(domain.mid_xy[m]): c for m, c in domain.boundary.items()}
    params = {k: v for k, v in domain.params.items() if k != "origin"}
    dom = Domain("custom", tuple(faces), params)
    hint = {}
    for m in dom.boundary:
        hint[m] = hint_xy.get(_key(dom.mid_xy[m]), "boundary")
    dom.boundary.update(hint)
    dom.boundary_hint = hint
    if "origin" in domain.params:
        dom.params["origin"] = dom.mid_at(domain.mid_xy[domain.origin])
    return dom


def add_top_rhombus(rect: Domain, i: int) -> tuple[Domain, int]:
    """Glue a rhombus on the top sides of columns i, i+1 of a rectangle.

    Requires theta_i < theta_{i+1} so that the new rhombus lies outside the
    rectangle. Returns the new domain and the index of the added face.
    """
    thetas, L = rect.params["thetas"], rect.params["L"]
    if not thetas[i - 1] < thetas[i]:
        raise DomainError("top insertion needs theta_i < theta_{i+1}")
    return _add_rhombus(rect, i, L, top=True)


def add_bottom_rhombus(rect: Domain, i: int) -> tuple[Domain, int]:
    """Mirror of :func:`add_top_rhombus`, needs theta_i > theta_{i+1}."""
    thetas, L = rect.params["thetas"], rect.params["L"]
    if not thetas[i - 1] > thetas[i]:
        raise DomainError("bottom insertion needs theta_i > theta_{i+1}")
    return _add_rhombus(rect, i, -L, top=False)


def _add_rhombus(rect: Domain, i: int, row: int, top: bool):
    left = rect.faces[rect.face_index(i, row)]
    right = rect.faces[rect.face_index(i + 1, row)]
    # rect vertices are BL, BR, TR, TL
    if top:
        a, b = np.asarray(left.vertices[3]), np.asarray(left.vertices[2])
        c = np.asarray(right.vertices[2])
    else:
        a, b = np.asarray(left.vertices[0]), np.asarray(left.vertices[1])
        c = np.asarray(right.vertices[1])
    extra = Face(_ccw([a, b, c, a + (c - b)]))
    faces = list(rect.faces) + [extra]
    dom = _custom_from(rect, faces)
    return dom, len(faces) - 1


def slide_site_below(domain: Domain, face: int) -> tuple[int, int, int]:
    """Faces forming a hexagon with ``face`` and its two lower neighbours."""
    return _slide_site(domain, face, down=True)


def slide_site_above(domain: Domain, face: int) -> tuple[int, int, int]:
    return _slide_site(domain, face, down=False)


def _slide_site(domain: Domain, face: int, down: bool):
    c = domain.faces[face].centroid()
    cands = []
    for s in range(domain.nsides[face]):
        g = int(domain.across[face, s, 0])
        if g < 0:
            continue
        gc = domain.faces[g].centroid()
        if (gc[1] < c[1]) == down:
            cands.append(g)
    if len(cands) != 2:
        raise DomainError(f"face {face} has {len(cands)} neighbours on that side")
    site = (face, cands[0], cands[1])
    hexagon_site(domain, site)
    return site


def slide_down(domain: Domain, face: int) -> tuple[Domain, int]:
    """One Yang-Baxter move pushing ``face`` through the two rhombi below it.

    Returns the new domain and the index of the moved rhombus (the rearranged
    rhombus with the same edge directions as ``face``).
    """
    return _slide(domain, face, down=True)


def slide_up(domain: Domain, face: int) -> tuple[Domain, int]:
    return _slide(domain, face, down=False)


def _slide(domain: Domain, face: int, down: bool):
    site = _slide_site(domain, face, down)
    f0 = domain.faces[face]
    key0 = _edge_dirs(f0)
    new = yb_slide(domain, site)
    # the three new faces are appended last; find the one congruent to ``face``
    nf = len(new.faces)
    for idx in range(nf - 3, nf):
        if _edge_dirs(new.faces[idx]) == key0 and not _same_face(new.faces[idx], f0):
            return new, idx
    raise DomainError("moved rhombus not found")


def _edge_dirs(f: Face):
    vs = np.asarray(f.vertices)
    out = set()
    for i in range(len(vs)):
        d = vs[(i + 1) % len(vs)] - vs[i]
        out.add(round(math.atan2(d[1], d[0]) % PI, 6) % round(PI, 6))
    return frozenset(out)


def _same_face(f: Face, g: Face) -> bool:
    return {_key(p) for p in f.vertices} == {_key(p) for p in g.vertices}
