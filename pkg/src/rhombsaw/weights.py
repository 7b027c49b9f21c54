"""Integrable plaquette weights and per-state bookkeeping for rhombus traversals.

A rhombus of a column tiling has a vertical left side W, a top side N, a
vertical right side E and a bottom side S. Its upper-left and lower-right
corners have angle ``theta``; the other two have ``pi - theta``.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass

PI = math.pi
PROBABILISTIC_RANGE = (PI / 3, 2 * PI / 3)

_ANGLE_TOKEN = re.compile(r"^\s*(?:(\d+)\s*\*?\s*)?pi\s*/\s*(\d+)\s*$", re.IGNORECASE)


class AngleError(ValueError):
    """Raised for angles outside the range where the weights are defined."""


def parse_angle(token: str) -> float:
    """Parse ``pi/<int>``, ``<int>pi/<int>`` or a decimal literal (radians)."""
    m = _ANGLE_TOKEN.match(token)
    if m:
        num = int(m.group(1)) if m.group(1) else 1
        den = int(m.group(2))
        if den == 0:
            raise AngleError(f"zero denominator in angle token {token!r}")
        return num * PI / den
    try:
        return float(token)
    except ValueError:
        raise AngleError(f"cannot parse angle token {token!r}") from None


def parse_angles(text: str) -> list[float]:
    """Comma separated angle tokens, e.g. ``"pi/3,pi/2,2pi/3"``."""
    return [parse_angle(t) for t in text.split(",") if t.strip()]


def check_angle(theta: float) -> float:
    theta = float(theta)
    if not (0.0 < theta < PI):
        raise AngleError(f"angle {theta!r} outside (0, pi)")
    return theta


def is_probabilistic(theta: float, tol: float = 1e-12) -> bool:
    """True when all five weights are non-negative, i.e. theta in [pi/3, 2pi/3]."""
    lo, hi = PROBABILISTIC_RANGE
    return lo - tol <= theta <= hi + tol


@dataclass(frozen=True)
class WeightTable:
    theta: float
    u1: float
    u2: float
    v: float
    w1: float
    w2: float

    def swapped(self) -> "WeightTable":
        """The table with the roles of the two corner types exchanged."""
        return WeightTable(PI - self.theta, self.u2, self.u1, self.v, self.w2, self.w1)

    def as_dict(self) -> dict[str, float]:
        return {"theta": self.theta, "u1": self.u1, "u2": self.u2,
                "v": self.v, "w1": self.w1, "w2": self.w2}


def local_weights(theta: float) -> WeightTable:
    theta = check_angle(theta)
    t = 3.0 * theta / 8.0
    s54 = math.sin(5 * PI / 4)
    den = math.sin(5 * PI / 4 + t) * math.sin(5 * PI / 8 - t)
    u1 = s54 * math.sin(5 * PI / 8 + t) / den
    u2 = s54 * math.sin(t) / den
    v = math.sin(5 * PI / 8 + t) * math.sin(-t) / den
    w1 = math.sin(5 * PI / 8 + t) * math.sin(5 * PI / 4 - t) / den
    # sin(15pi/8 + t) rewritten as -sin(pi/8 - t), which vanishes exactly at theta = pi/3
    w2 = math.sin(PI / 8 - t) * math.sin(t) / den + 0.0  # + 0.0 turns -0.0 into 0.0
    return WeightTable(theta, u1, u2, v, w1, w2)


def corner_arc_weight(phi: float) -> float:
    """Weight of a single arc cutting off a corner of interior angle ``phi``."""
    return local_weights(phi).u1


def double_arc_weight(phi: float) -> float:
    """Weight of the two arcs cutting off both corners of interior angle ``phi``."""
    return local_weights(phi).w1


def straight_weight(phi: float) -> float:
    return local_weights(phi).v


# --- local states -----------------------------------------------------------

SIDES = ("W", "N", "E", "S")

# outward normal direction of each side, as a function of theta
_NORMAL = {
    "W": lambda th: PI,
    "N": lambda th: th,
    "E": lambda th: 0.0,
    "S": lambda th: th - PI,
}


class LocalState(enum.IntEnum):
    E0 = 0
    A_WN = 1
    A_SE = 2
    A_WS = 3
    A_NE = 4
    S_WE = 5
    S_NS = 6
    D_WN_SE = 7
    D_WS_NE = 8

    @property
    def arcs(self) -> tuple[frozenset, ...]:
        return _ARCS[self]

    @property
    def weight_class(self) -> str:
        return _CLASS[self]

    @property
    def sides(self) -> frozenset:
        return frozenset().union(*self.arcs) if self.arcs else frozenset()


_ARCS = {
    LocalState.E0: (),
    LocalState.A_WN: (frozenset("WN"),),
    LocalState.A_SE: (frozenset("SE"),),
    LocalState.A_WS: (frozenset("WS"),),
    LocalState.A_NE: (frozenset("NE"),),
    LocalState.S_WE: (frozenset("WE"),),
    LocalState.S_NS: (frozenset("NS"),),
    LocalState.D_WN_SE: (frozenset("WN"), frozenset("SE")),
    LocalState.D_WS_NE: (frozenset("WS"), frozenset("NE")),
}

_CLASS = {
    LocalState.E0: "one",
    LocalState.A_WN: "u1",
    LocalState.A_SE: "u1",
    LocalState.A_WS: "u2",
    LocalState.A_NE: "u2",
    LocalState.S_WE: "v",
    LocalState.S_NS: "v",
    LocalState.D_WN_SE: "w1",
    LocalState.D_WS_NE: "w2",
}

# corner type (1: angle theta, 2: angle pi - theta) of each arc
_ARC_CORNER = {
    frozenset("WN"): 1, frozenset("SE"): 1,
    frozenset("WS"): 2, frozenset("NE"): 2,
}

_BY_ARCS = {frozenset(s.arcs): s for s in LocalState}


def state_from_arcs(arcs) -> LocalState:
    """Look up the state drawing exactly the given side pairs.

    Raises ``ValueError`` for crossing or side-sharing combinations.
    """
    key = frozenset(frozenset(a) for a in arcs)
    try:
        return _BY_ARCS[key]
    except KeyError:
        raise ValueError(f"illegal arc combination {sorted(''.join(sorted(a)) for a in key)}") from None


def _as_state(state) -> LocalState:
    try:
        return LocalState(state)
    except ValueError:
        raise ValueError(f"illegal local state {state!r}") from None


def state_weight(state, theta: float) -> float:
    state = _as_state(state)
    cls = state.weight_class
    if cls == "one":
        return 1.0
    return getattr(local_weights(theta), cls)


def arc_length(arc, theta: float) -> float:
    arc = frozenset(arc)
    if arc in (frozenset("WE"), frozenset("NS")):
        return 2.0
    corner = _ARC_CORNER[arc]
    return 3.0 * (theta if corner == 1 else PI - theta) / PI


def state_length(state, theta: float) -> float:
    state = _as_state(state)
    return sum(arc_length(a, theta) for a in state.arcs)


def wrap_angle(a: float) -> float:
    """Reduce to (-pi, pi]."""
    a = math.fmod(a + PI, 2 * PI)
    if a <= 0:
        a += 2 * PI
    return a - PI


def turning(entry: str, exit: str, theta: float) -> float:
    """Signed turning of a path entering through side ``entry`` and leaving through ``exit``."""
    heading_in = _NORMAL[entry](theta) + PI
    return wrap_angle(_NORMAL[exit](theta) - heading_in)


def state_turning(state, traversal: tuple[str, str], theta: float) -> float:
    state = _as_state(state)
    entry, exit = traversal
    if frozenset((entry, exit)) not in state.arcs or entry == exit:
        raise ValueError(f"traversal {entry}->{exit} is not an arc of {state.name}")
    return turning(entry, exit, theta)


LEFT_TRIANGLE_SIDES = frozenset("WN")
RIGHT_TRIANGLE_SIDES = frozenset("SE")


def arc_triangle_visits(arc, triangle_sides: frozenset) -> int:
    """1 if the arc passes through the half-triangle bounded by ``triangle_sides``."""
    return int(bool(frozenset(arc) & triangle_sides))


def left_triangle_visits(state) -> int:
    """Visits to the boundary-side triangle of a pi/3 rhombus in the first column."""
    state = _as_state(state)
    if state is LocalState.D_WS_NE:
        raise ValueError("D_WS_NE has zero weight at pi/3; triangle visits undefined")
    return sum(arc_triangle_visits(a, LEFT_TRIANGLE_SIDES) for a in state.arcs)


def right_triangle_visits(state) -> int:
    """Same as :func:`left_triangle_visits` for a pi/3 rhombus on the right boundary."""
    state = _as_state(state)
    if state is LocalState.D_WS_NE:
        raise ValueError("D_WS_NE has zero weight at pi/3; triangle visits undefined")
    return sum(arc_triangle_visits(a, RIGHT_TRIANGLE_SIDES) for a in state.arcs)


def y_star() -> float:
    return 1.0 + math.sqrt(2.0)
