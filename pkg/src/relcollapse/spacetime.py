"""Minkowski geometry in 1+1 dimensions.

Coordinates are lab-frame ``(t, x)`` in natural units (c = 1).  Events built
from :class:`fractions.Fraction` or ``int`` coordinates are compared exactly;
only boosts by a nonzero rapidity fall back to floating point.
"""

from __future__ import annotations

import enum
import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Iterable, Iterator, Sequence, Union


@dataclass(frozen=True)
class Event:
    """A spacetime point ``(t, x)`` in the lab frame."""

    t: Real
    x: Real

    def __post_init__(self):
        for name in ("t", "x"):
            value = getattr(self, name)
            if isinstance(value, float) and not math.isfinite(value):
                raise ValueError(f"event coordinate {name}={value!r} is not finite")

    @property
    def u(self):
        """Retarded light-cone coordinate ``t - x``."""
        return self.t - self.x

    @property
    def v(self):
        """Advanced light-cone coordinate ``t + x``."""
        return self.t + self.x

    def __str__(self):
        return f"({_fmt(self.t)},{_fmt(self.x)})"


def _fmt(value) -> str:
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else str(value)
    return repr(value)


class CausalRelation(enum.Enum):
    """Where ``e2`` lies as seen from ``e1``."""

    TIMELIKE_PAST = "timelike-past"
    LIGHTLIKE_PAST = "lightlike-past"
    SPACELIKE = "spacelike"
    LIGHTLIKE_FUTURE = "lightlike-future"
    TIMELIKE_FUTURE = "timelike-future"
    COINCIDENT = "coincident"

    @property
    def is_past(self) -> bool:
        return self in (CausalRelation.TIMELIKE_PAST, CausalRelation.LIGHTLIKE_PAST)

    @property
    def is_future(self) -> bool:
        return self in (CausalRelation.TIMELIKE_FUTURE, CausalRelation.LIGHTLIKE_FUTURE)

    def reversed(self) -> "CausalRelation":
        return _REVERSE[self]


_REVERSE = {
    CausalRelation.TIMELIKE_PAST: CausalRelation.TIMELIKE_FUTURE,
    CausalRelation.LIGHTLIKE_PAST: CausalRelation.LIGHTLIKE_FUTURE,
    CausalRelation.SPACELIKE: CausalRelation.SPACELIKE,
    CausalRelation.LIGHTLIKE_FUTURE: CausalRelation.LIGHTLIKE_PAST,
    CausalRelation.TIMELIKE_FUTURE: CausalRelation.TIMELIKE_PAST,
    CausalRelation.COINCIDENT: CausalRelation.COINCIDENT,
}


class SurfaceSide(enum.Enum):
    BEFORE = "before"
    AFTER = "after"
    ON = "on"


# --- surfaces -------------------------------------------------------------


@dataclass(frozen=True)
class Flat:
    """The hyperplane ``t' = t0`` in the frame boosted by ``rapidity``."""

    t0: Real
    rapidity: Real = 0

    def __post_init__(self):
        if not math.isfinite(float(self.rapidity)):
            raise ValueError("flat surface rapidity must be finite")

    def __str__(self):
        return f"flat({_fmt(self.t0)},{_fmt(self.rapidity)})"


@dataclass(frozen=True)
class BackwardCone:
    """The backward light cone with vertex ``vertex`` (sigma(P))."""

    vertex: Event

    def __str__(self):
        return f"sigma{self.vertex}"


@dataclass(frozen=True)
class ForwardCone:
    """The forward light cone with vertex ``vertex`` (eta(P))."""

    vertex: Event

    def __str__(self):
        return f"eta{self.vertex}"


@dataclass(frozen=True)
class UnionBackwardCones:
    """The surface lying immediately after the union of several backward cones."""

    vertices: tuple

    def __post_init__(self):
        vertices = tuple(dict.fromkeys(self.vertices))
        if not vertices:
            raise ValueError("UnionBackwardCones needs at least one vertex")
        object.__setattr__(self, "vertices", vertices)

    def __str__(self):
        return "union(" + ";".join(str(v)[1:-1] for v in self.vertices) + ")"


CausalSurface = Union[Flat, BackwardCone, ForwardCone, UnionBackwardCones]


# --- basic geometry -------------------------------------------------------


def interval(e1: Event, e2: Event):
    """Squared interval ``dt**2 - dx**2`` (positive for timelike separation)."""
    dt = e2.t - e1.t
    dx = e2.x - e1.x
    return dt * dt - dx * dx


def causal_relation(e1: Event, e2: Event) -> CausalRelation:
    """Classify ``e2`` relative to ``e1``."""
    if e1 == e2:
        return CausalRelation.COINCIDENT
    s = interval(e1, e2)
    future = e2.t > e1.t
    if s > 0:
        return CausalRelation.TIMELIKE_FUTURE if future else CausalRelation.TIMELIKE_PAST
    if s == 0:
        return CausalRelation.LIGHTLIKE_FUTURE if future else CausalRelation.LIGHTLIKE_PAST
    return CausalRelation.SPACELIKE


def in_causal_past(e: Event, of: Event) -> bool:
    """True if ``e`` lies in the closed causal past of ``of`` (excluding ``of`` itself)."""
    return causal_relation(of, e).is_past


def boost(e: Event, rapidity) -> Event:
    """Coordinates of ``e`` in the frame moving with ``rapidity`` relative to the lab."""
    if rapidity == 0:
        return e
    ch = math.cosh(rapidity)
    sh = math.sinh(rapidity)
    t = float(e.t)
    x = float(e.x)
    return Event(t * ch - x * sh, x * ch - t * sh)


def boost_doppler(e: Event, k) -> Event:
    """Exact boost with Doppler factor ``k = exp(rapidity)``: ``u -> k u``, ``v -> v / k``.

    With a rational ``k`` and rational coordinates the result is exact, so
    lightlike separations stay lightlike.
    """
    if k <= 0:
        raise ValueError("Doppler factor must be positive")
    u = e.u * k
    v = e.v / k
    return Event((u + v) / 2, (v - u) / 2)


def side_of_surface(e: Event, surface: CausalSurface) -> SurfaceSide:
    """Whether ``e`` is before, after, or on ``surface``.

    Boundary conventions: an event on the backward cone of ``P`` (lightlike
    past) is *before* sigma(P); an event on the forward cone of ``P``
    (lightlike future) is *after* eta(P).
    """
    if isinstance(surface, Flat):
        t = boost(e, surface.rapidity).t
        if t < surface.t0:
            return SurfaceSide.BEFORE
        if t > surface.t0:
            return SurfaceSide.AFTER
        return SurfaceSide.ON
    if isinstance(surface, BackwardCone):
        rel = causal_relation(surface.vertex, e)
        if rel is CausalRelation.COINCIDENT:
            return SurfaceSide.ON
        return SurfaceSide.BEFORE if rel.is_past else SurfaceSide.AFTER
    if isinstance(surface, ForwardCone):
        rel = causal_relation(surface.vertex, e)
        if rel is CausalRelation.COINCIDENT:
            return SurfaceSide.ON
        return SurfaceSide.AFTER if rel.is_future else SurfaceSide.BEFORE
    if isinstance(surface, UnionBackwardCones):
        sides = [side_of_surface(e, BackwardCone(p)) for p in surface.vertices]
        if SurfaceSide.BEFORE in sides:
            return SurfaceSide.BEFORE
        if SurfaceSide.ON in sides:
            return SurfaceSide.ON
        return SurfaceSide.AFTER
    raise TypeError(f"not a causal surface: {surface!r}")


# --- causal order and its linearizations ------------------------------------


class CycleError(ValueError):
    pass


def causal_partial_order(events: Sequence[Event]) -> set:
    """Index pairs ``(i, j)`` with ``events[i]`` in the causal past of ``events[j]``."""
    if len(set(events)) != len(events):
        raise ValueError("causal_partial_order requires pairwise distinct events")
    order = set()
    for i, j in itertools.permutations(range(len(events)), 2):
        if in_causal_past(events[i], events[j]):
            order.add((i, j))
    return order


def _predecessor_masks(order: Iterable, n: int) -> list:
    preds = [0] * n
    for i, j in order:
        if i == j:
            raise CycleError(f"self-loop on node {i}")
        preds[j] |= 1 << i
    return preds


def count_linearizations(order: Iterable, n: int) -> int:
    """Number of topological sorts of ``order`` over nodes ``0..n-1``."""
    return _completion_counts(_predecessor_masks(order, n), n)[0]


def _completion_counts(preds: list, n: int) -> dict:
    """Map placed-set bitmask -> number of ways to finish the sort from there."""
    full = (1 << n) - 1
    memo = {full: 1}

    def count(mask):
        if mask in memo:
            return memo[mask]
        total = 0
        for k in range(n):
            if not mask >> k & 1 and preds[k] & ~mask == 0:
                total += count(mask | 1 << k)
        memo[mask] = total
        return total

    count(0)
    if memo[0] == 0 and n:
        raise CycleError("causal order contains a cycle")
    return memo


def linearizations(
    order: Iterable, n: int, cap: int = 1000, seed: int = 0
) -> Iterator[tuple]:
    """Yield topological sorts of ``order`` over nodes ``0..n-1``.

    When there are at most ``cap`` of them, all are yielded in lexicographic
    order.  Otherwise ``cap`` distinct sorts are drawn uniformly at random from
    a generator seeded with ``seed``, so the sample is reproducible.
    """
    order = list(order)
    preds = _predecessor_masks(order, n)
    if n > 24:
        raise ValueError("too many events to enumerate linearizations")
    counts = _completion_counts(preds, n)
    total = counts[0]
    if total <= cap:
        yield from _all_sorts(preds, n)
        return
    rng = random.Random(seed)
    seen = set()
    while len(seen) < cap:
        lin = _uniform_sort(preds, n, counts, rng)
        if lin not in seen:
            seen.add(lin)
            yield lin


def _all_sorts(preds: list, n: int) -> Iterator[tuple]:
    prefix: list = []

    def rec(mask):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for k in range(n):
            if not mask >> k & 1 and preds[k] & ~mask == 0:
                prefix.append(k)
                yield from rec(mask | 1 << k)
                prefix.pop()

    yield from rec(0)


def _uniform_sort(preds: list, n: int, counts: dict, rng: random.Random) -> tuple:
    mask = 0
    out = []
    for _ in range(n):
        ready = [k for k in range(n) if not mask >> k & 1 and preds[k] & ~mask == 0]
        weights = [counts[mask | 1 << k] for k in ready]
        k = rng.choices(ready, weights=weights)[0]
        out.append(k)
        mask |= 1 << k
    return tuple(out)


def respects(linear: Sequence[int], order: Iterable) -> bool:
    """True if the total order ``linear`` is consistent with ``order``."""
    pos = {node: i for i, node in enumerate(linear)}
    return all(pos[i] < pos[j] for i, j in order)
