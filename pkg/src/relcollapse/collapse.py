"""States assigned to surfaces, spacetime points and world-lines.

A surface state starts from the scenario's initial state and applies, in a
causal order, every event lying before the surface: interactions as
unitaries, measurements as the projector of the assigned outcome.  The
vector is normalized once at the end (only if a projector was applied), so
its squared norm before normalization is the joint probability of the
conditioning outcomes.

Point states are surface states on a light cone or hyperplane through the
point:

* ``HK`` (collapse along the backward light cone of a measurement) uses the
  forward cone ``eta(P)``;
* ``FORWARD`` (collapse along the forward light cone) uses the backward
  cone ``sigma(P)``;
* ``FlatFrame`` uses the equal-time hyperplane through ``P`` in a boosted
  frame (a naive baseline, included for comparison only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .hilbert import StateVector, apply_local, project
from .scenario import Scenario, ScenarioError, WorldLine, events_before
from .spacetime import BackwardCone, CausalSurface, Event, Flat, ForwardCone, boost

IMPOSSIBLE_WEIGHT = 1e-14


class MissingOutcomeError(ScenarioError):
    pass


@dataclass(frozen=True)
class Prescription:
    """How a point is assigned a state: ``hk``, ``forward``, ``flat`` or ``explicit``."""

    kind: str
    rapidity: float = 0
    surface: Optional[CausalSurface] = None

    def __post_init__(self):
        if self.kind not in ("hk", "forward", "flat", "explicit"):
            raise ValueError(f"unknown prescription {self.kind!r}")
        if self.kind == "explicit" and self.surface is None:
            raise ValueError("explicit prescription needs a surface")

    @classmethod
    def parse(cls, text: str) -> "Prescription":
        """``hk``, ``forward``, ``flat`` or ``flat:<rapidity>``."""
        text = text.strip().lower()
        if text in ("hk", "backward"):
            return HK
        if text in ("forward", "forwardcone", "forward-cone"):
            return FORWARD
        if text.startswith("flat"):
            _, _, phi = text.partition(":")
            return cls("flat", float(phi) if phi else 0)
        raise ValueError(f"unknown prescription {text!r}")

    def __str__(self):
        if self.kind == "flat":
            return f"flat:{self.rapidity:g}"
        if self.kind == "explicit":
            return f"explicit:{self.surface}"
        return self.kind


HK = Prescription("hk")
FORWARD = Prescription("forward")


def flat_frame(rapidity=0) -> Prescription:
    return Prescription("flat", rapidity)


def explicit(surface: CausalSurface) -> Prescription:
    return Prescription("explicit", surface=surface)


@dataclass(frozen=True)
class SurfaceState:
    state: StateVector
    weight: float
    surface: CausalSurface
    outcomes: dict = field(default_factory=dict)
    applied: tuple = ()
    impossible: bool = False


def surface_state(s: Scenario, surface: CausalSurface, outcomes=None) -> SurfaceState:
    """State on ``surface`` given outcomes for the measurements before it."""
    outcomes = dict(outcomes or {})
    psi = s.initial
    used = {}
    applied = []
    for ev in events_before(s, surface):
        if ev.is_measurement:
            if ev.id not in outcomes:
                raise MissingOutcomeError(
                    f"measurement {ev.id} is before {surface} but has no assigned outcome"
                )
            psi, _ = project(ev.projector(outcomes[ev.id]), psi)
            used[ev.id] = outcomes[ev.id]
        else:
            psi = apply_local(ev.operator, psi)
        applied.append(ev.id)
    weight = psi.norm2
    if weight < IMPOSSIBLE_WEIGHT:
        return SurfaceState(psi, weight, surface, used, tuple(applied), impossible=True)
    if not used:
        # unitaries only: the vector is already normalized, rescaling would just add rounding
        return SurfaceState(psi, weight, surface, used, tuple(applied))
    state = StateVector(psi.space, psi.amplitudes / math.sqrt(weight))
    return SurfaceState(state, weight, surface, used, tuple(applied))


def point_surface(p: Event, presc: Prescription) -> CausalSurface:
    if presc.kind == "hk":
        return ForwardCone(p)
    if presc.kind == "forward":
        return BackwardCone(p)
    if presc.kind == "flat":
        return Flat(boost(p, presc.rapidity).t, presc.rapidity)
    return presc.surface


def point_state(s: Scenario, p: Event, presc: Prescription, outcomes=None) -> SurfaceState:
    return surface_state(s, point_surface(p, presc), outcomes)


# --- world-line crossings ------------------------------------------------------


def _sup_at_most(ts, fs, c):
    """sup{t : f(t) <= c} for nondecreasing piecewise-linear f, extended by its end rays."""
    if fs[-1] <= c:
        slope = (fs[-1] - fs[-2]) / (ts[-1] - ts[-2])
        return ts[-1] + (c - fs[-1]) / slope if slope > 0 else math.inf
    if fs[0] > c:
        slope = (fs[1] - fs[0]) / (ts[1] - ts[0])
        return ts[0] - (fs[0] - c) / slope if slope > 0 else -math.inf
    i = max(k for k in range(len(fs)) if fs[k] <= c)
    return ts[i] + (c - fs[i]) * (ts[i + 1] - ts[i]) / (fs[i + 1] - fs[i])


def _inf_at_least(ts, fs, c):
    """inf{t : f(t) >= c} for nondecreasing piecewise-linear f, extended by its end rays."""
    if fs[0] >= c:
        slope = (fs[1] - fs[0]) / (ts[1] - ts[0])
        return ts[0] - (fs[0] - c) / slope if slope > 0 else -math.inf
    if fs[-1] < c:
        slope = (fs[-1] - fs[-2]) / (ts[-1] - ts[-2])
        return ts[-1] + (c - fs[-1]) / slope if slope > 0 else math.inf
    i = min(k for k in range(len(fs) - 1) if fs[k + 1] >= c)
    return ts[i] + (c - fs[i]) * (ts[i + 1] - ts[i]) / (fs[i + 1] - fs[i])


def switch_time(e: Event, wl: WorldLine, presc: Prescription):
    """Lab time along ``wl`` at which the collapse due to ``e`` reaches the world-line.

    For ``hk`` and ``flat`` the event is included strictly after this time;
    for ``forward`` it is included from this time on.  Infinite values mean
    the cone or plane never meets the (extended) world-line.
    """
    ts = [v.t for v in wl.vertices]
    if presc.kind == "hk":
        # last point of the world-line still in the closed causal past of e
        return min(
            _sup_at_most(ts, [v.u for v in wl.vertices], e.u),
            _sup_at_most(ts, [v.v for v in wl.vertices], e.v),
        )
    if presc.kind == "forward":
        # first point of the world-line with e in its closed causal past
        return max(
            _inf_at_least(ts, [v.u for v in wl.vertices], e.u),
            _inf_at_least(ts, [v.v for v in wl.vertices], e.v),
        )
    if presc.kind == "flat":
        taus = [boost(v, presc.rapidity).t for v in wl.vertices]
        return _sup_at_most(ts, taus, boost(e, presc.rapidity).t)
    raise ValueError("explicit surfaces do not depend on the world-line point")


def prescription_order(s: Scenario, presc: Prescription, wl: Optional[WorldLine] = None) -> list:
    """Event indices in the order their collapses reach ``wl`` under ``presc``.

    Flat prescriptions order by boosted time and need no world-line.  Ties
    are broken by lab time, which keeps the result a linearization of the
    causal order.
    """
    if presc.kind == "flat":
        key = {k: boost(ev.at, presc.rapidity).t for k, ev in enumerate(s.events)}
    elif presc.kind in ("hk", "forward"):
        if wl is None:
            raise ValueError(f"{presc} ordering needs a world-line")
        key = {k: switch_time(ev.at, wl, presc) for k, ev in enumerate(s.events)}
    else:
        raise ValueError("explicit surfaces do not induce an event order")
    rank = {k: r for r, k in enumerate(s.canonical_order())}
    return sorted(range(len(s.events)), key=lambda k: (key[k], rank[k]))


@dataclass(frozen=True)
class TraceSegment:
    """Stretch of a world-line carrying one point state.

    ``closed_start``/``closed_end`` tell whether the boundary points share
    the segment's state.  ``entered`` lists events whose collapse first
    appears on this segment.
    """

    t_start: object
    t_end: object
    closed_start: bool
    closed_end: bool
    state: SurfaceState
    entered: tuple


def worldline_trace(s: Scenario, wl: WorldLine, presc: Prescription, outcomes=None) -> list:
    """Split ``wl`` where the prescription's cones of the scenario's events cross it."""
    t0, t1 = wl.start.t, wl.end.t
    if presc.kind == "explicit":
        cuts = []
    else:
        cuts = sorted({switch_time(ev.at, wl, presc) for ev in s.events})
        cuts = [c for c in cuts if t0 < c < t1]
    bounds = [t0] + cuts + [t1]
    switch_closed = presc.kind == "forward"
    segments = []
    previous = set()
    for k, (a, b) in enumerate(zip(bounds, bounds[1:])):
        mid = wl.position_at((a + b) / 2)
        st = point_state(s, mid, presc, outcomes)
        included = set(st.applied)
        entered = tuple(ev.id for ev in s.events if ev.id in included - previous)
        segments.append(
            TraceSegment(
                t_start=a,
                t_end=b,
                closed_start=(k == 0) or switch_closed,
                closed_end=(k == len(bounds) - 2) or not switch_closed,
                state=st,
                entered=entered,
            )
        )
        previous = included
    return segments
