"""Experiment descriptions: subsystems, world-lines, events, initial state.

Scenarios are read from and written to a small section-based text format
(``.scn``)::

    [scenario] name=fig3 initial_surface=flat(0,0)
    [subsystem] name=A dim=5
    [worldline] subsystem=A points=(0,0);(2,-1);(12,-1)
    [initial] subsystems=A,B expr=builtin.mixed_initial
    [event] id=M at=(3,1) kind=measurement targets=B outcomes=pi:builtin.pi_projector,K:builtin.kbar_projector
    [flag] name=phi1 even=mzL1+mzR1;mxL1+mxR1
    [query] kind=surface-state surface=sigma(4,-1)

Every section is one header followed by ``key=value`` tokens, which may
continue on following lines.  ``#`` starts a comment.  Operator and state
names prefixed ``builtin.`` are resolved by :mod:`relcollapse.gadgets`;
initial amplitudes may instead be given inline as ``re+imi`` values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .hilbert import (
    LocalOperator,
    OperatorKind,
    SpaceDescriptor,
    StateVector,
    SubsystemLabel,
    kron_state,
    permute_state,
)
from .spacetime import (
    BackwardCone,
    CausalSurface,
    Event,
    Flat,
    ForwardCone,
    SurfaceSide,
    UnionBackwardCones,
    causal_partial_order,
    side_of_surface,
)

COMPLETENESS_TOL = 1e-10
NORM_TOL = 1e-10


class ScenarioError(ValueError):
    pass


class ScenarioParseError(ScenarioError):
    def __init__(self, message, line=None, column=None, path=None):
        where = ""
        if line is not None:
            where = f"{path or '<scenario>'}:{line}:{column or 1}: "
        super().__init__(where + message)
        self.line = line
        self.column = column


class ScenarioValidationError(ScenarioError):
    def __init__(self, violations):
        super().__init__("invalid scenario:\n  " + "\n  ".join(violations))
        self.violations = list(violations)


class SurfaceContactError(ScenarioError):
    """An event lies exactly on the surface being queried."""


# --- data model ----------------------------------------------------------


def _exact(value) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


@dataclass(frozen=True)
class WorldLine:
    """Piecewise-linear path of one subsystem, vertices ordered by time."""

    subsystem: str
    vertices: tuple

    def violations(self) -> list:
        out = []
        if len(self.vertices) < 2:
            out.append(f"world-line of {self.subsystem} needs at least two points")
        for a, b in zip(self.vertices, self.vertices[1:]):
            dt = _exact(b.t) - _exact(a.t)
            dx = _exact(b.x) - _exact(a.x)
            if dt <= 0:
                out.append(f"world-line of {self.subsystem}: time not increasing at {a} -> {b}")
            elif abs(dx) > dt:
                out.append(f"world-line of {self.subsystem}: superluminal segment {a} -> {b}")
        return out

    @property
    def start(self) -> Event:
        return self.vertices[0]

    @property
    def end(self) -> Event:
        return self.vertices[-1]

    def contains(self, e: Event) -> bool:
        """Exact test that ``e`` lies on the path."""
        t, x = _exact(e.t), _exact(e.x)
        for a, b in zip(self.vertices, self.vertices[1:]):
            t0, x0, t1, x1 = _exact(a.t), _exact(a.x), _exact(b.t), _exact(b.x)
            if t0 <= t <= t1 and t1 > t0:
                if (x - x0) * (t1 - t0) == (x1 - x0) * (t - t0):
                    return True
        return False

    def position_at(self, t) -> Event:
        """Point of the path at lab time ``t`` (exact for rational input)."""
        for a, b in zip(self.vertices, self.vertices[1:]):
            if a.t <= t <= b.t:
                if t == a.t:
                    return a
                frac = (t - a.t) / (b.t - a.t)
                return Event(t, a.x + frac * (b.x - a.x))
        raise ValueError(f"time {t} outside world-line of {self.subsystem}")


@dataclass(frozen=True)
class EventSpec:
    """An interaction or a measurement anchored at a spacetime point.

    ``ref`` is the textual operator reference kept for round-tripping;
    ``operator`` (interactions) or ``outcomes`` (measurements) hold the
    resolved operators.
    """

    id: str
    at: Event
    kind: str
    targets: tuple
    ref: str
    operator: Optional[LocalOperator] = field(default=None, compare=False)
    outcomes: tuple = field(default=(), compare=False)

    @property
    def is_measurement(self) -> bool:
        return self.kind == "measurement"

    @property
    def outcome_names(self) -> tuple:
        return tuple(name for name, _ in self.outcomes)

    def projector(self, outcome: str) -> LocalOperator:
        for name, proj in self.outcomes:
            if name == outcome:
                return proj
        raise KeyError(f"event {self.id} has no outcome {outcome!r}; choices {self.outcome_names}")


@dataclass(frozen=True)
class Flag:
    """Derived yes/no predicate over measurement outcomes.

    True when every group of binary outcomes (named ``"0"``/``"1"``) has even
    parity; used for "probe state found" in the isospin gadget.
    """

    name: str
    even_groups: tuple

    def __call__(self, assignment) -> bool:
        for group in self.even_groups:
            if sum(int(assignment[eid]) for eid in group) % 2:
                return False
        return True

    @property
    def event_ids(self) -> tuple:
        return tuple(eid for group in self.even_groups for eid in group)


@dataclass(frozen=True)
class InitialFactor:
    subsystems: tuple
    expr: str


@dataclass(frozen=True)
class Query:
    kind: str
    params: tuple  # ordered (key, value) pairs, kept verbatim

    def get(self, key, default=None):
        for k, v in self.params:
            if k == key:
                return v
        return default


QUERY_KINDS = ("surface-state", "attribute", "trace", "conditional", "distribution")


@dataclass(frozen=True)
class Scenario:
    name: str
    space: SpaceDescriptor
    worldlines: tuple
    events: tuple
    initial: StateVector = field(compare=False)
    initial_factors: tuple
    initial_surface: Flat = Flat(0, 0)
    flags: tuple = ()
    queries: tuple = ()

    def worldline(self, subsystem: str) -> WorldLine:
        for wl in self.worldlines:
            if wl.subsystem == subsystem:
                return wl
        raise KeyError(f"no world-line for subsystem {subsystem!r}")

    def event(self, event_id: str) -> EventSpec:
        for ev in self.events:
            if ev.id == event_id:
                return ev
        raise KeyError(f"no event {event_id!r}")

    def flag(self, name: str) -> Flag:
        for fl in self.flags:
            if fl.name == name:
                return fl
        raise KeyError(f"no flag {name!r}")

    @property
    def measurements(self) -> tuple:
        return tuple(ev for ev in self.events if ev.is_measurement)

    def causal_order(self) -> frozenset:
        return self._causal_order

    @cached_property
    def _causal_order(self) -> frozenset:
        return frozenset(causal_partial_order([ev.at for ev in self.events]))

    def canonical_order(self) -> list:
        """Event indices sorted by lab time; a linearization of the causal order."""
        return sorted(range(len(self.events)), key=lambda k: (self.events[k].at.t, k))

    def with_initial_factor(self, subsystems: Sequence[str], state) -> "Scenario":
        """Copy with the initial factor on ``subsystems`` replaced by explicit amplitudes."""
        subsystems = tuple(subsystems)
        amps = state.amplitudes if isinstance(state, StateVector) else np.asarray(state)
        if not any(f.subsystems == subsystems for f in self.initial_factors):
            raise KeyError(f"no initial factor on {subsystems}")
        expr = format_amplitudes(amps)
        factors = [
            InitialFactor(f.subsystems, expr) if f.subsystems == subsystems else f
            for f in self.initial_factors
        ]
        return build(
            self.name,
            self.space.labels,
            self.worldlines,
            factors,
            self.events,
            flags=self.flags,
            queries=self.queries,
            initial_surface=self.initial_surface,
        )


# --- building and resolution -------------------------------------------------


def build(
    name,
    subsystems,
    worldlines,
    initial_factors,
    events,
    flags=(),
    queries=(),
    initial_surface=Flat(0, 0),
) -> Scenario:
    """Assemble a scenario, resolving builtin names (no validation)."""
    from . import gadgets

    try:
        space = SpaceDescriptor(subsystems)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None

    factors = []
    pieces = []
    for f in initial_factors:
        f = InitialFactor(tuple(f.subsystems) or space.names, f.expr)
        for n in f.subsystems:
            if n not in space:
                raise ScenarioError(f"initial state names unknown subsystem {n!r}")
        sub = SpaceDescriptor([space.labels[space.index(n)] for n in f.subsystems])
        amps = _resolve_state(f.expr, sub, gadgets)
        pieces.append(StateVector(sub, amps))
        factors.append(f)
    if not pieces:
        raise ScenarioError("scenario has no initial state")
    try:
        joint = kron_state(pieces)
        initial = permute_state(joint, space.names)
    except (ValueError, KeyError) as exc:
        raise ScenarioError(f"initial state does not cover the subsystems exactly once: {exc}") from None

    resolved = []
    for ev in events:
        targets = tuple(ev.targets)
        for n in targets:
            if n not in space:
                raise ScenarioError(f"event {ev.id} targets unknown subsystem {n!r}")
        dims = tuple(space.labels[space.index(n)].dim for n in targets)
        try:
            if ev.kind == "interaction":
                op = gadgets.resolve_operator(ev.ref, targets, dims)
                if op.kind is not OperatorKind.UNITARY:
                    try:
                        op = LocalOperator(targets, op.matrix, OperatorKind.UNITARY, dims)
                    except ValueError:
                        raise ScenarioError(f"event {ev.id}: {ev.ref} is not a unitary") from None
                resolved.append(replace(ev, targets=targets, operator=op, outcomes=()))
            elif ev.kind == "measurement":
                outs = gadgets.resolve_outcomes(ev.ref, targets, dims)
                resolved.append(replace(ev, targets=targets, operator=None, outcomes=outs))
            else:
                raise ScenarioError(f"event {ev.id}: unknown kind {ev.kind!r}")
        except (KeyError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"event {ev.id}: {exc}") from None

    return Scenario(
        name=name,
        space=space,
        worldlines=tuple(worldlines),
        events=tuple(resolved),
        initial=initial,
        initial_factors=tuple(factors),
        initial_surface=initial_surface,
        flags=tuple(flags),
        queries=tuple(queries),
    )


def _resolve_state(expr, sub: SpaceDescriptor, gadgets):
    if expr.startswith("builtin."):
        amps = gadgets.resolve_state(expr)
    else:
        amps = parse_amplitudes(expr)
    amps = np.asarray(amps, dtype=np.complex128)
    if amps.shape[0] != sub.total_dim:
        raise ScenarioError(
            f"initial expr {expr[:40]!r} has {amps.shape[0]} amplitudes, "
            f"subsystems {sub.names} need {sub.total_dim}"
        )
    return amps


def parse_amplitudes(text: str) -> np.ndarray:
    values = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            values.append(complex(tok.replace("i", "j")))
        except ValueError:
            raise ScenarioError(f"bad amplitude {tok!r}") from None
    return np.array(values, dtype=np.complex128)


def format_amplitudes(amps) -> str:
    parts = []
    for a in np.asarray(amps, dtype=np.complex128):
        im = repr(float(a.imag))
        sign = "" if im.startswith("-") else "+"
        parts.append(f"{float(a.real)!r}{sign}{im}i")
    return ",".join(parts)


# --- validation ------------------------------------------------------------


def validate(s: Scenario) -> list:
    """All invariant violations of ``s``; an empty list means valid."""
    out = []
    for lab in s.space.labels:
        if lab.dim < 2:
            out.append(f"subsystem {lab.name} has dimension {lab.dim} < 2")

    seen = set()
    for wl in s.worldlines:
        if wl.subsystem not in s.space:
            out.append(f"world-line for unknown subsystem {wl.subsystem}")
        if wl.subsystem in seen:
            out.append(f"subsystem {wl.subsystem} has more than one world-line")
        seen.add(wl.subsystem)
        out.extend(wl.violations())
    for name in s.space.names:
        if name not in seen:
            out.append(f"subsystem {name} has no world-line")

    if abs(s.initial.norm2 - 1.0) > NORM_TOL:
        out.append(f"initial state not normalized (norm^2 = {s.initial.norm2:.12g})")

    ids = [ev.id for ev in s.events]
    for dup in sorted({i for i in ids if ids.count(i) > 1}):
        out.append(f"duplicate event id {dup}")
    points = {}
    for ev in s.events:
        if ev.at in points:
            out.append(f"events {points[ev.at]} and {ev.id} are coincident at {ev.at}")
        points.setdefault(ev.at, ev.id)
        if side_of_surface(ev.at, s.initial_surface) is not SurfaceSide.AFTER:
            out.append(f"event {ev.id} at {ev.at} is not after the initial surface")
        for n in ev.targets:
            if n in seen and not s.worldline(n).contains(ev.at):
                out.append(f"locality: event {ev.id} at {ev.at} targets {n}, which is not there")
        if ev.is_measurement:
            out.extend(_measurement_violations(ev))

    meas_ids = {ev.id for ev in s.measurements}
    for fl in s.flags:
        for eid in fl.event_ids:
            if eid not in meas_ids:
                out.append(f"flag {fl.name} refers to non-measurement {eid}")
            elif not set(s.event(eid).outcome_names) <= {"0", "1"}:
                out.append(f"flag {fl.name}: event {eid} outcomes are not binary 0/1")

    for q in s.queries:
        if q.kind not in QUERY_KINDS:
            out.append(f"unknown query kind {q.kind!r}")
            continue
        for surf in _query_surfaces(q):
            for ev in s.events:
                if side_of_surface(ev.at, surf) is SurfaceSide.ON:
                    out.append(f"event {ev.id} lies on query surface {surf}")
    return out


def _measurement_violations(ev: EventSpec) -> list:
    out = []
    if len(set(ev.outcome_names)) != len(ev.outcomes):
        out.append(f"measurement {ev.id} has repeated outcome names")
    mats = [p.matrix for _, p in ev.outcomes]
    if not mats:
        return out + [f"measurement {ev.id} has no outcomes"]
    total = sum(mats)
    if np.abs(total - np.eye(total.shape[0])).max() > COMPLETENESS_TOL:
        out.append(f"measurement {ev.id}: projectors do not sum to the identity")
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            if np.abs(mats[i] @ mats[j]).max() > COMPLETENESS_TOL:
                out.append(
                    f"measurement {ev.id}: outcomes {ev.outcomes[i][0]} and "
                    f"{ev.outcomes[j][0]} are not orthogonal"
                )
    return out


def _query_surfaces(q: Query) -> list:
    surfaces = []
    if q.get("surface"):
        surfaces.append(parse_surface(q.get("surface")))
    return surfaces


# --- events relative to a surface ------------------------------------------


def events_before(s: Scenario, surface: CausalSurface) -> list:
    """Events on the *before* side of ``surface``, in canonical causal order."""
    picked = []
    for k in s.canonical_order():
        ev = s.events[k]
        side = side_of_surface(ev.at, surface)
        if side is SurfaceSide.ON:
            raise SurfaceContactError(f"event {ev.id} lies exactly on surface {surface}")
        if side is SurfaceSide.BEFORE:
            picked.append(ev)
    return picked


# --- text format -------------------------------------------------------------

_NUM = r"[-+]?[0-9.]+(?:[eE][-+]?[0-9]+)?(?:/[0-9]+)?"
_POINT = re.compile(rf"^\(?\s*({_NUM})\s*,\s*({_NUM})\s*\)?$")
_SURFACE = re.compile(r"^(flat|sigma|eta|union)\((.*)\)$")


def parse_number(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ScenarioError(f"bad number {text!r}") from None


def parse_point(text: str) -> Event:
    m = _POINT.match(text.strip())
    if not m:
        raise ScenarioError(f"bad point {text!r}; expected (t,x)")
    return Event(parse_number(m.group(1)), parse_number(m.group(2)))


def parse_points(text: str) -> tuple:
    return tuple(parse_point(p) for p in text.split(";") if p.strip())


def parse_surface(text: str) -> CausalSurface:
    """``flat(t0,rapidity)``, ``sigma(t,x)``, ``eta(t,x)`` or ``union(t,x;t,x;...)``."""
    m = _SURFACE.match(text.strip())
    if not m:
        raise ScenarioError(f"bad surface {text!r}")
    kind, body = m.groups()
    if kind == "flat":
        parts = body.split(",")
        if len(parts) not in (1, 2):
            raise ScenarioError(f"bad flat surface {text!r}")
        rapidity = parse_number(parts[1]) if len(parts) == 2 else Fraction(0)
        return Flat(parse_number(parts[0]), rapidity)
    if kind == "sigma":
        return BackwardCone(parse_point(body))
    if kind == "eta":
        return ForwardCone(parse_point(body))
    return UnionBackwardCones(parse_points(body))


def format_number(value) -> str:
    return str(_exact(value))


def format_point(e: Event) -> str:
    return f"({format_number(e.t)},{format_number(e.x)})"


def format_surface(surface: CausalSurface) -> str:
    if isinstance(surface, Flat):
        return f"flat({format_number(surface.t0)},{format_number(surface.rapidity)})"
    if isinstance(surface, BackwardCone):
        return "sigma" + format_point(surface.vertex)
    if isinstance(surface, ForwardCone):
        return "eta" + format_point(surface.vertex)
    return "union(" + ";".join(format_point(v)[1:-1] for v in surface.vertices) + ")"


def parse_outcome_assignment(text: Optional[str]) -> dict:
    """``"M:pi,mz1:0"`` -> ``{"M": "pi", "mz1": "0"}``."""
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if ":" not in item:
            raise ScenarioError(f"bad outcome assignment {item!r}; expected event:outcome")
        key, value = item.split(":", 1)
        out[key.strip()] = value.strip()
    return out


def _sections(text: str, path=None):
    sections = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        stripped = line.strip()
        if stripped.startswith("["):
            end = stripped.find("]")
            if end < 0:
                raise ScenarioParseError("unterminated section header", lineno, col, path)
            header = stripped[1:end].strip()
            sections.append((header, [], lineno))
            rest = stripped[end + 1 :]
            col += end + 1
        else:
            if not sections:
                raise ScenarioParseError("key=value outside of a section", lineno, col, path)
            rest = stripped
        for m in re.finditer(r"\S+", rest):
            tok = m.group(0)
            if "=" not in tok:
                raise ScenarioParseError(f"expected key=value, got {tok!r}", lineno, col + m.start(), path)
            key, value = tok.split("=", 1)
            sections[-1][1].append((key, value, lineno, col + m.start()))
    return sections


def loads(text: str, path=None, validate_result: bool = True) -> Scenario:
    """Parse scenario text; raises on parse errors and (by default) violations."""
    name = Path(path).stem if path else "scenario"
    initial_surface = Flat(0, 0)
    subsystems, worldlines, factors, events, flags, queries = [], [], [], [], [], []
    for header, pairs, lineno in _sections(text, path):
        params = {}
        for key, value, ln, col in pairs:
            if key in params and header != "query":
                raise ScenarioParseError(f"duplicate key {key!r}", ln, col, path)
            params[key] = value

        def need(key):
            if key not in params:
                raise ScenarioParseError(f"[{header}] section missing {key}=", lineno, 1, path)
            return params[key]

        try:
            if header == "scenario":
                name = params.get("name", name)
                if "initial_surface" in params:
                    surf = parse_surface(params["initial_surface"])
                    if not isinstance(surf, Flat):
                        raise ScenarioError("initial_surface must be flat(t0,rapidity)")
                    initial_surface = surf
            elif header == "subsystem":
                subsystems.append(SubsystemLabel(need("name"), int(need("dim"))))
            elif header == "worldline":
                worldlines.append(WorldLine(need("subsystem"), parse_points(need("points"))))
            elif header == "initial":
                subs = tuple(params["subsystems"].split(",")) if "subsystems" in params else ()
                factors.append(InitialFactor(subs, need("expr")))
            elif header == "event":
                kind = need("kind")
                ref = need("unitary") if kind == "interaction" else need("outcomes")
                events.append(
                    EventSpec(need("id"), parse_point(need("at")), kind, tuple(need("targets").split(",")), ref)
                )
            elif header == "flag":
                groups = tuple(tuple(g.split("+")) for g in need("even").split(";") if g)
                flags.append(Flag(need("name"), groups))
            elif header == "query":
                queries.append(Query(need("kind"), tuple((k, v) for k, v, _, _ in pairs if k != "kind")))
            else:
                raise ScenarioParseError(f"unknown section [{header}]", lineno, 1, path)
        except ScenarioParseError:
            raise
        except ValueError as exc:
            raise ScenarioParseError(str(exc), lineno, 1, path) from None

    s = build(name, subsystems, worldlines, factors, events, flags, queries, initial_surface)
    if validate_result:
        problems = validate(s)
        if problems:
            raise ScenarioValidationError(problems)
    return s


def load(path, validate_result: bool = True) -> Scenario:
    path = Path(path)
    return loads(path.read_text(encoding="utf-8"), path=str(path), validate_result=validate_result)


def emit(s: Scenario) -> str:
    """Serialize ``s`` so that ``loads(emit(s))`` reproduces it."""
    lines = [f"[scenario] name={s.name} initial_surface={format_surface(s.initial_surface)}"]
    for lab in s.space.labels:
        lines.append(f"[subsystem] name={lab.name} dim={lab.dim}")
    for wl in s.worldlines:
        pts = ";".join(format_point(v) for v in wl.vertices)
        lines.append(f"[worldline] subsystem={wl.subsystem} points={pts}")
    for f in s.initial_factors:
        lines.append(f"[initial] subsystems={','.join(f.subsystems)} expr={f.expr}")
    for ev in s.events:
        key = "unitary" if ev.kind == "interaction" else "outcomes"
        lines.append(
            f"[event] id={ev.id} at={format_point(ev.at)} kind={ev.kind} "
            f"targets={','.join(ev.targets)} {key}={ev.ref}"
        )
    for fl in s.flags:
        lines.append(f"[flag] name={fl.name} even={';'.join('+'.join(g) for g in fl.even_groups)}")
    for q in s.queries:
        lines.append(" ".join([f"[query] kind={q.kind}"] + [f"{k}={v}" for k, v in q.params]))
    return "\n".join(lines) + "\n"


def dump(s: Scenario, path) -> None:
    Path(path).write_text(emit(s), encoding="utf-8")
