"""Exact standard-quantum-theory outcome statistics by branch enumeration."""

from __future__ import annotations

import io
import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .collapse import FORWARD, HK, Prescription, flat_frame, prescription_order
from .hilbert import StateVector, apply_local, normalize, project
from .scenario import Scenario, ScenarioError
from .spacetime import linearizations, respects

PRUNE = 1e-30
DEFAULT_ORDER_CAP = 2000


class LinearizationError(ScenarioError):
    pass


@dataclass(frozen=True)
class Branch:
    outcomes: tuple
    probability: float
    state: Optional[StateVector]


class OutcomeDistribution:
    """Joint outcome probabilities over every measurement of a scenario.

    Branches cover the full Cartesian product of outcome names, ordered by
    measurement declaration order and then outcome declaration order.
    """

    def __init__(self, measurement_ids: Sequence[str], branches: Sequence[Branch]):
        self.measurement_ids = tuple(measurement_ids)
        self.branches = list(branches)
        self._index = {b.outcomes: b for b in self.branches}

    def __len__(self):
        return len(self.branches)

    def __iter__(self):
        return iter(self.branches)

    def assignment(self, branch: Branch) -> dict:
        return dict(zip(self.measurement_ids, branch.outcomes))

    def probability(self, outcomes) -> float:
        if isinstance(outcomes, dict):
            outcomes = tuple(outcomes[m] for m in self.measurement_ids)
        return self._index[tuple(outcomes)].probability

    def total(self) -> float:
        return sum(b.probability for b in self.branches)

    def probability_of(self, predicate: Callable[[dict], bool]) -> float:
        return sum(b.probability for b in self.branches if predicate(self.assignment(b)))

    def marginal(self, event_id: str) -> dict:
        out: dict = {}
        for b in self.branches:
            name = self.assignment(b)[event_id]
            out[name] = out.get(name, 0.0) + b.probability
        return out

    def max_discrepancy(self, other: "OutcomeDistribution") -> float:
        if self.measurement_ids != other.measurement_ids:
            raise ValueError("distributions over different measurements")
        keys = set(self._index) | set(other._index)
        return max(
            (abs(self._index[k].probability - other._index[k].probability) for k in keys),
            default=0.0,
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.measurement_ids + ("probability",)) + "\n")
        for b in self.branches:
            buf.write(",".join(b.outcomes + (f"{b.probability:.17g}",)) + "\n")
        return buf.getvalue()


def _as_indices(s: Scenario, lin) -> list:
    ids = [ev.id for ev in s.events]
    out = [ids.index(x) if isinstance(x, str) else int(x) for x in lin]
    if sorted(out) != list(range(len(ids))):
        raise LinearizationError("order must list every event exactly once")
    return out


def enumerate_outcomes(s: Scenario, lin=None, keep_states: bool = True) -> OutcomeDistribution:
    """Depth-first enumeration of every measurement branch, applying events in ``lin``.

    ``lin`` (event ids or indices) must be a linearization of the causal
    order; by default the scenario's canonical order is used.
    """
    lin = s.canonical_order() if lin is None else _as_indices(s, lin)
    if not respects(lin, s.causal_order()):
        raise LinearizationError("event order is inconsistent with the causal order")
    meas = s.measurements
    meas_pos = {ev.id: k for k, ev in enumerate(meas)}
    leaves: dict = {}

    def rec(pos, psi, chosen):
        if pos == len(lin):
            leaves[tuple(chosen)] = psi
            return
        ev = s.events[lin[pos]]
        if not ev.is_measurement:
            rec(pos + 1, apply_local(ev.operator, psi), chosen)
            return
        for name, proj in ev.outcomes:
            phi, p = project(proj, psi)
            chosen[meas_pos[ev.id]] = name
            if p > PRUNE:
                rec(pos + 1, phi, chosen)
            else:
                _mark_pruned(leaves, chosen, meas)
            chosen[meas_pos[ev.id]] = None

    rec(0, s.initial, [None] * len(meas))

    branches = []
    for combo in itertools.product(*(ev.outcome_names for ev in meas)):
        psi = leaves[combo]
        if psi is None:
            branches.append(Branch(combo, 0.0, None))
            continue
        p = psi.norm2
        state = normalize(psi) if keep_states and p > PRUNE else None
        branches.append(Branch(combo, p, state))
    return OutcomeDistribution([ev.id for ev in meas], branches)


def _mark_pruned(leaves, chosen, meas):
    """Record every completion of a zero-probability prefix as an empty branch."""
    open_slots = [k for k, c in enumerate(chosen) if c is None]
    for rest in itertools.product(*(meas[k].outcome_names for k in open_slots)):
        key = list(chosen)
        for k, name in zip(open_slots, rest):
            key[k] = name
        leaves[tuple(key)] = None


@dataclass(frozen=True)
class OrderComparison:
    max_discrepancy: float
    n_orders: int
    exhaustive: bool


def compare_orders(s: Scenario, cap: int = DEFAULT_ORDER_CAP, seed: int = 0) -> OrderComparison:
    """Largest probability difference between linearizations of the causal order."""
    from .spacetime import count_linearizations

    order = s.causal_order()
    n = len(s.events)
    total = count_linearizations(order, n)
    reference = None
    worst = 0.0
    count = 0
    for lin in linearizations(order, n, cap=cap, seed=seed):
        d = enumerate_outcomes(s, lin, keep_states=False)
        if reference is None:
            reference = d
        else:
            worst = max(worst, reference.max_discrepancy(d))
        count += 1
    return OrderComparison(worst, count, exhaustive=count == total)


def default_prescriptions() -> list:
    return [HK, FORWARD, flat_frame(0), flat_frame(1), flat_frame(-1)]


def compare_prescriptions(s: Scenario, prescriptions=None) -> dict:
    """Distribution discrepancy for each prescription relative to the canonical order.

    Cone prescriptions are evaluated along every world-line of the scenario;
    keys look like ``"hk@A"`` or ``"flat:1"``.
    """
    prescriptions = default_prescriptions() if prescriptions is None else prescriptions
    reference = enumerate_outcomes(s, keep_states=False)
    out = {}
    for presc in prescriptions:
        if presc.kind == "flat":
            lin = prescription_order(s, presc)
            out[str(presc)] = reference.max_discrepancy(enumerate_outcomes(s, lin, keep_states=False))
            continue
        for wl in s.worldlines:
            lin = prescription_order(s, presc, wl)
            d = enumerate_outcomes(s, lin, keep_states=False)
            out[f"{presc}@{wl.subsystem}"] = reference.max_discrepancy(d)
    return out


def conditional(d: OutcomeDistribution, given: Callable, target: Callable) -> float:
    """P(target | given)."""
    p_given = d.probability_of(given)
    if p_given <= 0.0:
        raise ZeroDivisionError("conditioning on an outcome of zero probability")
    return d.probability_of(lambda a: given(a) and target(a)) / p_given


def apply_sequence(s: Scenario, event_ids: Sequence[str], outcomes=None, initial=None) -> StateVector:
    """Apply the named events in the given order (no causality check, no renormalization)."""
    outcomes = outcomes or {}
    psi = s.initial if initial is None else initial
    for eid in event_ids:
        ev = s.event(eid)
        if ev.is_measurement:
            psi, _ = project(ev.projector(outcomes[eid]), psi)
        else:
            psi = apply_local(ev.operator, psi)
    return psi


STANDARD_PIPELINE = ("L1", "R1", "L2", "R2", "M")
HK_PIPELINE = ("L1", "L2", "M", "R1", "R2")


def standard_vs_hk(s: Scenario, m_outcome: str):
    """``P_M U2 U1 |in>`` against ``U_R2 U_R1 P_M U_L2 U_L1 |in>`` for a gadget scenario."""
    out = {"M": m_outcome}
    return apply_sequence(s, STANDARD_PIPELINE, out), apply_sequence(s, HK_PIPELINE, out)
