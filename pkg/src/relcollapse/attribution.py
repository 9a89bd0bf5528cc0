"""Property attribution from surface states.

An observable is *definite* at a point when the state used for that point is
one of its eigenvectors.  Two rules choose the state:

``GHIRARDI``
    local observables at P use the state on sigma(P); joint observables at
    (P, P') use the state on the surface just after sigma(P) and sigma(P').
``UNIFORM``
    every observable, local or joint, is judged with the state on sigma(P).
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import gadgets
from .collapse import SurfaceState, surface_state
from .hilbert import EIGEN_TOL, LocalOperator, eigencheck, hermitian
from .scenario import Scenario
from .spacetime import BackwardCone, CausalRelation, Event, UnionBackwardCones, causal_relation


class AttributionRule(enum.Enum):
    GHIRARDI = "ghirardi"
    UNIFORM = "uniform"

    @classmethod
    def parse(cls, text: str) -> "AttributionRule":
        key = text.strip().lower()
        aliases = {"ghirardi": cls.GHIRARDI, "split": cls.GHIRARDI, "uniform": cls.UNIFORM, "sigma": cls.UNIFORM}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown attribution rule {text!r}") from None


@dataclass(frozen=True)
class Verdict:
    definite: bool
    eigenvalue: Optional[float]
    residual: float
    surface: object
    weight: float
    rule: AttributionRule

    def describe(self) -> str:
        if self.definite:
            return f"definite ({self.eigenvalue:.6g})"
        return "indefinite"


def _judge(st: SurfaceState, op: LocalOperator, rule, tol) -> Verdict:
    if st.impossible:
        raise ValueError(f"outcomes {st.outcomes} have zero probability before {st.surface}")
    check = eigencheck(op, st.state, tol)
    return Verdict(check.definite, check.value, check.residual, st.surface, st.weight, rule)


def _require_on_worldline(s: Scenario, p: Event, subsystem: str):
    if not s.worldline(subsystem).contains(p):
        raise ValueError(f"point {p} is not on the world-line of {subsystem}")


def attribute_local(
    s: Scenario, p: Event, op: LocalOperator, outcomes=None,
    rule: AttributionRule = AttributionRule.GHIRARDI, tol: float = EIGEN_TOL,
) -> Verdict:
    """Definiteness of a single-subsystem observable at ``p`` (both rules use sigma(p))."""
    if len(op.targets) != 1:
        raise ValueError("attribute_local needs an observable on exactly one subsystem")
    _require_on_worldline(s, p, op.targets[0])
    return _judge(surface_state(s, BackwardCone(p), outcomes), op, rule, tol)


def attribute_joint(
    s: Scenario, p: Event, p_prime: Event, op: LocalOperator, outcomes=None,
    rule: AttributionRule = AttributionRule.GHIRARDI, tol: float = EIGEN_TOL,
) -> Verdict:
    """Definiteness of a two-subsystem observable for the system at ``p`` and ``p_prime``."""
    if len(op.targets) != 2:
        raise ValueError("attribute_joint needs an observable on exactly two subsystems")
    if causal_relation(p, p_prime) is not CausalRelation.SPACELIKE:
        warnings.warn(f"points {p} and {p_prime} are not spacelike separated", stacklevel=2)
    if rule is AttributionRule.GHIRARDI:
        _require_on_worldline(s, p, op.targets[0])
        _require_on_worldline(s, p_prime, op.targets[1])
        surface = UnionBackwardCones((p, p_prime))
    else:
        surface = BackwardCone(p)
    return _judge(surface_state(s, surface, outcomes), op, rule, tol)


# --- the meson example -------------------------------------------------------------


def isospin_sq_observable(targets=("A", "B")) -> LocalOperator:
    return hermitian(targets, gadgets.meson_isospin_sq(), (5, 5))


def particle_type_observable(target="A") -> LocalOperator:
    """1 for a kaon, 0 for a pion."""
    return hermitian(target, gadgets.type_projectors("A" if target == "A" else "B")["K"])


def no_kaon_in_isospin_two() -> dict:
    """Spectral norms of Pi(I^2 = 6) times the kaon projector on either particle."""
    i2 = gadgets.eigenprojector(gadgets.meson_isospin_sq(), 6.0)
    eye = np.eye(5)
    k_a = np.kron(gadgets.type_projectors("A")["K"], eye)
    k_b = np.kron(eye, gadgets.type_projectors("B")["K"])
    return {
        "A": float(np.linalg.norm(i2 @ k_a, 2)),
        "B": float(np.linalg.norm(i2 @ k_b, 2)),
    }


@dataclass(frozen=True)
class CuriousReport:
    """Joint and local verdicts side by side under both rules."""

    joint: dict  # rule -> Verdict for I^2 of (A at P, B at P')
    local: dict  # rule -> Verdict for particle type of A at P
    no_kaon_norm: dict

    def lines(self) -> list:
        out = []
        for rule in AttributionRule:
            out.append(
                f"{rule.value}: I^2 {self.joint[rule].describe()}, type(A) {self.local[rule].describe()}"
            )
        out.append(
            f"||Pi(I^2=6) Pi_K(A)|| = {self.no_kaon_norm['A']:.6g}, "
            f"||Pi(I^2=6) Pi_K(B)|| = {self.no_kaon_norm['B']:.6g}"
        )
        return out

    def records(self) -> list:
        out = []
        for label, table in (("isospin_sq", self.joint), ("type_A", self.local)):
            for rule, v in table.items():
                value = "" if v.eigenvalue is None else f"{v.eigenvalue:.17g}"
                out.append(
                    f"observable={label} rule={rule.value} definite={str(v.definite).lower()} "
                    f"eigenvalue={value} residual={v.residual:.6g} weight={v.weight:.17g}"
                )
        out.append(f"check=no_kaon_in_I2 norm_A={self.no_kaon_norm['A']:.6g} norm_B={self.no_kaon_norm['B']:.6g}")
        return out

    @property
    def is_curious(self) -> bool:
        g = AttributionRule.GHIRARDI
        return self.joint[g].definite and not self.local[g].definite


def curious_report(s: Scenario, p: Event, p_prime: Event, outcomes=None, tol: float = EIGEN_TOL) -> CuriousReport:
    isq = isospin_sq_observable()
    kind = particle_type_observable("A")
    joint = {r: attribute_joint(s, p, p_prime, isq, outcomes, r, tol) for r in AttributionRule}
    local = {r: attribute_local(s, p, kind, outcomes, r, tol) for r in AttributionRule}
    return CuriousReport(joint, local, no_kaon_in_isospin_two())
