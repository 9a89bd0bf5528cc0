"""Isospin algebra, meson states, the nonlocal isospin gadget and built-in scenarios.

Qubit convention: basis index 0 is isospin up (I_z = +1/2), index 1 is down.

The gadget certifies the two-particle isosinglet using only local couplings.
Each round prepares two probe pairs, ``(zL, zR)`` and ``(xL, xR)``, both in
``(|00> + |11>)/sqrt(2)``.  At the left point particle A flips ``zL`` when it
is up and flips ``xL`` when it is in ``|+>``; at the right point particle B
flips ``zR`` when it is down and ``xR`` when it is in ``|->``.  A probe pair
is left untouched exactly when the AB pair is anti-aligned along the
corresponding axis, so the singlet (anti-aligned along both) leaves the
probe register unchanged, while every triplet state flips at least one pair
to an orthogonal state.  Reading each probe qubit out in the computational
basis, "probe state found" is even parity on both pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .hilbert import LocalOperator, OperatorKind, SubsystemLabel
from .scenario import EventSpec, Flag, InitialFactor, Query, Scenario, WorldLine, build
from .spacetime import Event

SQRT2 = math.sqrt(2.0)

# --- generic isospin generators ---------------------------------------------


def isospin_generators(basis):
    """``(I_x, I_y, I_z)`` on a basis of ``(multiplet, I, I_z)`` labels.

    States sharing a multiplet tag are coupled by the ladder operators with
    the Condon-Shortley phase convention; distinct multiplets do not mix.
    """
    n = len(basis)
    plus = np.zeros((n, n))
    iz = np.zeros((n, n))
    for j, (tag, isospin, m) in enumerate(basis):
        iz[j, j] = m
        for i, (tag2, isospin2, m2) in enumerate(basis):
            if tag2 == tag and isospin2 == isospin and m2 == m + 1:
                plus[i, j] = math.sqrt(isospin * (isospin + 1) - m * (m + 1))
    minus = plus.T
    ix = (plus + minus) / 2
    iy = (plus - minus) / 2j
    return ix.astype(complex), iy, iz.astype(complex)


def total_isospin_sq(basis_a, basis_b):
    """``I_tot^2`` on the product of two single-particle bases."""
    ga = isospin_generators(basis_a)
    gb = isospin_generators(basis_b)
    ea = np.eye(len(basis_a))
    eb = np.eye(len(basis_b))
    out = np.zeros((len(basis_a) * len(basis_b),) * 2, dtype=complex)
    for a, b in zip(ga, gb):
        total = np.kron(a, eb) + np.kron(ea, b)
        out += total @ total
    return out


def total_iz(basis_a, basis_b):
    _, _, za = isospin_generators(basis_a)
    _, _, zb = isospin_generators(basis_b)
    return np.kron(za, np.eye(len(basis_b))) + np.kron(np.eye(len(basis_a)), zb)


# --- two isospin-1/2 particles ----------------------------------------------

QUBIT_BASIS = (("N", 0.5, 0.5), ("N", 0.5, -0.5))


def coupled_states() -> dict:
    """Singlet and triplet states of two isospin-1/2 particles (4-vectors)."""
    up_up = np.array([1, 0, 0, 0], dtype=complex)
    up_down = np.array([0, 1, 0, 0], dtype=complex)
    down_up = np.array([0, 0, 1, 0], dtype=complex)
    down_down = np.array([0, 0, 0, 1], dtype=complex)
    return {
        "singlet": (up_down - down_up) / SQRT2,
        "triplet_p1": up_up,
        "triplet_0": (up_down + down_up) / SQRT2,
        "triplet_m1": down_down,
    }


def isospin_sq_pair() -> np.ndarray:
    return total_isospin_sq(QUBIT_BASIS, QUBIT_BASIS)


def iz_qubit() -> np.ndarray:
    return np.diag([0.5, -0.5]).astype(complex)


# --- mesons -----------------------------------------------------------------


@dataclass(frozen=True)
class Meson:
    name: str
    multiplet: str
    isospin: float
    iz: float
    hypercharge: int


A_MESONS = (
    Meson("K+", "K", 0.5, 0.5, 1),
    Meson("K0", "K", 0.5, -0.5, 1),
    Meson("pi+", "pi", 1.0, 1.0, 0),
    Meson("pi0", "pi", 1.0, 0.0, 0),
    Meson("pi-", "pi", 1.0, -1.0, 0),
)
B_MESONS = (
    Meson("K-", "Kbar", 0.5, -0.5, -1),
    Meson("Kbar0", "Kbar", 0.5, 0.5, -1),
    Meson("pi+", "pi", 1.0, 1.0, 0),
    Meson("pi0", "pi", 1.0, 0.0, 0),
    Meson("pi-", "pi", 1.0, -1.0, 0),
)


def _iso_basis(mesons):
    return tuple((m.multiplet, m.isospin, m.iz) for m in mesons)


def _meson_index(mesons, name):
    return [m.name for m in mesons].index(name)


def _meson_pair(name_a, name_b):
    v = np.zeros(len(A_MESONS) * len(B_MESONS), dtype=complex)
    v[_meson_index(A_MESONS, name_a) * len(B_MESONS) + _meson_index(B_MESONS, name_b)] = 1.0
    return v


def meson_states() -> dict:
    kkbar = (_meson_pair("K+", "K-") - _meson_pair("K0", "Kbar0")) / SQRT2
    pipi = (
        _meson_pair("pi+", "pi-") / math.sqrt(6)
        + math.sqrt(2.0 / 3.0) * _meson_pair("pi0", "pi0")
        + _meson_pair("pi-", "pi+") / math.sqrt(6)
    )
    return {
        "kkbar_i0": kkbar,
        "pipi_i2": pipi,
        "mixed_initial": (kkbar + pipi) / SQRT2,
    }


def meson_isospin_sq() -> np.ndarray:
    return total_isospin_sq(_iso_basis(A_MESONS), _iso_basis(B_MESONS))


def meson_iz_total() -> np.ndarray:
    return total_iz(_iso_basis(A_MESONS), _iso_basis(B_MESONS))


def type_projectors(side: str = "A") -> dict:
    mesons = A_MESONS if side == "A" else B_MESONS
    pion = np.diag([1.0 if m.multiplet == "pi" else 0.0 for m in mesons]).astype(complex)
    return {"pi": pion, "K": np.eye(len(mesons)) - pion}


def hypercharge_op(side: str = "A") -> np.ndarray:
    mesons = A_MESONS if side == "A" else B_MESONS
    return np.diag([float(m.hypercharge) for m in mesons]).astype(complex)


def eigenprojector(matrix, value, tol=1e-9) -> np.ndarray:
    """Projector onto the eigenspace of Hermitian ``matrix`` with eigenvalue ``value``."""
    w, v = np.linalg.eigh(matrix)
    cols = v[:, np.abs(w - value) < tol]
    return cols @ cols.conj().T


# --- gadget -------------------------------------------------------------------

_PLUS = np.array([1, 1], dtype=complex) / SQRT2
_MINUS = np.array([1, -1], dtype=complex) / SQRT2
_UP = np.array([1, 0], dtype=complex)
_DOWN = np.array([0, 1], dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_I2 = np.eye(2, dtype=complex)


def phi_plus() -> np.ndarray:
    return np.array([1, 0, 0, 1], dtype=complex) / SQRT2


def _controlled_flip(control_state, flip_target):
    """On (control, probe_z, probe_x): flip one probe when control is in ``control_state``."""
    proj = np.outer(control_state, control_state.conj())
    flip = np.kron(_X, _I2) if flip_target == "z" else np.kron(_I2, _X)
    return np.kron(proj, flip) + np.kron(np.eye(2) - proj, np.eye(4))


def gadget_left() -> np.ndarray:
    """Local unitary on (A, zL, xL)."""
    return _controlled_flip(_PLUS, "x") @ _controlled_flip(_UP, "z")


def gadget_right() -> np.ndarray:
    """Local unitary on (B, zR, xR)."""
    return _controlled_flip(_MINUS, "x") @ _controlled_flip(_DOWN, "z")


def probe_register() -> np.ndarray:
    """Initial probe state on (zL, zR, xL, xR)."""
    return np.kron(phi_plus(), phi_plus())


# --- builtin registry -------------------------------------------------------------


def _family(**projectors):
    return tuple(projectors.items())


@lru_cache(maxsize=None)
def _states():
    out = dict(coupled_states())
    out.update(meson_states())
    out.update(
        up=_UP,
        down=_DOWN,
        phi_plus=phi_plus(),
        gadget_round1=probe_register(),
        gadget_round2=probe_register(),
    )
    return out


@lru_cache(maxsize=None)
def _operators():
    """name -> (matrix, dims, kind)."""
    u = OperatorKind.UNITARY
    p = OperatorKind.PROJECTOR
    h = OperatorKind.HERMITIAN
    tp_a = type_projectors("A")
    tp_b = type_projectors("B")
    return {
        "gadget_left_z_x": (gadget_left(), (2, 2, 2), u),
        "gadget_right_z_x": (gadget_right(), (2, 2, 2), u),
        "isospin_sq_pair": (isospin_sq_pair(), (2, 2), h),
        "iz_qubit": (iz_qubit(), (2,), h),
        "meson_isospin_sq": (meson_isospin_sq(), (5, 5), h),
        "meson_iz_total": (meson_iz_total(), (5, 5), h),
        "meson_type": (tp_a["K"], (5,), h),
        "hypercharge_A": (hypercharge_op("A"), (5,), h),
        "hypercharge_B": (hypercharge_op("B"), (5,), h),
        "pi_projector": (tp_b["pi"], (5,), p),
        "kbar_projector": (tp_b["K"], (5,), p),
        "k_projector": (tp_a["K"], (5,), p),
        "up_projector": (np.outer(_UP, _UP), (2,), p),
        "down_projector": (np.outer(_DOWN, _DOWN), (2,), p),
        "zero_projector": (np.outer(_UP, _UP), (2,), p),
        "one_projector": (np.outer(_DOWN, _DOWN), (2,), p),
    }


@lru_cache(maxsize=None)
def _families():
    return {
        "iz_A_measurement": _family(up="builtin.up_projector", down="builtin.down_projector"),
        "qubit_z_measurement": _family(**{"0": "builtin.zero_projector", "1": "builtin.one_projector"}),
        "hypercharge_type_measurement": _family(pi="builtin.pi_projector", K="builtin.kbar_projector"),
    }


def _strip(ref: str) -> str:
    if not ref.startswith("builtin."):
        raise KeyError(f"not a builtin reference: {ref!r}")
    return ref[len("builtin.") :]


def builtin_names() -> dict:
    return {
        "states": sorted(_states()),
        "operators": sorted(_operators()) + ["identity"],
        "measurements": sorted(_families()),
    }


def resolve_state(ref: str) -> np.ndarray:
    name = _strip(ref)
    try:
        return _states()[name].copy()
    except KeyError:
        raise KeyError(f"unknown builtin state {ref!r}") from None


def resolve_operator(ref: str, targets, dims) -> LocalOperator:
    name = _strip(ref)
    dims = tuple(dims)
    if name == "identity":
        return LocalOperator(targets, np.eye(math.prod(dims)), OperatorKind.HERMITIAN, dims)
    try:
        matrix, want, kind = _operators()[name]
    except KeyError:
        raise KeyError(f"unknown builtin operator {ref!r}") from None
    if tuple(want) != dims:
        raise ValueError(f"{ref} acts on dims {want}, targets {tuple(targets)} have dims {dims}")
    return LocalOperator(targets, matrix, kind, dims)


def resolve_outcomes(ref: str, targets, dims) -> tuple:
    """``name:builtin.proj,...`` or a builtin measurement family name."""
    if ":" in ref:
        pairs = [item.split(":", 1) for item in ref.split(",")]
    else:
        name = _strip(ref)
        try:
            pairs = list(_families()[name])
        except KeyError:
            raise KeyError(f"unknown builtin measurement {ref!r}") from None
    out = []
    for label, proj_ref in pairs:
        op = resolve_operator(proj_ref, targets, dims)
        if op.kind is not OperatorKind.PROJECTOR:
            raise ValueError(f"{proj_ref} is not a projector")
        out.append((label, op))
    return tuple(out)


# --- scenario construction -----------------------------------------------------------

F = Fraction
A_PATH = (Event(F(0), F(0)), Event(F(2), F(-1)), Event(F(12), F(-1)))
B_PATH = (Event(F(0), F(0)), Event(F(2), F(1)), Event(F(12), F(1)))


@dataclass(frozen=True)
class RoundGeometry:
    """Where one gadget round happens: interaction points and probe read-out points."""

    left: Event
    right: Event
    left_readout: tuple  # (zL point, xL point)
    right_readout: tuple  # (zR point, xR point)
    left_path: tuple = A_PATH
    right_path: tuple = B_PATH


@dataclass(frozen=True)
class RoundFragment:
    subsystems: tuple
    worldlines: tuple
    factor: InitialFactor
    events: tuple
    flag: Flag


def gadget_round(k: int, geometry: RoundGeometry, left="A", right="B") -> RoundFragment:
    """Probe subsystems, interactions, read-outs and the found-flag for round ``k``."""
    zl, zr, xl, xr = (f"zL{k}", f"zR{k}", f"xL{k}", f"xR{k}")
    subsystems = tuple(SubsystemLabel(n, 2) for n in (zl, zr, xl, xr))
    worldlines = (
        WorldLine(zl, geometry.left_path),
        WorldLine(zr, geometry.right_path),
        WorldLine(xl, geometry.left_path),
        WorldLine(xr, geometry.right_path),
    )
    meas = "builtin.qubit_z_measurement"
    events = (
        EventSpec(f"L{k}", geometry.left, "interaction", (left, zl, xl), "builtin.gadget_left_z_x"),
        EventSpec(f"R{k}", geometry.right, "interaction", (right, zr, xr), "builtin.gadget_right_z_x"),
        EventSpec(f"mzL{k}", geometry.left_readout[0], "measurement", (zl,), meas),
        EventSpec(f"mxL{k}", geometry.left_readout[1], "measurement", (xl,), meas),
        EventSpec(f"mzR{k}", geometry.right_readout[0], "measurement", (zr,), meas),
        EventSpec(f"mxR{k}", geometry.right_readout[1], "measurement", (xr,), meas),
    )
    flag = Flag(f"phi{k}", ((f"mzL{k}", f"mzR{k}"), (f"mxL{k}", f"mxR{k}")))
    factor = InitialFactor((zl, zr, xl, xr), f"builtin.gadget_round{k}")
    return RoundFragment(subsystems, worldlines, factor, events, flag)


def _pt(t, x):
    return Event(F(t), F(x))


FIG1_M = _pt("5", "-1")
FIG1_ROUNDS = (
    RoundGeometry(_pt(3, -1), _pt(4, 1), (_pt("13/4", -1), _pt("7/2", -1)), (_pt("17/4", 1), _pt("9/2", 1))),
    RoundGeometry(_pt(4, -1), _pt("11/2", 1), (_pt("17/4", -1), _pt("9/2", -1)), (_pt("23/4", 1), _pt(6, 1))),
)
FIG2_ROUNDS = (
    RoundGeometry(_pt(3, -1), _pt("15/2", 1), (_pt("13/4", -1), _pt("7/2", -1)), (_pt("31/4", 1), _pt(8, 1))),
    RoundGeometry(_pt(4, -1), _pt("17/2", 1), (_pt("17/4", -1), _pt("9/2", -1)), (_pt("35/4", 1), _pt(9, 1))),
)
FIG3_M = _pt(3, 1)
FIG3_P = _pt(4, -1)
FIG3_P_PRIME = _pt(4, 1)


def _isospin_scenario(name, rounds, initial_ab=None) -> Scenario:
    subsystems = [SubsystemLabel("A", 2), SubsystemLabel("B", 2)]
    worldlines = [WorldLine("A", A_PATH), WorldLine("B", B_PATH)]
    factors = [InitialFactor(("A", "B"), "builtin.singlet")]
    events, flags = [], []
    for k, geom in enumerate(rounds, start=1):
        frag = gadget_round(k, geom)
        subsystems += frag.subsystems
        worldlines += frag.worldlines
        factors.append(frag.factor)
        events += frag.events
        flags.append(frag.flag)
    events.append(EventSpec("M", FIG1_M, "measurement", ("A",), "builtin.iz_A_measurement"))
    events.sort(key=lambda ev: (ev.at.t, ev.at.x))
    # traces follow the branch with M up and both Phi pairs found
    branch = ",".join(f"{ev.id}:up" if ev.id == "M" else f"{ev.id}:0" for ev in events if ev.kind == "measurement")
    queries = (
        Query("conditional", (("given", "phi1"), ("target", "phi2"))),
        Query("trace", (("worldline", "A"), ("prescription", "hk"), ("outcomes", branch))),
        Query("trace", (("worldline", "B"), ("prescription", "hk"), ("outcomes", branch))),
    )
    s = build(name, subsystems, worldlines, factors, events, flags, queries)
    if initial_ab is not None:
        s = s.with_initial_factor(("A", "B"), initial_ab)
    return s


def fig1(initial_ab=None) -> Scenario:
    """Two gadget rounds and an I_z measurement on A; R1 and R2 spacelike from M."""
    return _isospin_scenario("fig1", FIG1_ROUNDS, initial_ab)


def fig2(initial_ab=None) -> Scenario:
    """As :func:`fig1`, but R1 and R2 lie in the timelike future of M."""
    return _isospin_scenario("fig2", FIG2_ROUNDS, initial_ab)


def fig3(initial=None) -> Scenario:
    """Meson pair, particle-type (hypercharge) measurement on B at M."""
    p, pp = "(4,-1)", "(4,1)"
    queries = (
        Query("surface-state", (("surface", f"sigma{p}"),)),
        Query("surface-state", (("surface", "union(4,-1;4,1)"), ("outcomes", "M:pi"))),
        Query(
            "attribute",
            (("rule", "ghirardi"), ("points", f"{p};{pp}"), ("observable", "builtin.meson_isospin_sq"),
             ("targets", "A,B"), ("outcomes", "M:pi")),
        ),
        Query(
            "attribute",
            (("rule", "uniform"), ("points", f"{p};{pp}"), ("observable", "builtin.meson_isospin_sq"),
             ("targets", "A,B"), ("outcomes", "M:pi")),
        ),
        Query(
            "attribute",
            (("rule", "ghirardi"), ("points", p), ("observable", "builtin.meson_type"),
             ("targets", "A"), ("outcomes", "M:pi")),
        ),
    )
    s = build(
        "fig3",
        [SubsystemLabel("A", 5), SubsystemLabel("B", 5)],
        [WorldLine("A", A_PATH), WorldLine("B", B_PATH)],
        [InitialFactor(("A", "B"), "builtin.mixed_initial")],
        [EventSpec("M", FIG3_M, "measurement", ("B",), "pi:builtin.pi_projector,K:builtin.kbar_projector")],
        queries=queries,
    )
    if initial is not None:
        s = s.with_initial_factor(("A", "B"), initial)
    return s


def builtin_scenarios() -> dict:
    return {"fig1": fig1(), "fig2": fig2(), "fig3": fig3()}
