"""End-to-end checks on the built-in figure scenarios, used by ``relcollapse demo figs``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gadgets, oracle
from .attribution import AttributionRule as R, curious_report
from .collapse import surface_state
from .scenario import validate
from .spacetime import BackwardCone, UnionBackwardCones

STRICT = 1e-12
LOOSE = 1e-9


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str
    verdict: bool = False  # print the detail as the headline instead of PASS/FAIL

    def line(self) -> str:
        if self.verdict:
            return f"{self.name}: {self.detail}" + ("" if self.passed else " (FAIL)")
        return f"{self.name}: {'PASS' if self.passed else 'FAIL'} ({self.detail})"


def random_ab_states(n: int = 20, seed: int = 2000) -> list:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        out.append(v / np.linalg.norm(v))
    return out


def phi_found_probability(s, k: int = 1) -> float:
    d = oracle.enumerate_outcomes(s, keep_states=False)
    return d.probability_of(s.flag(f"phi{k}"))


def feature_alpha() -> Check:
    coupled = gadgets.coupled_states()
    p_singlet = phi_found_probability(gadgets.fig1(coupled["singlet"]))
    p_triplet = max(
        phi_found_probability(gadgets.fig1(coupled[name]))
        for name in ("triplet_p1", "triplet_0", "triplet_m1")
    )
    ok = abs(p_singlet - 1) < STRICT and abs(p_triplet) < STRICT
    return Check("feature alpha", ok, f"P(phi1|singlet)={p_singlet:.6g}, max P(phi1|triplet)={p_triplet:.6g}")


def feature_beta(states=None) -> Check:
    states = random_ab_states() if states is None else states
    worst = 1.0
    for build in (gadgets.fig1, gadgets.fig2):
        for v in states:
            s = build(v)
            d = oracle.enumerate_outcomes(s, keep_states=False)
            worst = min(worst, oracle.conditional(d, s.flag("phi1"), s.flag("phi2")))
    ok = abs(worst - 1) < LOOSE
    return Check("feature beta", ok, f"{len(states)} states x fig1, fig2; min P(phi2|phi1)={worst:.6g}")


def pipelines_agree() -> Check:
    worst = 0.0
    for v in gadgets.coupled_states().values():
        s = gadgets.fig1(v)
        for outcome in s.event("M").outcome_names:
            a, b = oracle.standard_vs_hk(s, outcome)
            worst = max(worst, float(np.abs(a.amplitudes - b.amplitudes).max()))
    return Check("eq3=eq5", worst < STRICT, f"max |difference| = {worst:.3g}")


def prescription_equivalence(cap: int = oracle.DEFAULT_ORDER_CAP) -> Check:
    worst = 0.0
    parts = []
    for name, s in gadgets.builtin_scenarios().items():
        orders = oracle.compare_orders(s, cap=cap)
        presc = oracle.compare_prescriptions(s)
        w = max([orders.max_discrepancy] + list(presc.values()))
        worst = max(worst, w)
        parts.append(f"{name}: {orders.n_orders} orders{'' if orders.exhaustive else ' (sampled)'}")
    return Check("prescription equivalence", worst < STRICT, f"{'; '.join(parts)}; max discrepancy {worst:.3g}")


def fig3_surface_states() -> Check:
    s = gadgets.fig3()
    states = gadgets.meson_states()
    st_p = surface_state(s, BackwardCone(gadgets.FIG3_P))
    st_pp = surface_state(s, UnionBackwardCones((gadgets.FIG3_P, gadgets.FIG3_P_PRIME)), {"M": "pi"})
    err_p = float(np.abs(st_p.state.amplitudes - states["mixed_initial"]).max())
    err_pp = float(np.abs(st_pp.state.amplitudes - states["pipi_i2"]).max())
    ok = err_p < STRICT and err_pp < STRICT and abs(st_pp.weight - 0.5) < STRICT
    return Check(
        "surface states",
        ok,
        f"sigma(P) error {err_p:.3g}; sigma(P,P') error {err_pp:.3g}, weight {st_pp.weight:.6g}",
    )


def curious() -> Check:
    rep = curious_report(gadgets.fig3(), gadgets.FIG3_P, gadgets.FIG3_P_PRIME, {"M": "pi"})
    g_joint, g_local = rep.joint[R.GHIRARDI], rep.local[R.GHIRARDI]
    ok = (
        g_joint.definite
        and abs(g_joint.eigenvalue - 6) < LOOSE
        and not g_local.definite
        and not rep.joint[R.UNIFORM].definite
        and rep.no_kaon_norm["A"] < STRICT
    )
    return Check("curious attribution", ok, f"I^2 {g_joint.describe()}, type(A) {g_local.describe()}", verdict=True)


def validity() -> Check:
    bad = {name: validate(s) for name, s in gadgets.builtin_scenarios().items()}
    bad = {k: v for k, v in bad.items() if v}
    return Check("built-in scenarios valid", not bad, "all valid" if not bad else str(bad))


def all_checks() -> list:
    return [validity(), feature_alpha(), feature_beta(), pipelines_agree(), prescription_equivalence(),
            fig3_surface_states(), curious()]
