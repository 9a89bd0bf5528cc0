from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from relcollapse import gadgets
from relcollapse.collapse import (
    FORWARD,
    HK,
    MissingOutcomeError,
    Prescription,
    explicit,
    flat_frame,
    point_state,
    prescription_order,
    surface_state,
    switch_time,
    worldline_trace,
)
from relcollapse.oracle import enumerate_outcomes
from relcollapse.spacetime import (
    BackwardCone,
    Event,
    Flat,
    ForwardCone,
    UnionBackwardCones,
    in_causal_past,
    respects,
)

coord = st.fractions(min_value=-6, max_value=14, max_denominator=8)
events = st.builds(Event, coord, coord)


@pytest.mark.parametrize(
    "text, expected",
    [("hk", HK), ("forward", FORWARD), ("flat", flat_frame(0)), ("flat:0.5", flat_frame(0.5))],
)
def test_parse_prescription(text, expected):
    assert Prescription.parse(text) == expected
    assert Prescription.parse(str(expected)) == expected


def test_bad_prescriptions():
    with pytest.raises(ValueError):
        Prescription.parse("sideways")
    with pytest.raises(ValueError):
        Prescription("explicit")


def test_fig3_surface_states(fig3):
    states = gadgets.meson_states()
    st_p = surface_state(fig3, BackwardCone(gadgets.FIG3_P))
    assert st_p.applied == () and st_p.weight == pytest.approx(1.0)
    np.testing.assert_allclose(st_p.state.amplitudes, states["mixed_initial"], atol=1e-15)
    both = UnionBackwardCones((gadgets.FIG3_P, gadgets.FIG3_P_PRIME))
    st_pi = surface_state(fig3, both, {"M": "pi"})
    assert st_pi.weight == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(st_pi.state.amplitudes, states["pipi_i2"], atol=1e-12)
    st_k = surface_state(fig3, both, {"M": "K"})
    np.testing.assert_allclose(st_k.state.amplitudes, states["kkbar_i0"], atol=1e-12)


def test_missing_and_impossible_outcomes(fig3):
    both = UnionBackwardCones((gadgets.FIG3_P, gadgets.FIG3_P_PRIME))
    with pytest.raises(MissingOutcomeError):
        surface_state(fig3, both)
    pure_pi = fig3.with_initial_factor(("A", "B"), gadgets.meson_states()["pipi_i2"])
    st_k = surface_state(pure_pi, both, {"M": "K"})
    assert st_k.impossible and st_k.weight < 1e-14


def test_point_state_uses_cones(fig3):
    p = Event(4, -1)
    assert point_state(fig3, p, HK, {"M": "pi"}).surface == ForwardCone(p)
    assert point_state(fig3, p, FORWARD).surface == BackwardCone(p)
    assert point_state(fig3, p, flat_frame(0), {"M": "pi"}).surface == Flat(4, 0)
    assert point_state(fig3, p, explicit(Flat(1, 0))).surface == Flat(1, 0)


@pytest.mark.parametrize(
    "presc, wl, expected",
    [
        (HK, "A", F(4, 3)),   # A(t) = (t, -t/2) leaves J-(M) at u = 3t/2 = 2
        (FORWARD, "A", F(5)),  # M enters J-(A(t)) once v = t - 1 reaches 4
        (HK, "B", F(3)),       # M lies on B's world-line
        (FORWARD, "B", F(3)),
        (flat_frame(0), "A", F(3)),
    ],
)
def test_fig3_switch_times(fig3, presc, wl, expected):
    assert switch_time(fig3.event("M").at, fig3.worldline(wl), presc) == expected


@given(events)
def test_hk_switch_time_brackets_causal_past(e):
    wl = gadgets.fig3().worldline("A")
    tau = switch_time(e, wl, HK)
    for t in (wl.start.t, F(1, 3), F(2), F(5, 2), F(7), wl.end.t):
        inside = in_causal_past(wl.position_at(t), e) or wl.position_at(t) == e
        assert inside == (t <= tau)


@given(events)
def test_forward_switch_time_brackets_causal_future(e):
    wl = gadgets.fig3().worldline("B")
    tau = switch_time(e, wl, FORWARD)
    for t in (wl.start.t, F(1, 3), F(2), F(5, 2), F(7), wl.end.t):
        p = wl.position_at(t)
        inside = in_causal_past(e, p) or p == e
        assert inside == (t >= tau)


@pytest.mark.parametrize("presc", [HK, FORWARD])
def test_cone_orders_are_linearizations(fig1, presc):
    for wl in fig1.worldlines:
        assert respects(prescription_order(fig1, presc, wl), fig1.causal_order())


@given(st.floats(-3, 3))
def test_flat_orders_are_linearizations(phi):
    s = gadgets.fig1()
    assert respects(prescription_order(s, flat_frame(phi)), s.causal_order())


def test_cone_order_needs_worldline(fig1):
    with pytest.raises(ValueError):
        prescription_order(fig1, HK)


@pytest.mark.parametrize("presc", [HK, FORWARD, flat_frame(0.3)])
def test_trace_segments_tile_the_worldline(fig1, presc):
    outcomes = {ev.id: "0" for ev in fig1.measurements}
    outcomes["M"] = "up"
    for wl in fig1.worldlines[:3]:
        segs = worldline_trace(fig1, wl, presc, outcomes)
        assert segs[0].t_start == wl.start.t and segs[-1].t_end == wl.end.t
        for a, b in zip(segs, segs[1:]):
            assert a.t_end == b.t_start
            assert a.closed_end != b.closed_start
        entered = [eid for seg in segs for eid in seg.entered]
        assert len(entered) == len(set(entered))
        for seg in segs:
            # any interior point sees the same surface state as the midpoint
            t = seg.t_start + (seg.t_end - seg.t_start) / 3
            other = point_state(fig1, wl.position_at(t), presc, outcomes)
            assert other.applied == seg.state.applied


def test_fig3_trace_hk(fig3):
    segs = worldline_trace(fig3, fig3.worldline("A"), HK, {"M": "pi"})
    assert [(s.t_start, s.t_end) for s in segs] == [(0, F(4, 3)), (F(4, 3), 12)]
    assert segs[0].closed_end and not segs[1].closed_start
    assert segs[1].entered == ("M",)
    assert segs[1].state.weight == pytest.approx(0.5)


def test_fig3_trace_forward(fig3):
    segs = worldline_trace(fig3, fig3.worldline("A"), FORWARD, {"M": "pi"})
    assert [(s.t_start, s.t_end) for s in segs] == [(0, 5), (5, 12)]
    assert not segs[0].closed_end and segs[1].closed_start


def test_hk_and_forward_point_states_are_consistent(fig1):
    """The state HK assigns at P is the forward-cone state of any point late enough to see the same events."""
    outcomes = {ev.id: "0" for ev in fig1.measurements}
    outcomes["M"] = "up"
    late = Event(12, -1)
    a = point_state(fig1, late, HK, outcomes)
    b = point_state(fig1, Event(20, -1), FORWARD, outcomes)
    assert set(a.applied) == set(b.applied) == {ev.id for ev in fig1.events}
    np.testing.assert_allclose(a.state.amplitudes, b.state.amplitudes, atol=1e-12)


def test_surface_weight_is_branch_probability(fig1):
    d = enumerate_outcomes(fig1)
    late = Flat(100, 0)
    for branch in d.branches[::37]:
        st_ = surface_state(fig1, late, d.assignment(branch))
        assert st_.weight == pytest.approx(branch.probability, abs=1e-12)
