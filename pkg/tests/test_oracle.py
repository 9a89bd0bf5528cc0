import numpy as np
import pytest
from hypothesis import given, strategies as st

from relcollapse import gadgets, oracle
from relcollapse.collapse import HK, prescription_order, surface_state
from relcollapse.spacetime import Flat, linearizations

from conftest import random_state


def test_fig3_distribution(fig3):
    d = oracle.enumerate_outcomes(fig3)
    assert d.measurement_ids == ("M",)
    assert d.marginal("M") == pytest.approx({"pi": 0.5, "K": 0.5}, abs=1e-12)
    np.testing.assert_allclose(d.probability(("pi",)), 0.5, atol=1e-12)


def test_fig1_distribution_covers_product(fig1):
    d = oracle.enumerate_outcomes(fig1, keep_states=False)
    assert len(d) == 2**9
    assert d.total() == pytest.approx(1.0, abs=1e-12)
    assert d.probability_of(fig1.flag("phi1")) == pytest.approx(1.0, abs=1e-12)


@given(st.integers(0, 2**31))
def test_random_inputs_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    s = gadgets.fig2(random_state(rng, 4))
    d = oracle.enumerate_outcomes(s, keep_states=False)
    assert d.total() == pytest.approx(1.0, abs=1e-9)


def test_zero_probability_branches_are_present(fig1):
    d = oracle.enumerate_outcomes(fig1)
    zero = [b for b in d if b.probability == 0.0]
    assert zero and all(b.state is None for b in zero)


def test_rejects_non_linearization(fig2):
    bad = list(reversed(fig2.canonical_order()))
    with pytest.raises(oracle.LinearizationError):
        oracle.enumerate_outcomes(fig2, bad)
    with pytest.raises(oracle.LinearizationError):
        oracle.enumerate_outcomes(fig2, ["M"])


def test_orders_agree_on_sample(fig1):
    cmp = oracle.compare_orders(fig1, cap=40, seed=7)
    assert cmp.n_orders == 40 and not cmp.exhaustive
    assert cmp.max_discrepancy < 1e-12


@pytest.mark.parametrize("name", ["fig2", "fig3"])
def test_orders_agree_exhaustively(name):
    cmp = oracle.compare_orders(gadgets.builtin_scenarios()[name])
    assert cmp.exhaustive and cmp.max_discrepancy < 1e-12


def test_prescriptions_agree(fig1):
    out = oracle.compare_prescriptions(fig1)
    assert set(out) >= {"hk@A", "forward@B", "flat:0", "flat:1", "flat:-1"}
    assert max(out.values()) < 1e-12


def test_branch_states_match_surface_states(fig1):
    d = oracle.enumerate_outcomes(fig1)
    for b in d.branches[::53]:
        if b.probability > 1e-12:
            st = surface_state(fig1, Flat(50, 0), d.assignment(b))
            np.testing.assert_allclose(st.state.amplitudes, b.state.amplitudes, atol=1e-12)


def test_conditional(fig1):
    d = oracle.enumerate_outcomes(fig1, keep_states=False)
    assert oracle.conditional(d, fig1.flag("phi1"), fig1.flag("phi2")) == pytest.approx(1.0)
    with pytest.raises(ZeroDivisionError):
        oracle.conditional(d, lambda a: False, fig1.flag("phi2"))


def test_csv_is_stable(fig3):
    csv = oracle.enumerate_outcomes(fig3).to_csv()
    assert csv.splitlines()[0] == "M,probability"
    assert csv == oracle.enumerate_outcomes(fig3).to_csv()
    assert float(csv.splitlines()[1].split(",")[1]) == pytest.approx(0.5)


def test_discrepancy_needs_same_measurements(fig1, fig3):
    with pytest.raises(ValueError):
        oracle.enumerate_outcomes(fig1, keep_states=False).max_discrepancy(oracle.enumerate_outcomes(fig3))


@pytest.mark.parametrize("name", ["singlet", "triplet_p1", "triplet_0", "triplet_m1"])
@pytest.mark.parametrize("outcome", ["up", "down"])
def test_standard_and_hk_pipelines_agree(name, outcome):
    s = gadgets.fig1(gadgets.coupled_states()[name])
    a, b = oracle.standard_vs_hk(s, outcome)
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-12)


