import numpy as np
import pytest
from hypothesis import given, strategies as st

from relcollapse.hilbert import (
    ImpossibleOutcome,
    LocalOperator,
    OperatorKind,
    SpaceDescriptor,
    StateVector,
    SubsystemLabel,
    apply_local,
    eigencheck,
    expectation,
    hermitian,
    inner,
    kron_state,
    normalize,
    permute_state,
    project,
    projector,
    unitary,
)

from conftest import random_state

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
P0 = np.diag([1.0, 0.0]).astype(complex)


def space(*pairs):
    return SpaceDescriptor([SubsystemLabel(n, d) for n, d in pairs])


def random_unitary(d, rng):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_space_descriptor_basics():
    sp = space(("A", 2), ("B", 3))
    assert sp.names == ("A", "B") and sp.dims == (2, 3) and sp.total_dim == 6
    assert sp.index("B") == 1
    with pytest.raises(KeyError):
        sp.index("C")
    with pytest.raises(ValueError):
        space(("A", 2), ("A", 2))
    with pytest.raises(ValueError):
        SpaceDescriptor([SubsystemLabel("A", 2)] * 1 + [SubsystemLabel("B", 4)], cap=4)


@pytest.mark.parametrize("name", ["", "a b", "x,y", "p=q"])
def test_bad_labels(name):
    with pytest.raises(ValueError):
        SubsystemLabel(name, 2)


def test_state_vector_is_read_only():
    psi = StateVector(space(("A", 2)), [1, 0])
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 2
    with pytest.raises(ValueError):
        StateVector(space(("A", 2)), [1, 0, 0])


@pytest.mark.parametrize(
    "kind, matrix",
    [
        (OperatorKind.UNITARY, [[1, 1], [0, 1]]),
        (OperatorKind.PROJECTOR, [[1, 0], [0, 0.5]]),
        (OperatorKind.HERMITIAN, [[0, 1j], [1j, 0]]),
    ],
)
def test_operator_kind_is_validated(kind, matrix):
    with pytest.raises(ValueError):
        LocalOperator("A", matrix, kind)


def test_operator_shape_checks():
    with pytest.raises(ValueError):
        unitary(("A", "B"), np.eye(4))  # dims missing
    with pytest.raises(ValueError):
        unitary(("A", "B"), np.eye(4), (2, 3))
    with pytest.raises(ValueError):
        unitary(("A", "A"), np.eye(4), (2, 2))


def test_apply_local_matches_kron():
    rng = np.random.default_rng(0)
    sp = space(("A", 2), ("B", 3), ("C", 2))
    psi = StateVector(sp, random_state(rng, 12))
    u = random_unitary(4, rng)
    out = apply_local(unitary(("C", "A"), u, (2, 2)), psi)
    # move C in front of A by hand: full = (u on C,A) acting with B untouched
    t = psi.tensor().transpose(2, 0, 1).reshape(4, 3)
    want = (u @ t).reshape(2, 2, 3).transpose(1, 2, 0).reshape(-1)
    np.testing.assert_allclose(out.amplitudes, want, atol=1e-12)


def test_dimension_mismatch_is_reported():
    psi = StateVector(space(("A", 3)), [1, 0, 0])
    with pytest.raises(ValueError):
        apply_local(unitary("A", X), psi)


@given(st.integers(0, 2**31))
def test_unitaries_preserve_norm(seed):
    rng = np.random.default_rng(seed)
    sp = space(("A", 2), ("B", 2), ("C", 3))
    psi = StateVector(sp, random_state(rng, 12))
    out = apply_local(unitary(("C", "B"), random_unitary(6, rng), (3, 2)), psi)
    assert out.norm2 == pytest.approx(1.0, abs=1e-12)


@given(st.integers(0, 2**31))
def test_projector_family_probabilities_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    psi = StateVector(space(("A", 2), ("B", 2)), random_state(rng, 4))
    p0 = project(projector("B", P0), psi)[1]
    p1 = project(projector("B", np.eye(2) - P0), psi)[1]
    assert p0 + p1 == pytest.approx(1.0, abs=1e-12)


def test_project_requires_projector():
    psi = StateVector(space(("A", 2)), [1, 0])
    with pytest.raises(ValueError):
        project(unitary("A", X), psi)


def test_normalize_impossible():
    psi = StateVector(space(("A", 2)), [0, 0])
    with pytest.raises(ImpossibleOutcome):
        normalize(psi)


def test_kron_and_permute_round_trip():
    a = StateVector(space(("A", 2)), [1, 0])
    b = StateVector(space(("B", 3)), [0, 0, 1])
    ab = kron_state([a, b])
    assert ab.space.names == ("A", "B")
    assert ab.amplitudes[2] == 1
    ba = permute_state(ab, ["B", "A"])
    assert ba.space.names == ("B", "A") and ba.amplitudes[4] == 1
    assert permute_state(ba, ["A", "B"]).allclose(ab)
    with pytest.raises(ValueError):
        kron_state([a, a])


def test_expectation_and_inner():
    plus = StateVector(space(("A", 2)), np.array([1, 1]) / np.sqrt(2))
    assert expectation(hermitian("A", X), plus) == pytest.approx(1.0)
    assert expectation(hermitian("A", Z), plus) == pytest.approx(0.0)
    zero = StateVector(space(("A", 2)), [1, 0])
    assert inner(zero, plus) == pytest.approx(1 / np.sqrt(2))


@pytest.mark.parametrize(
    "amps, definite, value",
    [([1, 0], True, 1.0), ([0, 1], True, -1.0), ([1 / np.sqrt(2), 1 / np.sqrt(2)], False, None)],
)
def test_eigencheck(amps, definite, value):
    d = eigencheck(hermitian("A", Z), StateVector(space(("A", 2)), amps))
    assert d.definite is definite
    if definite:
        assert d.value == pytest.approx(value)
    else:
        assert d.value is None and d.residual == pytest.approx(1.0)


def test_eigencheck_is_phase_invariant():
    psi = StateVector(space(("A", 2)), np.array([0, 1j]))
    d = eigencheck(hermitian("A", Z), psi)
    assert d.definite and d.value == pytest.approx(-1.0)
