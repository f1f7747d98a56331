"""Construction and invariants of Fock-basis states and probe families."""

import math

import pytest
from hypothesis import assume, given, strategies as st

from qclock import (
    BoundsError,
    DegenerateStateError,
    PhysicalParams,
    ShapeError,
    fidelity_global_phase,
    inner_product,
    is_energy_eigenstate,
    new_superposition,
    prepare_average_state,
    prepare_noon,
    prepare_w,
)

SQ2 = 1.0 / math.sqrt(2.0)


def test_new_superposition_normalizes_equal_weights():
    s = new_superposition((1, 1), [((1, 0), 1.0), ((0, 1), 1.0)])
    assert s.amplitude((1, 0)) == pytest.approx(SQ2)
    assert s.amplitude((0, 1)) == pytest.approx(SQ2)
    assert s.norm_sq() == pytest.approx(1.0, abs=1e-12)


def test_new_superposition_merges_duplicates():
    s = new_superposition((2, 2), [((2, 0), 1.0), ((2, 0), 1.0)])
    assert s.branches() == ((2, 0),)
    assert s.amplitude((2, 0)) == pytest.approx(1.0)


def test_new_superposition_orders_terms_lexicographically():
    s = new_superposition((2, 2), [((2, 0), 1.0), ((0, 2), 1.0), ((1, 1), 1.0)])
    assert s.branches() == ((0, 2), (1, 1), (2, 0))


def test_new_superposition_prunes_tiny_amplitudes():
    s = new_superposition((1, 1), [((0, 1), 1.0), ((1, 0), 1e-14)])
    assert s.branches() == ((0, 1),)


def test_occupation_out_of_bounds_names_the_node():
    with pytest.raises(BoundsError, match="node 0"):
        new_superposition((1, 1), [((2, 0), 1.0)])


def test_cancelling_terms_are_degenerate():
    with pytest.raises(DegenerateStateError):
        new_superposition((1, 1), [((1, 0), 1.0), ((1, 0), -1.0)])


def test_empty_terms_are_degenerate():
    with pytest.raises(DegenerateStateError):
        new_superposition((1, 1), [])


def test_single_node_is_rejected():
    with pytest.raises(ShapeError):
        new_superposition((3,), [((1,), 1.0)])


def test_inner_product_of_state_with_itself():
    s = prepare_noon(3)
    assert inner_product(s, s) == pytest.approx(1.0 + 0.0j, abs=1e-12)


def test_inner_product_orthogonal_sign_flip():
    plus = new_superposition((1, 1), [((0, 1), 1.0), ((1, 0), 1.0)])
    minus = new_superposition((1, 1), [((0, 1), 1.0), ((1, 0), -1.0)])
    assert abs(inner_product(plus, minus)) == pytest.approx(0.0, abs=1e-12)


def test_inner_product_distinct_basis_states():
    a = new_superposition((1, 1), [((1, 0), 1.0)])
    b = new_superposition((1, 1), [((0, 1), 1.0)])
    assert inner_product(a, b) == 0j


def test_inner_product_capacity_mismatch():
    with pytest.raises(ShapeError):
        inner_product(prepare_noon(1), prepare_noon(2))


def test_fidelity_ignores_global_phase():
    s = prepare_noon(2)
    phase = complex(math.cos(1.234), math.sin(1.234))
    rotated = new_superposition(s.caps, [(o, phase * c) for o, c in s.terms])
    assert fidelity_global_phase(s, rotated) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_of_superposition_with_one_branch():
    basis = new_superposition((1, 1), [((1, 0), 1.0)])
    assert fidelity_global_phase(prepare_noon(1), basis) == pytest.approx(SQ2)


def test_fidelity_orthogonal_is_zero():
    a = new_superposition((1, 1), [((1, 0), 1.0)])
    b = new_superposition((1, 1), [((0, 1), 1.0)])
    assert fidelity_global_phase(a, b) == 0.0


def test_energy_eigenstate_noon():
    assert is_energy_eigenstate(prepare_noon(3))


def test_energy_eigenstate_rejects_mixed_sums():
    s = new_superposition((1, 1), [((1, 0), 1.0), ((1, 1), 1.0)])
    assert not is_energy_eigenstate(s)


def test_energy_eigenstate_average_probe():
    # branches (2,0,0) and (0,1,1) both hold 2 excitations
    assert is_energy_eigenstate(prepare_average_state(2, 1))


@pytest.mark.parametrize("n", [1, 4, 9])
def test_prepare_noon(n):
    s = prepare_noon(n)
    assert s.caps == (n, n)
    assert s.branches() == ((0, n), (n, 0))
    assert s.amplitude((0, n)) == pytest.approx(SQ2)
    assert s.amplitude((n, 0)) == pytest.approx(SQ2)
    assert is_energy_eigenstate(s)


def test_prepare_noon_rejects_empty_probe():
    with pytest.raises(DegenerateStateError):
        prepare_noon(0)


def test_prepare_average_d2_n1():
    s = prepare_average_state(2, 1)
    assert s.caps == (2, 1, 1)
    assert s.branches() == ((0, 1, 1), (2, 0, 0))
    assert s.amplitude((2, 0, 0)) == pytest.approx(SQ2)


def test_prepare_average_d1_degenerates_to_noon():
    assert fidelity_global_phase(prepare_average_state(1, 1), prepare_noon(1)) == (
        pytest.approx(1.0, abs=1e-12)
    )


def test_prepare_average_caps_and_eigenstate():
    s = prepare_average_state(3, 2)
    assert s.caps == (6, 2, 2, 2)
    assert sum(s.caps) == 2 * 3 * 2
    assert is_energy_eigenstate(s)


def test_prepare_w_d1():
    s = prepare_w(1)
    assert s.amplitude((1, 0)) == pytest.approx(SQ2)
    assert s.amplitude((0, 1)) == pytest.approx(SQ2)


def test_prepare_w_d2_uniform():
    s = prepare_w(2)
    assert len(s.branches()) == 3
    for occ, amp in s.terms:
        assert sum(occ) == 1
        assert amp == pytest.approx(1.0 / math.sqrt(3.0))


@pytest.mark.parametrize("d", [1, 2, 5, 12])
def test_prepare_w_is_energy_eigenstate(d):
    assert is_energy_eigenstate(prepare_w(d))


def test_params_require_positive_omega():
    with pytest.raises(ValueError):
        PhysicalParams(0.0)


def test_params_default_levels():
    p = PhysicalParams(2.5)
    assert p.e0 == 0.0
    assert p.e1 == 2.5


amplitudes = st.complex_numbers(
    min_magnitude=0.1, max_magnitude=1.0, allow_nan=False, allow_infinity=False
)


@st.composite
def random_states(draw):
    caps = tuple(draw(st.lists(st.integers(1, 3), min_size=2, max_size=4)))
    occs = st.tuples(*[st.integers(0, c) for c in caps])
    terms = draw(st.lists(st.tuples(occs, amplitudes), min_size=1, max_size=4))
    try:
        return new_superposition(caps, terms)
    except DegenerateStateError:
        assume(False)


@given(random_states())
def test_construction_always_normalizes(s):
    assert abs(s.norm_sq() - 1.0) <= 1e-10


@given(random_states())
def test_terms_are_lex_sorted_and_pruned(s):
    occs = s.branches()
    assert list(occs) == sorted(occs)
    assert all(abs(c) >= 1e-12 for _, c in s.terms)


@given(random_states())
def test_renormalization_is_idempotent(s):
    again = new_superposition(s.caps, list(s.terms))
    assert fidelity_global_phase(s, again) == pytest.approx(1.0, abs=1e-12)
