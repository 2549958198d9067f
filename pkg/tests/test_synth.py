"""Braid words, targets, the weave search, and its determinism contract."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anyonforge import (
    AnyonModel,
    BraidWord,
    ColumnRule,
    EncodingError,
    Grouping,
    PhaseRule,
    SearchConfig,
    distance,
    enumerate_basis,
    evaluate,
    evaluate_tracked,
    exchange_counts,
    make_target_B1,
    make_target_B3,
    make_target_E,
    make_target_P,
    make_target_unitary,
    multi_qubit_code,
    score_braid,
    search,
    verify_braid_relations,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)


# --- braid words ---------------------------------------------------------

def test_braid_word_validation():
    word = BraidWord(4, ((1, 1), (2, -1)))
    assert len(word) == 2
    with pytest.raises(ValueError):
        BraidWord(4, ((4, 1),))  # position out of range
    with pytest.raises(ValueError):
        BraidWord(4, ((1, 2),))  # exponent must be +-1
    with pytest.raises(ValueError):
        BraidWord(4, ((1, 1), (1, -1)))  # not freely reduced


def test_braid_word_reduction_and_inverse():
    reduced = BraidWord.reduced(4, ((1, 1), (2, 1), (2, -1), (1, 1)))
    assert reduced.letters == ((1, 1), (1, 1))
    word = BraidWord(4, ((1, 1), (2, 1)))
    assert word.concat(word.inverse()).letters == ()
    assert word.inverse().letters == ((2, -1), (1, -1))
    assert word.permutation() == (1, 2, 0, 3)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 3), st.sampled_from([1, -1])),
                max_size=14))
def test_free_reduction_is_stable(letters):
    word = BraidWord.reduced(4, tuple(letters))
    for (p1, e1), (p2, e2) in zip(word.letters, word.letters[1:]):
        assert not (p1 == p2 and e1 == -e2)
    # reducing again changes nothing
    assert BraidWord.reduced(4, word.letters).letters == word.letters
    # a word followed by its inverse always cancels completely
    assert word.concat(word.inverse()).letters == ()


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 3), st.sampled_from([1, -1])),
                max_size=10))
def test_exchange_counts_bookkeeping(letters):
    word = BraidWord.reduced(4, tuple(letters))
    counts = exchange_counts(word, Grouping.of_sizes(1, 1, 1, 1))
    assert sum(c["total"] for c in counts.values()) == len(word)
    for entry in counts.values():
        assert abs(entry["signed"]) <= entry["total"]
        assert (entry["signed"] - entry["total"]) % 2 == 0


def test_exchange_counts_pinned():
    word = BraidWord(4, ((1, 1), (2, 1), (2, 1)))
    counts = exchange_counts(word, Grouping.of_sizes(1, 1, 1, 1))
    assert counts == {(1, 2): {"signed": 1, "total": 1},
                      (1, 3): {"signed": 2, "total": 2}}


# --- distance ------------------------------------------------------------

def test_distance_examples():
    assert distance(np.eye(4), np.diag([1, 1, 1, -1])) == pytest.approx(
        np.sqrt(0.5), abs=1e-12)
    assert distance(np.eye(4), np.eye(4)) == 0.0
    assert distance(np.eye(4), 1j * np.eye(4)) == pytest.approx(0.0, abs=1e-8)


def _random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_distance_subadditive_under_composition():
    """d(AB, A'B') <= d(A, A') + d(B, B'): the composition bound's engine."""
    rng = np.random.default_rng(7)
    for _ in range(25):
        A, A2, B, B2 = (_random_unitary(rng, 4) for _ in range(4))
        lhs = distance(A @ B, A2 @ B2)
        rhs = distance(A, A2) + distance(B, B2)
        assert lhs <= rhs + 1e-12


# --- evaluation ----------------------------------------------------------

def test_evaluate_empty_word_is_identity(model3):
    basis = enumerate_basis(model3, (1,) * 6, 0)
    assert np.array_equal(evaluate(model3, basis, BraidWord(6, ())),
                          np.eye(basis.dim))


def test_evaluate_is_homomorphism(model3):
    basis = enumerate_basis(model3, (1,) * 6, 0)
    w1 = BraidWord(6, ((1, 1), (3, -1)))
    w2 = BraidWord(6, ((2, 1), (4, 1)))
    U1, leaves1, g1 = evaluate_tracked(model3, basis, w1)
    basis_mid = enumerate_basis(model3, leaves1, 0)
    U2 = evaluate(model3, basis_mid, w2, g1)
    joint = evaluate(model3, basis, w1.concat(w2))
    assert np.allclose(U2 @ U1, joint, atol=1e-12)


def test_evaluate_inverse_word(model3):
    basis = enumerate_basis(model3, (1,) * 6, 0)
    word = BraidWord(6, ((1, 1), (2, 1), (3, -1), (2, 1)))
    U = evaluate(model3, basis, word.concat(word.inverse()))
    assert np.allclose(U, np.eye(basis.dim), atol=1e-12)


def test_composite_evaluation_matches_fine(model3):
    """A block word evaluated with composite generators equals the same
    exchanges spelled out strand by strand."""
    basis = enumerate_basis(model3, (1, 1, 1, 1), 0)
    pairs = Grouping.of_sizes(2, 2)
    coarse = evaluate(model3, basis, BraidWord(2, ((1, 1),)), pairs)
    fine = evaluate(model3, basis,
                    BraidWord(4, ((2, 1), (1, 1), (3, 1), (2, 1))))
    assert np.allclose(coarse, fine, atol=1e-12)


def test_verify_braid_relations_clean(model3):
    assert verify_braid_relations(model3, (1, 1, 2, 1)) < 1e-12


# --- targets -------------------------------------------------------------

def test_phase_target_structure(model3):
    target = make_target_P(model3)
    assert target.name == "P"
    assert target.blocks == ((1,), (2, 3), (4, 5), (6,))
    assert target.final_arrangement == (0, 1, 2, 3)
    phase_rules = [r for r in target.rules if isinstance(r, PhaseRule)]
    column_rules = [r for r in target.rules if isinstance(r, ColumnRule)]
    assert len(phase_rules) == 3 and len(column_rules) == 1
    assert column_rules[0].sector == (1, 2, 2, 1)
    assert column_rules[0].exact_value == -1


def test_aggregation_target_structure(model3):
    b1 = make_target_B1(model3)
    column = next(r for r in b1.rules if isinstance(r, ColumnRule))
    assert column.exact_value is None  # direction fixed, phase free
    free = [r for r in b1.rules if isinstance(r, PhaseRule)]
    assert all(r.policy == "must_cancel_with_partner" for r in free)


def test_aggregation_channels_depend_on_level(model2):
    """At k=2 two spin-1 pairs only fuse to the vacuum, so the charge-1
    aggregation target does not exist while the vacuum one does."""
    with pytest.raises(EncodingError):
        make_target_B1(model2)
    make_target_B3(model2)


def test_exchange_target_structure(model3):
    target = make_target_E(model3)
    assert target.blocks == ((1, 2, 3), (4,), (5, 6, 7), (8,))
    assert target.final_arrangement == (0, 2, 1, 3)
    assert target.mobile == 2


def test_unitary_target_validation(model3):
    with pytest.raises(ValueError):
        make_target_unitary(model3, np.array([[1, 1], [0, 1]]))
    target = make_target_unitary(model3, X, name="NOT")
    assert target.kind == "exact_unitary"
    assert target.blocks == ((1,), (2,), (3,), (4,))


# --- search --------------------------------------------------------------

def test_search_rejects_mismatched_model(model2, model3):
    with pytest.raises(ValueError):
        search(model2, make_target_P(model3), SearchConfig(max_length=2))


def test_weave_frontier_counts(model3):
    """Nodes at depth L in the one-mobile-block language: 2 * 3^(L // 2)."""
    result = search(model3, make_target_B1(model3), SearchConfig(max_length=7))
    for length, _, _, frontier, _ in result.stats.rows:
        assert frontier == 2 * 3 ** (length // 2)


def test_search_deterministic_across_workers(model3):
    config = SearchConfig(max_length=8)
    target = make_target_B1(model3)
    one = search(model3, target, config, workers=1)
    three = search(model3, target, config, workers=3)
    assert one.braid == three.braid
    assert repr(one.distance) == repr(three.distance)
    strip = lambda rows: [r[:4] for r in rows]
    assert strip(one.stats.rows) == strip(three.stats.rows)


def test_dedup_does_not_change_results(model3):
    target = make_target_B3(model3)
    plain = search(model3, target, SearchConfig(max_length=8, dedup=False))
    deduped = search(model3, target, SearchConfig(max_length=8, dedup=True))
    assert plain.braid == deduped.braid
    assert repr(plain.distance) == repr(deduped.distance)


def test_search_monotone_in_length(model3):
    target = make_target_B1(model3)
    best = [search(model3, target, SearchConfig(max_length=L)).distance
            for L in (4, 6, 8)]
    assert best[0] >= best[1] >= best[2]


def test_converged_flag_with_achievable_tolerance(model2):
    """sigma_1^2 realizes NOT exactly at k=2; the sqrt-style metric turns
    float dust into ~1e-8, so convergence is judged at a matching tol."""
    target = make_target_unitary(model2, X, name="NOT")
    result = search(model2, target, SearchConfig(max_length=4, tolerance=1e-6))
    assert result.converged
    assert result.braid.letters == ((1, 1), (1, 1))
    assert result.distance < 1e-6


def test_score_braid_matches_search(model3):
    target = make_target_B1(model3)
    found = search(model3, target, SearchConfig(max_length=8))
    rescored = score_braid(model3, target, found.braid)
    assert rescored.distance == pytest.approx(found.distance, abs=1e-14)
    assert rescored.leakage == pytest.approx(found.leakage, abs=1e-14)


def test_score_braid_rejects_wrong_arrangement(model3):
    target = make_target_E(model3)
    with pytest.raises(ValueError):
        score_braid(model3, target, BraidWord(4, ()))  # blocks not exchanged


def test_search_weave_restriction(model3):
    """Weave words only ever move the mobile block."""
    result = search(model3, make_target_P(model3), SearchConfig(max_length=6))
    counts = exchange_counts(result.braid, result.target.grouping)
    mobile = result.target.mobile
    for (i, j), entry in counts.items():
        assert mobile in (i, j)


def test_sector_phases_reported(model3):
    result = search(model3, make_target_B1(model3), SearchConfig(max_length=8))
    assert (1, 0, 2, 1) in result.sector_phases
    for phase in result.sector_phases.values():
        assert abs(abs(phase) - 1) < 1e-9
