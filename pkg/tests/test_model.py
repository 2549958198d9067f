"""Fusion rules, quantum dimensions, F/R symbols, and consistency checks."""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anyonforge import AnyonModel, ConsistencyError

GOLDEN = (1 + math.sqrt(5)) / 2


def test_charge_list_is_twice_spin_range(model3):
    assert model3.charges == (0, 1, 2, 3)
    assert AnyonModel(8).charges == tuple(range(9))


def test_fusion_rules_pinned(model2, model3):
    assert model3.fuse(1, 1) == (0, 2)
    assert model3.fuse(2, 2) == (0, 2)
    assert model3.fuse(1, 2) == (1, 3)
    assert model3.fuse(3, 3) == (0,)
    # level truncation: spin-1 pair at k=2 can only annihilate
    assert model2.fuse(2, 2) == (0,)
    assert model2.fuse(1, 1) == (0, 2)


def test_fusion_symmetry_and_vacuum():
    for k in (2, 3, 5, 8):
        model = AnyonModel(k)
        for a in model.charges:
            assert model.fuse(0, a) == (a,)
            for b in model.charges:
                assert model.fuse(a, b) == model.fuse(b, a)
                for c in model.fuse(a, b):
                    assert abs(a - b) <= c <= min(a + b, 2 * k - a - b)
                    assert (a + b - c) % 2 == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 8), st.data())
def test_fusion_is_associative_as_multisets(k, data):
    model = AnyonModel(k)
    a = data.draw(st.sampled_from(model.charges))
    b = data.draw(st.sampled_from(model.charges))
    c = data.draw(st.sampled_from(model.charges))
    left = sorted(x for e in model.fuse(a, b) for x in model.fuse(e, c))
    right = sorted(x for f in model.fuse(b, c) for x in model.fuse(a, f))
    assert left == right


def test_qdim_matches_sine_ratio():
    for k in (2, 3, 4, 5, 6, 8):
        model = AnyonModel(k)
        theta = math.pi / (k + 2)
        for a in model.charges:
            oracle = math.sin((a + 1) * theta) / math.sin(theta)
            assert model.qdim(a) == pytest.approx(oracle, abs=1e-12)


def test_qdim_pins(model2, model3):
    assert model3.qdim(0) == 1.0
    assert model3.qdim(1) == pytest.approx(GOLDEN, abs=1e-12)
    assert model3.qdim(2) == pytest.approx(GOLDEN, abs=1e-12)
    assert model3.qdim(3) == pytest.approx(1.0, abs=1e-12)
    assert model2.qdim(1) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_f_matrix_golden_literal(model3):
    fm = model3.f_symbol(1, 1, 1, 1)
    assert fm.rows == (0, 2) and fm.cols == (0, 2)
    expected = np.array([
        [-1 / GOLDEN, 1 / math.sqrt(GOLDEN)],
        [1 / math.sqrt(GOLDEN), 1 / GOLDEN],
    ])
    assert np.allclose(fm.matrix, expected, atol=1e-12)


def test_f_matrix_k2_literal(model2):
    fm = model2.f_symbol(1, 1, 1, 1)
    s = 1 / math.sqrt(2)
    assert np.allclose(fm.matrix, np.array([[-s, s], [s, s]]), atol=1e-12)


def test_f_with_vacuum_label_is_scalar_one(model3):
    for a, b, c, d in ((0, 1, 1, 0), (1, 0, 1, 0), (1, 1, 0, 0), (0, 0, 0, 0),
                       (2, 0, 2, 0), (0, 3, 1, 2)):
        fm = model3.f_symbol(a, b, c, d)
        assert fm.matrix.shape == (1, 1)
        assert fm.matrix[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_f_matrices_real_orthogonal():
    for k in (3, 5):
        model = AnyonModel(k)
        for a in model.charges:
            for b in model.charges:
                for d in model.charges:
                    for c in model.fuse(a, b):
                        for t in model.fuse(c, d):
                            fm = model.f_symbol(a, b, d, t)
                            M = fm.matrix
                            assert np.allclose(M.imag, 0, atol=1e-14)
                            assert np.allclose(M @ M.T, np.eye(M.shape[0]),
                                               atol=1e-12)
                            break


def test_r_symbol_literals(model2, model3):
    # (-1)^((a+b-c)/2) * exp(i pi (c(c+2) - a(a+2) - b(b+2)) / (4(k+2)))
    assert model3.r_symbol(1, 1, 0) == pytest.approx(
        -cmath.exp(-0.3j * cmath.pi), abs=1e-12)
    assert model3.r_symbol(1, 1, 2) == pytest.approx(
        cmath.exp(0.1j * cmath.pi), abs=1e-12)
    assert model2.r_symbol(1, 1, 0) == pytest.approx(
        -cmath.exp(-0.375j * cmath.pi), abs=1e-12)
    assert model2.r_symbol(1, 1, 2) == pytest.approx(
        cmath.exp(0.125j * cmath.pi), abs=1e-12)


def test_r_symbols_unimodular():
    for k in (2, 3, 8):
        model = AnyonModel(k)
        for a in model.charges:
            for b in model.charges:
                for c in model.fuse(a, b):
                    assert abs(abs(model.r_symbol(a, b, c)) - 1) < 1e-12


def test_pentagon_hexagon_tight(model2, model3):
    assert model2.verify_pentagon() < 1e-12
    assert model2.verify_hexagon() < 1e-12
    assert model3.verify_pentagon() < 1e-12
    assert model3.verify_hexagon() < 1e-12


def test_invalid_charge_rejected(model3):
    with pytest.raises(ValueError):
        model3.fuse(1, 4)
    with pytest.raises(ValueError):
        model3.qdim(-1)


def test_corruption_is_detected():
    model = AnyonModel(3)
    model.corrupt_f_symbol(1, 1, 1, 1)
    assert model.verify_pentagon() > 1e-4
    with pytest.raises(ConsistencyError):
        model.verify_pentagon(tolerance=1e-9)


def test_symbol_cache_round_trip(tmp_path, monkeypatch):
    monkeypatch.setenv("ANYONFORGE_CACHE_DIR", str(tmp_path))
    first = AnyonModel(3)
    first.precompute()
    assert any(tmp_path.iterdir()), "precompute should persist symbols"
    second = AnyonModel(3)
    for args in ((1, 1, 1, 1), (1, 2, 1, 2), (2, 2, 2, 2)):
        assert np.array_equal(first.f_symbol(*args).matrix,
                              second.f_symbol(*args).matrix)
    assert second.verify_pentagon() < 1e-12
