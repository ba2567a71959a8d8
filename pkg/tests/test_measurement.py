"""Partial DFT construction, distorting matrix, min-norm and restricted LS."""

import numpy as np
import pytest

from sparsepilots import (
    DimensionMismatch,
    EmptyPattern,
    IndexOutOfRange,
    PilotPattern,
    RankDeficient,
    build_partial_dft,
    distorting_matrix,
    least_squares_on_support,
    min_norm_estimate,
)


def dft_entry(n, pilot, col):
    """Element-wise oracle for the measurement matrix."""
    return np.exp(-2j * np.pi * pilot * col / n)


class TestBuildPartialDft:
    def test_zero_frequency_row(self):
        model = build_partial_dft(4, PilotPattern(4, (0,)))
        assert np.allclose(model.matrix, np.ones((1, 4)))

    def test_single_row_n4(self):
        model = build_partial_dft(4, PilotPattern(4, (1,)))
        assert np.allclose(model.matrix, [[1, -1j, -1, 1j]], atol=1e-12)

    def test_seven_three_elementwise(self):
        pattern = PilotPattern(7, (1, 2, 4))
        model = build_partial_dft(7, pattern)
        assert model.matrix.shape == (3, 7)
        for r, p in enumerate(pattern.indices):
            for c in range(7):
                assert model.matrix[r, c] == pytest.approx(dft_entry(7, p, c), abs=1e-12)

    def test_unit_modulus(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = int(rng.integers(2, 64))
            n_p = int(rng.integers(1, n + 1))
            idx = tuple(int(i) for i in rng.choice(n, n_p, replace=False))
            model = build_partial_dft(n, PilotPattern(n, idx))
            assert np.max(np.abs(np.abs(model.matrix) - 1.0)) < 1e-12

    def test_rows_orthogonal(self):
        model = build_partial_dft(32, PilotPattern(32, (0, 3, 7, 19, 30)))
        gram = model.matrix @ model.matrix.conj().T
        assert np.allclose(gram, 32 * np.eye(5), atol=1e-10)

    def test_errors(self):
        with pytest.raises(IndexOutOfRange):
            build_partial_dft(4, PilotPattern(7, (1, 5)))
        with pytest.raises(EmptyPattern):
            PilotPattern(4, ())


class TestDistortingMatrix:
    def test_full_pattern_gives_identity(self):
        model = build_partial_dft(6, PilotPattern(6, tuple(range(6))))
        assert np.allclose(distorting_matrix(model), np.eye(6), atol=1e-12)

    def test_diagonal_value(self):
        model = build_partial_dft(7, PilotPattern(7, (1, 2, 4)))
        g = distorting_matrix(model)
        assert np.allclose(np.diag(g), 3 / 7, atol=1e-12)

    def test_idempotent_random(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            n = int(rng.integers(4, 64))
            n_p = int(rng.integers(1, n))
            idx = tuple(int(i) for i in rng.choice(n, n_p, replace=False))
            g = distorting_matrix(build_partial_dft(n, PilotPattern(n, idx)))
            assert np.max(np.abs(g @ g - g)) < 1e-10


class TestMinNormEstimate:
    def test_zero_in_zero_out(self):
        model = build_partial_dft(7, PilotPattern(7, (1, 2, 4)))
        assert np.allclose(min_norm_estimate(model, np.zeros(3)), 0)

    def test_full_pattern_inverts(self):
        model = build_partial_dft(8, PilotPattern(8, tuple(range(8))))
        rng = np.random.default_rng(3)
        h = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        observed = model.matrix @ h
        assert np.allclose(min_norm_estimate(model, observed), h, atol=1e-10)

    def test_unit_tap_gives_distorting_column(self):
        # Noiseless observation of a unit tap at 0 back-projects to column 0
        # of the distorting matrix; built here from the raw exponentials.
        model = build_partial_dft(7, PilotPattern(7, (1, 2, 4)))
        h = np.zeros(7, dtype=complex)
        h[0] = 1.0
        observed = model.matrix @ h
        expected = np.array(
            [sum(np.exp(2j * np.pi * p * i / 7) for p in (1, 2, 4)) / 7 for i in range(7)]
        )
        assert np.allclose(min_norm_estimate(model, observed), expected, atol=1e-12)

    def test_matches_distorting_action(self):
        rng = np.random.default_rng(4)
        model = build_partial_dft(31, PilotPattern(31, (1, 5, 11, 24, 25, 27)))
        g = distorting_matrix(model)
        for _ in range(10):
            h = rng.standard_normal(31) + 1j * rng.standard_normal(31)
            assert np.allclose(min_norm_estimate(model, model.matrix @ h), g @ h, atol=1e-10)

    def test_dimension_mismatch(self):
        model = build_partial_dft(7, PilotPattern(7, (1, 2, 4)))
        with pytest.raises(DimensionMismatch):
            min_norm_estimate(model, np.zeros(4))


class TestLeastSquaresOnSupport:
    def test_exact_on_true_support(self):
        model = build_partial_dft(16, PilotPattern(16, (0, 2, 5, 9, 11, 14)))
        h = np.zeros(16, dtype=complex)
        h[[1, 7, 12]] = [1.0, -2.0 + 1j, 0.5j]
        out = least_squares_on_support(model, model.matrix @ h, [1, 7, 12])
        assert np.allclose(out, h, atol=1e-10)

    def test_hand_solved_single_column(self):
        model = build_partial_dft(7, PilotPattern(7, (1, 2, 4)))
        out = least_squares_on_support(model, np.ones(3), [0])
        assert out[0] == pytest.approx(1.0, abs=1e-12)  # normal equation 3 x = 3
        assert np.allclose(out[1:], 0)

    def test_empty_support(self):
        model = build_partial_dft(7, PilotPattern(7, (1, 2, 4)))
        assert np.allclose(least_squares_on_support(model, np.ones(3), []), 0)

    def test_residual_orthogonality(self):
        rng = np.random.default_rng(5)
        model = build_partial_dft(32, PilotPattern(32, tuple(range(0, 32, 4))))
        y = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        support = [3, 10, 17]
        out = least_squares_on_support(model, y, support)
        residual = y - model.matrix @ out
        cols = model.matrix[:, support]
        assert np.max(np.abs(cols.conj().T @ residual)) < 1e-8

    def test_rank_deficient_duplicate(self):
        model = build_partial_dft(7, PilotPattern(7, (1, 2, 4)))
        with pytest.raises(RankDeficient):
            least_squares_on_support(model, np.ones(3), [0, 0])

    def test_oversized_support_rank_deficient(self):
        model = build_partial_dft(7, PilotPattern(7, (1, 2, 4)))
        with pytest.raises(RankDeficient):
            least_squares_on_support(model, np.ones(3), [0, 1, 2, 3])
