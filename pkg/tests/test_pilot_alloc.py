"""Pilot allocation: coherence, difference profiles, difference sets, allocators."""

import itertools

import numpy as np
import pytest

from sparsepilots import (
    EmptyPattern,
    IndexOutOfRange,
    InvalidCount,
    NotDivisible,
    PilotPattern,
    catalog_difference_set,
    coherence,
    cyclic_shift,
    difference_profile,
    equidistant_allocate,
    greedy_allocate,
    load_pattern,
    random_allocate,
    save_pattern,
    verify_difference_set,
)
from sparsepilots.errors import ParseError
from sparsepilots.pilot_alloc import _CATALOG


def mu_tilde_direct(n, indices):
    """Independent coherence oracle: direct lag-domain summation."""
    best = 0.0
    for r in range(1, n):
        total = sum(complex(np.cos(-2 * np.pi * p * r / n), np.sin(-2 * np.pi * p * r / n))
                    for p in indices)
        best = max(best, abs(total))
    return best


def brute_profile(n, indices):
    """Independent difference-profile oracle: enumerate ordered pairs."""
    counts = [0] * n
    for k in indices:
        for l in indices:
            if k != l:
                counts[(k - l) % n] += 1
    return counts


class TestPilotPattern:
    def test_sorts_and_validates(self):
        p = PilotPattern(7, (4, 1, 2))
        assert p.indices == (1, 2, 4)
        assert p.n_pilots == 3

    def test_empty_rejected(self):
        with pytest.raises(EmptyPattern):
            PilotPattern(7, ())

    def test_out_of_range_rejected(self):
        with pytest.raises(IndexOutOfRange):
            PilotPattern(7, (0, 7))

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            PilotPattern(7, (1, 1, 2))


class TestCoherence:
    def test_seven_three_difference_set(self):
        rep = coherence(PilotPattern(7, (1, 2, 4)))
        assert rep.mu_tilde**2 == pytest.approx(2.0, abs=1e-12)
        assert rep.mu == pytest.approx(np.sqrt(2) / 3, abs=1e-12)
        assert rep.achieves_bound
        # cross-check against the direct summation oracle
        assert rep.mu_tilde == pytest.approx(mu_tilde_direct(7, (1, 2, 4)), abs=1e-12)

    def test_73_9_difference_set(self):
        pattern = catalog_difference_set(73, 9)
        rep = coherence(pattern)
        assert rep.mu == pytest.approx(np.sqrt(8) / 9, rel=1e-9)
        assert rep.achieves_bound

    def test_equidistant_aliases_to_one(self):
        rep = coherence(PilotPattern(8, (0, 2, 4, 6)))
        assert rep.mu == pytest.approx(1.0, abs=1e-12)
        assert rep.mu_tilde == pytest.approx(mu_tilde_direct(8, (0, 2, 4, 6)), abs=1e-10)

    def test_full_pattern_mu_zero(self):
        rep = coherence(PilotPattern(4, (0, 1, 2, 3)))
        assert rep.mu == pytest.approx(0.0, abs=1e-12)
        assert rep.bound_mu_tilde_sq == 0.0

    def test_bound_holds_for_random_patterns(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(4, 40))
            n_p = int(rng.integers(1, n))
            pattern = random_allocate(n, n_p, rng)
            rep = coherence(pattern)
            bound = n_p * (n - n_p) / (n - 1)
            assert rep.mu_tilde**2 >= bound - 1e-9 * bound - 1e-9
            assert rep.achieves_bound == verify_difference_set(pattern).is_difference_set

    def test_shift_invariance(self):
        pattern = PilotPattern(7, (1, 2, 4))
        base = coherence(pattern).mu
        for s in range(8):
            assert coherence(cyclic_shift(pattern, s)).mu == pytest.approx(base, abs=1e-12)

    def test_unit_multiplier_invariance(self):
        pattern = PilotPattern(31, (1, 5, 11, 24, 25, 27))
        base = coherence(pattern).mu
        for u in (2, 3, 7, 12, 30):
            mapped = PilotPattern(31, tuple((u * i) % 31 for i in pattern.indices))
            assert coherence(mapped).mu == pytest.approx(base, abs=1e-9)


class TestDifferenceProfile:
    def test_seven_three_all_ones(self):
        prof = difference_profile(PilotPattern(7, (1, 2, 4)))
        assert prof.counts[1:].tolist() == [1, 1, 1, 1, 1, 1]

    def test_consecutive_triple(self):
        prof = difference_profile(PilotPattern(7, (0, 1, 2)))
        assert prof.counts[1:].tolist() == [2, 1, 0, 0, 1, 2]
        assert prof.counts[1:].tolist() == brute_profile(7, (0, 1, 2))[1:]

    def test_singleton_all_zero(self):
        prof = difference_profile(PilotPattern(5, (3,)))
        assert prof.counts.sum() == 0

    def test_sum_identity_random(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            n = int(rng.integers(3, 32))
            n_p = int(rng.integers(1, n + 1))
            pattern = random_allocate(n, n_p, rng)
            prof = difference_profile(pattern)
            assert prof.counts.sum() == n_p * (n_p - 1)
            assert prof.counts[1:].tolist() == brute_profile(n, pattern.indices)[1:]


class TestVerifyDifferenceSet:
    def test_seven_three(self):
        check = verify_difference_set(PilotPattern(7, (1, 2, 4)))
        assert check.is_difference_set and check.common_repetition == 1

    def test_consecutive_not(self):
        assert not verify_difference_set(PilotPattern(7, (0, 1, 2))).is_difference_set

    def test_13_4(self):
        check = verify_difference_set(PilotPattern(13, (0, 1, 3, 9)))
        assert check.is_difference_set and check.common_repetition == 1


class TestGreedy:
    def test_seven_three_perfect(self):
        pattern = greedy_allocate(7, 3)
        assert pattern.indices == (0, 1, 3)
        assert difference_profile(pattern).variance() == 0.0
        # exhaustive oracle: no stage-3 extension of {0, 1} does better
        best = min(
            difference_profile(PilotPattern(7, (0, 1, s))).variance() for s in range(2, 7)
        )
        assert difference_profile(pattern).variance() == best

    def test_single_pilot(self):
        assert greedy_allocate(11, 1).indices == (0,)

    def test_deterministic(self):
        assert greedy_allocate(64, 8).indices == greedy_allocate(64, 8).indices

    def test_73_9_close_to_bound(self):
        # The stage-wise search does not reach the difference-set optimum at
        # this size; it lands about 60% above it (frozen from a reference
        # run) and well below the random median.
        rep = coherence(greedy_allocate(73, 9))
        optimum = np.sqrt(8) / 9
        assert rep.mu < 1.65 * optimum
        rng = np.random.default_rng(3)
        random_mus = [coherence(random_allocate(73, 9, rng)).mu for _ in range(100)]
        assert rep.mu < np.median(random_mus)

    def test_invalid_counts(self):
        with pytest.raises(InvalidCount):
            greedy_allocate(8, 0)
        with pytest.raises(InvalidCount):
            greedy_allocate(8, 9)


class TestRandomAllocate:
    def test_full_draw(self):
        assert random_allocate(9, 9, 123).indices == tuple(range(9))

    def test_deterministic_per_seed(self):
        assert random_allocate(256, 16, 7).indices == random_allocate(256, 16, 7).indices

    def test_uniform_frequencies(self):
        n, n_p, draws = 64, 8, 4000
        counts = np.zeros(n)
        for seed in range(draws):
            counts[list(random_allocate(n, n_p, seed).indices)] += 1
        expected = draws * n_p / n
        sigma = np.sqrt(draws * (n_p / n) * (1 - n_p / n))
        assert np.all(np.abs(counts - expected) < 5 * sigma)


class TestEquidistant:
    def test_256_16(self):
        assert equidistant_allocate(256, 16).indices == tuple(range(0, 256, 16))

    def test_8_4(self):
        assert equidistant_allocate(8, 4).indices == (0, 2, 4, 6)

    def test_not_divisible(self):
        with pytest.raises(NotDivisible):
            equidistant_allocate(7, 3)

    def test_aliased_coherence_is_one(self):
        assert coherence(equidistant_allocate(64, 8)).mu == pytest.approx(1.0, abs=1e-12)


class TestCyclicShift:
    def test_zero_and_full_shift(self):
        p = PilotPattern(7, (1, 2, 4))
        assert cyclic_shift(p, 0).indices == p.indices
        assert cyclic_shift(p, 7).indices == p.indices

    def test_shift_by_one(self):
        assert cyclic_shift(PilotPattern(7, (1, 2, 4)), 1).indices == (2, 3, 5)


class TestCatalog:
    def test_seven_three_verifies(self):
        pattern = catalog_difference_set(7, 3)
        check = verify_difference_set(pattern)
        assert check.is_difference_set and check.common_repetition == 1

    def test_73_9_verifies(self):
        pattern = catalog_difference_set(73, 9)
        check = verify_difference_set(pattern)
        assert check.is_difference_set and check.common_repetition == 1

    def test_256_16_unsupported(self):
        assert catalog_difference_set(256, 16) is None

    def test_every_table_entry_verifies(self):
        for (n, n_p), indices in _CATALOG.items():
            check = verify_difference_set(PilotPattern(n, indices))
            assert check.is_difference_set, (n, n_p)

    def test_quadratic_residue_family(self):
        for n in (7, 11, 19, 23, 31, 43):
            pattern = catalog_difference_set(n, (n - 1) // 2)
            assert pattern is not None
            assert verify_difference_set(pattern).is_difference_set

    def test_complements_and_trivia(self):
        assert catalog_difference_set(11, 1).indices == (0,)
        comp = catalog_difference_set(7, 4)  # complement of the (7,3,1) set
        assert comp is not None and verify_difference_set(comp).is_difference_set
        edge = catalog_difference_set(9, 8)
        assert edge is not None and verify_difference_set(edge).is_difference_set


class TestExhaustiveSevenThree:
    def test_bound_tight_iff_difference_set(self):
        bound = 3 * 4 / 6
        for combo in itertools.combinations(range(7), 3):
            pattern = PilotPattern(7, combo)
            rep = coherence(pattern)
            if verify_difference_set(pattern).is_difference_set:
                assert rep.mu_tilde**2 == pytest.approx(bound, rel=1e-9)
            else:
                assert rep.mu_tilde**2 > bound + 1e-9


class TestPatternIO:
    def test_round_trip(self, tmp_path):
        p = PilotPattern(73, catalog_difference_set(73, 9).indices)
        path = tmp_path / "p.json"
        save_pattern(p, path)
        assert load_pattern(path) == p

    def test_malformed_raises(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ParseError):
            load_pattern(path)
