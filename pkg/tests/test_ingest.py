"""Ratings parsing and empirical-instance construction."""

import numpy as np
import pytest

from penbandits import (
    FileUnreadable,
    NoArmsSurvive,
    TooFewArms,
    TooManyMalformed,
    build_instance,
    parse_ratings,
)
from penbandits.ingest import RatingRecord, empirical_reward_table, rating_histograms


def write_ratings(path, rows):
    path.write_text("".join(f"{u}::{m}::{r}::{t}\n" for u, m, r, t in rows))
    return path


def synthetic_records(rng, n_movies=20, n_ratings=2000):
    """Movies with geometric-ish popularity and random ratings."""
    rows = []
    weights = np.linspace(1.0, 0.05, n_movies)
    weights /= weights.sum()
    for i in range(n_ratings):
        movie = int(rng.choice(n_movies, p=weights)) + 1
        rating = int(rng.integers(1, 6))
        rows.append(RatingRecord(i % 97, movie, rating, i))
    return rows


class TestParseRatings:
    def test_well_formed_line(self, tmp_path):
        path = write_ratings(tmp_path / "r.dat", [(1, 1193, 5, 978300760)])
        records = parse_ratings(path)
        assert records == [RatingRecord(1, 1193, 5, 978300760)]

    def test_rating_out_of_range_is_malformed(self, tmp_path):
        rows = [(1, 1, 5, 0)] * 2000
        path = write_ratings(tmp_path / "r.dat", rows)
        with open(path, "a") as fh:
            fh.write("1::1193::6::0\n")
        # 1 bad line of 2001 is below the 0.1% threshold at 2001*0.001≈2.
        records = parse_ratings(path)
        assert len(records) == 2000

    def test_too_many_malformed(self, tmp_path):
        path = tmp_path / "r.dat"
        path.write_text("1::2::5::0\n" + "garbage\n" * 5)
        with pytest.raises(TooManyMalformed):
            parse_ratings(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "r.dat"
        path.write_text("")
        assert parse_ratings(path) == []

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(FileUnreadable):
            parse_ratings(tmp_path / "missing.dat")

    def test_non_integer_fields_are_malformed(self, tmp_path):
        path = tmp_path / "r.dat"
        lines = ["1::2::5::0\n"] * 3000 + ["a::2::5::0\n", "1::2::4.5::0\n"]
        path.write_text("".join(lines))
        assert len(parse_ratings(path)) == 3000


class TestEmpiricalTable:
    def test_single_movie_probabilities(self):
        records = [
            RatingRecord(1, 7, 5, 0),
            RatingRecord(2, 7, 5, 1),
            RatingRecord(3, 7, 4, 2),
        ]
        table = empirical_reward_table(records, min_count=2)
        assert len(table) == 1
        movie, probs, mean = table[0]
        assert movie == 7
        assert probs == pytest.approx((0.0, 0.0, 0.0, 1 / 3, 2 / 3))
        assert mean == pytest.approx(14 / 15, abs=1e-12)

    def test_probabilities_sum_to_one_and_mean_in_range(self):
        rng = np.random.default_rng(0)
        records = synthetic_records(rng)
        for _, probs, mean in empirical_reward_table(records, min_count=10):
            assert sum(probs) == pytest.approx(1.0, abs=1e-12)
            assert all(p >= 0.0 for p in probs)
            assert 0.2 <= mean <= 1.0

    def test_filter_monotone_in_threshold(self):
        rng = np.random.default_rng(1)
        records = synthetic_records(rng)
        survivors = {
            m0: set(rating_histograms(records, m0)) for m0 in (150, 100, 50)
        }
        assert survivors[150] <= survivors[100] <= survivors[50]

    def test_strict_versus_inclusive_threshold(self):
        records = [RatingRecord(u, 1, 3, u) for u in range(10)]
        records += [RatingRecord(u, 2, 3, u) for u in range(11)]
        strict = set(rating_histograms(records, 10))
        inclusive = set(rating_histograms(records, 10, inclusive=True))
        assert strict == {2}
        assert inclusive == {1, 2}


class TestBuildInstance:
    def test_arms_sorted_by_movie_id_with_uniform_tau(self):
        rng = np.random.default_rng(2)
        records = synthetic_records(rng)
        inst = build_instance(records, min_count=50, penalty=0.4, tau=0.5)
        K = inst.K
        assert K >= 2
        table = empirical_reward_table(records, min_count=50)
        assert [arm.mu for arm in inst.arms] == [row[2] for row in table]
        assert all(arm.tau == pytest.approx(0.5 / K) for arm in inst.arms)
        assert all(arm.penalty == 0.4 for arm in inst.arms)

    def test_per_arm_parameter_sequences(self):
        records = [RatingRecord(u, m, 3, u) for m in (1, 2) for u in range(5)]
        inst = build_instance(records, 4, penalty=[0.1, 0.2], tau=[0.05, 0.1])
        assert inst.penalties == (0.1, 0.2)
        assert inst.taus == (0.05, 0.1)

    def test_no_survivors(self):
        records = [RatingRecord(1, 1, 3, 0)]
        with pytest.raises(NoArmsSurvive):
            build_instance(records, min_count=10, penalty=0.3)
        with pytest.raises(NoArmsSurvive):
            build_instance([], min_count=0, penalty=0.3)

    def test_single_survivor_cannot_form_instance(self):
        records = [
            RatingRecord(1, 7, 5, 0),
            RatingRecord(2, 7, 5, 1),
            RatingRecord(3, 7, 4, 2),
        ]
        with pytest.raises(TooFewArms):
            build_instance(records, min_count=2, penalty=0.3)

    def test_declared_mean_matches_distribution(self):
        rng = np.random.default_rng(3)
        records = synthetic_records(rng)
        inst = build_instance(records, min_count=50, penalty=0.4)
        for arm in inst.arms:
            assert arm.mu == arm.dist.analytic_mean()
