"""MovieLens 1M preprocessing.

Parses the double-colon-delimited ratings file, filters movies by rating
count, and turns each surviving movie into an arm whose reward law is the
movie's empirical rating distribution. Ratings r in {1..5} are mapped to
rewards r/5, the simplest affine map into the unit interval the theory
assumes; the mapping is a documented convention, not data-driven.
"""
from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import FileUnreadable, NoArmsSurvive, TooManyMalformed
from .model import ArmSpec, BanditInstance, Categorical, validate_instance

logger = logging.getLogger(__name__)

#: Reward values for ratings 1..5 under the r/5 mapping.
REWARD_SUPPORT = (0.2, 0.4, 0.6, 0.8, 1.0)

#: Abort parsing when more than this fraction of lines is malformed.
MALFORMED_LIMIT = 0.001


@dataclass(frozen=True)
class RatingRecord:
    user_id: int
    movie_id: int
    rating: int
    timestamp: int


def parse_ratings(path) -> list[RatingRecord]:
    """Read a `UserID::MovieID::Rating::Timestamp` file.

    Malformed lines (wrong field count, non-integers, rating outside
    1..5) are counted and logged, and parsing aborts only when they
    exceed 0.1% of all lines.
    """
    try:
        with open(path, "r", encoding="utf-8", errors="replace") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise FileUnreadable(f"cannot read ratings file {path}: {exc}") from exc

    records: list[RatingRecord] = []
    malformed = 0
    total = 0
    for line in lines:
        line = line.strip()
        if not line:
            continue
        total += 1
        parts = line.split("::")
        if len(parts) != 4:
            malformed += 1
            continue
        try:
            user, movie, rating, ts = (int(p) for p in parts)
        except ValueError:
            malformed += 1
            continue
        if not 1 <= rating <= 5:
            malformed += 1
            continue
        records.append(RatingRecord(user, movie, rating, ts))

    if total == 0:
        logger.warning("ratings file %s is empty", path)
        return []
    if malformed > MALFORMED_LIMIT * total:
        raise TooManyMalformed(
            f"{malformed} of {total} lines malformed "
            f"(limit {MALFORMED_LIMIT:.1%})"
        )
    if malformed:
        logger.warning("skipped %d malformed of %d lines in %s", malformed, total, path)
    return records


def rating_histograms(
    records: Iterable[RatingRecord], min_count: int, inclusive: bool = False
) -> dict[int, list[int]]:
    """Per-movie rating histograms for movies passing the count filter.

    The filter keeps movies rated strictly more than min_count times;
    inclusive=True switches to 'at least', the alternative convention.
    """
    hists: dict[int, list[int]] = defaultdict(lambda: [0] * 5)
    for rec in records:
        hists[rec.movie_id][rec.rating - 1] += 1
    if inclusive:
        return {m: h for m, h in hists.items() if sum(h) >= min_count}
    return {m: h for m, h in hists.items() if sum(h) > min_count}


def build_instance(
    records: Sequence[RatingRecord],
    min_count: int,
    penalty,
    tau=0.5,
    *,
    inclusive: bool = False,
) -> BanditInstance:
    """Instance whose arms are the movies passing the count filter.

    Arms are ordered by movie id. Each arm's reward law is the movie's
    empirical distribution over the r/5 reward values, and its mean is
    that distribution's mean. penalty and tau may be scalars (tau is a
    total, split uniformly as tau/K) or per-arm sequences.
    """
    if not records:
        raise NoArmsSurvive("no rating records to build from")
    hists = rating_histograms(records, min_count, inclusive)
    if not hists:
        raise NoArmsSurvive(f"no movie has more than {min_count} ratings")
    movie_ids = sorted(hists)
    K = len(movie_ids)

    if isinstance(tau, (int, float)):
        taus = [float(tau) / K] * K
    else:
        taus = [float(t) for t in tau]
        if len(taus) != K:
            raise ValueError(f"tau has length {len(taus)}, expected {K}")
    if isinstance(penalty, (int, float)):
        penalties = [float(penalty)] * K
    else:
        penalties = [float(a) for a in penalty]
        if len(penalties) != K:
            raise ValueError(f"penalty has length {len(penalties)}, expected {K}")

    arms = []
    for k, movie in enumerate(movie_ids):
        hist = hists[movie]
        total = sum(hist)
        probs = tuple(c / total for c in hist)
        dist = Categorical(REWARD_SUPPORT, probs)
        arms.append(
            ArmSpec(
                id=k,
                mu=dist.analytic_mean(),
                tau=taus[k],
                penalty=penalties[k],
                dist=dist,
            )
        )
    return validate_instance(arms)


def empirical_reward_table(
    records: Sequence[RatingRecord], min_count: int, inclusive: bool = False
) -> list[tuple[int, tuple[float, ...], float]]:
    """(movie_id, reward probabilities, mean reward) per surviving movie,
    sorted by movie id. The per-movie view behind build_instance; usable
    even when fewer than two movies survive."""
    hists = rating_histograms(records, min_count, inclusive)
    table = []
    for movie in sorted(hists):
        hist = hists[movie]
        total = sum(hist)
        probs = tuple(c / total for c in hist)
        mean = math.fsum(p * v for p, v in zip(probs, REWARD_SUPPORT))
        table.append((movie, probs, mean))
    return table
