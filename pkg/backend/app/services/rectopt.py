"""
Rectangle suprema of mu_n.

Three independent routes to sup |mu_n(A x B)|: the closed form, the exact
optimal-A reduction enumerated over every column set B, and a full double
enumeration over A and B. Suprema over X x Y reduce to the support grid since
mu_n(A x B) = mu_n((A n K_n) x (B n L_n)); only grid suprema are computed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np
from joblib import Parallel, delayed

from ..core.config import settings
from ..core.errors import DomainError, InvariantViolation
from .exactmath import (
    PiInterval,
    Verdict,
    binom,
    ceil_half,
    closed_values,
    combine,
    fraction_text,
    pi_times_greater_than,
    pi_times_less_than,
)
from .measures import IndexRectangle, JNMeasure, build_mu, check_size, eval_rectangle

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RectWitness:
    rect: IndexRectangle
    value: Fraction

    @classmethod
    def certified(cls, mu: JNMeasure, rect: IndexRectangle, value: Fraction) -> "RectWitness":
        actual = eval_rectangle(mu, rect)
        if actual != value:
            raise InvariantViolation(f"witness claims {value} but mu_{mu.n}(A x B) = {actual}", claim="witness")
        return cls(rect=rect, value=value)

    def to_json(self) -> dict:
        return {**self.rect.to_json(), "value": fraction_text(self.value)}


@dataclass(frozen=True)
class BoundVerdict:
    n: int
    value: Fraction
    lower_ok: Verdict
    upper_ok: Verdict

    @property
    def verdict(self) -> Verdict:
        return combine(self.lower_ok, self.upper_ok)


def sup_closed(n: int) -> Fraction:
    if n < 1:
        raise DomainError(f"sup_closed requires n >= 1, got {n}")
    h = ceil_half(n)
    return Fraction(h * binom(n, h), n * 2**n)


def sup_fixed_b(n: int, k: int) -> Fraction:
    if not 1 <= k <= n:
        raise DomainError(f"|B| must lie in [1, {n}], got {k}")
    h = ceil_half(k)
    return Fraction(h * binom(k, h), n * 2**k)


def sup_fixed_b_central(n: int, k: int) -> Fraction:
    """The same supremum written as (m/n) * C(2m, m) / 4^m with m = ceil(k/2)."""
    m = ceil_half(k)
    return Fraction(m * binom(2 * m, m), n * 4**m)


def optimal_A(mu: JNMeasure, cols: Iterable[int]) -> RectWitness:
    cols = frozenset(int(j) for j in cols)
    if not cols:
        raise DomainError("optimal_A requires a nonempty column set")
    IndexRectangle(rows=frozenset(), cols=cols).validate(mu.n)
    sums = mu.matrix.row_sums(cols)
    rows = np.flatnonzero(sums > 0)
    value = int(sums[rows].sum()) * mu.scale
    return RectWitness.certified(mu, IndexRectangle.of(rows.tolist(), cols), value)


def b_witness(mu: JNMeasure, cols: Iterable[int]) -> RectWitness:
    """B_(n): rows with at least ceil(|B|/2) plus entries in B, zero-sum rows included."""
    cols = frozenset(int(j) for j in cols)
    if not cols:
        raise DomainError("b_witness requires a nonempty column set")
    counts = mu.matrix.plus_counts(cols)
    rows = np.flatnonzero(counts >= ceil_half(len(cols)))
    return RectWitness.certified(mu, IndexRectangle.of(rows.tolist(), cols), sup_fixed_b(mu.n, len(cols)))


def witness_majority(n: int) -> RectWitness:
    """K_(n) against B = L_n; rows with zero row sum contribute nothing and are left out."""
    mu = build_mu(n)
    counts = mu.matrix.plus_counts()
    rows = np.flatnonzero((counts >= ceil_half(n)) & (2 * counts != n))
    return RectWitness.certified(mu, IndexRectangle.of(rows.tolist(), range(n)), sup_closed(n))


def _columns(mask: int, n: int) -> tuple[int, ...]:
    return tuple(j for j in range(n) if mask >> j & 1)


def _better(candidate: tuple[int, tuple[int, ...]], best: tuple[int, tuple[int, ...]] | None) -> bool:
    """Larger value, then larger |B|, then the lexicographically least B."""
    if best is None:
        return True
    value, cols = candidate
    best_value, best_cols = best
    if value != best_value:
        return value > best_value
    if len(cols) != len(best_cols):
        return len(cols) > len(best_cols)
    return cols < best_cols


def _gray(i: int) -> int:
    return i ^ (i >> 1)


def _scan_column_sets(entries: np.ndarray, start: int, stop: int) -> tuple[int, tuple[int, ...]] | None:
    """Best (positive-part total, B) over Gray-code positions start..stop-1."""
    n = entries.shape[1]
    mask = _gray(start)
    sums = entries[:, list(_columns(mask, n))].astype(np.int64).sum(axis=1)
    best: tuple[int, tuple[int, ...]] | None = None
    for i in range(start, stop):
        if i > start:
            new_mask = _gray(i)
            j = (new_mask ^ mask).bit_length() - 1
            if new_mask >> j & 1:
                sums += entries[:, j]
            else:
                sums -= entries[:, j]
            mask = new_mask
        if mask == 0:
            continue
        candidate = (int(sums[sums > 0].sum()), _columns(mask, n))
        if _better(candidate, best):
            best = candidate
    return best


def oracle_sup(n: int, jobs: int | None = None) -> RectWitness:
    check_size(n, min(settings.ORACLE_CAP, settings.N_MAX), "oracle_sup")
    mu = build_mu(n)
    total = 2**n
    jobs = settings.JOBS if jobs is None else jobs
    chunks = max(1, min(jobs * 4, total // 256 or 1))
    bounds = [total * c // chunks for c in range(chunks + 1)]
    partials = Parallel(n_jobs=jobs)(
        delayed(_scan_column_sets)(mu.matrix.entries, bounds[c], bounds[c + 1]) for c in range(chunks)
    )
    best = None
    for partial in partials:
        if partial is not None and _better(partial, best):
            best = partial
    assert best is not None
    logger.info("oracle_sup n=%d best |B|=%d", n, len(best[1]))
    witness = optimal_A(mu, best[1])
    if witness.value != best[0] * mu.scale:
        raise InvariantViolation("oracle enumeration disagrees with optimal_A", claim="oracle")
    return witness


def _best_row_subset(row_sums: list[int]) -> int:
    """max |sum_{s in A} r_s| over all row subsets A, walked in Gray-code order."""
    running = 0
    best = 0
    member = 0
    for i in range(1, 2 ** len(row_sums)):
        s = (i & -i).bit_length() - 1
        if member >> s & 1:
            running -= row_sums[s]
        else:
            running += row_sums[s]
        member ^= 1 << s
        if abs(running) > best:
            best = abs(running)
    return best


def brute_sup(n: int, jobs: int | None = None) -> Fraction:
    check_size(n, min(settings.BRUTE_CAP, settings.N_MAX), "brute_sup")
    mu = build_mu(n)
    jobs = settings.JOBS if jobs is None else jobs
    per_b = Parallel(n_jobs=jobs)(
        delayed(_best_row_subset)(mu.matrix.row_sums(_columns(mask, n)).tolist()) for mask in range(1, 2**n)
    )
    return max(per_b) * mu.scale


def check_bound4(n: int, pi: PiInterval, value: Fraction | None = None) -> BoundVerdict:
    """1/(2 sqrt(pi n)) < v < 2/sqrt(pi n), squared: v^2 4n pi > 1 and v^2 n pi < 4."""
    v = sup_closed(n) if value is None else value
    square = v * v
    lower = pi_times_greater_than(square * 4 * n, Fraction(1), pi)
    upper = pi_times_less_than(square * n, Fraction(4), pi)
    return BoundVerdict(n=n, value=v, lower_ok=lower, upper_ok=upper)


def bound4_table(n_max: int, pi: PiInterval) -> Iterator[BoundVerdict]:
    for n, closed in closed_values(n_max):
        yield check_bound4(n, pi, Fraction(closed, n * 2**n))


def check_fixed_b_sandwich(n: int, k: int, value: Fraction, pi: PiInterval) -> Verdict:
    """(m/n)/sqrt(pi(m+1)) < value < (m/n)/sqrt(pi m), m = ceil(k/2)."""
    m = ceil_half(k)
    ratio = Fraction(m, n)
    square = value * value
    lower = pi_times_greater_than(square * (m + 1), ratio * ratio, pi)
    upper = pi_times_less_than(square * m, ratio * ratio, pi)
    return combine(lower, upper)


def sign_pattern_sum(mu: JNMeasure, row_signs: Iterable[int], col_signs: Iterable[int]) -> tuple[Fraction, Fraction]:
    """sum t(s) d(j) mu(s, j) and its four-rectangle bound 4 * sup_closed(n)."""
    t = np.array(list(row_signs), dtype=np.int64)
    d = np.array(list(col_signs), dtype=np.int64)
    if t.shape[0] != mu.matrix.row_count or d.shape[0] != mu.n:
        raise DomainError("sign vectors do not match the grid")
    total = int(t @ (mu.matrix.entries.astype(np.int64) @ d))
    plus_rows = np.flatnonzero(t > 0).tolist()
    minus_rows = np.flatnonzero(t < 0).tolist()
    plus_cols = np.flatnonzero(d > 0).tolist()
    minus_cols = np.flatnonzero(d < 0).tolist()
    split = (
        eval_rectangle(mu, IndexRectangle.of(plus_rows, plus_cols))
        + eval_rectangle(mu, IndexRectangle.of(minus_rows, minus_cols))
        - eval_rectangle(mu, IndexRectangle.of(plus_rows, minus_cols))
        - eval_rectangle(mu, IndexRectangle.of(minus_rows, plus_cols))
    )
    if split != total * mu.scale:
        raise InvariantViolation("four-rectangle decomposition does not add up", claim="decomposition")
    return split, 4 * sup_closed(mu.n)
