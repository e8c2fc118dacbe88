from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Any, Hashable, Iterable, Iterator, Literal, Mapping

import numpy as np

from ..core.config import settings
from ..core.errors import DomainError, InvariantViolation, SizeLimitError
from .exactmath import fraction_text

logger = logging.getLogger(__name__)

Atom = tuple[int, int]


def check_size(n: int, limit: int | None = None, what: str = "sign matrix") -> None:
    cap = settings.N_MAX if limit is None else limit
    if n < 1:
        raise DomainError(f"{what}: n must be positive, got {n}")
    if n > cap:
        raise SizeLimitError(what, n, cap)


def _canonical_entries(n: int) -> np.ndarray:
    rows = np.arange(2**n, dtype=np.int64)[:, None]
    bits = (rows >> np.arange(n, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8)


@dataclass(frozen=True, eq=False)
class SignMatrix:
    """phi_n: row s has +1 in column j iff bit j of s is set."""

    n: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.entries.setflags(write=False)

    @classmethod
    def canonical(cls, n: int) -> "SignMatrix":
        return cls(n=n, entries=_canonical_entries(n))

    @classmethod
    def from_rows(cls, n: int, entries: Any) -> "SignMatrix":
        """Test hook for non-canonical bijections; rejects anything that is not one."""
        matrix = cls(n=n, entries=np.array(entries, dtype=np.int8))
        problems = matrix.invariant_problems()
        if problems:
            raise DomainError("; ".join(problems))
        return matrix

    @classmethod
    def unchecked(cls, n: int, entries: Any) -> "SignMatrix":
        return cls(n=n, entries=np.array(entries, dtype=np.int8))

    @property
    def row_count(self) -> int:
        return int(self.entries.shape[0])

    def entry(self, s: int, j: int) -> int:
        return int(self.entries[s, j])

    def row(self, s: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.entries[s])

    def row_codes(self) -> np.ndarray:
        weights = np.left_shift(np.int64(1), np.arange(self.n, dtype=np.int64))
        return ((self.entries.astype(np.int64) + 1) // 2) @ weights

    def plus_counts(self, columns: Iterable[int] | None = None) -> np.ndarray:
        block = self.entries if columns is None else self.entries[:, sorted(columns)]
        return (block > 0).sum(axis=1)

    def row_sums(self, columns: Iterable[int] | None = None) -> np.ndarray:
        block = self.entries if columns is None else self.entries[:, sorted(columns)]
        return block.astype(np.int64).sum(axis=1)

    def negated_row(self, s: int) -> int:
        """Index of the row whose pattern is -phi_n(s)."""
        if self.is_canonical():
            return s ^ (2**self.n - 1)
        target = self.row_codes()[s] ^ (2**self.n - 1)
        return int(np.flatnonzero(self.row_codes() == target)[0])

    def is_canonical(self) -> bool:
        return bool(np.array_equal(self.entries, _canonical_entries(self.n)))

    def invariant_problems(self) -> list[str]:
        problems: list[str] = []
        if self.entries.shape != (2**self.n, self.n):
            problems.append(f"shape {self.entries.shape} != {(2**self.n, self.n)}")
            return problems
        if not np.all(np.abs(self.entries) == 1):
            problems.append("entries outside {-1, +1}")
        if np.unique(self.row_codes()).size != 2**self.n:
            problems.append("rows are not pairwise distinct")
        column_sums = self.entries.astype(np.int64).sum(axis=0)
        if np.any(column_sums != 0):
            problems.append(f"column sums are not zero: {column_sums.tolist()}")
        return problems


def build_sign_matrix(n: int) -> SignMatrix:
    check_size(n)
    matrix = SignMatrix.canonical(n)
    logger.debug("built canonical sign matrix n=%d", n)
    return matrix


@dataclass(frozen=True)
class IndexRectangle:
    rows: frozenset[int]
    cols: frozenset[int]

    @classmethod
    def of(cls, rows: Iterable[int], cols: Iterable[int]) -> "IndexRectangle":
        return cls(rows=frozenset(int(s) for s in rows), cols=frozenset(int(j) for j in cols))

    def validate(self, n: int) -> None:
        bad_rows = [s for s in self.rows if not 0 <= s < 2**n]
        bad_cols = [j for j in self.cols if not 0 <= j < n]
        if bad_rows or bad_cols:
            raise DomainError(f"rectangle indices out of range for n={n}: rows {sorted(bad_rows)} cols {sorted(bad_cols)}")

    def to_json(self) -> dict[str, list[int]]:
        return {"rows": sorted(self.rows), "cols": sorted(self.cols)}


@dataclass(frozen=True, eq=False)
class JNMeasure:
    """mu_n = (1/(n 2^n)) sum phi_n(s)(j) delta_(s,j); atoms stay implicit."""

    n: int
    matrix: SignMatrix
    scale: Fraction

    @property
    def support_size(self) -> int:
        return self.matrix.row_count * self.n

    def weight(self, s: int, j: int) -> Fraction:
        return self.matrix.entry(s, j) * self.scale

    def total_variation(self) -> Fraction:
        return int(np.abs(self.matrix.entries.astype(np.int64)).sum()) * self.scale

    def total_mass(self) -> Fraction:
        return int(self.matrix.entries.astype(np.int64).sum()) * self.scale

    def to_json(self) -> dict[str, Any]:
        return {"n": self.n, "scale": fraction_text(self.scale), "support_size": self.support_size}


def measure_from_matrix(matrix: SignMatrix) -> JNMeasure:
    mu = JNMeasure(n=matrix.n, matrix=matrix, scale=Fraction(1, matrix.n * 2**matrix.n))
    norm = mu.total_variation()
    mass = mu.total_mass()
    if norm != 1:
        raise InvariantViolation(f"total variation of mu_{matrix.n} is {norm}, expected 1", claim="norm")
    if mass != 0:
        raise InvariantViolation(f"total mass of mu_{matrix.n} is {mass}, expected 0", claim="mass")
    return mu


def build_mu(n: int) -> JNMeasure:
    return measure_from_matrix(build_sign_matrix(n))


def eval_rectangle(mu: JNMeasure, rect: IndexRectangle) -> Fraction:
    rect.validate(mu.n)
    if not rect.rows or not rect.cols:
        return Fraction(0)
    block = mu.matrix.entries[np.ix_(sorted(rect.rows), sorted(rect.cols))]
    return int(block.astype(np.int64).sum()) * mu.scale


def measure_of_atoms(mu: JNMeasure, atoms: Iterable[Atom]) -> Fraction:
    total = 0
    for s, j in atoms:
        if not (0 <= s < mu.matrix.row_count and 0 <= j < mu.n):
            raise DomainError(f"atom {(s, j)} is outside the support of mu_{mu.n}")
        total += mu.matrix.entry(s, j)
    return total * mu.scale


def negated_rows(mu: JNMeasure, rows: Iterable[int]) -> frozenset[int]:
    """A' with phi_n(A') = -phi_n(A); mu(A' x B) = -mu(A x B)."""
    return frozenset(mu.matrix.negated_row(s) for s in rows)


def level_sets(mu: JNMeasure, rows: Iterable[int], cols: Iterable[int]) -> dict[int, frozenset[int]]:
    """A_i: rows of A with exactly i plus entries inside B, for 0 <= i <= |B|."""
    cols = sorted(cols)
    counts = mu.matrix.plus_counts(cols)
    result: dict[int, set[int]] = {i: set() for i in range(len(cols) + 1)}
    for s in rows:
        result[int(counts[s])].add(int(s))
    return {i: frozenset(members) for i, members in result.items()}


@dataclass(frozen=True)
class SampledFunction:
    """Exact values of a function restricted to K_n, L_n, or the grid K_n x L_n."""

    n: int
    domain: Literal["K", "L", "grid"]
    values: Mapping[Hashable, Fraction]

    def keys(self) -> Iterator[Hashable]:
        if self.domain == "K":
            yield from range(2**self.n)
        elif self.domain == "L":
            yield from range(self.n)
        else:
            for s in range(2**self.n):
                for j in range(self.n):
                    yield (s, j)

    def value(self, key: Hashable) -> Fraction:
        try:
            return self.values[key]
        except KeyError as exc:
            raise DomainError(f"sampled function on {self.domain} (n={self.n}) has no value at {key}") from exc

    def vector(self) -> list[Fraction]:
        if self.domain == "grid":
            raise DomainError("vector() is only defined for axis samples")
        return [self.value(key) for key in self.keys()]

    def sup_norm(self) -> Fraction:
        return max((abs(self.value(key)) for key in self.keys()), default=Fraction(0))

    @classmethod
    def axis(cls, n: int, side: Literal["K", "L"], values: Iterable[Fraction]) -> "SampledFunction":
        return cls(n=n, domain=side, values={i: Fraction(v) for i, v in enumerate(values)})

    @classmethod
    def tensor(cls, f: "SampledFunction", g: "SampledFunction") -> "SampledFunction":
        _check_axes(f, g)
        return cls(n=f.n, domain="grid", values={(s, j): f.value(s) * g.value(j) for s in f.keys() for j in g.keys()})

    @classmethod
    def direct_sum(cls, f: "SampledFunction", g: "SampledFunction") -> "SampledFunction":
        _check_axes(f, g)
        return cls(n=f.n, domain="grid", values={(s, j): f.value(s) + g.value(j) for s in f.keys() for j in g.keys()})


def _check_axes(f: SampledFunction, g: SampledFunction) -> None:
    if f.domain != "K" or g.domain != "L" or f.n != g.n:
        raise DomainError("expected samples on K_n and L_n for the same n")


def integer_vector(values: Iterable[Fraction]) -> tuple[np.ndarray, int]:
    """Common-denominator form: values == ints / denom, ints as exact object array."""
    values = [Fraction(v) for v in values]
    denom = lcm(*(v.denominator for v in values)) if values else 1
    ints = np.array([v.numerator * (denom // v.denominator) for v in values], dtype=object)
    return ints, denom


def eval_function(mu: JNMeasure, h: SampledFunction) -> Fraction:
    if h.domain != "grid" or h.n != mu.n:
        raise DomainError(f"eval_function needs a grid sample for n={mu.n}")
    total = Fraction(0)
    entries = mu.matrix.entries
    for s in range(mu.matrix.row_count):
        row = entries[s]
        row_total = Fraction(0)
        for j in range(mu.n):
            value = h.value((s, j))
            row_total += value if row[j] > 0 else -value
        total += row_total
    return total * mu.scale


def tensor_sum(mu: JNMeasure, f_ints: np.ndarray, g_ints: np.ndarray) -> int:
    """sum_s f(s) sum_j g(j) phi(s)(j) for integer samples, exact."""
    if f_ints.shape[0] != mu.matrix.row_count or g_ints.shape[0] != mu.n:
        raise DomainError(f"tensor samples do not match the grid of mu_{mu.n}")
    f_max = max((abs(int(v)) for v in f_ints), default=0)
    g_max = max((abs(int(v)) for v in g_ints), default=0)
    if f_max * g_max * mu.support_size < 2**62:
        inner = mu.matrix.entries.astype(np.int64) @ g_ints.astype(np.int64)
        return int(f_ints.astype(np.int64) @ inner)
    inner = mu.matrix.entries.astype(object) @ g_ints.astype(object)
    return int(f_ints.astype(object) @ inner)


def eval_tensor(mu: JNMeasure, f: Iterable[Fraction], g: Iterable[Fraction]) -> Fraction:
    """mu(f (x) g) = scale * sum_s f(s) sum_j g(j) phi(s)(j), exactly."""
    f_ints, f_den = integer_vector(f)
    g_ints, g_den = integer_vector(g)
    return Fraction(tensor_sum(mu, f_ints, g_ints), f_den * g_den) * mu.scale


def eval_grid(mu: JNMeasure, values: np.ndarray) -> Fraction:
    """mu(h) for a 2^n x n object array of Fractions."""
    total = (mu.matrix.entries.astype(object) * values).sum()
    return Fraction(total) * mu.scale


def rectangle_to_json(mu: JNMeasure, rect: IndexRectangle) -> dict[str, Any]:
    return {**mu.to_json(), "rectangle": rect.to_json(), "value": fraction_text(eval_rectangle(mu, rect))}
