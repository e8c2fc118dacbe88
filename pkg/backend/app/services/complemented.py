"""
Complemented copies of c0 built from the measures mu_n.

phi_n is the pointwise max of piecewise-linear product hats centred at the
positive atoms of mu_n (the set A_2n). Each hat's axis radius is half the gap
from its model point 1/m to the neighbour 1/(m+1), so hats of different atoms
never meet and every bump vanishes near the limit point. With these bumps
t_n = 1/mu_n(phi_n) = 2, T x = sum t_n x_n phi_n, S f = (mu_n(f)) and P = TS.
Functions are extensional: anything callable at (x, y) model points.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import floor
from typing import Iterable, Mapping, Protocol

import numpy as np

from ..core.errors import DomainError
from .exactmath import fraction_text
from .measures import Atom, JNMeasure, build_mu, check_size, eval_grid
from .spaces import MODEL_K, MODEL_L, CompactModel, Side

logger = logging.getLogger(__name__)

Cells = dict[Atom, Fraction]


class ProductFunction(Protocol):
    def __call__(self, x: Fraction, y: Fraction) -> Fraction: ...


@dataclass(frozen=True)
class Hat:
    center: Fraction
    radius: Fraction

    def __call__(self, x: Fraction) -> Fraction:
        return max(Fraction(0), 1 - abs(Fraction(x) - self.center) / self.radius)

    @property
    def support(self) -> tuple[Fraction, Fraction]:
        return self.center - self.radius, self.center + self.radius


def axis_hat(model: CompactModel, point: Fraction) -> Hat:
    return Hat(center=point, radius=model.isolation_radius(point))


@lru_cache(maxsize=None)
def _cover(side: Side, x: Fraction) -> tuple[int, int, Fraction] | None:
    """(block, idx, hat value) of the unique model hat whose open support holds x."""
    if x <= 0:
        return None
    model = MODEL_K if side is Side.K else MODEL_L
    base = max(1, floor(1 / x))
    for m in (base, base + 1):
        hat = axis_hat(model, Fraction(1, m))
        value = hat(x)
        if value > 0:
            n, idx = model.locate(hat.center)
            return n, idx, value
    return None


def positive_support(n: int) -> frozenset[Atom]:
    """A_2n: atoms of mu_n with weight +1/(n 2^n); mu_n of this set is exactly 1/2."""
    check_size(n)
    mu = build_mu(n)
    rows, cols = np.nonzero(mu.matrix.entries > 0)
    return frozenset(zip(rows.tolist(), cols.tolist()))


def negative_support(n: int) -> frozenset[Atom]:
    """A_(2n-1), the rest of supp mu_n."""
    check_size(n)
    mu = build_mu(n)
    rows, cols = np.nonzero(mu.matrix.entries < 0)
    return frozenset(zip(rows.tolist(), cols.tolist()))


def support_points(n: int) -> tuple[list[Fraction], list[Fraction]]:
    return MODEL_K.block(n), MODEL_L.block(n)


def pair(mu: JNMeasure, f: ProductFunction) -> Fraction:
    """mu(f), sampling f at the embedded support of mu."""
    xs, ys = support_points(mu.n)
    sparse = getattr(f, "cells", None)
    if sparse is not None:
        total = 0 * mu.scale
        for (s, j), value in sparse(mu.n).items():
            total += mu.matrix.entry(s, j) * value
        return total * mu.scale
    values = np.empty((len(xs), len(ys)), dtype=object)
    for s, x in enumerate(xs):
        for j, y in enumerate(ys):
            values[s, j] = Fraction(f(x, y))
    return eval_grid(mu, values)


@dataclass(frozen=True, eq=False)
class BumpFunction:
    """phi_n (signed=False) or the sign bump psi_n (signed=True)."""

    family: "BumpFamily"
    n: int
    signed: bool = False

    def _weight_sign(self, s: int, j: int) -> int:
        return self.family.measure(self.n).matrix.entry(s, j)

    def __call__(self, x: Fraction, y: Fraction) -> Fraction:
        cx = _cover(Side.K, Fraction(x))
        cy = _cover(Side.L, Fraction(y))
        if cx is None or cy is None:
            return Fraction(0)
        (nk, s, hx), (nl, j, hy) = cx, cy
        if nk != self.n or nl != self.n:
            return Fraction(0)
        sign = self._weight_sign(s, j)
        if not self.signed and sign < 0:
            return Fraction(0)
        return min(hx, hy) * (sign if self.signed else 1)

    def cells(self, block: int) -> Cells:
        """Nonzero values at the atoms of mu_block."""
        return self.family.bump_cells(self, block)

    def compute_cells(self, block: int) -> Cells:
        xs, ys = support_points(block)
        row_hits = [(s, c) for s, c in enumerate(_cover(Side.K, x) for x in xs) if c and c[0] == self.n]
        col_hits = [(j, c) for j, c in enumerate(_cover(Side.L, y) for y in ys) if c and c[0] == self.n]
        result: Cells = {}
        for s, (_, s_idx, hx) in row_hits:
            for j, (_, j_idx, hy) in col_hits:
                sign = self._weight_sign(s_idx, j_idx)
                if not self.signed and sign < 0:
                    continue
                result[(s, j)] = min(hx, hy) * (sign if self.signed else 1)
        return result

    def hats(self) -> list[tuple[Hat, Hat, int]]:
        xs, ys = support_points(self.n)
        matrix = self.family.measure(self.n).matrix
        result = []
        for s, x in enumerate(xs):
            for j, y in enumerate(ys):
                sign = matrix.entry(s, j)
                if self.signed or sign > 0:
                    result.append((axis_hat(MODEL_K, x), axis_hat(MODEL_L, y), sign))
        return result


@dataclass(frozen=True)
class C0Vector:
    """Finitely supported stand-in for an element of c0."""

    entries: tuple[tuple[int, Fraction], ...] = ()

    @classmethod
    def of(cls, values: Mapping[int, Fraction | int]) -> "C0Vector":
        cleaned = tuple(sorted((int(n), Fraction(v)) for n, v in values.items() if v != 0))
        if any(n < 1 for n, _ in cleaned):
            raise DomainError("c0 indices start at 1")
        return cls(entries=cleaned)

    @classmethod
    def basis(cls, n: int) -> "C0Vector":
        return cls.of({n: 1})

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.entries)

    def __getitem__(self, n: int) -> Fraction:
        return self.as_dict().get(n, Fraction(0))

    @property
    def support(self) -> list[int]:
        return [n for n, _ in self.entries]

    def __add__(self, other: "C0Vector") -> "C0Vector":
        merged = self.as_dict()
        for n, v in other.entries:
            merged[n] = merged.get(n, Fraction(0)) + v
        return C0Vector.of(merged)

    def __rmul__(self, scalar: Fraction | int) -> "C0Vector":
        return C0Vector.of({n: scalar * v for n, v in self.entries})

    def __sub__(self, other: "C0Vector") -> "C0Vector":
        return self + (-1) * other

    def restrict(self, n_range: Iterable[int]) -> "C0Vector":
        keep = set(n_range)
        return C0Vector.of({n: v for n, v in self.entries if n in keep})

    def to_json(self) -> dict[str, str]:
        return {str(n): fraction_text(v) for n, v in self.entries}


@dataclass(eq=False)
class BumpFamily:
    n_max: int
    _measures: dict[int, JNMeasure] = field(default_factory=dict, repr=False)
    _t: dict[int, Fraction] = field(default_factory=dict, repr=False)
    _cells: dict[tuple[int, bool, int], Cells] = field(default_factory=dict, repr=False)

    def measure(self, n: int) -> JNMeasure:
        if not 1 <= n <= self.n_max:
            raise DomainError(f"bump family covers n in [1, {self.n_max}], got {n}")
        if n not in self._measures:
            self._measures[n] = build_mu(n)
        return self._measures[n]

    def phi(self, n: int) -> BumpFunction:
        self.measure(n)
        return BumpFunction(family=self, n=n)

    def psi(self, n: int) -> BumpFunction:
        self.measure(n)
        return BumpFunction(family=self, n=n, signed=True)

    def bump_cells(self, bump: BumpFunction, block: int) -> Cells:
        key = (bump.n, bump.signed, block)
        if key not in self._cells:
            self._cells[key] = bump.compute_cells(block)
        return self._cells[key]

    def t(self, n: int) -> Fraction:
        if n not in self._t:
            self._t[n] = 1 / pair(self.measure(n), self.phi(n))
        return self._t[n]

    def synthesize(self, x: C0Vector) -> "BumpCombination":
        for n in x.support:
            self.measure(n)
        return BumpCombination(family=self, coefficients=x)


def build_bumps(n_max: int) -> BumpFamily:
    check_size(n_max, what="bump family")
    family = BumpFamily(n_max=n_max)
    for n in range(1, n_max + 1):
        family.measure(n)
    return family


def sign_bumps(n_max: int) -> list[BumpFunction]:
    family = build_bumps(n_max)
    return [family.psi(n) for n in range(1, n_max + 1)]


@dataclass(frozen=True, eq=False)
class BumpCombination:
    """T x = sum t_n x_n phi_n as an evaluable function."""

    family: BumpFamily
    coefficients: C0Vector

    def __call__(self, x: Fraction, y: Fraction) -> Fraction:
        return sum(
            (self.family.t(n) * c * self.family.phi(n)(x, y) for n, c in self.coefficients.entries),
            Fraction(0),
        )

    def cells(self, block: int) -> Cells:
        result: Cells = {}
        for n, c in self.coefficients.entries:
            weight = self.family.t(n) * c
            for atom, value in self.family.phi(n).cells(block).items():
                result[atom] = result.get(atom, Fraction(0)) + weight * value
        return result


def op_T(family: BumpFamily, x: C0Vector, queries: Iterable[tuple[Fraction, Fraction]]) -> list[Fraction]:
    tx = family.synthesize(x)
    return [tx(Fraction(px), Fraction(py)) for px, py in queries]


def op_S(f: ProductFunction, n_range: Iterable[int], family: BumpFamily | None = None) -> C0Vector:
    values = {}
    for n in n_range:
        mu = family.measure(n) if family is not None else build_mu(n)
        values[n] = pair(mu, f)
    return C0Vector.of(values)


@dataclass(frozen=True)
class TabulatedProductFunction:
    """Values at finitely many (x, y) model points; 0 everywhere else."""

    table: Mapping[tuple[Fraction, Fraction], Fraction]

    def __call__(self, x: Fraction, y: Fraction) -> Fraction:
        return self.table.get((Fraction(x), Fraction(y)), Fraction(0))

    def cells(self, block: int) -> Cells:
        xs, ys = support_points(block)
        rows = {x: s for s, x in enumerate(xs)}
        cols = {y: j for j, y in enumerate(ys)}
        return {
            (rows[x], cols[y]): v for (x, y), v in self.table.items() if x in rows and y in cols and v != 0
        }


def random_tabulated(rng: np.random.Generator, n_range: Iterable[int], max_denominator: int = 16) -> TabulatedProductFunction:
    table = {}
    for n in n_range:
        xs, ys = support_points(n)
        for x in xs:
            denominators = rng.integers(1, max_denominator + 1, size=len(ys))
            numerators = rng.integers(-3 * denominators, 3 * denominators + 1)
            for y, p, q in zip(ys, numerators.tolist(), denominators.tolist()):
                table[(x, y)] = Fraction(int(p), int(q))
    return TabulatedProductFunction(table=table)


def random_c0_vector(rng: np.random.Generator, n_range: Iterable[int], max_terms: int = 4) -> C0Vector:
    indices = list(n_range)
    size = int(rng.integers(1, min(max_terms, len(indices)) + 1))
    chosen = rng.choice(indices, size=size, replace=False)
    return C0Vector.of({int(n): Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 8))) for n in chosen})


@dataclass(frozen=True)
class ProjectionReport:
    st_identity: bool
    idempotent: bool
    st_mismatches: tuple[int, ...]
    idempotence_mismatches: int
    atoms_checked: int


def check_st(family: BumpFamily, x: C0Vector, n_range: Iterable[int]) -> tuple[int, ...]:
    """Indices n in n_range where (S T x)_n differs from x_n."""
    n_range = list(n_range)
    stx = op_S(family.synthesize(x), n_range, family)
    return tuple(n for n in n_range if stx[n] != x[n])


def check_idempotence(family: BumpFamily, f: ProductFunction, n_range: Iterable[int]) -> tuple[int, int]:
    """(mismatching atoms, atoms checked) between P f and P P f on the supports in n_range."""
    n_range = list(n_range)
    pf = family.synthesize(op_S(f, n_range, family))
    ppf = family.synthesize(op_S(pf, n_range, family))
    mismatches = 0
    checked = 0
    for n in n_range:
        xs, ys = support_points(n)
        first, second = pf.cells(n), ppf.cells(n)
        checked += len(xs) * len(ys)
        mismatches += sum(
            1 for atom in first.keys() | second.keys() if first.get(atom, Fraction(0)) != second.get(atom, Fraction(0))
        )
    return mismatches, checked


def check_projection(family: BumpFamily, x: C0Vector, f: ProductFunction, n_range: Iterable[int]) -> ProjectionReport:
    n_range = list(n_range)
    st_mismatches = check_st(family, x, n_range)
    mismatches, checked = check_idempotence(family, f, n_range)
    return ProjectionReport(
        st_identity=not st_mismatches,
        idempotent=mismatches == 0,
        st_mismatches=st_mismatches,
        idempotence_mismatches=mismatches,
        atoms_checked=checked,
    )


def orthogonality_matrix(family: BumpFamily, signed: bool = False) -> list[list[Fraction]]:
    """[mu_n(phi_m)] (or [mu_n(psi_m)]) for n, m <= n_max."""
    size = family.n_max
    bump = family.psi if signed else family.phi
    return [[pair(family.measure(n), bump(m)) for m in range(1, size + 1)] for n in range(1, size + 1)]


def hat_gap(m: int) -> Fraction:
    """Gap between the hats at 1/m and 1/(m+1): 1/(m(m+1)(m+2))."""
    return Fraction(1, m * (m + 1) * (m + 2))


@dataclass(frozen=True)
class DisjointnessReport:
    disjoint: bool
    min_gap_k: Fraction
    min_gap_l: Fraction
    intervals_checked: int


def _axis_gaps(model: CompactModel, n_max: int) -> tuple[bool, Fraction, int]:
    points = sorted((p for n in range(1, n_max + 1) for p in model.block(n)), reverse=True)
    hats = [axis_hat(model, p) for p in points]
    ok = True
    min_gap: Fraction | None = None
    for upper, lower in zip(hats, hats[1:]):
        gap = upper.support[0] - lower.support[1]
        m = upper.center.denominator
        if lower.center.denominator == m + 1 and gap != hat_gap(m):
            ok = False
        ok = ok and gap > 0
        min_gap = gap if min_gap is None else min(min_gap, gap)
    # The last hat must stay away from the limit point 0.
    ok = ok and hats[-1].support[0] > 0
    return ok, min_gap if min_gap is not None else Fraction(0), len(hats)


def certify_disjointness(family: BumpFamily) -> DisjointnessReport:
    """Axis hat supports are pairwise disjoint, hence so are the product hats of distinct atoms."""
    ok_k, gap_k, count_k = _axis_gaps(MODEL_K, family.n_max)
    ok_l, gap_l, count_l = _axis_gaps(MODEL_L, family.n_max)
    return DisjointnessReport(
        disjoint=ok_k and ok_l, min_gap_k=gap_k, min_gap_l=gap_l, intervals_checked=count_k + count_l
    )


@dataclass(frozen=True)
class DefinitionReport:
    non_negative: bool
    sup_is_one: bool
    disjoint: bool
    orthogonal: bool
    diagonal_inf: Fraction

    @property
    def satisfied(self) -> bool:
        return self.non_negative and self.sup_is_one and self.disjoint and self.orthogonal and self.diagonal_inf > 0


def complemented_definition(family: BumpFamily, signed: bool = False) -> DefinitionReport:
    """Check a bump family against the complemented JN-sequence definition."""
    bump = family.psi if signed else family.phi
    non_negative = True
    sup_is_one = True
    for n in range(1, family.n_max + 1):
        hats = bump(n).hats()
        # Each hat attains its extreme value sign * 1 at its centre and 0 on its boundary.
        non_negative = non_negative and all(sign > 0 or not signed for _, _, sign in hats)
        sup_is_one = sup_is_one and any(sign > 0 for _, _, sign in hats)
    matrix = orthogonality_matrix(family, signed)
    size = family.n_max
    orthogonal = all(matrix[i][k] == 0 for i in range(size) for k in range(size) if i != k)
    diagonal_inf = min(abs(matrix[i][i]) for i in range(size))
    return DefinitionReport(
        non_negative=non_negative,
        sup_is_one=sup_is_one,
        disjoint=certify_disjointness(family).disjoint,
        orthogonal=orthogonal,
        diagonal_inf=diagonal_inf,
    )
