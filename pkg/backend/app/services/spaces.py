"""
Compact-space models K = L = {0} u {1/m : m >= 1}.

Block n of side K holds 2^n consecutive points starting after offset 2^n - 2,
block n of side L holds n points after offset n(n-1)/2. Every model point is
an exact rational, so test functions evaluate exactly at support points.
"""

from __future__ import annotations

import csv
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

from ..core.errors import DomainError
from .exactmath import parse_fraction
from .measures import SampledFunction


class Side(str, Enum):
    K = "K"
    L = "L"


@dataclass(frozen=True)
class CompactModel:
    side: Side

    def offset(self, n: int) -> int:
        if n < 1:
            raise DomainError(f"block index must be positive, got {n}")
        if self.side is Side.K:
            return 2**n - 2
        return n * (n - 1) // 2

    def block_size(self, n: int) -> int:
        return 2**n if self.side is Side.K else n

    def point(self, n: int, idx: int) -> Fraction:
        if not 0 <= idx < self.block_size(n):
            raise DomainError(f"index {idx} is outside block {n} of side {self.side.value}")
        return Fraction(1, self.offset(n) + idx + 1)

    def block(self, n: int) -> list[Fraction]:
        base = self.offset(n) + 1
        return [Fraction(1, base + idx) for idx in range(self.block_size(n))]

    def locate(self, x: Fraction) -> tuple[int, int] | None:
        """(n, idx) of a model point, None for 0 or non-model points."""
        if x <= 0 or x.numerator != 1:
            return None
        position = x.denominator - 1
        n = 1
        while self.offset(n) + self.block_size(n) <= position:
            n += 1
        return n, position - self.offset(n)

    def isolation_radius(self, x: Fraction) -> Fraction:
        """Half the distance from the model point 1/m to its nearest neighbour, 1/(m+1)."""
        if self.locate(x) is None:
            raise DomainError(f"{x} is not an isolated model point")
        m = x.denominator
        return Fraction(1, 2 * m * (m + 1))


MODEL_K = CompactModel(Side.K)
MODEL_L = CompactModel(Side.L)


def model_for(side: Side | str) -> CompactModel:
    return MODEL_K if Side(side) is Side.K else MODEL_L


def model_point(side: Side | str, n: int, idx: int) -> Fraction:
    return model_for(side).point(n, idx)


class ModelFunction(ABC):
    """Continuous function on the model, exact at rational points."""

    spec: str

    @abstractmethod
    def __call__(self, x: Fraction) -> Fraction:
        raise NotImplementedError

    @property
    def limit_value(self) -> Fraction:
        return self(Fraction(0))

    def continuity_violations(self, points: Iterable[Fraction]) -> list[Fraction]:
        return []


@dataclass(frozen=True)
class PowerFunction(ModelFunction):
    p: int

    def __post_init__(self) -> None:
        if self.p < 0:
            raise DomainError("pow exponent must be non-negative")

    @property
    def spec(self) -> str:
        return f"pow:{self.p}"

    def __call__(self, x: Fraction) -> Fraction:
        return Fraction(x) ** self.p

    def continuity_violations(self, points: Iterable[Fraction]) -> list[Fraction]:
        # |x^p - 0^p| <= x on [0, 1] for p >= 1.
        if self.p == 0:
            return []
        return [x for x in points if abs(self(x) - self.limit_value) > x]


@dataclass(frozen=True)
class AffineFunction(ModelFunction):
    a: Fraction
    b: Fraction

    @property
    def spec(self) -> str:
        return f"affine:{self.a},{self.b}"

    def __call__(self, x: Fraction) -> Fraction:
        return self.a * x + self.b

    def continuity_violations(self, points: Iterable[Fraction]) -> list[Fraction]:
        return [x for x in points if abs(self(x) - self.b) > abs(self.a) * x]


@dataclass(frozen=True)
class IndicatorFunction(ModelFunction):
    """1 on {x < t}; clopen in the model for t > 0 (and empty for t <= 0)."""

    t: Fraction

    @property
    def spec(self) -> str:
        return f"indicator:{self.t}"

    def __call__(self, x: Fraction) -> Fraction:
        return Fraction(1) if x < self.t else Fraction(0)

    def continuity_violations(self, points: Iterable[Fraction]) -> list[Fraction]:
        # Locally constant: every point below the threshold agrees with 0.
        if self.t <= 0:
            return []
        return [x for x in points if x < self.t and self(x) != self.limit_value]


@dataclass(frozen=True)
class TabulatedFunction(ModelFunction):
    """Finite table over model points; every other point takes the value at 0."""

    table: Mapping[Fraction, Fraction] = field(hash=False)
    limit: Fraction = Fraction(0)
    modulus: Fraction | None = None
    source: str = "table"

    @property
    def spec(self) -> str:
        return f"table:@{self.source}"

    def __call__(self, x: Fraction) -> Fraction:
        return self.table.get(Fraction(x), self.limit)

    @property
    def limit_value(self) -> Fraction:
        return self.limit

    def continuity_violations(self, points: Iterable[Fraction]) -> list[Fraction]:
        """Points where |f(x) - f(0)| exceeds the declared modulus * x."""
        if self.modulus is None:
            return []
        return [x for x in points if abs(self(x) - self.limit) > self.modulus * x]


TABLE_COLUMNS = frozenset({"point", "value"})


def load_table(path: str | Path, modulus: Fraction | None = None) -> TabulatedFunction:
    path = Path(path)
    table: dict[Fraction, Fraction] = {}
    limit = Fraction(0)
    try:
        with path.open(newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            missing = TABLE_COLUMNS - set(reader.fieldnames or ())
            if missing:
                raise DomainError(f"table {path} lacks column(s) {', '.join(sorted(missing))}")
            for line, record in enumerate(reader, start=2):
                raw_point, raw_value = record["point"], record["value"]
                if raw_point is None or raw_value is None:
                    raise DomainError(f"table {path}, line {line}: expected point and value")
                point = parse_fraction(raw_point)
                value = parse_fraction(raw_value)
                if point == 0:
                    limit = value
                else:
                    table[point] = value
    except OSError as exc:
        raise DomainError(f"cannot read table {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise DomainError(f"table {path} is not UTF-8 text") from exc
    return TabulatedFunction(table=table, limit=limit, modulus=modulus, source=str(path))


def parse_test_function(spec: str) -> ModelFunction:
    kind, _, arg = spec.strip().partition(":")
    kind = kind.lower()
    try:
        if kind == "pow":
            return PowerFunction(int(arg))
        if kind == "affine":
            a, b = arg.split(",")
            return AffineFunction(parse_fraction(a), parse_fraction(b))
        if kind == "indicator":
            return IndicatorFunction(parse_fraction(arg))
        if kind == "table":
            path, _, modulus = arg.lstrip("@").partition(",")
            return load_table(path, parse_fraction(modulus) if modulus else None)
    except ValueError as exc:
        raise DomainError(f"bad test function spec {spec!r}: {exc}") from exc
    raise DomainError(f"unknown test function kind in {spec!r}; use pow:p, affine:a,b, indicator:t or table:@file.csv")


CONSTANT_ONE = AffineFunction(Fraction(0), Fraction(1))


def sample(f: ModelFunction, side: Side | str, n: int) -> tuple[SampledFunction, Fraction]:
    model = model_for(side)
    points = model.block(n)
    violations = f.continuity_violations(points)
    if violations:
        shown = ", ".join(str(x) for x in violations[:5])
        raise DomainError(
            f"{f.spec} breaks its continuity certificate on block {n} of side {model.side.value} at {shown}"
            + (f" and {len(violations) - 5} more" if len(violations) > 5 else "")
        )
    values = [f(x) for x in points]
    sampled = SampledFunction.axis(n, model.side.value, values)
    return sampled, sampled.sup_norm()
