from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Literal, Sequence

import numpy as np
from joblib import Parallel, delayed

from ..core.config import settings
from ..core.errors import DomainError, InsufficientDataError, InvariantViolation
from .exactmath import (
    PiInterval,
    Verdict,
    fraction_text,
    pi_times_greater_than,
    pi_times_less_than,
    sqrt_upper,
)
from .measures import (
    IndexRectangle,
    JNMeasure,
    SampledFunction,
    build_mu,
    check_size,
    eval_rectangle,
    eval_tensor,
    tensor_sum,
)
from .rectopt import check_bound4, sup_closed, witness_majority
from .spaces import CONSTANT_ONE, IndicatorFunction, ModelFunction, sample

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecayReport:
    n: int
    lhs: Fraction
    rhs_certified_floor: Fraction
    verdict: Verdict
    extras: dict[str, object] = field(default_factory=dict, compare=False)

    def to_row(self, seed: int | None = None) -> dict[str, object]:
        row: dict[str, object] = {} if seed is None else {"seed": seed}
        row.update(
            n=self.n,
            lhs=fraction_text(self.lhs),
            rhs_floor=fraction_text(self.rhs_certified_floor),
            verdict=self.verdict.value,
        )
        return row


def _sqrt_scale(pi: PiInterval) -> int:
    return 10 ** (pi.digits + 2)


def certified_rhs_floor(n: Fraction | int, norm: Fraction, pi: PiInterval) -> Fraction:
    """A rational lower bound on 8 * norm / sqrt(pi * n)."""
    return 8 * norm / sqrt_upper(pi.hi * n, _sqrt_scale(pi))


def decay_verdict(n: int, lhs: Fraction, norm: Fraction, pi: PiInterval) -> tuple[Fraction, Verdict]:
    """Certify lhs <= 8/sqrt(pi n) * norm; ProvenHolds only when lhs <= the certified floor."""
    floor = certified_rhs_floor(n, norm, pi)
    if lhs <= floor:
        return floor, Verdict.PROVEN_HOLDS
    # lhs^2 * pi * n > 64 norm^2 refutes the inequality.
    if pi_times_greater_than(lhs * lhs * n, 64 * norm * norm, pi) is Verdict.PROVEN_STRICT:
        return floor, Verdict.PROVEN_FALSE
    return floor, Verdict.INCONCLUSIVE


def _check_samples(mu: JNMeasure, f_vals: SampledFunction, g_vals: SampledFunction) -> None:
    if f_vals.domain != "K" or g_vals.domain != "L" or f_vals.n != mu.n or g_vals.n != mu.n:
        raise DomainError(f"expected samples on K_{mu.n} and L_{mu.n}")


def tensor_bound(n: int, f_vals: SampledFunction, g_vals: SampledFunction, pi: PiInterval) -> DecayReport:
    mu = build_mu(n)
    _check_samples(mu, f_vals, g_vals)
    lhs = abs(eval_tensor(mu, f_vals.vector(), g_vals.vector()))
    norm = f_vals.sup_norm() * g_vals.sup_norm()
    floor, verdict = decay_verdict(n, lhs, norm, pi)
    return DecayReport(n=n, lhs=lhs, rhs_certified_floor=floor, verdict=verdict)


def recentered_norm(f: Sequence[Fraction], g: Sequence[Fraction]) -> Fraction:
    """min over c of max|f + c| + max|g - c|, evaluated at the breakpoints."""
    f_max, f_min, g_max, g_min = max(f), min(f), max(g), min(g)

    def cost(c: Fraction) -> Fraction:
        return max(f_max + c, -f_min - c) + max(g_max - c, -g_min + c)

    return min(cost(-(f_max + f_min) / 2), cost((g_max + g_min) / 2))


def grid_sum_norm(f: Sequence[Fraction], g: Sequence[Fraction]) -> Fraction:
    """max over the grid of |f(s) + g(j)|."""
    return max(max(f) + max(g), -(min(f) + min(g)))


def sum_bound(n: int, f_vals: SampledFunction, g_vals: SampledFunction, pi: PiInterval) -> DecayReport:
    mu = build_mu(n)
    _check_samples(mu, f_vals, g_vals)
    f, g = f_vals.vector(), g_vals.vector()
    ones_k = [Fraction(1)] * len(f)
    ones_l = [Fraction(1)] * len(g)
    lhs = abs(eval_tensor(mu, f, ones_l) + eval_tensor(mu, ones_k, g))
    proof_norm = f_vals.sup_norm() + g_vals.sup_norm()
    floor, verdict = decay_verdict(n, lhs, proof_norm, pi)

    grid_norm = grid_sum_norm(f, g)
    best = recentered_norm(f, g)
    if best != grid_norm:
        raise InvariantViolation(f"re-centering minimum {best} differs from grid norm {grid_norm}", claim="recentering")
    norm_floor, norm_verdict = decay_verdict(n, lhs, grid_norm, pi)
    return DecayReport(
        n=n,
        lhs=lhs,
        rhs_certified_floor=floor,
        verdict=verdict,
        extras={
            "grid_norm": grid_norm,
            "recentered_norm": best,
            "norm_rhs_floor": norm_floor,
            "norm_verdict": norm_verdict,
        },
    )


def trial_rng(seed: int, n: int, trial: int) -> np.random.Generator:
    """Independent stream per (seed, n, trial), so worker count never changes results."""
    return np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), n, trial]))


def random_rationals(rng: np.random.Generator, count: int, max_denominator: int = 64) -> list[Fraction]:
    """Rationals in [-1, 1] with denominators up to max_denominator."""
    denominators = rng.integers(1, max_denominator + 1, size=count)
    numerators = rng.integers(-denominators, denominators + 1)
    return [Fraction(int(p), int(q)) for p, q in zip(numerators.tolist(), denominators.tolist())]


def random_samples(seed: int, n: int, trial: int) -> tuple[SampledFunction, SampledFunction]:
    rng = trial_rng(seed, n, trial)
    f = SampledFunction.axis(n, "K", random_rationals(rng, 2**n))
    g = SampledFunction.axis(n, "L", random_rationals(rng, n))
    return f, g


BoundCheck = Callable[[int, SampledFunction, SampledFunction, PiInterval], DecayReport]


def _run_trial(check: BoundCheck, seed: int, n: int, trial: int, pi: PiInterval) -> DecayReport:
    f, g = random_samples(seed, n, trial)
    return check(n, f, g, pi)


def randomized_trials(
    kind: Literal["tensor", "sum"],
    n_values: Iterable[int],
    trials: int,
    seed: int,
    pi: PiInterval,
    jobs: int | None = None,
) -> list[DecayReport]:
    check: BoundCheck = tensor_bound if kind == "tensor" else sum_bound
    tasks = [(n, t) for n in n_values for t in range(trials)]
    for n in {n for n, _ in tasks}:
        check_size(n)
    jobs = settings.JOBS if jobs is None else jobs
    reports = Parallel(n_jobs=jobs)(delayed(_run_trial)(check, seed, n, t, pi) for n, t in tasks)
    logger.info("%s trials: %d reports (seed=%d)", kind, len(reports), seed)
    return list(reports)


def function_samples(f: ModelFunction, g: ModelFunction, n: int) -> tuple[SampledFunction, SampledFunction]:
    f_vals, _ = sample(f, "K", n)
    g_vals, _ = sample(g, "L", n)
    return f_vals, g_vals


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    value: Fraction
    bound_floor: Fraction
    verdict: Verdict


def _is_clopen_factor(f: ModelFunction) -> bool:
    return isinstance(f, IndicatorFunction) or f == CONSTANT_ONE


def _rectangle_for(f: ModelFunction, g: ModelFunction, n: int) -> IndexRectangle:
    f_vals, g_vals = function_samples(f, g, n)
    rows = [s for s in f_vals.keys() if f_vals.value(s) == 1]
    cols = [j for j in g_vals.keys() if g_vals.value(j) == 1]
    return IndexRectangle.of(rows, cols)


def convergence_table(
    f: ModelFunction,
    g: ModelFunction,
    n_range: Iterable[int],
    pi: PiInterval,
    combine_kind: Literal["tensor", "sum"] = "tensor",
) -> list[ConvergenceRow]:
    """mu_n(f (x) g) or mu_n(f (+) g) for each n, with the decay envelope it must respect."""
    rows: list[ConvergenceRow] = []
    for n in n_range:
        mu = build_mu(n)
        f_vals, g_vals = function_samples(f, g, n)
        if combine_kind == "tensor":
            value = eval_tensor(mu, f_vals.vector(), g_vals.vector())
            norm = f_vals.sup_norm() * g_vals.sup_norm()
        else:
            value = eval_tensor(mu, f_vals.vector(), [Fraction(1)] * n) + eval_tensor(
                mu, [Fraction(1)] * 2**n, g_vals.vector()
            )
            norm = grid_sum_norm(f_vals.vector(), g_vals.vector())
        floor, verdict = decay_verdict(n, abs(value), norm, pi)
        if combine_kind == "tensor" and _is_clopen_factor(f) and _is_clopen_factor(g):
            rect_value = eval_rectangle(mu, _rectangle_for(f, g, n))
            if rect_value != value:
                raise InvariantViolation("indicator pairing differs from the rectangle measure", claim="rectangle")
            within = abs(value) <= sup_closed(n)
            envelope = check_bound4(n, pi).upper_ok
            if not within:
                verdict = Verdict.PROVEN_FALSE
            else:
                verdict = envelope if envelope is not Verdict.PROVEN_STRICT else Verdict.PROVEN_HOLDS
        rows.append(ConvergenceRow(n=n, value=value, bound_floor=floor, verdict=verdict))
    return rows


@dataclass(frozen=True)
class PartialSumReport:
    subseq: tuple[int, ...]
    partial_sum: Fraction
    bound_floor: Fraction
    verdict: Verdict
    terms: tuple[Fraction, ...]


def _increasing_subseq(subseq: Sequence[int]) -> list[int]:
    entries = list(subseq)
    if any(b <= a for a, b in zip(entries, entries[1:])):
        raise DomainError("subsequence must be strictly increasing")
    for s in entries:
        check_size(s, what="strongly_normal_partial")
    return entries


def _partial_sum_report(entries: list[int], terms: list[Fraction], floor: Fraction) -> PartialSumReport:
    partial = sum(terms, Fraction(0))
    verdict = Verdict.PROVEN_HOLDS if partial <= floor else Verdict.INCONCLUSIVE
    return PartialSumReport(
        subseq=tuple(entries), partial_sum=partial, bound_floor=floor, verdict=verdict, terms=tuple(terms)
    )


def strongly_normal_partial(
    subseq: Sequence[int],
    f: ModelFunction,
    g: ModelFunction,
    pi: PiInterval,
) -> PartialSumReport:
    """sum |mu_s(f (x) g)| against (8/sqrt(pi)) * sum s^(-1/2) max|f| max|g|."""
    entries = _increasing_subseq(subseq)
    terms: list[Fraction] = []
    floor = Fraction(0)
    for s in entries:
        mu = build_mu(s)
        f_vals, g_vals = function_samples(f, g, s)
        terms.append(abs(eval_tensor(mu, f_vals.vector(), g_vals.vector())))
        floor += certified_rhs_floor(s, f_vals.sup_norm() * g_vals.sup_norm(), pi)
    return _partial_sum_report(entries, terms, floor)


def random_partial_sum(
    seed: int,
    subseq: Sequence[int],
    trial: int,
    pi: PiInterval,
    denominator: int = 64,
) -> PartialSumReport:
    """strongly_normal_partial for random f, g with values in (1/denominator)Z inside [-1, 1] on every block."""
    entries = _increasing_subseq(subseq)
    rng = trial_rng(seed, max(entries, default=0), trial)
    unit = Fraction(1, denominator * denominator)
    terms: list[Fraction] = []
    floor = Fraction(0)
    for s in entries:
        f_ints = rng.integers(-denominator, denominator + 1, size=2**s)
        g_ints = rng.integers(-denominator, denominator + 1, size=s)
        mu = build_mu(s)
        terms.append(abs(tensor_sum(mu, f_ints, g_ints)) * unit * mu.scale)
        norm = int(np.abs(f_ints).max()) * int(np.abs(g_ints).max()) * unit
        floor += certified_rhs_floor(s, norm, pi)
    return _partial_sum_report(entries, terms, floor)


# ---------------------------------------------------------------------------
# Generalized sizes: |K_n'| = a_n, |L_n'| = b_n with a_n, b_n -> infinity.
# ---------------------------------------------------------------------------


def stage_thresholds(sizes: Sequence[tuple[int, int]]) -> list[int]:
    """phi_1 < phi_2 < ...: least index from which a >= 2^m and b >= m for the rest of the prefix."""
    thresholds: list[int] = []
    m = 1
    while True:
        raw = None
        for index in range(len(sizes), 0, -1):
            a, b = sizes[index - 1]
            if a >= 2**m and b >= m:
                raw = index
            else:
                break
        if raw is None:
            return thresholds
        phi = raw if not thresholds else max(raw, thresholds[-1] + 1)
        if phi > len(sizes):
            return thresholds
        thresholds.append(phi)
        m += 1


@dataclass(frozen=True, eq=False)
class GeneralizedMeasure:
    """mu_n on an a_n x b_n grid: a Dirac before the first stage, else mu_m on a 2^m x m corner."""

    n: int
    stage: int
    a: int
    b: int
    block: JNMeasure | None

    @property
    def kind(self) -> str:
        return "dirac" if self.block is None else "block"

    def total_variation(self) -> Fraction:
        return Fraction(1) if self.block is None else self.block.total_variation()

    def support(self) -> tuple[int, int]:
        """Rows and columns of the support inside the a_n x b_n grid."""
        if self.block is None:
            return 1, 1
        return 2**self.stage, self.stage

    def eval_rectangle(self, rect: IndexRectangle) -> Fraction:
        bad = [s for s in rect.rows if not 0 <= s < self.a] + [j for j in rect.cols if not 0 <= j < self.b]
        if bad:
            raise DomainError(f"rectangle leaves the {self.a} x {self.b} grid")
        if self.block is None:
            return Fraction(1) if 0 in rect.rows and 0 in rect.cols else Fraction(0)
        inner = IndexRectangle.of(
            (s for s in rect.rows if s < 2**self.stage), (j for j in rect.cols if j < self.stage)
        )
        return eval_rectangle(self.block, inner)

    def envelope_verdict(self, value: Fraction, pi: PiInterval) -> Verdict:
        """|value| < (2/sqrt(pi)) m^(-1/2), i.e. value^2 m pi < 4."""
        if self.block is None:
            return Verdict.PROVEN_STRICT if abs(value) <= 1 else Verdict.PROVEN_FALSE
        return pi_times_less_than(value * value * self.stage, Fraction(4), pi)


def generalized_sequence(sizes: Sequence[tuple[int, int]], n: int) -> GeneralizedMeasure:
    if not 1 <= n <= len(sizes):
        raise InsufficientDataError(f"index {n} lies outside the size prefix of length {len(sizes)}")
    thresholds = stage_thresholds(sizes)
    stage = sum(1 for phi in thresholds if phi <= n)
    a, b = sizes[n - 1]
    if a < 1 or b < 1:
        raise DomainError(f"sizes must be positive, got ({a}, {b}) at index {n}")
    block = build_mu(stage) if stage else None
    return GeneralizedMeasure(n=n, stage=stage, a=a, b=b, block=block)


def envelope_rectangles(measure: GeneralizedMeasure, rng: np.random.Generator, count: int) -> list[IndexRectangle]:
    """The majority witness plus random rectangles inside the support corner."""
    rows, cols = measure.support()
    rects: list[IndexRectangle] = []
    if measure.block is not None:
        rects.append(witness_majority(measure.stage).rect)
    else:
        rects.append(IndexRectangle.of([0], [0]))
    for _ in range(count):
        row_mask = rng.integers(0, 2, size=rows).astype(bool)
        col_mask = rng.integers(0, 2, size=cols).astype(bool)
        rects.append(IndexRectangle.of(np.flatnonzero(row_mask).tolist(), np.flatnonzero(col_mask).tolist()))
    return rects


def parse_sizes(spec: str, length: int) -> list[tuple[int, int]]:
    """`linear` (a_n = b_n = n), `dyadic` (2^n, n) or `pairs:4x2,8x3,...`."""
    text = spec.strip().lower()
    if text == "linear":
        return [(n, n) for n in range(1, length + 1)]
    if text == "dyadic":
        return [(2**n, n) for n in range(1, length + 1)]
    if text.startswith("pairs:"):
        pairs = []
        for item in text[len("pairs:"):].split(","):
            a, _, b = item.partition("x")
            try:
                pairs.append((int(a), int(b)))
            except ValueError as exc:
                raise DomainError(f"bad size pair {item!r}") from exc
        return pairs
    raise DomainError(f"unknown sizes spec {spec!r}; use linear, dyadic or pairs:AxB,...")
