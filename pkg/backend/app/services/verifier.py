"""
Claim suites behind the CLI commands.

Each ClaimVerifier method runs one cluster of checks and returns a
SuiteResult: a summary dict, optional table rows, and the merged verdict.
Nothing here writes output; rendering lives in app.cli.reports.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Literal, Sequence

from joblib import Parallel, delayed

from ..core.config import settings
from ..core.errors import InvariantViolation
from .analysis import (
    convergence_table,
    envelope_rectangles,
    function_samples,
    generalized_sequence,
    parse_sizes,
    random_partial_sum,
    randomized_trials,
    stage_thresholds,
    strongly_normal_partial,
    sum_bound,
    tensor_bound,
    trial_rng,
)
from .complemented import (
    build_bumps,
    certify_disjointness,
    check_idempotence,
    check_st,
    complemented_definition,
    orthogonality_matrix,
    positive_support,
    random_c0_vector,
    random_tabulated,
)
from .exactmath import (
    PiInterval,
    Verdict,
    binom,
    central_binom_bound_check,
    central_binomials,
    closed_values,
    combine,
    decimal_text,
    fraction_text,
    inverse_sqrt_pi_text,
    pascal_rows,
    pi_interval,
    s_identity,
    upper_half_binomial_closed,
    wallis,
    wallis_lower_product,
    wallis_range,
    wallis_sequence,
)
from .measures import (
    JNMeasure,
    SignMatrix,
    build_mu,
    build_sign_matrix,
    check_size,
    measure_from_matrix,
    measure_of_atoms,
    rectangle_to_json,
)
from .rectopt import (
    bound4_table,
    brute_sup,
    check_fixed_b_sandwich,
    optimal_A,
    oracle_sup,
    sup_closed,
    sup_fixed_b,
    witness_majority,
)
from .spaces import ModelFunction, parse_test_function

logger = logging.getLogger(__name__)

# Largest n whose witness rows are written out in full.
WITNESS_DETAIL_MAX = 10


@dataclass
class SuiteResult:
    command: str
    verdict: Verdict
    results: dict[str, Any]
    rows: list[dict[str, Any]] = field(default_factory=list)


def _holds(ok: bool) -> Verdict:
    return Verdict.PROVEN_HOLDS if ok else Verdict.PROVEN_FALSE


def _strict(ok: bool) -> Verdict:
    return Verdict.PROVEN_STRICT if ok else Verdict.PROVEN_FALSE


def _verdict_counts(verdicts: Iterable[Verdict]) -> dict[str, int]:
    counts = {v.value: 0 for v in Verdict}
    for v in verdicts:
        counts[v.value] += 1
    return counts


def inject_fault(matrix: SignMatrix) -> SignMatrix:
    """Flip entry (0, 0); the column sums stop vanishing, so the mass is nonzero."""
    entries = matrix.entries.copy()
    entries[0, 0] = -entries[0, 0]
    return SignMatrix.unchecked(matrix.n, entries)


def _strongly_normal_trial(seed: int, subseq: tuple[int, ...], trial: int, pi: PiInterval) -> tuple[Fraction, Fraction, Verdict]:
    report = random_partial_sum(seed, subseq, trial, pi)
    return report.partial_sum, report.bound_floor, report.verdict


class ClaimVerifier:
    def __init__(self, digits: int | None = None, seed: int = 0, jobs: int | None = None):
        self.pi = pi_interval(settings.DEFAULT_DIGITS if digits is None else digits)
        self.seed = seed
        self.jobs = settings.JOBS if jobs is None else jobs

    # -- construction --------------------------------------------------------

    def construct(self, n_values: Sequence[int], fault: bool = False) -> SuiteResult:
        rows: list[dict[str, Any]] = []
        measures: list[dict[str, Any]] = []
        verdicts: list[Verdict] = []
        for n in n_values:
            matrix = build_sign_matrix(n)
            if fault:
                matrix = inject_fault(matrix)
            problems = matrix.invariant_problems()
            mu = JNMeasure(n=n, matrix=matrix, scale=Fraction(1, n * 2**n))
            positive = measure_of_atoms(mu, positive_support(n)) if n <= WITNESS_DETAIL_MAX else None
            if positive is None:
                positive = int((matrix.entries > 0).sum()) * mu.scale
            try:
                measure_from_matrix(matrix)
                ok = not problems and positive == Fraction(1, 2) and mu.support_size == n * 2**n
            except InvariantViolation as exc:
                logger.warning("construct n=%d: %s", n, exc)
                problems.append(str(exc))
                ok = False
            verdicts.append(_holds(ok))
            rows.append(
                {
                    "n": n,
                    "support_size": mu.support_size,
                    "total_variation": fraction_text(mu.total_variation()),
                    "total_mass": fraction_text(mu.total_mass()),
                    "positive_part": fraction_text(positive),
                    "problems": "; ".join(problems),
                }
            )
            if ok and n <= WITNESS_DETAIL_MAX:
                measures.append(rectangle_to_json(mu, witness_majority(n).rect))
            else:
                measures.append(mu.to_json())
        return SuiteResult("construct", combine(*verdicts), {"measures": measures, "checked": len(rows)}, rows)

    # -- rectangle suprema ---------------------------------------------------

    def fixed_b(self, n: int) -> tuple[Verdict, int]:
        """optimal_A against every nonempty B, compared with the fixed-|B| closed form and sandwich."""
        mu = build_mu(n)
        verdicts = []
        for mask in range(1, 2**n):
            cols = [j for j in range(n) if mask >> j & 1]
            value = optimal_A(mu, cols).value
            expected = sup_fixed_b(n, len(cols))
            verdicts.append(_strict(value == expected))
            verdicts.append(check_fixed_b_sandwich(n, len(cols), value, self.pi))
        return combine(*verdicts), 2**n - 1

    def sup(self, n: int, oracle: Literal["b", "full"] | None = None, witness: bool = False) -> SuiteResult:
        check_size(n, what="sup")
        closed = sup_closed(n)
        row: dict[str, Any] = {"n": n, "sup_closed": fraction_text(closed), "decimal": decimal_text(closed)}
        results: dict[str, Any] = dict(row)
        verdicts = [Verdict.PROVEN_STRICT]
        if oracle == "b":
            found = oracle_sup(n, self.jobs)
            results["oracle"] = found.to_json()
            row["oracle_value"] = fraction_text(found.value)
            verdicts.append(_strict(found.value == closed))
            if n <= 8:
                fixed, count = self.fixed_b(n)
                results["fixed_b"] = {"column_sets": count, "verdict": fixed.value}
                verdicts.append(fixed)
        elif oracle == "full":
            value = brute_sup(n, self.jobs)
            results["brute_value"] = row["brute_value"] = fraction_text(value)
            verdicts.append(_strict(value == closed))
        if witness:
            found = witness_majority(n)
            if n <= WITNESS_DETAIL_MAX:
                results["witness"] = found.to_json()
            else:
                results["witness"] = {"row_count": len(found.rect.rows), "value": fraction_text(found.value)}
            row["witness_value"] = fraction_text(found.value)
            verdicts.append(_strict(found.value == closed))
        return SuiteResult("sup", combine(*verdicts), results, [row])

    def bounds(self, n_max: int) -> SuiteResult:
        rows = []
        verdicts = []
        for bound in bound4_table(n_max, self.pi):
            rows.append(
                {
                    "n": bound.n,
                    "sup_closed": fraction_text(bound.value),
                    "decimal": decimal_text(bound.value),
                    "lower_bound": inverse_sqrt_pi_text(Fraction(1, 2), bound.n),
                    "upper_bound": inverse_sqrt_pi_text(2, bound.n),
                    "lower_verdict": bound.lower_ok.value,
                    "upper_verdict": bound.upper_ok.value,
                }
            )
            verdicts.append(bound.verdict)
        results = {"n_max": n_max, "digits": self.pi.digits, "verdicts": _verdict_counts(verdicts)}
        return SuiteResult("bounds", combine(*verdicts), results, rows)

    # -- identities ----------------------------------------------------------

    def identities(self, k_max: int, m_max: int, pascal_max: int = 200) -> SuiteResult:
        checks: dict[str, Verdict] = {}

        checks["s_identity"] = _strict(all(identity.sum_value == identity.closed_value for identity in map(s_identity, range(1, k_max + 1))))

        previous = None
        monotone = True
        for k, closed in closed_values(k_max):
            # g(k) = closed/2^k nondecreasing: 2 * closed(k) <= closed(k + 1).
            if previous is not None and 2 * previous > closed:
                monotone = False
                logger.warning("g decreases at k=%d", k)
            previous = closed
        checks["g_monotone"] = _strict(monotone)

        pascal_ok = absorption_ok = half_sum_ok = True
        previous_row: list[int] | None = None
        for k, row in pascal_rows(min(pascal_max, k_max)):
            if k <= 64:
                pascal_ok = pascal_ok and row == [binom(k, i) for i in range(k + 1)]
            if previous_row is not None:
                # i C(k, i) = k C(k-1, i-1)
                absorption_ok = absorption_ok and all(i * row[i] == k * previous_row[i - 1] for i in range(1, k + 1))
            if k >= 1:
                half = sum(row[(k + 1) // 2 :])
                half_sum_ok = half_sum_ok and half == upper_half_binomial_closed(k)
            previous_row = row
        checks["pascal"] = _strict(pascal_ok)
        checks["absorption"] = _strict(absorption_ok)
        checks["half_sum"] = _strict(half_sum_ok)

        product_max = min(m_max, 50)
        product_ok = all(
            wallis(m) == pair and wallis_lower_product(m) == pair.lower_seq
            for m, pair in wallis_sequence(product_max)
        )
        checks["wallis_products"] = _strict(product_ok)
        summary = wallis_range(m_max, self.pi)
        checks["wallis_range"] = summary.verdict

        central = [central_binom_bound_check(m, self.pi, central=c) for m, c in central_binomials(m_max)]
        checks["central_binomial"] = combine(*central)

        results = {
            "k_max": k_max,
            "m_max": m_max,
            "checks": {name: v.value for name, v in checks.items()},
            "wallis": {
                "monotone": summary.monotone,
                "bracketed": summary.bracketed,
                "within_tolerance": summary.upper_gap_ok and summary.lower_gap_ok,
                "first_failure": summary.first_failure,
            },
            "central_binomial": _verdict_counts(central),
        }
        rows = [{"check": name, "verdict": v.value} for name, v in checks.items()]
        return SuiteResult("verify-identities", combine(*checks.values()), results, rows)

    # -- decay bounds --------------------------------------------------------

    def decay(
        self,
        kind: Literal["tensor", "sum"],
        n_values: Sequence[int],
        trials: int,
        f: ModelFunction | None = None,
        g: ModelFunction | None = None,
    ) -> SuiteResult:
        command = f"{kind}-test"
        if f is not None and g is not None:
            check = tensor_bound if kind == "tensor" else sum_bound
            reports = []
            for n in n_values:
                check_size(n, what=command)
                f_vals, g_vals = function_samples(f, g, n)
                reports.append(check(n, f_vals, g_vals, self.pi))
            seeds: list[int | None] = [None] * len(reports)
        else:
            reports = randomized_trials(kind, n_values, trials, self.seed, self.pi, self.jobs)
            seeds = [self.seed] * len(reports)
        rows = []
        verdicts = []
        for seed, report in zip(seeds, reports):
            row = report.to_row(seed)
            verdicts.append(report.verdict)
            if kind == "sum":
                norm_verdict = report.extras["norm_verdict"]
                row["grid_norm"] = fraction_text(report.extras["grid_norm"])
                row["norm_verdict"] = norm_verdict.value
                verdicts.append(norm_verdict)
            rows.append(row)
        results = {"trials": len(reports), "digits": self.pi.digits, "verdicts": _verdict_counts(verdicts)}
        return SuiteResult(command, combine(*verdicts), results, rows)

    def converge(
        self,
        f: ModelFunction,
        g: ModelFunction,
        n_values: Sequence[int],
        combine_kind: Literal["tensor", "sum"] = "tensor",
    ) -> SuiteResult:
        for n in n_values:
            check_size(n, what="converge")
        table = convergence_table(f, g, n_values, self.pi, combine_kind)
        rows = [
            {
                "n": row.n,
                "value_exact": fraction_text(row.value),
                "value_decimal": decimal_text(row.value),
                "bound_decimal": decimal_text(row.bound_floor),
                "bound_floor": fraction_text(row.bound_floor),
                "verdict": row.verdict.value,
            }
            for row in table
        ]
        results = {"fn": f.spec, "gn": g.spec, "combine": combine_kind, "points": len(rows)}
        return SuiteResult("converge", combine(*(row.verdict for row in table)), results, rows)

    def strongly_normal(
        self,
        subseq: Sequence[int],
        trials: int,
        f: ModelFunction | None = None,
        g: ModelFunction | None = None,
    ) -> SuiteResult:
        subseq = tuple(subseq)
        for s in subseq:
            check_size(s, what="strongly-normal")
        if f is not None and g is not None:
            report = strongly_normal_partial(subseq, f, g, self.pi)
            outcomes = [(report.partial_sum, report.bound_floor, report.verdict)]
        else:
            outcomes = Parallel(n_jobs=self.jobs)(
                delayed(_strongly_normal_trial)(self.seed, subseq, t, self.pi) for t in range(trials)
            )
        rows = [
            {
                "trial": t,
                "partial_sum": fraction_text(partial),
                "bound_floor": fraction_text(floor),
                "partial_decimal": decimal_text(partial),
                "bound_decimal": decimal_text(floor),
                "verdict": verdict.value,
            }
            for t, (partial, floor, verdict) in enumerate(outcomes)
        ]
        verdicts = [verdict for _, _, verdict in outcomes]
        results = {
            "subseq": list(subseq),
            "envelope": inverse_sqrt_pi_text(8, 1) + " * sum s^(-1/2) * max|f| * max|g|",
            "verdicts": _verdict_counts(verdicts),
        }
        return SuiteResult("strongly-normal", combine(*verdicts), results, rows)

    def generalized(self, sizes_spec: str, n_max: int, rectangles: int = 8) -> SuiteResult:
        sizes = parse_sizes(sizes_spec, n_max)
        dyadic = sizes_spec.strip().lower() == "dyadic"
        stages = stage_thresholds(sizes)
        if stages:
            check_size(len(stages), what="generalized stage")
        rows = []
        verdicts = []
        for n in range(1, len(sizes) + 1):
            measure = generalized_sequence(sizes, n)
            rng = trial_rng(self.seed, n, 0)
            values = [measure.eval_rectangle(rect) for rect in envelope_rectangles(measure, rng, rectangles)]
            rows_used, cols_used = measure.support()
            inside = rows_used <= measure.a and cols_used <= measure.b
            norm_ok = measure.total_variation() == 1
            envelope = combine(*(measure.envelope_verdict(v, self.pi) for v in values))
            checks = [_strict(inside and norm_ok), envelope]
            if dyadic:
                checks.append(_strict(measure.stage == n))
            verdict = combine(*checks)
            verdicts.append(verdict)
            rows.append(
                {
                    "n": n,
                    "a": measure.a,
                    "b": measure.b,
                    "stage": measure.stage,
                    "kind": measure.kind,
                    "total_variation": fraction_text(measure.total_variation()),
                    "max_rectangle": fraction_text(max(abs(v) for v in values)),
                    "verdict": verdict.value,
                }
            )
        results = {"sizes": sizes_spec, "length": len(sizes), "verdicts": _verdict_counts(verdicts)}
        return SuiteResult("generalized", combine(*verdicts), results, rows)

    # -- complemented c0 -----------------------------------------------------

    def complemented(self, n_max: int, vectors: int = 100, functions: int = 20, function_n_max: int = 6) -> SuiteResult:
        family = build_bumps(n_max)
        indices = range(1, n_max + 1)
        matrix = orthogonality_matrix(family)
        half_identity = [[Fraction(1, 2) if i == k else Fraction(0) for k in indices] for i in indices]
        signed_matrix = orthogonality_matrix(family, signed=True)
        identity = [[Fraction(1) if i == k else Fraction(0) for k in indices] for i in indices]

        rng = trial_rng(self.seed, n_max, 0)
        st_failures = [
            i for i in range(vectors) if check_st(family, random_c0_vector(rng, indices), indices)
        ]
        function_range = range(1, min(n_max, function_n_max) + 1)
        idempotence = [check_idempotence(family, random_tabulated(rng, function_range), function_range) for _ in range(functions)]
        idempotence_failures = [i for i, (mismatches, _) in enumerate(idempotence) if mismatches]

        disjointness = certify_disjointness(family)
        phi_definition = complemented_definition(family)
        psi_definition = complemented_definition(family, signed=True)

        checks = {
            "orthogonality": _strict(matrix == half_identity),
            "st_identity": _strict(not st_failures),
            "idempotence": _strict(not idempotence_failures),
            "disjointness": _strict(disjointness.disjoint),
            "definition": _strict(phi_definition.satisfied),
            "sign_bump_pairing": _strict(signed_matrix == identity),
        }
        results = {
            "n_max": n_max,
            "orthogonality_matrix": [[fraction_text(v) for v in row] for row in matrix],
            "t": {str(n): fraction_text(family.t(n)) for n in indices},
            "st": {"vectors": vectors, "failures": st_failures},
            "idempotence": {
                "functions": functions,
                "n_range": [function_range.start, function_range.stop - 1],
                "atoms_checked": sum(checked for _, checked in idempotence),
                "failures": idempotence_failures,
            },
            "disjointness": {
                "disjoint": disjointness.disjoint,
                "min_gap_k": fraction_text(disjointness.min_gap_k),
                "min_gap_l": fraction_text(disjointness.min_gap_l),
                "intervals": disjointness.intervals_checked,
            },
            "sign_bumps": {
                "non_negative": psi_definition.non_negative,
                "orthogonal": psi_definition.orthogonal,
                "diagonal_inf": fraction_text(psi_definition.diagonal_inf),
                "note": "psi_n takes the value -1 around negative atoms; range is [-1, 1], not [0, 1]",
            },
            "checks": {name: v.value for name, v in checks.items()},
        }
        rows = [{"check": name, "verdict": v.value} for name, v in checks.items()]
        return SuiteResult("complemented", combine(*checks.values()), results, rows)

    # -- everything at small n -----------------------------------------------

    def selftest(self, fault: bool = False) -> SuiteResult:
        one = parse_test_function("pow:1")
        indicator = parse_test_function("indicator:1/3")
        suites = [
            self.construct(range(1, 7), fault=fault),
            self.sup(4, oracle="full", witness=True),
            self.sup(8, oracle="b", witness=True),
            self.bounds(200),
            self.identities(200, 300),
            self.decay("tensor", range(1, 7), 20),
            self.decay("sum", range(1, 7), 20),
            self.converge(one, one, range(1, 9)),
            self.converge(indicator, indicator, range(1, 9)),
            self.strongly_normal((1, 4, 9), 10),
            self.generalized("linear", 30),
            self.generalized("dyadic", 8),
            self.complemented(5, vectors=20, functions=5, function_n_max=4),
        ]
        rows = [{"suite": s.command, "verdict": s.verdict.value} for s in suites]
        results = {"suites": rows, "seed": self.seed}
        return SuiteResult("selftest", combine(*(s.verdict for s in suites)), results, rows)

