"""Lazy n-fold box systems and convex partitions of them.

A system is a conditional distribution P(x, y | u, v) over n-bit output
strings and length-n setting vectors, exposed only through ``evaluate``
-- the full table has (4N^2)^n entries, so nothing is materialized here.
Verifiers materialize what they enumerate, under an evaluation cap.

``ProductSystem`` multiplies independent single-pair boxes.
``AttackedSystem`` is one part of the adversary's decomposition: it
swaps in a biased box at the pivotal position of each output string x,
where the position and bias direction are functions of the preceding
bits only (that prefix property is exactly what keeps the part
time-ordered non-signalling).
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import TYPE_CHECKING, Sequence

from ._coding import bits_to_int, int_to_bits, int_to_digits
from .boxes import FLOAT_ATOL, Prob, SinglePairBox
from .nonsignalling import (
    DEFAULT_EVAL_CAP,
    InfeasibleSizeError,
    JointTable,
    NsReport,
    check_ab,
    check_time_ordered,
    materialize,
)

if TYPE_CHECKING:  # pragma: no cover
    from .adversary import PivotalProfile


class SystemEvaluator(ABC):
    """An n-pair system P(x, y | u, v), evaluated point by point.

    ``x`` and ``y`` are n-bit tuples; ``u`` and ``v`` are n-tuples of
    setting indices in {0..N-1}.  Implementations must be pure and, for
    every fixed (u, v), nonnegative and normalized over (x, y).
    """

    n: int
    n_settings: int

    @abstractmethod
    def evaluate(self, x: Sequence[int], y: Sequence[int],
                 u: Sequence[int], v: Sequence[int]) -> Prob:
        """P(x, y | u, v)."""

    def _check_point(self, x, y, u, v) -> None:
        if not (len(x) == len(y) == len(u) == len(v) == self.n):
            raise ValueError(
                f"expected four length-{self.n} vectors, got lengths "
                f"{len(x)}, {len(y)}, {len(u)}, {len(v)}"
            )
        N = self.n_settings
        for s in u:
            if s < 0 or s >= N:
                raise ValueError(f"Alice setting {s} out of range for N={N}")
        for s in v:
            if s < 0 or s >= N:
                raise ValueError(f"Bob setting {s} out of range for N={N}")
        for b in x:
            if b not in (0, 1):
                raise ValueError(f"outcome vectors must hold bits, got {b}")
        for b in y:
            if b not in (0, 1):
                raise ValueError(f"outcome vectors must hold bits, got {b}")


@dataclass(frozen=True)
class ProductSystem(SystemEvaluator):
    """Independent boxes: P(x, y | u, v) = prod_j box_j(x_j, y_j | u_j, v_j)."""

    boxes: tuple[SinglePairBox, ...]

    def __post_init__(self) -> None:
        if not self.boxes:
            raise ValueError("need at least one box")
        if len({b.n_settings for b in self.boxes}) != 1:
            raise ValueError("all boxes must share the same number of settings")

    @property
    def n(self) -> int:
        return len(self.boxes)

    @property
    def n_settings(self) -> int:
        return self.boxes[0].n_settings

    @cached_property
    def _numden_tables(self) -> tuple | None:
        tables = tuple(box._numden for box in self.boxes)
        return tables if all(t is not None for t in tables) else None

    def evaluate(self, x, y, u, v) -> Prob:
        self._check_point(x, y, u, v)
        N = self.n_settings
        tables = self._numden_tables
        if tables is not None:
            num = den = 1
            for j, t in enumerate(tables):
                cn, cd = t[((u[j] * N + v[j]) * 2 + x[j]) * 2 + y[j]]
                num *= cn
                den *= cd
            return Fraction(num, den)
        val: Prob = 1
        for j, box in enumerate(self.boxes):
            val *= box.cells[((u[j] * N + v[j]) * 2 + x[j]) * 2 + y[j]]
        return val


def build_product_system(box: SinglePairBox, n: int) -> ProductSystem:
    """n independent copies of one box."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return ProductSystem((box,) * n)


@dataclass(frozen=True)
class AttackedSystem(SystemEvaluator):
    """One part of the adversary's two-part decomposition.

    For output string x with pivotal position i and direction sigma
    (both functions of x_1..x_{i-1} via ``profile``), the i-th pair uses
    the box biased towards sigma when z = 0 and towards 1 - sigma when
    z = 1; all other pairs use the unbiased base box.
    """

    base: SinglePairBox
    biased: tuple[SinglePairBox, SinglePairBox]  # indexed by bias direction
    profile: "PivotalProfile"
    z: int

    def __post_init__(self) -> None:
        if self.z not in (0, 1):
            raise ValueError(f"z must be a bit, got {self.z}")
        boxes = (self.base,) + self.biased
        if len({b.n_settings for b in boxes}) != 1:
            raise ValueError("base and biased boxes must share n_settings")

    @property
    def n(self) -> int:
        return self.profile.n

    @property
    def n_settings(self) -> int:
        return self.base.n_settings

    def pivot(self, x: Sequence[int]) -> tuple[int, int]:
        """(pivotal index, effective bias direction) for output string x."""
        index, sigma = self.profile.pivot(bits_to_int(x))
        return index, sigma ^ self.z

    @cached_property
    def _numden_tables(self) -> tuple | None:
        tables = (self.base._numden, self.biased[0]._numden, self.biased[1]._numden)
        return tables if all(t is not None for t in tables) else None

    def evaluate(self, x, y, u, v) -> Prob:
        self._check_point(x, y, u, v)
        index, direction = self.pivot(x)
        N = self.n_settings
        tables = self._numden_tables
        if tables is not None:
            base_t, *biased_t = tables
            num = den = 1
            for j in range(self.n):
                t = biased_t[direction] if j == index - 1 else base_t
                cn, cd = t[((u[j] * N + v[j]) * 2 + x[j]) * 2 + y[j]]
                num *= cn
                den *= cd
            return Fraction(num, den)
        val: Prob = 1
        for j in range(self.n):
            box = self.biased[direction] if j == index - 1 else self.base
            val *= box.cells[((u[j] * N + v[j]) * 2 + x[j]) * 2 + y[j]]
        return val

    def x_marginal(self, x: Sequence[int]) -> Prob:
        """P(x) -- setting-independent because every box's Alice marginal is."""
        index, direction = self.pivot(x)
        val: Prob = 1
        for j in range(self.n):
            box = self.biased[direction] if j == index - 1 else self.base
            val *= box.alice_marginal(0, 0, x[j])
        return val


def alice_output_distribution(system: SystemEvaluator,
                              u: Sequence[int] | None = None,
                              v: Sequence[int] | None = None) -> dict[tuple[int, ...], Prob]:
    """Alice's output distribution sum_y P(x, y | u, v) for each x.

    Settings default to all-zeros; for the systems built here the result
    is independent of (u, v).
    """
    n = system.n
    if u is None:
        u = (0,) * n
    if v is None:
        v = (0,) * n
    out = {}
    for x in product((0, 1), repeat=n):
        total: Prob = 0
        for y in product((0, 1), repeat=n):
            total += system.evaluate(x, y, u, v)
        out[x] = total
    return out


def flip_pivotal_bit(system: AttackedSystem, x: Sequence[int]) -> tuple[int, ...]:
    """x with its pivotal bit flipped; pairs that cancel in normalization."""
    index, _ = system.pivot(x)
    flipped = list(x)
    flipped[index - 1] ^= 1
    return tuple(flipped)


@dataclass(frozen=True)
class Partition:
    """The adversary's strategy: weighted systems averaging to the base."""

    parts: tuple[tuple[Prob, SystemEvaluator], ...]

    def __post_init__(self) -> None:
        if not self.parts:
            raise ValueError("partition needs at least one part")

    @property
    def weights(self) -> tuple[Prob, ...]:
        return tuple(w for w, _ in self.parts)

    @property
    def systems(self) -> tuple[SystemEvaluator, ...]:
        return tuple(s for _, s in self.parts)


@dataclass
class PartConstraintReport:
    nonnegative: bool
    normalized: bool
    ns_report: NsReport | None

    @property
    def passed(self) -> bool:
        return (
            self.nonnegative
            and self.normalized
            and (self.ns_report is None or self.ns_report.passed)
        )


@dataclass
class PartitionReport:
    """Outcome of the three partition legality checks: the weights form a
    distribution, every part is a valid system fulfilling the constraint
    set, and the weighted parts average to the base pointwise."""

    weights_ok: bool
    weight_sum: Prob
    part_reports: list[PartConstraintReport]
    convex_ok: bool
    convex_mismatches: list[tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...],
                                  tuple[int, ...], Prob, Prob]]
    convex_mismatch_total: int
    checks_performed: int

    @property
    def passed(self) -> bool:
        return self.weights_ok and self.convex_ok and all(
            p.passed for p in self.part_reports
        )

    def __str__(self) -> str:
        lines = [
            f"weights: {'ok' if self.weights_ok else 'FAIL'} (sum {self.weight_sum})",
        ]
        for i, part in enumerate(self.part_reports):
            ns = "skipped" if part.ns_report is None else str(part.ns_report)
            lines.append(
                f"part {i}: nonnegative={'ok' if part.nonnegative else 'FAIL'} "
                f"normalized={'ok' if part.normalized else 'FAIL'} ns={ns}"
            )
        lines.append(
            f"convex combination: {'ok' if self.convex_ok else 'FAIL'} "
            f"({self.convex_mismatch_total} mismatches)"
        )
        lines.append(f"overall: {'pass' if self.passed else 'FAIL'} "
                     f"[{self.checks_performed} checks]")
        return "\n".join(lines)


def _decode_point(table: JointTable, index: int):
    n, N = table.n, table.n_settings
    X = 2**n
    index, y = divmod(index, X)
    index, x = divmod(index, X)
    u, v = divmod(index, N**n)
    return (int_to_bits(x, n), int_to_bits(y, n),
            int_to_digits(u, n, N), int_to_digits(v, n, N))


def verify_partition(partition: Partition, base: SystemEvaluator, *,
                     constraint: str = "time-ordered",
                     max_evals: int = DEFAULT_EVAL_CAP) -> PartitionReport:
    """Exhaustively check partition legality against a base system.

    ``constraint`` selects the non-signalling condition set every part
    must fulfil: "time-ordered", "ab", or "none" (distribution checks
    only).  Exact systems are compared with zero tolerance.
    """
    if constraint not in ("time-ordered", "ab", "none"):
        raise ValueError(f"unknown constraint set {constraint!r}")
    for system in partition.systems:
        if (system.n, system.n_settings) != (base.n, base.n_settings):
            raise ValueError("all parts must share (n, n_settings) with the base")

    table_size = (4 * base.n_settings**2) ** base.n
    budget = (len(partition.parts) + 1) * table_size
    if budget > max_evals:
        raise InfeasibleSizeError(
            f"partition verification needs {budget} evaluations, cap is {max_evals}"
        )

    weights = partition.weights
    exact_weights = all(isinstance(w, Fraction) for w in weights)
    weight_sum = sum(weights)
    weights_ok = all(w >= 0 for w in weights) and (
        weight_sum == 1 if exact_weights else abs(weight_sum - 1) <= FLOAT_ATOL
    )

    base_table = materialize(base, max_evals=max_evals)
    part_tables = [materialize(s, max_evals=max_evals) for s in partition.systems]
    checks = budget

    part_reports = []
    for system, table in zip(partition.systems, part_tables):
        atol = 0 if table.exact else FLOAT_ATOL
        nonneg = all(v >= -atol if atol else v >= 0 for v in table.values)
        per_input = 4**table.n
        one = table.den if table.exact else 1.0
        normalized = True
        for start in range(0, len(table.values), per_input):
            s = sum(table.values[start:start + per_input])
            if (s != one) if atol == 0 else (abs(s - one) > atol):
                normalized = False
                break
        if constraint == "none":
            ns = None
        elif constraint == "ab":
            ns = check_ab(system, table=table)
        else:
            ns = check_time_ordered(system, table=table)
        if ns is not None:
            checks += ns.checks_performed
        part_reports.append(PartConstraintReport(nonneg, normalized, ns))

    # Pointwise convex combination, on a common denominator in exact mode.
    mismatches = []
    mismatch_total = 0
    exact = base_table.exact and all(t.exact for t in part_tables) and exact_weights
    if exact:
        den = base_table.den
        for w, t in zip(weights, part_tables):
            den = math.lcm(den, t.den * w.denominator)
        base_scale = den // base_table.den
        scaled_parts = []
        for w, t in zip(weights, part_tables):
            num = w.numerator * (den // (t.den * w.denominator))
            scaled_parts.append((num, t.values))
        for idx in range(table_size):
            combo = sum(num * vals[idx] for num, vals in scaled_parts)
            want = base_table.values[idx] * base_scale
            if combo != want:
                mismatch_total += 1
                if len(mismatches) < 10:
                    x, y, u, v = _decode_point(base_table, idx)
                    mismatches.append((x, y, u, v,
                                       Fraction(want, den), Fraction(combo, den)))
    else:
        def as_float(t: JointTable, idx: int) -> float:
            return t.values[idx] / t.den if t.exact else t.values[idx]

        for idx in range(table_size):
            combo = sum(float(w) * as_float(t, idx) for w, t in zip(weights, part_tables))
            want = as_float(base_table, idx)
            if abs(combo - want) > FLOAT_ATOL:
                mismatch_total += 1
                if len(mismatches) < 10:
                    x, y, u, v = _decode_point(base_table, idx)
                    mismatches.append((x, y, u, v, want, combo))
    checks += table_size

    return PartitionReport(
        weights_ok=weights_ok,
        weight_sum=weight_sum,
        part_reports=part_reports,
        convex_ok=mismatch_total == 0,
        convex_mismatches=mismatches,
        convex_mismatch_total=mismatch_total,
        checks_performed=checks,
    )
