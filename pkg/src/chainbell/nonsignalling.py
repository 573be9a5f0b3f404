"""Exhaustive non-signalling verification by exact marginal equality.

All checks share one strategy: materialize the full joint table of a
system (refusing outright if it exceeds the evaluation cap -- never
sampling), then compare marginal sums across input assignments.

Three conditions are covered:

- ``check_ab``: neither party's full output marginal depends on the
  other party's inputs;
- ``check_time_ordered``: for every cut i, the marginal of outputs
  before the cut (together with the whole other side) does not depend
  on inputs from the cut onwards, on either side;
- ``check_subset``: generic probe -- outputs outside an index subset
  must not depend on inputs inside it.

Exact tables (all Fractions) are normalized to integer numerators over
a common denominator, so every marginal comparison is exact integer
arithmetic.  Float tables are compared to ``FLOAT_ATOL``, far above
double rounding at desk scale and far below any structural violation.

Every reported violation is replayable: ``replay_violation`` recomputes
the two marginal sums from the stored witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import TYPE_CHECKING, Iterable, Sequence

from ._coding import int_to_bits, int_to_digits
from .boxes import FLOAT_ATOL, Prob

if TYPE_CHECKING:  # pragma: no cover
    from .systems import SystemEvaluator

#: Default bound on evaluator calls per verification.
DEFAULT_EVAL_CAP = 2**26

#: Violation witnesses retained per report (all are counted).
MAX_WITNESSES = 10

CONDITION_AB = "ab"
CONDITION_TIME_ORDERED = "time-ordered"
CONDITION_SUBSET = "subset"


class InfeasibleSizeError(RuntimeError):
    """The requested exhaustive check exceeds the evaluation cap."""


@dataclass(frozen=True)
class NsViolation:
    """A replayable witness of one violated marginal equality.

    ``x_kept``/``y_kept`` are full-length tuples with ``None`` at the
    summed positions.  The two sides of the inequality differ only in
    the varied inputs: left uses ``u_left``/``v_left``, right uses
    ``u_right``/``v_right``.
    """

    condition: str
    side: str
    cut: int | None
    summed_positions: tuple[int, ...]
    x_kept: tuple[int | None, ...]
    y_kept: tuple[int | None, ...]
    u_left: tuple[int, ...]
    v_left: tuple[int, ...]
    u_right: tuple[int, ...]
    v_right: tuple[int, ...]
    left: Prob
    right: Prob


@dataclass
class NsReport:
    condition: str
    passed: bool
    violations: list[NsViolation]
    violations_total: int
    checks_performed: int
    tolerance: Prob

    def __str__(self) -> str:
        status = "pass" if self.passed else f"FAIL ({self.violations_total} violations)"
        return f"{self.condition}: {status} [{self.checks_performed} checks]"


@dataclass
class JointTable:
    """A fully materialized joint distribution.

    Exact tables hold integer numerators over ``den``; float tables hold
    raw floats with ``den`` None.  Index layout, all first-position most
    significant: ``((u * N^n + v) * 2^n + x) * 2^n + y``.
    """

    n: int
    n_settings: int
    values: list
    den: int | None

    @property
    def exact(self) -> bool:
        return self.den is not None

    def prob(self, index: int) -> Prob:
        if self.den is None:
            return self.values[index]
        return Fraction(self.values[index], self.den)

    def transposed_values(self) -> list:
        """Value list with the roles of (u, x) and (v, y) swapped."""
        n, N = self.n, self.n_settings
        NS, X = N**n, 2**n
        out = [0] * len(self.values)
        idx = 0
        for u in range(NS):
            for v in range(NS):
                for x in range(X):
                    for y in range(X):
                        out[((v * NS + u) * X + y) * X + x] = self.values[idx]
                        idx += 1
        return out


def materialize(system: "SystemEvaluator", *, max_evals: int = DEFAULT_EVAL_CAP) -> JointTable:
    """Evaluate a system at every (x, y, u, v) point.

    Raises InfeasibleSizeError when the table would need more than
    ``max_evals`` evaluator calls.
    """
    n, N = system.n, system.n_settings
    total = (4 * N * N) ** n
    if total > max_evals:
        raise InfeasibleSizeError(
            f"joint table needs {total} evaluations, cap is {max_evals}"
        )
    settings = list(product(range(N), repeat=n))
    outcomes = list(product((0, 1), repeat=n))
    raw = []
    exact = True
    for u in settings:
        for v in settings:
            for x in outcomes:
                for y in outcomes:
                    val = system.evaluate(x, y, u, v)
                    exact = exact and isinstance(val, Fraction)
                    raw.append(val)
    if not exact:
        return JointTable(n, N, [float(v) for v in raw], None)
    den = 1
    for d in {v.denominator for v in raw}:
        den = math.lcm(den, d)
    return JointTable(n, N, [v.numerator * (den // v.denominator) for v in raw], den)


def _scaled(value, den: int | None) -> Prob:
    return value if den is None else Fraction(value, den)


def _witness_key(v: NsViolation):
    return (
        v.side,
        v.cut if v.cut is not None else 0,
        v.u_left,
        v.v_left,
        v.u_right,
        v.v_right,
        tuple(-1 if b is None else b for b in v.x_kept),
        tuple(-1 if b is None else b for b in v.y_kept),
    )


def _suffix_cut_violations(
    values: list,
    n: int,
    N: int,
    cut: int,
    den: int | None,
    side: str,
    condition: str,
) -> tuple[list[NsViolation], int, int]:
    """Check one time-ordered cut on the Alice side of ``values``.

    ``values`` must be laid out alice-major; pass the transposed table
    with side="bob" for the symmetric condition.  Returns (violations,
    total violation count, comparisons performed).
    """
    NV = N**n
    NL = N ** (n - cut + 1)  # varied setting suffix
    NH = NV // NL
    Y = 2**n
    XL = 2 ** (n - cut + 1)  # summed outcome suffix
    XH = (2**n) // XL
    XY = (2**n) * Y
    atol = 0 if den is not None else FLOAT_ATOL

    summed = tuple(range(cut, n + 1))
    found: list[tuple] = []
    total = 0
    checks = 0
    for u_hi in range(NH):
        for v in range(NV):
            ref = None
            ref_lo = 0
            for u_lo in range(NL):
                base = ((u_hi * NL + u_lo) * NV + v) * XY
                grid = [
                    sum(values[base + x_hi * XL * Y + y : base + (x_hi + 1) * XL * Y : Y])
                    for x_hi in range(XH)
                    for y in range(Y)
                ]
                if u_lo == 0:
                    ref = grid
                    continue
                checks += len(grid)
                for k, (lhs, rhs) in enumerate(zip(ref, grid)):
                    if (lhs != rhs) if atol == 0 else (abs(lhs - rhs) > atol):
                        total += 1
                        if len(found) < 4 * MAX_WITNESSES:
                            found.append((u_hi, v, ref_lo, u_lo, k, lhs, rhs))
    violations = []
    for u_hi, v, lo_a, lo_b, k, lhs, rhs in found:
        x_hi, y = divmod(k, Y)
        x_bits = int_to_bits(x_hi, cut - 1) + (None,) * (n - cut + 1)
        y_bits = int_to_bits(y, n)
        u_a = int_to_digits(u_hi * NL + lo_a, n, N)
        u_b = int_to_digits(u_hi * NL + lo_b, n, N)
        v_d = int_to_digits(v, n, N)
        if side == "alice":
            violations.append(
                NsViolation(condition, side, cut, summed, x_bits, y_bits,
                            u_a, v_d, u_b, v_d, _scaled(lhs, den), _scaled(rhs, den))
            )
        else:  # table was transposed: swap roles back
            violations.append(
                NsViolation(condition, side, cut, summed, y_bits, x_bits,
                            v_d, u_a, v_d, u_b, _scaled(lhs, den), _scaled(rhs, den))
            )
    violations.sort(key=_witness_key)
    return violations[:MAX_WITNESSES], total, checks


def _scatter_codes(positions: Sequence[int], n: int, base: int) -> list[int]:
    """Codes of all assignments over `positions`, embedded in an n-digit word."""
    weights = [base ** (n - p) for p in positions]
    codes = [0]
    for w in weights:
        codes = [c + d * w for c in codes for d in range(base)]
    return codes


def _subset_violations(
    values: list,
    n: int,
    N: int,
    subset: tuple[int, ...],
    den: int | None,
    side: str,
) -> tuple[list[NsViolation], int, int]:
    """Generic (non-contiguous) subset independence check, Alice side."""
    NV = N**n
    Y = 2**n
    XY = (2**n) * Y
    atol = 0 if den is not None else FLOAT_ATOL
    kept_pos = tuple(p for p in range(1, n + 1) if p not in subset)

    u_var = _scatter_codes(subset, n, N)
    u_keep = _scatter_codes(kept_pos, n, N)
    x_var = _scatter_codes(subset, n, 2)
    x_keep = _scatter_codes(kept_pos, n, 2)

    found: list[tuple] = []
    total = 0
    checks = 0
    for uk in u_keep:
        for v in range(NV):
            ref = None
            ref_var = u_var[0]
            for uv in u_var:
                base = ((uk + uv) * NV + v) * XY
                grid = [
                    sum(values[base + (xk + xv) * Y + y] for xv in x_var)
                    for xk in x_keep
                    for y in range(Y)
                ]
                if uv == ref_var:
                    ref = grid
                    continue
                checks += len(grid)
                for k, (lhs, rhs) in enumerate(zip(ref, grid)):
                    if (lhs != rhs) if atol == 0 else (abs(lhs - rhs) > atol):
                        total += 1
                        if len(found) < 4 * MAX_WITNESSES:
                            found.append((uk, v, ref_var, uv, k, lhs, rhs))
    violations = []
    for uk, v, uva, uvb, k, lhs, rhs in found:
        ki, y = divmod(k, Y)
        xk = x_keep[ki]
        kept_bits = int_to_bits(xk, n)  # summed positions hold zeros here
        x_bits = tuple(
            kept_bits[p - 1] if p in kept_pos else None for p in range(1, n + 1)
        )
        y_bits = int_to_bits(y, n)
        u_a = int_to_digits(uk + uva, n, N)
        u_b = int_to_digits(uk + uvb, n, N)
        v_d = int_to_digits(v, n, N)
        if side == "alice":
            violations.append(
                NsViolation(CONDITION_SUBSET, side, None, subset, x_bits, y_bits,
                            u_a, v_d, u_b, v_d, _scaled(lhs, den), _scaled(rhs, den))
            )
        else:
            violations.append(
                NsViolation(CONDITION_SUBSET, side, None, subset, y_bits, x_bits,
                            v_d, u_a, v_d, u_b, _scaled(lhs, den), _scaled(rhs, den))
            )
    violations.sort(key=_witness_key)
    return violations[:MAX_WITNESSES], total, checks


def _merge(condition: str, parts: Iterable[tuple[list[NsViolation], int, int]],
           den: int | None) -> NsReport:
    violations: list[NsViolation] = []
    total = 0
    checks = 0
    for viols, t, c in parts:
        violations.extend(viols)
        total += t
        checks += c
    violations.sort(key=_witness_key)
    return NsReport(
        condition=condition,
        passed=total == 0,
        violations=violations[:MAX_WITNESSES],
        violations_total=total,
        checks_performed=checks,
        tolerance=Fraction(0) if den is not None else FLOAT_ATOL,
    )


def check_ab(system: "SystemEvaluator", *, max_evals: int = DEFAULT_EVAL_CAP,
             table: JointTable | None = None) -> NsReport:
    """Neither full output marginal may depend on the other side's inputs."""
    t = table if table is not None else materialize(system, max_evals=max_evals)
    parts = [
        _suffix_cut_violations(t.values, t.n, t.n_settings, 1, t.den, "alice", CONDITION_AB),
        _suffix_cut_violations(t.transposed_values(), t.n, t.n_settings, 1, t.den, "bob",
                               CONDITION_AB),
    ]
    return _merge(CONDITION_AB, parts, t.den)


def check_time_ordered(system: "SystemEvaluator", *, max_evals: int = DEFAULT_EVAL_CAP,
                       table: JointTable | None = None) -> NsReport:
    """Future inputs may not influence past outputs, on either side."""
    t = table if table is not None else materialize(system, max_evals=max_evals)
    parts = []
    for cut in range(1, t.n + 1):
        parts.append(
            _suffix_cut_violations(t.values, t.n, t.n_settings, cut, t.den, "alice",
                                   f"{CONDITION_TIME_ORDERED}-alice")
        )
    transposed = t.transposed_values()
    for cut in range(1, t.n + 1):
        parts.append(
            _suffix_cut_violations(transposed, t.n, t.n_settings, cut, t.den, "bob",
                                   f"{CONDITION_TIME_ORDERED}-bob")
        )
    return _merge(CONDITION_TIME_ORDERED, parts, t.den)


def check_subset(system: "SystemEvaluator", side: str, subset: Iterable[int], *,
                 max_evals: int = DEFAULT_EVAL_CAP,
                 table: JointTable | None = None) -> NsReport:
    """Outputs outside ``subset`` on ``side`` (plus the whole other side)
    must not depend on the inputs inside ``subset``."""
    if side not in ("alice", "bob"):
        raise ValueError(f"side must be 'alice' or 'bob', got {side!r}")
    sub = tuple(sorted(set(subset)))
    t = table if table is not None else materialize(system, max_evals=max_evals)
    if not sub or sub[0] < 1 or sub[-1] > t.n:
        raise ValueError(f"subset must be a nonempty subset of 1..{t.n}, got {sub}")
    values = t.values if side == "alice" else t.transposed_values()
    part = _subset_violations(values, t.n, t.n_settings, sub, t.den, side)
    return _merge(CONDITION_SUBSET, [part], t.den)


def replay_violation(system: "SystemEvaluator", violation: NsViolation) -> tuple[Prob, Prob]:
    """Recompute both marginal sums of a witness directly from evaluate()."""
    n = system.n

    if violation.side == "alice":
        template, full = violation.x_kept, violation.y_kept
    else:
        template, full = violation.y_kept, violation.x_kept
    holes = [i for i, b in enumerate(template) if b is None]
    if sorted(p - 1 for p in violation.summed_positions) != holes:
        raise ValueError("witness summed positions do not match its kept outputs")

    def marginal(u, v):
        tot = None
        for combo in product((0, 1), repeat=len(holes)):
            filled = list(template)
            for pos, bit in zip(holes, combo):
                filled[pos] = bit
            if violation.side == "alice":
                val = system.evaluate(tuple(filled), full, u, v)
            else:
                val = system.evaluate(full, tuple(filled), u, v)
            tot = val if tot is None else tot + val
        return tot

    left = marginal(violation.u_left, violation.v_left)
    right = marginal(violation.u_right, violation.v_right)
    return left, right
