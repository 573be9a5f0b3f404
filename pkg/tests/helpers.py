"""Shared test fixtures: mutated systems and independent oracles.

The oracles here recompute quantities by direct enumeration only, never
through the library's closed forms, so they stay valid checks of them.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product

from chainbell import (
    BoxParams,
    HashFunction,
    SinglePairBox,
    bias_box,
    build_unbiased_box,
    is_almost_balanced,
    random_function,
)
from chainbell.systems import Partition, SystemEvaluator


class FuturePeekingSystem(SystemEvaluator):
    """Two-pair system whose first pair is biased by the *second* output
    bit -- the prefix property violated on purpose."""

    n = 2

    def __init__(self, params: BoxParams):
        self.base = build_unbiased_box(params)
        self.biased = (
            bias_box(self.base, 0, params.eps),
            bias_box(self.base, 1, params.eps),
        )
        self.n_settings = params.n_settings

    def evaluate(self, x, y, u, v):
        first = self.biased[x[1]]
        return first.prob(u[0], v[0], x[0], y[0]) * self.base.prob(u[1], v[1], x[1], y[1])


class NegatedPointSystem(SystemEvaluator):
    """Wrapper that negates the probability at one point."""

    def __init__(self, inner: SystemEvaluator, point):
        self.inner = inner
        self.point = point
        self.n = inner.n
        self.n_settings = inner.n_settings

    def evaluate(self, x, y, u, v):
        val = self.inner.evaluate(x, y, u, v)
        if (tuple(x), tuple(y), tuple(u), tuple(v)) == self.point:
            return -val
        return val


def perturbed_bob_marginal_box(params: BoxParams, amount=Fraction(1, 64)) -> SinglePairBox:
    """Unbiased box with one square's Bob marginal knocked off 1/2.

    Moves mass between the two y-cells of one Alice outcome, so square
    normalization and Alice's marginal survive.
    """
    box = build_unbiased_box(params)
    cells = list(box.cells)
    cells[0] += amount  # (a=0, b=0, x=0, y=0)
    cells[1] -= amount  # (a=0, b=0, x=0, y=1)
    return SinglePairBox(box.n_settings, tuple(cells))


def joint_key_zero_prob(f: HashFunction, system: SystemEvaluator, u, v):
    """Pr[f(X) = 0] by raw double summation at a fixed input tuple."""
    total = 0
    for x in product((0, 1), repeat=system.n):
        if f.value(x) != 0:
            continue
        for y in product((0, 1), repeat=system.n):
            total += system.evaluate(x, y, u, v)
    return total


def lemma_distance_oracle(f: HashFunction, partition: Partition, u, v):
    """The distance formula evaluated from scratch at one input tuple.

    Labels the larger-q part as z = 0, flipping the key labels too when
    even that stays below 1/2.
    """
    q = [joint_key_zero_prob(f, part, u, v) for part in partition.systems]
    pr0 = Fraction(sum(1 for b in f.bits if b == 0), 2**f.n)
    z0 = 0 if q[0] >= q[1] else 1
    q_top, pr_top = q[z0], pr0
    if q_top < Fraction(1, 2):
        z0 = 1 - z0
        q_top, pr_top = 1 - q[z0], 1 - pr0
    weight = partition.weights[z0]
    return weight * (q_top - (1 - q_top)) - Fraction(1, 2) * (pr_top - (1 - pr_top))


def exhaustive_almost_balanced(n: int) -> list[HashFunction]:
    """Every almost balanced function on n bits (n <= 3 stays small)."""
    size = 2**n
    out = []
    for code in range(2**size):
        bits = tuple((code >> (size - 1 - k)) & 1 for k in range(size))
        f = HashFunction(n, bits, f"enum:{code}")
        if is_almost_balanced(f):
            out.append(f)
    return out


def exhaustive_functions(n: int) -> list[HashFunction]:
    size = 2**n
    return [
        HashFunction(n, tuple((code >> (size - 1 - k)) & 1 for k in range(size)),
                     f"enum:{code}")
        for code in range(2**size)
    ]


def seeded_almost_balanced(n: int, count: int) -> list[HashFunction]:
    """First `count` almost balanced functions from the seeded family."""
    out = []
    seed = 0
    while len(out) < count:
        f = random_function(n, seed)
        if is_almost_balanced(f):
            out.append(f)
        seed += 1
    return out


def balanced_two_zero_functions_n2() -> list[HashFunction]:
    """All six n = 2 functions with exactly two zeros."""
    out = []
    for zeros in combinations(range(4), 2):
        bits = tuple(0 if k in zeros else 1 for k in range(4))
        out.append(HashFunction(2, bits, f"n2:{zeros}"))
    return out
