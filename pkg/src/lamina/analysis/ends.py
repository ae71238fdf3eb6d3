"""The Markov chain of fragment ends along a genealogy line.

From k ends the next fragment on the line has l ends with probability
1/(k + 1) for 1 <= l <= k + 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np
from scipy import stats

from .stats import mean_stderr


@dataclass
class EndsChain:
    state: int
    trajectory: list[int] = field(default_factory=list)


def ends_chain(n_steps: int, start: int, seed) -> EndsChain:
    if start < 1:
        raise ValueError("start must be >= 1")
    gen = np.random.default_rng(seed)
    x, traj = start, [start]
    for _ in range(n_steps):
        x = int(gen.integers(1, x + 2))
        traj.append(x)
    return EndsChain(x, traj)


def one_step_mean(k: int) -> Fraction:
    """Exact E[X_1 | X_0 = k] by enumeration."""
    return sum((Fraction(l, k + 1) for l in range(1, k + 2)), Fraction(0))


def martingale_means(n_max: int, start: int, replicas: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Mean and stderr of 2**n (X_n - 2) for n = 0..n_max over independent chains."""
    gen = np.random.default_rng(seed)
    x = np.full(replicas, start, dtype=np.int64)
    vals = [np.full(replicas, float(start - 2))]
    for n in range(1, n_max + 1):
        x = np.floor(gen.random(replicas) * (x + 1)).astype(np.int64) + 1
        vals.append(2.0 ** n * (x - 2))
    return mean_stderr(np.stack(vals, axis=1))


@dataclass
class ChildEndsTest:
    chi2: float
    dof: int
    pvalue: float
    table: dict[int, list[int]]


def child_ends_test(splits: Iterable, p_max: int = 8, min_expected: float = 5.0) -> ChildEndsTest:
    """Pooled chi-square of child-0 ends against uniform on {1, ..., p + 1}.

    splits yields (parent_ends, ends0, ...) tuples; the root (0 ends) is
    skipped, and parent classes with expected cell counts below min_expected
    are left out.
    """
    table: dict[int, list[int]] = {}
    for rec in splits:
        p, e0 = rec[0], rec[1]
        if not 1 <= p <= p_max:
            continue
        if not 1 <= e0 <= p + 1:
            raise ValueError(f"child with {e0} ends from a parent with {p}")
        table.setdefault(p, [0] * (p + 1))[e0 - 1] += 1
    chi2, dof = 0.0, 0
    for p, counts in table.items():
        n = sum(counts)
        expected = n / (p + 1)
        if expected < min_expected:
            continue
        chi2 += sum((c - expected) ** 2 / expected for c in counts)
        dof += p
    if dof == 0:
        raise ValueError("not enough splits for a chi-square test")
    return ChildEndsTest(chi2, dof, float(stats.chi2.sf(chi2, dof)), table)
