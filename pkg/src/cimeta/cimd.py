"""Conditional-independence meta-dependence (CIMD) and test enumeration.

CIMD(t1, t2, P) is the drop in t1's conditional mutual information after
projecting P onto t2's independence constraint. The limited variant
zeroes the value when either test is already strongly dependent, where
the projection is uninformative.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .covariance import CITestSpec, LabeledCovariance, conditional_mutual_information
from .projection import project_ci

DEFAULT_CUTOFF = 0.1  # nats


@dataclass(frozen=True)
class CimdValue:
    t1: CITestSpec
    t2: CITestSpec
    raw: float
    i_p_t1: float
    i_proj_t1: float
    limited: float
    limited_active: bool


def cimd(cov: LabeledCovariance, t1: CITestSpec, t2: CITestSpec) -> CimdValue:
    """Meta-dependence of t1 on t2 under `cov`.

    Asymmetric in (t1, t2): projecting onto t2 and measuring t1 is not the
    same operation as the reverse.
    """
    i_p = conditional_mutual_information(cov, t1)
    projected = project_ci(cov, t2).projected
    i_proj = conditional_mutual_information(projected, t1)
    raw = i_p - i_proj
    return CimdValue(
        t1=t1, t2=t2, raw=raw, i_p_t1=i_p, i_proj_t1=i_proj, limited=raw, limited_active=True
    )


def cimd_lim(
    cov: LabeledCovariance,
    t1: CITestSpec,
    t2: CITestSpec,
    cutoff: float = DEFAULT_CUTOFF,
) -> CimdValue:
    """CIMD zeroed out when either test's own CMI exceeds `cutoff` (nats)."""
    value = cimd(cov, t1, t2)
    i_p_t2 = conditional_mutual_information(cov, t2)
    active = value.i_p_t1 <= cutoff and i_p_t2 <= cutoff
    return CimdValue(
        t1=t1,
        t2=t2,
        raw=value.raw,
        i_p_t1=value.i_p_t1,
        i_proj_t1=value.i_proj_t1,
        limited=value.raw if active else 0.0,
        limited_active=active,
    )


def enumerate_tests(labels, max_cond_size: int) -> list[CITestSpec]:
    """All unordered pairs with conditioning subsets up to `max_cond_size`.

    Deterministic order: pairs in the order labels are given, conditioning
    subsets by size then lexicographically within the remaining labels.
    """
    labels = list(labels)
    if max_cond_size > len(labels) - 2:
        raise ValueError(
            f"max_cond_size {max_cond_size} exceeds label count {len(labels)} minus 2"
        )
    tests = []
    for a, b in itertools.combinations(labels, 2):
        rest = [x for x in labels if x not in (a, b)]
        for k in range(max_cond_size + 1):
            for cond in itertools.combinations(rest, k):
                tests.append(CITestSpec(a, b, frozenset(cond)))
    return tests
