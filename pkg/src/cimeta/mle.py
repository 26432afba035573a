"""Information projection by composing per-variable maximum-likelihood fits.

For linear-Gaussian structural equations, the projection of an empirical
distribution onto the Markov class of a DAG is the composition of OLS
fits of each variable on its parents (MLE residual variances, 1/n
normalization). The covariance of the composition is computed in closed
form; no resampling is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .citest import Dataset
from .covariance import COND_LIMIT, CITestSpec, LabeledCovariance
from .errors import DimensionMismatch, RankDeficientParents, UnknownVariable


@dataclass(frozen=True)
class LinearFactor:
    """One fitted structural equation: child = coeffs . parents + noise."""

    child: str
    parents: tuple[str, ...]
    coeffs: np.ndarray
    residual_variance: float


@dataclass(frozen=True)
class FactorizedModel:
    """Per-variable linear factors in a fixed topological order."""

    order: tuple[str, ...]
    factors: dict  # name -> LinearFactor

    def __post_init__(self) -> None:
        for name in self.order:
            factor = self.factors[name]
            if factor.residual_variance < 0:
                raise DimensionMismatch(
                    f"negative residual variance for {name!r}: {factor.residual_variance}"
                )


def _topological_order(columns, dag: dict) -> tuple[str, ...]:
    """Order columns so parents precede children; rejects cyclic parent maps."""
    columns = list(columns)
    for child, parents in dag.items():
        if child not in columns:
            raise UnknownVariable(f"parent map references unknown column {child!r}")
        for p in parents:
            if p not in columns:
                raise UnknownVariable(f"parent map references unknown column {p!r}")
    placed: list[str] = []
    remaining = set(columns)
    while remaining:
        ready = [c for c in columns
                 if c in remaining and all(p not in remaining for p in dag.get(c, ()))]
        if not ready:
            raise DimensionMismatch(f"parent map is cyclic among {sorted(remaining)}")
        for c in ready:
            placed.append(c)
            remaining.remove(c)
    return tuple(placed)


def fit_factorized(data: Dataset, dag: dict) -> FactorizedModel:
    """OLS fit of each column on its parents with MLE (1/n) residual variance.

    `dag` maps column name -> iterable of parent names; missing entries
    mean no parents.
    """
    order = _topological_order(data.columns, dag)
    max_parents = max((len(dag.get(c, ())) for c in order), default=0)
    if data.n <= max_parents + 1:
        raise DimensionMismatch(
            f"need more than {max_parents + 1} rows to fit parent sets of size {max_parents}"
        )
    centered = data.rows - data.rows.mean(axis=0, keepdims=True)
    moments = centered.T @ centered / data.n  # MLE second moments
    col_idx = {c: i for i, c in enumerate(data.columns)}
    factors = {}
    for child in order:
        parents = tuple(dag.get(child, ()))
        ci = col_idx[child]
        if not parents:
            factors[child] = LinearFactor(child, (), np.zeros(0), float(moments[ci, ci]))
            continue
        p_idx = [col_idx[p] for p in parents]
        s_pp = moments[np.ix_(p_idx, p_idx)]
        eigs = np.linalg.eigvalsh(s_pp)
        if eigs[0] <= 0 or eigs[-1] / eigs[0] >= COND_LIMIT:
            raise RankDeficientParents(
                f"parent block for {child!r} is rank-deficient (eigenvalues "
                f"[{eigs[0]:.3e}, {eigs[-1]:.3e}])"
            )
        s_pc = moments[p_idx, ci]
        coeffs = np.linalg.solve(s_pp, s_pc)
        resid = float(moments[ci, ci] - coeffs @ s_pc)
        factors[child] = LinearFactor(child, parents, coeffs, max(resid, 0.0))
    return FactorizedModel(order=order, factors=factors)


def composed_covariance(model: FactorizedModel, labels=None) -> LabeledCovariance:
    """Covariance implied by composing the fitted factors (zero-mean)."""
    order = model.order
    idx = {v: i for i, v in enumerate(order)}
    d = len(order)
    sigma = np.zeros((d, d))
    for j, v in enumerate(order):
        f = model.factors[v]
        w = np.asarray(f.coeffs)
        p_idx = [idx[p] for p in f.parents]
        if p_idx:
            explained = float(w @ sigma[np.ix_(p_idx, p_idx)] @ w)
            cross = sigma[p_idx, :].T @ w
            sigma[j, :j] = cross[:j]
            sigma[:j, j] = cross[:j]
        else:
            explained = 0.0
        sigma[j, j] = explained + f.residual_variance
    out = LabeledCovariance(order, sigma)
    if labels is not None and tuple(labels) != order:
        perm = [order.index(n) for n in labels]
        out = LabeledCovariance(tuple(labels), sigma[np.ix_(perm, perm)])
    return out


def ci_projection_dag(columns, test: CITestSpec) -> dict:
    """Parent map realizing P(C) P(A|C) P(B|C) P(X|A,B,C) as a DAG.

    The C block is chained saturated (reproducing its full joint), A and B
    each regress on C, and the X block is chained saturated on top of
    {A, B} u C.
    """
    columns = list(columns)
    for name in (test.a, test.b, *test.cond):
        if name not in columns:
            raise UnknownVariable(f"test references unknown column {name!r}")
    c_block = [c for c in columns if c in test.cond]
    x_block = [c for c in columns if c not in test.cond and c not in (test.a, test.b)]
    dag: dict = {}
    for i, c in enumerate(c_block):
        dag[c] = tuple(c_block[:i])
    dag[test.a] = tuple(c_block)
    dag[test.b] = tuple(c_block)
    base = [test.a, test.b] + c_block
    for i, x in enumerate(x_block):
        dag[x] = tuple(base + x_block[:i])
    return dag


def ci_projection_via_mle(data: Dataset, test: CITestSpec) -> LabeledCovariance:
    """Data-driven projection onto the CI constraint via composed MLE fits."""
    dag = ci_projection_dag(data.columns, test)
    model = fit_factorized(data, dag)
    return composed_covariance(model, labels=data.columns)
