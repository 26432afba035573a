"""Closed-form information projection onto a conditional-independence constraint.

Projecting a Gaussian P onto the class satisfying A _||_ B | C keeps
P(C), P(A|C), P(B|C) and P(X|A,B,C) fixed (X = all remaining variables)
while zeroing the conditional covariance of (A, B) given C. For
covariance matrices this is local surgery: only the (a,b) entry, the
X x {a,b} cross blocks and the X x X block change.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import (
    CITestSpec,
    LabeledCovariance,
    conditional_mutual_information,
    solve_conditioning,
)
from .errors import DivergentInformation, NonPSDResult, SingularConditioningSet


@dataclass(frozen=True)
class ProjectionResult:
    """Projected covariance plus the divergence D(P || P_perp)."""

    projected: LabeledCovariance
    test: CITestSpec
    divergence: float


def _partition(cov: LabeledCovariance, test: CITestSpec):
    ia = cov.index(test.a)
    ib = cov.index(test.b)
    c_idx = sorted(cov.index(n) for n in test.cond)
    used = {ia, ib, *c_idx}
    x_idx = [i for i in range(cov.dim) if i not in used]
    return ia, ib, c_idx, x_idx


def project_ci(cov: LabeledCovariance, test: CITestSpec) -> ProjectionResult:
    """Project `cov` onto the manifold where test.a _||_ test.b | test.cond.

    Returns the projected covariance and the divergence, which equals the
    conditional mutual information of the test under `cov`.
    """
    ia, ib, c_idx, x_idx = _partition(cov, test)
    s = np.array(cov.matrix)

    if c_idx:
        s_cc = s[np.ix_(c_idx, c_idx)]
        s_c_ab = s[np.ix_(c_idx, [ia, ib])]
        fitted = s_c_ab.T @ solve_conditioning(s_cc, s_c_ab)
        new_ab = 0.5 * (fitted[0, 1] + fitted[1, 0])
    else:
        new_ab = 0.0
    delta = new_ab - s[ia, ib]

    out = s.copy()
    out[ia, ib] = new_ab
    out[ib, ia] = new_ab

    if x_idx and delta != 0.0:
        bar_idx = [ia, ib] + c_idx  # {A,B} u C, the regressors for X
        s_bar = s[np.ix_(bar_idx, bar_idx)]
        try:
            w = s[np.ix_(x_idx, bar_idx)] @ solve_conditioning(s_bar, np.eye(len(bar_idx)))
        except SingularConditioningSet:
            raise SingularConditioningSet(
                f"block over ({test.a}, {test.b}) and conditioning set is singular; "
                f"cannot project onto {test}"
            )
        # Keeping the regression of X on (A, B, C) fixed while the (a, b)
        # covariance moves by delta shifts the X cross blocks and X block.
        wa = w[:, 0]
        wb = w[:, 1]
        out[x_idx, ia] += delta * wb
        out[np.ix_([ia], x_idx)] = out[np.ix_(x_idx, [ia])].T
        out[x_idx, ib] += delta * wa
        out[np.ix_([ib], x_idx)] = out[np.ix_(x_idx, [ib])].T
        bump = delta * (np.outer(wa, wb) + np.outer(wb, wa))
        out[np.ix_(x_idx, x_idx)] += bump

    eigs = np.linalg.eigvalsh(0.5 * (out + out.T))
    if eigs[0] < -1e-8 * max(np.trace(out), 1e-300):
        raise NonPSDResult(
            f"projected covariance is not PSD (min eigenvalue {eigs[0]:.3e}); "
            "input is numerically pathological"
        )
    try:
        projected = LabeledCovariance(cov.labels, out)
    except NonPSDResult:
        raise NonPSDResult(
            "projected covariance failed the PSD invariant; input is numerically pathological"
        )
    try:
        divergence = conditional_mutual_information(cov, test)
    except DivergentInformation:
        divergence = float("inf")
    return ProjectionResult(projected=projected, test=test, divergence=divergence)


@dataclass(frozen=True)
class ConditionalCheckReport:
    """Max deviations of the four conditionals preserved by the projection."""

    c_marginal: float
    a_given_c: float
    b_given_c: float
    x_given_abc: float

    @property
    def max_deviation(self) -> float:
        return max(self.c_marginal, self.a_given_c, self.b_given_c, self.x_given_abc)


def _regression(s: np.ndarray, y_idx: list[int], on_idx: list[int]):
    """(coefficients, residual covariance) of y regressed on `on_idx`."""
    if not on_idx:
        return np.zeros((len(y_idx), 0)), s[np.ix_(y_idx, y_idx)]
    s_oo = s[np.ix_(on_idx, on_idx)]
    s_yo = s[np.ix_(y_idx, on_idx)]
    coef = s_yo @ solve_conditioning(s_oo, np.eye(len(on_idx)))
    resid = s[np.ix_(y_idx, y_idx)] - coef @ s_yo.T
    return coef, resid


def projection_preserves_conditionals(
    cov: LabeledCovariance, result: ProjectionResult
) -> ConditionalCheckReport:
    """Diagnostic: deviation of each conditional that projection must preserve.

    Compares regression coefficients and residual covariances of
    P(C), P(A|C), P(B|C) and P(X|A,B,C) between the input and the
    projected covariance. Identities over empty blocks report exact zero.
    """
    test = result.test
    ia, ib, c_idx, x_idx = _partition(cov, test)
    s = np.asarray(cov.matrix)
    p = np.asarray(result.projected.matrix)

    if c_idx:
        dev_c = float(np.max(np.abs(s[np.ix_(c_idx, c_idx)] - p[np.ix_(c_idx, c_idx)])))
    else:
        dev_c = 0.0

    def dev_given(y_idx, on_idx) -> float:
        coef_s, resid_s = _regression(s, y_idx, on_idx)
        coef_p, resid_p = _regression(p, y_idx, on_idx)
        dev = float(np.max(np.abs(resid_s - resid_p)))
        if coef_s.size:
            dev = max(dev, float(np.max(np.abs(coef_s - coef_p))))
        return dev

    dev_a = dev_given([ia], c_idx)
    dev_b = dev_given([ib], c_idx)
    dev_x = dev_given(x_idx, [ia, ib] + c_idx) if x_idx else 0.0
    return ConditionalCheckReport(
        c_marginal=dev_c, a_given_c=dev_a, b_given_c=dev_b, x_given_abc=dev_x
    )
