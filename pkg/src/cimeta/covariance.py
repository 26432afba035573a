"""Labeled covariance matrices and Gaussian information primitives.

All distributions are zero-mean multivariate Gaussians, so a covariance
matrix with named variables carries everything needed for conditional
covariances, partial correlations, conditional mutual information and KL
divergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateVariance,
    DimensionMismatch,
    DivergentInformation,
    InternalConsistencyError,
    SingularConditioningSet,
    UnknownVariable,
)

# Condition number above which a conditioning block counts as singular.
COND_LIMIT = 1e12

# Conditional variances at or below this are treated as degenerate.
VARIANCE_FLOOR = 1e-14

# Negative CMI magnitudes below this are roundoff and clamp to zero.
CMI_ROUNDOFF = 1e-12


def _as_symmetric(matrix: np.ndarray) -> np.ndarray:
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"covariance matrix must be square, got shape {m.shape}")
    scale = np.max(np.abs(m)) if m.size else 0.0
    if scale > 0 and np.max(np.abs(m - m.T)) > 1e-12 * scale:
        raise DimensionMismatch("covariance matrix is not symmetric within tolerance")
    return 0.5 * (m + m.T)


@dataclass(frozen=True)
class LabeledCovariance:
    """Symmetric PSD matrix over named variables.

    Immutable after construction; the matrix array is marked read-only.
    """

    labels: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(set(labels)) != len(labels):
            raise DimensionMismatch("labels must be unique")
        m = _as_symmetric(self.matrix)
        if m.shape[0] != len(labels):
            raise DimensionMismatch(
                f"{len(labels)} labels but matrix has dimension {m.shape[0]}"
            )
        if m.size:
            eigs = np.linalg.eigvalsh(m)
            top = max(eigs[-1], 0.0)
            if eigs[0] < -1e-10 * max(top, 1e-300):
                from .errors import NonPSDResult

                raise NonPSDResult(
                    f"matrix is not PSD: min eigenvalue {eigs[0]:.3e} vs max {top:.3e}"
                )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, name: str) -> int:
        try:
            return self.labels.index(name)
        except ValueError:
            raise UnknownVariable(f"unknown variable {name!r}; have {list(self.labels)}")

    def indices(self, names) -> list[int]:
        return [self.index(n) for n in names]

    def block(self, rows, cols) -> np.ndarray:
        return self.matrix[np.ix_(self.indices(rows), self.indices(cols))]


@dataclass(frozen=True)
class CITestSpec:
    """One conditional-independence hypothesis: a is independent of b given cond."""

    a: str
    b: str
    cond: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "cond", frozenset(self.cond))
        if self.a == self.b:
            raise DimensionMismatch(f"test variables must differ, got {self.a!r} twice")
        if self.cond & {self.a, self.b}:
            raise DimensionMismatch(
                f"conditioning set {sorted(self.cond)} overlaps test pair ({self.a}, {self.b})"
            )

    def __str__(self) -> str:
        return f"{self.a},{self.b}|{','.join(sorted(self.cond))}"


@dataclass(frozen=True)
class ConditionalCovariance:
    """Covariance of target variables given the conditioning variables."""

    targets: tuple[str, ...]
    given: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = _as_symmetric(self.matrix)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "given", tuple(self.given))


def _ordered(cov: LabeledCovariance, names) -> list[str]:
    """Names sorted by their position in cov.labels (deterministic blocks)."""
    return sorted(names, key=cov.index)


def solve_conditioning(block: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve block @ x = rhs for a symmetric PSD conditioning block.

    Raises SingularConditioningSet when the block's condition number is
    at or above COND_LIMIT.
    """
    eigs = np.linalg.eigvalsh(block)
    if eigs[0] <= 0 or eigs[-1] / eigs[0] >= COND_LIMIT:
        raise SingularConditioningSet(
            f"conditioning block is numerically singular (eigenvalues in "
            f"[{eigs[0]:.3e}, {eigs[-1]:.3e}])"
        )
    c, low = _cho_factor(block)
    return _cho_solve((c, low), rhs)


def _cho_factor(a):
    from scipy.linalg import cho_factor

    return cho_factor(a, lower=True)


def _cho_solve(cl, rhs):
    from scipy.linalg import cho_solve

    return cho_solve(cl, rhs)


def schur_conditional(cov: LabeledCovariance, targets, given) -> ConditionalCovariance:
    """Conditional covariance of `targets` given `given` via the Schur complement.

    Returns Sigma_TT - Sigma_TG Sigma_GG^-1 Sigma_GT; with an empty
    conditioning set the target block is returned unchanged.
    """
    t = _ordered(cov, set(targets))
    g = _ordered(cov, set(given))
    if set(t) & set(g):
        raise DimensionMismatch(f"targets and conditioners overlap: {sorted(set(t) & set(g))}")
    t_idx = cov.indices(t)
    if not g:
        return ConditionalCovariance(tuple(t), (), cov.matrix[np.ix_(t_idx, t_idx)])
    g_idx = cov.indices(g)
    s_tt = cov.matrix[np.ix_(t_idx, t_idx)]
    s_tg = cov.matrix[np.ix_(t_idx, g_idx)]
    s_gg = cov.matrix[np.ix_(g_idx, g_idx)]
    phi = s_tt - s_tg @ solve_conditioning(s_gg, s_tg.T)
    phi = 0.5 * (phi + phi.T)
    return ConditionalCovariance(tuple(t), tuple(g), phi)


def _phi_2x2(cov: LabeledCovariance, test: CITestSpec) -> tuple[float, float, float]:
    """(var_a, var_b, cov_ab) of the test pair given the conditioning set."""
    phi = schur_conditional(cov, {test.a, test.b}, test.cond)
    ia = phi.targets.index(test.a)
    ib = phi.targets.index(test.b)
    return phi.matrix[ia, ia], phi.matrix[ib, ib], phi.matrix[ia, ib]


def partial_correlation(cov: LabeledCovariance, test: CITestSpec) -> float:
    """Partial correlation of (test.a, test.b) given test.cond."""
    va, vb, cab = _phi_2x2(cov, test)
    if va <= VARIANCE_FLOOR or vb <= VARIANCE_FLOOR:
        raise DegenerateVariance(
            f"conditional variance collapsed for test {test} (var_a={va:.3e}, var_b={vb:.3e})"
        )
    return float(cab / math.sqrt(va * vb))


def conditional_mutual_information(cov: LabeledCovariance, test: CITestSpec) -> float:
    """Conditional mutual information (nats) of the test pair given its set.

    Equals -0.5*log(1 - rho^2) for the scalar pair. Tiny negative values
    from roundoff are clamped to zero; larger negatives are an internal
    consistency failure.
    """
    rho = partial_correlation(cov, test)
    if abs(rho) >= 1.0 - 1e-12:
        raise DivergentInformation(
            f"|partial correlation| = {abs(rho):.15f} for test {test}; CMI is +inf"
        )
    value = -0.5 * math.log1p(-rho * rho)
    if value < 0.0:
        if value < -CMI_ROUNDOFF:
            raise InternalConsistencyError(f"CMI evaluated to {value:.3e} < -{CMI_ROUNDOFF}")
        value = 0.0
    return value


def gaussian_kl(p: LabeledCovariance, q: LabeledCovariance) -> float:
    """KL divergence D(P || Q) between zero-mean Gaussians with equal labels."""
    if p.labels != q.labels:
        raise DimensionMismatch(f"label mismatch: {p.labels} vs {q.labels}")
    d = p.dim
    qinv_p = solve_conditioning(q.matrix, np.asarray(p.matrix))
    sign_q, logdet_q = np.linalg.slogdet(q.matrix)
    sign_p, logdet_p = np.linalg.slogdet(p.matrix)
    if sign_q <= 0 or sign_p <= 0:
        raise SingularConditioningSet("covariance matrix has non-positive determinant")
    value = 0.5 * (np.trace(qinv_p) - d + logdet_q - logdet_p)
    return max(value, 0.0) if value > -1e-10 else value
