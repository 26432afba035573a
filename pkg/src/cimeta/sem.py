"""Linear additive-Gaussian structural equation models.

An SEM is a topologically ordered variable list, edge coefficients and
noise variances. Standardized SEMs solve the noise variances exactly in
topological order so every marginal variance is 1, which makes the
implied covariance entries equal to correlations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .citest import Dataset
from .covariance import LabeledCovariance
from .errors import ConfigError, DimensionMismatch, InfeasibleStandardization

# Implied noise variances within this of zero are clamped to exactly zero
# (degenerate limit, e.g. a unit edge coefficient); below it the
# standardization is infeasible.
_NOISE_TOL = 1e-9


@dataclass(frozen=True)
class LinearSEM:
    """DAG with linear edges and Gaussian noise, variables in topological order."""

    variables: tuple[str, ...]
    edges: dict  # (parent, child) -> coefficient
    noise_variances: dict = field(default_factory=dict)  # ignored when standardized
    standardized: bool = True

    def __post_init__(self) -> None:
        names = tuple(self.variables)
        object.__setattr__(self, "variables", names)
        if len(set(names)) != len(names):
            raise DimensionMismatch("SEM variable names must be unique")
        order = {v: i for i, v in enumerate(names)}
        for (parent, child), coef in self.edges.items():
            if parent not in order or child not in order:
                raise DimensionMismatch(f"edge ({parent}, {child}) references unknown variable")
            if order[parent] >= order[child]:
                raise DimensionMismatch(
                    f"edge ({parent}, {child}) violates the topological order"
                )
            float(coef)
        if not self.standardized:
            for v in names:
                if v not in self.noise_variances:
                    raise DimensionMismatch(f"missing noise variance for {v!r}")
                if float(self.noise_variances[v]) <= 0:
                    raise DimensionMismatch(f"noise variance for {v!r} must be > 0")

    def parents(self, child: str) -> list[str]:
        return [p for p in self.variables if (p, child) in self.edges]


def _resolve(sem: LinearSEM) -> tuple[np.ndarray, np.ndarray]:
    """Implied covariance matrix and per-variable noise variances.

    Built incrementally in topological order: Cov(V, U) = sum_p w_p Cov(p, U)
    for U earlier than V, and Var(V) = w' Sigma_pp w + Var(N_V).
    """
    names = sem.variables
    d = len(names)
    idx = {v: i for i, v in enumerate(names)}
    sigma = np.zeros((d, d))
    noise = np.zeros(d)
    for j, v in enumerate(names):
        pa = sem.parents(v)
        w = np.array([float(sem.edges[(p, v)]) for p in pa])
        p_idx = [idx[p] for p in pa]
        explained = float(w @ sigma[np.ix_(p_idx, p_idx)] @ w) if pa else 0.0
        if sem.standardized:
            nv = 1.0 - explained
            if nv < -_NOISE_TOL:
                raise InfeasibleStandardization(
                    f"variable {v!r} needs noise variance {nv:.6g} <= 0; "
                    "coefficients imply |correlation| >= 1"
                )
            nv = max(nv, 0.0)
        else:
            nv = float(sem.noise_variances[v])
        noise[j] = nv
        if pa:
            cross = sigma[p_idx, :] .T @ w  # Cov(V, every earlier variable)
            sigma[j, :j] = cross[:j]
            sigma[:j, j] = cross[:j]
        sigma[j, j] = explained + nv
    return sigma, noise


def sem_covariance(sem: LinearSEM) -> LabeledCovariance:
    """Exact covariance implied by the SEM."""
    sigma, _ = _resolve(sem)
    return LabeledCovariance(sem.variables, sigma)


def noise_variances(sem: LinearSEM) -> dict:
    """Resolved noise variance per variable (solved when standardized)."""
    _, noise = _resolve(sem)
    return dict(zip(sem.variables, noise.tolist()))


def sample(sem: LinearSEM, n: int, seed) -> Dataset:
    """n i.i.d. draws via seeded topological forward simulation."""
    if n < 1:
        raise DimensionMismatch(f"sample size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    return sample_with_rng(sem, n, rng)


def sample_with_rng(sem: LinearSEM, n: int, rng: np.random.Generator) -> Dataset:
    _, noise = _resolve(sem)
    names = sem.variables
    idx = {v: i for i, v in enumerate(names)}
    draws = rng.standard_normal((n, len(names)))
    x = np.empty((n, len(names)))
    for j, v in enumerate(names):
        col = draws[:, j] * np.sqrt(noise[j])
        for p in sem.parents(v):
            col = col + float(sem.edges[(p, v)]) * x[:, idx[p]]
        x[:, j] = col
    return Dataset(names, x)


def three_node_preset(alpha1: float, alpha2: float, beta: float) -> LinearSEM:
    """Standardized A -> B -> C with A -> C: B = a1*A, C = a2*A + b*B (+ noise).

    alpha2 = 0 gives a Markov chain, alpha1 = 0 a collider at C. Raises
    InfeasibleStandardization when no positive noise variances exist.
    """
    sem = LinearSEM(
        variables=("A", "B", "C"),
        edges={("A", "B"): float(alpha1), ("A", "C"): float(alpha2), ("B", "C"): float(beta)},
        standardized=True,
    )
    _resolve(sem)  # validate feasibility eagerly
    return sem


def parse_sem_config(text: str) -> LinearSEM:
    """Parse the key-value SEM config format.

    Lines ('#' starts a comment):
        variables: A B C
        standardized: true
        edge: A B 0.5
        noise: C 1.0      (required per variable when standardized is false)
    """
    variables: tuple[str, ...] | None = None
    edges = {}
    noise = {}
    standardized = True
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ConfigError(f"line {line_no}: expected 'key: value', got {raw!r}")
        key, value = (part.strip() for part in line.split(":", 1))
        fields = value.split()
        try:
            if key == "variables":
                variables = tuple(fields)
            elif key == "standardized":
                if value.lower() not in ("true", "false"):
                    raise ValueError(value)
                standardized = value.lower() == "true"
            elif key == "edge":
                parent, child, coef = fields
                edges[(parent, child)] = float(coef)
            elif key == "noise":
                name, var = fields
                noise[name] = float(var)
            else:
                raise ConfigError(f"line {line_no}: unknown key {key!r}")
        except (ValueError, IndexError):
            raise ConfigError(f"line {line_no}: malformed value for {key!r}: {value!r}")
    if variables is None:
        raise ConfigError("missing 'variables:' line")
    return LinearSEM(
        variables=variables, edges=edges, noise_variances=noise, standardized=standardized
    )


def format_sem_config(sem: LinearSEM) -> str:
    lines = [f"variables: {' '.join(sem.variables)}"]
    lines.append(f"standardized: {'true' if sem.standardized else 'false'}")
    for child in sem.variables:
        for parent in sem.parents(child):
            lines.append(f"edge: {parent} {child} {sem.edges[(parent, child)]!r}")
    if not sem.standardized:
        for v in sem.variables:
            lines.append(f"noise: {v} {float(sem.noise_variances[v])!r}")
    return "\n".join(lines) + "\n"
