"""Strong-faithfulness audit against a user-supplied DAG.

A distribution is lambda-strong-faithful to a DAG with respect to
(A, B, C) when d-connection implies |partial correlation| > lambda. The
audit enumerates d-connected triples and lists those at or below the
threshold (the boundary counts as a violation, matching the strict
inequality in the definition).
"""

from __future__ import annotations

from dataclasses import dataclass

from .cimd import enumerate_tests
from .covariance import CITestSpec, LabeledCovariance, partial_correlation
from .errors import CimetaError, ConfigError, DimensionMismatch, UnknownVariable


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph as a child -> parents map over named nodes."""

    nodes: tuple[str, ...]
    parents: dict

    def __post_init__(self) -> None:
        nodes = tuple(self.nodes)
        object.__setattr__(self, "nodes", nodes)
        known = set(nodes)
        for child, pa in self.parents.items():
            if child not in known or any(p not in known for p in pa):
                raise UnknownVariable(f"edge into {child!r} references unknown node")
        # cycle check via repeated removal of parent-free nodes
        remaining = set(nodes)
        while remaining:
            free = [n for n in remaining
                    if all(p not in remaining for p in self.parents.get(n, ()))]
            if not free:
                raise DimensionMismatch(f"DAG config is cyclic among {sorted(remaining)}")
            remaining.difference_update(free)

    def ancestors(self, targets) -> set:
        seen = set()
        stack = list(targets)
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            stack.extend(self.parents.get(node, ()))
        return seen


def d_separated(dag: Dag, a: str, b: str, cond) -> bool:
    """Moralized-ancestral-graph reachability test for d-separation."""
    cond = set(cond)
    relevant = dag.ancestors({a, b} | cond)
    # moralize: undirected edges parent-child and parent-parent within relevant
    adj: dict = {n: set() for n in relevant}
    for child in relevant:
        pa = [p for p in dag.parents.get(child, ()) if p in relevant]
        for p in pa:
            adj[child].add(p)
            adj[p].add(child)
        for i, p in enumerate(pa):
            for q in pa[i + 1:]:
                adj[p].add(q)
                adj[q].add(p)
    # reachability avoiding conditioned nodes
    stack = [a]
    seen = {a}
    while stack:
        node = stack.pop()
        if node == b:
            return False
        for neighbor in adj.get(node, ()):
            if neighbor not in seen and neighbor not in cond:
                seen.add(neighbor)
                stack.append(neighbor)
    return True


@dataclass(frozen=True)
class FaithfulnessViolation:
    test: CITestSpec
    partial_corr: float


def audit_strong_faithfulness(
    cov: LabeledCovariance, dag: Dag, lam: float, max_cond_size: int = 1
) -> list[FaithfulnessViolation]:
    """List d-connected triples with |partial correlation| <= lambda.

    d-separated triples are out of scope: the definition imposes no lower
    bound on them. Triples whose partial correlation cannot be computed
    (degenerate conditioning) are skipped.
    """
    if not 0.0 < lam < 1.0:
        raise ConfigError(f"lambda must be in (0, 1), got {lam}")
    if set(dag.nodes) != set(cov.labels):
        raise DimensionMismatch("DAG nodes must match covariance labels")
    violations = []
    for test in enumerate_tests(cov.labels, max_cond_size):
        if d_separated(dag, test.a, test.b, test.cond):
            continue
        try:
            rho = partial_correlation(cov, test)
        except CimetaError:
            continue
        if abs(rho) <= lam:
            violations.append(FaithfulnessViolation(test=test, partial_corr=rho))
    return violations


def parse_dag_config(text: str) -> Dag:
    """Parse the key-value DAG config format.

    Lines ('#' starts a comment):
        nodes: A B C
        edge: A B        (A -> B)
    """
    nodes: tuple[str, ...] | None = None
    edges: list[tuple[str, str]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ConfigError(f"line {line_no}: expected 'key: value', got {raw!r}")
        key, value = (part.strip() for part in line.split(":", 1))
        fields = value.split()
        if key == "nodes":
            nodes = tuple(fields)
        elif key == "edge":
            if len(fields) != 2:
                raise ConfigError(f"line {line_no}: edge needs 'parent child', got {value!r}")
            edges.append((fields[0], fields[1]))
        else:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
    if nodes is None:
        raise ConfigError("missing 'nodes:' line")
    parents: dict = {n: [] for n in nodes}
    for parent, child in edges:
        if child not in parents:
            raise UnknownVariable(f"edge into unknown node {child!r}")
        parents[child].append(parent)
    return Dag(nodes=nodes, parents={k: tuple(v) for k, v in parents.items()})
