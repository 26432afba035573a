"""Parameter-grid and all-pairs experiment harness with CSV output.

Grids evaluate a measure over a two-parameter sweep of the standardized
three-node SEM (cell centers, so heatmap cells are sampled where they are
drawn). Pair matrices evaluate a measure over every ordered pair of
enumerated CI tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cimd import DEFAULT_CUTOFF, cimd, cimd_lim
from .covariance import CITestSpec, LabeledCovariance, partial_correlation
from .errors import CimetaError, ConfigError, InfeasibleStandardization
from .fscid import ReplicateSource, fs_cid_from_indicators, replicate_indicators, run_fs_cid
from .sem import sem_covariance, three_node_preset

MEASURES = ("cimd", "cimd_lim", "fs_cid", "partial_correlation")
PRESET_PARAMS = ("alpha1", "alpha2", "beta")

STATUS_OK = "ok"
STATUS_INFEASIBLE = "infeasible"
STATUS_DEGENERATE = "degenerate"


def serialize_test(test: CITestSpec) -> str:
    """Wire format A_B|C1;C2 (empty conditioning set: 'A_B|')."""
    return f"{test.a}_{test.b}|{';'.join(sorted(test.cond))}"


def parse_serialized_test(text: str) -> CITestSpec:
    if "|" not in text or "_" not in text.split("|", 1)[0]:
        raise ConfigError(f"bad test serialization {text!r}; expected A_B|C1;C2")
    pair, cond = text.split("|", 1)
    a, b = pair.split("_", 1)
    cond_set = frozenset(c for c in cond.split(";") if c)
    return CITestSpec(a.strip(), b.strip(), cond_set)


def parse_cli_test(text: str) -> CITestSpec:
    """Command-line grammar A,B|C1,C2 (empty conditioning set: 'A,B|' or 'A,B')."""
    pair, _, cond = text.partition("|")
    parts = [p.strip() for p in pair.split(",")]
    if len(parts) != 2 or not all(parts):
        raise ConfigError(f"bad test spec {text!r}; expected A,B|C1,C2")
    cond_set = frozenset(c.strip() for c in cond.split(",") if c.strip())
    return CITestSpec(parts[0], parts[1], cond_set)


@dataclass(frozen=True)
class Axis:
    parameter: str
    lower: float
    upper: float
    steps: int

    def __post_init__(self) -> None:
        if self.parameter not in PRESET_PARAMS:
            raise ConfigError(f"unknown preset parameter {self.parameter!r}")
        if self.steps < 2:
            raise ConfigError("axis needs at least 2 steps")

    def centers(self) -> np.ndarray:
        width = (self.upper - self.lower) / self.steps
        return self.lower + (np.arange(self.steps) + 0.5) * width


@dataclass(frozen=True)
class GridSpec:
    fixed: dict
    axis1: Axis
    axis2: Axis
    measure: str
    t1: CITestSpec
    t2: CITestSpec | None = None
    seed: int = 0
    replicates: int = 1000
    replicate_size: int = 20
    alpha_level: float = 0.05
    cutoff: float = DEFAULT_CUTOFF

    def __post_init__(self) -> None:
        if self.measure not in MEASURES:
            raise ConfigError(f"unknown measure {self.measure!r}; choose from {MEASURES}")
        if self.axis1.parameter == self.axis2.parameter:
            raise ConfigError("grid axes must reference distinct parameters")
        if self.measure != "partial_correlation" and self.t2 is None:
            raise ConfigError(f"measure {self.measure!r} needs two tests")
        named = {self.axis1.parameter, self.axis2.parameter, *self.fixed}
        if set(PRESET_PARAMS) - named:
            raise ConfigError(f"parameters not pinned: {sorted(set(PRESET_PARAMS) - named)}")


@dataclass(frozen=True)
class GridCell:
    param1: float
    param2: float
    value: float
    status: str


@dataclass(frozen=True)
class GridResult:
    spec: GridSpec
    cells: tuple[GridCell, ...]


def _cell_value(spec: GridSpec, params: dict, cell_seed: int) -> float:
    sem = three_node_preset(params["alpha1"], params["alpha2"], params["beta"])
    if spec.measure == "fs_cid":
        source = ReplicateSource.from_sem(
            sem, replicate_size=spec.replicate_size,
            replicate_count=spec.replicates, seed=cell_seed,
        )
        return run_fs_cid(source, spec.t1, spec.t2, spec.alpha_level).fs_cid
    sem_cov = sem_covariance(sem)
    if spec.measure == "partial_correlation":
        return partial_correlation(sem_cov, spec.t1)
    if spec.measure == "cimd":
        return cimd(sem_cov, spec.t1, spec.t2).raw
    return cimd_lim(sem_cov, spec.t1, spec.t2, spec.cutoff).limited


def run_grid(spec: GridSpec) -> GridResult:
    """Evaluate the measure at every grid cell center.

    Infeasible standardizations and degenerate cells become NaN with a
    status instead of aborting the grid. Deterministic under fixed seed:
    each cell derives its own replicate stream from (seed, i, j).
    """
    cells = []
    for i, v1 in enumerate(spec.axis1.centers()):
        for j, v2 in enumerate(spec.axis2.centers()):
            params = dict(spec.fixed)
            params[spec.axis1.parameter] = float(v1)
            params[spec.axis2.parameter] = float(v2)
            cell_seed = int(
                np.random.SeedSequence([spec.seed, i, j]).generate_state(1)[0]
            )
            try:
                value = _cell_value(spec, params, cell_seed)
                status = STATUS_OK
            except InfeasibleStandardization:
                value, status = math.nan, STATUS_INFEASIBLE
            except CimetaError:
                value, status = math.nan, STATUS_DEGENERATE
            cells.append(GridCell(float(v1), float(v2), value, status))
    return GridResult(spec=spec, cells=tuple(cells))


GRID_CSV_HEADER = "param1,param2,value,status"


def grid_to_csv(result: GridResult) -> str:
    lines = [GRID_CSV_HEADER]
    for cell in result.cells:
        value = "nan" if math.isnan(cell.value) else repr(float(cell.value))
        lines.append(f"{cell.param1!r},{cell.param2!r},{value},{cell.status}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PairMatrix:
    tests: tuple[CITestSpec, ...]
    values: np.ndarray  # square, NaN for failed cells
    measure: str

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.tests), len(self.tests)):
            raise ConfigError("pair matrix shape must match test count")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "tests", tuple(self.tests))


def run_pair_matrix(
    tests,
    measure: str,
    cov: LabeledCovariance | None = None,
    source: ReplicateSource | None = None,
    alpha_level: float = 0.05,
    cutoff: float = DEFAULT_CUTOFF,
) -> PairMatrix:
    """Measure over every ordered test pair.

    cimd / cimd_lim need a covariance; fs_cid needs a replicate source and
    shares one set of replicate outcomes across all tests, which makes the
    matrix exactly symmetric.
    """
    tests = tuple(tests)
    k = len(tests)
    values = np.full((k, k), math.nan)
    if measure == "fs_cid":
        if source is None:
            raise ConfigError("fs_cid pair matrix needs a ReplicateSource")
        indicators, valid = replicate_indicators(source, tests, alpha_level)
        kept = indicators[valid]
        if len(kept) == 0:
            return PairMatrix(tests, values, measure)
        for i in range(k):
            for j in range(k):
                values[i, j] = fs_cid_from_indicators(
                    kept[:, i], kept[:, j], tests[i], tests[j]
                ).fs_cid
        return PairMatrix(tests, values, measure)
    if measure not in ("cimd", "cimd_lim"):
        raise ConfigError(f"unsupported pair-matrix measure {measure!r}")
    if cov is None:
        raise ConfigError(f"{measure} pair matrix needs a covariance")
    for i, t1 in enumerate(tests):
        for j, t2 in enumerate(tests):
            try:
                if measure == "cimd":
                    values[i, j] = cimd(cov, t1, t2).raw
                else:
                    values[i, j] = cimd_lim(cov, t1, t2, cutoff).limited
            except CimetaError:
                pass  # leave NaN
    return PairMatrix(tests, values, measure)


PAIR_CSV_HEADER = "test1,test2,value"


def pair_matrix_to_csv(matrix: PairMatrix) -> str:
    lines = [PAIR_CSV_HEADER]
    for i, t1 in enumerate(matrix.tests):
        for j, t2 in enumerate(matrix.tests):
            v = matrix.values[i, j]
            value = "nan" if math.isnan(v) else repr(float(v))
            lines.append(f"{serialize_test(t1)},{serialize_test(t2)},{value}")
    return "\n".join(lines) + "\n"


def markov_chain_surface(
    lower: float = -0.9, upper: float = 0.9, steps: int = 37, **kwargs
) -> GridResult:
    """CIMD of (A,C|B) after projecting onto (A,C|) over (alpha1, beta), alpha2=0."""
    spec = GridSpec(
        fixed={"alpha2": 0.0},
        axis1=Axis("alpha1", lower, upper, steps),
        axis2=Axis("beta", lower, upper, steps),
        measure="cimd",
        t1=CITestSpec("A", "C", frozenset({"B"})),
        t2=CITestSpec("A", "C"),
        **kwargs,
    )
    return run_grid(spec)


def collider_surface(
    lower: float = -0.9, upper: float = 0.9, steps: int = 37, **kwargs
) -> GridResult:
    """CIMD of (A,B|) after projecting onto (A,B|C) over (alpha2, beta), alpha1=0."""
    spec = GridSpec(
        fixed={"alpha1": 0.0},
        axis1=Axis("alpha2", lower, upper, steps),
        axis2=Axis("beta", lower, upper, steps),
        measure="cimd",
        t1=CITestSpec("A", "B"),
        t2=CITestSpec("A", "B", frozenset({"C"})),
        **kwargs,
    )
    return run_grid(spec)


def parse_grid_spec(text: str) -> GridSpec:
    """Parse the key-value sweep spec format.

    Lines ('#' starts a comment):
        fixed: alpha1 0.5
        axis1: alpha2 -0.5 0.5 21
        axis2: beta -0.5 0.5 21
        measure: cimd
        t1: A,C|
        t2: B,C|
        seed: 0            (optional; also replicates/size/alpha/cutoff)
    """
    fixed: dict = {}
    fields: dict = {}
    axes: dict = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ConfigError(f"line {line_no}: expected 'key: value', got {raw!r}")
        key, value = (part.strip() for part in line.split(":", 1))
        try:
            if key == "fixed":
                name, num = value.split()
                fixed[name] = float(num)
            elif key in ("axis1", "axis2"):
                name, lo, hi, steps = value.split()
                axes[key] = Axis(name, float(lo), float(hi), int(steps))
            elif key == "measure":
                fields["measure"] = value
            elif key in ("t1", "t2"):
                fields[key] = parse_cli_test(value)
            elif key == "seed":
                fields["seed"] = int(value)
            elif key == "replicates":
                fields["replicates"] = int(value)
            elif key == "size":
                fields["replicate_size"] = int(value)
            elif key == "alpha":
                fields["alpha_level"] = float(value)
            elif key == "cutoff":
                fields["cutoff"] = float(value)
            else:
                raise ConfigError(f"line {line_no}: unknown key {key!r}")
        except (ValueError, IndexError):
            raise ConfigError(f"line {line_no}: malformed value for {key!r}: {value!r}")
    for required in ("axis1", "axis2"):
        if required not in axes:
            raise ConfigError(f"missing '{required}:' line")
    if "measure" not in fields or "t1" not in fields:
        raise ConfigError("sweep spec needs 'measure:' and 't1:' lines")
    return GridSpec(fixed=fixed, axis1=axes["axis1"], axis2=axes["axis2"], **fields)
