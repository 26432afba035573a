import math

import numpy as np
import pytest
from scipy import stats

from cimeta import (
    CITestSpec,
    ReplicateSource,
    conditional_mutual_information,
    enumerate_tests,
    sem_covariance,
)
from cimeta.errors import ConfigError, InfeasibleStandardization
from cimeta.sem import LinearSEM
from cimeta.sweep import (
    Axis,
    GridSpec,
    collider_surface,
    grid_to_csv,
    markov_chain_surface,
    pair_matrix_to_csv,
    parse_cli_test,
    parse_grid_spec,
    parse_serialized_test,
    run_grid,
    run_pair_matrix,
    serialize_test,
)

T_AC = CITestSpec("A", "C")
T_BC = CITestSpec("B", "C")


class TestSerialization:
    def test_roundtrip(self):
        tests = [
            CITestSpec("A", "B"),
            CITestSpec("A", "C", frozenset({"B"})),
            CITestSpec("X1", "X2", frozenset({"X3", "X4"})),
        ]
        for t in tests:
            assert parse_serialized_test(serialize_test(t)) == t

    def test_cli_grammar(self):
        assert parse_cli_test("A,B") == CITestSpec("A", "B")
        assert parse_cli_test("A,B|") == CITestSpec("A", "B")
        assert parse_cli_test("A,B|C,D") == CITestSpec("A", "B", frozenset({"C", "D"}))
        assert parse_cli_test(" A , B | C ") == CITestSpec("A", "B", frozenset({"C"}))

    def test_cli_grammar_rejects_garbage(self):
        for bad in ("A", "A,B,C", ",B", "A,"):
            with pytest.raises(ConfigError):
                parse_cli_test(bad)

    def test_serialized_rejects_garbage(self):
        with pytest.raises(ConfigError):
            parse_serialized_test("no-separators")


class TestAxis:
    def test_centers_are_cell_midpoints(self):
        axis = Axis("beta", -1.0, 1.0, 4)
        assert np.allclose(axis.centers(), [-0.75, -0.25, 0.25, 0.75])

    def test_rejects_unknown_parameter(self):
        with pytest.raises(ConfigError):
            Axis("gamma", 0.0, 1.0, 5)

    def test_rejects_single_step(self):
        with pytest.raises(ConfigError):
            Axis("beta", 0.0, 1.0, 1)


class TestGridSpecValidation:
    def test_duplicate_axis_parameter(self):
        with pytest.raises(ConfigError):
            GridSpec(
                fixed={"beta": 0.0},
                axis1=Axis("alpha1", -0.5, 0.5, 3),
                axis2=Axis("alpha1", -0.5, 0.5, 3),
                measure="partial_correlation",
                t1=T_AC,
            )

    def test_missing_parameter(self):
        with pytest.raises(ConfigError, match="not pinned"):
            GridSpec(
                fixed={},
                axis1=Axis("alpha1", -0.5, 0.5, 3),
                axis2=Axis("beta", -0.5, 0.5, 3),
                measure="partial_correlation",
                t1=T_AC,
            )

    def test_two_test_measure_needs_t2(self):
        with pytest.raises(ConfigError, match="two tests"):
            GridSpec(
                fixed={"alpha2": 0.0},
                axis1=Axis("alpha1", -0.5, 0.5, 3),
                axis2=Axis("beta", -0.5, 0.5, 3),
                measure="cimd",
                t1=T_AC,
            )


class TestRunGrid:
    def test_partial_correlation_sign_structure(self):
        # at alpha1 = 0.5 the (A,C) correlation is alpha2 + beta/2; its
        # sign must flip across the alpha2 = -beta/2 contour
        spec = GridSpec(
            fixed={"alpha1": 0.5},
            axis1=Axis("alpha2", -0.6, 0.6, 12),
            axis2=Axis("beta", -0.6, 0.6, 12),
            measure="partial_correlation",
            t1=T_AC,
        )
        result = run_grid(spec)
        for cell in result.cells:
            analytic = cell.param1 + 0.5 * cell.param2
            assert cell.status == "ok"
            assert cell.value == pytest.approx(analytic, abs=1e-12)
            if abs(analytic) > 1e-9:
                assert math.copysign(1.0, cell.value) == math.copysign(1.0, analytic)

    def test_infeasible_cells_marked_not_fatal(self):
        spec = GridSpec(
            fixed={"alpha1": 0.9},
            axis1=Axis("alpha2", 0.5, 0.99, 4),
            axis2=Axis("beta", 0.5, 0.99, 4),
            measure="partial_correlation",
            t1=T_AC,
        )
        result = run_grid(spec)
        statuses = {cell.status for cell in result.cells}
        assert "infeasible" in statuses
        for cell in result.cells:
            if cell.status == "infeasible":
                assert math.isnan(cell.value)

    def test_deterministic_fs_cid_grid(self):
        spec = GridSpec(
            fixed={"alpha1": 0.5},
            axis1=Axis("alpha2", -0.4, 0.4, 3),
            axis2=Axis("beta", -0.4, 0.4, 3),
            measure="fs_cid",
            t1=T_AC,
            t2=T_BC,
            seed=3,
            replicates=50,
            replicate_size=20,
        )
        assert grid_to_csv(run_grid(spec)) == grid_to_csv(run_grid(spec))

    def test_csv_shape(self):
        result = markov_chain_surface(steps=5)
        text = grid_to_csv(result)
        lines = text.strip().split("\n")
        assert lines[0] == "param1,param2,value,status"
        assert len(lines) == 1 + 25


class TestPresetSurfaces:
    def test_markov_chain_surface_nonpositive(self):
        # t1 = (A,C|B) holds in the chain, so I_P(t1) = 0 and
        # CIMD = -I_proj(t1) <= 0 everywhere
        result = markov_chain_surface(steps=9)
        for cell in result.cells:
            if cell.status == "ok":
                assert cell.value <= 1e-12

    def test_collider_surface_nonpositive(self):
        # t1 = (A,B|) holds in the collider, so the CIMD of it after
        # projecting onto (A,B|C) is <= 0 (projection cannot reduce an
        # already-zero information below zero, but the raw value is
        # I_P(t1) - I_proj(t1) = 0 - I_proj(t1))
        result = collider_surface(steps=9)
        for cell in result.cells:
            if cell.status == "ok":
                assert cell.value <= 1e-12

    def test_collider_corner_strictly_negative(self):
        result = collider_surface(lower=-0.75, upper=0.75, steps=2)
        # all four corners are at |alpha2| = |beta| = 0.375, well feasible
        for cell in result.cells:
            assert cell.status == "ok"
            assert cell.value < -1e-6


class TestPairMatrix:
    def test_cimd_diagonal_equals_own_cmi(self):
        cov = sem_covariance(
            LinearSEM(("A", "B", "C"), {("A", "B"): 0.5, ("B", "C"): 0.4})
        )
        tests = enumerate_tests(("A", "B", "C"), 1)
        matrix = run_pair_matrix(tests, "cimd", cov=cov)
        for i, t in enumerate(tests):
            assert matrix.values[i, i] == pytest.approx(
                conditional_mutual_information(cov, t), abs=1e-10
            )

    def test_fs_cid_matrix_exactly_symmetric(self):
        source = ReplicateSource.from_sem(
            LinearSEM(("A", "B", "C"), {("A", "B"): 0.5, ("A", "C"): 0.3, ("B", "C"): -0.3}),
            replicate_size=20,
            replicate_count=200,
            seed=17,
        )
        tests = enumerate_tests(("A", "B", "C"), 1)
        matrix = run_pair_matrix(tests, "fs_cid", source=source)
        assert np.array_equal(matrix.values, matrix.values.T)

    def test_pair_csv_roundtrip(self):
        cov = sem_covariance(LinearSEM(("A", "B", "C"), {("A", "B"): 0.5}))
        tests = enumerate_tests(("A", "B", "C"), 0)
        matrix = run_pair_matrix(tests, "cimd", cov=cov)
        text = pair_matrix_to_csv(matrix)
        lines = text.strip().split("\n")
        assert lines[0] == "test1,test2,value"
        assert len(lines) == 1 + len(tests) ** 2
        first = lines[1].split(",")
        assert parse_serialized_test(first[0]) == tests[0]

    def test_missing_inputs_rejected(self):
        tests = enumerate_tests(("A", "B", "C"), 0)
        with pytest.raises(ConfigError):
            run_pair_matrix(tests, "cimd")
        with pytest.raises(ConfigError):
            run_pair_matrix(tests, "fs_cid")
        with pytest.raises(ConfigError):
            run_pair_matrix(tests, "bogus", cov=None)


def random_four_var_sem(rng):
    """Random standardized 4-variable SEM with moderate edge weights."""
    names = ("A", "B", "C", "D")
    while True:
        edges = {}
        for i in range(4):
            for j in range(i + 1, 4):
                if rng.uniform() < 0.6:
                    edges[(names[i], names[j])] = float(rng.uniform(-0.55, 0.55))
        if not edges:
            continue
        try:
            sem = LinearSEM(names, edges)
            sem_covariance(sem)
            return sem
        except InfeasibleStandardization:
            continue


def test_cimd_tracks_fs_cid_in_rank():
    # across the full pair matrix, closed-form CIMD and bootstrap FS-CID
    # should broadly order test pairs the same way
    tests = enumerate_tests(("A", "B", "C", "D"), 1)
    correlations = []
    for seed in range(10):
        rng = np.random.default_rng(1000 + seed)
        sem = random_four_var_sem(rng)
        cov = sem_covariance(sem)
        cimd_m = run_pair_matrix(tests, "cimd", cov=cov)
        source = ReplicateSource.from_sem(sem, replicate_size=20,
                                          replicate_count=600, seed=seed)
        fs_m = run_pair_matrix(tests, "fs_cid", source=source)
        off = ~np.eye(len(tests), dtype=bool)
        a = cimd_m.values[off]
        b = fs_m.values[off]
        keep = np.isfinite(a) & np.isfinite(b)
        rho, _ = stats.spearmanr(a[keep], b[keep])
        correlations.append(rho)
    assert float(np.median(correlations)) > 0.3


class TestParseGridSpec:
    SPEC = """
    # chain sweep
    fixed: alpha1 0.5
    axis1: alpha2 -0.5 0.5 7
    axis2: beta -0.5 0.5 7
    measure: cimd
    t1: A,C|
    t2: B,C|
    seed: 4
    """

    def test_parses(self):
        spec = parse_grid_spec(self.SPEC)
        assert spec.fixed == {"alpha1": 0.5}
        assert spec.axis1.steps == 7
        assert spec.measure == "cimd"
        assert spec.t1 == T_AC
        assert spec.t2 == T_BC
        assert spec.seed == 4

    def test_unknown_key_has_line_number(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_grid_spec("fixed: alpha1 0.5\nbogus: 3\n")

    def test_malformed_axis(self):
        with pytest.raises(ConfigError, match="axis1"):
            parse_grid_spec("axis1: alpha2 low high 5\n")

    def test_missing_axis(self):
        with pytest.raises(ConfigError, match="axis2"):
            parse_grid_spec("axis1: alpha2 -1 1 5\nmeasure: cimd\nt1: A,B|\n")
