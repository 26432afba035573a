"""Command-line front end.

Subcommands: simulate, citest, project, cimd, fscid, sweep, pairs,
faithfulness. Exit codes: 0 success, 1 usage/parse/IO error, 2
numerical or domain error. Every CSV output gets a .meta.json sidecar
recording the seed and full flag set.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .cimd import DEFAULT_CUTOFF, cimd_lim, enumerate_tests
from .citest import (
    fisher_z_test,
    empirical_covariance,
    read_covariance_csv,
    read_dataset_csv,
    write_covariance_csv,
    write_dataset_csv,
)
from .errors import CimetaError, ConfigError
from .faithfulness import audit_strong_faithfulness, parse_dag_config
from .fscid import ReplicateSource, run_fs_cid
from .projection import project_ci
from .sem import parse_sem_config, sample, three_node_preset
from .sweep import (
    Axis,
    GridSpec,
    CITestSpec,
    collider_surface,
    grid_to_csv,
    markov_chain_surface,
    pair_matrix_to_csv,
    parse_cli_test,
    parse_grid_spec,
    run_grid,
    run_pair_matrix,
    serialize_test,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _sidecar(path: Path, args: argparse.Namespace, extra=None) -> None:
    meta = {
        "tool": "cimeta",
        "version": __version__,
        "command": args.command,
        "flags": {k: v for k, v in sorted(vars(args).items()) if k != "command"},
    }
    if extra:
        meta.update(extra)
    sidecar = path.with_name(path.name + ".meta.json")
    sidecar.write_text(json.dumps(meta, sort_keys=True, default=str, indent=2) + "\n")


def _load_sem(args):
    if getattr(args, "sem_config", None):
        text = Path(args.sem_config).read_text(encoding="utf-8")
        return parse_sem_config(text)
    if args.alpha1 is None or args.alpha2 is None or args.beta is None:
        raise ConfigError("provide --sem-config or all of --alpha1/--alpha2/--beta")
    return three_node_preset(args.alpha1, args.alpha2, args.beta)


def _load_cov(args):
    """Covariance from the input path: raw dataset CSV or, with --covariance,
    a square labeled matrix CSV."""
    if getattr(args, "covariance", False):
        return read_covariance_csv(args.input)
    return empirical_covariance(read_dataset_csv(args.input))


def _add_sem_flags(p):
    p.add_argument("--sem-config", help="SEM config file (key-value format)")
    p.add_argument("--alpha1", type=float, help="three-node preset A->B coefficient")
    p.add_argument("--alpha2", type=float, help="three-node preset A->C coefficient")
    p.add_argument("--beta", type=float, help="three-node preset B->C coefficient")


def cmd_simulate(args) -> int:
    sem = _load_sem(args)
    data = sample(sem, args.n, args.seed)
    out = Path(args.out)
    write_dataset_csv(data, out)
    _sidecar(out, args)
    print(f"wrote {data.n} rows x {len(data.columns)} columns to {out}")
    return 0


def cmd_citest(args) -> int:
    data = read_dataset_csv(args.input)
    test = parse_cli_test(args.test)
    outcome = fisher_z_test(data, test, args.alpha)
    verdict = "reject" if outcome.reject else "fail to reject"
    if args.csv:
        print("test,r,z_stat,n_effective,reject,alpha")
        print(
            f"{serialize_test(test)},{outcome.r!r},{outcome.z_stat!r},"
            f"{outcome.n_effective},{outcome.reject},{outcome.alpha_level!r}"
        )
    else:
        print(f"test {test}: r = {outcome.r:.6f}, z = {outcome.z_stat:.4f} -> {verdict}")
    return 0


def cmd_project(args) -> int:
    cov = _load_cov(args)
    test = parse_cli_test(args.test)
    result = project_ci(cov, test)
    print(f"divergence D(P||P_perp) = I_P({test}) = {result.divergence:.10f} nats")
    if args.out:
        out = Path(args.out)
        write_covariance_csv(result.projected, out)
        _sidecar(out, args)
        print(f"wrote projected covariance to {out}")
    return 0


def cmd_cimd(args) -> int:
    cov = _load_cov(args)
    t1 = parse_cli_test(args.t1)
    t2 = parse_cli_test(args.t2)
    value = cimd_lim(cov, t1, t2, args.cutoff)
    if args.csv:
        lines = [
            "t1,t2,raw,i_p_t1,i_proj_t1,limited,limited_active",
            f"{serialize_test(t1)},{serialize_test(t2)},{value.raw!r},"
            f"{value.i_p_t1!r},{value.i_proj_t1!r},{value.limited!r},{value.limited_active}",
        ]
        text = "\n".join(lines) + "\n"
        if args.out:
            Path(args.out).write_text(text)
            _sidecar(Path(args.out), args)
        else:
            print(text, end="")
    else:
        print(f"CIMD({t1} ; {t2})")
        print(f"  I_P(t1)            = {value.i_p_t1:.10f}")
        print(f"  I_P_perp_t2(t1)    = {value.i_proj_t1:.10f}")
        print(f"  raw                = {value.raw:.10f}")
        print(f"  limited (cutoff {args.cutoff:g}) = {value.limited:.10f}"
              f" [{'active' if value.limited_active else 'zeroed'}]")
    return 0


def cmd_fscid(args) -> int:
    t1 = parse_cli_test(args.t1)
    t2 = parse_cli_test(args.t2)
    if args.input:
        data = read_dataset_csv(args.input)
        source = ReplicateSource.from_dataset(
            data, replicate_size=args.size, replicate_count=args.replicates,
            seed=args.seed, with_replacement=args.replace,
        )
    else:
        sem = _load_sem(args)
        source = ReplicateSource.from_sem(
            sem, replicate_size=args.size, replicate_count=args.replicates, seed=args.seed
        )
    report = run_fs_cid(source, t1, t2, args.alpha)
    if args.csv or args.out:
        text = report.CSV_HEADER + "\n" + report.csv_row() + "\n"
        if args.out:
            Path(args.out).write_text(text)
            _sidecar(Path(args.out), args)
            print(f"wrote {args.out}")
        else:
            print(text, end="")
    else:
        print(report)
    return 0


def _write_grid(result, path: Path, args, spec_text=None) -> None:
    path.write_text(grid_to_csv(result))
    extra = {"seed": result.spec.seed}
    if spec_text is not None:
        extra["spec_sha256"] = hashlib.sha256(spec_text.encode()).hexdigest()
    _sidecar(path, args, extra)
    print(f"wrote {path}")


def cmd_sweep(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.spec:
        spec_text = Path(args.spec).read_text(encoding="utf-8")
        spec = parse_grid_spec(spec_text)
        if args.seed is not None:
            from dataclasses import replace

            spec = replace(spec, seed=args.seed)
        _write_grid(run_grid(spec), out_dir / "grid.csv", args, spec_text)
        return 0
    if args.preset == "fig1":
        seed = args.seed if args.seed is not None else 0
        t_ac = CITestSpec("A", "C")
        t_bc = CITestSpec("B", "C")
        base = dict(fixed={"alpha1": 0.5},
                    axis1=Axis("alpha2", -0.5, 0.5, args.steps),
                    axis2=Axis("beta", -0.5, 0.5, args.steps))
        rho_grid = run_grid(GridSpec(measure="partial_correlation", t1=t_ac, **base))
        cimd_grid = run_grid(GridSpec(measure="cimd", t1=t_ac, t2=t_bc, **base))
        fs_base = dict(base, axis1=Axis("alpha2", -0.5, 0.5, args.fs_steps),
                       axis2=Axis("beta", -0.5, 0.5, args.fs_steps))
        fs_grid = run_grid(GridSpec(
            measure="fs_cid", t1=t_ac, t2=t_bc, seed=seed,
            replicates=args.replicates, replicate_size=args.size, **fs_base,
        ))
        _write_grid(rho_grid, out_dir / "fig1a.csv", args)
        _write_grid(cimd_grid, out_dir / "fig1b.csv", args)
        _write_grid(fs_grid, out_dir / "fig1c.csv", args)
        return 0
    if args.preset == "appendix-a":
        _write_grid(markov_chain_surface(steps=args.steps), out_dir / "appendix_a_chain.csv", args)
        _write_grid(collider_surface(steps=args.steps), out_dir / "appendix_a_collider.csv", args)
        return 0
    raise ConfigError("sweep needs --spec FILE or --preset {fig1,appendix-a}")


def cmd_pairs(args) -> int:
    cov = _load_cov(args)
    tests = enumerate_tests(cov.labels, args.max_cond)
    if args.measure == "fs_cid":
        data = read_dataset_csv(args.input)
        source = ReplicateSource.from_dataset(
            data, replicate_size=args.size, replicate_count=args.replicates, seed=args.seed
        )
        matrix = run_pair_matrix(tests, "fs_cid", source=source, alpha_level=args.alpha)
    else:
        matrix = run_pair_matrix(tests, args.measure, cov=cov, cutoff=args.cutoff)
    out = Path(args.out)
    out.write_text(pair_matrix_to_csv(matrix))
    _sidecar(out, args)
    print(f"wrote {len(tests)}x{len(tests)} {args.measure} matrix to {out}")
    return 0


def cmd_faithfulness(args) -> int:
    cov = _load_cov(args)
    dag = parse_dag_config(Path(args.dag).read_text(encoding="utf-8"))
    violations = audit_strong_faithfulness(cov, dag, args.lam, args.max_cond)
    if not violations:
        print(f"no lambda-strong-faithfulness violations at lambda = {args.lam:g}")
        return 0
    print(f"{len(violations)} violation(s) at lambda = {args.lam:g}:")
    for v in violations:
        print(f"  {v.test}: |rho| = {abs(v.partial_corr):.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cimeta", description=__doc__)
    parser.add_argument("--version", action="version", version=f"cimeta {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample a dataset from an SEM", parents=[])
    _add_sem_flags(p)
    p.add_argument("-n", type=int, required=True, help="number of rows")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("citest", help="Fisher-Z conditional independence test")
    p.add_argument("input", help="dataset CSV")
    p.add_argument("--test", required=True, help="test spec A,B|C1,C2")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_citest)

    p = sub.add_parser("project", help="project a covariance onto a CI constraint")
    p.add_argument("input", help="dataset CSV (or covariance CSV with --covariance)")
    p.add_argument("--covariance", action="store_true")
    p.add_argument("--test", required=True)
    p.add_argument("--out", help="write projected covariance CSV here")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("cimd", help="meta-dependence between two CI tests")
    p.add_argument("input")
    p.add_argument("--covariance", action="store_true")
    p.add_argument("--t1", required=True)
    p.add_argument("--t2", required=True)
    p.add_argument("--cutoff", type=float, default=DEFAULT_CUTOFF)
    p.add_argument("--csv", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cimd)

    p = sub.add_parser("fscid", help="bootstrap co-occurrence of two CI tests")
    p.add_argument("input", nargs="?", help="dataset CSV to subsample (else use an SEM)")
    _add_sem_flags(p)
    p.add_argument("--t1", required=True)
    p.add_argument("--t2", required=True)
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--size", type=int, default=20)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replace", action="store_true",
                   help="subsample with replacement (sensitivity analysis)")
    p.add_argument("--csv", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fscid)

    p = sub.add_parser("sweep", help="parameter-grid experiment")
    p.add_argument("--spec", help="sweep spec file")
    p.add_argument("--preset", choices=["fig1", "appendix-a"])
    p.add_argument("--out-dir", default=".")
    p.add_argument("--seed", type=int)
    p.add_argument("--steps", type=int, default=21)
    p.add_argument("--fs-steps", type=int, default=11)
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--size", type=int, default=20)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pairs", help="all-pairs test matrix of a measure")
    p.add_argument("input")
    p.add_argument("--covariance", action="store_true")
    p.add_argument("--max-cond", type=int, default=1)
    p.add_argument("--measure", choices=["cimd", "cimd_lim", "fs_cid"], default="cimd_lim")
    p.add_argument("--cutoff", type=float, default=DEFAULT_CUTOFF)
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--size", type=int, default=50)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("faithfulness", help="lambda-strong-faithfulness audit")
    p.add_argument("input")
    p.add_argument("--covariance", action="store_true")
    p.add_argument("--dag", required=True, help="DAG config file")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--max-cond", type=int, default=1)
    p.set_defaults(func=cmd_faithfulness)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"cimeta: parse error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cimeta: io error: {exc}", file=sys.stderr)
        return 1
    except CimetaError as exc:
        print(f"cimeta: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
