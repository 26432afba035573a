"""Finite-Sample CI Dependence: bootstrap co-occurrence of CI-test outcomes.

Draws many small replicate datasets (fresh SEM samples or subsamples of a
source dataset), runs both Fisher-Z tests per replicate, and reports the
covariance of the two failure-to-reject indicators:

    fs_cid = p(t1 and t2) - p(t1) * p(t2)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .citest import Dataset, empirical_covariance, fisher_z_from_covariance
from .covariance import CITestSpec
from .errors import (
    AllReplicatesDegenerate,
    CimetaError,
    DimensionMismatch,
    InvalidSubsampleSize,
)
from .sem import LinearSEM, sample_with_rng

DEFAULT_REPLICATES = 1000
DEFAULT_SYNTHETIC_SIZE = 20
DEFAULT_SUBSAMPLE_SIZE = 50


@dataclass(frozen=True)
class ReplicateSource:
    """Where bootstrap replicates come from: an SEM sampler or a dataset subsampler."""

    sem: LinearSEM | None
    source_data: Dataset | None
    replicate_size: int
    replicate_count: int
    seed: int
    with_replacement: bool = False  # only meaningful for dataset subsampling

    def __post_init__(self) -> None:
        if (self.sem is None) == (self.source_data is None):
            raise DimensionMismatch("exactly one of sem / source_data must be given")
        if self.replicate_count < 2:
            raise DimensionMismatch("replicate_count must be >= 2")
        if self.source_data is not None and not self.with_replacement:
            if self.replicate_size > self.source_data.n:
                raise InvalidSubsampleSize(
                    f"replicate size {self.replicate_size} exceeds source rows "
                    f"{self.source_data.n}"
                )
        if self.replicate_size < 2:
            raise InvalidSubsampleSize("replicate size must be >= 2")

    @classmethod
    def from_sem(cls, sem: LinearSEM, replicate_size=DEFAULT_SYNTHETIC_SIZE,
                 replicate_count=DEFAULT_REPLICATES, seed=0):
        return cls(sem=sem, source_data=None, replicate_size=replicate_size,
                   replicate_count=replicate_count, seed=seed)

    @classmethod
    def from_dataset(cls, data: Dataset, replicate_size=DEFAULT_SUBSAMPLE_SIZE,
                     replicate_count=DEFAULT_REPLICATES, seed=0, with_replacement=False):
        return cls(sem=None, source_data=data, replicate_size=replicate_size,
                   replicate_count=replicate_count, seed=seed,
                   with_replacement=with_replacement)


@dataclass(frozen=True)
class FsCidReport:
    t1: CITestSpec
    t2: CITestSpec
    p_t1: float
    p_t2: float
    p_joint: float
    fs_cid: float
    replicate_count: int  # replicates that produced outcomes
    attrition: int  # replicates dropped as degenerate

    CSV_HEADER = "t1,t2,p_t1,p_t2,p_joint,fs_cid,attrition,replicates"

    def csv_row(self) -> str:
        from .sweep import serialize_test

        return ",".join([
            serialize_test(self.t1),
            serialize_test(self.t2),
            repr(self.p_t1),
            repr(self.p_t2),
            repr(self.p_joint),
            repr(self.fs_cid),
            str(self.attrition),
            str(self.replicate_count),
        ])

    def __str__(self) -> str:
        return (
            f"FS-CID({self.t1} ; {self.t2}) = {self.fs_cid:.6f}\n"
            f"  p(fail-to-reject t1) = {self.p_t1:.4f}\n"
            f"  p(fail-to-reject t2) = {self.p_t2:.4f}\n"
            f"  p(joint)             = {self.p_joint:.4f}\n"
            f"  replicates = {self.replicate_count}, dropped = {self.attrition}"
        )


def subsample(data: Dataset, k: int, rng: np.random.Generator,
              with_replacement: bool = False) -> Dataset:
    """k rows chosen uniformly (without replacement by default)."""
    if k < 2 or (not with_replacement and k > data.n):
        raise InvalidSubsampleSize(f"subsample size {k} invalid for {data.n} rows")
    picks = rng.choice(data.n, size=k, replace=with_replacement)
    return Dataset(data.columns, data.rows[picks])


def replicate_indicators(source: ReplicateSource, tests, alpha_level: float = 0.05):
    """Failure-to-reject indicators per replicate and test.

    Returns (indicators, valid): indicators is (replicates x tests) of 0/1,
    valid marks replicates where every test produced an outcome. Replicate
    randomness uses per-replicate streams derived from the root seed.
    """
    tests = list(tests)
    streams = np.random.SeedSequence(source.seed).spawn(source.replicate_count)
    indicators = np.zeros((source.replicate_count, len(tests)), dtype=np.int8)
    valid = np.zeros(source.replicate_count, dtype=bool)
    for i, ss in enumerate(streams):
        rng = np.random.default_rng(ss)
        if source.sem is not None:
            data = sample_with_rng(source.sem, source.replicate_size, rng)
        else:
            data = subsample(source.source_data, source.replicate_size, rng,
                             source.with_replacement)
        try:
            cov = empirical_covariance(data)
            for j, test in enumerate(tests):
                outcome = fisher_z_from_covariance(cov, data.n, test, alpha_level)
                indicators[i, j] = 0 if outcome.reject else 1
        except CimetaError:
            continue
        valid[i] = True
    return indicators, valid


def fs_cid_from_indicators(ind1, ind2, t1, t2) -> FsCidReport:
    ind1 = np.asarray(ind1, dtype=float)
    ind2 = np.asarray(ind2, dtype=float)
    kept = len(ind1)
    p1 = float(np.sum(ind1)) / kept
    p2 = float(np.sum(ind2)) / kept
    p_joint = float(np.sum(ind1 * ind2)) / kept
    return FsCidReport(
        t1=t1, t2=t2, p_t1=p1, p_t2=p2, p_joint=p_joint,
        fs_cid=p_joint - p1 * p2, replicate_count=kept, attrition=0,
    )


def run_fs_cid(source: ReplicateSource, t1: CITestSpec, t2: CITestSpec,
               alpha_level: float = 0.05) -> FsCidReport:
    """Bootstrap both tests over the replicate source and report FS-CID."""
    indicators, valid = replicate_indicators(source, [t1, t2], alpha_level)
    kept = int(np.sum(valid))
    dropped = source.replicate_count - kept
    if kept == 0:
        raise AllReplicatesDegenerate(
            f"all {source.replicate_count} replicates failed both tests' preconditions"
        )
    report = fs_cid_from_indicators(indicators[valid, 0], indicators[valid, 1], t1, t2)
    return FsCidReport(
        t1=t1, t2=t2, p_t1=report.p_t1, p_t2=report.p_t2, p_joint=report.p_joint,
        fs_cid=report.fs_cid, replicate_count=kept, attrition=dropped,
    )
