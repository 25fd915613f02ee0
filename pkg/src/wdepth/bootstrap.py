"""Monte Carlo uncertainty quantification for the witness pipeline.

Counts are resampled Poissonian-ly around the observed values (the standard
counting-statistics approximation, even though the generating process is
binomial per trial), pushed through the full inference chain, and the witness
value distribution yields the negativity confidence and 68% intervals.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import CountsDataset, CountsRecord
from .inference import PopulationEstimate, full_pipeline
from .witness import WitnessParams, optimize_params, witness_value

DEFAULT_N_SAMPLES = 10_000

REPORT_QUANTITIES = ("p0", "p1", "p2", "F", "p0p", "p1p", "p2p", "Fp", "witness")


class UnstableStatisticsError(RuntimeError):
    """More than 10% of resamples failed inference."""


@dataclass(frozen=True)
class BootstrapResult:
    samples: tuple[tuple[PopulationEstimate, float], ...]
    confidence_negative: float
    interval68: dict[str, tuple[float, float]]
    n_samples: int
    seed: int
    n_failed: int = 0


def _sub_seed(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def resample(dataset: CountsDataset, seed: int) -> CountsDataset:
    """Poisson-resample every event count (mean = observed count).

    Trials are unchanged; draws above the trial count are clamped so record
    invariants hold.  Deterministic in the seed.
    """
    rng = np.random.default_rng(seed)
    records = []
    for rec in dataset.records:
        counts = {
            label: min(int(rng.poisson(c)), rec.trials)
            for label, c in rec.counts.items()
        }
        records.append(CountsRecord(config=rec.config, trials=rec.trials,
                                    counts=counts, seed=rec.seed))
    return CountsDataset(n_modes=dataset.n_modes, records=records)


def _percentiles(values) -> tuple[float, float]:
    lo, hi = np.percentile(np.asarray(values, dtype=float), [16.0, 84.0])
    return (float(lo), float(hi))


def bootstrap_pipeline(
    dataset: CountsDataset,
    params: WitnessParams,
    n_samples: int = DEFAULT_N_SAMPLES,
    seed: int = 0,
    correct: bool = False,
    reoptimize: bool = False,
    slack: float = 1e-9,
) -> BootstrapResult:
    """Propagate Poissonian count fluctuations through the full pipeline.

    Witness coefficients are held fixed by default (optimized once on the
    point estimate); with reoptimize=True they are re-fit on every resample,
    which is far slower and reported with the re-fit values.
    """
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    samples: list[tuple[PopulationEstimate, float]] = []
    n_failed = 0
    for i in range(n_samples):
        rng = _sub_seed(seed, i)
        sub = int(rng.integers(0, 2**63 - 1))
        try:
            est, _ = full_pipeline(resample(dataset, sub), correct=correct)
            p = params
            if reoptimize:
                res = optimize_params(est, params.k, params.n, slack=slack)
                p = res.params
            w = witness_value(p, est)
        except (ValueError, ArithmeticError):
            n_failed += 1
            continue
        samples.append((est, w))
    if n_failed > 0.10 * n_samples:
        raise UnstableStatisticsError(
            f"{n_failed}/{n_samples} resamples failed inference"
        )
    values = [w for _, w in samples]
    n_ok = len(samples)
    confidence = sum(1 for w in values if w < 0.0) / n_ok
    interval68 = {"witness": _percentiles(values)}
    for q in REPORT_QUANTITIES[:-1]:
        interval68[q] = _percentiles([getattr(est, q) for est, _ in samples])
    return BootstrapResult(
        samples=tuple(samples),
        confidence_negative=confidence,
        interval68=interval68,
        n_samples=n_samples,
        seed=seed,
        n_failed=n_failed,
    )


def confidence_and_intervals(result: BootstrapResult) -> dict:
    """Flat report record: negativity confidence plus 16/84 intervals."""
    if result.n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    report = {
        "confidence_negative": result.confidence_negative,
        "n_samples": result.n_samples,
        "n_failed": result.n_failed,
        "seed": result.seed,
    }
    for q in REPORT_QUANTITIES:
        lo, hi = result.interval68[q]
        report[f"{q}_interval68"] = [lo, hi]
    return report


def write_distribution(result: BootstrapResult, path) -> None:
    """Dump one witness value per line for external histogram plotting."""
    with open(path, "w") as fh:
        for _, w in result.samples:
            fh.write(f"{w!r}\n")
