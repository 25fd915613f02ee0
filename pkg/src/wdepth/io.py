"""File formats: run configs, line-delimited datasets, reports.

All writers sort keys and avoid timestamps so identical inputs produce
byte-identical files; every run is reproducible from its config and seed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .data import SCHEMA_VERSION, AodConfig, AodKind, CountsDataset, CountsRecord
from .simulator import ExperimentModel, default_plan
from .states import ModeWeights


class ConfigError(ValueError):
    """Malformed or incomplete run configuration."""


class DatasetFormatError(ValueError):
    """Dataset file violates the line-delimited schema."""


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one simulated campaign."""

    seed: int
    n_modes: int = 9
    lam: float = 0.0311
    eta: tuple[float, ...] = ()           # empty -> uniform eta_mean
    eta_mean: float = 0.04
    eta_disorder: float = 0.0             # relative, drawn from the seed
    weight_disorder: float = 0.0          # relative spread of |u_i|^2
    phase_disorder: float = 0.0           # radians, uniform half-width
    memory_loss: float = 0.0
    signal_efficiency: float = 0.16
    signal_dark: float = 0.0
    idler_dark: float = 0.0
    trials: int = 1_000_000
    three_photon_factor: int = 2000
    analytic: bool = False
    n_samples: int = 10_000
    slack: float = 1e-9
    schema_version: str = SCHEMA_VERSION


_BOOL = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}

_FIELD_PARSERS = {
    "seed": int,
    "n_modes": int,
    "lam": float,
    "eta": lambda s: tuple(float(x) for x in s.split(",") if x.strip()),
    "eta_mean": float,
    "eta_disorder": float,
    "weight_disorder": float,
    "phase_disorder": float,
    "memory_loss": float,
    "signal_efficiency": float,
    "signal_dark": float,
    "idler_dark": float,
    "trials": int,
    "three_photon_factor": int,
    "analytic": lambda s: _BOOL[s.lower()],
    "n_samples": int,
    "slack": float,
    "schema_version": str,
}


def parse_config(text: str) -> RunConfig:
    """Parse `key = value` lines; `#` starts a comment, blank lines ignored."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _FIELD_PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _FIELD_PARSERS[key](val)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {val!r}") from exc
    if "seed" not in values:
        raise ConfigError("config must set a seed (no entropy-source defaults)")
    cfg = RunConfig(**values)
    if cfg.schema_version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {cfg.schema_version!r}")
    return cfg


def read_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def build_model(cfg: RunConfig) -> ExperimentModel:
    """Instantiate the simulator model, drawing any disorder from the seed."""
    n = cfg.n_modes
    rng = np.random.default_rng(np.random.SeedSequence(entropy=cfg.seed, spawn_key=(0xD150,)))
    w = np.full(n, 1.0 / n)
    if cfg.weight_disorder > 0.0:
        w = w * (1.0 + cfg.weight_disorder * rng.uniform(-1.0, 1.0, n))
        w = np.clip(w, 1e-12, None)
        w /= w.sum()
    phases = np.zeros(n)
    if cfg.phase_disorder > 0.0:
        phases = rng.uniform(-cfg.phase_disorder, cfg.phase_disorder, n)
    if cfg.eta:
        if len(cfg.eta) != n:
            raise ConfigError(f"eta has {len(cfg.eta)} entries, expected {n}")
        eta = np.asarray(cfg.eta, dtype=float)
    else:
        eta = np.full(n, cfg.eta_mean)
        if cfg.eta_disorder > 0.0:
            eta = eta * (1.0 + cfg.eta_disorder * rng.uniform(-1.0, 1.0, n))
    return ExperimentModel(
        n_modes=n,
        lam=cfg.lam,
        excite_weights=ModeWeights(weights=tuple(w), phases=tuple(phases)),
        eta=tuple(eta),
        signal_efficiency=cfg.signal_efficiency,
        signal_dark=cfg.signal_dark,
        idler_dark=cfg.idler_dark,
        memory_loss=cfg.memory_loss,
        trials=cfg.trials,
    )


# ---------------------------------------------------------------------------
# dataset files: one JSON header line, then one JSON record per line

def _config_to_json(config: AodConfig) -> dict:
    d = {"kind": config.kind.value, "index": config.index}
    if config.detect_modes is not None:
        d["detect_modes"] = list(config.detect_modes)
    return d


def _config_from_json(d: dict) -> AodConfig:
    detect = d.get("detect_modes")
    return AodConfig(
        kind=AodKind(d["kind"]),
        index=d.get("index", -1),
        detect_modes=tuple(detect) if detect is not None else None,
    )


def write_dataset(dataset: CountsDataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        header = {"schema_version": SCHEMA_VERSION, "n_modes": dataset.n_modes}
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for rec in dataset.records:
            row = {
                "config": _config_to_json(rec.config),
                "trials": rec.trials,
                "counts": rec.counts,
                "seed": rec.seed,
            }
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def read_dataset(path) -> CountsDataset:
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise DatasetFormatError(f"{path}: empty dataset file")
    try:
        header = json.loads(lines[0])
        if header.get("schema_version") != SCHEMA_VERSION:
            raise DatasetFormatError(
                f"{path}: unsupported schema_version {header.get('schema_version')!r}"
            )
        records = []
        for ln in lines[1:]:
            row = json.loads(ln)
            records.append(
                CountsRecord(
                    config=_config_from_json(row["config"]),
                    trials=row["trials"],
                    counts=row["counts"],
                    seed=row["seed"],
                )
            )
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        if isinstance(exc, DatasetFormatError):
            raise
        raise DatasetFormatError(f"{path}: {exc}") from exc
    return CountsDataset(n_modes=header["n_modes"], records=records)


# ---------------------------------------------------------------------------
# reports

def write_json(obj: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_keyvalue(obj: dict, path) -> None:
    """Flat `key = value` report; lists rendered comma-separated."""
    with open(path, "w", encoding="utf-8") as fh:
        for key in sorted(obj):
            val = obj[key]
            if isinstance(val, (list, tuple)):
                val = ",".join(repr(v) for v in val)
            fh.write(f"{key} = {val!r}\n" if isinstance(val, str) else f"{key} = {val}\n")


def histogram_csv(values, path, n_bins: int = 100) -> None:
    """Fixed-rule histogram (n_bins equal bins over [min, max]) as CSV."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("no values to histogram")
    lo, hi = float(arr.min()), float(arr.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    counts, edges = np.histogram(arr, bins=n_bins, range=(lo, hi))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("bin_left,bin_right,count\n")
        for c, left, right in zip(counts, edges[:-1], edges[1:]):
            fh.write(f"{left!r},{right!r},{int(c)}\n")
