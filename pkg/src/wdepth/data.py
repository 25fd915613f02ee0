"""Dataset interchange types shared by the simulator, estimators, and CLI.

A counts dataset is the single hand-off format between data producers (the
array simulator, or a future importer of real measurement records) and the
inference pipeline: one record per coupling configuration, holding integer
(or, in analytic mode, expected real-valued) event counts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional


class AodKind(str, Enum):
    """Coupling configuration of the write/signal/read/idler deflectors."""

    CALIBRATE = "CALIBRATE"        # individual write heralding + individual read-out
    POPULATION = "POPULATION"      # collective write heralding + individual idler
    FIDELITY = "FIDELITY"          # collective write + coherently combined idler
    THREE_PHOTON = "THREE_PHOTON"  # FIDELITY with 50/50-split idler (triple coincidence)


# event-count labels per configuration, fixed by dataset schema v1
EVENT_LABELS = {
    AodKind.CALIBRATE: ("s", "i", "si"),
    AodKind.POPULATION: ("click",),
    AodKind.FIDELITY: ("click",),
    AodKind.THREE_PHOTON: ("d1", "d12", "d13", "d123"),
}

SCHEMA_VERSION = "v1"


@dataclass(frozen=True)
class AodConfig:
    kind: AodKind
    index: int = -1  # ensemble index for CALIBRATE/POPULATION, -1 otherwise
    detect_modes: Optional[tuple[int, ...]] = None  # THREE_PHOTON detection basis

    def __post_init__(self):
        if self.kind in (AodKind.CALIBRATE, AodKind.POPULATION) and self.index < 0:
            raise ValueError(f"{self.kind.value} requires an ensemble index")
        if self.detect_modes is not None and self.kind is not AodKind.THREE_PHOTON:
            raise ValueError("detect_modes only applies to THREE_PHOTON")


@dataclass(frozen=True)
class EventProbabilities:
    config: AodConfig
    probs: dict[str, float]

    def __post_init__(self):
        expected = set(EVENT_LABELS[self.config.kind])
        if set(self.probs) != expected:
            raise ValueError(f"event labels {set(self.probs)} != {expected}")
        for label, p in self.probs.items():
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"probability {label}={p} outside [0, 1]")


@dataclass(frozen=True)
class CountsRecord:
    config: AodConfig
    trials: int
    counts: dict[str, float]
    seed: int

    def __post_init__(self):
        for label, c in self.counts.items():
            if c < 0 or c > self.trials:
                raise ValueError(f"count {label}={c} outside [0, trials={self.trials}]")


@dataclass
class CountsDataset:
    n_modes: int
    records: list[CountsRecord] = field(default_factory=list)

    def by_kind(self, kind: AodKind) -> list[CountsRecord]:
        return [r for r in self.records if r.config.kind is kind]

    def find(self, kind: AodKind, index: int = -1) -> Optional[CountsRecord]:
        for r in self.records:
            if r.config.kind is kind and r.config.index == index:
                return r
        return None
