"""Forward model of the multiplexed write/read photon-counting experiment.

The model is deliberately linearized: every event probability is defined by
the same structural relations the estimators invert, so that on
probability-exact ("analytic mode") data the inference pipeline recovers the
ground-truth populations identically.  Finite statistics enter only through
binomial/multinomial sampling of joint events.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .data import AodConfig, AodKind, CountsDataset, CountsRecord, EventProbabilities
from .inference import PopulationEstimate
from .states import ModeWeights

# weak-pumping ceiling; beyond this the Poisson tail bound is meaningless
LAMBDA_MAX = 0.5

_POISSON_CUTOFF = 80


class InvalidPlanError(ValueError):
    """Campaign plan is missing configurations the inference needs."""


@dataclass(frozen=True)
class ExperimentModel:
    """Parametric noise model of the micro-ensemble array.

    lam is the mean pair-excitation number per write pulse; eta the
    per-ensemble overall retrieval-to-click efficiency; memory_loss the
    probability that a stored excitation decays to vacuum before read-out.
    """

    n_modes: int
    lam: float
    excite_weights: ModeWeights
    eta: tuple[float, ...]
    signal_efficiency: float = 0.16
    signal_dark: float = 0.0
    idler_dark: float = 0.0
    memory_loss: float = 0.0
    trials: int = 1_000_000

    def __post_init__(self):
        if not (0.0 <= self.lam < LAMBDA_MAX):
            raise ValueError(f"lam must be in [0, {LAMBDA_MAX}), got {self.lam}")
        if self.excite_weights.n_modes != self.n_modes or len(self.eta) != self.n_modes:
            raise ValueError("excite_weights and eta must match n_modes")
        for name in ("signal_efficiency", "signal_dark", "idler_dark", "memory_loss"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v} outside [0, 1]")
        if any(not (0.0 <= e <= 1.0) for e in self.eta):
            raise ValueError("eta entries must be in [0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be positive")


def herald_probability(model: ExperimentModel) -> float:
    """Per-trial probability of a signal click in the collective configuration."""
    p_true = 1.0 - math.exp(-model.lam * model.signal_efficiency)
    return 1.0 - (1.0 - p_true) * (1.0 - model.signal_dark)


def _conditional_sectors(model: ExperimentModel) -> tuple[float, float, float, float]:
    """Heralded-state sector populations (p0, p1, p2) and the truncated tail.

    Conditioned on a herald: a dark-only click leaves vacuum; a true click
    leaves a Poisson-distributed (n >= 1) excitation number in the single
    pumped collective mode, thinned by the memory loss.  Populations are
    renormalized onto the <= 2 excitation sectors; the discarded tail mass
    is returned for diagnostics.
    """
    lam, m = model.lam, model.memory_loss
    p_true = 1.0 - math.exp(-lam * model.signal_efficiency)
    p_s = herald_probability(model)
    w_true = p_true / p_s if p_s > 0 else 0.0

    r = [0.0, 0.0, 0.0]  # survivor-count probabilities given a true click
    tail = 0.0
    if lam > 0:
        norm = -math.expm1(-lam)  # 1 - e^-lam
        logfact = 0.0
        for n in range(1, _POISSON_CUTOFF + 1):
            logfact += math.log(n)
            q_n = math.exp(n * math.log(lam) - lam - logfact) / norm
            for j in range(0, 3):
                if j <= n:
                    r[j] += q_n * math.comb(n, j) * (1 - m) ** j * m ** (n - j)
        tail = max(0.0, 1.0 - sum(r))

    p0_raw = w_true * r[0] + (1.0 - w_true)
    p1_raw = w_true * r[1]
    p2_raw = w_true * r[2]
    total = p0_raw + p1_raw + p2_raw
    return p0_raw / total, p1_raw / total, p2_raw / total, w_true * tail


def _w_overlap_amp(model: ExperimentModel) -> complex:
    """<W_N (zero phase)| a_e^dag |0> for the pumped collective mode."""
    u = model.excite_weights.amplitudes()
    return complex(np.sum(u) / math.sqrt(model.n_modes))


def _detection_mode(model: ExperimentModel, modes: Optional[Sequence[int]]):
    """Combined-idler detection mode: total transfer T and overlap with a_e.

    The idler network combines the selected modes with equal weight; each
    selected ensemble contributes transfer eta_i / n_selected.
    """
    sel = tuple(range(model.n_modes)) if modes is None else tuple(modes)
    eta = np.asarray([model.eta[i] for i in sel])
    t = eta / len(sel)
    big_t = float(t.sum())
    if big_t <= 0:
        return sel, 0.0, 0.0
    t_prime = t / big_t
    u = model.excite_weights.amplitudes()
    c1 = complex(np.sum(np.sqrt(t_prime) * u[list(sel)]))
    return sel, big_t, abs(c1) ** 2


def ground_truth(model: ExperimentModel) -> PopulationEstimate:
    """Exact conditional populations and fidelity implied by the model."""
    p0, p1, p2, tail = _conditional_sectors(model)
    overlap_sq = abs(_w_overlap_amp(model)) ** 2
    f = p1 * overlap_sq

    # photonic-side values as an ideal (dark-free) detector would see them
    u_abs2 = np.abs(model.excite_weights.amplitudes()) ** 2
    eta = np.asarray(model.eta)
    p1p = float(np.sum(eta * u_abs2) * (p1 + 2 * p2))
    alpha3 = 2.0 * p2 / p1**2 if p1 > 0 else 0.0
    p2p = alpha3 * p1p**2 / 2.0
    _, big_t, c1_sq = _detection_mode(model, None)
    fp = big_t * (p1 + 2 * p2) * c1_sq
    return PopulationEstimate(
        p0=p0, p1=p1, p2=p2, F=f,
        p0p=1.0 - p1p - p2p, p1p=p1p, p2p=p2p, Fp=fp,
        alpha3=alpha3,
        lambda_poisson=2.0 * p2 / p1 if p1 > 0 else 0.0,
        corrected=False,
        tail=tail,
    )


def _or_dark(p: float, dark: float) -> float:
    return 1.0 - (1.0 - p) * (1.0 - dark)


def event_probabilities(model: ExperimentModel, config: AodConfig) -> EventProbabilities:
    """Per-trial event probabilities for one coupling configuration."""
    n = model.n_modes
    p0, p1, p2, _ = _conditional_sectors(model)
    u_abs2 = np.abs(model.excite_weights.amplitudes()) ** 2

    if config.kind is AodKind.CALIBRATE:
        i = config.index
        w_i, eta_i = float(u_abs2[i]), model.eta[i]
        p_s = min(1.0, model.lam * w_i * model.signal_efficiency + model.signal_dark)
        p_i = min(1.0, model.lam * w_i * eta_i * (1 - model.memory_loss) + model.idler_dark)
        # random coincidences plus the retrieved-signal term; the retrieval
        # estimator inverts exactly this relation
        p_si = min(eta_i * p_s + p_s * p_i, p_s, p_i)
        return EventProbabilities(config, {"s": p_s, "i": p_i, "si": p_si})

    if config.kind is AodKind.POPULATION:
        i = config.index
        # rho_1 and rho_2 live in the single pumped mode, so the double
        # excitation terms collapse to 2*p2*|u_i|^2
        q_true = model.eta[i] * float(u_abs2[i]) * (p1 + 2 * p2)
        return EventProbabilities(config, {"click": _or_dark(q_true, model.idler_dark)})

    if config.kind is AodKind.FIDELITY:
        _, big_t, c1_sq = _detection_mode(model, None)
        q_true = big_t * (p1 + 2 * p2) * c1_sq
        return EventProbabilities(config, {"click": _or_dark(q_true, model.idler_dark)})

    if config.kind is AodKind.THREE_PHOTON:
        _, big_t, c1_sq = _detection_mode(model, config.detect_modes)
        q1 = herald_probability(model)
        d = model.idler_dark
        t2 = (big_t / 2.0) * c1_sq * p1              # single-photon arm click
        t23 = p2 * (big_t**2 / 2.0) * c1_sq**2        # both arms, double excitation
        t23 = min(t23, t2)
        r2 = _or_dark(t2, d)
        r23 = t23 + 2.0 * (t2 - t23) * d + (1.0 - 2.0 * t2 + t23) * d * d
        return EventProbabilities(
            config,
            {"d1": q1, "d12": q1 * r2, "d13": q1 * r2, "d123": q1 * r23},
        )

    raise ValueError(f"unknown configuration kind {config.kind!r}")


def sample_counts(
    probs: EventProbabilities, trials: int, seed: int, analytic: bool = False
) -> CountsRecord:
    """Draw one counts record; joint events are sampled jointly.

    In analytic mode the expected (real-valued) counts are emitted instead,
    which makes downstream estimators exact.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = probs.probs
    kind = probs.config.kind
    if analytic:
        counts = {label: p[label] * trials for label in p}
        return CountsRecord(probs.config, trials, counts, seed)

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if kind is AodKind.CALIBRATE:
        p_s, p_i, p_si = p["s"], p["i"], p["si"]
        cells = [p_si, p_s - p_si, p_i - p_si]
        cells.append(max(0.0, 1.0 - sum(cells)))
        n_si, n_sonly, n_ionly, _ = rng.multinomial(trials, cells)
        counts = {"s": int(n_si + n_sonly), "i": int(n_si + n_ionly), "si": int(n_si)}
    elif kind in (AodKind.POPULATION, AodKind.FIDELITY):
        counts = {"click": int(rng.binomial(trials, p["click"]))}
    else:  # THREE_PHOTON
        q1, q12, q13, q123 = p["d1"], p["d12"], p["d13"], p["d123"]
        n1 = int(rng.binomial(trials, q1))
        if n1 == 0 or q1 == 0.0:
            counts = {"d1": n1, "d12": 0, "d13": 0, "d123": 0}
        else:
            cells = [q123 / q1, (q12 - q123) / q1, (q13 - q123) / q1]
            cells.append(max(0.0, 1.0 - sum(cells)))
            n123, n2only, n3only, _ = rng.multinomial(n1, cells)
            counts = {
                "d1": n1,
                "d12": int(n123 + n2only),
                "d13": int(n123 + n3only),
                "d123": int(n123),
            }
    return CountsRecord(probs.config, trials, counts, seed)


def default_plan(model: ExperimentModel, three_photon_factor: int = 2000) -> list[tuple[AodConfig, int]]:
    """Every configuration the inference pipeline requires, at model.trials.

    Triple coincidences are ~3 orders of magnitude rarer than heralded
    singles, so the THREE_PHOTON configuration gets a trial multiplier
    (sampling cost does not grow with the trial count).
    """
    plan: list[tuple[AodConfig, int]] = []
    for i in range(model.n_modes):
        plan.append((AodConfig(AodKind.CALIBRATE, i), model.trials))
    for i in range(model.n_modes):
        plan.append((AodConfig(AodKind.POPULATION, i), model.trials))
    plan.append((AodConfig(AodKind.FIDELITY), model.trials))
    plan.append((AodConfig(AodKind.THREE_PHOTON), model.trials * three_photon_factor))
    return plan


def _record_seed(seed: int, idx: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(idx,)).generate_state(1, np.uint64)[0])


def run_campaign(
    model: ExperimentModel,
    plan: Sequence[tuple[AodConfig, int]],
    seed: int,
    analytic: bool = False,
    strict: bool = True,
) -> CountsDataset:
    """Sample one record per plan entry with independently derived sub-seeds."""
    if strict:
        have = {(cfg.kind, cfg.index) for cfg, _ in plan}
        need = {(AodKind.CALIBRATE, i) for i in range(model.n_modes)}
        need |= {(AodKind.POPULATION, i) for i in range(model.n_modes)}
        need |= {(AodKind.FIDELITY, -1), (AodKind.THREE_PHOTON, -1)}
        missing = need - have
        if missing:
            raise InvalidPlanError(f"plan missing configurations: {sorted(missing)}")
    records = []
    for idx, (cfg, trials) in enumerate(plan):
        probs = event_probabilities(model, cfg)
        records.append(sample_counts(probs, trials, _record_seed(seed, idx), analytic=analytic))
    return CountsDataset(n_modes=model.n_modes, records=records)
