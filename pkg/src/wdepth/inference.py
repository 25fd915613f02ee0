"""Estimators turning photon-counting records into state populations.

The chain mirrors the measurement analysis: calibrate per-ensemble retrieval
efficiencies, form the normalized three-photon correlation, sum the
per-ensemble click probabilities into photonic populations, invert to
spin-wave populations, lower-bound the fidelity from the combined-mode click
rate, and finally renormalize for excitation numbers above two under
Poissonian pumping.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .data import AodKind, CountsDataset

ETA_FLOOR = 1e-6


class NoHeraldError(ValueError):
    """Calibration record has zero heralds."""


class InsufficientCoincidencesError(ValueError):
    """Three-photon correlation denominator is zero."""


class InvalidDataError(ValueError):
    """Counts violate the model's structural bounds."""


class ModelViolationError(ValueError):
    """Weak-pumping assumption broken (Poisson parameter >= 1)."""


class IncompleteDatasetError(ValueError):
    """Dataset is missing configurations the pipeline requires."""

    def __init__(self, missing):
        self.missing = sorted(missing)
        super().__init__(f"dataset missing configurations: {self.missing}")


@dataclass(frozen=True)
class PopulationEstimate:
    """Spin-wave populations (efficiency-corrected) and photonic ones (raw).

    F is a certified lower bound on the W-state fidelity; Fp is the directly
    measured photonic fidelity.  ``tail`` carries the simulator's truncated
    higher-order mass when known (diagnostics only).
    """

    p0: float
    p1: float
    p2: float
    F: float
    p0p: float = 0.0
    p1p: float = 0.0
    p2p: float = 0.0
    Fp: float = 0.0
    alpha3: float = 0.0
    lambda_poisson: float = 0.0
    corrected: bool = False
    warnings: tuple[str, ...] = ()
    tail: float = 0.0

    def photonic_view(self) -> "PopulationEstimate":
        """Copy with the photonic set moved into the primary slots, for
        optimizing/evaluating the photonic witness."""
        return replace(self, p0=self.p0p, p1=self.p1p, p2=self.p2p, F=self.Fp)


@dataclass(frozen=True)
class CalibrationTable:
    eta: tuple[float, ...]
    T: float              # sum of per-ensemble transfers eta_i / N
    overlap_sq: float     # |<detection mode | ideal W>|^2
    warnings: tuple[str, ...] = ()

    @property
    def n_modes(self) -> int:
        return len(self.eta)


def retrieval_efficiency(p_s: float, p_i: float, p_si: float, warnings: list[str] | None = None) -> float:
    """Retrieval efficiency from singles and coincidence rates.

    Subtracts the random-coincidence background; non-positive results (all
    coincidences explained by accidentals) are clamped to a small floor and
    flagged so bootstrap resamples never abort.
    """
    if p_s <= 0.0:
        raise NoHeraldError("P_S must be positive")
    eta = p_si / p_s - p_i
    if eta <= 0.0:
        if warnings is not None:
            warnings.append(f"degenerate calibration: eta={eta:.3e} clamped to {ETA_FLOOR}")
        return ETA_FLOOR
    return eta


def three_photon_alpha(q1: float, q12: float, q13: float, q123: float) -> float:
    """Normalized triple-coincidence ratio q1*q123 / (q12*q13).

    Detector and transfer efficiencies cancel between numerator and
    denominator, making this an efficiency-independent double-excitation
    measure.
    """
    if q12 <= 0.0 or q13 <= 0.0:
        raise InsufficientCoincidencesError("q12 and q13 must be positive")
    return q1 * q123 / (q12 * q13)


def photonic_populations(q_list, alpha3: float) -> tuple[float, float, float]:
    """(p0', p1', p2') of the retrieved photonic modes, no efficiency correction."""
    if len(q_list) == 0:
        raise InvalidDataError("q_list must be non-empty")
    if any(q < 0 for q in q_list):
        raise InvalidDataError("click probabilities must be non-negative")
    p1p = float(sum(q_list))
    if p1p > 1.0:
        raise InvalidDataError(f"summed click probability {p1p} exceeds 1")
    p2p = alpha3 * p1p**2 / 2.0
    return (1.0 - p1p - p2p, p1p, p2p)


def spinwave_populations(q_list, cal: CalibrationTable, alpha3: float,
                         warnings: list[str] | None = None) -> tuple[float, float, float]:
    """Efficiency-corrected (p0, p1, p2) for the spin-wave modes.

    S = sum q_i/eta_i equals p1 + 2*p2; combined with p2 = alpha*p1^2/2 this
    gives a quadratic whose unique non-negative root is taken (the alpha -> 0
    limit is handled analytically).
    """
    if len(q_list) != cal.n_modes:
        raise InvalidDataError("q_list length must match calibration table")
    if any(e <= 0 for e in cal.eta):
        raise InvalidDataError("calibrated efficiencies must be positive")
    if alpha3 < 0:
        raise InvalidDataError("alpha3 must be non-negative")
    s = float(sum(q / e for q, e in zip(q_list, cal.eta)))
    if s > 1.0 + alpha3:
        raise InvalidDataError(f"S={s} exceeds the p1 + 2*p2 bound {1.0 + alpha3}")
    if alpha3 > 0.0:
        p1 = (-1.0 + math.sqrt(1.0 + 4.0 * alpha3 * s)) / (2.0 * alpha3)
    else:
        p1 = s
    p2 = alpha3 * p1**2 / 2.0
    p0 = 1.0 - p1 - p2
    if p0 < -1e-6:
        raise InvalidDataError(f"negative vacuum population p0={p0}")
    if p0 < 0.0:
        if warnings is not None:
            warnings.append(f"p0={p0:.3e} clamped to 0")
        p0 = 0.0
    return (p0, p1, p2)


def fidelity_lower_bound(q_f: float, cal: CalibrationTable, p1: float, p2: float) -> float:
    """Lower bound on the W-state fidelity from the combined-mode click rate.

    The detection projects onto the efficiency-weighted state, so the
    measured rate bounds the true fidelity from below after multiplying by
    the weighted-to-uniform overlap.
    """
    if cal.T <= 0.0:
        raise InvalidDataError("total transfer efficiency must be positive")
    if p1 <= 0.0:
        raise InvalidDataError("p1 must be positive for the fidelity bound")
    if q_f < 0.0:
        raise InvalidDataError("q_f must be non-negative")
    return p1 * q_f * cal.overlap_sq / (cal.T * (p1 + 2.0 * p2))


def higher_order_correction(est: PopulationEstimate) -> PopulationEstimate:
    """Renormalize populations and fidelity for excitations above two.

    Under Poissonian pumping with parameter lambda = 2*p2/p1, the mass above
    two excitations is bounded by p3/(1 - lambda); all spin-wave quantities
    shrink by 1/(1 + bound).
    """
    if est.corrected:
        raise InvalidDataError("estimate already corrected")
    if est.p1 <= 0.0:
        raise InvalidDataError("p1 must be positive for the Poisson correction")
    lam = 2.0 * est.p2 / est.p1
    if lam >= 1.0:
        raise ModelViolationError(f"Poisson parameter lambda={lam} >= 1")
    p3 = est.p1 * lam**2 / 6.0
    tail_bound = p3 / (1.0 - lam)
    factor = 1.0 / (1.0 + tail_bound)
    return replace(
        est,
        p0=est.p0 * factor,
        p1=est.p1 * factor,
        p2=est.p2 * factor,
        F=est.F * factor,
        lambda_poisson=lam,
        corrected=True,
    )


def _freq(record, label: str) -> float:
    return record.counts[label] / record.trials


def full_pipeline(dataset: CountsDataset, correct: bool = False) -> tuple[PopulationEstimate, CalibrationTable]:
    """Chain all estimators over one complete dataset.

    With correct=True the higher-order Poisson renormalization is applied to
    the spin-wave quantities as a final step; the default leaves them raw so
    exactness against a truncated ground truth is preserved.
    """
    n = dataset.n_modes
    missing = []
    cal_recs, pop_recs = [], []
    for i in range(n):
        r = dataset.find(AodKind.CALIBRATE, i)
        if r is None:
            missing.append(("CALIBRATE", i))
        cal_recs.append(r)
        r = dataset.find(AodKind.POPULATION, i)
        if r is None:
            missing.append(("POPULATION", i))
        pop_recs.append(r)
    fid_rec = dataset.find(AodKind.FIDELITY)
    if fid_rec is None:
        missing.append(("FIDELITY", -1))
    tp_rec = dataset.find(AodKind.THREE_PHOTON)
    if tp_rec is None:
        missing.append(("THREE_PHOTON", -1))
    if missing:
        raise IncompleteDatasetError(missing)

    warnings: list[str] = []
    eta = tuple(
        retrieval_efficiency(_freq(r, "s"), _freq(r, "i"), _freq(r, "si"), warnings)
        for r in cal_recs
    )
    big_t = sum(eta) / n
    t_prime = [e / (n * big_t) for e in eta]
    overlap_sq = sum(math.sqrt(tp / n) for tp in t_prime) ** 2
    cal = CalibrationTable(eta=eta, T=big_t, overlap_sq=overlap_sq, warnings=tuple(warnings))

    if tp_rec.counts["d123"] == 0:
        alpha3 = 0.0
    else:
        alpha3 = three_photon_alpha(
            _freq(tp_rec, "d1"), _freq(tp_rec, "d12"), _freq(tp_rec, "d13"), _freq(tp_rec, "d123")
        )

    q_list = [_freq(r, "click") for r in pop_recs]
    p0p, p1p, p2p = photonic_populations(q_list, alpha3)
    q_f = _freq(fid_rec, "click")

    p0, p1, p2 = spinwave_populations(q_list, cal, alpha3, warnings)
    f = fidelity_lower_bound(q_f, cal, p1, p2)
    if f > p1:
        warnings.append(f"fidelity bound {f:.6f} capped at p1={p1:.6f}")
        f = p1

    est = PopulationEstimate(
        p0=p0, p1=p1, p2=p2, F=f,
        p0p=p0p, p1p=p1p, p2p=p2p, Fp=q_f,
        alpha3=alpha3,
        lambda_poisson=2.0 * p2 / p1 if p1 > 0 else 0.0,
        corrected=False,
        warnings=tuple(warnings),
    )
    if correct:
        est = higher_order_correction(est)
    return est, cal
