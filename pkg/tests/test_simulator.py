import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wdepth.data import AodConfig, AodKind
from wdepth.simulator import (
    ExperimentModel,
    InvalidPlanError,
    default_plan,
    event_probabilities,
    ground_truth,
    herald_probability,
    run_campaign,
    sample_counts,
)
from wdepth.states import ModeWeights


def uniform_model(n=4, lam=0.04, eta=0.05, **kw) -> ExperimentModel:
    mw = ModeWeights(weights=(1.0 / n,) * n, phases=(0.0,) * n)
    return ExperimentModel(n_modes=n, lam=lam, excite_weights=mw, eta=(eta,) * n, **kw)


def test_model_validation():
    with pytest.raises(ValueError):
        uniform_model(lam=0.6)
    with pytest.raises(ValueError):
        uniform_model(eta=1.5)
    with pytest.raises(ValueError):
        uniform_model(memory_loss=-0.1)
    mw = ModeWeights(weights=(0.5, 0.5), phases=(0.0, 0.0))
    with pytest.raises(ValueError):
        ExperimentModel(n_modes=3, lam=0.1, excite_weights=mw, eta=(0.1, 0.1, 0.1))


def test_herald_probability_combines_true_and_dark():
    m = uniform_model(lam=0.1, signal_dark=0.01)
    p_true = 1 - math.exp(-0.1 * m.signal_efficiency)
    assert herald_probability(m) == pytest.approx(1 - (1 - p_true) * 0.99)


def test_ground_truth_pair_ratio_is_half_lambda():
    # conditioned on a true herald, n ~ Poisson(lam | n >= 1), so p2/p1 = lam/2
    for lam in (0.0311, 0.0589, 0.0634):
        gt = ground_truth(uniform_model(lam=lam))
        assert gt.p2 / gt.p1 == pytest.approx(lam / 2, rel=1e-12)
        assert gt.lambda_poisson == pytest.approx(lam, rel=1e-12)


def test_memory_loss_creates_vacuum():
    gt = ground_truth(uniform_model(memory_loss=0.05))
    assert gt.p0 > 0.04
    assert gt.p0 + gt.p1 + gt.p2 == pytest.approx(1.0, abs=1e-12)


def test_uniform_model_has_unit_w_overlap():
    gt = ground_truth(uniform_model())
    assert gt.F == pytest.approx(gt.p1, rel=1e-12)


def test_phase_disorder_lowers_fidelity():
    n = 6
    rng = np.random.default_rng(3)
    mw = ModeWeights(weights=(1.0 / n,) * n, phases=tuple(rng.uniform(-0.5, 0.5, n)))
    m = ExperimentModel(n_modes=n, lam=0.05, excite_weights=mw, eta=(0.04,) * n)
    gt = ground_truth(m)
    assert gt.F < gt.p1


@given(
    lam=st.floats(min_value=0.0, max_value=0.3),
    eta=st.floats(min_value=0.001, max_value=0.5),
    dark=st.floats(min_value=0.0, max_value=0.01),
    ml=st.floats(min_value=0.0, max_value=0.5),
)
@settings(max_examples=40, deadline=None)
def test_event_probabilities_are_probabilities(lam, eta, dark, ml):
    m = uniform_model(lam=lam, eta=eta, idler_dark=dark, memory_loss=ml)
    configs = [
        AodConfig(AodKind.CALIBRATE, 0),
        AodConfig(AodKind.POPULATION, 1),
        AodConfig(AodKind.FIDELITY),
        AodConfig(AodKind.THREE_PHOTON),
    ]
    for cfg in configs:
        probs = event_probabilities(m, cfg)
        assert all(0.0 <= p <= 1.0 for p in probs.probs.values())


def test_calibration_inverts_to_eta():
    m = uniform_model(idler_dark=1e-4)
    p = event_probabilities(m, AodConfig(AodKind.CALIBRATE, 2)).probs
    assert p["si"] / p["s"] - p["i"] == pytest.approx(m.eta[2], rel=1e-12)


def test_analytic_counts_are_expected_values():
    m = uniform_model()
    probs = event_probabilities(m, AodConfig(AodKind.POPULATION, 0))
    rec = sample_counts(probs, trials=10**6, seed=1, analytic=True)
    assert rec.counts["click"] == pytest.approx(probs.probs["click"] * 10**6)


def test_sampled_counts_match_probabilities_statistically():
    m = uniform_model(lam=0.1, eta=0.2)
    probs = event_probabilities(m, AodConfig(AodKind.CALIBRATE, 0))
    trials = 2 * 10**6
    rec = sample_counts(probs, trials=trials, seed=11)
    for label, p in probs.probs.items():
        sigma = math.sqrt(p * (1 - p) * trials)
        assert abs(rec.counts[label] - p * trials) < 6 * sigma + 1
    # coincidences can never exceed either single
    assert rec.counts["si"] <= min(rec.counts["s"], rec.counts["i"])


def test_three_photon_counts_are_consistent():
    m = uniform_model(lam=0.2, eta=0.3)
    probs = event_probabilities(m, AodConfig(AodKind.THREE_PHOTON))
    rec = sample_counts(probs, trials=10**7, seed=5)
    c = rec.counts
    assert c["d123"] <= min(c["d12"], c["d13"]) <= max(c["d12"], c["d13"]) <= c["d1"]


def test_run_campaign_is_deterministic():
    m = uniform_model()
    plan = default_plan(m)
    ds1 = run_campaign(m, plan, seed=99)
    ds2 = run_campaign(m, plan, seed=99)
    assert ds1 == ds2
    ds3 = run_campaign(m, plan, seed=100)
    assert ds1 != ds3


def test_default_plan_covers_all_configs():
    m = uniform_model(n=9)
    plan = default_plan(m)
    assert len(plan) == 2 * 9 + 2
    ds = run_campaign(m, plan, seed=0, analytic=True)
    assert len(ds.records) == 20


def test_incomplete_plan_rejected():
    m = uniform_model()
    plan = default_plan(m)[:-1]  # drop THREE_PHOTON
    with pytest.raises(InvalidPlanError):
        run_campaign(m, plan, seed=0)
