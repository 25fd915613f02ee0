import math

import numpy as np
import pytest

from wdepth.data import AodConfig, AodKind, CountsDataset
from wdepth.inference import (
    CalibrationTable,
    IncompleteDatasetError,
    InvalidDataError,
    ModelViolationError,
    NoHeraldError,
    PopulationEstimate,
    fidelity_lower_bound,
    full_pipeline,
    higher_order_correction,
    photonic_populations,
    retrieval_efficiency,
    spinwave_populations,
    three_photon_alpha,
)
from wdepth.simulator import ExperimentModel, default_plan, ground_truth, run_campaign
from wdepth.states import ModeWeights


def make_table(eta):
    eta = tuple(eta)
    n = len(eta)
    big_t = sum(eta) / n
    t_prime = [e / (n * big_t) for e in eta]
    overlap = sum(math.sqrt(tp / n) for tp in t_prime) ** 2
    return CalibrationTable(eta=eta, T=big_t, overlap_sq=overlap)


def test_retrieval_efficiency_subtracts_accidentals():
    assert retrieval_efficiency(0.01, 0.0004, 0.000404) == pytest.approx(0.04, rel=1e-9)
    assert retrieval_efficiency(0.5, 0.0, 0.5) == pytest.approx(1.0)


def test_retrieval_efficiency_clamps_with_warning():
    warnings = []
    eta = retrieval_efficiency(0.01, 0.001, 1e-5, warnings)
    assert eta == 1e-6
    assert warnings and "clamped" in warnings[0]


def test_retrieval_efficiency_requires_heralds():
    with pytest.raises(NoHeraldError):
        retrieval_efficiency(0.0, 0.1, 0.1)


def test_three_photon_alpha_substitution():
    assert three_photon_alpha(0.1, 0.002, 0.002, 0.00008) == pytest.approx(2.0)
    assert three_photon_alpha(0.1, 0.002, 0.002, 0.0) == 0.0


def test_three_photon_alpha_efficiency_cancellation():
    base = three_photon_alpha(0.1, 0.002, 0.002, 0.00008)
    scaled = three_photon_alpha(0.05, 0.0005, 0.0005, 0.00001)
    assert scaled == pytest.approx(base, rel=1e-12)


def test_three_photon_alpha_zero_denominator():
    from wdepth.inference import InsufficientCoincidencesError

    with pytest.raises(InsufficientCoincidencesError):
        three_photon_alpha(0.1, 0.0, 0.002, 0.0)


def test_photonic_populations():
    p0, p1, p2 = photonic_populations([0.01, 0.01], 2.0)
    assert p1 == pytest.approx(0.02)
    assert p2 == pytest.approx(4e-4)
    assert p0 == pytest.approx(0.9796)
    assert photonic_populations([0.0, 0.0], 1.0) == (1.0, 0.0, 0.0)
    with pytest.raises(InvalidDataError):
        photonic_populations([0.9, 0.9], 0.0)


def test_spinwave_populations_quadratic():
    cal = make_table([1.0, 1.0])
    p0, p1, p2 = spinwave_populations([0.2578, 0.2578], cal, 0.0622)
    assert p1 + 2 * p2 == pytest.approx(0.5156, abs=1e-12)  # re-substitution
    assert p2 == pytest.approx(0.0622 * p1**2 / 2, rel=1e-12)
    assert p1 == pytest.approx(0.50008, abs=1e-4)
    # alpha -> 0 limit
    assert spinwave_populations([0.25, 0.25], cal, 0.0)[1] == pytest.approx(0.5)


def test_spinwave_populations_rejects_overflow():
    cal = make_table([0.1, 0.1])
    with pytest.raises(InvalidDataError):
        spinwave_populations([0.2, 0.2], cal, 0.0)  # S = 4 > 1


def test_fidelity_bound_uniform_eta_reduces_to_simple_ratio():
    cal = make_table([0.04, 0.04, 0.04])
    q_f = 0.03
    assert fidelity_lower_bound(q_f, cal, p1=0.9, p2=0.0) == pytest.approx(q_f / 0.04)
    assert fidelity_lower_bound(0.0, cal, p1=0.9, p2=0.0) == 0.0


def test_fidelity_bound_monotone_in_p2():
    cal = make_table([0.04, 0.05])
    lo = fidelity_lower_bound(0.03, cal, p1=0.9, p2=0.02)
    hi = fidelity_lower_bound(0.03, cal, p1=0.9, p2=0.0)
    assert lo < hi


def test_higher_order_correction_constants():
    for lam in (0.0311, 0.0589, 0.0634):
        est = PopulationEstimate(p0=0.05, p1=0.9, p2=0.9 * lam / 2, F=0.85)
        out = higher_order_correction(est)
        assert out.lambda_poisson == pytest.approx(lam, rel=1e-12)
        assert out.corrected
        for q in ("p0", "p1", "p2", "F"):
            rel = abs(getattr(out, q) / getattr(est, q) - 1.0)
            assert rel < 1e-3


def test_higher_order_correction_edge_cases():
    est = PopulationEstimate(p0=0.1, p1=0.9, p2=0.0, F=0.8)
    out = higher_order_correction(est)
    assert (out.p0, out.p1, out.F) == (est.p0, est.p1, est.F)
    with pytest.raises(ModelViolationError):
        higher_order_correction(PopulationEstimate(p0=0.0, p1=0.2, p2=0.4, F=0.1))
    with pytest.raises(InvalidDataError):
        higher_order_correction(out)  # already corrected


def example_model(n=5, seed=2, lam=0.04, **kw):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.8, 1.2, n)
    w /= w.sum()
    return ExperimentModel(
        n_modes=n,
        lam=lam,
        excite_weights=ModeWeights(weights=tuple(w), phases=tuple(rng.uniform(-0.3, 0.3, n))),
        eta=tuple(rng.uniform(0.02, 0.08, n)),
        **kw,
    )


def test_full_pipeline_exact_on_analytic_data():
    m = example_model(memory_loss=0.04)
    gt = ground_truth(m)
    ds = run_campaign(m, default_plan(m), seed=0, analytic=True)
    est, cal = full_pipeline(ds)
    for q in ("p0", "p1", "p2", "p0p", "p1p", "p2p", "alpha3"):
        assert getattr(est, q) == pytest.approx(getattr(gt, q), abs=1e-9)
    assert est.F <= gt.F + 1e-12
    np.testing.assert_allclose(cal.eta, m.eta, atol=1e-12)


def test_full_pipeline_zero_coincidence_path():
    m = example_model(lam=0.0)
    ds = run_campaign(m, default_plan(m), seed=0, analytic=True)
    # lam = 0 gives no heralds at all; inject darks instead
    m2 = example_model(lam=0.02, memory_loss=0.1)
    ds2 = run_campaign(m2, default_plan(m2, three_photon_factor=1), seed=3)
    tp = ds2.find(AodKind.THREE_PHOTON)
    assert tp.counts["d123"] == 0  # too few trials for a triple coincidence
    est, _ = full_pipeline(ds2)
    assert est.p2 == 0.0
    assert est.alpha3 == 0.0


def test_full_pipeline_reports_missing_configs():
    m = example_model()
    ds = run_campaign(m, default_plan(m), seed=0, analytic=True)
    ds_missing = CountsDataset(
        n_modes=ds.n_modes,
        records=[r for r in ds.records if r.config.kind is not AodKind.FIDELITY],
    )
    with pytest.raises(IncompleteDatasetError) as exc:
        full_pipeline(ds_missing)
    assert ("FIDELITY", -1) in exc.value.missing


def test_fidelity_lower_bound_property_random_models():
    violations = 0
    for seed in range(40):
        m = example_model(n=4 + seed % 4, seed=seed, lam=0.01 + 0.002 * (seed % 5))
        gt = ground_truth(m)
        ds = run_campaign(m, default_plan(m), seed=seed, analytic=True)
        est, _ = full_pipeline(ds)
        if est.F > gt.F + 1e-9:
            violations += 1
    assert violations == 0
