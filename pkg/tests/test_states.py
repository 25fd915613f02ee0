import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wdepth.states import (
    ModeCountMismatchError,
    ModeWeights,
    TruncatedState,
    inner_product,
    make_biseparable,
    make_w_state,
    make_weighted_w,
    sector_populations,
)


def test_w_state_is_normalized_single_excitation():
    w = make_w_state(9, [0.0] * 9)
    assert w.norm_sq() == pytest.approx(1.0, abs=1e-12)
    p0, p1, p2 = sector_populations(w)
    assert (p0, p2) == (0.0, 0.0)
    assert p1 == pytest.approx(1.0, abs=1e-12)
    assert all(abs(a) ** 2 == pytest.approx(1 / 9) for a in w.amp1)


def test_w_state_phases_enter_amplitudes():
    w = make_w_state(2, [0.0, math.pi])
    assert w.amp1[1].real == pytest.approx(-1 / math.sqrt(2))


def test_weighted_w_matches_mode_weights():
    mw = ModeWeights(weights=(0.5, 0.3, 0.2), phases=(0.0, 0.1, -0.4))
    s = make_weighted_w(mw)
    assert s.norm_sq() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(np.asarray(s.amp1), mw.amplitudes())


def test_mode_weights_validation():
    with pytest.raises(ValueError):
        ModeWeights(weights=(0.5, 0.6), phases=(0.0, 0.0))
    with pytest.raises(ValueError):
        ModeWeights(weights=(1.1, -0.1), phases=(0.0, 0.0))
    with pytest.raises(ValueError):
        ModeWeights(weights=(1.0,), phases=(0.0, 0.0))


@given(
    n=st.integers(min_value=2, max_value=12),
    frac=st.floats(min_value=0.01, max_value=0.99),
    theta1=st.floats(min_value=0.0, max_value=math.pi / 2),
    theta2=st.floats(min_value=0.0, max_value=math.pi / 2),
)
@settings(max_examples=60, deadline=None)
def test_biseparable_is_normalized(n, frac, theta1, theta2):
    l = min(n - 1, max(1, int(round(frac * n))))
    s = make_biseparable(n, l, theta1, theta2)
    assert s.norm_sq() == pytest.approx(1.0, abs=1e-10)


def test_biseparable_sector_structure():
    n, l, t1, t2 = 6, 2, 0.7, 0.3
    s = make_biseparable(n, l, t1, t2)
    p0, p1, p2 = sector_populations(s)
    assert p0 == pytest.approx((math.cos(t1) * math.cos(t2)) ** 2)
    assert p2 == pytest.approx((math.sin(t1) * math.sin(t2)) ** 2)
    # doubles only appear as one excitation in each block
    assert all(i < l <= j for (i, j) in s.amp2)


def test_biseparable_rejects_bad_block():
    with pytest.raises(ValueError):
        make_biseparable(5, 0, 0.1, 0.1)
    with pytest.raises(ValueError):
        make_biseparable(5, 5, 0.1, 0.1)


def test_inner_product_conjugate_linearity_and_overlap():
    w = make_w_state(4, [0.0] * 4)
    s = make_biseparable(4, 2, math.pi / 2, 0.0)
    # <W_4 | W_2 x vac> = sqrt(l/N) at theta1 = pi/2, theta2 = 0
    assert inner_product(w, s).real == pytest.approx(math.sqrt(2 / 4))
    a = TruncatedState(1, amp0=1j, amp1=(0j,))
    b = TruncatedState(1, amp0=1 + 0j, amp1=(0j,))
    assert inner_product(a, b) == pytest.approx(-1j)
    assert inner_product(b, a) == pytest.approx(1j)


def test_inner_product_mode_mismatch():
    with pytest.raises(ModeCountMismatchError):
        inner_product(make_w_state(3, [0] * 3), make_w_state(4, [0] * 4))


def test_truncated_state_key_validation():
    with pytest.raises(ValueError):
        TruncatedState(2, amp0=1 + 0j, amp1=(0j, 0j), amp2={(0, 2): 0.1 + 0j})
