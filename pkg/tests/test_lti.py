"""Transfer-function substrate checks against closed forms."""

import math

import numpy as np
import pytest

from seaband.errors import (DiscretizationSingularityError,
                            EvaluationSingularityError,
                            ImproperTransferFunctionError, NoBandwidthError)
from seaband.lti import (DiscreteTF, RationalTF, bandwidth_3db,
                         butterworth_lowpass, discretize, freq_response,
                         ss_freq_response, tf_to_ss)


def test_construction_trims_and_validates():
    tf = RationalTF([0.0, 0.0, 2.0], [0.0, 1.0, 3.0])
    assert tf.num.tolist() == [2.0]
    assert tf.den.tolist() == [1.0, 3.0]
    assert tf.order == 1
    assert tf.relative_order == 1
    with pytest.raises(ZeroDivisionError):
        RationalTF([1.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        RationalTF([math.nan], [1.0])


def test_dc_gain():
    assert RationalTF([3.0], [1.0, 6.0]).dc_gain() == 0.5
    # pole at the origin
    assert RationalTF([1.0], [1.0, 0.0]).dc_gain() == np.inf
    assert np.isnan(RationalTF([1.0, 0.0], [1.0, 0.0]).dc_gain())


def test_arithmetic_matches_pointwise_algebra():
    a = RationalTF([1.0], [1.0, 1.0])
    b = RationalTF([2.0], [1.0, 2.0])
    w = 0.7
    ga = freq_response(a, w)
    gb = freq_response(b, w)
    assert freq_response(a * b, w) == pytest.approx(ga * gb, rel=1e-12)
    assert freq_response(a + b, w) == pytest.approx(ga + gb, rel=1e-12)
    assert freq_response(a - b, w) == pytest.approx(ga - gb, rel=1e-12)
    assert freq_response(a / b, w) == pytest.approx(ga / gb, rel=1e-12)
    assert freq_response(3.0 * a, w) == pytest.approx(3.0 * ga, rel=1e-12)
    assert freq_response(a.inverse(), w) == pytest.approx(1.0 / ga, rel=1e-12)


def test_freq_response_first_order():
    tf = RationalTF([1.0], [1.0, 1.0])  # 1/(s+1)
    for w in (0.1, 1.0, 10.0):
        assert freq_response(tf, w) == pytest.approx(1.0 / (1.0 + 1j * w))
    arr = freq_response(tf, np.array([0.5, 2.0]))
    assert arr.shape == (2,)


def test_freq_response_pole_on_axis_raises():
    with pytest.raises(EvaluationSingularityError):
        freq_response(RationalTF([1.0], [1.0, 0.0]), 0.0)
    # resonant pole at w = 2
    with pytest.raises(EvaluationSingularityError):
        freq_response(RationalTF([1.0], [1.0, 0.0, 4.0]), 2.0)


def test_bandwidth_first_order_pole():
    # -3 dB of 1/(s/wc + 1) sits exactly at the pole
    wc = 12.0
    tf = RationalTF([1.0], [1.0 / wc, 1.0])
    assert bandwidth_3db(tf) == pytest.approx(wc / (2 * math.pi), rel=1e-6)


def test_bandwidth_butterworth_is_cutoff():
    for order in (1, 2, 3):
        wc = 40.0
        f = bandwidth_3db(butterworth_lowpass(order, wc))
        assert f == pytest.approx(wc / (2 * math.pi), rel=1e-6)


def test_bandwidth_reference_override():
    tf = RationalTF([1.0], [1.0, 1.0])
    # reference twice the DC level moves the crossing to |H| = sqrt(2)... which
    # never happens below DC; crossing of 2/sqrt(2) = sqrt(2) > 1 is immediate
    with pytest.raises(NoBandwidthError):
        bandwidth_3db(tf, reference_gain=2.0 * math.sqrt(2.0))
    # and a reference below the tail never crosses
    with pytest.raises(NoBandwidthError):
        bandwidth_3db(RationalTF([1.0], [1.0]), reference_gain=1.0)


def test_bandwidth_rejects_zero_dc():
    with pytest.raises(NoBandwidthError):
        bandwidth_3db(RationalTF([1.0, 0.0], [1.0, 1.0]))


def test_butterworth_closed_form_coefficients():
    wc = 5.0
    b2 = butterworth_lowpass(2, wc)
    assert b2.num.tolist() == pytest.approx([wc ** 2])
    assert b2.den.tolist() == pytest.approx([1.0, math.sqrt(2.0) * wc, wc ** 2])
    # half-power point exact and magnitude monotone
    assert abs(freq_response(b2, wc)) == pytest.approx(1 / math.sqrt(2), rel=1e-12)
    w = np.logspace(-2, 3, 200)
    mags = np.abs(freq_response(butterworth_lowpass(3, wc), w))
    assert np.all(np.diff(mags) <= 1e-15)
    with pytest.raises(ValueError):
        butterworth_lowpass(0, wc)
    with pytest.raises(ValueError):
        butterworth_lowpass(2, -1.0)


def test_discretize_first_order_exact_tustin():
    # 1/(tau s + 1) under Tustin: y[k](2 tau + T) = T(x[k]+x[k-1]) + (2 tau - T) y[k-1]
    tau, ts = 0.05, 0.01
    dz = discretize(RationalTF([1.0], [tau, 1.0]), ts)
    c = 2.0 * tau / ts
    expect_num = np.array([1.0, 1.0]) / (c + 1.0)
    expect_den = np.array([1.0, (1.0 - c) / (1.0 + c)])
    assert dz.num == pytest.approx(expect_num)
    assert dz.den == pytest.approx(expect_den)
    assert dz.dc_gain() == pytest.approx(1.0, rel=1e-12)


def test_discretize_rejections():
    with pytest.raises(ImproperTransferFunctionError):
        discretize(RationalTF([1.0, 0.0, 0.0], [1.0, 1.0]), 0.01)
    # continuous pole exactly at the transform's singular point s = 2/Ts
    ts = 0.001
    with pytest.raises(DiscretizationSingularityError):
        discretize(RationalTF([1.0], [1.0, -2.0 / ts]), ts)


def test_tf_to_ss_matches_tf_response():
    tf = RationalTF([2.0, 3.0], [1.5, 0.8, 2.0, 0.5])
    ss = tf_to_ss(tf)
    w = np.logspace(-2, 2, 25)
    assert ss_freq_response(ss, w) == pytest.approx(freq_response(tf, w), rel=1e-9)


def test_tf_to_ss_feedthrough_and_biproper():
    const = tf_to_ss(RationalTF([4.0], [2.0]))
    assert const.states == 0
    assert const.D[0, 0] == 2.0
    bi = RationalTF([1.0, 3.0], [1.0, 1.0])  # biproper, nonzero D
    ss = tf_to_ss(bi)
    assert ss.D[0, 0] == pytest.approx(1.0)
    assert ss_freq_response(ss, 2.7) == pytest.approx(freq_response(bi, 2.7), rel=1e-12)
    with pytest.raises(ImproperTransferFunctionError):
        tf_to_ss(RationalTF([1.0, 0.0], [1.0]))


def test_discrete_tf_normalizes_leading_one():
    dz = DiscreteTF([2.0, 1.0], [4.0, 1.0], 0.01)
    assert dz.den[0] == 1.0
    assert dz.num[0] == 0.5
    assert dz.dc_gain() == pytest.approx(3.0 / 5.0)
    with pytest.raises(ValueError):
        DiscreteTF([1.0], [0.0, 1.0], 0.01)
    with pytest.raises(ValueError):
        DiscreteTF([1.0], [1.0], -0.5)
