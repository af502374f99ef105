import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flqkd.constellation import build_kpsk, build_qam
from flqkd.errors import ValidationError
from flqkd.gaussian_state import (
    iq_conditional_stats,
    mode_pair_moments,
    qam_isotropic_approx,
    rotated_frame_stats,
    symbol_moments,
)

from oracles import photocount_cumulants

M, ETA = 200, 0.9
# worst relative deviation of the white-noise variances at kS=0.1, N_S=0.5 is 4.74%
ISOTROPIC_BOUND = 0.05


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def stats_close(a, b, rtol, scale):
    for f in ("mean_I", "mean_Q", "var_I", "var_Q", "cov_IQ"):
        x, y = getattr(a, f), getattr(b, f)
        ref = scale if f.startswith("mean") else scale**2
        assert abs(x - y) <= rtol * max(abs(x), abs(y), ref), f


def test_preset_moments(params):
    m = mode_pair_moments(params, 0.1, 0.5)
    assert m.return_photon_number == pytest.approx(1049.4, abs=0.05)
    assert m.c_RB == pytest.approx(696.5, abs=0.05)
    assert m.lo_photon_number == params.lo_brightness_NLO
    assert m.is_physical()


def test_preset_mean(params):
    s = iq_conditional_stats(mode_pair_moments(params, 0.1, 0.5), M, ETA)
    assert s.mean_I == pytest.approx(1.254e5, rel=1e-3)
    assert s.mean_Q == 0.0 and s.cov_IQ == 0.0


def test_full_intrusion_kills_correlation(params):
    m = mode_pair_moments(params.replace(intrusion_fE=1.0), 0.1, 0.5)
    assert m.c_RB == 0.0 and m.cross_correlation == 0


def test_dark_signal(params):
    m = mode_pair_moments(params, 0.3, 0.0)
    assert m.c_RB == 0.0
    assert m.return_photon_number == pytest.approx(0.3 * params.amp_brightness_NB, rel=1e-15)


@pytest.mark.parametrize("kq", [0.0, -0.1, 1.0001])
def test_kappa_q_range(params, kq):
    with pytest.raises(ValidationError):
        mode_pair_moments(params, 0.1, 0.5, kappa_q=kq)


def test_cross_correlation_magnitude(params):
    m = mode_pair_moments(params, 0.2, 0.7, kappa_q=0.25, theta_q=1.1)
    assert abs(m.cross_correlation) == pytest.approx(0.5 * m.c_RB, rel=1e-14)
    assert -math.atan2(m.cross_correlation.imag, m.cross_correlation.real) == pytest.approx(1.1)


def test_quarter_turn_swaps_variances(params):
    c = build_kpsk(4)
    s0, s1 = (iq_conditional_stats(m, M, ETA) for m in symbol_moments(params, c, 0.1, 0.5)[:2])
    assert abs(s1.mean_I) < 1e-9 * s1.mean_Q
    assert abs(s1.cov_IQ) < 1e-9 * s1.var_I
    assert s1.var_I == pytest.approx(s0.var_Q, rel=1e-12)
    assert s1.var_Q == pytest.approx(s0.var_I, rel=1e-12)


def test_rotation_identity_and_inverse(params):
    s = iq_conditional_stats(mode_pair_moments(params, 0.05, 1.3, 0.6, 2.2), M, ETA)
    assert rotated_frame_stats(s, 0.0) == s
    back = rotated_frame_stats(rotated_frame_stats(s, 0.77), -0.77)
    stats_close(back, s, 1e-12, math.sqrt(s.var_I))


@pytest.mark.parametrize("K", [2, 4, 8, 16, 32])
def test_rotated_frame_is_axis_aligned(params, K):
    c = build_kpsk(K)
    rot = [
        rotated_frame_stats(iq_conditional_stats(m, M, ETA), th)
        for m, (_, th) in zip(symbol_moments(params, c, 0.1, 0.5), c.symbols)
    ]
    r0 = rot[0]
    m0 = mode_pair_moments(params, 0.1, 0.5)
    n, N, a2 = m0.return_photon_number, m0.lo_photon_number, m0.c_RB**2
    assert r0.var_I == pytest.approx(M * ETA * (ETA * a2 + n + N * (1 + ETA * n)) / 2, rel=1e-12)
    assert r0.var_Q == pytest.approx(M * ETA * (-ETA * a2 + n + N * (1 + ETA * n)) / 2, rel=1e-12)
    assert r0.var_I > r0.var_Q
    for r in rot:
        assert abs(r.cov_IQ) <= 1e-10 * r.var_I
        assert abs(r.mean_Q) <= 1e-10 * r.mean_I
        assert rel(r.var_I, r0.var_I) <= 1e-10 and rel(r.var_Q, r0.var_Q) <= 1e-10


@settings(max_examples=60, deadline=None)
@given(
    K=st.sampled_from([2, 3, 4, 5, 8, 16, 32]),
    kS=st.floats(1e-4, 1.0),
    N_S=st.floats(1e-4, 10.0),
)
def test_symbol_stats_are_rotations_of_symbol_zero(params, K, kS, N_S):
    c = build_kpsk(K)
    ms = symbol_moments(params, c, kS, N_S)
    s0 = iq_conditional_stats(ms[0], M, ETA)
    for m, (_, th) in zip(ms, c.symbols):
        stats_close(iq_conditional_stats(m, M, ETA), rotated_frame_stats(s0, -th), 1e-10,
                    math.sqrt(s0.var_I))


@settings(max_examples=40, deadline=None)
@given(kq=st.floats(1e-3, 1.0), th=st.floats(0, 2 * math.pi), N_S=st.floats(1e-3, 5.0))
def test_conditional_stats_positive_definite(params, kq, th, N_S):
    s = iq_conditional_stats(mode_pair_moments(params, 0.1, N_S, kq, th), M, ETA)
    assert s.is_positive_definite()


def test_correlation_monotone(params):
    ns = [0.01, 0.1, 0.5, 1.0, 2.0]
    c = [mode_pair_moments(params, 0.1, x).c_RB for x in ns]
    n = [mode_pair_moments(params, 0.1, x).return_photon_number for x in ns]
    assert all(a < b for a, b in zip(c, c[1:])) and all(a < b for a, b in zip(n, n[1:]))
    cf = [mode_pair_moments(params.replace(intrusion_fE=f), 0.1, 0.5).c_RB for f in (0, 0.2, 0.6, 0.99)]
    assert all(a > b for a, b in zip(cf, cf[1:]))
    nq = [mode_pair_moments(params, 0.1, 0.5, kq).return_photon_number for kq in (0.1, 0.5, 1.0)]
    assert all(a < b for a, b in zip(nq, nq[1:]))


@pytest.mark.parametrize("kq,th", [(1.0, 0.0), (1.0, 0.7), (1 / 9, 2.3), (5 / 9, 4.0)])
def test_closed_forms_match_photocount_cgf(params, kq, th):
    m = mode_pair_moments(params, 0.1, 0.5, kq, th)
    s = iq_conditional_stats(m, M, ETA)
    c = photocount_cumulants(m, M, ETA)
    for f in ("mean_I", "mean_Q", "var_I", "var_Q", "cov_IQ"):
        ref = math.sqrt(s.var_I) if f.startswith("mean") else s.var_I
        assert abs(getattr(s, f) - c[f]) <= 1e-9 * ref, f


def test_isotropic_audit_at_unit_kappa(params):
    m = mode_pair_moments(params, 0.1, 0.5)
    s = iq_conditional_stats(m, M, ETA)
    r = qam_isotropic_approx(s, m, M, ETA)
    assert r.max_rel_deviation < 0.15
    assert r.max_rel_deviation < ISOTROPIC_BOUND
    assert r.stats.var_I == r.stats.var_Q == pytest.approx(M * ETA**2 * 1e4 * m.return_photon_number / 2)
    assert r.stats.cov_IQ == 0.0 and r.stats.mean_I == s.mean_I


def test_isotropic_without_signal(params):
    m = mode_pair_moments(params, 0.1, 0.0)
    s = iq_conditional_stats(m, M, ETA)
    r = qam_isotropic_approx(s, m, M, ETA)
    assert s.var_I == pytest.approx(M * ETA * (m.return_photon_number + 1e4 * (1 + ETA * m.return_photon_number)) / 2)
    assert math.isfinite(r.max_rel_deviation)


def test_isotropic_output_is_white_for_every_qam_symbol(params):
    for m in symbol_moments(params, build_qam(2), 0.1, 0.5):
        r = qam_isotropic_approx(iq_conditional_stats(m, M, ETA), m, M, ETA)
        assert r.stats.cov_IQ == 0.0 and r.stats.var_I == r.stats.var_Q
