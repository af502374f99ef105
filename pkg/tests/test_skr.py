import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flqkd.constellation import build_kpsk, build_qam
from flqkd.errors import NumericalError, ValidationError
from flqkd.eve import EveModel, cap_only
from flqkd.params import path_transmissivity
from flqkd.skr import (
    CSV_COLUMNS,
    bits_per_mode,
    information_rate,
    optimize_brightness,
    skr_lower_bound,
    sweep_distance,
)

BLIND = EveModel(0.0, "blind")


def test_skr_examples():
    assert skr_lower_bound(1e9, 0.0, 0.94) == pytest.approx(0.94e9)
    assert skr_lower_bound(1e9, 2e9, 0.94) == 0.0
    assert skr_lower_bound(1e9, 1e8, 0.94) == pytest.approx(8.4e8)


@pytest.mark.parametrize("args", [(-1.0, 0.0, 0.9), (1.0, -1.0, 0.9), (1.0, 0.0, 0.0), (1.0, 0.0, 1.1)])
def test_skr_rejects(args):
    with pytest.raises(ValidationError):
        skr_lower_bound(*args)


@settings(max_examples=100, deadline=None)
@given(I=st.floats(0, 1e11), chi=st.floats(0, 1e11), beta=st.floats(0.01, 1.0))
def test_skr_monotone(I, chi, beta):
    s = skr_lower_bound(I, chi, beta)
    assert s >= 0
    assert skr_lower_bound(I, chi * 1.1 + 1, beta) <= s
    assert skr_lower_bound(I, chi, min(1.0, beta * 1.05)) >= s


def test_bits_per_mode_examples():
    assert bits_per_mode(2e9, 1e10, 200) == pytest.approx(1e-3, rel=1e-15)
    assert bits_per_mode(0.0, 1e10, 200) == 0.0
    with pytest.raises(ValidationError):
        bits_per_mode(1.0, 0.0, 200)


def test_information_rate_grid_monotone(params):
    # checked before trusting the optimizer with a monotone objective
    for c in (build_kpsk(2), build_kpsk(8)):
        grid = np.geomspace(1e-4, 2.0, 20)
        rates = [information_rate(params, c, 0.1, x) for x in grid]
        assert all(b >= a * (1 - 1e-9) for a, b in zip(rates, rates[1:]))


def test_blind_eve_returns_upper_endpoint(params):
    for c in (build_kpsk(2), build_kpsk(4)):
        for L in (50.0, 150.0):
            x, row = optimize_brightness(params, c, BLIND, L)
            assert x == 2.0 and row.N_S_opt == 2.0
            assert row.SKR_LB == pytest.approx(params.reconciliation_beta * row.I_AB)


def test_blind_eve_narrow_bracket(params):
    x, _ = optimize_brightness(params, build_kpsk(2), BLIND, 150.0, bracket=(0.01, 0.3))
    assert x == 0.3


def test_degenerate_bracket(params):
    x, row = optimize_brightness(params, build_kpsk(4), BLIND, 80.0, bracket=(0.7, 0.7))
    assert x == 0.7 and row.N_S_opt == 0.7


@pytest.mark.parametrize("bracket", [(0.0, 1.0), (1.0, 0.5), (-1.0, 1.0)])
def test_invalid_bracket(params, bracket):
    with pytest.raises(ValidationError):
        optimize_brightness(params, build_kpsk(2), BLIND, 50.0, bracket=bracket)


def test_cap_only_contract(params):
    x, row = optimize_brightness(params, build_kpsk(2), cap_only(), 50.0)
    assert 0 < x <= 2.0 and row.SKR_LB >= 0
    assert "zero_skr" in row.flags and "cap_binding" in row.flags


def test_interior_optimum_with_brightness_dependent_eve(params):
    # an Eve bound growing linearly in N_S makes the objective peak inside the bracket
    R = params.symbol_rate_R
    eve = EveModel(lambda L, N_S: 0.5 * R * N_S, "linear")
    x, row = optimize_brightness(params, build_kpsk(2), eve, 50.0)
    assert 1e-4 < x < 2.0
    for y in (x * 0.9, x * 1.1):
        I = information_rate(params, build_kpsk(2), row.kS, y)
        assert params.reconciliation_beta * I - 0.5 * R * y <= row.SKR_raw * (1 + 1e-6)


def test_sweep_rows_monotone_with_brightness_dependent_eve(params):
    R = params.symbol_rate_R
    eve = EveModel(lambda L, N_S: 0.5 * R * N_S, "linear")
    rows = sweep_distance(params, build_kpsk(2), eve, [0, 25, 50, 75, 100, 150], workers=2)
    skr = [r.SKR_LB for r in rows]
    assert all(b <= a * (1 + 1e-6) for a, b in zip(skr, skr[1:]))
    assert [r.L for r in rows] == [0, 25, 50, 75, 100, 150]


def test_fixed_brightness_sweep_nonincreasing(params):
    rows = sweep_distance(params, build_kpsk(2), BLIND, [0, 25, 50, 75, 100], N_S=0.5)
    I = [r.I_AB for r in rows]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(I, I[1:]))
    fine = [information_rate(params, build_kpsk(2), path_transmissivity(L, 0.2), 0.5)
            for L in np.linspace(0, 100, 41)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(fine, fine[1:]))


def test_sweep_empty(params):
    with pytest.raises(ValidationError):
        sweep_distance(params, build_kpsk(2), BLIND, [])


def test_sweep_negative_distance(params):
    with pytest.raises(ValidationError):
        sweep_distance(params, build_kpsk(2), BLIND, [10.0, -1.0])


def test_sweep_error_carries_distance(params):
    def broken(L, N_S):
        raise NumericalError("boom")

    with pytest.raises(NumericalError, match="L=30"):
        sweep_distance(params, build_kpsk(2), EveModel(broken), [30.0], N_S=0.5)


def test_sweep_thread_count_does_not_change_rows(params):
    Ls = [10.0, 60.0, 110.0]
    a = sweep_distance(params, build_kpsk(4), cap_only(), Ls, workers=1)
    b = sweep_distance(params, build_kpsk(4), cap_only(), Ls, workers=3)
    assert a == b


def test_plob_flag(params):
    # blind Eve and huge reconciliation-free rates exceed PLOB at long range
    rows = sweep_distance(params, build_kpsk(2), BLIND, [200.0], N_S=2.0)
    r = rows[0]
    assert r.plob_bits_per_mode == pytest.approx(-math.log2(1 - r.kS))
    assert ("plob_exceeded" in r.flags) == (r.bits_per_mode > r.plob_bits_per_mode)


def test_csv_fields(params):
    (row,) = sweep_distance(params, build_kpsk(2), cap_only(), [50.0])
    f = row.csv_fields()
    assert len(f) == len(CSV_COLUMNS)
    assert f[-1] == "zero_skr;cap_binding"
    assert float(f[0]) == 50.0


def test_low_snr_convergence_4psk_bpsk(params):
    kS = path_transmissivity(150.0, params.fiber_loss_alpha)
    for N_S in (0.1, 0.5, 2.0):
        ratio = information_rate(params, build_kpsk(4), kS, N_S) / information_rate(params, build_kpsk(2), kS, N_S)
        assert 0.9 <= ratio <= 1.1


def test_qam_default_uses_isotropic(params):
    c = build_qam(2)
    a = information_rate(params, c, 0.1, 0.5)
    b = information_rate(params, c, 0.1, 0.5, isotropic=True)
    e = information_rate(params, c, 0.1, 0.5, isotropic=False)
    assert a == b and abs(a - e) / a < 0.05
