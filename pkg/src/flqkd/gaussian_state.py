"""Second moments of the return/LO mode pairs and Alice's conditional (I, Q) statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ValidationError
from .params import SystemParams


@dataclass(frozen=True)
class ModePairMoments:
    """Non-zero second moments of one return (B') / LO (R') mode pair.

    ``cross_correlation`` is <b'^dagger r'> = sqrt(kappa_q) exp(-i theta_q) c_RB.
    """

    return_photon_number: float
    lo_photon_number: float
    cross_correlation: complex
    c_RB: float

    def is_physical(self, rtol: float = 1e-12) -> bool:
        n, N = self.return_photon_number, self.lo_photon_number
        return n >= 0 and N >= 0 and abs(self.cross_correlation) ** 2 <= n * N * (1 + rtol)


@dataclass(frozen=True)
class ConditionalIQ:
    mean_I: float
    mean_Q: float
    var_I: float
    var_Q: float
    cov_IQ: float

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.mean_I, self.mean_Q])

    @property
    def cov(self) -> np.ndarray:
        return np.array([[self.var_I, self.cov_IQ], [self.cov_IQ, self.var_Q]])

    def is_positive_definite(self) -> bool:
        return self.var_I > 0 and self.var_Q > 0 and self.cov_IQ**2 < self.var_I * self.var_Q

    def scaled_noise(self, factor: float) -> "ConditionalIQ":
        """Same means, covariance multiplied by ``factor``."""
        return ConditionalIQ(
            self.mean_I, self.mean_Q, self.var_I * factor, self.var_Q * factor, self.cov_IQ * factor
        )


def mode_pair_moments(
    params: SystemParams,
    kS: float,
    N_S: float,
    kappa_q: float = 1.0,
    theta_q: float = 0.0,
) -> ModePairMoments:
    """Per-mode moments for a symbol imposing attenuation ``kappa_q`` and phase ``theta_q``.

    ``N_S`` is the brightness Alice sends after her monitor tap.  A KPSK symbol k
    is ``kappa_q=1, theta_q=2*pi*k/K``.
    """
    if not (0.0 < kappa_q <= 1.0):
        raise ValidationError(f"kappa_q={kappa_q!r} must lie in (0, 1]")
    if not (N_S >= 0):
        raise ValidationError(f"N_S={N_S!r} must be >= 0")
    if not (0.0 < kS <= 1.0):
        raise ValidationError(f"kS={kS!r} must lie in (0, 1]")
    p = params
    G, kB, n = p.gain_GB, p.tap_bob_kB, p.ase_spdc_ratio_n
    n_ret = kS * (G * (1.0 - kB) * kappa_q * kS * N_S + p.amp_brightness_NB)
    c_RB = kS * math.sqrt(
        G * (1.0 - kB) * (1.0 - p.intrusion_fE) * N_S * p.lo_brightness_NLO * n / (n + 1.0)
    )
    cross = math.sqrt(kappa_q) * c_RB * complex(math.cos(theta_q), -math.sin(theta_q))
    return ModePairMoments(n_ret, p.lo_brightness_NLO, cross, c_RB)


def iq_conditional_stats(m: ModePairMoments, M: int, eta: float) -> ConditionalIQ:
    """Mean and covariance of the dual-homodyne (I, Q) summed over ``M`` mode pairs."""
    if M < 1:
        raise ValidationError(f"M={M!r} must be >= 1")
    if not (0.0 < eta <= 1.0):
        raise ValidationError(f"eta={eta!r} must lie in (0, 1]")
    c = m.cross_correlation
    a2 = abs(c) ** 2
    # c = a exp(-i phi), so the symbol angle is -arg(c)
    phi = -math.atan2(c.imag, c.real)
    a = math.sqrt(a2)
    n, N = m.return_photon_number, m.lo_photon_number
    base = n + N * (1.0 + eta * n)
    return ConditionalIQ(
        mean_I=M * eta * a * math.cos(phi),
        mean_Q=M * eta * a * math.sin(phi),
        var_I=M * eta * (eta * a2 * math.cos(2 * phi) + base) / 2.0,
        var_Q=M * eta * (-eta * a2 * math.cos(2 * phi) + base) / 2.0,
        cov_IQ=M * eta**2 * a2 * math.sin(2 * phi) / 2.0,
    )


def rotated_frame_stats(s: ConditionalIQ, phi: float) -> ConditionalIQ:
    """Statistics of (I cos phi + Q sin phi, -I sin phi + Q cos phi)."""
    c, sn = math.cos(phi), math.sin(phi)
    rot = np.array([[c, sn], [-sn, c]])
    mu = rot @ s.mean
    cov = rot @ s.cov @ rot.T
    return ConditionalIQ(mu[0], mu[1], cov[0, 0], cov[1, 1], 0.5 * (cov[0, 1] + cov[1, 0]))


class IsotropicApprox(NamedTuple):
    stats: ConditionalIQ
    max_rel_deviation: float
    cov_ratio: float
    regime_holds: bool


def qam_isotropic_approx(
    s: ConditionalIQ, m: ModePairMoments, M: int, eta: float, margin: float = 10.0
) -> IsotropicApprox:
    """White-noise replacement var_I = var_Q = M eta^2 N_LO n_Bq / 2, cov_IQ = 0.

    Also returns the largest relative deviation of the exact variances from the
    approximation, |cov_IQ| / approx variance, and whether
    N_LO >> kappa_q c_RB^2 > n_Bq >> 1 holds with ``margin`` standing in for ">>".
    """
    n, N = m.return_photon_number, m.lo_photon_number
    var = M * eta**2 * N * n / 2.0
    if var > 0:
        dev = max(abs(s.var_I - var), abs(s.var_Q - var)) / var
        ratio = abs(s.cov_IQ) / var
    else:
        dev = ratio = math.inf
    a2 = abs(m.cross_correlation) ** 2
    regime = N >= margin * a2 and a2 > n and n >= margin
    return IsotropicApprox(ConditionalIQ(s.mean_I, s.mean_Q, var, var, 0.0), dev, ratio, regime)


def symbol_moments(params: SystemParams, constellation, kS: float, N_S: float) -> list[ModePairMoments]:
    return [mode_pair_moments(params, kS, N_S, kq, th) for kq, th in constellation.symbols]


def symbol_stats(
    params: SystemParams, constellation, kS: float, N_S: float, isotropic: bool = False
) -> list[ConditionalIQ]:
    """Per-symbol conditional (I, Q) statistics, optionally in the white-noise approximation."""
    M, eta = params.modes_per_symbol_M, params.homodyne_eta
    out = []
    for m in symbol_moments(params, constellation, kS, N_S):
        s = iq_conditional_stats(m, M, eta)
        if isotropic:
            s = qam_isotropic_approx(s, m, M, eta).stats
        out.append(s)
    return out
