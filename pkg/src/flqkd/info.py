"""Symbol transition matrices and the Alice-Bob Shannon-information rate."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .constellation import Constellation
from .errors import QuadratureError, ValidationError
from .gaussian_state import ConditionalIQ, rotated_frame_stats

DEFAULT_TOL = 1e-10
UNDERFLOW = 1e-300

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic matrix; ``entries[k, kt]`` is Pr(decode kt | sent k)."""

    entries: np.ndarray
    quadrature_tolerance: float

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def max_row_error(self) -> float:
        return float(np.max(np.abs(self.entries.sum(axis=1) - 1.0)))

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf, lineterminator="\n")
        K = self.size
        w.writerow(["k\\k̃"] + list(range(K)))
        for k in range(K):
            w.writerow([k] + [repr(float(x)) for x in self.entries[k]])
        return buf.getvalue() if fh is None else ""


def _phi(x):
    return math.exp(-0.5 * x * x) / _SQRT2PI


def _Phi(x):
    return 0.5 * math.erfc(-x / _SQRT2)


def _interval_mass(mu, sigma, lo, hi):
    """P(lo <= X < hi) for X ~ N(mu, sigma^2), computed in the accurate tail."""
    a = (lo - mu) / sigma
    b = (hi - mu) / sigma
    if a > 0:
        return float(special.ndtr(-a) - special.ndtr(-b))
    return float(special.ndtr(b) - special.ndtr(a))


class _RadialMass:
    """Angular density of a bivariate Gaussian: theta -> integral_0^inf p(r u_theta) r dr."""

    def __init__(self, s: ConditionalIQ):
        if not s.is_positive_definite():
            raise ValidationError(f"covariance is not positive definite: {s}")
        self.mx, self.my = s.mean_I, s.mean_Q
        self.a, self.b, self.d = s.var_I, s.cov_IQ, s.var_Q
        self.det = self.a * self.d - self.b * self.b
        self.norm = 1.0 / (2.0 * math.pi * math.sqrt(self.det))

    def __call__(self, theta):
        ux, uy = math.cos(theta), math.sin(theta)
        a, b, d, det = self.a, self.b, self.d, self.det
        # u^T adj(Sigma) u, u^T adj(Sigma) mu
        uau = d * ux * ux - 2 * b * ux * uy + a * uy * uy
        uam = (d * self.mx - b * self.my) * ux + (a * self.my - b * self.mx) * uy
        A = uau / det
        h = (uam / det) / math.sqrt(A)
        cross = ux * self.my - uy * self.mx
        perp = cross * cross / uau
        g = _phi(h) + h * _Phi(h)
        if g <= 0.0:
            return 0.0
        return self.norm * math.exp(-0.5 * perp) * _SQRT2PI * g / A


def sector_probability(s: ConditionalIQ, lo: float, hi: float, tol: float = DEFAULT_TOL) -> float:
    """Mass of the Gaussian ``s`` inside the wedge lo <= arg(I + iQ) <= hi (apex at origin)."""
    f = _RadialMass(s)
    m0 = math.atan2(s.mean_Q, s.mean_I)
    r0 = math.hypot(s.mean_I, s.mean_Q)
    # The mass concentrates within ~w of the mean direction; Gauss-Kronrod never
    # samples interval endpoints, so break on both sides of the peak, not only at it.
    offsets = [0.0]
    if r0 > 0:
        w = math.sqrt(max(s.var_I, s.var_Q)) / r0
        offsets += [sgn * j * w for j in (1.0, 3.0, 8.0) for sgn in (-1, 1) if j * w < math.pi]
    pts = []
    j0 = math.floor((lo - m0) / (2 * math.pi))
    for j in range(j0, j0 + 3):
        for o in offsets:
            x = m0 + 2 * math.pi * j + o
            if lo < x < hi:
                pts.append(x)
    pts.sort()
    # full_output keeps scipy quiet; non-convergence is reported through QuadratureError
    val, err, *_ = integrate.quad(
        f, lo, hi, points=pts or None, epsabs=0.25 * tol, epsrel=0.0, limit=500, full_output=1
    )
    if not err <= tol:
        raise QuadratureError(f"sector [{lo:.6g}, {hi:.6g}] did not converge", err)
    return min(max(val, 0.0), 1.0)


def rectangle_probability(s: ConditionalIQ, cell, tol: float = DEFAULT_TOL) -> float:
    """Mass of the Gaussian ``s`` inside an axis-aligned rectangle."""
    sI, sQ = math.sqrt(s.var_I), math.sqrt(s.var_Q)
    if s.cov_IQ == 0.0:
        return _interval_mass(s.mean_I, sI, cell.I_lo, cell.I_hi) * _interval_mass(
            s.mean_Q, sQ, cell.Q_lo, cell.Q_hi
        )
    if not s.is_positive_definite():
        raise ValidationError(f"covariance is not positive definite: {s}")
    rho = s.cov_IQ / (sI * sQ)
    sc = sQ * math.sqrt(1.0 - rho * rho)
    za = max((cell.I_lo - s.mean_I) / sI, -40.0)
    zb = min((cell.I_hi - s.mean_I) / sI, 40.0)
    if za >= zb:
        return 0.0

    def integrand(z):
        mq = s.mean_Q + rho * sQ * z
        return _phi(z) * _interval_mass(mq, sc, cell.Q_lo, cell.Q_hi)

    pts = [0.0] if za < 0.0 < zb else None
    val, err, *_ = integrate.quad(
        integrand, za, zb, points=pts, epsabs=0.25 * tol, epsrel=0.0, limit=500, full_output=1
    )
    if not err <= tol:
        raise QuadratureError("rectangle probability did not converge", err)
    return min(max(val, 0.0), 1.0)


def _kpsk_row(c: Constellation, s: ConditionalIQ, k: int, tol: float) -> np.ndarray:
    K = c.order
    phi_k = 2 * math.pi * k / K
    rs = rotated_frame_stats(s, phi_k)
    row = np.empty(K)
    for kt in range(K):
        center = 2 * math.pi * ((kt - k) % K) / K
        if center > math.pi:
            center -= 2 * math.pi
        row[kt] = sector_probability(rs, center - math.pi / K, center + math.pi / K, tol)
    return row


def transition_matrix(
    c: Constellation,
    stats: list[ConditionalIQ],
    tol: float = DEFAULT_TOL,
    circulant: bool = False,
) -> TransitionMatrix:
    """Integrate each symbol's conditional Gaussian over every decision region.

    KPSK entries are sector integrals in the sent symbol's rotated frame.  With
    ``circulant=True`` only row 0 is integrated and the others are cyclic shifts,
    which is exact when ``stats`` are rotations of one another.  QAM entries are
    rectangle masses: closed-form products of normal CDF differences when the
    covariance is diagonal, 1D adaptive quadrature otherwise.
    """
    K = c.size
    if len(stats) != K:
        raise ValidationError(f"need {K} symbol statistics, got {len(stats)}")
    for s in stats:
        if not s.is_positive_definite():
            raise ValidationError(f"covariance is not positive definite: {s}")
    P = np.empty((K, K))
    if c.kind == "kpsk":
        if circulant:
            row0 = _kpsk_row(c, stats[0], 0, tol)
            for k in range(K):
                P[k] = np.roll(row0, k)
        else:
            for k in range(K):
                P[k] = _kpsk_row(c, stats[k], k, tol)
    else:
        # With every mean at the origin the cell size is arbitrary; rows come out identical anyway.
        scale = max(math.hypot(s.mean_I, s.mean_Q) for s in stats) or 1.0
        cells = c.decision_regions(scale)
        for k, s in enumerate(stats):
            P[k] = [rectangle_probability(s, cell, tol) for cell in cells]
    return TransitionMatrix(P, tol)


def mutual_information_bits(P: np.ndarray) -> float:
    """Equiprobable-input mutual information of a row-stochastic matrix, in bits/symbol."""
    P = np.where(np.asarray(P, dtype=float) < UNDERFLOW, 0.0, P)
    K = P.shape[0]
    col = P.sum(axis=0)
    mask = P > 0
    p = P[mask]
    c = np.broadcast_to(col, P.shape)[mask]
    return float(np.sum(p * np.log2(K * p / c)) / K)


def shannon_rate(t: TransitionMatrix, R: float) -> float:
    """Alice-Bob Shannon-information rate in bits/s at symbol rate ``R``."""
    return R * mutual_information_bits(t.entries)
