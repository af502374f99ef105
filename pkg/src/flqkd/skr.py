"""Secret-key-rate lower bounds, brightness optimization and distance sweeps."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .constellation import Constellation
from .errors import NumericalError, ValidationError
from .eve import EveModel, holevo_upper_bound
from .gaussian_state import symbol_stats
from .info import DEFAULT_TOL, shannon_rate, transition_matrix
from .params import SystemParams, path_transmissivity, plob_bits_per_mode

DEFAULT_BRACKET = (1e-4, 2.0)
N_SCAN = 17
TIE_RTOL = 1e-10
_GOLD = (math.sqrt(5.0) - 1.0) / 2.0

CSV_COLUMNS = (
    "L_km",
    "kappa_S",
    "N_S_opt",
    "I_AB_bits_per_s",
    "chi_UB_bits_per_s",
    "SKR_LB_bits_per_s",
    "bits_per_mode",
    "plob_bits_per_mode",
    "flags",
)


@dataclass(frozen=True)
class SweepRow:
    L: float
    kS: float
    N_S_opt: float
    I_AB: float
    chi_UB: float
    SKR_LB: float
    bits_per_mode: float
    plob_bits_per_mode: float
    flags: tuple[str, ...] = ()
    SKR_raw: float = 0.0

    def csv_fields(self) -> list[str]:
        vals = (self.L, self.kS, self.N_S_opt, self.I_AB, self.chi_UB, self.SKR_LB,
                self.bits_per_mode, self.plob_bits_per_mode)
        return [repr(float(v)) for v in vals] + [";".join(self.flags)]


def skr_lower_bound(I_AB: float, chi: float, beta: float) -> float:
    return max(0.0, skr_signed(I_AB, chi, beta))


def skr_signed(I_AB: float, chi: float, beta: float) -> float:
    if I_AB < 0 or chi < 0:
        raise ValidationError("I_AB and chi must be >= 0")
    if not (0.0 < beta <= 1.0):
        raise ValidationError(f"beta={beta!r} must lie in (0, 1]")
    return beta * I_AB - chi


def bits_per_mode(SKR: float, R: float, M: int) -> float:
    if R <= 0 or M < 1:
        raise ValidationError("need R > 0 and M >= 1")
    return SKR / (R * M)


def information_rate(
    p: SystemParams,
    c: Constellation,
    kS: float,
    N_S: float,
    tol: float = DEFAULT_TOL,
    isotropic: bool | None = None,
) -> float:
    """I_AB in bits/s.  QAM defaults to the white-noise statistics its receiver assumes."""
    if isotropic is None:
        isotropic = c.kind == "qam"
    stats = symbol_stats(p, c, kS, N_S, isotropic=isotropic)
    t = transition_matrix(c, stats, tol, circulant=(c.kind == "kpsk"))
    return shannon_rate(t, p.symbol_rate_R)


def _plob_or_inf(kS):
    return math.inf if kS >= 1.0 else plob_bits_per_mode(kS)


def _row(p, c, e, L, kS, N_S, I_AB, extra_flags=()):
    R = p.symbol_rate_R
    chi = holevo_upper_bound(e, R, c.size, L, N_S)
    raw = skr_signed(I_AB, chi, p.reconciliation_beta)
    skr = max(0.0, raw)
    bpm = bits_per_mode(skr, R, p.modes_per_symbol_M)
    plob = _plob_or_inf(kS)
    flags = list(extra_flags)
    if chi >= R * math.log2(c.size):
        flags.append("cap_binding")
    if bpm > plob:
        flags.append("plob_exceeded")
    return SweepRow(L, kS, N_S, I_AB, chi, skr, bpm, plob, tuple(flags), raw)


def _golden_max(f, lo, hi, rtol):
    """Maximize f over [lo, hi] by golden-section search in log N_S."""
    a, b = math.log(lo), math.log(hi)
    x1 = b - _GOLD * (b - a)
    x2 = a + _GOLD * (b - a)
    f1, f2 = f(math.exp(x1)), f(math.exp(x2))
    # relative width in N_S is ~ (b - a) for a log-space bracket
    for _ in range(200):
        if b - a <= rtol:
            break
        if f2 >= f1:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLD * (b - a)
            f2 = f(math.exp(x2))
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLD * (b - a)
            f1 = f(math.exp(x1))
    return math.exp(0.5 * (a + b))


def _maximize(f, lo, hi, rtol, n_scan):
    cache = {}

    def g(x):
        if x not in cache:
            cache[x] = f(x)
        return cache[x]

    if lo == hi:
        return lo, g(lo)
    xs = np.geomspace(lo, hi, n_scan)
    xs[0], xs[-1] = lo, hi
    vals = [g(float(x)) for x in xs]
    best = int(np.flatnonzero(_near_max(vals))[-1])
    a = float(xs[max(best - 1, 0)])
    b = float(xs[min(best + 1, len(xs) - 1)])
    g(_golden_max(g, a, b, rtol))
    # values equal up to quadrature noise are ties, resolved towards the brighter source
    cand = sorted(cache)
    x_best = cand[int(np.flatnonzero(_near_max([cache[x] for x in cand]))[-1])]
    return x_best, cache[x_best]


def _near_max(vals, rel=TIE_RTOL):
    v = np.asarray(vals, dtype=float)
    top = v.max()
    return v >= top - rel * abs(top)


def optimize_brightness(
    p: SystemParams,
    c: Constellation,
    e: EveModel,
    L: float,
    bracket: tuple[float, float] = DEFAULT_BRACKET,
    rtol: float = 1e-3,
    tol: float = DEFAULT_TOL,
    n_scan: int = N_SCAN,
) -> tuple[float, SweepRow]:
    """Choose N_S in ``bracket`` maximizing SKR_LB at distance ``L`` km.

    A log-spaced pre-scan picks the bracket for a golden-section refinement.  If
    SKR_LB vanishes over the whole search, N_S maximizing I_AB is returned and
    the row carries the ``zero_skr`` flag.
    """
    lo, hi = bracket
    if not (0 < lo <= hi):
        raise ValidationError(f"invalid N_S bracket {bracket!r}")
    kS = path_transmissivity(L, p.fiber_loss_alpha)
    R, beta = p.symbol_rate_R, p.reconciliation_beta
    info_cache = {}

    def info(N_S):
        if N_S not in info_cache:
            info_cache[N_S] = information_rate(p, c, kS, N_S, tol)
        return info_cache[N_S]

    def objective(N_S):
        return beta * info(N_S) - holevo_upper_bound(e, R, c.size, L, N_S)

    x, val = _maximize(objective, lo, hi, rtol, n_scan)
    flags = ()
    if val <= 0:
        x, _ = _maximize(info, lo, hi, rtol, n_scan)
        flags = ("zero_skr",)
    return x, _row(p, c, e, L, kS, x, info(x), flags)


def fixed_brightness_row(p, c, e, L, N_S, tol=DEFAULT_TOL) -> SweepRow:
    kS = path_transmissivity(L, p.fiber_loss_alpha)
    return _row(p, c, e, L, kS, N_S, information_rate(p, c, kS, N_S, tol))


def default_workers() -> int:
    env = os.environ.get("FLQKD_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"FLQKD_THREADS={env!r} is not an integer") from None
    return os.cpu_count() or 1


def sweep_distance(
    p: SystemParams,
    c: Constellation,
    e: EveModel,
    L_values,
    N_S: float | None = None,
    workers: int | None = None,
    **search,
) -> list[SweepRow]:
    """One row per distance, in input order; ``N_S`` fixes the brightness instead of optimizing."""
    L_values = list(L_values)
    if not L_values:
        raise ValidationError("L_values must be nonempty")
    for L in L_values:
        if not (L >= 0):
            raise ValidationError(f"L={L!r} must be >= 0")

    def point(L):
        try:
            if N_S is not None:
                return fixed_brightness_row(p, c, e, L, N_S, search.get("tol", DEFAULT_TOL))
            return optimize_brightness(p, c, e, L, **search)[1]
        except ValidationError as exc:
            raise ValidationError(f"L={L} km: {exc}") from exc
        except NumericalError as exc:
            raise NumericalError(f"L={L} km: {exc}") from exc

    workers = workers or default_workers()
    if workers == 1 or len(L_values) == 1:
        return [point(L) for L in L_values]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(point, L_values))
