"""Mode-level Monte Carlo oracle for Alice's dual-homodyne (I, Q) outcomes.

Every return/LO mode pair is drawn as a pair of correlated complex Gaussian
field amplitudes whose second moments equal the normally ordered quantum
moments (the state's Glauber P function is this Gaussian).  The four balanced
detectors then count Poisson photons with means given by the classical fields
after the 50-50 splits and the efficiency-eta homodyne mixing; vacuum inputs
contribute no classical field.  Photocount statistics of this construction
coincide with the quantum ones, so sample moments converge to the closed-form
conditional moments without using them.

Random streams come from the counter-based Philox generator, one stream per
(symbol, block) derived through ``numpy.random.SeedSequence``.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import _fallback
from .constellation import Constellation, decide
from .errors import ValidationError
from .gaussian_state import ModePairMoments
from .info import TransitionMatrix

try:
    if os.environ.get("FLQKD_BACKEND", "").lower() == "python":
        raise ImportError("python backend requested")
    from . import _kernel

    BACKEND = "compiled"
    _sample_block = _kernel.sample_block
except ImportError:
    _kernel = None
    BACKEND = "python"
    _sample_block = _fallback.sample_block


BACKENDS = {"python": _fallback.sample_block}
if _kernel is not None:
    BACKENDS["compiled"] = _kernel.sample_block


@dataclass(frozen=True)
class McConfig:
    trials_per_symbol: int
    seed: int
    eta: float
    M: int
    block_size: int = 8192
    workers: int = 1

    def __post_init__(self):
        if self.trials_per_symbol < 1:
            raise ValidationError("trials_per_symbol must be >= 1")
        if self.M < 1:
            raise ValidationError("M must be >= 1")
        if not (0.0 < self.eta <= 1.0):
            raise ValidationError("eta must lie in (0, 1]")
        if self.block_size < 1:
            raise ValidationError("block_size must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise ValidationError("seed must be a 64-bit unsigned integer")


def stream(seed: int, stream_id: int, block: int = 0) -> np.random.Philox:
    return np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream_id, block)))


def _field_parameters(m: ModePairMoments):
    if not m.is_physical():
        raise ValidationError(f"unphysical mode-pair moments: {m}")
    n, N, c = m.return_photon_number, m.lo_photon_number, m.cross_correlation
    if n > 0:
        sb = math.sqrt(n)
        cc = c / sb
        s2 = N - abs(c) ** 2 / n
    else:
        sb, cc, s2 = 0.0, 0j, N
    return sb, cc.real, cc.imag, math.sqrt(max(s2, 0.0))


def sample_iq(
    m: ModePairMoments, cfg: McConfig, stream_id: int = 0, backend: str | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``cfg.trials_per_symbol`` (I, Q) outcomes for one symbol's moments."""
    sampler = _sample_block if backend is None else BACKENDS[backend]
    sb, cr, ci, s = _field_parameters(m)
    q = cfg.eta / 4.0
    n_total = cfg.trials_per_symbol
    blocks = [
        (b, min(cfg.block_size, n_total - b * cfg.block_size))
        for b in range(-(-n_total // cfg.block_size))
    ]

    def run(block):
        b, n = block
        return sampler(stream(cfg.seed, stream_id, b), n, cfg.M, sb, cr, ci, s, q)

    if cfg.workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    I = np.concatenate([p[0] for p in parts]).astype(float)
    Q = np.concatenate([p[1] for p in parts]).astype(float)
    return I, Q


def decoding_scale(moments: list[ModePairMoments], M: int, eta: float) -> float:
    """Noise-free amplitude M eta c_RB of the outermost symbol."""
    return M * eta * max(abs(m.cross_correlation) for m in moments)


def empirical_transition(
    c: Constellation,
    moments: list[ModePairMoments] | Callable[[int], ModePairMoments],
    cfg: McConfig,
    dump=None,
) -> TransitionMatrix:
    """Empirical Pr(kt | k) from decoding sampled outcomes; ``dump`` receives (symbol, I, Q) rows."""
    if callable(moments):
        moments = [moments(k) for k in range(c.size)]
    if len(moments) != c.size:
        raise ValidationError(f"need {c.size} symbol moments, got {len(moments)}")
    scale = decoding_scale(moments, cfg.M, cfg.eta)
    K = c.size
    counts = np.zeros((K, K), dtype=np.int64)
    writer = csv.writer(dump, lineterminator="\n") if dump is not None else None
    if writer is not None:
        writer.writerow(["symbol", "I", "Q"])
    for k, m in enumerate(moments):
        I, Q = sample_iq(m, cfg, stream_id=k)
        dec = decide(c, scale if scale > 0 else 1.0, I, Q)
        counts[k] = np.bincount(dec, minlength=K)
        if writer is not None:
            writer.writerows((k, int(i), int(q)) for i, q in zip(I, Q))
    return TransitionMatrix(counts / cfg.trials_per_symbol, 0.0)


class MomentCheck(NamedTuple):
    mean_I: float
    mean_Q: float
    var_I: float
    var_Q: float
    cov_IQ: float
    z_scores: dict


def sample_moments(I: np.ndarray, Q: np.ndarray, expected) -> MomentCheck:
    """Sample moments and their z-scores against ``expected`` (a ConditionalIQ)."""
    n = I.size
    mI, mQ = I.mean(), Q.mean()
    dI, dQ = I - mI, Q - mQ
    vI, vQ = dI @ dI / (n - 1), dQ @ dQ / (n - 1)
    cIQ = dI @ dQ / (n - 1)
    # standard errors from fourth moments of the sample itself
    se_vI = math.sqrt(np.var(dI * dI) / n)
    se_vQ = math.sqrt(np.var(dQ * dQ) / n)
    se_c = math.sqrt(np.var(dI * dQ) / n)
    z = {
        "mean_I": (mI - expected.mean_I) / math.sqrt(vI / n),
        "mean_Q": (mQ - expected.mean_Q) / math.sqrt(vQ / n),
        "var_I": (vI - expected.var_I) / se_vI,
        "var_Q": (vQ - expected.var_Q) / se_vQ,
        "cov_IQ": (cIQ - expected.cov_IQ) / se_c,
    }
    return MomentCheck(mI, mQ, vI, vQ, cIQ, z)


def normalized_cumulants(x: np.ndarray) -> tuple[float, float, float, float]:
    """(skewness, excess kurtosis, se_skew, se_kurt) with large-sample Gaussian SEs."""
    x = np.asarray(x, float)
    n = x.size
    d = x - x.mean()
    m2 = np.mean(d**2)
    skew = np.mean(d**3) / m2**1.5
    kurt = np.mean(d**4) / m2**2 - 3.0
    return float(skew), float(kurt), math.sqrt(6.0 / n), math.sqrt(24.0 / n)


def binomial_z(quad: np.ndarray, emp: np.ndarray, trials: int) -> np.ndarray:
    """|emp - quad| in units of the binomial standard error at the quadrature probability."""
    p = np.clip(quad, 0.0, 1.0)
    se = np.sqrt(p * (1.0 - p) / trials)
    diff = np.abs(emp - quad)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / se, np.where(diff > 0, np.inf, 0.0))
    return z
