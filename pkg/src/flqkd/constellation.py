"""KPSK and square-lattice QAM symbol tables, decision regions and decoding."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class AngularSector:
    center: float
    half_width: float


@dataclass(frozen=True)
class VoronoiCell:
    """Axis-aligned rectangle; infinite bounds mark the outer cells."""

    I_lo: float
    I_hi: float
    Q_lo: float
    Q_hi: float


@dataclass(frozen=True)
class Constellation:
    """Ordered symbol table of (kappa_q, theta_q) pairs.

    ``kind`` is ``"kpsk"`` (``order`` = K) or ``"qam"`` (``order`` = d, 4 d^2 symbols).
    QAM symbol k = i * 2d + j sits at lattice point (2i - 2d + 1) + 1j (2j - 2d + 1).
    """

    kind: str
    order: int
    symbols: tuple[tuple[float, float], ...]

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def spec(self) -> str:
        return f"{self.kind}:{self.order}"

    def unit_points(self) -> np.ndarray:
        """Noise-free symbol positions with the outermost at unit magnitude."""
        kq = np.array([s[0] for s in self.symbols])
        th = np.array([s[1] for s in self.symbols])
        return np.sqrt(kq) * np.exp(1j * th)

    def noise_free_points(self, scale: float) -> np.ndarray:
        """Noise-free (I_k + i Q_k) for outermost-point amplitude ``scale`` (= M eta c_RB)."""
        return scale * self.unit_points()

    # QAM helpers -----------------------------------------------------------

    def _qam_levels(self, scale: float) -> np.ndarray:
        d = self.order
        unit = scale / ((2 * d - 1) * math.sqrt(2.0))
        return unit * (2.0 * np.arange(2 * d) - 2 * d + 1)

    def _qam_edges(self, scale: float) -> np.ndarray:
        levels = self._qam_levels(scale)
        mids = 0.5 * (levels[1:] + levels[:-1])
        return np.concatenate(([-np.inf], mids, [np.inf]))

    def decision_regions(self, scale: float = 1.0) -> list:
        if self.kind == "kpsk":
            K = self.order
            return [AngularSector(th, math.pi / K) for _, th in self.symbols]
        edges = self._qam_edges(scale)
        n = 2 * self.order
        return [
            VoronoiCell(edges[i], edges[i + 1], edges[j], edges[j + 1])
            for i in range(n)
            for j in range(n)
        ]


def build_kpsk(K: int) -> Constellation:
    if not isinstance(K, (int, np.integer)) or K < 2:
        raise ValidationError(f"KPSK order K={K!r} must be an integer >= 2")
    K = int(K)
    return Constellation("kpsk", K, tuple((1.0, 2 * math.pi * k / K) for k in range(K)))


def build_qam(d: int) -> Constellation:
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValidationError(f"QAM order d={d!r} must be an integer >= 1")
    d = int(d)
    pts = [complex(2 * i - 2 * d + 1, 2 * j - 2 * d + 1) for i in range(2 * d) for j in range(2 * d)]
    rmax2 = max(abs(c) ** 2 for c in pts)
    symbols = []
    for c in pts:
        theta = math.atan2(c.imag, c.real) % (2 * math.pi)
        symbols.append((abs(c) ** 2 / rmax2, theta))
    return Constellation("qam", d, tuple(symbols))


def parse_constellation(spec: str) -> Constellation:
    """Build from ``"kpsk:K"`` or ``"qam:d"``."""
    kind, sep, num = spec.strip().lower().partition(":")
    if not sep:
        raise ValidationError(f"constellation spec {spec!r} must look like 'kpsk:K' or 'qam:d'")
    try:
        n = int(num)
    except ValueError:
        raise ValidationError(f"constellation order in {spec!r} is not an integer") from None
    if kind == "kpsk":
        return build_kpsk(n)
    if kind == "qam":
        return build_qam(n)
    raise ValidationError(f"unknown constellation kind {kind!r}")


def _nearest_level(x: np.ndarray, levels: np.ndarray) -> np.ndarray:
    # Evenly spaced levels: round to the nearest index, ties go to the lower one.
    step = levels[1] - levels[0]
    t = (x - levels[0]) / step
    idx = np.ceil(t - 0.5).astype(np.int64)
    return np.clip(idx, 0, len(levels) - 1)


def decide(c: Constellation, scale: float | None, I, Q) -> np.ndarray:
    """Decode (I, Q) points to symbol indices.

    KPSK uses angular sectors of half-width pi/K centred on 2 pi k / K and needs
    no scale.  QAM uses minimum Euclidean distance to the noise-free points for
    outermost amplitude ``scale``.  Boundary points go to the lowest index.
    """
    I = np.asarray(I, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if c.kind == "kpsk":
        K = c.order
        t = (np.arctan2(Q, I) + math.pi / K) / (2 * math.pi / K)
        j = np.floor(t)
        k = np.mod(j, K).astype(np.int64)
        on_edge = t == j
        if np.any(on_edge):
            k = np.where(on_edge, np.minimum(k, np.mod(k - 1, K)), k)
        return k
    if scale is None or not scale > 0:
        raise ValidationError("QAM decoding needs a positive noise-free scale")
    levels = c._qam_levels(scale)
    i = _nearest_level(I, levels)
    j = _nearest_level(Q, levels)
    return i * (2 * c.order) + j
