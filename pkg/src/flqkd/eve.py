"""Intrusion-parameter estimation and the capped bound on Eve's Holevo-information rate.

The attack-specific Holevo bound itself is supplied from outside (a constant, a
callable, or a CSV table).  For QAM a full implementation would average the
symbol-dependent conditional entropies of Eve's state and bound her
unconditional entropy by that of a thermal state with the same covariance; only
the cap R log2(K) is computed here.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class MonitorRates:
    S_I: float
    S_A: float
    S_B: float
    C_IA: float
    C_IB: float
    Ct_IA: float
    Ct_IB: float

    def __post_init__(self):
        for name in ("S_I", "S_A", "S_B", "C_IA", "C_IB", "Ct_IA", "Ct_IB"):
            v = getattr(self, name)
            if not (v >= 0):
                raise ValidationError(f"monitor rate {name}={v!r} must be >= 0")

    def honest_looking(self) -> bool:
        return self.C_IA >= self.Ct_IA and self.C_IB >= self.Ct_IB


class IntrusionEstimate(NamedTuple):
    f_E: float
    raw: float
    implausible: bool


class ImplausibleRatesWarning(UserWarning):
    pass


def estimate_intrusion(r: MonitorRates) -> IntrusionEstimate:
    """f_E = 1 - [(C_IB - Ct_IB)/S_B] / [(C_IA - Ct_IA)/S_A], clamped to [0, 1]."""
    if r.S_A <= 0 or r.S_B <= 0:
        raise ValidationError("singles rates S_A and S_B must be > 0")
    alice = (r.C_IA - r.Ct_IA) / r.S_A
    if alice <= 0:
        raise ValidationError("Alice's coincidence contrast C_IA - Ct_IA must be > 0")
    raw = 1.0 - ((r.C_IB - r.Ct_IB) / r.S_B) / alice
    implausible = not (-0.05 <= raw <= 1.05) or not r.honest_looking()
    if implausible:
        warnings.warn(f"implausible monitor data: raw f_E = {raw:.6g}", ImplausibleRatesWarning)
    return IntrusionEstimate(min(max(raw, 0.0), 1.0), raw, implausible)


def read_rates_csv(path) -> list[MonitorRates]:
    """Rows with columns S_I,S_A,S_B,C_IA,C_IB,Ct_IA,Ct_IB."""
    cols = ("S_I", "S_A", "S_B", "C_IA", "C_IB", "Ct_IA", "Ct_IB")
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(row for row in fh if not row.startswith("#"))
        missing = [c for c in cols if c not in (reader.fieldnames or [])]
        if missing:
            raise ValidationError(f"{path}: missing column(s) {', '.join(missing)}")
        for row in reader:
            try:
                out.append(MonitorRates(**{c: float(row[c]) for c in cols}))
            except ValueError as exc:
                raise ValidationError(f"{path}: bad rate value: {exc}") from None
    if not out:
        raise ValidationError(f"{path}: no rate rows")
    return out


class ChiTable:
    """Tabulated chi_raw(L, N_S) in bits/s, linearly interpolated.

    Queries outside the tabulated N_S range at a tabulated L, or outside the
    tabulated L range, return +inf so the cap applies.
    """

    def __init__(self, L, N_S, chi):
        L = np.asarray(L, float)
        N_S = np.asarray(N_S, float)
        chi = np.asarray(chi, float)
        if np.any(chi < 0):
            raise ValidationError("chi table values must be >= 0")
        self._curves = {}
        for Lv in np.unique(L):
            sel = L == Lv
            order = np.argsort(N_S[sel])
            self._curves[float(Lv)] = (N_S[sel][order], chi[sel][order])
        self._Ls = np.array(sorted(self._curves))

    @classmethod
    def from_csv(cls, path) -> "ChiTable":
        L, N, X = [], [], []
        with open(path, newline="") as fh:
            reader = csv.DictReader(row for row in fh if not row.startswith("#"))
            for col in ("L_km", "N_S", "chi_bits_per_s"):
                if col not in (reader.fieldnames or []):
                    raise ValidationError(f"{path}: missing column {col}")
            for row in reader:
                L.append(float(row["L_km"]))
                N.append(float(row["N_S"]))
                X.append(float(row["chi_bits_per_s"]))
        if not L:
            raise ValidationError(f"{path}: empty chi table")
        return cls(L, N, X)

    def _at_L(self, Lv, N_S):
        ns, chi = self._curves[Lv]
        if N_S < ns[0] or N_S > ns[-1]:
            return math.inf
        return float(np.interp(N_S, ns, chi))

    def __call__(self, L: float, N_S: float) -> float:
        Ls = self._Ls
        hit = np.flatnonzero(np.isclose(Ls, L, rtol=0, atol=1e-9))
        if hit.size:
            return self._at_L(float(Ls[hit[0]]), N_S)
        if L < Ls[0] or L > Ls[-1]:
            return math.inf
        j = int(np.searchsorted(Ls, L))
        L0, L1 = float(Ls[j - 1]), float(Ls[j])
        x0, x1 = self._at_L(L0, N_S), self._at_L(L1, N_S)
        w = (L - L0) / (L1 - L0)
        return (1 - w) * x0 + w * x1


@dataclass(frozen=True)
class EveModel:
    """Source of Eve's raw Holevo-rate bound, later capped at R log2(K).

    ``chi_raw`` is a constant in bits/s (``math.inf`` means cap-only), or a
    callable ``(L_km, N_S) -> bits/s`` such as a :class:`ChiTable`.
    """

    chi_raw: float | Callable[[float, float], float] = math.inf
    label: str = field(default="cap-only")

    @property
    def cap_only(self) -> bool:
        return not callable(self.chi_raw) and math.isinf(self.chi_raw)

    def raw(self, L: float | None = None, N_S: float | None = None) -> float:
        if callable(self.chi_raw):
            if L is None or N_S is None:
                raise ValidationError("a tabulated Eve model needs L and N_S")
            value = float(self.chi_raw(L, N_S))
        else:
            value = float(self.chi_raw)
        if not (value >= 0):
            raise ValidationError(f"chi_raw={value!r} must be >= 0")
        return value


def cap_only() -> EveModel:
    return EveModel(math.inf, "cap-only")


def holevo_upper_bound(m: EveModel, R: float, K: int, L: float | None = None, N_S: float | None = None) -> float:
    """min(chi_raw, R log2 K) in bits/s."""
    return min(m.raw(L, N_S), R * math.log2(K))
