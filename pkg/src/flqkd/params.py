"""Protocol constants, their validation, and the fiber-channel model."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError


@dataclass(frozen=True)
class SystemParams:
    """Physical and protocol constants of a floodlight-QKD link.

    Brightnesses are photons/mode, rates are per second.  ``modes_per_symbol_M``
    and ``amp_brightness_NB`` are derived quantities; when omitted they are
    filled in from ``symbol_duration_T * bandwidth_W`` and ``gain_GB - 1``.
    """

    bandwidth_W: float
    symbol_duration_T: float
    tap_alice_kA: float
    tap_bob_kB: float
    gain_GB: float
    lo_brightness_NLO: float
    homodyne_eta: float
    ase_spdc_ratio_n: float
    reconciliation_beta: float
    intrusion_fE: float
    fiber_loss_alpha: float
    modes_per_symbol_M: int | None = field(default=None)
    amp_brightness_NB: float | None = field(default=None)

    def __post_init__(self):
        if self.modes_per_symbol_M is None:
            object.__setattr__(
                self, "modes_per_symbol_M", int(round(self.symbol_duration_T * self.bandwidth_W))
            )
        if self.amp_brightness_NB is None:
            object.__setattr__(self, "amp_brightness_NB", self.gain_GB - 1.0)

    @property
    def symbol_rate_R(self) -> float:
        return 1.0 / self.symbol_duration_T

    def replace(self, **changes) -> "SystemParams":
        """Copy with ``changes`` applied; derived fields are recomputed unless given."""
        if "gain_GB" in changes and "amp_brightness_NB" not in changes:
            changes["amp_brightness_NB"] = None
        if ({"bandwidth_W", "symbol_duration_T"} & changes.keys()) and "modes_per_symbol_M" not in changes:
            changes["modes_per_symbol_M"] = None
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SystemParams":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"unknown parameter key(s): {', '.join(unknown)}")
        missing = sorted(
            f.name
            for f in dataclasses.fields(cls)
            if f.default is dataclasses.MISSING and f.name not in data
        )
        if missing:
            raise ValidationError(f"missing parameter key(s): {', '.join(missing)}")
        return validate(cls(**data))


def _in_open_unit(x):
    return 0.0 < x < 1.0


_CHECKS = (
    ("bandwidth_W", lambda p: p.bandwidth_W > 0, "must be > 0"),
    ("symbol_duration_T", lambda p: p.symbol_duration_T > 0, "must be > 0"),
    (
        "modes_per_symbol_M",
        lambda p: isinstance(p.modes_per_symbol_M, int)
        and p.modes_per_symbol_M >= 1
        and p.modes_per_symbol_M == round(p.symbol_duration_T * p.bandwidth_W)
        and abs(p.symbol_duration_T * p.bandwidth_W - p.modes_per_symbol_M)
        < 1e-6 * p.modes_per_symbol_M,
        "must equal T*W, which must be a positive integer",
    ),
    ("tap_alice_kA", lambda p: _in_open_unit(p.tap_alice_kA), "must lie in (0, 1)"),
    ("tap_bob_kB", lambda p: _in_open_unit(p.tap_bob_kB), "must lie in (0, 1)"),
    ("gain_GB", lambda p: p.gain_GB >= 1.0, "must be >= 1"),
    ("amp_brightness_NB", lambda p: p.amp_brightness_NB == p.gain_GB - 1.0, "must equal gain_GB - 1"),
    ("lo_brightness_NLO", lambda p: p.lo_brightness_NLO > 0, "must be > 0"),
    ("homodyne_eta", lambda p: 0.0 < p.homodyne_eta <= 1.0, "must lie in (0, 1]"),
    ("ase_spdc_ratio_n", lambda p: p.ase_spdc_ratio_n >= 0, "must be >= 0"),
    ("reconciliation_beta", lambda p: 0.0 < p.reconciliation_beta <= 1.0, "must lie in (0, 1]"),
    ("intrusion_fE", lambda p: 0.0 <= p.intrusion_fE <= 1.0, "must lie in [0, 1]"),
    ("fiber_loss_alpha", lambda p: p.fiber_loss_alpha >= 0, "must be >= 0"),
)


def validate(raw: SystemParams) -> SystemParams:
    """Return ``raw`` unchanged if every invariant holds, else raise naming the first bad field."""
    for name, check, message in _CHECKS:
        value = getattr(raw, name)
        try:
            ok = bool(check(raw)) and not (isinstance(value, float) and math.isnan(value))
        except TypeError:
            ok = False
        if not ok:
            raise ValidationError(f"{name}={value!r} {message}")
    return raw


PRESETS = {
    "zhuang2016": dict(
        bandwidth_W=2e12,
        symbol_duration_T=1e-10,
        tap_alice_kA=0.01,
        tap_bob_kB=0.01,
        gain_GB=1e4,
        lo_brightness_NLO=1e4,
        homodyne_eta=0.9,
        ase_spdc_ratio_n=99.0,
        reconciliation_beta=0.94,
        intrusion_fE=0.01,
        fiber_loss_alpha=0.2,
    ),
}


def preset(name: str = "zhuang2016") -> SystemParams:
    try:
        values = PRESETS[name]
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
    return validate(SystemParams(**values))


def load_params(path: str | Path) -> SystemParams:
    """Read a JSON document whose keys are SystemParams field names."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: expected a JSON object")
    return SystemParams.from_dict(data)


@dataclass(frozen=True)
class ChannelGeometry:
    length_L: float
    transmissivity_kS: float


def path_transmissivity(L: float, alpha: float) -> float:
    """Transmissivity 10^(-alpha L / 10) of ``L`` km of fiber with ``alpha`` dB/km loss."""
    if not (L >= 0):
        raise ValidationError(f"fiber length L={L!r} must be >= 0")
    if not (alpha >= 0):
        raise ValidationError(f"fiber loss alpha={alpha!r} must be >= 0")
    return 10.0 ** (-alpha * L / 10.0)


def channel_geometry(L: float, params: SystemParams) -> ChannelGeometry:
    return ChannelGeometry(L, path_transmissivity(L, params.fiber_loss_alpha))


def plob_bits_per_mode(kS: float) -> float:
    """Repeaterless secret-key capacity -log2(1 - kS) of a pure-loss channel."""
    if not (0.0 <= kS < 1.0):
        raise ValidationError(f"transmissivity {kS!r} must lie in [0, 1) for a finite bound")
    return -math.log1p(-kS) / math.log(2.0)
