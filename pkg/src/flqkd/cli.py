"""Command-line entry point: ``flqkd <subcommand> [options]``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import sys
from dataclasses import dataclass

from . import eve as eve_mod
from .constellation import parse_constellation
from .errors import NumericalError, ValidationError
from .gaussian_state import symbol_moments, symbol_stats
from .info import DEFAULT_TOL, mutual_information_bits, transition_matrix
from .montecarlo import McConfig, binomial_z, empirical_transition
from .params import PRESETS, SystemParams, path_transmissivity, preset
from .skr import CSV_COLUMNS, DEFAULT_BRACKET, default_workers, information_rate, sweep_distance

DEFAULT_L = "50"
DEFAULT_N_S = 0.5


@dataclass
class RunConfig:
    preset: str | None = None
    params: dict | None = None
    constellation: str = "kpsk:2"
    L: str = DEFAULT_L
    N_S: float | None = None
    chi: float | None = None
    chi_table: str | None = None
    tol: float = DEFAULT_TOL
    bracket: tuple[float, float] = DEFAULT_BRACKET
    stats: str = "auto"
    trials: int = 100_000
    seed: int = 20180725
    rates: str | None = None

    def system_params(self) -> SystemParams:
        if self.preset is not None and self.params is not None:
            raise ValidationError("give either a preset or explicit params, not both")
        if self.params is not None:
            return SystemParams.from_dict(self.params)
        return preset(self.preset or "zhuang2016")

    def eve_model(self) -> eve_mod.EveModel:
        if self.chi is not None and self.chi_table is not None:
            raise ValidationError("give either --chi or --chi-table, not both")
        if self.chi_table is not None:
            return eve_mod.EveModel(eve_mod.ChiTable.from_csv(self.chi_table), f"table:{self.chi_table}")
        if self.chi is not None:
            return eve_mod.EveModel(float(self.chi), f"constant:{self.chi!r}")
        return eve_mod.cap_only()

    def resolved(self) -> dict:
        d = dataclasses.asdict(self)
        d["params"] = self.system_params().to_dict()
        d["preset"] = self.preset if self.params is None else None
        d["bracket"] = list(self.bracket)
        return d


def parse_L(text: str) -> list[float]:
    """``"50"``, ``"0,25,50"`` or inclusive range ``"start:stop:step"``."""
    text = str(text).strip()
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise ValidationError(f"bad L range {text!r}")
            n = int(round((stop - start) / step)) + 1
            return [start + i * step for i in range(n)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"cannot parse L values {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    return repr(float(x))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override its values")
    common.add_argument("--preset", choices=sorted(PRESETS))
    common.add_argument("--constellation", help="kpsk:K or qam:d")
    common.add_argument("--L", help="distances in km: 50 | 0,25,50 | start:stop:step")
    common.add_argument("--N-S", dest="N_S", type=float, help="source brightness, photons/mode")
    common.add_argument("--chi", type=float, help="constant raw Holevo-rate bound, bits/s")
    common.add_argument("--chi-table", help="CSV with L_km,N_S,chi_bits_per_s")
    common.add_argument("--tol", type=float, help="absolute quadrature tolerance per entry")
    common.add_argument("--stats", choices=("auto", "exact", "isotropic"),
                        help="conditional statistics (auto: isotropic for QAM)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per symbol")
    common.add_argument("--seed", type=int, help="Monte Carlo seed")
    common.add_argument("--out", help="output file (default stdout)")

    parser = _Parser(prog="flqkd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("iq-stats", parents=[common], help="conditional (I,Q) statistics per symbol")
    sub.add_parser("transition", parents=[common], help="transition matrix CSV")
    sub.add_parser("info-rate", parents=[common], help="Shannon-information rate I_AB")
    sw = sub.add_parser("skr-sweep", parents=[common], help="SKR lower bound versus distance")
    sw.add_argument("--emit-plot-data", metavar="PATH", help="also write (x,y,series) triples")
    sub.add_parser("optimize-ns", parents=[common], help="optimized brightness at one distance")
    fe = sub.add_parser("monitor-fe", parents=[common], help="intrusion parameter from monitor rates")
    fe.add_argument("--rates", help="CSV with S_I,S_A,S_B,C_IA,C_IB,Ct_IA,Ct_IB")
    mc = sub.add_parser("mc-validate", parents=[common], help="quadrature versus Monte Carlo report")
    mc.add_argument("--dump-samples", metavar="PATH", help="write sampled (symbol,I,Q) rows")
    return parser


def make_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from None
        known = {f.name for f in dataclasses.fields(RunConfig)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"unknown config key(s): {', '.join(unknown)}")
        if "bracket" in data:
            data["bracket"] = tuple(data["bracket"])
        if "L" in data and not isinstance(data["L"], str):
            data["L"] = ",".join(repr(float(x)) for x in data["L"])
        cfg = dataclasses.replace(cfg, **data)
    for name in ("preset", "constellation", "L", "N_S", "chi", "chi_table", "tol", "stats",
                 "trials", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "rates", None) is not None:
        cfg.rates = args.rates
    if args.preset is not None:
        cfg.params = None
    return cfg


def _header(command: str, cfg: RunConfig) -> str:
    blob = json.dumps({"command": command, **cfg.resolved()}, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(blob.encode()).hexdigest()
    return f"# flqkd {command} config-sha256={digest}\n# config: {blob}\n"


def _isotropic(choice, constellation):
    if choice == "auto":
        return constellation.kind == "qam"
    return choice == "isotropic"


def _write_csv(buf, header, rows):
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def run(command: str, cfg: RunConfig, out, extra=None) -> int:
    """Execute one subcommand, writing its document to ``out``; returns the exit status."""
    extra = extra or {}
    p = cfg.system_params()
    c = parse_constellation(cfg.constellation)
    Ls = parse_L(cfg.L)
    if not Ls:
        raise ValidationError("no L values given")
    N_S = cfg.N_S if cfg.N_S is not None else DEFAULT_N_S
    out.write(_header(command, cfg))

    if command == "iq-stats":
        iso = _isotropic(cfg.stats, c)
        rows = []
        for L in Ls:
            kS = path_transmissivity(L, p.fiber_loss_alpha)
            for k, ((kq, th), s) in enumerate(zip(c.symbols, symbol_stats(p, c, kS, N_S, iso))):
                rows.append([_fmt(L), k, _fmt(kq), _fmt(th), _fmt(s.mean_I), _fmt(s.mean_Q),
                             _fmt(s.var_I), _fmt(s.var_Q), _fmt(s.cov_IQ)])
        _write_csv(out, ["L_km", "symbol", "kappa_q", "theta_q", "mean_I", "mean_Q",
                         "var_I", "var_Q", "cov_IQ"], rows)
        return 0

    if command == "transition":
        kS = path_transmissivity(Ls[0], p.fiber_loss_alpha)
        stats = symbol_stats(p, c, kS, N_S, _isotropic(cfg.stats, c))
        transition_matrix(c, stats, cfg.tol).to_csv(out)
        return 0

    if command == "info-rate":
        rows = []
        for L in Ls:
            kS = path_transmissivity(L, p.fiber_loss_alpha)
            I_AB = information_rate(p, c, kS, N_S, cfg.tol, _isotropic(cfg.stats, c))
            rows.append([_fmt(L), _fmt(N_S), _fmt(I_AB), _fmt(I_AB / p.symbol_rate_R)])
        _write_csv(out, ["L_km", "N_S", "I_AB_bits_per_s", "bits_per_symbol"], rows)
        return 0

    if command in ("skr-sweep", "optimize-ns"):
        e = cfg.eve_model()
        if command == "optimize-ns":
            Ls = Ls[:1]
        search = dict(bracket=tuple(cfg.bracket), tol=cfg.tol)
        rows = sweep_distance(p, c, e, Ls, N_S=cfg.N_S if command == "skr-sweep" else None,
                              workers=default_workers(), **search)
        _write_csv(out, list(CSV_COLUMNS), [r.csv_fields() for r in rows])
        plot_path = extra.get("emit_plot_data")
        if plot_path:
            with open(plot_path, "w") as fh:
                fh.write(_header(command, cfg))
                _write_csv(fh, ["x", "y", "series"],
                           [[_fmt(r.L), _fmt(r.SKR_LB), f"SKR_LB {c.spec}"] for r in rows]
                           + [[_fmt(r.L), _fmt(r.N_S_opt), f"N_S {c.spec}"] for r in rows])
        return 0

    if command == "monitor-fe":
        if not cfg.rates:
            raise ValidationError("monitor-fe needs --rates")
        rows = []
        for r in eve_mod.read_rates_csv(cfg.rates):
            est = eve_mod.estimate_intrusion(r)
            rows.append([format(est.f_E, ".12g"), format(est.raw, ".12g"), int(est.implausible)])
        _write_csv(out, ["f_E", "f_E_raw", "implausible"], rows)
        return 0

    if command == "mc-validate":
        kS = path_transmissivity(Ls[0], p.fiber_loss_alpha)
        moments = symbol_moments(p, c, kS, N_S)
        exact = symbol_stats(p, c, kS, N_S, isotropic=False)
        quad = transition_matrix(c, exact, cfg.tol)
        mc_cfg = McConfig(cfg.trials, cfg.seed, p.homodyne_eta, p.modes_per_symbol_M,
                          workers=default_workers())
        dump_path = extra.get("dump_samples")
        if dump_path:
            with open(dump_path, "w") as fh:
                emp = empirical_transition(c, moments, mc_cfg, dump=fh)
        else:
            emp = empirical_transition(c, moments, mc_cfg)
        z = binomial_z(quad.entries, emp.entries, cfg.trials)
        report = {
            "constellation": c.spec,
            "L_km": Ls[0],
            "N_S": N_S,
            "trials_per_symbol": cfg.trials,
            "max_binomial_z": float(z.max()),
            "max_abs_diff": float(abs(quad.entries - emp.entries).max()),
            "I_AB_bits_per_symbol_quadrature": mutual_information_bits(quad.entries),
            "I_AB_bits_per_symbol_montecarlo": mutual_information_bits(emp.entries),
            "pass_5_sigma": bool(z.max() <= 5.0),
        }
        if c.kind == "qam":
            iso = transition_matrix(c, symbol_stats(p, c, kS, N_S, isotropic=True), cfg.tol)
            report["max_binomial_z_isotropic"] = float(binomial_z(iso.entries, emp.entries, cfg.trials).max())
        json.dump(report, out, indent=2, sort_keys=True)
        out.write("\n")
        return 0 if report["pass_5_sigma"] else 2

    raise ValidationError(f"unknown subcommand {command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    extra = {k: getattr(args, k, None) for k in ("emit_plot_data", "dump_samples")}
    try:
        cfg = make_config(args)
        buf = io.StringIO()
        status = run(args.command, cfg, buf, extra)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(buf.getvalue())
        else:
            sys.stdout.write(buf.getvalue())
        return status
    except ValidationError as exc:
        print(f"flqkd: error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"flqkd: numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"flqkd: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
