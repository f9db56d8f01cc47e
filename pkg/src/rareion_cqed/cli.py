"""Command-line front end: ``rareion-cqed <subcommand> ...``.

Arrays go to CSV, scalars and summaries to JSON, and every run writes a
``manifest.json`` that echoes all parameters (defaults included). Errors are
reported as one JSON line on stderr; exit status 2 means a usage error and 3 a
numeric or physics failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import coupling, excitation_dynamics as dyn, ion_catalog, linear_response as lr, wgm_design
from .units import UnitError, parse_length, parse_number, parse_rate, parse_time, parse_volume

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
SUBCOMMANDS = ("catalog", "figures", "design", "throwcatch", "spectrum", "fid")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    subcommand: str
    out_dir: Path | None
    params: dict = field(default_factory=dict)
    catalog_path: str | None = None


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        # mkstemp creates 0600; give outputs the usual umask-based mode
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _hz(rate):
    return rate / (2 * math.pi)


def _slug(text: str) -> str:
    keep = [ch if ch.isalnum() else "_" for ch in text]
    return "_".join(filter(None, "".join(keep).split("_")))


# --- subcommand bodies: (config, catalog loader) -> (list of outputs, text for stdout)

def _cmd_catalog(cfg, load):
    p = cfg.params
    records = load()
    outputs = {}
    if p["show"]:
        rec = ion_catalog.get_transition(records, p["show"])
        lines = [
            f"id                   {rec.id}",
            f"wavelength (nm)      {rec.wavelength_vac * 1e9:.6g}",
            f"oscillator strength  {rec.oscillator_strength:.4g}",
            f"T1 (us)              {rec.T1 * 1e6:.6g}",
            f"T2 (us)              {rec.T2 * 1e6:.6g}   ({rec.T2_field_note})",
            f"host index           {rec.host_index:.4g}",
        ]
        text = "\n".join(lines)
    else:
        text = "\n".join(r.id for r in records)
    outputs["catalog.cat"] = ion_catalog.serialize_catalog(records)
    return outputs, text


def _resolve_ions(records, ion):
    if ion == "all":
        return list(records)
    return [ion_catalog.get_transition(records, ion)]


def _figures_rows(fig: coupling.CavityFigures):
    return [
        ("mu (C m)", fig.mu, None),
        ("T_spon (s)", fig.T_spon, None),
        ("chi_L", fig.chi_L, None),
        ("beta", fig.beta, None),
        ("g (rad/s)", fig.g, _hz(fig.g)),
        ("kappa (rad/s)", fig.kappa, _hz(fig.kappa)),
        ("gamma (rad/s)", fig.gamma, _hz(fig.gamma)),
        ("gamma_h (rad/s)", fig.gamma_h, _hz(fig.gamma_h)),
        ("N0_pop", fig.N0_pop, None),
        ("N0_ph", fig.N0_ph, None),
        ("n0", fig.n0, None),
    ]


def _format_rows(rows):
    lines = [f"{'quantity':<18}{'value':>14}  {'Hz equivalent (rate/2pi)':>26}"]
    for name, value, hz in rows:
        extra = f"{hz:>26.6g}" if hz is not None else ""
        lines.append(f"{name:<18}{value:>14.6g}  {extra}")
    return "\n".join(lines)


def _cmd_figures(cfg, load):
    p = cfg.params
    if p["ion"] is None:
        missing = [k for k in ("g", "kappa", "gamma") if p[k] is None]
        if missing:
            raise UsageError("figures needs --ion or all of --g --kappa --gamma (missing "
                             + ", ".join("--" + m for m in missing) + ")")
        rates = coupling.RatesInput(p["g"], p["kappa"], p["gamma"], p["gamma_p"])
        result = {
            "g": rates.g, "kappa": rates.kappa, "gamma": rates.gamma, "gamma_p": rates.gamma_p,
            "gamma_h": rates.gamma_h, "N0_pop": rates.N0_pop, "N0_ph": rates.N0_ph, "n0": rates.n0,
        }
        rows = [(k + (" (rad/s)" if k.startswith(("g", "k")) else ""), v,
                 _hz(v) if k in ("g", "kappa", "gamma", "gamma_p", "gamma_h") else None)
                for k, v in result.items()]
        return {"figures.json": _json(result)}, _format_rows(rows)

    if p["Q"] is None or (p["radius"] is None and p["volume"] is None):
        raise UsageError("figures --ion needs --Q and one of --radius / --volume")
    outputs, texts, table = {}, [], {}
    for rec in _resolve_ions(load(), p["ion"]):
        radius = p["radius"] if p["radius"] is not None else float("nan")
        if p["volume"] is not None:
            res = wgm_design.ResonatorSpec(radius if p["radius"] is not None else 1.0,
                                           rec.host_index, rec.wavelength_vac, p["Q"], p["volume"])
        else:
            res = wgm_design.ResonatorSpec.for_transition(rec, radius, p["Q"])
        fig = wgm_design.figures_for(rec, res)
        entry = {name: getattr(fig, name) for name in fig.__dataclass_fields__}
        entry["mode_volume_m3"] = res.mode_volume()
        entry["hz_equivalents"] = {k: _hz(getattr(fig, k)) for k in ("g", "kappa", "gamma", "gamma_h")}
        table[rec.id] = entry
        texts.append(f"# {rec.id}\n" + _format_rows(_figures_rows(fig)))
    outputs["figures.json"] = _json(table)
    return outputs, "\n\n".join(texts)


def _cmd_design(cfg, load):
    p = cfg.params
    target = {"n0pop": "N0_pop", "n0ph": "N0_ph"}[p["target"]]
    radii = (np.geomspace if p["log"] else np.linspace)(p["rmin"], p["rmax"], p["npoints"])
    outputs, lines = {}, []
    for rec in _resolve_ions(load(), p["ion"]):
        pts = wgm_design.radius_q_curve(rec, target, radii)
        name = f"design_{p['target']}_{_slug(rec.id)}.csv"
        outputs[name] = wgm_design.curve_to_csv(pts)
        bad = sum(not pt.ok for pt in pts)
        lines.append(f"{rec.id}: {name} ({len(pts)} points{', %d invalid' % bad if bad else ''})")
    outputs["design_model.json"] = _json(wgm_design.MODEL_NOTES)
    return outputs, "\n".join(lines)


def _cmd_throwcatch(cfg, load):
    p = cfg.params
    g, kappa = p["g"], p["kappa"]
    if p["photon_number"] is None:
        # a lossy node cannot emit a whole photon; aim just under its bound
        bound = dyn.max_emission(dyn.NodeState.stored(), g, kappa, p["gamma"])
        p["photon_number"] = 1.0 if p["gamma"] == 0 else 0.99 * bound
    pulse = dyn.default_gaussian(kappa, sigma=p["sigma"], t0=p["t0"], dt=p["dt"], g=g,
                                 photon_number=p["photon_number"])
    p["sigma"], p["t0"], p["dt"] = pulse.sigma, pulse.t0, float(pulse.t[1] - pulse.t[0])
    result = dyn.run_throw_catch(pulse, g, kappa, delay=p["delay"], gamma=p["gamma"],
                                 tracking_rate=p["tracking_rate"], omega_max=p["omega_max"])
    p["tracking_rate"] = result.synthesis.tracking_rate
    summary = result.summary(parameters=p)
    outputs = {"trajectory.csv": result.trajectory_csv(), "summary.json": _json(summary)}
    text = (f"fidelity {result.fidelity:.9f}  residual flux {result.residual_flux:.3g}  "
            f"node-1 residual {result.residual_node1:.3g}  conservation defect "
            f"{result.conservation_defect:.3g}  step {result.step:.4g}")
    return outputs, text


def _response_system(p):
    return lr.ResponseSystem(p["g"], p["kappa"], p["gamma"], atom_present=not p["empty"])


def _cmd_spectrum(cfg, load):
    p = cfg.params
    system = _response_system(p)
    scale = system.kappa
    dmin = p["dmin"] if p["dmin"] is not None else -5 * scale
    dmax = p["dmax"] if p["dmax"] is not None else 5 * scale
    p["dmin"], p["dmax"] = dmin, dmax
    sp = lr.spectrum(system, np.linspace(dmin, dmax, p["npoints"]))
    zero = lr.response_at(system, 0.0)
    summary = {
        "r0_re": zero.r.real, "r0_im": zero.r.imag, "phase0": zero.phase,
        "emission0": zero.emission_prob,
        "cooperativity": system.cooperativity if system.gamma > 0 else None,
    }
    return ({"spectrum.csv": sp.to_csv(), "spectrum_summary.json": _json(summary)},
            f"r(0) = {zero.r.real:.6g}{zero.r.imag:+.3g}i, phase(0) = {zero.phase:.6g} rad, "
            f"|e(0)|^2 = {zero.emission_prob:.6g}")


def _cmd_fid(cfg, load):
    p = cfg.params
    system = _response_system(p)
    t = lr.fid_grid(system)
    if p["probe"] == "impulse":
        probe = lr.impulse_probe(system, t)
    else:
        probe = lr.gaussian_probe(system, p["probe_width"], t)
    out = lr.fid_signal(system, probe)
    rate = lr.effective_decay_rate(system)
    tmax = p["tmax"] if p["tmax"] is not None else (10 / rate if rate > 0 else 10 / system.kappa)
    p["tmax"] = tmax
    keep = np.flatnonzero(out.t <= tmax)
    stride = max(1, int(math.ceil(len(keep) / p["max_rows"])))
    keep = keep[::stride]
    p["stride"] = stride
    trimmed = lr.PulseSpec(out.t[keep], out.values[keep]) if len(keep) >= 2 else out
    summary = {
        "grid_points": len(t), "dt": float(t[1] - t[0]),
        "effective_decay_rate": rate, "slow_pole_rate": lr.slow_pole_rate(system),
        "note": "probe amplitude is in arbitrary units; the model is linear",
    }
    return ({"fid.csv": lr.fid_to_csv(trimmed), "fid_summary.json": _json(summary)},
            f"{len(keep)} samples to t = {tmax:.4g}; expected tail rate {rate:.6g} rad/s")


_COMMANDS = {
    "catalog": _cmd_catalog,
    "figures": _cmd_figures,
    "design": _cmd_design,
    "throwcatch": _cmd_throwcatch,
    "spectrum": _cmd_spectrum,
    "fid": _cmd_fid,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rareion-cqed", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)

    def common(sp, out_default="out"):
        sp.add_argument("--out", default=out_default, help="output directory")
        sp.add_argument("--catalog", default=None,
                        help=f"catalog file (default: ${ion_catalog.CATALOG_ENV_VAR} or bundled)")
        sp.add_argument("--angular", action="store_true",
                        help="read Hz-suffixed rates as angular (no factor 2 pi)")

    sp = sub.add_parser("catalog", help="list or show catalog entries")
    common(sp, out_default=None)
    sp.add_argument("--list", action="store_true", help="print all transition ids")
    sp.add_argument("--show", metavar="ID", help="print one record in SI units")

    sp = sub.add_parser("figures", help="figures of merit for an ion/resonator or raw rates")
    common(sp)
    sp.add_argument("--ion", help="transition id from the catalog")
    sp.add_argument("--Q", type=str, help="resonator quality factor")
    sp.add_argument("--radius", help="WGM resonator radius, e.g. 0.5mm")
    sp.add_argument("--volume", help="mode volume, e.g. 1000um3 (overrides the WGM model)")
    for name in ("g", "kappa", "gamma"):
        sp.add_argument(f"--{name}")
    sp.add_argument("--gamma-p", default="0", help="pure dephasing rate (rates mode)")

    sp = sub.add_parser("design", help="radius vs required Q curves")
    common(sp)
    sp.add_argument("--target", choices=("n0pop", "n0ph"), default="n0pop")
    sp.add_argument("--ion", default="all", help="transition id or 'all'")
    sp.add_argument("--rmin", default="0.1mm", help="smallest radius")
    sp.add_argument("--rmax", default="5mm", help="largest radius")
    sp.add_argument("--npoints", type=int, default=50, help="radius grid size")
    sp.add_argument("--log", action="store_true", help="geometric radius grid")

    sp = sub.add_parser("throwcatch", help="two-node photon transfer")
    common(sp)
    sp.add_argument("--g", default="10")
    sp.add_argument("--kappa", default="2")
    sp.add_argument("--gamma", default="0")
    sp.add_argument("--sigma", help="pulse rms width in time units (default 10/kappa)")
    sp.add_argument("--t0", help="pulse centre (default 5 sigma)")
    sp.add_argument("--dt", help="time step (default 0.05/max(g, kappa))")
    sp.add_argument("--delay", default="0", help="time label offset of node 2")
    sp.add_argument("--photon-number",
                    help="target photon number (default 1, or 0.99 of the emission bound when gamma > 0)")
    sp.add_argument("--omega-max", help="fail if |Omega| exceeds this cap")
    sp.add_argument("--tracking-rate", help="default 1/(rms pulse duration)")

    for name, helptext in (("spectrum", "reflection and emission vs detuning"),
                           ("fid", "free-induction-decay readout signal")):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--g", default="1MHz")
        sp.add_argument("--kappa", default="10MHz")
        sp.add_argument("--gamma", default="0.01MHz")
        sp.add_argument("--empty", action="store_true", help="atom absent (g = 0)")
        if name == "spectrum":
            sp.add_argument("--dmin", help="lowest detuning (default -5 kappa)")
            sp.add_argument("--dmax", help="highest detuning (default +5 kappa)")
            sp.add_argument("--npoints", type=int, default=2001, help="detuning grid size")
        else:
            sp.add_argument("--probe", choices=("gaussian", "impulse"), default="gaussian")
            sp.add_argument("--probe-width", default="1", help="probe rms width in units of 1/kappa")
            sp.add_argument("--tmax", help="last time written (default 10 / effective decay rate)")
            sp.add_argument("--max-rows", type=int, default=20000, help="decimate output to at most this many rows")
    return parser


def config_from_args(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    if args.subcommand is None:
        raise UsageError(f"missing subcommand; choose one of {', '.join(SUBCOMMANDS)}")
    ang = args.angular
    raw = vars(args).copy()
    p: dict = {}
    try:
        if args.subcommand == "catalog":
            if not (args.list or args.show):
                raise UsageError("catalog needs --list or --show ID")
            p = {"list": args.list, "show": args.show}
        elif args.subcommand == "figures":
            p = {
                "ion": args.ion,
                "Q": parse_number(args.Q) if args.Q else None,
                "radius": parse_length(args.radius) if args.radius else None,
                "volume": parse_volume(args.volume) if args.volume else None,
                "g": parse_rate(args.g, ang) if args.g else None,
                "kappa": parse_rate(args.kappa, ang) if args.kappa else None,
                "gamma": parse_rate(args.gamma, ang) if args.gamma else None,
                "gamma_p": parse_rate(args.gamma_p, ang),
            }
        elif args.subcommand == "design":
            if args.npoints < 2:
                raise UsageError("--npoints must be at least 2")
            p = {"target": args.target, "ion": args.ion, "rmin": parse_length(args.rmin),
                 "rmax": parse_length(args.rmax), "npoints": args.npoints, "log": args.log}
            if not 0 < p["rmin"] < p["rmax"]:
                raise UsageError("need 0 < --rmin < --rmax")
        elif args.subcommand == "throwcatch":
            p = {
                "g": parse_rate(args.g, ang), "kappa": parse_rate(args.kappa, ang),
                "gamma": parse_rate(args.gamma, ang),
                "sigma": parse_time(args.sigma) if args.sigma else None,
                "t0": parse_time(args.t0) if args.t0 else None,
                "dt": parse_time(args.dt) if args.dt else None,
                "delay": parse_time(args.delay),
                "photon_number": parse_number(args.photon_number) if args.photon_number else None,
                "omega_max": parse_rate(args.omega_max, ang) if args.omega_max else None,
                "tracking_rate": parse_rate(args.tracking_rate, ang) if args.tracking_rate else None,
            }
            if not (p["g"] > 0 and p["kappa"] > 0):
                raise UsageError("--g and --kappa must be positive")
        else:
            p = {"g": parse_rate(args.g, ang), "kappa": parse_rate(args.kappa, ang),
                 "gamma": parse_rate(args.gamma, ang), "empty": args.empty}
            if args.subcommand == "spectrum":
                if args.npoints < 2:
                    raise UsageError("--npoints must be at least 2")
                p.update(dmin=parse_rate(args.dmin, ang) if args.dmin else None,
                         dmax=parse_rate(args.dmax, ang) if args.dmax else None,
                         npoints=args.npoints)
            else:
                if args.max_rows < 2:
                    raise UsageError("--max-rows must be at least 2")
                p.update(probe=args.probe, probe_width=parse_number(args.probe_width),
                         tmax=parse_time(args.tmax) if args.tmax else None, max_rows=args.max_rows)
    except UnitError as exc:
        raise UsageError(str(exc)) from None
    p["angular_flag"] = ang
    out = raw.get("out")
    return RunConfig(args.subcommand, Path(out) if out else None, p, args.catalog)


def _error_line(code: int, exc: BaseException) -> str:
    msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
    return json.dumps({"error": type(exc).__name__, "exit": code, "message": str(msg)})


def run(config: RunConfig) -> int:
    if config.subcommand not in _COMMANDS:
        raise UsageError(f"unknown subcommand {config.subcommand!r}")

    def load():
        path = config.catalog_path
        records = ion_catalog.load_catalog(path)
        config.params["catalog_path"] = str(path or ion_catalog.default_catalog_path())
        return records

    outputs, text = _COMMANDS[config.subcommand](config, load)
    if text:
        print(text)
    if config.out_dir is None:
        return EXIT_OK
    out = config.out_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise PermissionError(f"output directory {out} is not writable")
        for name, body in outputs.items():
            write_atomic(out / name, body)
        manifest = {
            "tool": "rareion-cqed",
            "version": __version__,
            "subcommand": config.subcommand,
            "parameters": config.params,
            "outputs": sorted(outputs),
            "created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        }
        write_atomic(out / "manifest.json", _json(manifest))
    except OSError as exc:
        raise UsageError(f"cannot write outputs to {out}: {exc}") from None
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run(config_from_args(argv))
    except (UsageError, ion_catalog.CatalogError, KeyError) as exc:
        print(_error_line(EXIT_USAGE, exc), file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError) as exc:
        print(_error_line(EXIT_NUMERIC, exc), file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
