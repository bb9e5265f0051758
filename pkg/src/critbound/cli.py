"""Command-line entry point.

Every run is described by an INI file (plus ``-s section.key=value``
overrides).  Reports are canonical JSON that embed the resolved
configuration, so the same config always produces byte-identical output.

Exit codes: 0 ok, 2 configuration, 3 numeric abort, 4 precondition,
5 a checked property failed.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from typing import Callable

from . import __version__
from .circle import RotationNumber
from .conditions import certify_conditions, phi_profile, uniform_gap, write_profile_csv
from .dynamics import (boundedness_probe, dumps, simulate, summary, verify_recurrence,
                       recurrence_tolerance, visiting_moments, write_csv)
from .envelope import EnvelopeInput, PowerLawParams, powerlaw_envelope, quantitative_envelope
from .ergodic import covering_number, gap_spectrum
from .errors import ConfigError, FamilyError, NumericAbort, PreconditionError
from .kernels import property_suite
from .systems import (exact_bound_check, make_system, make_ce_decimal_warp,
                      make_ce_orbit_switch, make_ce_slow_drift, orbit_switch_report,
                      slow_drift_crossing)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PRECONDITION, EXIT_PROPERTY = 0, 2, 3, 4, 5


class PropertyFailure(Exception):
    """A checked property did not hold; the report is still written."""


# section -> key -> default (as text).  [f] and [y] are free-form and checked
# by the family registry.
SCHEMA: dict[str, dict[str, str]] = {
    "system": {"phi": "golden", "f": "zero", "y": "zero"},
    "output": {"dir": ".", "prefix": "", "csv": "true"},
    "simulate": {"x1": "0", "steps": "1000", "stride": "1", "q": "", "visit_h": "",
                 "visit_width": "", "bound": ""},
    "envelope": {"f_sup": "1", "y_sup": "0", "beta": "-0.5", "eps": "0.03",
                 "delta_star": "0.05", "d0": "1", "rho_eps": "0", "x1_abs": "0"},
    "powerlaw": {"alpha": "0.3", "gamma": "1", "k": "1", "m": "1", "f_sup": "1",
                 "y_sup": "0", "x1_abs": "0", "j_max": "60", "log_depth": ""},
    "cover": {"delta": "0.3", "m": "0.5"},
    "gaps": {"n": "5"},
    "phi": {"rho": "1e2, 1e3, 1e4, 1e5, 1e6", "grid": "4096", "reference": "auto"},
    "certify": {"d0": "1", "horizon": "2000", "rho": "1e2, 1e3, 1e4, 1e5, 1e6",
                "grid": "4096"},
    "counterexample": {"kind": "decimal-warp", "x1": "0", "steps": "10000", "stride": "1",
                       "k1": "0", "h": "linear", "bounds": "10, 100"},
    "verify-lemmas": {"seed": "42", "cases": "100000", "tol": "1e-10"},
}
FREE_SECTIONS = ("f", "y")
USES_SYSTEM = {"simulate", "phi", "certify"}
USES_PHI = USES_SYSTEM | {"envelope", "powerlaw", "cover", "gaps", "counterexample"}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def load_config(path: str | None, overrides: list[str]) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
    parser.optionxform = str
    if path:
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    raw = {s: dict(parser[s]) for s in parser.sections()}
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot or not name:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        raw.setdefault(section, {})[name] = value.strip()
    for section, values in raw.items():
        if section in FREE_SECTIONS:
            continue
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        unknown = set(values) - set(SCHEMA[section])
        if unknown:
            raise ConfigError(f"unknown key(s) in [{section}]: {sorted(unknown)}")
    return raw


def resolve(raw: dict, command: str) -> dict[str, dict[str, str]]:
    """Sections relevant to ``command`` with defaults filled in."""
    sections = ["output"]
    if command in USES_PHI:
        sections.append("system")
    if command in USES_SYSTEM:
        sections += list(FREE_SECTIONS)
    sections.append(command)
    out = {}
    for s in sections:
        values = dict(SCHEMA.get(s, {}))
        values.update(raw.get(s, {}))
        out[s] = values
    return out


def _num(kind: Callable, text: str, where: str):
    try:
        value = kind(text.strip().replace(" ", "").replace("i", "j") if kind is complex
                     else text.strip())
    except ValueError:
        raise ConfigError(f"{where}: cannot read {text!r} as {kind.__name__}") from None
    if isinstance(value, float) and not math.isfinite(value):
        raise ConfigError(f"{where}: value must be finite")
    return value


def get(cfg: dict, section: str, key: str, kind: Callable = str, optional: bool = False):
    text = cfg[section][key]
    if optional and text.strip() == "":
        return None
    if kind is str:
        return text.strip()
    if kind is bool:
        low = text.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"[{section}] {key}: expected a boolean, got {text!r}")
    if kind is list:
        try:
            return [float(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"[{section}] {key}: expected comma-separated numbers") from None
    return _num(kind, text, f"[{section}] {key}")


def phi_of(cfg) -> RotationNumber:
    try:
        return RotationNumber.parse(cfg["system"]["phi"])
    except PreconditionError as exc:
        raise ConfigError(f"[system] phi: {exc}") from None


def system_of(cfg):
    return make_system(phi_of(cfg), get(cfg, "system", "f"), cfg["f"],
                       get(cfg, "system", "y"), cfg["y"])


# ---------------------------------------------------------------------------
# commands; each returns (result dict, one-line summary)
# ---------------------------------------------------------------------------

def cmd_simulate(cfg, out):
    spec = system_of(cfg)
    x1 = get(cfg, "simulate", "x1", complex)
    steps = get(cfg, "simulate", "steps", int)
    stride = get(cfg, "simulate", "stride", int)
    q = get(cfg, "simulate", "q", optional=True)
    init = {"q": _fraction(q)} if q is not None else {}
    traj = simulate(spec, x1, steps, stride, **init)
    vh = get(cfg, "simulate", "visit_h", float, optional=True)
    vw = get(cfg, "simulate", "visit_width", float, optional=True)
    visits = None
    if vh is not None:
        if vw is None:
            if spec.f_sup is None or spec.y_sup is None:
                raise ConfigError("[simulate] visit_width needed: family declares no sup bound")
            vw = spec.f_sup + spec.y_sup
        visits = visiting_moments(traj, vh, vw)
    result = {"system": spec.to_json(), "summary": summary(traj, visits)}
    if traj.fully_sampled:
        dev = verify_recurrence(traj, spec)
        result["recurrence"] = {"deviation": dev, "tolerance": recurrence_tolerance(traj)}
    bound = get(cfg, "simulate", "bound", float, optional=True)
    if bound is not None:
        probe = boundedness_probe(traj, bound)
        result["probe"] = {"L": bound, "verdict": probe.verdict,
                           "first_violation": probe.first_violation,
                           "growth_exponent": probe.growth_exponent}
    if get(cfg, "output", "csv", bool):
        write_csv(traj, out("trajectory.csv"))
    line = f"simulate: steps={steps} sup_radius={traj.sup_radius!r} " \
           f"final_radius={float(traj.radius_track[-1])!r}"
    return result, line


def _fraction(text: str):
    from fractions import Fraction
    try:
        return Fraction(text)
    except ValueError:
        raise ConfigError(f"[simulate] q: not a rational number: {text!r}") from None


def cmd_envelope(cfg, out):
    s = "envelope"
    inp = EnvelopeInput(
        f_sup=get(cfg, s, "f_sup", float), y_sup=get(cfg, s, "y_sup", float),
        beta=get(cfg, s, "beta", float), eps=get(cfg, s, "eps", float),
        delta_star=get(cfg, s, "delta_star", float), d0=get(cfg, s, "d0", int),
        rho_eps=get(cfg, s, "rho_eps", float), x1_abs=get(cfg, s, "x1_abs", float))
    rep = quantitative_envelope(inp, phi_of(cfg))
    return rep.to_json(), f"envelope: n_d={rep.n_d} h={rep.h!r} l={rep.l!r}"


def cmd_powerlaw(cfg, out):
    s = "powerlaw"
    p = PowerLawParams(
        alpha=get(cfg, s, "alpha", float), gamma=get(cfg, s, "gamma", float),
        k=get(cfg, s, "k", float), m=get(cfg, s, "m", float),
        f_sup=get(cfg, s, "f_sup", float), y_sup=get(cfg, s, "y_sup", float),
        x1_abs=get(cfg, s, "x1_abs", float))
    res = powerlaw_envelope(p, phi_of(cfg), get(cfg, s, "j_max", int),
                            get(cfg, s, "log_depth", int, optional=True))
    return res.to_json(), f"powerlaw: j={res.j} beta0={res.beta0!r} l_beta0={res.l_beta0!r}"


def cmd_cover(cfg, out):
    q = covering_number(phi_of(cfg), get(cfg, "cover", "delta", float),
                        get(cfg, "cover", "m", float))
    result = {"phi": q.phi, "delta": q.delta, "m": q.m, "n": q.result_n, "covered": q.covered}
    return result, f"cover: n={q.result_n} covered={q.covered!r}"


def cmd_gaps(cfg, out):
    spec = gap_spectrum(phi_of(cfg), get(cfg, "gaps", "n", int))
    result = {"n": spec.n, "distinct": spec.distinct,
              "gaps": [{"length": length, "multiplicity": m} for length, m in spec.gaps]}
    return result, f"gaps: n={spec.n} distinct={spec.distinct}"


def cmd_phi(cfg, out):
    spec = system_of(cfg)
    prof = phi_profile(spec, get(cfg, "phi", "rho", list), get(cfg, "phi", "grid", int))
    result = prof.to_json()
    if len(prof.rho_list) >= 2 or prof.closed_form is not None:
        result["uniform_gaps"] = uniform_gap(prof, get(cfg, "phi", "reference"))
    if get(cfg, "output", "csv", bool):
        write_profile_csv(prof, out("profile.csv"))
    return result, f"phi: upsilon={prof.upsilon!r} omega={prof.omega!r}"


def cmd_certify(cfg, out):
    spec = system_of(cfg)
    cert = certify_conditions(spec, get(cfg, "certify", "d0", int),
                              get(cfg, "certify", "horizon", int),
                              get(cfg, "certify", "rho", list), get(cfg, "certify", "grid", int))
    return cert.to_json(), f"certify: verdict={cert.verdict} beta_estimate={cert.beta_estimate!r}"


def cmd_counterexample(cfg, out):
    s = "counterexample"
    phi = phi_of(cfg)
    kind = get(cfg, s, "kind")
    x1 = get(cfg, s, "x1", complex)
    steps = get(cfg, s, "steps", int)
    stride = get(cfg, s, "stride", int)
    if kind == "decimal-warp":
        spec = make_ce_decimal_warp(phi)
        traj = simulate(spec, x1, steps, stride)
        check = exact_bound_check(traj, shift=-2)
        result = {"claim": "|x(n)| >= n - 2", "check": check.to_json()}
        ok = check.holds
    elif kind == "orbit-switch":
        spec = make_ce_orbit_switch(phi, get(cfg, s, "k1", int))
        traj = simulate(spec, x1, steps)
        rep = orbit_switch_report(traj)
        result = {"claim": "|x(n)| >= |x(1)| + n - 2 k0", "report": rep}
        ok = rep["bound"]["holds"]
    elif kind == "slow-drift":
        spec = make_ce_slow_drift(phi, get(cfg, s, "h"))
        traj = simulate(spec, x1, steps, stride)
        crossings = [slow_drift_crossing(traj, spec, L) for L in get(cfg, s, "bounds", list)]
        result = {"claim": "no bound L survives", "crossings": crossings}
        ok = all(c.get("exceeds_L", True) and c.get("implication_holds", True)
                 for c in crossings)
    else:
        raise ConfigError(f"[counterexample] kind must be decimal-warp, orbit-switch or "
                          f"slow-drift, got {kind!r}")
    result["system"] = spec.to_json()
    result["summary"] = summary(traj)
    result["holds"] = ok
    line = f"counterexample: kind={kind} holds={ok} sup_radius={traj.sup_radius!r}"
    if not ok:
        raise PropertyFailure((result, line))
    return result, line


def cmd_verify_lemmas(cfg, out):
    s = "verify-lemmas"
    res = property_suite(get(cfg, s, "seed", int), get(cfg, s, "cases", int),
                         get(cfg, s, "tol", float))
    failures = sum(v["failures"] for v in res.values())
    line = "verify-lemmas: " + " ".join(f"{k}={v['cases'] - v['failures']}/{v['cases']}"
                                        for k, v in res.items())
    if failures:
        raise PropertyFailure((res, line))
    return res, line


HELP = {
    "simulate": "iterate the recurrence and write a trajectory",
    "envelope": "explicit radius bound from sup bounds, beta and eps",
    "powerlaw": "beta scan for power-law drift profiles",
    "cover": "covering number of an orbit prefix",
    "gaps": "distinct gap lengths of an orbit prefix",
    "phi": "radial drift profile of the f-family",
    "certify": "finite-horizon evidence for the drift and forcing conditions",
    "counterexample": "run one of the unbounded constructions and check its growth bound",
    "verify-lemmas": "seeded property suite for the perturbation kernels",
}

COMMANDS = {
    "simulate": cmd_simulate,
    "envelope": cmd_envelope,
    "powerlaw": cmd_powerlaw,
    "cover": cmd_cover,
    "gaps": cmd_gaps,
    "phi": cmd_phi,
    "certify": cmd_certify,
    "counterexample": cmd_counterexample,
    "verify-lemmas": cmd_verify_lemmas,
}


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="INI configuration file")
    common.add_argument("-s", "--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one configuration value (repeatable)")
    common.add_argument("-o", "--output-dir", help="shortcut for -s output.dir=DIR")
    parser = argparse.ArgumentParser(
        prog="critbound",
        description="Boundedness diagnostics for x(n+1) = e(phi) x(n) + f(x(n)) + y(n).")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=HELP[name])
    return parser


def _writer(cfg: dict) -> Callable[[str], str]:
    directory = cfg["output"]["dir"].strip() or "."
    prefix = cfg["output"]["prefix"].strip()

    def out(name: str) -> str:
        os.makedirs(directory, exist_ok=True)
        return os.path.join(directory, prefix + name)
    return out


def _emit(command: str, cfg: dict, result: dict, out) -> str:
    text = dumps({"command": command, "config": cfg, "result": result})
    path = out(f"{command}.json")
    with open(path, "w") as fh:
        fh.write(text)
    return path


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.set)
    if args.output_dir:
        overrides.append(f"output.dir={args.output_dir}")
    try:
        cfg = resolve(load_config(args.config, overrides), args.command)
        out = _writer(cfg)
        try:
            result, line = COMMANDS[args.command](cfg, out)
            code = EXIT_OK
        except PropertyFailure as failure:
            result, line = failure.args[0]
            code = EXIT_PROPERTY
        _emit(args.command, cfg, result, out)
        print(line)
        return code
    except ConfigError as exc:
        print(f"critbound: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericAbort, FamilyError) as exc:
        print(f"critbound: numeric abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except PreconditionError as exc:
        print(f"critbound: precondition failed [{exc.constraint}]: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


def main(argv: list[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
