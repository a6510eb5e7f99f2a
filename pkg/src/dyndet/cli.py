"""Batch front-end: ``dyndet <command> --config run.json --out results/``.

Exit codes: 0 success, 2 invalid configuration, 3 unconverged result (the
value is still written, with ``"converged": false``).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .determinant import det_coefficient_partials, det_series, find_smallest_zero
from .exceptions import DomainError, NotExpandingError, ZeroNotBracketedError
from .map_model import Observable, TrigMapFamily, expansion_bound
from .oracles import build_ulam, stationary_density, ulam_response_fd, ulam_srb_average
from .orbit_traces import flat_trace, trace_b, trace_table
from .periodic_points import enumerate_fixed_points
from .response import convergence_report, response_report

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_UNCONVERGED = 3

# Single source of truth for run parameters; every entry can be overridden
# from the config's "params" block or the matching command-line flag.
DEFAULTS = {
    "n_max": 12,          # determinant truncation order
    "tau": 0.0,           # parameter value (base point for derivatives)
    "u": 0.0,             # observable coupling in the weight -u g - log T'
    "period": 1,          # n for periodic-points
    "bins": 2 ** 15,      # Ulam resolution
    "fd_step": 0.01,      # finite-difference step for the Ulam response
    "workers": 1,
}

COMMANDS = (
    "periodic-points",
    "traces",
    "det-coeffs",
    "pressure",
    "srb-average",
    "linear-response",
    "oracle-compare",
    "ulam-density",
)

NUMBER_OR_NULL = {"type": ["number", "null"]}

RESULT_SCHEMAS = {
    "pressure": {
        "type": "object",
        "required": ["z_star", "pressure", "converged"],
        "properties": {"z_star": NUMBER_OR_NULL, "pressure": NUMBER_OR_NULL, "converged": {"type": "boolean"}},
    },
    "response": {
        "type": "object",
        "required": ["srb_average", "linear_response", "tau", "n_max", "converged", "tails", "rates", "z_star", "zero_at_one"],
        "properties": {
            "srb_average": {"type": "number"},
            "linear_response": NUMBER_OR_NULL,
            "tau": {"type": "number"},
            "n_max": {"type": "integer"},
            "converged": {"type": "boolean"},
            "tails": {"type": "object", "additionalProperties": NUMBER_OR_NULL},
            "rates": {"type": "object", "additionalProperties": {"type": "number"}},
            "z_star": NUMBER_OR_NULL,
            "zero_at_one": {"type": "boolean"},
            "partial_sums": {"type": "array"},
        },
    },
    "oracle-compare": {
        "type": "object",
        "required": ["tau", "srb_average", "linear_response"],
        "properties": {
            "tau": {"type": "number"},
            "srb_average": {"$ref": "#/definitions/pair"},
            "linear_response": {"$ref": "#/definitions/pair"},
        },
        "definitions": {
            "pair": {
                "type": "object",
                "required": ["determinant", "oracle", "abs_diff"],
                "properties": {k: {"type": "number"} for k in ("determinant", "oracle", "abs_diff")},
            }
        },
    },
}


class ConfigError(ValueError):
    pass


def _num(value, what):
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ConfigError(f"{what}: expected a number or decimal string, got {value!r}")
    try:
        out = float(value)
    except ValueError:
        raise ConfigError(f"{what}: cannot parse {value!r} as a number") from None
    if not math.isfinite(out):
        raise ConfigError(f"{what}: must be finite")
    return out


def _num_list(values, what):
    if not isinstance(values, list):
        raise ConfigError(f"{what}: expected a list")
    return tuple(_num(v, f"{what}[{i}]") for i, v in enumerate(values))


def _observable(spec, what):
    if not isinstance(spec, dict):
        raise ConfigError(f"{what}: expected an object")
    return Observable(
        constant=_num(spec.get("constant", 0), f"{what}.constant"),
        sin_coeffs=_num_list(spec.get("sin", []), f"{what}.sin"),
        cos_coeffs=_num_list(spec.get("cos", []), f"{what}.cos"),
    )


def _family(spec):
    if not isinstance(spec, dict):
        raise ConfigError("family: expected an object")
    if "degree" not in spec:
        raise ConfigError("family.degree is required")
    degree = spec["degree"]
    if isinstance(degree, bool) or not isinstance(degree, int) or degree < 2:
        raise ConfigError(f"family.degree must be an integer >= 2, got {degree!r}")
    dom = spec.get("tau_domain", [DEFAULTS["tau"], DEFAULTS["tau"]])
    dom = _num_list(dom, "family.tau_domain")
    if len(dom) != 2 or dom[0] > dom[1]:
        raise ConfigError("family.tau_domain must be [lo, hi] with lo <= hi")
    polys = {}
    for key in ("sin", "cos"):
        rows = spec.get(key, [])
        if not isinstance(rows, list):
            raise ConfigError(f"family.{key}: expected a list of tau-polynomials")
        polys[key] = tuple(_num_list(r, f"family.{key}[{k}]") for k, r in enumerate(rows))
    return TrigMapFamily(
        degree=degree,
        sin_coeffs=polys["sin"],
        cos_coeffs=polys["cos"],
        constant=_num_list(spec.get("constant", [0]), "family.constant"),
        tau_domain=dom,
    )


@dataclass
class RunConfig:
    family: TrigMapFamily
    observable: Observable
    weight: str = "srb"
    potential: Observable | None = None
    params: dict = field(default_factory=lambda: dict(DEFAULTS))


def parse_config(doc: dict) -> RunConfig:
    """Validate a config document; expansion is certified before anything runs."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {doc.get('schema_version')!r}")
    family = _family(doc.get("family"))
    try:
        expansion_bound(family)
    except NotExpandingError as exc:
        raise ConfigError(f"family rejected: {exc}") from None
    observable = _observable(doc.get("observable", {}), "observable")
    weight = doc.get("weight", {"kind": "srb"})
    kind = weight.get("kind", "srb") if isinstance(weight, dict) else None
    if kind not in ("srb", "potential"):
        raise ConfigError("weight.kind must be 'srb' or 'potential'")
    potential = _observable(weight.get("potential", {}), "weight.potential") if kind == "potential" else None
    params = dict(DEFAULTS)
    if "u" in weight:
        params["u"] = _num(weight["u"], "weight.u")
    for key, value in (doc.get("params") or {}).items():
        if key not in DEFAULTS:
            raise ConfigError(f"params.{key}: unknown parameter")
        params[key] = _num(value, f"params.{key}")
    for key in ("n_max", "period", "bins", "workers"):
        if params[key] != int(params[key]) or params[key] < 1:
            raise ConfigError(f"params.{key} must be a positive integer")
        params[key] = int(params[key])
    return RunConfig(family, observable, kind, potential, params)


def load_config(path) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(doc)


# -- output helpers --

def fmt(x) -> str:
    # adding 0.0 folds -0.0 into 0.0
    return format(float(x) + 0.0, ".17g")


def _clean(obj):
    if isinstance(obj, float):
        return obj + 0.0 if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_csv(path: Path, header, rows) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (str, int)) else fmt(v) for v in row])


def _itinerary_label(symbols, degree):
    sep = "" if degree <= 10 else "-"
    return sep.join(str(s) for s in symbols)


# -- commands --

def _cmd_periodic_points(cfg, out):
    p = cfg.params
    fps = enumerate_fixed_points(cfg.family, p["tau"], p["period"], workers=p["workers"])
    write_csv(
        out / "periodic_points.csv",
        ["itinerary", "x", "residual"],
        ([_itinerary_label(it, fps.degree), x, r] for it, x, r in fps.records()),
    )
    return EXIT_OK


def _traces(cfg):
    p = cfg.params
    return trace_table(cfg.family, cfg.observable, p["n_max"], tau=p["tau"], workers=p["workers"])


def _cmd_traces(cfg, out):
    write_csv(out / "traces.csv", ["n", "b", "bu", "btau", "butau"], _traces(cfg))
    return EXIT_OK


def _cmd_det_coeffs(cfg, out):
    n_max = cfg.params["n_max"]
    series = det_coefficient_partials(_traces(cfg), n_max)
    rows = ((n, series.a[n], series.au[n], series.atau[n], series.autau[n]) for n in range(n_max + 1))
    write_csv(out / "det_coeffs.csv", ["n", "a", "au", "atau", "autau"], rows)
    return EXIT_OK


def _cmd_pressure(cfg, out):
    p = cfg.params
    n_max, tau, workers = p["n_max"], p["tau"], p["workers"]
    if cfg.weight == "potential":
        b = [flat_trace(cfg.family, cfg.potential, tau, n, workers=workers) for n in range(1, n_max + 1)]
    else:
        b = [trace_b(cfg.family, cfg.observable, tau, p["u"], n, workers=workers) for n in range(1, n_max + 1)]
    try:
        z = find_smallest_zero(det_series(b, n_max))
    except ZeroNotBracketedError as exc:
        print(f"dyndet: {exc}", file=sys.stderr)
        write_json(out / "pressure.json", {"z_star": None, "pressure": None, "converged": False})
        return EXIT_UNCONVERGED
    write_json(out / "pressure.json", {"z_star": z.z_star, "pressure": z.pressure, "converged": True})
    return EXIT_OK


def _response(cfg, out, with_response):
    p = cfg.params
    res = response_report(
        cfg.family, cfg.observable, p["tau"], p["n_max"], with_response=with_response, workers=p["workers"]
    )
    name = "linear_response" if with_response else "srb_average"
    write_json(out / f"{name}.json", res.to_dict())
    if with_response:
        cols = ["n", "a", "n_a", "au", "n_atau", "autau"]
        write_csv(out / "convergence.csv", cols, ([row[c] for c in cols] for row in res.partial_sums))
    return EXIT_OK if res.converged else EXIT_UNCONVERGED


def _cmd_oracle_compare(cfg, out):
    p = cfg.params
    tau, h, m = p["tau"], p["fd_step"], p["bins"]
    res = response_report(cfg.family, cfg.observable, tau, p["n_max"], workers=p["workers"])
    u_avg = ulam_srb_average(build_ulam(cfg.family, tau, m), cfg.observable)
    u_resp = ulam_response_fd(cfg.family, cfg.observable, h=h, m=m, tau=tau)
    doc = {
        "tau": tau,
        "bins": m,
        "fd_step": h,
        "converged": res.converged,
        "srb_average": {"determinant": res.srb_average, "oracle": u_avg, "abs_diff": abs(res.srb_average - u_avg)},
        "linear_response": {
            "determinant": res.linear_response,
            "oracle": u_resp,
            "abs_diff": abs(res.linear_response - u_resp),
        },
    }
    write_json(out / "oracle_compare.json", doc)
    return EXIT_OK if res.converged else EXIT_UNCONVERGED


def _cmd_ulam_density(cfg, out):
    p = cfg.params
    rho = stationary_density(build_ulam(cfg.family, p["tau"], p["bins"]))
    write_csv(out / "density.csv", ["bin", "value"], enumerate(rho.tolist()))
    return EXIT_OK


_DISPATCH = {
    "periodic-points": _cmd_periodic_points,
    "traces": _cmd_traces,
    "det-coeffs": _cmd_det_coeffs,
    "pressure": _cmd_pressure,
    "srb-average": lambda cfg, out: _response(cfg, out, False),
    "linear-response": lambda cfg, out: _response(cfg, out, True),
    "oracle-compare": _cmd_oracle_compare,
    "ulam-density": _cmd_ulam_density,
}


def run(command: str, config: RunConfig, out_dir) -> int:
    """Execute one command, writing its artifacts into ``out_dir``; returns the exit code."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        config.family.check_tau(config.params["tau"])
        return _DISPATCH[command](config, out)
    except (DomainError, NotExpandingError, ConfigError) as exc:
        print(f"dyndet: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dyndet", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", default=".", help="output directory (default: current)")
    ap.add_argument("--workers", type=int)
    ap.add_argument("--n-max", dest="n_max", type=int)
    ap.add_argument("--tau", type=float)
    ap.add_argument("--period", type=int, help="n for periodic-points")
    ap.add_argument("--bins", type=int)
    ap.add_argument("--fd-step", dest="fd_step", type=float)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        for key in ("workers", "n_max", "tau", "period", "bins", "fd_step"):
            value = getattr(args, key)
            if value is not None:
                cfg.params[key] = value
        for key in ("workers", "n_max", "period", "bins"):
            if cfg.params[key] < 1:
                raise ConfigError(f"--{key.replace('_', '-')} must be positive")
    except ConfigError as exc:
        print(f"dyndet: invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(args.command, cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
