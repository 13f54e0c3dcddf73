"""Batch front end: weight probes, kernel norm bands, lattice builds,
transform sweeps, operator criteria checks and the Toeplitz identity.

Every subcommand emits one versioned JSON report (schema field ``1``) with
the fully resolved configuration echoed back; sweeps can additionally write
a CSV with columns ``r, theta, value_log``.  Exit status is 0 for decisive
outcomes, 2 when a criterion check comes back inconclusive, and 1 on any
error.  Reports are deterministic for identical configs up to the
``timestamp`` field; floats are serialized with 17 significant digits so
they round-trip exactly.

Options may come from ``--config FILE`` (a flat JSON object keyed by the
long option names, underscores for dashes); explicit flags override the
file, the file overrides built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone

import numpy as np

from .criteria import (CheckConfig, check_boundedness, check_compactness,
                       check_schatten)
from .errors import ArgumentError, WorkbenchError
from .kernel import kernel_norm_band
from .lattice import (build_lattice, coverage_fraction, dump_lattice,
                      multiplicity_report, separation_report)
from .operators import toeplitz_identity_check
from .quadrature import build_grid
from .symbols import Symbol, parse_symbol
from .transforms import TransformRequest, m_transform, n_transform
from .weights import WeightSpec

__all__ = ["main", "RunConfig", "SCHEMA"]

SCHEMA = 1

_OP_NAMES = {
    "c_psi_g": "C_psi_g", "c_g_psi": "C_g_psi",
    "i": "I", "j": "J", "gv": "GV",
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved invocation parameters, echoed into every report.

    One flat bag for all subcommands; fields a subcommand does not use
    keep their defaults.  ``from_dict(to_dict())`` is the identity.
    """

    weight: str = "exp:b=1,alpha=1"
    op: str = "c_g_psi"
    psi: str = "poly:0,1"
    g: str = "poly:1"
    p: float = 2.0
    q: float = 2.0
    r_cut: float = 0.95
    density: float = 1.0
    delta: float = 0.0          # 0 means "0.1 m_tau", resolved at run time
    n_radii: int = 200
    n_theta: int = 8
    r_max: float = 0.99
    n_probes: int = 100_000
    seed: int = 0
    matrix_n: int = 30
    ladder: tuple[int, ...] = (16, 32, 64, 128)
    crosscheck: bool = False
    out: str = ""
    csv: str = ""
    save: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ladder"] = list(self.ladder)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        bad = sorted(set(d) - known)
        if bad:
            raise ArgumentError(f"unknown config keys: {', '.join(bad)}")
        e = dict(d)
        if "ladder" in e:
            e["ladder"] = tuple(int(n) for n in e["ladder"])
        return cls(**e)


# -- JSON with pinned float formatting ---------------------------------------

def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _json_text(obj, level: int = 0) -> str:
    pad, pad1 = "  " * level, "  " * (level + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = (f"{pad1}{json.dumps(str(k))}: {_json_text(v, level + 1)}"
                for k, v in obj.items())
        return "{\n" + ",\n".join(rows) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        rows = (f"{pad1}{_json_text(v, level + 1)}" for v in seq)
        return "[\n" + ",\n".join(rows) + f"\n{pad}]"
    raise ArgumentError(f"cannot serialize {type(obj).__name__} to JSON")


def _emit(report: dict, out_path: str) -> None:
    text = _json_text(report) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(command: str, cfg: RunConfig, result: dict) -> dict:
    return {
        "schema": SCHEMA,
        "command": command,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": cfg.to_dict(),
        "result": result,
    }


# -- subcommand handlers ------------------------------------------------------

def _parse_op(name: str, allowed: tuple) -> str:
    op = _OP_NAMES.get(name.lower())
    if op is None or op not in allowed:
        raise ArgumentError(
            f"op must be one of {', '.join(k for k, v in _OP_NAMES.items() if v in allowed)}")
    return op


def _check_config(cfg: RunConfig) -> CheckConfig:
    return CheckConfig(r_cut=cfg.r_cut, grid_density=cfg.density,
                       crosscheck=cfg.crosscheck, ladder=cfg.ladder)


def _cmd_weights_probe(cfg: RunConfig) -> tuple[dict, int]:
    w = WeightSpec.parse(cfg.weight)
    radii = np.linspace(0.0, cfg.r_max, cfg.n_radii)
    rep = w.validate()
    c1, c2 = w.class_constants()
    band = w.distortion_band(radii[radii > 0.0])
    samples = [
        {"r": float(r), "phi": float(w.phi(np.array([r]))[0]),
         "phi_prime": float(w.phi_prime(np.array([r]))[0]),
         "tau": float(w.tau(np.array([r]))[0]),
         "laplacian": float(w.laplacian(np.array([r]))[0]),
         "log_omega": float(w.log_omega(np.array([r]))[0])}
        for r in radii
    ]
    result = {
        "weight": w.spec_string(),
        "constants": {"c1": c1, "c2": c2, "m_tau": w.m_tau(),
                      "r_max_guard": w.r_max_guard},
        "validate": asdict(rep),
        "distortion_product_band": {"low": band.low, "high": band.high,
                                    "ratio": band.ratio},
        "samples": samples,
    }
    return _report("weights probe", cfg, result), 0


def _cmd_kernel_norms(cfg: RunConfig) -> tuple[dict, int]:
    w = WeightSpec.parse(cfg.weight)
    radii = np.linspace(0.0, cfg.r_max, cfg.n_radii)
    band = kernel_norm_band(w, cfg.p, radii)
    result = {
        "p": cfg.p,
        "band": {"low": band.low, "high": band.high, "ratio": band.ratio},
        "samples": [{"r": float(r), "value": float(v)}
                    for r, v in zip(band.radii, band.values)],
    }
    if cfg.csv:
        with open(cfg.csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r", "theta", "value_log"])
            for r, v in zip(band.radii, band.values):
                writer.writerow([format(float(r), ".17g"), "0",
                                 format(math.log(v), ".17g")])
    return _report("kernel norms", cfg, result), 0


def _cmd_lattice_build(cfg: RunConfig) -> tuple[dict, int]:
    w = WeightSpec.parse(cfg.weight)
    delta = cfg.delta if cfg.delta > 0.0 else 0.1 * w.m_tau()
    lat = build_lattice(w, delta, cfg.r_cut)
    rng = np.random.default_rng(cfg.seed)
    u = rng.random(cfg.n_probes)
    theta = 2.0 * np.pi * rng.random(cfg.n_probes)
    probes = cfg.r_cut * np.sqrt(u) * np.exp(1j * theta)
    result = {
        "delta": delta,
        "r_cut": cfg.r_cut,
        "n_centers": lat.n_centers,
        "separation": separation_report(lat),
        "coverage": coverage_fraction(lat, probes),
        "multiplicity": multiplicity_report(lat, probes[:2000]),
    }
    if cfg.save:
        dump_lattice(lat, cfg.save)
        result["saved_to"] = cfg.save
    return _report("lattice build", cfg, result), 0


def _cmd_transform_sweep(cfg: RunConfig) -> tuple[dict, int]:
    w = WeightSpec.parse(cfg.weight)
    op = _parse_op(cfg.op, ("C_psi_g", "C_g_psi", "I", "J"))
    psi = Symbol.identity() if op in ("I", "J") else parse_symbol(cfg.psi)
    kind = {"I": "C_psi_g", "J": "C_g_psi"}.get(op, op)
    g = parse_symbol(cfg.g)
    req = TransformRequest(kind, cfg.p, cfg.q, psi, g)
    radii = np.linspace(0.0, cfg.r_cut, cfg.n_radii + 1)[1:]
    thetas = 2.0 * np.pi * np.arange(cfg.n_theta) / cfg.n_theta
    zs = (radii[:, None] * np.exp(1j * thetas)[None, :]).ravel()
    if cfg.q == math.inf:
        with np.errstate(divide="ignore"):
            logs = np.log(np.asarray(n_transform(w, req, zs)))
    else:
        inner = build_grid(w, 1.0 - 0.75 * (1.0 - cfg.r_cut), cfg.density)
        logs = np.asarray(m_transform(req, zs, inner))
    logs = logs.reshape(radii.size, thetas.size)
    finite = logs[np.isfinite(logs)]
    result = {
        "n_points": int(logs.size),
        "log_min": float(np.min(finite)) if finite.size else None,
        "log_max": float(np.max(finite)) if finite.size else None,
    }
    if cfg.csv:
        with open(cfg.csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r", "theta", "value_log"])
            for i, r in enumerate(radii):
                for j, t in enumerate(thetas):
                    writer.writerow([format(float(r), ".17g"),
                                     format(float(t), ".17g"),
                                     format(float(logs[i, j]), ".17g")])
        result["csv"] = cfg.csv
    return _report("transform sweep", cfg, result), 0


def _cmd_check(action: str, cfg: RunConfig) -> tuple[dict, int]:
    w = WeightSpec.parse(cfg.weight)
    g = parse_symbol(cfg.g)
    chk = _check_config(cfg)
    if action == "schatten":
        op = _parse_op(cfg.op, ("C_g_psi", "GV", "C_psi_g", "I", "J"))
        if op == "C_psi_g":
            raise ArgumentError("schatten checks accept c_g_psi, gv or the id aliases")
        psi = Symbol.identity() if op in ("I", "J") else parse_symbol(cfg.psi)
        rep = check_schatten(w, op, psi, g, cfg.p, chk)
    else:
        op = _parse_op(cfg.op, ("C_psi_g", "C_g_psi", "I", "J"))
        psi = Symbol.identity() if op in ("I", "J") else parse_symbol(cfg.psi)
        run = check_boundedness if action == "bounded" else check_compactness
        rep = run(w, op, psi, g, cfg.p, cfg.q, chk)
    result = rep.to_json()
    if rep.notes:
        result["notes"] = list(rep.notes)
    status = 2 if rep.verdict == "inconclusive" else 0
    return _report(f"check {action}", cfg, result), status


def _cmd_toeplitz_verify(cfg: RunConfig) -> tuple[dict, int]:
    w = WeightSpec.parse(cfg.weight)
    psi = parse_symbol(cfg.psi)
    g = parse_symbol(cfg.g)
    result = toeplitz_identity_check(psi, g, w, cfg.matrix_n)
    return _report("toeplitz verify", cfg, result), 0


# -- argument plumbing --------------------------------------------------------

_HANDLERS = {
    ("weights", "probe"): _cmd_weights_probe,
    ("kernel", "norms"): _cmd_kernel_norms,
    ("lattice", "build"): _cmd_lattice_build,
    ("transform", "sweep"): _cmd_transform_sweep,
    ("check", "bounded"): lambda c: _cmd_check("bounded", c),
    ("check", "compact"): lambda c: _cmd_check("compact", c),
    ("check", "schatten"): lambda c: _cmd_check("schatten", c),
    ("toeplitz", "verify"): _cmd_toeplitz_verify,
}

# option name -> (flag, type, help); bool options handled separately
_OPTIONS = {
    "weight": ("--weight", str, "weight spec, exp:b=..,alpha=.. or table:PATH"),
    "op": ("--op", str, "operator kind: c_psi_g, c_g_psi, i, j or gv"),
    "psi": ("--psi", str, "composition symbol (poly:/moebius:/scale:/smoebius:/compose)"),
    "g": ("--g", str, "integration symbol, same grammar"),
    "p": ("--p", float, "source exponent (inf allowed)"),
    "q": ("--q", float, "target exponent (inf allowed)"),
    "r_cut": ("--r-cut", float, "truncation radius of the probe domain"),
    "density": ("--density", float, "quadrature density multiplier"),
    "delta": ("--delta", float, "lattice scale; 0 resolves to 0.1 m_tau"),
    "n_radii": ("--n-radii", int, "radial sample count"),
    "n_theta": ("--n-theta", int, "angular sample count for sweeps"),
    "r_max": ("--r-max", float, "outermost sampled radius"),
    "n_probes": ("--n-probes", int, "coverage probe count"),
    "seed": ("--seed", int, "probe sampling seed"),
    "matrix_n": ("--N", int, "truncated matrix size"),
    "out": ("--out", str, "write the JSON report here instead of stdout"),
    "csv": ("--csv", str, "write sweep rows r,theta,value_log here"),
    "save": ("--save", str, "write lattice centers here (re im tau rows)"),
}

_SUBCOMMAND_OPTIONS = {
    ("weights", "probe"): ("weight", "r_max", "n_radii", "out"),
    ("kernel", "norms"): ("weight", "p", "r_max", "n_radii", "out", "csv"),
    ("lattice", "build"): ("weight", "delta", "r_cut", "n_probes", "seed",
                           "out", "save"),
    ("transform", "sweep"): ("weight", "op", "psi", "g", "p", "q", "r_cut",
                             "density", "n_radii", "n_theta", "out", "csv"),
    ("check", "bounded"): ("weight", "op", "psi", "g", "p", "q", "r_cut",
                           "density", "out"),
    ("check", "compact"): ("weight", "op", "psi", "g", "p", "q", "r_cut",
                           "density", "out"),
    ("check", "schatten"): ("weight", "op", "psi", "g", "p", "r_cut",
                            "density", "out"),
    ("toeplitz", "verify"): ("weight", "psi", "g", "matrix_n", "out"),
}

_FLOAT_WITH_INF = ("p", "q")


def _parse_scalar(name: str, text: str):
    _, typ, _ = _OPTIONS[name]
    if typ is float and name in _FLOAT_WITH_INF and text.lower() in ("inf", "infinity"):
        return math.inf
    return typ(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bergmanops",
        description=__doc__.split("\n\n")[0],
        epilog="CSV columns: r, theta, value_log (log scale, 17 digits).")
    groups = parser.add_subparsers(dest="group", required=True)
    seen: dict[str, argparse.ArgumentParser] = {}
    for (group, action), names in _SUBCOMMAND_OPTIONS.items():
        if group not in seen:
            gp = groups.add_parser(group)
            seen[group] = gp
            gp.set_defaults(_actions=gp.add_subparsers(dest="action",
                                                       required=True))
        sub = seen[group].get_default("_actions").add_parser(action)
        sub.set_defaults(_key=(group, action))
        sub.add_argument("--config", type=str, default="",
                         help="JSON file of defaults; flags override")
        for name in names:
            flag, typ, help_text = _OPTIONS[name]
            sub.add_argument(flag, dest=name, type=str, default=None,
                             help=help_text, metavar=name.upper())
        if "crosscheck" not in names and group == "check":
            sub.add_argument("--crosscheck", action="store_true", default=None,
                             help="run the truncated-matrix spectral ladder")
            sub.add_argument("--ladder", dest="ladder", type=str, default=None,
                             help="comma-separated ladder sizes", metavar="N,N,..")
    return parser


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    base = RunConfig().to_dict()
    if args.config:
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            raise ArgumentError(f"config file {args.config!r} must hold a JSON object")
        RunConfig.from_dict({**base, **file_cfg})  # validates keys early
        base.update(file_cfg)
    for name in _OPTIONS:
        value = getattr(args, name, None)
        if value is not None:
            base[name] = _parse_scalar(name, value)
    if getattr(args, "crosscheck", None) is not None:
        base["crosscheck"] = bool(args.crosscheck)
    if getattr(args, "ladder", None) is not None:
        base["ladder"] = [int(n) for n in str(args.ladder).split(",")]
    return RunConfig.from_dict(base)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        report, status = _HANDLERS[args._key](cfg)
    except WorkbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(report, cfg.out)
    return status


if __name__ == "__main__":
    sys.exit(main())
