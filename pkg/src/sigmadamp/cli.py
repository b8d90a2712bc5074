"""Command-line front end.

    sigmadamp <command> --config FILE --out DIR [--tolerance X] [--t-min T0 --t-max T1]
              [--grid N --box L --dt DT]

Exit codes: 0 all checks pass, 1 a verdict failed or was faster-than-predicted,
2 usage or config error, 3 numerical failure (quadrature non-convergence, blow-up).
"""
from __future__ import annotations

import argparse
import configparser
import csv
import datetime as _dt
import json
import math
import re
import struct
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, quadrature, rates, solver, symbol, verify
from .config import (ConfigError, EstimateKind, ProblemConfig, RateQuery,
                     check_global_existence_hypotheses, validate)

COMMANDS = ("rates", "kernel-norms", "simulate-linear", "simulate-semilinear",
            "verify-decay", "verify-profile", "verify-log-case")
SECTIONS = ("experiment", "problem", "query", "data", "grid", "times", "verify")

# key -> (parser, default)
KEYS = {
    "command": (str, None),
    "sigma": (float, None), "sigma1": (float, None), "sigma2": (float, None),
    "mu1": (float, 1.0), "mu2": (float, 1.0), "n": (int, None),
    "p": (float, None), "deriv_j": (int, 0),
    "m": (float, 1.0), "s": (float, 0.0), "j": (int, 0), "kind": (str, "LmL2"),
    "data_slot": (str, "u1"), "amplitude": (float, 1.0), "width": (float, 1.0),
    "epsilon": (float, 1e-2),
    "grid_points": (int, None), "box_length": (float, None), "dt": (float, None),
    "horizon": (float, None), "zero_mode": (str, "cell"),
    "t_min": (float, None), "t_max": (float, None), "samples_per_decade": (int, 4),
    "tolerance": (float, None), "which": (str, "K1"), "seed": (int, 0),
}
ALIASES = {"dim_n": "n", "nonlinearity_p": "p", "points_per_dim": "grid_points",
           "box": "box_length", "estimate_kind": "kind"}
SEMILINEAR = ("simulate-semilinear",)


class UsageError(Exception):
    """Malformed configuration or command line (exit code 2)."""


@dataclass
class ExperimentSpec:
    command: str
    config: ProblemConfig
    query: RateQuery
    values: dict
    out_dir: Path
    source: str = ""

    def grid(self):
        if self.values.get("grid_points") is None:
            return None
        return solver.GridSpec(self.config.dim_n, int(self.values["grid_points"]),
                               float(self.values["box_length"]), self.values["zero_mode"])

    def data(self):
        v = self.values
        return solver.gaussian_data(v["amplitude"], v["width"], self.config.dim_n, v["data_slot"])

    def resolved(self):
        out = {"command": self.command, "problem": asdict(self.config),
               "query": {"m": self.query.m, "s": self.query.s, "j": self.query.j,
                         "estimate_kind": self.query.estimate_kind.value}}
        out["settings"] = {k: v for k, v in sorted(self.values.items())
                           if k not in ("sigma", "sigma1", "sigma2", "mu1", "mu2", "n", "p",
                                        "deriv_j", "m", "s", "j", "kind", "command")}
        return out


def _line_of(text: str, key: str):
    for i, line in enumerate(text.splitlines(), 1):
        if re.match(rf"\s*{re.escape(key)}\s*[=:]", line):
            return i
    return None


def parse_config(path, command: str | None = None, out_dir=".", overrides=None) -> ExperimentSpec:
    """Strict INI parsing: unknown sections or keys are rejected with their line number.

    A file without section headers is read as one flat section.
    """
    path = Path(path)
    if not path.exists():
        raise UsageError(f"config file not found: {path}")
    text = path.read_text()
    if not re.search(r"^\s*\[", text, flags=re.M):
        text = "[experiment]\n" + text
        shift = 1
    else:
        shift = 0
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise UsageError(f"{path}: {exc}") from exc
    raw = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise UsageError(f"{path}:{(_line_of(text, '[' + section) or 0) - shift}: "
                             f"unknown section [{section}]")
        for key, value in parser.items(section):
            name = ALIASES.get(key, key)
            line = (_line_of(text, key) or 0) - shift
            if name not in KEYS:
                raise UsageError(f"{path}:{line}: unknown key '{key}'")
            if name in raw:
                raise UsageError(f"{path}:{line}: duplicate key '{key}'")
            try:
                raw[name] = KEYS[name][0](value.strip())
            except ValueError as exc:
                raise UsageError(f"{path}:{line}: bad value for '{key}': {value!r}") from exc
    for k, v in (overrides or {}).items():
        if v is not None:
            raw[k] = v
    values = {k: raw.get(k, default) for k, (_, default) in KEYS.items()}
    cmd = command or values["command"]
    if cmd is None:
        raise UsageError("no command given")
    if cmd not in COMMANDS:
        raise UsageError(f"unknown command '{cmd}'")
    if values["command"] is not None and command is not None and values["command"] != command:
        raise UsageError(f"config is for '{values['command']}', not '{command}'")
    for req in ("sigma", "sigma1", "sigma2", "n"):
        if values[req] is None:
            raise UsageError(f"{path}: missing required key '{req}'")
    if cmd in SEMILINEAR and values["p"] is None:
        raise UsageError("nonlinearity_p required")
    try:
        config = validate(ProblemConfig(values["sigma"], values["sigma1"], values["sigma2"],
                                        values["mu1"], values["mu2"], values["n"], values["p"],
                                        values["deriv_j"]))
        kind = EstimateKind(values["kind"])
        m = values["m"]
        if kind == EstimateKind.L2L2 and "m" not in raw:
            m = 2.0
        query = RateQuery(m, values["s"], values["j"], kind)
    except (ConfigError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from exc
    if cmd == "simulate-semilinear":
        for req in ("grid_points", "box_length", "dt", "horizon"):
            if values[req] is None:
                raise UsageError(f"simulate-semilinear needs '{req}' (config or command line)")
    if values["grid_points"] is not None and values["box_length"] is None:
        raise UsageError("grid_points given without box_length")
    return ExperimentSpec(cmd, config, query, values, Path(out_dir), str(path))


# ------------------------------------------------------------------ output


def write_report(out_dir: Path, spec: ExperimentSpec, results: dict, verdict: str):
    out_dir.mkdir(parents=True, exist_ok=True)
    report = {"tool": "sigmadamp", "version": __version__, "command": spec.command,
              "config": spec.resolved(), "results": _clean(results), "verdict": verdict,
              "metadata": {"created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
                           "config_file": spec.source}}
    (out_dir / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True,
                                                    ensure_ascii=False) + "\n")
    return report


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_samples(out_dir: Path, rows):
    """CSV with columns t, value, predicted_curve (plus an optional series label)."""
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = list(rows)
    labelled = any(len(r) > 3 for r in rows)
    with open(out_dir / "samples.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "value", "predicted_curve"] + (["series"] if labelled else []))
        for r in rows:
            w.writerow([repr(float(r[0])), repr(float(r[1])),
                        "" if r[2] is None else repr(float(r[2]))] + list(r[3:]))


MAGIC = b"SGEV"


def write_trajectory(path: Path, fields):
    """Concatenated records: "SGEV", u32 dims, f64 L, u32 N per dim, f64 time, then
    row-major (re, im) float64 pairs of the coefficients (little-endian)."""
    with open(path, "wb") as fh:
        for f in fields:
            g = f.grid
            fh.write(MAGIC)
            fh.write(struct.pack("<I", g.dim_n))
            fh.write(struct.pack("<d", g.box_length))
            fh.write(struct.pack(f"<{g.dim_n}I", *g.shape))
            fh.write(struct.pack("<d", f.time))
            fh.write(np.ascontiguousarray(f.coefficients, dtype="<c16").tobytes())


def read_trajectory(path):
    """Inverse of write_trajectory: list of (box_length, time, coefficients)."""
    data = Path(path).read_bytes()
    out, pos = [], 0
    while pos < len(data):
        if data[pos:pos + 4] != MAGIC:
            raise ValueError(f"bad magic at byte {pos}")
        pos += 4
        (dims,) = struct.unpack_from("<I", data, pos); pos += 4
        (box,) = struct.unpack_from("<d", data, pos); pos += 8
        shape = struct.unpack_from(f"<{dims}I", data, pos); pos += 4 * dims
        (time,) = struct.unpack_from("<d", data, pos); pos += 8
        count = int(np.prod(shape))
        arr = np.frombuffer(data, dtype="<c16", count=count, offset=pos).reshape(shape)
        pos += 16 * count
        out.append((box, time, arr.copy()))
    return out


# ------------------------------------------------------------------ commands


def _times(spec, default):
    v = spec.values
    t0 = v["t_min"] if v["t_min"] is not None else default[0]
    t1 = v["t_max"] if v["t_max"] is not None else default[1]
    if not (0 < t0 < t1):
        raise UsageError("need 0 < t_min < t_max")
    return verify.log_times(t0, t1, v["samples_per_decade"])


def _tol(spec, default):
    return spec.values["tolerance"] if spec.values["tolerance"] is not None else default


def _overall(verdicts):
    """Combined verdict; exit code 0 is reserved for a strict "pass"."""
    verdicts = list(verdicts)
    if all(v == verify.PASS for v in verdicts):
        return verify.PASS
    if all(v in (verify.PASS, verify.FASTER) for v in verdicts):
        return verify.FASTER
    return verify.FAIL


def cmd_rates(spec):
    cfg, q = spec.config, spec.query
    out = {"linear": rates.linear_decay_exponent(cfg, q).to_dict()}
    try:
        out["profile"] = rates.profile_rate(cfg, q.s, q.j).to_dict()
        out["gamma_s"] = rates.gamma_s(cfg, q.s, q.j).to_dict()
    except rates.RateError as exc:
        out["profile"] = {"error": str(exc)}
    if q.estimate_kind == EstimateKind.LmL2:
        out["kernel_pieces"] = {k: v.to_dict() for k, v in
                                rates.kernel_piece_rates(cfg, q.m, q.s, q.j).items()}
        out["profile_gap"] = {}
        for which in ("K0-piece", "K1-piece"):
            try:
                out["profile_gap"][which] = rates.profile_gap_rate(cfg, q.m, q.s, q.j, which).to_dict()
            except rates.RateError as exc:
                out["profile_gap"][which] = {"error": str(exc)}
    if cfg.nonlinearity_p is not None and q.m < 2:
        rep = check_global_existence_hypotheses(cfg, q.m)
        out["hypotheses"] = rep.conditions
        if rep.admissible:
            out["semilinear"] = {k: v.to_dict() for k, v in
                                 rates.semilinear_decay_exponents(cfg, q.m).items()}
    return out, "pass", []


def cmd_kernel_norms(spec):
    cfg, q = spec.config, spec.query
    which = spec.values["which"]
    times = _times(spec, (1e3, 1e5))
    sharp = verify.run_kernel_sharpness(cfg, which, q.j, q.s, q.m,
                                        base_times=tuple(times[:1]) + tuple(times[-1:]),
                                        rel_tol=_tol(spec, 0.02))
    values = [quadrature.p_norm_integral(cfg, which, q.j, q.s, q.m, t) for t in times]
    pred = [values[0] * (t / times[0]) ** sharp["exponent"] for t in times]
    rows = [(t, v, p) for t, v, p in zip(times, values, pred)]
    return {"sharpness": sharp, "samples": [[t, v] for t, v, _ in rows]}, \
        sharp["verdict"], rows


def cmd_simulate_linear(spec):
    cfg, q = spec.config, spec.query
    data = spec.data()
    times = _times(spec, (1.0, 1e3))
    grid = spec.grid()
    radial = [solver.linear_norm_radial(cfg, data, t, q.s, q.j) for t in times]
    rows = [(t, v, None, "radial") for t, v in zip(times, radial)]
    out = {"P0": data.P0, "P1": data.P1, "radial": [[t, v] for t, v in zip(times, radial)]}
    verdict = "pass"
    if grid is not None:
        check = verify.run_grid_cross_check(cfg, grid, data, times, _tol(spec, 1e-3))
        out["grid_cross_check"] = check
        rows += [(r["t"], r["grid"], r["radial"], "grid") for r in check["rows"]]
        verdict = check["verdict"]
    return out, verdict, rows


def cmd_simulate_semilinear(spec):
    cfg = spec.config
    grid = spec.grid()
    v = spec.values
    times = (v["t_min"] or verify.SEMILINEAR_WINDOW[0], v["t_max"] or min(v["horizon"], 1e3))
    res = verify.run_semilinear(cfg, grid, v["dt"], v["horizon"], v["epsilon"], v["width"],
                                v["data_slot"], window=times, tol=_tol(spec, verify.SEMILINEAR_TOL),
                                m=spec.query.m)
    out = res.to_dict()
    rows = []
    for rep in res.decay:
        rows += [(t, val, p, rep.query) for (t, val), p in zip(rep.samples, rep.predicted_curve())]
    traj_fields = [s.u for s in res.trajectory.snapshots]
    if traj_fields:
        spec.out_dir.mkdir(parents=True, exist_ok=True)
        write_trajectory(spec.out_dir / "trajectory.bin", traj_fields)
    if res.blowup:
        return out, "blowup", rows
    verdicts = [r.verdict for r in res.decay]
    if res.profile:
        verdicts.append(res.profile["verdict"])
    return out, _overall(verdicts), rows


def cmd_verify_decay(spec):
    times = _times(spec, verify.LINEAR_WINDOW)
    rep = verify.run_linear_decay(spec.config, spec.query, spec.data(), times,
                                  _tol(spec, verify.LINEAR_TOL))
    rows = [(t, val, p) for (t, val), p in zip(rep.samples, rep.predicted_curve())]
    return rep.to_dict(), rep.verdict, rows


def cmd_verify_profile(spec):
    times = _times(spec, verify.LINEAR_WINDOW)
    rep = verify.run_profile(spec.config, spec.data(), spec.query.s, spec.query.j, times)
    rows = [(t, g, None, "gap") for t, g in zip(rep.times, rep.gap_norms)]
    rows += [(t, r, None, "ratio") for t, r in zip(rep.times, rep.ratios)]
    return rep.to_dict(), "pass" if rep.ok else "fail", rows


def cmd_verify_log_case(spec):
    times = _times(spec, (1e3, 1e6))
    rep = verify.run_log_case(spec.config, spec.data(), times, _tol(spec, verify.LINEAR_TOL))
    rows = [(t, val, p) for (t, val), p in zip(rep.samples, rep.predicted_curve())]
    return rep.to_dict(), rep.verdict, rows


HANDLERS = {"rates": cmd_rates, "kernel-norms": cmd_kernel_norms,
            "simulate-linear": cmd_simulate_linear, "simulate-semilinear": cmd_simulate_semilinear,
            "verify-decay": cmd_verify_decay, "verify-profile": cmd_verify_profile,
            "verify-log-case": cmd_verify_log_case}


def run(spec: ExperimentSpec) -> int:
    try:
        results, verdict, rows = HANDLERS[spec.command](spec)
    except (rates.RateError, ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (quadrature.QuadratureError, symbol.ZoneError, solver.BlowUp) as exc:
        write_report(spec.out_dir, spec, {"error": str(exc)}, "numerical-failure")
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    write_report(spec.out_dir, spec, results, verdict)
    if rows:
        write_samples(spec.out_dir, rows)
    if verdict == "blowup":
        print("numerical failure: blow-up flagged", file=sys.stderr)
        return 3
    return 0 if verdict == verify.PASS else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="sigmadamp", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--tolerance", type=float)
    ap.add_argument("--t-min", type=float, dest="t_min")
    ap.add_argument("--t-max", type=float, dest="t_max")
    ap.add_argument("--grid", type=int, dest="grid_points")
    ap.add_argument("--box", type=float, dest="box_length")
    ap.add_argument("--dt", type=float)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    overrides = {k: getattr(args, k) for k in ("tolerance", "t_min", "t_max", "grid_points",
                                               "box_length", "dt")}
    try:
        spec = parse_config(args.config, args.command, args.out, overrides)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
