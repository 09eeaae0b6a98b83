"""Command-line front end: ``rcsteane <subcommand> [flags]``.

Every data-producing subcommand writes ``<name>.csv`` and
``<name>.manifest.json`` into ``--out``.  Exit codes: 0 success, 1 failed
check, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import experiments as ex
from .pauli import build_min_weight_decoder, steane_code

EXIT_OK, EXIT_CHECK, EXIT_CONFIG = 0, 1, 2
COMMANDS = ("verify", "gain", "threshold", "haar", "depsweep", "sphere", "ensemble", "decoder-dump")
MODEL_ALIASES = {
    "cptp": "random-cptp",
    "random-cptp": "random-cptp",
    "rotations": "random-rotations",
    "random-rotations": "random-rotations",
}
FULL_SCALE_N = {"random-rotations": 16000, "random-cptp": 18000}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = "verify"
    axis: str = "z"
    omega: list = field(default_factory=lambda: [math.pi / 20])
    levels: list = field(default_factory=lambda: [1, 2])
    p: list = field(default_factory=lambda: [1e-4, 2e-4, 5e-4, 1e-3])
    r_target: float = 0.003
    model: str = "random-cptp"
    n: int = 2000
    seed: int = 0
    workers: int = 1
    out: str = "results"
    degrees: bool = False
    paper_scale: bool = False
    method: str = "engine"
    n_theta: int = 16
    n_phi: int = 32
    std_dev: bool = False
    fast: bool = False

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"command: unknown subcommand {self.command!r}")
        if not self.levels or min(self.levels) < 1:
            raise ConfigError("levels: need at least one level, all >= 1")
        if not self.omega:
            raise ConfigError("omega: grid is empty")
        if self.n < 1:
            raise ConfigError("n: sample count must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers: must be >= 1")
        if self.model not in MODEL_ALIASES:
            raise ConfigError(f"model: expected one of {sorted(MODEL_ALIASES)}")
        self.model = MODEL_ALIASES[self.model]
        if self.method not in ("engine", "recursion"):
            raise ConfigError("method: expected 'engine' or 'recursion'")
        if self.n_theta < 1 or self.n_phi < 1:
            raise ConfigError("n_theta/n_phi: must be >= 1")
        try:
            ex.parse_axis(self.axis)
        except ValueError as exc:
            raise ConfigError(f"axis: {exc}") from None
        return self


def parse_levels(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    text = str(text)
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(v) for v in text.split(",") if v.strip()]


def parse_grid(text, *, log: bool = False) -> list[float]:
    """``"a,b,c"`` or ``"start:stop:num"`` (linear, or geometric with ``log``)."""
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    text = str(text)
    if ":" in text:
        a, b, k = text.split(":")
        space = np.geomspace if log else np.linspace
        return [float(v) for v in space(float(a), float(b), int(k))]
    return [float(v) for v in text.split(",") if v.strip()]


def load_config_file(path: str) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from None
    try:
        if p.suffix in (".yaml", ".yml"):
            import yaml

            data = yaml.safe_load(text) or {}
        else:
            data = json.loads(text)
    except Exception as exc:  # parser errors carry line info in their message
        raise ConfigError(f"config: {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config: {path}: top level must be a mapping")
    known = {f.name for f in fields(RunConfig)}
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"config: {path}: unknown keys {unknown}")
    return data


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rcsteane", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON or YAML file with RunConfig keys")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--degrees", action="store_true", default=None, help="angles given in degrees")

    p = sub.add_parser("verify", help="run the oracle self-checks")
    common(p)
    p.add_argument("--fast", action="store_true", default=None, help="skip the dense brute-force check")

    for name, helptext in (
        ("gain", "raw vs twirled gain per level over an omega grid"),
        ("threshold", "crossing angle of consecutive level gains"),
        ("haar", "axis-averaged gains over an omega grid"),
    ):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--axis", help="z | x | y | theta,phi | haar")
        p.add_argument("--omega", help="comma list of angles")
        p.add_argument("--omega-range", dest="omega_range", help="start:stop:num")
        p.add_argument("--levels", help="e.g. 1..5 or 1,2")
        p.add_argument("--method", choices=("engine", "recursion"))
        p.add_argument("--n-theta", dest="n_theta", type=int)
        p.add_argument("--n-phi", dest="n_phi", type=int)

    p = sub.add_parser("depsweep", help="axis-averaged gain at fixed total infidelity")
    common(p)
    p.add_argument("--p-range", dest="p_range", help="comma list or start:stop:num (geometric)")
    p.add_argument("--r-target", dest="r_target", type=float)
    p.add_argument("--levels")
    p.add_argument("--n-theta", dest="n_theta", type=int)
    p.add_argument("--n-phi", dest="n_phi", type=int)

    p = sub.add_parser("sphere", help="per-axis threshold map")
    common(p)
    p.add_argument("--levels")
    p.add_argument("--n-theta", dest="n_theta", type=int)
    p.add_argument("--n-phi", dest="n_phi", type=int)

    p = sub.add_parser("ensemble", help="random noise ensembles")
    common(p)
    p.add_argument("--model", help="cptp | rotations")
    p.add_argument("--n", type=int)
    p.add_argument("--levels")
    p.add_argument("--paper-scale", dest="paper_scale", action="store_true", default=None,
                   help="full ensemble sizes (16000 rotations, 18000 cptp)")
    p.add_argument("--std-dev", dest="std_dev", action="store_true", default=None,
                   help="read the angle spread as a standard deviation, not a variance")

    p = sub.add_parser("decoder-dump", help="write the lookup table as JSON")
    common(p)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then config file, then explicit flags."""
    values = asdict(RunConfig())
    values["command"] = args.command
    if args.command == "sphere":
        values.update(n_theta=8, n_phi=16)
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
        values["command"] = args.command
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in ("config", "command")}
    if "omega_range" in flags:
        flags["omega"] = flags.pop("omega_range")
    if "p_range" in flags:
        flags["p"] = parse_grid(flags.pop("p_range"), log=True)
    values.update(flags)
    try:
        values["levels"] = parse_levels(values["levels"])
        values["omega"] = parse_grid(values["omega"])
        values["p"] = parse_grid(values["p"], log=True)
        cfg = RunConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value: {exc}") from None
    if cfg.degrees:
        cfg.omega = [math.radians(w) for w in cfg.omega]
        parsed = ex.parse_axis(cfg.axis)
        if parsed != "haar" and cfg.axis.lower() not in ex.AXES:
            cfg.axis = f"{math.radians(parsed[0])!r},{math.radians(parsed[1])!r}"
        cfg.degrees = False
    return cfg.validate()


def _finish(cfg: RunConfig, name: str, rows, start: float, notes=()) -> int:
    out = Path(cfg.out)
    csv_path = ex.write_csv(rows, out / f"{name}.csv")
    ex.write_manifest(out / f"{name}.manifest.json", name, asdict(cfg), [csv_path], time.perf_counter() - start, notes)
    print(f"wrote {csv_path} ({len(rows)} rows)")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, decoder=None) -> int:
    from .verify import check_phase_consistency, run_checks

    results = run_checks(fast=cfg.fast)
    if decoder is not None:
        results = [check_phase_consistency(steane_code(), decoder) if r.name == "phi-consistency" else r for r in results]
    failed = []
    for r in results:
        status = "PASS" if r.passed else ("FAIL" if r.gating else "INFO")
        print(f"{status:4}  {r.name:26} residual={r.residual:.3e}  tol={r.tol:.0e}")
        if r.gating and not r.passed:
            failed.append(r.name)
    if failed:
        print("failing checks: " + ", ".join(failed))
        return EXIT_CHECK
    return EXIT_OK


def cmd_gain(cfg: RunConfig) -> int:
    start = time.perf_counter()
    recs = ex.gain_curve(cfg.axis, cfg.levels, cfg.omega, method=cfg.method)
    return _finish(cfg, "gain", [r.row() for r in recs], start)


def cmd_threshold(cfg: RunConfig) -> int:
    start = time.perf_counter()
    levels = sorted(cfg.levels)
    if len(levels) < 2:
        raise ConfigError("levels: threshold needs at least two levels")
    quad = ex.Quadrature(cfg.n_theta, cfg.n_phi)
    rows = []
    for lo, hi in zip(levels, levels[1:]):
        res = ex.find_threshold(cfg.axis, lo, hi, method=cfg.method, quad=quad)
        rows.append(res.row())
        print(f"levels {lo}->{hi}: omega_star = {res.omega_star}")
    return _finish(cfg, "threshold", rows, start)


def cmd_haar(cfg: RunConfig) -> int:
    start = time.perf_counter()
    quad = ex.Quadrature(cfg.n_theta, cfg.n_phi)
    top = max(cfg.levels)
    rows = []
    for w in cfg.omega:
        avg = ex.haar_average_gain(top, w, quad)
        for lev in cfg.levels:
            rows.append({"omega": repr(w), "level": lev, "delta_haar": repr(avg[lev - 1]),
                         "n_theta": cfg.n_theta, "n_phi": cfg.n_phi})
    return _finish(cfg, "haar", rows, start)


def cmd_depsweep(cfg: RunConfig) -> int:
    start = time.perf_counter()
    quad = ex.Quadrature(cfg.n_theta, cfg.n_phi)
    rows, notes = [], []
    for lev in cfg.levels:
        pts, nts = ex.dep_coherent_sweep(cfg.p, cfg.r_target, lev, quad)
        rows += [p.row() for p in pts]
        notes += nts
    return _finish(cfg, "depsweep", rows, start, notes)


def cmd_sphere(cfg: RunConfig) -> int:
    start = time.perf_counter()
    levels = sorted(cfg.levels)
    lo, hi = levels[0], levels[-1]
    res = ex.threshold_sphere(cfg.n_theta, cfg.n_phi, lo, hi, workers=cfg.workers)
    rows = [{"theta": repr(t), "phi": repr(p), **r.row()} for t, p, r in res]
    return _finish(cfg, "sphere", rows, start)


def cmd_ensemble(cfg: RunConfig) -> int:
    start = time.perf_counter()
    n = FULL_SCALE_N[cfg.model] if cfg.paper_scale else cfg.n
    recs = ex.ensemble_study(cfg.model, n, max(cfg.levels), cfg.seed, workers=cfg.workers, variance=not cfg.std_dev)
    return _finish(cfg, "ensemble", [r.row() for r in recs], start)


def cmd_decoder_dump(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "decoder.json"
    path.write_text(build_min_weight_decoder(steane_code()).to_json() + "\n")
    print(f"wrote {path}")
    return EXIT_OK


HANDLERS = {
    "verify": cmd_verify,
    "gain": cmd_gain,
    "threshold": cmd_threshold,
    "haar": cmd_haar,
    "depsweep": cmd_depsweep,
    "sphere": cmd_sphere,
    "ensemble": cmd_ensemble,
    "decoder-dump": cmd_decoder_dump,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        return HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
