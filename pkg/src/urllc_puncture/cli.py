"""Command-line entry point: ``urllc-puncture <command> [flags]``.

Settings resolve as built-in defaults < ``--config`` file < environment
variables prefixed ``URLLC_PUNCTURE_`` < command-line flags.  The config file
is flat ``key = value`` text; ``#`` starts a comment.

Exit status: 0 success, 2 configuration error, 3 validation failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .analytic import LoadProfile, embb_loss, urllc_ser
from .constellation import SUPPORTED_ORDERS, db_to_linear
from .simulator import (
    AXES,
    FADING,
    MAPPER_POLICIES,
    SCHEMES,
    ExperimentConfig,
    analytic_point,
    benchmark_search,
    run_experiment,
    wilson_interval,
)

ENV_PREFIX = "URLLC_PUNCTURE_"
EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION = 0, 2, 3


class ConfigError(ValueError):
    pass


def _floats(text) -> tuple[float, ...]:
    """``"1,2,3"`` or ``"start:stop:step"`` (stop inclusive)."""
    text = str(text).strip()
    if ":" in text and "," not in text:
        a, b, s = (float(v) for v in text.split(":"))
        if s <= 0:
            raise ValueError("step must be positive")
        return tuple(float(v) for v in np.round(np.arange(a, b + s / 2, s), 10))
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text) -> tuple[int, ...]:
    return tuple(int(round(v)) for v in _floats(text))


def _strs(text) -> tuple[str, ...]:
    return tuple(v.strip() for v in str(text).split(",") if v.strip())


def _pairs(text) -> tuple[tuple[int, int], ...]:
    out = []
    for item in _strs(text):
        n, m = (int(v) for v in item.split("-"))
        out.append((n, m))
    return tuple(out)


def _bool(text) -> bool:
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key: (parser, default)
SCHEMA = {
    "seed": (int, 1),
    "out": (str, "-"),
    "trials": (int, 200_000),
    "power_grid": (_floats, (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0)),
    "snr_grid": (_floats, (0.0, 10.0, 20.0, 30.0, 40.0)),
    "axis": (str, "power"),
    "k_grid": (_ints, (1, 75, 150, 300, 600, 1200)),
    "k": (int, 1200),
    "mapper": (_strs, ("auto",)),
    "pair": (_pairs, ((2, 4), (2, 16))),
    "lambda": (_floats, (3.5, 7.0)),
    "zeta": (_ints, (24,)),
    "scheme": (_strs, ("baseline", "proposed")),
    "embb_order": (lambda t: None if str(t).strip().lower() in ("", "none", "auto") else int(t), None),
    "fading": (str, "block"),
    "urllc_fading": (str, "fast"),
    "distances": (_floats, tuple(np.linspace(50.0, 100.0, 10).tolist())),
    "urllc_distance": (float, 50.0),
    "noise_power": (float, 1e-9),
    "path_loss_exponent": (float, 3.0),
    "targets": (_floats, (0.001, 0.005, 0.01, 0.02, 0.05, 0.1)),
    "epsilon_u": (float, 1e-2),
    "epsilon": (float, 1e-3),
    "reference_snr_db": (float, 10.0),
    "loss_snr_db": (float, 40.0),
    "ordered": (_bool, False),
    "repetitions": (int, 200),
    "validate_trials": (int, 10_000),
    "jobs": (int, 1),
}


def read_config_file(path: str) -> dict:
    raw = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                k, v = (s.strip() for s in line.split("=", 1))
                raw[k.replace("-", "_")] = v
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return raw


def resolve_settings(args: argparse.Namespace, environ=None) -> dict:
    environ = os.environ if environ is None else environ
    layers = []
    if getattr(args, "config", None):
        layers.append(("file", read_config_file(args.config)))
    env = {k[len(ENV_PREFIX):].lower(): v for k, v in environ.items() if k.startswith(ENV_PREFIX)}
    layers.append(("env", env))
    flags = {k: v for k, v in vars(args).items() if k in SCHEMA and v is not None}
    layers.append(("flag", flags))

    settings = {k: d for k, (_, d) in SCHEMA.items()}
    for source, layer in layers:
        for key, value in layer.items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown setting {key!r} from {source}")
            parser = SCHEMA[key][0]
            try:
                settings[key] = parser(value) if isinstance(value, str) else value
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key} from {source}: {value!r} ({exc})") from exc
    _check_settings(settings)
    return settings


def _check_settings(s: dict) -> None:
    if s["seed"] is None:
        raise ConfigError("seed is mandatory")
    for key in ("power_grid", "snr_grid", "k_grid", "mapper", "pair", "lambda", "zeta", "scheme", "targets"):
        if not s[key]:
            raise ConfigError(f"{key} must not be empty")
    for n, m in s["pair"]:
        if n not in SUPPORTED_ORDERS or m not in SUPPORTED_ORDERS:
            raise ConfigError(f"unsupported pair {n}-{m}")
    bad = [mp for mp in s["mapper"] if mp not in MAPPER_POLICIES]
    if bad:
        raise ConfigError(f"unknown mapper(s) {bad}")
    bad = [sc for sc in s["scheme"] if sc not in SCHEMES]
    if bad:
        raise ConfigError(f"unknown scheme(s) {bad}")
    if s["axis"] not in AXES:
        raise ConfigError(f"axis must be one of {AXES}")
    if s["fading"] not in FADING or s["urllc_fading"] not in FADING:
        raise ConfigError(f"fading must be one of {FADING}")
    if any(k < 1 for k in s["k_grid"]) or s["k"] < 1 or s["trials"] < 1:
        raise ConfigError("K and trials must be positive")
    if any(lam < 0 for lam in s["lambda"]):
        raise ConfigError("lambda must be >= 0")
    if s["jobs"] < 1:
        raise ConfigError("jobs must be >= 1")
    if s["embb_order"] is not None and s["embb_order"] not in SUPPORTED_ORDERS:
        raise ConfigError(f"unsupported eMBB order {s['embb_order']}")


def sweep(s: dict, **over):
    return run_experiment(experiment(s, **over), workers=s["jobs"])


def experiment(s: dict, **over) -> ExperimentConfig:
    grid = s["power_grid"] if s["axis"] == "power" else s["snr_grid"]
    base = dict(
        K=s["k"], lam=s["lambda"][0], zeta=s["zeta"][0], embb_order=s["embb_order"], axis=s["axis"],
        grid=grid, trials=s["trials"], seed=s["seed"], fading=s["fading"], urllc_fading=s["urllc_fading"],
        distances=s["distances"], urllc_distance=s["urllc_distance"], noise_power=s["noise_power"],
        path_loss_exponent=s["path_loss_exponent"], ordered=s["ordered"], epsilon_u=s["epsilon_u"],
        epsilon=s["epsilon"], reference_snr_db=s["reference_snr_db"], mapper=s["mapper"][0],
    )
    base.update(over)
    try:
        return ExperimentConfig(**base)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _fmt(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6g}"
    return v


def write_csv(rows: list[dict], settings: dict, command: str, out: str) -> None:
    buf = io.StringIO()
    buf.write(f"# urllc-puncture {__version__} {command}\n")
    buf.write(f"# seed={settings['seed']}\n")
    for k in sorted(settings):
        v = settings[k]
        if isinstance(v, tuple):
            v = ",".join("-".join(map(str, x)) if isinstance(x, tuple) else str(x) for x in v)
        buf.write(f"# {k}={v}\n")
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(v) for k, v in r.items()})
    text = buf.getvalue()
    if out in ("-", ""):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def cmd_loss_vs_k(s: dict) -> list[dict]:
    """Share of punctured eMBB symbols lost, per K, mapper and pair."""
    rows = []
    snr = s["loss_snr_db"]
    mappers = [mp for mp in s["mapper"] if mp != "auto"] or ["urllc", "esrm"]
    for n, m in s["pair"]:
        for mp in mappers:
            if mp in ("srm", "esrm") and n > m:
                continue
            for K in s["k_grid"]:
                cfg = experiment(s, scheme="proposed", mapper=mp, K=K, embb_order=m, urllc_order=n,
                                 axis="snr", grid=(snr,), fading="fast")
                p = run_experiment(cfg).points[0]
                prof = LoadProfile(2400, {m: 1.0}, {(n, m): p.punctured_fraction * 2400}, cfg.zeta, K)
                ana = embb_loss(prof, float(db_to_linear(snr)), mp, relative=True, policy=cfg.policy)
                lo, hi = wilson_interval(p.punctured_errors, p.punctured)
                rows.append(dict(K=K, mapper=mp, pair=f"{n}-{m}", analytic_loss=ana,
                                 empirical_loss=p.punctured_loss, ci_low=lo, ci_high=hi,
                                 mismatch_fraction=p.loss_fraction, punctured=p.punctured))
    return rows


def _gain_db(x, base, prop) -> list[float]:
    """Extra dB the baseline needs to reach the proposed SER level, per grid point."""
    x = np.asarray(x, float)
    lb = np.log(np.maximum(base, 1e-300))
    out = []
    for i, target in enumerate(prop):
        if target <= 0 or not np.any(base <= target):
            out.append(float("nan"))
            continue
        j = int(np.flatnonzero(base <= target)[0])
        if j == 0:
            out.append(float("nan"))
            continue
        xb = np.interp(math.log(target), [lb[j], lb[j - 1]], [x[j], x[j - 1]])
        out.append(float(xb - x[i]))
    return out


def cmd_ser_sweep(s: dict) -> list[dict]:
    rows = []
    for zeta in s["zeta"]:
        for lam in s["lambda"]:
            reports = {sc: sweep(s, scheme=sc, lam=lam, zeta=zeta) for sc in s["scheme"]}
            gains = None
            if {"baseline", "proposed"} <= reports.keys():
                b, p = reports["baseline"], reports["proposed"]
                gains = _gain_db(b.config.grid, b.embb_ser, p.embb_ser)
            for sc, rep in reports.items():
                for i, pt in enumerate(rep.points):
                    lo, hi = pt.embb_ci
                    rows.append(dict(zeta=zeta, **{"lambda": lam}, scheme=sc, x=pt.x, embb_ser=pt.embb_ser,
                                     ci_low=lo, ci_high=hi, analytic_ser=analytic_point(rep.config, pt),
                                     punctured_fraction=pt.punctured_fraction,
                                     gain_db=gains[i] if gains and sc == "proposed" else float("nan"),
                                     symbols=pt.embb_symbols))
    return rows


def cmd_reliability(s: dict) -> list[dict]:
    rows = []
    for lam in s["lambda"]:
        for sc in s["scheme"]:
            rep = sweep(s, scheme=sc, lam=lam)
            for pt in rep.points:
                for t in s["targets"]:
                    per_user = pt.per_user_reliability(t, rep.config.users)
                    rows.append(dict(**{"lambda": lam}, scheme=sc, x=pt.x, target=t, reliability=pt.reliability(t),
                                     blocks=len(pt.block_errors),
                                     per_user=";".join(f"{r:.3f}" for r in per_user)))
    return rows


def cmd_urllc(s: dict) -> list[dict]:
    rows = []
    for lam in s["lambda"]:
        for sc in s["scheme"]:
            rep = sweep(s, scheme=sc, lam=lam)
            for pt in rep.points:
                lo, hi = pt.urllc_ci
                q = pt.substituted / pt.urllc_symbols if pt.urllc_symbols else 0.0
                mappers = set(pt.mappers.values())
                mp = mappers.pop() if len(mappers) == 1 else "mixed"
                if mp == "mixed":
                    ana = float("nan")
                else:
                    m = next(iter(pt.mappers))
                    ana = urllc_ser(rep.config.urllc_order, m, pt.gamma_u, mp, substitution=q,
                                    policy=rep.config.policy)
                row = dict(**{"lambda": lam}, scheme=sc, mapper=mp, x=pt.x, urllc_ser=pt.urllc_ser, ci_low=lo,
                           ci_high=hi, analytic_ser=ana, substitution=q, symbols=pt.urllc_symbols)
                for t in s["targets"]:
                    row[f"reliability_{t:g}"] = pt.urllc_reliability(t)
                rows.append(row)
    return rows


def cmd_bench(s: dict) -> list[dict]:
    res = benchmark_search(tuple(k for k in s["k_grid"] if k >= 1), s["zeta"][0], s["repetitions"], s["seed"])
    return [dict(K=k, median_us=md, p99_us=p9, fit_slope=res.slope_us, r2=res.r2)
            for k, md, p9 in zip(res.K, res.median_us, res.p99_us)]


def cmd_validate(s: dict) -> tuple[dict, bool]:
    from .validation import run_all
    checks = run_all(trials=s["validate_trials"], seed=s["seed"])
    summary = {
        "version": __version__,
        "seed": s["seed"],
        "passed": sum(c.passed for c in checks),
        "failed": [c.name for c in checks if not c.passed],
        "checks": [c.to_dict() for c in checks],
    }
    return summary, not summary["failed"]


COMMANDS = {
    "loss-vs-k": cmd_loss_vs_k,
    "ser-sweep": cmd_ser_sweep,
    "reliability": cmd_reliability,
    "urllc": cmd_urllc,
    "bench": cmd_bench,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value settings file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output path; '-' for stdout")
    common.add_argument("--trials", type=int, help="minimum eMBB symbols per grid point")
    common.add_argument("--power-grid", dest="power_grid", help="dBm values: a,b,c or start:stop:step")
    common.add_argument("--k-grid", dest="k_grid", help="candidate counts: a,b,c")
    common.add_argument("--mapper", help=f"comma list of {MAPPER_POLICIES}")
    common.add_argument("--pair", help="URLLC-eMBB order pairs, e.g. 2-4,2-16")
    common.add_argument("--lambda", dest="lambda", help="URLLC packets per ms, comma list")
    common.add_argument("--zeta", help="URLLC block size(s) in symbols")
    common.add_argument("--scheme", help="comma list of baseline,proposed")
    common.add_argument("--jobs", type=int, help="worker processes for grid points")

    p = argparse.ArgumentParser(prog="urllc-puncture", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("loss-vs-k", parents=[common], help="eMBB loss per punctured symbol versus K")
    sub.add_parser("ser-sweep", parents=[common], help="eMBB SER versus transmit power")
    sub.add_parser("reliability", parents=[common], help="eMBB block reliability versus target SER")
    sub.add_parser("urllc", parents=[common], help="URLLC SER and reliability versus transmit power")
    sub.add_parser("validate", parents=[common], help="run the oracle checks, print JSON")
    sub.add_parser("bench", parents=[common], help="time the similarity search versus K")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve_settings(args)
        if args.command == "validate":
            summary, ok = cmd_validate(settings)
            text = json.dumps(summary, indent=2)
            if settings["out"] in ("-", ""):
                print(text)
            else:
                with open(settings["out"], "w") as fh:
                    fh.write(text + "\n")
            for name in summary["failed"]:
                print(f"FAILED: {name}", file=sys.stderr)
            return EXIT_OK if ok else EXIT_VALIDATION
        rows = COMMANDS[args.command](settings)
        write_csv(rows, settings, args.command, settings["out"])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
