"""Command-line front end: ``lrising <subcommand> [options]``.

Precedence of settings: command-line flags, then ``--config`` file, then
built-in defaults. The config file is either flat ``key = value`` text or a
JSON/CSV output of a previous run (its embedded ``config`` is replayed).

Exit codes: 0 success, 1 invalid input, 2 numerical check failed, 3 resource cap.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as lio
from .analysis import curve_collapse_metric, equilibration_time, recurrence_scan, scaling_exponent
from .bounds import gaussian_lower_bound, gaussian_upper_bound, minimal_system_size, verify_minimal_size
from .errors import LRIsingError, NotFoundError, NumericalCheckError, SizeLimitError, ValidationError
from .evolution import (
    WORKERS_ENV,
    InitialStateSpec,
    ObservableSpec,
    cosine_product,
    expectation_series,
    time_grid,
)
from .model import CouplingLaw, LatticeSpec, ModelParams
from .oracle import oracle_series
from .plotting import line_chart_svg

EXIT_OK, EXIT_INVALID, EXIT_CHECK, EXIT_CAP = 0, 1, 2, 3

# key -> (type, default)
OPTIONS = {
    "n": (int, None),
    "dim": (int, 1),
    "side": (int, None),
    "alpha": (float, 0.5),
    "C": (float, 1.0),
    "h": (float, 0.0),
    "metric": (str, "euclidean"),
    "no_couplings": (bool, False),
    "workers": (int, None),
    "tmin": (float, None),
    "tmax": (float, 100.0),
    "points": (int, 1000),
    "grid": (str, "auto"),
    "mode": (str, "hamiltonian_exact"),
    "a": (float, 1.0),
    "m": (float, 1.0),
    "a_file": (str, None),
    "m_file": (str, None),
    "tol": (float, 1e-10),
    "tau": (float, 10.0),
    "delta": (float, 0.01),
    "A0": (float, 1.0),
    "theta": (float, 0.5),
    "eta": (float, 1e-3),
    "dt": (float, 0.05),
    "n_list": (str, "4096:4194304:x4"),
    "svg": (bool, False),
}
OUTPUT_KEYS = ("out", "json", "outdir", "csv", "config")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _to_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    return str(text).strip().lower() in ("1", "true", "yes", "on")


def _coerce(key: str, value):
    typ = OPTIONS[key][0]
    if value is None:
        return None
    if typ is bool:
        return _to_bool(value)
    if typ is int:
        return int(float(value)) if isinstance(value, str) and "e" in value.lower() else int(value)
    return typ(value)


def load_config_file(path: str) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        raw = doc.get("config", doc)
    elif stripped.startswith("# format_version"):
        meta, _ = lio.parse_csv(text)
        raw = meta.get("config", {})
    else:
        raw = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValidationError(f"config line without '=': {line!r}")
            raw[key.strip().replace("-", "_")] = value.strip()
    cfg = {}
    for key, value in raw.items():
        if key in OUTPUT_KEYS or key == "command":
            continue
        if key not in OPTIONS:
            raise ValidationError(f"unknown config key {key!r}")
        cfg[key] = _coerce(key, value)
    return cfg


def _add_model(p):
    g = p.add_argument_group("model")
    g.add_argument("--config", help="key=value file or a previous JSON/CSV output")
    g.add_argument("--n", type=int, help="chain length (1-d shorthand for --side with --dim 1)")
    g.add_argument("--dim", type=int, help="lattice dimension d")
    g.add_argument("--side", type=int, help="side length L (even)")
    g.add_argument("--alpha", type=float, help="coupling exponent")
    g.add_argument("--C", type=float, help="coupling amplitude")
    g.add_argument("--h", type=float, help="z field")
    g.add_argument("--metric", choices=("euclidean", "chebyshev"))
    g.add_argument("--no-couplings", dest="no_couplings", action="store_const", const=True,
                   help="switch pair couplings off (field-only dynamics)")
    g.add_argument("--workers", type=int, help=f"worker threads (default ${WORKERS_ENV} or 1)")


def _add_grid(p):
    g = p.add_argument_group("time grid")
    g.add_argument("--tmin", type=float)
    g.add_argument("--tmax", type=float)
    g.add_argument("--points", type=int)
    g.add_argument("--grid", choices=("linear", "log", "auto"))


def _add_state(p):
    g = p.add_argument_group("observable and initial state")
    g.add_argument("--a", type=float, help="uniform observable coefficient")
    g.add_argument("--m", type=float, help="uniform initial <sigma^x>")
    g.add_argument("--a-file", dest="a_file", help="file with N observable coefficients")
    g.add_argument("--m-file", dest="m_file", help="file with N initial x-expectations")


def _add_output(p, json_flag=True):
    p.add_argument("--out", help="output file (default: stdout)")
    if json_flag:
        p.add_argument("--json", help="also write a JSON document to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lrising", description="Equilibration dynamics of long-range quantum Ising models.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help_text, model=True, grid=False, state=False, output=True, json_flag=True):
        p = sub.add_parser(name, help=help_text, argument_default=argparse.SUPPRESS)
        if model:
            _add_model(p)
        if grid:
            _add_grid(p)
        if state:
            _add_state(p)
        if output:
            _add_output(p, json_flag)
        return p

    p = cmd("evolve", "closed-form <A>(t) time series", grid=True, state=True)
    p.add_argument("--mode", choices=("hamiltonian_exact", "as_published"))
    cmd("oracle", "brute-force <A>(t) time series (N <= 24)", grid=True, state=True)
    p = cmd("check", "compare closed form against the oracle", grid=True, state=True)
    p.add_argument("--tol", type=float)
    cmd("bound", "Gaussian envelopes alongside F(t)", grid=True)
    p = cmd("nmin", "minimal system size N0(tau, delta)")
    p.add_argument("--tau", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--A0", type=float)
    p.add_argument("--points", type=int)
    p = cmd("tau", "equilibration time for one parameter set")
    p.add_argument("--theta", type=float)
    p = cmd("fit-gamma", "scaling exponent of tau0 over an N list")
    p.add_argument("--n-list", dest="n_list")
    p.add_argument("--theta", type=float)
    p.add_argument("--csv", help="write (ln N, ln tau0) CSV here")
    p = cmd("collapse", "max |F_N - F_N'| over an N list", grid=True)
    p.add_argument("--n-list", dest="n_list")
    p = cmd("recur", "recurrence times of F")
    p.add_argument("--eta", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--dt", type=float)
    p = cmd("figure1", "data for both decay panels (alpha=2 and alpha=1/2)", model=False, output=False)
    p.add_argument("--config")
    p.add_argument("--outdir", default=".")
    p.add_argument("--points", type=int)
    p.add_argument("--svg", action="store_const", const=True)
    p.add_argument("--workers", type=int)
    return parser


def effective_config(ns: argparse.Namespace) -> dict:
    given = vars(ns).copy()
    cfg = {k: v for k, (_, v) in OPTIONS.items()}
    if given.get("config"):
        cfg.update(load_config_file(given["config"]))
    for key, value in given.items():
        if key in OPTIONS:
            cfg[key] = value
    if cfg["workers"] is None:
        import os

        cfg["workers"] = int(os.environ.get(WORKERS_ENV, "1"))
    return cfg


def _echo(cfg: dict, command: str) -> dict:
    out = {"command": command}
    out.update({k: v for k, v in cfg.items() if k not in OUTPUT_KEYS})
    return out


def params_from(cfg: dict) -> ModelParams:
    if cfg.get("n") is not None:
        if cfg["dim"] != 1:
            raise ValidationError("--n is the 1-d shorthand; use --side with --dim > 1")
        side = cfg["n"]
    elif cfg.get("side") is not None:
        side = cfg["side"]
    else:
        raise ValidationError("give the system size with --n or --side")
    lattice = LatticeSpec(cfg["dim"], side, cfg["metric"])
    return ModelParams(lattice, CouplingLaw(cfg["alpha"], cfg["C"]), cfg["h"], not cfg["no_couplings"])


def grid_from(cfg: dict) -> np.ndarray:
    spacing = cfg["grid"]
    if spacing == "auto":
        spacing = "log" if cfg["alpha"] < cfg["dim"] else "linear"
    tmin = cfg["tmin"]
    if tmin is None:
        tmin = 1e-3 if spacing == "log" else 0.0
    return time_grid(tmin, cfg["tmax"], cfg["points"], spacing)


def _vector(path: str, n: int) -> np.ndarray:
    vals = np.array(Path(path).read_text(encoding="utf-8").replace(",", " ").split(), dtype=np.float64)
    if len(vals) != n:
        raise ValidationError(f"{path}: expected {n} numbers, found {len(vals)}")
    return vals


def state_from(cfg: dict, n: int):
    a = ObservableSpec(_vector(cfg["a_file"], n)) if cfg.get("a_file") else ObservableSpec.uniform(n, cfg["a"])
    m = InitialStateSpec(_vector(cfg["m_file"], n)) if cfg.get("m_file") else InitialStateSpec.uniform(n, cfg["m"])
    return a, m


def parse_n_list(spec: str) -> list[int]:
    """``start:stop:xK`` (geometric, factor K) or a comma-separated list."""
    spec = str(spec).strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3 or not parts[2].startswith("x"):
            raise ValidationError(f"bad N list {spec!r}; expected start:stop:xK")
        start, stop, factor = int(float(parts[0])), int(float(parts[1])), int(parts[2][1:])
        if start < 2 or factor < 2 or stop < start:
            raise ValidationError(f"bad N list {spec!r}")
        out, n = [], start
        while n <= stop:
            out.append(n)
            n *= factor
        return out
    return [int(float(x)) for x in spec.split(",") if x.strip()]


# -- subcommands ------------------------------------------------------------------


def _emit_series(ts, cfg, ns, command):
    config = _echo(cfg, command)
    lio.write_text(lio.series_csv(ts, config), getattr(ns, "out", None))
    if getattr(ns, "json", None):
        lio.write_json(lio.json_document(config, {"series": lio.series_payload(ts)}), ns.json)


def run_evolve(cfg, ns):
    params = params_from(cfg)
    a, m = state_from(cfg, params.n_sites)
    ts = expectation_series(params, a, m, grid_from(cfg), cfg["mode"], cfg["workers"])
    _emit_series(ts, cfg, ns, "evolve")
    return EXIT_OK


def run_oracle(cfg, ns):
    params = params_from(cfg)
    a, m = state_from(cfg, params.n_sites)
    _emit_series(oracle_series(params, a, m, grid_from(cfg)), cfg, ns, "oracle")
    return EXIT_OK


def run_check(cfg, ns):
    params = params_from(cfg)
    a, m = state_from(cfg, params.n_sites)
    times = grid_from(cfg)
    exact = expectation_series(params, a, m, times, "hamiltonian_exact", cfg["workers"]).values
    brute = oracle_series(params, a, m, times).values
    err = float(np.max(np.abs(exact - brute)))
    ok = err <= cfg["tol"]
    doc = lio.json_document(_echo(cfg, "check"), {"max_abs_error": err, "tolerance": cfg["tol"], "passed": ok})
    lio.write_json(doc, getattr(ns, "out", None))
    if not ok:
        print(f"check failed: max |analytic - oracle| = {err:.3e} > {cfg['tol']:.3e}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_CHECK


def run_bound(cfg, ns):
    params = params_from(cfg)
    times = grid_from(cfg)
    if times[0] < 0:
        raise ValidationError("bounds need t >= 0")
    ms = params.multiset()
    F = cosine_product(params).values(times, cfg["workers"])
    lower = [gaussian_lower_bound(params, ms, t) for t in times]
    upper = [gaussian_upper_bound(params, ms, t) for t in times]
    cols = {
        "t": times,
        "F": F,
        "lower": np.array([b.value for b in lower]),
        "lower_valid": np.array([b.valid for b in lower]),
        "upper": np.array([b.value for b in upper]),
        "upper_valid": np.array([b.valid for b in upper]),
    }
    config = _echo(cfg, "bound")
    meta = {"digest": params.digest(), "params": params.to_dict(), "config": config}
    lio.write_text(lio.format_csv(cols, meta), getattr(ns, "out", None))
    if getattr(ns, "json", None):
        results = {k: [float(x) if not isinstance(x, (bool, np.bool_)) else bool(x) for x in v] for k, v in cols.items()}
        lio.write_json(lio.json_document(config, results), ns.json)
    return EXIT_OK


def run_nmin(cfg, ns):
    law = CouplingLaw(cfg["alpha"], cfg["C"])
    points = cfg["points"]
    n0 = minimal_system_size(cfg["tau"], cfg["delta"], law, cfg["dim"], cfg["A0"], cfg["metric"])
    check = verify_minimal_size(n0, cfg["tau"], cfg["delta"], law, cfg["dim"], cfg["A0"], cfg["metric"], points)
    results = {
        "N0": n0,
        "verification": {
            "points": check.points,
            "max_deviation": check.max_deviation,
            "delta": check.delta,
            "passed": check.passed,
        },
    }
    lio.write_json(lio.json_document(_echo(cfg, "nmin"), results), getattr(ns, "out", None))
    return EXIT_OK if check.passed else EXIT_CHECK


def run_tau(cfg, ns):
    params = params_from(cfg)
    tau0 = equilibration_time(params, None, cfg["theta"])
    doc = lio.json_document(_echo(cfg, "tau"), {"tau0": tau0, "N": params.n_sites, "theta": cfg["theta"]})
    lio.write_json(doc, getattr(ns, "out", None))
    return EXIT_OK


def run_fit_gamma(cfg, ns):
    law = CouplingLaw(cfg["alpha"], cfg["C"])
    report = scaling_exponent(law, cfg["dim"], parse_n_list(cfg["n_list"]), cfg["theta"], cfg["metric"], cfg["workers"])
    config = _echo(cfg, "fit-gamma")
    doc = lio.json_document(config, {"report": report.to_dict()})
    lio.write_json(doc, getattr(ns, "out", None))
    if getattr(ns, "json", None):
        lio.write_json(doc, ns.json)
    if getattr(ns, "csv", None):
        lio.write_text(lio.report_csv(report, config), ns.csv)
    return EXIT_OK


def run_collapse(cfg, ns):
    law = CouplingLaw(cfg["alpha"], cfg["C"])
    n_values = parse_n_list(cfg["n_list"])
    times = grid_from(cfg)
    value = curve_collapse_metric(law, cfg["dim"], n_values, times, cfg["metric"])
    doc = lio.json_document(_echo(cfg, "collapse"), {"collapse_metric": value, "n_values": n_values})
    lio.write_json(doc, getattr(ns, "out", None))
    return EXIT_OK


def run_recur(cfg, ns):
    params = params_from(cfg)
    times = recurrence_scan(params, None, cfg["eta"], cfg["tmax"], cfg["dt"])
    product = cosine_product(params)
    doc = lio.json_document(
        _echo(cfg, "recur"),
        {"recurrence_times": times, "amplitude": [product.value(t) for t in times]},
    )
    lio.write_json(doc, getattr(ns, "out", None))
    return EXIT_OK


FIG1_TOP = {"alpha": 2.0, "n_values": [2**10, 2**14, 2**18], "tmin": 0.0, "tmax": 20.0, "spacing": "linear"}
FIG1_BOTTOM = {"alpha": 0.5, "n_values": [2**10, 2**12, 2**14, 2**16, 2**18, 2**20],
               "tmin": 1e-1, "tmax": 1e4, "spacing": "log"}


def run_figure1(cfg, ns):
    outdir = Path(getattr(ns, "outdir", "."))
    outdir.mkdir(parents=True, exist_ok=True)
    points = cfg["points"] if "points" in vars(ns) else 2048
    config = _echo(cfg, "figure1")
    written = []
    for name, panel in (("top", FIG1_TOP), ("bottom", FIG1_BOTTOM)):
        times = time_grid(panel["tmin"], panel["tmax"], points, panel["spacing"])
        cols = {"t": times}
        for n in panel["n_values"]:
            params = ModelParams.chain(n, panel["alpha"])
            cols[f"N={n}"] = cosine_product(params).values(times, cfg["workers"])
        meta = {"panel": name, "alpha": panel["alpha"], "config": config}
        path = outdir / f"figure1_{name}.csv"
        lio.write_text(lio.format_csv(cols, meta), path)
        written.append(str(path))
        if cfg["svg"]:
            svg = line_chart_svg(times, {k: v for k, v in cols.items() if k != "t"},
                                 title=f"alpha = {panel['alpha']:g}", ylabel="<A>(t)/<A>(0)",
                                 logx=panel["spacing"] == "log")
            spath = outdir / f"figure1_{name}.svg"
            lio.write_text(svg, spath)
            written.append(str(spath))
    print("\n".join(written))
    return EXIT_OK


COMMANDS = {
    "evolve": run_evolve,
    "oracle": run_oracle,
    "check": run_check,
    "bound": run_bound,
    "nmin": run_nmin,
    "tau": run_tau,
    "fit-gamma": run_fit_gamma,
    "collapse": run_collapse,
    "recur": run_recur,
    "figure1": run_figure1,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = effective_config(ns)
        return COMMANDS[ns.command](cfg, ns)
    except (ValidationError, FileNotFoundError, ValueError) as exc:
        print(f"lrising: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SizeLimitError as exc:
        print(f"lrising: resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (NumericalCheckError, NotFoundError) as exc:
        print(f"lrising: numerical check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except LRIsingError as exc:
        print(f"lrising: {exc}", file=sys.stderr)
        return EXIT_CHECK


def main() -> None:
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # downstream reader (e.g. ``head``) closed the pipe
        sys.stderr.close()
        code = EXIT_OK
    sys.exit(code)


if __name__ == "__main__":
    main()
