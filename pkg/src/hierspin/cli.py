"""Command-line front end.

Every command resolves its settings from built-in defaults, then an optional
``--config`` file of ``key=value`` lines (``#`` starts a comment), then
explicit flags, and echoes the resolved settings to standard error. Model
parameters accept comma-separated lists where a command sweeps them.
CSV numbers are written with 17 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import KINDS, beta_critical, detect_transition, maximize_bound, phi_mf, phi_nmf
from .dhm import dhm_free_energy
from .errors import ParameterError, QuadratureError
from .params import INF, FieldSpec, ModelParams
from .rsb import QuadratureSpec, annealed_bound, optimize_parisi
from .verify import check_dhm, check_hea

FIGURE_BETA = 1.0
FIGURE_SIGMA = 0.9

DEFAULTS = {
    "dhm-exact": {"sigma": "0.9", "beta": "1", "h": "0", "j": "1", "depth": "10"},
    "dhm-bounds": {"sigma": "0.9", "beta": "1", "h": "0", "j": "1", "depth": "inf"},
    "dhm-critical": {"sigma": "0.6,0.7,0.8,0.9,1.0", "j": "1"},
    "figure1": {"sigma": str(FIGURE_SIGMA), "beta": str(FIGURE_BETA), "h": "0", "j": "1",
                "grid": "401", "out": "."},
    "hea": {"sigma": "0.8", "beta": "1", "h": "0", "h_std": "0", "depth": "3", "samples": "1000",
            "seed": "0", "workers": "1", "levels": "1", "nodes": "64", "out": "."},
    "rsb": {"sigma": "0.9", "beta": "1", "h": "0", "h_std": "0", "depth": "3", "levels": "1",
            "nodes": "64"},
    "verify": {"sigma": "0.8", "beta": "1", "h": "0", "h_std": "0", "j": "1", "depth": "3",
               "dhm_sigma": "0.9", "dhm_depth": "12", "grid": "41", "samples": "1000", "seed": "0",
               "workers": "1", "levels": "1", "nodes": "64", "inject_bound_offset": "0"},
}


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def read_config(path) -> dict:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"config line is not key=value: {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def resolve(command: str, args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[command])
    if args.config:
        cfg.update(read_config(args.config))
    for key, value in vars(args).items():
        if key in ("command", "config", "func") or value is None:
            continue
        cfg[key] = str(value)
    return cfg


def _floats(text: str) -> list:
    return [float(v) for v in str(text).split(",") if v.strip()]


def _depths(text: str) -> list:
    out = []
    for v in str(text).split(","):
        v = v.strip()
        if not v:
            continue
        out.append(INF if v.lower() in ("inf", "infinity") else int(v))
    return out


def _field(cfg) -> FieldSpec:
    h = float(_floats(cfg.get("h", "0"))[0])
    std = float(cfg.get("h_std", "0") or 0)
    return FieldSpec.gaussian(h, std) if std > 0 else FieldSpec.point(h)


def _quad(cfg) -> QuadratureSpec:
    nodes = int(cfg["nodes"])
    return QuadratureSpec(nodes=nodes, validation_nodes=nodes + nodes // 2)


def _write_csv(header, rows, target) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    if target is None or target == "-":
        sys.stdout.write(buf.getvalue())
    else:
        Path(target).parent.mkdir(parents=True, exist_ok=True)
        Path(target).write_text(buf.getvalue())


def _out_dir(cfg) -> Path:
    path = Path(cfg.get("out") or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_dhm_exact(cfg) -> int:
    j = float(cfg["j"])
    rows = []
    for beta in _floats(cfg["beta"]):
        for sigma in _floats(cfg["sigma"]):
            for h in _floats(cfg["h"]):
                for depth in _depths(cfg["depth"]):
                    p = ModelParams(sigma, beta, depth, FieldSpec.point(h), j)
                    rows.append((beta, sigma, h, depth, dhm_free_energy(p)))
    _write_csv(("beta", "sigma", "h", "depth", "f_exact"), rows, cfg.get("out"))
    return 0


def cmd_dhm_bounds(cfg) -> int:
    j = float(cfg["j"])
    rows = []
    for beta in _floats(cfg["beta"]):
        for sigma in _floats(cfg["sigma"]):
            for h in _floats(cfg["h"]):
                for depth in _depths(cfg["depth"]):
                    p = ModelParams(sigma, beta, depth, FieldSpec.point(h), j)
                    mf, nmf = (maximize_bound(k, p) for k in KINDS)
                    rows.append((beta, sigma, h, depth, mf.m_star, mf.value, nmf.m_star, nmf.value))
    header = ("beta", "sigma", "h", "depth", "mf_m_star", "mf_value", "nmf_m_star", "nmf_value")
    _write_csv(header, rows, cfg.get("out"))
    return 0


def cmd_dhm_critical(cfg) -> int:
    j = float(cfg["j"])
    rows = []
    for sigma in _floats(cfg["sigma"]):
        rows.append((
            sigma,
            beta_critical("mf", sigma, j),
            beta_critical("nmf", sigma, j),
            detect_transition("mf", sigma, j),
            detect_transition("nmf", sigma, j),
        ))
    header = ("sigma", "beta_c_mf", "beta_c_nmf", "beta_c_mf_detected", "beta_c_nmf_detected")
    _write_csv(header, rows, cfg.get("out"))
    return 0


def inset_sigma_grid(points: int = 101) -> np.ndarray:
    """Equispaced sigma values from 1/2 to 1 inclusive (step 0.005 for 101 points)."""
    return np.linspace(0.5, 1.0, points)


def figure1_tables(beta=FIGURE_BETA, sigma=FIGURE_SIGMA, h=0.0, j=1.0, grid=401):
    """Rows of the bound curves and of the critical-temperature inset."""
    p = ModelParams(sigma, beta, INF, FieldSpec.point(h), j)
    half = (grid - 1) / 2
    m = (np.arange(grid) - half) / half
    main = list(zip(m, phi_mf(m, p), phi_nmf(m, p)))
    inset = []
    for s in inset_sigma_grid():
        if s == 0.5:
            # both closed forms vanish continuously as sigma -> 1/2
            inset.append((s, 0.0, 0.0))
        else:
            inset.append((s, beta_critical("mf", s, j), beta_critical("nmf", s, j)))
    return main, inset


def cmd_figure1(cfg) -> int:
    main, inset = figure1_tables(
        float(cfg["beta"]), float(cfg["sigma"]), float(_floats(cfg["h"])[0]), float(cfg["j"]),
        int(cfg["grid"]),
    )
    out = _out_dir(cfg)
    _write_csv(("m", "phi_mf", "phi_nmf"), main, out / "figure1.csv")
    _write_csv(("sigma", "beta_c_mf", "beta_c_nmf"), inset, out / "figure1_inset.csv")
    return 0


def _hea_params(cfg, depth) -> ModelParams:
    return ModelParams(float(cfg["sigma"]), float(cfg["beta"]), depth, _field(cfg))


def cmd_hea(cfg) -> int:
    max_depth = int(cfg["depth"])
    n, seed, workers, k = int(cfg["samples"]), int(cfg["seed"]), int(cfg["workers"]), int(cfg["levels"])
    quad = _quad(cfg)
    report = check_hea(_hea_params(cfg, 1), max_depth, n, seed, k, workers, quad)
    meta = report.metadata["hea"]
    rows = []
    for d in range(1, max_depth + 1):
        est = meta["estimates"][str(d)]
        p = _hea_params(cfg, d)
        rows.append((d, n, est["mean"], est["stderr"], est["sd"], annealed_bound(p), meta["rsb_bound"][str(d)], k))
    out = _out_dir(cfg)
    header = ("depth", "n_samples", "mean", "stderr", "sd", "annealed_bound", "rsb_bound", "levels")
    _write_csv(header, rows, out / "hea.csv")
    (out / "hea_report.json").write_text(report.to_json() + "\n")
    return 0 if report.passed else 1


def cmd_rsb(cfg) -> int:
    k = int(cfg["levels"])
    rows = []
    for beta in _floats(cfg["beta"]):
        for sigma in _floats(cfg["sigma"]):
            for depth in _depths(cfg["depth"]):
                p = ModelParams(sigma, beta, depth, _field(cfg))
                pp, bound = optimize_parisi(p, k, _quad(cfg))
                rows.append((
                    beta, sigma, p.field.mean, depth, k,
                    " ".join(fmt(v) for v in pp.q), " ".join(fmt(v) for v in pp.m),
                    bound, annealed_bound(p),
                ))
    header = ("beta", "sigma", "h", "depth", "levels", "q", "m", "rsb_bound", "annealed_bound")
    _write_csv(header, rows, cfg.get("out"))
    return 0


def cmd_verify(cfg) -> int:
    offset = float(cfg["inject_bound_offset"])
    beta = float(cfg["beta"])
    dhm = ModelParams(float(cfg["dhm_sigma"]), beta, 1, FieldSpec.point(float(_floats(cfg["h"])[0])),
                      float(cfg["j"]))
    report = check_dhm(dhm, int(cfg["dhm_depth"]), int(cfg["grid"]), bound_offset=offset)
    report.extend(check_hea(
        _hea_params(cfg, 1), int(cfg["depth"]), int(cfg["samples"]), int(cfg["seed"]),
        int(cfg["levels"]), int(cfg["workers"]), _quad(cfg), bound_offset=offset,
    ))
    report.metadata["passed"] = report.passed
    text = report.to_json() + "\n"
    if cfg.get("out"):
        Path(cfg["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if report.passed else 1


COMMANDS = {
    "dhm-exact": (cmd_dhm_exact, "exact DHM free energy by sector recursion"),
    "dhm-bounds": (cmd_dhm_bounds, "maximized mean-field and non-mean-field DHM bounds"),
    "dhm-critical": (cmd_dhm_critical, "critical inverse temperatures of both bounds"),
    "figure1": (cmd_figure1, "bound curves and critical-temperature inset as CSV"),
    "hea": (cmd_hea, "quenched HEA estimates, RSB bounds and a check report"),
    "rsb": (cmd_rsb, "optimized RSB bound for the HEA"),
    "verify": (cmd_verify, "run every inequality check and emit a JSON report"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value settings file; flags override it")
    common.add_argument("--sigma", help="decay exponent (comma list where swept)")
    common.add_argument("--beta", help="inverse temperature (comma list where swept)")
    common.add_argument("--h", help="field mean, already multiplied by beta")
    common.add_argument("--h-std", dest="h_std", help="Gaussian field std (HEA only; 0 = point field)")
    common.add_argument("--j", help="DHM coupling J")
    common.add_argument("--depth", help="hierarchy depth, N = 2**depth ('inf' for bounds)")
    common.add_argument("--samples", help="disorder samples per depth")
    common.add_argument("--seed", help="master seed; all randomness derives from it")
    common.add_argument("--workers", help="parallel processes for disorder sampling")
    common.add_argument("--out", help="output file (or directory for multi-file commands)")
    common.add_argument("--grid", help="grid size (m-grid points)")
    common.add_argument("--levels", help="RSB levels K (1 or 2)")
    common.add_argument("--nodes", help="quadrature nodes per unit noise scale")

    parser = argparse.ArgumentParser(prog="hierspin", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (func, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        if name == "verify":
            p.add_argument("--dhm-sigma", dest="dhm_sigma")
            p.add_argument("--dhm-depth", dest="dhm_depth")
            p.add_argument(
                "--inject-bound-offset", dest="inject_bound_offset",
                help="test hook: shift every bound by this amount so checks fail",
            )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args.command, args)
        for key in sorted(cfg):
            print(f"# {key}={cfg[key]}", file=sys.stderr)
        return args.func(cfg)
    except (ParameterError, QuadratureError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
