"""Command-line front end.

Usage::

    nhtopo SUBCOMMAND [--model M] [--t1 X] ... [--sweep name:start:stop:steps]
                      [--out PATH] [--format {csv,json}] [--config FILE]

Subcommands are ``spectrum``, ``gbz``, ``invariants``, ``liouvillian`` and
``symmetry``.  A config file is a flat ``key = value`` text file whose keys
mirror the long flags (``gamma-l = 1.0``, ``sweep = t1:-3:3:121``); flags on
the command line override it.  Giving ``--sweep`` twice runs a 2D grid.

Sweep points are evaluated by a process pool whose size is capped by the
``NHTOPO_THREADS`` environment variable; output is always written in sweep
order.  Exit status is 0 on success, 2 for configuration errors and 3 for
numerical failures (gap closing, non-convergence), with the failing
parameter point named on standard error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .errors import ConfigError, NhtopoError, NumericalError
from .model import ModelParams, build_effective_hamiltonian, obc_spectrum, transition_point

__all__ = ["RunConfig", "SweepAxis", "parse_config", "run", "main"]

SUBCOMMANDS = ("spectrum", "gbz", "invariants", "liouvillian", "symmetry")
MODELS = ("effective", "shape-nojump", "shape-jump")
SWEEPABLE = {"t1": "t1", "t2": "t2", "gamma-l": "gamma_l", "gamma_l": "gamma_l",
             "gamma-g": "gamma_g", "gamma_g": "gamma_g", "kappa": "kappa"}

# flag name -> (RunConfig attribute, converter)
_KEYS = {
    "model": ("model", str),
    "t1": ("t1", float),
    "t2": ("t2", float),
    "gamma-l": ("gamma_l", float),
    "gamma-g": ("gamma_g", float),
    "kappa": ("kappa", float),
    "L": ("cells", int),
    "boundary": ("boundary", str),
    "out": ("out", str),
    "format": ("format", str),
    "tol-gbz": ("tol_gbz", float),
    "tol-zak": ("tol_zak", float),
    "tol-edge": ("tol_edge", float),
    "max-excitation": ("max_excitation", int),
    "band": ("bands", lambda s: tuple(b.strip() for b in s.split(",") if b.strip())),
    "sweep": ("sweeps", None),
}


@dataclass(frozen=True)
class SweepAxis:
    """One sweep axis ``name:start:stop:steps`` (inclusive endpoints)."""

    name: str
    start: float
    stop: float
    steps: int

    @classmethod
    def parse(cls, text: str) -> "SweepAxis":
        parts = text.split(":")
        if len(parts) != 4:
            raise ConfigError(f"sweep must be name:start:stop:steps, got {text!r}")
        name = parts[0].strip()
        if name not in SWEEPABLE:
            raise ConfigError(f"cannot sweep {name!r}; choose from t1, t2, gamma-l, gamma-g, kappa")
        try:
            start, stop, steps = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError:
            raise ConfigError(f"bad numbers in sweep {text!r}") from None
        axis = cls(SWEEPABLE[name], start, stop, steps)
        axis.validate()
        return axis

    def validate(self):
        if self.steps < 1:
            raise ConfigError("sweep steps must be >= 1")
        if self.steps > 1 and not self.start < self.stop:
            raise ConfigError("sweep start must be smaller than stop")

    def values(self) -> np.ndarray:
        if self.steps == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class RunConfig:
    """Everything a subcommand needs; built by :func:`parse_config`."""

    subcommand: str
    model: str = "shape-jump"
    t1: float = 1.0
    t2: float = 1.0
    gamma_l: float = 0.0
    gamma_g: float = 0.0
    kappa: float = 1.0
    cells: int = 20
    boundary: str = "OBC"
    sweeps: tuple = ()
    out: str = "-"
    format: str = "csv"
    tol_gbz: float = 1e-3
    tol_zak: float = 1e-4
    tol_edge: float | None = None
    max_excitation: int = 2
    bands: tuple | None = None

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if len(self.sweeps) > 2:
            raise ConfigError("at most two sweep axes (a 2D grid) are supported")
        if len({s.name for s in self.sweeps}) != len(self.sweeps):
            raise ConfigError("sweep axes must be distinct parameters")
        for s in self.sweeps:
            s.validate()
        for name in ("tol_gbz", "tol_zak"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.tol_edge is not None and not self.tol_edge > 0:
            raise ConfigError("tol_edge must be positive")
        if self.max_excitation < 0:
            raise ConfigError("max-excitation must be nonnegative")
        self.base_params()  # validates the physical parameters

    def base_params(self) -> ModelParams:
        return ModelParams(
            t1=self.t1, t2=self.t2, gamma_l=self.gamma_l, gamma_g=self.gamma_g,
            kappa=self.kappa, cells=self.cells, boundary=self.boundary.upper(),
        )

    def points(self) -> list[ModelParams]:
        """Parameter points in sweep order (first axis outermost)."""
        base = self.base_params()
        if not self.sweeps:
            return [base]
        grids = [[(s.name, float(v)) for v in s.values()] for s in self.sweeps]
        return [base.with_(**dict(combo)) for combo in itertools.product(*grids)]

    def zak_bands(self) -> tuple:
        """Bands for Zak phases: ``1-`` by default, none for ``shape-nojump``."""
        if self.bands is not None:
            return self.bands
        return () if self.model == "shape-nojump" else ("1-",)

    def sweep_names(self) -> list[str]:
        return [s.name for s in self.sweeps]


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` (or ``key: value``) lines; ``#`` starts a comment.

    ``sweep`` may appear twice for a 2D grid.
    """
    out: dict = {}
    try:
        text = open(path).read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":"
        if sep not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, value = (part.strip() for part in line.split(sep, 1))
        key = key.lstrip("-")
        if key not in _KEYS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        if key == "sweep":
            out.setdefault("sweep", []).append(value)
        else:
            out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nhtopo", description="Topology of the dissipative SSH chain.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value file mirroring the flags")
        p.add_argument("--model", choices=MODELS)
        for flag in ("t1", "t2", "gamma-l", "gamma-g", "kappa", "tol-gbz", "tol-zak", "tol-edge"):
            p.add_argument(f"--{flag}", type=str)
        p.add_argument("--L", type=str, help="number of unit cells")
        p.add_argument("--boundary", choices=("OBC", "PBC", "obc", "pbc"))
        p.add_argument("--sweep", action="append", help="name:start:stop:steps (twice for a grid)")
        p.add_argument("--out", help="output path ('-' for stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--max-excitation", type=str, help="Fock-space excitation cap (liouvillian)")
        p.add_argument("--band", type=str, help="comma-separated band ids for Zak phases")
    return parser


def parse_config(argv=None) -> RunConfig:
    """Merge defaults, the optional config file and command-line flags."""
    args = build_parser().parse_args(argv)
    values: dict = {}
    if args.config:
        values.update(read_config_file(args.config))
    for key in _KEYS:
        v = getattr(args, key.replace("-", "_"), None)
        if v is not None:
            values[key] = v
    kwargs: dict = {"subcommand": args.subcommand}
    for key, raw in values.items():
        attr, conv = _KEYS[key]
        if key == "sweep":
            kwargs[attr] = tuple(SweepAxis.parse(s) for s in raw)
            continue
        try:
            kwargs[attr] = conv(raw)
        except ValueError:
            raise ConfigError(f"bad value for --{key}: {raw!r}") from None
    return RunConfig(**kwargs)


# ---------------------------------------------------------------------------
# per-point workers (module level so they can be pickled)
# ---------------------------------------------------------------------------


class PointError(Exception):
    """A worker failure tagged with the parameter point."""

    def __init__(self, params: ModelParams, exc: Exception):
        super().__init__(str(exc))
        self.params = params
        self.exc = exc

    def __reduce__(self):
        return (PointError, (self.params, self.exc))


def _real_space_matrix(params: ModelParams, model: str) -> np.ndarray:
    from .thirdq import shape_matrix_blocks

    if model == "effective":
        return build_effective_hamiltonian(params, drop_overall_loss=True)
    if model == "shape-nojump":
        return shape_matrix_blocks(params.with_(kappa=0.0), drop_overall_loss=True).matrix
    return shape_matrix_blocks(params).matrix


def _spectrum_point(cfg: RunConfig, p: ModelParams):
    rep = obc_spectrum(_real_space_matrix(p, cfg.model), cfg.tol_edge)
    return {"eigenvalues": rep.eigenvalues, "edge_mode_count": rep.edge_mode_count, "edge_tol": rep.edge_mode_tolerance}


def _gbz_point(cfg: RunConfig, p: ModelParams):
    from .gbz import agbz_curves, assign_subgbz, characteristic_eq, gbz_csv_rows, numerical_gbz
    from .invariants import model_family

    family, source, pp = model_family(p, cfg.model)
    char = characteristic_eq(family, source, pp)
    loops = assign_subgbz(agbz_curves(char), char, tol=cfg.tol_gbz)
    eigs = obc_spectrum(_real_space_matrix(pp, cfg.model)).eigenvalues
    cloud = numerical_gbz(char, eigs, tol=cfg.tol_gbz)
    rows = gbz_csv_rows(cloud.points, cloud.band_ids, "numerical")
    for lp in loops:
        label = "+".join(lp.band_ids)
        rows += gbz_csv_rows(lp.points, [label] * lp.points.size, "agbz")
        scp = [s.beta0 for s in lp.self_conjugate_points]
        rows += gbz_csv_rows(scp, [s.band_id for s in lp.self_conjugate_points], "self_conjugate")
    loops_info = [
        {"band_ids": list(lp.band_ids), "radius": lp.radius, "n_points": int(lp.points.size)} for lp in loops
    ]
    return {"rows": rows, "loops": loops_info}


def _invariants_point(cfg: RunConfig, p: ModelParams):
    from .invariants import compute_invariants

    return compute_invariants(p, cfg.model, cfg.zak_bands(), tol_gbz=cfg.tol_gbz, refine_tol=cfg.tol_zak).to_dict()


def _liouvillian_point(cfg: RunConfig, p: ModelParams):
    from .liouville import spectrum_compare

    comp = spectrum_compare(p, cfg.max_excitation)
    return {
        "full": comp.full,
        "nojump": comp.nojump,
        "distance": comp.distance,
        "trace_residual": comp.trace_residual,
        # Zak transitions of the jump (kappa = 1) and no-jump (kappa = 0) theories
        "zak_transitions": {
            "kappa1": transition_point(p.t2, p.gamma_prime),
            "kappa0": transition_point(p.t2, p.gamma),
        },
    }


def _symmetry_point(cfg: RunConfig, p: ModelParams):
    from .invariants import SymmetryKind, check_symmetry, classify_az, model_family, model_symmetries

    family, _, _ = model_family(p, cfg.model)
    U = model_symmetries(cfg.model)
    frags = [
        check_symmetry(family, U["U_T"], SymmetryKind.TRS),
        check_symmetry(family, U["U_C"], SymmetryKind.PHS),
        check_symmetry(family, U["S"], SymmetryKind.Chiral),
    ]
    rep = classify_az(frags)
    return {
        "az_class": rep.az_class,
        "fragments": [
            {
                "kind": f.kind.value,
                "holds": bool(f.holds),
                "residual": f.residual,
                "alt_holds": bool(f.alt_holds),
                "alt_residual": f.alt_residual,
                "sign": f.sign.value,
            }
            for f in frags
        ],
    }


_WORKERS = {
    "spectrum": _spectrum_point,
    "gbz": _gbz_point,
    "invariants": _invariants_point,
    "liouvillian": _liouvillian_point,
    "symmetry": _symmetry_point,
}


def _run_point(job):
    cfg, p = job
    try:
        return _WORKERS[cfg.subcommand](cfg, p)
    except NhtopoError as exc:
        raise PointError(p, exc) from exc
    except (np.linalg.LinAlgError, FloatingPointError, ZeroDivisionError) as exc:
        raise PointError(p, NumericalError(f"{type(exc).__name__}: {exc}")) from exc


def worker_count(n_jobs: int) -> int:
    """Pool size: ``NHTOPO_THREADS`` (default: CPU count), at most ``n_jobs``."""
    env = os.environ.get("NHTOPO_THREADS")
    if env is not None:
        try:
            cap = int(env)
        except ValueError:
            raise ConfigError(f"NHTOPO_THREADS must be an integer, got {env!r}") from None
        if cap < 1:
            raise ConfigError("NHTOPO_THREADS must be >= 1")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_jobs))


def evaluate(cfg: RunConfig) -> list:
    """Results for every sweep point, in sweep order."""
    jobs = [(cfg, p) for p in cfg.points()]
    n = worker_count(len(jobs))
    if n == 1:
        return [_run_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(_run_point, jobs))


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _f(x) -> str:
    return f"{float(x):.17g}"


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return [[float(z.real), float(z.imag)] for z in obj]
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _point_dict(p: ModelParams) -> dict:
    return {f.name: (getattr(p, f.name).value if f.name == "boundary" else getattr(p, f.name)) for f in fields(p)}


def render(cfg: RunConfig, points: list, results: list) -> str:
    """Serialize results as CSV or JSON text."""
    sweep = cfg.sweep_names()
    if cfg.format == "json":
        payload = {
            "subcommand": cfg.subcommand,
            "model": cfg.model,
            "points": [{"params": _point_dict(p), **r} for p, r in zip(points, results)],
        }
        if cfg.subcommand == "gbz":
            for entry in payload["points"]:
                entry["rows"] = [list(r) for r in entry["rows"]]
        return json.dumps(payload, sort_keys=True, default=_json_default) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    lead = lambda p: [_f(getattr(p, s)) for s in sweep]  # noqa: E731
    if cfg.subcommand == "spectrum":
        w.writerow(sweep + ["index", "re", "im", "edge_mode_count"])
        for p, r in zip(points, results):
            for k, z in enumerate(r["eigenvalues"]):
                w.writerow(lead(p) + [k, _f(z.real), _f(z.imag), r["edge_mode_count"]])
    elif cfg.subcommand == "gbz":
        w.writerow(sweep + ["re_beta", "im_beta", "band_id", "source"])
        for p, r in zip(points, results):
            for re, im, bid, src in r["rows"]:
                w.writerow(lead(p) + [_f(re), _f(im), bid, src])
    elif cfg.subcommand == "invariants":
        bands = sorted({b for r in results for b in r["nu_by_band"]})
        w.writerow(sweep + ["omega", "P_plus", "P_minus"] + [f"nu_{b}" for b in bands] + ["az_class"])
        for p, r in zip(points, results):
            po = r["pole_orders"] or ["", ""]
            om = "" if r["omega"] is None else _f(r["omega"])
            nus = [_f(r["nu_by_band"][b]) if b in r["nu_by_band"] else "" for b in bands]
            w.writerow(lead(p) + [om, po[0], po[1]] + nus + [r["az_class"] or ""])
    elif cfg.subcommand == "liouvillian":
        w.writerow(sweep + ["re", "im", "source"])
        for p, r in zip(points, results):
            for src in ("full", "nojump"):
                for z in r[src]:
                    w.writerow(lead(p) + [_f(z.real), _f(z.imag), src])
    else:
        w.writerow(sweep + ["kind", "holds", "residual", "alt_holds", "alt_residual", "sign", "az_class"])
        for p, r in zip(points, results):
            for fr in r["fragments"]:
                w.writerow(lead(p) + [fr["kind"], int(fr["holds"]), _f(fr["residual"]), int(fr["alt_holds"]),
                                      _f(fr["alt_residual"]), fr["sign"], r["az_class"]])
    return buf.getvalue()


def _describe(p: ModelParams) -> str:
    return ", ".join(f"{k}={v}" for k, v in _point_dict(p).items())


def run(cfg: RunConfig) -> str:
    """Evaluate and serialize; raises :class:`PointError` on a failing point."""
    points = cfg.points()
    results = evaluate(cfg)
    text = render(cfg, points, results)
    if cfg.out == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    return text


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        run(cfg)
    except PointError as err:
        code = 3 if isinstance(err.exc, NumericalError) else 2
        print(f"nhtopo: error at ({_describe(err.params)}): {err.exc}", file=sys.stderr)
        return code
    except ConfigError as err:
        print(f"nhtopo: configuration error: {err}", file=sys.stderr)
        return 2
    except NumericalError as err:
        print(f"nhtopo: numerical failure: {err}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
