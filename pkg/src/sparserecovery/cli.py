"""Config-driven experiment runner and bound calculators.

Subcommands
-----------
run        decode every (index set, sample count, seed, decoder) cell and
           write ``results.csv`` with per-cell and aggregate rows
plot-data  write ``plot_data.tsv`` with error series and a best n-term benchmark
bounds     evaluate the sample-count and lower-bound formulas as JSON
selftest   quick end-to-end checks of the installation

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis, theory
from . import test_functions as tfun
from .decoders import CoSaMPConfig, ExpansionFunction, OMPConfig, RLassoConfig, run_decoder, should_compress
from .dictionaries import KINDS, Dictionary
from .errors import ConfigError, RankError, SparseRecoveryError
from .index_sets import IndexSet, cross_with_size, hyperbolic_cross
from .operator import SamplingOperator, compress

CSV_HEADER = [
    "example", "dict", "d", "J_size", "m", "decoder", "seed",
    "l2_error", "trunc_error", "nnz", "iterations", "wall_s",
]
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
DEFAULT_DICT = {1: "fourier", 2: "fourier", 3: "chebyshev", 4: "chebyshev"}
DEFAULT_PRESET = {"fourier": "fourier-paper", "chebyshev": "chebyshev-paper", "legendre": "chebyshev-paper"}


# ---------------------------------------------------------------- config


@dataclass
class DecoderSpec:
    """One decoder entry of the config; ``params`` go to the decoder config."""

    kind: str
    label: str
    params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw) -> "DecoderSpec":
        if isinstance(raw, str):
            raw = {"kind": raw}
        if not isinstance(raw, dict) or "kind" not in raw:
            raise ConfigError("each decoder needs a 'kind'")
        raw = dict(raw)
        kind = raw.pop("kind")
        if kind not in ("rlasso", "omp", "cosamp"):
            raise ConfigError(f"unknown decoder kind {kind!r}")
        label = raw.pop("label", kind)
        return cls(kind, label, raw)

    def build(self, dictionary_kind: str):
        try:
            if self.kind == "rlasso":
                params = dict(self.params)
                preset = params.pop("preset", DEFAULT_PRESET[dictionary_kind])
                return RLassoConfig.preset(preset, **params)
            if self.kind == "omp":
                return OMPConfig(**self.params)
            return CoSaMPConfig(**self.params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"decoder {self.label!r}: {exc}") from exc


@dataclass
class ExperimentConfig:
    """Everything that determines an experiment's output.

    ``index_sets`` entries are ``{"s": radius}``, ``{"target": size}`` or
    ``{"sparsity": n}``; the last uses ``s = ceil(n ** search_kappa)``.
    """

    example: int
    d: int
    dictionary: str = ""
    example_params: dict = field(default_factory=dict)
    index_sets: list = field(default_factory=list)
    weight: str = "max"
    anisotropy: Optional[list] = None
    search_kappa: float = 2.0
    samples: list = field(default_factory=list)
    seeds: list = field(default_factory=lambda: [0])
    decoders: list = field(default_factory=list)
    grid: Optional[object] = None
    superset_factor: float = analysis.SUPERSET_FACTOR
    error_mode: str = "auto"
    mc_points: int = 100_000
    compress: str = "auto"
    precision: str = "f64"
    timing: bool = True
    plot: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("example", "d"):
            if key not in raw and not (key == "d" and raw.get("example") == 2):
                raise ConfigError(f"missing config key {key!r}")
        raw = dict(raw)
        if raw.get("example") == 2:
            raw.setdefault("d", 7)
        try:
            cfg = cls(**raw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.decoders = [DecoderSpec.from_dict(dec) if not isinstance(dec, DecoderSpec) else dec
                        for dec in cfg.decoders]
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    def validate(self) -> None:
        if self.example not in (1, 2, 3, 4):
            raise ConfigError("example must be 1, 2, 3 or 4")
        if self.example == 2 and self.d != 7:
            raise ConfigError("example 2 is defined for d = 7 only")
        if not isinstance(self.d, int) or self.d < 1:
            raise ConfigError("d must be a positive integer")
        if not self.dictionary:
            self.dictionary = DEFAULT_DICT[self.example]
        if self.dictionary not in KINDS:
            raise ConfigError(f"dictionary must be one of {KINDS}")
        expected = "fourier" if self.example in (1, 2) else "chebyshev"
        if self.dictionary == "fourier" and expected != "fourier":
            raise ConfigError(f"example {self.example} lives on [-1, 1]^d, not on the torus")
        if self.dictionary != "fourier" and expected == "fourier":
            raise ConfigError(f"example {self.example} is periodic; use the fourier dictionary")
        if self.error_mode not in ("auto", "parseval", "mc"):
            raise ConfigError("error_mode must be 'auto', 'parseval' or 'mc'")
        if self.error_mode == "parseval" and self.example == 4:
            raise ConfigError("example 4 has no coefficient oracle; use error_mode 'mc'")
        if self.error_mode == "parseval" and self.dictionary == "legendre":
            raise ConfigError("coefficient oracles refer to the Chebyshev system; use error_mode 'mc'")
        if self.weight not in ("shifted", "max"):
            raise ConfigError("weight must be 'shifted' or 'max'")
        if self.precision not in ("f64", "f32"):
            raise ConfigError("precision must be 'f64' or 'f32'")
        if self.compress not in ("auto", "always", "never"):
            raise ConfigError("compress must be 'auto', 'always' or 'never'")
        if self.grid is not None and self.dictionary != "fourier":
            raise ConfigError("grid sampling is only defined for the fourier dictionary")
        if self.grid is not None and self.grid != "auto" and not (isinstance(self.grid, int) and self.grid >= 1):
            raise ConfigError("grid must be a positive integer D or 'auto'")
        for spec in self.index_sets:
            if not isinstance(spec, dict) or len(spec) != 1 or next(iter(spec)) not in ("s", "target", "sparsity"):
                raise ConfigError("index set entries must be {'s': ...}, {'target': ...} or {'sparsity': ...}")
            if not next(iter(spec.values())) > 0:
                raise ConfigError("index set parameters must be positive")
        if any((not isinstance(m, int)) or m < 1 for m in self.samples):
            raise ConfigError("sample counts must be positive integers")
        if any(not isinstance(s, int) or s < 0 for s in self.seeds):
            raise ConfigError("seeds must be non-negative integers")
        if self.anisotropy is not None and (len(self.anisotropy) != self.d or min(self.anisotropy) <= 0):
            raise ConfigError("anisotropy needs d positive weights")
        if self.search_kappa <= 1:
            raise ConfigError("search_kappa must exceed 1")
        if self.mc_points < 1 or self.superset_factor < 1:
            raise ConfigError("mc_points and superset_factor must be positive (factor >= 1)")
        for dec in self.decoders:
            dec.build(self.dictionary)

    def resolved(self) -> dict:
        out = asdict(self)
        out["decoders"] = [
            {"kind": d.kind, "label": d.label, **asdict(d.build(self.dictionary))} for d in self.decoders
        ]
        return out

    # -- derived objects

    @property
    def signed(self) -> bool:
        return self.dictionary == "fourier"

    def ground_truth(self):
        params = dict(self.example_params)
        if self.example == 4:
            return tfun.example4(self.d, **params)
        if params:
            raise ConfigError(f"example {self.example} takes no parameters")
        return tfun.by_name(self.example, self.d)

    def build_index_set(self, spec: dict):
        (key, val), = spec.items()
        kw = dict(r=self.anisotropy, signed=self.signed, weight=self.weight)
        if key == "target":
            J, _ = cross_with_size(int(val), self.d, **kw)
            return J
        radius = float(val) if key == "s" else math.ceil(float(val) ** self.search_kappa)
        return hyperbolic_cross(radius, self.d, **kw)


# ---------------------------------------------------------------- cells


@dataclass
class CellRecord:
    example: int
    dictionary: str
    d: int
    J_size: int
    m: int
    decoder: str
    seed: object
    l2_error: float
    trunc_error: float
    nnz: float
    iterations: float
    wall_s: float

    def row(self) -> list:
        def num(v):
            return "nan" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.6e}"

        def count(v):
            if isinstance(v, float):
                return "nan" if math.isnan(v) else f"{v:.1f}"
            return str(v)

        return [
            str(self.example), self.dictionary, str(self.d), str(self.J_size), str(self.m), self.decoder,
            str(self.seed), num(self.l2_error), num(self.trunc_error), count(self.nnz),
            count(self.iterations), f"{self.wall_s:.3f}",
        ]


def _use_parseval(config: ExperimentConfig, gt) -> bool:
    if config.error_mode == "auto":
        return gt.has_coefficients and config.dictionary != "legendre"
    return config.error_mode == "parseval"


def _trunc(config, gt, J) -> float:
    if not _use_parseval(config, gt):
        return float("nan")
    return analysis.truncation_error(gt, J, "L2", config.superset_factor)


def grid_size(config: ExperimentConfig, J: IndexSet) -> Optional[int]:
    """Grid parameter ``D``; ``"auto"`` gives ``(2d + 1) max |k_i|`` over ``J``."""
    if config.grid != "auto":
        return config.grid
    return (2 * config.d + 1) * max(int(np.abs(J.indices).max()), 1)


def run_cell(config: ExperimentConfig, m: int, seed: int, J: Optional[IndexSet] = None,
             trunc: Optional[float] = None, gt=None) -> list:
    """Decode one (index set, m, seed) cell with every configured decoder.

    The samples, operator and (when used) the compressed system are shared
    between decoders. Returns one :class:`CellRecord` per decoder.
    """
    gt = gt or config.ground_truth()
    if J is None:
        if not config.index_sets:
            raise ConfigError("config lists no index sets")
        J = config.build_index_set(config.index_sets[0])
    if trunc is None:
        trunc = _trunc(config, gt, J)
    dictionary = Dictionary(config.dictionary, config.d)
    t0 = time.perf_counter()
    X = dictionary.draw_samples(m, seed=seed, grid=grid_size(config, J))
    A = SamplingOperator(dictionary, J, X, precision=config.precision)
    y = A.weights * gt(X.points) / math.sqrt(m)
    system = None
    if config.compress == "always" or (config.compress == "auto" and should_compress(m, len(J))):
        try:
            system = compress(A, y)
        except RankError:
            if config.compress == "always":
                raise
    setup = time.perf_counter() - t0
    records = []
    for spec in config.decoders:
        result = run_decoder(A, y, spec.build(config.dictionary), system=system)
        if _use_parseval(config, gt):
            err = analysis.l2_error_split(gt, J, result, trunc=trunc)
        else:
            approx = ExpansionFunction(dictionary, J, result.coefficients)
            err = analysis.monte_carlo_lq(gt, approx, 2.0, config.mc_points, [seed, m, 1], dictionary).estimate
        wall = setup + result.wall_time if config.timing else 0.0
        records.append(CellRecord(config.example, config.dictionary, config.d, len(J), m, spec.label, seed,
                                  float(err), trunc, result.nnz, result.iterations, wall))
    return records


def _aggregate(records: list) -> list:
    groups: dict = {}
    for rec in records:
        groups.setdefault((rec.J_size, rec.m, rec.decoder), []).append(rec)
    out = []
    for recs in groups.values():
        first = recs[0]

        def mean(attr):
            vals = [getattr(r, attr) for r in recs]
            return float(np.mean(vals)) if vals else float("nan")

        out.append(CellRecord(first.example, first.dictionary, first.d, first.J_size, first.m, first.decoder, "mean",
                              mean("l2_error"), first.trunc_error, mean("nnz"), mean("iterations"),
                              mean("wall_s")))
    return out


def _failed(config, J_size, m, label, seed, trunc) -> CellRecord:
    nan = float("nan")
    return CellRecord(config.example, config.dictionary, config.d, J_size, m, label, seed, nan, trunc, nan, nan, 0.0)


def run_table(config: ExperimentConfig, out_dir, log=sys.stderr) -> dict:
    """Run the full grid and write ``results.csv``, ``config.resolved.json``
    and, when cells fail, ``failures.jsonl`` into ``out_dir``.

    Returns a summary with the record lists and the failure count.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.resolved.json").write_text(json.dumps(config.resolved(), indent=2, sort_keys=True) + "\n")
    gt = config.ground_truth()
    records, failures = [], []
    if config.samples and config.decoders:
        for spec in config.index_sets:
            J = config.build_index_set(spec)
            trunc = _trunc(config, gt, J)
            for m in config.samples:
                for seed in config.seeds:
                    try:
                        records.extend(run_cell(config, m, seed, J=J, trunc=trunc, gt=gt))
                    except SparseRecoveryError as exc:
                        failures.append({"J_size": len(J), "m": m, "seed": seed,
                                         "error": type(exc).__name__, "message": str(exc)})
                        print(f"cell |J|={len(J)} m={m} seed={seed} failed: {exc}", file=log)
                        for dec in config.decoders:
                            records.append(_failed(config, len(J), m, dec.label, seed, trunc))
    aggregates = _aggregate(records)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records + aggregates:
        writer.writerow(rec.row())
    (out / "results.csv").write_text(buf.getvalue())
    if failures:
        (out / "failures.jsonl").write_text("".join(json.dumps(f, sort_keys=True) + "\n" for f in failures))
    return {"records": records, "aggregates": aggregates, "failures": len(failures)}


# ---------------------------------------------------------------- plot data


def benchmark_series(config: ExperimentConfig, gt, J: Optional[IndexSet], ns) -> np.ndarray:
    """Best n-term L2 errors of ``f`` (coefficients) or of its envelope."""
    mode = config.plot.get("benchmark", "coefficients" if gt.has_coefficients else "envelope")
    if mode == "none":
        return np.zeros(0)
    if mode == "coefficients":
        if not gt.has_coefficients:
            raise ConfigError("benchmark 'coefficients' needs a coefficient oracle")
        if J is None:
            raise ConfigError("benchmark 'coefficients' needs an index set")
        S, _ = analysis._superset(gt, J, config.superset_factor, analysis.SUPERSET_CAP)
        vals = gt.coefficients(S)
        # mass beyond the superset enters every tail
        rest = max(gt.norm_sq - float(np.sum(np.sort(np.abs(vals) ** 2))), 0.0)
        series = analysis.best_n_term_series(vals, ns, 2.0)
        return np.sqrt(series**2 + rest)
    if mode == "envelope":
        radius = float(config.plot.get("envelope_radius", 200))
        return analysis.envelope_best_n_term(gt, radius, ns)
    raise ConfigError(f"unknown benchmark {mode!r}")


def emit_plot_data(config: ExperimentConfig, out_dir, log=sys.stderr) -> Path:
    """Write ``plot_data.tsv`` with columns ``series, x, error, reference``.

    Decoder series are the seed-averaged errors over ``m`` for each index
    set. The ``best_n_term`` series runs over ``n``. The reference law
    ``x^rate log(x)^kappa`` is scaled through the last benchmark point and
    omitted when the benchmark has fewer than two points.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gt = config.ground_truth()
    rows = []
    summary = run_table(config, out, log=log) if config.samples and config.decoders else {"aggregates": []}
    for rec in summary["aggregates"]:
        rows.append((f"{rec.decoder}|J={rec.J_size}", float(rec.m), rec.l2_error))
    J = config.build_index_set(config.index_sets[-1]) if config.index_sets else None
    plot = config.plot
    max_n = int(plot.get("max_n", 10**5))
    count = int(plot.get("points", 25))
    ns = np.unique(np.logspace(1, math.log10(max(max_n, 10)), count).astype(np.int64)) if count > 1 else np.array([max_n])
    bench = benchmark_series(config, gt, J, ns)
    rows.extend(("best_n_term", float(n), float(e)) for n, e in zip(ns[: bench.size], bench))
    rate = float(plot.get("rate", -1.5))
    kappa = plot.get("kappa")
    kappa = 2.0 * (config.d - 1) if kappa is None else float(kappa)
    scale = None
    if bench.size >= 2 and bench[-1] > 0:
        n_last = float(ns[bench.size - 1])
        scale = bench[-1] / (n_last**rate * math.log(n_last) ** kappa)
    lines = ["series\tx\terror\treference"]
    for name, x, err in rows:
        ref = "" if scale is None or x <= 1 else f"{scale * x**rate * math.log(x) ** kappa:.6e}"
        lines.append(f"{name}\t{x:.0f}\t{err:.6e}\t{ref}")
    path = out / "plot_data.tsv"
    path.write_text("\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------- bounds


def compute_bounds(params: dict) -> dict:
    """Evaluate every bound whose inputs are present in ``params``."""
    p = {k: v for k, v in params.items() if v is not None}
    out: dict = {"inputs": p, "outputs": {}}
    res = out["outputs"]
    try:
        if {"B", "n", "J_size"} <= set(p):
            res["sample_complexity_upper"] = theory.sample_complexity_upper(
                p["B"], int(p["n"]), int(p["J_size"]), p.get("gamma", 0.01), p.get("alpha", 1.0))
        if {"d", "n", "D"} <= set(p):
            res["sample_complexity_fourier"] = theory.sample_complexity_upper(
                1.0, int(p["n"]), 1, 0.5, p.get("alpha", 1.0), mode="fourier", d=int(p["d"]), D=int(p["D"]))
        if {"n", "N", "C"} <= set(p):
            for mode in ("same-norm", "mixed"):
                lb = theory.io_lower_bound(int(p["n"]), int(p["N"]), p["C"], mode)
                res[f"io_lower_bound_{mode}"] = {"m": lb.m, "degenerate": lb.degenerate}
        if "delta" in p:
            c = theory.nsp_from_rip(p["delta"])
            res["nsp_from_rip"] = {"rho": c.rho, "tau": c.tau}
            if "n" in p:
                rule = theory.rlasso_lambda(c.tau, c.rho, int(p["n"]))
                res["rlasso_lambda"] = rule._asdict()
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid bound inputs: {exc}") from exc
    return out


# ---------------------------------------------------------------- selftest


def selftest(out=None) -> bool:
    """Fast checks of the main paths; prints one line per check."""
    out = sys.stdout if out is None else out
    checks = []

    def check(name, fn):
        try:
            ok, detail = fn()
        except Exception as exc:  # report and continue
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        checks.append(ok)
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", file=out)

    def planted():
        D = Dictionary("fourier", 1)
        J = hyperbolic_cross(64, 1)
        rng = np.random.default_rng(0)
        z = np.zeros(len(J), complex)
        supp = rng.choice(len(J), 5, replace=False)
        z[supp] = np.exp(2j * np.pi * rng.random(5))
        X = D.draw_samples(80, seed=1)
        A = SamplingOperator(D, J, X)
        y = A.apply(z)
        errs = []
        for cfg in (RLassoConfig.preset("fourier-paper"), OMPConfig(5), CoSaMPConfig(5, lsq_tol=1e-12)):
            errs.append(float(np.linalg.norm(run_decoder(A, y, cfg).coefficients - z)))
        return max(errs) < 1e-4, "errors " + ", ".join(f"{e:.1e}" for e in errs)

    def parseval():
        gt = tfun.example1(2)
        J = hyperbolic_cross(40, 2, weight="max")
        tail = analysis.truncation_error(gt, J)
        return 0 < tail < 0.05, f"example 1 tail {tail:.3e}"

    def bounds():
        a = theory.io_lower_bound(10, 4000, 1.0, "same-norm").m
        b = theory.io_lower_bound(10, 4000, 1.0, "mixed").m
        c = theory.sample_complexity_upper(1.0, 10, 1000, 0.01)
        return (a, b, c) == (8, 4, 421), f"io {a}/{b}, samples {c}"

    def orthonormal():
        worst = 0.0
        for kind in KINDS:
            D = Dictionary(kind, 1)
            X = D.draw_samples(200_000, seed=2)
            B = D.decoder_atoms(X.points, np.arange(6)[:, None])
            G = B.conj().T @ B / B.shape[0]
            worst = max(worst, float(np.abs(G - np.eye(6)).max()))
        return worst < 0.02, f"max Gram deviation {worst:.3e}"

    check("planted recovery", planted)
    check("truncation tail", parseval)
    check("bound formulas", bounds)
    check("orthonormality", orthonormal)
    return all(checks)


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparserecovery", description=__doc__.split("\n\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--seed", type=int, help="override the config's seed list with one seed")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--threads", type=int, help="BLAS thread count")
    common.add_argument("--precision", choices=("f32", "f64"), help="atom evaluation precision")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="run the experiment grid")
    run.add_argument("--no-timing", action="store_true", help="write wall_s as 0 for byte-identical reruns")
    plot = sub.add_parser("plot-data", parents=[common], help="emit plot series")
    plot.add_argument("--no-timing", action="store_true")
    bnd = sub.add_parser("bounds", parents=[common], help="evaluate bound formulas")
    for name, typ in (("B", float), ("n", int), ("J-size", int), ("gamma", float), ("alpha", float),
                      ("N", int), ("C", float), ("d", int), ("D", int), ("delta", float)):
        bnd.add_argument(f"--{name}", type=typ, dest=name.replace("-", "_"))
    sub.add_parser("selftest", parents=[common], help="quick installation checks")
    return parser


def _load_config(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("--config is required")
    cfg = ExperimentConfig.load(args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("seed must be non-negative")
        cfg.seeds = [args.seed]
    if args.precision:
        cfg.precision = args.precision
    if getattr(args, "no_timing", False):
        cfg.timing = False
    return cfg


def _threads(n):
    if n is None:
        return contextlib.nullcontext()
    if n < 1:
        raise ConfigError("--threads must be positive")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _threads(args.threads):
            if args.command == "run":
                summary = run_table(_load_config(args), args.out)
                print(f"wrote {Path(args.out) / 'results.csv'}")
                return EXIT_NUMERIC if summary["failures"] else EXIT_OK
            if args.command == "plot-data":
                path = emit_plot_data(_load_config(args), args.out)
                print(f"wrote {path}")
                return EXIT_OK
            if args.command == "bounds":
                params = {}
                if args.config:
                    try:
                        params.update(json.loads(Path(args.config).read_text()))
                    except (OSError, json.JSONDecodeError) as exc:
                        raise ConfigError(f"cannot read bounds config: {exc}") from exc
                for key in ("B", "n", "J_size", "gamma", "alpha", "N", "C", "d", "D", "delta"):
                    if getattr(args, key) is not None:
                        params[key] = getattr(args, key)
                result = compute_bounds(params)
                text = json.dumps(result, indent=2, sort_keys=True)
                print(text)
                return EXIT_OK
            if args.command == "selftest":
                return EXIT_OK if selftest() else EXIT_NUMERIC
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SparseRecoveryError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
