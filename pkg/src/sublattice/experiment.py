"""Convergence experiments: sweep the lattice size, fit, and estimate errors.

For each lattice size ``n`` the harness builds a CBC lattice, evaluates
``S_n``, samples the target and runs the requested methods

``classical``
    lattice rule on ``{r <= 1/sqrt(S_n)}``
``lsq_full`` / ``lsq_sub``
    least squares on ``{r <= 1/(2 sqrt(S_n))}`` from the full lattice or a
    random multiset ``J``
``kernel_full`` / ``kernel_sub``
    kernel interpolation on the full lattice or the distinct points of ``J``

The L2 error is estimated on randomly shifted copies of the lattice. Seeds
for ``J`` and for the shifts derive from ``(base_seed, n)`` only, so all
methods at one ``n`` see the same points and the same shifts.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io as _io
import logging
import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import io as rio
from .approximation import (
    classical_approximate,
    evaluate_on_shifted_lattice,
    kernel_fit,
    lsq_fit,
)
from .freqsets import enumerate_set
from .korobov import KorobovSpace, WeightScheme
from .lattice import (
    Lattice,
    cbc_construct,
    classical_radius,
    lattice_points,
    next_prime,
    reconstructing_radius,
    s_n_kernel,
    s_n_upper_estimate,
)
from .sampling import PRACTICE, THEORY, SubsamplePlan, draw
from .targets import make_target

log = logging.getLogger(__name__)

METHODS = ("classical", "lsq_full", "lsq_sub", "kernel_full", "kernel_sub")
SN_EXACT = "exact"
SN_UPPER = "skorobov-upper"
_SEED_TAGS = {"subsample": 1, "shifts": 2}


# ---------------------------------------------------------------------------
# weight specifications


def _number_list(text: str, count: int) -> list:
    """``factorial``, ``pow:q`` (``j^-q``), a constant or a comma list."""
    text = text.strip()
    if text == "factorial":
        return [float(math.factorial(j)) for j in range(1, count + 1)]
    if text.startswith("pow:"):
        q = float(text[4:])
        return [j**-q for j in range(1, count + 1)]
    values = [float(v) for v in text.split(",")]
    if len(values) == 1:
        return values * count
    if len(values) < count:
        raise ValueError(f"need {count} values, got {len(values)}")
    return values[:count]


def parse_weights(text: str, d: int, alpha: float = 1) -> WeightScheme:
    """Weight scheme from a compact string.

    ``unweighted``, ``product:<list>``, ``order:<list>``,
    ``pod:<orders>/<products>`` and ``spod:<orders>/<row>;<row>;...``.
    Lists are ``factorial``, ``pow:q`` for ``j^{-q}``, one constant, or
    comma-separated values. Order lists start at ``Gamma_0``.
    """
    kind, _, rest = text.strip().partition(":")
    if kind == "unweighted":
        return WeightScheme.unweighted(d)
    if kind == "product":
        return WeightScheme.product(_number_list(rest, d))
    if kind == "order":
        return WeightScheme.order_dependent(_orders(rest, d + 1))
    if kind == "pod":
        orders, _, products = rest.partition("/")
        return WeightScheme.pod(_orders(orders, d + 1), _number_list(products, d))
    if kind == "spod":
        orders, _, table = rest.partition("/")
        a = int(alpha)
        rows = [[float(v) for v in row.split(",")] for row in table.split(";")]
        if len(rows) == 1:
            rows = rows * d
        return WeightScheme.spod(_orders(orders, a * d + 1), rows)
    raise ValueError(f"unknown weight specification {text!r}")


def _orders(text: str, count: int) -> list:
    if text.strip() == "factorial":
        return [float(math.factorial(ell)) for ell in range(count)]
    values = [float(v) for v in text.split(",")]
    if len(values) == 1:
        return [1.0] + values * (count - 1)
    if len(values) < count:
        raise ValueError(f"need {count} order weights, got {len(values)}")
    return values[:count]


# ---------------------------------------------------------------------------
# configuration


def prime_ladder(e_min: int, e_max: int) -> list:
    """Next primes above ``2^e`` for ``e = e_min..e_max``."""
    return [next_prime(2**e) for e in range(e_min, e_max + 1)]


@dataclass
class ExperimentConfig:
    d: int = 2
    alpha: float = 1
    weights: str = "product:0.5"
    n_list: Sequence[int] = field(default_factory=lambda: prime_ladder(8, 17))
    methods: Sequence[str] = METHODS
    subsample: str = PRACTICE
    t: float = 4.0
    target: str = "kink"
    q: float = 6.0
    shifts: int = 50
    base_seed: int = 0
    tol: float = 1e-8
    sn_mode: str = SN_EXACT
    out: Optional[str] = None
    threads: int = 1
    cache_dir: Optional[str] = None
    eval_delay_ms: float = 0.0

    def __post_init__(self):
        self.n_list = [int(n) for n in self.n_list]
        if any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            raise ValueError("n_list must be strictly increasing")
        if self.shifts < 1:
            raise ValueError("need at least one shift")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")
        self.methods = [m for m in METHODS if m in self.methods]
        if self.sn_mode not in (SN_EXACT, SN_UPPER):
            raise ValueError(f"unknown S_n mode {self.sn_mode!r}")

    def space(self) -> KorobovSpace:
        return KorobovSpace(self.d, self.alpha, parse_weights(self.weights, self.d, self.alpha))


PRESETS = {
    "kink-d2": dict(d=2, alpha=1, weights="product:0.5", target="kink",
                    n_list=prime_ladder(8, 17)),
    "kink-d5": dict(d=5, alpha=1, weights="product:0.5", target="kink",
                    n_list=prime_ladder(15, 18)),
    "reciprocal-q6": dict(d=100, alpha=1, weights="pod:factorial/pow:6", target="reciprocal",
                          q=6.0, n_list=prime_ladder(8, 13)),
    "reciprocal-q2.5": dict(d=100, alpha=2, weights="pod:factorial/pow:2.5",
                            target="reciprocal", q=2.5, n_list=prime_ladder(8, 13)),
}

# ladders closer to the published runs; expensive
FULL_LADDERS = {"kink-d2": (8, 24), "kink-d5": (15, 22), "reciprocal-q6": (8, 20),
                "reciprocal-q2.5": (8, 20)}


def preset(name: str, full: bool = False, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    kw = dict(PRESETS[name])
    if full:
        kw["n_list"] = prime_ladder(*FULL_LADDERS[name])
    kw.update(overrides)
    return ExperimentConfig(**kw)


def _convert(name: str, value: str):
    if name == "n_list":
        return [int(v) for v in value.replace(",", " ").split()]
    if name == "methods":
        return [v for v in value.replace(",", " ").split()]
    kind = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}[name]
    if "int" in str(kind) and "Optional" not in str(kind):
        return int(value)
    if "float" in str(kind):
        return float(value)
    if value in ("", "none", "None"):
        return None
    return value


def load_config(path, **overrides) -> ExperimentConfig:
    """Read ``key = value`` lines; ``preset = name`` seeds the defaults.

    ``n_list`` takes integers or ``ladder e_min e_max``.
    """
    values = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"malformed config line {raw!r}")
        values[key.strip()] = value.strip()
    name = values.pop("preset", None)
    kw = {}
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    for key, value in values.items():
        if key not in names:
            raise ValueError(f"unknown config key {key!r}")
        if key == "n_list" and value.startswith("ladder"):
            lo, hi = (int(v) for v in value.split()[1:3])
            kw[key] = prime_ladder(lo, hi)
        else:
            kw[key] = _convert(key, value)
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return preset(name, **kw) if name else ExperimentConfig(**kw)


# ---------------------------------------------------------------------------
# results


@dataclass
class ResultRow:
    method: str
    d: int
    alpha: float
    n: int
    J_size: int
    B_size: Optional[int]
    M: Optional[float]
    s_n: float
    l2_error: float
    iterations: Optional[int]
    setup_seconds: float
    solve_seconds: float
    seed: int
    J_over_log_J: float = 0.0
    eval_cost_seconds: float = 0.0
    error: str = ""


COLUMNS = [f.name for f in dataclasses.fields(ResultRow)]
TIMING_COLUMNS = ("setup_seconds", "solve_seconds")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if math.isnan(v) else format(v, ".17g")
    return str(v)


def format_row(row: ResultRow) -> list:
    return [_cell(getattr(row, c)) for c in COLUMNS]


def write_csv(rows: Iterable[ResultRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in rows:
            w.writerow(format_row(row))


def read_csv(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------------------
# error estimation and rates


def derive_seed(base_seed: int, n: int, tag: str) -> int:
    """64-bit seed for one ``(base_seed, n, tag)`` stream."""
    ss = np.random.SeedSequence([int(base_seed), int(n), _SEED_TAGS[tag]])
    return int(ss.generate_state(1, np.uint64)[0])


def random_shifts(seed: int, count: int, d: int) -> np.ndarray:
    from .sampling import generator

    return generator(seed).random((count, d))


def _shifted_errors(approxs: Sequence, f: Callable, lat: Lattice, shifts: np.ndarray) -> list:
    points = lattice_points(lat)
    sq = [0.0] * len(approxs)
    for delta in shifts:
        fx = f(np.mod(points + delta, 1.0))
        for i, a in enumerate(approxs):
            if a is None:
                continue
            diff = fx - evaluate_on_shifted_lattice(a, delta)
            sq[i] += float(np.vdot(diff, diff).real)
    denom = len(shifts) * lat.n
    return [math.sqrt(s / denom) for s in sq]


def estimate_l2_error(approx, f: Callable, lat: Lattice, shifts: int = 50, seed: int = 0) -> float:
    """Root mean square of ``f - approx`` over ``shifts`` random shifts of the lattice."""
    deltas = random_shifts(seed, shifts, lat.d)
    return _shifted_errors([approx], f, lat, deltas)[0]


def fit_rate(points: Sequence, last: int = 10) -> float:
    """Decay rate ``-slope`` of ``log y`` against ``log x`` over the last points."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 2:
        raise ValueError("need at least two points to fit a rate")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise ValueError("rate fitting needs positive values")
    pts = pts[-last:]
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    return float(-np.polyfit(x, y, 1)[0])


def rates_from_rows(rows: Sequence, last: int = 10) -> dict:
    """Fitted rates per method.

    Full-lattice methods are fitted against ``n``, subsampled ones against
    ``|J| / ln |J|``. ``S_n^{1/4}`` is reported against ``n`` as
    ``sn_quarter``.
    """
    by = {}
    for r in rows:
        get = (lambda k: r[k]) if isinstance(r, dict) else (lambda k: getattr(r, k))
        if get("error"):
            continue
        method = get("method")
        sub = method.endswith("_sub")
        x = float(get("J_over_log_J")) if sub else float(get("n"))
        by.setdefault(method, []).append((x, float(get("l2_error"))))
        by.setdefault("sn_quarter", {})
        by["sn_quarter"][int(get("n"))] = float(get("s_n")) ** 0.25
    out = {}
    for key, pts in by.items():
        if key == "sn_quarter":
            pts = sorted(pts.items())
        if len(pts) < last:
            warnings.warn(f"{key}: fitting over {len(pts)} points")
        if len(pts) >= 2:
            out[key] = fit_rate(pts, last)
    return out


# ---------------------------------------------------------------------------
# CBC cache


def cache_key(space: KorobovSpace, n: int) -> str:
    w = space.weights
    text = repr((space.d, float(space.alpha), w.kind, w.product_weights[: space.d],
                 w.order_weights, w.spod_weights[: space.d], int(n)))
    return hashlib.sha256(text.encode()).hexdigest()[:32]


def cached_cbc(space: KorobovSpace, n: int, cache_dir=None) -> Lattice:
    if cache_dir is None:
        return cbc_construct(space, n)
    path = Path(cache_dir) / f"cbc-{cache_key(space, n)}.txt"
    if path.exists():
        return rio.load_lattice(path)
    lat = cbc_construct(space, n)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(f".{os.getpid()}.tmp")
    rio.dump_lattice(lat, tmp)
    os.replace(tmp, path)
    return lat


# ---------------------------------------------------------------------------
# orchestration


def run_size(config: ExperimentConfig, n: int) -> list:
    """All method rows for one lattice size."""
    space = config.space()
    f = make_target(config.target, config.d, config.q)
    t0 = time.perf_counter()
    lat = cached_cbc(space, n, config.cache_dir)
    s_n = s_n_kernel(space, lat) if config.sn_mode == SN_EXACT else s_n_upper_estimate(space, n)
    samples = f(lattice_points(lat))
    base_setup = time.perf_counter() - t0

    sub_seed = derive_seed(config.base_seed, n, "subsample")
    shift_seed = derive_seed(config.base_seed, n, "shifts")
    delay = config.eval_delay_ms / 1000.0
    B_ls = None
    J = None
    rows, approxs = [], []

    def base(method, J_size, seed):
        jl = J_size / math.log(J_size) if J_size > 1 else float("nan")
        return ResultRow(method, config.d, config.alpha, n, J_size, None, None, s_n, float("nan"),
                         None, base_setup, 0.0, seed, jl, J_size * delay)

    for method in config.methods:
        sub = method.endswith("_sub")
        try:
            t1 = time.perf_counter()
            if sub and J is None:
                plan = SubsamplePlan(config.subsample, config.t, sub_seed)
                if B_ls is None:
                    B_ls = enumerate_set(space, reconstructing_radius(s_n))
                J = draw(plan, n, len(B_ls))
            row = base(method, len(J) if sub else n, sub_seed if sub else 0)
            if method == "classical":
                M = classical_radius(s_n)
                setup = time.perf_counter() - t1
                t2 = time.perf_counter()
                a = classical_approximate(space, lat, samples, M)
                row.B_size, row.M, row.iterations = len(a.B), M, 0
            elif method.startswith("lsq"):
                M = reconstructing_radius(s_n)
                if B_ls is None:
                    B_ls = enumerate_set(space, M)
                setup = time.perf_counter() - t1
                t2 = time.perf_counter()
                a = lsq_fit(space, lat, B_ls, J if sub else None,
                            samples[J.entries] if sub else samples, tol=config.tol)
                row.B_size, row.M, row.iterations = len(B_ls), M, a.stats.iterations
            else:
                setup = time.perf_counter() - t1
                t2 = time.perf_counter()
                a = kernel_fit(space, lat, J if sub else None,
                               samples[J.entries] if sub else samples, tol=config.tol)
                row.iterations = a.stats.iterations
            row.setup_seconds += setup
            row.solve_seconds = time.perf_counter() - t2
        except Exception as exc:  # recorded per row, the sweep continues
            log.warning("n=%d %s failed: %s", n, method, exc)
            row = base(method, n, 0)
            row.error = f"{type(exc).__name__}: {exc}".replace("\n", " ")
            a = None
        rows.append(row)
        approxs.append(a)
    errs = _shifted_errors(approxs, f, lat, random_shifts(shift_seed, config.shifts, config.d))
    for row, a, e in zip(rows, approxs, errs):
        if a is not None:
            row.l2_error = e
    return rows


def run_experiment(config: ExperimentConfig, sink: Optional[Callable] = None) -> list:
    """Run every lattice size; rows come back ordered by ``n`` then method.

    Sizes may run on ``config.threads`` worker threads; output order and
    content do not depend on the thread count. With ``config.out`` set the
    rows are written as CSV.
    """
    rows: list = []
    out = open(config.out, "w", newline="") if config.out else None
    writer = csv.writer(out, lineterminator="\n") if out else None
    if writer:
        writer.writerow(COLUMNS)
    try:
        def emit(batch):
            for row in batch:
                rows.append(row)
                if writer:
                    writer.writerow(format_row(row))
                if sink:
                    sink(row)
            if out:
                out.flush()

        if not config.methods:
            return rows
        if config.threads <= 1:
            for n in config.n_list:
                emit(run_size(config, n))
        else:
            with ThreadPoolExecutor(max_workers=config.threads) as pool:
                futures = [pool.submit(run_size, config, n) for n in config.n_list]
                for fut in futures:  # in submission order
                    emit(fut.result())
    finally:
        if out:
            out.close()
    return rows


def strip_timing(csv_text: str) -> str:
    """CSV text with the timing columns removed, for reproducibility checks."""
    reader = csv.reader(_io.StringIO(csv_text))
    header = next(reader)
    keep = [i for i, c in enumerate(header) if c not in TIMING_COLUMNS]
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([header[i] for i in keep])
    for rec in reader:
        w.writerow([rec[i] for i in keep])
    return buf.getvalue()
