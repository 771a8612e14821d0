"""Synthetic graph-recovery experiments.

One repetition draws an Erdos-Renyi graph, its precision matrix, true mean
parameters and ``R`` observations at equally spaced timestamps, then scores
every configured method on that same data. A sweep repeats this over a grid
of observation counts (``obs-sweep``) or particle counts
(``particle-sweep``).

Randomness is split per repetition: the data stream is seeded from
``SeedSequence([seed, rep])`` and each method's sampler from
``SeedSequence([seed, rep, method_code])``, so any repetition can be rerun
alone, in any order or in parallel, with identical output.
"""
import csv
import hashlib
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional
from xml.sax.saxutils import escape

import numpy as np

from .errors import GlataisError, ParameterError
from .evaluation import (
    EdgeSet,
    ThresholdSpec,
    baseline_atais_inverse,
    baseline_oracle_gl,
    baseline_standard_gl,
    f_score,
    support_from_precision,
)
from .ggm import generate_er_graph, make_precision, sample_observations
from .gl_atais import GlAtaisConfig, run
from .glasso import GlassoOptions
from .mean_model import benchmark_model, mean_matrix

log = logging.getLogger(__name__)

METHODS = ("standard-gl", "oracle-gl", "gl-atais", "atais-inv")
METHOD_CODES = {m: i for i, m in enumerate(METHODS)}
IS_METHODS = ("gl-atais", "atais-inv")
MODES = {"obs-sweep": "R", "particle-sweep": "P"}
CSV_HEADER = ["method", "R", "P", "rep", "seed", "f_score", "wall_time_ms", "log_posterior", "error"]
SUMMARY_HEADER = ["method", "grid_value", "mean", "stderr"]

# JSON key -> attribute, where they differ (``lambda`` is a keyword)
_KEY_ALIASES = {"lambda": "lam"}


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 10
    p_edge: float = 0.1
    R_grid: tuple = (50, 100, 150, 200)
    P_grid: tuple = (30, 300, 3000, 30000)
    reps: int = 100
    K: int = 30
    K0: int = 5
    lam: float = 0.1
    phi_range: tuple = (-2.0, 2.0)
    tau_interval: tuple = (0.0, 4.0)
    seed: int = 0
    methods: tuple = METHODS
    # fixed P for obs-sweep and fixed R for particle-sweep
    fixed_P: int = 30000
    fixed_R: int = 100
    delta: float = 1e-3
    eps_margin: float = 0.1
    # redraw phi_true while any mean component exceeds this; None disables
    mean_bound: Optional[float] = 200.0
    scaling: str = "full"
    threshold: float = 1e-4
    threshold_kind: str = "absolute"
    timing: bool = True
    workers: int = 1

    def __post_init__(self):
        for name in ("R_grid", "P_grid", "methods", "phi_range", "tau_interval"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.R_grid or not self.P_grid:
            raise ParameterError("R_grid and P_grid must be nonempty")
        if any(int(r) < 2 for r in self.R_grid) or self.fixed_R < 2:
            raise ParameterError("every R must be at least 2")
        if any(int(p) < 1 for p in self.P_grid) or self.fixed_P < 1:
            raise ParameterError("every P must be at least 1")
        if self.reps < 1:
            raise ParameterError(f"reps must be at least 1, got {self.reps}")
        if self.n < 1:
            raise ParameterError(f"n must be at least 1, got {self.n}")
        if not 0.0 <= self.p_edge <= 1.0:
            raise ParameterError(f"p_edge must lie in [0, 1], got {self.p_edge}")
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise ParameterError(f"methods must be a nonempty subset of {METHODS}, got {self.methods}")
        if len(set(self.methods)) != len(self.methods):
            raise ParameterError("methods are listed twice")
        if len(self.phi_range) != 2 or not self.phi_range[0] < self.phi_range[1]:
            raise ParameterError(f"phi_range must be [low, high] with low < high, got {self.phi_range}")
        if len(self.tau_interval) != 2 or not self.tau_interval[0] <= self.tau_interval[1]:
            raise ParameterError(f"tau_interval must be [start, end], got {self.tau_interval}")
        if self.workers < 1:
            raise ParameterError(f"workers must be at least 1, got {self.workers}")
        # surfaces remaining range errors now rather than mid-sweep
        self.gl_atais_config(1)
        self.threshold_spec()
        if self.eps_margin <= 0:
            raise ParameterError(f"eps_margin must be positive, got {self.eps_margin}")
        if self.mean_bound is not None and not self.mean_bound > 0:
            raise ParameterError(f"mean_bound must be positive or null, got {self.mean_bound}")

    @classmethod
    def desk(cls, **overrides):
        """Desk-scale settings: 20 repetitions and 3000 particles."""
        return cls(**{"reps": 20, "fixed_P": 3000, **overrides})

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ParameterError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in data.items():
            attr = _KEY_ALIASES.get(key, key)
            if attr not in known or key == "lam":
                raise ParameterError(f"unknown config field {key!r}")
            kwargs[attr] = value
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ParameterError(str(exc)) from None

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"invalid JSON: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self):
        inverse = {v: k for k, v in _KEY_ALIASES.items()}
        return {inverse.get(k, k): list(v) if isinstance(v, tuple) else v
                for k, v in asdict(self).items()}

    def gl_atais_config(self, n_particles):
        return GlAtaisConfig(
            K=self.K, K0=self.K0, P=int(n_particles), lam=self.lam, delta=self.delta,
            scaling=self.scaling, glasso_opts=GlassoOptions(self.lam))

    def threshold_spec(self):
        return ThresholdSpec(self.threshold_kind, self.threshold)


@dataclass(frozen=True)
class ResultRow:
    method: str
    R: int
    P: int
    rep: int
    seed: int
    f_score: Optional[float]
    wall_time_ms: Optional[float]
    log_posterior: Optional[float]
    error: str = ""
    data_digest: str = field(default="", compare=False)


@dataclass(frozen=True)
class SummaryRow:
    method: str
    grid_value: int
    mean: float
    stderr: float
    count: int = field(default=0, compare=False)


@dataclass
class ResultTable:
    rows: list
    grid: str = "R"

    def summary(self):
        return aggregate(self.rows, self.grid)


@dataclass(frozen=True)
class Repetition:
    graph: object
    theta: np.ndarray
    phi_true: np.ndarray
    obs: object
    seed: int
    digest: str


def repetition_seed(master, rep):
    """Integer recorded in the ``seed`` column for repetition ``rep``."""
    return int(np.random.SeedSequence([master, rep]).generate_state(1, dtype=np.uint64)[0])


def method_rng(master, rep, method):
    return np.random.default_rng(np.random.SeedSequence([master, rep, METHOD_CODES[method]]))


def draw_phi_true(cfg, model, rng, max_draws=1000):
    """Uniform draw from ``phi_range`` whose mean stays within ``mean_bound``.

    The benchmark mean blows up as phi[2] approaches -1 from above
    (exp(1/(1 + phi[2])) reaches 1e27 at -0.984), giving covariances no
    solver can handle in double precision. The bound is checked on a fixed
    grid over ``tau_interval`` so the draw does not depend on ``R``.
    """
    lo, hi = cfg.phi_range
    grid = np.linspace(cfg.tau_interval[0], cfg.tau_interval[1], 101)
    for _ in range(max_draws):
        phi = rng.uniform(lo, hi, model.dim_params)
        if cfg.mean_bound is None:
            return phi
        with np.errstate(all="ignore"):
            try:
                peak = np.abs(mean_matrix(model, phi, grid)).max()
            except GlataisError:
                continue
        if peak <= cfg.mean_bound:
            return phi
    raise ParameterError(f"no phi in {cfg.phi_range} keeps the mean within {cfg.mean_bound} "
                         f"after {max_draws} draws")


def simulate(cfg, rep, R, model=None):
    """Draw the graph, precision, true parameters and observations for one repetition."""
    model = model or benchmark_model()
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, rep]))
    graph = generate_er_graph(cfg.n, cfg.p_edge, rng)
    theta = make_precision(graph, cfg.eps_margin)
    phi_true = draw_phi_true(cfg, model, rng)
    tau = np.linspace(cfg.tau_interval[0], cfg.tau_interval[1], int(R))
    obs = sample_observations(theta, model, phi_true, tau, rng)
    digest = hashlib.sha256(obs.x.tobytes() + obs.timestamps.tobytes()).hexdigest()[:16]
    return Repetition(graph, theta, phi_true, obs, repetition_seed(cfg.seed, rep), digest)


def _score_method(method, cfg, rep, data, model, n_particles, on_trace=None):
    opts = GlassoOptions(cfg.lam)
    log_post = None
    if method == "standard-gl":
        theta = baseline_standard_gl(data.obs, opts)
    elif method == "oracle-gl":
        theta = baseline_oracle_gl(data.obs, model, data.phi_true, opts)
    elif method == "gl-atais":
        theta, _, trace = run(data.obs, model, cfg.gl_atais_config(n_particles),
                              method_rng(cfg.seed, rep, method))
        log_post = float(trace.iterations[-1].value)
        if on_trace is not None:
            on_trace(rep, data.obs.n_samples, n_particles, trace)
    else:
        theta = baseline_atais_inverse(data.obs, model, cfg.gl_atais_config(n_particles),
                                       rng=method_rng(cfg.seed, rep, method))
    est = support_from_precision(theta, cfg.threshold_spec())
    return f_score(est, EdgeSet.from_graph(data.graph)), log_post


def run_repetition(cfg, rep, R, P, model=None, on_trace=None):
    """Score every configured method on one shared draw; one row per method.

    A method that raises a package error yields a row with a blank score and
    the exception class name in ``error``. ``on_trace(rep, R, P, trace)`` is
    called with each GL-ATAIS run trace.
    """
    if not 0 <= rep < cfg.reps:
        raise ParameterError(f"rep must lie in [0, {cfg.reps}), got {rep}")
    model = model or benchmark_model()
    data = simulate(cfg, rep, R, model)
    rows = []
    for method in cfg.methods:
        start = time.perf_counter()
        try:
            score, log_post = _score_method(method, cfg, rep, data, model, P, on_trace)
            error = ""
        except (GlataisError, np.linalg.LinAlgError) as exc:
            log.warning("rep %d R=%d P=%d %s failed: %s", rep, R, P, method, exc)
            score, log_post, error = None, None, type(exc).__name__
        elapsed = (time.perf_counter() - start) * 1e3 if cfg.timing else None
        rows.append(ResultRow(method, int(R), int(P), rep, data.seed, score, elapsed,
                              log_post, error, data.digest))
    return rows


def _task(args):
    cfg, rep, R, P = args
    return run_repetition(cfg, rep, R, P)


def run_sweep(cfg, mode="obs-sweep"):
    """Run every (grid point, repetition) pair and return a :class:`ResultTable`."""
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {tuple(MODES)}, got {mode!r}")
    if mode == "obs-sweep":
        points = [(int(R), cfg.fixed_P) for R in cfg.R_grid]
    else:
        points = [(cfg.fixed_R, int(P)) for P in cfg.P_grid]
    tasks = [(cfg, rep, R, P) for R, P in points for rep in range(cfg.reps)]
    rows = []
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            for chunk in pool.map(_task, tasks):
                rows.extend(chunk)
    else:
        for i, task in enumerate(tasks):
            rows.extend(_task(task))
            log.info("finished %d/%d (R=%d P=%d rep=%d)", i + 1, len(tasks), task[2], task[3], task[1])
    order = {m: i for i, m in enumerate(METHODS)}
    key = "R" if mode == "obs-sweep" else "P"
    rows.sort(key=lambda r: (getattr(r, key), r.rep, order[r.method]))
    return ResultTable(rows, key)


def aggregate(rows, grid="R"):
    """Mean and standard error of the F-score per (method, grid value), errored rows skipped."""
    cells = {}
    for row in rows:
        if row.f_score is None:
            continue
        cells.setdefault((row.method, getattr(row, grid)), []).append(row.f_score)
    order = {m: i for i, m in enumerate(METHODS)}
    out = []
    for (method, value) in sorted(cells, key=lambda c: (order.get(c[0], len(order)), c[1])):
        scores = np.array(cells[(method, value)])
        stderr = float(scores.std(ddof=1) / math.sqrt(scores.size)) if scores.size > 1 else 0.0
        out.append(SummaryRow(method, value, float(scores.mean()), stderr, scores.size))
    return out


def _fmt(value):
    return "" if value is None else repr(float(value))


def _parse_float(text):
    return None if text == "" else float(text)


def results_csv(rows):
    if not rows:
        raise ParameterError("cannot emit an empty result table")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([r.method, r.R, r.P, r.rep, r.seed, _fmt(r.f_score),
                         _fmt(r.wall_time_ms), _fmt(r.log_posterior), r.error])
    return buf.getvalue()


def read_results_csv(text):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != CSV_HEADER:
        raise ParameterError(f"unexpected results header {header}")
    return [
        ResultRow(m, int(R), int(P), int(rep), int(seed), _parse_float(f), _parse_float(wt),
                  _parse_float(lp), err)
        for m, R, P, rep, seed, f, wt, lp, err in reader
    ]


def summary_csv(summary):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for s in summary:
        writer.writerow([s.method, s.grid_value, repr(s.mean), repr(s.stderr)])
    return buf.getvalue()


_COLORS = {"standard-gl": "#d62728", "oracle-gl": "#2ca02c", "gl-atais": "#1f77b4",
           "atais-inv": "#ff7f0e"}


def svg_chart(summary, grid="R"):
    """Mean F-score against the grid variable, one polyline per method with stderr bars."""
    if not summary:
        raise ParameterError("cannot chart an empty summary")
    width, height = 640, 420
    left, right, top, bottom = 70, 150, 30, 60
    values = sorted({s.grid_value for s in summary})
    pw, ph = width - left - right, height - top - bottom

    def sx(v):
        if len(values) == 1:
            return left + pw / 2
        return left + pw * values.index(v) / (len(values) - 1)

    def sy(f):
        return top + ph * (1.0 - min(max(f, 0.0), 1.0))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for tick in np.linspace(0.0, 1.0, 6):
        y = sy(tick)
        parts.append(f'<line x1="{left - 4}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
        parts.append(f'<text x="{left - 8}" y="{y + 4:.2f}" font-size="11" text-anchor="end">{tick:.1f}</text>')
    for v in values:
        x = sx(v)
        parts.append(f'<text x="{x:.2f}" y="{top + ph + 18}" font-size="11" text-anchor="middle">{v}</text>')
    parts.append(f'<text x="{left + pw / 2}" y="{height - 15}" font-size="13" text-anchor="middle">{grid}</text>')
    parts.append(f'<text x="18" y="{top + ph / 2}" font-size="13" text-anchor="middle" '
                 f'transform="rotate(-90 18 {top + ph / 2})">mean F-score</text>')

    methods = [m for m in METHODS if any(s.method == m for s in summary)]
    methods += sorted({s.method for s in summary} - set(methods))
    for i, method in enumerate(methods):
        color = _COLORS.get(method, "#555555")
        pts = sorted((s for s in summary if s.method == method), key=lambda s: s.grid_value)
        coords = " ".join(f"{sx(s.grid_value):.2f},{sy(s.mean):.2f}" for s in pts)
        parts.append(f'<polyline data-method="{escape(method)}" points="{coords}" fill="none" '
                     f'stroke="{color}" stroke-width="2"/>')
        for s in pts:
            x = sx(s.grid_value)
            parts.append(f'<line x1="{x:.2f}" y1="{sy(s.mean - s.stderr):.2f}" x2="{x:.2f}" '
                         f'y2="{sy(s.mean + s.stderr):.2f}" stroke="{color}"/>')
        ly = top + 10 + 20 * i
        parts.append(f'<line x1="{left + pw + 15}" y1="{ly}" x2="{left + pw + 35}" y2="{ly}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{left + pw + 40}" y="{ly + 4}" font-size="11">{escape(method)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_results(table, fmt="csv"):
    """Serialize a :class:`ResultTable` (or plain row list) as ``csv`` or ``svg-chart`` bytes."""
    rows = table.rows if isinstance(table, ResultTable) else list(table)
    grid = table.grid if isinstance(table, ResultTable) else "R"
    if not rows:
        raise ParameterError("cannot emit an empty result table")
    if fmt == "csv":
        return results_csv(rows).encode()
    if fmt == "svg-chart":
        return svg_chart(aggregate(rows, grid), grid).encode()
    raise ParameterError(f"unknown output format {fmt!r}")
