"""Excess-risk quadrature, rate regression, and the experiment runners.

The three runners (convergence rates, transfer optimality, xi plateau)
share one execution scheme: a study is a grid of cells, each cell is
``repeats`` independent tasks keyed by (cell, repeat index), every random
quantity inside a task is drawn from a generator seeded by
seed_base XOR sha256(cell key, repeat index), and per-cell reduction is a
compensated mean in repeat-index order.  Thread scheduling therefore has
no effect on any output byte; BLAS pools are pinned to one thread for the
duration of a run so pool size cannot perturb the linear algebra either.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from threadpoolctl import threadpool_limits

from .adaptive import AdaptiveConfig, adaptive_fit
from .errors import InputError
from .kernels import KernelSpec
from .quadrature import simpson_integral
from .seeding import derive_seed
from .simulate import gp_sample_path, make_regression_data, make_shift_scenario, make_transfer_datasets
from .spectral import FilterSpec, FittedModel, lambda_schedule, normalize_kind, predict, spectral_fit
from .transfer import HtlResult, TransformPair, htl_predict, rahtl_fit

CSV_COLUMNS = (
    "study", "filter", "m", "m_P", "m_delta", "xi", "C", "n", "n_P", "n_Q",
    "repeat_count", "mean_risk", "slope", "theoretical_slope", "r_squared",
    "seed_base", "config_hash", "xi_star",
)


@dataclass(frozen=True)
class RiskEstimate:
    """A nonnegative excess-risk value with its evaluation metadata."""

    value: float
    n_test: int
    repeats: int = 1


@dataclass(frozen=True)
class RateFit:
    """OLS of log risk on log n, with the theoretical target slope."""

    slope: float
    intercept: float
    r_squared: float
    theoretical_slope: float


def mean_risk(values) -> float:
    """Arithmetic mean in index order with Kahan compensation."""
    total = 0.0
    comp = 0.0
    count = 0
    for v in values:
        count += 1
        y = float(v) - comp
        t = total + y
        comp = (t - total) - y
        total = t
    if count == 0:
        raise InputError("mean over an empty sequence")
    return total / count


def excess_risk(model, truth, n_test: int = 5001) -> RiskEstimate:
    """Simpson estimate of the squared L2 gap between model and truth.

    ``model`` may be a FittedModel, an HtlResult, or any callable on a
    vector of points in [0, 1]; ``truth`` likewise.
    """
    if n_test < 3 or n_test % 2 == 0:
        raise InputError("n_test must be odd and >= 3")
    xs = np.linspace(0.0, 1.0, n_test)
    diff = _evaluate(model, xs) - _evaluate(truth, xs)
    value = simpson_integral(diff * diff, 0.0, 1.0)
    return RiskEstimate(value=value, n_test=n_test)


def _evaluate(f, xs: np.ndarray) -> np.ndarray:
    if isinstance(f, FittedModel):
        return predict(f, xs)
    if isinstance(f, HtlResult):
        return htl_predict(f, xs)
    return np.asarray(f(xs), dtype=float)


def theoretical_rate(m: float, d: int) -> float:
    """Minimax slope -2m/(2m+d) for smoothness m in dimension d."""
    return -2.0 * m / (2.0 * m + d)


def fit_rate(ns, risks, m: float, d: int) -> RateFit:
    """OLS of ln(risk) on ln(n); requires >= 2 distinct n, positive risks."""
    ns_arr = np.asarray(ns, dtype=float)
    risks_arr = np.asarray(risks, dtype=float)
    if ns_arr.shape != risks_arr.shape or ns_arr.ndim != 1:
        raise InputError("ns and risks must be 1-D sequences of equal length")
    if np.unique(ns_arr).size < 2:
        raise InputError("need at least two distinct sample sizes")
    if np.any(risks_arr <= 0):
        raise InputError("risks must be positive to regress in log space")
    X = np.log(ns_arr)
    Y = np.log(risks_arr)
    slope, intercept = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + intercept)
    ss_res = float(resid @ resid)
    centered = Y - Y.mean()
    ss_tot = float(centered @ centered)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    r2 = min(max(r2, 0.0), 1.0)
    return RateFit(slope=float(slope), intercept=float(intercept),
                   r_squared=r2, theoretical_slope=theoretical_rate(m, d))


# --------------------------------------------------------------------------
# study configs


def _positive(x, name):
    if not x > 0:
        raise InputError(f"{name} must be positive")


def _odd(x, name):
    if x < 3 or x % 2 == 0:
        raise InputError(f"{name} must be odd and >= 3")


@dataclass(frozen=True)
class _CommonStudyFields:
    seed_base: int = 0
    threads: int = 1
    noise_sd: float = 0.5
    bandwidth: float = 0.2
    truth_bandwidth: float = 0.2
    n_grid: int = 2001
    n_test: int = 5001

    def _validate_common(self):
        if self.threads < 1:
            raise InputError("threads must be >= 1")
        if self.noise_sd < 0:
            raise InputError("noise_sd must be >= 0")
        _positive(self.bandwidth, "bandwidth")
        _positive(self.truth_bandwidth, "truth_bandwidth")
        _odd(self.n_grid, "n_grid")
        if self.n_grid < 17:
            raise InputError("n_grid must be >= 17")
        _odd(self.n_test, "n_test")


@dataclass(frozen=True)
class RateStudyConfig(_CommonStudyFields):
    """Configuration of the (non-)adaptive convergence-rate study."""

    m: float = 2.0
    d: int = 1
    filters: tuple[str, ...] = ("krr",)
    ns: tuple[int, ...] = tuple(range(100, 1001, 100))
    repeats: int = 20
    C_grid: tuple[float, ...] = (0.25, 0.5, 1.0, 2.0)
    adaptive: bool = False
    candidates: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0, 5.0)
    split_fraction: float = 0.5
    fixed_truth: bool = False

    def __post_init__(self):
        self._validate_common()
        if self.d != 1:
            raise InputError("simulation studies are defined on [0,1], d=1")
        if not self.m > self.d / 2:
            raise InputError("m must exceed d/2")
        object.__setattr__(self, "filters",
                           tuple(normalize_kind(f) for f in self.filters))
        if not self.ns:
            raise InputError("ns must be nonempty")
        for n in self.ns:
            if n < 4:
                raise InputError("every n must be >= 4")
        if self.repeats < 1:
            raise InputError("repeats must be >= 1")
        if not self.C_grid:
            raise InputError("C_grid must be nonempty")
        for c in self.C_grid:
            _positive(c, "C_grid entries")


@dataclass(frozen=True)
class TransferStudyConfig(_CommonStudyFields):
    """Configuration of the transfer-versus-target-only study."""

    m_P: float = 1.0
    m_delta: tuple[float, ...] = (2.0, 3.0)
    xi: tuple[float, ...] = (0.25, 0.5, 0.75, 1.0)
    n_Q: tuple[int, ...] = tuple(range(40, 151, 5))
    repeats: int = 30
    C: float = 1.0
    candidates: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0, 5.0)
    split_fraction: float = 0.5
    pretrain_filter: str = "gf"
    finetune_filter: str = "krr"
    baseline_filter: str = "krr"

    def __post_init__(self):
        self._validate_common()
        _positive(self.m_P, "m_P")
        if not self.m_delta:
            raise InputError("m_delta must be nonempty")
        for m in self.m_delta:
            _positive(m, "m_delta entries")
        if not self.xi:
            raise InputError("xi must be nonempty")
        for x in self.xi:
            _positive(x, "xi entries")
        if not self.n_Q:
            raise InputError("n_Q must be nonempty")
        for n in self.n_Q:
            if n < 4:
                raise InputError("every n_Q must be >= 4")
        if self.repeats < 1:
            raise InputError("repeats must be >= 1")
        _positive(self.C, "C")
        for name in ("pretrain_filter", "finetune_filter", "baseline_filter"):
            object.__setattr__(self, name, normalize_kind(getattr(self, name)))


@dataclass(frozen=True)
class PhaseStudyConfig(_CommonStudyFields):
    """Configuration of the xi-plateau study (fixed n_Q, growing n_P)."""

    m_P: float = 1.0
    m_delta: float = 3.0
    n_Q: int = 200
    n_P: tuple[int, ...] = (200, 600, 1000, 1500)
    xi: tuple[float, ...] = (0.25, 0.5, 1.0, 4.0)
    repeats: int = 30
    C: float = 1.0
    candidates: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0, 5.0)
    split_fraction: float = 0.5
    pretrain_filter: str = "gf"
    finetune_filter: str = "krr"

    def __post_init__(self):
        self._validate_common()
        _positive(self.m_P, "m_P")
        _positive(self.m_delta, "m_delta")
        if self.n_Q < 4:
            raise InputError("n_Q must be >= 4")
        if not self.n_P:
            raise InputError("n_P must be nonempty")
        for n in self.n_P:
            if n < 4:
                raise InputError("every n_P must be >= 4")
        if not self.xi:
            raise InputError("xi must be nonempty")
        for x in self.xi:
            _positive(x, "xi entries")
        if self.repeats < 1:
            raise InputError("repeats must be >= 1")
        _positive(self.C, "C")
        object.__setattr__(self, "pretrain_filter", normalize_kind(self.pretrain_filter))
        object.__setattr__(self, "finetune_filter", normalize_kind(self.finetune_filter))


def config_hash(cfg) -> str:
    """12-hex-digit digest of a study config's canonical JSON form.

    ``threads`` is excluded: it controls execution only, never results, and
    the same config must hash identically at any pool size.
    """
    fields = {k: v for k, v in asdict(cfg).items() if k != "threads"}
    doc = json.dumps(fields, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(doc.encode("utf-8")).hexdigest()[:12]


# --------------------------------------------------------------------------
# result tables


@dataclass
class StudyResult:
    """Row-oriented result table plus per-group rate fits."""

    study: str
    rows: list = field(default_factory=list)
    rate_fits: dict = field(default_factory=dict)
    best_C: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for row in self.rows:
            buf.write(",".join(_cell(row.get(c)) for c in CSV_COLUMNS) + "\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv())


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _run_tasks(fn: Callable, tasks: list, threads: int) -> list:
    """Evaluate fn over tasks, preserving task order in the result list."""
    results = [None] * len(tasks)
    if threads <= 1:
        for i, t in enumerate(tasks):
            results[i] = fn(t)
        return results
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {pool.submit(fn, t): i for i, t in enumerate(tasks)}
        for fut in futures:
            results[futures[fut]] = fut.result()
    return results


# --------------------------------------------------------------------------
# rate study


def run_rate_study(cfg: RateStudyConfig) -> StudyResult:
    """Convergence-rate sweep over (filter, C, n) cells.

    Per cell and repeat: draw a truth path of order m, draw data, fit
    (non-adaptively with the scheduled lambda, or adaptively over the
    candidate grid), and record the excess risk.  Per (filter, C) group
    with >= 2 distinct n and positive mean risks, regress log risk on
    log n; the best C per filter minimizes |slope - theoretical|.
    """
    study = "adaptive-rates" if cfg.adaptive else "rates"
    chash = config_hash(cfg)
    kernel = KernelSpec.gaussian(cfg.bandwidth)
    nu = cfg.m + 0.01

    cells = [(f, C, n) for f in cfg.filters for C in cfg.C_grid for n in cfg.ns]
    tasks = [(f, C, n, r) for (f, C, n) in cells for r in range(cfg.repeats)]

    def unit(task):
        f, C, n, r = task
        key = (study, f, float(C), int(n))
        if cfg.fixed_truth:
            t_seed = derive_seed(cfg.seed_base, *key, "truth")
        else:
            t_seed = derive_seed(cfg.seed_base, *key, r, "truth")
        truth = gp_sample_path(nu, cfg.truth_bandwidth, cfg.n_grid, t_seed)
        data = make_regression_data(truth, n, cfg.noise_sd,
                                    derive_seed(cfg.seed_base, *key, r, "data"))
        if cfg.adaptive:
            acfg = AdaptiveConfig(cfg.candidates, C, cfg.split_fraction, f)
            model = adaptive_fit(data, kernel, acfg,
                                 derive_seed(cfg.seed_base, *key, r, "split")).model
        else:
            lam = lambda_schedule(n, cfg.m, cfg.d, C)
            model = spectral_fit(data, kernel, FilterSpec(f, lam))
        return excess_risk(model, truth, cfg.n_test).value

    with threadpool_limits(limits=1):
        risks = _run_tasks(unit, tasks, cfg.threads)

    result = StudyResult(study=study)
    cell_mean = {}
    for i, (f, C, n) in enumerate(cells):
        chunk = risks[i * cfg.repeats:(i + 1) * cfg.repeats]
        cell_mean[(f, C, n)] = mean_risk(chunk)
        result.rows.append({
            "study": study, "filter": f, "m": cfg.m, "C": float(C), "n": n,
            "repeat_count": cfg.repeats, "mean_risk": cell_mean[(f, C, n)],
            "seed_base": cfg.seed_base, "config_hash": chash,
        })

    distinct_ns = len(set(cfg.ns))
    for f in cfg.filters:
        for C in cfg.C_grid:
            means = [cell_mean[(f, C, n)] for n in cfg.ns]
            if distinct_ns < 2 or any(v <= 0 for v in means):
                continue
            rf = fit_rate(cfg.ns, means, cfg.m, cfg.d)
            result.rate_fits[(f, float(C))] = rf
            result.rows.append({
                "study": study, "filter": f, "m": cfg.m, "C": float(C),
                "repeat_count": cfg.repeats, "slope": rf.slope,
                "theoretical_slope": rf.theoretical_slope,
                "r_squared": rf.r_squared, "seed_base": cfg.seed_base,
                "config_hash": chash,
            })
        fitted = [(C, result.rate_fits[(f, float(C))]) for C in cfg.C_grid
                  if (f, float(C)) in result.rate_fits]
        if fitted:
            result.best_C[f] = min(
                fitted, key=lambda cr: abs(cr[1].slope - cr[1].theoretical_slope)
            )[0]
    return result


# --------------------------------------------------------------------------
# transfer study

TRANSFER_LABEL = "{}+{}"
TARGET_ONLY_LABEL = "{}-target-only"


def _transfer_unit(cfg, scenario_key, n_P, n_Q, r):
    """One repeat: scenario, datasets, both estimators, both risks."""
    base = cfg.seed_base
    m_delta = scenario_key["m_delta"]
    xi = scenario_key["xi"]
    key = scenario_key["key"]
    scenario = make_shift_scenario(
        cfg.m_P, m_delta, xi, n_P, n_Q,
        (derive_seed(base, *key, r, "truth-source"),
         derive_seed(base, *key, r, "truth-shift")),
        noise_sd=cfg.noise_sd, bandwidth=cfg.truth_bandwidth,
        n_grid=cfg.n_grid)
    pair = TransformPair.offset()
    source, target = make_transfer_datasets(
        scenario, pair, derive_seed(base, *key, r, "data"))
    kernel = KernelSpec.gaussian(cfg.bandwidth)
    cfg_P = AdaptiveConfig(cfg.candidates, cfg.C, cfg.split_fraction,
                           cfg.pretrain_filter)
    cfg_d = AdaptiveConfig(cfg.candidates, cfg.C, cfg.split_fraction,
                           cfg.finetune_filter)
    fit = rahtl_fit(source, target, kernel, pair, cfg_P, cfg_d,
                    derive_seed(base, *key, r, "rahtl"))
    transfer_risk = excess_risk(fit, scenario.f_Q, cfg.n_test).value
    baseline_risk = None
    if getattr(cfg, "baseline_filter", None) is not None:
        bcfg = AdaptiveConfig(cfg.candidates, cfg.C, cfg.split_fraction,
                              cfg.baseline_filter)
        bfit = adaptive_fit(target, kernel, bcfg,
                            derive_seed(base, *key, r, "baseline-split"))
        baseline_risk = excess_risk(bfit.model, scenario.f_Q, cfg.n_test).value
    return transfer_risk, baseline_risk


def run_transfer_study(cfg: TransferStudyConfig) -> StudyResult:
    """Transfer vs target-only sweep over (m_delta, xi, n_Q) cells.

    n_P follows round(n_Q^1.5).  Both estimators see the same scenario and
    datasets in every repeat; the per-(m_delta, xi) rate fit regresses the
    transfer risk on n_Q against the fine-tuning-limited slope
    -2 m_delta/(2 m_delta + 1).
    """
    chash = config_hash(cfg)
    transfer_label = TRANSFER_LABEL.format(cfg.pretrain_filter,
                                           cfg.finetune_filter)
    baseline_label = TARGET_ONLY_LABEL.format(cfg.baseline_filter)

    cells = []
    for m_d in cfg.m_delta:
        for xi in cfg.xi:
            for n_Q in cfg.n_Q:
                n_P = int(round(n_Q ** 1.5))
                key = ("transfer", float(m_d), float(xi), int(n_Q))
                cells.append((m_d, xi, n_Q, n_P,
                              {"m_delta": m_d, "xi": xi, "key": key}))
    tasks = [(c, r) for c in cells for r in range(cfg.repeats)]

    def unit(task):
        (m_d, xi, n_Q, n_P, skey), r = task
        return _transfer_unit(cfg, skey, n_P, n_Q, r)

    with threadpool_limits(limits=1):
        outcomes = _run_tasks(unit, tasks, cfg.threads)

    result = StudyResult(study="transfer")
    transfer_mean = {}
    baseline_mean = {}
    for i, (m_d, xi, n_Q, n_P, _) in enumerate(cells):
        chunk = outcomes[i * cfg.repeats:(i + 1) * cfg.repeats]
        t_mean = mean_risk([a for a, _ in chunk])
        b_mean = mean_risk([b for _, b in chunk])
        transfer_mean[(m_d, xi, n_Q)] = t_mean
        baseline_mean[(m_d, xi, n_Q)] = b_mean
        common = {
            "study": "transfer", "m_P": cfg.m_P, "m_delta": m_d, "xi": xi,
            "C": cfg.C, "n_P": n_P, "n_Q": n_Q, "repeat_count": cfg.repeats,
            "seed_base": cfg.seed_base, "config_hash": chash,
        }
        result.rows.append(dict(common, filter=transfer_label, mean_risk=t_mean))
        result.rows.append(dict(common, filter=baseline_label, mean_risk=b_mean))

    distinct = len(set(cfg.n_Q))
    for m_d in cfg.m_delta:
        for xi in cfg.xi:
            means = [transfer_mean[(m_d, xi, n_Q)] for n_Q in cfg.n_Q]
            if distinct < 2 or any(v <= 0 for v in means):
                continue
            rf = fit_rate(cfg.n_Q, means, m_d, 1)
            result.rate_fits[(float(m_d), float(xi))] = rf
            result.rows.append({
                "study": "transfer", "filter": transfer_label, "m_P": cfg.m_P,
                "m_delta": m_d, "xi": xi, "C": cfg.C,
                "repeat_count": cfg.repeats, "slope": rf.slope,
                "theoretical_slope": rf.theoretical_slope,
                "r_squared": rf.r_squared, "seed_base": cfg.seed_base,
                "config_hash": chash,
            })
    return result


# --------------------------------------------------------------------------
# phase (plateau) study


def xi_star(n_P: int, n_Q: int, m_P: float, m_delta: float, d: int = 1) -> float:
    """Phase-transition point (n_Q/ln n_Q)^{2m_d/(2m_d+d)} / (n_P/ln n_P)^{2m_P/(2m_P+d)}."""
    if n_P < 2 or n_Q < 2:
        raise InputError("xi_star needs n_P, n_Q >= 2")
    num = (n_Q / math.log(n_Q)) ** (2.0 * m_delta / (2.0 * m_delta + d))
    den = (n_P / math.log(n_P)) ** (2.0 * m_P / (2.0 * m_P + d))
    return num / den


def run_phase_study(cfg: PhaseStudyConfig) -> StudyResult:
    """Transfer risk as n_P grows at fixed n_Q, per xi, with xi_star per cell."""
    chash = config_hash(cfg)
    label = TRANSFER_LABEL.format(cfg.pretrain_filter, cfg.finetune_filter)

    cells = []
    for xi in cfg.xi:
        for n_P in cfg.n_P:
            key = ("phase", float(xi), int(n_P))
            cells.append((xi, n_P, {"m_delta": cfg.m_delta, "xi": xi, "key": key}))
    tasks = [(c, r) for c in cells for r in range(cfg.repeats)]

    def unit(task):
        (xi, n_P, skey), r = task
        return _transfer_unit(cfg, skey, n_P, cfg.n_Q, r)[0]

    with threadpool_limits(limits=1):
        risks = _run_tasks(unit, tasks, cfg.threads)

    result = StudyResult(study="phase")
    for i, (xi, n_P, _) in enumerate(cells):
        chunk = risks[i * cfg.repeats:(i + 1) * cfg.repeats]
        result.rows.append({
            "study": "phase", "filter": label, "m_P": cfg.m_P,
            "m_delta": cfg.m_delta, "xi": xi, "C": cfg.C, "n_P": n_P,
            "n_Q": cfg.n_Q, "repeat_count": cfg.repeats,
            "mean_risk": mean_risk(chunk), "seed_base": cfg.seed_base,
            "config_hash": chash,
            "xi_star": xi_star(n_P, cfg.n_Q, cfg.m_P, cfg.m_delta),
        })
    return result
