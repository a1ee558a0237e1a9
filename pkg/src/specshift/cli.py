"""Config-driven command line front end.

A run is described by one JSON document with a ``study`` discriminator and
study-specific fields; parsing is strict (unknown keys are rejected, every
numeric field is range-checked before any compute starts, and errors name
the offending field path).  Exit codes: 0 on success, 1 on numerical
failure, 2 on configuration failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import evaluate as _ev
from ._svg import line_chart
from .adaptive import AdaptiveConfig, adaptive_fit
from .data import dataset_from_text
from .errors import ConfigError, InputError, NumericalError
from .kernels import KernelSpec, gram
from .seeding import derive_seed
from .spectral import FilterSpec, filter_apply, krr_direct_solve, lambda_schedule, normalize_kind, predict, spectral_fit
from .transfer import TransformPair, rahtl_fit, transform_G, transform_g

STUDIES = ("rates", "adaptive-rates", "transfer", "phase", "fit", "selfcheck")


@dataclass(frozen=True)
class StudyConfig:
    """A validated study selector plus its normalized parameter mapping."""

    study: str
    params: dict


# --------------------------------------------------------------------------
# field parsers


def _want_int(v, path, minimum=None, odd=False):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError("expected an integer", path)
    if minimum is not None and v < minimum:
        raise ConfigError(f"must be >= {minimum}", path)
    if odd and v % 2 == 0:
        raise ConfigError("must be odd", path)
    return v


def _want_float(v, path, positive=False, nonnegative=False, unit_open=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError("expected a number", path)
    v = float(v)
    if not np.isfinite(v):
        raise ConfigError("must be finite", path)
    if positive and not v > 0:
        raise ConfigError("must be positive", path)
    if nonnegative and v < 0:
        raise ConfigError("must be >= 0", path)
    if unit_open and not 0.0 < v < 1.0:
        raise ConfigError("must lie strictly between 0 and 1", path)
    return v


def _want_bool(v, path):
    if not isinstance(v, bool):
        raise ConfigError("expected true or false", path)
    return v


def _want_str(v, path):
    if not isinstance(v, str) or not v:
        raise ConfigError("expected a nonempty string", path)
    return v


def _want_kind(v, path):
    try:
        return normalize_kind(_want_str(v, path))
    except InputError as exc:
        raise ConfigError(str(exc), path) from exc


def _listify(item):
    def parse(v, path):
        if not isinstance(v, list):
            return (item(v, path),)
        if not v:
            raise ConfigError("must be a nonempty list", path)
        return tuple(item(x, f"{path}[{i}]") for i, x in enumerate(v))
    return parse


# field name -> (parser, default); _REQUIRED marks fields without defaults
_REQUIRED = object()

_COMMON = {
    "seed_base": (lambda v, p: _want_int(v, p, minimum=0), 0),
    "threads": (lambda v, p: _want_int(v, p, minimum=1), 1),
    "out_dir": (_want_str, "results"),
}

_SIM_COMMON = {
    "noise_sd": (lambda v, p: _want_float(v, p, nonnegative=True), 0.5),
    "bandwidth": (lambda v, p: _want_float(v, p, positive=True), 0.2),
    "truth_bandwidth": (lambda v, p: _want_float(v, p, positive=True), 0.2),
    "n_grid": (lambda v, p: _want_int(v, p, minimum=17, odd=True), 2001),
    "n_test": (lambda v, p: _want_int(v, p, minimum=3, odd=True), 5001),
}

_CANDIDATES = (_listify(lambda v, p: _want_float(v, p, positive=True)),
               (1.0, 2.0, 3.0, 4.0, 5.0))
_SPLIT = (lambda v, p: _want_float(v, p, unit_open=True), 0.5)

_RATE_FIELDS = {
    **_COMMON, **_SIM_COMMON,
    "m": (lambda v, p: _want_float(v, p, positive=True), 2.0),
    "d": (lambda v, p: _want_int(v, p, minimum=1), 1),
    "filters": (_listify(_want_kind), ("krr",)),
    "ns": (_listify(lambda v, p: _want_int(v, p, minimum=4)),
           tuple(range(100, 1001, 100))),
    "repeats": (lambda v, p: _want_int(v, p, minimum=1), 20),
    "C_grid": (_listify(lambda v, p: _want_float(v, p, positive=True)),
               (0.25, 0.5, 1.0, 2.0)),
    "fixed_truth": (_want_bool, False),
}

_ADAPTIVE_RATE_FIELDS = {
    **_RATE_FIELDS,
    "candidates": _CANDIDATES,
    "split_fraction": _SPLIT,
}

_TRANSFER_FIELDS = {
    **_COMMON, **_SIM_COMMON,
    "m_P": (lambda v, p: _want_float(v, p, positive=True), 1.0),
    "m_delta": (_listify(lambda v, p: _want_float(v, p, positive=True)),
                (2.0, 3.0)),
    "xi": (_listify(lambda v, p: _want_float(v, p, positive=True)),
           (0.25, 0.5, 0.75, 1.0)),
    "n_Q": (_listify(lambda v, p: _want_int(v, p, minimum=4)),
            tuple(range(40, 151, 5))),
    "repeats": (lambda v, p: _want_int(v, p, minimum=1), 30),
    "C": (lambda v, p: _want_float(v, p, positive=True), 1.0),
    "candidates": _CANDIDATES,
    "split_fraction": _SPLIT,
    "pretrain_filter": (_want_kind, "gf"),
    "finetune_filter": (_want_kind, "krr"),
    "baseline_filter": (_want_kind, "krr"),
}

_PHASE_FIELDS = {
    **_COMMON, **_SIM_COMMON,
    "m_P": (lambda v, p: _want_float(v, p, positive=True), 1.0),
    "m_delta": (lambda v, p: _want_float(v, p, positive=True), 3.0),
    "n_Q": (lambda v, p: _want_int(v, p, minimum=4), 200),
    "n_P": (_listify(lambda v, p: _want_int(v, p, minimum=4)),
            (200, 600, 1000, 1500)),
    "xi": (_listify(lambda v, p: _want_float(v, p, positive=True)),
           (0.25, 0.5, 1.0, 4.0)),
    "repeats": (lambda v, p: _want_int(v, p, minimum=1), 30),
    "C": (lambda v, p: _want_float(v, p, positive=True), 1.0),
    "candidates": _CANDIDATES,
    "split_fraction": _SPLIT,
    "pretrain_filter": (_want_kind, "gf"),
    "finetune_filter": (_want_kind, "krr"),
}

_FIT_FIELDS = {
    **_COMMON,
    "data": (_want_str, _REQUIRED),
    "filter": (_want_kind, "krr"),
    "C": (lambda v, p: _want_float(v, p, positive=True), 1.0),
    "candidates": _CANDIDATES,
    "split_fraction": _SPLIT,
    "bandwidth": (lambda v, p: _want_float(v, p, positive=True), 0.2),
}

_SELFCHECK_FIELDS = dict(_COMMON)

_SCHEMAS = {
    "rates": _RATE_FIELDS,
    "adaptive-rates": _ADAPTIVE_RATE_FIELDS,
    "transfer": _TRANSFER_FIELDS,
    "phase": _PHASE_FIELDS,
    "fit": _FIT_FIELDS,
    "selfcheck": _SELFCHECK_FIELDS,
}


def parse_config(text: str) -> StudyConfig:
    """Parse and validate a JSON study document into a StudyConfig."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a JSON object")
    if "study" not in doc:
        raise ConfigError("missing required field", "study")
    study = doc["study"]
    if study not in _SCHEMAS:
        raise ConfigError(
            f"unknown study {study!r}; expected one of {', '.join(STUDIES)}",
            "study")
    schema = _SCHEMAS[study]
    params = {}
    for key, value in doc.items():
        if key == "study":
            continue
        if key not in schema:
            raise ConfigError(f"unknown config key for study {study!r}", key)
        parser, _ = schema[key]
        params[key] = parser(value, key)
    for key, (_, default) in schema.items():
        if key in params:
            continue
        if default is _REQUIRED:
            raise ConfigError("missing required field", key)
        params[key] = default
    return StudyConfig(study=study, params=params)


def serialize(config: StudyConfig) -> str:
    """Canonical JSON for a config: sorted keys, tuples as lists."""
    doc = {"study": config.study}
    for key, value in config.params.items():
        doc[key] = list(value) if isinstance(value, tuple) else value
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def config_digest(config: StudyConfig) -> str:
    return hashlib.sha256(serialize(config).encode("utf-8")).hexdigest()[:12]


# --------------------------------------------------------------------------
# dispatch


def _study_series(result):
    """Group result rows into [(label, [(x, y), ...])] for charting."""
    series = {}
    if result.study in ("rates", "adaptive-rates"):
        x_field = "n"
    elif result.study == "transfer":
        x_field = "n_Q"
    else:
        x_field = "n_P"
    for row in result.rows:
        if row.get("mean_risk") is None:
            continue
        if result.study in ("rates", "adaptive-rates"):
            label = f"{row['filter']} C={row['C']:g}"
        elif result.study == "transfer":
            label = f"{row['filter']} m_delta={row['m_delta']:g} xi={row['xi']:g}"
        else:
            label = f"xi={row['xi']:g}"
        series.setdefault(label, []).append((row[x_field], row["mean_risk"]))
    return [(label, pts) for label, pts in series.items()]


def _write_outputs(result, out_dir, xlog):
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{result.study}.csv")
    result.write_csv(csv_path)
    svg_path = os.path.join(out_dir, f"{result.study}.svg")
    xlabel = {"rates": "n", "adaptive-rates": "n",
              "transfer": "n_Q", "phase": "n_P"}[result.study]
    chart = line_chart(_study_series(result), f"{result.study} study",
                       xlabel, "mean excess risk", xlog=xlog, ylog=True)
    with open(svg_path, "w", encoding="utf-8") as fh:
        fh.write(chart)
    return csv_path, svg_path


def _run_rate(config: StudyConfig, adaptive: bool) -> int:
    params = {k: v for k, v in config.params.items() if k != "out_dir"}
    cfg = _ev.RateStudyConfig(adaptive=adaptive, **params)
    result = _ev.run_rate_study(cfg)
    csv_path, svg_path = _write_outputs(result, config.params["out_dir"], xlog=True)
    for f in cfg.filters:
        for C in cfg.C_grid:
            rf = result.rate_fits.get((f, float(C)))
            if rf is None:
                continue
            print(f"{result.study}: filter={f} C={C:g} slope={rf.slope:.4f} "
                  f"target={rf.theoretical_slope:.4f} r2={rf.r_squared:.4f}")
        if f in result.best_C:
            print(f"{result.study}: best C for {f}: {result.best_C[f]:g}")
    print(f"wrote {csv_path} and {svg_path}")
    return 0


def _run_transfer(config: StudyConfig) -> int:
    params = {k: v for k, v in config.params.items() if k != "out_dir"}
    cfg = _ev.TransferStudyConfig(**params)
    result = _ev.run_transfer_study(cfg)
    csv_path, svg_path = _write_outputs(result, config.params["out_dir"], xlog=True)
    for (m_d, xi), rf in result.rate_fits.items():
        print(f"transfer: m_delta={m_d:g} xi={xi:g} slope={rf.slope:.4f} "
              f"target={rf.theoretical_slope:.4f} r2={rf.r_squared:.4f}")
    print(f"wrote {csv_path} and {svg_path}")
    return 0


def _run_phase(config: StudyConfig) -> int:
    params = {k: v for k, v in config.params.items() if k != "out_dir"}
    cfg = _ev.PhaseStudyConfig(**params)
    result = _ev.run_phase_study(cfg)
    csv_path, svg_path = _write_outputs(result, config.params["out_dir"], xlog=False)
    by_xi = {}
    for row in result.rows:
        by_xi.setdefault(row["xi"], []).append((row["n_P"], row["mean_risk"]))
    for xi, pts in by_xi.items():
        pts.sort()
        ratio = pts[-1][1] / pts[0][1]
        print(f"phase: xi={xi:g} risk(n_P={pts[-1][0]}) / risk(n_P={pts[0][0]})"
              f" = {ratio:.4f}")
    print(f"wrote {csv_path} and {svg_path}")
    return 0


def _run_fit(config: StudyConfig) -> int:
    p = config.params
    try:
        with open(p["data"], "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(str(exc), "data") from exc
    data = dataset_from_text(text)
    kernel = KernelSpec.gaussian(p["bandwidth"])
    acfg = AdaptiveConfig(p["candidates"], p["C"], p["split_fraction"],
                          p["filter"])
    fit = adaptive_fit(data, kernel, acfg,
                       derive_seed(p["seed_base"], "fit-split"))
    grid = np.linspace(0.0, 1.0, 1001)
    preds = predict(fit.model, grid)
    os.makedirs(p["out_dir"], exist_ok=True)
    out_path = os.path.join(p["out_dir"], "fit.csv")
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# chosen_m={fit.chosen_m!r} chosen_lambda={fit.chosen_lambda!r}"
                 f" seed_base={p['seed_base']} config_hash={config_digest(config)}\n")
        fh.write("x,prediction\n")
        for x, y in zip(grid, preds):
            fh.write(f"{float(x)!r},{float(y)!r}\n")
    print(f"chosen m = {fit.chosen_m:g}, lambda = {fit.chosen_lambda:.6e}")
    print(f"wrote {out_path}")
    return 0


# --------------------------------------------------------------------------
# selfcheck


def _check_gram_psd():
    rng = np.random.default_rng(11)
    for kernel in (KernelSpec.gaussian(0.2), KernelSpec.matern(1.5, 0.2)):
        pts = rng.random((60, 2))
        eigs = np.linalg.eigvalsh(gram(pts, kernel).values)
        if eigs.min() < -1e-8 * eigs.max():
            raise AssertionError(f"Gram not PSD for {kernel.family}")


def _check_matern_closed_form():
    from .kernels import pairwise
    xs = np.linspace(0.0, 1.0, 41)
    r = np.abs(xs[:, None] - xs[None, :])
    h = 0.2
    closed = {
        0.5: np.exp(-r / h),
        1.5: (1 + np.sqrt(3) * r / h) * np.exp(-np.sqrt(3) * r / h),
        2.5: (1 + np.sqrt(5) * r / h + 5 * r**2 / (3 * h**2))
             * np.exp(-np.sqrt(5) * r / h),
    }
    for nu, expected in closed.items():
        got = pairwise(xs, xs, KernelSpec.matern(nu, h))
        rel = np.abs(got - expected) / np.maximum(np.abs(expected), 1e-300)
        if rel.max() > 1e-10:
            raise AssertionError(f"Matern nu={nu} deviates from closed form")


def _check_bessel_recurrence():
    from .kernels import bessel_k
    for nu in (0.3, 1.3, 2.6):
        for x in np.geomspace(0.05, 30, 12):
            lhs = bessel_k(nu + 1, x)
            rhs = bessel_k(nu - 1, x) + 2 * nu / x * bessel_k(nu, x)
            if abs(lhs - rhs) / abs(lhs) > 1e-8:
                raise AssertionError(f"recurrence fails at nu={nu}, x={x}")


def _check_filter_conditions():
    u = np.linspace(0.0, 1.0, 1000)
    betas = np.linspace(0.0, 1.0, 11)
    lams = np.geomspace(1e-6, 1e-1, 6)
    for kind in ("krr", "gf", "kpcr"):
        for lam in lams:
            phi = filter_apply(kind, lam, u)
            for beta in betas:
                sup = np.max(np.abs(u**beta * phi) * lam**(1 - beta))
                if sup > 1.0 + 1e-9:
                    raise AssertionError(
                        f"error condition fails for {kind} at lambda={lam}")
    for lam in lams:
        phi = filter_apply("krr", lam, u)
        for beta in betas:
            sup = np.max(np.abs(1 - phi * u) * u**beta * lam**(-beta))
            if sup > 1.0 + 1e-9:
                raise AssertionError(f"residual condition fails at lambda={lam}")


def _check_krr_equivalence():
    from .data import Dataset
    rng = np.random.default_rng(5)
    x = rng.random((80, 1))
    y = rng.standard_normal(80)
    data = Dataset(x=x, y=y)
    kernel = KernelSpec.gaussian(0.2)
    spec_model = spectral_fit(data, kernel, FilterSpec("krr", 1e-3))
    direct = krr_direct_solve(data, kernel, 1e-3)
    tx = np.linspace(0, 1, 101)
    diff = np.max(np.abs(predict(spec_model, tx) - predict(direct, tx)))
    if diff > 1e-8:
        raise AssertionError(f"spectral KRR deviates from direct solve: {diff}")


def _check_gf_continuity():
    for lam in (1e-3, 1e-1, 1.0):
        got = filter_apply("gf", lam, 1e-12)
        if abs(got - 1.0 / lam) > 1e-6 / lam:
            raise AssertionError(f"gradient-flow filter jumps near 0 at {lam}")


def _check_adaptive_optimality():
    from .data import Dataset
    from .simulate import gp_sample_path, make_regression_data
    truth = gp_sample_path(2.01, 0.2, 257, 7)
    data = make_regression_data(truth, 60, 0.5, 8)
    kernel = KernelSpec.gaussian(0.2)
    cfg = AdaptiveConfig((1.0, 2.0, 3.0), 1.0, 0.5, "krr")
    fit = adaptive_fit(data, kernel, cfg, 99)
    if fit.validation_mse[fit.chosen_index] != min(fit.validation_mse):
        raise AssertionError("chosen candidate is not the validation minimizer")
    again = adaptive_fit(data, kernel, cfg, 99)
    if not np.array_equal(fit.model.dual_coeffs, again.model.dual_coeffs):
        raise AssertionError("adaptive fit is not bitwise deterministic")


def _check_transform_round_trip():
    rng = np.random.default_rng(3)
    y = rng.uniform(-10, 10, 10_000)
    p = rng.uniform(-10, 10, 10_000)
    for pair in (TransformPair.offset(), TransformPair.affine(0.3, 0.7)):
        back = transform_G(pair, transform_g(pair, y, p), p)
        if np.max(np.abs(back - y) / np.maximum(np.abs(y), 1.0)) > 1e-12:
            raise AssertionError(f"round trip fails for {pair.kind}")


def _check_lipschitz_witness():
    rng = np.random.default_rng(4)
    for pair in (TransformPair.offset(), TransformPair.affine(0.4, 0.8)):
        a = rng.uniform(-10, 10, (10_000, 2))
        b = rng.uniform(-10, 10, (10_000, 2))
        lhs = np.abs(transform_G(pair, a[:, 0], a[:, 1])
                     - transform_G(pair, b[:, 0], b[:, 1]))
        rhs = pair.lipschitz_G * np.linalg.norm(a - b, axis=1)
        if np.any(lhs > rhs * (1 + 1e-12)):
            raise AssertionError(f"Lipschitz bound violated for {pair.kind}")


def _check_rahtl_determinism():
    from .simulate import make_shift_scenario, make_transfer_datasets
    scenario = make_shift_scenario(1.0, 3.0, 0.25, 80, 40, (21, 22),
                                   n_grid=257)
    pair = TransformPair.offset()
    source, target = make_transfer_datasets(scenario, pair, 23)
    kernel = KernelSpec.gaussian(0.2)
    cfg = AdaptiveConfig((1.0, 2.0, 3.0), 1.0, 0.5, "krr")
    one = rahtl_fit(source, target, kernel, pair, cfg, cfg, 31)
    two = rahtl_fit(source, target, kernel, pair, cfg, cfg, 31)
    same = (np.array_equal(one.source_model.dual_coeffs,
                           two.source_model.dual_coeffs)
            and np.array_equal(one.shift_model.dual_coeffs,
                               two.shift_model.dual_coeffs))
    if not same:
        raise AssertionError("transfer fit is not bitwise deterministic")


_SELFCHECKS = (
    ("kernels/gram-psd", _check_gram_psd),
    ("kernels/matern-closed-form", _check_matern_closed_form),
    ("kernels/bessel-recurrence", _check_bessel_recurrence),
    ("spectral/filter-conditions", _check_filter_conditions),
    ("spectral/krr-equivalence", _check_krr_equivalence),
    ("spectral/gradient-flow-continuity", _check_gf_continuity),
    ("adaptive/validation-optimality", _check_adaptive_optimality),
    ("transfer/round-trip", _check_transform_round_trip),
    ("transfer/lipschitz-witness", _check_lipschitz_witness),
    ("transfer/determinism", _check_rahtl_determinism),
)


def _run_selfcheck(config: StudyConfig) -> int:
    failures = 0
    for name, check in _SELFCHECKS:
        try:
            check()
        except Exception as exc:  # report every suite, then fail once
            failures += 1
            print(f"FAIL {name}: {exc}")
        else:
            print(f"PASS {name}")
    print(f"{len(_SELFCHECKS) - failures}/{len(_SELFCHECKS)} checks passed")
    return 1 if failures else 0


def run(config: StudyConfig) -> int:
    """Execute a parsed study config; returns the process exit code."""
    try:
        if config.study == "rates":
            return _run_rate(config, adaptive=False)
        if config.study == "adaptive-rates":
            return _run_rate(config, adaptive=True)
        if config.study == "transfer":
            return _run_transfer(config)
        if config.study == "phase":
            return _run_phase(config)
        if config.study == "fit":
            return _run_fit(config)
        return _run_selfcheck(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="specshift",
        description="Spectral-regression simulation studies and fits.")
    parser.add_argument("--config", required=True,
                        help="path to a JSON study document")
    parser.add_argument("--seed", type=int, default=None,
                        help="override seed_base")
    parser.add_argument("--threads", type=int, default=None,
                        help="override worker thread count")
    parser.add_argument("--out", default=None, help="override out_dir")
    args = parser.parse_args(argv)
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        config = parse_config(text)
        overrides = {}
        if args.seed is not None:
            overrides["seed_base"] = _want_int(args.seed, "--seed", minimum=0)
        if args.threads is not None:
            overrides["threads"] = _want_int(args.threads, "--threads",
                                             minimum=1)
        if args.out is not None:
            overrides["out_dir"] = _want_str(args.out, "--out")
        if overrides:
            config = StudyConfig(config.study, {**config.params, **overrides})
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
