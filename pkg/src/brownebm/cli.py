"""Command-line front end.

Every subcommand prints one ``key=value`` summary line on stdout. Exit codes:
0 success, 1 validation error (including bad usage), 2 I/O error. Outputs are
computed in full before any file is written.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import diffusion_forecast as dfc
from .ebm import ebm_energies, ebm_train, read_model, render_model, training_residual
from .markov_mle import SmoothedSeries, smooth_series
from .normality import sw_test_increments
from .ortho_basis import basis_rows, orthogonalize, segment_vectors
from .phase_classifier import (
    build_tree,
    extract_rules,
    parse_rules,
    render_rules,
    rule_for_energy,
    target_class_count,
)
from .series_io import SampleSeries, format_float, load_series, render_series

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _summary(**pairs) -> str:
    return " ".join(f"{k}={_fmt(v)}" for k, v in pairs.items())


def _positive(kind):
    def conv(text):
        value = kind(text)
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return conv


def _open_unit(text):
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return value


def _unit_floor(text):
    value = float(text)
    if not 0 <= value < 1:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1), got {text}")
    return value


def _feature_rows(series: SampleSeries) -> np.ndarray:
    return np.asarray(series.values)


# --- subcommands ---------------------------------------------------------------

def cmd_normtest(args):
    series = load_series(args.input)
    res = sw_test_increments(series, args.feature, args.alpha)
    return _summary(w=res.w, p=res.p_value, reject=res.reject_normality, n=res.n), {}


def cmd_smooth(args):
    series = load_series(args.input)
    sm = smooth_series(series, args.feature)
    out = sm.as_sample_series(series.feature_names[args.feature])
    return _summary(n=len(sm), first=float(sm.values[0]), last=float(sm.values[-1])), {
        args.output: render_series(out)
    }


def cmd_basis(args):
    series = load_series(args.input)
    if args.presmoothed:
        col = series.column(args.feature)
        sm = SmoothedSeries(series.times, col, len(series))
    else:
        sm = smooth_series(series, args.feature)
    basis = orthogonalize(segment_vectors(sm))
    lines = ["k,zt,zv,c,y,fourier,parity"]
    for k, zt, zv, c, y, f, parity in basis_rows(basis):
        lines.append(",".join([str(k)] + [format_float(v) for v in (zt, zv, c, y, f)] + [parity]))
    return _summary(
        s=len(basis),
        min_fourier=float(basis.fourier.min()),
        max_fourier=float(basis.fourier.max()),
    ), {args.output: "\n".join(lines) + "\n"}


def cmd_train(args):
    series = load_series(args.input)
    rows = _feature_rows(series)
    model = ebm_train(rows, args.layers, args.t0, args.alpha_cool, args.seed)
    return _summary(
        l=model.elm.L, d=model.elm.d, n=model.train_rows,
        log_z=model.log_z, residual=training_residual(model, rows),
    ), {args.model: render_model(model)}


def cmd_classify(args):
    series = load_series(args.input)
    model = read_model(args.model)
    rows = _feature_rows(series)
    k = target_class_count(series.n_features, args.k)
    tree = build_tree(rows, model, k, args.tau)
    rules = extract_rules(tree, rows)
    outputs = {args.rules: render_rules(rules)}
    if args.assign:
        labels = np.empty(len(series), dtype=int)
        for leaf in tree.leaves:
            labels[leaf.members] = leaf.class_id
        body = ["t,class_id"] + [f"{format_float(t)},{c}" for t, c in zip(series.times, labels)]
        outputs[args.assign] = "\n".join(body) + "\n"
    return _summary(leaves=tree.n_leaves, k=k, rows=len(series)), outputs


def cmd_rules_check(args):
    rules = parse_rules(Path(args.rules).read_text(encoding="utf-8"))
    if not rules:
        raise ValueError("rule file contains no rules")
    widths = {len(r.bits) for r in rules}
    if len(widths) != 1:
        raise ValueError(f"rules disagree on feature count: {sorted(widths)}")
    ids = [r.class_id for r in rules]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate class ids")
    ordered = sorted(rules, key=lambda r: r.e_lo)
    overlaps = sum(1 for a, b in zip(ordered, ordered[1:]) if b.e_lo <= a.e_hi)
    pairs = dict(rules=len(rules), s=widths.pop(), overlaps=overlaps)
    if (args.model is None) != (args.input is None):
        raise ValueError("--model and --in must be given together")
    if args.model is not None:
        model = read_model(args.model)
        series = load_series(args.input)
        energies = ebm_energies(model, _feature_rows(series))
        covered = sum(1 for e in energies if any(r.contains(e) for r in rules))
        classes = {rule_for_energy(rules, e).class_id for e in energies}
        pairs.update(rows=len(series), covered=covered, classes_used=len(classes))
    pairs["valid"] = overlaps == 0
    return _summary(**pairs), {}


def cmd_predict(args):
    series = load_series(args.input)
    sm = smooth_series(series, args.feature)
    sigma2 = dfc.fit_sigma2(sm)
    res = dfc.forecast(sm, args.horizon, sigma2)
    outputs = {}
    if args.paths:
        if not args.output:
            raise ValueError("--paths requires --out")
        steps = args.steps
        dt = args.horizon / steps
        paths = dfc.sample_paths(res.mean, sigma2, dt, steps, args.paths, args.seed)
        times = float(sm.times[-1]) + dt * np.arange(1, steps + 1)
        names = tuple(f"p{i + 1}" for i in range(args.paths))
        outputs[args.output] = render_series(SampleSeries(times, paths.T, names))
    return _summary(
        mean=res.mean, variance=res.variance, sigma2=sigma2, horizon=res.horizon,
        paths=args.paths, seed=args.seed,
    ), outputs


def cmd_simulate(args):
    if args.exit_a is not None or args.exit_b is not None:
        if args.exit_a is None or args.exit_b is None:
            raise ValueError("--exit-a and --exit-b must be given together")
        dist = dfc.TwoPointDist(args.exit_a, args.exit_b)
        dt = args.dt if args.dt is not None else 1e-4
        mean_t, hit_b = dfc.skorokhod_exit(dist, dt, args.trials, args.seed)
        return _summary(
            mean_exit=mean_t, sigma2=dist.variance, hit_b=hit_b, p_b=dist.p_b,
            trials=args.trials, dt=dt, seed=args.seed,
        ), {}
    if not args.output:
        raise ValueError("simulate needs --out (or --exit-a/--exit-b)")
    dt = args.dt if args.dt is not None else 1.0
    series = dfc.simulate_brownian(args.steps, dt, args.seed)
    return _summary(n=len(series), dt=dt, seed=args.seed, last=float(series.values[-1, 0])), {
        args.output: render_series(series)
    }


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="brownebm", description="Brownian-motion modeling of sensor series.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.set_defaults(func=func)
        return p

    def series_in(p):
        p.add_argument("--in", dest="input", required=True, help="input series CSV (t,v1,...)")

    def feature(p):
        p.add_argument("--feature", type=int, default=0, help="0-based value column (default 0)")

    p = add("normtest", cmd_normtest, "Shapiro-Wilk test of the step differences")
    series_in(p)
    feature(p)
    p.add_argument("--alpha", type=_open_unit, default=0.05, help="significance level")

    p = add("smooth", cmd_smooth, "pairwise-average smoothing")
    series_in(p)
    feature(p)
    p.add_argument("--out", dest="output", required=True)

    p = add("basis", cmd_basis, "segment vectors, scale constants and rescaling factors")
    series_in(p)
    feature(p)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--presmoothed", action="store_true", help="input is already smoothed")

    p = add("train", cmd_train, "train an energy model on all value columns")
    series_in(p)
    p.add_argument("--model", required=True, help="output model file")
    p.add_argument("--layers", "--L", dest="layers", type=_positive(int), default=64)
    p.add_argument("--t0", type=_positive(float), default=1.0, help="initial temperature")
    p.add_argument("--alpha-cool", type=_open_unit, default=0.95, help="cooling factor")
    p.add_argument("--seed", type=int, default=0)

    p = add("classify", cmd_classify, "build the energy-gap tree and write association rules")
    series_in(p)
    p.add_argument("--model", required=True)
    p.add_argument("--rules", required=True, help="output rule file")
    p.add_argument("--k", "--K", dest="k", type=_positive(int), default=None,
                   help="target leaf count (default 2^s)")
    p.add_argument("--tau", type=_unit_floor, default=0.0, help="relative gap floor")
    p.add_argument("--assign", default=None, help="optional per-row class CSV")

    p = add("predict", cmd_predict, "martingale forecast with optional sampled paths")
    series_in(p)
    feature(p)
    p.add_argument("--horizon", type=_positive(float), required=True)
    p.add_argument("--paths", type=int, default=0, help="number of sampled paths")
    p.add_argument("--steps", type=_positive(int), default=10)
    p.add_argument("--out", dest="output", default=None, help="path CSV (with --paths)")
    p.add_argument("--seed", type=int, default=0)

    p = add("simulate", cmd_simulate, "Brownian path, or exit times of (a, b)")
    p.add_argument("--steps", type=_positive(int), default=200)
    p.add_argument("--dt", type=_positive(float), default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", dest="output", default=None)
    p.add_argument("--exit-a", type=float, default=None)
    p.add_argument("--exit-b", type=float, default=None)
    p.add_argument("--trials", type=_positive(int), default=10_000)

    p = add("rules-check", cmd_rules_check, "validate a rule file, optionally against data")
    p.add_argument("--rules", required=True)
    p.add_argument("--model", default=None)
    p.add_argument("--in", dest="input", default=None)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    if getattr(args, "paths", 0) and args.paths < 0:
        print("error: --paths must be >= 0", file=sys.stderr)
        return EXIT_INVALID
    try:
        line, outputs = args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        for path, text in outputs.items():
            Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(line)
    return EXIT_OK


def main():
    sys.exit(run())
