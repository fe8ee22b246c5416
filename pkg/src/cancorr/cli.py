"""Command-line driver: data generation, training, projection, scoring.

Subcommands: ``synth``, ``train``, ``project``, ``eval``, ``sweep-l``,
``cv``.  Every key accepted in a config file (flat ``key = value`` lines
under arbitrary ``[section]`` headers) has a CLI flag of the same name;
precedence is CLI > file > built-in default.  Machine-readable results
are written as one ``key=value`` per line (UTF-8, LF) with floats at 17
significant digits, so a fixed seed reproduces byte-identical output;
wall-clock time appears only in the human-readable table.  Exit codes:
0 success, 1 invalid input or file format, 2 numerical failure.
"""

import argparse
import configparser
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import cca, datagen, evaluation, kcca, kernels
from .errors import CancorrError, InvalidInput, NumericalFailure
from .io import load_dense, save_dense
from .matops import center_columns

LINEAR_METHODS = ("cca", "scca")
KERNEL_METHODS = ("kcca", "rkcca", "skcca")
METHODS = LINEAR_METHODS + KERNEL_METHODS


@dataclass
class ExperimentConfig:
    """Everything one experiment needs; see module docstring for sources."""

    method: str
    x: str
    y: str | None = None
    labels: str | None = None
    x_test: str | None = None
    y_test: str | None = None
    labels_test: str | None = None
    kernel_x: str = "linear"
    kernel_y: str = "linear"
    sigma: str = "max"
    l: str = "1"
    lam: str | None = None
    gamma_x: float | None = None
    gamma_y: float | None = None
    rho: float | None = None
    paired: bool = False
    seed: int = 0
    out: str = "."

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidInput(f"method must be one of {METHODS}, got {self.method!r}")
        if (self.y is None) == (self.labels is None):
            raise InvalidInput("exactly one of --y and --labels is required")
        sources = {
            "cca": (),
            "kcca": (),
            "scca": ("lam",),
            "rkcca": ("rho",),
            "skcca": ("gamma_x", "gamma_y"),
        }[self.method]
        for name in ("lam", "rho", "gamma_x", "gamma_y"):
            have = getattr(self, name) is not None
            if have != (name in sources):
                raise InvalidInput(
                    f"method {self.method} requires exactly the regularizers "
                    f"{sources or '()'}; {name} mismatch"
                )


@dataclass
class ResultRecord:
    """Mirrors one row of the reporting tables."""

    method: str
    l: int
    corr_first: float
    corr_sum: float
    aroc: float | None
    accuracy: float | None
    sparsity_x: float
    sparsity_y: float
    err_x: float
    err_y: float
    parameters: dict = field(default_factory=dict)
    wall_seconds: float = 0.0

    def machine_lines(self):
        """Deterministic key=value lines; excludes wall-clock time."""
        lines = [f"method={self.method}", f"l={self.l}"]
        for key in ("corr_first", "corr_sum", "aroc", "accuracy",
                    "sparsity_x", "sparsity_y", "err_x", "err_y"):
            value = getattr(self, key)
            if value is not None:
                lines.append(f"{key}={value:.17g}")
        for key in sorted(self.parameters):
            lines.append(f"param_{key}={self.parameters[key]}")
        return lines

    def human_table(self):
        def fmt(v):
            return "-" if v is None else f"{v:.4f}"

        header = (
            "method      l  corr_sum   aroc     accuracy sparsity        "
            "err_x      err_y      time(s)"
        )
        row = (
            f"{self.method:<10}{self.l:>3}  {fmt(self.corr_sum):<9}  "
            f"{fmt(self.aroc):<7}  {fmt(self.accuracy):<8} "
            f"({self.sparsity_x:.4f}, {self.sparsity_y:.4f}) "
            f"{self.err_x:<10.4g} {self.err_y:<10.4g} {self.wall_seconds:.2f}"
        )
        return header + "\n" + row + "\n"


def _parse_kernel(name, sigma_opt, data):
    name = (name or "linear").lower()
    if name == "linear":
        return kernels.KernelSpec.linear()
    if name.startswith("poly"):
        _, _, params = name.partition(":")
        parts = params.split(",")
        if len(parts) != 3:
            raise InvalidInput("polynomial kernel needs 'poly:gamma1,gamma2,degree'")
        g1, g2, deg = (float(p) for p in parts)
        return kernels.KernelSpec.polynomial(g1, g2, deg)
    if name == "gaussian":
        if sigma_opt in ("max", "min"):
            sigma = kernels.default_sigma(data, sigma_opt)
        else:
            sigma = float(sigma_opt)
        return kernels.KernelSpec.gaussian(sigma)
    raise InvalidInput(f"unknown kernel {name!r}")


def _parse_lambdas(text, l):
    values = [float(p) for p in str(text).split(",")]
    if len(values) == 1:
        return np.full(l, values[0])
    if len(values) != l:
        raise InvalidInput(f"need 1 or {l} lambda values, got {len(values)}")
    return np.asarray(values)


def _resolve_l(requested, available):
    if str(requested).lower() == "all":
        return available
    l = int(requested)
    if not 1 <= l <= available:
        raise InvalidInput(f"l must lie in [1, {available}], got {l}")
    return l


def _load_views(config):
    x = load_dense(config.x)
    if config.labels is not None:
        labels = load_dense(config.labels).ravel().astype(int)
        y = datagen.labels_to_indicator(labels)
    else:
        labels = None
        y = load_dense(config.y)
    return x, y, labels


def _load_test_views(config):
    if config.x_test is None:
        return None, None, None
    x_t = load_dense(config.x_test)
    labels_t = None
    y_t = None
    if config.labels_test is not None:
        labels_t = load_dense(config.labels_test).ravel().astype(int)
    elif config.y_test is not None:
        y_t = load_dense(config.y_test)
    return x_t, y_t, labels_t


def run(config, sweep=False, score="corr"):
    """Train, project, and score one experiment; write all artifacts.

    Returns the :class:`ResultRecord`.  With ``sweep=True`` an extra
    two-column CSV scores every direction count from 1 to the trained l.
    Files are written only after all computation has finished.
    """
    t0 = time.perf_counter()
    x, y, labels = _load_views(config)
    x_t, y_t, labels_t = _load_test_views(config)
    outputs = []
    meta = {"method": config.method, "seed": config.seed}
    params = {"seed": config.seed}

    if config.method in LINEAR_METHODS:
        f = cca.factorize(x, y)
        l = _resolve_l(config.l, f.m)
        if config.method == "cca":
            model = cca.cca_exact(f, l)
        else:
            lams = _parse_lambdas(config.lam, l)
            model = cca.scca_ls(x, y, l, lams, lams)
            params["lambda"] = ",".join(f"{v:.17g}" for v in lams)
        px, py = cca.project(model, x, y)
        px_t = py_t = None
        if x_t is not None:
            px_t, py_t = cca.project(model, x_t, y_t if y_t is not None else None)
        err_x = cca.orth_violation(model.wx, f.x_c, l)
        err_y = cca.orth_violation(model.wy, f.y_c, l)
        wx, wy = model.wx, model.wy
        outputs.append(("wx.csv", wx))
        outputs.append(("wy.csv", wy))
        outputs.append(("mean_x.csv", model.mean_x[None, :]))
        outputs.append(("mean_y.csv", model.mean_y[None, :]))
    else:
        spec_x = _parse_kernel(config.kernel_x, config.sigma, x)
        spec_y = _parse_kernel(config.kernel_y, config.sigma, y)
        kx = kernels.center_train(kernels.gram(spec_x, x))
        ky = kernels.center_train(kernels.gram(spec_y, y))
        f = kcca.kcca_factorize(kx, ky)
        l = _resolve_l(config.l, f.m_hat)
        if config.method == "kcca":
            model = kcca.kcca_exact(f, l)
        elif config.method == "rkcca":
            model = kcca.rkcca(kx, ky, l, config.rho, config.rho, factorization=f)
            params["rho"] = f"{config.rho:.17g}"
        else:
            model = kcca.skcca(
                kx, ky, l, config.gamma_x, config.gamma_y, factorization=f
            )
            params["gamma_x"] = f"{config.gamma_x:.17g}"
            params["gamma_y"] = f"{config.gamma_y:.17g}"
        px = model.dual_x.T @ kx.values
        py = model.dual_y.T @ ky.values
        px_t = py_t = None
        if x_t is not None:
            px_t = kcca.kcca_project(model, x_t, view="x")
            if y_t is not None:
                py_t = kcca.kcca_project(model, y_t, view="y")
        err_x = kcca.dual_orth_violation(model.dual_x, kx, l)
        err_y = kcca.dual_orth_violation(model.dual_y, ky, l)
        wx, wy = model.dual_x, model.dual_y
        meta["kernel_x"] = config.kernel_x
        meta["kernel_y"] = config.kernel_y
        meta["sigma_x"] = f"{spec_x.sigma:.17g}" if spec_x.sigma is not None else ""
        meta["sigma_y"] = f"{spec_y.sigma:.17g}" if spec_y.sigma is not None else ""
        outputs.append(("dual_x.csv", wx))
        outputs.append(("dual_y.csv", wy))
        outputs.append(("train_x.csv", x))
        outputs.append(("train_y.csv", y))

    train_corr = evaluation.pearson_rows(px, py)
    corr_first = float(train_corr[0])
    scored_px, scored_py = (px_t, py_t) if px_t is not None and py_t is not None else (px, py)
    corr_total = evaluation.corr_sum(scored_px, scored_py)

    aroc_value = None
    accuracy = None
    if labels is not None and labels_t is not None and px_t is not None:
        predicted = evaluation.knn1_classify(px, labels, px_t)
        accuracy = float(np.mean(predicted == labels_t))
    elif config.paired and px_t is not None and py_t is not None:
        pairs = np.arange(px_t.shape[1])
        aroc_value = evaluation.retrieval_score(px_t, py_t, pairs).mean_aroc

    record = ResultRecord(
        method=config.method,
        l=l,
        corr_first=corr_first,
        corr_sum=corr_total,
        aroc=aroc_value,
        accuracy=accuracy,
        sparsity_x=evaluation.sparsity(wx),
        sparsity_y=evaluation.sparsity(wy),
        err_x=err_x,
        err_y=err_y,
        parameters=params,
        wall_seconds=time.perf_counter() - t0,
    )

    meta["l"] = l
    os.makedirs(config.out, exist_ok=True)
    for name, matrix in outputs:
        save_dense(os.path.join(config.out, name), matrix)
    _write_lines(os.path.join(config.out, "model.txt"),
                 [f"{k}={v}" for k, v in meta.items()])
    _write_lines(os.path.join(config.out, "results.txt"), record.machine_lines())
    with open(os.path.join(config.out, "results_table.txt"), "w",
              encoding="utf-8", newline="\n") as fh:
        fh.write(record.human_table())
    save_dense(os.path.join(config.out, "scatter.csv"), np.vstack([px[0], py[0]]).T)
    if sweep:
        rows = []
        for l_used in range(1, l + 1):
            if score == "aroc" and px_t is not None and py_t is not None:
                pairs = np.arange(px_t.shape[1])
                val = evaluation.retrieval_score(
                    px_t[:l_used], py_t[:l_used], pairs
                ).mean_aroc
            else:
                val = evaluation.corr_sum(scored_px[:l_used], scored_py[:l_used])
            rows.append((l_used, val))
        save_dense(os.path.join(config.out, "sweep.csv"), np.asarray(rows, dtype=float))
    return record


def _write_lines(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def _cmd_synth(args):
    out = args.out
    os.makedirs(out, exist_ok=True)
    total = args.n + args.holdout
    if args.kind == "nonlinear":
        x, y = datagen.synth_nonlinear(total, args.noise, args.seed)
        pairs = None
    else:
        x, y, pairs = datagen.synth_paired_topics(
            total, args.d1, args.d2, args.topics, args.noise, args.seed
        )
    save_dense(os.path.join(out, "x.csv"), x[:, : args.n])
    save_dense(os.path.join(out, "y.csv"), y[:, : args.n])
    if args.holdout:
        save_dense(os.path.join(out, "x_test.csv"), x[:, args.n :])
        save_dense(os.path.join(out, "y_test.csv"), y[:, args.n :])
    if pairs is not None:
        save_dense(os.path.join(out, "pairs.csv"), pairs[None, : args.n])
    return 0


def _config_from_args(args):
    file_values = {}
    if getattr(args, "config", None):
        parser = configparser.ConfigParser()
        with open(args.config, "r", encoding="utf-8") as fh:
            parser.read_string("[_default]\n" + fh.read())
        for section in parser.sections():
            file_values.update(dict(parser.items(section)))
    defaults = {
        "method": "cca", "kernel_x": "linear", "kernel_y": "linear",
        "sigma": "max", "l": "1", "seed": 0, "out": ".", "paired": False,
    }
    fields = [
        "method", "x", "y", "labels", "x_test", "y_test", "labels_test",
        "kernel_x", "kernel_y", "sigma", "l", "lam", "gamma_x", "gamma_y",
        "rho", "paired", "seed", "out",
    ]
    values = {}
    for name in fields:
        cli_value = getattr(args, name, None)
        if cli_value is not None:
            values[name] = cli_value
        elif name in file_values:
            values[name] = file_values[name]
        elif name in defaults:
            values[name] = defaults[name]
    for name in ("gamma_x", "gamma_y", "rho"):
        if name in values and values[name] is not None:
            values[name] = float(values[name])
    values["seed"] = int(values["seed"])
    values["paired"] = values["paired"] in (True, "true", "1", "yes")
    return ExperimentConfig(**values)


def _cmd_train(args):
    record = run(_config_from_args(args))
    sys.stdout.write(record.human_table())
    return 0


def _cmd_sweep(args):
    config = _config_from_args(args)
    record = run(config, sweep=True, score=args.score)
    sys.stdout.write(record.human_table())
    return 0


def _load_model(model_dir):
    meta = {}
    with open(os.path.join(model_dir, "model.txt"), "r", encoding="utf-8") as fh:
        for line in fh:
            key, _, value = line.strip().partition("=")
            meta[key] = value
    method = meta["method"]
    if method in LINEAR_METHODS:
        model = cca.CcaModel(
            wx=load_dense(os.path.join(model_dir, "wx.csv")),
            wy=load_dense(os.path.join(model_dir, "wy.csv")),
            correlations=np.zeros(int(meta["l"])),
            l=int(meta["l"]),
            mean_x=load_dense(os.path.join(model_dir, "mean_x.csv")).ravel(),
            mean_y=load_dense(os.path.join(model_dir, "mean_y.csv")).ravel(),
        )
        return method, model
    train_x = load_dense(os.path.join(model_dir, "train_x.csv"))
    train_y = load_dense(os.path.join(model_dir, "train_y.csv"))
    spec_x = _parse_kernel(meta["kernel_x"], meta.get("sigma_x") or "max", train_x)
    spec_y = _parse_kernel(meta["kernel_y"], meta.get("sigma_y") or "max", train_y)
    kx = kernels.center_train(kernels.gram(spec_x, train_x))
    ky = kernels.center_train(kernels.gram(spec_y, train_y))
    model = kcca.KccaModel(
        dual_x=load_dense(os.path.join(model_dir, "dual_x.csv")),
        dual_y=load_dense(os.path.join(model_dir, "dual_y.csv")),
        correlations=np.zeros(int(meta["l"])),
        l=int(meta["l"]),
        kernel_x=spec_x,
        kernel_y=spec_y,
        gram_x=kx,
        gram_y=ky,
        variant="loaded",
    )
    return method, model


def _cmd_project(args):
    method, model = _load_model(args.model)
    x_new = load_dense(args.x)
    os.makedirs(args.out, exist_ok=True)
    if method in LINEAR_METHODS:
        px, py = cca.project(model, x_new, load_dense(args.y) if args.y else None)
    else:
        px = kcca.kcca_project(model, x_new, view="x")
        py = (
            kcca.kcca_project(model, load_dense(args.y), view="y")
            if args.y
            else None
        )
    save_dense(os.path.join(args.out, "px.csv"), px)
    if py is not None:
        save_dense(os.path.join(args.out, "py.csv"), py)
    return 0


def _cmd_eval(args):
    method, model = _load_model(args.model)
    x_new = load_dense(args.x)
    y_new = load_dense(args.y)
    if method in LINEAR_METHODS:
        px, py = cca.project(model, x_new, y_new)
    else:
        px = kcca.kcca_project(model, x_new, view="x")
        py = kcca.kcca_project(model, y_new, view="y")
    lines = [f"corr_sum={evaluation.corr_sum(px, py):.17g}"]
    if args.paired:
        pairs = np.arange(px.shape[1])
        lines.append(
            f"aroc={evaluation.retrieval_score(px, py, pairs).mean_aroc:.17g}"
        )
    os.makedirs(args.out, exist_ok=True)
    _write_lines(os.path.join(args.out, "eval.txt"), lines)
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _cmd_cv(args):
    x = load_dense(args.x)
    y = load_dense(args.y)
    grid = [float(p) for p in args.grid.split(",")]
    l = int(args.l or 1)

    def objective(x_tr, y_tr, x_te, y_te, candidate):
        if args.method == "scca":
            model = cca.scca_ls(x_tr, y_tr, l, candidate, candidate)
            px, py = cca.project(model, x_te, y_te)
        else:
            kx = kernels.center_train(
                kernels.gram(_parse_kernel(args.kernel_x, args.sigma, x_tr), x_tr)
            )
            ky = kernels.center_train(
                kernels.gram(_parse_kernel(args.kernel_y, args.sigma, y_tr), y_tr)
            )
            model = kcca.rkcca(kx, ky, l, candidate, candidate)
            px = kcca.kcca_project(model, x_te, view="x")
            py = kcca.kcca_project(model, y_te, view="y")
        return evaluation.corr_sum(px, py)

    outcome = evaluation.kfold_cv(x, y, grid, args.folds, objective, args.seed)
    lines = [f"grid={','.join(f'{g:.17g}' for g in outcome.grid)}"]
    for ci, cand in enumerate(outcome.grid):
        scores = ",".join(f"{s:.17g}" for s in outcome.fold_scores[ci])
        lines.append(f"fold_scores_{cand:.17g}={scores}")
    lines.append(f"selected={outcome.selected:.17g}")
    os.makedirs(args.out, exist_ok=True)
    _write_lines(os.path.join(args.out, "cv.txt"), lines)
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _add_experiment_flags(sub):
    sub.add_argument("--method", choices=METHODS)
    sub.add_argument("--x")
    sub.add_argument("--y")
    sub.add_argument("--labels")
    sub.add_argument("--x-test", dest="x_test")
    sub.add_argument("--y-test", dest="y_test")
    sub.add_argument("--labels-test", dest="labels_test")
    sub.add_argument("--kernel-x", dest="kernel_x")
    sub.add_argument("--kernel-y", dest="kernel_y")
    sub.add_argument("--sigma")
    sub.add_argument("--l")
    sub.add_argument("--lambda", dest="lam")
    sub.add_argument("--gamma-x", dest="gamma_x", type=float)
    sub.add_argument("--gamma-y", dest="gamma_y", type=float)
    sub.add_argument("--rho", type=float)
    sub.add_argument("--paired", action="store_const", const=True, default=None)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--out")
    sub.add_argument("--config")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cancorr",
        description="Sparse (kernel) canonical correlation analysis experiments",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    synth = subs.add_parser("synth", help="generate synthetic paired views")
    synth.add_argument("--kind", choices=("nonlinear", "topics"), default="nonlinear")
    synth.add_argument("--n", type=int, default=500)
    synth.add_argument("--noise", type=float, default=0.3)
    synth.add_argument("--d1", type=int, default=100)
    synth.add_argument("--d2", type=int, default=80)
    synth.add_argument("--topics", type=int, default=10)
    synth.add_argument("--holdout", type=int, default=0)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", default=".")
    synth.set_defaults(func=_cmd_synth)

    train = subs.add_parser("train", help="train a model and score it")
    _add_experiment_flags(train)
    train.set_defaults(func=_cmd_train)

    sweep = subs.add_parser("sweep-l", help="score every direction count")
    _add_experiment_flags(sweep)
    sweep.add_argument("--score", choices=("corr", "aroc"), default="corr")
    sweep.set_defaults(func=_cmd_sweep)

    project = subs.add_parser("project", help="project new data with a model")
    project.add_argument("--model", required=True)
    project.add_argument("--x", required=True)
    project.add_argument("--y")
    project.add_argument("--out", default=".")
    project.set_defaults(func=_cmd_project)

    evaluate = subs.add_parser("eval", help="score a model on held-out data")
    evaluate.add_argument("--model", required=True)
    evaluate.add_argument("--x", required=True)
    evaluate.add_argument("--y", required=True)
    evaluate.add_argument("--paired", action="store_true")
    evaluate.add_argument("--out", default=".")
    evaluate.set_defaults(func=_cmd_eval)

    cv = subs.add_parser("cv", help="k-fold cross-validation over a grid")
    cv.add_argument("--method", choices=("scca", "rkcca"), required=True)
    cv.add_argument("--x", required=True)
    cv.add_argument("--y", required=True)
    cv.add_argument("--grid", required=True)
    cv.add_argument("--folds", type=int, default=5)
    cv.add_argument("--l")
    cv.add_argument("--kernel-x", dest="kernel_x", default="linear")
    cv.add_argument("--kernel-y", dest="kernel_y", default="linear")
    cv.add_argument("--sigma", default="max")
    cv.add_argument("--seed", type=int, default=0)
    cv.add_argument("--out", default=".")
    cv.set_defaults(func=_cmd_cv)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except CancorrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
