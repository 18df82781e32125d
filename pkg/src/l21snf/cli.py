"""Benchmark harness: generate matrices, fit, sweep ranks, pack/unpack images.

Every command is deterministic given its flags; all randomness flows
through the seed, and CSV floats are written in round-trip form, so a rerun
with identical flags produces byte-identical CSV outputs. Wall times are
printed to stdout only, never written into the CSVs.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .baselines import PCA, SemiNMF
from .io import load_config, load_matrix, save_history, save_matrix, save_summary
from .images import load_meta, pack_images, save_meta, unpack_images
from .linalg import NotPositiveDefiniteError, make_rng, uniform_matrix
from .solver import L21SNF, NumericalError
from .tuning import search_alpha

__all__ = ["main"]

ALGOS = ("l21snf", "snf", "pca")
INITS = ("kmeans", "random")
ORDERS = ("gauss-seidel", "jacobi")


class UsageError(Exception):
    pass


def _algo(value):
    if value not in ALGOS:
        raise UsageError(f"--algo must be one of {', '.join(ALGOS)}; got {value!r}")
    return value


def _algo_list(value):
    algos = [v.strip() for v in value.split(",") if v.strip()]
    if not algos:
        raise UsageError("--algo list is empty")
    for a in algos:
        _algo(a)
    return algos


def _rank_list(value):
    try:
        ranks = [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--ranks must be a comma list of integers, got {value!r}")
    if not ranks:
        raise UsageError("--ranks list is empty")
    return ranks


def _choice(name, options):
    def convert(value):
        if value not in options:
            raise UsageError(
                f"--{name} must be one of {', '.join(options)}; got {value!r}"
            )
        return value

    return convert


CONVERTERS = {
    "rows": int,
    "cols": int,
    "low": float,
    "high": float,
    "seed": int,
    "rank": int,
    "ranks": _rank_list,
    "iters": int,
    "alpha": str,
    "alpha_trials": int,
    "algo": str,
    "init": _choice("init", INITS),
    "update_order": _choice("update-order", ORDERS),
    "eps_residual": float,
    "eps_denominator": float,
    "repeats": int,
    "x": str,
    "out_dir": str,
    "dir": str,
    "meta": str,
}

DEFAULTS = {
    "low": -20.0,
    "high": 20.0,
    "seed": 0,
    "iters": 100,
    "alpha": "0",
    "alpha_trials": 10,
    "init": "kmeans",
    "update_order": "gauss-seidel",
    "eps_residual": 1e-8,
    "eps_denominator": 1e-12,
    "repeats": 5,
}


def _resolve(args, keys):
    """Merge CLI flags, config-file values, and defaults (in that order)."""
    config = {}
    if args.config is not None:
        try:
            config = load_config(args.config)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
    resolved = {}
    for key in keys:
        value = getattr(args, key, None)
        if value is None and key in config:
            value = CONVERTERS[key](config[key])
        if value is None:
            value = DEFAULTS.get(key)
        if value is None:
            raise UsageError(f"missing required option --{key.replace('_', '-')}")
        resolved[key] = value
    return resolved


def _add(parser, *names, **kwargs):
    for name in names:
        parser.add_argument(name, default=None, **kwargs)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="l21snf",
        description="Robust mixed-sign matrix compression benchmark harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a uniform random matrix CSV")
    _add(gen, "--rows", type=int)
    _add(gen, "--cols", type=int)
    _add(gen, "--low", type=float)
    _add(gen, "--high", type=float)
    _add(gen, "--seed", type=int)
    _add(gen, "--x", help="output matrix CSV path")
    _add(gen, "--config")

    fit = sub.add_parser("fit", help="factorize a matrix and write factors + losses")
    _add(fit, "--x", help="input matrix CSV path")
    _add(fit, "--algo", type=_algo)
    _add(fit, "--rank", type=int)
    _add(fit, "--iters", type=int)
    _add(fit, "--alpha", help="ridge weight, or 'search' for random search")
    _add(fit, "--alpha-trials", dest="alpha_trials", type=int)
    _add(fit, "--init", type=_choice("init", INITS))
    _add(fit, "--update-order", dest="update_order", type=_choice("update-order", ORDERS))
    _add(fit, "--eps-residual", dest="eps_residual", type=float)
    _add(fit, "--eps-denominator", dest="eps_denominator", type=float)
    _add(fit, "--seed", type=int)
    _add(fit, "--out-dir", dest="out_dir")
    _add(fit, "--config")

    sweep = sub.add_parser("sweep", help="fit a grid of ranks x algorithms x seeds")
    _add(sweep, "--x")
    _add(sweep, "--algo", type=_algo_list, help="comma list, e.g. l21snf,snf")
    _add(sweep, "--ranks", type=_rank_list, help="comma list, e.g. 64,32,16,8")
    _add(sweep, "--iters", type=int)
    _add(sweep, "--alpha")
    _add(sweep, "--alpha-trials", dest="alpha_trials", type=int)
    _add(sweep, "--init", type=_choice("init", INITS))
    _add(sweep, "--update-order", dest="update_order", type=_choice("update-order", ORDERS))
    _add(sweep, "--eps-residual", dest="eps_residual", type=float)
    _add(sweep, "--eps-denominator", dest="eps_denominator", type=float)
    _add(sweep, "--seed", type=int, help="base seed; repeats use seed..seed+repeats-1")
    _add(sweep, "--repeats", type=int)
    _add(sweep, "--out-dir", dest="out_dir")
    _add(sweep, "--config")

    images = sub.add_parser("images", help="PGM batch packing")
    imgsub = images.add_subparsers(dest="images_command", required=True)

    pack = imgsub.add_parser("pack", help="pack a directory of PGMs into a matrix CSV")
    _add(pack, "--dir", help="directory of equal-sized grayscale PGM images")
    _add(pack, "--x", help="output matrix CSV path")
    _add(pack, "--meta", help="output meta path")
    _add(pack, "--config")

    unpack = imgsub.add_parser("unpack", help="write matrix columns back to PGM files")
    _add(unpack, "--x", help="input matrix CSV path")
    _add(unpack, "--meta", help="input meta path")
    _add(unpack, "--out-dir", dest="out_dir")
    _add(unpack, "--config")

    return parser


def _resolve_alpha(spec, algo):
    """The ridge weight for a run: a float, or None meaning 'search'."""
    if algo != "l21snf":
        return 0.0
    if spec == "search":
        return None
    try:
        alpha = float(spec)
    except ValueError:
        raise UsageError(f"--alpha must be a number or 'search', got {spec!r}")
    if alpha < 0:
        raise UsageError(f"--alpha must be >= 0, got {alpha}")
    return alpha


def run_single(X, algo, rank, iters, alpha, alpha_trials, init, update_order,
               eps_residual, eps_denominator, seed):
    """Fit one algorithm at one rank; shared by `fit` and each `sweep` cell.

    ``alpha=None`` triggers a random search for the l21snf ridge weight.
    Returns ``(model, resolved_alpha, search_result)``.
    """
    start = time.perf_counter()
    search_result = None
    if algo == "pca":
        model = PCA(rank=rank).fit(X)
        resolved = None
    elif algo == "snf":
        model = SemiNMF(
            rank=rank,
            max_iter=iters,
            eps_denominator=eps_denominator,
            update_order=update_order,
            init=init,
            random_state=seed,
        ).fit(X)
        resolved = 0.0
    else:
        template = L21SNF(
            rank=rank,
            alpha=0.0,
            max_iter=iters,
            eps_residual=eps_residual,
            eps_denominator=eps_denominator,
            update_order=update_order,
            init=init,
            random_state=seed,
        )
        if alpha is None:
            search_result = search_alpha(X, template, alpha_trials, make_rng(seed))
            resolved = search_result.best_alpha
        else:
            resolved = alpha
        model = template.set_params(alpha=resolved).fit(X)
    wall = time.perf_counter() - start
    print(f"{algo} rank={rank} seed={seed}: fitted in {wall:.3f}s")
    return model, resolved, search_result


def _write_fit_outputs(out_dir, model, algo, rank, iters, seed, resolved_alpha,
                       search_result):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if algo == "pca":
        save_matrix(model.basis_, out_dir / "basis.csv")
        save_matrix(model.scores_, out_dir / "scores.csv")
        save_matrix(model.mean_[:, None], out_dir / "mean.csv")
    else:
        save_matrix(model.basis_, out_dir / "W.csv")
        save_matrix(model.coefficients_, out_dir / "H.csv")
    save_history(model.history_, out_dir / "loss_history.csv")
    final = model.history_.final
    save_summary(
        {
            "algo": algo,
            "rank": rank,
            "iters": iters,
            "seed": seed,
            "alpha": resolved_alpha,
            "objective": final.objective,
            "nfl": final.nfl,
            "nl21": final.nl21,
        },
        out_dir / "summary.csv",
    )
    if search_result is not None:
        lines = ["alpha,objective,nl21"]
        for trial in search_result.trials:
            lines.append(
                f"{trial.alpha!r},{trial.objective!r},{trial.nl21!r}"
            )
        (out_dir / "alpha_search.csv").write_text("\n".join(lines) + "\n")
    return final


def cmd_gen(args):
    opts = _resolve(args, ["rows", "cols", "low", "high", "seed", "x"])
    if opts["rows"] < 1 or opts["cols"] < 1:
        raise UsageError("--rows and --cols must be >= 1")
    M = uniform_matrix(
        opts["rows"], opts["cols"], opts["low"], opts["high"], make_rng(opts["seed"])
    )
    Path(opts["x"]).parent.mkdir(parents=True, exist_ok=True)
    save_matrix(M, opts["x"])
    print(f"wrote {opts['rows']}x{opts['cols']} matrix to {opts['x']}")
    return 0


def cmd_fit(args):
    opts = _resolve(
        args,
        ["x", "algo", "rank", "iters", "alpha", "alpha_trials", "init",
         "update_order", "eps_residual", "eps_denominator", "seed", "out_dir"],
    )
    _algo(opts["algo"])
    X = load_matrix(opts["x"])
    alpha = _resolve_alpha(opts["alpha"], opts["algo"])
    model, resolved, search_result = run_single(
        X, opts["algo"], opts["rank"], opts["iters"], alpha, opts["alpha_trials"],
        opts["init"], opts["update_order"], opts["eps_residual"],
        opts["eps_denominator"], opts["seed"],
    )
    final = _write_fit_outputs(
        opts["out_dir"], model, opts["algo"], opts["rank"], opts["iters"],
        opts["seed"], resolved, search_result,
    )
    print(f"final nfl={final.nfl:.6f} nl21={final.nl21:.6f} -> {opts['out_dir']}")
    return 0


def cmd_sweep(args):
    opts = _resolve(
        args,
        ["x", "algo", "ranks", "iters", "alpha", "alpha_trials", "init",
         "update_order", "eps_residual", "eps_denominator", "seed", "repeats",
         "out_dir"],
    )
    algos = opts["algo"] if isinstance(opts["algo"], list) else _algo_list(opts["algo"])
    ranks = opts["ranks"] if isinstance(opts["ranks"], list) else _rank_list(opts["ranks"])
    if opts["repeats"] < 1:
        raise UsageError("--repeats must be >= 1")
    X = load_matrix(opts["x"])
    out_dir = Path(opts["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    results = {}
    for rank in ranks:
        for algo in algos:
            finals = []
            for rep in range(opts["repeats"]):
                seed = opts["seed"] + rep
                cell_dir = out_dir / "cells" / f"{algo}_rank{rank}_seed{seed}"
                alpha = _resolve_alpha(opts["alpha"], algo)
                try:
                    model, resolved, search_result = run_single(
                        X, algo, rank, opts["iters"], alpha, opts["alpha_trials"],
                        opts["init"], opts["update_order"], opts["eps_residual"],
                        opts["eps_denominator"], seed,
                    )
                    final = _write_fit_outputs(
                        cell_dir, model, algo, rank, opts["iters"], seed,
                        resolved, search_result,
                    )
                    finals.append(final)
                except (NumericalError, NotPositiveDefiniteError, ValueError) as exc:
                    print(
                        f"cell {algo} rank={rank} seed={seed} failed: {exc}",
                        file=sys.stderr,
                    )
            results[(rank, algo)] = finals

    header = ["rank"]
    for algo in algos:
        header += [
            f"{algo}_nfl_mean", f"{algo}_nfl_best",
            f"{algo}_nl21_mean", f"{algo}_nl21_best",
        ]
    lines = [",".join(header)]
    for rank in ranks:
        row = [str(rank)]
        for algo in algos:
            finals = results[(rank, algo)]
            if finals:
                nfls = [f.nfl for f in finals]
                nl21s = [f.nl21 for f in finals]
                row += [
                    repr(float(np.mean(nfls))), repr(min(nfls)),
                    repr(float(np.mean(nl21s))), repr(min(nl21s)),
                ]
            else:
                row += ["", "", "", ""]
        lines.append(",".join(row))
    (out_dir / "table1.csv").write_text("\n".join(lines) + "\n")
    print(f"wrote {out_dir / 'table1.csv'}")
    return 0


def cmd_images_pack(args):
    opts = _resolve(args, ["dir", "x", "meta"])
    X, meta = pack_images(opts["dir"])
    Path(opts["x"]).parent.mkdir(parents=True, exist_ok=True)
    save_matrix(X, opts["x"])
    save_meta(meta, opts["meta"])
    print(
        f"packed {meta.count} images ({meta.width}x{meta.height}) into "
        f"{X.shape[0]}x{X.shape[1]} matrix"
    )
    return 0


def cmd_images_unpack(args):
    opts = _resolve(args, ["x", "meta", "out_dir"])
    meta = load_meta(opts["meta"])
    M = load_matrix(opts["x"])
    written = unpack_images(M, meta, opts["out_dir"])
    print(f"wrote {len(written)} images to {opts['out_dir']}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "fit":
            return cmd_fit(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        if args.command == "images":
            if args.images_command == "pack":
                return cmd_images_pack(args)
            return cmd_images_unpack(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NotPositiveDefiniteError, NumericalError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except (OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
