"""Command-line interface: dataset generation, training, evaluation, sweeps."""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .channel import steering
from .config import SimConfig, load_config
from .harness import (DEFAULT_POWER_GRID, Dataset, export, generate_dataset,
                      monte_carlo_eval, power_sweep, train_hcl, train_naive)
from .kinematics import make_state
from .nn.model import load_model
from .nn.train import TrainHyper
from .sensing import fisher_information


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config file with a [sim] section")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (repeatable)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="output path")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="isacbf",
        description="ISAC predictive beamforming simulator and trainer")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="generate a training dataset")
    _add_common(g)
    g.add_argument("--n-examples", type=int, default=2000)
    g.add_argument("--theta-mode", choices=("relative", "crlb"),
                   default="relative")

    t = sub.add_parser("train", help="train a beamforming network")
    _add_common(t)
    t.add_argument("--data", required=True, help="dataset file from gen-data")
    t.add_argument("--arch", choices=("hcl", "naive"), default="hcl")
    t.add_argument("--lr", type=float, default=1e-3)
    t.add_argument("--batch-size", type=int, default=256)
    t.add_argument("--iters", type=int, default=2000)
    t.add_argument("--momentum", type=float, default=0.9)

    e = sub.add_parser("eval", help="Monte-Carlo evaluation")
    _add_common(e)
    e.add_argument("--methods", default="random,genie",
                   help="comma-separated subset of genie,naive_dl,random,hcl")
    e.add_argument("--model", action="append", default=[],
                   help="model file (repeatable; kind read from the file)")
    e.add_argument("--realizations", type=int, default=100)
    e.add_argument("--project-power", action="store_true",
                   help="rescale predicted W onto the power budget")
    e.add_argument("--theta-mode", choices=("relative", "crlb"),
                   default="relative")
    e.add_argument("--format", choices=("csv", "json"), default="csv")

    s = sub.add_parser("sweep", help="power sweep over a grid")
    _add_common(s)
    s.add_argument("--methods", default="random,genie")
    s.add_argument("--model", action="append", default=[])
    s.add_argument("--realizations", type=int, default=100)
    s.add_argument("--power-grid",
                   default=",".join(str(v) for v in DEFAULT_POWER_GRID))
    s.add_argument("--project-power", action="store_true")
    s.add_argument("--theta-mode", choices=("relative", "crlb"),
                   default="relative")
    s.add_argument("--format", choices=("csv", "json"), default="csv")

    c = sub.add_parser("crlb", help="closed-form CRLBs for one geometry")
    _add_common(c)
    c.add_argument("--theta", type=float, required=True, help="angle, rad")
    c.add_argument("--dist", type=float, required=True, help="distance, m")
    c.add_argument("--power", type=float, required=True,
                   help="per-user beam power, W (aligned beam)")
    return p


def _config_from(args) -> SimConfig:
    return load_config(args.config, overrides=args.set, seed=args.seed)


def _load_models(paths: list[str], config: SimConfig) -> dict:
    models = {}
    for path in paths:
        model = load_model(path, config)
        key = "hcl" if type(model).__name__ == "HCLNet" else "naive_dl"
        models[key] = model
    return models


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _config_from(args)
    except (KeyError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "gen-data":
        if not args.out:
            print("error: --out is required", file=sys.stderr)
            return 2
        rng = np.random.default_rng(config.rng_seed)
        ds = generate_dataset(config, args.n_examples, rng,
                              theta_mode=args.theta_mode)
        ds.save(args.out, config)
        print(f"wrote {len(ds)} examples to {args.out} "
              f"(sha256 {ds.sha256()[:16]})")
        return 0

    if args.command == "train":
        if not args.out:
            print("error: --out is required", file=sys.stderr)
            return 2
        ds = Dataset.load(args.data)
        hyper = TrainHyper(lr=args.lr, batch_size=args.batch_size,
                           max_iters=args.iters, momentum=args.momentum,
                           seed=config.rng_seed)
        trainer = train_hcl if args.arch == "hcl" else train_naive
        net, result = trainer(ds, config, hyper)
        net.save(args.out)
        print(f"trained {args.arch} for {len(result.loss_trace)} iters; "
              f"loss {result.loss_trace[0]:.6g} -> {result.loss_trace[-1]:.6g}; "
              f"model saved to {args.out}")
        return 0

    if args.command in ("eval", "sweep"):
        methods = [m.strip() for m in args.methods.split(",") if m.strip()]
        models = _load_models(args.model, config)
        for m in methods:
            if m in ("hcl", "naive_dl") and m not in models:
                print(f"error: model file required for method {m!r} "
                      "(pass --model)", file=sys.stderr)
                return 2
        if args.command == "eval":
            report = monte_carlo_eval(config, methods, args.realizations,
                                      models=models, seed=config.rng_seed,
                                      theta_mode=args.theta_mode,
                                      project=args.project_power)
            rows = report.stats
        else:
            grid = [float(v) for v in args.power_grid.split(",")]
            rows = power_sweep(config, grid, methods, args.realizations,
                               models=models, seed=config.rng_seed,
                               theta_mode=args.theta_mode,
                               project=args.project_power)
        if args.out:
            export(rows, config, args.out, fmt=args.format)
            print(f"wrote {len(rows)} rows to {args.out}")
        else:
            for r in rows:
                print(f"{r.method}\tP={r.power:g}\trate={r.rate_mean:.4f}"
                      f"±{r.rate_ci:.4f}\tsqrt_crlb_theta="
                      f"{r.crlb_theta_sqrt:.4g}\tsqrt_crlb_d={r.crlb_d_sqrt:.4g}")
        return 0

    if args.command == "crlb":
        w = math.sqrt(args.power) * steering(args.theta, config.n_tx)
        state = make_state(args.dist * math.cos(args.theta),
                           args.dist * math.sin(args.theta), 0.0)
        info = fisher_information(state, w, config)
        print(f"crlb_theta = {info.crlb_theta:.9g} rad^2 "
              f"(sqrt {math.sqrt(info.crlb_theta):.9g} rad)")
        print(f"crlb_d = {info.crlb_d:.9g} m^2 "
              f"(sqrt {math.sqrt(info.crlb_d):.9g} m)")
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
