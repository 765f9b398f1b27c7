"""``proxmh`` command.

Exit codes: 0 success, 1 configuration error, 2 numerical failure (oracle,
quadrature, sampler or a failed self-test), 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from ..errors import ConfigError, ProxMHError, SamplerError
from .config import load_config

THREADS_ENV = "PROXMH_THREADS"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


def _threads(flag):
    if flag is not None:
        return flag
    env = os.environ.get(THREADS_ENV)
    if env is None:
        return 1
    try:
        n = int(env)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
    return n


def _load(path, seed):
    cfg = load_config(path)
    if seed is not None:
        cfg = cfg.model_copy(update={"sampler": cfg.sampler.model_copy(update={"seed": seed})})
    return cfg


def _positive_int(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _seed(text):
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, help="override sampler.seed")
    common.add_argument("--out-dir", type=Path, help="override output.directory")
    common.add_argument("--threads", type=_positive_int,
                        help=f"worker threads for chains (default: ${THREADS_ENV} or 1)")

    p = argparse.ArgumentParser(prog="proxmh", description="Proximal Metropolis-Hastings experiments")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run one experiment")
    r.add_argument("config")
    c = sub.add_parser("compare", parents=[common], help="compare samplers on one target")
    c.add_argument("configs", nargs="+")
    t = sub.add_parser("tune", parents=[common], help="print the step-size report")
    t.add_argument("config")
    s = sub.add_parser("selftest", parents=[common], help="run the invariant checks")
    s.add_argument("--quick", action="store_true", help="skip the slower statistical checks")
    return p


def _dispatch(args) -> int:
    from .experiment import compare_command, run_experiment, tune_command

    threads = _threads(args.threads)
    if args.command == "run":
        cfg = _load(args.config, args.seed)
        metrics = run_experiment(cfg, args.out_dir, threads)
        out = args.out_dir or cfg.output.directory
        print(f"wrote {out}: acceptance {metrics['acceptance_rate']:.4f}"
              + ("" if metrics["tv_to_truth"] is None else f", tv_to_truth {metrics['tv_to_truth']:.4f}"))
        return EXIT_OK
    if args.command == "compare":
        cfgs = [_load(p, args.seed) for p in args.configs]
        rows = compare_command(cfgs, [Path(p).stem for p in args.configs], args.out_dir, threads)
        width = max(8, *(len(r["label"]) for r in rows)) + 2
        print(f"{'label':<{width}}{'algorithm':<15}{'dim':>4}{'iters_to_tv':>13}{'accept':>9}{'ess/s':>11}")
        for r in rows:
            its = "-" if r["iterations_to_tv"] is None else str(r["iterations_to_tv"])
            print(f"{r['label']:<{width}}{r['algorithm']:<15}{r['dim']:>4}{its:>13}"
                  f"{r['acceptance_rate']:>9.4f}{r['ess_per_sec']:>11.1f}")
        return EXIT_OK
    if args.command == "tune":
        rep = tune_command(_load(args.config, args.seed))
        text = json.dumps(rep, indent=2, sort_keys=True)
        print(text)
        if args.out_dir is not None:
            args.out_dir.mkdir(parents=True, exist_ok=True)
            (args.out_dir / "tuning.json").write_text(text + "\n")
        return EXIT_OK
    from ..selftest import run_selftest

    ok = run_selftest(seed=0 if args.seed is None else args.seed, quick=args.quick)
    return EXIT_OK if ok else EXIT_NUMERIC


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SamplerError as e:
        print(f"numeric error at step {e.step}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ProxMHError, ArithmeticError) as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
