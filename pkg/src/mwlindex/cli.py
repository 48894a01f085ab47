"""Command-line front end: ``mwlindex <command> [options]``.

Commands run one pipeline stage each (``denoise``, ``indexes``, ``features``,
``select``, ``synth``, ``train``, ``report``), all of them in order
(``run-all``), or write the synthetic demo cohort (``make-demo``).

Every run writes ``config.resolved.json`` and appends to ``stage.log`` in
the output directory.  Exit codes: 0 success, 1 invalid configuration or
missing/malformed input, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .config import ConfigError, PipelineConfig, apply_override, load_config, save_config
from .dataio import DataFormatError
from .demo import DemoSpec, write_cohort
from .pipeline import STAGE_FUNCS, MissingInputError, run_all

log = logging.getLogger("mwlindex")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2
COMMANDS = ("make-demo", "denoise", "indexes", "features", "select", "synth", "train", "report", "run-all")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--seed", type=int, help="master random seed")
    common.add_argument("--manifest", help="dataset manifest (JSON)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--iterations", type=int, help="Monte Carlo iterations")
    common.add_argument("--no-k-search", action="store_true", help="use select.k instead of the halving search")
    common.add_argument("--k", type=int, help="fixed number of features before the correlation filter")
    common.add_argument("--no-synth", action="store_true", help="skip synthesis and the combined dataset")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.FIELD=VALUE",
                        help="override any configuration field; VALUE is parsed as JSON (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="mwlindex", description="EEG mental-workload index pipeline.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "run-all":
            sp.add_argument("--demo", action="store_true",
                            help="generate the demo cohort under <out>/demo_data and use it as the manifest")
    return p


def resolve_config(args) -> PipelineConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = apply_override(cfg, f"seed={args.seed}")
    if args.manifest is not None:
        cfg.manifest = args.manifest
    if args.out is not None:
        cfg.out = args.out
    if args.iterations is not None:
        cfg = apply_override(cfg, f"montecarlo.iterations={args.iterations}")
    if args.no_k_search:
        cfg.select.k_search = False
    if args.k is not None:
        cfg.select.k = args.k
    if args.no_synth:
        cfg.synth.enabled = False
    for o in args.overrides:
        cfg = apply_override(cfg, o)
    cfg.validate()
    return cfg


def make_demo(cfg: PipelineConfig) -> Path:
    d = cfg.demo
    spec = DemoSpec(n_subjects=d.n_subjects, seed=cfg.seed, n_samples=d.n_samples, theta_gain=d.theta_gain,
                    rating_mode=d.rating_mode)
    path = write_cohort(spec, Path(cfg.out) / "demo_data")
    log.info("demo cohort written, manifest %s", path)
    return path


def _attach_log(out: Path, verbose: bool) -> list[logging.Handler]:
    out.mkdir(parents=True, exist_ok=True)
    handlers: list[logging.Handler] = [logging.FileHandler(out / "stage.log")]
    handlers[0].setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    if verbose:
        handlers.append(logging.StreamHandler(sys.stderr))
        handlers[1].setFormatter(logging.Formatter("%(message)s"))
    for h in handlers:
        log.addHandler(h)
    log.setLevel(logging.INFO)
    return handlers


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    out = Path(cfg.out)
    handlers = _attach_log(out, args.verbose)
    try:
        if args.command == "make-demo" or getattr(args, "demo", False):
            cfg.manifest = str(make_demo(cfg))
        save_config(cfg, out / "config.resolved.json")
        log.info("command %s, seed %d", args.command, cfg.seed)
        if args.command == "make-demo":
            pass
        elif args.command == "run-all":
            start = time.perf_counter()
            run_all(cfg)
            log.info("run-all finished in %.1f s", time.perf_counter() - start)
        else:
            start = time.perf_counter()
            STAGE_FUNCS[args.command](cfg)
            log.info("stage %s finished in %.1f s", args.command, time.perf_counter() - start)
        return EXIT_OK
    except (MissingInputError, DataFormatError, ConfigError) as e:
        log.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as e:  # noqa: BLE001 -- any other failure is a runtime error
        log.exception("runtime failure")
        print(f"runtime error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    finally:
        for h in handlers:
            log.removeHandler(h)
            h.close()


if __name__ == "__main__":
    sys.exit(main())
