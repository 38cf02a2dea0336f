"""Command-line front end.

Subcommands ``calibrate``, ``analytic``, ``sweep`` and ``gen-samples`` read a
YAML run configuration (see :mod:`jamsense.config`) and write one output file
atomically. Exit codes: 0 ok, 2 invalid configuration, 3 numerical failure,
4 unsupported dimension, 5 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import __version__, config, harness, wishart
from .calibration import SampleSet, complete_detector, mc_threshold, mc_threshold_from_samples
from .errors import (
    DegenerateCovariance,
    DegenerateInput,
    JamsenseError,
    NotPositiveDefinite,
    NumericalFailure,
    UnsupportedDimension,
)
from .matfile import MatrixFileError, atomic_write_bytes, write_matrices

log = logging.getLogger("jamsense")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_UNSUPPORTED, EXIT_IO = 0, 2, 3, 4, 5


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, UnsupportedDimension):
        return EXIT_UNSUPPORTED
    if isinstance(exc, (NumericalFailure, DegenerateInput, DegenerateCovariance, NotPositiveDefinite)):
        return EXIT_NUMERIC
    if isinstance(exc, (OSError, MatrixFileError)):
        return EXIT_IO
    return EXIT_CONFIG


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        atomic_write_bytes(out, [text.encode("utf-8")])


def _json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def cmd_calibrate(cfg: config.RunConfig) -> str:
    sec = cfg.section
    det = cfg.detector
    if sec["samples"] is not None:
        samples = SampleSet.from_file(sec["samples"])
        if cfg.scenario is not None:
            det = complete_detector(det, cfg.scenario)
        res = mc_threshold_from_samples(det, samples, sec["pfa_target"], seed=cfg.seed)
        mode, provenance = "samples", samples.provenance
    else:
        gen = {}
        if sec["fixed_tn_channels"]:
            gen["tn_channels"] = harness.fixed_tn_channels(cfg.scenario, cfg.seed)
        res = mc_threshold(det, cfg.scenario, sec["pfa_target"], sec["trials"], cfg.seed,
                           threads=cfg.threads, **gen)
        mode, provenance = "synthetic", "synthetic"
    doc = res.to_dict()
    doc.update(mode=mode, provenance=provenance)
    return _json(doc)


def cmd_analytic(cfg: config.RunConfig) -> str:
    sc = cfg.scenario
    sec = cfg.section
    which = harness.analytic_detector(sc)
    channels = harness.fixed_tn_channels(sc, cfg.seed)
    ctx = harness.analytic_context(sc, channels, sec["epsilon"])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if sec["eta"] is not None:
        w.writerow(("eta", "pfa_analytic"))
        for eta, p in zip(sec["eta"], harness.analytic_pfa(sec["eta"], ctx, sc)):
            w.writerow((repr(float(eta)), repr(float(p))))
    else:
        eig = wishart.analytic_threshold(sec["pfa_target"], ctx, which)
        eta = wishart.statistic_threshold(eig, sc.sigma2_w)
        check = float(harness.analytic_pfa(eta, ctx, sc))
        w.writerow(("detector", "pfa_target", "eta", "pfa_analytic"))
        w.writerow((which, repr(sec["pfa_target"]), repr(float(eta)), repr(check)))
    return buf.getvalue()


def cmd_sweep(cfg: config.RunConfig) -> str:
    result = harness.run_sweep(cfg.sweep)
    log.info("sweep %s finished in %.1f s", cfg.sweep.kind.value, result.metadata["wall_time_s"])
    return result.to_csv()


def cmd_gen_samples(cfg: config.RunConfig, out: str | None) -> None:
    sec = cfg.section
    if out in (None, "-"):
        raise config.ConfigError("gen-samples needs an output file (--out or 'output')")
    gen = {"orthogonal_construction": True} if sec["orthogonal_construction"] else {}
    samples = SampleSet.synthetic(cfg.scenario, sec["count"], cfg.seed, sec["hypothesis"], **gen)
    write_matrices(out, samples.matrices)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jamsense", description="Cooperative jamming detection toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "calibrate": "Monte-Carlo threshold for a target false-alarm probability (JSON)",
        "analytic": "analytic Pfa curve or threshold for K = 3 (CSV)",
        "sweep": "run an experiment sweep (CSV)",
        "gen-samples": "write synthetic received matrices as a .jdmx sample file",
    }
    for name, text in helps.items():
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", required=True, help="YAML run configuration")
        s.add_argument("--seed", type=int, help="overrides the configured seed")
        s.add_argument("--out", help="output path (default: configured 'output', else stdout)")
        s.add_argument("--threads", type=int, help="worker threads; results do not depend on it")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise config.ConfigError("--seed must be an unsigned 64-bit integer")
        if args.threads is not None and args.threads < 1:
            raise config.ConfigError("--threads must be >= 1")
        cfg = config.load_file(args.config, args.command, seed=args.seed, threads=args.threads)
        out = args.out or cfg.output
        if out not in (None, "-"):
            Path(out).parent.mkdir(parents=True, exist_ok=True)
        if args.command == "gen-samples":
            cmd_gen_samples(cfg, out)
        else:
            run = {"calibrate": cmd_calibrate, "analytic": cmd_analytic, "sweep": cmd_sweep}[args.command]
            _emit(run(cfg), out)
    except (JamsenseError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return exit_code(exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
