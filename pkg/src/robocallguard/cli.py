"""Command-line entry point.

Exit codes: 0 when every expectation holds, 1 on an expectation mismatch,
2 on bad input (unparsable files, invalid parameters, missing documents).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from robocallguard import harness
from robocallguard.clustering import DEFAULT_EPS, DEFAULT_K, DEFAULT_MIN_PTS

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_ERROR = 2


def _eps(value: str) -> float | None:
    if value == "auto":
        return None
    eps = float(value)
    if not eps > 0:
        raise argparse.ArgumentTypeError("eps must be positive or 'auto'")
    return eps


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robocallguard", description="Simulated call screening and robocall campaign clustering.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("screen", help="run scenario files through the screening assistant")
    p.add_argument("--policy", required=True, type=Path)
    p.add_argument("--scenarios", required=True, type=Path)
    p.add_argument("--seed", type=int, default=None, help="overrides the policy seed")
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("replay", help="call the assistant with cluster representatives as recordings")
    p.add_argument("--policy", required=True, type=Path)
    p.add_argument("--reps", required=True, type=Path, help="representatives file: cluster_id<TAB>doc_id")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=Path, default=None)

    p = sub.add_parser("cluster", help="cluster a transcript corpus into campaigns")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--eps", type=_eps, default=DEFAULT_EPS, help="DBSCAN radius, or 'auto' for the k-distance elbow")
    p.add_argument("--minpts", type=int, default=DEFAULT_MIN_PTS)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("report", help="re-render summaries and figures from an output directory")
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("synth", help="regenerate the synthetic policies, corpora and scenario files")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _emit(report: harness.RunReport, out: Path | None) -> int:
    if out is None:
        sys.stdout.write(report.to_tsv())
        sys.stdout.write("\n")
    sys.stdout.write(report.summary())
    return EXIT_OK if report.ok else EXIT_MISMATCH


def run(args: argparse.Namespace) -> int:
    if args.command == "screen":
        return _emit(harness.run_scenarios(args.scenarios, args.policy, args.seed, args.out), args.out)
    if args.command == "replay":
        return _emit(harness.replay_corpus(args.reps, args.corpus, args.policy, args.seed, args.out), args.out)
    if args.command == "cluster":
        result = harness.cluster_cmd(args.corpus, args.k, args.eps, args.minpts, args.out)
        sys.stdout.write((args.out / "cluster_summary.txt").read_text(encoding="utf-8"))
        return EXIT_OK if result.assignment.n_clusters else EXIT_MISMATCH
    if args.command == "report":
        done = harness.rerender(args.out)
        if (args.out / "summary.txt").exists() and "report" in done:
            sys.stdout.write((args.out / "summary.txt").read_text(encoding="utf-8"))
        if "clusters" in done:
            sys.stdout.write((args.out / "cluster_summary.txt").read_text(encoding="utf-8"))
        return EXIT_OK
    if args.command == "synth":
        from robocallguard.synth import write_shipped_data

        for path in write_shipped_data(args.out, args.seed):
            logging.getLogger(__name__).info("wrote %s", path)
        return EXIT_OK
    raise AssertionError(args.command)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except (ValueError, LookupError, OSError) as exc:
        print(f"robocallguard {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
