"""Command line interface.

Five subcommands cover the pipeline: ``simulate`` builds observation
pairs from ground-truth cubes, ``fuse`` reconstructs one pair,
``evaluate`` scores a reconstruction, ``benchmark`` chains all three
over a cube list against the bicubic baseline, and ``wald`` shifts a
real pair to the reduced scale where references exist.  Every command
exits 0 on success; failures print ``category: message`` on stderr and
exit 1.
"""

from __future__ import annotations

import argparse
import sys

from .benchmark import (
    BenchmarkSpec,
    run_benchmark,
    run_evaluate,
    run_fuse,
    run_simulate,
    run_wald,
)
from .errors import SpecfuseError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specfuse",
        description="Fuse sharp multispectral and blurred hyperspectral images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="benchmark spec JSON")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--seed", type=int, help="override the noise seed")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads (default 1, deterministic)")
        p.add_argument("--peak", type=float, help="peak value used by the metrics")

    p = sub.add_parser("simulate", help="write observation pairs for ground-truth cubes")
    add_common(p)

    p = sub.add_parser("fuse", help="fuse one observation pair")
    add_common(p)
    p.add_argument("--hrms", required=True, help="sharp multispectral cube")
    p.add_argument("--lrhs", required=True, help="blurred hyperspectral cube")

    p = sub.add_parser("evaluate", help="score a reconstruction against a reference")
    p.add_argument("--ref", required=True, help="reference cube")
    p.add_argument("--test", required=True, help="cube under test")
    p.add_argument("--factor", type=int, required=True,
                   help="linear resolution ratio used by the relative error")
    p.add_argument("--out", default="specfuse-eval", help="output directory")
    p.add_argument("--peak", type=float, help="peak value used by the metrics")

    p = sub.add_parser("benchmark", help="simulate, fuse and evaluate a cube list")
    add_common(p)

    p = sub.add_parser("wald", help="downsample an observed pair for reduced-scale checks")
    add_common(p)
    p.add_argument("--hrms", required=True, help="sharp multispectral cube")
    p.add_argument("--lrhs", required=True, help="blurred hyperspectral cube")

    return parser


def _load_spec(args) -> BenchmarkSpec:
    spec = BenchmarkSpec.from_json(args.config)
    return spec.with_overrides(
        out=args.out, seed=args.seed, peak=getattr(args, "peak", None)
    )


def _dispatch(args) -> int:
    if args.command == "simulate":
        spec = _load_spec(args)
        manifest = run_simulate(spec)
        print(f"simulated {len(manifest)} cube(s) into {spec.output_dir}")
        return 0
    if args.command == "fuse":
        spec = _load_spec(args)
        result = run_fuse(spec, args.hrms, args.lrhs)
        print(
            f"fused in {result.iterations_run} iteration(s), eta {result.eta:.6g}, "
            f"output in {spec.output_dir}"
        )
        return 0
    if args.command == "evaluate":
        report = run_evaluate(args.ref, args.test, args.factor, args.peak, args.out)
        print(
            f"psnr {report.psnr:.2f} dB, sam {report.sam:.2f} deg, "
            f"ergas {report.ergas:.2f}, ssim {report.ssim:.3f}"
        )
        return 0
    if args.command == "benchmark":
        spec = _load_spec(args)
        summary = run_benchmark(spec, threads=max(1, args.threads))
        fused = summary["fused"]
        base = summary["baseline"]
        print(
            f"benchmarked {summary['cubes']} cube(s): fused psnr "
            f"{fused['psnr']:.2f} dB vs baseline {base['psnr']:.2f} dB; "
            f"report in {spec.output_dir}"
        )
        return 0
    if args.command == "wald":
        spec = _load_spec(args)
        manifest = run_wald(spec, args.hrms, args.lrhs)
        print(
            f"wrote reduced-scale triplet (factor {manifest['factor']}) "
            f"into {spec.output_dir}"
        )
        return 0
    raise AssertionError(f"unhandled command {args.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except SpecfuseError as exc:
        print(f"{exc.category}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        filename = exc.filename if exc.filename else exc
        print(f"io-error: file not found: {filename}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
