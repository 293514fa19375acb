"""Command-line entry point: ``iiaflow verify | flow | jetgen``.

Exit codes: 0 success, 1 failed check, 2 sampling failure, 3 positivity lost
during a flow, 4 monitor rejection, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import InvalidState, NoSolution, PositivityLost, SamplingExhausted, StepRejected
from .flow import MONITOR_REJECT, FlowState, evolve
from .geometry import (
    JetChartBackend,
    LieAlgebraBackend,
    resolve_algebra,
    sample_typeiia_invariant,
    sample_typeiia_jet,
)
from .identities import get_check, run_on_sample, run_suite

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_SAMPLING = 2
EXIT_POSITIVITY = 3
EXIT_STEP_REJECTED = 4
EXIT_USAGE = 64

DEFAULT_FLOW_ALGEBRA = "n_0_0_0_0_12_13"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    trials: int = 1
    tolerance: float = 1e-8
    algebra: str | None = None
    dt: float = 1e-2
    steps: int = 100
    scale: float = 1.0
    out: str | None = None
    checks: list[str] | None = None
    sample: str | None = None
    workers: int = 1
    record_every: int = 1
    reject_tol: float = MONITOR_REJECT

    def validate(self) -> None:
        if self.trials < 1:
            raise UsageError("--trials must be at least 1")
        if not self.tolerance > 0:
            raise UsageError("--tol must be positive")
        if self.command == "flow":
            if not self.dt > 0:
                raise UsageError("--dt must be positive")
            if self.steps < 0:
                raise UsageError("--steps must be non-negative")
            if self.record_every < 1:
                raise UsageError("--record-every must be at least 1")
            if not self.reject_tol > 0:
                raise UsageError("--reject-tol must be positive")
        if not self.scale > 0:
            raise UsageError("--scale must be positive")
        if self.workers < 1:
            raise UsageError("--workers must be at least 1")
        for key in self.checks or []:
            try:
                get_check(key)
            except KeyError:
                raise UsageError(f"unknown check {key!r}") from None


def _comma_list(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="iiaflow", description="Verify Type IIA identities and integrate the invariant flow.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        p.add_argument("--out", help="output file (default: stdout)")

    v = sub.add_parser("verify", help="run the identity suite and emit a JSON report")
    common(v)
    v.add_argument("--trials", type=int, default=1)
    v.add_argument("--tol", dest="tolerance", type=float, default=1e-8)
    v.add_argument("--algebra", action="append", help="restrict invariant samples (repeatable; name or notation)")
    v.add_argument("--checks", type=_comma_list, help="comma list of check ids, e.g. ID-03,ID-26")
    v.add_argument("--sample", help="evaluate a stored sample JSON instead of drawing fresh data")
    v.add_argument("--workers", type=int, default=1)

    f = sub.add_parser("flow", help="integrate the invariant flow and emit a CSV trace")
    common(f)
    f.add_argument("--algebra", default=DEFAULT_FLOW_ALGEBRA, help="catalog name, notation like 0,0,0,0,12,13, or JSON file")
    f.add_argument("--dt", type=float, default=1e-2)
    f.add_argument("--steps", type=int, default=100)
    f.add_argument("--sample", help="start from a stored invariant sample JSON")
    f.add_argument("--record-every", type=int, default=1)
    f.add_argument("--reject-tol", type=float, default=MONITOR_REJECT, help="monitor threshold for step rejection")

    j = sub.add_parser("jetgen", help="draw a jet sample and emit it as JSON")
    common(j)
    j.add_argument("--scale", type=float, default=1.0)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for key in vars(cfg):
        if key != "command" and hasattr(args, key):
            setattr(cfg, key, getattr(args, key))
    return cfg


def load_sample(path: str):
    data = json.loads(Path(path).read_text())
    kind = data.get("kind")
    if kind == "jet":
        return JetChartBackend.from_json(data)
    if kind == "invariant":
        return LieAlgebraBackend.from_json(data)
    raise UsageError(f"{path}: unknown sample kind {kind!r}")


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_verify(cfg: RunConfig) -> int:
    if cfg.sample:
        report = run_on_sample(load_sample(cfg.sample), cfg.tolerance, cfg.checks, seed=cfg.seed)
    else:
        algebras = [resolve_algebra(a) for a in cfg.algebra] if cfg.algebra else None
        report = run_suite(
            seed=cfg.seed,
            trials=cfg.trials,
            tolerance=cfg.tolerance,
            check_filter=cfg.checks,
            algebras=algebras,
            workers=cfg.workers,
        )
    _emit(report.to_json(indent=2) + "\n", cfg.out)
    if not report.all_passed:
        failed = [k for k in sorted(report.stats) if not report.passed(k)]
        print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def _write_trace(trace, out: str | None) -> None:
    if out is None:
        trace.write_csv(sys.stdout)
    else:
        trace.write_csv(out)


def cmd_flow(cfg: RunConfig) -> int:
    if cfg.sample:
        backend = load_sample(cfg.sample)
        if not isinstance(backend, LieAlgebraBackend):
            raise UsageError("flow needs an invariant sample")
    else:
        backend = sample_typeiia_invariant(resolve_algebra(cfg.algebra), cfg.seed)
    state = FlowState.from_backend(backend)
    try:
        trace = evolve(state, cfg.dt, cfg.steps, record_every=cfg.record_every, reject_tol=cfg.reject_tol)
    except PositivityLost as exc:
        if exc.trace is not None:
            _write_trace(exc.trace, cfg.out)
        # the failing step started from the last accepted state
        last_good = state.t + max(exc.step - 1, 0) * cfg.dt
        print(f"positivity lost at step {exc.step}; last good t={last_good!r}", file=sys.stderr)
        return EXIT_POSITIVITY
    except StepRejected as exc:
        if exc.trace is not None:
            _write_trace(exc.trace, cfg.out)
        print(f"step {exc.step} rejected: {exc}", file=sys.stderr)
        return EXIT_STEP_REJECTED
    _write_trace(trace, cfg.out)
    return EXIT_OK


def cmd_jetgen(cfg: RunConfig) -> int:
    backend = sample_typeiia_jet(cfg.seed, scale=cfg.scale)
    _emit(json.dumps(backend.to_json(), indent=2) + "\n", cfg.out)
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "flow": cmd_flow, "jetgen": cmd_jetgen}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits on --help and on usage errors; report the code instead
        return int(exc.code or 0)
    cfg = config_from_args(args)
    try:
        cfg.validate()
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"iiaflow: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SamplingExhausted, NoSolution) as exc:
        print(f"iiaflow: sampling failed: {exc}", file=sys.stderr)
        return EXIT_SAMPLING
    except (ValueError, OSError, InvalidState) as exc:
        # malformed notation, unreadable files, invalid stored samples
        print(f"iiaflow: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
