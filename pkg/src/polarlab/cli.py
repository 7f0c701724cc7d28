"""Command-line front end: polarize, verify, classify, distance."""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass

from .blackwell import blackwell_measure
from .channels import Channel, channel_from_json, delta_determining_subgroup, symmetric_capacity
from .groups import Group
from .metrics import pc_gap_lower_bound, wasserstein
from .presets import parse_group_spec, parse_preset
from .process import (
    DEFAULT_DELTA,
    MAX_DEPTH,
    enumerate_paths,
    report_csv,
    report_json,
    sample_paths,
)
from .polar import DEFAULT_ATOM_BUDGET
from .verify import run_suites

MERGE_TAU_MAX = 1e-3


@dataclass
class ExperimentConfig:
    source: str
    depth: int
    mode: str
    samples: int
    seed: int
    delta: float
    merge_tau: float
    atom_budget: int
    output: str | None
    out_format: str

    def validate(self) -> None:
        if not 0 <= self.depth <= MAX_DEPTH:
            raise ValueError(f"depth must be in [0, {MAX_DEPTH}], got {self.depth}")
        if self.mode not in ("exhaustive", "sample"):
            raise ValueError(f"mode must be 'exhaustive' or 'sample', got {self.mode!r}")
        if self.mode == "sample" and self.samples < 1:
            raise ValueError("sample mode needs --samples >= 1")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not 0.0 < self.merge_tau <= MERGE_TAU_MAX:
            raise ValueError(
                f"merge tolerance must be in (0, {MERGE_TAU_MAX}], got {self.merge_tau}"
            )
        if self.atom_budget < 1:
            raise ValueError("atom budget must be >= 1")
        if self.out_format not in ("json", "csv"):
            raise ValueError(f"format must be 'json' or 'csv', got {self.out_format!r}")


def _load_channel_file(path: str) -> Channel:
    if not os.path.exists(path):
        raise ValueError(f"channel file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed JSON in {path}: {exc}") from exc
    return channel_from_json(obj)


def _resolve_channel(args, flag_value: str | None, preset_value: str | None) -> tuple[Channel, str]:
    group: Group | None = None
    if getattr(args, "group", None):
        group = parse_group_spec(args.group)
    outputs = getattr(args, "outputs", None)
    if preset_value is not None:
        return parse_preset(preset_value, group, outputs), f"preset:{preset_value}"
    if flag_value is None:
        raise ValueError("provide either --channel FILE or --preset SPEC")
    if flag_value.startswith("preset:"):
        return parse_preset(flag_value[len("preset:"):], group, outputs), flag_value
    return _load_channel_file(flag_value), flag_value


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".polarlab-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_polarize(args) -> int:
    channel, source = _resolve_channel(args, args.channel, args.preset)
    config = ExperimentConfig(
        source=source,
        depth=args.depth,
        mode=args.mode,
        samples=args.samples,
        seed=args.seed,
        delta=args.delta,
        merge_tau=args.merge_tau,
        atom_budget=args.atom_budget,
        output=args.output,
        out_format=args.format,
    )
    config.validate()
    channel.require_group()
    if config.mode == "exhaustive":
        report = enumerate_paths(
            channel,
            config.depth,
            delta=config.delta,
            merge_tau=config.merge_tau,
            atom_budget=config.atom_budget,
            threads=args.threads,
        )
    else:
        report = sample_paths(
            channel,
            config.depth,
            config.samples,
            config.seed,
            delta=config.delta,
            merge_tau=config.merge_tau,
            atom_budget=config.atom_budget,
            threads=args.threads,
        )
    report.config["source"] = config.source
    data = report.to_dict()
    text = report_json(data) if config.out_format == "json" else report_csv(data)
    if config.output:
        _write_atomic(config.output, text)
    else:
        sys.stdout.write(text)
    return 2 if report.failed else 0


def cmd_verify(args) -> int:
    results = run_suites(args.suite)
    for result in results:
        print(result.line())
    return 0 if all(r.passed for r in results) else 1


def cmd_classify(args) -> int:
    channel, _ = _resolve_channel(args, args.channel, args.preset)
    channel.require_group()
    result = delta_determining_subgroup(channel, args.delta)
    print(f"capacity_bits={symmetric_capacity(channel)!r}")
    print(f"determined={str(result.determined).lower()} delta={result.delta!r}")
    for wit in result.witnesses:
        print(
            f"subgroup={wit.subgroup.label()} "
            f"gap_capacity={wit.gap_capacity!r} gap_quotient={wit.gap_quotient!r}"
        )
    return 0 if result.determined else 3


def cmd_distance(args) -> int:
    channel_a, _ = _resolve_channel(args, args.channel_a, None)
    channel_b, _ = _resolve_channel(args, args.channel_b, None)
    ga, gb = channel_a.require_group(), channel_b.require_group()
    if ga != gb:
        raise ValueError(f"input alphabets differ: {ga!r} vs {gb!r}")
    ma, mb = blackwell_measure(channel_a), blackwell_measure(channel_b)
    if args.metric == "wasserstein":
        value = wasserstein(ma, mb)
    else:
        value = pc_gap_lower_bound(ma, mb, trials=args.trials, seed=args.seed)
    print(repr(value))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarlab",
        description="Polarization experiments on channels over finite Abelian groups",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_channel_args(p, with_preset_flag=True):
        p.add_argument("--channel", help="channel JSON file (or 'preset:SPEC')")
        if with_preset_flag:
            p.add_argument("--preset", help="built-in channel, e.g. bec:0.5, bsc:0.1, "
                                            "dh:Z4:{0,2}, z4-multilevel:0.5, random:7, dh-mix:3")
        p.add_argument("--group", help="group spec for presets, e.g. Z4 or [2,4]")
        p.add_argument("--outputs", type=int, help="output count for the random preset")

    pol = sub.add_parser("polarize", help="run a polarization experiment")
    add_channel_args(pol)
    pol.add_argument("--depth", type=int, required=True)
    pol.add_argument("--mode", choices=("exhaustive", "sample"), default="exhaustive")
    pol.add_argument("--samples", type=int, default=1)
    pol.add_argument("--seed", type=int, default=0)
    pol.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    pol.add_argument("--merge-tau", type=float, default=1e-9)
    pol.add_argument("--atom-budget", type=int, default=DEFAULT_ATOM_BUDGET)
    pol.add_argument("--output", help="report file (stdout when omitted)")
    pol.add_argument("--format", choices=("json", "csv"), default="json")
    pol.add_argument("--threads", type=int, default=None,
                     help="overrides the POLARLAB_THREADS environment variable")
    pol.set_defaults(func=cmd_polarize)

    ver = sub.add_parser("verify", help="run built-in oracle verification suites")
    ver.add_argument("--suite", default="all",
                     choices=("all", "martingale", "lemma-gap", "pol-set", "bec-oracle", "multilevel"))
    ver.set_defaults(func=cmd_verify)

    cls = sub.add_parser("classify", help="report the delta-determining subgroups")
    add_channel_args(cls)
    cls.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    cls.set_defaults(func=cmd_classify)

    dist = sub.add_parser("distance", help="distance between two channels' measures")
    dist.add_argument("--channel-a", required=True, help="channel file or 'preset:SPEC'")
    dist.add_argument("--channel-b", required=True, help="channel file or 'preset:SPEC'")
    dist.add_argument("--group", help="group spec for presets")
    dist.add_argument("--outputs", type=int, help="output count for the random preset")
    dist.add_argument("--metric", choices=("wasserstein", "pc-bound"), default="wasserstein")
    dist.add_argument("--trials", type=int, default=64)
    dist.add_argument("--seed", type=int, default=0)
    dist.set_defaults(func=cmd_distance)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
