"""Command line entry point: ``splab design|train|validate|inspect``.

Exit status: 0 success, 1 constraint or validation failure, 2 I/O or
parse failure.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .config import RunConfig, load_config
from .errors import (
    ConfigError,
    ConfigSyntaxError,
    DomainError,
    SnapshotError,
)
from .oracle import format_table
from .pooler import SpatialPooler, duty_cycles, init_state
from .snapshot import MetricsLog, load_snapshot, save_snapshot
from .topology import gather_inputs
from .validate import all_passed, validation_rows

log = logging.getLogger("splab")

EXIT_OK, EXIT_FAIL, EXIT_IO = 0, 1, 2
CONVERGENCE_EPS = 0.05


@contextlib.contextmanager
def _output(path):
    if path is None or str(path) == "-":
        yield sys.stdout
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="ascii") as fh:
            yield fh


# ------------------------------------------------------------------ design


def design_text(rc: RunConfig) -> str:
    cfg, topo = rc.sp, rc.topology
    report = analysis.build_report(
        cfg, topo.mode, topo.radius, rc.input_density, rc.encoder.n, rc.encoder.w
    )
    text = report.to_text()
    d = rc.design
    if d.target_unobserved is not None and d.q_candidates and d.m_candidates:
        cov = analysis.min_params_for_coverage(
            cfg.p, d.q_candidates, d.m_candidates, d.target_unobserved
        )
        if cov.feasible:
            text += (
                f"encc\tmin_coverage_params\tm={cov.m} q={cov.q} "
                f"expected_unobserved={cov.expected_unobserved!r}\t"
                f"smallest m*q with p*(1-P)^m <= {d.target_unobserved!r}\n"
            )
        else:
            text += (
                f"encc\tmin_coverage_params\tinfeasible\t"
                f"no grid point reaches expected_unobserved <= {d.target_unobserved!r}\n"
            )
    return text


def cmd_design(rc: RunConfig, out=None) -> int:
    text = design_text(rc)
    with _output(out) as fh:
        fh.write(text)
    return EXIT_OK


# ------------------------------------------------------------------- train


def convergence_summary(sp: SpatialPooler, pattern, eps: float = CONVERGENCE_EPS) -> dict:
    """Check learned permanences of the columns the pattern activates."""
    active = sp.infer(pattern).indices()
    X = gather_inputs(sp.topology, pattern)
    phi = sp.state.phi
    ok = True
    for i in active:
        if X[i].sum() < sp.cfg.rho_d:
            continue
        on, off = phi[i][X[i] == 1], phi[i][X[i] == 0]
        if (on < 1 - eps).any() or (off > eps).any():
            ok = False
    return {"converged": bool(ok), "active": [int(i) for i in active]}


def cmd_train(rc: RunConfig, resume=None, out=None) -> int:
    if resume is not None:
        cfg, topology, state = load_snapshot(resume)
    else:
        cfg = rc.sp
        topology = rc.topology.build(cfg.p)
        state = init_state(cfg, topology, rc.run.seed)
    sp = SpatialPooler(cfg, topology, state)

    steps, values = rc.run.steps, rc.run.patterns
    if steps > 0 and not values:
        raise ConfigError("run.patterns must list at least one value when run.steps > 0")
    patterns = [rc.encoder.encode(v) for v in values]

    metrics_path = rc.run.metrics_path
    mode = "a" if resume is not None else "w"
    with contextlib.ExitStack() as stack:
        sink = None
        if metrics_path:
            Path(metrics_path).parent.mkdir(parents=True, exist_ok=True)
            sink = MetricsLog(stack.enter_context(open(metrics_path, mode, encoding="ascii")))
        counts = []
        for t in range(steps):
            _, met = sp.compute(patterns[t % len(patterns)], learn=rc.run.learn)
            counts.append(met.active_count)
            if sink:
                sink.write(met.record(with_active=rc.run.log_active))
        summary = {
            "summary": True,
            "steps": steps,
            "step_count": sp.state.step_count,
            "mean_density": float(np.mean(counts)) / cfg.m if counts else 0.0,
            "radius": sp.state.inhibition_radius,
        }
        if len(patterns) == 1:
            summary.update(convergence_summary(sp, patterns[0]))
        if sink:
            sink.write(summary)

    target = out or rc.run.snapshot_path
    if target:
        Path(target).parent.mkdir(parents=True, exist_ok=True)
        save_snapshot(target, cfg, topology, sp.state)
    log.info("trained %d steps; mean density %.4f", steps, summary["mean_density"])
    return EXIT_OK


# ---------------------------------------------------------------- validate


def cmd_validate(rc: RunConfig, out=None, overrides: dict | None = None) -> int:
    rows = validation_rows(rc, overrides=overrides)
    text = format_table(rows)
    with _output(out) as fh:
        fh.write(text)
    if all_passed(rows):
        return EXIT_OK
    bad = ", ".join(r.name for r in rows if not r.informational and not r.passed)
    print(f"validation failed: {bad}", file=sys.stderr)
    return EXIT_FAIL


# ----------------------------------------------------------------- inspect


def _histogram(values: np.ndarray, bins: int = 10) -> list[str]:
    counts, edges = np.histogram(values, bins=bins, range=(0.0, 1.0))
    width = max(1, counts.max())
    return [
        f"  [{lo:.1f}, {hi:.1f}{']' if k == bins - 1 else ')'} {c:>7d} {'#' * int(40 * c / width)}"
        for k, (lo, hi, c) in enumerate(zip(edges[:-1], edges[1:], counts))
    ]


def inspect_text(path) -> str:
    cfg, topology, state = load_snapshot(path)
    mu_a, mu_o = duty_cycles(state)
    lines = [f"snapshot: {path}", "config:"]
    lines += [f"  {k} = {v}" for k, v in cfg.to_dict().items()]
    lines += [
        f"topology: mode={topology.mode} m={topology.m} q={topology.q} p={topology.p}"
        + (f" radius={topology.radius}" if topology.radius else ""),
        f"step_count: {state.step_count}",
        f"inhibition_radius: {state.inhibition_radius}",
        f"connected synapses: {int((state.phi >= cfg.rho_s).sum())} / {state.phi.size}",
        "permanence histogram:",
        *_histogram(state.phi.ravel()),
        f"boost: min={state.boost.min():.4f} mean={state.boost.mean():.4f} "
        f"max={state.boost.max():.4f}",
        f"active duty cycle: min={mu_a.min():.4f} mean={mu_a.mean():.4f} max={mu_a.max():.4f}",
        f"overlap duty cycle: min={mu_o.min():.4f} mean={mu_o.mean():.4f} max={mu_o.max():.4f}",
    ]
    return "\n".join(lines) + "\n"


def cmd_inspect(snapshot_path, out=None) -> int:
    text = inspect_text(snapshot_path)
    with _output(out) as fh:
        fh.write(text)
    return EXIT_OK


# -------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="splab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("design", "write the analytical report for a config"),
        ("train", "run the Spatial Pooler and write metrics and a snapshot"),
        ("validate", "compare analytical predictions with oracle estimates"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="INI config path")
        p.add_argument("--seed", type=int, help="override every seed in the config")
        p.add_argument("--out", help="output path (default: stdout, or run.snapshot_path)")
        if name == "train":
            p.add_argument("--snapshot", help="resume from this snapshot")

    p = sub.add_parser("inspect", help="summarise a snapshot")
    p.add_argument("snapshot_pos", nargs="?", metavar="SNAPSHOT")
    p.add_argument("--snapshot", help="snapshot path")
    p.add_argument("--out", help="output path (default: stdout)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "inspect":
            path = args.snapshot or args.snapshot_pos
            if path is None:
                print("inspect: a snapshot path is required", file=sys.stderr)
                return EXIT_IO
            return cmd_inspect(path, args.out)
        rc = load_config(args.config)
        if args.seed is not None:
            rc = rc.with_seed(args.seed)
        if args.command == "design":
            return cmd_design(rc, args.out)
        if args.command == "train":
            return cmd_train(rc, args.snapshot, args.out)
        return cmd_validate(rc, args.out)
    except (ConfigSyntaxError, SnapshotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
