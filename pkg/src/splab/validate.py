"""Pair every analytical quantity with an oracle estimate."""

from __future__ import annotations

import dataclasses

import numpy as np

from . import analysis, oracle
from .config import RunConfig
from .pooler import SpConfig, SpState, step
from .topology import Topology

MC_ABS_TOL = 1e-9
EXACT_TOL = 1e-12


def tiny_disjoint_pooler() -> tuple[SpConfig, Topology, SpState, np.ndarray]:
    """Two columns over disjoint halves of an 8-bit input.

    Column 0 has three connected synapses, column 1 has two.  Returns the
    config, wiring, state and a reference input that activates column 0
    only (at a dendrite threshold of 2).
    """
    cfg = SpConfig(m=2, q=4, p=8, rho_d=2, rho_c=2, tau=10, phi_sigma=0.0)
    topo = Topology(2, 4, 8, np.array([[0, 1, 2, 3], [4, 5, 6, 7]]))
    phi = np.array([[0.9, 0.8, 0.6, 0.1], [0.7, 0.2, 0.55, 0.3]])
    state = SpState(
        phi=phi,
        boost=np.ones(2),
        act_hist=np.zeros((2, 10), dtype=np.uint8),
        ovlp_hist=np.zeros((2, 10), dtype=np.uint8),
        inhibition_radius=1,
    )
    reference = np.array([1, 1, 0, 0, 0, 0, 0, 0], dtype=np.uint8)
    return cfg, topo, state, reference


def validation_rows(
    rc: RunConfig, trials: int | None = None, seed: int | None = None, overrides: dict | None = None
) -> list[oracle.ComparisonRow]:
    trials = rc.validate.trials if trials is None else trials
    seed = rc.validate.seed if seed is None else seed
    nsig = rc.validate.tolerance_sigma
    cfg, topo = rc.sp, rc.topology
    p_x = rc.input_density
    report = analysis.build_report(cfg, topo.mode, topo.radius, p_x, rc.encoder.n, rc.encoder.w)
    values = dataclasses.asdict(report)
    values.update(overrides or {})

    conn = oracle.mc_connection_stats(cfg.m, cfg.q, cfg.p, topo.mode, trials, seed, topo.radius)
    act = oracle.mc_initial_activity(cfg, topo.mode, p_x, trials, seed, topo.radius)

    def mc_row(field_name, est, informational=False):
        src = analysis.AnalysisReport.SOURCES[field_name][0]
        return oracle.ComparisonRow(
            src, field_name, float(values[field_name]), est.mean, est.std_error, nsig,
            MC_ABS_TOL, informational,
        )

    rows = [
        mc_row("p_connect_corrected", conn["p_connect"]),
        mc_row("p_connect", conn["p_connect"], informational=True),
        mc_row("expected_fanout_corrected", conn["fanout"]),
        mc_row("p_never_connected_corrected", conn["p_never_connected"]),
        mc_row("expected_unobserved_corrected", conn["unobserved"]),
        mc_row("expected_active_synapses", act["active_synapses"]),
        mc_row("expected_active_connected", act["active_connected"]),
        mc_row("expected_active_cols_input", act["active_cols_input"]),
        mc_row("p_active_col", act["p_active_col"]),
        mc_row("expected_active_cols", act["active_cols"]),
        mc_row("initial_inhibition", act["initial_radius"]),
    ]

    pi_ac = report.p_actcon
    if cfg.q <= oracle.MAX_ENUM_BITS:
        rows.append(
            oracle.ComparisonRow(
                "pactcol", "binomial_tail_exact", float(values["p_active_col"]),
                oracle.enumerate_binomial_tail(cfg.rho_d, cfg.q, pi_ac), 0.0, nsig, EXACT_TOL,
            )
        )

    tcfg, ttopo, tstate, ref = tiny_disjoint_pooler()
    active, _ = step(tstate, tcfg, ttopo, ref)
    formula = values.get("p_same_output_tiny")
    if formula is None:
        formula = analysis.p_same_output(tstate, ttopo, active, tcfg.rho_d, tcfg.rho_s)
    count, total = oracle.brute_force_aliasing(tstate, tcfg, ttopo, tcfg.rho_d, ref)
    rows.append(
        oracle.ComparisonRow("sim", "p_same_output_tiny", float(formula), count / total, 0.0, nsig, EXACT_TOL)
    )
    return rows


def all_passed(rows) -> bool:
    return all(r.passed for r in rows if not r.informational)
