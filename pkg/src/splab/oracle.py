"""Independent estimators used to check the analytical model.

Monte-Carlo estimators draw fresh topologies, permanences and inputs
through the simulator's own initialisation code; enumerators walk every
outcome exhaustively.  None of them call into :mod:`splab.analysis`.

Trial ``i`` of a run seeded with ``seed`` uses
``numpy.random.SeedSequence([seed, i])``, so results do not depend on the
order in which trials are evaluated.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import pooler
from .errors import DomainError
from .topology import GLOBAL, RADIUS, fanouts, init_global, init_radius, gather_inputs

MAX_ENUM_BITS = 20


def trial_seed(seed: int, i: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), int(i)])


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    trials: int
    seed: int

    @classmethod
    def from_samples(cls, samples, seed: int) -> "McEstimate":
        x = np.asarray(samples, dtype=np.float64)
        n = x.size
        se = float(x.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(float(x.mean()), se, n, seed)

    def sigma_distance(self, value: float) -> float:
        diff = abs(self.mean - value)
        if self.std_error == 0:
            return 0.0 if diff == 0 else math.inf
        return diff / self.std_error


def _topology(m, q, p, mode, radius, seed):
    if mode == GLOBAL:
        return init_global(m, q, p, seed)
    if mode == RADIUS:
        return init_radius(m, q, p, radius, seed)
    raise ValueError(f"unknown topology mode {mode!r}")


def mc_connection_stats(
    m: int, q: int, p: int, mode: str, trials: int, seed: int, radius: int | None = None
) -> dict[str, McEstimate]:
    """Connection statistics over ``trials`` independent topologies.

    Each trial draws a topology and one probe input uniformly at random;
    per-input estimates are taken at the probe, so their expectation is
    the mean over all inputs.
    """
    samples = {k: [] for k in ("p_connect", "fanout", "p_never_connected", "unobserved")}
    for t in range(trials):
        topo_seed, probe_seed = trial_seed(seed, t).spawn(2)
        topo = _topology(m, q, p, mode, radius, topo_seed)
        fan = fanouts(topo)
        r = int(np.random.default_rng(probe_seed).integers(p))
        samples["p_connect"].append(fan[r] / m)
        samples["fanout"].append(fan[r])
        samples["p_never_connected"].append(float(fan[r] == 0))
        samples["unobserved"].append(int(np.count_nonzero(fan == 0)))
    return {k: McEstimate.from_samples(v, seed) for k, v in samples.items()}


def mc_initial_activity(
    cfg: pooler.SpConfig,
    mode: str,
    p_x: float,
    trials: int,
    seed: int,
    radius: int | None = None,
) -> dict[str, McEstimate]:
    """Initial-state activity over fresh topologies, permanences and inputs.

    Input bits are iid Bernoulli(``p_x``).  Counts use ``>= rho_d``.
    """
    keys = (
        "active_synapses",
        "active_connected",
        "active_cols_input",
        "active_cols",
        "p_active_col",
        "initial_radius",
    )
    samples = {k: [] for k in keys}
    for t in range(trials):
        s_topo, s_perm, s_in, s_probe = trial_seed(seed, t).spawn(4)
        topo = _topology(cfg.m, cfg.q, cfg.p, mode, radius, s_topo)
        phi = pooler.init_permanences(cfg, s_perm)
        bits = (np.random.default_rng(s_in).random(cfg.p) < p_x).astype(np.uint8)
        X = gather_inputs(topo, bits)
        con = pooler.connected_mask(phi, cfg.rho_s)
        ac = X.sum(axis=1)
        actcon = (X & con).sum(axis=1)
        probe = int(np.random.default_rng(s_probe).integers(cfg.m))
        samples["active_synapses"].append(ac[probe])
        samples["active_connected"].append(actcon[probe])
        samples["active_cols_input"].append(int(np.count_nonzero(ac >= cfg.rho_d)))
        samples["active_cols"].append(int(np.count_nonzero(actcon >= cfg.rho_d)))
        samples["p_active_col"].append(float(actcon[probe] >= cfg.rho_d))
        samples["initial_radius"].append(pooler.mean_connected_distance(topo, con))
    return {k: McEstimate.from_samples(v, seed) for k, v in samples.items()}


def enumerate_binomial_tail(rho_d: int, q: int, pi: float) -> float:
    """Exact P(at least rho_d successes) by summing over all 2^q outcomes."""
    if q > MAX_ENUM_BITS:
        raise DomainError(f"refusing to enumerate 2^{q} outcomes (limit 2^{MAX_ENUM_BITS})")
    masks = np.arange(2**q, dtype=np.uint64)
    ones = np.bitwise_count(masks).astype(np.int64)
    keep = ones >= rho_d
    # 0.0 ** 0 == 1.0, so the pi in {0, 1} corners come out exact
    weights = np.power(pi, ones[keep]) * np.power(1.0 - pi, q - ones[keep])
    return math.fsum(weights.tolist())


def all_inputs(p: int) -> np.ndarray:
    """Every binary input of length p, one per row (row r is the binary expansion of r)."""
    if p > MAX_ENUM_BITS:
        raise DomainError(f"refusing to enumerate 2^{p} inputs (limit 2^{MAX_ENUM_BITS})")
    r = np.arange(2**p, dtype=np.int64)[:, None]
    return ((r >> np.arange(p)) & 1).astype(np.uint8)


def brute_force_aliasing(
    state: pooler.SpState,
    cfg: pooler.SpConfig,
    topology,
    minoverlap: int,
    reference,
) -> tuple[int, int]:
    """Count inputs whose inference output equals the output for ``reference``.

    ``minoverlap`` replaces the dendrite threshold for the run.  Returns
    ``(count_matching, 2**p)``.
    """
    run_cfg = dataclasses.replace(cfg, rho_d=minoverlap)
    target, _ = pooler.step(state, run_cfg, topology, reference, learn=False)
    target_bits = target.bits
    count = 0
    for bits in all_inputs(topology.p):
        out, _ = pooler.step(state, run_cfg, topology, bits, learn=False)
        if np.array_equal(out.bits, target_bits):
            count += 1
    return count, 2**topology.p


# ----------------------------------------------------------- comparisons


@dataclass(frozen=True)
class ComparisonRow:
    source: str
    name: str
    analytical: float
    empirical: float
    std_error: float
    tolerance_sigma: float
    abs_tol: float = 0.0
    informational: bool = False

    @property
    def sigma_distance(self) -> float:
        diff = abs(self.analytical - self.empirical)
        if self.std_error == 0:
            return 0.0 if diff <= self.abs_tol else math.inf
        return diff / self.std_error

    @property
    def passed(self) -> bool:
        diff = abs(self.analytical - self.empirical)
        return diff <= self.tolerance_sigma * self.std_error + self.abs_tol

    @property
    def verdict(self) -> str:
        if self.informational:
            return "INFO"
        return "PASS" if self.passed else "FAIL"


def format_table(rows: list[ComparisonRow]) -> str:
    head = f"{'source':<10} {'name':<30} {'analytical':>14} {'empirical':>14} {'sigma':>8}  verdict"
    lines = [head, "-" * len(head)]
    for r in rows:
        sd = r.sigma_distance
        sd_text = "inf" if math.isinf(sd) else f"{sd:.2f}"
        lines.append(
            f"{r.source:<10} {r.name:<30} {r.analytical:>14.6g} {r.empirical:>14.6g} "
            f"{sd_text:>8}  {r.verdict}"
        )
    return "\n".join(lines) + "\n"
