"""Spatial Pooler runtime: overlap, inhibition, learning and boosting.

Every phase is a plain function over numpy arrays so it can be tested in
isolation; :func:`step` composes them.  Permanences held in an
:class:`SpState` always sit on a 1e-6 grid (see :func:`quantize`), which
keeps the fixed-point snapshot format lossless.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError
from .sdr import Sdr
from .topology import Topology, gather_inputs

PERM_SCALE = 1_000_000

CONSTANT = "constant"
ADAPTIVE = "adaptive"


def quantize(phi: np.ndarray) -> np.ndarray:
    """Snap permanences to the nearest multiple of 1e-6."""
    return np.round(np.asarray(phi, dtype=np.float64) * PERM_SCALE) / PERM_SCALE


@dataclass(frozen=True)
class SpConfig:
    """Spatial Pooler parameters.

    ``inhibition_radius=None`` means global inhibition (radius ``m - 1``).
    In ``adaptive`` mode the radius is recomputed from the connected
    synapses after every learning step and the configured value is ignored.
    """

    m: int
    q: int
    p: int
    phi_plus: float = 0.05
    phi_minus: float = 0.05
    phi_sigma: float = 0.1
    rho_s: float = 0.5
    rho_d: int = 2
    rho_c: int = 8
    s_duty: float = 0.01
    s_boost: float = 0.1
    beta_0: float = 3.0
    tau: int = 100
    inhibition_mode: str = CONSTANT
    inhibition_radius: int | None = None

    def __post_init__(self):
        for name in ("m", "q", "p"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"sp.{name} must be positive")
        if self.q > self.p:
            raise ConfigError(
                f"q={self.q} exceeds p={self.p}: connection probability requires q < p"
            )
        for name in ("phi_plus", "phi_minus", "phi_sigma", "rho_s", "s_boost"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"sp.{name} must lie in [0, 1] (got {v})")
        if not 0.0 < self.s_duty < 1.0:
            raise ConfigError(f"sp.s_duty must lie in (0, 1) (got {self.s_duty})")
        if self.rho_s - self.phi_sigma < 0 or self.rho_s + self.phi_sigma > 1:
            raise ConfigError(
                "permanence init window rho_s +/- phi_sigma must stay inside [0, 1]"
            )
        if not 0 <= self.rho_d <= self.q:
            raise ConfigError(f"sp.rho_d must lie in [0, q] (got {self.rho_d})")
        if self.rho_c < 1:
            raise ConfigError(f"sp.rho_c must be >= 1 (got {self.rho_c})")
        if self.beta_0 < 1:
            raise ConfigError(f"sp.beta_0 must be >= 1 (got {self.beta_0})")
        if self.tau < 1:
            raise ConfigError(f"sp.tau must be >= 1 (got {self.tau})")
        if self.inhibition_mode not in (CONSTANT, ADAPTIVE):
            raise ConfigError("sp.inhibition_mode must be constant|adaptive")
        if self.inhibition_radius is not None and self.inhibition_radius < 1:
            raise ConfigError("sp.inhibition_radius must be >= 1")

    @property
    def initial_radius(self) -> int:
        return self.m - 1 if self.inhibition_radius is None else self.inhibition_radius

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(eq=False)
class SpState:
    phi: np.ndarray
    boost: np.ndarray
    act_hist: np.ndarray
    ovlp_hist: np.ndarray
    hist_cursor: int = 0
    inhibition_radius: int = 1
    step_count: int = 0

    def copy(self) -> "SpState":
        return SpState(
            self.phi.copy(),
            self.boost.copy(),
            self.act_hist.copy(),
            self.ovlp_hist.copy(),
            self.hist_cursor,
            self.inhibition_radius,
            self.step_count,
        )

    def __eq__(self, other):
        if not isinstance(other, SpState):
            return NotImplemented
        return (
            np.array_equal(self.phi, other.phi)
            and np.array_equal(self.boost, other.boost)
            and np.array_equal(self.act_hist, other.act_hist)
            and np.array_equal(self.ovlp_hist, other.ovlp_hist)
            and (self.hist_cursor, self.inhibition_radius, self.step_count)
            == (other.hist_cursor, other.inhibition_radius, other.step_count)
        )


# ---------------------------------------------------------------- phases


def init_permanences(cfg: SpConfig, seed) -> np.ndarray:
    lo, hi = cfg.rho_s - cfg.phi_sigma, cfg.rho_s + cfg.phi_sigma
    if lo < 0 or hi > 1:
        raise ConfigError("permanence init window rho_s +/- phi_sigma escapes [0, 1]")
    rng = np.random.default_rng(seed)
    return quantize(rng.uniform(lo, hi, size=(cfg.m, cfg.q)))


def connected_mask(phi: np.ndarray, rho_s: float) -> np.ndarray:
    return (np.asarray(phi) >= rho_s).astype(np.uint8)


def compute_overlap(X, con_syn, boost, rho_d) -> tuple[np.ndarray, np.ndarray]:
    """Raw overlap per column and the boosted, thresholded overlap."""
    X = np.asarray(X)
    con_syn = np.asarray(con_syn)
    boost = np.asarray(boost, dtype=np.float64)
    if X.shape != con_syn.shape or boost.shape != (X.shape[0],):
        raise DimensionError(
            f"shape mismatch: X {X.shape}, ConSyn {con_syn.shape}, boost {boost.shape}"
        )
    ovlp = np.einsum("ik,ik->i", X.astype(np.int64), con_syn.astype(np.int64))
    r_ovlp = np.where(ovlp >= rho_d, ovlp * boost, 0.0)
    return ovlp, r_ovlp


def neighborhood_mask(m: int, inhibition_radius: int) -> np.ndarray:
    idx = np.arange(m)
    return (np.abs(idx[:, None] - idx[None, :]) <= inhibition_radius).astype(np.uint8)


def inhibit(r_ovlp, N, rho_c: int) -> np.ndarray:
    """Keep columns at or above the rho_c-th largest value of their neighborhood.

    Ties at the threshold all pass, so more than ``rho_c`` columns may win.
    A neighborhood smaller than ``rho_c`` uses its smallest member.
    """
    r = np.asarray(r_ovlp, dtype=np.float64)
    N = np.asarray(N, dtype=bool)
    m = r.shape[0]
    if N.shape != (m, m):
        raise DimensionError(f"neighborhood {N.shape} does not match {m} columns")
    if N.all():
        k = min(rho_c, m)
        gamma = np.full(m, np.partition(r, m - k)[m - k])
    else:
        vals = np.where(N, r[None, :], -np.inf)
        desc = -np.sort(-vals, axis=1)
        k = np.minimum(rho_c, N.sum(axis=1))
        gamma = desc[np.arange(m), k - 1]
    return ((r >= gamma) & (r > 0)).astype(np.uint8)


def adapt_permanences(phi, X, r_act_col, phi_plus, phi_minus) -> np.ndarray:
    phi = np.asarray(phi, dtype=np.float64)
    X = np.asarray(X)
    act = np.asarray(r_act_col).astype(bool)
    out = phi.copy()
    delta = np.where(X[act] == 1, phi_plus, -phi_minus)
    out[act] = np.clip(phi[act] + delta, 0.0, 1.0)
    return out


def update_duty_cycles(state: SpState, r_act_col, ovlp_flags) -> tuple[np.ndarray, np.ndarray]:
    """Write this step into the circular histories and return (mu_a, mu_o).

    Slots not yet written count as inactive.
    """
    c = state.hist_cursor
    state.act_hist[:, c] = np.asarray(r_act_col, dtype=np.uint8)
    state.ovlp_hist[:, c] = np.asarray(ovlp_flags, dtype=np.uint8)
    tau = state.act_hist.shape[1]
    state.hist_cursor = (c + 1) % tau
    return duty_cycles(state)


def duty_cycles(state: SpState) -> tuple[np.ndarray, np.ndarray]:
    tau = state.act_hist.shape[1]
    return state.act_hist.sum(axis=1) / tau, state.ovlp_hist.sum(axis=1) / tau


def min_duty_cycle(mu_a, N, s_duty: float) -> np.ndarray:
    mu_a = np.asarray(mu_a, dtype=np.float64)
    N = np.asarray(N, dtype=bool)
    return s_duty * np.where(N, mu_a[None, :], 0.0).max(axis=1)


def update_boost(mu_a, mu_min, beta_0: float) -> np.ndarray:
    """Boost factor per column, linear in mu_a / mu_min below the minimum."""
    mu_a = np.asarray(mu_a, dtype=np.float64)
    mu_min = np.asarray(mu_min, dtype=np.float64)
    b = np.ones_like(mu_a)
    starved = mu_min == 0
    low = ~starved & (mu_a <= mu_min)
    b[starved] = beta_0
    b[low] = 1.0 + (beta_0 - 1.0) * (1.0 - mu_a[low] / mu_min[low])
    return b


def permanence_boost(phi, mu_o, mu_min, s_boost: float, rho_s: float) -> np.ndarray:
    phi = np.asarray(phi, dtype=np.float64)
    rows = np.asarray(mu_o) < np.asarray(mu_min)
    out = phi.copy()
    out[rows] = np.clip(phi[rows] + s_boost * rho_s, 0.0, 1.0)
    return out


def mean_connected_distance(topology: Topology, con_syn) -> float:
    """Mean column-to-input distance over connected synapses.

    Column ``i`` sits at position ``i``; input ``r`` is mapped onto the
    column line at ``r * m / p``.
    """
    con = np.asarray(con_syn, dtype=np.float64)
    pos = np.arange(topology.m, dtype=np.float64)[:, None]
    D = np.abs(pos - topology.csi * (topology.m / topology.p)) * con
    return float(D.sum() / max(1.0, con.sum()))


def update_inhibition_radius(topology: Topology, con_syn) -> int:
    return max(1, math.floor(mean_connected_distance(topology, con_syn)))


# ---------------------------------------------------------------- driver


def init_state(cfg: SpConfig, topology: Topology, seed) -> SpState:
    if (topology.m, topology.q, topology.p) != (cfg.m, cfg.q, cfg.p):
        raise ConfigError("topology dimensions (m, q, p) differ from SpConfig")
    phi = init_permanences(cfg, seed)
    state = SpState(
        phi=phi,
        boost=np.ones(cfg.m),
        act_hist=np.zeros((cfg.m, cfg.tau), dtype=np.uint8),
        ovlp_hist=np.zeros((cfg.m, cfg.tau), dtype=np.uint8),
        inhibition_radius=cfg.initial_radius,
    )
    if cfg.inhibition_mode == ADAPTIVE:
        state.inhibition_radius = update_inhibition_radius(
            topology, connected_mask(phi, cfg.rho_s)
        )
    return state


@dataclass
class StepMetrics:
    step: int
    ovlp: np.ndarray
    r_ovlp: np.ndarray
    active: np.ndarray
    boost: np.ndarray
    radius: int
    perm_boosted: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def active_count(self) -> int:
        return int(self.active.sum())

    def record(self, with_active: bool = False) -> dict:
        rec = {
            "step": self.step,
            "active_count": self.active_count,
            "mean_ovlp": float(self.ovlp.mean()),
            "max_ovlp": int(self.ovlp.max()),
            "mean_boost": float(self.boost.mean()),
            "radius": int(self.radius),
        }
        if with_active:
            rec["active"] = [int(i) for i in np.flatnonzero(self.active)]
        return rec


def step(
    state: SpState, cfg: SpConfig, topology: Topology, pattern, learn: bool = False
) -> tuple[Sdr, StepMetrics]:
    """Run one Spatial Pooler cycle; with ``learn=False`` nothing is mutated."""
    X = gather_inputs(topology, pattern)
    con = connected_mask(state.phi, cfg.rho_s)
    ovlp, r_ovlp = compute_overlap(X, con, state.boost, cfg.rho_d)
    N = neighborhood_mask(cfg.m, state.inhibition_radius)
    active = inhibit(r_ovlp, N, cfg.rho_c)
    boost_used = state.boost
    perm_boosted = np.zeros(cfg.m, dtype=bool)

    if learn:
        phi = quantize(adapt_permanences(state.phi, X, active, cfg.phi_plus, cfg.phi_minus))
        mu_a, mu_o = update_duty_cycles(state, active, ovlp >= cfg.rho_d)
        mu_min = min_duty_cycle(mu_a, N, cfg.s_duty)
        state.boost = update_boost(mu_a, mu_min, cfg.beta_0)
        perm_boosted = mu_o < mu_min
        state.phi = quantize(permanence_boost(phi, mu_o, mu_min, cfg.s_boost, cfg.rho_s))
        if cfg.inhibition_mode == ADAPTIVE:
            state.inhibition_radius = update_inhibition_radius(
                topology, connected_mask(state.phi, cfg.rho_s)
            )
        state.step_count += 1

    metrics = StepMetrics(
        step=state.step_count,
        ovlp=ovlp,
        r_ovlp=r_ovlp,
        active=active,
        boost=boost_used,
        radius=state.inhibition_radius,
        perm_boosted=perm_boosted,
    )
    return Sdr(active), metrics


class SpatialPooler:
    """Owns a config, a topology and a mutable state."""

    def __init__(self, cfg: SpConfig, topology: Topology, state: SpState | None = None, seed=0):
        self.cfg = cfg
        self.topology = topology
        self.state = state if state is not None else init_state(cfg, topology, seed)

    def compute(self, pattern, learn: bool = False) -> tuple[Sdr, StepMetrics]:
        return step(self.state, self.cfg, self.topology, pattern, learn)

    def infer(self, pattern) -> Sdr:
        return self.compute(pattern, learn=False)[0]
