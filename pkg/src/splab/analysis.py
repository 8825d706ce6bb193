"""Closed-form model of the Spatial Pooler.

Connection probabilities, expected coverage, initial activation
statistics, output quality/aliasing counts, and the bookkeeping used to
follow a column through the learning phases.  Everything here is a pure
function of its arguments.

Two variants of the connection probability are carried side by side:

* ``product`` -- ``1 - prod_{k=0..q} (1 - 1/(W - k))``, which telescopes to
  ``(q + 1) / W``;
* ``corrected`` -- ``q / W``, the exact probability for ``q`` draws
  without replacement, which is what the simulator produces.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction
from dataclasses import dataclass, field, fields
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

PRODUCT = "product"
SINGLE = "single"
CORRECTED = "corrected"


def _check_form(form: str) -> None:
    if form not in (PRODUCT, CORRECTED):
        raise ValueError(f"form must be {PRODUCT!r} or {CORRECTED!r}, got {form!r}")


# ------------------------------------------------------------ connection


def p_connect_product(q: int, p: int) -> float:
    if not 0 <= q < p:
        raise DomainError(f"connection probability needs 0 <= q < p (q={q}, p={p})")
    prod = 1.0
    for k in range(q + 1):
        prod *= 1.0 - 1.0 / (p - k)
    return 1.0 - prod


def p_connect(q: int, p: int, form: str = PRODUCT) -> float:
    """Probability that a given input feeds a given column (global wiring)."""
    _check_form(form)
    if form == CORRECTED:
        if not 0 <= q <= p:
            raise DomainError(f"connection probability needs 0 <= q <= p (q={q}, p={p})")
        return q / p
    product = p_connect_product(q, p)
    closed = (q + 1) / p
    if abs(product - closed) > 1e-12:
        raise ArithmeticError(f"telescoping identity broken: {product!r} vs {closed!r}")
    return product


def _window(ccon: int, radius: int, p: int) -> tuple[int, int]:
    return max(0, ccon - radius), min(p - 1, ccon + radius)


def p_connect_radius(q: int, radius: int, r: int, ccon: int, p: int, form: str = PRODUCT) -> float:
    """Connection probability under radius-restricted wiring.

    ``W`` is the true size of ``[ccon - radius, ccon + radius]`` after
    truncation at ``[0, p)``.  Inputs outside the window never connect.
    """
    _check_form(form)
    lo, hi = _window(ccon, radius, p)
    W = hi - lo + 1
    need = q + 1 if form == PRODUCT else q
    if W < need:
        raise DomainError(f"window of {W} inputs too small for q={q} ({form} form)")
    if not lo <= r <= hi:
        return 0.0
    if form == CORRECTED:
        return q / W
    prod = 1.0
    for k in range(q + 1):
        prod *= 1.0 - 1.0 / (W - k)
    return 1.0 - prod


def radius_connection_matrix(m: int, q: int, p: int, radius: int, form: str = PRODUCT) -> np.ndarray:
    """m x p matrix of per-(column, input) connection probabilities."""
    from .topology import radius_centers

    centers = radius_centers(m, p)
    out = np.zeros((m, p))
    for i, c in enumerate(centers):
        lo, hi = _window(int(c), radius, p)
        out[i, lo : hi + 1] = p_connect_radius(q, radius, lo, int(c), p, form)
    return out


def expected_fanout(m: int, pc: float) -> float:
    return m * pc


def p_never_connected(pc: float, m: int) -> float:
    return (1.0 - pc) ** m


def expected_unobserved(p: int, pnc: float) -> float:
    return p * pnc


@dataclass(frozen=True)
class Coverage:
    feasible: bool
    m: int | None = None
    q: int | None = None
    expected_unobserved: float | None = None


def min_params_for_coverage(
    p: int,
    q_candidates: Iterable[int],
    m_candidates: Iterable[int],
    target_unobserved: float,
    form: str = PRODUCT,
) -> Coverage:
    """Smallest m*q on the grid whose expected unobserved-input count meets the target.

    Ties on m*q go to the smaller m.  A strictly-zero target is never met
    since ``(1 - pc)^m > 0`` whenever ``pc < 1``.
    """
    qs, ms = sorted(set(q_candidates)), sorted(set(m_candidates))
    if not qs or not ms:
        raise DomainError("candidate grids must be non-empty")
    best = None
    for q in qs:
        if form == PRODUCT and q >= p:
            continue
        if q > p:
            continue
        pc = p_connect(q, p, form)
        for m in ms:
            eu = expected_unobserved(p, p_never_connected(pc, m))
            if eu <= target_unobserved:
                key = (m * q, m)
                if best is None or key < best[0]:
                    best = (key, m, q, eu)
    if best is None:
        return Coverage(False)
    return Coverage(True, best[1], best[2], best[3])


# ------------------------------------------------------- initial activity


def expected_active_synapses(q: int, p_x: float) -> float:
    return q * p_x


def p_connected_at_init(phi_sigma: float) -> float:
    # uniform window centred on rho_s; a zero-width window puts every synapse at rho_s
    return 0.5 if phi_sigma > 0 else 1.0


def expected_active_connected(q: int, p_x: float, p_conn: float = 0.5) -> float:
    return q * p_x * p_conn


def _log_pmf(t: int, q: int, pi: float) -> float:
    return (
        math.lgamma(q + 1)
        - math.lgamma(t + 1)
        - math.lgamma(q - t + 1)
        + t * math.log(pi)
        + (q - t) * math.log1p(-pi)
    )


def binomial_tail(rho_d: int, q: int, pi: float) -> float:
    """P(Bin(q, pi) >= rho_d), summed in log space over the shorter side."""
    if rho_d < 0 or q < 0:
        raise DomainError(f"binomial tail needs rho_d >= 0 and q >= 0 (rho_d={rho_d}, q={q})")
    if not 0.0 <= pi <= 1.0:
        raise DomainError(f"success probability {pi} outside [0, 1]")
    if rho_d <= 0:
        return 1.0
    if rho_d > q:
        return 0.0
    if pi == 0.0:
        return 0.0
    if pi == 1.0:
        return 1.0
    if rho_d - 1 < q * pi:
        lower = math.fsum(math.exp(_log_pmf(t, q, pi)) for t in range(rho_d))
        return min(1.0, max(0.0, 1.0 - lower))
    upper = math.fsum(math.exp(_log_pmf(t, q, pi)) for t in range(rho_d, q + 1))
    return min(1.0, upper)


def expected_active_columns(m: int, rho_d: int, q: int, pi_ac: float) -> float:
    return m * binomial_tail(rho_d, q, pi_ac)


# ------------------------------------------------------ initial inhibition


def window_mean_distance(i: int, lo: int, hi: int, m: int, p: int) -> float:
    """Mean distance from column ``i`` to a uniform input in ``[lo, hi]``.

    Inputs are placed on the column line at ``r * m / p``.
    """
    r = np.arange(lo, hi + 1, dtype=np.float64)
    return float(np.abs(i - r * (m / p)).mean())


def expected_initial_radius(m: int, q: int, p: int, windows: Sequence[tuple[int, int]]) -> float:
    """Expected initial inhibition radius before flooring.

    Every column expects q/2 connected synapses, so the radius is the
    summed expected connected distance divided by the expected connected
    count ``m * q / 2``.
    """
    per_column = [
        0.5 * q * window_mean_distance(i, lo, hi, m, p) for i, (lo, hi) in enumerate(windows)
    ]
    return math.fsum(per_column) / (0.5 * q * m)


def initial_inhibition(cfg, topology) -> float:
    windows = [topology.window(i) for i in range(topology.m)]
    return expected_initial_radius(cfg.m, cfg.q, cfg.p, windows)


def topology_windows(m: int, p: int, mode: str, radius: int | None = None) -> list[tuple[int, int]]:
    from .topology import GLOBAL, radius_centers

    if mode == GLOBAL:
        return [(0, p - 1)] * m
    return [_window(int(c), radius, p) for c in radius_centers(m, p)]


def _check_split(k: int, inhibition: float) -> None:
    if k < 1 or inhibition < k:
        raise DomainError(f"need inhibition >= k >= 1 (k={k}, inhibition={inhibition})")


def p_initial_activation(k: int, inhibition, p_actcol) -> Fraction:
    """Share of P(ActCol) that wins inhibition at the first step.

    Evaluated in exact rational arithmetic (floats convert exactly), so the
    activation and boost shares always add back to ``p_actcol``.
    """
    _check_split(k, inhibition)
    return Fraction(k) / Fraction(inhibition) * Fraction(p_actcol)


def p_initial_boost(k: int, inhibition, p_actcol) -> Fraction:
    _check_split(k, inhibition)
    inh = Fraction(inhibition)
    return (inh - k) / inh * Fraction(p_actcol)


# ----------------------------------------------------------------- quality


def pattern_capacity(n: int, w: int) -> int:
    if not 0 <= w <= n:
        raise DomainError(f"need 0 <= w <= n (w={w}, n={n})")
    return math.comb(n, w)


def connected_counts(phi: np.ndarray, rho_s: float) -> np.ndarray:
    return (np.asarray(phi) >= rho_s).sum(axis=1).astype(int)


def _active_mask(active_set, m: int) -> np.ndarray:
    mask = np.zeros(m, dtype=bool)
    idx = np.asarray(
        active_set.indices() if hasattr(active_set, "indices") else list(active_set), dtype=int
    )
    mask[idx] = True
    return mask


def p_same_output(state, topology, active_set, minoverlap: int, rho_s: float = 0.5) -> float:
    """Probability that a uniformly random input reproduces ``active_set``.

    Each input bit is independently 0/1 with probability 1/2 and columns
    are treated as independent.  A column's overlap is Bin(c_i, 1/2) where
    c_i is its connected-synapse count.
    """
    m = state.phi.shape[0]
    if topology is not None and topology.m != m:
        raise DomainError("topology and state disagree on column count")
    active = _active_mask(active_set, m)
    if not active.any():
        raise DomainError("active set is empty")
    c = connected_counts(state.phi, rho_s)
    prob = 1.0
    for i in range(m):
        tail = binomial_tail(minoverlap, int(c[i]), 0.5)
        prob *= tail if active[i] else 1.0 - tail
    return prob


def aliasing_coding_counts(
    state, minoverlap: int, active_set, rho_s: float = 0.5, active_form: str = SINGLE
) -> tuple[int, int]:
    """Number of input codings per column group that reproduce the output.

    Active columns contribute ``2^(q - c_i) * C(c_i, minoverlap)``
    (``active_form="single"``) or the full upper tail
    ``2^(q - c_i) * sum_{g >= minoverlap} C(c_i, g)`` (``"tail"``).
    Non-active columns contribute ``2^(q - c_i) * sum_{g < minoverlap} C(c_i, g)``.
    Python integers keep the products exact.
    """
    if active_form not in (SINGLE, "tail"):
        raise ValueError("active_form must be 'single' or 'tail'")
    q = state.phi.shape[1]
    active = _active_mask(active_set, state.phi.shape[0])
    c = connected_counts(state.phi, rho_s)
    act_count, non_count = 1, 1
    for i, ci in enumerate(int(v) for v in c):
        free = 2 ** (q - ci)
        if active[i]:
            if active_form == SINGLE:
                act_count *= free * math.comb(ci, minoverlap)
            else:
                act_count *= free * sum(math.comb(ci, g) for g in range(minoverlap, ci + 1))
        else:
            non_count *= free * sum(math.comb(ci, g) for g in range(0, minoverlap))
    return act_count, non_count


# ------------------------------------------------------------- convergence


class ColumnPhase(enum.IntEnum):
    NO_OVERLAP = 0
    OVERLAP_NO_ACTIVATION = 1
    OVERLAP_AND_ACTIVE = 2


_TRANSITION_LABEL = {
    (ColumnPhase.NO_OVERLAP, ColumnPhase.OVERLAP_NO_ACTIVATION): "permanence_boosting",
    (ColumnPhase.NO_OVERLAP, ColumnPhase.OVERLAP_AND_ACTIVE): "permanence_boosting",
    (ColumnPhase.OVERLAP_NO_ACTIVATION, ColumnPhase.OVERLAP_AND_ACTIVE): "overlap_boosting",
    (ColumnPhase.OVERLAP_AND_ACTIVE, ColumnPhase.OVERLAP_NO_ACTIVATION): "inhibited",
    (ColumnPhase.OVERLAP_AND_ACTIVE, ColumnPhase.NO_OVERLAP): "overlap_lost",
    (ColumnPhase.OVERLAP_NO_ACTIVATION, ColumnPhase.NO_OVERLAP): "overlap_lost",
}


@dataclass(frozen=True)
class Transition:
    step: int
    column: int
    source: ColumnPhase
    target: ColumnPhase
    via: str


def classify_phases(ovlp, active, rho_d: int) -> np.ndarray:
    """Phase per (step, column) from raw overlaps and activations."""
    ovlp = np.atleast_2d(np.asarray(ovlp))
    active = np.atleast_2d(np.asarray(active)).astype(bool)
    phase = np.full(ovlp.shape, ColumnPhase.NO_OVERLAP, dtype=np.int8)
    phase[ovlp >= rho_d] = ColumnPhase.OVERLAP_NO_ACTIVATION
    phase[(ovlp >= rho_d) & active] = ColumnPhase.OVERLAP_AND_ACTIVE
    return phase


def classify_convergence_state(ovlp, active, rho_d: int) -> tuple[np.ndarray, list[Transition]]:
    """Per-step column phases and the transition log.

    A column that stays active keeps emitting ``permanence_update`` events,
    one per step, since that is the phase in which its synapses learn.
    """
    phase = classify_phases(ovlp, active, rho_d)
    log: list[Transition] = []
    T, m = phase.shape
    for t in range(T):
        for i in range(m):
            cur = ColumnPhase(int(phase[t, i]))
            if t > 0:
                prev = ColumnPhase(int(phase[t - 1, i]))
                if prev != cur:
                    log.append(Transition(t, i, prev, cur, _TRANSITION_LABEL[(prev, cur)]))
                    continue
            if cur == ColumnPhase.OVERLAP_AND_ACTIVE:
                log.append(Transition(t, i, cur, cur, "permanence_update"))
    return phase, log


@dataclass
class PullEvents:
    attraction_1: int = 0
    attraction_0: int = 0
    detraction_1: int = 0
    detraction_0: int = 0
    per_synapse: np.ndarray | None = field(default=None, repr=False)

    @property
    def attraction(self) -> int:
        return self.attraction_1 + self.attraction_0

    @property
    def detraction(self) -> int:
        return self.detraction_1 + self.detraction_0


def synapse_pulls(X, active, boosted) -> np.ndarray:
    """Signed pull on every synapse: +1 up, -1 down, 0 untouched.

    Learning on an active column pulls toward its input bit; permanence
    boosting pulls every synapse of a starved column up.
    """
    X = np.asarray(X)
    active = np.asarray(active).astype(bool)[..., None]
    boosted = np.asarray(boosted).astype(bool)[..., None]
    learn = np.where(active, np.where(X == 1, 1, -1), 0)
    return np.where(learn != 0, learn, np.where(boosted, 1, 0)).astype(np.int8)


def detect_attraction_detraction(X_trace, active_trace, boosted_trace=None) -> PullEvents:
    """Count consecutive-step pulls on the same synapse.

    Traces are indexed ``[step, column, synapse]`` for inputs and
    ``[step, column]`` for activation and boosting.  Two consecutive pulls
    in the same direction are an attraction (of 1 when upward, of 0 when
    downward); opposite directions are a detraction, named after the bit
    the first pull favoured.
    """
    X_trace = np.asarray(X_trace)
    active_trace = np.asarray(active_trace)
    if boosted_trace is None:
        boosted_trace = np.zeros_like(active_trace)
    pulls = synapse_pulls(X_trace, active_trace, boosted_trace)
    a, b = pulls[:-1], pulls[1:]
    both = (a != 0) & (b != 0)
    ev = PullEvents(
        attraction_1=int(np.count_nonzero(both & (a == 1) & (b == 1))),
        attraction_0=int(np.count_nonzero(both & (a == -1) & (b == -1))),
        detraction_1=int(np.count_nonzero(both & (a == 1) & (b == -1))),
        detraction_0=int(np.count_nonzero(both & (a == -1) & (b == 1))),
    )
    ev.per_synapse = (both & (a != b)).sum(axis=0)
    return ev


# ------------------------------------------------------------------ report


@dataclass(frozen=True)
class Quantity:
    name: str
    source: str
    value: float | int | None
    form: str


@dataclass
class AnalysisReport:
    p_connect: float
    p_connect_corrected: float
    expected_fanout: float
    expected_fanout_corrected: float
    p_never_connected: float
    p_never_connected_corrected: float
    expected_unobserved: float
    expected_unobserved_corrected: float
    expected_active_synapses: float
    p_actcon: float
    expected_active_connected: float
    expected_active_cols_input: float
    p_active_col: float
    expected_active_cols: float
    initial_inhibition: float
    p_initial_activation: float | None
    p_initial_boost: float | None
    input_capacity: int
    output_capacity: int

    # (source formula id, formula as used)
    SOURCES = {
        "p_connect": ("prob", "1 - prod_{k=0..q}(1 - 1/(W-k)) = (q+1)/W"),
        "p_connect_corrected": ("prob", "q/W"),
        "expected_fanout": ("enc", "sum_i P_i(r), mean over inputs"),
        "expected_fanout_corrected": ("enc", "sum_i P_i(r), mean over inputs"),
        "p_never_connected": ("nvc", "prod_i (1 - P_i(r)), mean over inputs"),
        "p_never_connected_corrected": ("nvc", "prod_i (1 - P_i(r)), mean over inputs"),
        "expected_unobserved": ("encc", "sum_r prod_i (1 - P_i(r))"),
        "expected_unobserved_corrected": ("encc", "sum_r prod_i (1 - P_i(r))"),
        "expected_active_synapses": ("eac", "q * p_x"),
        "p_actcon": ("eacon", "p_x * P(connected)"),
        "expected_active_connected": ("eacon", "q * p_x * P(connected)"),
        "expected_active_cols_input": ("eactc", "m * P(Bin(q, p_x) >= rho_d)"),
        "p_active_col": ("pactcol", "P(Bin(q, pi_ac) >= rho_d)"),
        "expected_active_cols": ("eactcol", "m * P(Bin(q, pi_ac) >= rho_d)"),
        "initial_inhibition": ("mdist/inh", "sum_i (q/2) mean_dist_i / (m q/2)"),
        "p_initial_activation": ("racol", "rho_c / inhibition * P(ActCol)"),
        "p_initial_boost": ("pboost", "(inhibition - rho_c) / inhibition * P(ActCol)"),
        "input_capacity": ("choose", "C(encoder.n, encoder.w)"),
        "output_capacity": ("choose", "C(m, rho_c)"),
    }

    def quantities(self) -> list[Quantity]:
        out = []
        for f in fields(self):
            src, form = self.SOURCES[f.name]
            out.append(Quantity(f.name, src, getattr(self, f.name), form))
        return out

    def to_text(self) -> str:
        lines = ["# splab analysis report", "# source\tname\tvalue\tform"]
        for qty in self.quantities():
            v = qty.value
            if v is None:
                text = "undefined"
            elif isinstance(v, int):
                text = str(v)
            else:
                text = repr(float(v))
            lines.append(f"{qty.source}\t{qty.name}\t{text}\t{qty.form}")
        return "\n".join(lines) + "\n"


def coverage_stats(m: int, q: int, p: int, mode: str, radius: int | None, form: str):
    """(pc, mean fanout, mean P(never), expected unobserved) for a wiring mode."""
    from .topology import GLOBAL

    if mode == GLOBAL:
        pc = p_connect(q, p, form)
        pnc = p_never_connected(pc, m)
        return pc, expected_fanout(m, pc), pnc, expected_unobserved(p, pnc)
    P = radius_connection_matrix(m, q, p, radius, form)
    never = np.prod(1.0 - P, axis=0)
    pc = float(P[m // 2].max())
    return pc, float(P.sum(axis=0).mean()), float(never.mean()), float(never.sum())


def build_report(cfg, mode: str, radius: int | None, p_x: float, encoder_n: int, encoder_w: int) -> AnalysisReport:
    """Evaluate every analytical quantity for a Spatial Pooler configuration."""
    m, q, p = cfg.m, cfg.q, cfg.p
    pc, fan, pnc, eu = coverage_stats(m, q, p, mode, radius, PRODUCT)
    pc_c, fan_c, pnc_c, eu_c = coverage_stats(m, q, p, mode, radius, CORRECTED)
    p_conn = p_connected_at_init(cfg.phi_sigma)
    p_ac = p_x * p_conn
    p_actcol = binomial_tail(cfg.rho_d, q, p_ac)
    inh = expected_initial_radius(m, q, p, topology_windows(m, p, mode, radius))
    try:
        p_act = float(p_initial_activation(cfg.rho_c, inh, p_actcol))
        p_bst = float(p_initial_boost(cfg.rho_c, inh, p_actcol))
    except DomainError:
        p_act = p_bst = None
    return AnalysisReport(
        p_connect=pc,
        p_connect_corrected=pc_c,
        expected_fanout=fan,
        expected_fanout_corrected=fan_c,
        p_never_connected=pnc,
        p_never_connected_corrected=pnc_c,
        expected_unobserved=eu,
        expected_unobserved_corrected=eu_c,
        expected_active_synapses=expected_active_synapses(q, p_x),
        p_actcon=p_ac,
        expected_active_connected=expected_active_connected(q, p_x, p_conn),
        expected_active_cols_input=expected_active_columns(m, cfg.rho_d, q, p_x),
        p_active_col=p_actcol,
        expected_active_cols=m * p_actcol,
        initial_inhibition=inh,
        p_initial_activation=p_act,
        p_initial_boost=p_bst,
        input_capacity=pattern_capacity(encoder_n, encoder_w),
        output_capacity=pattern_capacity(m, min(cfg.rho_c, m)),
    )
