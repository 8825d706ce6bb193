"""Acceptance criteria, one test per criterion.

Each criterion yields a single ``[PASS]``/``[FAIL]`` line, shown in the
"acceptance criteria" section of the pytest summary.  Run directly
(``python tests/test_acceptance.py``) for just those lines.
"""

import itertools
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from splab import analysis as an
from splab import oracle
from splab.cli import main as cli_main
from splab.config import load_config
from splab.pooler import (
    PERM_SCALE,
    SpatialPooler,
    SpConfig,
    SpState,
    init_permanences,
    quantize,
    step,
)
from splab.sdr import Sdr, hamming_distance, overlap_score
from splab.snapshot import dumps, loads
from splab.topology import GLOBAL, Topology, gather_inputs

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def announce(number, title, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"


# ------------------------------------------------------------------ criteria


def metric_axioms():
    space = [Sdr(bits) for bits in itertools.product((0, 1), repeat=6)]
    D = np.array([[hamming_distance(a, b) for b in space] for a in space])
    same = np.array([[a == b for b in space] for a in space])
    violations = int(np.count_nonzero(D < 0))
    violations += int(np.count_nonzero((D == 0) != same))
    violations += int(np.count_nonzero(D != D.T))
    # every triple (a, b, c): d(a, c) <= d(a, b) + d(b, c)
    tri = D[:, None, :] > D[:, :, None] + D[None, :, :]
    violations += int(np.count_nonzero(tri))
    n_triples = len(space) ** 3
    return violations == 0, f"{violations} violations over {len(space) ** 2} pairs, {n_triples} triples"


def encoder_semantics():
    enc = load_config(CONFIGS / "default.ini").encoder
    rng = np.random.default_rng(2)
    bad = 0
    weights_ok = True
    for _ in range(1000):
        a = rng.uniform(enc.val_min, enc.val_max, 4)
        s = [enc.encode(float(x)) for x in a]
        k = [enc.bucket_index(float(x)) for x in a]
        weights_ok &= all(x.weight == enc.w for x in s)
        if abs(k[0] - k[1]) <= abs(k[2] - k[3]) and overlap_score(s[0], s[1]) < overlap_score(s[2], s[3]):
            bad += 1
    return bad == 0 and weights_ok, f"{bad} monotonicity violations, weight==w: {weights_ok}"


def connection_math():
    m, q, p = 500, 16, 128
    est = oracle.mc_connection_stats(m, q, p, GLOBAL, trials=200, seed=11)["p_connect"]
    corrected = an.p_connect(q, p, an.CORRECTED)
    mc_ok = abs(est.mean - corrected) <= 3 * est.std_error
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        pp = int(rng.integers(2, 10_000))
        qq = int(rng.integers(0, pp))
        worst = max(worst, abs(an.p_connect_product(qq, pp) - (qq + 1) / pp))
    product = an.p_connect(q, p)
    ok = mc_ok and worst <= 1e-12
    return ok, (
        f"MC {est.mean:.5f} +/- {est.std_error:.5f} vs q/p={corrected:.5f} "
        f"({est.sigma_distance(corrected):.2f} se); product-vs-closed max err {worst:.1e}; "
        f"(q+1)/p={product:.5f} deviates by {product - corrected:.5f} "
        f"({est.sigma_distance(product):.2f} se from MC)"
    )


def binomial_tails():
    worst = 0.0
    for q in range(0, 13):
        for rho_d in range(0, q + 1):
            for k in range(1, 10):
                pi = k / 10
                worst = max(
                    worst,
                    abs(an.binomial_tail(rho_d, q, pi) - oracle.enumerate_binomial_tail(rho_d, q, pi)),
                )
    cfg = SpConfig(m=64, q=8, p=128, rho_d=2)
    est = oracle.mc_initial_activity(cfg, GLOBAL, 0.2, trials=1000, seed=4)["active_cols"]
    expected = an.expected_active_columns(64, 2, 8, 0.1)
    ok = worst <= 1e-12 and abs(est.mean - expected) <= 3 * est.std_error
    return ok, (
        f"max |tail - enumeration| {worst:.1e}; E[actcol] {expected:.4f} vs MC "
        f"{est.mean:.4f} +/- {est.std_error:.4f} ({est.sigma_distance(expected):.2f} se)"
    )


def initialization_split():
    cfg = SpConfig(m=1000, q=100, p=200)
    phi = init_permanences(cfg, 5)
    frac = float((phi >= cfg.rho_s).mean())
    return abs(frac - 0.5) <= 0.01, f"connected fraction {frac:.4f} over {phi.size} synapses"


def sparsity():
    rc = load_config(CONFIGS / "default.ini")
    cfg = rc.sp
    sp = SpatialPooler(cfg, rc.topology.build(cfg.p), seed=rc.run.seed)
    patterns = [rc.encoder.encode(v) for v in rc.run.patterns]
    over, counts = 0, []
    for t in range(500):
        active, met = sp.compute(patterns[t % len(patterns)], learn=True)
        r = met.r_ovlp
        gamma = np.sort(r)[::-1][cfg.rho_c - 1]
        ties = int(np.count_nonzero(r == gamma)) if gamma > 0 else 1
        if active.weight > cfg.rho_c + ties - 1:
            over += 1
        counts.append(active.weight)
    density = float(np.mean(counts)) / cfg.m
    ok = over == 0 and 0.02 <= density <= 0.06
    return ok, (
        f"{over} steps above rho_c + ties; mean density {density:.4f}, "
        f"max active {max(counts)} (rho_c={cfg.rho_c})"
    )


def single_pattern_convergence():
    rc = load_config(CONFIGS / "single_pattern.ini")
    cfg = rc.sp
    assert cfg.inhibition_mode == "constant" and cfg.phi_plus == cfg.phi_minus == 0.05
    assert cfg.rho_d == 2 and rc.run.steps == 1000
    sp = SpatialPooler(cfg, rc.topology.build(cfg.p), seed=rc.run.seed)
    pattern = rc.encoder.encode(rc.run.patterns[0])
    for _ in range(1000):
        sp.compute(pattern, learn=True)
    active = sp.infer(pattern)
    X = gather_inputs(sp.topology, pattern)
    bad = 0
    for i in active.indices():
        on, off = sp.state.phi[i][X[i] == 1], sp.state.phi[i][X[i] == 0]
        bad += int((on < 0.95).any() or (off > 0.05).any())
    stable = all(sp.infer(pattern) == active for _ in range(100))
    ok = bad == 0 and stable and active.weight > 0
    return ok, f"{active.weight} active columns, {bad} unconverged, 100-step inference stable: {stable}"


def starved_rescue():
    rho_s, s_boost = 0.5, 0.1
    mismatches = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        csi = np.array([[0, 1, 2, 3]] * 3 + [[4, 5, 6, 7]])
        topo = Topology(4, 4, 8, csi)
        cfg = SpConfig(m=4, q=4, p=8, rho_d=2, rho_c=3, tau=10, s_boost=s_boost, rho_s=rho_s)
        phi = np.vstack([np.full((3, 4), 0.6), quantize(rng.uniform(0.0, 0.49, 4))])
        state = SpState(
            phi=phi,
            boost=np.ones(4),
            act_hist=np.zeros((4, 10), dtype=np.uint8),
            ovlp_hist=np.zeros((4, 10), dtype=np.uint8),
            inhibition_radius=3,
        )
        # bound in integer micro-units so the ceiling is exact
        gap = round(rho_s * PERM_SCALE) - round(phi[3].min() * PERM_SCALE)
        bound = -(-gap // round(s_boost * rho_s * PERM_SCALE))
        pattern = np.array([1, 1, 1, 1, 0, 0, 0, 0], dtype=np.uint8)
        events = 0
        while state.phi[3].min() < rho_s and state.step_count < 1000:
            _, met = step(state, cfg, topo, pattern, learn=True)
            events += int(met.perm_boosted[3])
            if met.ovlp[3] >= cfg.rho_d:
                mismatches.append((seed, "column reached rho_d"))
        if events != bound:
            mismatches.append((seed, events, bound))
    failed = {mm[0] for mm in mismatches}
    return not mismatches, f"20 starved columns, bound matched exactly in {20 - len(failed)}"


def _state(phi):
    m = len(phi)
    return SpState(
        phi=np.asarray(phi, dtype=float),
        boost=np.ones(m),
        act_hist=np.zeros((m, 10), dtype=np.uint8),
        ovlp_hist=np.zeros((m, 10), dtype=np.uint8),
        inhibition_radius=m,
    )


def quality_aliasing():
    cfg = SpConfig(m=4, q=4, p=8, rho_d=2, rho_c=4, tau=10, phi_sigma=0.0)
    ref = np.array([1, 1, 0, 0, 1, 1, 1, 0], dtype=np.uint8)
    # connected synapses of different columns never share an input
    disjoint = Topology(4, 4, 8, np.array([[0, 1, 2, 3], [2, 3, 4, 5], [4, 5, 6, 7], [6, 7, 0, 1]]))
    d_state = _state([[0.9, 0.8, 0.1, 0.2], [0.7, 0.6, 0.3, 0.1], [0.55, 0.6, 0.4, 0.0], [0.9, 0.1, 0.2, 0.3]])
    active, _ = step(d_state, cfg, disjoint, ref)
    formula = an.p_same_output(d_state, disjoint, active, 2)
    count, total = oracle.brute_force_aliasing(d_state, cfg, disjoint, 2, ref)
    err = abs(formula - count / total)
    # same wiring, every synapse connected: neighbouring columns share inputs
    o_state = _state(np.full((4, 4), 0.9))
    o_active, _ = step(o_state, cfg, disjoint, ref)
    o_formula = an.p_same_output(o_state, disjoint, o_active, 2)
    o_count, _ = oracle.brute_force_aliasing(o_state, cfg, disjoint, 2, ref)
    ratio = o_formula / (o_count / total)
    return err <= 1e-12, (
        f"disjoint: formula {formula:.6f} vs enumeration {count}/{total} (err {err:.1e}); "
        f"overlapping: formula/true = {o_formula:.6f}/{o_count / total:.6f} = {ratio:.4f}"
    )


def determinism(tmp_path):
    outs = []
    for sub in ("a", "b"):
        d = tmp_path / sub
        d.mkdir()
        text = (CONFIGS / "default.ini").read_text()
        text = text.replace("out/snapshot.json", (d / "snap.json").as_posix())
        text = text.replace("out/metrics.jsonl", (d / "metrics.jsonl").as_posix())
        text = text.replace("steps = 500", "steps = 100")
        (d / "run.ini").write_text(text)
        code = cli_main(["train", "--config", str(d / "run.ini")])
        outs.append((code, (d / "metrics.jsonl").read_bytes(), (d / "snap.json").read_bytes()))
    identical = outs[0] == outs[1] and outs[0][0] == 0
    cfg, topo, state = loads(outs[0][2].decode())
    round_trip = loads(dumps(cfg, topo, state)) == (cfg, topo, state)
    return identical and round_trip, f"byte-identical outputs: {identical}; field-exact round trip: {round_trip}"


def split_identity():
    rng = np.random.default_rng(8)
    bad = 0
    for _ in range(100):
        q = int(rng.integers(2, 64))
        rho_d = int(rng.integers(1, q + 1))
        p_actcol = an.binomial_tail(rho_d, q, float(rng.uniform(0, 1)))
        k = int(rng.integers(1, 40))
        inhibition = float(k + rng.uniform(0, 200))
        total = an.p_initial_activation(k, inhibition, p_actcol) + an.p_initial_boost(k, inhibition, p_actcol)
        bad += total != Fraction(p_actcol)
    return bad == 0, f"{bad} inexact sums over 100 sweep points"


# ---------------------------------------------------------------- the tests

CRITERIA = [
    (1, "metric axioms", metric_axioms),
    (2, "encoder semantics", encoder_semantics),
    (3, "connection math", connection_math),
    (4, "binomial tails", binomial_tails),
    (5, "initialization split", initialization_split),
    (6, "sparsity", sparsity),
    (7, "single-pattern convergence", single_pattern_convergence),
    (8, "starved-column rescue", starved_rescue),
    (9, "quality/aliasing", quality_aliasing),
    (10, "determinism and persistence", determinism),
    (11, "probability split identity", split_identity),
]


@pytest.mark.parametrize("number, title, fn", CRITERIA, ids=[c[1].replace(" ", "_") for c in CRITERIA])
def test_criterion(number, title, fn, tmp_path, record_property):
    ok, detail = fn(tmp_path) if fn is determinism else fn()
    line = announce(number, title, ok, detail)
    # collected by conftest into the terminal summary
    record_property("acceptance", line)
    print(line)
    assert ok, detail


if __name__ == "__main__":
    import tempfile

    failed = 0
    for number, title, fn in CRITERIA:
        with tempfile.TemporaryDirectory() as d:
            ok, detail = fn(Path(d)) if fn is determinism else fn()
        print(announce(number, title, ok, detail))
        failed += not ok
    sys.exit(1 if failed else 0)
