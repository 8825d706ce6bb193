"""Snapshot files and the per-step metrics log.

A snapshot is a JSON document holding the config, the wiring and the full
runtime state.  Permanences are written as integers in units of 1e-6
(``phi_scale``); duty-cycle histories as one '0'/'1' string per column.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO

import numpy as np

from .errors import SnapshotError, SnapshotVersionError
from .pooler import PERM_SCALE, SpConfig, SpState
from .topology import Topology

FORMAT = "splab-snapshot"
VERSION = 1


def _bitrows(a: np.ndarray) -> list[str]:
    return [(row + ord("0")).astype(np.uint8).tobytes().decode("ascii") for row in a]


def _from_bitrows(rows: list[str]) -> np.ndarray:
    return np.array([[ord(c) - ord("0") for c in r] for r in rows], dtype=np.uint8)


def snapshot_document(cfg: SpConfig, topology: Topology, state: SpState) -> dict:
    return {
        "format": FORMAT,
        "version": VERSION,
        "config": cfg.to_dict(),
        "topology": {
            "mode": topology.mode,
            "m": topology.m,
            "q": topology.q,
            "p": topology.p,
            "radius": topology.radius,
            "centers": None if topology.centers is None else topology.centers.tolist(),
            "csi": topology.csi.tolist(),
        },
        "state": {
            "phi_scale": PERM_SCALE,
            "phi": np.rint(state.phi * PERM_SCALE).astype(np.int64).tolist(),
            "boost": [float(b) for b in state.boost],
            "act_hist": _bitrows(state.act_hist),
            "ovlp_hist": _bitrows(state.ovlp_hist),
            "hist_cursor": state.hist_cursor,
            "inhibition_radius": state.inhibition_radius,
            "step_count": state.step_count,
        },
    }


def dumps(cfg: SpConfig, topology: Topology, state: SpState) -> str:
    doc = snapshot_document(cfg, topology, state)
    # one matrix row per line keeps large snapshots diffable
    parts = []
    for key, value in doc.items():
        if isinstance(value, dict):
            inner = []
            for k, v in value.items():
                if isinstance(v, list) and v and isinstance(v[0], (list, str)):
                    rows = ",\n    ".join(json.dumps(r, separators=(",", ":")) for r in v)
                    inner.append(f'  "{k}": [\n    {rows}\n  ]')
                else:
                    inner.append(f'  "{k}": {json.dumps(v)}')
            parts.append(f'"{key}": {{\n' + ",\n".join(inner) + "\n}")
        else:
            parts.append(f'"{key}": {json.dumps(value)}')
    return "{\n" + ",\n".join(parts) + "\n}\n"


def save_snapshot(path, cfg: SpConfig, topology: Topology, state: SpState) -> None:
    Path(path).write_text(dumps(cfg, topology, state), encoding="ascii")


def loads(text: str) -> tuple[SpConfig, Topology, SpState]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise SnapshotError(f"snapshot parse error at byte offset {offset}: {exc.msg}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise SnapshotError("not a splab snapshot")
    if doc.get("version") != VERSION:
        raise SnapshotVersionError(
            f"snapshot version {doc.get('version')!r} is incompatible with version {VERSION}"
        )
    try:
        cfg = SpConfig(**doc["config"])
        t = doc["topology"]
        topology = Topology(
            t["m"], t["q"], t["p"], np.array(t["csi"], dtype=np.int64), t["mode"],
            centers=None if t["centers"] is None else np.array(t["centers"], dtype=np.int64),
            radius=t["radius"],
        )
        s = doc["state"]
        state = SpState(
            phi=np.array(s["phi"], dtype=np.int64) / s["phi_scale"],
            boost=np.array(s["boost"], dtype=np.float64),
            act_hist=_from_bitrows(s["act_hist"]),
            ovlp_hist=_from_bitrows(s["ovlp_hist"]),
            hist_cursor=int(s["hist_cursor"]),
            inhibition_radius=int(s["inhibition_radius"]),
            step_count=int(s["step_count"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotError(f"malformed snapshot: {exc}") from exc
    return cfg, topology, state


def load_snapshot(path) -> tuple[SpConfig, Topology, SpState]:
    return loads(Path(path).read_text(encoding="utf-8"))


class MetricsLog:
    """Line-delimited JSON metrics, one record per step."""

    def __init__(self, stream: IO[str]):
        self.stream = stream

    def write(self, record: dict) -> None:
        self.stream.write(json.dumps(record, sort_keys=True) + "\n")
