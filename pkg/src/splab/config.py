"""INI run configuration.

Sections: ``[encoder]``, ``[topology]``, ``[sp]``, ``[run]``, ``[validate]``
and an optional ``[design]``.  Keys mirror the parameter symbols in ASCII
(``phi_plus``, ``rho_d``, ...).  The number of inputs ``p`` is the encoder
width ``encoder.n``.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .encoder import ScalarEncoder
from .errors import ConfigError, ConfigSyntaxError
from .pooler import SpConfig
from .topology import GLOBAL, RADIUS, Topology, init_global, init_radius

_SP_INT = {"rho_d", "rho_c", "tau"}
_SP_FLOAT = {"phi_plus", "phi_minus", "phi_sigma", "rho_s", "s_duty", "s_boost", "beta_0"}


@dataclass(frozen=True)
class TopologySpec:
    mode: str
    m: int
    q: int
    radius: int | None
    seed: int

    def build(self, p: int) -> Topology:
        if self.mode == GLOBAL:
            return init_global(self.m, self.q, p, self.seed)
        return init_radius(self.m, self.q, p, self.radius, self.seed)


@dataclass(frozen=True)
class RunSection:
    steps: int = 0
    patterns: tuple[float, ...] = ()
    learn: bool = True
    seed: int = 0
    snapshot_path: str | None = None
    metrics_path: str | None = None
    log_active: bool = False


@dataclass(frozen=True)
class ValidateSection:
    trials: int = 200
    tolerance_sigma: float = 3.0
    seed: int = 0


@dataclass(frozen=True)
class DesignSection:
    target_unobserved: float | None = None
    q_candidates: tuple[int, ...] = ()
    m_candidates: tuple[int, ...] = ()


@dataclass(frozen=True)
class RunConfig:
    encoder: ScalarEncoder
    topology: TopologySpec
    sp: SpConfig
    run: RunSection = field(default_factory=RunSection)
    validate: ValidateSection = field(default_factory=ValidateSection)
    design: DesignSection = field(default_factory=DesignSection)

    @property
    def input_density(self) -> float:
        return self.encoder.w / self.encoder.n

    def with_seed(self, seed: int) -> "RunConfig":
        return dataclasses.replace(
            self,
            run=dataclasses.replace(self.run, seed=seed),
            topology=dataclasses.replace(self.topology, seed=seed),
            validate=dataclasses.replace(self.validate, seed=seed),
        )


def _get(section, key, conv, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"missing required key {section.name}.{key}")
        return default
    raw = section[key].strip()
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigSyntaxError(f"{section.name}.{key}: cannot parse {raw!r}") from exc


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(",", " ").split())


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigSyntaxError(f"config parse error: {exc}") from exc
    for name in ("encoder", "topology", "sp"):
        if not cp.has_section(name):
            raise ConfigError(f"missing section [{name}]")

    e = cp["encoder"]
    encoder = ScalarEncoder(
        _get(e, "n", int, required=True),
        _get(e, "w", int, required=True),
        _get(e, "val_min", float, required=True),
        _get(e, "val_max", float, required=True),
    )

    run_sec = cp["run"] if cp.has_section("run") else cp["DEFAULT"]
    run_seed = _get(run_sec, "seed", int, 0)

    t = cp["topology"]
    mode = _get(t, "mode", str, GLOBAL)
    if mode not in (GLOBAL, RADIUS):
        raise ConfigError(f"topology.mode must be global|radius (got {mode!r})")
    topo = TopologySpec(
        mode=mode,
        m=_get(t, "m", int, required=True),
        q=_get(t, "q", int, required=True),
        radius=_get(t, "radius", int, required=(mode == RADIUS)),
        seed=_get(t, "seed", int, run_seed),
    )
    s = cp["sp"]
    kwargs = {}
    for key in s:
        if key in _SP_INT:
            kwargs[key] = _get(s, key, int)
        elif key in _SP_FLOAT:
            kwargs[key] = _get(s, key, float)
        elif key == "inhibition_mode":
            kwargs[key] = s[key].strip()
        elif key == "inhibition_radius":
            raw = s[key].strip().lower()
            kwargs[key] = None if raw in ("global", "none", "") else _get(s, key, int)
        else:
            raise ConfigError(f"unknown key sp.{key}")
    sp = SpConfig(m=topo.m, q=topo.q, p=encoder.n, **kwargs)

    run = RunSection(
        steps=_get(run_sec, "steps", int, 0),
        patterns=_get(run_sec, "patterns", _floats, ()),
        learn=_get(run_sec, "learn", _bool, True),
        seed=run_seed,
        snapshot_path=_get(run_sec, "snapshot_path", str),
        metrics_path=_get(run_sec, "metrics_path", str),
        log_active=_get(run_sec, "log_active", _bool, False),
    )
    if run.steps < 0:
        raise ConfigError("run.steps must be >= 0")
    for a in run.patterns:
        if not encoder.val_min <= a <= encoder.val_max:
            raise ConfigError(f"run.patterns value {a} outside encoder range")

    validate = ValidateSection()
    if cp.has_section("validate"):
        v = cp["validate"]
        validate = ValidateSection(
            trials=_get(v, "trials", int, 200),
            tolerance_sigma=_get(v, "tolerance_sigma", float, 3.0),
            seed=_get(v, "seed", int, run_seed),
        )
        if validate.trials < 2:
            raise ConfigError("validate.trials must be >= 2")

    design = DesignSection()
    if cp.has_section("design"):
        d = cp["design"]
        design = DesignSection(
            target_unobserved=_get(d, "target_unobserved", float),
            q_candidates=_get(d, "q_candidates", _ints, ()),
            m_candidates=_get(d, "m_candidates", _ints, ()),
        )

    return RunConfig(encoder, topo, sp, run, validate, design)


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())
