"""Run configuration: a YAML document validated against a fixed schema.

Unknown keys are rejected and every error names the offending field and its
line. See ``configs/`` and the README for complete examples::

    seed: 7
    threads: 1
    output: out/ssv.json
    scenario:
      K: 8
      N: 20
      M: 1
      gamma_s_db: 5.0
      jammers:
        - {gamma_j_db: -5.0}
    detector: {kind: SSV}
    calibrate: {pfa_target: 0.01, trials: 100000}

All SNR values are in dB, with powers ``10**(dB/10) * sigma2_w``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .detectors import DetectorSpec, Kind
from .errors import ConfigError, JamsenseError
from .harness import AXES, SweepKind, SweepSpec
from .signal_model import Hypothesis, JammerSpec, NoiseCovariance, Scenario

SECTIONS = ("calibrate", "analytic", "sweep", "gen_samples")
TOP_LEVEL = ("seed", "threads", "output", "scenario", "detector") + SECTIONS


class _Node:
    """A composed YAML value with its source line, for diagnostics."""

    def __init__(self, node: yaml.Node, path: str, source: str):
        self.node, self.path, self.source = node, path, source

    @property
    def line(self) -> int:
        return self.node.start_mark.line + 1

    def fail(self, msg: str):
        raise ConfigError(f"{self.source}:{self.line}: {self.path or '<root>'}: {msg}")

    def child(self, node, name) -> "_Node":
        path = f"{self.path}.{name}" if self.path and not str(name).startswith("[") else f"{self.path}{name}"
        return _Node(node, path, self.source)

    def scalar(self):
        if not isinstance(self.node, yaml.ScalarNode):
            self.fail("expected a scalar value")
        return yaml.safe_load(yaml.serialize(self.node))

    def items(self) -> list["_Node"]:
        if not isinstance(self.node, yaml.SequenceNode):
            self.fail("expected a list")
        return [self.child(n, f"[{i}]") for i, n in enumerate(self.node.value)]


class _Map:
    """Mapping accessor that tracks consumed keys so leftovers can be rejected."""

    def __init__(self, node: _Node):
        if not isinstance(node.node, yaml.MappingNode):
            node.fail("expected a mapping")
        self.node = node
        self.entries: dict[str, _Node] = {}
        for k, v in node.node.value:
            key = _Node(k, node.path, node.source).scalar()
            if not isinstance(key, str):
                _Node(k, node.path, node.source).fail(f"keys must be strings, got {key!r}")
            if key in self.entries:
                node.child(k, key).fail("duplicate key")
            self.entries[key] = node.child(v, key)
        self.used: set[str] = set()

    def has(self, key) -> bool:
        return key in self.entries

    def raw(self, key) -> _Node | None:
        self.used.add(key)
        return self.entries.get(key)

    def get(self, key, kind, default=None, required=False, check=None, why=""):
        n = self.raw(key)
        if n is None:
            if required:
                self.node.fail(f"missing required key {key!r}")
            return default
        value = _coerce(n, kind)
        if check is not None and not check(value):
            n.fail(why or f"invalid value {value!r}")
        return value

    def sub(self, key, required=False) -> "_Map | None":
        n = self.raw(key)
        if n is None:
            if required:
                self.node.fail(f"missing required section {key!r}")
            return None
        return _Map(n)

    def finish(self):
        for key, n in self.entries.items():
            if key not in self.used:
                n.fail("unknown key")


def _coerce(n: _Node, kind):
    v = n.scalar()
    if kind is bool:
        if not isinstance(v, bool):
            n.fail(f"expected true/false, got {v!r}")
        return v
    if kind is int:
        if isinstance(v, bool) or not isinstance(v, int):
            n.fail(f"expected an integer, got {v!r}")
        return v
    if kind is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            n.fail(f"expected a number, got {v!r}")
        return float(v)
    if kind is str:
        if not isinstance(v, str):
            n.fail(f"expected a string, got {v!r}")
        return v
    raise TypeError(kind)


def _numbers(n: _Node) -> list[float]:
    """A list of numbers, or ``{start, stop, step}`` / ``{start, stop, points}`` (inclusive)."""
    if isinstance(n.node, yaml.SequenceNode):
        vals = [_coerce(x, float) for x in n.items()]
    else:
        m = _Map(n)
        start = m.get("start", float, required=True)
        stop = m.get("stop", float, required=True)
        step = m.get("step", float)
        points = m.get("points", int)
        m.finish()
        if (step is None) == (points is None):
            n.fail("give exactly one of 'step' or 'points'")
        if points is not None:
            if points < 1:
                n.fail("points must be >= 1")
            vals = list(np.linspace(start, stop, points))
        else:
            if not step > 0 or stop < start:
                n.fail("need step > 0 and stop >= start")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            vals = [start + i * step for i in range(count)]
        vals = [float(np.round(v, 12)) for v in vals]
    if not vals:
        n.fail("empty list")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        n.fail("values must be strictly increasing")
    return vals


# --- sections -------------------------------------------------------------

def _positive(x):
    return x > 0


def parse_scenario(m: _Map, seed: int) -> Scenario:
    K = m.get("K", int, required=True)
    N = m.get("N", int, required=True)
    M = m.get("M", int, 1)
    sigma2_w = m.get("sigma2_w", float, 1.0, check=_positive, why="must be positive")
    kw = dict(
        gamma_s=m.get("gamma_s_db", float, 5.0),
        sigma2_w=sigma2_w,
        sigma2_hs=m.get("sigma2_hs", float, 1.0, check=_positive, why="must be positive"),
        sigma2_hj=m.get("sigma2_hj", float, 1.0, check=_positive, why="must be positive"),
    )
    jammers = []
    jn = m.raw("jammers")
    if jn is not None:
        for item in jn.items():
            jm = _Map(item)
            args = (jm.get("gamma_j_db", float, required=True), jm.get("channel_corr", float, 0.0),
                    jm.get("symbol_corr", float, 0.0))
            try:
                jammers.append(JammerSpec(*args))
            except JamsenseError as exc:
                item.fail(str(exc))
            jm.finish()
    noise = None
    nn = m.raw("noise_cov")
    if nn is not None:
        rows = [[_coerce(x, float) for x in r.items()] for r in nn.items()]
        try:
            noise = NoiseCovariance.general(np.array(rows, dtype=float))
        except (JamsenseError, ValueError) as exc:
            nn.fail(str(exc))
    m.finish()
    try:
        return Scenario(K=K, N=N, M=M, jammers=tuple(jammers), noise_cov=noise, seed=seed, **kw)
    except ConfigError:
        raise
    except JamsenseError as exc:
        m.node.fail(str(exc))


def parse_detector(n: _Node, default_M: int) -> DetectorSpec:
    if isinstance(n.node, yaml.ScalarNode) and n.node.value.upper() == "NULL":
        # a bare NULL is a YAML null; here it names the reference detector
        kind, M, s2w, s2h0 = "NULL", default_M, None, None
    elif isinstance(n.node, yaml.ScalarNode):
        kind, M, s2w, s2h0 = _coerce(n, str), default_M, None, None
    else:
        m = _Map(n)
        kn = m.raw("kind")
        if kn is not None and isinstance(kn.node, yaml.ScalarNode) and kn.node.value.upper() == "NULL":
            m.used.add("kind")
            kind = "NULL"
        else:
            kind = m.get("kind", str, required=True)
        M = m.get("M", int, default_M)
        s2w = m.get("sigma2_w", float)
        s2h0 = m.get("sigma2_H0", float)
        m.finish()
    try:
        return DetectorSpec(Kind(kind.upper()), M=M, sigma2_w=s2w, sigma2_H0=s2h0)
    except ValueError as exc:
        n.fail(str(exc))


@dataclass
class RunConfig:
    command: str
    seed: int
    threads: int
    output: str | None
    scenario: Scenario | None
    detector: DetectorSpec | None
    section: dict[str, Any] = field(default_factory=dict)
    sweep: SweepSpec | None = None
    source: str = "<config>"


def _parse_calibrate(m: _Map) -> dict:
    out = dict(
        pfa_target=m.get("pfa_target", float, required=True, check=lambda p: 0 < p < 1, why="must lie in (0, 1)"),
        trials=m.get("trials", int, 100_000),
        samples=m.get("samples", str),
        fixed_tn_channels=m.get("fixed_tn_channels", bool, False),
    )
    m.finish()
    return out


def _parse_analytic(m: _Map) -> dict:
    eta = m.raw("eta")
    out = dict(
        eta=_numbers(eta) if eta is not None else None,
        pfa_target=m.get("pfa_target", float, check=lambda p: 0 < p < 1, why="must lie in (0, 1)"),
        epsilon=m.get("epsilon", float, check=_positive, why="must be positive"),
    )
    if (out["eta"] is None) == (out["pfa_target"] is None):
        m.node.fail("give exactly one of 'eta' (Pfa curve) or 'pfa_target' (threshold inversion)")
    if out["eta"] is not None and out["eta"][0] < 0:
        eta.fail("thresholds must be non-negative")
    m.finish()
    return out


def _parse_gen(m: _Map) -> dict:
    h = m.get("hypothesis", str, "H0")
    try:
        h = Hypothesis(h)
    except ValueError:
        m.raw("hypothesis").fail(f"unknown hypothesis {h!r}")
    out = dict(hypothesis=h,
               count=m.get("count", int, required=True, check=_positive, why="must be positive"),
               orthogonal_construction=m.get("orthogonal_construction", bool, False))
    m.finish()
    return out


def _parse_sweep(m: _Map, scenario: Scenario, seed: int, threads: int) -> SweepSpec:
    kind_n = m.raw("kind")
    if kind_n is None:
        m.node.fail("missing required key 'kind'")
    try:
        kind = SweepKind(_coerce(kind_n, str))
    except ValueError:
        kind_n.fail(f"unknown sweep kind; expected one of {[k.value for k in SweepKind]}")
    gm = m.sub("grid", required=True)
    grid = {}
    for name in list(gm.entries):
        if name not in AXES[kind]:
            gm.entries[name].fail(f"{kind.value} sweeps take grid axes {list(AXES[kind])}")
        grid[name] = _numbers(gm.raw(name))
    gm.finish()
    dets = []
    dn = m.raw("detectors")
    if dn is not None:
        dets = [parse_detector(x, scenario.M) for x in dn.items()]
    opts = {}
    om = m.sub("options")
    if om is not None:
        for key, kinds in (("variant", str), ("orthogonal_construction", bool), ("eta_points", int),
                           ("epsilon", float)):
            if om.has(key):
                opts[key] = om.get(key, kinds)
        om.finish()
    kw = dict(
        trials=m.get("trials", int, 10_000),
        calibration_trials=m.get("calibration_trials", int, 100_000),
        pfa_target=m.get("pfa_target", float, 0.1),
    )
    m.finish()
    try:
        return SweepSpec(kind, scenario, grid, tuple(dets), seed=seed, threads=threads, options=opts, **kw)
    except ConfigError:
        raise
    except JamsenseError as exc:
        m.node.fail(str(exc))


def load(text: str, command: str, source: str = "<config>", seed: int | None = None,
         threads: int | None = None) -> RunConfig:
    """Validate a configuration document for ``command`` (a CLI subcommand)."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark else source
        raise ConfigError(f"{where}: YAML syntax error: {getattr(exc, 'problem', exc)}") from None
    if root is None:
        raise ConfigError(f"{source}: empty configuration")
    top = _Map(_Node(root, "", source))
    for key, n in top.entries.items():
        if key not in TOP_LEVEL:
            n.fail("unknown key")
    section_name = command.replace("-", "_")
    if section_name not in SECTIONS:
        raise ConfigError(f"unknown command {command!r}")
    cfg_seed = top.get("seed", int, 0, check=lambda s: 0 <= s < 2**64, why="must be an unsigned 64-bit integer")
    seed = cfg_seed if seed is None else seed
    cfg_threads = top.get("threads", int, 1, check=lambda t: t >= 1, why="must be >= 1")
    threads = cfg_threads if threads is None else threads
    output = top.get("output", str)
    for other in SECTIONS:
        if other != section_name and top.has(other):
            top.raw(other).fail(f"section does not apply to the {command!r} command")
    sm = top.sub("scenario", required=section_name != "calibrate")
    scenario = parse_scenario(sm, seed) if sm is not None else None
    dn = top.raw("detector")
    detector = parse_detector(dn, scenario.M if scenario else 1) if dn is not None else None
    body = top.sub(section_name, required=True)
    cfg = RunConfig(command, seed, threads, output, scenario, detector, source=source)
    if section_name == "calibrate":
        cfg.section = _parse_calibrate(body)
        if detector is None:
            top.node.fail("calibrate needs a 'detector'")
        if scenario is None and cfg.section["samples"] is None:
            top.node.fail("calibrate needs a 'scenario' or 'calibrate.samples'")
    elif section_name == "analytic":
        cfg.section = _parse_analytic(body)
    elif section_name == "gen_samples":
        cfg.section = _parse_gen(body)
    else:
        cfg.sweep = _parse_sweep(body, scenario, seed, threads)
    top.finish()
    return cfg


def load_file(path, command: str, **overrides) -> RunConfig:
    path = Path(path)
    return load(path.read_text(encoding="utf-8"), command, source=str(path), **overrides)
