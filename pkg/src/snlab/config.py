"""Strict ``key=value`` run configuration with optional ``[section]`` headers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .experiments import DYADIC_LADDER

COMMANDS = ("orbit", "ulam", "transition", "basin", "distortion", "stat-sweep",
            "stoch-sweep", "homeo-sweep", "verify")


class ConfigError(ValueError):
    def __init__(self, msg, line=None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


def _float(v):
    x = float(v)
    if not math.isfinite(x):
        raise ValueError("not finite")
    return x


def _int(v):
    return int(v)


def _floats(v):
    out = tuple(_float(p) for p in v.split(",") if p.strip())
    if not out:
        raise ValueError("empty list")
    return out


def _ints(v):
    out = tuple(int(p) for p in v.split(",") if p.strip())
    if not out:
        raise ValueError("empty list")
    return out


def _path(v):
    if not v or v != v.strip():
        raise ValueError("empty path")
    return v


def _choice(*options):
    def parse(v):
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return v
    return parse


def _pos(x):
    return x > 0


def _nonneg(x):
    return x >= 0


def _all(pred):
    return lambda xs: all(pred(x) for x in xs)


def _fmt(v):
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


# key -> (section, parser, default, range check, description of range)
SCHEMA = {
    "command": ("run", _choice(*COMMANDS), "verify", None, ""),
    "seed": ("run", _int, 0, _nonneg, ">= 0"),
    "out": ("run", _path, "snlab_out", None, ""),
    "family": ("family", _choice("canonical", "arnold", "doubling"), "canonical", None, ""),
    "c": ("family", _float, 0.2, lambda x: 0 < x < math.sqrt(3) / (2 * math.pi), "in (0, 0.2757)"),
    "a": ("family", _float, 0.5, lambda x: 0 < x < 1, "in (0, 1)"),
    "t0": ("family", _float, 0.2, lambda x: 0 < x <= 1, "in (0, 1]"),
    "t": ("orbit", _float, 0.05, _nonneg, ">= 0"),
    "eps": ("orbit", _float, 0.0, _nonneg, ">= 0"),
    "x0": ("orbit", _float, 0.3, lambda x: 0 <= x < 1, "in [0, 1)"),
    "n_iter": ("orbit", _int, 100_000, _pos, ">= 1"),
    "burn": ("orbit", _int, 1000, _nonneg, ">= 0"),
    "bins": ("ulam", _int, 1024, lambda n: 2 <= n <= 4096, "in [2, 4096]"),
    "quad_m": ("ulam", _int, 16, lambda n: n >= 2, ">= 2"),
    "tol": ("ulam", _float, 1e-12, _pos, "> 0"),
    "max_iter": ("ulam", _int, 100_000, _pos, ">= 1"),
    "alpha": ("transition", _float, 1.0, _pos, "> 0"),
    "beta": ("transition", _float, 0.0, None, ""),
    "gamma": ("transition", _float, 0.0, None, ""),
    "nf_a": ("transition", _float, -0.1, lambda x: -0.5 < x < 0, "in (-0.5, 0)"),
    "nf_b": ("transition", _float, 0.1, lambda x: 0 < x < 0.5, "in (0, 0.5)"),
    "k_values": ("transition", _ints, (16, 32, 64), _all(lambda k: k >= 1), "all >= 1"),
    "sigma_values": ("transition", _floats, (0.0, 0.5, 1.0), _all(lambda s: 0 <= s <= 1), "all in [0, 1]"),
    "grid_n": ("transition", _int, 50, lambda n: n >= 2, ">= 2"),
    "n_grid": ("basin", _int, 10_000, _pos, ">= 1"),
    "basin_iter": ("basin", _int, 100_000, _pos, ">= 1"),
    "delta": ("basin", _float, 1e-3, lambda x: 0 < x < 0.5, "in (0, 0.5)"),
    "n_intervals": ("distortion", _int, 1000, _pos, ">= 1"),
    "interval_length": ("distortion", _float, 1e-3, lambda x: 0 < x <= 0.25, "in (0, 0.25]"),
    "t_values": ("sweep", _floats, DYADIC_LADDER, _all(_pos), "all > 0"),
    "eps_values": ("sweep", _floats, DYADIC_LADDER, _all(_pos), "all > 0"),
    "mc_samples": ("sweep", _int, 10_000_000, _pos, ">= 1"),
    "symbolic_samples": ("sweep", _int, 2_000_000, lambda n: n >= 100, ">= 100"),
    "max_block": ("sweep", _int, 10, lambda n: 1 <= n <= 16, "in [1, 16]"),
    "mode": ("sweep", _choice("deterministic", "random", "both"), "both", None, ""),
    "cert_t_values": ("verify", _floats, (0.1, 0.05, 0.025, 0.0125), _all(_nonneg), "all >= 0"),
    "n_max": ("verify", _int, 200, _pos, ">= 1"),
    "cert_grid": ("verify", _int, 1 << 16, lambda n: n >= 2, ">= 2"),
}
SECTIONS = tuple(dict.fromkeys(sec for sec, *_ in SCHEMA.values()))


@dataclass(frozen=True)
class RunConfig:
    command: str
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def family(self):
        from .families import MapFamily
        kind = self["family"]
        param = {"canonical": self["c"], "arnold": self["a"], "doubling": 0.0}[kind]
        return MapFamily(kind, param, self["t0"])

    def echo(self) -> str:
        """Effective configuration in the same format ``parse_config`` reads."""
        lines = []
        for sec in SECTIONS:
            lines.append(f"[{sec}]")
            for key, (ksec, *_rest) in SCHEMA.items():
                if ksec == sec:
                    lines.append(f"{key}={_fmt(self.values[key])}")
            lines.append("")
        return "\n".join(lines)


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Parse a run configuration, filling defaults for omitted keys."""
    values = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or line[1:-1].strip() not in SECTIONS:
                raise ConfigError(f"unknown section {line!r}", lineno)
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {line!r}", lineno)
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", lineno)
        ksec, parser, _default, check, desc = SCHEMA[key]
        if section is not None and ksec != section:
            raise ConfigError(f"key {key!r} belongs to section [{ksec}], not [{section}]", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            parsed = parser(val)
        except ValueError as err:
            raise ConfigError(f"malformed value for {key!r}: {val!r} ({err})", lineno) from None
        if check is not None and not check(parsed):
            raise ConfigError(f"value for {key!r} out of range: {val!r} (must be {desc})", lineno)
        values[key] = parsed
    for key, val in (overrides or {}).items():
        values[key] = val
    for key, (_sec, _parser, default, _check, _desc) in SCHEMA.items():
        values.setdefault(key, default)
    return RunConfig(values["command"], values)
