"""Flat, sectioned key-value run configuration (TOML-like) with strict keys.

Example:

    [params]
    d = 3
    m = 4/3
    M = 1.0

    [kernel]
    kind = none

    [grid]
    R = 6.0
    N = 400

Unknown sections or keys are rejected with the offending line.  parse and
serialize round-trip exactly at the dataclass level.
"""

from dataclasses import dataclass, field, fields
from fractions import Fraction

from .errors import ConfigError
from .kernels import KERNEL_KINDS
from .solver import INITIAL_KINDS


def _parse_number(text):
    """Float valued; accepts exact-rational notation like 4/3."""
    text = text.strip()
    try:
        if "/" in text:
            return float(Fraction(text))
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a number: {text!r}") from exc


def _parse_float_list(text):
    text = text.strip()
    if not text:
        return ()
    return tuple(_parse_number(part) for part in text.split(","))


@dataclass
class RunConfig:
    # params
    d: int = 2
    m: float = 1.0
    M: float = 1.0
    # kernel ("none" disables the nonlocal term)
    kernel_kind: str = "none"
    kernel_gamma: float | None = None
    kernel_scale: float = 1.0
    kernel_strength: float = 1.0
    # grid
    R: float = 8.0
    N: int = 400
    # time
    tau_max: float = 8.0
    snapshot_dtau: float = 0.1
    # initial data
    initial_kind: str = "gaussian_offcenter_radialized"
    initial_center: float | None = None
    initial_width: float | None = None
    initial_r0: float | None = None
    initial_r1: float | None = None
    # diagnostics
    p_list: tuple = (2.0, 4.0)
    k_levels: tuple = ()
    fit_window: tuple = (2.0, 8.0)
    delta_slack: float = 0.05
    fit_tolerance: float = 0.30
    seed: int = 2024
    # output
    output_dir: str = "out"
    formats: str = "csv,tsv,json"


def _fmt_number(x):
    if x is None:
        return ""
    if isinstance(x, float) and x == int(x) and abs(x) < 1e15:
        return repr(x)
    return repr(x)


_SCHEMA = {
    "params": {
        "d": ("d", lambda s: int(s), str),
        "m": ("m", _parse_number, _fmt_number),
        "M": ("M", _parse_number, _fmt_number),
    },
    "kernel": {
        "kind": ("kernel_kind", str.strip, str),
        "gamma": ("kernel_gamma", _parse_number, _fmt_number),
        "scale": ("kernel_scale", _parse_number, _fmt_number),
        "strength": ("kernel_strength", _parse_number, _fmt_number),
    },
    "grid": {
        "R": ("R", _parse_number, _fmt_number),
        "N": ("N", lambda s: int(s), str),
    },
    "time": {
        "tau_max": ("tau_max", _parse_number, _fmt_number),
        "snapshot_dtau": ("snapshot_dtau", _parse_number, _fmt_number),
    },
    "initial": {
        "kind": ("initial_kind", str.strip, str),
        "center": ("initial_center", _parse_number, _fmt_number),
        "width": ("initial_width", _parse_number, _fmt_number),
        "r0": ("initial_r0", _parse_number, _fmt_number),
        "r1": ("initial_r1", _parse_number, _fmt_number),
    },
    "diagnostics": {
        "p_list": ("p_list", _parse_float_list, lambda v: ",".join(map(repr, v))),
        "k_levels": ("k_levels", _parse_float_list, lambda v: ",".join(map(repr, v))),
        "fit_window": ("fit_window", _parse_float_list, lambda v: ",".join(map(repr, v))),
        "delta_slack": ("delta_slack", _parse_number, _fmt_number),
        "fit_tolerance": ("fit_tolerance", _parse_number, _fmt_number),
        "seed": ("seed", lambda s: int(s), str),
    },
    "output": {
        "directory": ("output_dir", str.strip, str),
        "formats": ("formats", str.strip, str),
    },
}

_FIELD_TO_KEY = {
    attr: (section, key)
    for section, keys in _SCHEMA.items()
    for key, (attr, _, _) in keys.items()
}


def parse_config(text, allow_lists=False):
    """Parse config text; with allow_lists=True, returns {attr: [values, ...]}
    raw sweep axes instead of a RunConfig."""
    section = None
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _SCHEMA[section]:
            raise ConfigError(
                f"line {lineno}: unknown key {key!r} in section [{section}]"
            )
        attr, parser, _ = _SCHEMA[section][key]
        if allow_lists and key not in ("p_list", "k_levels", "fit_window") and "," in val:
            values[attr] = [parser(part.strip()) for part in val.split(",")]
        else:
            try:
                values[attr] = parser(val)
            except ConfigError as exc:
                raise ConfigError(f"line {lineno}: {exc}") from None
    if allow_lists:
        return values
    cfg = RunConfig(**values)
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    if cfg.kernel_kind != "none" and cfg.kernel_kind not in KERNEL_KINDS:
        raise ConfigError(
            f"kernel.kind must be 'none' or one of {KERNEL_KINDS}, got {cfg.kernel_kind!r}"
        )
    if cfg.initial_kind not in INITIAL_KINDS:
        raise ConfigError(
            f"initial.kind must be one of {INITIAL_KINDS}, got {cfg.initial_kind!r}"
        )
    if len(cfg.fit_window) != 2:
        raise ConfigError("diagnostics.fit_window must have exactly two entries")
    if cfg.snapshot_dtau <= 0:
        raise ConfigError("time.snapshot_dtau must be positive")
    return cfg


def serialize_config(cfg):
    lines = []
    for section, keys in _SCHEMA.items():
        lines.append(f"[{section}]")
        for key, (attr, _, fmt) in keys.items():
            val = getattr(cfg, attr)
            if val is None:
                continue
            lines.append(f"{key} = {fmt(val)}")
        lines.append("")
    return "\n".join(lines)


def apply_overrides(cfg, overrides):
    """Apply --set section.key=value style overrides."""
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        path, _, val = item.partition("=")
        section, _, key = path.strip().partition(".")
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigError(f"unknown config key {path.strip()!r}")
        attr, parser, _ = _SCHEMA[section][key]
        setattr(cfg, attr, parser(val.strip()))
    validate_config(cfg)
    return cfg


def config_as_dict(cfg):
    return {f.name: getattr(cfg, f.name) for f in fields(cfg)}
