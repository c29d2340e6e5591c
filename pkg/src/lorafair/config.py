"""Flat ``key = value`` scenario files.

Example::

    # one-day run, 1 km cell
    n_nodes = 1000
    radius = 1000
    strategy = fadr-one-region
    perfect_orthogonality = false
    pow_levels = 2,5,8,11,14
    deployed = 7-12:125

Blank lines and ``#`` comments are ignored. Unknown keys are errors.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import numpy as np

from .allocation import DEFAULT_DEPLOYMENT
from .channel import PropagationConfig
from .phy import CirMatrix, SensitivityModel
from .simulation import ConfigError, Scenario

LORAWAN_EU_DEPLOYMENT = ((7, 250_000, 1),) + DEFAULT_DEPLOYMENT
NAMED_DEPLOYMENTS = {"default": DEFAULT_DEPLOYMENT, "lorawan-eu": LORAWAN_EU_DEPLOYMENT}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _bool(v: str) -> bool:
    v = v.lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _ints(v: str) -> tuple[int, ...]:
    return tuple(int(x) for x in v.split(",") if x.strip())


def _floats(v: str) -> tuple[float, ...]:
    return tuple(float(x) for x in v.split(",") if x.strip())


def parse_deployment(spec: str) -> tuple[tuple[int, int, int], ...]:
    """Parse ``SF[-SF]:BWkHz[:CR]`` items, comma separated, or a named set.

    ``CR`` is written ``4/5``..``4/8``. ``7-12:125,7:250`` deploys every SF at
    125 kHz plus SF7 at 250 kHz.
    """
    spec = spec.strip()
    if spec in NAMED_DEPLOYMENTS:
        return NAMED_DEPLOYMENTS[spec]
    out = []
    for item in spec.split(","):
        parts = item.strip().split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"bad deployment item {item!r}")
        lo, _, hi = parts[0].partition("-")
        sfs = range(int(lo), int(hi or lo) + 1)
        bw = int(float(parts[1]) * 1000)
        cr = 1
        if len(parts) == 3:
            num, slash, den = parts[2].partition("/")
            if not slash or num.strip() != "4":
                raise ValueError(f"coding rate must look like 4/5..4/8, got {parts[2]!r}")
            cr = int(den) - 4
        out.extend((sf, bw, cr) for sf in sfs)
    return tuple(dict.fromkeys(out))


def _cir(v: str) -> CirMatrix:
    vals = _floats(v)
    if len(vals) == 1:
        return CirMatrix.uniform(vals[0])
    if len(vals) == 36:
        return CirMatrix(np.array(vals).reshape(6, 6))
    raise ValueError("cir takes one value or 36 values (row-major, signal SF by interferer SF)")


_SCALARS = {
    "n_nodes": int,
    "radius": float,
    "distribution": str,
    "placement": str,
    "packet_len": int,
    "mean_interval": float,
    "max_recv": int,
    "channels": _ints,
    "sim_time": float,
    "seeds": _ints,
    "strategy": str,
    "perfect_orthogonality": _bool,
    "capture_enabled": _bool,
    "cir": _cir,
    "pow_levels": _ints,
    "deployed": parse_deployment,
    "bw_weighting": str,
    "initial_tp": int,
    "warmup_packets": int,
    "bin_width": float,
}
_PROPAGATION = {"d0": float, "pl_d0": float, "gamma": float, "shadowing_sigma": float}
_SENSITIVITY = {"sensitivity_mode": ("mode", str), "sensitivity_floor": ("floor", float)}
EXTRA_KEYS = {"strategies": lambda v: tuple(x.strip() for x in v.split(",") if x.strip())}
KNOWN_KEYS = sorted([*_SCALARS, *_PROPAGATION, *_SENSITIVITY, *EXTRA_KEYS])


def parse_config(text: str, source: str = "<string>") -> tuple[Scenario, dict]:
    """Build a Scenario from config text; returns it with any extra keys."""
    fields, prop, sens, extra = {}, {}, {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        try:
            if key in _SCALARS:
                fields[key] = _SCALARS[key](value)
            elif key in _PROPAGATION:
                prop[key] = _PROPAGATION[key](value)
            elif key in _SENSITIVITY:
                name, conv = _SENSITIVITY[key]
                sens[name] = conv(value)
            elif key in EXTRA_KEYS:
                extra[key] = EXTRA_KEYS[key](value)
            else:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: {key}: {exc}") from None
    try:
        if prop:
            fields["propagation"] = PropagationConfig(**prop)
        if sens:
            fields["sensitivity"] = SensitivityModel(**sens)
        return Scenario(**fields), extra
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path) -> tuple[Scenario, dict]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return parse_config(text, str(path))


def with_axis(scenario: Scenario, axis: str, value) -> Scenario:
    """Copy of ``scenario`` with one sweep axis set."""
    conv = {"n_nodes": int, "radius": float, "distribution": str, "strategy": str}
    if axis not in conv:
        raise ConfigError(f"cannot sweep over {axis!r}; choose one of {', '.join(conv)}")
    try:
        return replace(scenario, **{axis: conv[axis](value)})
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
