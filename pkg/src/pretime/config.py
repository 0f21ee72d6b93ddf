"""INI run-configuration parsing, override handling, and object builders.

The on-disk format is plain sectioned key=value text (diff-friendly and
easy to regenerate from a manifest).  Sections: ``regulator`` (and an
optional ``regulator_reach`` that defaults to the same choice),
``plant``, ``surface``, ``sim``, ``campaign``.  Command-line overrides
use ``section.key=value``.  Every key is validated; unknown keys fail
loudly with their section and name.
"""

from __future__ import annotations

import configparser
import math
from typing import Optional

from .errors import ConfigError
from .montecarlo import CampaignConfig
from .plant import PLANTS, get_plant
from .regulator import KINDS, Regulator, make_regulator
from .sim import SimConfig
from .smc import SurfaceParams

__all__ = [
    "load_config",
    "resolve_config",
    "build_regulators",
    "build_surface",
    "build_sim",
    "build_campaign",
    "parse_x0",
    "resolved_to_ini",
]

_REQUIRED = object()
_AUTO = object()

# section -> key -> (type tag, default)
_SCHEMA = {
    "plant": {"name": ("str", "benchmark")},
    "surface": {
        "p1": ("float", _REQUIRED),
        "q": ("float", 2.0),
        "eta0": ("float", 1e-4),
        "t1": ("float", 0.5),
        "t2": ("float", 0.5),
        "kappa": ("float", 0.1),
        "sign_epsilon": ("float", 0.0),
    },
    "sim": {
        "dt": ("float", 1e-5),
        "horizon": ("float", 1.5),
        "settle_threshold_x1": ("float", _AUTO),
        "settle_threshold_s": ("float", 1e-3),
        "record_stride": ("int", 100),
        "x0": ("pair", None),
    },
    "campaign": {
        "n_scenarios": ("int", 100),
        "seed": ("int", 42),
        "x1_min": ("float", -1200.0),
        "x1_max": ("float", 1200.0),
        "x2_min": ("float", -100.0),
        "x2_max": ("float", 100.0),
        "corner_cases": ("bool", True),
        "time_tolerance": ("float", 1e-2),
        "dump_trajectories": ("bool", False),
    },
}

_REGULATOR_SECTIONS = ("regulator", "regulator_reach")


def _parse_value(section: str, key: str, raw, kind: str):
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if kind == "float":
            return float(text)
        if kind == "int":
            return int(text)
        if kind == "bool":
            if text.lower() in ("true", "1", "yes", "on"):
                return True
            if text.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if kind == "pair":
            parts = text.replace(",", " ").split()
            if len(parts) != 2:
                raise ValueError(f"expected two numbers, got {text!r}")
            return (float(parts[0]), float(parts[1]))
        return text
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from None


def load_config(path: Optional[str], overrides: Optional[list[str]] = None) -> dict:
    """Read the INI file (if any) and apply ``section.key=value`` overrides.

    Returns a dict of raw string sections; resolution and typing happen in
    :func:`resolve_config`.
    """
    raw: dict[str, dict[str, str]] = {}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError(f"config parse error in {path!r}: {exc}") from None
        for section in parser.sections():
            raw[section] = dict(parser.items(section))
    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        target, value = item.split("=", 1)
        section, key = target.split(".", 1)
        raw.setdefault(section.strip(), {})[key.strip()] = value.strip()
    return raw


def resolve_config(raw: dict, need_campaign: bool = False, need_x0: bool = False) -> dict:
    """Materialize defaults and type every key; reject unknown names.

    ``settle_threshold_x1`` defaults to sqrt(2 * eta0) of the resolved
    surface when absent.
    """
    known = set(_SCHEMA) | set(_REGULATOR_SECTIONS)
    for section in raw:
        if section not in known:
            raise ConfigError(f"unknown config section [{section}]")

    resolved: dict[str, dict] = {}

    for section, schema in _SCHEMA.items():
        if section == "campaign" and not need_campaign:
            continue
        given = dict(raw.get(section, {}))
        out = {}
        for key, (kind, default) in schema.items():
            if key in given:
                out[key] = _parse_value(section, key, given.pop(key), kind)
            elif default is _REQUIRED:
                raise ConfigError(f"missing required key [{section}] {key}")
            elif default is _AUTO:
                out[key] = None
            else:
                out[key] = default
        if given:
            extra = ", ".join(sorted(given))
            raise ConfigError(f"unknown key(s) in [{section}]: {extra}")
        resolved[section] = out

    if resolved["sim"]["settle_threshold_x1"] is None:
        resolved["sim"]["settle_threshold_x1"] = math.sqrt(2.0 * resolved["surface"]["eta0"])
    if need_x0 and resolved["sim"]["x0"] is None:
        raise ConfigError("missing required key [sim] x0")

    for section in _REGULATOR_SECTIONS:
        if section == "regulator" and section not in raw:
            raise ConfigError("missing required section [regulator] (key: kind)")
        if section not in raw:
            continue
        given = dict(raw[section])
        if "kind" not in given:
            raise ConfigError(f"missing required key [{section}] kind")
        kind = given.pop("kind").strip()
        if kind not in KINDS:
            known_kinds = ", ".join(sorted(KINDS))
            raise ConfigError(f"[{section}] kind: unknown regulator {kind!r}; known kinds: {known_kinds}")
        out = {"kind": kind}
        for key, value in given.items():
            out[key] = _parse_value(section, key, value, "float")
        resolved[section] = out
    if "regulator_reach" not in resolved:
        resolved["regulator_reach"] = dict(resolved["regulator"])

    if resolved["plant"]["name"] not in PLANTS:
        known_plants = ", ".join(sorted(PLANTS))
        raise ConfigError(f"[plant] name: unknown plant {resolved['plant']['name']!r}; known: {known_plants}")

    return resolved


def _build_one_regulator(section: str, entry: dict, p1: float) -> Regulator:
    params = dict(entry)
    kind = params.pop("kind")
    p = params.pop("p", None)
    if p is not None and p != p1:
        raise ConfigError(f"[{section}] p = {p!r} must equal [surface] p1 = {p1!r} (or be omitted)")
    try:
        return make_regulator(kind, p1, **params)
    except Exception as exc:
        raise ConfigError(f"[{section}]: {exc}") from None


def build_regulators(resolved: dict) -> tuple[Regulator, Regulator]:
    p1 = resolved["surface"]["p1"]
    reg_slide = _build_one_regulator("regulator", resolved["regulator"], p1)
    reg_reach = _build_one_regulator("regulator_reach", resolved["regulator_reach"], p1)
    return reg_slide, reg_reach


def build_surface(resolved: dict) -> SurfaceParams:
    s = resolved["surface"]
    return SurfaceParams(
        p1=s["p1"],
        q=s["q"],
        eta0=s["eta0"],
        t1=s["t1"],
        t2=s["t2"],
        kappa=s["kappa"],
        sign_epsilon=s["sign_epsilon"],
    )


def build_sim(resolved: dict) -> SimConfig:
    s = resolved["sim"]
    return SimConfig(
        dt=s["dt"],
        horizon=s["horizon"],
        settle_threshold_x1=s["settle_threshold_x1"],
        settle_threshold_s=s["settle_threshold_s"],
        record_stride=s["record_stride"],
    )


def parse_x0(resolved: dict) -> tuple[float, float]:
    x0 = resolved["sim"]["x0"]
    if x0 is None:
        raise ConfigError("missing required key [sim] x0")
    return x0


def build_campaign(resolved: dict) -> CampaignConfig:
    c = resolved["campaign"]
    reg_slide, reg_reach = build_regulators(resolved)
    return CampaignConfig(
        surface=build_surface(resolved),
        reg_slide=reg_slide,
        reg_reach=reg_reach,
        sim=build_sim(resolved),
        plant=get_plant(resolved["plant"]["name"]),
        plant_name=resolved["plant"]["name"],
        n_scenarios=c["n_scenarios"],
        seed=c["seed"],
        x1_range=(c["x1_min"], c["x1_max"]),
        x2_range=(c["x2_min"], c["x2_max"]),
        corner_cases=c["corner_cases"],
        time_tolerance=c["time_tolerance"],
    )


def resolved_to_ini(resolved: dict) -> str:
    """Render the resolved configuration back to INI text.

    Floats are written with repr round-tripping, so feeding the result
    back through :func:`load_config` reproduces the run exactly.
    """
    lines = []
    for section in sorted(resolved):
        lines.append(f"[{section}]")
        for key, value in resolved[section].items():
            if value is None:
                continue
            if isinstance(value, tuple):
                text = " ".join(repr(float(v)) for v in value)
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append(f"{key} = {text}")
        lines.append("")
    return "\n".join(lines)
