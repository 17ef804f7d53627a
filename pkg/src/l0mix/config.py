"""Flat ``key = value`` experiment documents.

One assignment per line; ``#`` starts a comment. Values are numbers,
``true``/``false``, or strings (quoted or bare). Keys use dotted paths::

    preset = "exp2"          # optional starting point
    scale = "desk"
    scenario.horizon = 18000
    snr.segments = "0:60,6000:40,12000:20"
    filters.2.kappa = 5e-6
    combiner.kind = "grad"

``preset``, ``scale`` and ``variant`` select a starting configuration; all
other keys override it (or the defaults, when no preset is named).
"""
from __future__ import annotations

import re
from dataclasses import replace

from .errors import ConfigError, ContractError
from .filters import FilterParams
from .harness.config import CombinerSpec, ExperimentConfig, SweepSpec
from .harness.presets import preset
from .sim import Scenario

META_KEYS = ("preset", "scale", "variant")
_FILTER_KEY = re.compile(r"^filters\.(\d+)\.(mu|kappa|beta|kind)$")
_INT = re.compile(r"^[+-]?\d+$")
_FLOAT = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$|^[+-]?(inf|nan)$")

# key -> value type
_SCALARS = {
    "runs": int,
    "seed": int,
    "steady_window": float,
    "exclude_divergent": bool,
    "policy": str,
    "scenario.length": int,
    "scenario.active": int,
    "scenario.tap_value": float,
    "scenario.placement_seed": int,
    "scenario.near_sparse_eps": float,
    "scenario.near_sparse_seed": int,
    "scenario.input_variance": float,
    "scenario.horizon": int,
    "snr.segments": str,
    "filters.count": int,
    "combiner.kind": str,
    "combiner.mu_c": float,
    "combiner.beta_f": float,
    "combiner.lambda_f": float,
    "combiner.delta": float,
    "combiner.rule": str,
    "sweep.kappa_min": float,
    "sweep.kappa_max": float,
    "sweep.points": int,
    "sweep.snrs": str,
}
_FILTER_TYPES = {"mu": float, "kappa": float, "beta": float, "kind": str}
_DEFAULT_SWEEP = SweepSpec(1e-6, 1e-4, 16, (10.0, 20.0, 30.0, 40.0))


def parse_value(text: str):
    """Literal from the right-hand side of an assignment."""
    t = text.strip()
    if len(t) >= 2 and t[0] == t[-1] and t[0] in "\"'":
        return t[1:-1]
    if t in ("true", "false"):
        return t == "true"
    if _INT.match(t):
        return int(t)
    if _FLOAT.match(t):
        return float(t)
    return t


def _coerce(key, typ, value, line):
    if typ is bool:
        if isinstance(value, bool):
            return value
    elif typ is int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif typ is float:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
    elif typ is str:
        if isinstance(value, str):
            return value
    raise ConfigError(f"expected {typ.__name__}, got {value!r}", key=key, line=line)


def _strip_comment(raw: str) -> str:
    quote = None
    for i, ch in enumerate(raw):
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            return raw[:i]
    return raw


def _tokenize(text: str):
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError("expected 'key = value'", line=lineno)
        out.append((key, parse_value(value), lineno))
    return out


def _segments(value, key, line):
    try:
        pairs = []
        for part in value.split(","):
            start, _, snr = part.strip().partition(":")
            pairs.append((int(start), float(snr)))
        return tuple(pairs)
    except ValueError:
        raise ConfigError(f"expected 'start:snr_db,...', got {value!r}", key=key, line=line) from None


def _floats(value, key, line):
    try:
        return tuple(float(v) for v in str(value).split(","))
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {value!r}", key=key, line=line) from None


def apply_overrides(cfg: ExperimentConfig | None, items) -> ExperimentConfig:
    """Apply ``(key, value, line)`` assignments on top of ``cfg``."""
    fields = _flatten(cfg) if cfg is not None else {}
    filters = [dict(f) for f in fields.pop("_filters", [])]
    where = {}
    count = None
    for key, value, line in items:
        m = _FILTER_KEY.match(key)
        if m:
            idx, attr = int(m.group(1)), m.group(2)
            if idx < 1:
                raise ConfigError("filter indices start at 1", key=key, line=line)
            while len(filters) < idx:
                filters.append(dict(filters[-1]) if filters else {})
            filters[idx - 1][attr] = _coerce(key, _FILTER_TYPES[attr], value, line)
        elif key == "filters.count":
            count = _coerce(key, int, value, line)
            if count < 1:
                raise ConfigError("must be >= 1", key=key, line=line)
            while len(filters) < count:
                filters.append(dict(filters[-1]) if filters else {})
            del filters[count:]
        elif key in _SCALARS:
            if key == "sweep.snrs" and isinstance(value, (int, float)) and not isinstance(value, bool):
                value = str(value)  # a single SNR
            v = _coerce(key, _SCALARS[key], value, line)
            if key == "snr.segments":
                v = _segments(v, key, line)
            elif key == "sweep.snrs":
                v = _floats(v, key, line)
            fields[key] = v
        elif key in META_KEYS:
            raise ConfigError("must appear before any override", key=key, line=line)
        else:
            raise ConfigError("unknown key", key=key, line=line)
        where[key] = where[key.split(".")[0]] = (key, line)
    return _build(fields, filters, where)


def _flatten(cfg: ExperimentConfig) -> dict:
    sc, cb = cfg.scenario, cfg.combiner
    out = {
        "runs": cfg.runs,
        "seed": cfg.base_seed,
        "steady_window": cfg.steady_window,
        "exclude_divergent": cfg.exclude_divergent,
        "policy": cfg.policy,
        "scenario.length": sc.length,
        "scenario.active": sc.n_active,
        "scenario.tap_value": sc.tap_value,
        "scenario.placement_seed": sc.placement_seed,
        "scenario.near_sparse_eps": sc.near_sparse_eps,
        "scenario.near_sparse_seed": sc.near_sparse_seed,
        "scenario.input_variance": sc.input_variance,
        "scenario.horizon": sc.horizon,
        "snr.segments": sc.snr_schedule,
        "combiner.kind": cb.kind,
        "combiner.mu_c": cb.mu_c,
        "combiner.beta_f": cb.beta_f,
        "combiner.lambda_f": cb.lambda_f,
        "combiner.delta": cb.delta,
        "combiner.rule": cb.rule,
        "_filters": [dict(mu=f.mu, kappa=f.kappa, beta=f.beta, kind=f.kind) for f in cfg.filters],
    }
    if cfg.sweep is not None:
        sw = cfg.sweep
        out.update({
            "sweep.kappa_min": sw.kappa_min,
            "sweep.kappa_max": sw.kappa_max,
            "sweep.points": sw.points,
            "sweep.snrs": sw.snrs,
        })
    return out


def _fail(exc, where, *candidates):
    for c in candidates:
        if c in where:
            key, line = where[c]
            raise ConfigError(str(exc), key=key, line=line) from None
    raise ConfigError(str(exc), key=candidates[0] if candidates else None) from None


def _build(fields: dict, filters: list[dict], where: dict) -> ExperimentConfig:
    def need(key):
        if key not in fields:
            raise ConfigError("required (no preset supplies it)", key=key)
        return fields[key]

    for key in ("runs", "scenario.horizon"):
        if fields.get(key, 1) < 1:
            _fail(f"must be >= 1, got {fields[key]}", where, key)

    try:
        scenario = Scenario(
            length=need("scenario.length"),
            n_active=need("scenario.active"),
            horizon=need("scenario.horizon"),
            snr_schedule=need("snr.segments"),
            tap_value=fields.get("scenario.tap_value", 1.0),
            placement_seed=fields.get("scenario.placement_seed", 0),
            near_sparse_eps=fields.get("scenario.near_sparse_eps", 0.0),
            near_sparse_seed=fields.get("scenario.near_sparse_seed", 0),
            input_variance=fields.get("scenario.input_variance", 1.0),
        )
        if scenario.near_sparse_eps:
            scenario.w_opt
    except ContractError as exc:
        _fail(exc, where, "snr.segments", "scenario")

    params = []
    for i, f in enumerate(filters, start=1):
        try:
            if "mu" not in f:
                raise ContractError("mu is required")
            params.append(FilterParams(**f))
        except ContractError as exc:
            _fail(exc, where, *(f"filters.{i}.{a}" for a in ("mu", "kappa", "beta", "kind")))
    if not params:
        raise ConfigError("at least one filter is required", key="filters.1.mu")

    try:
        combiner = CombinerSpec(
            kind=fields.get("combiner.kind", "none"),
            mu_c=fields.get("combiner.mu_c", 3000.0),
            beta_f=fields.get("combiner.beta_f", 0.99),
            lambda_f=fields.get("combiner.lambda_f", 0.99),
            delta=fields.get("combiner.delta", 1e-2),
            rule=fields.get("combiner.rule", "per_filter"),
        )
    except ContractError as exc:
        _fail(exc, where, "combiner")

    sweep = None
    if any(k.startswith("sweep.") for k in fields):
        d = _DEFAULT_SWEEP
        try:
            sweep = SweepSpec(
                fields.get("sweep.kappa_min", d.kappa_min),
                fields.get("sweep.kappa_max", d.kappa_max),
                fields.get("sweep.points", d.points),
                fields.get("sweep.snrs", d.snrs),
            )
        except ContractError as exc:
            _fail(exc, where, "sweep")

    try:
        return ExperimentConfig(
            scenario=scenario,
            filters=tuple(params),
            policy=fields.get("policy", "full"),
            combiner=combiner,
            runs=fields.get("runs", 100),
            base_seed=fields.get("seed", 0),
            steady_window=fields.get("steady_window", 0.1),
            exclude_divergent=fields.get("exclude_divergent", False),
            sweep=sweep,
        )
    except ContractError as exc:
        msg = str(exc)
        if "runs" in msg:
            _fail(exc, where, "runs")
        if "steady_window" in msg:
            _fail(exc, where, "steady_window")
        if "policy" in msg:
            _fail(exc, where, "policy")
        _fail(exc, where, "combiner.kind", "filters", "combiner")


def parse_config(text: str) -> ExperimentConfig:
    """Parse a configuration document into a validated :class:`ExperimentConfig`."""
    items = _tokenize(text)
    meta = {}
    rest = []
    for key, value, line in items:
        if key in META_KEYS and not rest:
            meta[key] = (_coerce(key, str, value, line), line)
        else:
            rest.append((key, value, line))
    base = None
    if "preset" in meta:
        name, line = meta["preset"]
        scale = meta.get("scale", ("paper", None))[0]
        variant = meta.get("variant", (None, None))[0]
        try:
            base = preset(name, scale, variant)
        except ContractError as exc:
            raise ConfigError(str(exc), key="preset", line=line) from None
    elif "scale" in meta or "variant" in meta:
        key = "scale" if "scale" in meta else "variant"
        raise ConfigError("only meaningful together with 'preset'", key=key, line=meta[key][1])
    return apply_overrides(base, rest)


def parse_override(text: str):
    """``key=value`` from the command line, as an assignment triple."""
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"expected key=value, got {text!r}")
    return key.strip(), parse_value(value), None


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, int):
        return str(v)
    return f'"{v}"'


def serialize(cfg: ExperimentConfig) -> str:
    """Complete document for ``cfg``; ``parse_config`` inverts it exactly."""
    fields = _flatten(cfg)
    filters = fields.pop("_filters")
    lines = []
    for key, value in fields.items():
        if key == "snr.segments":
            value = ",".join(f"{s}:{snr!r}" for s, snr in value)
        elif key == "sweep.snrs":
            value = ",".join(repr(s) for s in value)
        lines.append(f"{key} = {_fmt(value)}")
    for i, f in enumerate(filters, start=1):
        for attr in ("mu", "kappa", "beta", "kind"):
            lines.append(f"filters.{i}.{attr} = {_fmt(f[attr])}")
    return "\n".join(lines) + "\n"


def with_overrides(cfg: ExperimentConfig, overrides: list[str]) -> ExperimentConfig:
    if not overrides:
        return cfg
    return apply_overrides(cfg, [parse_override(o) for o in overrides])
