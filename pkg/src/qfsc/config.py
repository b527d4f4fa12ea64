"""TOML run configuration: schema validation and model construction."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

from .phase_space import SigmaMap, build_sigma_gauge, build_sigma_squeezed

__all__ = ["ConfigError", "Config", "load_config", "default_config_path", "parse_complex_array"]

_SECTIONS = {
    "model": {"d", "bins", "dt", "cutoff"},
    "state": {"kind", "T", "strict", "P", "U", "Kp", "scale"},
    "tolerances": {"exact", "truncated"},
    "run": {"seed", "trials", "weyl_norm", "horizon"},
    "functions": None,
}


class ConfigError(ValueError):
    """Invalid configuration (reported with exit code 2)."""


def default_config_path() -> Path:
    return Path(str(resources.files("qfsc") / "data" / "default.toml"))


def parse_complex_array(value, what: str) -> np.ndarray:
    """Numbers, strings like ``"1+2j"``, or nested lists thereof."""

    def conv(x):
        if isinstance(x, list):
            return [conv(y) for y in x]
        if isinstance(x, bool):
            raise ConfigError(f"{what}: booleans are not numbers")
        if isinstance(x, (int, float)):
            return complex(x)
        if isinstance(x, str):
            try:
                return complex(x.replace(" ", "").replace("i", "j"))
            except ValueError as exc:
                raise ConfigError(f"{what}: cannot parse {x!r} as a complex number") from exc
        raise ConfigError(f"{what}: unsupported value {x!r}")

    try:
        return np.array(conv(value), dtype=complex)
    except ValueError as exc:
        raise ConfigError(f"{what}: ragged array") from exc


@dataclass
class Config:
    d: int = 1
    bins: int = 2
    dt: float = 1.0
    cutoff: int = 10
    kind: str = "gauge"
    T: object = 1.0
    strict: bool = True
    P: object = 0.0
    U: object = None
    Kp: object = None
    scale: float = 1.0
    tol_exact: float = 1e-10
    tol_truncated: float = 1e-6
    seed: int = 0
    trials: int = 100
    weyl_norm: float = 0.25
    horizon: float = 0.25
    functions: dict = field(default_factory=dict)
    source: str = ""

    def sigma(self, bins: int | None = None) -> SigmaMap:
        """Covariance map described by the ``[state]`` section."""
        m = self.bins if bins is None else bins
        try:
            if self.kind == "gauge":
                sig = build_sigma_gauge(self.T, m=m, strict=self.strict)
            else:
                sig = build_sigma_squeezed(self.T, U=self.U, Kp=self.Kp, P=self.P, m=m, strict=self.strict)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if sig.d != self.d:
            raise ConfigError(f"state has d={sig.d} but [model] d={self.d}")
        if self.kind == "custom" or self.scale != 1.0:
            sig = sig.scaled(self.scale)
        return sig

    def to_dict(self) -> dict:
        def plain(x):
            if isinstance(x, np.ndarray):
                x = x.tolist()
            if isinstance(x, complex):
                return [x.real, x.imag] if x.imag else x.real
            if isinstance(x, list):
                return [plain(y) for y in x]
            if isinstance(x, dict):
                return {k: plain(v) for k, v in sorted(x.items())}
            return x

        keys = ["d", "bins", "dt", "cutoff", "kind", "T", "strict", "P", "U", "Kp", "scale",
                "tol_exact", "tol_truncated", "seed", "trials", "weyl_norm", "horizon"]
        return {k: plain(getattr(self, k)) for k in keys}


def _get(section: dict, key: str, typ, default, where: str):
    if key not in section:
        return default
    val = section[key]
    if typ is int and (isinstance(val, bool) or not isinstance(val, int)):
        raise ConfigError(f"[{where}] {key} must be an integer")
    if typ is float and (isinstance(val, bool) or not isinstance(val, (int, float))):
        raise ConfigError(f"[{where}] {key} must be a number")
    if typ is bool and not isinstance(val, bool):
        raise ConfigError(f"[{where}] {key} must be true or false")
    if typ is str and not isinstance(val, str):
        raise ConfigError(f"[{where}] {key} must be a string")
    return typ(val)


def load_config(path=None) -> Config:
    """Read and validate a TOML configuration file."""
    p = Path(path) if path is not None else default_config_path()
    try:
        raw = tomllib.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {p}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {p}: {exc}") from exc
    return config_from_dict(raw, str(p))


def config_from_dict(raw: dict, source: str = "<dict>") -> Config:
    for name, value in raw.items():
        if name not in _SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
        if not isinstance(value, dict):
            raise ConfigError(f"[{name}] must be a table")
        allowed = _SECTIONS[name]
        if allowed is not None:
            extra = sorted(set(value) - allowed)
            if extra:
                raise ConfigError(f"[{name}] has unknown key(s): {', '.join(extra)}")
    model = raw.get("model", {})
    state = raw.get("state", {})
    tols = raw.get("tolerances", {})
    run = raw.get("run", {})
    cfg = Config(
        d=_get(model, "d", int, 1, "model"),
        bins=_get(model, "bins", int, 2, "model"),
        dt=_get(model, "dt", float, 1.0, "model"),
        cutoff=_get(model, "cutoff", int, 10, "model"),
        kind=_get(state, "kind", str, "gauge", "state"),
        strict=_get(state, "strict", bool, True, "state"),
        scale=_get(state, "scale", float, 1.0, "state"),
        tol_exact=_get(tols, "exact", float, 1e-10, "tolerances"),
        tol_truncated=_get(tols, "truncated", float, 1e-6, "tolerances"),
        seed=_get(run, "seed", int, 0, "run"),
        trials=_get(run, "trials", int, 100, "run"),
        weyl_norm=_get(run, "weyl_norm", float, 0.25, "run"),
        horizon=_get(run, "horizon", float, 0.25, "run"),
        source=source,
    )
    if cfg.d < 1 or cfg.bins < 1:
        raise ConfigError("[model] d and bins must be positive")
    if cfg.cutoff < 2:
        raise ConfigError("[model] cutoff must be at least 2")
    if cfg.kind not in ("gauge", "squeezed", "custom"):
        raise ConfigError(f"[state] kind must be gauge, squeezed or custom, got {cfg.kind!r}")
    if cfg.seed < 0 or cfg.seed >= 2**64:
        raise ConfigError("[run] seed must be an unsigned 64-bit integer")
    if cfg.trials < 1:
        raise ConfigError("[run] trials must be positive")
    for key in ("T", "P", "U", "Kp"):
        if key in state:
            setattr(cfg, key, parse_complex_array(state[key], f"[state] {key}"))
    for key in ("T", "P"):
        arr = np.asarray(getattr(cfg, key))
        if np.iscomplexobj(arr) and arr.ndim == 0:
            setattr(cfg, key, complex(arr))
    d_T = 1 if np.ndim(cfg.T) < 2 else np.shape(cfg.T)[-1]
    if d_T != cfg.d:
        raise ConfigError(f"[state] T has dimension {d_T}, expected d={cfg.d}")
    size = cfg.bins * cfg.d
    for name, value in raw.get("functions", {}).items():
        arr = parse_complex_array(value, f"[functions] {name}").reshape(-1)
        if arr.size != size:
            raise ConfigError(f"[functions] {name} has {arr.size} entries, expected bins*d = {size}")
        cfg.functions[name] = arr
    cfg.sigma()  # validate the state now so errors surface as config errors
    return cfg
