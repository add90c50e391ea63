"""Run configuration: flat ``key=value`` files merged with command-line flags."""

from __future__ import annotations

import argparse
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .bounds import GrowthFunction, log_spaced, random_B
from .dioph import CLASS_BUDGET, parse_phi
from .gaps import GRID_BUDGET, K_BUDGET, LinearFormMatrix, k_max, parse_direction

COMMANDS = ("gaps", "sweep", "km", "threegap", "dioph", "lattice")
FORMATS = ("csv", "json")
KM_MAX_DIM = 6
LATTICE_MAX_DIM = 8

NAMED_ALPHAS = {
    "golden": (math.sqrt(5.0) - 1.0) / 2.0,
    "sqrt2m1": math.sqrt(2.0) - 1.0,
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    m: int = 1
    n: int = 1
    seed: int = 0
    B: str | None = None
    Q: str | None = None
    q_start: float = 1e2
    q_stop: float = 1e6
    q_count: int = 9
    p: float = math.inf
    S: str = "full"
    f: str = "power:1.0"
    phi: str = "qf:1.0:power:1.0"
    N: int = 2
    N_list: str | None = None
    h: float = 1e-4
    alpha: str = "golden"
    output: str | None = None
    format: str = "csv"
    workers: int = 1

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return build_config(data)

    # derived views

    def form(self) -> LinearFormMatrix:
        if self.B is not None:
            return LinearFormMatrix(_parse_matrix(self.B))
        return random_B(self.m, self.n, self.seed)

    def q_values(self) -> list[float]:
        if self.Q is not None:
            return [float(x) for x in self.Q.split(",")]
        return log_spaced(self.q_start, self.q_stop, self.q_count)

    def n_values(self) -> list[int]:
        if self.N_list is not None:
            return [int(x) for x in self.N_list.split(",")]
        return [self.N]

    def alphas(self) -> list[float]:
        return [NAMED_ALPHAS[a] if a in NAMED_ALPHAS else float(a) for a in self.alpha.split(",")]

    def direction(self):
        return parse_direction(self.S)

    def growth(self) -> GrowthFunction:
        return GrowthFunction.parse(self.f)

    def phi_spec(self):
        return parse_phi(self.phi)


_FIELDS = {f.name: f for f in fields(RunConfig)}
_INT_KEYS = {"m", "n", "seed", "q_count", "N", "workers"}
_FLOAT_KEYS = {"q_start", "q_stop", "p", "h"}


def _parse_matrix(text: str) -> list[list[float]]:
    return [[float(x) for x in row.split(",")] for row in text.split(";")]


def _coerce(key: str, value):
    if value is None:
        return None
    try:
        if key in _INT_KEYS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot read {value!r} as {'integer' if key in _INT_KEYS else 'number'}")
    return str(value).strip()


def read_config_file(path) -> dict:
    """Flat UTF-8 ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        out[key.strip()] = value.strip()
    return out


def _check(cfg: RunConfig) -> None:
    def bad(key, msg):
        raise ConfigError(f"{key}: {msg}")

    if cfg.command not in COMMANDS:
        bad("command", f"must be one of {', '.join(COMMANDS)}")
    if cfg.format not in FORMATS:
        bad("format", "must be csv or json")
    if cfg.m < 1 or cfg.n < 1:
        bad("m" if cfg.m < 1 else "n", "must be at least 1")
    if not (cfg.p >= 1.0):
        bad("p", f"must lie in [1, inf], got {cfg.p}")
    if not (cfg.h > 0 and cfg.h < 1):
        bad("h", "must lie in (0, 1)")
    if cfg.workers < 1:
        bad("workers", "must be at least 1")
    for key, parse in (("S", cfg.direction), ("f", cfg.growth), ("phi", cfg.phi_spec)):
        try:
            parse()
        except ValueError as exc:
            bad(key, str(exc))
    try:
        B = cfg.form()
    except ValueError as exc:
        bad("B", str(exc))
    if cfg.B is not None:
        object.__setattr__(cfg, "m", B.m)
        object.__setattr__(cfg, "n", B.n)
    dim = cfg.direction().dim
    if dim is not None and dim != B.m:
        bad("S", f"direction spec has dimension {dim}, B has m={B.m}")
    try:
        qs = cfg.q_values()
    except ValueError as exc:
        bad("Q", str(exc))
    if cfg.Q is None and not (0 < cfg.q_start < cfg.q_stop and cfg.q_count >= 1):
        bad("q_start", "need 0 < q_start < q_stop and q_count >= 1")
    if any(not q > 0 for q in qs) or any(b <= a for a, b in zip(qs, qs[1:])):
        bad("Q", "values must be positive and strictly increasing")
    try:
        alphas = cfg.alphas()
    except ValueError:
        bad("alpha", f"expected numbers or one of {', '.join(NAMED_ALPHAS)}")
    try:
        Ns = cfg.n_values()
    except ValueError:
        bad("N_list", "expected comma-separated integers")
    if any(N < 1 for N in Ns):
        bad("N_list" if cfg.N_list else "N", "moduli must be positive")

    # budget caps of the invoked module
    d = B.m + B.n
    qmax = max(qs)
    if cfg.command in ("gaps", "sweep", "threegap", "dioph"):
        n_eff = 1 if cfg.command == "threegap" else B.n
        if k_max(qmax, n_eff) ** n_eff > K_BUDGET:
            bad("Q", f"K(B;Q) at Q={qmax:g} exceeds the point budget {K_BUDGET}")
    if cfg.command in ("gaps", "sweep", "dioph") and math.ceil(1.0 / cfg.h) ** B.m > GRID_BUDGET:
        bad("h", f"torus grid exceeds budget {GRID_BUDGET}")
    if cfg.command == "km" and d > KM_MAX_DIM:
        bad("m", f"km needs m + n <= {KM_MAX_DIM}")
    if cfg.command == "lattice" and d > LATTICE_MAX_DIM:
        bad("m", f"lattice needs m + n <= {LATTICE_MAX_DIM}")
    if cfg.command == "dioph" and max(Ns) ** d > CLASS_BUDGET:
        bad("N_list" if cfg.N_list else "N", f"{max(Ns)}^{d} classes exceed budget {CLASS_BUDGET}")
    if cfg.command == "dioph" and len(qs) != 1:
        bad("Q", "dioph takes a single Q value")
    if cfg.command == "threegap" and any(not 0 <= a < 1 for a in alphas):
        bad("alpha", "values must lie in [0, 1)")


def build_config(values: dict) -> RunConfig:
    """Validate a dict of raw values (strings or typed) into a ``RunConfig``."""
    unknown = sorted(set(values) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key")
    if "command" not in values or values["command"] is None:
        raise ConfigError("command: missing")
    cfg = RunConfig(**{k: _coerce(k, v) for k, v in values.items()})
    _check(cfg)
    return cfg


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="kgap", allow_abbrev=False,
                 description="Directional gaps in Kronecker point sets.")
    ap.add_argument("command", nargs="?", choices=COMMANDS)
    ap.add_argument("--config", help="key=value file; flags override its entries")
    for name in _FIELDS:
        if name == "command":
            continue
        flag = "--" + name.replace("_", "-")
        ap.add_argument(flag, dest=name, default=None)
    return ap


def parse_config(argv, config_file=None) -> RunConfig:
    """Merge an optional config file (``--config`` or ``config_file``) with flags."""
    ns = _parser().parse_args(list(argv))
    values = {}
    path = ns.config or config_file
    if path is not None:
        values.update(read_config_file(path))
    for name in _FIELDS:
        v = getattr(ns, name, None)
        if v is not None:
            values[name] = v
    return build_config(values)
