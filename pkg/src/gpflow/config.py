"""Run configuration: flat ``key = value`` files and field CSV I/O.

Recognised keys and defaults (``L``, ``h`` and ``tau`` are required)::

    L, h, tau
    k11 = 0, k12 = 0, k22 = 0, beta = 0, omega1 = 0, omega2 = 0
    potential = harmonic          # harmonic | file
    gamma = 1                     # harmonic scale
    add_abs_beta = true           # add |beta| to the harmonic trap
    potential_offset = 0          # constant added to both potentials
    potential_file =              # CSV x,y,v1,v2 when potential = file
    max_steps = 100000
    stop_tol = 1e-7
    krylov_rel_tol = 1e-10
    krylov_abs_tol = 1e-14
    krylov_max_iters = 0          # 0 means 10 * 2N
    preconditioner = none         # none | diagonal
    safeguard = none              # none | backtrack
    backtrack_shrink = 0.5
    backtrack_max_halvings = 20
    record_h1_increments = true
    initial_data = gaussian       # gaussian | vortex_gaussian | file
    initial_file =                # field.csv written by a previous solve
    output_dir = .
    emit_fields = false

Lines starting with ``#`` and text after `` #`` are comments.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .gfsi import Backtrack, SolverConfig
from .grid import GridSpec, WaveField, l2_norm
from .linalg import KrylovConfig, Preconditioner
from .physics import CustomPotential, HarmonicPotential, PhysicsParams

FIELD_HEADER = ["x", "y", "re1", "im1", "re2", "im2", "dens1", "dens2"]
REQUIRED = ("L", "h", "tau")


class ConfigError(ValueError):
    def __init__(self, key: str | None, message: str):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    L: float
    h: float
    tau: float
    k11: float = 0.0
    k12: float = 0.0
    k22: float = 0.0
    beta: float = 0.0
    omega1: float = 0.0
    omega2: float = 0.0
    potential: str = "harmonic"
    gamma: float = 1.0
    add_abs_beta: bool = True
    potential_offset: float = 0.0
    potential_file: str = ""
    max_steps: int = 100_000
    stop_tol: float = 1e-7
    krylov_rel_tol: float = 1e-10
    krylov_abs_tol: float = 1e-14
    krylov_max_iters: int = 0
    preconditioner: str = "none"
    safeguard: str = "none"
    backtrack_shrink: float = 0.5
    backtrack_max_halvings: int = 20
    record_h1_increments: bool = True
    initial_data: str = "gaussian"
    initial_file: str = ""
    output_dir: str = "."
    emit_fields: bool = False

    def grid(self) -> GridSpec:
        return GridSpec(self.L, self.h)

    def physics(self) -> PhysicsParams:
        if self.potential == "harmonic":
            pot = HarmonicPotential(self.gamma, self.add_abs_beta, self.potential_offset)
        else:
            pot = read_potential_csv(Path(self.potential_file), self.grid())
        return PhysicsParams(self.k11, self.k12, self.k22, self.beta, self.omega1, self.omega2, pot)

    def solver(self, allow_indefinite: bool = False) -> SolverConfig:
        kry = KrylovConfig(
            rel_tol=self.krylov_rel_tol,
            abs_tol=self.krylov_abs_tol,
            max_iters=self.krylov_max_iters or None,
            preconditioner=Preconditioner(self.preconditioner),
            allow_indefinite=allow_indefinite,
        )
        guard = None
        if self.safeguard == "backtrack":
            guard = Backtrack(self.backtrack_shrink, self.backtrack_max_halvings)
        return SolverConfig(tau=self.tau, max_steps=self.max_steps, stop_tol=self.stop_tol,
                            krylov=kry, safeguard=guard,
                            record_h1_increments=self.record_h1_increments)

    def initial_field(self, base_dir: Path | None = None) -> WaveField:
        g = self.grid()
        X, Y = g.mesh()
        gauss = np.exp(-(X * X + Y * Y) / 2.0) / math.sqrt(2.0 * math.pi)
        if self.initial_data == "gaussian":
            psi = WaveField.from_components(g, gauss, gauss)
        elif self.initial_data == "vortex_gaussian":
            v = (X + 1j * Y) * gauss
            psi = WaveField.from_components(g, v, v)
        else:
            path = Path(self.initial_file)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            psi = read_field_csv(path, g)
        # the analytic data are normalized in the continuum only
        return psi / l2_norm(psi)


_CHOICES = {
    "potential": ("harmonic", "file"),
    "preconditioner": ("none", "diagonal"),
    "safeguard": ("none", "backtrack"),
    "initial_data": ("gaussian", "vortex_gaussian", "file"),
}
_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str):
    typ = _TYPES[key]
    try:
        if typ == "float":
            val = float(raw)
            if not math.isfinite(val):
                raise ValueError("not finite")
            return val
        if typ == "int":
            return int(raw)
        if typ == "bool":
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError("expected true/false")
    except ValueError as exc:
        raise ConfigError(key, f"invalid value {raw!r} ({exc})") from None
    if key in _CHOICES and raw not in _CHOICES[key]:
        raise ConfigError(key, f"must be one of {', '.join(_CHOICES[key])}, got {raw!r}")
    return raw


def parse_config(text: str) -> RunConfig:
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if " #" in stripped:
            stripped = stripped.split(" #", 1)[0].rstrip()
        if "=" not in stripped:
            raise ConfigError(None, f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in stripped.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(key, f"unknown key (line {lineno})")
        if key in values:
            raise ConfigError(key, f"duplicate key (line {lineno})")
        values[key] = _convert(key, raw)
    for key in REQUIRED:
        if key not in values:
            raise ConfigError(key, "missing required key")
    cfg = RunConfig(**values)
    _check(cfg)
    return cfg


def _check(cfg: RunConfig) -> None:
    try:
        cfg.grid()
    except ValueError as exc:
        raise ConfigError("h", str(exc)) from None
    if not cfg.tau > 0:
        raise ConfigError("tau", "must be positive")
    if cfg.omega1 < 0 or cfg.omega2 < 0:
        raise ConfigError("omega1" if cfg.omega1 < 0 else "omega2", "must be non-negative")
    if cfg.potential == "file" and not cfg.potential_file:
        raise ConfigError("potential_file", "required when potential = file")
    if cfg.initial_data == "file" and not cfg.initial_file:
        raise ConfigError("initial_file", "required when initial_data = file")


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(None, f"cannot read config {path}: {exc}") from None
    cfg = parse_config(text)
    base = Path(path).resolve().parent
    # relative data paths are relative to the config file
    updates = {}
    for key in ("potential_file", "initial_file"):
        val = getattr(cfg, key)
        if val and not Path(val).is_absolute():
            updates[key] = str(base / val)
    return replace(cfg, **updates) if updates else cfg


def fmt(x) -> str:
    """Shortest round-trip decimal form."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_field_csv(path: Path, psi: WaveField) -> None:
    g = psi.grid
    X, Y = g.mesh()
    d = psi.data
    cols = [X, Y, d[0].real, d[0].imag, d[1].real, d[1].imag, np.abs(d[0]) ** 2, np.abs(d[1]) ** 2]
    flat = [c.ravel() for c in cols]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIELD_HEADER)
        for row in zip(*flat):
            w.writerow([fmt(v) for v in row])


def read_field_csv(path: Path, g: GridSpec) -> WaveField:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:6] != FIELD_HEADER[:6]:
        raise ConfigError("initial_file", f"{path}: expected header starting {','.join(FIELD_HEADER[:6])}")
    data = np.array([[float(v) for v in r[:6]] for r in rows[1:] if r], dtype=float)
    if data.shape[0] != g.size:
        raise ConfigError("initial_file", f"{path}: {data.shape[0]} rows, grid needs {g.size}")
    X, Y = g.mesh()
    if not (np.allclose(data[:, 0], X.ravel(), atol=1e-9) and np.allclose(data[:, 1], Y.ravel(), atol=1e-9)):
        raise ConfigError("initial_file", f"{path}: coordinates do not match the configured grid")
    n = g.n
    psi1 = (data[:, 2] + 1j * data[:, 3]).reshape(n, n)
    psi2 = (data[:, 4] + 1j * data[:, 5]).reshape(n, n)
    return WaveField.from_components(g, psi1, psi2)


def read_potential_csv(path: Path, g: GridSpec) -> CustomPotential:
    """Tabulated potential with header ``x,y,v1,v2`` in field row order."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("potential_file", str(exc)) from None
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][:4] != ["x", "y", "v1", "v2"]:
        raise ConfigError("potential_file", "expected header x,y,v1,v2")
    data = np.array([[float(v) for v in r[:4]] for r in rows[1:] if r], dtype=float)
    if data.shape[0] != g.size:
        raise ConfigError("potential_file", f"{data.shape[0]} rows, grid needs {g.size}")
    return CustomPotential(g, data[:, 2].reshape(g.shape), data[:, 3].reshape(g.shape))
