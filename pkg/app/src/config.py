"""Configuracion central de weyl_lab.

Dos niveles:
- `Config`: parametros del proceso leidos de variables de entorno (via .env).
- `RunConfig`: parametros de una corrida, leidos de un unico documento JSON;
  los flags de la CLI tienen prioridad sobre el archivo y este sobre `Config`.
"""

import json
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from .errors import ConfigError
from .numdiff import StencilConfig


class Config:
    # Cargar variables desde .env si esta presente
    load_dotenv()

    # Flask
    DEBUG = os.getenv("DEBUG", "false").lower() == "true"
    CORS_ORIGINS = os.getenv("CORS_ORIGINS", "*")

    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

    # Paralelismo (0 o ausente => numero de CPUs)
    THREADS = max(1, int(os.getenv("WEYL_LAB_THREADS", "0") or 0) or (os.cpu_count() or 1))

    # Semilla y tolerancia de identidades exactas
    SEED = int(os.getenv("WEYL_LAB_SEED", "20240601"))
    TOL = float(os.getenv("WEYL_LAB_TOL", "1e-9"))

    # Diferencias finitas
    FD_STEP = float(os.getenv("FD_STEP", "1e-3"))
    FD_OUTER_STEP = float(os.getenv("FD_OUTER_STEP", "1e-2"))
    FD_ORDER = int(os.getenv("FD_ORDER", "2"))
    FD_RICHARDSON_LEVELS = int(os.getenv("FD_RICHARDSON_LEVELS", "2"))

    # Constante multiplicativa de la entropia
    ENTROPY_ZETA = float(os.getenv("ENTROPY_ZETA", "1.0"))


def configure_logging(level: Optional[str] = None) -> None:
    """Configura el logging raiz una sola vez a partir de LOG_LEVEL."""
    lvl = getattr(logging, (level or Config.LOG_LEVEL).upper(), logging.INFO)
    root = logging.getLogger()
    if not root.handlers:
        logging.basicConfig(
            level=lvl,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )
    root.setLevel(lvl)


def default_stencil() -> StencilConfig:
    return StencilConfig(
        step=Config.FD_STEP,
        order=Config.FD_ORDER,
        richardson_levels=Config.FD_RICHARDSON_LEVELS,
        outer_step=Config.FD_OUTER_STEP,
    )


KNOWN_KEYS = {
    "metric", "params", "custom", "point", "points", "region",
    "time.t0", "time.t1", "time.steps",
    "fd.step", "fd.order", "fd.richardson_levels", "fd.outer_step", "fd.exact",
    "tol", "seed", "zeta", "out", "format", "suite", "fluid", "threads",
}

# Claves cuyo valor es un objeto que no se aplana
OPAQUE_KEYS = {"params", "custom", "region", "fluid"}


@dataclass(frozen=True)
class TimeGrid:
    t0: float = 1.0
    t1: float = 2.0
    steps: int = 8

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise ConfigError("t1 debe ser mayor que t0", key="time.t1")
        if self.steps < 1:
            raise ConfigError("steps debe ser >= 1", key="time.steps")

    def values(self) -> List[float]:
        if self.steps == 1:
            return [self.t0]
        dt = (self.t1 - self.t0) / (self.steps - 1)
        return [self.t0 + i * dt for i in range(self.steps)]


@dataclass(frozen=True)
class RunConfig:
    """Parametros de una corrida de la CLI o de la API."""

    metric: str = "minkowski"
    params: Dict[str, Any] = field(default_factory=dict)
    custom: Optional[Dict[str, Any]] = None
    points: List[List[float]] = field(default_factory=list)
    region: Optional[Dict[str, Any]] = None
    time: TimeGrid = field(default_factory=TimeGrid)
    stencil: StencilConfig = field(default_factory=default_stencil)
    tol: float = Config.TOL
    seed: int = Config.SEED
    zeta: float = Config.ENTROPY_ZETA
    out: Optional[str] = None
    format: str = "json"
    suite: List[str] = field(default_factory=list)
    fluid: Any = "auto"
    threads: int = Config.THREADS

    def __post_init__(self):
        if self.format not in ("json", "csv"):
            raise ConfigError(f"formato desconocido '{self.format}'", key="format")
        if not self.tol > 0:
            raise ConfigError("tol debe ser positiva", key="tol")
        if not self.zeta > 0:
            raise ConfigError("zeta debe ser positiva", key="zeta")
        for pt in self.points:
            if len(pt) != 4:
                raise ConfigError("cada punto necesita 4 coordenadas [t, x1, x2, x3]", key="points")
        if self.fluid != "auto" and not isinstance(self.fluid, dict):
            raise ConfigError("fluid debe ser 'auto' o un objeto", key="fluid")

    @classmethod
    def from_mapping(cls, data: Dict[str, Any]) -> "RunConfig":
        """Construye la configuracion desde un dict (anidado o con claves con punto)."""
        flat = flatten(data)
        unknown = sorted(set(flat) - KNOWN_KEYS)
        if unknown:
            raise ConfigError("clave desconocida", key=unknown[0])
        try:
            return cls._build(flat)
        except ConfigError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from e

    @classmethod
    def _build(cls, flat: Dict[str, Any]) -> "RunConfig":
        kw: Dict[str, Any] = {}
        for key in ("metric", "params", "custom", "region", "out", "format", "suite", "fluid"):
            if key in flat:
                kw[key] = flat[key]
        if "tol" in flat:
            kw["tol"] = float(flat["tol"])
        if "seed" in flat:
            kw["seed"] = int(flat["seed"])
        if "zeta" in flat:
            kw["zeta"] = float(flat["zeta"])
        if "threads" in flat:
            kw["threads"] = max(1, int(flat["threads"]))
        pts = []
        if "point" in flat:
            pts.append([float(v) for v in flat["point"]])
        for pt in flat.get("points", []) or []:
            pts.append([float(v) for v in pt])
        kw["points"] = pts
        base = TimeGrid()
        kw["time"] = TimeGrid(
            t0=float(flat.get("time.t0", base.t0)),
            t1=float(flat.get("time.t1", base.t1)),
            steps=int(flat.get("time.steps", base.steps)),
        )
        st = default_stencil()
        try:
            kw["stencil"] = StencilConfig(
                step=float(flat.get("fd.step", st.step)),
                order=int(flat.get("fd.order", st.order)),
                richardson_levels=int(flat.get("fd.richardson_levels", st.richardson_levels)),
                outer_step=float(flat.get("fd.outer_step", st.outer_step)),
                use_exact=bool(flat.get("fd.exact", st.use_exact)),
            )
        except ValueError as e:
            raise ConfigError(str(e), key="fd") from e
        return cls(**kw)

    def with_overrides(self, **flags) -> "RunConfig":
        """Aplica flags de CLI (los valores None se ignoran)."""
        changes = {k: v for k, v in flags.items() if v is not None}
        if "tol" in changes:
            changes["tol"] = float(changes["tol"])
        return replace(self, **changes) if changes else self


def flatten(data: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    """Aplana objetos anidados a claves con punto, salvo las claves opacas."""
    flat: Dict[str, Any] = {}
    for key, value in (data or {}).items():
        full = f"{prefix}{key}"
        if isinstance(value, dict) and full not in OPAQUE_KEYS:
            flat.update(flatten(value, prefix=f"{full}."))
        else:
            flat[full] = value
    return flat


def load_run_config(path: Optional[str]) -> RunConfig:
    """Lee un archivo JSON de configuracion; sin ruta devuelve los valores por defecto."""
    if not path:
        return RunConfig()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"no se pudo leer {path}: {e.strerror}") from e
    return parse_run_config(text)


def parse_run_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"JSON invalido: {e.msg}", line=e.lineno, column=e.colno) from e
    if not isinstance(data, dict):
        raise ConfigError("el documento de configuracion debe ser un objeto JSON")
    return RunConfig.from_mapping(data)
