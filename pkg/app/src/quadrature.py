"""Regiones U en un corte t = const y reglas de Gauss-Legendre compuestas.

Las reglas devuelven nodos en coordenadas espaciales con pesos que ya
incluyen el jacobiano de la parametrizacion; el factor metrico (sqrt(g) o
el elemento de area inducido) lo aplica quien integra.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, List, Mapping, Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ConfigError

SHAPES = ("box", "ball")


@lru_cache(maxsize=None)
def _gauss(order: int) -> Tuple[np.ndarray, np.ndarray]:
    return leggauss(order)


def composite_rule(a: float, b: float, order: int, panels: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodos y pesos de Gauss-Legendre de `order` puntos en `panels` subintervalos de [a, b]."""
    x, w = _gauss(order)
    edges = np.linspace(a, b, panels + 1)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (x + 1.0))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


@dataclass(frozen=True)
class VolumeNode:
    x: np.ndarray
    weight: float


@dataclass(frozen=True)
class SurfaceNode:
    """Nodo de superficie: x, peso parametrico y tangentes (columnas de 3x2)."""

    x: np.ndarray
    weight: float
    tangents: np.ndarray


@dataclass(frozen=True)
class RegionSpec:
    """Caja [lo, hi] o bola coordenada (center, radius) en el corte espacial."""

    shape: str = "box"
    lo: Optional[Tuple[float, float, float]] = None
    hi: Optional[Tuple[float, float, float]] = None
    center: Optional[Tuple[float, float, float]] = None
    radius: Optional[float] = None
    order: int = 4
    panels: int = 1
    max_error: float = 1e-4

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ConfigError(f"forma de region desconocida '{self.shape}'", key="region.shape")
        if self.order < 1 or self.panels < 1:
            raise ConfigError("order y panels deben ser >= 1", key="region.order")
        if self.shape == "box":
            if self.lo is None or self.hi is None or len(self.lo) != 3 or len(self.hi) != 3:
                raise ConfigError("una caja necesita lo y hi de 3 componentes", key="region.lo")
            if any(not h > l for l, h in zip(self.lo, self.hi)):
                raise ConfigError("la caja debe tener hi > lo en cada eje", key="region.hi")
        else:
            if self.center is None or len(self.center) != 3:
                raise ConfigError("una bola necesita center de 3 componentes", key="region.center")
            if self.radius is None or not self.radius > 0:
                raise ConfigError("radius debe ser positivo", key="region.radius")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "RegionSpec":
        if not isinstance(data, Mapping):
            raise ConfigError("region debe ser un objeto", key="region")

        def vec(key):
            v = data.get(key)
            return None if v is None else tuple(float(c) for c in v)

        try:
            return cls(
                shape=str(data.get("shape", "box")),
                lo=vec("lo"),
                hi=vec("hi"),
                center=vec("center"),
                radius=None if data.get("radius") is None else float(data["radius"]),
                order=int(data.get("order", 4)),
                panels=int(data.get("panels", 1)),
                max_error=float(data.get("maxError", data.get("max_error", 1e-4))),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e), key="region") from e

    def volume_rule(self, panels: Optional[int] = None) -> List[VolumeNode]:
        n = panels or self.panels
        if self.shape == "box":
            rules = [composite_rule(l, h, self.order, n) for l, h in zip(self.lo, self.hi)]
            out = []
            for x1, w1 in zip(*rules[0]):
                for x2, w2 in zip(*rules[1]):
                    for x3, w3 in zip(*rules[2]):
                        out.append(VolumeNode(np.array([x1, x2, x3]), w1 * w2 * w3))
            return out
        c = np.asarray(self.center, dtype=float)
        rho, w_rho = composite_rule(0.0, self.radius, self.order, n)
        u, w_u = composite_rule(-1.0, 1.0, self.order, n)
        phi, w_phi = composite_rule(0.0, 2.0 * math.pi, self.order, n)
        out = []
        for r, wr in zip(rho, w_rho):
            for uu, wu in zip(u, w_u):
                s = math.sqrt(1.0 - uu * uu)
                for ph, wp in zip(phi, w_phi):
                    x = c + r * np.array([s * math.cos(ph), s * math.sin(ph), uu])
                    out.append(VolumeNode(x, wr * wu * wp * r * r))
        return out

    def surface_rule(self, panels: Optional[int] = None) -> List[SurfaceNode]:
        n = panels or self.panels
        if self.shape == "box":
            out = []
            eye = np.eye(3)
            for axis in range(3):
                a, b = [i for i in range(3) if i != axis]
                ra = composite_rule(self.lo[a], self.hi[a], self.order, n)
                rb = composite_rule(self.lo[b], self.hi[b], self.order, n)
                tangents = np.stack([eye[a], eye[b]], axis=1)
                for fixed in (self.lo[axis], self.hi[axis]):
                    for xa, wa in zip(*ra):
                        for xb, wb in zip(*rb):
                            x = np.zeros(3)
                            x[axis], x[a], x[b] = fixed, xa, xb
                            out.append(SurfaceNode(x, wa * wb, tangents))
            return out
        c = np.asarray(self.center, dtype=float)
        R = self.radius
        u, w_u = composite_rule(-1.0, 1.0, self.order, n)
        phi, w_phi = composite_rule(0.0, 2.0 * math.pi, self.order, n)
        out = []
        for uu, wu in zip(u, w_u):
            s = math.sqrt(1.0 - uu * uu)
            for ph, wp in zip(phi, w_phi):
                x = c + R * np.array([s * math.cos(ph), s * math.sin(ph), uu])
                d_u = R * np.array([-uu / s * math.cos(ph), -uu / s * math.sin(ph), 1.0])
                d_phi = R * np.array([-s * math.sin(ph), s * math.cos(ph), 0.0])
                out.append(SurfaceNode(x, wu * wp, np.stack([d_u, d_phi], axis=1)))
        return out

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if self.shape == "box":
            return bool(np.all(x >= np.asarray(self.lo)) and np.all(x <= np.asarray(self.hi)))
        return bool(np.linalg.norm(x - np.asarray(self.center)) <= self.radius)


def area_element(g: np.ndarray, tangents: np.ndarray) -> float:
    """sqrt(det(X^T g X)) para la superficie con tangentes X."""
    induced = tangents.T @ g @ tangents
    return float(math.sqrt(max(np.linalg.det(induced), 0.0)))
