"""Motor de derivadas por diferencias finitas centradas con extrapolacion de Richardson.

Las derivadas mixtas se construyen como producto tensorial de stencils 1D
sobre los ejes ordenados, de modo que d2(f, a, b) y d2(f, b, a) evaluan
exactamente la misma suma.
"""

import logging
from collections import Counter
from dataclasses import dataclass, replace
from itertools import product
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, StencilError

log = logging.getLogger(__name__)

Point = np.ndarray

# (orden de la derivada, precision) -> (desplazamientos, coeficientes)
_STENCILS: Dict[Tuple[int, int], Tuple[Tuple[int, ...], Tuple[float, ...]]] = {
    (1, 2): ((-1, 1), (-0.5, 0.5)),
    (1, 4): ((-2, -1, 1, 2), (1 / 12, -2 / 3, 2 / 3, -1 / 12)),
    (2, 2): ((-1, 0, 1), (1.0, -2.0, 1.0)),
    (2, 4): ((-2, -1, 0, 1, 2), (-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12)),
    (3, 2): ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    (3, 4): ((-3, -2, -1, 1, 2, 3), (1 / 8, -1.0, 13 / 8, -13 / 8, 1.0, -1 / 8)),
}


@dataclass(frozen=True)
class StencilConfig:
    """Paso base, orden del stencil y niveles de Richardson.

    `outer_step` es el paso usado al diferenciar campos derivados (Ricci,
    Weyl, normas) y para terceras derivadas.
    """

    step: float = 1e-3
    order: int = 2
    richardson_levels: int = 2
    outer_step: float = 1e-2
    use_exact: bool = True

    def __post_init__(self):
        if not self.step > 0 or not self.outer_step > 0:
            raise ValueError("el paso de diferencias debe ser positivo")
        if self.order not in (2, 4):
            raise ValueError("fd.order debe ser 2 o 4")
        if self.richardson_levels < 1:
            raise ValueError("fd.richardson_levels debe ser >= 1")

    def outer(self) -> "StencilConfig":
        return replace(self, step=self.outer_step)


@dataclass(frozen=True)
class FieldFn:
    """Campo escalar de (t, x) con gradiente exacto opcional y guarda de dominio."""

    evaluator: Callable[[Point], float]
    exact_gradient: Optional[Callable[[Point], Sequence[float]]] = None
    domain: Optional[Callable[[Point], bool]] = None

    def contains(self, p: Point) -> bool:
        return True if self.domain is None else bool(self.domain(p))

    def __call__(self, p: Point) -> float:
        v = float(self.evaluator(np.asarray(p, dtype=float)))
        if not np.isfinite(v):
            raise StencilError(f"evaluacion no finita en {list(p)}")
        return v


def _axis_steps(p: Point, step: float) -> np.ndarray:
    return step * np.maximum(1.0, np.abs(p))


def _stencil_points(p: Point, counts: Dict[int, int], h: np.ndarray, order: int):
    axes = sorted(counts)
    factors = [_STENCILS[(counts[a], order)] for a in axes]
    denom = 1.0
    for a in axes:
        denom *= h[a] ** counts[a]
    for combo in product(*[list(zip(*f)) for f in factors]):
        q = p.copy()
        w = 1.0
        for a, (off, c) in zip(axes, combo):
            q[a] += off * h[a]
            w *= c
        yield q, w / denom


def partial(
    fn: Callable[[Point], np.ndarray],
    p: Sequence[float],
    axes: Sequence[int],
    config: StencilConfig = StencilConfig(),
    domain: Optional[Callable[[Point], bool]] = None,
    cache: Optional[dict] = None,
):
    """Derivada parcial de `fn` (escalar o arreglo) en `p` respecto de `axes`.

    Lanza StencilError si el stencil mas ancho sale del dominio o si alguna
    evaluacion no es finita.
    """
    p = np.asarray(p, dtype=float)
    cache = {} if cache is None else cache

    def ev(q: Point):
        key = tuple(q.tolist())
        if key not in cache:
            val = np.asarray(fn(q), dtype=float)
            if not np.all(np.isfinite(val)):
                raise StencilError(f"evaluacion no finita en {list(key)}")
            cache[key] = val
        return cache[key]

    if not axes:
        return _unwrap(ev(p))
    counts = dict(Counter(int(a) for a in axes))
    if max(counts.values()) > 3:
        raise ValueError("solo se soportan derivadas de hasta tercer orden por eje")
    h0 = _axis_steps(p, config.step)
    if domain is not None:
        for q, _ in _stencil_points(p, counts, h0, config.order):
            if not domain(q):
                log.debug("stencil fuera de dominio en %s (ejes %s)", p.tolist(), list(axes))
                raise StencilError(f"el stencil sale del dominio en {p.tolist()}")

    levels = []
    for lvl in range(config.richardson_levels):
        h = h0 / (2.0 ** lvl)
        acc = None
        for q, w in _stencil_points(p, counts, h, config.order):
            term = w * ev(q)
            acc = term if acc is None else acc + term
        levels.append(acc)
    return _unwrap(richardson(levels, config.order))


def richardson(values: Sequence[np.ndarray], order: int, ratio: float = 2.0):
    """Extrapolacion de Richardson para errores en potencias pares order, order+2, ..."""
    vals = [np.asarray(v, dtype=float) for v in values]
    for j in range(1, len(vals)):
        factor = ratio ** (order + 2 * (j - 1))
        for k in range(len(vals) - 1, j - 1, -1):
            vals[k] = (factor * vals[k] - vals[k - 1]) / (factor - 1.0)
    return vals[-1]


def _unwrap(v: np.ndarray):
    return float(v) if np.ndim(v) == 0 else v


def _field_partial(f: FieldFn, p, axes, config: StencilConfig):
    p = np.asarray(p, dtype=float)
    if not f.contains(p):
        raise DomainError(f"punto fuera del dominio: {p.tolist()}")
    return partial(f, p, axes, config, domain=f.domain)


def d1(f: FieldFn, p, axis: int, config: StencilConfig = StencilConfig()) -> float:
    return _field_partial(f, p, (axis,), config)


def d2(f: FieldFn, p, axis_a: int, axis_b: int, config: StencilConfig = StencilConfig()) -> float:
    return _field_partial(f, p, tuple(sorted((axis_a, axis_b))), config)


def d3(f: FieldFn, p, axis_a: int, axis_b: int, axis_c: int, config: StencilConfig = StencilConfig()) -> float:
    # terceras derivadas amplifican el redondeo: se usa el paso externo
    return _field_partial(f, p, tuple(sorted((axis_a, axis_b, axis_c))), config.outer())


def jet(
    fn: Callable[[Point], np.ndarray],
    p: Sequence[float],
    config: StencilConfig = StencilConfig(),
    domain: Optional[Callable[[Point], bool]] = None,
    dim: int = 4,
):
    """Valor, primeras y segundas derivadas de un campo tensorial.

    Devuelve (f, df, ddf) con df[a] = d_a f y ddf[a, b] = d_a d_b f.
    """
    p = np.asarray(p, dtype=float)
    cache: dict = {}
    value = np.asarray(partial(fn, p, (), config, domain, cache), dtype=float)
    first = np.zeros((dim,) + value.shape)
    second = np.zeros((dim, dim) + value.shape)
    for a in range(dim):
        first[a] = partial(fn, p, (a,), config, domain, cache)
        for b in range(a, dim):
            second[a, b] = partial(fn, p, (a, b), config, domain, cache)
            second[b, a] = second[a, b]
    return value, first, second


def gradient(f: FieldFn, p, config: StencilConfig = StencilConfig(), dim: int = 4) -> np.ndarray:
    return np.array([d1(f, p, a, config) for a in range(dim)])


def self_check(f: FieldFn, points: Sequence[Sequence[float]], config: StencilConfig = StencilConfig()) -> float:
    """Maximo error relativo entre el gradiente exacto y el de diferencias finitas."""
    if f.exact_gradient is None:
        return 0.0
    worst = 0.0
    for p in points:
        exact = np.asarray(f.exact_gradient(np.asarray(p, dtype=float)), dtype=float)
        fd = gradient(f, p, config, dim=len(exact))
        err = np.max(np.abs(fd - exact)) / max(1.0, float(np.max(np.abs(exact))))
        worst = max(worst, float(err))
    return worst
