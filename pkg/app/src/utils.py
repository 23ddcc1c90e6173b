"""Utilidades comunes (tolerancias, reduccion deterministica, paralelismo, formato)."""

import dataclasses
import json
import math
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Any, Callable, Iterable, List, Sequence, Tuple, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def scale_of(reference: float) -> float:
    """Escala de comparacion: relativa si |ref| > 1, absoluta por debajo."""
    return max(1.0, abs(float(reference)))


def residual(value: float, reference: float) -> float:
    """Residuo |value - reference| normalizado con `scale_of`."""
    return abs(float(value) - float(reference)) / scale_of(reference)


def close(value: float, reference: float, tol: float) -> bool:
    return residual(value, reference) <= tol


def max_abs(arr) -> float:
    a = np.asarray(arr, dtype=float)
    return float(np.max(np.abs(a))) if a.size else 0.0


def pairwise_sum(values: Sequence[float]) -> float:
    """Suma por reduccion binaria; el orden no depende del numero de hilos."""
    vals = [float(v) for v in values]
    if not vals:
        return 0.0
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def seeded_points(ranges: Sequence[Tuple[float, float]], n: int, seed: int) -> List[np.ndarray]:
    """Puntos deterministas uniformes en la caja `ranges` (uno por coordenada)."""
    rng = np.random.default_rng(seed)
    lo = np.array([r[0] for r in ranges], dtype=float)
    hi = np.array([r[1] for r in ranges], dtype=float)
    return [lo + (hi - lo) * rng.random(len(ranges)) for _ in range(n)]


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """`map` con un pool de hilos acotado; el resultado conserva el orden de entrada."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))


def fmt_float(x: Any) -> str:
    """Flotante con 17 cifras significativas; vacio para None."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    xf = float(x)
    if math.isnan(xf):
        return "nan"
    if math.isinf(xf):
        return "inf" if xf > 0 else "-inf"
    return format(xf, ".17g")


def to_builtin(obj: Any) -> Any:
    """Convierte dataclasses, arrays numpy, enums y conjuntos a tipos nativos."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_builtin(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (set, frozenset)):
        return sorted(to_builtin(v) for v in obj)
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_builtin(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps17(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """Serializa a JSON con flotantes de 17 cifras (no finitos => null)."""
    obj = to_builtin(obj)
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, bool) or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        body = ",\n".join(f"{pad}{json.dumps(k)}: {dumps17(v, indent, _level + 1)}" for k, v in obj.items())
        return "{\n" + body + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps17(v, indent, _level + 1) for v in obj) + "]"
        body = ",\n".join(pad + dumps17(v, indent, _level + 1) for v in obj)
        return "[\n" + body + "\n" + end + "]"
    return json.dumps(str(obj))
