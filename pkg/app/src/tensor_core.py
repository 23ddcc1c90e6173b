"""Tensores densos de rango <= 4 en un punto, subir/bajar indices y normas.

Las componentes se guardan en la base coordenada adaptada (d_t, d_i); el
indice 0 es el tiempo. La conversion a la normal unitaria T = N^-1 d_t se
hace solo donde se piden componentes con indice T (ver `block_norms`).
"""

from dataclasses import dataclass
from itertools import permutations
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from .errors import DegenerateMetricError, SymmetryError
from .utils import max_abs, scale_of

UPPER = True
LOWER = False

GAMMA = "gamma"
GAMMA_BAR = "gamma_bar"
DELTA = "delta"


@dataclass(frozen=True)
class Tensor4:
    """Componentes densas 4^rank con la varianza de cada slot (True = arriba)."""

    components: np.ndarray
    variance: Tuple[bool, ...]
    symmetry: Optional[str] = None

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "variance", tuple(bool(v) for v in self.variance))
        if comps.ndim > 4:
            raise ValueError("rango maximo 4")
        if comps.shape != (4,) * comps.ndim or len(self.variance) != comps.ndim:
            raise ValueError(f"forma {comps.shape} incompatible con varianza {self.variance}")

    @classmethod
    def lower(cls, arr, symmetry: Optional[str] = None) -> "Tensor4":
        arr = np.asarray(arr, dtype=float)
        return cls(arr, (LOWER,) * arr.ndim, symmetry)

    @property
    def rank(self) -> int:
        return self.components.ndim

    def check_symmetry(self, tol: float = 1e-6) -> float:
        """Verifica la simetria declarada; devuelve el residuo relativo."""
        if self.symmetry == "riemann":
            res = riemann_symmetry_residual(self.components)
        elif self.symmetry == "symmetric":
            c = self.components
            res = max_abs(c - c.T) / scale_of(max_abs(c))
        else:
            return 0.0
        if res > tol:
            raise SymmetryError(f"simetria '{self.symmetry}' violada: residuo {res:.3e}")
        return res


@dataclass(frozen=True)
class MetricPair:
    """Metrica lorentziana gamma, la riemanniana asociada gamma_bar y sus inversas."""

    gamma: np.ndarray
    gamma_bar: np.ndarray
    gamma_inv: np.ndarray
    gamma_bar_inv: np.ndarray

    @classmethod
    def from_gamma(cls, gamma) -> "MetricPair":
        """gamma_bar = gamma + 2 N^2 dt (x) dt, con N^2 = -1/gamma^tt."""
        gamma = np.asarray(gamma, dtype=float)
        try:
            inv = linalg.inv(gamma)
        except linalg.LinAlgError as e:
            raise DegenerateMetricError("metrica singular") from e
        if not inv[0, 0] < 0:
            raise DegenerateMetricError("d_t no es temporal (gamma^tt >= 0)")
        lapse_sq = -1.0 / inv[0, 0]
        bar = gamma.copy()
        bar[0, 0] += 2.0 * lapse_sq
        if np.min(linalg.eigvalsh(bar)) <= 0:
            raise DegenerateMetricError("gamma_bar no es definida positiva")
        return cls(gamma, bar, inv, linalg.inv(bar))

    @classmethod
    def from_adm(cls, lapse: float, g) -> "MetricPair":
        gamma = np.zeros((4, 4))
        gamma[0, 0] = -lapse * lapse
        gamma[1:, 1:] = np.asarray(g, dtype=float)
        return cls.from_gamma(gamma)

    def metric(self, which: str) -> np.ndarray:
        return self.gamma_bar if which == GAMMA_BAR else self.gamma

    def inverse(self, which: str) -> np.ndarray:
        return self.gamma_bar_inv if which == GAMMA_BAR else self.gamma_inv

    def identity_residual(self) -> float:
        return max(max_abs(self.gamma @ self.gamma_inv - np.eye(4)),
                   max_abs(self.gamma_bar @ self.gamma_bar_inv - np.eye(4)))


def _apply(mat: np.ndarray, arr: np.ndarray, slot: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(mat, arr, axes=([1], [slot])), 0, slot)


def raise_index(t: Tensor4, slot: int, pair: MetricPair, which: str = GAMMA) -> Tensor4:
    if t.variance[slot] == UPPER:
        return t
    var = list(t.variance)
    var[slot] = UPPER
    return Tensor4(_apply(pair.inverse(which), t.components, slot), tuple(var))


def lower_index(t: Tensor4, slot: int, pair: MetricPair, which: str = GAMMA) -> Tensor4:
    if t.variance[slot] == LOWER:
        return t
    var = list(t.variance)
    var[slot] = LOWER
    return Tensor4(_apply(pair.metric(which), t.components, slot), tuple(var))


def all_lower(t: Tensor4, pair: MetricPair, which: str = GAMMA) -> Tensor4:
    for s in range(t.rank):
        t = lower_index(t, s, pair, which)
    return t


def contract(t: Tensor4, slot_a: int, slot_b: int, pair: Optional[MetricPair] = None, which: str = GAMMA) -> Tensor4:
    """Traza sobre dos slots; con varianza mixta usa la delta de Kronecker."""
    if t.rank < 2:
        raise ValueError("contract requiere rango >= 2")
    if slot_a == slot_b or not (0 <= slot_a < t.rank and 0 <= slot_b < t.rank):
        raise IndexError(f"slots invalidos ({slot_a}, {slot_b}) para rango {t.rank}")
    va, vb = t.variance[slot_a], t.variance[slot_b]
    comps = t.components
    if va != vb or which == DELTA:
        traced = np.trace(comps, axis1=slot_a, axis2=slot_b)
    else:
        if pair is None:
            raise ValueError("contract con varianzas iguales requiere una metrica")
        mat = pair.inverse(which) if va == LOWER else pair.metric(which)
        traced = np.trace(_apply(mat, comps, slot_a), axis1=slot_a, axis2=slot_b)
    rest = tuple(v for i, v in enumerate(t.variance) if i not in (slot_a, slot_b))
    return Tensor4(traced, rest)


def norm_sq(t: Tensor4, pair: MetricPair, which: str = GAMMA) -> float:
    """Contraccion completa |t|^2 con gamma o gamma_bar."""
    low = all_lower(t, pair, which).components
    up = low
    inv = pair.inverse(which)
    for s in range(low.ndim):
        up = _apply(inv, up, s)
    return float(np.sum(up * low))


def spatial_norm_sq(x: np.ndarray, g_inv: np.ndarray) -> float:
    """Norma con la metrica espacial g de un tensor con indices espaciales abajo."""
    x = np.asarray(x, dtype=float)
    up = x
    for s in range(x.ndim):
        up = _apply(g_inv, up, s)
    return float(np.sum(up * x))


def riemann_symmetry_residual(c: np.ndarray) -> float:
    """Residuo relativo de las simetrias de Riemann y la primera identidad de Bianchi."""
    c = np.asarray(c, dtype=float)
    res = max(
        max_abs(c + c.transpose(1, 0, 2, 3)),
        max_abs(c + c.transpose(0, 1, 3, 2)),
        max_abs(c - c.transpose(2, 3, 0, 1)),
        max_abs(c + c.transpose(0, 2, 3, 1) + c.transpose(0, 3, 1, 2)),
    )
    return res / scale_of(max_abs(c))


def time_blocks(c: np.ndarray, lapse: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bloques t_Tijk, t_TiTj, t_ijkl con T = N^-1 d_t."""
    return c[0, 1:, 1:, 1:] / lapse, c[0, 1:, 0, 1:] / lapse ** 2, c[1:, 1:, 1:, 1:]


def block_norms(t: Tensor4, frame, tol: float = 1e-6) -> Tuple[float, float, float]:
    """(|t_Tijk|^2, |t_TiTj|^2, |t_ijkl|^2) calculadas con g.

    `frame` es cualquier objeto con atributos `N` y `g_inv`.
    """
    if t.rank != 4 or any(t.variance):
        raise ValueError("block_norms requiere un tensor de rango 4 con indices abajo")
    res = riemann_symmetry_residual(t.components)
    if res > tol:
        raise SymmetryError(f"tensor sin simetrias de Riemann: residuo {res:.3e}")
    tijk, titj, ijkl = time_blocks(t.components, frame.N)
    return (spatial_norm_sq(tijk, frame.g_inv),
            spatial_norm_sq(titj, frame.g_inv),
            spatial_norm_sq(ijkl, frame.g_inv))


def spatial_frame(g: np.ndarray) -> np.ndarray:
    """Triada ortonormal e (columnas) de g: e^T g e = I, via Cholesky."""
    try:
        chol = linalg.cholesky(np.asarray(g, dtype=float), lower=True)
    except linalg.LinAlgError as e:
        raise DegenerateMetricError("metrica espacial no definida positiva") from e
    return linalg.inv(chol).T


def in_frame(x: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Componentes de un tensor espacial covariante en la triada `e`."""
    out = np.asarray(x, dtype=float)
    for s in range(out.ndim):
        out = _apply(e.T, out, s)
    return out


def levi_civita(n: int = 3) -> np.ndarray:
    eps = np.zeros((n,) * n)
    for perm in permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps
