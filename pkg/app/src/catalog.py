"""Catalogo de espaciotiempos foliados analiticos (shift nulo).

Cada entrada es una MetricSpec: lapse N(t, x), las seis componentes de la
metrica espacial g_ij(t, x), guarda de dominio, caja de muestreo, metadatos
de fluido y valores de referencia cerrados para los oraculos.

Convenciones: h_ij = -(1/2N) d_t g_ij (expansion => H <= 0) y G = T sin 8 pi.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import sympy

from .errors import ConfigError, DomainError, UnknownQuantityError
from .expressions import COORDINATES, Expression, compile_expression
from .numdiff import FieldFn
from .utils import seeded_points

log = logging.getLogger(__name__)

Point = np.ndarray
Scalar = Callable[[Point], float]

# orden de las componentes espaciales en MetricSpec.spatial
SPATIAL_INDEX = ((1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3))
SPATIAL_KEYS = ("11", "12", "13", "22", "23", "33")

THETA_MARGIN = 1e-3
HORIZON_MARGIN = 1e-2


class Classification(str, Enum):
    FLAT = "Flat"
    CONFORMALLY_FLAT = "ConformallyFlat"
    PURE_ELECTRIC = "PureElectric"
    PURE_MAGNETIC = "PureMagnetic"
    MIXED = "Mixed"
    VACUUM = "Vacuum"
    STATIC = "Static"


def confirms(declared, computed) -> bool:
    """True si cada etiqueta declarada queda cubierta por las calculadas.

    Un punto conformemente plano es a la vez puramente electrico y puramente magnetico; uno
    plano es ademas vacio.
    """
    computed = set(computed)
    for label in declared:
        if label in computed:
            continue
        if label in (Classification.PURE_ELECTRIC, Classification.PURE_MAGNETIC) \
                and Classification.CONFORMALLY_FLAT in computed:
            continue
        if label in (Classification.CONFORMALLY_FLAT, Classification.VACUUM) and Classification.FLAT in computed:
            continue
        return False
    return True


@dataclass(frozen=True)
class FluidParams:
    """Parametros (k, alpha, k', alpha') de una region de fluido perfecto."""

    k: float
    alpha: float
    k_prime: float = 0.0
    alpha_prime: float = 0.0

    def __post_init__(self):
        if not -1e-12 <= self.k <= 4.0 / 3.0 + 1e-12:
            raise ConfigError(f"k={self.k} fuera de [0, 4/3]", key="fluid.k")
        if not -1e-12 <= self.alpha <= 1.0 / 3.0 + 1e-12:
            raise ConfigError(f"alpha={self.alpha} fuera de [0, 1/3]", key="fluid.alpha")

    def normalized(self, H: float, tol: float = 1e-12) -> "FluidParams":
        """Convencion: k' = alpha' = 0 donde H = 0."""
        if abs(H) <= tol:
            return replace(self, k_prime=0.0, alpha_prime=0.0)
        return self

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "FluidParams":
        try:
            return cls(
                k=float(data["k"]),
                alpha=float(data["alpha"]),
                k_prime=float(data.get("kPrime", data.get("k_prime", 0.0))),
                alpha_prime=float(data.get("alphaPrime", data.get("alpha_prime", 0.0))),
            )
        except KeyError as e:
            raise ConfigError("falta el parametro de fluido", key=f"fluid.{e.args[0]}") from e
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e), key="fluid") from e


@dataclass(frozen=True)
class FluidMetadata:
    """Densidad M, presion P y k declarados analiticamente."""

    energy: Scalar
    pressure: Scalar
    k_of: Scalar

    def k(self, p) -> float:
        return float(self.k_of(np.asarray(p, dtype=float)))


@dataclass(frozen=True)
class MetricSpec:
    name: str
    lapse: FieldFn
    spatial: Tuple[FieldFn, ...]
    ranges: Tuple[Tuple[float, float], ...]
    guard: Callable[[Point], bool]
    classification: FrozenSet[Classification] = frozenset()
    params: Dict[str, float] = field(default_factory=dict)
    fluid: Optional[FluidMetadata] = None
    references: Dict[str, Scalar] = field(default_factory=dict)
    reference_default: Optional[float] = None
    exact_jet: Optional[Callable[[Point], Tuple[np.ndarray, np.ndarray, np.ndarray]]] = None
    coordinates: Tuple[str, ...] = COORDINATES
    description: str = ""

    def __post_init__(self):
        if len(self.spatial) != 6:
            raise ValueError("la metrica espacial necesita 6 componentes (11,12,13,22,23,33)")
        if len(self.ranges) != 4:
            raise ValueError("ranges necesita un intervalo por coordenada")

    def in_domain(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        try:
            return bool(self.guard(p))
        except (ValueError, ArithmeticError):
            return False

    def require(self, p) -> None:
        if not self.in_domain(p):
            raise DomainError(f"{self.name}: punto fuera del dominio {np.asarray(p).tolist()}")

    def lapse_at(self, p) -> float:
        return self.lapse(np.asarray(p, dtype=float))

    def spatial_metric(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        g = np.empty((3, 3))
        for (i, j), comp in zip(SPATIAL_INDEX, self.spatial):
            g[i - 1, j - 1] = g[j - 1, i - 1] = comp(p)
        return g

    def gamma(self, p) -> np.ndarray:
        """Metrica 4D -N^2 dt^2 + g_ij dx^i dx^j en el punto."""
        n = self.lapse_at(p)
        out = np.zeros((4, 4))
        out[0, 0] = -n * n
        out[1:, 1:] = self.spatial_metric(p)
        return out

    def sample_points(self, n: int, seed: int) -> List[np.ndarray]:
        pts = [q for q in seeded_points(self.ranges, n, seed) if self.in_domain(q)]
        if len(pts) < n:
            log.warning("%s: %d de %d puntos de muestra fuera del dominio", self.name, n - len(pts), n)
        return pts

    def rescaled(self, c: float) -> "MetricSpec":
        """La misma geometria en la carta x' = c x: g'(x') = g(x'/c) / c^2."""
        if not c > 0:
            raise ValueError("el factor de escala debe ser positivo")

        def back(p):
            q = np.array(p, dtype=float)
            q[1:] /= c
            return q

        def scaled(f: FieldFn, factor: float) -> FieldFn:
            return FieldFn(lambda p: factor * f(back(p)))

        invariant = {k: v for k, v in self.references.items() if k in INVARIANT_REFERENCES}
        return replace(
            self,
            name=f"{self.name}@x{c:g}",
            lapse=scaled(self.lapse, 1.0),
            spatial=tuple(scaled(f, 1.0 / c ** 2) for f in self.spatial),
            ranges=(self.ranges[0],) + tuple((c * lo, c * hi) for lo, hi in self.ranges[1:]),
            guard=lambda p: self.guard(back(p)),
            fluid=None if self.fluid is None else FluidMetadata(
                lambda p: self.fluid.energy(back(p)),
                lambda p: self.fluid.pressure(back(p)),
                lambda p: self.fluid.k_of(back(p)),
            ),
            references={k: (lambda p, f=v: f(back(p))) for k, v in invariant.items()},
            exact_jet=None,
        )

    def check_equation_of_state(self, p) -> float:
        """Residuo de P = (k - 1) M con los valores declarados."""
        if self.fluid is None:
            return 0.0
        p = np.asarray(p, dtype=float)
        M = self.fluid.energy(p)
        return abs(self.fluid.pressure(p) - (self.fluid.k(p) - 1.0) * M) / max(1.0, abs(M))


# Escalares independientes de la carta espacial
INVARIANT_REFERENCES = {"kretschmann", "H", "M", "P", "k", "N", "s", "s_crit", "alpha_max", "A_sq", "E_sq"}


def exact_reference(spec: MetricSpec, quantity: str, p) -> float:
    """Valor cerrado de `quantity` en p para comparar contra el calculo numerico."""
    p = np.asarray(p, dtype=float)
    if quantity in spec.references:
        return float(spec.references[quantity](p))
    if spec.reference_default is not None:
        return float(spec.reference_default)
    raise UnknownQuantityError(f"{spec.name}: sin referencia para '{quantity}'")


# --- chorros exactos para metricas diagonales ---

ComponentJet = Callable[[Point], Tuple[float, np.ndarray, np.ndarray]]


def _constant(value: float) -> ComponentJet:
    def f(p):
        return value, np.zeros(4), np.zeros((4, 4))
    return f


def _power_of_t(coef: float, expo: float) -> ComponentJet:
    """coef * t^expo."""
    def f(p):
        t = p[0]
        d1 = np.zeros(4)
        d2 = np.zeros((4, 4))
        d1[0] = coef * expo * t ** (expo - 1)
        d2[0, 0] = coef * expo * (expo - 1) * t ** (expo - 2)
        return coef * t ** expo, d1, d2
    return f


def _exp_of_t(coef: float, rate: float) -> ComponentJet:
    """coef * exp(rate t)."""
    def f(p):
        v = coef * math.exp(rate * p[0])
        d1 = np.zeros(4)
        d2 = np.zeros((4, 4))
        d1[0] = rate * v
        d2[0, 0] = rate * rate * v
        return v, d1, d2
    return f


def _diagonal_jet(parts: Sequence[ComponentJet]) -> Callable[[Point], Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Ensambla (gamma, d gamma, dd gamma) de una metrica diagonal por componentes."""
    def jet(p):
        p = np.asarray(p, dtype=float)
        g = np.zeros((4, 4))
        dg = np.zeros((4, 4, 4))
        ddg = np.zeros((4, 4, 4, 4))
        for a, part in enumerate(parts):
            v, d1, d2 = part(p)
            g[a, a] = v
            dg[:, a, a] = d1
            ddg[:, :, a, a] = d2
        return g, dg, ddg
    return jet


def _field(fn: Scalar, grad: Optional[Callable[[Point], Sequence[float]]] = None, domain=None) -> FieldFn:
    return FieldFn(fn, exact_gradient=grad, domain=domain)


def _zero() -> FieldFn:
    return FieldFn(lambda p: 0.0, exact_gradient=lambda p: np.zeros(4))


def _diag_spatial(g11: FieldFn, g22: FieldFn, g33: FieldFn) -> Tuple[FieldFn, ...]:
    return (g11, _zero(), _zero(), g22, _zero(), g33)


def _expression_field(expr: Expression, domain=None) -> FieldFn:
    return FieldFn(expr, exact_gradient=expr.gradient, domain=domain)


def _expression_jet(lapse: Expression, comps: Sequence[Expression]):
    """Chorro exacto de gamma a partir de N y de las seis g_ij simbolicas."""
    def jet(p):
        p = np.asarray(p, dtype=float)
        g = np.zeros((4, 4))
        dg = np.zeros((4, 4, 4))
        ddg = np.zeros((4, 4, 4, 4))
        n, dn, ddn = lapse.jet(p)
        g[0, 0] = -n * n
        dg[:, 0, 0] = -2.0 * n * dn
        ddg[:, :, 0, 0] = -2.0 * (np.outer(dn, dn) + n * ddn)
        for (i, j), comp in zip(SPATIAL_INDEX, comps):
            v, d1, d2 = comp.jet(p)
            g[i, j] = g[j, i] = v
            dg[:, i, j] = dg[:, j, i] = d1
            ddg[:, :, i, j] = ddg[:, :, j, i] = d2
        return g, dg, ddg
    return jet


def _theta_ok(theta: float) -> bool:
    return THETA_MARGIN < theta < math.pi - THETA_MARGIN


# --- fabricas ---

def minkowski() -> MetricSpec:
    one = FieldFn(lambda p: 1.0, exact_gradient=lambda p: np.zeros(4))
    return MetricSpec(
        name="minkowski",
        lapse=one,
        spatial=_diag_spatial(one, one, one),
        ranges=((0.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)),
        guard=lambda p: True,
        classification=frozenset({Classification.FLAT, Classification.VACUUM,
                                  Classification.CONFORMALLY_FLAT, Classification.STATIC}),
        references={"s": lambda p: 1.0, "N": lambda p: 1.0, "sqrtg": lambda p: 1.0},
        reference_default=0.0,
        exact_jet=_diagonal_jet([_constant(-1.0), _constant(1.0), _constant(1.0), _constant(1.0)]),
        description="Espacio plano en coordenadas cartesianas",
    )


def schwarzschild(m: float = 1.0) -> MetricSpec:
    """Exterior estatico en coordenadas (t, r, theta, phi), r >= 2m(1 + 1e-2)."""
    if not m > 0:
        raise ConfigError("m debe ser positiva", key="params.m")

    def guard(p):
        return p[1] >= 2.0 * m * (1.0 + HORIZON_MARGIN) and _theta_ok(p[2])

    def f(r):
        return 1.0 - 2.0 * m / r

    def lapse(p):
        return math.sqrt(f(p[1]))

    def lapse_grad(p):
        return [0.0, m / (p[1] ** 2 * math.sqrt(f(p[1]))), 0.0, 0.0]

    def g_tt(p):
        r = p[1]
        d1 = np.zeros(4)
        d2 = np.zeros((4, 4))
        d1[1] = -2.0 * m / r ** 2
        d2[1, 1] = 4.0 * m / r ** 3
        return -f(r), d1, d2

    def g_rr(p):
        r = p[1]
        d1 = np.zeros(4)
        d2 = np.zeros((4, 4))
        d1[1] = -2.0 * m / (r - 2.0 * m) ** 2
        d2[1, 1] = 4.0 * m / (r - 2.0 * m) ** 3
        return r / (r - 2.0 * m), d1, d2

    def g_thth(p):
        r = p[1]
        d1 = np.zeros(4)
        d2 = np.zeros((4, 4))
        d1[1] = 2.0 * r
        d2[1, 1] = 2.0
        return r * r, d1, d2

    def g_phph(p):
        r, th = p[1], p[2]
        s2 = math.sin(th) ** 2
        d1 = np.zeros(4)
        d2 = np.zeros((4, 4))
        d1[1] = 2.0 * r * s2
        d1[2] = r * r * math.sin(2.0 * th)
        d2[1, 1] = 2.0 * s2
        d2[1, 2] = d2[2, 1] = 2.0 * r * math.sin(2.0 * th)
        d2[2, 2] = 2.0 * r * r * math.cos(2.0 * th)
        return r * r * s2, d1, d2

    return MetricSpec(
        name="schwarzschild",
        lapse=_field(lapse, lapse_grad, guard),
        spatial=_diag_spatial(
            _field(lambda p: 1.0 / f(p[1])),
            _field(lambda p: p[1] ** 2),
            _field(lambda p: (p[1] * math.sin(p[2])) ** 2),
        ),
        ranges=((0.0, 1.0), (3.0 * m, 10.0 * m), (0.4, math.pi - 0.4), (0.0, 2.0 * math.pi)),
        guard=guard,
        classification=frozenset({Classification.VACUUM, Classification.PURE_ELECTRIC, Classification.STATIC}),
        params={"m": m},
        references={
            "kretschmann": lambda p: 48.0 * m * m / p[1] ** 6,
            "christoffel_r_tt": lambda p: f(p[1]) * m / p[1] ** 2,
            "N": lapse,
            "H": lambda p: 0.0,
            "M": lambda p: 0.0,
            "P": lambda p: 0.0,
            "s": lambda p: 1.0,
            "sqrtg": lambda p: p[1] ** 2 * math.sin(p[2]) / math.sqrt(f(p[1])),
        },
        exact_jet=_diagonal_jet([g_tt, g_rr, g_thth, g_phph]),
        coordinates=("t", "r", "theta", "phi"),
        description="Exterior de Schwarzschild, lapse sqrt(1 - 2m/r)",
    )


def _flat_flrw(name: str, scale_sq: ComponentJet, hubble: Scalar, energy: Scalar, k: float,
               ranges, guard, params, description: str, extra: Dict[str, Scalar]) -> MetricSpec:
    """FLRW plano, N = 1, g = a(t)^2 delta."""
    a_sq = _field(lambda p: scale_sq(p)[0])
    pressure = lambda p: (k - 1.0) * energy(p)  # noqa: E731
    refs: Dict[str, Scalar] = {
        "H": hubble,
        "M": energy,
        "P": pressure,
        "k": lambda p: k,
        "N": lambda p: 1.0,
        "A_sq": lambda p: (9 * k * k - 12 * k + 8) * energy(p) ** 2 / 3.0,
        "E_sq": lambda p: 0.0,
        "s": lambda p: 0.0,
        "alpha_max": lambda p: 1.0 / 3.0,
        "s_crit": lambda p: 0.0,
    }
    refs.update(extra)
    return MetricSpec(
        name=name,
        lapse=FieldFn(lambda p: 1.0, exact_gradient=lambda p: np.zeros(4)),
        spatial=_diag_spatial(a_sq, a_sq, a_sq),
        ranges=ranges,
        guard=guard,
        classification=frozenset({Classification.CONFORMALLY_FLAT}),
        params=params,
        fluid=FluidMetadata(energy, pressure, lambda p: k),
        references=refs,
        exact_jet=_diagonal_jet([_constant(-1.0), scale_sq, scale_sq, scale_sq]),
        description=description,
    )


def flrw(q: float = 2.0 / 3.0) -> MetricSpec:
    """FLRW plano con a(t) = t^q; k = 2/(3q) exige q >= 1/2."""
    if not q >= 0.5:
        raise ConfigError("q debe ser >= 1/2 para que k quede en [0, 4/3]", key="params.q")
    k = 2.0 / (3.0 * q)
    return _flat_flrw(
        name="flrw",
        scale_sq=_power_of_t(1.0, 2.0 * q),
        hubble=lambda p: -3.0 * q / p[0],
        energy=lambda p: 3.0 * q * q / p[0] ** 2,
        k=k,
        ranges=((0.5, 3.0), (-2.0, 2.0), (-2.0, 2.0), (-2.0, 2.0)),
        guard=lambda p: p[0] > 0.0,
        params={"q": q},
        description=f"FLRW plano, a(t) = t^{q:g}",
        extra={
            "christoffel_t_xx": lambda p: q * p[0] ** (2.0 * q - 1.0),
            "sqrtg": lambda p: p[0] ** (3.0 * q),
        },
    )


def eds() -> MetricSpec:
    """Einstein-de Sitter: polvo, a(t) = t^(2/3)."""
    return replace(flrw(2.0 / 3.0), name="eds", description="Einstein-de Sitter, a(t) = t^(2/3)")


def de_sitter(lam: float = 1.0) -> MetricSpec:
    if not lam > 0:
        raise ConfigError("lam debe ser positiva", key="params.lam")
    return _flat_flrw(
        name="de_sitter",
        scale_sq=_exp_of_t(1.0, 2.0 * lam),
        hubble=lambda p: -3.0 * lam,
        energy=lambda p: 3.0 * lam * lam,
        k=0.0,
        ranges=((0.0, 1.0), (-2.0, 2.0), (-2.0, 2.0), (-2.0, 2.0)),
        guard=lambda p: True,
        params={"lam": lam},
        description="de Sitter plano, a(t) = exp(lam t)",
        extra={
            "christoffel_t_xx": lambda p: lam * math.exp(2.0 * lam * p[0]),
            "sqrtg": lambda p: math.exp(3.0 * lam * p[0]),
        },
    )


def kasner(p1: float = 2.0 / 3.0, p2: float = 2.0 / 3.0, p3: float = -1.0 / 3.0) -> MetricSpec:
    """Bianchi I de vacio: g = diag(t^2p1, t^2p2, t^2p3), sum p = sum p^2 = 1."""
    exps = (p1, p2, p3)
    if abs(sum(exps) - 1.0) > 1e-9 or abs(sum(e * e for e in exps) - 1.0) > 1e-9:
        raise ConfigError("los exponentes de Kasner deben cumplir sum p = sum p^2 = 1", key="params")
    e_diag = [e * (1.0 - e) for e in exps]
    parts = [_power_of_t(1.0, 2.0 * e) for e in exps]

    def comp(e):
        return _field(lambda p: p[0] ** (2.0 * e))

    return MetricSpec(
        name="kasner",
        lapse=FieldFn(lambda p: 1.0, exact_gradient=lambda p: np.zeros(4)),
        spatial=_diag_spatial(comp(p1), comp(p2), comp(p3)),
        ranges=((0.5, 2.5), (-2.0, 2.0), (-2.0, 2.0), (-2.0, 2.0)),
        guard=lambda p: p[0] > 0.0,
        classification=frozenset({Classification.VACUUM, Classification.PURE_ELECTRIC}),
        params={"p1": p1, "p2": p2, "p3": p3},
        references={
            "H": lambda p: -1.0 / p[0],
            "M": lambda p: 0.0,
            "P": lambda p: 0.0,
            "N": lambda p: 1.0,
            "s": lambda p: 1.0,
            "sqrtg": lambda p: p[0],
            "kretschmann": lambda p: 8.0 * sum(e * e for e in e_diag) / p[0] ** 4,
            "E_sq": lambda p: sum(e * e for e in e_diag) / p[0] ** 4,
        },
        exact_jet=_diagonal_jet([_constant(-1.0)] + parts),
        description="Kasner de vacio",
    )


def ltb(b: float = 0.5) -> MetricSpec:
    """Polvo LTB marginalmente ligado con tiempo de big bang t_B(r) = -b r^2.

    R(t, r) = r tau^(2/3), tau = t + b r^2; masa m(r) = (2/9) r^3.
    """
    if b < 0:
        raise ConfigError("b debe ser >= 0", key="params.b")

    def tau(p):
        return p[0] + b * p[1] ** 2

    def areal(p):
        return p[1] * tau(p) ** (2.0 / 3.0)

    def x_of(p):
        return tau(p) + (4.0 / 3.0) * b * p[1] ** 2

    def areal_r(p):
        return tau(p) ** (-1.0 / 3.0) * x_of(p)

    def guard(p):
        return p[1] > 0.0 and tau(p) > 0.0 and _theta_ok(p[2])

    def energy(p):
        return (4.0 / 3.0) / (tau(p) * x_of(p))

    def hubble(p):
        return -(tau(p) + x_of(p)) / (tau(p) * x_of(p))

    def mu_radial(p):
        return -((2.0 / 3.0) * tau(p) - (4.0 / 9.0) * b * p[1] ** 2) / (tau(p) * x_of(p))

    def alpha_max(p):
        mu_perp = -(2.0 / 3.0) / tau(p)
        return min(1.0 / 3.0, mu_radial(p) / hubble(p), mu_perp / hubble(p))

    return MetricSpec(
        name="ltb",
        lapse=FieldFn(lambda p: 1.0, exact_gradient=lambda p: np.zeros(4)),
        spatial=_diag_spatial(
            _field(lambda p: areal_r(p) ** 2),
            _field(lambda p: areal(p) ** 2),
            _field(lambda p: (areal(p) * math.sin(p[2])) ** 2),
        ),
        ranges=((0.5, 2.0), (0.5, 1.5), (0.5, math.pi - 0.5), (0.2, 6.0)),
        guard=guard,
        classification=frozenset({Classification.PURE_ELECTRIC}),
        params={"b": b},
        fluid=FluidMetadata(energy, lambda p: 0.0, lambda p: 1.0),
        references={
            "M": energy,
            "P": lambda p: 0.0,
            "k": lambda p: 1.0,
            "H": hubble,
            "N": lambda p: 1.0,
            "A_sq": lambda p: (5.0 / 3.0) * energy(p) ** 2,
            "alpha_max": alpha_max,
            "sqrtg": lambda p: areal_r(p) * areal(p) ** 2 * math.sin(p[2]),
        },
        coordinates=("t", "r", "theta", "phi"),
        description="Polvo Lemaitre-Tolman-Bondi, tiempo de bang -b r^2",
    )


def ltb_vacuum(c: float = 1.0) -> MetricSpec:
    """R = (r^(3/2) + c t)^(2/3): masa constante 2c^2/9, es decir vacio."""
    if not c > 0:
        raise ConfigError("c debe ser positiva", key="params.c")
    mass = 2.0 * c * c / 9.0

    def u(p):
        return p[1] ** 1.5 + c * p[0]

    def areal(p):
        return u(p) ** (2.0 / 3.0)

    def areal_r(p):
        return math.sqrt(p[1]) * u(p) ** (-1.0 / 3.0)

    def guard(p):
        return p[1] > 0.0 and u(p) > 0.0 and _theta_ok(p[2])

    return MetricSpec(
        name="ltb_vacuum",
        lapse=FieldFn(lambda p: 1.0, exact_gradient=lambda p: np.zeros(4)),
        spatial=_diag_spatial(
            _field(lambda p: areal_r(p) ** 2),
            _field(lambda p: areal(p) ** 2),
            _field(lambda p: (areal(p) * math.sin(p[2])) ** 2),
        ),
        ranges=((0.5, 2.0), (0.5, 1.5), (0.5, math.pi - 0.5), (0.2, 6.0)),
        guard=guard,
        classification=frozenset({Classification.VACUUM, Classification.PURE_ELECTRIC}),
        params={"c": c},
        references={
            "kretschmann": lambda p: 48.0 * mass * mass / areal(p) ** 6,
            "M": lambda p: 0.0,
            "P": lambda p: 0.0,
            "N": lambda p: 1.0,
            "s": lambda p: 1.0,
        },
        coordinates=("t", "r", "theta", "phi"),
        description="LTB con funcion de masa constante (Schwarzschild en caida libre)",
    )


def conformal(sigma: str = "t", **params: float) -> MetricSpec:
    """g = exp(2 sigma(t, x)) delta con N = 1."""
    expr = compile_expression(sigma, params)
    factor_expr = expr.map(lambda s: sympy.exp(2 * s), f"exp(2*({sigma}))")
    factor = _expression_field(factor_expr)
    spatial_dependent = any(expr.depends_on(x) for x in COORDINATES[1:])
    labels = {Classification.PURE_ELECTRIC} if spatial_dependent else {Classification.CONFORMALLY_FLAT}

    def guard(p):
        if p[0] <= 0.0:
            return False
        try:
            return math.isfinite(expr(p))
        except ConfigError:
            return False

    return MetricSpec(
        name="conformal",
        lapse=FieldFn(lambda p: 1.0, exact_gradient=lambda p: np.zeros(4)),
        spatial=_diag_spatial(factor, factor, factor),
        ranges=((0.5, 2.0), (0.2, 1.2), (-1.0, 1.0), (-1.0, 1.0)),
        guard=guard,
        classification=frozenset(labels),
        params={"sigma": sigma, **params},
        references={"N": lambda p: 1.0},
        exact_jet=_diagonal_jet([_constant(-1.0), factor_expr.jet, factor_expr.jet, factor_expr.jet]),
        description=f"Clase conforme exp(2 sigma) delta, sigma = {sigma}",
    )


def custom(description: Mapping[str, Any]) -> MetricSpec:
    """Metrica a partir de expresiones: {"name", "lapse", "g": {"11": ...}, "domain": {...}}."""
    if not isinstance(description, Mapping):
        raise ConfigError("custom debe ser un objeto", key="custom")
    params = {str(k): float(v) for k, v in (description.get("params") or {}).items()}
    if "lapse" not in description:
        raise ConfigError("falta la expresion del lapse", key="custom.lapse")
    g_src = description.get("g") or {}
    unknown = sorted(set(g_src) - set(SPATIAL_KEYS))
    if unknown:
        raise ConfigError("componente de metrica desconocida", key=f"custom.g.{unknown[0]}")
    for key in ("11", "22", "33"):
        if key not in g_src:
            raise ConfigError("falta una componente diagonal", key=f"custom.g.{key}")
    lapse = compile_expression(str(description["lapse"]), params)
    comps = [compile_expression(str(g_src.get(key, "0")), params) for key in SPATIAL_KEYS]

    dom = description.get("domain") or {}
    box = []
    for name in COORDINATES:
        lo, hi = dom.get(name, (-1.0, 1.0))
        if not float(hi) > float(lo):
            raise ConfigError("intervalo vacio", key=f"custom.domain.{name}")
        box.append((float(lo), float(hi)))
    inner = tuple((lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo)) for lo, hi in box)

    def guard(p):
        return all(lo <= x <= hi for x, (lo, hi) in zip(p, box))

    labels = set()
    for label in description.get("classification") or []:
        try:
            labels.add(Classification(label))
        except ValueError as e:
            raise ConfigError(f"clasificacion desconocida '{label}'", key="custom.classification") from e

    fluid = None
    fluid_src = description.get("fluid")
    if fluid_src:
        energy = compile_expression(str(fluid_src["M"]), params)
        pressure = compile_expression(str(fluid_src.get("P", "0")), params)
        fluid = FluidMetadata(energy, pressure, lambda p: pressure(p) / energy(p) + 1.0)

    return MetricSpec(
        name=str(description.get("name", "custom")),
        lapse=_expression_field(lapse, domain=guard),
        spatial=tuple(_expression_field(c) for c in comps),
        ranges=inner,
        guard=guard,
        classification=frozenset(labels),
        params=params,
        fluid=fluid,
        exact_jet=_expression_jet(lapse, comps),
        description=str(description.get("description", "Metrica definida por expresiones")),
    )


_FACTORIES: Dict[str, Callable[..., MetricSpec]] = {
    "minkowski": minkowski,
    "schwarzschild": schwarzschild,
    "eds": eds,
    "flrw": flrw,
    "de_sitter": de_sitter,
    "kasner": kasner,
    "ltb": ltb,
    "ltb_vacuum": ltb_vacuum,
    "conformal": conformal,
}


def build_metric(name: str, params: Optional[Mapping[str, Any]] = None,
                 custom_description: Optional[Mapping[str, Any]] = None) -> MetricSpec:
    """Construye una metrica por nombre con su bloque de parametros."""
    if name == "custom":
        if custom_description is None:
            raise ConfigError("la metrica 'custom' necesita la clave custom", key="custom")
        return custom(custom_description)
    factory = _FACTORIES.get(name)
    if factory is None:
        raise ConfigError(f"metrica desconocida '{name}'", key="metric")
    try:
        return factory(**dict(params or {}))
    except TypeError as e:
        raise ConfigError(f"parametros invalidos para {name}: {e}", key="params") from e


def catalog_list() -> List[MetricSpec]:
    return [factory() for factory in _FACTORIES.values()]


def describe(spec: MetricSpec) -> Dict[str, Any]:
    return {
        "name": spec.name,
        "description": spec.description,
        "params": dict(spec.params),
        "classification": sorted(c.value for c in spec.classification),
        "coordinates": list(spec.coordinates),
        "ranges": [list(r) for r in spec.ranges],
        "fluid": spec.fluid is not None,
        "references": sorted(spec.references),
    }
