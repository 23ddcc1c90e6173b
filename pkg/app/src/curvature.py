"""Familia de curvatura 4D en un punto a partir de una MetricSpec.

Ruta generica: chorro de la metrica (gamma, d gamma, dd gamma) -> Christoffel
-> Riemann -> Ricci, escalar, Weyl, Schouten, tensor A, stress-energy.
El Cotton, la divergencia de T y la segunda identidad de Bianchi derivan
campos ya derivados con el paso externo del stencil.
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import linalg

from .catalog import MetricSpec
from .errors import DegenerateMetricError, SymmetryError
from .numdiff import StencilConfig, jet, partial
from .tensor_core import GAMMA, MetricPair, Tensor4, in_frame, norm_sq, riemann_symmetry_residual, spatial_frame
from .utils import max_abs, scale_of

log = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-6
PERFECT_FLUID_TOL = 1e-6

Jet = Tuple[np.ndarray, np.ndarray, np.ndarray]


@dataclass(frozen=True)
class CurvatureBundle:
    """Curvatura de gamma en un punto, en la base coordenada, indices abajo.

    christoffel[a, b, c] = Gamma^a_bc; `stress` es el tensor de Einstein
    (G = T, sin 8 pi) y `trace` su traza, igual a -scalar.
    """

    point: np.ndarray
    pair: MetricPair
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    weyl: np.ndarray
    schouten: np.ndarray
    a_tensor: np.ndarray
    stress: np.ndarray
    trace: float
    cotton: Optional[np.ndarray] = None

    @property
    def lapse(self) -> float:
        return float(np.sqrt(-1.0 / self.pair.gamma_inv[0, 0]))

    def norm(self, name: str, which: str = GAMMA) -> float:
        """|X|^2 de riemann, weyl o a_tensor con gamma o gamma_bar."""
        return norm_sq(Tensor4.lower(getattr(self, name)), self.pair, which)

    def ricci_norm_sq(self, which: str = GAMMA) -> float:
        return norm_sq(Tensor4.lower(self.ricci), self.pair, which)

    def stress_norm_sq(self, which: str = GAMMA) -> float:
        return norm_sq(Tensor4.lower(self.stress), self.pair, which)


@dataclass(frozen=True)
class FluidState:
    """Lectura de fluido perfecto del stress-energy en el marco T."""

    M: float
    P: float
    k: Optional[float]
    is_perfect_fluid: bool
    kind: str
    momentum_residual: float
    anisotropy_residual: float


def metric_jet(spec: MetricSpec, p, config: StencilConfig = StencilConfig()) -> Jet:
    """Chorro de gamma en p: exacto si la metrica lo provee, si no por diferencias."""
    p = np.asarray(p, dtype=float)
    spec.require(p)
    if config.use_exact and spec.exact_jet is not None:
        return spec.exact_jet(p)
    return jet(spec.gamma, p, config, domain=spec.in_domain)


def christoffel_from_jet(dg: np.ndarray, g_inv: np.ndarray) -> np.ndarray:
    """Gamma^a_bc en cualquier dimension; dg[a, b, c] = d_a g_bc."""
    low = 0.5 * (np.einsum("bec->ebc", dg) + np.einsum("ceb->ebc", dg) - dg)
    return np.einsum("ae,ebc->abc", g_inv, low)


def riemann_from_jet(g: np.ndarray, dg: np.ndarray, ddg: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(R_abcd, Gamma) con la convencion R_bd = g^ac R_abcd."""
    try:
        g_inv = linalg.inv(g)
    except linalg.LinAlgError as e:
        raise DegenerateMetricError("metrica singular") from e
    gam = christoffel_from_jet(dg, g_inv)
    second = 0.5 * (
        np.einsum("bcad->abcd", ddg)
        + np.einsum("adbc->abcd", ddg)
        - np.einsum("acbd->abcd", ddg)
        - np.einsum("bdac->abcd", ddg)
    )
    quad = np.einsum("ef,ebc,fad->abcd", g, gam, gam) - np.einsum("ef,ebd,fac->abcd", g, gam, gam)
    return second + quad, gam


def kulkarni_nomizu(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a o b)_abcd = a_ac b_bd - a_ad b_bc + a_bd b_ac - a_bc b_ad."""
    return (np.einsum("ac,bd->abcd", a, b) - np.einsum("ad,bc->abcd", a, b)
            + np.einsum("bd,ac->abcd", a, b) - np.einsum("bc,ad->abcd", a, b))


def bundle_from_jet(mjet: Jet, p, check: bool = True) -> CurvatureBundle:
    gamma, dg, ddg = mjet
    pair = MetricPair.from_gamma(gamma)
    riem, gam = riemann_from_jet(gamma, dg, ddg)
    if check:
        res = riemann_symmetry_residual(riem)
        if res > SYMMETRY_TOL:
            raise SymmetryError(f"Riemann sin simetrias ({res:.2e}); revisar el paso de diferencias")
    inv = pair.gamma_inv
    ric = np.einsum("ac,abcd->bd", inv, riem)
    ric = 0.5 * (ric + ric.T)
    scal = float(np.einsum("bd,bd->", inv, ric))
    schouten = ric - scal / 6.0 * gamma
    a4 = 0.5 * kulkarni_nomizu(gamma, schouten)
    return CurvatureBundle(
        point=np.asarray(p, dtype=float),
        pair=pair,
        christoffel=gam,
        riemann=riem,
        ricci=ric,
        scalar=scal,
        weyl=riem - a4,
        schouten=schouten,
        a_tensor=a4,
        stress=ric - 0.5 * scal * gamma,
        trace=-scal,
    )


def curvature_bundle(spec: MetricSpec, p, config: StencilConfig = StencilConfig(),
                     with_cotton: bool = False) -> CurvatureBundle:
    b = bundle_from_jet(metric_jet(spec, p, config), p)
    if with_cotton:
        b = replace(b, cotton=cotton(spec, b.point, config, b))
    return b


def christoffels(spec: MetricSpec, p, config: StencilConfig = StencilConfig()) -> np.ndarray:
    gamma, dg, _ = metric_jet(spec, p, config)
    try:
        inv = linalg.inv(gamma)
    except linalg.LinAlgError as e:
        raise DegenerateMetricError("metrica singular") from e
    return christoffel_from_jet(dg, inv)


def christoffels_foliated(N: float, dN: np.ndarray, g_inv: np.ndarray, h: np.ndarray,
                          gamma3: np.ndarray) -> np.ndarray:
    """Christoffel de -N^2 dt^2 + g en terminos de (N, h, Gamma(g)).

    dN[a] = d_a N; gamma3[k, i, j] es el Christoffel de g.
    """
    out = np.zeros((4, 4, 4))
    out[0, 0, 0] = dN[0] / N
    out[0, 0, 1:] = out[0, 1:, 0] = dN[1:] / N
    out[0, 1:, 1:] = -h / N
    out[1:, 0, 0] = N * g_inv @ dN[1:]
    mixed = -N * g_inv @ h
    out[1:, 0, 1:] = mixed
    out[1:, 1:, 0] = mixed
    out[1:, 1:, 1:] = gamma3
    return out


def riemann(spec: MetricSpec, p, config: StencilConfig = StencilConfig()) -> Tensor4:
    return Tensor4.lower(curvature_bundle(spec, p, config).riemann, symmetry="riemann")


def _bundle_field(spec: MetricSpec, name: str, config: StencilConfig) -> Callable[[np.ndarray], np.ndarray]:
    def fn(q):
        return getattr(bundle_from_jet(metric_jet(spec, q, config), q, check=False), name)
    return fn


def covariant_derivative(spec: MetricSpec, p, name: str, config: StencilConfig = StencilConfig(),
                         bundle: Optional[CurvatureBundle] = None) -> np.ndarray:
    """D_a X_{b...} de un campo covariante del bundle; el indice de derivada va primero."""
    p = np.asarray(p, dtype=float)
    bundle = bundle or curvature_bundle(spec, p, config)
    outer = config.outer()
    fn = _bundle_field(spec, name, config)
    cache: dict = {}
    out = np.array([partial(fn, p, (a,), outer, domain=spec.in_domain, cache=cache) for a in range(4)])
    x = getattr(bundle, name)
    gam = bundle.christoffel
    for slot in range(x.ndim):
        moved = np.moveaxis(x, slot, 0)
        corr = np.einsum("eas,e...->as...", gam, moved)
        out = out - np.moveaxis(corr, 1, slot + 1)
    return out


def cotton(spec: MetricSpec, p, config: StencilConfig = StencilConfig(),
           bundle: Optional[CurvatureBundle] = None) -> np.ndarray:
    """C_abc = D_c A_ab - D_b A_ac con A el tensor de Schouten."""
    d_a = covariant_derivative(spec, p, "schouten", config, bundle)
    # d_a[c, a, b] = D_c A_ab
    return np.einsum("cab->abc", d_a) - np.einsum("bac->abc", d_a)


def stress_energy(bundle: CurvatureBundle, tol: float = PERFECT_FLUID_TOL) -> FluidState:
    """Extrae (M, P, k) del stress-energy en el marco T = N^-1 d_t (sin shift)."""
    n = bundle.lapse
    st = bundle.stress
    g = bundle.pair.gamma[1:, 1:]
    M = float(st[0, 0] / n ** 2)
    P = float(np.einsum("ij,ij->", linalg.inv(g), st[1:, 1:]) / 3.0)
    e = spatial_frame(g)
    mom = max_abs(e.T @ (st[0, 1:] / n))
    aniso = max_abs(in_frame(st[1:, 1:] - P * g, e))
    limit = tol * (1.0 + abs(M))
    perfect = mom < limit and aniso < limit
    k = None
    if abs(M) < limit:
        kind = "vacuum" if abs(P) < limit else "k_undefined"
        if kind == "k_undefined":
            log.warning("M ~ 0 con P = %.3e: k no definido en %s", P, bundle.point.tolist())
    else:
        kind = "perfect_fluid" if perfect else "anisotropic"
        if perfect:
            k = P / M + 1.0
    return FluidState(M, P, k, perfect, kind, mom, aniso)


def stress_divergence(spec: MetricSpec, p, config: StencilConfig = StencilConfig()) -> np.ndarray:
    """D^a T_ab por diferencias del campo de stress-energy."""
    b = curvature_bundle(spec, p, config)
    d_t = covariant_derivative(spec, p, "stress", config, b)
    return np.einsum("ac,acb->b", b.pair.gamma_inv, d_t)


def pressure_gradient(spec: MetricSpec, p, config: StencilConfig = StencilConfig()) -> np.ndarray:
    """d_j P con P leida del stress-energy en cada punto del stencil."""
    def pressure(q):
        return stress_energy(bundle_from_jet(metric_jet(spec, q, config), q, check=False)).P
    outer = config.outer()
    cache: dict = {}
    return np.array([partial(pressure, p, (a,), outer, domain=spec.in_domain, cache=cache) for a in (1, 2, 3)])


def weyl_bianchi_residual(spec: MetricSpec, p, config: StencilConfig = StencilConfig()) -> float:
    """Residuo de D^a W_abcd = (1/2) C_bdc, relativo a la escala de C."""
    b = curvature_bundle(spec, p, config)
    dw = covariant_derivative(spec, p, "weyl", config, b)
    div = np.einsum("ea,eabcd->bcd", b.pair.gamma_inv, dw)
    expected = 0.5 * np.einsum("bdc->bcd", cotton(spec, p, config, b))
    return max_abs(div - expected) / scale_of(max(max_abs(div), max_abs(expected)))


def decomposition_residuals(b: CurvatureBundle) -> Tuple[float, float]:
    """Residuos de R = W + A en sus formas con Ricci y con stress-energy."""
    g = b.pair.gamma
    gg = 0.5 * kulkarni_nomizu(g, g)
    ricci_form = b.weyl + 0.5 * kulkarni_nomizu(g, b.ricci) - (b.scalar / 6.0) * gg
    stress_form = b.weyl + 0.5 * kulkarni_nomizu(g, b.stress) - (b.trace / 3.0) * gg
    scale = scale_of(max_abs(b.riemann))
    return max_abs(b.riemann - ricci_form) / scale, max_abs(b.riemann - stress_form) / scale


def weyl_trace_residual(b: CurvatureBundle) -> float:
    tr = np.einsum("ac,abcd->bd", b.pair.gamma_inv, b.weyl)
    return max_abs(tr) / scale_of(max_abs(b.weyl))
