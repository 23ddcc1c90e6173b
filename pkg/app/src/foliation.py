"""Datos ADM (N, g, h, H), Gauss-Codazzi, ligaduras y partes electrica/magnetica del Weyl.

Sin shift: gamma = -N^2 dt^2 + g_ij dx^i dx^j, T = N^-1 d_t y
h_ij = -(1/2N) d_t g_ij. Todas las componentes con indice T se obtienen
dividiendo por N las componentes con indice t.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

import numpy as np
from scipy import linalg

from .catalog import Classification, MetricSpec
from .curvature import (
    CurvatureBundle,
    FluidState,
    bundle_from_jet,
    christoffel_from_jet,
    christoffels_foliated,
    metric_jet,
    riemann_from_jet,
    stress_energy,
)
from .errors import DegenerateMetricError
from .numdiff import StencilConfig, partial
from .tensor_core import GAMMA, GAMMA_BAR, Tensor4, block_norms, levi_civita, spatial_norm_sq
from .utils import max_abs, scale_of

log = logging.getLogger(__name__)

CLASSIFY_TOL = 1e-6
_EPS3 = levi_civita(3)


@dataclass(frozen=True)
class FrameData:
    """Instantanea de la foliacion en un punto.

    dN[a] = d_a N, ddN[a, b] = d_a d_b N, dh[a, i, j] = d_a h_ij; gamma3,
    riemann3, ricci3 y scalar3 son la curvatura intrinseca de g.
    """

    point: np.ndarray
    N: float
    g: np.ndarray
    g_inv: np.ndarray
    sqrtg: float
    h: np.ndarray
    H: float
    h_traceless: np.ndarray
    dN: np.ndarray
    ddN: np.ndarray
    dh: np.ndarray
    gamma3: np.ndarray
    riemann3: np.ndarray
    ricci3: np.ndarray
    scalar3: float

    @property
    def h_mixed(self) -> np.ndarray:
        """h^i_j."""
        return self.g_inv @ self.h

    @property
    def h_sq(self) -> float:
        return spatial_norm_sq(self.h, self.g_inv)

    def grad_h(self) -> np.ndarray:
        """nabla_k h_ij con el indice de derivada primero."""
        gam = self.gamma3
        return (self.dh[1:]
                - np.einsum("lki,lj->kij", gam, self.h)
                - np.einsum("lkj,il->kij", gam, self.h))

    def hess_lapse(self) -> np.ndarray:
        """nabla_i nabla_j N."""
        return self.ddN[1:, 1:] - np.einsum("kij,k->ij", self.gamma3, self.dN[1:])

    def laplacian_lapse(self) -> float:
        return float(np.einsum("ij,ij->", self.g_inv, self.hess_lapse()))

    def grad_H(self) -> np.ndarray:
        return np.einsum("ij,kij->k", self.g_inv, self.grad_h())

    def dt_h(self) -> np.ndarray:
        return self.dh[0]

    def dt_H(self) -> float:
        """d_t H = g^ij d_t h_ij + 2N |h|^2."""
        return float(np.einsum("ij,ij->", self.g_inv, self.dh[0]) + 2.0 * self.N * self.h_sq)


@dataclass(frozen=True)
class WeylEB:
    """E_ij = W_TiTj y B_ij = (1/2) eps_i^ab W_Tjab, con sus normas en g."""

    E: np.ndarray
    B: np.ndarray
    block_norms: Tuple[float, float, float]
    E_sq: float
    B_sq: float

    @property
    def norm_gamma(self) -> float:
        """|W|^2_gamma = 8(|E|^2 - |B|^2)."""
        return 8.0 * (self.E_sq - self.B_sq)

    @property
    def norm_gamma_bar(self) -> float:
        return 8.0 * (self.E_sq + self.B_sq)


@dataclass(frozen=True)
class ConstraintResiduals:
    hamiltonian: float
    momentum: np.ndarray
    evolution_spatial: float
    evolution_normal: float

    def worst(self) -> float:
        return max(abs(self.hamiltonian), max_abs(self.momentum), self.evolution_spatial, abs(self.evolution_normal))


@dataclass(frozen=True)
class AlphaExpansion:
    is_expanding: bool
    alpha_max: Optional[float]
    eigenvalues: np.ndarray


@dataclass(frozen=True)
class PointAnalysis:
    """Todo lo que se calcula en un punto a partir de un unico chorro de la metrica."""

    bundle: CurvatureBundle
    frame: FrameData
    eb: WeylEB
    labels: FrozenSet[Classification]
    fluid: FluidState
    alpha: AlphaExpansion
    extra: Dict[str, Any] = field(default_factory=dict)


def frame_from_jet(mjet, p) -> FrameData:
    gamma, dg, ddg = mjet
    if max_abs(gamma[0, 1:]) > 1e-12 * scale_of(max_abs(gamma)):
        raise DegenerateMetricError("solo se soportan metricas sin shift")
    if not gamma[0, 0] < 0:
        raise DegenerateMetricError("lapse no positivo")
    n = float(np.sqrt(-gamma[0, 0]))
    g = gamma[1:, 1:]
    det = float(linalg.det(g))
    if not det > 0:
        raise DegenerateMetricError("metrica espacial degenerada")
    g_inv = linalg.inv(g)
    dN = -dg[:, 0, 0] / (2.0 * n)
    ddN = -ddg[:, :, 0, 0] / (2.0 * n) - np.outer(dN, dN) / n
    h = -dg[0, 1:, 1:] / (2.0 * n)
    dh = (dN[:, None, None] / (2.0 * n * n)) * dg[0, 1:, 1:][None] - ddg[:, 0, 1:, 1:] / (2.0 * n)
    H = float(np.einsum("ij,ij->", g_inv, h))
    riem3, gam3 = riemann_from_jet(g, dg[1:, 1:, 1:], ddg[1:, 1:, 1:, 1:])
    ric3 = np.einsum("ac,abcd->bd", g_inv, riem3)
    ric3 = 0.5 * (ric3 + ric3.T)
    return FrameData(
        point=np.asarray(p, dtype=float),
        N=n,
        g=g,
        g_inv=g_inv,
        sqrtg=float(np.sqrt(det)),
        h=h,
        H=H,
        h_traceless=h - H / 3.0 * g,
        dN=dN,
        ddN=ddN,
        dh=dh,
        gamma3=gam3,
        riemann3=riem3,
        ricci3=ric3,
        scalar3=float(np.einsum("ij,ij->", g_inv, ric3)),
    )


def frame(spec: MetricSpec, p, config: StencilConfig = StencilConfig()) -> FrameData:
    return frame_from_jet(metric_jet(spec, p, config), p)


def foliated_christoffel_residual(b: CurvatureBundle, f: FrameData) -> float:
    """Compara los Christoffel genericos con su forma en terminos de (N, h, Gamma(g))."""
    fol = christoffels_foliated(f.N, f.dN, f.g_inv, f.h, f.gamma3)
    return max_abs(b.christoffel - fol) / scale_of(max_abs(b.christoffel))


def gauss_codazzi_residuals(b: CurvatureBundle, f: FrameData) -> Tuple[float, float, float]:
    """Residuos de las relaciones de Gauss, Codazzi y Ricci de la foliacion."""
    h = f.h
    gauss = f.riemann3 + np.einsum("ik,jl->ijkl", h, h) - np.einsum("il,jk->ijkl", h, h)
    r4 = b.riemann
    r1 = max_abs(r4[1:, 1:, 1:, 1:] - gauss) / scale_of(max_abs(gauss))

    dh = f.grad_h()
    codazzi = np.einsum("jik->ijk", dh) - np.einsum("kij->ijk", dh)
    r2 = max_abs(r4[0, 1:, 1:, 1:] / f.N - codazzi) / scale_of(max_abs(codazzi))

    ricci_eq = f.dt_h() + f.N * h @ f.g_inv @ h + f.hess_lapse()
    r3 = max_abs(r4[0, 1:, 0, 1:] / f.N - ricci_eq) / scale_of(max_abs(ricci_eq))
    return r1, r2, r3


def constraint_residuals(b: CurvatureBundle, f: FrameData) -> ConstraintResiduals:
    """Ligaduras hamiltoniana y de momento mas las ecuaciones de evolucion."""
    n = f.N
    t_tt = b.stress[0, 0] / n ** 2
    t_ti = b.stress[0, 1:] / n
    ham = f.scalar3 + f.H ** 2 - f.h_sq - 2.0 * t_tt
    ham_scale = scale_of(max(abs(f.scalar3), f.H ** 2, f.h_sq, abs(2.0 * t_tt)))

    dh = f.grad_h()
    div_h = np.einsum("kl,klj->j", f.g_inv, dh)
    mom = f.grad_H() - div_h - t_ti
    mom_scale = scale_of(max(max_abs(f.grad_H()), max_abs(div_h)))

    h = f.h
    hh = h @ f.g_inv @ h
    evo = n * f.ricci3 - f.dt_h() + n * f.H * h - 2.0 * n * hh - f.hess_lapse()
    res_spatial = max_abs(n * b.ricci[1:, 1:] - evo) / scale_of(max_abs(evo))

    r_tt = b.ricci[0, 0] / n ** 2
    evo_n = f.dt_H() - n * f.h_sq + f.laplacian_lapse()
    res_normal = (n * r_tt - evo_n) / scale_of(evo_n)

    return ConstraintResiduals(
        hamiltonian=float(ham / ham_scale),
        momentum=mom / mom_scale,
        evolution_spatial=float(res_spatial),
        evolution_normal=float(res_normal),
    )


def weyl_eb(b: CurvatureBundle, f: FrameData, tol: float = CLASSIFY_TOL) -> WeylEB:
    w = b.weyl
    n = f.N
    E = w[0, 1:, 0, 1:] / n ** 2
    E = 0.5 * (E + E.T)
    w_tjab = w[0, 1:, 1:, 1:] / n
    eps_up = f.sqrtg * np.einsum("ikl,ka,lb->iab", _EPS3, f.g_inv, f.g_inv)
    B = 0.5 * np.einsum("iab,jab->ij", eps_up, w_tjab)
    blocks = block_norms(Tensor4.lower(w), f, tol=max(tol, 1e-6))
    return WeylEB(
        E=E,
        B=B,
        block_norms=blocks,
        E_sq=spatial_norm_sq(E, f.g_inv),
        B_sq=spatial_norm_sq(B, f.g_inv),
    )


def classify(b: CurvatureBundle, f: FrameData, eb: Optional[WeylEB] = None,
             tol: float = CLASSIFY_TOL) -> FrozenSet[Classification]:
    """Etiquetas del punto; las pruebas electrica/magnetica son relativas a |W|_gamma_bar."""
    eb = eb or weyl_eb(b, f, tol)
    r_bar = np.sqrt(max(b.norm("riemann", GAMMA_BAR), 0.0))
    w_bar = np.sqrt(max(b.norm("weyl", GAMMA_BAR), 0.0))
    ric_bar = np.sqrt(max(b.ricci_norm_sq(GAMMA_BAR), 0.0))
    labels = set()
    flat = r_bar <= tol
    if flat:
        labels.add(Classification.FLAT)
    if flat or w_bar <= tol * r_bar:
        labels.add(Classification.CONFORMALLY_FLAT)
    else:
        magnetic = np.sqrt(eb.block_norms[0])
        electric = np.sqrt(eb.block_norms[1])
        if magnetic <= tol * w_bar:
            labels.add(Classification.PURE_ELECTRIC)
        elif electric <= tol * w_bar:
            labels.add(Classification.PURE_MAGNETIC)
        else:
            labels.add(Classification.MIXED)
    if flat or ric_bar <= tol * r_bar:
        labels.add(Classification.VACUUM)
    h_norm = np.sqrt(max(f.h_sq, 0.0))
    scale = max(1.0, np.sqrt(r_bar))
    if h_norm <= tol * scale and abs(f.dN[0]) <= tol * scale:
        labels.add(Classification.STATIC)
    return frozenset(labels)


def alpha_expansion(f: FrameData, tol: float = CLASSIFY_TOL) -> AlphaExpansion:
    """Autovalores generalizados de h respecto de g y el mayor alpha con h <= alpha H g <= 0."""
    mu = linalg.eigh(f.h, f.g, eigvals_only=True)
    H = f.H
    scale = max(1.0, float(np.max(np.abs(mu))) if mu.size else 1.0)
    if abs(H) <= tol * scale:
        # H = 0: la condicion fuerza h = 0
        ok = bool(np.max(np.abs(mu)) <= tol * scale)
        return AlphaExpansion(ok, 1.0 / 3.0 if ok else None, mu)
    if H > 0 or np.max(mu) > tol * abs(H):
        return AlphaExpansion(False, None, mu)
    if np.sqrt(max(spatial_norm_sq(f.h_traceless, f.g_inv), 0.0)) <= tol * abs(H):
        return AlphaExpansion(True, 1.0 / 3.0, mu)
    alpha = min(1.0 / 3.0, float(np.min(mu / H)))
    return AlphaExpansion(True, max(alpha, 0.0), mu)


def sqrtg_evolution_residual(spec: MetricSpec, p, config: StencilConfig = StencilConfig()) -> float:
    """D_T sqrt(g) = -H sqrt(g) por diferencias en t."""
    p = np.asarray(p, dtype=float)
    f = frame(spec, p, config)

    def sqrtg(q):
        return float(np.sqrt(linalg.det(spec.spatial_metric(q))))

    lhs = partial(sqrtg, p, (0,), config, domain=spec.in_domain) / f.N
    rhs = -f.H * f.sqrtg
    return abs(lhs - rhs) / scale_of(rhs)


def analyze_point(spec: MetricSpec, p, config: StencilConfig = StencilConfig(),
                  tol: float = CLASSIFY_TOL) -> PointAnalysis:
    p = np.asarray(p, dtype=float)
    mjet = metric_jet(spec, p, config)
    b = bundle_from_jet(mjet, p)
    f = frame_from_jet(mjet, p)
    eb = weyl_eb(b, f, tol)
    return PointAnalysis(
        bundle=b,
        frame=f,
        eb=eb,
        labels=classify(b, f, eb, tol),
        fluid=stress_energy(b),
        alpha=alpha_expansion(f, tol),
    )


def classification_report(spec: MetricSpec, p, config: StencilConfig = StencilConfig(),
                          tol: float = CLASSIFY_TOL) -> Dict[str, Any]:
    """Reporte serializable {point, class, blockNorms, alphaMax, residuals}."""
    a = analyze_point(spec, p, config, tol)
    gc = gauss_codazzi_residuals(a.bundle, a.frame)
    cons = constraint_residuals(a.bundle, a.frame)
    return {
        "point": a.frame.point.tolist(),
        "class": sorted(label.value for label in a.labels),
        "blockNorms": list(a.eb.block_norms),
        "alphaMax": a.alpha.alpha_max,
        "residuals": {
            "gauss": gc[0],
            "codazzi": gc[1],
            "ricci": gc[2],
            "hamiltonian": cons.hamiltonian,
            "momentum": max_abs(cons.momentum),
            "evolutionSpatial": cons.evolution_spatial,
            "evolutionNormal": cons.evolution_normal,
            "christoffel": foliated_christoffel_residual(a.bundle, a.frame),
        },
    }


def sample_classification(spec: MetricSpec, points: List[np.ndarray], config: StencilConfig = StencilConfig(),
                          tol: float = CLASSIFY_TOL) -> List[FrozenSet[Classification]]:
    return [analyze_point(spec, p, config, tol).labels for p in points]
