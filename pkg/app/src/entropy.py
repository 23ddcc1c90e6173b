"""Densidades de entropia de Weyl y entropias de region.

s = |W|_gamma_bar / |R|_gamma_bar, S = zeta s sqrt(g), Spf = zeta (s + s_crit) sqrt(g)
y S_U = zeta (Area / Vol) int_U s sqrt(g).
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, FrozenSet, List, Optional, Tuple, Union

import numpy as np
from scipy import linalg

from .catalog import Classification, FluidParams, MetricSpec
from .config import Config
from .errors import DomainError, InconsistencyError, QuadratureError
from .foliation import PointAnalysis, analyze_point
from .numdiff import StencilConfig, partial
from .quadrature import RegionSpec, area_element
from .tensor_core import GAMMA, GAMMA_BAR
from .utils import max_abs, ordered_map, pairwise_sum, scale_of

log = logging.getLogger(__name__)

ENTROPY_TOL = 1e-6
EXTREMAL_TOL = 1e-5

Fluid = Union[FluidParams, str, None]


def s_crit(k: float, alpha: float) -> float:
    """sqrt(1 - 3a)(sqrt(2)/4 + 2k sqrt((1 - 3a)/(9k^2 - 12k + 8)))."""
    gap = max(0.0, 1.0 - 3.0 * alpha)
    return math.sqrt(gap) * (math.sqrt(2.0) / 4.0 + 2.0 * k * math.sqrt(gap / (9.0 * k * k - 12.0 * k + 8.0)))


def a_sq_fluid(M: float, k: float) -> float:
    """|A|^2 de un fluido perfecto: (9k^2 - 12k + 8) M^2 / 3."""
    return (9.0 * k * k - 12.0 * k + 8.0) * M * M / 3.0


@dataclass(frozen=True)
class Densities:
    s: float
    s_bar: Optional[float]
    branch: str


def densities(w_bar_sq: float, a_sq: float, r_bar_sq: float, tol: float = ENTROPY_TOL) -> Densities:
    """s y s_bar a partir de las normas gamma_bar, con los cortes de tolerancia.

    s = 1 cuando |A| es despreciable (o no hay curvatura); s = 0 cuando lo es |W|.
    """
    w = math.sqrt(max(w_bar_sq, 0.0))
    a = math.sqrt(max(a_sq, 0.0))
    r = math.sqrt(max(r_bar_sq, 0.0))
    if r <= tol:
        if w > tol:
            raise InconsistencyError(f"|R| = {r:.3e} con |W| = {w:.3e}")
        return Densities(1.0, None, "flat")
    if a <= tol * r:
        return Densities(1.0, math.inf, "vacuum")
    if w <= tol * r:
        return Densities(0.0, 0.0, "conformally_flat")
    return Densities(w / math.sqrt(w * w + a * a), w / a, "generic")


@dataclass(frozen=True)
class EntropyPoint:
    point: np.ndarray
    s: float
    s_bar: Optional[float]
    s_crit: Optional[float]
    S: float
    Spf: float
    signed_w: float
    w_bar_sq: float
    w_gamma_sq: float
    a_sq: float
    r_bar_sq: float
    sqrtg: float
    N: float
    H: float
    alpha: Optional[float]
    alpha_max: Optional[float]
    k: Optional[float]
    labels: FrozenSet[Classification]
    branch: str

    def with_alpha(self, alpha: Optional[float], zeta: float = 1.0) -> "EntropyPoint":
        """Recalcula s_crit y Spf para otro alpha (k se conserva)."""
        sc = None if alpha is None or self.k is None or not 0.0 <= self.k <= 4.0 / 3.0 + 1e-12 \
            else s_crit(min(self.k, 4.0 / 3.0), alpha)
        spf = zeta * (self.s + (sc or 0.0)) * self.sqrtg
        return replace(self, alpha=alpha, s_crit=sc, Spf=spf)


def _signed_w(a: PointAnalysis, w_bar: float) -> float:
    # sigma = +1 puramente electrico, -1 puramente magnetico
    if Classification.PURE_MAGNETIC in a.labels:
        return -w_bar
    return math.copysign(w_bar, a.eb.norm_gamma) if Classification.MIXED in a.labels else w_bar


def entropy_from_analysis(a: PointAnalysis, fluid: Fluid = "auto", tol: float = ENTROPY_TOL,
                          zeta: float = 1.0) -> EntropyPoint:
    b = a.bundle
    w_bar_sq = b.norm("weyl", GAMMA_BAR)
    a_sq = b.norm("a_tensor", GAMMA_BAR)
    r_bar_sq = b.norm("riemann", GAMMA_BAR)
    d = densities(w_bar_sq, a_sq, r_bar_sq, tol)
    if isinstance(fluid, FluidParams):
        k, alpha = fluid.k, fluid.alpha
    elif fluid == "auto":
        k = a.fluid.k
        alpha = a.alpha.alpha_max if a.alpha.is_expanding else None
    else:
        k, alpha = None, None
    sqrtg = a.frame.sqrtg
    sc = None
    if k is not None and alpha is not None and -1e-12 <= k <= 4.0 / 3.0 + 1e-12:
        sc = s_crit(min(max(k, 0.0), 4.0 / 3.0), alpha)
    S = zeta * d.s * sqrtg
    return EntropyPoint(
        point=a.frame.point,
        s=d.s,
        s_bar=d.s_bar,
        s_crit=sc,
        S=S,
        Spf=zeta * (d.s + (sc or 0.0)) * sqrtg,
        signed_w=_signed_w(a, math.sqrt(max(w_bar_sq, 0.0))),
        w_bar_sq=w_bar_sq,
        w_gamma_sq=b.norm("weyl", GAMMA),
        a_sq=a_sq,
        r_bar_sq=r_bar_sq,
        sqrtg=sqrtg,
        N=a.frame.N,
        H=a.frame.H,
        alpha=alpha,
        alpha_max=a.alpha.alpha_max,
        k=k,
        labels=a.labels,
        branch=d.branch,
    )


def entropy_point(spec: MetricSpec, p, fluid: Fluid = "auto", config: StencilConfig = StencilConfig(),
                  tol: float = ENTROPY_TOL, zeta: float = 1.0) -> EntropyPoint:
    return entropy_from_analysis(analyze_point(spec, p, config, tol), fluid, tol, zeta)


def resolve_alpha(points: List[EntropyPoint]) -> Optional[float]:
    """alpha constante para una region: el menor alphaMax de sus nodos (alpha' = 0)."""
    values = [p.alpha_max for p in points]
    if not values or any(v is None for v in values):
        return None
    return min(1.0 / 3.0, max(0.0, min(values)))


@dataclass(frozen=True)
class RegionEntropy:
    t: float
    S_U: float
    Spf_U: float
    area: float
    vol: float
    bound: float
    quad_error: float
    integral: float
    sup_s_crit: Optional[float]
    alpha: Optional[float]
    min_boundary_lapse: float
    lapse_degenerate: bool
    flags: List[str] = field(default_factory=list)

    def as_row(self) -> Dict[str, Any]:
        return {"t": self.t, "S_U": self.S_U, "Spf_U": self.Spf_U, "area": self.area,
                "vol": self.vol, "bound": self.bound, "quadError": self.quad_error}


@dataclass(frozen=True)
class _Integrals:
    area: float
    vol: float
    s_int: float
    spf_int: float
    sup_s_crit: Optional[float]
    min_lapse: float
    alpha: Optional[float]


def _slice_point(t: float, x) -> np.ndarray:
    return np.concatenate([[t], np.asarray(x, dtype=float)])


def _integrate(spec: MetricSpec, region: RegionSpec, t: float, panels: int, fluid: Fluid,
               config: StencilConfig, tol: float, threads: int) -> _Integrals:
    vol_nodes = region.volume_rule(panels)
    surf_nodes = region.surface_rule(panels)
    for node in vol_nodes:
        q = _slice_point(t, node.x)
        if not spec.in_domain(q):
            raise DomainError(f"la region sale del dominio de {spec.name} en {q.tolist()}")

    points = ordered_map(lambda n: entropy_point(spec, _slice_point(t, n.x), fluid, config, tol),
                         vol_nodes, threads)
    alpha = None
    if fluid == "auto":
        alpha = resolve_alpha(points)
        points = [p.with_alpha(alpha) for p in points]
    elif isinstance(fluid, FluidParams):
        alpha = fluid.alpha

    vol = pairwise_sum([n.weight * p.sqrtg for n, p in zip(vol_nodes, points)])
    s_int = pairwise_sum([n.weight * p.S for n, p in zip(vol_nodes, points)])
    spf_int = pairwise_sum([n.weight * p.Spf for n, p in zip(vol_nodes, points)])
    crits = [p.s_crit for p in points if p.s_crit is not None]

    def surface(n):
        q = _slice_point(t, n.x)
        return area_element(spec.spatial_metric(q), n.tangents), spec.lapse_at(q)

    surf = ordered_map(surface, surf_nodes, threads)
    area = pairwise_sum([n.weight * da for n, (da, _) in zip(surf_nodes, surf)])
    return _Integrals(
        area=area,
        vol=vol,
        s_int=s_int,
        spf_int=spf_int,
        sup_s_crit=max(crits) if crits else None,
        min_lapse=min(lapse for _, lapse in surf),
        alpha=alpha,
    )


def region_entropy(spec: MetricSpec, region: RegionSpec, t: float, fluid: Fluid = "auto",
                   config: StencilConfig = StencilConfig(), tol: float = ENTROPY_TOL,
                   zeta: float = 1.0, threads: int = Config.THREADS) -> RegionEntropy:
    """S_U, Spf_U, Area, Vol y la cota Area (1 + sup s_crit) con estimacion de error.

    El error es la diferencia entre la regla con `panels` y con el doble de paneles.
    """
    coarse = _integrate(spec, region, t, region.panels, fluid, config, tol, threads)
    fine = _integrate(spec, region, t, 2 * region.panels, fluid, config, tol, threads)

    def normalized(ig: _Integrals) -> Tuple[float, float]:
        ratio = ig.area / ig.vol
        return zeta * ratio * ig.s_int, zeta * ratio * ig.spf_int

    s_c, spf_c = normalized(coarse)
    s_f, spf_f = normalized(fine)
    quad_error = max(abs(s_f - s_c), abs(spf_f - spf_c), zeta * abs(fine.area - coarse.area))
    if quad_error > region.max_error * scale_of(max(abs(s_f), abs(spf_f), fine.area)):
        raise QuadratureError(f"la cuadratura no converge en t={t}: error {quad_error:.3e}")

    sup_crit = fine.sup_s_crit
    bound = zeta * fine.area * (1.0 + (sup_crit or 0.0))
    flags = []
    if s_f > zeta * fine.area + quad_error + tol:
        flags.append("S_U>Area")
    if spf_f > bound + quad_error + tol:
        flags.append("Spf_U>bound")
    degenerate = fine.min_lapse <= tol
    if degenerate:
        flags.append("lapseDegenerate")
        log.warning("%s: lapse ~ 0 en el borde de la region (min N = %.3e)", spec.name, fine.min_lapse)
    return RegionEntropy(
        t=t,
        S_U=s_f,
        Spf_U=spf_f,
        area=fine.area,
        vol=fine.vol,
        bound=bound,
        quad_error=quad_error,
        integral=zeta * fine.s_int,
        sup_s_crit=sup_crit,
        alpha=fine.alpha,
        min_boundary_lapse=fine.min_lapse,
        lapse_degenerate=degenerate,
        flags=flags,
    )


def area_and_volume(spec: MetricSpec, region: RegionSpec, t: float) -> Tuple[float, float, float]:
    """(Area, Vol, lapse promedio en volumen) en el corte t con la regla base."""
    vol_nodes = region.volume_rule()
    vol = 0.0
    lapse_int = 0.0
    for n in vol_nodes:
        q = _slice_point(t, n.x)
        sg = math.sqrt(max(linalg.det(spec.spatial_metric(q)), 0.0))
        vol += n.weight * sg
        lapse_int += n.weight * sg * spec.lapse_at(q)
    area = 0.0
    for n in region.surface_rule():
        area += n.weight * area_element(spec.spatial_metric(_slice_point(t, n.x)), n.tangents)
    return area, vol, lapse_int / vol


def area_vol_monotonicity(spec: MetricSpec, region: RegionSpec, t: float,
                          config: StencilConfig = StencilConfig()) -> float:
    """D_T (Area / Vol) = N^-1 d_t (Area / Vol), con N promediado en volumen."""
    def ratio(q):
        area, vol, _ = area_and_volume(spec, region, float(q[0]))
        return area / vol

    def domain(q):
        return all(spec.in_domain(_slice_point(q[0], n.x)) for n in region.volume_rule(1))

    dt_ratio = partial(ratio, np.array([t]), (0,), config.outer(), domain=domain)
    _, _, lapse = area_and_volume(spec, region, t)
    return float(dt_ratio / lapse)


@dataclass(frozen=True)
class ExtremalReport:
    kind: str
    residuals: Dict[str, float]
    nodes: int


MAXIMAL = "MaximalStaticVacuumCandidate"
MINIMAL = "MinimalFLRWCandidate"
INTERIOR = "Interior"


def static_system_residuals(a: PointAnalysis) -> Dict[str, float]:
    """N R_ij = nabla_i nabla_j N, Delta N = 0, h = 0 y Ricci 4D nulo."""
    f = a.frame
    hess = f.hess_lapse()
    lhs = f.N * f.ricci3
    r_bar = math.sqrt(max(a.bundle.norm("riemann", GAMMA_BAR), 0.0))
    ric_bar = math.sqrt(max(a.bundle.ricci_norm_sq(GAMMA_BAR), 0.0))
    return {
        "ricci": ric_bar / scale_of(r_bar),
        "static": max_abs(lhs - hess) / scale_of(max(max_abs(lhs), max_abs(hess))),
        "laplacian": abs(f.laplacian_lapse()) / scale_of(max_abs(hess)),
        "h": math.sqrt(max(f.h_sq, 0.0)) / scale_of(abs(f.H)),
    }


def classify_extremal(spec: MetricSpec, region: RegionSpec, t: float, tol: float = EXTREMAL_TOL,
                      config: StencilConfig = StencilConfig(), threads: int = Config.THREADS) -> ExtremalReport:
    """Candidato a entropia maxima (estatico de vacio), minima (FLRW) o interior."""
    nodes = region.volume_rule(1)
    analyses = ordered_map(lambda n: analyze_point(spec, _slice_point(t, n.x), config), nodes, threads)
    worst: Dict[str, float] = {}
    for a in analyses:
        for key, val in static_system_residuals(a).items():
            worst[key] = max(worst.get(key, 0.0), val)
        r_bar = math.sqrt(max(a.bundle.norm("riemann", GAMMA_BAR), 0.0))
        w_bar = math.sqrt(max(a.bundle.norm("weyl", GAMMA_BAR), 0.0))
        weyl_rel = 0.0 if r_bar <= tol else w_bar / r_bar
        worst["weyl"] = max(worst.get("weyl", 0.0), weyl_rel)
        gap = 1.0 / 3.0 - (a.alpha.alpha_max if a.alpha.alpha_max is not None else -math.inf)
        worst["alphaGap"] = max(worst.get("alphaGap", 0.0), gap)
    if all(worst[k] <= tol for k in ("ricci", "static", "laplacian", "h")):
        kind = MAXIMAL
    elif worst["weyl"] <= tol and worst["alphaGap"] <= tol:
        kind = MINIMAL
    else:
        kind = INTERIOR
    log.info("%s en t=%s: %s", spec.name, t, kind)
    return ExtremalReport(kind, worst, len(nodes))


def eos_rate_bound(k: float, alpha: float, alpha_prime: float) -> Tuple[float, str]:
    """Cota superior de k' y la rama del min que la fija.

    k(9k^2 - 12k + 8)/(3(4 - 3k)) * min{9 alpha'/(4(1 - 3 alpha)), 1}.
    """
    if k >= 4.0 / 3.0 - 1e-12:
        return math.inf, "radiation"
    base = k * (9.0 * k * k - 12.0 * k + 8.0) / (3.0 * (4.0 - 3.0 * k))
    if alpha >= 1.0 / 3.0 - 1e-12:
        return base, "one"
    first = 9.0 * alpha_prime / (4.0 * (1.0 - 3.0 * alpha))
    if first < 1.0:
        return base * first, "alpha_prime"
    return base, "one"


def eos_rate_admissible(k: float, alpha: float, k_prime: float, alpha_prime: float, tol: float = 1e-9) -> bool:
    bound, _ = eos_rate_bound(k, alpha, alpha_prime)
    return alpha_prime >= -tol and -tol <= k_prime <= bound + tol


def entropy_rate_margin(k: float, k_prime: float) -> float:
    """k(9k^2 - 12k + 8) + 3k'(3k - 4), no negativo bajo las hipotesis."""
    return k * (9.0 * k * k - 12.0 * k + 8.0) + 3.0 * k_prime * (3.0 * k - 4.0)
