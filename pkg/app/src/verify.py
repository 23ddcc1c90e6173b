"""Arnes de verificacion de identidades, formulas de evolucion y teoremas de monotonia.

Cada formula cerrada se evalua desde el bundle de curvatura y se compara con
un oraculo independiente por diferencias en t (D_T = N^-1 d_t sobre funciones).
Un punto que falla se registra como testigo; nunca aborta la corrida.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .catalog import (
    Classification,
    FluidParams,
    MetricSpec,
    build_metric,
    catalog_list,
    confirms,
    conformal,
    exact_reference,
)
from .config import Config
from .curvature import (
    cotton,
    covariant_derivative,
    decomposition_residuals,
    pressure_gradient,
    stress_divergence,
    weyl_bianchi_residual,
    weyl_trace_residual,
)
from .entropy import (
    EntropyPoint,
    MAXIMAL,
    MINIMAL,
    INTERIOR,
    a_sq_fluid,
    eos_rate_bound,
    eos_rate_admissible,
    classify_extremal,
    entropy_from_analysis,
    entropy_point,
    entropy_rate_margin,
    region_entropy,
    resolve_alpha,
    s_crit,
)
from .errors import ConfigError, PreconditionError, WeylLabError
from .foliation import (
    FrameData,
    PointAnalysis,
    analyze_point,
    constraint_residuals,
    foliated_christoffel_residual,
    gauss_codazzi_residuals,
    sqrtg_evolution_residual,
)
from .numdiff import StencilConfig, partial
from .quadrature import RegionSpec
from .tensor_core import GAMMA, GAMMA_BAR, Tensor4, block_norms, levi_civita, norm_sq, spatial_norm_sq
from .utils import max_abs, ordered_map, scale_of

log = logging.getLogger(__name__)

EXACT_TOL = 1e-8
FD_TOL = 1e-5
EVOLUTION_TOL = 1e-4
EVOLUTION_FLOOR = 1e-3
ORACLE_TOL = 1e-6
MONOTONE_TOL = 1e-5
SAMPLE_POINTS = 20
EVOLUTION_POINTS = 5

_EPS3 = levi_civita(3)


@dataclass(frozen=True)
class Witness:
    point: List[float]
    residual: float
    detail: str = ""


@dataclass
class VerificationCase:
    name: str
    metric: str
    tol: float
    params: Dict[str, Any] = field(default_factory=dict)
    points: int = 0
    max_residual: float = 0.0
    passed: bool = True
    witnesses: List[Witness] = field(default_factory=list)
    skipped: Optional[str] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def record(self, point, residual: float, detail: str = "") -> None:
        self.points += 1
        if not math.isfinite(residual):
            residual = math.inf
        self.max_residual = max(self.max_residual, residual)
        if residual > self.tol:
            self.passed = False
            self.witnesses.append(Witness([float(x) for x in np.ravel(point)], residual, detail))

    def fail(self, point, detail: str) -> None:
        self.points += 1
        self.passed = False
        self.witnesses.append(Witness([float(x) for x in np.ravel(point)], math.inf, detail))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "case": self.name,
            "metric": self.metric,
            "params": self.params,
            "points": self.points,
            "maxResidual": self.max_residual,
            "tol": self.tol,
            "pass": self.passed,
            "skipped": self.skipped,
            "witnesses": [{"point": w.point, "residual": w.residual, "detail": w.detail} for w in self.witnesses],
            "details": self.details,
        }


@dataclass(frozen=True)
class EvolutionReport:
    """lhs por diferencias en t, rhs por la formula cerrada."""

    name: str
    point: np.ndarray
    lhs: float
    rhs: float
    residual: float
    passed: bool
    monotone: bool
    skipped: Optional[str] = None
    extra: Dict[str, Any] = field(default_factory=dict)


def evolution_residual(lhs: float, rhs: float) -> float:
    """|lhs - rhs| relativo, con piso absoluto EVOLUTION_FLOOR * EVOLUTION_TOL."""
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), EVOLUTION_FLOOR)


def time_derivative(spec: MetricSpec, fn: Callable[[np.ndarray], float], p, N: float,
                    config: StencilConfig) -> float:
    """D_T f = N^-1 d_t f con el paso externo."""
    return float(partial(fn, np.asarray(p, dtype=float), (0,), config.outer(), domain=spec.in_domain)) / N


def _mixed(f: FrameData, x: np.ndarray) -> np.ndarray:
    return f.g_inv @ x


def _require_electric(a: PointAnalysis) -> None:
    if not ({Classification.PURE_ELECTRIC, Classification.CONFORMALLY_FLAT} & a.labels):
        raise PreconditionError(f"el punto no es puramente electrico: {sorted(l.value for l in a.labels)}")


def _skipped(name: str, p, reason: str) -> EvolutionReport:
    log.warning("%s omitido en %s: %s", name, np.asarray(p).tolist(), reason)
    return EvolutionReport(name, np.asarray(p, dtype=float), 0.0, 0.0, 0.0, True, True, skipped=reason)


def _k_prime(spec: MetricSpec, a: PointAnalysis, p, config: StencilConfig) -> float:
    """k' con D_T k = k' H; 0 donde H = 0."""
    if abs(a.frame.H) <= 1e-12 or a.fluid.k is None:
        return 0.0

    def k_field(q):
        st = analyze_point(spec, q, config).fluid
        return st.P / st.M + 1.0 if st.M != 0.0 else 1.0

    return time_derivative(spec, k_field, p, a.frame.N, config) / a.frame.H


# --- caso electrico ---

def weyl_evolution_rhs(a: PointAnalysis) -> float:
    """16 H |E|^2 - 24 h_jl E_ij E_il + 4 (M + P) h_ij E_ij."""
    f = a.frame
    em = _mixed(f, a.eb.E)
    hm = f.h_mixed
    return (16.0 * f.H * a.eb.E_sq
            - 24.0 * float(np.trace(em @ hm @ em))
            + 4.0 * (a.fluid.M + a.fluid.P) * float(np.trace(hm @ em)))


def _weyl_sq_field(spec: MetricSpec, config: StencilConfig) -> Callable[[np.ndarray], float]:
    def fn(q):
        return analyze_point(spec, q, config).bundle.norm("weyl", GAMMA)
    return fn


def check_weyl_evolution_electric(spec: MetricSpec, p, config: StencilConfig = StencilConfig(),
                                  tol: float = EVOLUTION_TOL) -> EvolutionReport:
    """(1/2) D_T |W|^2 contra 16H|E|^2 - 24 hEE + 4kM hE."""
    p = np.asarray(p, dtype=float)
    a = analyze_point(spec, p, config)
    _require_electric(a)
    if a.fluid.kind not in ("perfect_fluid", "vacuum"):
        raise PreconditionError(f"stress-energy no es de fluido perfecto ({a.fluid.kind})")
    lhs = 0.5 * time_derivative(spec, _weyl_sq_field(spec, config), p, a.frame.N, config)
    rhs = weyl_evolution_rhs(a)
    res = evolution_residual(lhs, rhs)
    return EvolutionReport("weyl_evolution_electric", p, lhs, rhs, res, res <= tol, rhs >= -tol)


def entropy_evolution_rhs(a: PointAnalysis, k: float, k_prime: float) -> float:
    """Forma cerrada de D_T S para Weyl puramente electrico con fluido perfecto, |W| > 0 y |A| > 0."""
    f = a.frame
    b = a.bundle
    w_sq = b.norm("weyl", GAMMA_BAR)
    a_sq = b.norm("a_tensor", GAMMA_BAR)
    w = math.sqrt(w_sq)
    r_bar = math.sqrt(w_sq + a_sq)
    M = a.fluid.M
    H = f.H
    em = _mixed(f, a.eb.E)
    hm = f.g_inv @ f.h_traceless
    h_ee = float(np.trace(em @ hm @ em))
    h_e = float(np.trace(hm @ em))
    bracket = (-k * H - H * w_sq / a_sq - 24.0 * h_ee / w_sq + 4.0 * k * M * h_e / w_sq
               - H * k_prime * (3.0 * k - 2.0) * M * M / a_sq)
    return w * a_sq / r_bar ** 3 * bracket * f.sqrtg


def _entropy_field(spec: MetricSpec, config: StencilConfig, attr: str = "S",
                   alpha: Optional[float] = None) -> Callable[[np.ndarray], float]:
    def fn(q):
        ep = entropy_point(spec, q, "auto", config)
        if alpha is not None:
            ep = ep.with_alpha(alpha)
        return getattr(ep, attr)
    return fn


def check_entropy_evolution_electric(spec: MetricSpec, p, fluid: Optional[FluidParams] = None,
                                     config: StencilConfig = StencilConfig(),
                                     tol: float = EVOLUTION_TOL) -> EvolutionReport:
    """D_T S por diferencias contra la forma cerrada; rama A = 0: D_T S = -H sqrt(g)."""
    p = np.asarray(p, dtype=float)
    a = analyze_point(spec, p, config)
    _require_electric(a)
    ep = entropy_from_analysis(a)
    f = a.frame
    if ep.branch in ("conformally_flat", "flat"):
        return _skipped("entropy_evolution_electric", p, "|W| = 0: la formula divide por |W|^2")
    lhs = time_derivative(spec, _entropy_field(spec, config), p, f.N, config)
    if ep.branch == "vacuum":
        rhs = -f.H * f.sqrtg
        res = abs(lhs - rhs) / scale_of(rhs)
        return EvolutionReport("entropy_evolution_electric", p, lhs, rhs, res, res <= tol, rhs >= -tol,
                               extra={"branch": "A=0"})
    if a.fluid.k is None:
        raise PreconditionError("la forma cerrada requiere fluido perfecto")
    k = fluid.k if fluid is not None else a.fluid.k
    k_prime = fluid.k_prime if fluid is not None else _k_prime(spec, a, p, config)
    rhs = entropy_evolution_rhs(a, k, k_prime)
    res = evolution_residual(lhs, rhs)
    return EvolutionReport("entropy_evolution_electric", p, lhs, rhs, res, res <= tol, rhs >= -tol,
                           extra={"branch": "generic", "k": k, "kPrime": k_prime})


# --- monotonia ---

@dataclass
class MonotonicityReport:
    metric: str
    times: List[float]
    alpha: Optional[float]
    min_rate: float
    rates: List[float]
    hypotheses_ok: int
    hypotheses_failed: int
    bound_branches: Dict[str, int]
    equality_points: int
    equality_consistent: bool
    passed: bool
    witnesses: List[Witness] = field(default_factory=list)


def equality_characterized(ep: EntropyPoint, f: FrameData, tol: float) -> bool:
    """h = 0, o bien |W| = 0, alpha = 1/3 y s_crit = 0."""
    h_zero = math.sqrt(max(f.h_sq, 0.0)) <= tol * scale_of(abs(f.H))
    r = math.sqrt(max(ep.r_bar_sq, 0.0))
    w_zero = math.sqrt(max(ep.w_bar_sq, 0.0)) <= tol * max(r, tol)
    umbilical = ep.alpha is not None and abs(ep.alpha - 1.0 / 3.0) <= tol
    crit_zero = ep.s_crit is None or abs(ep.s_crit) <= tol
    return h_zero or (w_zero and umbilical and crit_zero)


def check_monotonicity_electric(spec: MetricSpec, region: RegionSpec, times: Sequence[float],
                                fluid: Any = "auto", config: StencilConfig = StencilConfig(),
                                tol: float = MONOTONE_TOL, threads: int = Config.THREADS) -> MonotonicityReport:
    """D_T Spf >= -tol sobre la malla region x tiempos, con las hipotesis verificadas por punto."""
    nodes = [np.concatenate([[t], n.x]) for t in times for n in region.volume_rule(1)]
    base = ordered_map(lambda q: entropy_point(spec, q, "auto", config), nodes, threads)
    if isinstance(fluid, FluidParams):
        alpha, alpha_prime = fluid.alpha, fluid.alpha_prime
    else:
        alpha, alpha_prime = resolve_alpha(base), 0.0

    def evaluate(q):
        a = analyze_point(spec, q, config)
        ep = entropy_from_analysis(a).with_alpha(alpha)
        rate = time_derivative(spec, _entropy_field(spec, config, "Spf", alpha), q, a.frame.N, config)
        return a, ep, rate

    results = ordered_map(evaluate, nodes, threads)
    branches: Counter = Counter()
    ok = failed = equality_count = 0
    consistent = True
    witnesses: List[Witness] = []
    rates: List[float] = []
    min_rate = math.inf
    for q, (a, ep, rate) in zip(nodes, results):
        k = ep.k if ep.k is not None else 0.0
        vacuum = Classification.VACUUM in a.labels
        hyp = a.alpha.is_expanding and alpha is not None and (ep.k is not None or vacuum)
        if hyp and ep.k is not None:
            k_prime = _k_prime(spec, a, q, config)
            bound, branch = eos_rate_bound(k, alpha, alpha_prime)
            branches[branch] += 1
            hyp = eos_rate_admissible(k, alpha, k_prime, alpha_prime, tol) and entropy_rate_margin(k, k_prime) >= -tol
        if not hyp:
            failed += 1
            log.warning("%s: hipotesis no verificadas en %s", spec.name, q.tolist())
            continue
        ok += 1
        rates.append(rate)
        min_rate = min(min_rate, rate)
        if rate < -tol:
            witnesses.append(Witness(q.tolist(), rate, "D_T Spf < 0"))
        is_equal = abs(rate) <= tol * scale_of(ep.Spf)
        characterized = equality_characterized(ep, a.frame, max(tol, 1e-6))
        if is_equal:
            equality_count += 1
        if is_equal != characterized:
            consistent = False
            witnesses.append(Witness(q.tolist(), rate, "caracterizacion de igualdad"))
    if not rates:
        min_rate = math.nan
    passed = bool(rates) and min_rate >= -tol and consistent
    return MonotonicityReport(
        metric=spec.name,
        times=list(times),
        alpha=alpha,
        min_rate=min_rate,
        rates=rates,
        hypotheses_ok=ok,
        hypotheses_failed=failed,
        bound_branches=dict(branches),
        equality_points=equality_count,
        equality_consistent=consistent,
        passed=passed,
        witnesses=witnesses,
    )


# --- caso magnetico ---

@dataclass(frozen=True)
class MagneticSample:
    """Datos sinteticos puramente magneticos: g, h con h <= alpha H g <= 0 y el bloque W_Tijk."""

    g: np.ndarray
    h: np.ndarray
    w_tijk: np.ndarray
    alpha: float
    M: float
    k: float
    k_prime: float
    sqrtg: float = 1.0


def magnetic_block(B: np.ndarray, g: np.ndarray) -> np.ndarray:
    """W_Tjab = eps_ab^c B_cj: bloque magnetico con B simetrico y sin traza."""
    sqrtg = math.sqrt(np.linalg.det(g))
    g_inv = np.linalg.inv(g)
    eps_low = sqrtg * _EPS3
    return np.einsum("abd,dc,cj->jab", eps_low, g_inv, B)


def synthetic_magnetic_samples(n: int, seed: int) -> List[MagneticSample]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        L = np.tril(rng.normal(size=(3, 3)), -1) * 0.3 + np.diag(rng.uniform(0.6, 1.6, 3))
        g = L @ L.T
        Bs = rng.normal(size=(3, 3))
        Bs = 0.5 * (Bs + Bs.T)
        Bs -= np.trace(np.linalg.inv(g) @ Bs) / 3.0 * g
        alpha = float(rng.uniform(0.0, 1.0 / 3.0))
        H = -float(rng.uniform(0.1, 3.0))
        weights = rng.dirichlet(np.ones(3))
        mu = alpha * H - (1.0 - 3.0 * alpha) * abs(H) * weights
        Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        h = L @ Q @ np.diag(mu) @ Q.T @ L.T
        k = float(rng.uniform(0.0, 4.0 / 3.0))
        bound, _ = eos_rate_bound(k, alpha, float(rng.uniform(0.0, 1.0)))
        k_prime = float(rng.uniform(0.0, min(bound, 10.0)))
        out.append(MagneticSample(g, h, magnetic_block(Bs, g), alpha, float(rng.uniform(0.1, 2.0)), k, k_prime,
                                  math.sqrt(np.linalg.det(g))))
    return out


def magnetic_weyl_rate(h: np.ndarray, w_tijk: np.ndarray, g_inv: np.ndarray) -> float:
    """(1/2) D_T |W|^2_gamma = -16 h_kp W_Tijk W_Tijp."""
    up = np.einsum("ia,jb,kc,abc->ijk", g_inv, g_inv, g_inv, w_tijk)
    return -16.0 * float(np.einsum("kp,ijk,pq,ijq->", h, up, g_inv, w_tijk))


def magnetic_weyl_rate_loops(h: np.ndarray, w_tijk: np.ndarray, g_inv: np.ndarray) -> float:
    """La misma contraccion con bucles explicitos."""
    total = 0.0
    rng3 = range(3)
    for i in rng3:
        for j in rng3:
            for k in rng3:
                for p in rng3:
                    for a in rng3:
                        for b in rng3:
                            for c in rng3:
                                for d in rng3:
                                    total += (h[k, p] * g_inv[i, a] * g_inv[j, b] * g_inv[k, c] * g_inv[p, d]
                                              * w_tijk[a, b, c] * w_tijk[i, j, d])
    return -16.0 * total


def magnetic_entropy_forms(s: MagneticSample) -> Tuple[float, float]:
    """(forma cerrada, forma por regla de la cadena) de D_T S con Weyl puramente magnetico.

    Ambas usan h_kp W_Tijk W_Tijp; la cerrada toma |W| = -|W|_gamma_bar.
    """
    g_inv = np.linalg.inv(s.g)
    H = float(np.einsum("ij,ij->", g_inv, s.h))
    hww = magnetic_weyl_rate(s.h, s.w_tijk, g_inv) / -16.0
    w_sq = 4.0 * spatial_norm_sq(s.w_tijk, g_inv)
    w = math.sqrt(w_sq)
    a_sq = a_sq_fluid(s.M, s.k)
    a = math.sqrt(a_sq)
    r_bar = math.sqrt(w_sq + a_sq)
    poly = s.k * (9.0 * s.k ** 2 - 12.0 * s.k + 8.0) + 3.0 * s.k_prime * (3.0 * s.k - 2.0)
    if w == 0.0:
        return 0.0, 0.0
    signed = -w
    closed = (a ** 3 / r_bar ** 3) * (
        16.0 * hww / (signed * a)
        + H * signed / (3.0 * a ** 3) * poly * s.M ** 2
        + H * signed * r_bar ** 2 / a ** 3
    ) * s.sqrtg
    chain = (w * a_sq / r_bar ** 3) * (
        16.0 * hww / w_sq - poly * H * s.M ** 2 / (3.0 * a_sq) - H - H * w_sq / a_sq
    ) * s.sqrtg
    return closed, chain


def check_weyl_evolution_magnetic(samples: Optional[Iterable[MagneticSample]] = None,
                                  spec: Optional[MetricSpec] = None, points: Sequence = (),
                                  seed: int = Config.SEED, n: int = 100,
                                  config: StencilConfig = StencilConfig(), tol: float = 1e-12) -> VerificationCase:
    """Tasa magnetica de |W|^2 sobre datos sinteticos (o sobre una metrica puramente magnetica si se provee)."""
    if spec is not None:
        case = VerificationCase("weyl_evolution_magnetic", spec.name, EVOLUTION_TOL, dict(spec.params))
        for p in points:
            a = analyze_point(spec, p, config)
            if Classification.PURE_MAGNETIC not in a.labels:
                continue
            f = a.frame
            lhs = 0.5 * time_derivative(spec, _weyl_sq_field(spec, config), p, f.N, config)
            rhs = magnetic_weyl_rate(f.h, a.bundle.weyl[0, 1:, 1:, 1:] / f.N, f.g_inv)
            case.record(p, evolution_residual(lhs, rhs))
            dt_lapse = f.dN[0] / f.N
            case.details.setdefault("lapseNondecreasing", True)
            if dt_lapse < -tol:
                case.details["lapseNondecreasing"] = False
        if case.points == 0:
            case.skipped = "not exercised on a metric"
        return case

    samples = list(samples) if samples is not None else synthetic_magnetic_samples(n, seed)
    case = VerificationCase("weyl_evolution_magnetic", "synthetic", tol, {"seed": seed, "n": len(samples)})
    sign_failures = 0
    disagreements = 0
    max_gap = 0.0
    for idx, smp in enumerate(samples):
        g_inv = np.linalg.inv(smp.g)
        rhs = magnetic_weyl_rate(smp.h, smp.w_tijk, g_inv)
        oracle = magnetic_weyl_rate_loops(smp.h, smp.w_tijk, g_inv)
        case.record([idx], abs(rhs - oracle) / scale_of(oracle), "contraccion")
        if rhs < -tol * scale_of(oracle):
            case.fail([idx], "signo de la tasa magnetica")
            sign_failures += 1
        closed, chain = magnetic_entropy_forms(smp)
        if closed < -tol * scale_of(closed):
            case.fail([idx], "signo de la forma cerrada")
            sign_failures += 1
        gap = abs(closed - chain) / scale_of(max(abs(closed), abs(chain)))
        max_gap = max(max_gap, gap)
        if gap > 1e-9:
            disagreements += 1
    case.details.update({
        "signFailures": sign_failures,
        "closedFormVsChainRule": {"disagreements": disagreements, "maxRelativeGap": max_gap},
    })
    return case


# --- identidades puntuales ---

def _rel(x: np.ndarray, ref: np.ndarray) -> float:
    return max_abs(np.asarray(x) - np.asarray(ref)) / scale_of(max(max_abs(x), max_abs(ref)))


def _norms_identities(a: PointAnalysis) -> Dict[str, float]:
    b = a.bundle
    f = a.frame
    R2 = b.norm("riemann", GAMMA)
    W2 = b.norm("weyl", GAMMA)
    ric2 = b.ricci_norm_sq(GAMMA)
    riemann_norm_split = abs(R2 - (W2 + 2.0 * ric2 - b.scalar ** 2 / 3.0)) / scale_of(R2)
    Rb = b.norm("riemann", GAMMA_BAR)
    Wb = b.norm("weyl", GAMMA_BAR)
    Ab = b.norm("a_tensor", GAMMA_BAR)
    split = abs(Rb - Wb - Ab) / scale_of(Rb)
    A2 = b.norm("a_tensor", GAMMA)
    a_norm = abs(A2 - (2.0 * b.stress_norm_sq(GAMMA) - b.trace ** 2 / 3.0)) / scale_of(A2)
    m, e, s = a.eb.block_norms
    nw = abs(W2 - (-4.0 * m + 8.0 * e)) / scale_of(W2)
    worst_for = 0.0
    for name in ("riemann", "weyl", "a_tensor"):
        t = Tensor4.lower(getattr(b, name))
        bm, be, bs = block_norms(t, f)
        g_form = -4.0 * bm + 4.0 * be + bs
        bar_form = 4.0 * bm + 4.0 * be + bs
        worst_for = max(worst_for,
                        abs(norm_sq(t, b.pair, GAMMA) - g_form) / scale_of(g_form),
                        abs(norm_sq(t, b.pair, GAMMA_BAR) - bar_form) / scale_of(bar_form))
    eb_gamma = abs(W2 - a.eb.norm_gamma) / scale_of(W2)
    eb_bar = abs(Wb - a.eb.norm_gamma_bar) / scale_of(Wb)
    dec_ricci, dec_stress = decomposition_residuals(b)
    return {
        "riemann_norm_split": riemann_norm_split,
        "splitting": split,
        "a_tensor_norm": a_norm,
        "weyl_block_norm": nw,
        "block_norm_forms": worst_for,
        "eb_norms": max(eb_gamma, eb_bar),
        "decomposition": max(dec_ricci, dec_stress),
        "weyl_trace": weyl_trace_residual(b),
        "trace_stress": abs(b.trace + b.scalar) / scale_of(b.scalar),
    }


def _electric_algebra(a: PointAnalysis) -> Dict[str, float]:
    f = a.frame
    g = f.g
    w_s = a.bundle.weyl[1:, 1:, 1:, 1:]
    E = a.eb.E
    trace = np.einsum("kl,kilj->ij", f.g_inv, w_s)
    rebuilt = (np.einsum("ik,jl->ijkl", E, g) - np.einsum("il,jk->ijkl", E, g)
               + np.einsum("jl,ik->ijkl", E, g) - np.einsum("jk,il->ijkl", E, g))
    return {"electric_trace": _rel(trace, E), "spatial_weyl_reconstruction": _rel(w_s, rebuilt)}


def _foliation_identities(a: PointAnalysis) -> Dict[str, float]:
    b = a.bundle
    f = a.frame
    g = f.g
    n = f.N
    h = f.h
    hh = h @ f.g_inv @ h
    R3 = f.ricci3
    r3 = f.scalar3
    tr = b.trace
    t_ij = b.stress[1:, 1:]
    t_tt = b.stress[0, 0] / n ** 2
    t_ti = b.stress[0, 1:] / n
    E = a.eb.E
    G = np.einsum("ik,jl->ijkl", g, g) - np.einsum("il,jk->ijkl", g, g)

    def kn(x, y):
        return (np.einsum("ik,jl->ijkl", x, y) - np.einsum("il,jk->ijkl", x, y)
                + np.einsum("jl,ik->ijkl", x, y) - np.einsum("jk,il->ijkl", x, y))

    wt = (R3 - 0.5 * t_ij - (3.0 * r3 - 2.0 * tr) / 12.0 * g - (f.H ** 2 - f.h_sq) / 4.0 * g
          + f.H * h - hh)
    g1 = (-0.5 * kn(t_ij, g) + kn(R3, g) - (3.0 * r3 - 2.0 * tr) / 6.0 * G
          + np.einsum("ik,jl->ijkl", h, h) - np.einsum("il,jk->ijkl", h, h))
    dh = f.grad_h()
    g2 = (-0.5 * (np.einsum("j,ik->ijk", t_ti, g) - np.einsum("k,ij->ijk", t_ti, g))
          + np.einsum("jik->ijk", dh) - np.einsum("kij->ijk", dh))
    g3 = (-0.5 * n * (t_tt * g - t_ij) - tr / 3.0 * n * g + f.dt_h() + n * hh + f.hess_lapse())
    rm3 = kn(R3, g) - r3 / 2.0 * G
    w = b.weyl
    return {
        "electric_from_ricci": _rel(E, wt),
        "weyl_spatial": _rel(w[1:, 1:, 1:, 1:], g1),
        "weyl_mixed": _rel(w[0, 1:, 1:, 1:] / n, g2),
        "weyl_electric": _rel(n * E, g3),
        "riemann3_from_ricci": _rel(f.riemann3, rm3),
        "foliated_christoffel": foliated_christoffel_residual(b, f),
    }


def weyl_time_derivative_rhs(a: PointAnalysis, c: np.ndarray) -> np.ndarray:
    """Forma simetrizada de D_T W_TiTj con Weyl puramente electrico y la componente C_ijT del Cotton."""
    f = a.frame
    E = a.eb.E
    h = f.h
    g_inv = f.g_inv
    c_ijT = c[1:, 1:, 0] / f.N
    hE = h @ g_inv @ E
    return (2.0 * f.H * E - 1.5 * (hE + hE.T) + float(np.trace(g_inv @ h @ g_inv @ E)) * f.g
            - 0.5 * c_ijT)


def _cotton_identities(spec: MetricSpec, a: PointAnalysis, p, config: StencilConfig) -> Dict[str, float]:
    out: Dict[str, float] = {}
    f = a.frame
    b = a.bundle
    c = cotton(spec, p, config, b)
    out["cotton_antisymmetry"] = max_abs(c + np.einsum("acb->abc", c)) / scale_of(max_abs(c))
    out["cotton_trace"] = max_abs(np.einsum("ab,abc->c", b.pair.gamma_inv, c)) / scale_of(max_abs(c))
    if not ({Classification.PURE_ELECTRIC, Classification.CONFORMALLY_FLAT} & a.labels):
        return out
    dw = covariant_derivative(spec, p, "weyl", config, b)
    lhs = dw[0, 0, 1:, 0, 1:] / f.N ** 3
    out["electric_evolution"] = _rel(lhs, weyl_time_derivative_rhs(a, c))
    em = _mixed(f, a.eb.E)
    c_up = f.g_inv @ (c[1:, 1:, 0] / f.N) @ f.g_inv
    rhs = (16.0 * f.H * a.eb.E_sq - 24.0 * float(np.trace(em @ f.h_mixed @ em))
           - 4.0 * float(np.einsum("ij,ij->", c_up, a.eb.E)))
    lhs_w = 0.5 * time_derivative(spec, _weyl_sq_field(spec, config), p, f.N, config)
    out["weyl_norm_evolution"] = evolution_residual(lhs_w, rhs)
    if a.fluid.kind == "perfect_fluid":
        def energy(q):
            return analyze_point(spec, q, config).fluid.M
        dM = time_derivative(spec, energy, p, f.N, config)
        fluid_form = -(a.fluid.M + a.fluid.P) * f.h + dM / 3.0 * f.g
        out["cotton_fluid"] = _rel(c[1:, 1:, 0] / f.N, fluid_form)
    return out


def _fluid_evolution(spec: MetricSpec, a: PointAnalysis, p, config: StencilConfig) -> Dict[str, float]:
    """Conservacion, D_T|A|^2 y D_T sqrt(g) en metricas de fluido perfecto."""
    out = {"sqrtg_evolution": sqrtg_evolution_residual(spec, p, config)}
    if a.fluid.kind != "perfect_fluid":
        return out
    f = a.frame
    M, P, k = a.fluid.M, a.fluid.P, a.fluid.k

    def energy(q):
        return analyze_point(spec, q, config).fluid.M

    def a_sq(q):
        return analyze_point(spec, q, config).bundle.norm("a_tensor", GAMMA_BAR)

    dM = time_derivative(spec, energy, p, f.N, config)
    out["conservation_energy"] = evolution_residual(dM, (M + P) * f.H)
    out["conservation_pressure"] = max_abs(pressure_gradient(spec, p, config)) / scale_of(abs(P))
    out["stress_divergence"] = max_abs(stress_divergence(spec, p, config)) / scale_of(abs(M))
    out["a_sq_fluid"] = abs(a.bundle.norm("a_tensor", GAMMA_BAR) - a_sq_fluid(M, k)) / scale_of(a_sq_fluid(M, k))
    k_prime = _k_prime(spec, a, p, config)
    ev_a = (2.0 * k * (9 * k * k - 12 * k + 8) + 6.0 * k_prime * (3 * k - 2)) * f.H * M * M / 3.0
    out["a_sq_evolution"] = evolution_residual(time_derivative(spec, a_sq, p, f.N, config), ev_a)
    return out


IDENTITY_TOLERANCES: Dict[str, float] = {
    "riemann_norm_split": EXACT_TOL, "splitting": EXACT_TOL, "a_tensor_norm": EXACT_TOL, "weyl_block_norm": EXACT_TOL, "block_norm_forms": EXACT_TOL,
    "eb_norms": EXACT_TOL, "decomposition": EXACT_TOL, "weyl_trace": EXACT_TOL, "trace_stress": EXACT_TOL,
    "electric_trace": EXACT_TOL, "spatial_weyl_reconstruction": EXACT_TOL,
    "electric_from_ricci": FD_TOL, "weyl_spatial": FD_TOL, "weyl_mixed": FD_TOL, "weyl_electric": FD_TOL, "riemann3_from_ricci": EXACT_TOL, "foliated_christoffel": FD_TOL,
    "gauss": FD_TOL, "codazzi": FD_TOL, "ricci": FD_TOL,
    "hamiltonian": FD_TOL, "momentum": FD_TOL, "evolution_spatial": FD_TOL, "evolution_normal": FD_TOL,
    "cotton_antisymmetry": EXACT_TOL, "cotton_trace": FD_TOL, "electric_evolution": EVOLUTION_TOL, "weyl_norm_evolution": EVOLUTION_TOL,
    "cotton_fluid": EVOLUTION_TOL, "sqrtg_evolution": EVOLUTION_TOL, "conservation_energy": EVOLUTION_TOL,
    "conservation_pressure": EVOLUTION_TOL, "stress_divergence": EVOLUTION_TOL, "a_sq_fluid": ORACLE_TOL,
    "a_sq_evolution": EVOLUTION_TOL, "weyl_bianchi": EVOLUTION_TOL,
}

ALGEBRAIC = ("riemann_norm_split", "splitting", "a_tensor_norm", "weyl_block_norm", "block_norm_forms", "eb_norms", "decomposition", "weyl_trace",
             "trace_stress", "electric_trace", "spatial_weyl_reconstruction")
FOLIATION = ("electric_from_ricci", "weyl_spatial", "weyl_mixed", "weyl_electric", "riemann3_from_ricci", "foliated_christoffel", "gauss", "codazzi", "ricci",
             "hamiltonian", "momentum", "evolution_spatial", "evolution_normal")
DERIVATIVE = ("cotton_antisymmetry", "cotton_trace", "electric_evolution", "weyl_norm_evolution", "cotton_fluid", "sqrtg_evolution",
              "conservation_energy", "conservation_pressure", "stress_divergence", "a_sq_fluid", "a_sq_evolution")


def identity_residuals(spec: MetricSpec, p, config: StencilConfig = StencilConfig(),
                       derivatives: bool = True, slow: bool = False) -> Dict[str, float]:
    """Residuos de todas las identidades puntuales aplicables en p."""
    p = np.asarray(p, dtype=float)
    a = analyze_point(spec, p, config)
    out = _norms_identities(a)
    out.update(_electric_algebra(a))
    out.update(_foliation_identities(a))
    gc = gauss_codazzi_residuals(a.bundle, a.frame)
    out.update({"gauss": gc[0], "codazzi": gc[1], "ricci": gc[2]})
    cons = constraint_residuals(a.bundle, a.frame)
    out.update({
        "hamiltonian": abs(cons.hamiltonian),
        "momentum": max_abs(cons.momentum),
        "evolution_spatial": cons.evolution_spatial,
        "evolution_normal": abs(cons.evolution_normal),
    })
    if derivatives:
        out.update(_cotton_identities(spec, a, p, config))
        out.update(_fluid_evolution(spec, a, p, config))
    if slow:
        out["weyl_bianchi"] = weyl_bianchi_residual(spec, p, config)
    return out


def check_identities(spec: MetricSpec, points: Sequence, config: StencilConfig = StencilConfig(),
                              names: Optional[Iterable[str]] = None, derivatives: bool = True,
                              slow: bool = False, threads: int = Config.THREADS) -> List[VerificationCase]:
    """Un VerificationCase por identidad, agregado sobre los puntos."""
    wanted = set(names) if names is not None else None

    def run(p):
        try:
            return p, identity_residuals(spec, p, config, derivatives, slow), None
        except WeylLabError as e:
            return p, {}, str(e)

    results = ordered_map(run, points, threads)
    cases: Dict[str, VerificationCase] = {}
    for p, residuals, error in results:
        if error is not None:
            case = cases.setdefault("evaluation", VerificationCase("evaluation", spec.name, 0.0, dict(spec.params)))
            case.fail(p, error)
            continue
        for key, value in residuals.items():
            if wanted is not None and key not in wanted:
                continue
            case = cases.setdefault(key, VerificationCase(key, spec.name, IDENTITY_TOLERANCES[key], dict(spec.params)))
            case.record(p, float(value))
    return list(cases.values())


# --- oraculos, clasificacion, clase conforme ---

def check_reference_values(spec: MetricSpec, points: Sequence, config: StencilConfig = StencilConfig(),
                           tol: float = ORACLE_TOL) -> VerificationCase:
    """Compara los valores cerrados del catalogo con el calculo numerico."""
    case = VerificationCase("reference_values", spec.name, tol, dict(spec.params))
    for p in points:
        a = analyze_point(spec, p, config)
        ep = entropy_from_analysis(a)
        computed = {
            "kretschmann": a.bundle.norm("riemann", GAMMA),
            "H": a.frame.H,
            "M": a.fluid.M,
            "P": a.fluid.P,
            "N": a.frame.N,
            "sqrtg": a.frame.sqrtg,
            "s": ep.s,
            "A_sq": ep.a_sq,
            "E_sq": a.eb.E_sq,
            "alpha_max": a.alpha.alpha_max,
            "christoffel_t_xx": a.bundle.christoffel[0, 1, 1],
            "christoffel_r_tt": a.bundle.christoffel[1, 0, 0],
        }
        if a.fluid.k is not None:
            computed["k"] = a.fluid.k
        for name, value in computed.items():
            if name not in spec.references or value is None:
                continue
            ref = exact_reference(spec, name, p)
            case.record(p, abs(value - ref) / scale_of(ref), name)
    case.details["quantities"] = sorted(spec.references)
    return case


def check_classification(spec: MetricSpec, points: Sequence, config: StencilConfig = StencilConfig(),
                         tol: float = 1e-6) -> VerificationCase:
    case = VerificationCase("classification", spec.name, 0.0, dict(spec.params))
    for p in points:
        labels = analyze_point(spec, p, config, tol).labels
        if confirms(spec.classification, labels):
            case.record(p, 0.0)
        else:
            case.fail(p, f"declarada {sorted(l.value for l in spec.classification)}, "
                         f"calculada {sorted(l.value for l in labels)}")
    return case


def check_conformal_class(spec: MetricSpec, points: Sequence, config: StencilConfig = StencilConfig(),
                          tol: float = FD_TOL) -> VerificationCase:
    """Foliacion umbilica, H constante en el espacio y D_T S >= 0."""
    case = VerificationCase("conformal_class", spec.name, tol, dict(spec.params))
    worst = {"umbilical": 0.0, "cmc": 0.0, "entropyRate": math.inf}
    expanding = True
    for p in points:
        p = np.asarray(p, dtype=float)
        a = analyze_point(spec, p, config)
        f = a.frame
        umb = math.sqrt(max(spatial_norm_sq(f.h_traceless, f.g_inv), 0.0)) / scale_of(abs(f.H))
        cmc = max_abs(f.grad_H()) / scale_of(abs(f.H))
        rate = time_derivative(spec, _entropy_field(spec, config), p, f.N, config)
        expanding = expanding and f.H <= tol
        worst["umbilical"] = max(worst["umbilical"], umb)
        worst["cmc"] = max(worst["cmc"], cmc)
        worst["entropyRate"] = min(worst["entropyRate"], rate)
        case.record(p, umb, "umbilical")
        case.record(p, cmc, "cmc")
        case.record(p, max(0.0, -rate) / scale_of(f.sqrtg), "D_T S < 0")
        if not ({Classification.PURE_ELECTRIC, Classification.CONFORMALLY_FLAT} & a.labels):
            case.fail(p, "no es puramente electrico")
    worst["sigmaNondecreasing"] = expanding
    case.details.update(worst)
    return case


def s_crit_table() -> VerificationCase:
    case = VerificationCase("s_crit_table", "-", 1e-12)
    expected = {
        4.0 / 3.0: 11.0 * math.sqrt(2.0) / 12.0,
        1.0: math.sqrt(2.0) / 4.0 + 2.0 / math.sqrt(5.0),
        0.0: math.sqrt(2.0) / 4.0,
    }
    for k, ref in expected.items():
        case.record([k, 0.0], abs(s_crit(k, 0.0) - ref), f"k={k:g}")
        case.record([k, 1.0 / 3.0], abs(s_crit(k, 1.0 / 3.0)), "alpha=1/3")
    return case


# --- suite ---

def _points(spec: MetricSpec, n: int, seed: int) -> List[np.ndarray]:
    return spec.sample_points(n, seed)


def _evolution_case(name: str, spec: MetricSpec, points, fn, config: StencilConfig) -> VerificationCase:
    case = VerificationCase(name, spec.name, EVOLUTION_TOL, dict(spec.params))
    for p in points:
        try:
            rep = fn(spec, p, config=config)
        except WeylLabError as e:
            case.fail(p, str(e))
            continue
        if rep.skipped:
            case.details.setdefault("skipped", []).append(rep.skipped)
            continue
        case.record(p, rep.residual, f"lhs={rep.lhs:.17g} rhs={rep.rhs:.17g}")
    if case.points == 0 and case.details.get("skipped"):
        case.skipped = case.details["skipped"][0]
    return case


LTB_BOX = RegionSpec(shape="box", lo=(0.6, 1.2, 2.0), hi=(1.4, 1.9, 3.0), order=3)
SCHWARZSCHILD_BOX = RegionSpec(shape="box", lo=(4.0, 1.2, 1.0), hi=(6.0, 1.9, 2.0), order=4)
FLRW_BALL = RegionSpec(shape="ball", center=(0.0, 0.0, 0.0), radius=1.0, order=4)
UNIT_CUBE = RegionSpec(shape="box", lo=(0.0, 0.0, 0.0), hi=(1.0, 1.0, 1.0), order=4)


def _suite_identities(seed, config, threads):
    cases = []
    for spec in catalog_list():
        pts = _points(spec, SAMPLE_POINTS, seed)
        cases.extend(check_identities(spec, pts, config, names=ALGEBRAIC + FOLIATION,
                                               derivatives=False, threads=threads))
    return cases


def _suite_derivatives(seed, config, threads):
    cases = []
    for name in ("eds", "ltb", "kasner", "schwarzschild"):
        spec = build_metric(name)
        cases.extend(check_identities(spec, _points(spec, 3, seed), config, names=DERIVATIVE,
                                               threads=threads))
    return cases


def _suite_oracles(seed, config, threads):
    return [check_reference_values(spec, _points(spec, 5, seed), config) for spec in catalog_list()]


def _suite_classification(seed, config, threads):
    return [check_classification(spec, _points(spec, SAMPLE_POINTS, seed), config) for spec in catalog_list()]


def _suite_electric(seed, config, threads):
    cases = []
    for name in ("ltb", "kasner"):
        spec = build_metric(name)
        pts = _points(spec, EVOLUTION_POINTS, seed)
        cases.append(_evolution_case("weyl_evolution_electric", spec, pts, check_weyl_evolution_electric, config))
        cases.append(_evolution_case("entropy_evolution_electric", spec, pts, check_entropy_evolution_electric, config))
    return cases


def _monotonicity_case(spec: MetricSpec, region: RegionSpec, times, config, threads) -> VerificationCase:
    rep = check_monotonicity_electric(spec, region, times, "auto", config, threads=threads)
    case = VerificationCase("monotonicity_electric", spec.name, MONOTONE_TOL, dict(spec.params))
    case.points = rep.hypotheses_ok
    case.max_residual = max(0.0, -rep.min_rate) if math.isfinite(rep.min_rate) else math.inf
    case.passed = rep.passed
    case.witnesses = rep.witnesses
    case.details = {
        "minRate": rep.min_rate, "alpha": rep.alpha, "hypothesesFailed": rep.hypotheses_failed,
        "boundBranches": rep.bound_branches, "equalityPoints": rep.equality_points,
        "equalityConsistent": rep.equality_consistent,
    }
    return case


def _suite_monotonicity(seed, config, threads):
    times = [1.0 + 0.125 * i for i in range(8)]
    return [
        _monotonicity_case(build_metric("ltb"), LTB_BOX, times, config, threads),
        _monotonicity_case(build_metric("eds"), FLRW_BALL, [1.0, 1.5], config, threads),
        _monotonicity_case(build_metric("schwarzschild"), SCHWARZSCHILD_BOX, [0.5], config, threads),
    ]


def _suite_magnetic(seed, config, threads):
    return [check_weyl_evolution_magnetic(seed=seed)]


def _region_case(name: str, spec: MetricSpec, region: RegionSpec, t: float, expected: Callable, tol: float,
                 config, threads) -> VerificationCase:
    case = VerificationCase(name, spec.name, tol, dict(spec.params))
    try:
        r = region_entropy(spec, region, t, config=config, threads=threads)
    except WeylLabError as e:
        case.fail([t], str(e))
        return case
    case.record([t], abs(r.S_U - expected(r)) / scale_of(expected(r)), "S_U")
    if r.flags:
        case.fail([t], ",".join(r.flags))
    case.details = r.as_row()
    return case


def _suite_regions(seed, config, threads):
    return [
        _region_case("region_entropy", build_metric("minkowski"), UNIT_CUBE, 0.5, lambda r: 6.0, 1e-10,
                     config, threads),
        _region_case("region_entropy", build_metric("eds"), FLRW_BALL, 1.0, lambda r: 0.0, 1e-6, config, threads),
        _region_case("region_entropy", build_metric("schwarzschild"), SCHWARZSCHILD_BOX, 0.5,
                     lambda r: r.area, 1e-6, config, threads),
    ]


def _suite_extremal(seed, config, threads):
    cases = []
    for name, region, t, expected in (("schwarzschild", SCHWARZSCHILD_BOX, 0.5, MAXIMAL),
                                      ("eds", FLRW_BALL, 1.0, MINIMAL),
                                      ("ltb", LTB_BOX, 1.0, INTERIOR)):
        spec = build_metric(name)
        rep = classify_extremal(spec, region, t, config=config, threads=threads)
        case = VerificationCase("classify_extremal", name, 0.0, dict(spec.params))
        if rep.kind == expected:
            case.record([t], 0.0)
        else:
            case.fail([t], f"esperado {expected}, obtenido {rep.kind}")
        case.details = {"kind": rep.kind, "residuals": rep.residuals}
        cases.append(case)
    return cases


def _suite_conformal(seed, config, threads):
    cases = []
    for sigma in ("(2/3)*log(t)", "t", "t + 0.1*sin(x1)"):
        spec = conformal(sigma)
        cases.append(check_conformal_class(spec, _points(spec, 5, seed), config))
    return cases


def _suite_s_crit(seed, config, threads):
    return [s_crit_table()]


def _suite_bianchi(seed, config, threads):
    cases = []
    for name in ("minkowski", "schwarzschild", "eds"):
        spec = build_metric(name)
        cases.extend(check_identities(spec, _points(spec, 2, seed), config, names=("weyl_bianchi",),
                                               derivatives=False, slow=True, threads=threads))
    return cases


SUITES: Dict[str, Callable[[int, StencilConfig, int], List[VerificationCase]]] = {
    "identities": _suite_identities,
    "derivatives": _suite_derivatives,
    "oracles": _suite_oracles,
    "classification": _suite_classification,
    "electric": _suite_electric,
    "monotonicity": _suite_monotonicity,
    "magnetic": _suite_magnetic,
    "regions": _suite_regions,
    "extremal": _suite_extremal,
    "conformal": _suite_conformal,
    "s_crit": _suite_s_crit,
    "bianchi": _suite_bianchi,
}

DEFAULT_SUITE = ("identities", "derivatives", "oracles", "classification", "electric", "monotonicity",
                 "magnetic", "regions", "extremal", "conformal", "s_crit")


def run_suite(names: Optional[Sequence[str]] = None, seed: int = Config.SEED,
              config: StencilConfig = StencilConfig(), threads: int = Config.THREADS) -> List[VerificationCase]:
    """Ejecuta los grupos pedidos (por defecto DEFAULT_SUITE) en orden deterministico."""
    names = list(names) if names else list(DEFAULT_SUITE)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ConfigError(f"grupo de verificacion desconocido '{unknown[0]}'", key="suite")
    groups = ordered_map(lambda n: SUITES[n](seed, config, 1), names, threads)
    cases = [c for group in groups for c in group]
    failed = [c for c in cases if not c.passed]
    log.info("verificacion: %d casos, %d fallidos", len(cases), len(failed))
    return cases


def run_cases_on_metric(spec: MetricSpec, points: Sequence, config: StencilConfig = StencilConfig(),
                        threads: int = Config.THREADS) -> List[VerificationCase]:
    """Identidades, oraculos y clasificacion sobre una metrica y puntos dados (API y CLI)."""
    cases = check_identities(spec, points, config, threads=threads)
    cases.append(check_classification(spec, points, config))
    if spec.references:
        cases.append(check_reference_values(spec, points, config))
    return cases
