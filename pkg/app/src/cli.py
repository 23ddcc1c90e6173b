"""Linea de comandos de weyl_lab (grupo click, tambien registrado en `flask`).

Codigos de salida: 0 todo pasa, 1 fallo de verificacion o de calculo,
2 error de configuracion.
"""

import csv
import io
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

import click
import numpy as np

from .catalog import FluidParams, MetricSpec, build_metric, catalog_list, describe
from .config import Config, RunConfig, configure_logging, load_run_config
from .entropy import area_vol_monotonicity, entropy_from_analysis, region_entropy
from .errors import ConfigError, WeylLabError
from .foliation import analyze_point, classification_report
from .quadrature import RegionSpec
from .utils import dumps17, fmt_float, ordered_map
from .verify import EXACT_TOL, VerificationCase, run_cases_on_metric, run_suite

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

REGION_COLUMNS = ("t", "S_U", "Spf_U", "area", "vol", "bound", "quadError")
SCAN_COLUMNS = REGION_COLUMNS + ("dS_U", "dSpf_U", "dAreaVol", "class", "error")
REPORT_COLUMNS = ("point", "class", "N", "H", "sqrtg", "s", "sBar", "sCrit", "S", "Spf",
                  "wGammaSq", "wBarSq", "aSq", "M", "P", "k", "alphaMax", "branch", "error")
REPORT_SAMPLES = 5


# --- resolucion de la configuracion ---

def spec_from_config(cfg: RunConfig) -> MetricSpec:
    return build_metric(cfg.metric, cfg.params, cfg.custom)


def region_from_config(cfg: RunConfig) -> RegionSpec:
    if cfg.region is None:
        raise ConfigError("esta orden necesita una region", key="region")
    return RegionSpec.from_mapping(cfg.region)


def fluid_from_config(cfg: RunConfig):
    return "auto" if cfg.fluid == "auto" else FluidParams.from_mapping(cfg.fluid)


def points_from_config(cfg: RunConfig, spec: MetricSpec, n: int = REPORT_SAMPLES) -> List[np.ndarray]:
    if cfg.points:
        return [np.asarray(p, dtype=float) for p in cfg.points]
    return spec.sample_points(n, cfg.seed)


def _check_time_grid(cfg: RunConfig, spec: MetricSpec, region: RegionSpec, minimum_steps: int) -> List[float]:
    """Cortes de la malla temporal; cada nodo de la region debe quedar en el dominio de la metrica."""
    times = cfg.time.values()
    if len(times) < minimum_steps:
        raise ConfigError(f"se necesitan al menos {minimum_steps} cortes", key="time.steps")
    nodes = [n.x for n in region.volume_rule()] + [n.x for n in region.surface_rule()]
    for t in times:
        outside = next((x for x in nodes if not spec.in_domain(np.concatenate([[t], x]))), None)
        if outside is not None:
            raise ConfigError(f"t={t}: la region sale del dominio de {spec.name} en x={outside.tolist()}", key="time")
    return times


# --- ordenes ---

def cmd_report(cfg: RunConfig) -> List[Dict[str, Any]]:
    """Tabla puntual: clasificacion, datos ADM, densidades y residuos."""
    spec = spec_from_config(cfg)
    fluid = fluid_from_config(cfg)

    def row(p):
        try:
            a = analyze_point(spec, p, cfg.stencil)
            ep = entropy_from_analysis(a, fluid, zeta=cfg.zeta)
        except WeylLabError as e:
            log.warning("%s: punto %s rechazado: %s", spec.name, np.asarray(p).tolist(), e)
            return {"point": np.asarray(p).tolist(), "error": str(e)}
        out = {
            "point": a.frame.point.tolist(),
            "class": sorted(label.value for label in a.labels),
            "N": a.frame.N,
            "H": a.frame.H,
            "sqrtg": a.frame.sqrtg,
            "s": ep.s,
            "sBar": ep.s_bar,
            "sCrit": ep.s_crit,
            "S": ep.S,
            "Spf": ep.Spf,
            "wGammaSq": ep.w_gamma_sq,
            "wBarSq": ep.w_bar_sq,
            "aSq": ep.a_sq,
            "M": a.fluid.M,
            "P": a.fluid.P,
            "k": a.fluid.k,
            "alphaMax": a.alpha.alpha_max,
            "branch": ep.branch,
        }
        out.update({k: v for k, v in classification_report(spec, p, cfg.stencil).items()
                    if k in ("blockNorms", "residuals")})
        return out

    return ordered_map(row, points_from_config(cfg, spec), cfg.threads)


def cmd_entropy_region(cfg: RunConfig) -> List[Dict[str, Any]]:
    """Serie temporal de S_U, Spf_U, Area, Vol y la cota."""
    spec = spec_from_config(cfg)
    region = region_from_config(cfg)
    fluid = fluid_from_config(cfg)
    times = _check_time_grid(cfg, spec, region, 1)

    def slice_row(t):
        r = region_entropy(spec, region, t, fluid, cfg.stencil, zeta=cfg.zeta, threads=1)
        row = r.as_row()
        row["flags"] = list(r.flags)
        return row

    return ordered_map(slice_row, times, cfg.threads)


def cmd_scan(cfg: RunConfig) -> Dict[str, Any]:
    """Barrido en t: entropias de region, derivadas en t y clase en el centro de la region."""
    spec = spec_from_config(cfg)
    region = region_from_config(cfg)
    fluid = fluid_from_config(cfg)
    times = _check_time_grid(cfg, spec, region, 2)
    nodes = region.volume_rule(1)
    center = nodes[len(nodes) // 2].x

    def slice_row(t):
        try:
            r = region_entropy(spec, region, t, fluid, cfg.stencil, zeta=cfg.zeta, threads=1)
            row: Dict[str, Any] = r.as_row()
            row["dAreaVol"] = area_vol_monotonicity(spec, region, t, cfg.stencil)
            labels = analyze_point(spec, np.concatenate([[t], center]), cfg.stencil).labels
            row["class"] = "+".join(sorted(label.value for label in labels))
            row["flags"] = list(r.flags)
        except WeylLabError as e:
            log.warning("%s: corte t=%s rechazado: %s", spec.name, t, e)
            row = {"t": t, "error": str(e)}
        return row

    rows = ordered_map(slice_row, times, cfg.threads)
    ok = [i for i, row in enumerate(rows) if "error" not in row]
    for key, col in (("S_U", "dS_U"), ("Spf_U", "dSpf_U")):
        if len(ok) >= 2:
            ts = np.array([rows[i]["t"] for i in ok])
            vals = np.array([rows[i][key] for i in ok])
            for i, d in zip(ok, np.gradient(vals, ts)):
                rows[i][col] = float(d)
    spf = [rows[i]["Spf_U"] for i in ok]
    slack = max([rows[i]["quadError"] for i in ok] or [0.0]) + 1e-5
    nondecreasing = all(b >= a - slack for a, b in zip(spf, spf[1:]))
    return {"metric": spec.name, "rows": rows, "spfNondecreasing": nondecreasing}


def _retolerance(case: VerificationCase, tol: float) -> VerificationCase:
    """Reevalua un caso algebraico con otra tolerancia."""
    case.tol = tol
    case.witnesses = [w for w in case.witnesses if w.residual > tol]
    case.passed = case.max_residual <= tol and not case.witnesses
    return case


def cmd_verify(cfg: RunConfig, metric_given: bool = False, tol_given: Optional[bool] = None) -> List[VerificationCase]:
    """Suite por nombre, o las identidades puntuales de una metrica si hay puntos o --metric.

    En la suite `tol` solo reemplaza la tolerancia de los casos exactos cuando se pidio
    explicitamente (por defecto: si difiere de Config.TOL).
    """
    if tol_given is None:
        tol_given = cfg.tol != Config.TOL
    if cfg.suite or not (cfg.points or metric_given or cfg.custom):
        cases = run_suite(cfg.suite or None, cfg.seed, cfg.stencil, cfg.threads)
        return [_retolerance(c, cfg.tol) if tol_given and c.tol == EXACT_TOL else c for c in cases]
    spec = spec_from_config(cfg)
    cases = run_cases_on_metric(spec, points_from_config(cfg, spec), cfg.stencil, cfg.threads)
    return [_retolerance(c, cfg.tol) if c.tol == EXACT_TOL else c for c in cases]


def cmd_catalog() -> List[Dict[str, Any]]:
    return [describe(spec) for spec in catalog_list()]


# --- salida ---

def _cell(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return " ".join(_cell(v) for v in value)
    if isinstance(value, str):
        return value
    return fmt_float(value)


def to_csv(rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def emit(payload: Any, cfg: RunConfig, columns: Optional[Sequence[str]] = None,
         rows: Optional[Sequence[Dict[str, Any]]] = None) -> None:
    if cfg.format == "csv":
        if columns is None:
            raise ConfigError("esta orden solo produce JSON", key="format")
        text = to_csv(rows if rows is not None else payload, columns)
    else:
        text = dumps17(payload) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        log.info("salida escrita en %s", cfg.out)
    else:
        click.echo(text, nl=False)


# --- grupo click ---

def common_options(fn):
    options = [
        click.option("--metric", default=None, help="Nombre de la metrica del catalogo."),
        click.option("--config", "config_path", default=None, type=click.Path(dir_okay=False),
                     help="Documento JSON de configuracion."),
        click.option("--out", default=None, help="Archivo de salida (por defecto stdout)."),
        click.option("--format", "fmt", default=None, type=click.Choice(["json", "csv"])),
        click.option("--tol", default=None, type=float),
        click.option("--seed", default=None, type=int),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _resolve(metric, config_path, out, fmt, tol, seed) -> RunConfig:
    cfg = load_run_config(config_path)
    return cfg.with_overrides(metric=metric, out=out, format=fmt, tol=tol, seed=seed)


def _run(ctx: click.Context, action) -> None:
    try:
        code = action()
    except ConfigError as e:
        click.echo(f"error de configuracion: {e}", err=True)
        ctx.exit(EXIT_CONFIG)
    except WeylLabError as e:
        click.echo(f"error: {e}", err=True)
        ctx.exit(EXIT_FAILED)
    ctx.exit(code or EXIT_OK)


@click.group(name="weyl-lab")
@click.option("--log-level", default=None, help="Sobrescribe LOG_LEVEL.")
def cli(log_level: Optional[str]) -> None:
    """Entropia y curvatura de Weyl en espaciotiempos 3+1."""
    configure_logging(log_level)


@cli.command("report")
@common_options
@click.pass_context
def report(ctx, metric, config_path, out, fmt, tol, seed):
    """Reporte puntual de clasificacion y entropia."""
    def action():
        cfg = _resolve(metric, config_path, out, fmt, tol, seed)
        rows = cmd_report(cfg)
        emit(rows, cfg, REPORT_COLUMNS)
        return EXIT_OK
    _run(ctx, action)


@cli.command("scan")
@common_options
@click.pass_context
def scan(ctx, metric, config_path, out, fmt, tol, seed):
    """Barrido temporal de la entropia de una region."""
    def action():
        cfg = _resolve(metric, config_path, out, fmt, tol, seed)
        result = cmd_scan(cfg)
        emit(result, cfg, SCAN_COLUMNS, rows=result["rows"])
        return EXIT_OK
    _run(ctx, action)


@cli.command("entropy-region")
@common_options
@click.pass_context
def entropy_region(ctx, metric, config_path, out, fmt, tol, seed):
    """S_U, Spf_U, Area, Vol y cota por corte (CSV estable)."""
    def action():
        cfg = _resolve(metric, config_path, out, fmt, tol, seed)
        rows = cmd_entropy_region(cfg)
        emit(rows, cfg, REGION_COLUMNS)
        return EXIT_OK
    _run(ctx, action)


@cli.command("verify")
@common_options
@click.option("--suite", "suite", multiple=True, help="Grupo de verificacion (repetible).")
@click.pass_context
def verify(ctx, metric, config_path, out, fmt, tol, seed, suite):
    """Ejecuta la suite de verificacion; sale con 1 si algun caso falla."""
    def action():
        cfg = _resolve(metric, config_path, out, fmt, tol, seed)
        if suite:
            cfg = cfg.with_overrides(suite=list(suite))
        cases = cmd_verify(cfg, metric_given=metric is not None, tol_given=tol is not None or None)
        emit([c.to_dict() for c in cases], cfg)
        failed = [c.name for c in cases if not c.passed]
        if failed:
            click.echo(f"{len(failed)} casos fallidos: {', '.join(sorted(set(failed)))}", err=True)
        return EXIT_FAILED if failed else EXIT_OK
    _run(ctx, action)


@cli.command("catalog")
@common_options
@click.pass_context
def catalog(ctx, metric, config_path, out, fmt, tol, seed):
    """Lista las metricas disponibles con sus parametros y clasificacion declarada."""
    def action():
        cfg = _resolve(metric, config_path, out, fmt, tol, seed)
        emit(cmd_catalog(), cfg)
        return EXIT_OK
    _run(ctx, action)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        rv = cli.main(args=list(argv) if argv is not None else None, standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return EXIT_CONFIG
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
