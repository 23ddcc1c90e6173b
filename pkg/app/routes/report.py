"""Reporte puntual de curvatura y entropia para una metrica."""
from flask import Blueprint, Response, jsonify, request

from ..src.cli import cmd_report
from ..src.config import RunConfig
from ..src.utils import dumps17


bp = Blueprint("report", __name__)


@bp.post("/report")
def report():
    """Clasificacion, datos ADM y densidades de entropia por punto.

    Body JSON: mismas claves que el documento de configuracion de la CLI,
    p.ej. { metric: "eds", point: [1, 0, 0, 0] }
    """
    try:
        p = request.get_json(force=True) or {}
        cfg = RunConfig.from_mapping(p)
        rows = cmd_report(cfg)
        # 17 cifras significativas, no finitos como null
        return Response(dumps17({"metric": cfg.metric, "rows": rows}), status=200, mimetype="application/json")
    except Exception as e:
        return jsonify({"error": str(e)}), 400
