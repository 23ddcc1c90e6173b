"""Ejecucion de casos de verificacion via HTTP."""
from flask import Blueprint, Response, jsonify, request

from ..src.cli import cmd_verify
from ..src.config import RunConfig
from ..src.utils import dumps17


bp = Blueprint("verify", __name__)


@bp.post("/verify")
def verify():
    """Corre los grupos pedidos o las identidades de una metrica.

    Body JSON: { suite?: [str], metric?: str, points?: [[t, x1, x2, x3]], ... }
    """
    try:
        p = request.get_json(force=True) or {}
        cfg = RunConfig.from_mapping(p)
        cases = cmd_verify(cfg, metric_given="metric" in p, tol_given="tol" in p)
        payload = {
            "pass": all(c.passed for c in cases),
            "cases": [c.to_dict() for c in cases],
        }
        return Response(dumps17(payload), status=200, mimetype="application/json")
    except Exception as e:
        return jsonify({"error": str(e)}), 400
