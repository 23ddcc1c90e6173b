"""Catalogo de metricas disponibles."""
from flask import Blueprint, jsonify

from ..src.cli import cmd_catalog


bp = Blueprint("catalog", __name__)


@bp.get("/catalog")
def catalog():
    """Lista metricas con parametros, coordenadas y clasificacion declarada."""
    try:
        return jsonify({"metrics": cmd_catalog()}), 200
    except Exception as e:
        return jsonify({"error": str(e)}), 400
