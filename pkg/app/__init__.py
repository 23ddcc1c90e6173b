"""Inicializacion de la app Flask para el servicio weyl_lab.

Responsabilidades principales:
- Configurar CORS segun variables de entorno.
- Registrar blueprints (salud, catalogo, reportes puntuales y verificacion).
- Registrar la CLI de calculo bajo `flask lab ...`.
"""

from flask import Flask, jsonify
try:
    from flask_cors import CORS
except Exception:
    CORS = None

from .src.config import Config, configure_logging
from .src.cli import cli as lab_cli
from .routes.health import bp as health_bp
from .routes.catalog import bp as catalog_bp
from .routes.report import bp as report_bp
from .routes.verify import bp as verify_bp


def create_app():
    # Crear app y cargar configuracion desde Config
    configure_logging()
    app = Flask(__name__)
    app.config.from_object(Config)

    # Habilitar CORS si esta disponible la extension
    if CORS:
        origins = Config.CORS_ORIGINS if hasattr(Config, 'CORS_ORIGINS') else '*'
        CORS(app, resources={r"/*": {"origins": origins}}, supports_credentials=True)

    # Endpoints de salud
    app.register_blueprint(health_bp)

    # Endpoints de calculo
    app.register_blueprint(catalog_bp)
    app.register_blueprint(report_bp)
    app.register_blueprint(verify_bp)

    # Ordenes por lotes: flask lab report|scan|verify|entropy-region|catalog
    app.cli.add_command(lab_cli, name="lab")

    @app.get("/")
    def root():
        # Ruta raiz simple para inspeccion rapida
        return jsonify({"name": "weyl_lab", "status": "ok"}), 200

    return app
