"""Jerarquia de errores del dominio weyl_lab.

Las funciones de calculo lanzan estas excepciones; las capas de barrido y
verificacion las capturan por punto y las registran como testigos.
"""


class WeylLabError(Exception):
    """Error base de la libreria."""


class DomainError(WeylLabError):
    """Punto fuera del dominio declarado de la metrica."""


class StencilError(DomainError):
    """El stencil de diferencias sale del dominio o produce valores no finitos."""


class SymmetryError(WeylLabError):
    """Un tensor viola sus simetrias declaradas mas alla de la tolerancia."""


class DegenerateMetricError(WeylLabError):
    """Metrica singular o sin la signatura esperada."""


class QuadratureError(WeylLabError):
    """La cuadratura no converge dentro del umbral pedido."""


class PreconditionError(WeylLabError):
    """No se cumple una precondicion (clasificacion, hipotesis de un teorema)."""


class UnknownQuantityError(WeylLabError, KeyError):
    """Cantidad sin valor de referencia cerrado para esa metrica."""

    def __str__(self):
        return str(self.args[0]) if self.args else "cantidad desconocida"


class ConfigError(WeylLabError, ValueError):
    """Configuracion invalida (JSON mal formado, clave o valor fuera de rango)."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None, column: int | None = None):
        self.key = key
        self.line = line
        self.column = column
        where = []
        if key is not None:
            where.append(f"clave '{key}'")
        if line is not None:
            where.append(f"linea {line}, columna {column}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class ExpressionError(ConfigError):
    """Expresion aritmetica invalida en una metrica personalizada."""

    def __init__(self, message: str, source: str = "", position: int | None = None):
        self.source = source
        self.position = position
        detail = f"{message} en posicion {position}: '{source}'" if position is not None else message
        super().__init__(detail)


class InconsistencyError(WeylLabError):
    """Valores numericos que contradicen una identidad exacta (p.ej. |R| ~ 0 con |W| > 0)."""
