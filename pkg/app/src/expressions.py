"""Expresiones aritmeticas para metricas personalizadas, interpretadas con sympy.

Gramatica aceptada: + - * / ^ (o **), menos unario, parentesis, numeros,
funciones sin cos exp sqrt pow log, variables t x1 x2 x3 y los parametros
declarados. Antes de `parse_expr` cada token pasa por una lista blanca, y la
evaluacion corre sin builtins; el resultado se compila con `lambdify` y sus
derivadas primeras y segundas salen de `sympy.diff`.
"""

import re
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, List, Mapping, Optional, Tuple

import numpy as np
import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from .errors import ExpressionError

COORDINATES = ("t", "x1", "x2", "x3")
SYMBOLS = sympy.symbols(COORDINATES, real=True)

FUNCTIONS: Dict[str, Callable] = {
    "sin": sympy.sin,
    "cos": sympy.cos,
    "exp": sympy.exp,
    "sqrt": sympy.sqrt,
    "log": sympy.log,
    "pow": sympy.Pow,
}

# Nombres que emiten las transformaciones estandar al reescribir literales
_PARSER_GLOBALS = {
    "__builtins__": {},
    "Integer": sympy.Integer,
    "Float": sympy.Float,
    "Rational": sympy.Rational,
    "Symbol": sympy.Symbol,
}

_TRANSFORMATIONS = standard_transformations + (convert_xor,)

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)"
    r"|(?P<op>\*\*|[-+*/^(),]))"
)

ComponentJet = Tuple[float, np.ndarray, np.ndarray]


def _screen(src: str, params: Mapping[str, float]) -> None:
    """Rechaza caracteres y nombres fuera de la lista blanca, con su posicion."""
    stripped = src.rstrip()
    pos = 0
    while pos < len(stripped):
        m = _TOKEN.match(stripped, pos)
        if not m:
            raise ExpressionError("caracter inesperado", src, pos)
        if m.lastgroup == "name":
            name = m.group("name")
            if name in FUNCTIONS:
                if stripped[m.end():].lstrip()[:1] != "(":
                    raise ExpressionError(f"'{name}' necesita argumentos", src, m.start("name"))
            elif name not in COORDINATES and name not in params:
                raise ExpressionError(f"nombre desconocido '{name}'", src, m.start("name"))
        pos = m.end()


@dataclass(frozen=True)
class Expression:
    """Expresion compilada: valor, gradiente y hessiano en un punto [t, x1, x2, x3]."""

    source: str
    sym: sympy.Expr
    fn: Callable[..., float]
    grad_fn: Callable[..., List]
    hess_fn: Callable[..., List]

    @classmethod
    def from_sympy(cls, sym: sympy.Expr, source: str) -> "Expression":
        grad = [sympy.diff(sym, x) for x in SYMBOLS]
        hess = [[sympy.diff(d, x) for x in SYMBOLS] for d in grad]
        return cls(
            source=source,
            sym=sym,
            fn=sympy.lambdify(SYMBOLS, sym, "numpy"),
            grad_fn=sympy.lambdify(SYMBOLS, grad, "numpy"),
            hess_fn=sympy.lambdify(SYMBOLS, hess, "numpy"),
        )

    @property
    def variables(self) -> FrozenSet[str]:
        return frozenset(str(s) for s in self.sym.free_symbols)

    def depends_on(self, name: str) -> bool:
        return name in self.variables

    def map(self, op: Callable[[sympy.Expr], sympy.Expr], source: str) -> "Expression":
        """Nueva expresion op(self), derivable de forma exacta."""
        return Expression.from_sympy(op(self.sym), source)

    def _eval(self, fn, p, shape) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        with np.errstate(all="ignore"):
            try:
                out = np.asarray(fn(*p[:4]), dtype=float)
            except (ValueError, ZeroDivisionError, OverflowError, TypeError) as e:
                raise ExpressionError(f"no se puede evaluar ({e})", self.source) from e
        out = np.broadcast_to(out, shape) if out.shape != shape else out
        if not np.all(np.isfinite(out)):
            raise ExpressionError(f"valor no finito en {p.tolist()}", self.source)
        return out

    def __call__(self, p) -> float:
        return float(self._eval(self.fn, p, ()))

    def gradient(self, p) -> np.ndarray:
        return np.array(self._eval(self.grad_fn, p, (4,)))

    def hessian(self, p) -> np.ndarray:
        return np.array(self._eval(self.hess_fn, p, (4, 4)))

    def jet(self, p) -> ComponentJet:
        return self(p), self.gradient(p), self.hessian(p)


def compile_expression(src: str, params: Optional[Mapping[str, float]] = None) -> Expression:
    """Compila `src` a una funcion de [t, x1, x2, x3] con derivadas exactas."""
    if not isinstance(src, str) or not src.strip():
        raise ExpressionError("expresion vacia", str(src))
    params = dict(params or {})
    _screen(src, params)
    local: Dict[str, object] = dict(zip(COORDINATES, SYMBOLS))
    local.update(FUNCTIONS)
    local.update({k: sympy.Float(float(v)) for k, v in params.items() if k not in local})
    try:
        sym = parse_expr(src, local_dict=local, global_dict=dict(_PARSER_GLOBALS),
                         transformations=_TRANSFORMATIONS)
    except Exception as e:
        raise ExpressionError(f"expresion invalida ({type(e).__name__})", src) from e
    if not isinstance(sym, sympy.Expr):
        raise ExpressionError("la expresion no es escalar", src)
    return Expression.from_sympy(sym, src)
