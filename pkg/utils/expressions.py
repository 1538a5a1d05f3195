"""Arithmetic expressions over the static eigenfrequencies (``2*k1``, ``k2 - k1``)."""
import re
from typing import Sequence

import sympy

_ALLOWED = re.compile(r'^[0-9k\s.+\-*/()eE]+$')
_IMPLICIT_PRODUCT = re.compile(r'(\d)\s*(k\d+)')
_MODE_SYMBOL = re.compile(r'k(\d+)')


def _parse(text: str) -> sympy.Expr:
    cleaned = _IMPLICIT_PRODUCT.sub(r'\1*\2', text.strip())
    if not cleaned or not _ALLOWED.match(cleaned):
        raise ValueError(f"Invalid expression '{text}': use numbers, k1..kN and + - * / ( )")
    indices = {int(i) for i in _MODE_SYMBOL.findall(cleaned)}
    if 0 in indices:
        raise ValueError(f"Invalid expression '{text}': modes are numbered from k1")
    symbols = {f'k{i}': sympy.Symbol(f'k{i}', positive=True) for i in indices}
    try:
        expr = sympy.sympify(cleaned, locals=symbols)
    except (sympy.SympifyError, SyntaxError, TypeError) as e:
        raise ValueError(f"Invalid expression '{text}': {e}")
    unknown = expr.free_symbols - set(symbols.values())
    if unknown:
        raise ValueError(f"Invalid expression '{text}': unknown names {sorted(str(s) for s in unknown)}")
    return expr


def check_expression(text: str) -> str:
    """Validate an expression and return it unchanged."""
    _parse(text)
    return text


def highest_mode(text: str) -> int:
    indices = [int(i) for i in _MODE_SYMBOL.findall(_IMPLICIT_PRODUCT.sub(r'\1*\2', text))]
    return max(indices, default=0)


def evaluate(text: str, k: Sequence[float]) -> float:
    """Evaluate an expression with k1 = k[0], k2 = k[1], ..."""
    expr = _parse(text)
    needed = highest_mode(text)
    if needed > len(k):
        raise ValueError(f"Expression '{text}' needs k{needed} but only {len(k)} modes are available")
    values = {symbol: float(k[int(symbol.name[1:]) - 1]) for symbol in expr.free_symbols}
    value = expr.subs(values).evalf()
    if not value.is_real:
        raise ValueError(f"Expression '{text}' does not evaluate to a real number")
    return float(value)
