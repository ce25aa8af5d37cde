"""Pseudo-almost-periodic coefficient functions.

A coefficient is stored as ``f = ap + sum(ergodic)``: an almost periodic
expression tree plus a list of ergodic perturbations whose long-window mean
of ``|.|`` vanishes.  Every node evaluates on scalars or numpy arrays and
carries a rigorous interval enclosure of its range over the whole real line.
"""
from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

BUMP_PEAK = 4.0 / math.pi


# ---------------------------------------------------------------------------
# almost periodic expression tree


class ApExpr:
    """Base class of the almost periodic expression grammar."""

    def __call__(self, t: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def bounds(self) -> tuple[float, float]:
        raise NotImplementedError

    def to_text(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Const(ApExpr):
    c: float

    def __call__(self, t):
        return self.c + 0.0 * np.asarray(t, dtype=float)

    def bounds(self):
        return (self.c, self.c)

    def to_text(self):
        return f"const({_num(self.c)})"


@dataclass(frozen=True)
class Cos(ApExpr):
    freq: float
    phase: float = 0.0

    def __call__(self, t):
        return np.cos(self.freq * np.asarray(t, dtype=float) + self.phase)

    def bounds(self):
        if self.freq == 0.0:
            v = math.cos(self.phase)
            return (v, v)
        return (-1.0, 1.0)

    def to_text(self):
        return _trig_text("cos", self.freq, self.phase)


@dataclass(frozen=True)
class Sin(ApExpr):
    freq: float
    phase: float = 0.0

    def __call__(self, t):
        return np.sin(self.freq * np.asarray(t, dtype=float) + self.phase)

    def bounds(self):
        if self.freq == 0.0:
            v = math.sin(self.phase)
            return (v, v)
        return (-1.0, 1.0)

    def to_text(self):
        return _trig_text("sin", self.freq, self.phase)


@dataclass(frozen=True)
class Sum(ApExpr):
    terms: tuple[ApExpr, ...]

    def __init__(self, terms: Sequence[ApExpr]):
        object.__setattr__(self, "terms", tuple(terms))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for term in self.terms:
            out = out + term(t)
        return out

    def bounds(self):
        lo = hi = 0.0
        for term in self.terms:
            a, b = term.bounds()
            lo += a
            hi += b
        return (lo, hi)

    def to_text(self):
        return "sum(" + ", ".join(term.to_text() for term in self.terms) + ")"


@dataclass(frozen=True)
class Scale(ApExpr):
    factor: float
    expr: ApExpr

    def __call__(self, t):
        return self.factor * self.expr(t)

    def bounds(self):
        lo, hi = self.expr.bounds()
        a, b = self.factor * lo, self.factor * hi
        return (min(a, b), max(a, b))

    def to_text(self):
        return f"scale({_num(self.factor)}, {self.expr.to_text()})"


@dataclass(frozen=True)
class Abs(ApExpr):
    expr: ApExpr

    def __call__(self, t):
        return np.abs(self.expr(t))

    def bounds(self):
        return _abs_interval(*self.expr.bounds())

    def to_text(self):
        return f"abs({self.expr.to_text()})"


@dataclass(frozen=True)
class Square(ApExpr):
    expr: ApExpr

    def __call__(self, t):
        v = self.expr(t)
        return v * v

    def bounds(self):
        lo, hi = _abs_interval(*self.expr.bounds())
        return (lo * lo, hi * hi)

    def to_text(self):
        return f"square({self.expr.to_text()})"


def _abs_interval(lo: float, hi: float) -> tuple[float, float]:
    if lo >= 0.0:
        return (lo, hi)
    if hi <= 0.0:
        return (-hi, -lo)
    return (0.0, max(-lo, hi))


# ---------------------------------------------------------------------------
# ergodic perturbations


class ErgodicTerm:
    """A bounded continuous term with vanishing ergodic mean."""

    c: float
    peak: float = 1.0
    tag: str = ""

    def shape(self, t: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def __call__(self, t: ArrayLike) -> ArrayLike:
        return self.c * self.shape(t)

    def bounds(self) -> tuple[float, float]:
        return (min(0.0, self.c) * self.peak, max(0.0, self.c) * self.peak)

    def to_text(self) -> str:
        return f"{self.tag}({_num(self.c)})"


@dataclass(frozen=True)
class RationalDecay(ErgodicTerm):
    """``c / (1 + t^2)``."""

    c: float
    tag = "rational_decay"

    def shape(self, t):
        t = np.asarray(t, dtype=float)
        return 1.0 / (1.0 + t * t)


@dataclass(frozen=True)
class GaussianDecay(ErgodicTerm):
    """``c * exp(-t^2)``."""

    c: float
    tag = "gaussian_decay"

    def shape(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-t * t)


@dataclass(frozen=True)
class BumpTrain(ErgodicTerm):
    """``c * bump_train(t)``."""

    c: float
    peak = BUMP_PEAK
    tag = "bump_train"

    def shape(self, t):
        return bump_train(t)


@dataclass(frozen=True)
class Zero(ErgodicTerm):
    c: float = 0.0
    tag = "zero"

    def shape(self, t):
        return 0.0 * np.asarray(t, dtype=float)

    def bounds(self):
        return (0.0, 0.0)

    def to_text(self):
        return "zero()"


# ---------------------------------------------------------------------------
# the coefficient itself


@dataclass(frozen=True)
class PapFunction:
    """Coefficient ``ap + sum(ergodic)`` with the decomposition kept explicit."""

    ap: ApExpr
    ergodic: tuple[ErgodicTerm, ...] = ()

    def __init__(self, ap: ApExpr, ergodic: Sequence[ErgodicTerm] = ()):
        object.__setattr__(self, "ap", ap)
        object.__setattr__(self, "ergodic", tuple(ergodic))

    @classmethod
    def constant(cls, c: float) -> "PapFunction":
        return cls(Const(float(c)))

    def __call__(self, t: ArrayLike) -> ArrayLike:
        out = self.ap(t)
        for term in self.ergodic:
            out = out + term(t)
        return out

    def bounds(self) -> tuple[float, float]:
        lo, hi = self.ap.bounds()
        for term in self.ergodic:
            a, b = term.bounds()
            lo += a
            hi += b
        return (lo, hi)

    @property
    def lower(self) -> float:
        return self.bounds()[0]

    @property
    def upper(self) -> float:
        return self.bounds()[1]

    def to_text(self) -> str:
        if not self.ergodic:
            return self.ap.to_text()
        parts = [self.ap.to_text()] + [term.to_text() for term in self.ergodic]
        return "sum(" + ", ".join(parts) + ")"


def evaluate(f: PapFunction, t: ArrayLike) -> ArrayLike:
    """Evaluate ``f`` at ``t``; returns a float for scalar input."""
    v = f(t)
    return float(v) if np.ndim(v) == 0 else v


def bounds(f: PapFunction | ApExpr | ErgodicTerm) -> tuple[float, float]:
    """Interval enclosure ``(lower, upper)`` of ``f`` over the real line."""
    return f.bounds()


def sampled_extrema(f, window: tuple[float, float], step: float) -> tuple[float, float]:
    """Minimum and maximum of ``f`` sampled on a uniform grid over ``window``.

    A tightness diagnostic for :func:`bounds`; the samples always lie inside
    the rigorous enclosure.
    """
    t_lo, t_hi = window
    if step <= 0 or t_lo >= t_hi:
        raise ValueError("need step > 0 and t_lo < t_hi")
    n = int(math.floor((t_hi - t_lo) / step + 1e-9))
    t = t_lo + step * np.arange(n + 1)
    if t[-1] < t_hi:
        t = np.append(t, t_hi)
    v = np.asarray(f(t), dtype=float)
    return float(v.min()), float(v.max())


def ergodic_mean(f: Callable[[np.ndarray], ArrayLike], T: float, quad_step: float = 0.01) -> float:
    """Composite trapezoid estimate of ``(1/2T) * integral_{-T}^{T} |f(t)| dt``.

    ``f`` may be a :class:`PapFunction` or any vectorised callable.
    """
    if T <= 0 or quad_step <= 0:
        raise ValueError("need T > 0 and quad_step > 0")
    n = max(1, int(math.ceil(2.0 * T / quad_step - 1e-9)))
    t = np.linspace(-T, T, n + 1)
    v = np.asarray(f(t), dtype=float)
    if v.shape != t.shape:
        v = np.broadcast_to(v, t.shape) if v.ndim == 0 else np.vectorize(f, otypes=[float])(t)
    return float(np.trapezoid(np.abs(v), t) / (2.0 * T))


# ---------------------------------------------------------------------------
# the bump train


def _bump_start(n):
    # exact in integer arithmetic for integer n
    return (n * n * n - n) // 3


def _g(s):
    return (8.0 / math.pi) * np.sqrt(s * (1.0 - s))


def bump_train(t: ArrayLike) -> ArrayLike:
    """Even bump train built from blocks of ``n`` unit-area bumps.

    Block ``n >= 1`` starts at ``a_n = (n^3 - n)/3`` and holds the bumps
    ``g(u - a_n - i)`` on ``[a_n + i, a_n + i + 1]`` for ``0 <= i < n``, with
    ``g(s) = (8/pi) sqrt(s - s^2)``.  Between blocks the train is zero.
    """
    u = np.abs(np.asarray(t, dtype=float))
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    n = np.floor(np.cbrt(3.0 * u)).astype(np.int64) - 2
    n = np.maximum(n, 1)
    # step back where the cube-root guess overshot, then forward to the block
    while True:
        over = _bump_start(n) > u
        if not over.any():
            break
        n = np.where(over, np.maximum(n - 1, 1), n)
        if (n == 1).all():
            break
    while True:
        fwd = _bump_start(n + 1) <= u
        if not fwd.any():
            break
        n = n + fwd
    offset = u - _bump_start(n).astype(float)
    i = np.floor(offset)
    s = offset - i
    out = np.where(i < n, _g(s), 0.0)
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# text form used inside scenario files

_AP_TAGS = {"const", "cos", "sin", "sum", "scale", "abs", "square"}
_ERGODIC_TAGS = {
    "rational_decay": RationalDecay,
    "gaussian_decay": GaussianDecay,
    "bump_train": BumpTrain,
}
_NUM_FUNCS = {"sqrt": math.sqrt, "exp": math.exp, "log": math.log}
_NUM_NAMES = {"pi": math.pi, "e": math.e}


class ExpressionError(ValueError):
    pass


def _num(x: float) -> str:
    return repr(float(x))


def _trig_text(tag: str, freq: float, phase: float) -> str:
    if phase == 0.0:
        return f"{tag}({_num(freq)})"
    return f"{tag}({_num(freq)}, {_num(phase)})"


def parse_pap(text: str) -> PapFunction:
    """Parse the nested expression syntax into a :class:`PapFunction`.

    Ergodic nodes may appear alone or as direct arguments of a top-level
    ``sum``; numeric arguments accept arithmetic with ``pi``, ``e`` and
    ``sqrt``/``exp``/``log``.

    >>> parse_pap("sum(const(1), rational_decay(0.5))")(0.0)
    1.5
    """
    try:
        tree = ast.parse(text.strip(), mode="eval").body
    except SyntaxError as exc:
        raise ExpressionError(f"malformed expression {text!r}: {exc.msg}") from None
    tag = _call_tag(tree)
    if tag == "zero":
        return PapFunction(Const(0.0), [Zero()])
    if tag in _ERGODIC_TAGS:
        return PapFunction(Const(0.0), [_ergodic(tree)])
    if tag == "sum":
        if not tree.args:
            raise ExpressionError("sum needs at least one term")
        ap_parts, erg = [], []
        for arg in tree.args:
            sub = _call_tag(arg)
            if sub in _ERGODIC_TAGS:
                erg.append(_ergodic(arg))
            elif sub == "zero":
                erg.append(Zero())
            else:
                ap_parts.append(_ap(arg))
        if erg:
            if not ap_parts:
                ap = Const(0.0)
            elif len(ap_parts) == 1:
                ap = ap_parts[0]
            else:
                ap = Sum(ap_parts)
            return PapFunction(ap, erg)
        return PapFunction(Sum(ap_parts))
    return PapFunction(_ap(tree))


def _call_tag(node) -> str:
    if not isinstance(node, ast.Call) or not isinstance(node.func, ast.Name):
        raise ExpressionError(f"expected a tagged node, got {ast.unparse(node)!r}")
    if node.keywords:
        raise ExpressionError(f"keyword arguments are not allowed in {ast.unparse(node)!r}")
    tag = node.func.id
    if tag not in _AP_TAGS and tag not in _ERGODIC_TAGS and tag != "zero":
        raise ExpressionError(f"unknown node tag {tag!r}")
    return tag


def _arity(node, lo: int, hi: int) -> None:
    if not lo <= len(node.args) <= hi:
        raise ExpressionError(f"{node.func.id} takes {lo}..{hi} arguments, got {len(node.args)}")


def _ap(node) -> ApExpr:
    tag = _call_tag(node)
    if tag in _ERGODIC_TAGS or tag == "zero":
        raise ExpressionError(f"{tag} is only allowed as a top-level summand")
    if tag == "const":
        _arity(node, 1, 1)
        return Const(_number(node.args[0]))
    if tag in ("cos", "sin"):
        _arity(node, 1, 2)
        freq = _number(node.args[0])
        phase = _number(node.args[1]) if len(node.args) == 2 else 0.0
        return (Cos if tag == "cos" else Sin)(freq, phase)
    if tag == "sum":
        if not node.args:
            raise ExpressionError("sum needs at least one term")
        return Sum([_ap(a) for a in node.args])
    if tag == "scale":
        _arity(node, 2, 2)
        return Scale(_number(node.args[0]), _ap(node.args[1]))
    _arity(node, 1, 1)
    return (Abs if tag == "abs" else Square)(_ap(node.args[0]))


def _ergodic(node) -> ErgodicTerm:
    _arity(node, 1, 1)
    return _ERGODIC_TAGS[node.func.id](_number(node.args[0]))


_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a**b,
}


def _number(node) -> float:
    try:
        v = _numeric(node)
    except (OverflowError, ValueError, TypeError) as exc:
        if isinstance(exc, ExpressionError):
            raise
        raise ExpressionError(f"invalid number {ast.unparse(node)!r}: {exc}") from None
    if not math.isfinite(v):
        raise ExpressionError(f"non-finite number {ast.unparse(node)!r}")
    return v


def _numeric(node) -> float:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id in _NUM_NAMES:
        return _NUM_NAMES[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _numeric(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        try:
            return float(_BINOPS[type(node.op)](_numeric(node.left), _numeric(node.right)))
        except ZeroDivisionError:
            raise ExpressionError(f"division by zero in {ast.unparse(node)!r}") from None
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _NUM_FUNCS
        and len(node.args) == 1
    ):
        return float(_NUM_FUNCS[node.func.id](_numeric(node.args[0])))
    raise ExpressionError(f"expected a number, got {ast.unparse(node)!r}")
