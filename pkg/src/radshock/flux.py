r"""
Flux functions
--------------

Scalar and vector fluxes given as small algebraic expressions, e.g.
``"u^4/4 - u^2/2"`` or ``["u1^2/2 + u2^2/2", "u1*u2"]``.

Grammar (EBNF)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := ('+'|'-') factor | base ('^' integer)?
    base   := number | ident | '(' expr ')' | func '(' expr ')'
    func   := exp | log | sin | cos | sqrt

Scalar fluxes use the variable ``u``; an ``n``-component flux uses
``u1 .. un``. Derivatives are obtained by differentiating the expression
tree, so :meth:`FluxModel.deriv` returns exact analytic values.
:meth:`FluxModel.taylor` evaluates the tree in truncated power-series
arithmetic and returns Taylor coefficients of any order.

.. autoclass:: FluxModel
.. autofunction:: parse_flux
.. autofunction:: builtin
.. autofunction:: eval_deriv
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from radshock.errors import ConfigError, FluxSyntaxError

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")
# C^1 is the least the analysis can live with; these are refused outright.
NON_DIFFERENTIABLE = ("abs", "sign", "max", "min", "floor", "ceil", "heaviside",
                      "step", "round", "if", "where", "piecewise")

BUILTINS = {
    "burgers": "u^2/2",
    "quartic": "u^4/4 - u^2/2",
    "cubic": "u^3",
    "quartic_pure": "u^4",
}

MAX_ORDER = 3


# {{{ expression tree

@dataclass(frozen=True)
class Node:
    pass


@dataclass(frozen=True)
class Const(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    index: int


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int


@dataclass(frozen=True)
class Call(Node):
    name: str
    arg: Node


ZERO = Const(0.0)
ONE = Const(1.0)


def _is(node, value):
    return isinstance(node, Const) and node.value == value


def neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    return BinOp("+", a, b)


def sub(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    return BinOp("-", a, b)


def mul(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    return BinOp("*", a, b)


def div(a, b):
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0.0:
        return Const(a.value / b.value)
    if _is(a, 0.0):
        return ZERO
    if _is(b, 1.0):
        return a
    return BinOp("/", a, b)


def power(a, n):
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, Const) and (a.value != 0.0 or n > 0):
        return Const(a.value ** n)
    return Pow(a, n)


def diff(node: Node, var: int) -> Node:
    """Symbolic partial derivative of *node* with respect to variable *var*."""
    if isinstance(node, Const):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.index == var else ZERO
    if isinstance(node, Neg):
        return neg(diff(node.arg, var))
    if isinstance(node, BinOp):
        a, b = node.left, node.right
        da, db = diff(a, var), diff(b, var)
        if node.op == "+":
            return add(da, db)
        if node.op == "-":
            return sub(da, db)
        if node.op == "*":
            return add(mul(da, b), mul(a, db))
        return div(sub(mul(da, b), mul(a, db)), power(b, 2))
    if isinstance(node, Pow):
        return mul(mul(Const(float(node.exponent)),
                       power(node.base, node.exponent - 1)),
                   diff(node.base, var))
    if isinstance(node, Call):
        a = node.arg
        da = diff(a, var)
        if node.name == "exp":
            outer = node
        elif node.name == "log":
            return div(da, a)
        elif node.name == "sin":
            outer = Call("cos", a)
        elif node.name == "cos":
            outer = neg(Call("sin", a))
        else:
            return div(da, mul(Const(2.0), node))
        return mul(outer, da)
    raise TypeError(f"unknown node: {node!r}")


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Pow):
        return 4
    if isinstance(node, Const) and (node.value < 0 or math.copysign(1, node.value) < 0):
        return 3
    return 5


def to_text(node: Node, names: Sequence[str] = ("u",)) -> str:
    """Print *node* in the input grammar; parsing the result reproduces it."""
    def wrap(child, min_prec):
        s = to_text(child, names)
        return f"({s})" if _prec(child) < min_prec else s

    if isinstance(node, Const):
        v = node.value
        if not math.isfinite(v):
            raise ValueError("non-finite constant cannot be printed")
        text = repr(abs(v))
        return f"-{text}" if math.copysign(1.0, v) < 0 else text
    if isinstance(node, Var):
        return names[node.index]
    if isinstance(node, Neg):
        return "-" + wrap(node.arg, 3)
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        return f"{wrap(node.left, p)} {node.op} {wrap(node.right, p + 1)}"
    if isinstance(node, Pow):
        return f"{wrap(node.base, 5)}^{node.exponent}"
    if isinstance(node, Call):
        return f"{node.name}({to_text(node.arg, names)})"
    raise TypeError(f"unknown node: {node!r}")


def _to_python(node: Node) -> str:
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Neg):
        return f"(-{_to_python(node.arg)})"
    if isinstance(node, BinOp):
        return f"({_to_python(node.left)} {node.op} {_to_python(node.right)})"
    if isinstance(node, Pow):
        if node.exponent < 0:
            return f"(1.0 / {_to_python(node.base)} ** {-node.exponent})"
        return f"({_to_python(node.base)} ** {node.exponent})"
    return f"_{node.name}({_to_python(node.arg)})"


def _compile(node: Node, nvars: int):
    args = ", ".join(f"x{i}" for i in range(nvars))
    env = {f"_{name}": getattr(np, name) for name in FUNCTIONS}
    return eval(f"lambda {args}: {_to_python(node)}", env)  # noqa: S307

# }}}


# {{{ parser

_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
                    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
                    r"|(?P<op>[-+*/^()]))")


def _tokenize(text):
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise FluxSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, names):
        self.tokens = _tokenize(text)
        self.i = 0
        self.names = names

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value or kind == "end":
            what = "end of input" if kind == "end" else repr(text)
            raise FluxSyntaxError(f"expected {value!r}, found {what}", pos)

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise FluxSyntaxError(f"unexpected {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = BinOp(op, node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.factor()
            node = BinOp(op, node, rhs)
        return node

    def factor(self):
        kind, text, pos = self.peek()
        if kind == "op" and text in ("-", "+"):
            self.take()
            arg = self.factor()
            if text == "+":
                return arg
            return Const(-arg.value) if isinstance(arg, Const) else Neg(arg)
        node = self.base()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            sign = 1
            kind, text, pos = self.peek()
            if kind == "op" and text in ("-", "+"):
                self.take()
                sign = -1 if text == "-" else 1
                kind, text, pos = self.peek()
            if kind != "num" or not text.isdigit():
                what = "end of input" if kind == "end" else repr(text)
                raise FluxSyntaxError(f"expected integer exponent, found {what}", pos)
            self.take()
            node = Pow(node, sign * int(text))
        return node

    def base(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Const(float(text))
        if kind == "ident":
            if text in self.names:
                return Var(self.names.index(text))
            if text in NON_DIFFERENTIABLE:
                raise FluxSyntaxError(f"non-differentiable construct {text!r}", pos)
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise FluxSyntaxError(f"unknown identifier {text!r}", pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(text)
        raise FluxSyntaxError(f"unexpected {what}", pos)


def variable_names(dimension: int) -> tuple[str, ...]:
    if dimension == 1:
        return ("u",)
    return tuple(f"u{i + 1}" for i in range(dimension))

# }}}


# {{{ truncated power series

class Taylor:
    """Truncated power series ``sum_k c[k] x^k``; enough arithmetic to run the tree."""

    __slots__ = ("c",)

    def __init__(self, c):
        self.c = np.asarray(c, dtype=float)

    @classmethod
    def variable(cls, x0, order):
        c = np.zeros(order + 1)
        c[0] = x0
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    def _coerce(self, other):
        if isinstance(other, Taylor):
            return other
        c = np.zeros_like(self.c)
        c[0] = other
        return Taylor(c)

    def __add__(self, other):
        return Taylor(self.c + self._coerce(other).c)

    __radd__ = __add__

    def __sub__(self, other):
        return Taylor(self.c - self._coerce(other).c)

    def __rsub__(self, other):
        return Taylor(self._coerce(other).c - self.c)

    def __neg__(self):
        return Taylor(-self.c)

    def __mul__(self, other):
        if not isinstance(other, Taylor):
            return Taylor(self.c * other)
        n = len(self.c)
        return Taylor(np.convolve(self.c, other.c)[:n])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Taylor):
            return Taylor(self.c / other)
        a, b = self.c, other.c
        q = np.zeros_like(a)
        for k in range(len(a)):
            q[k] = (a[k] - np.dot(q[:k], b[k:0:-1])) / b[0]
        return Taylor(q)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n):
        if n < 0:
            return 1.0 / (self ** (-n))
        result = self._coerce(1.0)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def exp(self):
        a = self.c
        b = np.zeros_like(a)
        b[0] = math.exp(a[0])
        for k in range(1, len(a)):
            j = np.arange(1, k + 1)
            b[k] = np.dot(j * a[1:k + 1], b[k - 1::-1][:k]) / k
        return Taylor(b)

    def log(self):
        a = self.c
        b = np.zeros_like(a)
        b[0] = math.log(a[0])
        for k in range(1, len(a)):
            j = np.arange(1, k)
            b[k] = (a[k] - np.dot(j * b[1:k], a[k - 1:0:-1]) / k) / a[0]
        return Taylor(b)

    def _sincos(self):
        a = self.c
        s = np.zeros_like(a)
        c = np.zeros_like(a)
        s[0], c[0] = math.sin(a[0]), math.cos(a[0])
        for k in range(1, len(a)):
            ja = np.arange(1, k + 1) * a[1:k + 1]
            s[k] = np.dot(ja, c[k - 1::-1][:k]) / k
            c[k] = -np.dot(ja, s[k - 1::-1][:k]) / k
        return Taylor(s), Taylor(c)

    def sin(self):
        return self._sincos()[0]

    def cos(self):
        return self._sincos()[1]

    def sqrt(self):
        a = self.c
        b = np.zeros_like(a)
        b[0] = math.sqrt(a[0])
        for k in range(1, len(a)):
            b[k] = (a[k] - np.dot(b[1:k], b[k - 1:0:-1])) / (2.0 * b[0])
        return Taylor(b)


def _eval_series(node, env):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return env[node.index]
    if isinstance(node, Neg):
        return -_eval_series(node.arg, env)
    if isinstance(node, BinOp):
        a = _eval_series(node.left, env)
        b = _eval_series(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if not isinstance(b, Taylor) and not isinstance(a, Taylor):
            return a / b
        return a / b if isinstance(a, Taylor) else Taylor.__rtruediv__(b, a)
    if isinstance(node, Pow):
        base = _eval_series(node.base, env)
        return base ** node.exponent
    arg = _eval_series(node.arg, env)
    if isinstance(arg, Taylor):
        return getattr(arg, node.name)()
    return getattr(math, node.name)(arg)

# }}}


# {{{ flux model

@dataclass(frozen=True)
class FluxModel:
    """An immutable flux :math:`f:\\mathbb{R}^n\\to\\mathbb{R}^n`.

    :attr kind: ``"builtin:<name>"`` or ``"parsed"``.
    :attr domain: optional validity interval for scalar fluxes (e.g. where a
        ``log`` argument stays positive); ``None`` means the whole line.
    """

    components: tuple[Node, ...]
    kind: str = "parsed"
    domain: tuple[float, float] | None = None
    _scalar: tuple = field(default=(), repr=False, compare=False)
    _vector: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        n = len(self.components)
        if n == 1:
            trees = [self.components[0]]
            for _ in range(MAX_ORDER):
                trees.append(diff(trees[-1], 0))
            object.__setattr__(self, "_scalar",
                               tuple(_compile(t, 1) for t in trees))
        else:
            comps = tuple(_compile(c, n) for c in self.components)
            jac = tuple(tuple(_compile(diff(c, j), n) for j in range(n))
                        for c in self.components)
            object.__setattr__(self, "_vector", (comps, jac))

    @property
    def dimension(self) -> int:
        return len(self.components)

    @property
    def is_scalar(self) -> bool:
        return self.dimension == 1

    def text(self) -> str:
        names = variable_names(self.dimension)
        return "; ".join(to_text(c, names) for c in self.components)

    def _check_domain(self, u):
        if self.domain is None:
            return
        lo, hi = self.domain
        arr = np.asarray(u)
        if np.any(arr < lo) or np.any(arr > hi):
            raise ValueError(f"state outside the validity region [{lo}, {hi}]")

    def __call__(self, u):
        if self.is_scalar:
            self._check_domain(u)
            return _broadcast(self._scalar[0](np.asarray(u, dtype=float)), u)
        u = np.asarray(u, dtype=float)
        comps, _ = self._vector
        return np.array([np.broadcast_to(c(*u), u.shape[1:]) for c in comps])

    def deriv(self, u, order: int = 1):
        """Exact derivative of a scalar flux; ``order`` in ``0..3``."""
        if not self.is_scalar:
            raise TypeError("deriv is defined for scalar fluxes; use jacobian")
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"derivative order {order} > {MAX_ORDER} unsupported")
        self._check_domain(u)
        return _broadcast(self._scalar[order](np.asarray(u, dtype=float)), u)

    def jacobian(self, u) -> np.ndarray:
        """Jacobian matrix at a single state (``n x n``)."""
        u = np.asarray(u, dtype=float)
        if self.is_scalar:
            return np.array([[float(self.deriv(float(u.reshape(-1)[0]), 1))]])
        _, jac = self._vector
        return np.array([[float(d(*u)) for d in row] for row in jac])

    def jacobian_batch(self, U) -> np.ndarray:
        """Jacobians at the columns of ``U`` (shape ``(n, m)``); returns ``(m, n, n)``."""
        U = np.asarray(U, dtype=float)
        n, m = U.shape
        if self.is_scalar:
            return np.asarray(self.deriv(U[0], 1)).reshape(m, 1, 1)
        _, jac = self._vector
        out = np.empty((m, n, n))
        for i, row in enumerate(jac):
            for j, d in enumerate(row):
                out[:, i, j] = np.broadcast_to(d(*U), (m,))
        return out

    def taylor(self, u0: float, order: int) -> np.ndarray:
        """Coefficients ``c[k] = f^{(k)}(u0) / k!`` for ``k = 0..order``."""
        if not self.is_scalar:
            raise TypeError("taylor is defined for scalar fluxes")
        self._check_domain(u0)
        out = _eval_series(self.components[0], [Taylor.variable(float(u0), order)])
        if not isinstance(out, Taylor):
            c = np.zeros(order + 1)
            c[0] = out
            return c
        return out.c.copy()


def _broadcast(value, u):
    if np.ndim(u) == 0:
        return float(value)
    return np.broadcast_to(value, np.shape(u)).astype(float)


def parse_flux(expr, dimension: int = 1, domain=None) -> FluxModel:
    """Parse a flux expression (a list of component strings, or a single
    ``;``-separated string, when ``dimension > 1``)."""
    if dimension < 1:
        raise ConfigError("dimension must be a positive integer")
    if isinstance(expr, str):
        parts = [p for p in expr.split(";")] if dimension > 1 else [expr]
    else:
        parts = list(expr)
    if len(parts) != dimension:
        raise ConfigError(f"expected {dimension} flux components, got {len(parts)}")
    names = variable_names(dimension)
    trees = tuple(_Parser(p, names).parse() for p in parts)
    return FluxModel(trees, kind="parsed",
                     domain=None if domain is None else tuple(domain))


def builtin(name: str) -> FluxModel:
    try:
        expr = BUILTINS[name]
    except KeyError:
        raise ConfigError(f"unknown builtin flux {name!r}; "
                          f"known: {', '.join(sorted(BUILTINS))}") from None
    model = parse_flux(expr)
    return FluxModel(model.components, kind=f"builtin:{name}")


def eval_deriv(f: FluxModel, u, order: int):
    """Analytic derivative of order ``0..3`` of the scalar flux *f* at *u*."""
    return f.deriv(u, order)

# }}}


# {{{ transformations

def substitute(node: Node, mapping: dict) -> Node:
    """Replace variables by subtrees (``mapping`` keyed by variable index)."""
    if isinstance(node, Var):
        return mapping.get(node.index, node)
    if isinstance(node, Const):
        return node
    if isinstance(node, Neg):
        return neg(substitute(node.arg, mapping))
    if isinstance(node, BinOp):
        a = substitute(node.left, mapping)
        b = substitute(node.right, mapping)
        return {"+": add, "-": sub, "*": mul, "/": div}[node.op](a, b)
    if isinstance(node, Pow):
        return power(substitute(node.base, mapping), node.exponent)
    return Call(node.name, substitute(node.arg, mapping))


def reflect(f: FluxModel) -> FluxModel:
    """Scalar flux ``v -> -f(-v)``; turns increasing shocks into decreasing ones."""
    if not isinstance(f, FluxModel):
        return f.reflect()
    if not f.is_scalar:
        raise TypeError("reflection is defined for scalar fluxes")
    tree = neg(substitute(f.components[0], {0: Neg(Var(0))}))
    domain = None if f.domain is None else (-f.domain[1], -f.domain[0])
    return FluxModel((tree,), kind=f"reflected:{f.kind}", domain=domain)


def add_cubic(f: FluxModel, eta: float, center: float) -> FluxModel:
    """Scalar flux ``f(u) + eta (u - center)^3``."""
    if not isinstance(f, FluxModel):
        return f.add_cubic(eta, center)
    if not f.is_scalar:
        raise TypeError("mollification is defined for scalar fluxes")
    extra = mul(Const(float(eta)), power(sub(Var(0), Const(float(center))), 3))
    return FluxModel((add(f.components[0], extra),),
                     kind=f"mollified:{f.kind}", domain=f.domain)

# }}}
