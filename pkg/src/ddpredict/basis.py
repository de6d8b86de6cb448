"""Basis-function expressions over lagged inputs and outputs.

Grammar (whitespace is ignored)::

    expr   := factor ('*' factor)*
    factor := func '(' var ')' ['^' int] | var ['^' int]
    func   := 'sin' | 'cos' | 'exp'
    var    := ('y' | 'u') '[' ['-'] int ']'

``y[-k]`` is the output k samples back (k >= 1), ``u[-k]`` the input k
samples back and ``u[0]`` the current input. Products are normalized so that
factors appear sorted by (channel, lag, primitive, power).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import NonFiniteError

CHANNELS = ("u", "y")
PRIMITIVES = ("identity", "sin", "cos", "exp")
_FUNCS = {"identity": lambda x: x, "sin": np.sin, "cos": np.cos, "exp": np.exp}


class BasisSyntaxError(ValueError):
    def __init__(self, msg: str, text: str, pos: int):
        super().__init__(f"{msg} at position {pos}: {text!r}")
        self.text = text
        self.pos = pos


@dataclass(frozen=True, order=True)
class LagVar:
    channel: str
    lag: int

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ValueError(f"channel must be 'u' or 'y', got {self.channel!r}")
        if self.lag < 0:
            raise ValueError("lag must be nonnegative")
        if self.channel == "y" and self.lag < 1:
            raise ValueError("output variables must reference a strictly past sample (y[-k], k >= 1)")

    def __str__(self):
        return f"{self.channel}[{-self.lag}]" if self.lag else f"{self.channel}[0]"


@dataclass(frozen=True)
class Factor:
    primitive: str
    var: LagVar
    power: int = 1

    def __post_init__(self):
        if self.primitive not in PRIMITIVES:
            raise ValueError(f"unknown primitive {self.primitive!r}")
        if self.power < 1:
            raise ValueError("power must be >= 1")

    def sort_key(self):
        return (CHANNELS.index(self.var.channel), self.var.lag,
                PRIMITIVES.index(self.primitive), self.power)

    def __str__(self):
        core = str(self.var) if self.primitive == "identity" else f"{self.primitive}({self.var})"
        return core if self.power == 1 else f"{core}^{self.power}"


@dataclass(frozen=True)
class BasisExpr:
    factors: tuple[Factor, ...]

    def __post_init__(self):
        if not self.factors:
            raise ValueError("a basis expression needs at least one factor")
        object.__setattr__(self, "factors", tuple(sorted(self.factors, key=Factor.sort_key)))

    @property
    def lag(self) -> int:
        return max(f.var.lag for f in self.factors)

    def __str__(self):
        return format_basis(self)


@dataclass(frozen=True)
class BasisSet:
    exprs: tuple[BasisExpr, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "exprs", tuple(self.exprs))

    @classmethod
    def parse(cls, texts: Iterable[str]) -> "BasisSet":
        return cls(tuple(parse_basis(t) for t in texts))

    @property
    def lag(self) -> int:
        return max((e.lag for e in self.exprs), default=0)

    def __len__(self):
        return len(self.exprs)

    def __iter__(self):
        return iter(self.exprs)

    def to_strings(self) -> list[str]:
        return [format_basis(e) for e in self.exprs]

    def evaluate(self, x_y, x_u) -> np.ndarray:
        """Stack every expression; leading axis indexes the basis functions."""
        return np.array([eval_basis(e, x_y, x_u) for e in self.exprs], dtype=float)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg, pos=None):
        raise BasisSyntaxError(msg, self.text, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            found = self.peek() or "end of input"
            self.error(f"expected {ch!r}, found {found!r}")
        self.pos += 1

    def word(self) -> str:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isalpha():
            self.pos += 1
        return self.text[start:self.pos]

    def integer(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected an integer")
        return int(self.text[start:self.pos])

    def expr(self) -> BasisExpr:
        factors = [self.factor()]
        while self.peek() == "*":
            self.pos += 1
            factors.append(self.factor())
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return BasisExpr(tuple(factors))

    def factor(self) -> Factor:
        self.skip()
        start = self.pos
        name = self.word()
        if name in ("sin", "cos", "exp"):
            self.expect("(")
            var = self.var()
            self.expect(")")
            prim = name
        elif name in CHANNELS:
            self.pos = start
            var = self.var()
            prim = "identity"
        else:
            self.error(f"expected a function or variable, found {name or self.peek() or 'end of input'!r}", start)
        power = 1
        if self.peek() == "^":
            self.pos += 1
            at = self.pos
            power = self.integer()
            if power < 1:
                self.error("power must be >= 1", at)
        return Factor(prim, var, power)

    def var(self) -> LagVar:
        self.skip()
        start = self.pos
        ch = self.word()
        if ch not in CHANNELS:
            self.error(f"expected 'u' or 'y', found {ch or self.peek() or 'end of input'!r}", start)
        self.expect("[")
        neg = False
        if self.peek() == "-":
            neg = True
            self.pos += 1
        at = self.pos
        k = self.integer()
        self.expect("]")
        if k > 0 and not neg:
            self.error("positive (future) lag indices are not allowed", at)
        if ch == "y" and k == 0:
            self.error("y[0] is not allowed; output features must use past samples", at)
        return LagVar(ch, k)


def parse_basis(text: str) -> BasisExpr:
    return _Parser(text).expr()


def format_basis(e: BasisExpr) -> str:
    return "*".join(str(f) for f in e.factors)


def _lagged(var: LagVar, x_y, x_u):
    # x_y = (y(t-l), ..., y(t-1)), x_u = (u(t-l), ..., u(t-1), u(t))
    if var.channel == "y":
        ell = x_y.shape[0]
        if var.lag > ell:
            raise ValueError(f"{var} needs at least {var.lag} past outputs, got {ell}")
        return x_y[ell - var.lag]
    ell = x_u.shape[0] - 1
    if var.lag > ell:
        raise ValueError(f"{var} needs at least {var.lag} past inputs, got {ell}")
    return x_u[ell - var.lag]


def eval_basis(e: BasisExpr, x_y, x_u):
    """Evaluate ``e`` at the lag windows ``x_y`` (length l) and ``x_u`` (length l + 1).

    Trailing axes broadcast, so ``x_y`` of shape ``(l, M)`` evaluates M windows
    at once. Any non-finite result raises :class:`NonFiniteError`.
    """
    x_y = np.asarray(x_y, dtype=float)
    x_u = np.asarray(x_u, dtype=float)
    out = 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        for f in e.factors:
            val = _FUNCS[f.primitive](_lagged(f.var, x_y, x_u)) ** f.power
            if not np.all(np.isfinite(val)):
                raise NonFiniteError(f"factor {f} of {format_basis(e)} evaluated to a non-finite value")
            out = out * val
    if not np.all(np.isfinite(out)):
        raise NonFiniteError(f"{format_basis(e)} evaluated to a non-finite value")
    return out if np.ndim(out) else float(out)
