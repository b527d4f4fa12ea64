"""Parser, normal form and exact evaluator for Weyl polynomials.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (['*'] unary)*          # juxtaposition also multiplies
    unary  := '-' unary | factor
    factor := scalar | 'W(' ident ')' ['*'] | '(' expr ')'

A ``*`` written directly after the closing parenthesis of ``W(...)`` (no
whitespace) is the adjoint; anywhere else ``*`` is the product.  So
``W(f)*W(g)`` is ``W(f)* · W(g)`` while ``W(f) * W(g)`` is ``W(f) · W(g)``.
Scalars are real literals with an optional ``i`` (or ``j``) suffix; a bare
``i`` is the imaginary unit.

Products are collapsed with ``w_u w_v = e^{-i Im⟨u,v⟩} w_{u+v}`` and
``w_u* = w_{-u}``, using the symplectic form on the step-function space
before the covariance map is applied.  The quasifree expectation is then
``Σ c · exp(-½‖Σι(v)‖²)``.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from .fock import TruncatedFock
from .phase_space import SigmaMap

__all__ = [
    "WeylSyntaxError",
    "UnboundNameError",
    "Gen",
    "Adjoint",
    "Scalar",
    "Scaled",
    "Prod",
    "Sum",
    "WeylWord",
    "NormalForm",
    "parse",
    "normalize",
    "expect_exact",
    "expect_truncated",
    "TruncatedExpectation",
    "random_word",
]


class WeylSyntaxError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        self.text = text
        pointer = f"\n  {text}\n  {' ' * pos}^" if text else ""
        super().__init__(f"{message} at position {pos}{pointer}")


class UnboundNameError(KeyError):
    pass


# -- AST ------------------------------------------------------------------------


@dataclass(frozen=True)
class Gen:
    name: str
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Adjoint:
    arg: Gen
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Scalar:
    value: complex
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Scaled:
    scalar: complex
    arg: object
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Prod:
    left: object
    right: object
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Sum:
    left: object
    right: object
    span: tuple = field(default=(0, 0), compare=False)


def names_in(node) -> set:
    if isinstance(node, Gen):
        return {node.name}
    if isinstance(node, Adjoint):
        return names_in(node.arg)
    if isinstance(node, Scaled):
        return names_in(node.arg)
    if isinstance(node, (Prod, Sum)):
        return names_in(node.left) | names_in(node.right)
    return set()


# -- tokenizer and parser --------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?[ij]?)
  | (?P<weyl>W\()
  | (?P<unit>[ij](?![A-Za-z0-9_]))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise WeylSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            toks.append((kind, m.group(), m.start(), m.end()))
        pos = m.end()
    toks.append(("end", "", len(text), len(text)))
    return toks


def _scalar_value(tok: str) -> complex:
    if tok in ("i", "j"):
        return 1j
    if tok[-1] in "ij":
        return complex(0.0, float(tok[:-1]))
    return complex(float(tok), 0.0)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.toks[self.k]

    def take(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect_op(self, op):
        t = self.take()
        if t[0] != "op" or t[1] != op:
            raise WeylSyntaxError(f"expected {op!r}, found {t[1] or 'end of input'!r}", t[2], self.text)
        return t

    def parse(self):
        if self.peek()[0] == "end":
            raise WeylSyntaxError("empty expression", 0, self.text)
        node = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise WeylSyntaxError(f"unexpected {t[1]!r}", t[2], self.text)
        return node

    def expr(self):
        node = self.term()
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] in "+-":
                self.take()
                rhs = self.term()
                if t[1] == "-":
                    rhs = Scaled(-1.0 + 0j, rhs, rhs.span)
                node = Sum(node, rhs, (node.span[0], rhs.span[1]))
            else:
                return node

    def _starts_factor(self, t) -> bool:
        return t[0] in ("num", "weyl", "unit") or (t[0] == "op" and t[1] in "(-")

    def term(self):
        node = self.unary()
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] == "*":
                self.take()
                rhs = self.unary()
            elif self._starts_factor(t) and not (t[0] == "op" and t[1] == "-"):
                rhs = self.unary()
            else:
                return node
            node = _product(node, rhs)

    def unary(self):
        t = self.peek()
        if t[0] == "op" and t[1] == "-":
            self.take()
            arg = self.unary()
            return Scaled(-1.0 + 0j, arg, (t[2], arg.span[1]))
        return self.factor()

    def factor(self):
        t = self.take()
        kind, tok, start, end = t
        if kind in ("num", "unit"):
            return Scalar(_scalar_value(tok), (start, end))
        if kind == "weyl":
            name = self.take()
            if name[0] not in ("ident", "unit"):
                raise WeylSyntaxError("expected a function name inside W(...)", name[2], self.text)
            close = self.expect_op(")")
            gen = Gen(name[1], (start, close[3]))
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "*" and nxt[2] == close[3]:
                self.take()
                return Adjoint(gen, (start, nxt[3]))
            return gen
        if kind == "op" and tok == "(":
            node = self.expr()
            close = self.expect_op(")")
            return _respan(node, (start, close[3]))
        if kind == "ident":
            raise WeylSyntaxError(f"bare identifier {tok!r}; write W({tok})", start, self.text)
        raise WeylSyntaxError(f"unexpected {tok or 'end of input'!r}", start, self.text)


def _respan(node, span):
    return type(node)(*[getattr(node, f) for f in node.__dataclass_fields__ if f != "span"], span=span)


def _product(a, b):
    span = (a.span[0], b.span[1])
    if isinstance(a, Scalar) and not isinstance(b, Scalar):
        return Scaled(a.value, b, span)
    if isinstance(b, Scalar) and not isinstance(a, Scalar):
        return Scaled(b.value, a, span)
    return Prod(a, b, span)


@dataclass(frozen=True, eq=False)
class WeylWord:
    """Parsed Weyl polynomial with an optional environment of step functions."""

    ast: object
    text: str = ""
    env: dict | None = None

    def names(self) -> set:
        return names_in(self.ast)

    def bind(self, env: dict) -> "WeylWord":
        missing = sorted(self.names() - set(env))
        if missing:
            raise UnboundNameError(f"unbound function name(s): {', '.join(missing)}")
        arrs = {k: np.asarray(v, dtype=complex).reshape(-1) for k, v in env.items() if k in self.names()}
        sizes = {a.size for a in arrs.values()}
        if len(sizes) > 1:
            raise ValueError(f"bound functions have inconsistent sizes {sorted(sizes)}")
        return WeylWord(self.ast, self.text, arrs)


def parse(text: str, env: dict | None = None) -> WeylWord:
    """Parse ``text``; if ``env`` is given, also check that every name is bound."""
    w = WeylWord(_Parser(text).parse(), text)
    return w.bind(env) if env is not None else w


# -- normal form ------------------------------------------------------------------


@dataclass(eq=False)
class NormalForm:
    """Linear combination ``Σ c_k w_{v_k}`` with distinct vectors."""

    terms: list
    size: int

    @classmethod
    def scalar(cls, c: complex, size: int) -> "NormalForm":
        return cls([(complex(c), np.zeros(size, dtype=complex))], size)

    @classmethod
    def generator(cls, v) -> "NormalForm":
        v = np.asarray(v, dtype=complex).reshape(-1)
        return cls([(1.0 + 0j, v)], v.size)

    def simplified(self, tol: float = 1e-12) -> "NormalForm":
        out: list = []
        for c, v in self.terms:
            for k, (c2, v2) in enumerate(out):
                if np.max(np.abs(v - v2), initial=0.0) <= tol:
                    out[k] = (c2 + c, v2)
                    break
            else:
                out.append((c, v))
        out = [(c, v) for c, v in out if abs(c) > tol]
        return NormalForm(out, self.size)

    def __mul__(self, other: "NormalForm") -> "NormalForm":
        terms = []
        for c1, u in self.terms:
            for c2, v in other.terms:
                phase = np.exp(-1j * np.vdot(u, v).imag)
                terms.append((c1 * c2 * phase, u + v))
        return NormalForm(terms, self.size).simplified()

    def __add__(self, other: "NormalForm") -> "NormalForm":
        return NormalForm(self.terms + other.terms, self.size).simplified()

    def scale(self, c: complex) -> "NormalForm":
        return NormalForm([(c * a, v) for a, v in self.terms], self.size).simplified()

    def adjoint(self) -> "NormalForm":
        return NormalForm([(np.conj(c), -v) for c, v in self.terms], self.size)

    def close_to(self, other: "NormalForm", tol: float = 1e-10) -> bool:
        diff = (self + other.scale(-1.0)).simplified(tol)
        return all(abs(c) <= tol for c, _ in diff.terms)


def normalize(word: WeylWord, env: dict | None = None) -> NormalForm:
    """Collapse a bound word into a :class:`NormalForm`."""
    if env is not None:
        word = word.bind(env)
    if word.env is None:
        if word.names():
            raise UnboundNameError("word has unbound names; pass env")
        size = 1
    else:
        size = next(iter(word.env.values())).size if word.env else 1

    def go(node) -> NormalForm:
        if isinstance(node, Gen):
            return NormalForm.generator(word.env[node.name])
        if isinstance(node, Adjoint):
            return go(node.arg).adjoint()
        if isinstance(node, Scalar):
            return NormalForm.scalar(node.value, size)
        if isinstance(node, Scaled):
            return go(node.arg).scale(node.scalar)
        if isinstance(node, Prod):
            return go(node.left) * go(node.right)
        if isinstance(node, Sum):
            return go(node.left) + go(node.right)
        raise TypeError(f"unknown node {node!r}")

    return go(word.ast)


def expect_exact(nf: NormalForm, sigma: SigmaMap) -> complex:
    """Quasifree expectation ``Σ c · exp(-½‖Σι(v)‖²)``."""
    return complex(sum(c * np.exp(-0.5 * sigma.char_norm2(v)) for c, v in nf.terms))


@dataclass
class TruncatedExpectation:
    exact: complex
    truncated: complex
    warnings: list = field(default_factory=list)

    @property
    def diff(self) -> float:
        return float(abs(self.exact - self.truncated))


def expect_truncated(word: WeylWord, sigma: SigmaMap, cutoff: int = 12, env: dict | None = None,
                     budget: float = 0.5, fock: TruncatedFock | None = None) -> TruncatedExpectation:
    """Vacuum expectation of the word built from truncated Weyl operators.

    Factors act right to left on the vacuum; a warning is attached (and
    emitted) when some ``‖Σι(f)‖`` exceeds ``budget``.
    """
    if env is not None:
        word = word.bind(env)
    if word.env is None and word.names():
        raise UnboundNameError("word has unbound names; pass env")
    F = fock or TruncatedFock(sigma.m * 2 * sigma.d, cutoff)
    vec_of = {name: sigma.apply_iota(f) for name, f in (word.env or {}).items()}
    notes = []
    for name, u in vec_of.items():
        nrm = float(np.linalg.norm(u))
        if nrm > budget:
            notes.append(f"‖Σι({name})‖ = {nrm:.3g} exceeds the truncation budget {budget}")
    for msg in notes:
        warnings.warn(msg, RuntimeWarning, stacklevel=2)

    def act(node, v):
        if isinstance(node, Gen):
            return F.weyl_apply(vec_of[node.name], v)
        if isinstance(node, Adjoint):
            return F.weyl_apply(-vec_of[node.arg.name], v)
        if isinstance(node, Scalar):
            return node.value * v
        if isinstance(node, Scaled):
            return node.scalar * act(node.arg, v)
        if isinstance(node, Prod):
            return act(node.left, act(node.right, v))
        if isinstance(node, Sum):
            return act(node.left, v) + act(node.right, v)
        raise TypeError(f"unknown node {node!r}")

    out = act(word.ast, F.vacuum())
    exact = expect_exact(normalize(word), sigma)
    return TruncatedExpectation(exact, complex(out[0]), notes)


def _fmt_complex(c: complex) -> str:
    return f"({c.real:.6g}{c.imag:+.6g}i)"


def random_word(rng, names, max_length: int = 3, max_terms: int = 2) -> str:
    """Random word text: a sum of scaled products of generators and adjoints."""
    parts = []
    for _ in range(int(rng.integers(1, max_terms + 1))):
        length = int(rng.integers(1, max_length + 1))
        factors = []
        for _ in range(length):
            name = names[int(rng.integers(len(names)))]
            factors.append(f"W({name})*" if rng.random() < 0.5 else f"W({name})")
        c = complex(rng.normal(), rng.normal())
        parts.append(_fmt_complex(c) + " * " + " ".join(factors))
    return " + ".join(parts)
