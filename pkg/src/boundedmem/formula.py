"""Formulas of first-order real arithmetic: AST, SMT-LIB2 text, and statistics.

Terms are polynomials with rational coefficients built from :class:`Var`,
:class:`Const`, :class:`Add` and :class:`Mul`.  Atoms compare two terms.
Formulas combine atoms with the usual connectives and quantifiers.
The builder functions (``add``, ``conj`` and so on) flatten and simplify
trivially, and the printer and parser round-trip every tree they produce.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence, Union


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Add:
    args: tuple


@dataclass(frozen=True)
class Mul:
    args: tuple


Term = Union[Var, Const, Add, Mul]

CMP_OPS = ("=", "<=", "<", ">=", ">")


@dataclass(frozen=True)
class Cmp:
    op: str
    lhs: Term
    rhs: Term

    def __post_init__(self) -> None:
        if self.op not in CMP_OPS:
            raise ValueError(f"unknown comparison {self.op!r}")


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class Quant:
    """``kind`` is "exists" or "forall"; ``names`` are the bound variables."""

    kind: str
    names: tuple[str, ...]
    body: "Formula"

    def __post_init__(self) -> None:
        if self.kind not in ("exists", "forall"):
            raise ValueError(f"unknown quantifier {self.kind!r}")


Formula = Union[Cmp, And, Or, Not, Implies, BoolConst, Quant]

TRUE = BoolConst(True)
FALSE = BoolConst(False)
ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def const(x) -> Const:
    return Const(Fraction(x))


def as_term(x) -> Term:
    if isinstance(x, (Var, Const, Add, Mul)):
        return x
    if isinstance(x, str):
        return Var(x)
    return const(x)


def add(*xs) -> Term:
    args = []
    for x in xs:
        t = as_term(x)
        if isinstance(t, Add):
            args.extend(t.args)
        elif t != ZERO:
            args.append(t)
    if not args:
        return ZERO
    if len(args) == 1:
        return args[0]
    return Add(tuple(args))


def mul(*xs) -> Term:
    args = []
    for x in xs:
        t = as_term(x)
        if t == ZERO:
            return ZERO
        if isinstance(t, Mul):
            args.extend(t.args)
        elif t != ONE:
            args.append(t)
    if not args:
        return ONE
    if len(args) == 1:
        return args[0]
    return Mul(tuple(args))


def neg(x) -> Term:
    return mul(const(-1), x)


def sub(x, y) -> Term:
    return add(x, neg(y))


def eq(x, y) -> Cmp:
    return Cmp("=", as_term(x), as_term(y))


def le(x, y) -> Cmp:
    return Cmp("<=", as_term(x), as_term(y))


def lt(x, y) -> Cmp:
    return Cmp("<", as_term(x), as_term(y))


def ge(x, y) -> Cmp:
    return Cmp(">=", as_term(x), as_term(y))


def gt(x, y) -> Cmp:
    return Cmp(">", as_term(x), as_term(y))


def conj(*fs) -> Formula:
    args = []
    for f in fs:
        if isinstance(f, And):
            args.extend(f.args)
        elif f == FALSE:
            return FALSE
        elif f != TRUE:
            args.append(f)
    if not args:
        return TRUE
    if len(args) == 1:
        return args[0]
    return And(tuple(args))


def disj(*fs) -> Formula:
    args = []
    for f in fs:
        if isinstance(f, Or):
            args.extend(f.args)
        elif f == TRUE:
            return TRUE
        elif f != FALSE:
            args.append(f)
    if not args:
        return FALSE
    if len(args) == 1:
        return args[0]
    return Or(tuple(args))


def implies(a: Formula, b: Formula) -> Formula:
    return Implies(a, b)


def exists(names: Sequence[str], body: Formula) -> Formula:
    return Quant("exists", tuple(names), body) if names else body


def forall(names: Sequence[str], body: Formula) -> Formula:
    return Quant("forall", tuple(names), body) if names else body


# -- traversal ---------------------------------------------------------------


def term_vars(t: Term) -> Iterator[str]:
    if isinstance(t, Var):
        yield t.name
    elif isinstance(t, (Add, Mul)):
        for a in t.args:
            yield from term_vars(a)


def atoms(f: Formula) -> Iterator[Cmp]:
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Cmp):
            yield g
        elif isinstance(g, (And, Or)):
            stack.extend(reversed(g.args))
        elif isinstance(g, Not):
            stack.append(g.arg)
        elif isinstance(g, Implies):
            stack.extend([g.rhs, g.lhs])
        elif isinstance(g, Quant):
            stack.append(g.body)


def variables(f: Formula) -> list[str]:
    """Every variable name, bound or free, in order of first occurrence."""
    seen: dict[str, None] = {}

    def visit(g: Formula) -> None:
        if isinstance(g, Quant):
            for n in g.names:
                seen.setdefault(n)
            visit(g.body)
        elif isinstance(g, Cmp):
            for n in term_vars(g.lhs):
                seen.setdefault(n)
            for n in term_vars(g.rhs):
                seen.setdefault(n)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                visit(a)
        elif isinstance(g, Not):
            visit(g.arg)
        elif isinstance(g, Implies):
            visit(g.lhs)
            visit(g.rhs)

    visit(f)
    return list(seen)


def free_variables(f: Formula) -> list[str]:
    out: dict[str, None] = {}

    def visit(g: Formula, bound: frozenset) -> None:
        if isinstance(g, Quant):
            visit(g.body, bound | set(g.names))
        elif isinstance(g, Cmp):
            for n in list(term_vars(g.lhs)) + list(term_vars(g.rhs)):
                if n not in bound:
                    out.setdefault(n)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                visit(a, bound)
        elif isinstance(g, Not):
            visit(g.arg, bound)
        elif isinstance(g, Implies):
            visit(g.lhs, bound)
            visit(g.rhs, bound)

    visit(f, frozenset())
    return list(out)


def degree(t: Term) -> int:
    """Total degree of a term, read syntactically (no cancellation)."""
    if isinstance(t, Var):
        return 1
    if isinstance(t, Const):
        return 0
    if isinstance(t, Add):
        return max(degree(a) for a in t.args)
    return sum(degree(a) for a in t.args)


def alternation_depth(f: Formula) -> int:
    """Number of quantifier blocks along the deepest nesting path."""

    def walk(g: Formula, last: str | None) -> int:
        if isinstance(g, Quant):
            here = 0 if g.kind == last else 1
            return here + walk(g.body, g.kind)
        if isinstance(g, (And, Or)):
            return max((walk(a, last) for a in g.args), default=0)
        if isinstance(g, Not):
            # Negation swaps the quantifier kinds below it.
            flipped = {"exists": "forall", "forall": "exists"}.get(last)
            return walk(g.arg, flipped)
        if isinstance(g, Implies):
            flipped = {"exists": "forall", "forall": "exists"}.get(last)
            return max(walk(g.lhs, flipped), walk(g.rhs, last))
        return 0

    return walk(f, None)


@dataclass(frozen=True)
class FormulaStats:
    variable_count: int
    polynomial_count: int
    max_degree: int
    alternation_depth: int

    def to_json(self) -> dict:
        return {
            "variable_count": self.variable_count,
            "polynomial_count": self.polynomial_count,
            "max_degree": self.max_degree,
            "alternation_depth": self.alternation_depth,
        }


def stats(f: Formula) -> FormulaStats:
    """Distinct variables, atom occurrences, largest atom degree, quantifier blocks."""
    n_atoms = 0
    max_deg = 0
    for a in atoms(f):
        n_atoms += 1
        max_deg = max(max_deg, degree(a.lhs), degree(a.rhs))
    return FormulaStats(len(variables(f)), n_atoms, max_deg, alternation_depth(f))


# -- evaluation ---------------------------------------------------------------


def eval_term(t: Term, env: Mapping[str, Fraction]) -> Fraction:
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Add):
        return sum((eval_term(a, env) for a in t.args), Fraction(0))
    out = Fraction(1)
    for a in t.args:
        out *= eval_term(a, env)
        if not out:
            return out
    return out


def _compare(op: str, x: Fraction, y: Fraction) -> bool:
    if op == "=":
        return x == y
    if op == "<=":
        return x <= y
    if op == "<":
        return x < y
    if op == ">=":
        return x >= y
    return x > y


def evaluate(f: Formula, env: Mapping[str, Fraction]) -> bool:
    """Truth value of a quantifier-free formula under a full assignment."""
    if isinstance(f, Cmp):
        return _compare(f.op, eval_term(f.lhs, env), eval_term(f.rhs, env))
    if isinstance(f, And):
        return all(evaluate(a, env) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, env) for a in f.args)
    if isinstance(f, Not):
        return not evaluate(f.arg, env)
    if isinstance(f, Implies):
        return (not evaluate(f.lhs, env)) or evaluate(f.rhs, env)
    if isinstance(f, BoolConst):
        return f.value
    raise ValueError("cannot evaluate a quantified formula")


# -- SMT-LIB2 -----------------------------------------------------------------


def _num_text(x: Fraction) -> str:
    def nat(k: int) -> str:
        return str(k) if k >= 0 else f"(- {-k})"

    if x.denominator == 1:
        return nat(x.numerator)
    return f"(/ {nat(x.numerator)} {x.denominator})"


def _term_text(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return _num_text(t.value)
    op = "+" if isinstance(t, Add) else "*"
    return f"({op} " + " ".join(_term_text(a) for a in t.args) + ")"


def _formula_lines(f: Formula, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    if isinstance(f, Cmp):
        out.append(f"{pad}({f.op} {_term_text(f.lhs)} {_term_text(f.rhs)})")
        return
    if isinstance(f, BoolConst):
        out.append(pad + ("true" if f.value else "false"))
        return
    flat = _formula_flat(f)
    if len(flat) + len(pad) <= 100:
        out.append(pad + flat)
        return
    if isinstance(f, (And, Or)):
        out.append(f"{pad}({'and' if isinstance(f, And) else 'or'}")
        for a in f.args:
            _formula_lines(a, indent + 1, out)
        out.append(pad + ")")
    elif isinstance(f, Not):
        out.append(f"{pad}(not")
        _formula_lines(f.arg, indent + 1, out)
        out.append(pad + ")")
    elif isinstance(f, Implies):
        out.append(f"{pad}(=>")
        _formula_lines(f.lhs, indent + 1, out)
        _formula_lines(f.rhs, indent + 1, out)
        out.append(pad + ")")
    else:
        binders = " ".join(f"({n} Real)" for n in f.names)
        out.append(f"{pad}({f.kind} ({binders})")
        _formula_lines(f.body, indent + 1, out)
        out.append(pad + ")")


def _formula_flat(f: Formula) -> str:
    if isinstance(f, Cmp):
        return f"({f.op} {_term_text(f.lhs)} {_term_text(f.rhs)})"
    if isinstance(f, BoolConst):
        return "true" if f.value else "false"
    if isinstance(f, And):
        return "(and " + " ".join(_formula_flat(a) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(_formula_flat(a) for a in f.args) + ")"
    if isinstance(f, Not):
        return f"(not {_formula_flat(f.arg)})"
    if isinstance(f, Implies):
        return f"(=> {_formula_flat(f.lhs)} {_formula_flat(f.rhs)})"
    binders = " ".join(f"({n} Real)" for n in f.names)
    return f"({f.kind} ({binders}) {_formula_flat(f.body)})"


def serialize_smt2(f: Formula) -> str:
    """An SMT-LIB2 script asserting ``f``; free variables become constants."""
    lines = ["(set-logic NRA)"]
    for name in free_variables(f):
        lines.append(f"(declare-const {name} Real)")
    body: list[str] = []
    _formula_lines(f, 1, body)
    if len(body) == 1:
        lines.append(f"(assert {body[0].strip()})")
    else:
        lines.append("(assert")
        lines.extend(body)
        lines.append(")")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


class ParseError(ValueError):
    pass


def _tokens(text: str) -> list[str]:
    out: list[str] = []
    k = 0
    n = len(text)
    while k < n:
        c = text[k]
        if c.isspace():
            k += 1
        elif c == ";":
            while k < n and text[k] != "\n":
                k += 1
        elif c in "()":
            out.append(c)
            k += 1
        else:
            start = k
            while k < n and not text[k].isspace() and text[k] not in "();":
                k += 1
            out.append(text[start:k])
    return out


def _sexprs(tokens: list[str]):
    stack: list[list] = [[]]
    for t in tokens:
        if t == "(":
            stack.append([])
        elif t == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced parenthesis")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(t)
    if len(stack) != 1:
        raise ParseError("unbalanced parenthesis")
    return stack[0]


def _is_numeral(s) -> bool:
    return isinstance(s, str) and s.isdigit()


def _number(s) -> Fraction | None:
    if _is_numeral(s):
        return Fraction(int(s))
    if isinstance(s, list) and len(s) == 2 and s[0] == "-" and _is_numeral(s[1]):
        return Fraction(-int(s[1]))
    if isinstance(s, list) and len(s) == 3 and s[0] == "/":
        a, b = _number(s[1]), _number(s[2])
        if a is not None and b is not None and b > 0 and b.denominator == 1:
            return a / b
    return None


def _term(s) -> Term:
    num = _number(s)
    if num is not None:
        return Const(num)
    if isinstance(s, str):
        return Var(s)
    if not s:
        raise ParseError("empty term")
    head, args = s[0], [_term(a) for a in s[1:]]
    if head == "+":
        return Add(tuple(args))
    if head == "*":
        return Mul(tuple(args))
    if head == "-":
        if len(args) == 1:
            return mul(const(-1), args[0])
        return add(args[0], *(neg(a) for a in args[1:]))
    raise ParseError(f"unsupported term operator {head!r}")


def _formula(s) -> Formula:
    if s == "true":
        return TRUE
    if s == "false":
        return FALSE
    if not isinstance(s, list) or not s:
        raise ParseError(f"not a formula: {s!r}")
    head = s[0]
    if head in CMP_OPS:
        if len(s) != 3:
            raise ParseError("comparisons take two arguments")
        return Cmp(head, _term(s[1]), _term(s[2]))
    if head == "and":
        return And(tuple(_formula(a) for a in s[1:]))
    if head == "or":
        return Or(tuple(_formula(a) for a in s[1:]))
    if head == "not":
        return Not(_formula(s[1]))
    if head == "=>":
        return Implies(_formula(s[1]), _formula(s[2]))
    if head in ("exists", "forall"):
        names = tuple(b[0] for b in s[1])
        return Quant(head, names, _formula(s[2]))
    raise ParseError(f"unsupported connective {head!r}")


def parse_smt2(text: str | bytes) -> Formula:
    """Read back a script written by :func:`serialize_smt2`.

    Several assertions are combined into one conjunction.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    asserted = []
    for cmd in _sexprs(_tokens(text)):
        if not isinstance(cmd, list) or not cmd:
            raise ParseError(f"unexpected top-level item {cmd!r}")
        if cmd[0] == "assert":
            asserted.append(_formula(cmd[1]))
        elif cmd[0] in ("set-logic", "declare-const", "declare-fun", "check-sat", "exit", "set-info", "set-option"):
            continue
        else:
            raise ParseError(f"unsupported command {cmd[0]!r}")
    if not asserted:
        return TRUE
    return asserted[0] if len(asserted) == 1 else And(tuple(asserted))
