"""Predicate mini-language for clinical consistency rules.

Grammar (``and``/``or`` bind equally and associate left; parenthesize to
group)::

    expr       := clause (('and' | 'or') clause)*
    clause     := ['not'] (comparison | '(' expr ')')
    comparison := column op (literal | column) | 'is_missing(' column ')'
    op         := '==' | '!=' | '<' | '<=' | '>' | '>='

Ordering operators require numeric (or event-time) columns; equality works on
categorical columns with string literals and on numeric columns with number
literals.  Column-to-column comparisons require both columns numeric for
ordering ops, or the same comparability class for equality.  A comparison with
a missing operand evaluates to false; test missingness explicitly with
``is_missing``.

A rules file holds one rule per line as ``name: expression``; ``#`` starts a
comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .data import CategoricalColumn, Dataset
from .errors import RuleSyntaxError, TypeMismatch, UnknownColumn
from .schema import Schema

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>-?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|>=|<|>)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<string>"(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*')
    """,
    re.VERBOSE,
)

_KEYWORDS = {"and", "or", "not", "is_missing"}
ORDER_OPS = ("<", "<=", ">", ">=")
EQUALITY_OPS = ("==", "!=")


@dataclass(frozen=True)
class Token:
    kind: str        # number | ident | op | lparen | rparen | string | keyword | eof
    text: str
    position: int    # 1-based character offset


def tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise RuleSyntaxError(f"unexpected character {text[pos]!r}", pos + 1)
        pos = m.end()
        kind = m.lastgroup
        if kind == "ws":
            continue
        value = m.group()
        if kind == "string" and not (len(value) >= 2 and value[-1] == value[0]):
            raise RuleSyntaxError("unterminated string", m.start() + 1)
        if kind == "ident" and value in _KEYWORDS:
            kind = "keyword"
        tokens.append(Token(kind, value, m.start() + 1))
    tokens.append(Token("eof", "", len(text) + 1))
    return tokens


# --- AST nodes ---

@dataclass(frozen=True)
class ColumnRef:
    name: str
    position: int


@dataclass(frozen=True)
class Literal:
    value: object      # float or str
    position: int


@dataclass(frozen=True)
class Comparison:
    left: ColumnRef
    op: str
    right: object      # Literal | ColumnRef
    position: int


@dataclass(frozen=True)
class IsMissing:
    column: ColumnRef
    position: int


@dataclass(frozen=True)
class Not:
    operand: object
    position: int


@dataclass(frozen=True)
class BoolOp:
    op: str            # and | or
    left: object
    right: object
    position: int


@dataclass(frozen=True)
class ClinicalRule:
    name: str
    expression: object
    text: str
    severity: str = "error"


class _Parser:
    def __init__(self, tokens, schema: Schema):
        self.tokens = tokens
        self.schema = schema
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind, text=None, expected=()):
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            what = tok.text or "end of input"
            raise RuleSyntaxError(f"unexpected {what!r}", tok.position,
                                  expected or (text or kind,))
        return self.advance()

    def column(self, tok: Token) -> ColumnRef:
        if tok.text not in self.schema:
            raise UnknownColumn(tok.text, tok.position)
        return ColumnRef(tok.text, tok.position)

    def parse(self):
        expr = self.expr()
        tok = self.peek()
        if tok.kind != "eof":
            raise RuleSyntaxError(f"unexpected {tok.text!r}", tok.position,
                                  ("'and'", "'or'", "end of rule"))
        return expr

    def expr(self):
        left = self.clause()
        while self.peek().kind == "keyword" and self.peek().text in ("and", "or"):
            op = self.advance()
            right = self.clause()
            left = BoolOp(op.text, left, right, op.position)
        return left

    def clause(self):
        tok = self.peek()
        if tok.kind == "keyword" and tok.text == "not":
            self.advance()
            return Not(self.clause(), tok.position)
        if tok.kind == "lparen":
            self.advance()
            inner = self.expr()
            self.expect("rparen", expected=("')'",))
            return inner
        if tok.kind == "keyword" and tok.text == "is_missing":
            self.advance()
            self.expect("lparen", expected=("'('",))
            name = self.expect("ident", expected=("column name",))
            ref = self.column(name)
            self.expect("rparen", expected=("')'",))
            return IsMissing(ref, tok.position)
        if tok.kind == "ident":
            return self.comparison()
        what = tok.text or "end of input"
        raise RuleSyntaxError(
            f"unexpected {what!r}", tok.position,
            ("column name", "'not'", "'('", "'is_missing'"),
        )

    def comparison(self):
        left = self.column(self.advance())
        op_tok = self.peek()
        if op_tok.kind != "op":
            what = op_tok.text or "end of input"
            raise RuleSyntaxError(f"unexpected {what!r}", op_tok.position,
                                  ("comparison operator",))
        self.advance()
        rhs_tok = self.peek()
        if rhs_tok.kind == "number":
            self.advance()
            right = Literal(float(rhs_tok.text), rhs_tok.position)
        elif rhs_tok.kind == "string":
            self.advance()
            raw = rhs_tok.text[1:-1]
            right = Literal(re.sub(r"\\(.)", r"\1", raw), rhs_tok.position)
        elif rhs_tok.kind == "ident":
            self.advance()
            right = self.column(rhs_tok)
        else:
            what = rhs_tok.text or "end of input"
            raise RuleSyntaxError(f"unexpected {what!r}", rhs_tok.position,
                                  ("literal", "column name"))
        node = Comparison(left, op_tok.text, right, op_tok.position)
        self.typecheck(node)
        return node

    def typecheck(self, node: Comparison):
        left_spec = self.schema.column(node.left.name)
        if isinstance(node.right, ColumnRef):
            right_spec = self.schema.column(node.right.name)
            if node.op in ORDER_OPS:
                for spec, ref in ((left_spec, node.left), (right_spec, node.right)):
                    if not spec.is_numeric:
                        raise TypeMismatch(
                            f"ordering comparison needs numeric column, "
                            f"{spec.name!r} is {spec.kind}", ref.position)
            else:
                if left_spec.is_numeric != right_spec.is_numeric:
                    raise TypeMismatch(
                        f"cannot compare {left_spec.kind} column "
                        f"{left_spec.name!r} with {right_spec.kind} column "
                        f"{right_spec.name!r}", node.position)
            return
        literal_is_number = isinstance(node.right.value, float)
        if node.op in ORDER_OPS:
            if not left_spec.is_numeric:
                raise TypeMismatch(
                    f"ordering comparison needs numeric column, "
                    f"{left_spec.name!r} is {left_spec.kind}", node.left.position)
            if not literal_is_number:
                raise TypeMismatch("ordering comparison needs a number literal",
                                   node.right.position)
        else:
            if left_spec.is_numeric and not literal_is_number:
                raise TypeMismatch(
                    f"numeric column {left_spec.name!r} compared with a string",
                    node.right.position)
            if not left_spec.is_numeric and literal_is_number:
                raise TypeMismatch(
                    f"categorical column {left_spec.name!r} compared with a number",
                    node.right.position)


def parse_rule(text: str, schema: Schema, name: str = "rule",
               severity: str = "error") -> ClinicalRule:
    """Parse and type-check one rule expression against a schema."""
    parser = _Parser(tokenize(text), schema)
    return ClinicalRule(name=name, expression=parser.parse(), text=text,
                        severity=severity)


def parse_rules_file(path, schema: Schema) -> list:
    """Parse a rules file: one ``name: expression`` per line, ``#`` comments."""
    rules = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if ":" not in line:
                raise RuleSyntaxError(
                    f"line {lineno}: expected 'name: expression'", 1)
            name, expr_text = line.split(":", 1)
            name = name.strip()
            if not name:
                raise RuleSyntaxError(f"line {lineno}: empty rule name", 1)
            if name in seen:
                raise RuleSyntaxError(f"line {lineno}: duplicate rule name {name!r}", 1)
            seen.add(name)
            try:
                rules.append(parse_rule(expr_text.strip(), schema, name=name))
            except (RuleSyntaxError, UnknownColumn, TypeMismatch) as e:
                raise type(e)(f"line {lineno}: {e}", getattr(e, "position", 1)) \
                    from e
    return rules


_OP_FUNC = {
    "<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal,
}


def _numeric_compare(a, op, b):
    with np.errstate(invalid="ignore"):
        if op == "==":
            out = a == b
        elif op == "!=":
            out = a != b
        else:
            out = _OP_FUNC[op](a, b)
    return out & ~np.isnan(a) & ~np.isnan(b)


def evaluate_rule(rule: ClinicalRule, dataset: Dataset) -> np.ndarray:
    """Boolean array: rows where the rule's predicate holds."""
    return _eval(rule.expression, dataset)


def _eval(node, dataset: Dataset) -> np.ndarray:
    n = dataset.row_count
    if isinstance(node, BoolOp):
        left = _eval(node.left, dataset)
        right = _eval(node.right, dataset)
        return (left & right) if node.op == "and" else (left | right)
    if isinstance(node, Not):
        return ~_eval(node.operand, dataset)
    if isinstance(node, IsMissing):
        return dataset.missing_mask(node.column.name)
    if isinstance(node, Comparison):
        left_col = dataset.columns[node.left.name]
        if isinstance(node.right, ColumnRef):
            right_col = dataset.columns[node.right.name]
            if isinstance(left_col, CategoricalColumn):
                lv = np.array(
                    [left_col.levels[c] if c >= 0 else None for c in left_col.codes],
                    dtype=object)
                rv = np.array(
                    [right_col.levels[c] if c >= 0 else None
                     for c in right_col.codes], dtype=object)
                defined = (left_col.codes >= 0) & (right_col.codes >= 0)
                eq = (lv == rv) & defined
                return eq if node.op == "==" else (~eq & defined)
            return _numeric_compare(left_col.values, node.op, right_col.values)
        if isinstance(left_col, CategoricalColumn):
            value = node.right.value
            try:
                code = left_col.levels.index(value)
            except ValueError:
                code = None
            defined = left_col.codes >= 0
            if code is None:
                eq = np.zeros(n, dtype=bool)
            else:
                eq = left_col.codes == code
            return eq if node.op == "==" else (~eq & defined)
        return _numeric_compare(left_col.values, node.op,
                                np.float64(node.right.value))
    raise TypeError(f"unknown AST node {type(node).__name__}")
