"""Recursive-descent parser for decision programs.

Grammar (``#`` starts a line comment)::

    file    := const* "program" NAME "(" [param ("," param)*] ")" block
    const   := "const" NAME "=" ["-"] INT ";"
    param   := NAME [":" domain]
    domain  := "[" int "," int "]" | "{" int ("," int)* "}"
    block   := "{" stmt* "}"
    stmt    := "return" expr ";"
             | "if" expr block ["else" (if-stmt | block)]
             | NAME "=" expr ";"
    expr    := "if" expr "then" expr "else" expr | or
    or      := and ("or" and)*
    and     := not ("and" not)*
    not     := ("not" | "!") not | cmp
    cmp     := add [("==" | "!=" | "<" | "<=" | ">" | ">=") add]
    add     := mul (("+" | "-") mul)*
    mul     := unary ("*" unary)*
    unary   := "-" unary | INT | "true" | "false" | NAME | "(" expr ")"
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import DslSyntaxError
from ..spaces import Domain
from .ast import (COMPARISONS, Assign, Binary, Cond, DecisionProgram, Expr, If, Num,
                  Param, Return, Stmt, Unary, Var)
from .lexer import TokenStream, tokenize


@dataclass(frozen=True)
class SourceProgram:
    text: str
    origin: str = "<inline>"

    @classmethod
    def from_file(cls, path) -> "SourceProgram":
        with open(path, encoding="utf-8") as fh:
            return cls(fh.read(), str(path))


class ExprParser:
    def __init__(self, stream: TokenStream):
        self.ts = stream

    def expr(self) -> Expr:
        ts = self.ts
        tok = ts.accept("if")
        if tok is not None:
            test = self.expr()
            ts.expect("then")
            then = self.expr()
            ts.expect("else")
            orelse = self.expr()
            return Cond(test, then, orelse, tok.line)
        return self._or()

    def _or(self) -> Expr:
        left = self._and()
        while (tok := self.ts.accept("or")) is not None:
            left = Binary("or", left, self._and(), tok.line)
        return left

    def _and(self) -> Expr:
        left = self._not()
        while (tok := self.ts.accept("and")) is not None:
            left = Binary("and", left, self._not(), tok.line)
        return left

    def _not(self) -> Expr:
        tok = self.ts.accept("not", "!")
        if tok is not None:
            return Unary("not", self._not(), tok.line)
        return self._cmp()

    def _cmp(self) -> Expr:
        left = self._add()
        tok = self.ts.accept(*COMPARISONS)
        if tok is not None:
            left = Binary(tok.text, left, self._add(), tok.line)
            if self.ts.at(*COMPARISONS):
                raise self.ts.error("comparisons do not chain; add parentheses")
        return left

    def _add(self) -> Expr:
        left = self._mul()
        while (tok := self.ts.accept("+", "-")) is not None:
            left = Binary(tok.text, left, self._mul(), tok.line)
        return left

    def _mul(self) -> Expr:
        left = self._unary()
        while (tok := self.ts.accept("*")) is not None:
            left = Binary("*", left, self._unary(), tok.line)
        return left

    def _unary(self) -> Expr:
        ts = self.ts
        tok = ts.peek
        if ts.accept("-"):
            return Unary("-", self._unary(), tok.line)
        if tok.kind == "int":
            ts.advance()
            return Num(int(tok.text), tok.line)
        if ts.accept("true"):
            return Num(1, tok.line)
        if ts.accept("false"):
            return Num(0, tok.line)
        if tok.kind == "ident":
            ts.advance()
            return Var(tok.text, tok.line)
        if ts.accept("("):
            inner = self.expr()
            ts.expect(")")
            return inner
        raise ts.error("expected an expression",
                       ("integer", "name", "'('", "'-'", "'not'", "'true'", "'false'"))


def parse_signed_int(ts: TokenStream) -> int:
    neg = ts.accept("-") is not None
    tok = ts.expect_kind("int", "integer")
    return -int(tok.text) if neg else int(tok.text)


def parse_domain(ts: TokenStream) -> Domain:
    if ts.accept("["):
        lo = parse_signed_int(ts)
        ts.expect(",")
        hi = parse_signed_int(ts)
        close = ts.expect("]")
        if hi < lo:
            raise DslSyntaxError(f"empty range [{lo},{hi}]", ts.origin, close.line, close.column)
        return Domain.range(lo, hi)
    if ts.accept("{"):
        values = [parse_signed_int(ts)]
        while ts.accept(","):
            values.append(parse_signed_int(ts))
        close = ts.expect("}")
        if len(set(values)) != len(values):
            raise DslSyntaxError("duplicate value in domain", ts.origin, close.line, close.column)
        return Domain.of(values)
    raise ts.error("expected a domain", ("'['", "'{'"))


class ProgramParser(ExprParser):
    def program(self) -> DecisionProgram:
        ts = self.ts
        constants: list[tuple[str, int]] = []
        while ts.accept("const"):
            name = ts.expect_kind("ident", "name")
            ts.expect("=")
            value = parse_signed_int(ts)
            ts.expect(";")
            if any(n == name.text for n, _ in constants):
                raise DslSyntaxError(f"constant {name.text} declared twice", ts.origin,
                                     name.line, name.column)
            constants.append((name.text, value))
        ts.expect("program", *(() if constants else ("const",)))
        name = ts.expect_kind("ident", "program name").text
        ts.expect("(")
        params: list[Param] = []
        if not ts.at(")"):
            params.append(self.param())
            while ts.accept(","):
                params.append(self.param())
        ts.expect(")")
        body = self.block()
        if ts.peek.kind != "eof":
            raise ts.error("trailing input after program", ("end of input",))
        seen = set()
        for p in params:
            if p.name in seen:
                raise DslSyntaxError(f"parameter {p.name} declared twice", ts.origin)
            seen.add(p.name)
        return DecisionProgram(name, tuple(params), body, tuple(constants), ts.origin)

    def param(self) -> Param:
        name = self.ts.expect_kind("ident", "parameter name").text
        domain = parse_domain(self.ts) if self.ts.accept(":") else None
        return Param(name, domain)

    def block(self) -> tuple[Stmt, ...]:
        ts = self.ts
        ts.expect("{")
        stmts = []
        while not ts.accept("}"):
            stmts.append(self.stmt())
        return tuple(stmts)

    def stmt(self) -> Stmt:
        ts = self.ts
        tok = ts.peek
        if ts.accept("return"):
            value = self.expr()
            ts.expect(";")
            return Return(value, tok.line)
        if ts.accept("if"):
            return self._if_tail(tok.line)
        if tok.kind == "ident":
            ts.advance()
            ts.expect("=")
            value = self.expr()
            ts.expect(";")
            return Assign(tok.text, value, tok.line)
        raise ts.error("expected a statement", ("'return'", "'if'", "assignment", "'}'"))

    def _if_tail(self, line: int) -> If:
        test = self.expr()
        body = self.block()
        orelse: tuple[Stmt, ...] = ()
        if self.ts.accept("else"):
            nested = self.ts.peek
            if self.ts.accept("if"):
                orelse = (self._if_tail(nested.line),)
            else:
                orelse = self.block()
        return If(test, body, orelse, line)


def parse_program(src: SourceProgram | str) -> DecisionProgram:
    """Parse program source into a :class:`DecisionProgram`.

    Raises :class:`DslSyntaxError` carrying line, column and expected tokens.
    """
    if isinstance(src, str):
        src = SourceProgram(src)
    ts = TokenStream(tokenize(src.text, src.origin), src.origin)
    return ProgramParser(ts).program()


def parse_expr(text: str, origin: str = "<inline>") -> Expr:
    ts = TokenStream(tokenize(text, origin), origin)
    expr = ExprParser(ts).expr()
    if ts.peek.kind != "eof":
        raise ts.error("trailing input after expression", ("end of input",))
    return expr
