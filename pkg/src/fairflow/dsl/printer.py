"""Pretty-printer producing source that re-parses to an identical AST."""

from __future__ import annotations

from .ast import Cond, DecisionProgram, Expr, If, Num, Return, Stmt, Unary, Var

# binding strength; higher binds tighter
_PREC = {"cond": 0, "or": 1, "and": 2, "not": 3, "cmp": 4, "+": 5, "-": 5, "*": 6, "neg": 7, "atom": 8}


def _prec(expr: Expr) -> int:
    if isinstance(expr, (Num, Var)):
        return _PREC["atom"]
    if isinstance(expr, Unary):
        return _PREC["neg"] if expr.op == "-" else _PREC["not"]
    if isinstance(expr, Cond):
        return _PREC["cond"]
    if expr.op in ("or", "and", "+", "-", "*"):
        return _PREC[expr.op]
    return _PREC["cmp"]


def format_expr(expr: Expr) -> str:
    if isinstance(expr, Num):
        return str(expr.value) if expr.value >= 0 else f"({expr.value})"
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Unary):
        inner = _wrap(expr.operand, _prec(expr))
        return f"-{inner}" if expr.op == "-" else f"not {inner}"
    if isinstance(expr, Cond):
        return (f"if {format_expr(expr.test)} then {format_expr(expr.then)} "
                f"else {format_expr(expr.orelse)}")
    p = _prec(expr)
    left = _wrap(expr.left, p)
    # left-associative operators need the right operand one level tighter;
    # comparisons are non-associative so both sides do
    right = _wrap(expr.right, p + 1)
    if expr.op in ("==", "!=", "<", "<=", ">", ">="):
        left = _wrap(expr.left, p + 1)
    return f"{left} {expr.op} {right}"


def _wrap(expr: Expr, min_prec: int) -> str:
    text = format_expr(expr)
    if _prec(expr) < min_prec:
        return f"({text})"
    return text


def _format_block(body: tuple[Stmt, ...], indent: int) -> list[str]:
    pad = "  " * indent
    lines: list[str] = []
    for stmt in body:
        if isinstance(stmt, Return):
            lines.append(f"{pad}return {format_expr(stmt.value)};")
        elif isinstance(stmt, If):
            lines.extend(_format_if(stmt, indent, pad))
        else:
            lines.append(f"{pad}{stmt.name} = {format_expr(stmt.value)};")
    return lines


def _format_if(stmt: If, indent: int, lead: str) -> list[str]:
    pad = "  " * indent
    # a leading Cond would be read as the statement's own keyword
    test = format_expr(stmt.test)
    if isinstance(stmt.test, Cond):
        test = f"({test})"
    lines = [f"{lead}if {test} {{"]
    lines += _format_block(stmt.body, indent + 1)
    if not stmt.orelse:
        lines.append(f"{pad}}}")
    elif len(stmt.orelse) == 1 and isinstance(stmt.orelse[0], If):
        nested = _format_if(stmt.orelse[0], indent, f"{pad}}} else ")
        lines += nested
    else:
        lines.append(f"{pad}}} else {{")
        lines += _format_block(stmt.orelse, indent + 1)
        lines.append(f"{pad}}}")
    return lines


def format_program(program: DecisionProgram) -> str:
    lines = [f"const {name} = {value};" for name, value in program.constants]
    params = ", ".join(p.name if p.domain is None else f"{p.name} : {p.domain}"
                       for p in program.params)
    lines.append(f"program {program.name}({params}) {{")
    lines += _format_block(program.body, 1)
    lines.append("}")
    return "\n".join(lines) + "\n"
