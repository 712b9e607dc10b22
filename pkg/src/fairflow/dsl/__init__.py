"""Decision-program language: parse, typecheck, evaluate."""

from .ast import DecisionProgram, Param
from .parser import SourceProgram, parse_expr, parse_program
from .printer import format_expr, format_program
from .typecheck import WIDTH, ValidatedProgram, evaluate, typecheck


def load_program(path, constants: dict[str, int] | None = None) -> DecisionProgram:
    program = parse_program(SourceProgram.from_file(path))
    if constants:
        program = program.with_constants(
            {k: v for k, v in constants.items() if k in dict(program.constants)})
    return program


__all__ = [
    "DecisionProgram", "Param", "SourceProgram", "ValidatedProgram", "WIDTH",
    "evaluate", "format_expr", "format_program", "load_program", "parse_expr",
    "parse_program", "typecheck",
]
