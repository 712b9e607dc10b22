"""Tseitin encoding of circuits and DIMACS export."""

from __future__ import annotations

from dataclasses import dataclass, field

from .circuit import FALSE, TRUE, Circuit


@dataclass
class CnfFormula:
    num_vars: int
    clauses: list[list[int]]
    g_vars: list[int] = field(default_factory=list)
    u_vars: list[int] = field(default_factory=list)
    d_vars: list[int] = field(default_factory=list)
    # per output bit: ("const", 0|1) or ("var", v), least significant first
    d_bits: list[tuple[str, int]] = field(default_factory=list)
    # per unprotected input: (name, [var per free bit], signed, free width)
    u_layout: list[tuple[str, list[int], bool]] = field(default_factory=list)

    @property
    def projection(self) -> list[int]:
        return self.u_vars + self.d_vars

    def check_model(self, model: list[bool]) -> bool:
        """True iff ``model`` (indexed by variable) satisfies every clause."""
        true = {v if model[v] else -v for v in range(1, self.num_vars + 1)}
        return all(not true.isdisjoint(clause) for clause in self.clauses)

    def decode(self, model: list[bool]) -> tuple[tuple[int, ...], int]:
        """Read (u, d) back out of a model."""
        u = []
        for _, vars_, signed in self.u_layout:
            value = sum(1 << i for i, v in enumerate(vars_) if model[v])
            if signed and model[vars_[-1]]:
                value -= 1 << len(vars_)
            u.append(value)
        d = 0
        for i, (kind, x) in enumerate(self.d_bits):
            bit = x if kind == "const" else int(model[x])
            d |= bit << i
        width = len(self.d_bits)
        if width and d >> (width - 1) and width == 32:
            d -= 1 << width
        return tuple(u), d

    def to_dimacs(self) -> str:
        lines = [f"c g-bits {' '.join(map(str, self.g_vars))}",
                 f"c u-bits {' '.join(map(str, self.u_vars))}",
                 f"c d-bits {' '.join(map(str, self.d_vars))}",
                 f"c ind {' '.join(map(str, self.projection))} 0",
                 f"p cnf {self.num_vars} {len(self.clauses)}"]
        lines += [" ".join(map(str, c)) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


def to_cnf(circuit: Circuit) -> CnfFormula:
    """Tseitin-encode the circuit; side conditions become unit clauses.

    Only gates in the cone of the outputs and side conditions get variables.
    Output bits reuse their gate variable when the bit is a positive gate wire
    used by no other output bit; otherwise a fresh variable is tied to it, so
    the D projection is always disjoint from the G and U bits.
    """
    nodes = circuit.nodes
    live = [False] * len(nodes)
    stack = [w >> 1 for w in list(circuit.outputs) + list(circuit.constraints)]
    for iv in circuit.inputs:
        stack += [w >> 1 for w in iv.free]
    while stack:
        n = stack.pop()
        if live[n]:
            continue
        live[n] = True
        if nodes[n][0] in ("and", "or", "xor"):
            stack += [nodes[n][1] >> 1, nodes[n][2] >> 1]

    var_of = {}
    for idx, node in enumerate(nodes):
        if live[idx] and node[0] != "const":
            var_of[idx] = len(var_of) + 1
    num_vars = len(var_of)

    def lit(w: int) -> int:
        v = var_of[w >> 1]
        return -v if w & 1 else v

    clauses: list[list[int]] = []
    for idx, node in enumerate(nodes):
        if not live[idx] or node[0] in ("const", "in"):
            continue
        c, a, b = var_of[idx], lit(node[1]), lit(node[2])
        if node[0] == "and":
            clauses += [[-c, a], [-c, b], [c, -a, -b]]
        elif node[0] == "or":
            clauses += [[c, -a], [c, -b], [-c, a, b]]
        else:
            clauses += [[-c, a, b], [-c, -a, -b], [c, -a, b], [c, a, -b]]

    for w in circuit.constraints:
        if w == TRUE:
            continue
        clauses.append([] if w == FALSE else [lit(w)])

    input_vars = set()
    g_vars: list[int] = []
    u_vars: list[int] = []
    u_layout = []
    for iv in circuit.inputs:
        vars_ = [var_of[w >> 1] for w in iv.free]
        input_vars.update(vars_)
        if iv.role == "protected":
            g_vars += vars_
        else:
            u_vars += vars_
            signed = iv.bits[-1] != FALSE
            u_layout.append((iv.name, vars_, signed))

    d_vars: list[int] = []
    d_bits: list[tuple[str, int]] = []
    used = set()
    for w in circuit.outputs:
        if w in (FALSE, TRUE):
            d_bits.append(("const", w))
            continue
        v = var_of[w >> 1]
        if w & 1 == 0 and v not in input_vars and v not in used:
            used.add(v)
        else:
            num_vars += 1
            fresh = num_vars
            clauses += [[-fresh, lit(w)], [fresh, -lit(w)]]
            v = fresh
        d_vars.append(v)
        d_bits.append(("var", v))

    return CnfFormula(num_vars, clauses, g_vars, u_vars, d_vars, d_bits, u_layout)
