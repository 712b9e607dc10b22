"""Gate-level circuits and the bit-blaster for decision programs.

Wires are integers ``2 * node + neg``: node 0 is constant false, so wire 0 is
FALSE and wire 1 is TRUE, and negation is free (flip the low bit).  Gates are
AND, OR and XOR nodes; the builder folds constants and hashes structure, so
compiling ``score >= 8`` over a 4-bit input yields a handful of gates rather
than a full 32-bit comparator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ..dsl.ast import Assign, Cond, Expr, Num, Return, Stmt, Unary, Var
from ..dsl.typecheck import ValidatedProgram
from ..errors import WidthOverflow
from ..spaces import Domain, InputSpace

WIDTH = 32
FALSE, TRUE = 0, 1

BitVec = list  # list[int] of wires, least significant bit first


def neg(w: int) -> int:
    return w ^ 1


@dataclass
class InputVar:
    name: str
    role: str  # "protected" | "unprotected"
    domain: Domain
    bits: list[int]  # WIDTH wires, sign/zero extended
    free: list[int]  # the input wires that are actually free


@dataclass
class Circuit:
    """Acyclic gate list; every operand index is smaller than its gate's index."""

    nodes: list[tuple]  # ("const",) | ("in", label) | (op, wire_a, wire_b)
    inputs: list[InputVar] = field(default_factory=list)
    outputs: list[int] = field(default_factory=list)
    constraints: list[int] = field(default_factory=list)

    @property
    def gate_count(self) -> int:
        return sum(1 for n in self.nodes if n[0] in ("and", "or", "xor"))

    def input(self, name: str) -> InputVar:
        for iv in self.inputs:
            if iv.name == name:
                return iv
        raise KeyError(name)

    # -- evaluation -----------------------------------------------------------

    def evaluate_batch(self, assignments: Sequence[Mapping[str, int]]) -> tuple[list[int], list[bool]]:
        """Evaluate many assignments at once, one bit lane per assignment.

        Returns the signed output value and whether all side conditions held,
        per assignment.
        """
        n = len(assignments)
        if n == 0:
            return [], []
        full = (1 << n) - 1
        vals = [0] * len(self.nodes)
        lane = {}
        for iv in self.inputs:
            k = len(iv.free)
            if not k:
                continue
            mask = (1 << k) - 1
            # transpose through bit strings: row j is lane j, column i is bit k-1-i
            rows = [format(a[iv.name] & mask, f"0{k}b") for a in assignments]
            for i, column in enumerate(zip(*rows)):
                lane[iv.free[k - 1 - i] >> 1] = int("".join(reversed(column)), 2)

        def wire(w: int) -> int:
            v = vals[w >> 1]
            return v ^ full if w & 1 else v

        for idx, node in enumerate(self.nodes):
            op = node[0]
            if op == "const":
                vals[idx] = 0
            elif op == "in":
                vals[idx] = lane.get(idx, 0)
            elif op == "and":
                vals[idx] = wire(node[1]) & wire(node[2])
            elif op == "or":
                vals[idx] = wire(node[1]) | wire(node[2])
            else:
                vals[idx] = wire(node[1]) ^ wire(node[2])
        out_words = [wire(w) for w in self.outputs]
        ok = full
        for c in self.constraints:
            ok &= wire(c)
        # one reversed bit string per output bit; zip walks them lane by lane
        columns = [format(word, f"0{n}b")[::-1] for word in reversed(out_words)]
        signed = len(out_words) == WIDTH
        results = []
        for chars in zip(*columns):
            value = int("".join(chars), 2)
            if signed and value >> (WIDTH - 1):
                value -= 1 << WIDTH
            results.append(value)
        oks = format(ok, f"0{n}b")[::-1]
        return results, [c == "1" for c in oks]

    def evaluate(self, assignment: Mapping[str, int]) -> int:
        values, _ = self.evaluate_batch([assignment])
        return values[0]

    def mutated(self, node_index: int) -> "Circuit":
        """Copy with one gate's function swapped (AND<->OR, XOR->XNOR); for fault injection."""
        nodes = list(self.nodes)
        op, a, b = nodes[node_index]
        swap = {"and": "or", "or": "and"}
        if op == "xor":
            nodes[node_index] = ("xor", neg(a), b)
        else:
            nodes[node_index] = (swap[op], a, b)
        return Circuit(nodes, self.inputs, list(self.outputs), list(self.constraints))


class CircuitBuilder:
    def __init__(self):
        self.nodes: list[tuple] = [("const",)]
        self._hash: dict[tuple, int] = {}

    # -- single bits --------------------------------------------------------

    def new_input(self, label: str) -> int:
        self.nodes.append(("in", label))
        return 2 * (len(self.nodes) - 1)

    def _gate(self, op: str, a: int, b: int) -> int:
        if a > b:
            a, b = b, a
        key = (op, a, b)
        node = self._hash.get(key)
        if node is None:
            self.nodes.append(key)
            node = len(self.nodes) - 1
            self._hash[key] = node
        return 2 * node

    def AND(self, a: int, b: int) -> int:
        if a == FALSE or b == FALSE or a == neg(b):
            return FALSE
        if a == TRUE or a == b:
            return b
        if b == TRUE:
            return a
        return self._gate("and", a, b)

    def OR(self, a: int, b: int) -> int:
        if a == TRUE or b == TRUE or a == neg(b):
            return TRUE
        if a == FALSE or a == b:
            return b
        if b == FALSE:
            return a
        return self._gate("or", a, b)

    def XOR(self, a: int, b: int) -> int:
        flip = (a & 1) ^ (b & 1)
        a, b = a & ~1, b & ~1
        if a == b:
            return flip
        if a == FALSE:
            return b ^ flip
        if b == FALSE:
            return a ^ flip
        return self._gate("xor", a, b) ^ flip

    def MUX(self, s: int, a: int, b: int) -> int:
        """``a`` if ``s`` else ``b``."""
        if s == TRUE or a == b:
            return a
        if s == FALSE:
            return b
        return self.OR(self.AND(s, a), self.AND(neg(s), b))

    def any(self, bits: Iterable[int]) -> int:
        acc = FALSE
        for b in bits:
            acc = self.OR(acc, b)
        return acc

    def all(self, bits: Iterable[int]) -> int:
        acc = TRUE
        for b in bits:
            acc = self.AND(acc, b)
        return acc

    # -- bit-vectors ----------------------------------------------------------

    @staticmethod
    def const(value: int, width: int = WIDTH) -> BitVec:
        return [TRUE if (value >> i) & 1 else FALSE for i in range(width)]

    @staticmethod
    def bool_bv(bit: int) -> BitVec:
        return [bit] + [FALSE] * (WIDTH - 1)

    def add(self, a: BitVec, b: BitVec, carry: int = FALSE) -> BitVec:
        out = []
        for x, y in zip(a, b):
            t = self.XOR(x, y)
            out.append(self.XOR(t, carry))
            carry = self.OR(self.AND(x, y), self.AND(carry, t))
        return out

    def negate(self, a: BitVec) -> BitVec:
        return self.add([neg(x) for x in a], self.const(0, len(a)), TRUE)

    def sub(self, a: BitVec, b: BitVec) -> BitVec:
        return self.add(a, [neg(y) for y in b], TRUE)

    def mul(self, a: BitVec, b: BitVec) -> BitVec:
        width = len(a)
        # put the operand with fewer live bits in the multiplier position
        if sum(1 for w in a if w != FALSE) < sum(1 for w in b if w != FALSE):
            a, b = b, a
        acc = self.const(0, width)
        for i, bi in enumerate(b):
            if bi == FALSE:
                continue
            partial = [FALSE] * i + [self.AND(x, bi) for x in a[: width - i]]
            acc = self.add(acc, partial)
        return acc

    def eq(self, a: BitVec, b: BitVec) -> int:
        return self.all(neg(self.XOR(x, y)) for x, y in zip(a, b))

    def slt(self, a: BitVec, b: BitVec) -> int:
        """Signed a < b, computed without overflow in one extra bit."""
        diff = self.sub(a + [a[-1]], b + [b[-1]])
        return diff[-1]

    def mux_bv(self, s: int, a: BitVec, b: BitVec) -> BitVec:
        return [self.MUX(s, x, y) for x, y in zip(a, b)]

    def truthy(self, a: BitVec) -> int:
        return self.any(a)

    def build(self, inputs, outputs, constraints) -> Circuit:
        return Circuit(list(self.nodes), inputs, outputs, constraints)


# -- bit-blasting ------------------------------------------------------------------


def _input_width(domain: Domain) -> tuple[int, bool]:
    """(free bits, signed?) needed to represent every value in the domain."""
    lo, hi = domain.lo, domain.hi
    if lo >= 0:
        return max(1, hi.bit_length()), False
    k = 1
    while not (-(1 << (k - 1)) <= lo and hi <= (1 << (k - 1)) - 1):
        k += 1
    return k, True


class _Blaster:
    def __init__(self, builder: CircuitBuilder):
        self.b = builder

    def expr(self, e: Expr, env: dict[str, BitVec]) -> BitVec:
        b = self.b
        if isinstance(e, Num):
            return b.const(e.value)
        if isinstance(e, Var):
            return env[e.name]
        if isinstance(e, Unary):
            inner = self.expr(e.operand, env)
            if e.op == "-":
                return b.negate(inner)
            return b.bool_bv(neg(b.truthy(inner)))
        if isinstance(e, Cond):
            test = b.truthy(self.expr(e.test, env))
            return b.mux_bv(test, self.expr(e.then, env), self.expr(e.orelse, env))
        x, y = self.expr(e.left, env), self.expr(e.right, env)
        op = e.op
        if op == "+":
            return b.add(x, y)
        if op == "-":
            return b.sub(x, y)
        if op == "*":
            return b.mul(x, y)
        if op == "and":
            return b.bool_bv(b.AND(b.truthy(x), b.truthy(y)))
        if op == "or":
            return b.bool_bv(b.OR(b.truthy(x), b.truthy(y)))
        if op == "==":
            return b.bool_bv(b.eq(x, y))
        if op == "!=":
            return b.bool_bv(neg(b.eq(x, y)))
        if op == "<":
            return b.bool_bv(b.slt(x, y))
        if op == ">":
            return b.bool_bv(b.slt(y, x))
        if op == "<=":
            return b.bool_bv(neg(b.slt(y, x)))
        return b.bool_bv(neg(b.slt(x, y)))  # >=

    def block(self, body: tuple[Stmt, ...], env: dict[str, BitVec], done: int,
              ret: BitVec) -> tuple[dict[str, BitVec], int, BitVec]:
        b = self.b
        env = dict(env)
        for stmt in body:
            if isinstance(stmt, Assign):
                env[stmt.name] = self.expr(stmt.value, env)
            elif isinstance(stmt, Return):
                ret = b.mux_bv(done, ret, self.expr(stmt.value, env))
                done = TRUE
            else:
                test = b.truthy(self.expr(stmt.test, env))
                env_t, done_t, ret_t = self.block(stmt.body, env, done, ret)
                env_e, done_e, ret_e = self.block(stmt.orelse, env, done, ret)
                env = {k: b.mux_bv(test, env_t[k], env_e[k]) for k in env_t.keys() & env_e.keys()}
                done = b.MUX(test, done_t, done_e)
                ret = b.mux_bv(test, ret_t, ret_e)
        return env, done, ret


def _domain_constraint(b: CircuitBuilder, x: BitVec, domain: Domain) -> int:
    if domain.contiguous:
        above = neg(b.slt(x, b.const(domain.lo)))
        below = neg(b.slt(b.const(domain.hi), x))
        return b.AND(above, below)
    return b.any(b.eq(x, b.const(v)) for v in domain.values)


def bitblast(program: ValidatedProgram, space: InputSpace) -> Circuit:
    """Compile a typechecked program to a circuit over the space's input bits.

    The protected input comes first in ``inputs``, then the unprotected ones in
    space order.  Domain membership of every input is a side condition.
    """
    b = CircuitBuilder()
    env: dict[str, BitVec] = {}
    inputs: list[InputVar] = []
    constraints: list[int] = []
    for role, var in [("protected", space.protected)] + [("unprotected", v) for v in space.unprotected]:
        dom = var.domain
        if dom.lo < -(1 << (WIDTH - 1)) or dom.hi > (1 << (WIDTH - 1)) - 1:
            raise WidthOverflow(f"domain of {var.name} is not encodable in {WIDTH} bits")
        k, signed = _input_width(dom)
        free = [b.new_input(f"{var.name}[{i}]") for i in range(k)]
        fill = free[-1] if signed else FALSE
        bits = free + [fill] * (WIDTH - k)
        env[var.name] = bits
        inputs.append(InputVar(var.name, role, dom, bits, free))
        constraints.append(_domain_constraint(b, bits, dom))
    missing = set(program.param_names) - set(env)
    if missing:
        raise WidthOverflow(f"space does not provide inputs {sorted(missing)}")
    for cname, cvalue in program.program.constants:
        env[cname] = b.const(cvalue)
    blaster = _Blaster(b)
    _, done, ret = blaster.block(program.program.body, env, FALSE, b.const(0))
    assert done == TRUE, "typechecked program must return on every path"
    return b.build(inputs, ret, [c for c in constraints if c != TRUE])
