"""Finite input domains and exact probability distributions.

All probabilities are :class:`fractions.Fraction`; nothing in here touches
floating point.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .errors import InvalidDistribution, SpaceError, SpaceTooLarge

DEFAULT_CAP = 10**8

Assignment = dict  # parameter name -> int


@dataclass(frozen=True)
class Domain:
    """Non-empty finite set of integers, kept sorted."""

    values: tuple[int, ...]

    def __post_init__(self):
        if not self.values:
            raise SpaceError("domain must be non-empty")
        if len(set(self.values)) != len(self.values):
            raise SpaceError(f"duplicate values in domain {self.values}")
        if list(self.values) != sorted(self.values):
            object.__setattr__(self, "values", tuple(sorted(self.values)))

    @classmethod
    def range(cls, lo: int, hi: int) -> "Domain":
        if hi < lo:
            raise SpaceError(f"empty range [{lo},{hi}]")
        return cls(tuple(range(lo, hi + 1)))

    @classmethod
    def of(cls, values: Iterable[int]) -> "Domain":
        return cls(tuple(sorted(values)))

    @property
    def lo(self) -> int:
        return self.values[0]

    @property
    def hi(self) -> int:
        return self.values[-1]

    @property
    def contiguous(self) -> bool:
        return self.hi - self.lo + 1 == len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[int]:
        return iter(self.values)

    def __contains__(self, value: object) -> bool:
        if self.contiguous:
            return isinstance(value, int) and self.lo <= value <= self.hi
        return value in self.values

    def issubset(self, other: "Domain") -> bool:
        return all(v in other for v in self.values)

    def __str__(self) -> str:
        if self.contiguous:
            return f"[{self.lo},{self.hi}]"
        return "{" + ",".join(map(str, self.values)) + "}"


def parse_probability(text: str | int | Fraction) -> Fraction:
    """Parse "3/10", "0.3" or an int into an exact fraction.

    Floats are refused: a binary float has no finite decimal intent.
    """
    if isinstance(text, bool):
        raise InvalidDistribution(f"not a probability: {text!r}")
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, float):
        raise InvalidDistribution(
            f"probability {text!r} given as a float; write it as a string like \"3/10\""
        )
    text = text.strip()
    if not re.fullmatch(r"[0-9]+(/[0-9]+|\.[0-9]+)?", text):
        raise InvalidDistribution(f"cannot parse probability {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidDistribution(f"cannot parse probability {text!r}") from exc


@dataclass(frozen=True)
class Distribution:
    """Uniform, or an explicit pmf over a subset of the domain."""

    domain: Domain
    pmf: tuple[tuple[int, Fraction], ...] | None = None

    def __post_init__(self):
        if self.pmf is None:
            return
        seen = set()
        total = Fraction(0)
        for value, p in self.pmf:
            if value in seen:
                raise InvalidDistribution(f"value {value} listed twice")
            seen.add(value)
            if value not in self.domain:
                raise InvalidDistribution(f"pmf value {value} outside domain {self.domain}")
            if p < 0:
                raise InvalidDistribution(f"negative probability for {value}")
            total += p
        if total != 1:
            raise InvalidDistribution(f"pmf sums to {total}, not 1")

    @classmethod
    def uniform(cls, domain: Domain) -> "Distribution":
        return cls(domain)

    @classmethod
    def from_pmf(cls, domain: Domain, pmf: Mapping[int, Fraction | str | int]) -> "Distribution":
        items = tuple(sorted((int(k), parse_probability(v)) for k, v in pmf.items()))
        return cls(domain, items)

    @property
    def is_uniform(self) -> bool:
        if self.pmf is None:
            return True
        probs = dict(self.pmf)
        target = Fraction(1, len(self.domain))
        return all(probs.get(v, Fraction(0)) == target for v in self.domain)

    def prob(self, value: int) -> Fraction:
        if value not in self.domain:
            return Fraction(0)
        if self.pmf is None:
            return Fraction(1, len(self.domain))
        return dict(self.pmf).get(value, Fraction(0))

    def items(self) -> list[tuple[int, Fraction]]:
        """(value, probability) for every domain value, zero-mass included."""
        if self.pmf is None:
            p = Fraction(1, len(self.domain))
            return [(v, p) for v in self.domain]
        probs = dict(self.pmf)
        return [(v, probs.get(v, Fraction(0))) for v in self.domain]

    def support(self) -> list[tuple[int, Fraction]]:
        return [(v, p) for v, p in self.items() if p > 0]

    def describe(self) -> object:
        if self.pmf is None:
            return "uniform"
        return {"pmf": {str(v): str(p) for v, p in self.pmf}}


@dataclass(frozen=True)
class Variable:
    name: str
    domain: Domain
    dist: Distribution

    @classmethod
    def uniform(cls, name: str, lo: int, hi: int) -> "Variable":
        dom = Domain.range(lo, hi)
        return cls(name, dom, Distribution.uniform(dom))

    def __post_init__(self):
        if self.dist.domain != self.domain:
            raise InvalidDistribution(f"{self.name}: distribution domain differs from variable domain")


@dataclass(frozen=True)
class InputSpace:
    """One protected input G and the components of U, mutually independent."""

    protected: Variable
    unprotected: tuple[Variable, ...] = ()
    cap: int = field(default=DEFAULT_CAP, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "unprotected", tuple(self.unprotected))
        names = [self.protected.name] + [v.name for v in self.unprotected]
        if len(set(names)) != len(names):
            raise SpaceError(f"duplicate input names {names}")

    @property
    def names(self) -> list[str]:
        return [self.protected.name] + self.u_names

    @property
    def u_names(self) -> list[str]:
        return [v.name for v in self.unprotected]

    @property
    def variables(self) -> list[Variable]:
        return [self.protected, *self.unprotected]

    def variable(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    @property
    def groups(self) -> tuple[int, ...]:
        return self.protected.domain.values

    def u_size(self) -> int:
        return math.prod(len(v.domain) for v in self.unprotected)

    def size(self) -> int:
        return len(self.protected.domain) * self.u_size()

    def u_points(self) -> Iterator[tuple[int, ...]]:
        """Every u tuple (ordered like ``unprotected``), zero-mass included."""
        return itertools.product(*(v.domain.values for v in self.unprotected))

    def with_protected_dist(self, dist: Distribution) -> "InputSpace":
        g = self.protected
        return InputSpace(Variable(g.name, g.domain, dist), self.unprotected, self.cap)

    def with_uniform_protected(self) -> "InputSpace":
        return self.with_protected_dist(Distribution.uniform(self.protected.domain))

    def with_unprotected(self, unprotected: Iterable[Variable]) -> "InputSpace":
        return InputSpace(self.protected, tuple(unprotected), self.cap)

    def _guard(self, n: int) -> None:
        if n > self.cap:
            raise SpaceTooLarge(f"{n} points exceed the enumeration cap of {self.cap}")

    def marginal_u(self) -> Iterator[tuple[tuple[int, ...], Fraction]]:
        """Yield (u, Pr[U=u]) over the full product of U's domains."""
        self._guard(self.u_size())
        columns = [v.dist.items() for v in self.unprotected]
        for combo in itertools.product(*columns):
            weight = Fraction(1)
            for _, p in combo:
                weight *= p
            yield tuple(value for value, _ in combo), weight

    def enumerate(self) -> Iterator[tuple[Assignment, Fraction]]:
        """Yield every point of G x U once with its product weight."""
        self._guard(self.size())
        g_name = self.protected.name
        u_names = self.u_names
        g_items = self.protected.dist.items()
        for u, pu in self.marginal_u():
            for g, pg in g_items:
                point = {g_name: g}
                point.update(zip(u_names, u))
                yield point, pg * pu

    def describe(self) -> dict:
        def var(v: Variable, role: str) -> dict:
            return {"name": v.name, "role": role, "domain": str(v.domain),
                    "dist": v.dist.describe()}
        return {"inputs": [var(self.protected, "protected")]
                + [var(v, "unprotected") for v in self.unprotected]}


def uniform_space(g: tuple[str, int, int], *us: tuple[str, int, int]) -> InputSpace:
    """Shorthand: ``uniform_space(("group", 0, 9), ("score", 1, 10))``."""
    return InputSpace(Variable.uniform(*g), tuple(Variable.uniform(*u) for u in us))


def enumerate_space(space: InputSpace) -> Iterator[tuple[Assignment, Fraction]]:
    return space.enumerate()


def marginal_u(space: InputSpace) -> Iterator[tuple[tuple[int, ...], Fraction]]:
    return space.marginal_u()
