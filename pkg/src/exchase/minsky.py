"""Three-counter machines and their prime-product arithmetization.

A machine is a partial transition table over (state, counter-1 zero flag,
counter-2 zero flag); a configuration additionally carries a step counter
that only ever increments, so no configuration repeats. Configurations embed
into the naturals by enc(q_i, v1, v2, t) = p_i * p_{m+1}^v1 * p_{m+2}^v2 *
p_{m+3}^t over the first m+3 primes, and one machine step corresponds to
multiplying enc by a reduced fraction that depends only on enc mod
(p_1 * ... * p_{m+3}). Iterating that map from 2 (the encoding of the
initial configuration) yields the orbit G; the machine halts iff G is
bounded. The compiler turns the per-residue fractions into rule families.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping, Optional

from .model import ModelError

__all__ = [
    "ThreeCM",
    "Configuration",
    "Ratio",
    "PrimeBasis",
    "RunOutcome",
    "NonIntegralResult",
    "next_configuration",
    "enc",
    "ratio_for_residue",
    "g",
    "g_orbit",
    "run_machine",
]

_FLAGS = (0, 1)
_DELTAS = (-1, 0, 1)

DeltaKey = tuple[str, int, int]
DeltaVal = tuple[str, int, int]


class NonIntegralResult(ModelError):
    """g produced a non-integer; carries the offending fraction.

    Unreachable for natural arguments (every denominator prime of the
    selected ratio divides the argument by construction) but kept as a
    guard against malformed ratio tables.
    """

    def __init__(self, n: int, value: Fraction) -> None:
        super().__init__(f"g({n}) = {value} is not a natural number")
        self.value = value


class ThreeCM:
    """A three-counter machine: states, an initial state (the first one),
    and a partial delta: (state, flag1, flag2) -> (state, d1, d2)."""

    __slots__ = ("states", "_delta")

    def __init__(self, states: tuple[str, ...], delta: Mapping[DeltaKey, DeltaVal]):
        states = tuple(states)
        if not states:
            raise ModelError("a machine needs at least one state")
        if len(set(states)) != len(states):
            raise ModelError("duplicate state names")
        known = set(states)
        clean: dict[DeltaKey, DeltaVal] = {}
        for key, val in delta.items():
            frm, b1, b2 = key
            to, d1, d2 = val
            if frm not in known or to not in known:
                raise ModelError(f"transition {key} -> {val} uses undeclared state")
            if b1 not in _FLAGS or b2 not in _FLAGS:
                raise ModelError(f"flags must be 0 or 1 in {key}")
            if d1 not in _DELTAS or d2 not in _DELTAS:
                raise ModelError(f"counter deltas must be in -1..1 in {val}")
            clean[(frm, int(b1), int(b2))] = (to, int(d1), int(d2))
        self.states = states
        self._delta = clean

    @property
    def initial(self) -> str:
        return self.states[0]

    @property
    def delta(self) -> Mapping[DeltaKey, DeltaVal]:
        return MappingProxyType(self._delta)

    def transition(self, state: str, b1: int, b2: int) -> Optional[DeltaVal]:
        return self._delta.get((state, b1, b2))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ThreeCM):
            return NotImplemented
        return self.states == other.states and self._delta == other._delta

    def __hash__(self) -> int:
        return hash((self.states, frozenset(self._delta.items())))

    def __repr__(self) -> str:
        return f"ThreeCM(states={self.states!r}, delta={len(self._delta)} entries)"

    # -- machine file format ---------------------------------------------------

    @classmethod
    def from_json(cls, obj: object) -> "ThreeCM":
        if not isinstance(obj, dict):
            raise ModelError("machine JSON must be an object")
        states = obj.get("states")
        rows = obj.get("delta", [])
        if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
            raise ModelError('machine JSON needs "states": [str, ...]')
        if not isinstance(rows, list):
            raise ModelError('machine JSON "delta" must be a list of rows')
        delta: dict[DeltaKey, DeltaVal] = {}
        for row in rows:
            if not isinstance(row, dict):
                raise ModelError(f"delta row {row!r} is not an object")
            try:
                key = (row["from"], int(row["b1"]), int(row["b2"]))
                val = (row["to"], int(row["d1"]), int(row["d2"]))
            except (KeyError, TypeError, ValueError) as e:
                raise ModelError(f"bad delta row {row!r}: {e}") from None
            if key in delta:
                raise ModelError(f"duplicate delta row for {key}")
            delta[key] = val
        return cls(tuple(states), delta)

    def to_json(self) -> dict:
        rows = [
            {"from": frm, "b1": b1, "b2": b2, "to": to, "d1": d1, "d2": d2}
            for (frm, b1, b2), (to, d1, d2) in sorted(self._delta.items())
        ]
        return {"states": list(self.states), "delta": rows}


@dataclass(frozen=True, slots=True)
class Configuration:
    state: str
    v1: int
    v2: int
    t: int


@dataclass(frozen=True, slots=True)
class Ratio:
    """A reduced positive fraction num/den."""

    num: int
    den: int

    def __post_init__(self) -> None:
        if self.num <= 0 or self.den <= 0:
            raise ModelError(f"ratio must be positive, got {self.num}/{self.den}")
        d = math.gcd(self.num, self.den)
        if d != 1:
            object.__setattr__(self, "num", self.num // d)
            object.__setattr__(self, "den", self.den // d)

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"


@lru_cache(maxsize=None)
def _first_primes(k: int) -> tuple[int, ...]:
    primes: list[int] = []
    n = 2
    while len(primes) < k:
        if all(n % q for q in primes):
            primes.append(n)
        n += 1
    return tuple(primes)


@dataclass(frozen=True, slots=True)
class PrimeBasis:
    """The first m+3 primes for an m-state machine and their product p."""

    primes: tuple[int, ...]
    p: int

    @classmethod
    def for_machine(cls, machine: ThreeCM) -> "PrimeBasis":
        return cls.of_size(len(machine.states))

    @classmethod
    def of_size(cls, m: int) -> "PrimeBasis":
        primes = _first_primes(m + 3)
        return cls(primes, math.prod(primes))


# ---------------------------------------------------------------------------
# Machine semantics
# ---------------------------------------------------------------------------

def next_configuration(
    machine: ThreeCM, config: Configuration
) -> Optional[Configuration]:
    """One machine step; None when delta is undefined (the machine halts).
    Counter decrements clamp at zero."""
    b1 = 1 if config.v1 > 0 else 0
    b2 = 1 if config.v2 > 0 else 0
    trans = machine.transition(config.state, b1, b2)
    if trans is None:
        return None
    to, d1, d2 = trans
    return Configuration(
        to, max(config.v1 + d1, 0), max(config.v2 + d2, 0), config.t + 1
    )


def initial_configuration(machine: ThreeCM) -> Configuration:
    return Configuration(machine.initial, 0, 0, 0)


@dataclass(frozen=True, slots=True)
class RunOutcome:
    kind: str  # "halted" | "running"
    steps: Optional[int]

    def __str__(self) -> str:
        return f"halted({self.steps})" if self.kind == "halted" else "running"


def run_machine(machine: ThreeCM, max_steps: int) -> RunOutcome:
    """Iterate from the initial configuration; halted(k) when the k-th step
    finds delta undefined, running if max_steps steps all succeed."""
    config = initial_configuration(machine)
    for k in range(max_steps + 1):
        nxt = next_configuration(machine, config)
        if nxt is None:
            return RunOutcome("halted", k)
        if k == max_steps:
            break
        config = nxt
    return RunOutcome("running", None)


# ---------------------------------------------------------------------------
# Arithmetization
# ---------------------------------------------------------------------------

def enc(machine: ThreeCM, config: Configuration) -> int:
    """enc(q_i, v1, v2, t) = p_i * p_{m+1}^v1 * p_{m+2}^v2 * p_{m+3}^t."""
    try:
        i = machine.states.index(config.state)
    except ValueError:
        raise ModelError(f"state {config.state!r} not declared") from None
    basis = PrimeBasis.for_machine(machine)
    m = len(machine.states)
    return (
        basis.primes[i]
        * basis.primes[m] ** config.v1
        * basis.primes[m + 1] ** config.v2
        * basis.primes[m + 2] ** config.t
    )


def ratio_for_residue(machine: ThreeCM, i: int) -> Ratio:
    """The factor enc(next(C))/enc(C) shared by all C with enc(C) ≡ i (mod p).

    Decoding: the basis primes are pairwise coprime and p is squarefree, so
    p_j | enc(C) iff p_j | i. A valid residue is divisible by exactly one
    state prime; the counter-prime divisibilities give the zero flags. When
    the pattern is invalid or delta is undefined there, the ratio is 1/1.
    """
    basis = PrimeBasis.for_machine(machine)
    if not 0 <= i < basis.p:
        raise ModelError(f"residue {i} out of range [0, {basis.p})")
    m = len(machine.states)
    state_hits = [j for j in range(m) if i % basis.primes[j] == 0]
    if len(state_hits) != 1:
        return Ratio(1, 1)
    j = state_hits[0]
    p1, p2, pt = basis.primes[m], basis.primes[m + 1], basis.primes[m + 2]
    b1 = 1 if i % p1 == 0 else 0
    b2 = 1 if i % p2 == 0 else 0
    trans = machine.transition(machine.states[j], b1, b2)
    if trans is None:
        return Ratio(1, 1)
    to, d1, d2 = trans
    num = basis.primes[machine.states.index(to)] * pt
    den = basis.primes[j]
    for prime, flag, d in ((p1, b1, d1), (p2, b2, d2)):
        if d == 1:
            num *= prime
        elif d == -1 and flag == 1:
            den *= prime
        # d == -1 with the counter at zero clamps: the value stays 0 and
        # contributes no factor in either direction.
    return Ratio(num, den)


def g(machine: ThreeCM, n: int) -> int:
    """g(n) = ratio(n mod p) * n, always a natural for natural n."""
    if n < 1:
        raise ModelError(f"g is defined on naturals >= 1, got {n}")
    basis = PrimeBasis.for_machine(machine)
    ratio = ratio_for_residue(machine, n % basis.p)
    value = Fraction(n) * ratio.as_fraction()
    if value.denominator != 1:
        raise NonIntegralResult(n, value)
    return int(value)


def g_orbit(machine: ThreeCM, limit: int) -> tuple[list[int], bool, Optional[int]]:
    """Iterate g from 2: (orbit prefix, bounded, bound).

    bounded=True with bound=max(prefix) once a fixpoint is hit; after
    `limit` orbit elements without one, (prefix, False, None) — unbounded
    as far as the limit shows.
    """
    if limit < 1:
        raise ModelError("limit must be >= 1")
    prefix = [2]
    while len(prefix) < limit:
        nxt = g(machine, prefix[-1])
        if nxt == prefix[-1]:
            return prefix, True, max(prefix)
        prefix.append(nxt)
    if g(machine, prefix[-1]) == prefix[-1]:
        return prefix, True, max(prefix)
    return prefix, False, None
