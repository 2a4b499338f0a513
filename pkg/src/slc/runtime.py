"""Call-by-value evaluator with a seeded nonce generator and a use ledger.

Nonce payloads are 128-bit.  ``SeededPrng`` draws them from SplitMix64,
two outputs per nonce: the first output is the high 64 bits, the second
the low 64 bits.  ``encrypt(m, n)`` is ``m XOR low64(n)``; it is a toy
and provides no security.
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field

from .syntax import (
    App, BoolLit, If, IntLit, Lambda, Let, LetPair, Pair, Prim, PrimOp, Seq,
    Term, UnitLit, Var,
)

MASK64 = (1 << 64) - 1


class EvalError(Exception):
    """Dynamic failure; unreachable for programs the checker accepts."""


class EntropyUnavailable(Exception):
    pass


def to_signed64(x: int) -> int:
    x &= MASK64
    return x - (1 << 64) if x >> 63 else x


# --------------------------------------------------------------------------
# Nonce sources

class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


class NonceSource:
    """Produces nonce payloads and counts how many were issued."""

    def __init__(self):
        self.issued = 0

    def next_payload(self) -> int:
        raise NotImplementedError


class SeededPrng(NonceSource):
    def __init__(self, seed: int):
        super().__init__()
        if not 0 <= seed <= MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.seed = seed
        self._gen = SplitMix64(seed)

    def next_payload(self) -> int:
        hi = self._gen.next()
        lo = self._gen.next()
        return (hi << 64) | lo


class SystemEntropy(NonceSource):
    def next_payload(self) -> int:
        try:
            return int.from_bytes(os.urandom(16), "big")
        except (OSError, NotImplementedError) as exc:
            raise EntropyUnavailable(str(exc)) from exc


# --------------------------------------------------------------------------
# Values

@dataclass(frozen=True)
class UnitV:
    def __str__(self) -> str:
        return "()"


@dataclass(frozen=True)
class BoolV:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class IntV:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class NonceV:
    id: int
    payload: int = field(repr=False)

    def __str__(self) -> str:
        # The payload stays opaque.
        return f"<nonce #{self.id}>"


@dataclass(frozen=True)
class PairV:
    first: "Value"
    second: "Value"

    def __str__(self) -> str:
        return f"({self.first}, {self.second})"


@dataclass(frozen=True)
class ClosureV:
    param: str
    body: Term
    env: dict = field(compare=False, repr=False)

    def __str__(self) -> str:
        return "<fun>"


Value = UnitV | BoolV | IntV | NonceV | PairV | ClosureV


def fresh_nonce(source: NonceSource) -> NonceV:
    nonce = NonceV(source.issued, source.next_payload())
    source.issued += 1
    return nonce


@dataclass
class UseLedger:
    """How many times each nonce (by id) reached a consuming primitive."""

    counts: Counter = field(default_factory=Counter)

    def created(self, nonce: NonceV) -> None:
        self.counts[nonce.id] += 0

    def consumed(self, nonce: NonceV) -> None:
        self.counts[nonce.id] += 1

    def as_list(self) -> list[int]:
        return [self.counts[i] for i in sorted(self.counts)]

    def max_count(self) -> int:
        return max(self.counts.values(), default=0)


# --------------------------------------------------------------------------
# Evaluator

class _Evaluator:
    def __init__(self, source: NonceSource, ledger: UseLedger | None):
        self.source = source
        self.ledger = ledger

    def eval(self, term: Term, env: dict) -> Value:
        if isinstance(term, Var):
            try:
                return env[term.name]
            except KeyError:
                raise EvalError(f"unbound variable {term.name!r}") from None
        if isinstance(term, UnitLit):
            return UnitV()
        if isinstance(term, BoolLit):
            return BoolV(term.value)
        if isinstance(term, IntLit):
            return IntV(term.value)
        if isinstance(term, Lambda):
            return ClosureV(term.param, term.body, env)
        if isinstance(term, App):
            fn = self.eval(term.fn, env)
            arg = self.eval(term.arg, env)
            if not isinstance(fn, ClosureV):
                raise EvalError(f"cannot apply non-function value {fn}")
            return self.eval(fn.body, {**fn.env, fn.param: arg})
        if isinstance(term, Pair):
            first = self.eval(term.first, env)
            return PairV(first, self.eval(term.second, env))
        if isinstance(term, Let):
            bound = self.eval(term.bound, env)
            return self.eval(term.body, {**env, term.name: bound})
        if isinstance(term, LetPair):
            bound = self.eval(term.bound, env)
            if not isinstance(bound, PairV):
                raise EvalError(f"cannot destructure non-pair value {bound}")
            return self.eval(term.body, {**env, term.n1: bound.first, term.n2: bound.second})
        if isinstance(term, If):
            cond = self.eval(term.cond, env)
            if not isinstance(cond, BoolV):
                raise EvalError(f"condition is not a boolean: {cond}")
            return self.eval(term.then if cond.value else term.else_, env)
        if isinstance(term, Seq):
            self.eval(term.first, env)
            return self.eval(term.second, env)
        if isinstance(term, Prim):
            args = [self.eval(a, env) for a in term.args]
            return self.prim(term.op, args)
        raise TypeError(f"not a term: {term!r}")

    def prim(self, op: PrimOp, args: list[Value]) -> Value:
        if op is PrimOp.NEW_NONCE:
            self._expect(op, args, UnitV)
            nonce = fresh_nonce(self.source)
            if self.ledger is not None:
                self.ledger.created(nonce)
            return nonce
        if op is PrimOp.NONCE_GET:
            (n,) = self._expect(op, args, NonceV)
            self._consume(n)
            return IntV(to_signed64(n.payload))
        if op is PrimOp.ENCRYPT:
            m, n = self._expect(op, args, IntV, NonceV)
            self._consume(n)
            return IntV(to_signed64(m.value ^ n.payload))
        if op is PrimOp.INT_EQ:
            a, b = self._expect(op, args, IntV, IntV)
            return BoolV(a.value == b.value)
        if op is PrimOp.INT_ADD:
            a, b = self._expect(op, args, IntV, IntV)
            return IntV(to_signed64(a.value + b.value))
        raise EvalError(f"unknown primitive {op}")

    def _consume(self, nonce: NonceV) -> None:
        if self.ledger is not None:
            self.ledger.consumed(nonce)

    @staticmethod
    def _expect(op: PrimOp, args: list[Value], *kinds: type) -> list[Value]:
        if len(args) != len(kinds) or not all(isinstance(a, k) for a, k in zip(args, kinds)):
            shown = ", ".join(str(a) for a in args)
            raise EvalError(f"bad arguments to {op.value}: ({shown})")
        return args


def eval_term(term: Term, source: NonceSource) -> Value:
    """Evaluate a (type-checked) program."""
    return _Evaluator(source, None).eval(term, {})


def eval_instrumented(term: Term, source: NonceSource) -> tuple[Value, UseLedger]:
    """Evaluate any parsed program, counting consumptions of each nonce."""
    ledger = UseLedger()
    value = _Evaluator(source, ledger).eval(term, {})
    return value, ledger
