"""Random LinLang program generator for fuzz and property tests.

Programs are closed and never shadow.  Generation is type-directed so most
terms are simply-typed, but variables are picked at random from scope, so
they end up used zero, one or several times and in any order.  A small
fraction of leaves is deliberately ill-typed.
"""

import random

from slc.syntax import (
    BOOL, INT, NONCE, UNIT, App, BoolLit, Fn, If, IntLit, Lambda, Let, LetPair,
    Pair, Prim, PrimOp, Prod, Seq, UnitLit, Var, children, free_vars,
)

SMALL_TYPES = [UNIT, BOOL, INT, NONCE, Prod(INT, NONCE), Fn(INT, INT), Fn(NONCE, INT), Fn(UNIT, INT)]


def depth(term) -> int:
    return 1 + max((depth(c) for c in children(term)), default=0)


def min_depth(ty) -> int:
    if ty == NONCE:
        return 2
    if isinstance(ty, Prod):
        return 1 + max(min_depth(ty.left), min_depth(ty.right))
    if isinstance(ty, Fn):
        return 1 + min_depth(ty.ret)
    return 1


class Generator:
    def __init__(self, rng: random.Random, noise: float = 0.05):
        self.rng = rng
        self.noise = noise
        self.counter = 0

    def fresh(self) -> str:
        self.counter += 1
        return f"v{self.counter}"

    def program(self, max_depth: int = 6):
        while True:
            ty = self.rng.choice([INT, BOOL, NONCE, UNIT, Prod(INT, BOOL)])
            term = self.gen(ty, max_depth, [])
            if depth(term) <= max_depth:
                return term

    def leaf(self, ty, scope):
        rng = self.rng
        if rng.random() < self.noise:
            return rng.choice([IntLit(rng.randint(0, 9)), BoolLit(rng.random() < 0.5), UnitLit()])
        if ty == UNIT:
            return UnitLit()
        if ty == BOOL:
            return BoolLit(rng.random() < 0.5)
        if ty == INT:
            return IntLit(rng.randint(0, 100))
        return None

    def use(self, ty, scope):
        """Pick an in-scope variable of type `ty`, favouring unused ones."""
        typed = [entry for entry in scope if entry[1] == ty]
        if not typed:
            return None
        unused = [entry for entry in typed if entry[2] == 0]
        entry = self.rng.choice(unused if unused and self.rng.random() < 0.85 else typed)
        entry[2] += 1
        return Var(entry[0])

    def gen(self, ty, d, scope):
        rng = self.rng
        if rng.random() < 0.6:
            var = self.use(ty, scope)
            if var is not None:
                return var
        if d <= 1 or rng.random() < 0.15:
            leaf = self.leaf(ty, scope)
            if leaf is not None:
                return leaf
            var = self.use(ty, scope)
            if var is not None:
                return var
        return self.compound(ty, d, scope)

    def compound(self, ty, d, scope):
        rng = self.rng
        options = ["intro"]
        if d >= 3:
            options += ["let", "let", "if", "app"]
            if d >= 4:
                options += ["letpair", "seq"]
        choice = rng.choice(options)
        if choice == "let":
            sub = self.pick_type(d - 1)
            name = self.fresh()
            bound = self.gen(sub, d - 1, scope)
            return Let(name, bound, self.gen(ty, d - 1, scope + [[name, sub, 0]]))
        if choice == "letpair":
            left, right = rng.choice([(INT, NONCE), (INT, BOOL), (NONCE, NONCE)])
            n1, n2 = self.fresh(), self.fresh()
            bound = self.gen(Prod(left, right), d - 1, scope)
            return LetPair(n1, n2, bound, self.gen(ty, d - 1, scope + [[n1, left, 0], [n2, right, 0]]))
        if choice == "if":
            return If(self.gen(BOOL, d - 1, scope), self.gen(ty, d - 1, scope), self.gen(ty, d - 1, scope))
        if choice == "app":
            arg = self.pick_type(d - 2)
            return App(self.gen(Fn(arg, ty), d - 1, scope), self.gen(arg, d - 1, scope))
        if choice == "seq":
            return Seq(self.gen(UNIT, d - 1, scope), self.gen(ty, d - 1, scope))
        return self.intro(ty, d, scope)

    def pick_type(self, budget):
        fits = [t for t in SMALL_TYPES if min_depth(t) <= max(budget, 1)]
        return self.rng.choice(fits or [INT])

    def intro(self, ty, d, scope):
        """A term whose head constructor produces `ty`."""
        rng = self.rng
        if ty == NONCE:
            return Prim(PrimOp.NEW_NONCE, (UnitLit(),))
        if ty == INT:
            op = rng.choice([PrimOp.INT_ADD, PrimOp.NONCE_GET, PrimOp.ENCRYPT])
            if op is PrimOp.NONCE_GET and d >= 3:
                return Prim(op, (self.gen(NONCE, d - 1, scope),))
            if op is PrimOp.ENCRYPT and d >= 3:
                return Prim(op, (self.gen(INT, d - 1, scope), self.gen(NONCE, d - 1, scope)))
            return Prim(PrimOp.INT_ADD, (self.gen(INT, d - 1, scope), self.gen(INT, d - 1, scope)))
        if ty == BOOL:
            if rng.random() < 0.5:
                return Prim(PrimOp.INT_EQ, (self.gen(INT, d - 1, scope), self.gen(INT, d - 1, scope)))
            return BoolLit(rng.random() < 0.5)
        if ty == UNIT:
            return UnitLit()
        if isinstance(ty, Prod):
            return Pair(self.gen(ty.left, d - 1, scope), self.gen(ty.right, d - 1, scope))
        if isinstance(ty, Fn):
            name = self.fresh()
            return Lambda(name, ty.arg, self.gen(ty.ret, d - 1, scope + [[name, ty.arg, 0]]))
        raise AssertionError(ty)

    def resource_program(self, max_depth: int = 6):
        """A few let-bound resources, then an Int body using them in a random order.

        The use sequence may repeat, omit or reorder variables, which is
        what tells the five modes apart.  Uses may sit inside a conditional
        or a closure, and a binding may itself be a closure that captures an
        earlier one.
        """
        rng = self.rng
        while True:
            k = rng.randint(1, 3)
            binds = []
            for _ in range(k):
                kinds = [INT, INT, NONCE, NONCE, BOOL]
                if binds:
                    kinds.append("closure")
                kind = rng.choice(kinds)
                name = self.fresh()
                if kind == "closure":
                    target, t, _ = rng.choice(binds)
                    bound = Lambda(self.fresh(), UNIT, self.as_int(target, t))
                    binds.append((name, Fn(UNIT, INT), bound))
                    continue
                bound = {INT: IntLit(rng.randint(0, 9)), BOOL: BoolLit(rng.random() < 0.5),
                         NONCE: Prim(PrimOp.NEW_NONCE, (UnitLit(),))}[kind]
                binds.append((name, kind, bound))
            word = [rng.randrange(k) for _ in range(rng.randint(0, k + 1))]
            parts = [self.use_form(binds[i][0], binds[i][1], binds) for i in word]
            body = parts[0] if parts else IntLit(0)
            for part in parts[1:]:
                body = Prim(PrimOp.INT_ADD, (body, part))
            term = body
            for name, _, bound in reversed(binds):
                term = Let(name, bound, term)
            if depth(term) <= max_depth:
                return term

    def use_form(self, name, ty, binds):
        rng = self.rng
        use = self.as_int(name, ty)
        form = rng.choice(["direct", "direct", "branch", "closure"])
        if form == "branch":
            other_name, other_ty, _ = rng.choice(binds)
            other = rng.choice([IntLit(0), self.as_int(other_name, other_ty)])
            arms = (use, other) if rng.random() < 0.5 else (other, use)
            return If(BoolLit(rng.random() < 0.5), *arms)
        if form == "closure":
            return App(Lambda(self.fresh(), UNIT, use), UnitLit())
        return use

    @staticmethod
    def as_int(name, ty):
        if ty == NONCE:
            return Prim(PrimOp.NONCE_GET, (Var(name),))
        if ty == BOOL:
            return If(Var(name), IntLit(1), IntLit(0))
        if isinstance(ty, Fn):
            return App(Var(name), UnitLit())
        return Var(name)

    def swappable(self, max_depth: int = 6):
        """A program with two adjacent independent lets, and its exchanged copy."""
        while True:
            if self.rng.random() < 0.5:
                term = self.resource_program(max_depth)
            else:
                term = self.program(max_depth)
            swapped = swap_adjacent_lets(term)
            if swapped is not None:
                return term, swapped


def swap_adjacent_lets(term):
    """Exchange the first pair ``let x = e1 in let y = e2 in b`` on the let spine
    where e2 does not mention x.  Returns None if there is no such pair."""
    if not isinstance(term, Let):
        return None
    inner = term.body
    if isinstance(inner, Let) and term.name not in {v.name for v in free_vars(inner.bound)}:
        return Let(inner.name, inner.bound, Let(term.name, term.bound, inner.body))
    rest = swap_adjacent_lets(inner)
    if rest is None:
        return None
    return Let(term.name, term.bound, rest)


def programs(seed: int, count: int, max_depth: int = 6):
    g = Generator(random.Random(seed))
    return [
        g.resource_program(max_depth) if i % 2 else g.program(max_depth)
        for i in range(count)
    ]
