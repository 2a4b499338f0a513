"""Mode-parameterized substructural type checker.

One context is threaded through the term in evaluation order.  Each mode
admits a fixed subset of the structural rules:

    ==============  ========  =========  ===========
    mode            exchange  weakening  contraction
    ==============  ========  =========  ===========
    unrestricted    yes       yes        yes
    affine          yes       yes        no
    relevant        yes       no         yes
    linear          yes       no         no
    ordered         no        no         no
    ==============  ========  =========  ===========

Without contraction a variable use *moves* the value out of its binding.
Without weakening every binding must be used before its scope ends.
Without exchange bindings must be used oldest first.

``Unit`` bindings hold no resource: they may be left unused and are not
subject to the ordering requirement.  Contraction still applies to them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from .syntax import (
    BOOL, INT, NONCE, UNIT, App, BoolLit, Fn, If, IntLit, Lambda, Let, LetPair,
    Pair, Prim, PrimOp, Prod, Seq, Span, Term, Type, UnitLit, Var, free_vars,
)


class Mode(enum.Enum):
    UNRESTRICTED = "unrestricted"
    AFFINE = "affine"
    RELEVANT = "relevant"
    LINEAR = "linear"
    ORDERED = "ordered"

    def __str__(self) -> str:
        return self.value


MODES = tuple(Mode)


@dataclass(frozen=True)
class StructuralRuleSet:
    exchange: bool
    weakening: bool
    contraction: bool


_RULES = {
    Mode.UNRESTRICTED: StructuralRuleSet(exchange=True, weakening=True, contraction=True),
    Mode.AFFINE: StructuralRuleSet(exchange=True, weakening=True, contraction=False),
    Mode.RELEVANT: StructuralRuleSet(exchange=True, weakening=False, contraction=True),
    Mode.LINEAR: StructuralRuleSet(exchange=True, weakening=False, contraction=False),
    Mode.ORDERED: StructuralRuleSet(exchange=False, weakening=False, contraction=False),
}


def rules_for(mode: Mode) -> StructuralRuleSet:
    return _RULES[mode]


class Code(str, enum.Enum):
    USE_AFTER_CONSUME = "UseAfterConsume"
    UNUSED_LINEAR = "UnusedLinear"
    UNUSED_RELEVANT = "UnusedRelevant"
    OUT_OF_ORDER_USE = "OutOfOrderUse"
    UNBOUND_VARIABLE = "UnboundVariable"
    TYPE_MISMATCH = "TypeMismatch"
    BRANCH_USE_MISMATCH = "BranchUseMismatch"
    ARITY_ERROR = "ArityError"
    PARSE_ERROR = "ParseError"
    LEX_ERROR = "LexError"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Diagnostic:
    code: Code
    span: Span
    message: str
    mode: Mode

    def to_json(self) -> dict:
        return {
            "code": self.code.value,
            "message": self.message,
            "line": self.span.line,
            "col": self.span.column,
            "len": self.span.length,
            "mode": self.mode.value,
        }

    def __str__(self) -> str:
        return f"{self.span}: {self.code.value}: {self.message}"


@dataclass
class Binding:
    name: str
    type: Type | None
    intro_index: int
    span: Span
    use_count: int = 0
    consumed: bool = False


@dataclass
class Context:
    """Ordered bindings, oldest first."""

    bindings: list[Binding] = field(default_factory=list)

    def lookup(self, name: str) -> Binding | None:
        for b in self.bindings:
            if b.name == name:
                return b
        return None

    def names(self) -> list[str]:
        return [b.name for b in self.bindings]

    def copy(self) -> Context:
        return Context([replace(b) for b in self.bindings])


PRIM_SIGNATURES: dict[PrimOp, tuple[tuple[Type, ...], Type]] = {
    PrimOp.NEW_NONCE: ((UNIT,), NONCE),
    PrimOp.NONCE_GET: ((NONCE,), INT),
    PrimOp.ENCRYPT: ((INT, NONCE), INT),
    PrimOp.INT_EQ: ((INT, INT), BOOL),
    PrimOp.INT_ADD: ((INT, INT), INT),
}


@dataclass
class CheckResult:
    type: Type | None
    diagnostics: list[Diagnostic]
    mode: Mode
    bindings: list[Binding] = field(default_factory=list, repr=False)

    @property
    def accepted(self) -> bool:
        return not self.diagnostics

    def verdict(self) -> str:
        if self.accepted:
            return "accept"
        return f"reject:{self.diagnostics[0].code.value}"


class Checker:
    """Checks terms under one mode, collecting diagnostics as it goes.

    ``bindings`` records every Binding created during the run (including
    branch copies) so tests can inspect final use counts.
    """

    def __init__(self, mode: Mode):
        self.mode = mode
        self.rules = rules_for(mode)
        self.diagnostics: list[Diagnostic] = []
        self.bindings: list[Binding] = []
        self._next_index = 0

    def report(self, code: Code, span: Span, message: str) -> None:
        self.diagnostics.append(Diagnostic(code, span, message, self.mode))

    def expect_type(self, expected: Type, actual: Type | None, span: Span, what: str) -> None:
        if actual is not None and actual != expected:
            self.report(Code.TYPE_MISMATCH, span, f"{what}: expected {expected}, found {actual}")

    # context operations

    def bind(self, ctx: Context, name: str, ty: Type | None, span: Span) -> Binding:
        if ctx.lookup(name) is not None:
            raise ValueError(f"binding {name!r} shadows a live binding")
        binding = Binding(name, ty, self._next_index, span)
        self._next_index += 1
        ctx.bindings.append(binding)
        self.bindings.append(binding)
        return binding

    def use_variable(self, ctx: Context, name: str, span: Span) -> Type | None:
        binding = ctx.lookup(name)
        if binding is None:
            self.report(Code.UNBOUND_VARIABLE, span, f"unbound variable `{name}`")
            return None
        if self.rules.contraction:
            binding.use_count += 1
            binding.consumed = True
            return binding.type
        if binding.consumed:
            # Recovery: leave the binding as it is and keep going.
            self.report(
                Code.USE_AFTER_CONSUME, span,
                f"value used here after move: `{name}` was already consumed",
            )
            return binding.type
        if not self.rules.exchange and binding.type != UNIT:
            oldest = next(
                b for b in ctx.bindings if not b.consumed and b.type != UNIT
            )
            if oldest is not binding:
                self.report(
                    Code.OUT_OF_ORDER_USE, span,
                    f"`{name}` used before older binding `{oldest.name}`",
                )
        binding.use_count += 1
        binding.consumed = True
        return binding.type

    def exit_scope(self, ctx: Context, name: str) -> None:
        binding = ctx.lookup(name)
        ctx.bindings.remove(binding)
        if binding.use_count or self.rules.weakening or binding.type == UNIT:
            return
        if self.rules.contraction:
            self.report(Code.UNUSED_RELEVANT, binding.span,
                        f"`{name}` must be used at least once")
        else:
            self.report(Code.UNUSED_LINEAR, binding.span,
                        f"`{name}` must be used exactly once but is never used")

    def check_branches(self, ctx_then: Context, ctx_else: Context, span: Span) -> Context:
        merged = Context()
        mismatched = []
        for bt, be in zip(ctx_then.bindings, ctx_else.bindings):
            b = replace(bt, use_count=max(bt.use_count, be.use_count),
                        consumed=bt.consumed or be.consumed)
            if bt.consumed != be.consumed and not self.rules.weakening and b.type != UNIT:
                mismatched.append(b.name)
            merged.bindings.append(b)
            self.bindings.append(b)
        if mismatched:
            names = ", ".join(f"`{n}`" for n in mismatched)
            self.report(Code.BRANCH_USE_MISMATCH, span,
                        f"branches disagree on use of {names}: used in only one branch")
        return merged

    def check_lambda_capture(self, ctx: Context, lam: Lambda) -> Type | None:
        captured: dict[str, Var] = {}
        for occ in free_vars(lam):
            captured.setdefault(occ.name, occ)
        inner_specs = []
        for name, occ in captured.items():
            outer = ctx.lookup(name)
            if outer is None:
                continue  # reported as unbound inside the body
            ty = self.use_variable(ctx, name, occ.span)
            inner_specs.append((outer.intro_index, name, ty, outer.span))
        inner = Context()
        for _, name, ty, span in sorted(inner_specs, key=lambda s: s[0]):
            self.bind(inner, name, ty, span)
        self.bind(inner, lam.param, lam.annot, lam.param_span)
        body_t = self.check(inner, lam.body)
        self.exit_scope(inner, lam.param)
        for _, name, _, _ in inner_specs:
            self.exit_scope(inner, name)
        if body_t is None:
            return None
        return Fn(lam.annot, body_t)

    # terms

    def check(self, ctx: Context, term: Term) -> Type | None:
        if isinstance(term, Var):
            return self.use_variable(ctx, term.name, term.span)
        if isinstance(term, UnitLit):
            return UNIT
        if isinstance(term, BoolLit):
            return BOOL
        if isinstance(term, IntLit):
            return INT
        if isinstance(term, Lambda):
            return self.check_lambda_capture(ctx, term)
        if isinstance(term, App):
            fn_t = self.check(ctx, term.fn)
            arg_t = self.check(ctx, term.arg)
            if fn_t is None:
                return None
            if not isinstance(fn_t, Fn):
                self.report(Code.TYPE_MISMATCH, term.fn.span,
                            f"expected a function, found {fn_t}")
                return None
            self.expect_type(fn_t.arg, arg_t, term.arg.span, "argument")
            return fn_t.ret
        if isinstance(term, Pair):
            t1 = self.check(ctx, term.first)
            t2 = self.check(ctx, term.second)
            if t1 is None or t2 is None:
                return None
            return Prod(t1, t2)
        if isinstance(term, Let):
            bound_t = self.check(ctx, term.bound)
            self.bind(ctx, term.name, bound_t, term.name_span)
            body_t = self.check(ctx, term.body)
            self.exit_scope(ctx, term.name)
            return body_t
        if isinstance(term, LetPair):
            bound_t = self.check(ctx, term.bound)
            left = right = None
            if isinstance(bound_t, Prod):
                left, right = bound_t.left, bound_t.right
            elif bound_t is not None:
                self.report(Code.TYPE_MISMATCH, term.bound.span,
                            f"expected a pair, found {bound_t}")
            self.bind(ctx, term.n1, left, term.n1_span)
            self.bind(ctx, term.n2, right, term.n2_span)
            body_t = self.check(ctx, term.body)
            self.exit_scope(ctx, term.n2)
            self.exit_scope(ctx, term.n1)
            return body_t
        if isinstance(term, If):
            cond_t = self.check(ctx, term.cond)
            self.expect_type(BOOL, cond_t, term.cond.span, "condition")
            ctx_then, ctx_else = ctx.copy(), ctx.copy()
            self.bindings.extend(ctx_then.bindings + ctx_else.bindings)
            then_t = self.check(ctx_then, term.then)
            else_t = self.check(ctx_else, term.else_)
            ctx.bindings = self.check_branches(ctx_then, ctx_else, term.span).bindings
            if then_t is None or else_t is None:
                return None
            if then_t != else_t:
                self.report(Code.TYPE_MISMATCH, term.else_.span,
                            f"branches differ: then-branch is {then_t}, else-branch is {else_t}")
                return None
            return then_t
        if isinstance(term, Seq):
            first_t = self.check(ctx, term.first)
            self.expect_type(UNIT, first_t, term.first.span, "sequenced expression")
            return self.check(ctx, term.second)
        if isinstance(term, Prim):
            return self.check_prim(ctx, term)
        raise TypeError(f"not a term: {term!r}")

    def check_prim(self, ctx: Context, term: Prim) -> Type:
        params, ret = PRIM_SIGNATURES[term.op]
        arg_types = [self.check(ctx, a) for a in term.args]
        if len(term.args) != len(params):
            self.report(Code.ARITY_ERROR, term.span,
                        f"`{term.op.value}` takes {len(params)} argument(s), got {len(term.args)}")
            return ret
        for i, (p, a, t) in enumerate(zip(params, term.args, arg_types), 1):
            self.expect_type(p, t, a.span, f"argument {i} of `{term.op.value}`")
        return ret


def _position(d: Diagnostic) -> tuple[int, int]:
    return (d.span.line, d.span.column)


def check_program(term: Term, mode: Mode) -> CheckResult:
    """Check a closed program in an empty context.

    Diagnostics come back sorted by source position; the verdict is
    ``accept`` iff there are none.
    """
    checker = Checker(mode)
    ty = checker.check(Context(), term)
    diagnostics = sorted(checker.diagnostics, key=_position)
    return CheckResult(None if diagnostics else ty, diagnostics, mode, checker.bindings)
