"""Provenance-tagged catalog of research-level inputs.

The shipped facts file is a line-oriented text format, one declaration or
fact per line, chosen so the provenance of every certified statement is
diff-reviewable:

    symbol <name>[(vars)] : <source> -> <target> [order=<expr>] [susp]
           [susp_to=<name>] [desusp=<name>]
    fact <kind> | <subject> [? <guard>] | <payload> | <trust> | <quote> | <locator>

Kinds: group, relation, boundary_value, lift_certificate,
suspension_value, map_identity.  Every fact carries a non-empty citation
quote (<= 200 chars).  Facts may use integer parameters (r, m, s) plus
the global tokens sign (+-1), eps (0/1) and the opaque integers x, y
(y odd); derivations are swept over those tokens and must not depend on
them.

Facts that the rewrite engine can derive on its own (boundary values of
suspension classes, for instance) must not be stored; a validation check
enforces this.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Optional

from .groups import GroupError, TwoLocalGroup
from .terms import (
    Element,
    Space,
    Sym,
    TermError,
    TermParser,
    Word,
    deg_sym,
    eval_int_expr,
    parse_space,
    sphere,
)
from . import rewrite


class KbError(ValueError):
    pass


class KbMissingFact(KbError):
    """A lookup needed a certified fact that the catalog does not hold."""


# ---------------------------------------------------------------------------
# symbol registry
# ---------------------------------------------------------------------------

@dataclass
class SymbolSpec:
    name: str
    vars: tuple
    source_pat: str
    target_pat: str
    order_expr: Optional[str] = None
    is_susp: bool = False
    susp_to: Optional[str] = None
    desusp: Optional[str] = None
    defn: Optional[str] = None      # definitional expansion (a word)
    line: int = 0

    @property
    def nvars(self):
        return len(self.vars)


_ETA_POW = re.compile(r"^eta_(\d+)\^(\d+)$")
_ETA = re.compile(r"^eta_(\d+)$")
_IOTA = re.compile(r"^iota_(\d+)$")


class SymbolRegistry:
    """Instantiates symbols from declarations plus built-in families."""

    def __init__(self):
        self.specs = {}

    def declare(self, spec: SymbolSpec):
        if spec.name in self.specs:
            raise KbError(f"symbol {spec.name!r} declared twice")
        self.specs[spec.name] = spec

    def _eta(self, n: int) -> Sym:
        if n < 2:
            raise KbError("eta_n needs n >= 2")
        return Sym("eta_%d" % n, (), sphere(n + 1), sphere(n),
                   order=0 if n == 2 else 2, is_susp=n >= 3,
                   susp_name=f"eta_{n + 1}",
                   desusp_name=f"eta_{n - 1}" if n >= 3 else None)

    def make(self, name: str, params: tuple) -> Sym:
        m = _ETA.match(name)
        if m:
            if params:
                raise KbError(f"{name} takes no parameters")
            return self._eta(int(m.group(1)))
        if name == "deg":
            return deg_sym(params[0], params[1])
        spec = self.specs.get(name)
        if spec is None:
            raise KbMissingFact(f"KB fact required: unknown symbol {name!r}")
        if len(params) != spec.nvars:
            raise KbError(f"{name} expects {spec.nvars} parameter(s)")
        env = dict(zip(spec.vars, params))
        src = parse_space(spec.source_pat, env)
        tgt = parse_space(spec.target_pat, env)
        order = (eval_int_expr(spec.order_expr, env)
                 if spec.order_expr is not None else None)
        return Sym(name, tuple(params), src, tgt, order=order,
                   is_susp=spec.is_susp,
                   susp_name=spec.susp_to, desusp_name=spec.desusp)

    def resolve(self, name: str, params: tuple, env: dict) -> Element:
        """Resolver used by the term parser."""
        m = _IOTA.match(name)
        if m:
            return Element.identity(sphere(int(m.group(1))))
        m = _ETA_POW.match(name)
        if m:
            k, j = int(m.group(1)), int(m.group(2))
            # eta_k^j is the composite eta_k . eta_{k+1} . ... (j factors)
            return Element.from_term(
                Word(tuple(self._eta(k + i) for i in range(j))))
        return Element.from_term(Word((self.make(name, params),)))

    def suspension_image(self, s: Sym) -> Optional[Sym]:
        if s.name == "deg":
            return deg_sym(s.params[0], s.params[1] + 1)
        if _IOTA.match(s.name):
            return None
        if s.susp_name:
            return self.make(s.susp_name, s.params)
        m = _ETA.match(s.name)
        if m:
            return self._eta(int(m.group(1)) + 1)
        return None

    def desuspension_image(self, s: Sym) -> Optional[Sym]:
        if s.name == "deg":
            if s.params[1] <= 2:
                return None
            return deg_sym(s.params[0], s.params[1] - 1)
        if not getattr(s, "is_susp", False):
            return None
        if s.desusp_name:
            return self.make(s.desusp_name, s.params)
        return None

    def unfold(self, s) -> Optional[Element]:
        """The definitional expansion of a symbol, if declared."""
        spec = self.specs.get(getattr(s, "name", None))
        if spec is None or spec.defn is None:
            return None
        env = dict(zip(spec.vars, s.params))
        parser = TermParser(lambda n, a, e: self.resolve(n, a, e), env)
        return parser.parse(spec.defn)

    def unfold_element(self, el: Element) -> Element:
        """Replace defined symbols by their expansions (to a fixpoint)."""
        from . import rewrite
        for _ in range(8):
            changed = False
            terms = []
            for term, c in el.terms:
                if not isinstance(term, Word):
                    terms.append((term, c))
                    continue
                out = None
                for i, s in enumerate(term.syms):
                    exp = self.unfold(s)
                    if exp is not None:
                        pre = (Element.from_term(Word(term.syms[:i]))
                               if term.syms[:i] else Element.identity(exp.target))
                        post = (Element.from_term(Word(term.syms[i + 1:]))
                                if term.syms[i + 1:]
                                else Element.identity(exp.source))
                        out = rewrite.raw_concat(rewrite.raw_concat(pre, exp),
                                                 post).scale(c)
                        changed = True
                        break
                if out is not None:
                    terms.extend(out.terms)
                else:
                    terms.append((term, c))
            el = Element(el.source, el.target, terms)
            if not changed:
                return el
        raise KbError("definitional expansion did not terminate")


# ---------------------------------------------------------------------------
# facts
# ---------------------------------------------------------------------------

VALID_KINDS = ("group", "relation", "boundary_value", "lift_certificate",
               "suspension_value", "map_identity")
VALID_TRUST = ("paper", "classical_table", "derived")


@dataclass
class KbFact:
    kind: str
    subject: str
    guard: str
    payload: str
    trust: str
    quote: str
    locator: str
    line: int

    def note(self) -> str:
        return (f"{self.kind} [{self.trust}] {self.subject}: {self.payload}"
                f' :: "{self.quote}" ({self.locator})')

    def serialize(self) -> str:
        subj = self.subject + (f" ? {self.guard}" if self.guard else "")
        return (f"fact {self.kind} | {subj} | {self.payload} | {self.trust}"
                f" | {self.quote} | {self.locator}")


_GUARD_RE = re.compile(
    r"\s*([A-Za-z][A-Za-z0-9_]*)\s*(<=|>=|=|<|>)\s*(-?\d+|[A-Za-z][A-Za-z0-9_]*)\s*")


def guard_holds(guard: str, env: dict) -> bool:
    if not guard:
        return True
    for clause in guard.split(","):
        m = _GUARD_RE.fullmatch(clause)
        if not m:
            raise KbError(f"bad guard {guard!r}")
        name, op, rhs = m.group(1), m.group(2), m.group(3)
        if name not in env:
            return False
        x = int(env[name])
        if re.fullmatch(r"-?\d+", rhs):
            val = int(rhs)
        elif rhs in env:
            val = int(env[rhs])
        else:
            return False
        ok = {"<=": x <= val, ">=": x >= val, "=": x == val,
              "<": x < val, ">": x > val}[op]
        if not ok:
            return False
    return True


_NAME_ARGS = re.compile(r"^([A-Za-z][A-Za-z0-9_~'^]*)(?:\(([^()]*)\))?$")

_PAREN_GROUPS = re.compile(r"\(([^()]*)\)")
_BARE_VAR = re.compile(r"^(?:2\^)?([a-z])$")


def fact_variables(subject: str) -> tuple:
    """Single-letter parameters appearing in a fact subject, in order.

    Authoring discipline: fact parameters are lowercase single letters
    used either bare or as 2^var inside an argument list.
    """
    out = []
    for group in _PAREN_GROUPS.findall(subject):
        for arg in group.split(","):
            m = _BARE_VAR.match(arg.strip())
            if m and m.group(1) not in out:
                out.append(m.group(1))
    return tuple(out)


def _head_vars(word_text: str):
    """Variable names appearing in the first symbol's argument list.

    Fact authoring discipline: every variable of a parameterized fact
    must appear as a bare argument of the subject's first symbol, so
    matching can bind variables positionally.
    """
    head = word_text.split(".")[0].strip()
    m = _NAME_ARGS.match(head)
    if not m:
        return None, ()
    args = []
    if m.group(2):
        args = [a.strip() for a in m.group(2).split(",")]
    return m.group(1), tuple(args)


class KbCatalog:
    """Facts indexed by kind and subject; lookups are total or fail loudly."""

    def __init__(self, registry: SymbolRegistry, facts, digest: str,
                 version: str = "1"):
        self.registry = registry
        self.facts = list(facts)
        self.digest = digest
        self.version = version
        self._parse_cache = {}
        self.by_kind = {}
        seen = {}
        for f in self.facts:
            key = (f.kind, f.subject, f.guard)
            if key in seen:
                raise KbError(
                    f"duplicate fact for {f.kind} {f.subject!r} "
                    f"(lines {seen[key]} and {f.line})")
            seen[key] = f.line
            self.by_kind.setdefault(f.kind, []).append(f)
        self._validate()

    # -- parsing helpers ------------------------------------------------------

    def parser(self, env: dict) -> TermParser:
        return TermParser(lambda n, a, e: self.registry.resolve(n, a, e), env)

    def parse_element(self, text: str, env: dict) -> Element:
        text = text.strip()
        if text == "0":
            raise KbError("a bare 0 payload needs spaces from context")
        # elements are immutable, so parses can be shared across runs that
        # agree on the variables the text actually mentions
        used = tuple(sorted(
            (tok, env[tok])
            for tok in set(re.findall(r"[A-Za-z][A-Za-z0-9_~'^]*", text))
            if tok in env))
        key = (text, used)
        hit = self._parse_cache.get(key)
        if hit is None:
            hit = self.parser(env).parse(text)
            self._parse_cache[key] = hit
        return hit

    # -- validation ------------------------------------------------------------

    def _validate(self):
        for f in self.facts:
            if f.kind not in VALID_KINDS:
                raise KbError(f"line {f.line}: unknown fact kind {f.kind!r}")
            if f.trust not in VALID_TRUST:
                raise KbError(f"line {f.line}: unknown trust {f.trust!r}")
            if not f.quote.strip():
                raise KbError(f"line {f.line}: empty provenance quote")
            if len(f.quote) > 200:
                raise KbError(f"line {f.line}: provenance quote over 200 chars")
        for f in self.by_kind.get("group", ()):
            body = f.subject.split("?")[0]
            if "@" not in body:
                raise KbError(f"line {f.line}: group subject needs 'space @ k'")
        # a stored boundary value whose element is a suspension duplicates
        # what the boundary rule derives; refuse it
        probe_env = {"r": 2, "m": 2, "s": 1, "sign": 1, "eps": 0, "x": 0, "y": 1}
        for f in self.by_kind.get("boundary_value", ()):
            if ":" not in f.subject:
                raise KbError(f"line {f.line}: boundary subject needs ':'")
            elem_text = f.subject.split(":", 1)[1].strip()
            try:
                el = self.parse_element(elem_text, probe_env)
            except (TermError, KbError):
                continue
            sw = el.single_word()
            if sw is not None and sw[0].syms and all(
                    self.registry.desuspension_image(s) is not None
                    for s in sw[0].syms):
                raise KbError(
                    f"line {f.line}: boundary value for suspension class "
                    f"{elem_text!r} is derivable and must not be stored")

    # -- lookups ----------------------------------------------------------------

    def _match_subject(self, fact: KbFact, concrete_head: str,
                       concrete_params: tuple, env: dict):
        """Bind fact variables from the subject head, check the guard."""
        name, argexprs = _head_vars(fact.subject.split("@")[0].split(":")[0])
        if name != concrete_head or len(argexprs) != len(concrete_params):
            return None
        bound = dict(env)
        for expr, val in zip(argexprs, concrete_params):
            if re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", expr):
                if expr in bound and int(bound[expr]) != val:
                    return None
                bound[expr] = val
            elif re.fullmatch(r"2\^[A-Za-z][A-Za-z0-9_]*", expr):
                var = expr.split("^")[1]
                if val < 2 or val & (val - 1):
                    return None
                e = val.bit_length() - 1
                if var in bound and int(bound[var]) != e:
                    return None
                bound[var] = e
            elif expr.isdigit():
                if int(expr) != val:
                    return None
            else:
                try:
                    if eval_int_expr(expr, bound) != val:
                        return None
                except TermError:
                    return None
        if not guard_holds(fact.guard, bound):
            return None
        return bound

    def group_fact(self, space: Space, k: int, env: dict):
        """(TwoLocalGroup with labels, basis elements, fact) for pi_k(space)."""
        head, params = _space_head(space)
        for f in self.by_kind.get("group", ()):
            subj, at = f.subject.split("@")
            subj = subj.strip()
            if int(at.strip()) != k:
                continue
            bound = self._match_subject_space(f, subj, head, params, env)
            if bound is None:
                continue
            return self._build_group(f, bound)
        raise KbMissingFact(f"KB fact required: pi_{k}({space.key})")

    def _match_subject_space(self, fact, subj, head, params, env):
        name, argexprs = _head_vars(subj)
        if name is None:
            return None
        # rewrite sphere/wedge shorthands to head form
        if name != head or len(argexprs) != len(params):
            return None
        bound = dict(env)
        for expr, val in zip(argexprs, params):
            if re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", expr):
                if expr in bound and int(bound[expr]) != val:
                    return None
                bound[expr] = val
            elif re.fullmatch(r"2\^[A-Za-z][A-Za-z0-9_]*", expr):
                var = expr.split("^")[1]
                if val < 2 or val & (val - 1):
                    return None
                bound[var] = val.bit_length() - 1
            elif expr.isdigit():
                if int(expr) != val:
                    return None
            else:
                return None
        if not guard_holds(fact.guard, bound):
            return None
        return bound

    def _build_group(self, f: KbFact, env: dict):
        text = f.payload.strip()
        if text == "0":
            return TwoLocalGroup([]), [], f
        orders, labels, elements = [], [], []
        for part in _split_summands(text):
            m = re.fullmatch(r"(Z\(2\)|Z/[0-9^a-z()+\-*]+)\{(.+)\}", part.strip())
            if not m:
                raise KbError(f"line {f.line}: bad group summand {part!r}")
            head, label = m.group(1), m.group(2)
            if head == "Z(2)":
                orders.append(0)
            else:
                orders.append(eval_int_expr(head[2:], env))
            el = self.parse_element(label, env)
            labels.append(el.render())
            elements.append(el)
        group = TwoLocalGroup(orders, labels)
        # keep elements aligned with the canonical sort
        order_index = sorted(range(len(orders)),
                             key=lambda i: (orders[i] == 0, orders[i], i))
        elements = [elements[i] for i in order_index]
        return group, elements, f

    def boundary_fact(self, fib_key_head: str, fib_params: tuple,
                      element: Element, env: dict):
        """Stored boundary value for a non-suspension class, or None."""
        from .terms import named
        for f in self.by_kind.get("boundary_value", ()):
            subj_fib, subj_el = [s.strip() for s in f.subject.split(":", 1)]
            bound = self._match_subject(f, fib_key_head, fib_params, env)
            if bound is None:
                continue
            want = self.parse_element(subj_el, bound)
            if want.key() != element.key():
                continue
            if f.payload.strip() == "0":
                src = sphere(element.source.data[0] - 1)
                value = Element.zero(src, named(fib_key_head, *fib_params))
            else:
                value = self.parse_element(f.payload, bound)
            return value, f
        return None

    def lookup_group(self, space: Space, k: int, env: Optional[dict] = None):
        """The stored homotopy group pi_k(space) with its labels.

        Fails loudly when no fact covers the subject.
        """
        group, _, _ = self.group_fact(space, k, dict(env or {}))
        return group

    def lookup_boundary(self, fib_head: str, fib_params: tuple,
                        element: Element, env: Optional[dict] = None):
        """The stored connecting-map value on a non-suspension class."""
        hit = self.boundary_fact(fib_head, fib_params, element,
                                 dict(env or {}))
        if hit is None:
            raise KbMissingFact(
                f"KB fact required: boundary of {fib_head}{fib_params} on "
                f"{element.render()}")
        return hit[0]

    def lift_facts(self):
        return self.by_kind.get("lift_certificate", ())

    # -- rule context ------------------------------------------------------------

    def rule_context(self, env: dict, strict: bool = True,
                     on_rule=None, skip_lines=()) -> rewrite.RuleContext:
        """Instantiate rewrite data for the parameter values of ``env``.

        Facts with variables are instantiated for every assignment that
        can be bound from the environment's integer values (plus small
        shifts used by the derivations, e.g. m = r + 1).
        """
        ctx = rewrite.RuleContext(strict=strict, on_rule=on_rule,
                          registry=self.registry)
        assignments = _candidate_assignments(env)
        for f in self.facts:
            if f.line in skip_lines:
                continue
            if f.kind == "relation":
                self._instantiate_relation(f, env, assignments, ctx)
            elif f.kind == "map_identity":
                if f.subject.startswith("boundary("):
                    continue  # consumed by the boundary resolver
                self._instantiate_word_rule(f, env, assignments, ctx)
            elif f.kind == "suspension_value":
                self._instantiate_susp(f, env, assignments, ctx)
        return ctx

    def _each_binding(self, f: KbFact, env, assignments):
        vars_needed = fact_variables(f.subject)
        if not vars_needed:
            if guard_holds(f.guard, env):
                yield dict(env)
            return
        seen = set()
        for assign in assignments:
            bound = dict(env)
            ok = True
            for v in vars_needed:
                if v in assign:
                    bound[v] = assign[v]
                elif v not in bound:
                    ok = False
            if not ok or not guard_holds(f.guard, bound):
                continue
            key = tuple(bound[v] for v in vars_needed)
            if key in seen:
                continue
            seen.add(key)
            yield bound

    def _instantiate_relation(self, f, env, assignments, ctx):
        for bound in self._each_binding(f, env, assignments):
            try:
                self._instantiate_relation_one(f, bound, ctx)
            except TermError:
                continue  # binding out of range (no such space)

    def _instantiate_relation_one(self, f, bound, ctx):
        subj = f.subject.strip()
        m = re.fullmatch(r"(\d+)\*(.+)", subj)
        if m and "[" not in subj:
            # order bound: k * word = 0
            k = int(m.group(1))
            word_el = self.parse_element(m.group(2), bound)
            sw = word_el.single_word()
            if sw is None or f.payload.strip() != "0":
                raise KbError(f"line {f.line}: bad order-bound relation")
            from .groups import strip_odd
            ctx.add_order_bound(sw[0], abs(strip_odd(k)), note=f.note())
            return
        lhs = self.parse_element(subj, bound)
        rhs = (Element.zero(lhs.source, lhs.target)
               if f.payload.strip() == "0"
               else self.parse_element(f.payload, bound))
        if len(lhs.terms) != 1:
            raise KbError(f"line {f.line}: relation lhs must be one term")
        term, c = lhs.terms[0]
        if c != 1:
            raise KbError(f"line {f.line}: relation lhs must be unscaled")
        from .terms import Bracket
        if isinstance(term, Bracket):
            if term.arity == 2:
                ctx.add_bracket_rule(list(term.slots), rhs, note=f.note())
            else:
                ctx.add_triple_value(list(term.slots), rhs, note=f.note())
        else:
            ctx.add_word_rule(term, rhs, note=f.note())

    def _instantiate_word_rule(self, f, env, assignments, ctx):
        for bound in self._each_binding(f, env, assignments):
            try:
                self._instantiate_word_rule_one(f, bound, ctx)
            except TermError:
                continue

    def _instantiate_word_rule_one(self, f, bound, ctx):
        lhs = self.parse_element(f.subject.strip(), bound)
        sw = lhs.single_word()
        if sw is None or sw[1] != 1:
            raise KbError(f"line {f.line}: map identity lhs must be a word")
        rhs = (Element.zero(lhs.source, lhs.target)
               if f.payload.strip() == "0"
               else self.parse_element(f.payload, bound))
        ctx.add_word_rule(sw[0], rhs, note=f.note())

    def _instantiate_susp(self, f, env, assignments, ctx):
        for bound in self._each_binding(f, env, assignments):
            try:
                self._instantiate_susp_one(f, bound, ctx)
            except TermError:
                continue

    def _instantiate_susp_one(self, f, bound, ctx):
        lhs = self.parse_element(f.subject.strip(), bound)
        sw = lhs.single_word()
        if sw is None or sw[1] != 1:
            raise KbError(f"line {f.line}: suspension lhs must be a word")
        rhs = (Element.zero(lhs.source, lhs.target)
               if f.payload.strip() == "0"
               else self.parse_element(f.payload, bound))
        ctx.add_susp_word(sw[0], rhs, note=f.note())

    def boundary_transport(self, fib_head: str, fib_params: tuple, env: dict):
        """(comparison map element, base fibration head/params) or None."""
        for f in self.by_kind.get("map_identity", ()):
            if not f.subject.startswith("boundary("):
                continue
            m = re.fullmatch(
                r"boundary\(([A-Za-z0-9_]+)\(([^()]*)\)\)", f.subject.strip())
            if not m:
                raise KbError(f"line {f.line}: bad boundary transport subject")
            name = m.group(1)
            argexprs = [a.strip() for a in m.group(2).split(",")]
            if name != fib_head or len(argexprs) != len(fib_params):
                continue
            bound = dict(env)
            ok = True
            for expr, val in zip(argexprs, fib_params):
                if re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", expr):
                    bound[expr] = val
                elif expr.isdigit():
                    ok = ok and int(expr) == val
                else:
                    ok = False
            if not ok or not guard_holds(f.guard, bound):
                continue
            m2 = re.fullmatch(
                r"(.+)\.\s*boundary\(([A-Za-z0-9_]+)\(([^()]*)\)\)",
                f.payload.strip())
            if not m2:
                raise KbError(f"line {f.line}: bad boundary transport payload")
            via = self.parse_element(m2.group(1).strip(), bound)
            base_head = m2.group(2)
            base_params = tuple(eval_int_expr(a.strip(), bound)
                                for a in m2.group(3).split(","))
            return via, base_head, base_params, f
        return None

    def serialize(self) -> str:
        out = [f"version {self.version}"]
        for name in sorted(self.registry.specs):
            s = self.registry.specs[name]
            head = f"{name}({','.join(s.vars)})" if s.vars else name
            extras = []
            if s.order_expr is not None:
                extras.append(f"order={s.order_expr}")
            if s.is_susp:
                extras.append("susp")
            if s.susp_to:
                extras.append(f"susp_to={s.susp_to}")
            if s.desusp:
                extras.append(f"desusp={s.desusp}")
            if s.defn:
                extras.append(f"defn={s.defn}")
            tail = (" " + " ".join(extras)) if extras else ""
            out.append(f"symbol {head} : {s.source_pat} -> {s.target_pat}{tail}")
        for f in self.facts:
            out.append(f.serialize())
        return "\n".join(out) + "\n"

    def without_facts(self, predicate) -> "KbCatalog":
        """A catalog with the facts matching ``predicate`` removed
        (negative-control runs)."""
        kept = [f for f in self.facts if not predicate(f)]
        cat = KbCatalog(self.registry, kept,
                        self.digest + "-filtered", self.version)
        return cat


def _space_head(space: Space):
    if space.kind == "sphere":
        return f"S{space.data[0]}", ()
    if space.kind == "wedge":
        return space.key, ()
    if space.kind == "moore":
        return f"P{space.data[0]}", (space.data[1],)
    name, params = space.data
    return name, tuple(params)


def _split_summands(text: str):
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == "+" and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p for p in (p.strip() for p in parts) if p]


def _candidate_assignments(env: dict):
    """Variable assignments facts may bind: the run's own parameters plus
    the shifted values the derivations use (m = r + 1, s in {1, 2})."""
    vals = set()
    for key in ("r", "m", "s"):
        if key in env:
            vals.add(int(env[key]))
    if "r" in env:
        vals.add(int(env["r"]) + 1)
    vals.update({0, 1, 2})
    out = []
    for v in sorted(vals):
        out.append({"m": v, "r": v, "s": v})
    # two-variable combinations for (s, r)-indexed comparisons
    if "r" in env:
        r = int(env["r"])
        for s in (1, 2):
            out.append({"s": s, "r": r})
            out.append({"s": s, "m": r + 1, "r": r})
    return out


# ---------------------------------------------------------------------------
# file loading
# ---------------------------------------------------------------------------

_SYMBOL_RE = re.compile(
    r"^symbol\s+([A-Za-z][A-Za-z0-9_~'^]*)(?:\(([^()]*)\))?\s*:\s*"
    r"(\S+)\s*->\s*(\S+)\s*(.*)$")


def load_catalog(path) -> KbCatalog:
    """Load and validate a facts file.

    >>> import io, tempfile, os
    >>> p = tempfile.NamedTemporaryFile("w", suffix=".facts", delete=False)
    >>> _ = p.write("fact group | S9 @ 10 | Z/2{eta_9} | classical_table"
    ...             " | pi_10(S^9)=Z/2 | stable range\\n")
    >>> p.close()
    >>> cat = load_catalog(p.name)
    >>> len(cat.facts)
    1
    >>> os.unlink(p.name)
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    digest = hashlib.sha256(raw).hexdigest()
    registry = SymbolRegistry()
    facts = []
    version = "1"
    for lineno, line in enumerate(raw.decode("utf-8").splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if text.startswith("version"):
            version = text.split(None, 1)[1].strip()
            continue
        if text.startswith("symbol "):
            m = _SYMBOL_RE.match(text)
            if not m:
                raise KbError(f"line {lineno}: bad symbol declaration")
            name, vars_, src, tgt, extras = m.groups()
            varnames = tuple(v.strip() for v in (vars_ or "").split(",")
                             if v.strip())
            spec = SymbolSpec(name, varnames, src, tgt, line=lineno)
            for tok in extras.split():
                if tok == "susp":
                    spec.is_susp = True
                elif tok.startswith("order="):
                    spec.order_expr = tok[6:]
                elif tok.startswith("susp_to="):
                    spec.susp_to = tok[8:]
                elif tok.startswith("desusp="):
                    spec.desusp = tok[7:]
                elif tok.startswith("defn="):
                    spec.defn = tok[5:]
                else:
                    raise KbError(f"line {lineno}: bad symbol attribute {tok!r}")
            registry.declare(spec)
            continue
        if text.startswith("fact "):
            body = text[5:]
            kind, rest = body.split("|", 1)
            kind = kind.strip()
            parts = [p.strip() for p in rest.split("|")]
            if len(parts) != 5:
                raise KbError(
                    f"line {lineno}: fact needs subject|payload|trust|quote|locator")
            subject, payload, trust, quote, locator = parts
            guard = ""
            if "?" in subject:
                subject, guard = [s.strip() for s in subject.split("?", 1)]
            facts.append(KbFact(kind, subject, guard, payload, trust, quote,
                                locator, lineno))
            continue
        raise KbError(f"line {lineno}: unrecognized line {text!r}")
    return KbCatalog(registry, facts, digest, version)
