"""Derivation scripts: replayable exact-sequence chases with transcripts.

A derivation is a list of named steps in a small line-oriented format,
one step per line:

    derivation pi5_L4m
    params m
    let F5 = fiber_group fib=F_pL(m); k=5
    let d6 = boundary fib=F_pL(m); k=6; target=F5
    ...
    assert ans = { m=0 : Z(2) ; m=1 : Z(2) + Z/4 ; m>=2 : Z(2) + Z/2 + Z/2 }
    return ans

Every run records each step, every certified fact it consumed (with its
citation), and the catalog digest; replays are byte-identical.  Runs are
swept over the ambiguous tokens (sign, eps and the opaque integers x, y)
and must produce identical groups for every assignment -- the group
tables are independent of all of them.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .groups import (
    ExtensionProblem,
    ExtensionUnresolved,
    GroupError,
    LiftCertificate,
    TwoLocalGroup,
    cokernel as group_cokernel,
    extension_with_relations,
    kernel as group_kernel,
    solve_extension,
    strip_odd,
)
from .kb import KbCatalog, KbError, KbMissingFact, guard_holds
from .les import (
    Boundary,
    LesError,
    PiGroup,
    derived_pi_group,
    direct_sum_pi,
    express,
    fibration,
    pi_group_from_fact,
    push_forward,
    strip_prefix,
)
from .terms import (
    Element,
    Pair,
    TermError,
    Word,
    eval_int_expr,
    parse_space,
    wedge,
)
from . import filtration, rewrite


class DeriveError(ValueError):
    pass


class AssertionMismatch(DeriveError):
    """A computed group disagrees with the asserted expectation."""


CANONICAL_TOKENS = {"sign": 1, "eps": 0, "x": 0, "y": 1}
SWEEP_GRID = [
    {"sign": s, "eps": e, "x": x, "y": y}
    for s in (1, -1) for e in (0, 1) for x in (0, -1) for y in (1, -3)
]


# ---------------------------------------------------------------------------
# script model
# ---------------------------------------------------------------------------

@dataclass
class Step:
    kind: str                 # let | check | assert | return
    name: str = ""
    verb: str = ""
    args: Dict[str, str] = field(default_factory=dict)
    raw: str = ""


@dataclass
class Script:
    name: str
    params: List[str]
    steps: List[Step]
    requires: str = ""


_LET_RE = re.compile(r"^let\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(\S+)\s*(.*)$")
_ASSERT_RE = re.compile(r"^assert\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.+)$")


def parse_script(text: str, name_hint: str = "") -> Script:
    name = name_hint
    params: List[str] = []
    steps: List[Step] = []
    requires = ""
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("derivation "):
            name = body.split(None, 1)[1].strip()
            continue
        if body.startswith("params "):
            params = [p.strip() for p in body.split(None, 1)[1].split(",")]
            continue
        if body.startswith("require "):
            requires = body.split(None, 1)[1].strip()
            continue
        m = _LET_RE.match(body)
        if m:
            nm, verb, rest = m.groups()
            args = {}
            if rest.strip():
                for piece in rest.split(";"):
                    piece = piece.strip()
                    if not piece:
                        continue
                    if "=" not in piece:
                        raise DeriveError(
                            f"{name}:{lineno}: step argument {piece!r} "
                            "needs key=value form")
                    k, v = piece.split("=", 1)
                    args[k.strip()] = v.strip()
            steps.append(Step("let", nm, verb, args, body))
            continue
        m = _ASSERT_RE.match(body)
        if m:
            steps.append(Step("assert", m.group(1), "", {"cases": m.group(2)},
                              body))
            continue
        if body.startswith("check "):
            args = {}
            for piece in body[6:].split(";"):
                k, v = piece.split("=", 1)
                args[k.strip()] = v.strip()
            steps.append(Step("check", "", "", args, body))
            continue
        if body.startswith("return "):
            steps.append(Step("return", body.split(None, 1)[1].strip(), "",
                              {}, body))
            continue
        raise DeriveError(f"{name}:{lineno}: unrecognized line {body!r}")
    if not name:
        raise DeriveError("script has no name")
    return Script(name, params, steps, requires)


def parse_group_literal(text: str, env: dict) -> TwoLocalGroup:
    """``Z/2 + Z/2^r + Z(2)`` or ``0``."""
    text = text.strip()
    if text == "0":
        return TwoLocalGroup([])
    orders = []
    for part in text.split("+"):
        part = part.strip()
        if part == "Z(2)":
            orders.append(0)
        elif part.startswith("Z/"):
            orders.append(eval_int_expr(part[2:], env))
        else:
            raise DeriveError(f"bad group literal {part!r}")
    return TwoLocalGroup(orders)


def parse_group_cases(text: str, env: dict) -> TwoLocalGroup:
    """``{ m=0 : Z(2) ; m>=1 : ... }`` or a bare literal."""
    text = text.strip()
    if not text.startswith("{"):
        return parse_group_literal(text, env)
    inner = text.strip("{}").strip()
    for case in inner.split(";"):
        guard, lit = case.split(":", 1)
        if guard_holds(guard.strip(), env):
            return parse_group_literal(lit.strip(), env)
    raise DeriveError(f"no case of {text!r} matches the parameters")


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------

@dataclass
class RunResult:
    script: str
    env: dict
    value: object                 # PiGroup | Element | int
    transcript: str
    consumed: List[str]

    @property
    def group(self) -> TwoLocalGroup:
        if isinstance(self.value, PiGroup):
            return self.value.group
        raise DeriveError(f"{self.script} did not return a group")

    def transcript_digest(self) -> str:
        return hashlib.sha256(self.transcript.encode()).hexdigest()


_FIB_RE = re.compile(r"^([A-Za-z0-9_]+)\(([^()]*)\)$")


class Runner:
    """Executes derivation scripts against one catalog.

    ``run`` evaluates the script for the canonical token assignment and
    for the full sweep grid, asserting that the resulting groups agree;
    the transcript records the canonical run.
    """

    def __init__(self, catalog: KbCatalog, scripts: Dict[str, Script],
                 strict: bool = True):
        self.catalog = catalog
        self.scripts = scripts
        self.strict = strict
        self._cache: Dict[tuple, RunResult] = {}
        self._ctx_cache: Dict[tuple, object] = {}

    # -- public -----------------------------------------------------------

    def run(self, name: str, params: dict, sweep: bool = True) -> RunResult:
        base_env = dict(CANONICAL_TOKENS)
        base_env.update(params)
        result = self._run_cached(name, base_env)
        if sweep:
            canonical = result.group.orders if isinstance(result.value, PiGroup) \
                else result.value
            for assign in SWEEP_GRID:
                env = dict(base_env)
                env.update(assign)
                other = self._run_cached(name, env)
                got = other.group.orders if isinstance(other.value, PiGroup) \
                    else other.value
                comparable = got
                if isinstance(result.value, Element):
                    # elements may differ by the swept sign; compare the
                    # 2-part of the coefficients
                    comparable = _element_shape(other.value)
                    canonical = _element_shape(result.value)
                if comparable != canonical:
                    raise DeriveError(
                        f"{name}{params}: result depends on the ambiguous "
                        f"tokens {assign}: {comparable} != {canonical}")
        return result

    # -- internals ----------------------------------------------------------

    def _ctx(self, env):
        """A per-run view of the (cached, shared) rule context: the rule
        tables are read-only and shared, the fact-recording hook is owned
        by the run, so parallel rows cannot cross-record citations."""
        import copy
        key = tuple(sorted((k, v) for k, v in env.items()))
        ctx = self._ctx_cache.get(key)
        if ctx is None:
            ctx = self.catalog.rule_context(env, strict=self.strict)
            self._ctx_cache[key] = ctx
        view = copy.copy(ctx)
        view.on_rule = None
        return view

    def _run_cached(self, name: str, env: dict) -> RunResult:
        key = (name, tuple(sorted(env.items())))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        result = self._execute(name, env)
        self._cache[key] = result
        return result

    def _execute(self, name: str, env: dict) -> RunResult:
        script = self.scripts.get(name)
        if script is None:
            raise DeriveError(f"unknown derivation script {name!r}")
        for p in script.params:
            if p not in env:
                raise DeriveError(f"{name}: missing parameter {p!r}")
        if script.requires and not guard_holds(script.requires, env):
            raise DeriveError(f"{name}: parameters violate {script.requires!r}")
        notes: List[str] = []
        lines: List[str] = [f"derivation {name} "
                            + " ".join(f"{p}={env[p]}" for p in script.params)]
        ctx = self._ctx(env)
        ctx.on_rule = notes.append
        bindings: Dict[str, object] = {}
        ret: Optional[object] = None
        for idx, step in enumerate(script.steps, start=1):
            before = len(notes)
            if step.kind == "let":
                try:
                    value = self._eval_step(step, env, ctx, bindings, lines)
                except (DeriveError, LesError, KbError, GroupError,
                        TermError) as e:
                    # errors carry the failing step's position
                    raise type(e)(f"{name} step {idx} ({step.verb}): {e}") \
                        from e
                bindings[step.name] = value
                lines.append(f"  step {idx}: {step.raw}")
                lines.append(f"    = {_render_value(value)}")
            elif step.kind == "check":
                self._eval_check(step, env, ctx, bindings)
                lines.append(f"  step {idx}: {step.raw}  [ok]")
            elif step.kind == "assert":
                got = bindings.get(step.name)
                if not isinstance(got, PiGroup):
                    raise DeriveError(f"{name}: assert needs a group binding")
                want = parse_group_cases(step.args["cases"], env)
                if got.group != want:
                    raise AssertionMismatch(
                        f"{name}{_fmt_env(env, script.params)}: computed "
                        f"{got.group.render()} but expected {want.render()}")
                lines.append(f"  step {idx}: {step.raw}  [ok]")
            elif step.kind == "return":
                ret = bindings.get(step.name)
                if ret is None:
                    raise DeriveError(
                        f"{name}: return of unbound {step.name!r}")
                lines.append(f"  step {idx}: {step.raw}")
            for note in notes[before:]:
                lines.append(f"    uses {note}")
        if ret is None:
            raise DeriveError(f"{name}: no terminal group (missing return)")
        if isinstance(ret, PiGroup):
            lines.append(f"  result: {ret.group.render()}")
        else:
            lines.append(f"  result: {_render_value(ret)}")
        return RunResult(name, dict(env), ret, "\n".join(lines) + "\n", notes)

    # -- step evaluation ------------------------------------------------------

    def _parse_el(self, text, env, bindings) -> Element:
        text = text.strip()
        if text in bindings and isinstance(bindings[text], Element):
            return bindings[text]
        return self.catalog.parser(env).parse(text)

    def _fib(self, text, env, bindings):
        m = _FIB_RE.match(text.strip())
        if not m:
            raise DeriveError(f"bad fibration key {text!r}")
        head = m.group(1)
        params = tuple(eval_int_expr(a.strip(), env)
                       for a in m.group(2).split(","))
        gamma = None
        if head == "FM":
            g = bindings.get("g3")
            if isinstance(g, Element):
                gamma = g
        return fibration(self.catalog, env, head, params, gamma=gamma)

    def _eval_step(self, step, env, ctx, bindings, lines):
        verb = step.verb
        args = step.args

        def el(key):
            return self._parse_el(args[key], env, bindings)

        def pig(key) -> PiGroup:
            v = bindings.get(args[key])
            if not isinstance(v, PiGroup):
                raise DeriveError(f"{args[key]!r} is not a group binding")
            return v

        if verb == "group":
            space = parse_space(args["space"], env)
            return pi_group_from_fact(self.catalog, env, space,
                                      int(eval_int_expr(args["k"], env)), ctx)

        if verb == "fiber_group":
            return self._fiber_group(args, env, ctx)

        if verb == "run":
            sub_params = {}
            for k, v in args.items():
                if k == "script":
                    continue
                sub_params[k] = eval_int_expr(v, env)
            sub_env = dict(env)
            sub_env.update(sub_params)
            sub = self._run_cached(args["script"], sub_env)
            lines.append(f"    (subderivation {args['script']} "
                         f"{sub_params} -> {_render_value(sub.value)})")
            return sub.value

        if verb == "boundary":
            fib = self._fib(args["fib"], env, bindings)
            k = int(eval_int_expr(args["k"], env))
            source = pi_group_from_fact(self.catalog, env, fib.base, k, ctx)
            target = None
            if args.get("target", "none") != "none":
                target = pig("target")
            strip = None
            if "strip" in args and args["strip"] != "none":
                strip = self._parse_el(args["strip"], env, bindings)
            return self._boundary(fib, k, source, target, strip, env, ctx)

        if verb == "cokernel":
            bnd = bindings.get(args["of"])
            if not isinstance(bnd, Boundary):
                raise DeriveError("cokernel needs a boundary binding")
            if bnd.hom is None:
                raise DeriveError("cokernel needs a materialized target")
            g, proj = group_cokernel(bnd.hom)
            return derived_pi_group(bnd.target, g, proj)

        if verb == "kernel":
            bnd = bindings.get(args["of"])
            if not isinstance(bnd, Boundary):
                raise DeriveError("kernel needs a boundary binding")
            if bnd.hom is None:
                if not bnd.is_zero():
                    raise DeriveError("kernel of a non-materialized boundary")
                return bnd.source
            g, incl = group_kernel(bnd.hom)
            protos = []
            for j in range(g.rank):
                vec = tuple(incl.matrix.rows[i][j]
                            for i in range(bnd.source.group.rank))
                elem = _element_from_chart(bnd.source, vec)
                unit = tuple(1 if i == j else 0 for i in range(g.rank))
                protos.append((elem, unit))
            labels = [p[0].render() for p in protos]
            return PiGroup(g.with_labels(labels), bnd.source.space,
                           bnd.source.degree, protos)

        if verb == "push":
            mapel = el("via")
            space = parse_space(args["space"], env)
            return push_forward(pig("of"), mapel, space, ctx)

        if verb == "quotient":
            base = pig("of")
            relel = el("by")
            vec = express(relel, base, ctx)
            from .groups import quotient_by_elements
            g, proj = quotient_by_elements(base.group, [list(vec)])
            out = derived_pi_group(base, g, proj)
            if args.get("push"):
                out = push_forward(out, el("push"),
                                   parse_space(args["space"], env), ctx)
            return out

        if verb == "extension":
            return self._extension(args, env, ctx, bindings)

        if verb == "element":
            return rewrite.normalize(el("expr"), ctx)

        if verb == "stage_bracket":
            f = filtration.MapSpec(el("f"))
            stage = int(eval_int_expr(args["stage"], env))
            model = filtration.build_filtration(f, stage, ctx,
                                                self.catalog.registry)
            gamma = model.stages[stage - 1].gamma
            if gamma is None:
                raise DeriveError("stage 1 has no attaching class")
            return gamma

        if verb == "push_bracket":
            return rewrite.naturality_push(el("map"), _as_element(
                bindings, args["of"]), ctx)

        if verb == "restrict_bracket":
            restrictions = [self._parse_el(p, env, bindings)
                            for p in args["by"].split(",")]
            return rewrite.bracket_restrict(_as_element(bindings, args["of"]),
                                            restrictions, ctx)

        if verb == "resolve_triple":
            amb_specs = [a.strip() for a in args["ambient"].split(",")]
            if len(amb_specs) == 1:
                amb_specs = amb_specs * 3
            ambients = []
            for spec in amb_specs:
                sp, k = spec.split("@")
                ambients.append(pi_group_from_fact(
                    self.catalog, env, parse_space(sp.strip(), env),
                    int(k), ctx).group)
            return rewrite.resolve_triple(_as_element(bindings, args["of"]),
                                          ambients, ctx)

        if verb == "pair_map":
            f = el("first")
            g = el("second")
            return Element.from_term(Word((Pair(f, g),)))

        if verb == "apply":
            return rewrite.compose(el("map"), _as_element(bindings, args["to"]),
                                   ctx)

        if verb == "suspend":
            return rewrite.suspend(_as_element(bindings, args["of"]), ctx,
                                   self.catalog.registry)

        if verb == "whitehead":
            left = (Element.identity(parse_space(args["id"], env))
                    if "id" in args else el("left"))
            return rewrite.whitehead(left, el("right"), ctx)

        if verb == "solve_free":
            return self._solve_free(args, env, ctx, bindings)

        if verb == "suspension_kill":
            return self._suspension_kill(args, env, ctx, bindings)

        if verb == "scaled_generator":
            base = pig("group")
            gen = el("gen")
            coeff = bindings[args["coeff"]]
            if not isinstance(coeff, int):
                raise DeriveError("coeff must be an integer binding")
            i = _find_generator(base, gen, ctx)
            return rewrite.normalize(base.generator_element(i).scale(coeff), ctx)

        if verb == "assert_coeff":
            value = bindings[args["of"]]
            want = eval_int_expr(args["abs"], env)
            if abs(value) != want:
                raise AssertionMismatch(
                    f"coefficient {value} does not have absolute value {want}")
            return value

        raise DeriveError(f"unknown verb {verb!r}")

    def _eval_check(self, step, env, ctx, bindings):
        """Verify a composition identity on the nose (commuting square)."""
        mapel = self._parse_el(step.args["map"], env, bindings)
        withel = self._parse_el(step.args["with"], env, bindings)
        want = self._parse_el(step.args["equals"], env, bindings)
        got = rewrite.compose(mapel, withel, ctx)
        lhs = rewrite.normalize(got, ctx)
        rhs = rewrite.normalize(want, ctx)
        if lhs.key() != rhs.key():
            raise AssertionMismatch(
                f"check failed: {lhs.render()} != {rhs.render()}")

    # -- composite verbs -----------------------------------------------------

    def _fiber_group(self, args, env, ctx) -> PiGroup:
        fibkey = args["fib"]
        m = _FIB_RE.match(fibkey)
        head = m.group(1)
        params = tuple(eval_int_expr(a, env) for a in m.group(2).split(","))
        k = int(eval_int_expr(args["k"], env))
        if head != "F_pL":
            raise DeriveError(
                "only the two-cell-cone fibration has a wedge skeleton here")
        (mval,) = params
        f = filtration.MapSpec(
            Element.from_term(Word((self.catalog.registry._eta(2),)), 2**mval))
        stage, st = filtration.skeleton_of_fiber(f, k + 1, ctx,
                                                 self.catalog.registry)
        if st.space != wedge(2, 5):
            raise DeriveError(
                f"unexpected fiber skeleton {st.space_name} for {fibkey}")
        base = pi_group_from_fact(self.catalog, env, st.space, k, ctx)
        jf = Element.from_term(
            Word((self.catalog.registry.make("j_F", (mval,)),)))
        return push_forward(base, jf, parse_space(fibkey, env), ctx)

    def _boundary(self, fib, k, source, target, strip, env, ctx) -> Boundary:
        from .les import boundary_value
        from .groups import GroupHom, IntMat
        if not source.unit_protos():
            raise LesError("source chart must consist of unit prototypes")
        values = []
        for i in range(source.group.rank):
            gen = source.generator_element(i)
            v = boundary_value(self.catalog, env, fib, gen, ctx)
            if strip is not None and not v.is_zero():
                v = strip_prefix(v, strip, ctx)
            values.append(v)
        if target is None:
            if all(v.is_zero() for v in values):
                return Boundary(source, None, values, None)
            raise LesError(
                "boundary has nonzero values; a target chart is required")
        cols = [express(v, target, ctx) for v in values]
        mat = IntMat([[cols[j][i] for j in range(len(cols))]
                      for i in range(target.group.rank)], source.group.rank)
        return Boundary(source, target, values,
                        GroupHom(source.group, target.group, mat))

    def _extension(self, args, env, ctx, bindings) -> PiGroup:
        sub = bindings[args["sub"]]
        quot = bindings[args["quot"]]
        if not isinstance(sub, PiGroup) or not isinstance(quot, PiGroup):
            raise DeriveError("extension needs group bindings")
        if quot.group.is_trivial():
            return sub
        where = args.get("certs", "none")
        if where == "none":
            raise ExtensionUnresolved(
                "extension unresolved: no certificate source named for "
                + ", ".join(quot.group.label(i)
                            for i in range(quot.group.rank)))
        spacetext, deg = where.split("@")
        space = parse_space(spacetext.strip(), env)
        degree = int(eval_int_expr(deg.strip(), env))
        certs = []
        lift_infos = []
        for i in range(quot.group.rank):
            gen = quot.generator_element(i)
            found = self._find_lift(space, degree, gen, env, ctx)
            if found is None:
                raise ExtensionUnresolved(
                    f"extension unresolved: no lift certificate for "
                    f"{gen.render()} over {space.key} in degree {degree}")
            lift_el, order, rel_el = found
            rel_vec = None
            if rel_el is not None:
                rel_vec = express(rel_el, sub, ctx)
            certs.append(LiftCertificate(i, order, lift_el.render(), rel_vec))
            lift_infos.append((lift_el, order))
        problem = ExtensionProblem(sub.group, quot.group, tuple(certs))
        if all(c.relation is None or not any(c.relation) for c in certs) and \
                all(c.lift_order == quot.group.orders[c.quot_index]
                    for c in certs):
            solve_extension(problem)  # the certified split, checked
            extra = [(lift_el, order, lift_el.render())
                     for (lift_el, order) in lift_infos]
            return direct_sum_pi(sub, extra, ctx)
        group, chart = extension_with_relations(problem)
        protos = []
        n = sub.group.rank + quot.group.rank
        for elp, vec in sub.protos:
            full = list(vec) + [0] * quot.group.rank
            protos.append((elp, chart_apply(chart, full, group)))
        for j, (lift_el, order) in enumerate(lift_infos):
            full = [0] * sub.group.rank + [1 if jj == j else 0
                                           for jj in range(quot.group.rank)]
            protos.append((rewrite.normalize(lift_el, ctx),
                           chart_apply(chart, full, group)))
        return PiGroup(group, sub.space, sub.degree, protos)

    def _find_lift(self, space, degree, gen, env, ctx):
        """(lift element, order, relation element or None) from the catalog."""
        for f in self.catalog.lift_facts():
            subj = f.subject
            m = re.match(r"^(.*?)@\s*(\d+)\s*:\s*(.*)$", subj)
            if not m:
                raise KbError(f"line {f.line}: bad lift subject {subj!r}")
            space_pat, deg_txt, gen_txt = m.groups()
            if int(deg_txt) != degree:
                continue
            bound = self.catalog._match_subject_space(
                f, space_pat.strip(), *_space_head_params(space), env)
            if bound is None:
                continue
            try:
                want = self.catalog.parse_element(gen_txt.strip(), bound)
            except (TermError, KbError):
                continue
            if rewrite.normalize(want, ctx).key() != \
                    rewrite.normalize(gen, ctx).key():
                continue
            payload = f.payload.strip()
            if ctx.on_rule:
                ctx.on_rule(f.note())
            tm = re.match(r"^transport\s+(\S+)\s+from\s+(\S+)$", payload)
            if tm:
                via = self.catalog.parse_element(tm.group(1), bound)
                base_space = parse_space(tm.group(2), bound)
                base = self._find_lift(base_space, degree, gen, bound, ctx)
                if base is None:
                    raise ExtensionUnresolved(
                        f"extension unresolved: transported certificate for "
                        f"{gen.render()} has no base over {base_space.key}")
                base_lift, base_order, base_rel = base
                if base_rel is not None:
                    raise KbError("cannot transport a relation certificate")
                # order forcing: the image of the lift still maps onto the
                # generator, so its order is squeezed to the base order
                lifted = rewrite.normalize(
                    rewrite.compose(via, base_lift, ctx), ctx)
                return lifted, base_order, None
            pm = re.match(r"^(\S+)\s+order=(\d+)(?:\s+rel=(.+))?$", payload)
            if not pm:
                raise KbError(f"line {f.line}: bad lift payload {payload!r}")
            lift_el = self.catalog.parse_element(pm.group(1), bound)
            order = int(pm.group(2))
            rel_el = (self.catalog.parse_element(pm.group(3).strip(), bound)
                      if pm.group(3) else None)
            return rewrite.normalize(lift_el, ctx), order, rel_el
        return None

    def _solve_free(self, args, env, ctx, bindings):
        """Coefficient of the free generator from a comparison-map equation.

        The comparison map kills every torsion generator (checked), so
        the image of a * g1 + b * free + c * g3 determines b by exact
        division in the torsion-free target.
        """
        base = bindings[args["group"]]
        target = bindings[args["target"]]
        mapel = self._parse_el(args["map"], env, bindings)
        free_gen = self._parse_el(args["free"], env, bindings)
        value = _as_element(bindings, args["value"])
        free_i = _find_generator(base, free_gen, ctx)
        img_free = None
        for i in range(base.group.rank):
            gen = self.catalog.registry.unfold_element(base.generator_element(i))
            img = rewrite.compose(mapel, gen, ctx)
            v = express(img, target, ctx)
            if i == free_i:
                img_free = v
            elif any(v):
                raise DeriveError(
                    f"torsion generator {base.group.label(i)} survives in the "
                    "torsion-free target; the coefficient is not isolated")
        want = express(value, target, ctx)
        qs = set()
        for a, b in zip(want, img_free):
            if b == 0:
                if a != 0:
                    raise DeriveError("value is not a multiple of the image")
                continue
            if a % b:
                raise DeriveError("value is not an exact multiple of the image")
            qs.add(a // b)
        if len(qs) != 1:
            raise DeriveError(f"inconsistent coefficient candidates {qs}")
        return qs.pop()

    def _suspension_kill(self, args, env, ctx, bindings):
        """Solve Sigma(a*g1 + b*free + c*g3) = 0 over the torsion coefficients.

        Returns the unique (a, c, ...) assignment; raises when the kill is
        not unique or nonzero coefficients are forced.
        """
        base = bindings[args["group"]]
        sp, k = args["target"].split("@")
        target = pi_group_from_fact(self.catalog, env,
                                    parse_space(sp.strip(), env),
                                    int(k), ctx)
        free_gen = self._parse_el(args["free"], env, bindings)
        b = bindings[args["coeff"]]
        free_i = _find_generator(base, free_gen, ctx)
        torsion = [i for i in range(base.group.rank)
                   if i != free_i and base.group.orders[i] != 0]
        if any(base.group.orders[i] > 2 for i in torsion):
            raise DeriveError("torsion coefficient ranges beyond Z/2 are not "
                              "implemented")
        images = {i: rewrite.suspend(base.generator_element(i), ctx,
                                     self.catalog.registry)
                  for i in range(base.group.rank)}
        solutions = []
        n = len(torsion)
        for mask in range(2**n):
            coeffs = {torsion[j]: (mask >> j) & 1 for j in range(n)}
            total = images[free_i].scale(b)
            for i, c in coeffs.items():
                if c:
                    total = total + images[i]
            vec = express(total, target, ctx)
            if not any(vec):
                solutions.append(tuple(coeffs[i] for i in torsion))
        if solutions != [tuple(0 for _ in torsion)]:
            raise AssertionMismatch(
                f"suspension equation does not force zero coefficients: "
                f"{solutions}")
        return solutions[0]


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def chart_apply(chart, fullvec, group):
    out = [sum(chart.rows[i][j] * fullvec[j] for j in range(chart.ncols))
           for i in range(chart.nrows)]
    return group.reduce_vector(out)


def _space_head_params(space):
    from .kb import _space_head
    return _space_head(space)


def _element_from_chart(pig: PiGroup, vec) -> Element:
    out = None
    for i, c in enumerate(vec):
        if c == 0:
            continue
        piece = pig.generator_element(i).scale(c)
        out = piece if out is None else out + piece
    if out is None:
        first = pig.protos[0][0] if pig.protos else None
        if first is None:
            raise DeriveError("cannot build the zero element without protos")
        return Element.zero(first.source, first.target)
    return out


def _find_generator(pig: PiGroup, gen: Element, ctx) -> int:
    want = rewrite.normalize(gen, ctx).key()
    for i in range(pig.group.rank):
        if rewrite.normalize(pig.generator_element(i), ctx).key() == want:
            return i
    raise DeriveError(f"generator {gen.render()} not found in "
                      f"{pig.group.describe()}")


def _as_element(bindings, name) -> Element:
    v = bindings.get(name)
    if not isinstance(v, Element):
        raise DeriveError(f"{name!r} is not an element binding")
    return v


def _element_shape(el: Element):
    return tuple(sorted((t.render(), abs(strip_odd(c))) for t, c in el.terms))


def _render_value(v) -> str:
    if isinstance(v, PiGroup):
        return v.group.describe()
    if isinstance(v, Element):
        return v.render()
    if isinstance(v, Boundary):
        if v.is_zero():
            return "boundary = 0"
        return "boundary " + "; ".join(x.render() for x in v.values)
    return repr(v)


def _fmt_env(env, params):
    return "(" + ", ".join(f"{p}={env[p]}" for p in params) + ")"


def load_scripts() -> Dict[str, Script]:
    """The six shipped derivations, one per group-table result."""
    from importlib import resources
    out = {}
    data = resources.files("conechase").joinpath("data")
    for entry in sorted(data.iterdir()):
        if entry.name.endswith(".deriv"):
            script = parse_script(entry.read_text(),
                                  name_hint=entry.name[:-6])
            out[script.name] = script
    return out


def default_catalog() -> KbCatalog:
    from importlib import resources
    from .kb import load_catalog
    path = resources.files("conechase").joinpath("data/paper.facts")
    with resources.as_file(path) as p:
        return load_catalog(p)
