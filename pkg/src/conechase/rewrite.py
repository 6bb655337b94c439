"""Normalization and calculus for homotopy-class elements.

The engine only performs expansions it can justify exactly:

* post-composition is a homomorphism, so sums and integer scalars in the
  *inner* factor of ``f . g`` always distribute;
* sums/scalars in the *outer* factor distribute only across a co-H
  (suspension) inner map -- attempting it otherwise is refused in strict
  mode (or parked as an opaque composite);
* a scalar on a word is the word composed with a degree map of its source
  sphere, and degree maps tunnel rightward through suspension symbols,
  through anything under an H-space sphere (S^3, licensed by the vanishing
  of its Whitehead square), and through the S^2 Hopf class with the
  classical k -> k^2 twist;
* coefficients are reduced modulo any known order of a suffix of the
  word, since the order of an image divides the order of the element
  being pushed.

Unknown composites stay as unexpanded words: silence never fabricates a
vanishing.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

from .terms import (
    Bracket,
    Element,
    OpaqueComp,
    Pair,
    Space,
    Sym,
    TermError,
    Word,
    deg_sym,
    is_suspension_space,
    sphere,
)


class RewriteError(TermError):
    pass


class StrictExpansionError(RewriteError):
    """An expansion was requested that no exactness rule licenses."""


class RuleContext:
    """Instantiated rewrite data for one run.

    word_rules: {(name, name, ...): [(lhs_word, rhs_element, note)]}
    bracket_rules: {(slotkey, slotkey): (rhs_element, note)}
    triple_values: {(slotkeys): (rhs_element, note)}  -- singleton sets
    order_bounds: {word key tuple: order}
    """

    def __init__(self, strict: bool = True, on_rule: Optional[Callable] = None,
                 registry=None):
        self.word_rules = {}
        self.bracket_rules = {}
        self.triple_values = {}
        self.order_bounds = {}
        self.susp_words = {}      # word key -> rhs element of the suspension
        self.strict = strict
        self.on_rule = on_rule    # callback(note) when a fact is consumed
        self.registry = registry  # for definitional unfolding of stuck words
        self.s3_hspace = False
        self._stuck_cache = {}

    # -- registration --------------------------------------------------------

    def add_word_rule(self, lhs: Word, rhs: Element, note: str = ""):
        sig = tuple(s.name for s in lhs.syms)
        self.word_rules.setdefault(sig, []).append((lhs, rhs, note))

    def add_bracket_rule(self, slots, rhs: Element, note: str = ""):
        key = tuple(s.key() for s in slots)
        self.bracket_rules[key] = (rhs, note)
        names = [self._slot_name(s) for s in slots]
        if names == [("id", "S3"), ("id", "S3")] and rhs.is_zero():
            self.s3_hspace = True

    @staticmethod
    def _slot_name(el: Element):
        sw = el.single_word()
        if sw is None:
            return None
        w, _ = sw
        if w.is_identity():
            return ("id", w.space.key)
        return tuple(s.name for s in w.syms)

    def add_triple_value(self, slots, rhs: Element, note: str = ""):
        self.triple_values[tuple(s.key() for s in slots)] = (rhs, note)

    def add_order_bound(self, word: Word, order: int, note: str = ""):
        self.order_bounds[word.key()] = order

    def add_susp_word(self, lhs: Word, rhs: Element, note: str = ""):
        self.susp_words[lhs.key()] = (rhs, note)

    # -- lookups --------------------------------------------------------------

    def _consumed(self, note):
        if note and self.on_rule:
            self.on_rule(note)

    def suffix_bound(self, word: Word) -> Optional[int]:
        syms = word.syms
        best = None
        for j in range(len(syms)):
            tail = Word(syms[j:])
            b = self.order_bounds.get(tail.key())
            if b is not None and (best is None or b < best):
                best = b
            if j == len(syms) - 1 and isinstance(syms[j], Sym):
                o = syms[j].order
                if o:
                    if best is None or o < best:
                        best = o
        return best


EMPTY_CONTEXT = RuleContext(strict=False)


# ---------------------------------------------------------------------------
# raw construction helpers (used by the parser; no rules applied)
# ---------------------------------------------------------------------------

def raw_concat(left: Element, right: Element) -> Element:
    """Textual composition left . right without normalization."""
    lw = left.single_word()
    rw = right.single_word()
    if lw is not None and rw is not None:
        (w1, c1), (w2, c2) = lw, rw
        syms = list(w1.syms) + list(w2.syms)
        word = Word(syms) if syms else Word((), w2.space)
        return Element.from_term(word, c1 * c2)
    if lw is not None and len(right.terms) == 1:
        # a single map written in front of a bracket: binary naturality
        w1, c1 = lw
        term, c2 = right.terms[0]
        if isinstance(term, Bracket) and c1 in (1, -1) and term.arity == 2:
            head = (Element.from_term(Word(w1.syms)) if w1.syms
                    else Element.identity(w1.space))
            slots = [raw_concat(head, s) for s in term.slots]
            return Element.from_term(Bracket(slots, term.tag), c1 * c2)
    raise TermError("composition of composite sums must go through compose()")


def whitehead_raw(slots: Sequence[Element]) -> Element:
    return Element.from_term(Bracket(slots))


# ---------------------------------------------------------------------------
# word normalization
# ---------------------------------------------------------------------------

def _is_susp_word(w: Word) -> bool:
    if w.is_identity():
        return is_suspension_space(w.space)
    return all(getattr(s, "is_susp", False) for s in w.syms)


def _splice(pre, rhs_syms, post):
    return list(pre) + list(rhs_syms) + list(post)


def normalize_word(word: Word, coeff: int, ctx: RuleContext,
                   _depth: int = 0) -> Element:
    """Fully normalize coeff * word into an element."""
    syms = list(word.syms)
    space = word.space
    guard = 0
    while True:
        guard += 1
        if guard > 500:
            raise RewriteError(f"rewriting did not terminate on {word.render()}")
        changed = False

        # drop unit degree maps, absorb zero ones
        for i, s in enumerate(syms):
            if isinstance(s, Sym) and s.name == "deg":
                k = s.params[0]
                if k == 1:
                    del syms[i]
                    changed = True
                    break
                if k == 0:
                    return Element.zero(word.source, word.target)
        if changed:
            continue

        # merge adjacent degree maps
        for i in range(len(syms) - 1):
            a, b = syms[i], syms[i + 1]
            if (isinstance(a, Sym) and a.name == "deg"
                    and isinstance(b, Sym) and b.name == "deg"):
                syms[i: i + 2] = [deg_sym(a.params[0] * b.params[0], a.params[1])]
                changed = True
                break
        if changed:
            continue

        # a degree map in final position is an inner scalar: exact
        if syms and isinstance(syms[-1], Sym) and syms[-1].name == "deg":
            coeff *= syms[-1].params[0]
            src = syms[-1].source
            syms = syms[:-1]
            if not syms:
                space = src
            continue

        # tunnel degree maps rightward where that is exact
        for i in range(len(syms) - 1):
            s = syms[i]
            if not (isinstance(s, Sym) and s.name == "deg"):
                continue
            k, n = s.params
            nxt = syms[i + 1]
            moved = False
            if all(getattr(t, "is_susp", False) for t in syms[i + 1:]):
                # the whole tail is a suspension, so the degree map is a
                # plain scalar on it
                del syms[i]
                coeff *= k
                moved = True
            elif isinstance(nxt, Sym) and nxt.name == "eta_2":
                # degree k on S^2 multiplies the Hopf class by k^2
                syms[i: i + 2] = [nxt, deg_sym(k * k, 3)]
                moved = True
            elif getattr(nxt, "is_susp", False) and nxt.source.kind == "sphere":
                syms[i: i + 2] = [nxt, deg_sym(k, nxt.source.data[0])]
                moved = True
            elif n == 3 and ctx.s3_hspace and nxt.source.kind == "sphere":
                # all Whitehead products of S^3 vanish: degree maps act
                # linearly on every homotopy group of S^3
                syms[i: i + 2] = [nxt, deg_sym(k, nxt.source.data[0])]
                moved = True
            if moved:
                changed = True
                break
        if changed:
            continue

        # wedge projection/inclusion annihilation (matching wedge tags)
        for i in range(len(syms) - 1):
            a, b = syms[i], syms[i + 1]
            if not (isinstance(a, Sym) and isinstance(b, Sym)):
                continue
            names = (a.name.split("_")[0], b.name.split("_")[0])
            if names in (("q1", "j1"), ("q2", "j2")) and a.source == b.target:
                syms[i: i + 2] = []
                if not syms:
                    space = b.source
                changed = True
                break
            if names in (("q1", "j2"), ("q2", "j1")) and a.source == b.target:
                return Element.zero(word.source, word.target)
        if changed:
            continue

        # co-pairing evaluation
        for i, s in enumerate(syms):
            if isinstance(s, Pair) and i + 1 < len(syms):
                nxt = syms[i + 1]
                if isinstance(nxt, Sym) and nxt.name.startswith(("j1", "j2")):
                    comp = s.f if nxt.name.startswith("j1") else s.g
                    pre = Word(syms[:i]) if syms[:i] else Word((), s.target)
                    post = (Word(syms[i + 2:]) if syms[i + 2:]
                            else Word((), nxt.source))
                    el = compose(_word_el(pre, 1), comp, ctx)
                    el = compose(el, _word_el(post, 1), ctx)
                    return el.scale(coeff)
        # table-driven rewrite rules, longest match first, leftmost position
        applied = None
        for length in (3, 2, 1):
            if applied:
                break
            for i in range(len(syms) - length + 1):
                chunk = syms[i: i + length]
                if not all(isinstance(s, Sym) for s in chunk):
                    continue
                sig = tuple(s.name for s in chunk)
                for lhs, rhs, note in ctx.word_rules.get(sig, ()):
                    if tuple(s.key for s in chunk) == tuple(s.key for s in lhs.syms):
                        applied = (i, length, rhs, note)
                        break
                if applied:
                    break
        if applied:
            i, length, rhs, note = applied
            ctx._consumed(note)
            sw = rhs.single_word()
            if rhs.is_zero():
                return Element.zero(word.source, word.target)
            if sw is not None:
                w2, c2 = sw
                coeff *= c2
                syms = _splice(syms[:i], w2.syms, syms[i + length:])
                if not syms:
                    space = w2.source if w2.syms == () else rhs.source
                    space = rhs.source
                continue
            # multi-term replacement: splice via gated composition
            pre = Word(syms[:i]) if syms[:i] else Word((), rhs.target)
            post = (Word(syms[i + length:]) if syms[i + length:]
                    else Word((), rhs.source))
            el = compose(_word_el(pre, 1), rhs, ctx)
            el = compose(el, _word_el(post, 1), ctx)
            return el.scale(coeff)
        break

    if not syms:
        w = Word((), space if space is not None else word.source)
    else:
        w = Word(syms)
    bound = ctx.suffix_bound(w)
    if bound:
        coeff %= bound
    if coeff == 0:
        return Element.zero(word.source, word.target)
    stuck = Element.from_term(w, coeff)
    # A stuck word may only be blocked by a defined abbreviation hiding a
    # redex (a comparison map meeting a collapsed inclusion, say): unfold
    # once and keep that route only if it refolds to something new.  Every
    # abbreviation has a collapse rule, so a fruitless unfold folds back
    # to the same word and is dropped here.
    if _depth == 0 and ctx.registry is not None and len(w.syms) > 1 \
            and _has_defn(w, ctx.registry):
        cache_key = (w.key(), coeff)
        hit = ctx._stuck_cache.get(cache_key)
        if hit is not None:
            out, fired = hit
            # replay the citations the unfold consumed, so transcripts do
            # not depend on cache warmth
            for note in fired:
                ctx._consumed(note)
            return out
        captured = []
        orig_hook = ctx.on_rule
        ctx.on_rule = captured.append
        try:
            unfolded = ctx.registry.unfold_element(stuck)
            redone = Element.zero(stuck.source, stuck.target)
            for t, c in unfolded.terms:
                if isinstance(t, Word):
                    redone = redone + normalize_word(t, c, ctx, _depth=1)
                else:
                    redone = redone + _normalize_bracket(t, c, ctx)
        finally:
            ctx.on_rule = orig_hook
        out = redone if redone.key() != stuck.key() else stuck
        ctx._stuck_cache[cache_key] = (out, tuple(captured))
        for note in captured:
            ctx._consumed(note)
        return out
    return stuck


def _has_defn(w: Word, registry) -> bool:
    for s in w.syms:
        spec = registry.specs.get(getattr(s, "name", ""))
        if spec is not None and spec.defn is not None:
            return True
    return False


def _word_el(w: Word, c: int) -> Element:
    return Element.from_term(w, c)


# ---------------------------------------------------------------------------
# element normalization / composition
# ---------------------------------------------------------------------------

def normalize(e: Element, ctx: RuleContext) -> Element:
    out = Element.zero(e.source, e.target)
    for term, c in e.terms:
        if isinstance(term, Word):
            out = out + normalize_word(term, c, ctx)
        elif isinstance(term, Bracket):
            out = out + _normalize_bracket(term, c, ctx)
        else:
            out = out + Element.from_term(term, c)
    return Element(e.source, e.target, out.terms, is_suspension=e.is_suspension)


def _normalize_bracket(b: Bracket, coeff: int, ctx: RuleContext) -> Element:
    slots = [normalize(s, ctx) for s in b.slots]
    if any(s.is_zero() for s in slots):
        return Element.zero(b.source, b.target)
    if b.arity == 2:
        # the binary generalized product is bilinear over suspension slots
        out = Element.zero(b.source, b.target)
        for w1, c1 in slots[0].terms:
            for w2, c2 in slots[1].terms:
                e1 = Element.from_term(w1)
                e2 = Element.from_term(w2)
                rule = ctx.bracket_rules.get((e1.key(), e2.key()))
                if rule is not None:
                    rhs, note = rule
                    ctx._consumed(note)
                    out = out + normalize(rhs, ctx).scale(coeff * c1 * c2)
                else:
                    out = out + Element.from_term(Bracket([e1, e2], b.tag),
                                                  coeff * c1 * c2)
        return out
    # higher products: keep slots intact (set-valued semantics)
    return Element.from_term(Bracket(slots, b.tag), coeff)


def compose(f: Element, g: Element, ctx: RuleContext) -> Element:
    """Normalized composite f . g (g applied first)."""
    if f.is_zero() or g.is_zero():
        return Element.zero(g.source, f.target)
    if g.target != f.source:
        raise TermError(
            f"space mismatch: {g.target.key} composed into {f.source.key}")
    out = Element.zero(g.source, f.target)
    for gterm, d in g.terms:
        out = out + _compose_inner(f, gterm, ctx).scale(d)
    return normalize(out, ctx)


def _compose_inner(f: Element, gterm, ctx: RuleContext) -> Element:
    if isinstance(gterm, Bracket):
        return _compose_into_bracket(f, gterm, ctx)
    gword: Word = gterm
    if len(f.terms) == 1:
        term, c = f.terms[0]
        if isinstance(term, Bracket):
            if gword.is_identity():
                return Element.from_term(term, c)
            # bracket composed with a degree map is an inner scalar
            if (len(gword.syms) == 1 and isinstance(gword.syms[0], Sym)
                    and gword.syms[0].name == "deg"):
                return Element.from_term(term, c * gword.syms[0].params[0])
            raise StrictExpansionError(
                "composing a bracket with a general map needs an explicit "
                "slot-restriction step")
        word: Word = term
        if c == 1 or _is_susp_word(gword):
            merged = _concat_words(word, gword)
            return normalize_word(merged, c, ctx)
        if word.source.kind == "sphere":
            # c * w == w . deg(c): exact, the scalar tunnels if it can
            n = word.source.data[0]
            merged = _concat_words(Word(tuple(word.syms) + (deg_sym(c, n),))
                                   if word.syms else Word((deg_sym(c, n),)),
                                   gword)
            return normalize_word(merged, 1, ctx)
        if ctx.strict:
            raise StrictExpansionError(
                f"cannot move scalar {c} across {gword.render()}: inner map "
                "is not a suspension and the interface is not a sphere")
        return Element.from_term(OpaqueComp(f, gword))
    # multi-term outer factor
    if _is_susp_word(gword):
        out = Element.zero(gword.source, f.target)
        for term, c in f.terms:
            out = out + _compose_inner(Element.from_term(term, c), gword, ctx)
        return out
    if gword.is_identity():
        return f
    if ctx.strict:
        raise StrictExpansionError(
            f"cannot distribute a sum across {gword.render()}: inner map is "
            "not a suspension")
    return Element.from_term(OpaqueComp(f, gword))


def _concat_words(a: Word, b: Word) -> Word:
    syms = tuple(a.syms) + tuple(b.syms)
    if not syms:
        return Word((), b.space)
    return Word(syms)


def _compose_into_bracket(f: Element, b: Bracket, ctx: RuleContext) -> Element:
    """f . [h1, ..., hn] pushes into the slots (naturality)."""
    sw = f.single_word()
    if sw is None:
        raise StrictExpansionError("only a single map pushes into a bracket")
    w, c = sw
    if c != 1:
        raise StrictExpansionError(
            "scale a bracket through its slots, not through the outer map")
    slots = [compose(Element.from_term(w) if w.syms else Element.identity(w.space),
                     s, ctx) for s in b.slots]
    tag = b.tag or ("member" if b.arity >= 3 else "")
    return _normalize_bracket(Bracket(slots, tag), 1, ctx)


# ---------------------------------------------------------------------------
# the public calculus
# ---------------------------------------------------------------------------

def scale(e: Element, k: int, ctx: RuleContext) -> Element:
    return normalize(e.scale(k), ctx)


def whitehead(f: Element, g: Element, ctx: RuleContext) -> Element:
    """Generalized Whitehead product of two classes on suspensions."""
    for s in (f, g):
        if not is_suspension_space(s.source):
            raise TermError(
                f"Whitehead product needs suspension sources, got {s.source.key}")
    if f.target != g.target:
        raise TermError("Whitehead product slots must share a target")
    if f.is_zero() or g.is_zero():
        # bilinearity: a zero slot kills the product
        src = Bracket.smash_source([f.source, g.source])
        return Element.zero(src, f.target)
    return _normalize_bracket(Bracket([f, g]), 1, ctx)


def higher_bracket(slots: Sequence[Element], tag: str, ctx: RuleContext) -> Element:
    return _normalize_bracket(Bracket(list(slots), tag), 1, ctx)


def naturality_push(g: Element, bracket_el: Element, ctx: RuleContext) -> Element:
    """g . [h1,...,hn] -> [g h1, ..., g hn] (a member, for arity >= 3)."""
    if len(bracket_el.terms) != 1 or not isinstance(bracket_el.terms[0][0], Bracket):
        raise TermError("naturality_push expects a single bracket term")
    b, c = bracket_el.terms[0]
    pushed = _compose_into_bracket(g, b, ctx)
    return pushed.scale(c)


def bracket_restrict(bracket_el: Element, restrictions: Sequence[Element],
                     ctx: RuleContext) -> Element:
    """Compose each slot with a suspension map: [h1,h2] . Sigma(f1 ^ f2)
    equals [h1 f1', h2 f2'] for the evident slot restrictions."""
    if len(bracket_el.terms) != 1 or not isinstance(bracket_el.terms[0][0], Bracket):
        raise TermError("bracket_restrict expects a single bracket term")
    b, c = bracket_el.terms[0]
    if len(restrictions) != b.arity:
        raise TermError("one restriction per slot is required")
    for r in restrictions:
        if not _element_is_susp(r):
            raise StrictExpansionError("slot restrictions must be suspensions")
    slots = [compose(s, r, ctx) for s, r in zip(b.slots, restrictions)]
    return _normalize_bracket(Bracket(slots, b.tag), c, ctx)


def _element_is_susp(e: Element) -> bool:
    if e.is_suspension:
        return True
    sw = e.single_word()
    return sw is not None and _is_susp_word(sw[0])


def bracket_factor_head(bracket_el: Element, head: Element,
                        ctx: RuleContext) -> Element:
    """Rewrite [g a, g b] as g . [a, b] (binary naturality, reversed).

    Returns the inner bracket [a, b]; the caller re-applies ``head``.
    """
    if len(bracket_el.terms) != 1 or not isinstance(bracket_el.terms[0][0], Bracket):
        raise TermError("bracket_factor_head expects a single bracket term")
    b, c = bracket_el.terms[0]
    if b.arity != 2:
        raise TermError("head factoring is only available for binary products")
    hw = head.single_word()
    if hw is None or hw[1] != 1:
        raise TermError("head must be a single unsigned word")
    hsyms = hw[0].syms
    inner = []
    for s in b.slots:
        sw = s.single_word()
        if sw is None:
            raise TermError("slots must be single words to factor a head")
        w, cs = sw
        if tuple(w.syms[:len(hsyms)]) != tuple(hsyms):
            raise TermError(
                f"slot {w.render()} does not start with {hw[0].render()}")
        rest = w.syms[len(hsyms):]
        inner.append(Element.from_term(
            Word(rest) if rest else Word((), hw[0].source), cs))
    return _normalize_bracket(Bracket(inner, b.tag), c, ctx)


def suspend(e: Element, ctx: RuleContext, registry=None) -> Element:
    """Suspension homomorphism on elements.

    Whitehead bracket terms of any arity suspend to zero.  Words consult
    whole-word suspension facts first, then suspend symbol by symbol; a
    symbol with no registered suspension image makes the term opaque.
    """
    from .terms import suspend_space
    src = suspend_space(e.source)
    tgt = suspend_space(e.target)
    out = Element.zero(src, tgt)
    for term, c in e.terms:
        if isinstance(term, Bracket):
            continue  # Sigma kills every Whitehead product
        word: Word = term
        hit = ctx.susp_words.get(word.key())
        if hit is not None:
            rhs, note = hit
            ctx._consumed(note)
            out = out + normalize(rhs, ctx).scale(c)
            continue
        syms = []
        ok = True
        for s in word.syms:
            img = _suspend_sym(s, registry)
            if img is None:
                ok = False
                break
            syms.append(img)
        if not ok:
            raise RewriteError(
                f"no suspension image for {word.render()}; add a suspension "
                "fact")
        w2 = Word(syms) if syms else Word((), src)
        out = out + normalize_word(w2, c, ctx)
    return Element(src, tgt, out.terms, is_suspension=True)


def _suspend_sym(s, registry):
    if isinstance(s, Pair):
        return None
    if s.name == "deg":
        return deg_sym(s.params[0], s.params[1] + 1)
    if registry is not None:
        return registry.suspension_image(s)
    return None


def desuspend(e: Element, registry) -> Element:
    """Inverse image under Sigma for elements marked as suspensions."""
    out_terms = []
    src = tgt = None
    for term, c in e.terms:
        if not isinstance(term, Word):
            raise RewriteError("cannot desuspend a bracket term")
        syms = []
        for s in term.syms:
            img = registry.desuspension_image(s)
            if img is None:
                raise RewriteError(
                    f"{term.render()} is not a suspension: KB fact required")
            syms.append(img)
        w = Word(syms) if syms else Word((), _desusp_space(term.space))
        out_terms.append((w, c))
        src, tgt = w.source, w.target
    if src is None:
        from .terms import suspend_space
        raise RewriteError("cannot desuspend the zero element without context")
    return Element(src, tgt, out_terms)


def _desusp_space(sp: Space) -> Space:
    if sp.kind == "sphere":
        return sphere(sp.data[0] - 1)
    raise RewriteError(f"cannot desuspend space {sp.key}")


def triple_indeterminacy(ambients, label: str = ""):
    """Indeterminacy subgroup of a triple product from its ambient groups.

    The subgroup is generated by brackets against the three mixed-smash
    mapping groups; when all three vanish the product is a singleton.
    Nontrivial ambient groups are out of scope for the shipped rules.
    """
    from .groups import TwoLocalGroup
    for a in ambients:
        if a is None:
            raise RewriteError("KB fact required: ambient group missing")
    if all(a.is_trivial() for a in ambients):
        return TwoLocalGroup([])
    raise RewriteError(
        "KB fact required: indeterminacy with nontrivial ambient groups "
        f"is not mechanized ({label})")


def resolve_triple(bracket_el: Element, ambients, ctx: RuleContext) -> Element:
    """Pin down a triple product: scalars leave the slots, the base value
    comes from a stored singleton fact, and the indeterminacy must vanish."""
    if len(bracket_el.terms) != 1 or not isinstance(bracket_el.terms[0][0], Bracket):
        raise TermError("resolve_triple expects a single bracket term")
    b, c = bracket_el.terms[0]
    if b.arity != 3:
        raise TermError("resolve_triple handles arity 3")
    triple_indeterminacy(ambients, label=bracket_el.render())
    k = c
    base_slots = []
    for s in b.slots:
        sw = s.single_word()
        if sw is None:
            raise RewriteError("slots must be single words to resolve")
        w, cs = sw
        syms = list(w.syms)
        # strip trailing degree maps out of the slot: k [.., h, ..] is a
        # member of [.., k h, ..] when the slot source is a suspension
        while syms and isinstance(syms[-1], Sym) and syms[-1].name == "deg":
            cs *= syms[-1].params[0]
            syms = syms[:-1]
        k *= cs
        base_slots.append(Element.from_term(
            Word(syms) if syms else Word((), w.source)))
    hit = ctx.triple_values.get(tuple(s.key() for s in base_slots))
    if hit is None:
        raise RewriteError(
            "KB fact required: no stored value for the base product "
            + Bracket(base_slots).render())
    rhs, note = hit
    ctx._consumed(note)
    return normalize(rhs, ctx).scale(k)
