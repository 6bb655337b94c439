"""The shipped derivations: tables, transcripts, replays, and failure
modes."""

import pytest

from conechase.derive import (
    AssertionMismatch,
    DeriveError,
    Runner,
    parse_script,
)
from conechase.groups import ExtensionUnresolved, TwoLocalGroup
from conechase.kb import KbMissingFact


def q(*orders):
    return TwoLocalGroup(list(orders))


PI5_L4 = {0: q(0), 1: q(0, 4), **{m: q(0, 2, 2) for m in range(2, 9)}}
PI6_L4 = {1: q(2, 4, 2), 2: q(2, 2, 8, 2),
          **{m: q(2, 4, 2**m, 2) for m in range(3, 9)}}
PI6_F = {1: q(2, 2, 2, 2), **{r: q(2, 2, 4, 2**r) for r in range(2, 9)}}
PI5_P3 = {1: q(2, 2, 2), **{r: q(2, 2, 2, 2**r) for r in range(2, 9)}}
PI6_P3 = {1: q(2, 2, 2, 2, 2), **{r: q(2, 2, 4, 4, 2**r) for r in range(2, 9)}}


def test_pi5_of_the_two_cell_cone(runner):
    for m, want in PI5_L4.items():
        assert runner.run("pi5_L4m", {"m": m}).group == want


def test_pi6_of_the_two_cell_cone(runner):
    for m, want in PI6_L4.items():
        assert runner.run("pi6_L4m", {"m": m}).group == want


def test_gamma3_coefficient(runner):
    for r in range(1, 9):
        res = runner.run("gamma3", {"r": r})
        ((term, c),) = res.value.terms
        assert abs(c) == 3 * 2**r
        assert term.render() == f"beta({r + 1})"


def test_pi6_of_the_third_stage(runner):
    for r, want in PI6_F.items():
        res = runner.run("pi6_J3", {"r": r})
        assert res.group == want
        # the wedge-comparison square is verified on the nose in-run
        assert "check map=wmap" in res.transcript
        assert "[ok]" in res.transcript


def test_pi5_of_the_moore_space(runner):
    for r, want in PI5_P3.items():
        assert runner.run("pi5_P3", {"r": r}).group == want


def test_pi6_of_the_moore_space(runner):
    for r, want in PI6_P3.items():
        assert runner.run("pi6_P3", {"r": r}).group == want


def test_transcripts_cite_certified_facts(runner):
    res = runner.run("pi6_P3", {"r": 3}, sweep=False)
    text = res.transcript
    assert "uses lift_certificate" in text
    assert "order-4 lift of nu'" in text or "order=4" in text
    assert '"' in text  # citations are quoted verbatim


def test_replays_are_bit_identical(catalog, scripts):
    a = Runner(catalog, scripts).run("pi6_J3", {"r": 2}, sweep=False)
    b = Runner(catalog, scripts).run("pi6_J3", {"r": 2}, sweep=False)
    assert a.transcript == b.transcript
    assert a.transcript_digest() == b.transcript_digest()


def test_every_final_group_traces_to_steps_or_facts(runner):
    """Transcript completeness: each line is a step, a consumed fact, a
    subderivation, or the result."""
    res = runner.run("pi5_P3", {"r": 2}, sweep=False)
    for line in res.transcript.splitlines()[1:]:
        s = line.strip()
        assert s.startswith(("step", "uses", "=", "(subderivation",
                             "result:")), line


def test_removing_the_lift_of_nu_fails_unresolved(catalog, scripts):
    filtered = catalog.without_facts(
        lambda f: "nut'" in f.payload or "nut'" in f.subject)
    runner = Runner(filtered, scripts)
    for r in (2, 3):
        with pytest.raises(ExtensionUnresolved, match="extension unresolved"):
            runner.run("pi6_P3", {"r": r}, sweep=False)
    # pi_5 rows do not depend on that certificate
    assert runner.run("pi5_P3", {"r": 2}, sweep=False).group == PI5_P3[2]


def test_removing_eta4_certificates_breaks_the_cone_rows(catalog, scripts):
    filtered = catalog.without_facts(
        lambda f: f.kind == "lift_certificate" and ": eta_4" in f.subject
        and "@ 5" in f.subject)
    runner = Runner(filtered, scripts)
    with pytest.raises(ExtensionUnresolved):
        runner.run("pi5_L4m", {"m": 2}, sweep=False)


def test_wrong_table_fact_hits_the_assertion(catalog, scripts, tmp_path):
    """Corrupting a classical input makes the chase disagree with the
    asserted table, not silently pass."""
    text = catalog.serialize().replace(
        "Z/2{j2_25.eta_5}", "Z/4{j2_25.eta_5}")
    assert "Z/4{j2_25.eta_5}" in text
    p = tmp_path / "corrupt.facts"
    p.write_text(text)
    from conechase.kb import load_catalog
    bad = Runner(load_catalog(p), scripts)
    with pytest.raises((AssertionMismatch, DeriveError)):
        bad.run("pi6_L4m", {"m": 3}, sweep=False)


def test_sweep_invariance_under_sign_and_eps(runner):
    # full grid over sign/eps/x/y; identical groups required by run()
    for r in (1, 2):
        runner.run("pi5_P3", {"r": r}, sweep=True)
        runner.run("pi6_P3", {"r": r}, sweep=True)


def test_script_without_return_errors(catalog):
    s = parse_script("derivation broken\nparams m\n"
                     "let F5 = fiber_group fib=F_pL(m); k=5\n")
    r = Runner(catalog, {"broken": s})
    with pytest.raises(DeriveError, match="no terminal group"):
        r.run("broken", {"m": 2}, sweep=False)


def test_unknown_script_errors(runner):
    with pytest.raises(DeriveError, match="unknown derivation script"):
        runner.run("pi7_P3", {"r": 1}, sweep=False)


def test_segment_assembly_and_exactness_audit(catalog, runner):
    """The window around pi_5 of the cone: filled slots compose to the
    computed group, and the order audit holds."""
    from conechase import les
    from conechase.les import pi_group_from_fact, push_forward
    from conechase.terms import wedge
    m = 3
    envm = {"m": m, "sign": 1, "eps": 0, "x": 0, "y": 1}
    ctx = catalog.rule_context(envm)
    fib = les.fibration(catalog, envm, "F_pL", (m,))
    runner_res = runner.run("pi5_L4m", {"m": m}, sweep=False)
    jf = catalog.parser(envm).parse(f"j_F({m})")
    fiber_groups = {
        k: push_forward(pi_group_from_fact(catalog, envm, wedge(2, 5), k, ctx),
                        jf, jf.target, ctx)
        for k in (4, 5)}
    seg = les.assemble_segment(catalog, envm, fib, 5, fiber_groups, ctx,
                               cone_mid=runner_res.group)
    assert seg.base_upper.group == TwoLocalGroup([2])
    assert seg.base_mid.group == TwoLocalGroup([2])
    assert seg.d_upper is not None and seg.d_upper.is_zero()
    assert seg.audit()


def test_segment_below_connectivity_is_trivial(catalog, env):
    from conechase import les
    ctx = catalog.rule_context(env)
    fib = les.fibration(catalog, env, "F_pL", (3,))
    seg = les.assemble_segment(catalog, env, fib, 2, {}, ctx)
    assert seg.base_mid.group.is_trivial()


def test_step_errors_carry_the_step_index(catalog, scripts):
    filtered = catalog.without_facts(
        lambda f: "nut'" in f.payload or "nut'" in f.subject)
    runner = Runner(filtered, scripts)
    with pytest.raises(ExtensionUnresolved, match=r"step \d+ \(extension\)"):
        runner.run("pi6_P3", {"r": 2}, sweep=False)


def test_trivial_group_edges(catalog, env):
    from conechase.les import PiGroup, express
    from conechase.terms import Element, sphere
    ctx = catalog.rule_context(env)
    triv = PiGroup(TwoLocalGroup([]), sphere(3), 9, [])
    z = Element.zero(sphere(9), sphere(3))
    assert express(z, triv, ctx) == ()


def test_exactness_audit_for_the_moore_space_window(catalog, runner):
    """|pi_6(P^3(2^r))| = |coker d7| * |ker d6| with all slots computed."""
    from conechase.les import assemble_segment
    from conechase import les
    for r in (1, 2, 3):
        envr = {"r": r, "sign": 1, "eps": 0, "x": 0, "y": 1}
        ctx = catalog.rule_context(envr)
        fib = les.fibration(catalog, envr, "F_p", (r,))
        piC6 = runner.run("pi6_J3", {"r": r}, sweep=False).value
        # rebuild the stage-3 pi_5 chart exactly as the script does
        piL5 = runner.run("pi5_L4m", {"m": r + 1}, sweep=False).value
        g3 = runner.run("gamma3", {"r": r}, sweep=False).value
        from conechase.les import express, derived_pi_group, push_forward
        from conechase.groups import quotient_by_elements
        vec = express(g3, piL5, ctx)
        gq, proj = quotient_by_elements(piL5.group, [list(vec)])
        piJ5 = derived_pi_group(piL5, gq, proj)
        piJ5 = push_forward(piJ5, catalog.parser(envr).parse(f"I_3({r})"),
                            catalog.parser(envr).parse(f"I_3({r})").target,
                            ctx)
        cone6 = runner.run("pi6_P3", {"r": r}, sweep=False).group
        seg = assemble_segment(catalog, envr, fib, 6,
                               {5: piJ5, 6: piC6}, ctx, cone_mid=cone6)
        assert seg.d_upper is not None and seg.d_upper.is_zero()
        assert seg.d_lower is not None
        assert seg.audit(), f"pi_6 window audit failed at r={r}"


def test_golden_transcript(runner):
    """The full r=2 transcript is pinned; format or content drift must be
    reviewed as a diff."""
    import pathlib
    res = runner.run("pi6_P3", {"r": 2}, sweep=False)
    golden = (pathlib.Path(__file__).parent / "golden" /
              "pi6_P3_r2.transcript").read_text()
    assert res.transcript == golden
