import random

import pytest

from tunav.engine import Limits, Origin, ProverState, eval_finite, make_fact, prove
from tunav.engine.arith import (
    CONSISTENT,
    INCONSISTENT,
    Constraint,
    check_constraints,
)
from tunav.syntax.ast import BinOp, BoolLit, Call, IntLit, SourceSpan, Type, Var

SPAN = SourceSpan("t.tv", 0, 1, 1, 1)
INT = Type("int")
BOOL = Type("bool")
SEQ = Type("Seq", (INT,))

H = frozenset([Origin("local", "hyp")])
G = frozenset([Origin("goal", "goal")])


def iv(name):
    return Var(SPAN, name=name, ty=INT)


def sv(name):
    return Var(SPAN, name=name, ty=SEQ)


def il(v):
    return IntLit(SPAN, value=v, ty=INT)


def call(name, *args, ty=INT):
    c = Call(SPAN, name=name, args=list(args), ty=ty)
    c.resolved = name
    return c


def b(op, lhs, rhs, ty=BOOL):
    return BinOp(SPAN, op=op, lhs=lhs, rhs=rhs, ty=ty)


def fact(name, binders, hyp, concl, trigger_exprs):
    return make_fact(name, name, binders, hyp, concl, [tuple(trigger_exprs)],
                     frozenset([Origin("lemma", name)]))


# -- arithmetic ----------------------------------------------------------------


def C(coeffs, const, src=0):
    return Constraint(dict(coeffs), const, frozenset([src]))


def test_arith_spec_example_inconsistent():
    # x > 10, y > 20, z == x + y, z <= 30
    x, y, z = 1, 2, 3
    cs = [
        C({x: -1}, 11, 0),                 # x >= 11
        C({y: -1}, 21, 1),                 # y >= 21
        C({z: 1, x: -1, y: -1}, 0, 2),     # z - x - y <= 0
        C({z: -1, x: 1, y: 1}, 0, 2),      # z - x - y >= 0
        C({z: 1}, -30, 3),                 # z <= 30
    ]
    res = check_constraints(cs)
    assert res.status == INCONSISTENT
    assert res.conflict_sources  # points back at source atoms


def test_arith_empty_consistent():
    assert check_constraints([]).status == CONSISTENT


def test_arith_integer_tightening():
    # 2x == 1 is inconsistent over the integers
    cs = [C({1: 2}, -1, 0), C({1: -2}, 1, 0)]
    assert check_constraints(cs).status == INCONSISTENT


def test_arith_brute_force_agreement():
    rng = random.Random(7)
    for _ in range(150):
        nvars = rng.randint(1, 3)
        cs = []
        for i in range(rng.randint(1, 5)):
            coeffs = {v: rng.randint(-3, 3) for v in range(nvars)
                      if rng.random() < 0.8}
            coeffs = {v: c for v, c in coeffs.items() if c}
            cs.append(C(coeffs, rng.randint(-6, 6), i))
        res = check_constraints(cs)
        # brute force over a finite box; a found solution refutes "inconsistent"
        solution_found = False
        box = range(-8, 9)
        import itertools
        for vals in itertools.product(box, repeat=nvars):
            ok = all(sum(c * vals[v] for v, c in cons.coeffs.items())
                     + cons.const <= 0 for cons in cs)
            if ok:
                solution_found = True
                break
        if res.status == INCONSISTENT:
            assert not solution_found
        if res.status == CONSISTENT and solution_found:
            pass  # agreement (rational consistency can exceed the box; fine)


# -- e-matching -----------------------------------------------------------------


def index_fact_state():
    """Graph holding s.index(3) (s a parameter), per the trigger-sensitivity
    walkthrough."""
    st = ProverState()
    s = st.graph.new_term("%s", (), "Seq<int>")
    three = st.graph.int_term(3)
    st.graph.new_term("index", (s, three), "int")
    return st


def test_ematch_no_match_without_application():
    st = index_fact_state()
    f = fact("f", [("i", INT)], None,
             call("is_even", call("index", sv("s"), iv("i")), ty=BOOL),
             [call("is_even", call("index", sv("s"), iv("i")), ty=BOOL)])
    assert st.ematch(f.triggers[0], f) == []


def test_ematch_matches_inner_application():
    st = index_fact_state()
    f = fact("f", [("i", INT)], None,
             call("is_even", call("index", sv("s"), iv("i")), ty=BOOL),
             [call("index", sv("s"), iv("i"))])
    matches = st.ematch(f.triggers[0], f)
    assert len(matches) == 1
    sigma, _ = matches[0]
    assert st.graph.value_of(sigma["i"]) == 3


def test_ematch_empty_graph_no_matches():
    st = ProverState()
    f = fact("f", [("i", INT)], None, call("p", iv("i"), ty=BOOL),
             [call("p", iv("i"), ty=BOOL)])
    assert st.ematch(f.triggers[0], f) == []


def test_ematch_modulo_congruence():
    # b == push(a, 3); trigger contains(push(s, v), x) must match contains(b, 3)
    st = ProverState()
    a = st.graph.new_term("%a", (), "Seq<int>")
    three = st.graph.int_term(3)
    push = st.graph.new_term("push", (a, three), "Seq<int>")
    bterm = st.graph.new_term("%b", (), "Seq<int>")
    st.graph.merge(bterm, push, H)
    st.graph.new_term("contains", (bterm, three), "bool")
    st.graph.process()
    pat = call("contains", call("push", sv("s"), iv("v")), iv("x"), ty=BOOL)
    f = fact("f", [("s", SEQ), ("v", INT), ("x", INT)], None, pat, [pat])
    matches = st.ematch(f.triggers[0], f)
    assert len(matches) == 1
    sigma, just = matches[0]
    assert st.graph.find(sigma["s"]) == st.graph.find(a)
    # the match crossed the b == push(a,3) merge: its origin must be justified
    assert Origin("local", "hyp") in just


# -- prove ------------------------------------------------------------------------


def test_prove_unsatisfiable_goal_fails():
    out = prove([], [], b("==", il(1), il(2)), G)
    assert out.status == "failed"


def test_prove_ground_tautology():
    out = prove([(b("<", il(0), iv("x")), H)], [], b("<=", il(0), iv("x")), G,
                params={"x": INT})
    assert out.status == "verified"


def test_prove_uses_fact_and_reports_core():
    # fact: forall i. trigger p(i): p(i) ==> q(i);  hyp: p(c);  goal: q(c)
    f = fact("imp", [("i", INT)], call("p", iv("i"), ty=BOOL),
             call("q", iv("i"), ty=BOOL), [call("p", iv("i"), ty=BOOL)])
    hyp = (call("p", iv("c"), ty=BOOL), H)
    out = prove([hyp], [f], call("q", iv("c"), ty=BOOL), G, params={"c": INT})
    assert out.status == "verified"
    assert Origin("lemma", "imp") in out.used_core
    assert out.instantiations.get("imp") == 1


def test_prove_failed_without_needed_fact():
    hyp = (call("p", iv("c"), ty=BOOL), H)
    out = prove([hyp], [], call("q", iv("c"), ty=BOOL), G, params={"c": INT})
    assert out.status == "failed"


def test_matching_loop_self_feeding_unknown_rounds():
    # forall x. trigger f(x): f(f(x)) == f(x) + 1 keeps minting fresh classes
    body = b("==", call("f", call("f", iv("x"))), b("+", call("f", iv("x")), il(1), INT))
    f = fact("loop", [("x", INT)], None, body, [call("f", iv("x"))])
    hyp = (b("==", call("f", il(0)), call("f", il(0))), H)
    goal = call("p", il(0), ty=BOOL)
    out = prove([hyp], [f], goal, G, limits=Limits(max_rounds=5))
    assert out.status == "unknown" and out.reason == "rounds"
    assert out.rounds_used <= 5
    assert sum(out.instantiations.values()) <= 10_000


def test_merging_self_feeding_fact_saturates():
    # f(f(x)) == f(x) merges each new term into an old class: the
    # representative-level dedup reaches a fixpoint and reports failed.
    body = b("==", call("f", call("f", iv("x"))), call("f", iv("x")))
    f = fact("idem", [("x", INT)], None, body, [call("f", iv("x"))])
    hyp = (b("==", call("f", il(0)), call("f", il(0))), H)
    goal = call("p", il(0), ty=BOOL)
    out = prove([hyp], [f], goal, G)
    assert out.status == "failed"
    # under a tighter round cap the same fact reports unknown(rounds)
    out2 = prove([hyp], [f], goal, G, limits=Limits(max_rounds=2))
    assert out2.status == "unknown" and out2.reason == "rounds"


def test_case_split_on_disjunction():
    # hyp: p(c) || q(c); fact p(i) ==> r(i); fact q(i) ==> r(i); goal r(c)
    f1 = fact("pr", [("i", INT)], call("p", iv("i"), ty=BOOL),
              call("r", iv("i"), ty=BOOL), [call("p", iv("i"), ty=BOOL)])
    f2 = fact("qr", [("i", INT)], call("q", iv("i"), ty=BOOL),
              call("r", iv("i"), ty=BOOL), [call("q", iv("i"), ty=BOOL)])
    hyp = (b("||", call("p", iv("c"), ty=BOOL), call("q", iv("c"), ty=BOOL)), H)
    out = prove([hyp], [f1, f2], call("r", iv("c"), ty=BOOL), G, params={"c": INT})
    assert out.status == "verified"
    assert out.splits_used >= 1
    assert {o.path for o in out.used_core} >= {"pr", "qr", "hyp", "goal"}


def test_int_disequality_splits():
    # x <= y, x >= y |- x == y  needs the != split
    hyps = [(b("<=", iv("x"), iv("y")), H), (b("<=", iv("y"), iv("x")), H)]
    out = prove(hyps, [], b("==", iv("x"), iv("y")), G,
                params={"x": INT, "y": INT})
    assert out.status == "verified"


def test_congruence_closure_chain():
    # a == b, b == c |- f(a) == f(c)
    hyps = [(b("==", iv("a"), iv("b")), frozenset([Origin("local", "h1")])),
            (b("==", iv("b"), iv("c")), frozenset([Origin("local", "h2")]))]
    out = prove(hyps, [], b("==", call("f", iv("a")), call("f", iv("c"))), G,
                params={"a": INT, "b": INT, "c": INT})
    assert out.status == "verified"
    assert {o.path for o in out.used_core} >= {"h1", "h2"}


def test_core_excludes_irrelevant_facts():
    # two facts available; only one participates
    f1 = fact("used", [("i", INT)], call("p", iv("i"), ty=BOOL),
              call("q", iv("i"), ty=BOOL), [call("p", iv("i"), ty=BOOL)])
    f2 = fact("unused", [("i", INT)], None,
              b("==", call("g", iv("i")), call("g", iv("i"))),
              [call("g", iv("i"))])
    hyp = (call("p", iv("c"), ty=BOOL), H)
    out = prove([hyp], [f1, f2], call("q", iv("c"), ty=BOOL), G, params={"c": INT})
    assert out.status == "verified"
    assert Origin("lemma", "used") in out.used_core
    assert Origin("lemma", "unused") not in out.used_core


def test_mod_constant_folding():
    out = prove([], [], b("==", b("%", il(7), il(2), INT), il(1)), G)
    assert out.status == "verified"


def test_mod_range_fact():
    # 0 <= x % 3 <= 2 holds without any hypotheses
    out = prove([], [], b("<=", b("%", iv("x"), il(3), INT), il(2)), G,
                params={"x": INT})
    assert out.status == "verified"


def test_existential_hypothesis_skolemized():
    from tunav.syntax.ast import Binder, Exists
    ex = Exists(SPAN, binders=[Binder("w", INT)],
                body=call("p", iv("w"), ty=BOOL), ty=BOOL)
    f = fact("pq", [("i", INT)], call("p", iv("i"), ty=BOOL),
             BoolLit(SPAN, value=False, ty=BOOL), [call("p", iv("i"), ty=BOOL)])
    # exists w. p(w), and forall i. p(i) ==> false: contradiction, so anything holds
    out = prove([(ex, H)], [f], call("q", il(0), ty=BOOL), G)
    assert out.status == "verified"


def test_nat_binder_adds_bound():
    # fact: forall n: nat. trigger f(n): f(n) == n, so f(-1) == -1 is NOT derivable
    NAT = Type("nat")
    f = fact("defn", [("n", NAT)], None,
             b("==", call("f", iv("n")), iv("n")), [call("f", iv("n"))])
    goal = b("==", call("f", il(-1)), il(-1))
    out = prove([], [f], goal, G)
    assert out.status == "failed"
    goal2 = b("==", call("f", il(4)), il(4))
    out2 = prove([], [f], goal2, G)
    assert out2.status == "verified"


# -- soundness vs finite oracle ------------------------------------------------------


def test_eval_finite_spec_examples():
    from tunav.syntax.ast import Binder, Forall
    q = Forall(SPAN, binders=[Binder("i", INT)],
               body=b("<", iv("i"), il(3)), ty=BOOL)
    assert eval_finite(q, 3) is True
    q2 = Forall(SPAN, binders=[Binder("i", INT)],
                body=b("<", iv("i"), il(2)), ty=BOOL)
    assert eval_finite(q2, 3) is False


def random_obligation(rng, n):
    """Hypotheses + goal over f: [0,n)->[0,n), p: [0,n)->bool, vars c, d."""
    names = ["c", "d"]

    def tm():
        r = rng.random()
        if r < 0.35:
            return iv(rng.choice(names))
        if r < 0.6:
            return il(rng.randint(0, n - 1))
        return call("f", iv(rng.choice(names)))

    def atom():
        r = rng.random()
        if r < 0.4:
            return call("p", tm(), ty=BOOL)
        op = rng.choice(["==", "<=", "<"])
        return b(op, tm(), tm())

    def lit():
        a = atom()
        from tunav.syntax.ast import Not
        return Not(SPAN, arg=a, ty=BOOL) if rng.random() < 0.3 else a

    def clause():
        if rng.random() < 0.4:
            return b(rng.choice(["||", "&&", "==>"]), lit(), lit())
        return lit()

    hyps = [clause() for _ in range(rng.randint(1, 3))]
    goal = clause()
    facts = []
    if rng.random() < 0.5:
        body = b(rng.choice(["==>", "||"]), call("p", iv("x"), ty=BOOL),
                 b(rng.choice(["<=", "=="]), call("f", iv("x")), iv("x")))
        facts.append(fact(f"rf", [("x", INT)], None, body, [call("f", iv("x"))]))
    return hyps, facts, goal


@pytest.mark.parametrize("seed", range(40))
def test_soundness_against_finite_oracle(seed):
    rng = random.Random(seed)
    n = 3
    hyps, facts, goal = random_obligation(rng, n)
    out = prove([(h, H) for h in hyps], facts,
                goal, G, limits=Limits(max_rounds=3, max_instantiations=300),
                params={"c": INT, "d": INT})
    if out.status != "verified":
        return
    # Verified => the implication holds for every sampled interpretation
    from tunav.syntax.ast import Binder, Forall
    for k in range(30):
        irng = random.Random(1000 * seed + k)
        env = {"c": irng.randrange(n), "d": irng.randrange(n)}
        funcs = {
            "f": {i: irng.randrange(n) for i in range(n)},
            "p": {i: irng.random() < 0.5 for i in range(n)},
        }
        ok_hyps = all(eval_finite(h, n, env, funcs) for h in hyps)
        for fa in facts:
            body = Forall(SPAN, binders=[Binder("x", INT)], body=fa.body, ty=BOOL)
            ok_hyps = ok_hyps and eval_finite(body, n, env, funcs)
        if not ok_hyps:
            continue
        assert eval_finite(goal, n, env, funcs), (
            f"unsound: seed={seed} interp={k} goal false under true hypotheses")
