import pytest

from tunav.errors import CycleError, ResolveError
from tunav.resolve import order_tasks, resolve_program, task_imports
from tunav.syntax import parse_module

SEQ_STUB = """
sort Seq<A>;
spec fn len<A>(s: Seq<A>) -> int;
spec fn push<A>(s: Seq<A>, v: A) -> Seq<A>;
spec fn contains<A>(s: Seq<A>, x: A) -> bool;

broadcast axiom fn lemma_seq_contains_after_push<A>(s: Seq<A>, v: A, x: A)
    ensures (#[trigger] s.push(v).contains(x)) <==> v == x || s.contains(x);

broadcast group group_seq_properties {
    lemma_seq_contains_after_push,
}
"""


def rp(*sources):
    asts = [parse_module(src, f"m{i}.tv", module=mod)
            for i, (mod, src) in enumerate(sources)]
    return resolve_program(asts)


def test_resolve_push_contains_monomorphizes_lemma():
    user = """
proof fn push_contains(a: Seq<int>) {
    broadcast use {seqs::group_seq_properties};
    let b = a.push(3);
    assert(b.contains(3));
}
"""
    program, registry = rp(("seqs", SEQ_STUB), ("user", user))
    assert registry.groups["seqs::group_seq_properties"] == (
        "seqs::lemma_seq_contains_after_push",)
    # the lemma is demanded at <int> because Seq<int> is live
    syms = program.instances_of["seqs::lemma_seq_contains_after_push"]
    assert any("<int>" in s for s in syms)


def test_non_broadcast_use_is_error():
    src = SEQ_STUB + """
proof fn lemma_x(a: Seq<int>) { }
proof fn user(a: Seq<int>) {
    broadcast use {lemma_x};
}
"""
    with pytest.raises(ResolveError, match="not a broadcastable fact"):
        rp(("m", src))


def test_duplicate_definition_error():
    with pytest.raises(ResolveError, match="duplicate definition"):
        rp(("m", "spec fn f(x: int) -> int;\nspec fn f(y: int) -> int;"))


def test_unresolved_path_error():
    with pytest.raises(ResolveError, match="no matching"):
        rp(("m", "proof fn p(x: int) { assert(g(x) == 0); }"))


def test_arity_mismatch_error():
    src = "spec fn f(x: int) -> int;\nproof fn p(x: int) { assert(f(x, x) == 0); }"
    with pytest.raises(ResolveError, match="no matching"):
        rp(("m", src))


def test_type_mismatch_error():
    src = "proof fn p(x: int, b: bool) { assert(x == b); }"
    with pytest.raises(ResolveError, match="type mismatch"):
        rp(("m", src))


def test_group_cycle_is_error():
    src = """
broadcast group g1 { g2 }
broadcast group g2 { g1 }
"""
    with pytest.raises(ResolveError, match="cyclic broadcast group"):
        rp(("m", src))


def test_nested_group_flattening_idempotent():
    src = SEQ_STUB + """
broadcast group outer { group_seq_properties, lemma_seq_contains_after_push }
"""
    program, registry = rp(("seqs", src))
    # flatten(flatten(G)) == flatten(G): already-flat members stay deduped
    assert registry.groups["seqs::outer"] == ("seqs::lemma_seq_contains_after_push",)


def test_order_lemma_before_user():
    src = """
spec fn f(x: int) -> int;
proof fn user(x: int) {
    broadcast use {lemma_l};
    assert(f(x) == f(x));
}
broadcast proof fn lemma_l(x: int)
    ensures #[trigger] f(x) == f(x)
{ }
"""
    program, registry = rp(("m", src))
    order = order_tasks(program, registry)
    assert order.tasks.index("m::lemma_l") < order.tasks.index("m::user")


def test_order_cycle_error_names_both():
    src = """
spec fn f(x: int) -> int;
broadcast proof fn a(x: int)
    ensures #[trigger] f(x) == f(x)
{
    broadcast use {b};
}
broadcast proof fn b(x: int)
    ensures #[trigger] f(x) == f(x)
{
    broadcast use {a};
}
"""
    program, registry = rp(("m", src))
    with pytest.raises(CycleError) as e:
        order_tasks(program, registry)
    assert e.value.members == ["m::a", "m::b"]


def test_self_import_is_cycle():
    src = """
spec fn f(x: int) -> int;
broadcast proof fn a(x: int)
    ensures #[trigger] f(x) == f(x)
{
    broadcast use {a};
}
"""
    program, registry = rp(("m", src))
    with pytest.raises(CycleError):
        order_tasks(program, registry)


def test_no_broadcast_uses_source_order():
    src = """
proof fn one(x: int) { }
proof fn two(x: int) { }
proof fn three(x: int) { }
"""
    program, registry = rp(("m", src))
    order = order_tasks(program, registry)
    assert order.tasks == ["m::one", "m::two", "m::three"]
    assert order.layers[0] == order.tasks


def test_recursive_proof_fn_rejected():
    src = """
proof fn a(x: int) { b(x); }
proof fn b(x: int) { a(x); }
"""
    with pytest.raises(ResolveError, match="recursive proof fns"):
        rp(("m", src))


def test_group_import_equals_member_imports_for_ordering():
    src = SEQ_STUB + """
proof fn via_group(a: Seq<int>) {
    broadcast use {group_seq_properties};
}
proof fn via_member(a: Seq<int>) {
    broadcast use {lemma_seq_contains_after_push};
}
"""
    program, registry = rp(("seqs", src))
    g = task_imports(program, registry, "seqs::via_group")
    m = task_imports(program, registry, "seqs::via_member")
    assert g == m


def test_overload_resolution_by_receiver_type():
    src = """
sort Seq<A>;
sort Set<A>;
spec fn contains<A>(s: Seq<A>, x: A) -> bool;
spec fn contains<A>(s: Set<A>, x: A) -> bool;
"""
    with pytest.raises(ResolveError, match="duplicate definition"):
        rp(("m", src))
    two_mods = [("seqs", "sort Seq<A>;\nspec fn contains<A>(s: Seq<A>, x: A) -> bool;"),
                ("sets", "sort Set<A>;\nspec fn contains<A>(s: Set<A>, x: A) -> bool;"),
                ("u", "proof fn p(a: seqs::Seq<int>) { assert(a.contains(3)); }")]
    # qualified sort names are not part of the grammar; use short names
    two_mods[2] = ("u", "proof fn p(a: Seq<int>) { assert(contains(a, 3)); }")
    program, _ = rp(*two_mods)
    fn = program.instances["u::p"].decl
    assert fn.body[0].expr.resolved == "seqs::contains<int>"


def test_duplicate_let_name_rejected():
    src = "proof fn p(x: int) { let y = x; let y = x; }"
    with pytest.raises(ResolveError, match="duplicate let"):
        rp(("m", src))


def test_misplaced_trigger_mark_rejected():
    src = "spec fn f(x: int) -> int;\nproof fn p(x: int) { assert(#[trigger] f(x) == f(x)); }"
    with pytest.raises(ResolveError, match="misplaced"):
        rp(("m", src))


def test_generic_lemma_gets_skolem_verification_instance():
    src = SEQ_STUB.replace("broadcast axiom fn lemma_seq_contains_after_push",
                           "broadcast proof fn lemma_seq_contains_after_push")
    src = src.replace(
        "ensures (#[trigger] s.push(v).contains(x)) <==> v == x || s.contains(x);",
        "ensures (#[trigger] s.push(v).contains(x)) <==> v == x || s.contains(x)\n{ }")
    program, registry = rp(("seqs", src))
    inst = program.verify_instance("seqs::lemma_seq_contains_after_push")
    assert inst.skolem
