import pytest

from tunav.driver import RunConfig
from tunav.errors import BaselineFailure
from tunav.minimize import enumerate_assert_sites, minimize, prune_asts
from tunav.syntax import parse_module, render_module


def asts_of(src, module="user"):
    return [parse_module(src, f"{module}.tv", module=module)]


def test_enumerate_single_site():
    asts = asts_of("""
proof fn push_contains(a: Seq<int>) {
    broadcast use {group_seq_properties};
    let b = a.push(3);
    assert(b.contains(3));
}
""")
    sites = enumerate_assert_sites(asts)
    assert len(sites) == 1 and sites[0].kind == "assert"


def test_enumerate_nested_block_first():
    asts = asts_of("""
proof fn nested(x: int) {
    assert(x == x) by {
        assert(1 == 1);
        assert(2 == 2);
    }
}
""")
    sites = enumerate_assert_sites(asts)
    assert [s.kind for s in sites] == ["assert-by", "assert", "assert"]
    assert [s.ordinal for s in sites] == [0, 1, 2]


def test_enumerate_empty():
    assert enumerate_assert_sites(asts_of("spec fn f(i: int) -> int;")) == []


def test_minimize_removes_redundant_keeps_needed():
    asts = asts_of("""
proof fn two_asserts(a: Seq<int>)
    ensures a.push(3).contains(3)
{
    assert(1 + 1 == 2);
    assert(a.push(3).contains(3)) by {
        broadcast use {lemma_seq_contains_after_push};
    }
}
""")
    report, pruned = minimize(asts, RunConfig())
    assert report.original_count == 2
    assert report.surviving_count == 1
    assert len(report.removed) == 1 and report.removed[0].kind == "assert"
    # the pruned program still verifies and renders back to valid source
    text = render_module(pruned[0])
    assert "1 + 1" not in text and "by" in text


def test_minimize_already_minimal_is_idempotent():
    src = """
proof fn lean(a: Seq<int>)
    requires
        3 <= a.len(),
        forall|i: int| 0 <= i < a.len() ==> #[trigger] a.index(i) > 0
    ensures exists|j: int| 0 <= j < a.len() && a.index(j) > 0
{
    assert(a.index(0) > 0);
}
"""
    report1, pruned1 = minimize(asts_of(src), RunConfig())
    assert report1.removed == []
    report2, pruned2 = minimize(pruned1, RunConfig())
    assert report2.removed == []
    assert report2.surviving_count == report1.surviving_count


def test_minimize_baseline_failure():
    asts = asts_of("proof fn broken(x: int) ensures x > 0 { }")
    with pytest.raises(BaselineFailure):
        minimize(asts, RunConfig())


def test_minimize_unknown_counts_as_failure():
    # without the assert-by, the context only offers a self-feeding fact:
    # the trial ends Unknown(rounds) and the site must be kept
    src = """
spec fn p(i: int) -> bool;
spec fn g(i: int) -> int;
broadcast axiom fn axiom_p(i: int)
    ensures #[trigger] p(i);
proof fn unknown_case(x: int)
    requires forall|i: int| #[trigger] g(i) == g(i + 1) + 1, g(0) == 7
    ensures p(x)
{
    assert(p(x)) by {
        broadcast use {axiom_p};
    }
}
"""
    report, _ = minimize(asts_of(src), RunConfig())
    assert report.removed == []
    assert len(report.unknown_kept) == 1


def test_minimize_assert_by_removal_skips_children():
    src = """
proof fn with_block(x: int)
    requires x > 4
    ensures x * 2 > 8
{
    assert(x * 2 > 8) by {
        assert(x >= 5);
    }
}
"""
    asts = asts_of(src)
    report, pruned = minimize(asts, RunConfig())
    assert len(report.removed) == 1
    assert report.removed[0].kind == "assert-by"
    assert report.surviving_count == 0
    # exactly one trial beyond the baseline: the child was never tried
    assert report.runs == 2


def test_minimize_project_scope_agrees_here():
    src = """
proof fn a_fn(x: int) requires x > 2 ensures x > 1 { assert(x > 2); }
proof fn b_fn(y: int) requires y > 0 ensures y >= 1 { assert(y >= 1); }
"""
    r_fn, _ = minimize(asts_of(src), RunConfig(), scope="function")
    r_pr, _ = minimize(asts_of(src), RunConfig(), scope="project")
    assert {(s.function, s.ordinal) for s in r_fn.removed} == \
           {(s.function, s.ordinal) for s in r_pr.removed}


def test_prune_asts_keeps_spans():
    asts = asts_of("proof fn f(x: int) { assert(x == x); assert(1 == 1); }")
    sites = enumerate_assert_sites(asts)
    pruned = prune_asts(asts, {sites[0].span.key()})
    remaining = enumerate_assert_sites(pruned)
    assert len(remaining) == 1
    assert remaining[0].span.key() == sites[1].span.key()
