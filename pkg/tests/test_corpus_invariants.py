"""Corpus-wide invariants: parse/render round-trips, group-import flattening
equivalence, and the usage-report-driven import-trimming workflow."""

import glob
import os

import pytest

from tunav.driver import RunConfig, load_sources, verify_program
from tunav.engine.arith import Constraint, arith_consistent
from tunav.syntax import parse_module, render_module
from tunav.syntax.ast import AssertBy, ProofFn, UseStmt
from tunav.vcgen import assemble_context

CORPUS = sorted(glob.glob(os.path.join(os.path.dirname(__file__), "corpus", "*.tv")))


@pytest.mark.parametrize("path", CORPUS, ids=os.path.basename)
def test_round_trip_corpus_file(path):
    src = open(path).read()
    first = parse_module(src, path)
    second = parse_module(render_module(first), path)
    assert first.declarations == second.declarations


def statuses(run):
    return {t: r.status for t, r in run.results.items()}


def test_group_import_equals_flattened_members():
    base = verify_program(load_sources(CORPUS), RunConfig())
    registry = base.registry

    # after resolution, use paths are absolute; replace every group import
    # with its flattened members and re-verify
    asts = load_sources(CORPUS)
    flat = verify_program(asts, RunConfig())  # resolves paths in place

    def flatten_stmts(stmts):
        for s in stmts:
            if isinstance(s, UseStmt):
                out = []
                for p in s.paths:
                    out.extend(registry.groups.get(p, (p,)))
                s.paths = out
            if isinstance(s, AssertBy):
                flatten_stmts(s.body)

    for ast in asts:
        for d in ast.declarations:
            if isinstance(d, ProofFn):
                flatten_stmts(d.body)
    rerun = verify_program(asts, RunConfig())
    assert statuses(rerun) == statuses(base)


def test_usage_report_trim_workflow():
    # the trim workflow: replace each function's group imports with exactly
    # the facts named in its usage report; the whole corpus re-verifies
    asts = load_sources(CORPUS)
    run = verify_program(asts, RunConfig())  # resolves use paths in place
    registry = run.registry

    for task in run.user_tasks:
        result = run.results[task]
        assert result.passed
        used = {o.path for o in result.used_core if o.kind in ("lemma", "axiom")}
        module, name = task.rsplit("::", 1)
        decl = run.program.symbols[task]

        def trim(stmts):
            for s in stmts:
                if isinstance(s, UseStmt):
                    out = []
                    for p in s.paths:
                        if p in registry.groups:
                            out.extend(f for f in registry.groups[p] if f in used)
                        else:
                            out.append(p)
                    s.paths = out
                if isinstance(s, AssertBy):
                    trim(s.body)

        trim(decl.body)
    rerun = verify_program(asts, RunConfig())
    assert all(rerun.results[t].passed for t in rerun.user_tasks)


def test_assemble_context_examples():
    src = """
proof fn via_group(a: Seq<int>) {
    broadcast use {group_seq_properties};
    let b = a.push(3);
    assert(b.contains(3));
}
proof fn via_lemma(a: Seq<int>) {
    broadcast use {lemma_seq_contains_after_push};
    let b = a.push(3);
    assert(b.contains(3));
}
"""
    from tunav.driver import resolve_with_prelude
    program, registry = resolve_with_prelude(
        [parse_module(src, "u.tv", module="u")])
    ctx = assemble_context("u::via_group", program, registry)
    lemma = next(q for q in ctx.facts
                 if q.origin.path.endswith("lemma_seq_contains_after_push"))
    assert lemma.origin.kind == "lemma"
    assert lemma.groups_via == ("prelude::seq::group_seq_properties",)
    ctx2 = assemble_context("u::via_lemma", program, registry)
    lemma2 = next(q for q in ctx2.facts
                  if q.origin.path.endswith("lemma_seq_contains_after_push"))
    assert lemma2.groups_via == ()


def test_arith_consistent_alias():
    x, y, z = 1, 2, 3
    cs = [Constraint({x: -1}, 11, frozenset([0])),
          Constraint({y: -1}, 21, frozenset([1])),
          Constraint({z: 1, x: -1, y: -1}, 0, frozenset([2])),
          Constraint({z: -1, x: 1, y: 1}, 0, frozenset([2])),
          Constraint({z: 1}, -30, frozenset([3]))]
    assert arith_consistent(cs) == "inconsistent"
    assert arith_consistent([]) == "consistent"
