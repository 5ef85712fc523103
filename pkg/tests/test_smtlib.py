import glob
import os

from tunav.driver import resolve_with_prelude
from tunav.smtlib import emit_all
from tunav.syntax import parse_module
from tunav.vcgen import VcgenConfig, generate_obligations

SRC = """
proof fn push_contains(a: Seq<int>) {
    broadcast use {lemma_seq_contains_after_push};
    let b = a.push(3);
    assert(b.contains(3));
}

proof fn quantified(s: Seq<int>)
    requires forall|i: int| 0 <= i < s.len() ==> #[trigger] s.index(i) >= 0
    ensures s.len() >= 0
{ }
"""


def test_emit_obligations(tmp_path):
    program, registry = resolve_with_prelude(
        [parse_module(SRC, "user.tv", module="user")])
    obs = []
    for task in ("user::push_contains", "user::quantified"):
        obs.extend(generate_obligations(task, program, registry, VcgenConfig()))
    emit_all(obs, str(tmp_path))
    files = sorted(glob.glob(os.path.join(str(tmp_path), "*.smt2")))
    assert len(files) == len(obs)
    text = open(files[0]).read()
    assert text.startswith("(set-logic ALL)")
    assert "(check-sat)" in text and "(get-unsat-core)" in text
    assert ":named" in text
    combined = "".join(open(f).read() for f in files)
    assert ":pattern" in combined
    assert "(forall" in combined
    assert "declare-fun" in combined
    assert "(assert (! (not" in combined  # negated goal
    # balanced parentheses in every emitted script
    for f in files:
        body = open(f).read()
        assert body.count("(") == body.count(")"), f
