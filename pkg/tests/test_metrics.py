import pytest

from tunav.driver import RunConfig, verify_program
from tunav.errors import TunavError
from tunav.metrics import (
    MetricsRecord,
    compare_metrics,
    read_metrics,
    records_of_run,
    write_metrics,
)
from tunav.syntax import parse_module


def sample_records():
    run = verify_program(
        [parse_module("proof fn ok(x: int) requires x > 1 ensures x > 0 { }",
                      "m.tv", module="m")], RunConfig())
    return records_of_run(run, RunConfig())


def test_records_validate_and_roundtrip_csv(tmp_path):
    recs = sample_records()
    assert recs[0].function == "m::ok"
    path = str(tmp_path / "metrics.csv")
    write_metrics(recs, path)
    back = read_metrics(path)
    assert [r.function for r in back] == [r.function for r in recs]
    assert back[0].status == "verified"
    with open(path) as fh:
        header = fh.readline().strip()
    assert header == ("function,status,time_ms,obligations,instantiations,"
                      "rounds,context_facts,strategy")


def test_records_roundtrip_json(tmp_path):
    recs = sample_records()
    path = str(tmp_path / "metrics.json")
    write_metrics(recs, path)
    back = read_metrics(path)
    assert back[0].per_fact == recs[0].per_fact


def test_validation_rejects_bad_sums():
    rec = MetricsRecord("f", "verified", 1.0, 1, 5, 1, 1, "conservative",
                        per_fact={"a": 3})
    with pytest.raises(TunavError):
        rec.validate()


def test_compare_identical_all_ratios_one(tmp_path):
    recs = sample_records()
    cmp = compare_metrics(recs, recs)
    assert all(abs(r["ratio"] - 1.0) < 1e-12 for r in cmp.rows)
    assert cmp.median_ratio == pytest.approx(1.0)
    assert cmp.count_over_2x == 0
    assert "median time ratio" in cmp.summary()
    assert cmp.to_csv().splitlines()[0].startswith("function,")


def test_compare_mismatched_sets_error():
    a = [MetricsRecord("f1", "verified", 1, 1, 0, 0, 0, "conservative", {})]
    b = [MetricsRecord("f2", "verified", 1, 1, 0, 0, 0, "conservative", {})]
    with pytest.raises(TunavError, match="f1.*f2"):
        compare_metrics(a, b)
