import pytest

from lcnystrom import run_invariants
from lcnystrom.invariants import report_table, write_report_csv


@pytest.fixture(scope="module")
def records():
    return run_invariants()


def test_all_invariants_pass(records):
    failed = [r.name for r in records if not r.passed]
    print(report_table(records))
    assert not failed, f"failed invariants: {failed}"


def test_negative_controls_present(records):
    names = {r.name for r in records}
    assert "control.closed_rule_detected" in names
    assert "control.odd_kernel_detected" in names


def test_report_is_machine_readable(records, tmp_path):
    path = tmp_path / "invariants.csv"
    write_report_csv(records, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "invariant,status,measured,threshold,detail"
    assert len(lines) == len(records) + 1
    for line in lines[1:]:
        assert line.split(",")[1] in ("pass", "FAIL")


def test_cli_invariants_subcommand(tmp_path):
    from lcnystrom.cli import main

    rc = main(["invariants", "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "invariants.csv").exists()
