import numpy as np
import pytest

from lcnystrom import make_problem, run_convergence


@pytest.fixture(scope="module")
def small_report(sphere, kernels, y1_problem):
    return run_convergence(y1_problem, [1, 2], p=0, q=2, seed=0,
                           interp_points=20)


def test_levels_must_ascend(y1_problem):
    with pytest.raises(ValueError):
        run_convergence(y1_problem, [2, 1], p=0, q=2)


def test_report_fields(small_report):
    assert small_report.levels == [1, 2]
    assert all(r.nodal_error >= 0 for r in small_report.results)
    assert all(r.interp_error >= 0 for r in small_report.results)
    assert len(small_report.eocs()) == 1
    assert small_report.config["p"] == 0


def test_eoc_uses_measured_h(small_report):
    r0, r1 = small_report.results
    expect = np.log(r0.nodal_error / r1.nodal_error) / np.log(r0.h / r1.h)
    assert small_report.terminal_eoc() == pytest.approx(expect)


def test_csv_and_table(small_report, tmp_path):
    path = tmp_path / "report.csv"
    small_report.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0].startswith("level,n,h,nodal_error")
    assert len(lines) == 3
    table = small_report.table()
    assert "nodal err" in table and len(table.splitlines()) == 3


def test_seeded_reports_identical(sphere, kernels, y1_problem):
    a = run_convergence(y1_problem, [1], p=0, q=2, seed=9, interp_points=10)
    b = run_convergence(y1_problem, [1], p=0, q=2, seed=9, interp_points=10)
    assert a.csv_text() == b.csv_text()


def test_constant_solution_is_exact(sphere):
    # with the completion disabled, constants are reproduced to round-off
    # at every mesh (the degree-0 moment condition handles the H block)
    from lcnystrom import make_kernels

    kernels = make_kernels("laplace_dl", "none", 1.0)
    prob = make_problem(sphere, kernels, "one")
    report = run_convergence(prob, [1, 2], p=0, q=2, interp_points=10)
    assert all(r.nodal_error <= 1e-12 for r in report.results)
