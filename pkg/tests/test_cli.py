import math
import subprocess
import sys

import numpy as np
import pytest

from kite_billiards.cli import main
from kite_billiards.geometry import CSV_HEADER
from kite_billiards.numtheory import signed_diff
from kite_billiards.tables import read_csv, read_json, read_output


def run(tmp_path, name, *argv):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out


def naive_N_pair(a, b, k):
    best = math.inf
    for n in range(-k, k + 1):
        for m in range(-k, k + 1):
            if (n or m) and abs(n) + abs(m) <= k:
                x = n * a + m * b
                best = min(best, abs(x - round(x)))
    return best


# numtheory


def test_pair_table_matches_naive_scan(tmp_path):
    code, out = run(tmp_path, "n.csv", "numtheory", "--alpha-turns", "0.4142136",
                    "--beta-turns", "0.7320508", "--k-max", "50")
    assert code == 0
    cols, rows = read_csv(out)
    assert cols == ["k", "N_pair"]
    assert len(rows) == 50
    for k, v in rows[::7]:
        assert v == naive_N_pair(0.4142136, 0.7320508, k)


def test_bounds_report(tmp_path):
    code, out = run(tmp_path, "b.json", "numtheory", "--bounds", "--p", "1", "--q", "1",
                    "--eps", "0.1")
    assert code == 0
    rep = read_json(out)
    assert rep["L"]["log10"] == pytest.approx(13.4003, abs=1e-4)


def test_convergents_and_radians(tmp_path):
    code, out = run(tmp_path, "c.csv", "numtheory", "--convergents", "--alpha-turns",
                    str(math.sqrt(2)), "--depth", "4")
    assert code == 0
    assert read_csv(out)[1] == [[0, 1, 1], [1, 3, 2], [2, 7, 5], [3, 17, 12]]
    # radians are converted to turns at the boundary
    code, out = run(tmp_path, "r.csv", "numtheory", "--convergents", "--alpha-rad",
                    str(math.pi / 2), "--depth", "4")
    assert read_csv(out)[1] == [[0, 0, 1], [1, 1, 4]]


def test_missing_flag_names_the_field(capsys):
    assert main(["numtheory", "--alpha-turns", "0.3"]) == 1
    assert "--k-max" in capsys.readouterr().err


def test_budget_overflow_flushes_partial_rows(tmp_path):
    code, out = run(tmp_path, "p.csv", "numtheory", "--alpha-turns", "0.3", "--beta-turns",
                    "0.41", "--k-max", "100", "--budget", "300")
    assert code == 2
    cols, rows = read_csv(out)
    assert 0 < len(rows) < 100
    assert [r[0] for r in rows] == list(range(1, len(rows) + 1))


def test_approximation_check_report(tmp_path):
    code, out = run(tmp_path, "t.json", "numtheory", "--theorem1", "--alpha-turns", "0.3",
                    "--beta-turns", "0.7", "--p", "1", "--q", "1", "--n", "1")
    assert code == 0
    assert read_json(out)["status"] == "indeterminate"


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["numtheory", "--k-max", "0", "--alpha-turns", "0.3"],
    ["numtheory", "--bounds", "--p", "1", "--q", "1", "--eps", "2"],
    ["billiard", "--triangle", "0,1", "--kite"],
    ["billiard", "--triangle", "nope", "--kite"],
    ["billiard", "--triangle", "1,1", "--kite", "--format", "xml"],
])
def test_invalid_input_exits_one(argv):
    assert main(argv) == 1


# nets


def test_estimate_F_is_deterministic(tmp_path):
    args = ["nets", "--estimate-F", "--eps", "0.2", "--samples", "200", "--seed", "7"]
    c1, a = run(tmp_path, "a.json", *args)
    c2, b = run(tmp_path, "b.json", *args)
    assert c1 == c2 == 0
    assert a.read_bytes() == b.read_bytes()
    rep = read_json(a)
    buckets = rep["histogram"]
    assert buckets[-1].keys() == {"censored"}
    assert sum(b["count"] for b in buckets[:-1]) + buckets[-1]["censored"] == 200


def test_estimate_F_csv_round_trip(tmp_path):
    code, out = run(tmp_path, "h.csv", "nets", "--estimate-F", "--eps", "0.25", "--samples",
                    "50", "--format", "csv")
    assert code == 0
    cols, rows = read_output(out)
    assert cols == ["len", "count"]
    assert rows[-1][0] == "censored"
    assert sum(r[1] for r in rows) == 50


def test_commensurate_short_uniform_walk_reports_uncovered_index(tmp_path):
    code, out = run(tmp_path, "l.json", "nets", "--lemma2", "--p", "1", "--q", "2",
                    "--gamma-turns", "0.6180339887", "--eps", "0.5", "--walk-seed", "3",
                    "--walk-len", "100000")
    assert code == 2
    rep = read_json(out)
    assert rep["status"] == "insufficient-length"
    assert isinstance(rep["first_uncovered"], int)


def test_commensurate_ballistic_walk_verifies(tmp_path):
    code, out = run(tmp_path, "w.json", "nets", "--lemma2", "--p", "1", "--q", "2",
                    "--gamma-turns", "0.6180339887", "--eps", "0.5", "--walk-seed", "3",
                    "--walk-len", "100000000000000", "--walk-model", "ballistic")
    assert code == 0
    rep = read_json(out)
    assert rep["status"] == "verified"
    w = rep["witness"]
    vals = np.sort(np.asarray(rep["values"]))
    lo, hi = w["segment"]
    # every point of the segment is within eps * width of a witness value
    reach = w["eps"] * (hi - lo)
    assert vals[0] - lo <= reach and hi - vals[-1] <= reach
    assert np.all(np.diff(vals) <= 2 * reach)


@pytest.mark.parametrize("eps", ["0.6", "0", "nan"])
def test_nets_eps_out_of_range(eps):
    assert main(["nets", "--estimate-F", "--eps", eps]) == 1


# billiard


def test_split_experiment_table(tmp_path):
    code, out = run(tmp_path, "s.csv", "billiard", "--triangle", "0.955316,0.785398",
                    "--split-experiment", "--eps", "1e-3", "--dirs", "100", "--seed", "11",
                    "--max-T", "1e4")
    assert code == 0
    assert out.read_text().splitlines()[0] == ",".join(CSV_HEADER)
    cols, rows = read_csv(out)
    assert len(rows) == 100
    for eps, _, kind, T, period, count, C in rows:
        assert kind in ("split", "periodic", "undecided")
        assert (period is not None) == (kind == "periodic")
        assert count < C * T / eps


def test_unfold_dump_is_theta_connected(tmp_path):
    code, out = run(tmp_path, "u.csv", "billiard", "--triangle", "0.785398,0.785398",
                    "--unfold", "--dir-turns", "0.125", "--steps", "1000")
    assert code == 0
    cols, rows = read_csv(out)
    assert cols == ["step", "x", "y", "side", "length", "theta_turns", "parity"]
    theta = [r[5] for r in rows]
    # both diagonal kite angles are twice 0.785398 rad
    a = 2 * 0.785398 / (2 * math.pi)
    for x, y in zip(theta, theta[1:]):
        assert min(abs(abs(signed_diff(y, x)) - a), abs(abs(signed_diff(y, x)) - (1 - a))) < 1e-9


def test_degenerate_triangle_exits_one(capsys):
    assert main(["billiard", "--triangle", "0,0.5", "--kite"]) == 1
    assert "degenerate" in capsys.readouterr().err


def test_kite_json_and_turn_units(tmp_path):
    code, out = run(tmp_path, "k.json", "billiard", "--triangle", "0.125,0.125", "--units",
                    "turns", "--kite")
    assert code == 0
    k = read_json(out)
    assert k["alpha"] == pytest.approx(math.pi / 2)
    assert len(k["vertices"]) == 4


def test_splitting_time_bound_constant_model(tmp_path):
    code, out = run(tmp_path, "t.json", "billiard", "--triangle", "1.1107207345,1.0882157",
                    "--theorem2", "--eps", "0.999", "--C", "5")
    assert code == 0
    rep = read_json(out)
    assert rep["status"] == "ok"
    assert 10 ** rep["Q"]["log10"] == pytest.approx(17)


def test_splitting_time_bound_theory_model_exceeds_budget(tmp_path):
    code, out = run(tmp_path, "t.json", "billiard", "--triangle", "1.1107207345,1.0882157",
                    "--theorem2", "--eps", "0.9", "--C", "5", "--F-model", "theory")
    assert code == 2
    rep = read_json(out)
    assert rep["N_at_Q"] == "budget-exceeded"
    assert rep["status"] == "budget-exceeded"


def test_splitting_time_bound_model_overflow_exits_two():
    assert main(["billiard", "--triangle", "1.1,1.0", "--theorem2", "--eps", "0.1", "--C", "5",
                 "--F-model", "theory"]) == 2


def test_estimate_C_report(tmp_path):
    code, out = run(tmp_path, "c.csv", "billiard", "--triangle", "0.785398,0.785398",
                    "--estimate-C", "--samples", "100", "--format", "csv")
    assert code == 0
    cols, rows = read_csv(out)
    assert cols == ["key", "value"]
    assert rows[0][0] == "C" and rows[0][1] > 0


def test_identical_config_gives_identical_bytes(tmp_path):
    args = ["billiard", "--triangle", "1.1107207345,1.0882157", "--split-experiment",
            "--eps", "1e-2,1e-3", "--dirs", "10", "--seed", "5", "--max-T", "500"]
    run(tmp_path, "a.csv", *args)
    run(tmp_path, "b.csv", *args, "--workers", "2")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_json_table_round_trip(tmp_path):
    code, out = run(tmp_path, "n.json", "numtheory", "--alpha-turns", "0.3", "--k-max", "5",
                    "--format", "json")
    assert code == 0
    rows = read_output(out)
    assert [r["k"] for r in rows] == [1, 2, 3, 4, 5]
    assert rows[0]["N_single"] == 0.3


def test_console_entry_point_help():
    r = subprocess.run([sys.executable, "-m", "kite_billiards.cli", "billiard", "--help"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert "--split-experiment" in r.stdout


def test_stdout_when_no_out_path(capsys):
    assert main(["numtheory", "--alpha-turns", "0.25", "--k-max", "3"]) == 0
    assert capsys.readouterr().out.splitlines() == ["k,N_single", "1,0.25", "2,0.25", "3,0.25"]
