import csv

import networkx as nx
import pytest

from vnesearch.cli import main


@pytest.fixture
def scenario_file(tmp_path):
    p = tmp_path / "s.json"
    assert main(["generate", "waxman", "--n", "20", "--slices", "12", "--min-size", "3",
                 "--max-size", "5", "--seed", "1", "-o", str(p)]) == 0
    return p


def test_generate_is_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["generate", "pss", "--i", "0", "--slices", "10", "--seed", "1",
                     "-o", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    captured = capsys.readouterr()
    assert "slices=10" in captured.out
    assert '"reuse": 0.93' in captured.err


def test_run_writes_one_row_per_seed(scenario_file, tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(["run", str(scenario_file), "--algo", "nepa", "--n", "2", "--level", "2",
                 "--seeds", "3", "-o", str(out)]) == 0
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 3 and {r["seed"] for r in rows} == {"0", "1", "2"}
    captured = capsys.readouterr()
    assert "99% CI" in captured.out
    assert '"n_iter": 2' in captured.err


def test_disabled_refinement_matches_nrpa(scenario_file, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    common = ["--n", "3", "--level", "2", "--seeds", "2"]
    main(["run", str(scenario_file), "--algo", "nepa", "--refine-level", "99", *common,
          "-o", str(a)])
    main(["run", str(scenario_file), "--algo", "nrpa", *common, "-o", str(b)])
    strip = lambda p: [{k: v for k, v in r.items() if k not in ("config", "mean_ms_per_slice")}
                       for r in csv.DictReader(open(p))]
    assert strip(a) == strip(b)


def test_stats_triangle(tmp_path, capsys):
    p = tmp_path / "tri.graphml"
    nx.write_graphml(nx.complete_graph(3), p)
    out = tmp_path / "st.csv"
    assert main(["stats", str(p), "--csv", str(out)]) == 0
    row = next(csv.DictReader(open(out)))
    assert (float(row["mean_distance"]), int(row["diameter"]),
            float(row["distance_stddev"]), float(row["clustering"])) == (1, 1, 0, 1)


def test_exit_codes(tmp_path, scenario_file):
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["run", str(scenario_file), "--algo", "bogus"])
    assert exc.value.code == 1
    assert main(["run", str(scenario_file), "--budget", "0"]) == 1
    disconnected = tmp_path / "d.graphml"
    nx.write_graphml(nx.Graph([(0, 1), (2, 3)]), disconnected)
    assert main(["stats", str(disconnected)]) == 2
    assert main(["generate", "waxman", "--min-size", "9", "--max-size", "3",
                 "-o", str(tmp_path / "x.json")]) == 1
