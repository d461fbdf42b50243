"""Figure-regeneration checks driven by synthetic sweep CSVs shaped like
the bundled throughput (fig2) and reconfiguration-fraction (fig4) sweeps."""

import csv
import os
import subprocess
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))
import render
from render import FIGURES, FigureSpec, read_cells, split_series

COLUMNS = ("policy", "lambda", "V", "delta_r", "eta_r", "seed",
           "mean_total_queue", "mean_cost", "reconfig_fraction",
           "delivered_rate", "instability_slope")

# stability frontier used to synthesize plausible greedy-policy data
DCNC_FRONTIER = {0: 0.9, 1: 0.4, 5: 0.1, 20: 0.0}


def write_rows(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        w.writerows(rows)
    return str(path)


def throughput_csv(tmp_path):
    """2 policies x 9 lambdas x 4 delays x 2 seeds, V=5."""
    rows = []
    for policy in ("dcnc", "adcnc"):
        for lam in [round(0.1 * i, 1) for i in range(1, 10)]:
            for dr in (0, 1, 5, 20):
                diverges = policy == "dcnc" and lam > DCNC_FRONTIER[dr]
                for seed in (0, 1):
                    q = 4000.0 + seed if diverges else 10 + 100 * lam + dr + seed
                    slope = 0.4 * lam if diverges else 1e-4
                    rows.append([policy, lam, 5, dr, 0, seed,
                                 q, 1.0 + lam, 0.01, lam, slope])
    return write_rows(tmp_path / "throughput.csv", rows)


def reconfig_csv(tmp_path):
    """2 policies x 5 V values at fixed lambda=0.2, delta_r=1."""
    rows = []
    for policy, base in (("dcnc", 0.5), ("adcnc", 0.05)):
        for v in (0.5, 1, 5, 20, 100):
            for seed in (0, 1):
                rf = base / (1.0 + 0.1 * v)
                rows.append([policy, 0.2, v, 1, 0, seed,
                             20.0, 1.2, rf, 0.2, 1e-4])
    return write_rows(tmp_path / "reconfig.csv", rows)


def test_fig2_eight_series_in_policy_order(tmp_path):
    path = throughput_csv(tmp_path)
    cells = read_cells(path, ["mean_total_queue"])
    varying, series = split_series(cells, FIGURES["fig2"])
    assert varying == ("delta_r",)
    assert len(series) == 8
    keys = list(series)
    assert keys == sorted(keys)
    assert [k[0] for k in keys] == ["adcnc"] * 4 + ["dcnc"] * 4
    assert [k[1] for k in keys[:4]] == [0.0, 1.0, 5.0, 20.0]
    out = str(tmp_path / "fig2.png")
    assert render.render(FigureSpec("fig2", path, out)) == out
    assert os.path.getsize(out) > 0


def test_fig4_two_series_hysteresis_below_greedy(tmp_path):
    path = reconfig_csv(tmp_path)
    cells = read_cells(path, ["reconfig_fraction"])
    varying, series = split_series(cells, FIGURES["fig4"])
    assert varying == ()
    assert list(series) == [("adcnc",), ("dcnc",)]
    for key, cs in series.items():
        vals = [c["reconfig_fraction"] for c in sorted(cs, key=lambda c: c["V"])]
        assert vals == sorted(vals, reverse=True)   # trending down in V
    by_v = {(c["policy"], c["V"]): c["reconfig_fraction"] for c in cells}
    for v in (0.5, 1.0, 5.0, 20.0, 100.0):
        assert by_v[("adcnc", v)] < by_v[("dcnc", v)]
    out = str(tmp_path / "fig4.png")
    render.render(FigureSpec("fig4", path, out))
    assert os.path.getsize(out) > 0


def test_tradeoff_figures_render(tmp_path):
    path = reconfig_csv(tmp_path)
    for figure in ("fig3", "fig6", "fig7"):
        out = str(tmp_path / f"{figure}.png")
        render.render(FigureSpec(figure, path, out))
        assert os.path.getsize(out) > 0


def test_seed_rows_average_and_flag_instability(tmp_path):
    rows = [["adcnc", 0.2, 5, 0, 0, 0, 10.0, 1.0, 0.1, 0.2, 2e-2],
            ["adcnc", 0.2, 5, 0, 0, 1, 14.0, 1.0, 0.1, 0.2, 1e-4],
            ["dcnc", 0.2, 5, 0, 0, 0, 9.0, 1.0, 0.1, 0.2, 1e-2]]
    path = write_rows(tmp_path / "mini.csv", rows)
    cells = read_cells(path, ["mean_total_queue"])
    assert len(cells) == 2
    adcnc, dcnc = cells
    assert adcnc["mean_total_queue"] == 12.0
    assert adcnc["unstable"]          # worst seed exceeds the threshold
    assert not dcnc["unstable"]       # exactly at the threshold is stable


def test_header_only_csv_is_rejected(tmp_path):
    path = write_rows(tmp_path / "empty.csv", [])
    with pytest.raises(ValueError, match="no data"):
        read_cells(path, ["mean_total_queue"])


def test_missing_column_is_named(tmp_path):
    path = tmp_path / "short.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("policy,lambda\nadcnc,0.2\n")
    with pytest.raises(ValueError, match="mean_cost"):
        read_cells(str(path), ["mean_cost"])


def test_rendering_is_deterministic(tmp_path):
    path = reconfig_csv(tmp_path)
    outs = []
    for name in ("a.png", "b.png"):
        out = str(tmp_path / name)
        render.render(FigureSpec("fig4", path, out))
        with open(out, "rb") as fh:
            outs.append(fh.read())
    assert outs[0] == outs[1]


def test_command_line_interface(tmp_path):
    path = throughput_csv(tmp_path)
    out = str(tmp_path / "cli.png")
    script = render.__file__
    res = subprocess.run(
        [sys.executable, script, "--figure", "fig2", "--csv", path, "--out", out],
        capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert f"wrote {out}" in res.stdout
    assert os.path.getsize(out) > 0

    res = subprocess.run(
        [sys.executable, script, "--figure", "fig9", "--csv", path, "--out", out],
        capture_output=True, text=True)
    assert res.returncode == 2
    assert "fig9" in res.stderr

    res = subprocess.run(
        [sys.executable, script, "--figure", "fig2",
         "--csv", str(tmp_path / "missing.csv"), "--out", out],
        capture_output=True, text=True)
    assert res.returncode == 1
    assert "error:" in res.stderr


def test_runs_without_the_simulator_installed():
    # the renderer must stay a pure CSV consumer
    import ast
    with open(render.__file__, encoding="utf-8") as fh:
        tree = ast.parse(fh.read())
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            assert all("cloudnetsim" not in a.name for a in node.names)
        elif isinstance(node, ast.ImportFrom):
            assert "cloudnetsim" not in (node.module or "")
