"""Secondary acceptance: the plotting frontend regenerates the three figure
classes from persisted run artifacts only.

Requires node and a built plotkit (plotkit/dist/cli.js); skipped otherwise.
Checksums compare the values embedded in each SVG against the source CSV
text, so any numeric recomputation or reformatting would fail the test.
"""

import hashlib
import json
import re
import shutil
import subprocess
import xml.etree.ElementTree as ET
from html import unescape
from pathlib import Path

import pytest

from mfgbench.harness import RunSpec, SweepSpec, execute_run, execute_sweep

PLOTKIT_CLI = Path(__file__).resolve().parent.parent / "plotkit" / "dist" / "cli.js"

pytestmark = pytest.mark.skipif(
    shutil.which("node") is None or not PLOTKIT_CLI.exists(),
    reason="node or built plotkit unavailable",
)

ALGO_PARAMS = {
    "pure_fp": {},
    "damped_fp": {"damping": 0.5},
    "fictitious_play": {},
    "policy_iteration": {},
    "smooth_pi": {"spi_mode": "decreasing"},
    "boltzmann_pi": {"temperature": 0.2},
    "omd": {"temperature": 0.2, "learning_rate": 1.0},
    "mf_pso": {"temperature": 0.02, "particles": 10},
}


def plotkit(*args: str) -> None:
    subprocess.run(["node", str(PLOTKIT_CLI), *args], check=True, capture_output=True, text=True)


def svg_metadata(path: Path) -> dict:
    text = path.read_text()
    assert text.startswith("<?xml")
    ET.fromstring(text)  # well-formed XML, i.e. a valid vector-image file
    assert "<svg xmlns=" in text
    m = re.search(r'<metadata id="plotkit-data">(.*)</metadata>', text, re.S)
    assert m, "figure must embed its plotted data"
    return json.loads(unescape(m.group(1)))


def sha(values) -> str:
    return hashlib.sha256(json.dumps(values).encode()).hexdigest()


def metrics_columns(run_dir: Path) -> tuple[list[str], list[str]]:
    lines = (run_dir / "metrics.csv").read_text().strip().splitlines()[1:]
    cells = [line.split(",") for line in lines]
    return [c[0] for c in cells], [c[1] for c in cells]


def test_plotkit_regenerates_all_three_figure_classes(tmp_path):
    # --- primary outputs -------------------------------------------------
    coord = dict(env="coordination", env_params={"C": 80.0, "alpha": 1.0, "gamma": 0.9})
    run_dirs = {}
    for algo, extra in ALGO_PARAMS.items():
        spec = RunSpec(
            algorithm=algo,
            solver_params={"iterations": 10, **extra},
            seed=0,
            out_dir=str(tmp_path / "curves" / algo),
            **coord,
        )
        summary = execute_run(spec)
        run_dirs[algo] = Path(summary.out_dir)

    bb_spec = RunSpec(
        algorithm="fictitious_play",
        env="beach_bar",
        env_params={"c1": 2.0, "c2": 5.0, "alpha": 5.0},
        solver_params={"iterations": 60, "br_horizon": 3000},
        seed=0,
        out_dir=str(tmp_path / "beach_bar_run"),
    )
    bb_dir = Path(execute_run(bb_spec).out_dir)

    sweep_root = tmp_path / "sweep"
    execute_sweep(
        SweepSpec(
            base=RunSpec(
                algorithm="damped_fp",
                env="beach_bar",
                solver_params={"iterations": 20, "br_horizon": 3000},
            ),
            grid={"solver.damping": [0.1, 0.5, 1.0]},
            seeds=(0, 1),
            out_root=str(sweep_root),
        )
    )

    # --- figures ---------------------------------------------------------
    curves_svg = tmp_path / "curves.svg"
    plotkit("curves", *[a for d in run_dirs.values() for a in ("--in", str(d))], "--out", str(curves_svg))
    meta = svg_metadata(curves_svg)
    assert meta["logY"] is True
    assert len(meta["series"]) == 8
    labels = {s["label"] for s in meta["series"]}
    assert labels == set(ALGO_PARAMS)
    for series in meta["series"]:
        iters, expls = metrics_columns(Path(series["source"]))
        assert sha(series["iteration"]) == sha(iters)
        assert sha(series["exploitability"]) == sha(expls)

    mf_svg = tmp_path / "mean_field.svg"
    pol_svg = tmp_path / "policy.svg"
    plotkit("mean_field", "--in", str(bb_dir), "--out", str(mf_svg))
    plotkit("policy", "--in", str(bb_dir), "--out", str(pol_svg))
    mf_meta = svg_metadata(mf_svg)
    source_mu = (bb_dir / "mean_field.csv").read_text().strip().split(",")
    assert sha(mf_meta["values"]) == sha(source_mu)
    pol_meta = svg_metadata(pol_svg)
    source_pi = [r.split(",") for r in (bb_dir / "policy.csv").read_text().strip().splitlines()]
    assert sha(pol_meta["rows"]) == sha(source_pi)

    panel_svg = tmp_path / "sweep_panel.svg"
    plotkit("sweep_panel", "--in", str(sweep_root), "--out", str(panel_svg))
    panel_meta = svg_metadata(panel_svg)
    assert panel_meta["varying"] == ["damping"]
    assert len(panel_meta["series"]) == 6  # 3 damping values x 2 seeds
    for series in panel_meta["series"]:
        iters, expls = metrics_columns(Path(series["source"]))
        assert sha(series["exploitability"]) == sha(expls)

    print(
        "\nACCEPTANCE secondary-plotkit: PASS curves(8 algos, log-y), mean_field+policy (beach bar), "
        "sweep panel (damped_fp); all checksums equal source CSV values"
    )
