import os
import runpy
import shutil
import subprocess
from pathlib import Path

import pytest

DEMOS = Path(__file__).resolve().parent.parent / "demos"


@pytest.mark.parametrize("script", sorted(p.name for p in DEMOS.glob("*.py")))
def test_demo_runs(script, capsys):
    runpy.run_path(str(DEMOS / script), run_name="__main__")
    assert capsys.readouterr().out


@pytest.mark.skipif(shutil.which("gralis") is None, reason="console script not installed")
def test_cli_tour(tmp_path):
    proc = subprocess.run(["sh", str(DEMOS / "08_cli.sh")], capture_output=True, text=True,
                          env={**os.environ, "TMPDIR": str(tmp_path)})
    assert proc.returncode == 0, proc.stderr
    assert "rerun identical" in proc.stdout
