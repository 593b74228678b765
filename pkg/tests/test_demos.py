import pathlib
import subprocess
import sys

import pytest

DEMOS = sorted((pathlib.Path(__file__).parent.parent / "demos").glob("*.py"))


@pytest.mark.parametrize("script", DEMOS, ids=[p.stem for p in DEMOS])
def test_demo_runs(script, tmp_path):
    extra = ["--objects", "20", "--params", "20"] if "random" in script.stem else []
    result = subprocess.run([sys.executable, str(script), "--out", str(tmp_path), *extra],
                            capture_output=True, text=True, timeout=300)
    assert result.returncode == 0, result.stderr
    assert any(tmp_path.iterdir())
