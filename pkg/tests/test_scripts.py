import runpy
import sys
from pathlib import Path

import pytest

SCRIPTS = Path(__file__).resolve().parents[1] / "scripts"


@pytest.mark.parametrize("name", ["reproduce_tables", "weak_scaling", "convergence_history", "condition_sweep"])
def test_script_help(name, monkeypatch, capsys):
    monkeypatch.setattr(sys, "argv", [name, "--help"])
    with pytest.raises(SystemExit) as exc:
        runpy.run_path(str(SCRIPTS / f"{name}.py"), run_name="__main__")
    assert exc.value.code == 0
    assert "usage" in capsys.readouterr().out


def test_condition_growth_is_monotone():
    ns = runpy.run_path(str(SCRIPTS / "condition_sweep.py"))
    rows = ns["product_conditions"](8, 1e-2, 16)
    assert [n for n, _ in rows] == [1, 2, 4, 8, 16]
    conds = [c for _, c in rows]
    assert conds[0] >= 1.0
    assert all(b >= a for a, b in zip(conds, conds[1:]))
