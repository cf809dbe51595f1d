import json
import math

import numpy as np
import pytest

from pme_react import cli
from pme_react.config import ConfigError, load, loads, resolve
from pme_react.density import E
from pme_react.feasibility import REGIME_BLOWUP, REGIME_GE1B, REGIME_GE2

GE1B_TEXT = """\
[problem]
m = 2
p = 3
N = 3

[density]
family = H1
alpha = 2
r0 = 25

[barrier]
regime = GE1b

[solver]
cells = 32
"""

BLOWUP_TEXT = f"""\
[problem]
m = 2
p = 3
N = 3

[density]
family = H2Smooth
alpha = 2
r0 = {E!r}

[barrier]
regime = Blowup

[solver]
cells = 48
t_end = 2.0e-5
output_times = 0, 1.0e-5
"""

PLAIN_TEXT = """\
[problem]
m = 2
p = 3
N = 3

[density]
family = H2Smooth
alpha = 2
r0 = 8

[solver]
R = 1.0
cells = 16
t_end = 0.6
boundary = neumann0
output_times = 0, 0.2, 0.4

[harness]
initial_data = constant:1.0
"""


# -- parsing ----------------------------------------------------------------


def test_loads_happy_path():
    cfg = loads(GE1B_TEXT)
    assert cfg.constants.m == 2.0 and cfg.constants.N == 3
    assert cfg.density.family == "H1" and cfg.density.r0 == 25.0
    assert cfg.regime == REGIME_GE1B
    assert cfg.barrier_given == {}
    assert cfg.solver_R == "auto"
    assert cfg.solver_cells == 32
    assert cfg.solver_t_end is None
    assert cfg.output_times == "auto"
    assert cfg.initial.kind == "equals_barrier"
    assert any("cfl_safety = 0.45 (default)" in d for d in cfg.defaults_used)


def test_loads_collects_every_issue():
    text = """\
stray = 1
[problem]
m = 2
p = abc
[density]
family = H9
alpha = 2
r0 = 8
bogus = 1
alpha = 3
[orbit]
x = 1
[solver
cells = 64
"""
    with pytest.raises(ConfigError) as exc_info:
        loads(text)
    issues = exc_info.value.issues
    lines = [i.line for i in issues]
    assert lines == sorted(lines)

    def has(line, fragment):
        return any(i.line == line and fragment in i.message for i in issues)

    assert has(1, "key before any section header")
    assert has(4, "expected a number, got 'abc'")
    assert has(6, "family")
    assert has(9, "unknown key 'bogus'")
    assert has(10, "duplicate key 'alpha'")
    assert has(11, "unknown section [orbit]")
    assert has(13, "unterminated section header")
    # missing required N is attributed to the [problem] header
    assert has(2, "missing required key 'n'")
    # the swallowed keys under bad headers produce no extra noise
    assert not any("x" in i.message and i.line == 12 for i in issues)


def test_loads_missing_required_sections():
    with pytest.raises(ConfigError) as exc_info:
        loads("[solver]\ncells = 8\n")
    msgs = [i.message for i in exc_info.value.issues]
    assert any("[problem]" in m for m in msgs)
    assert any("[density]" in m for m in msgs)


def test_loads_domain_errors_carry_section_lines():
    text = GE1B_TEXT.replace("r0 = 25", "r0 = 1.5")
    with pytest.raises(ConfigError) as exc_info:
        loads(text)
    (issue,) = exc_info.value.issues
    assert issue.line == 6  # the [density] header
    assert "r0" in issue.message


def test_initial_data_spellings():
    base = PLAIN_TEXT.replace("initial_data = constant:1.0", "initial_data = {}")
    assert loads(PLAIN_TEXT).initial.value == 1.0
    cfg = loads(base.format("csv:/tmp/u0.csv"))
    assert cfg.initial.kind == "csv" and cfg.initial.path == "/tmp/u0.csv"
    with pytest.raises(ConfigError) as exc_info:
        loads(base.format("random_noise"))
    (issue,) = exc_info.value.issues
    assert "initial_data" in issue.message
    assert issue.line == PLAIN_TEXT.splitlines().index("initial_data = constant:1.0") + 1


def test_scaled_barrier_picks_up_factor():
    text = GE1B_TEXT + "\n[harness]\ninitial_data = scaled_barrier\nscale_factor = 0.25\n"
    cfg = loads(text)
    assert cfg.initial.kind == "scaled_barrier"
    assert cfg.initial.factor == 0.25


# -- resolution -------------------------------------------------------------


def test_resolve_ge1_auto_rules():
    res = resolve(loads(GE1B_TEXT))
    assert res.regime == REGIME_GE1B
    assert res.report is not None and res.report.overall
    assert res.solver.t_end == 10.0  # 10 T with the default T = 1
    assert res.solver.R == 50.0  # 2 r0
    assert len(res.solver.output_times) == 21
    assert res.solver.output_times[0] == 0.0 and res.solver.output_times[-1] == 10.0
    sc = res.scenario()
    assert sc.grid().R == 50.0
    assert any("(search)" in d for d in res.defaults_used)
    assert any("(auto)" in d for d in res.defaults_used)


def test_resolve_blowup_auto_R():
    res = resolve(loads(BLOWUP_TEXT))
    assert res.regime == REGIME_BLOWUP
    assert res.solver.R == pytest.approx(2.0 * res.barrier.support_radius(0.0), rel=1e-12)
    assert res.solver.R == pytest.approx(831.2, rel=1e-3)


def test_resolve_explicit_barrier_needs_full_pair():
    text = BLOWUP_TEXT.replace("regime = Blowup", "regime = GE2\nC = 0.7")
    with pytest.raises(ValueError, match="both C and a"):
        resolve(loads(text))


def test_resolve_explicit_ge2_pair():
    text = BLOWUP_TEXT.replace(
        "regime = Blowup", "regime = GE2\nC = 0.722675\na = 46.713714"
    ).replace("r0 = " + repr(E), "r0 = 8")
    res = resolve(loads(text))
    assert res.regime == REGIME_GE2
    assert res.report is None  # explicit parameters skip the search
    assert res.barrier.bbar == 4.0  # alpha + 2 from the density
    assert any("T = 1 (default)" in d for d in res.defaults_used)


def test_resolve_plain_simulation():
    res = resolve(loads(PLAIN_TEXT))
    assert res.barrier is None and res.regime is None
    assert res.solver.output_times == (0.0, 0.2, 0.4)
    with pytest.raises(ValueError):
        res.scenario()


def test_resolve_plain_requires_explicit_numbers():
    with pytest.raises(ValueError, match="R must be a number"):
        resolve(loads(PLAIN_TEXT.replace("R = 1.0", "R = auto")))
    with pytest.raises(ValueError, match="t_end is required"):
        resolve(loads(PLAIN_TEXT.replace("t_end = 0.6\n", "")))
    with pytest.raises(ValueError, match="output_times must be explicit"):
        resolve(loads(PLAIN_TEXT.replace("output_times = 0, 0.2, 0.4", "output_times = auto")))
    with pytest.raises(ValueError, match="needs a barrier"):
        resolve(loads(PLAIN_TEXT.replace("initial_data = constant:1.0", "initial_data = equals_barrier")))


# -- command line -----------------------------------------------------------


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_cli_config_errors_exit_1(tmp_path, capsys):
    cfg = write(tmp_path, "bad.cfg", "[problem]\nm = two\n")
    rc = cli.main(["feasibility", "--config", cfg, "--out", str(tmp_path / "out")])
    assert rc == 1
    err = capsys.readouterr().err
    assert "config error" in err
    assert "line 2" in err


def test_cli_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as exc_info:
        cli.main(["feasibility"])  # --config/--out missing
    assert exc_info.value.code == 1
    with pytest.raises(SystemExit) as exc_info:
        cli.main(["no-such-command", "--config", "x", "--out", "y"])
    assert exc_info.value.code == 1


def test_cli_feasibility_writes_summary(tmp_path, capsys):
    cfg = write(tmp_path, "ge1b.cfg", GE1B_TEXT)
    out = tmp_path / "out"
    rc = cli.main(["feasibility", "--config", cfg, "--out", str(out)])
    assert rc == 0
    assert "feasible" in capsys.readouterr().out
    payload = json.loads((out / "summary.json").read_text())
    assert payload["overall"] is True
    assert payload["mode"] == REGIME_GE1B
    assert {e["name"] for e in payload["inequalities"]} >= {"amplitude_balance", "epsilon_floor"}
    assert "defaults_used" in payload


def test_cli_infeasible_search_exits_2(tmp_path, capsys):
    text = GE1B_TEXT.replace("regime = GE1b", "regime = GE1b\nb = 1.5")
    cfg = write(tmp_path, "bad_shape.cfg", text)
    out = tmp_path / "out"
    rc = cli.main(["feasibility", "--config", cfg, "--out", str(out)])
    assert rc == 2
    assert "infeasible" in capsys.readouterr().err
    payload = json.loads((out / "summary.json").read_text())
    assert payload["feasible"] is False


def test_cli_compare_fast_ge1b(tmp_path, capsys):
    text = GE1B_TEXT + "t_end = 0.5\noutput_times = 0, 0.25, 0.5\n"
    cfg = write(tmp_path, "cmp.cfg", text)
    out = tmp_path / "out"
    rc = cli.main(["compare", "--config", cfg, "--out", str(out)])
    assert rc == 0
    assert "compare[GE1b]: pass" in capsys.readouterr().out
    verdict = json.loads((out / "verdict.json").read_text())
    assert verdict["verdict"] == "pass"
    assert verdict["termination"] == "completed"
    series = (out / "series.csv").read_text().splitlines()
    assert series[0] == "t,sup_norm,support_radius"
    assert len(series) == 4
    snaps = (out / "snapshots.csv").read_text().splitlines()
    assert snaps[0] == "t,r,u"
    assert len(snaps) == 1 + 3 * 32


def test_cli_simulate_plain_reaction(tmp_path, capsys):
    cfg = write(tmp_path, "plain.cfg", PLAIN_TEXT)
    out = tmp_path / "out"
    rc = cli.main(["simulate", "--config", cfg, "--out", str(out)])
    assert rc == 0
    assert "simulate: blowup" in capsys.readouterr().out
    payload = json.loads((out / "summary.json").read_text())
    assert payload["termination"] == "blowup"
    assert payload["s_num"] == pytest.approx(0.5, rel=0.05)
    assert payload["tau0"] == pytest.approx(0.5, rel=1e-12)


def test_cli_scan_writes_rows(tmp_path, capsys):
    cfg = write(tmp_path, "bu.cfg", BLOWUP_TEXT)
    out = tmp_path / "out"
    rc = cli.main(["blow-up-scan", "--config", cfg, "--out", str(out)])
    assert rc == 0
    assert "5/5 scaled runs blew up" in capsys.readouterr().out
    rows = (out / "scan.csv").read_text().splitlines()
    assert rows[0] == "factor,blowup,s_num,tau0"
    assert len(rows) == 6
    for line in rows[1:]:
        factor, fired, s_num, tau0 = line.split(",")
        assert fired == "true"
        assert float(s_num) >= 0.95 * float(tau0)
    verdict = json.loads((out / "verdict.json").read_text())
    assert len(verdict["scan"]) == 5
    assert verdict["verdict"] == "pass"
