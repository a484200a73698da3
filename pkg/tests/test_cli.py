import csv
import io
import json
from fractions import Fraction
from pathlib import Path

import pytest

from universal_orbits import cli
from universal_orbits.config import ConfigError, parse_config
from universal_orbits.glue import GluingSchedule, GluingTargetSequence, build_schedule
from universal_orbits.sft import FULL_2_SHIFT, PeriodicOrbit, ScheduledPoint

GOLDEN = "2\n11\n10\n"
FULL = "2\n11\n11\n"

BASE_CFG = """\
[sft]
file = {sft}

[measures]
depth = {depth}
period_cap = {P}
epsilon = 1/4
samples = 0

[glue]
k0 = {k0}
rounds = 2

[scan]
depth = {scan_depth}
radius = {radius}
shrink = 1/2
rounds = 1

[theorem2]
eta = {eta}
onset = {onset}
cylinder = 0

[run]
output = out
seed = 7
"""

COCYCLES = """
[cocycle-contracting]
u = 0:-1, 1:-3
v = 0:2, 1:1

[cocycle-mixed]
u = 0:-1, 1:1
v = 0:1, 1:1
"""


def write_cfg(tmp_path, sft_text=GOLDEN, extra="", **kw):
    params = dict(sft="shift.sft", depth=3, P=5, k0=1, scan_depth=1, radius="1/4", eta="1/2", onset=1)
    params.update(kw)
    (tmp_path / "shift.sft").write_text(sft_text)
    path = tmp_path / "exp.ini"
    path.write_text(BASE_CFG.format(**params) + extra)
    return path


def read_csv(path):
    return list(csv.DictReader(io.StringIO(Path(path).read_text())))


def test_config_round_trip(tmp_path):
    path = write_cfg(tmp_path, extra=COCYCLES)
    cfg = parse_config(path.read_text())
    text = cfg.to_text()
    again = parse_config(text)
    assert again == cfg
    assert again.to_text() == text
    assert cfg.epsilon == Fraction(1, 4)
    assert [c.name for c in cfg.cocycles] == ["cocycle-contracting", "cocycle-mixed"]
    assert cfg.cocycles[0].u == {0: -1, 1: -3}


def test_config_error_line_numbers():
    with pytest.raises(ConfigError) as exc:
        parse_config("[sft]\nfile = a\n[measures]\ndepth = three\n")
    assert exc.value.line == 4
    with pytest.raises(ConfigError) as exc:
        parse_config("[sft]\nfile = a\n[scan]\nshrink = 2\n")
    assert exc.value.line == 4
    with pytest.raises(ConfigError) as exc:
        parse_config("[sft]\nfile = a\nnot a setting\n")
    assert exc.value.line == 3


def test_config_requires_sft():
    with pytest.raises(ConfigError):
        parse_config("[measures]\ndepth = 2\n")


def test_build_matches_library(tmp_path, capsys):
    path = write_cfg(tmp_path, FULL, depth=1, P=1, k0=2)
    assert cli.main(["build", str(path)]) == 0
    sched = GluingSchedule.from_json((tmp_path / "out" / "schedule.json").read_text())
    net = [PeriodicOrbit((0,)), PeriodicOrbit((1,))]
    want = build_schedule(GluingTargetSequence(tuple(net * 2), PeriodicOrbit((0,)), 2), FULL_2_SHIFT)
    assert sched == want
    rows = read_csv(tmp_path / "out" / "schedule.csv")
    assert (rows[1]["a"], rows[1]["b"]) == (str(want[1].a), str(want[1].b))
    assert "n=1" in capsys.readouterr().out


def test_build_is_deterministic(tmp_path):
    path = write_cfg(tmp_path)
    cli.main(["build", str(path)])
    first = json.loads((tmp_path / "out" / "manifest-build.json").read_text())["outputs"]
    cli.main(["build", str(path)])
    second = json.loads((tmp_path / "out" / "manifest-build.json").read_text())["outputs"]
    assert first == second


def test_invalid_sft_exit_code(tmp_path, capsys):
    path = write_cfg(tmp_path, "2\n10\n01\n")
    assert cli.main(["build", str(path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_config_exit_code(tmp_path):
    assert cli.main(["build", str(tmp_path / "nope.ini")]) == 2


def test_theorem1_default(tmp_path):
    path = write_cfg(tmp_path)
    assert cli.main(["theorem1", str(path)]) == 0
    rows = read_csv(tmp_path / "out" / "convergence.csv")
    for r in rows:
        n, p = int(r["stage"]), int(r["p"])
        assert Fraction(r["tail_bound"]) == Fraction(2, 2 ** n * p)
    assert all(Fraction(r["max_lhs"]) <= Fraction(r["max_bound"]) for r in rows)
    density = read_csv(tmp_path / "out" / "density.csv")
    assert all(r["holds"] == "True" for r in density)


def test_theorem1_corrupted_point(tmp_path, capsys):
    path = write_cfg(tmp_path)
    assert cli.main(["build", str(path)]) == 0
    point_file = tmp_path / "out" / "point.json"
    sched = GluingSchedule.from_json((tmp_path / "out" / "schedule.json").read_text())
    data = json.loads(point_file.read_text())
    # shift the phase of stage 2's block: every symbol inside [a_2, b_2] moves
    data["blocks"][4]["phase"] = 1
    point_file.write_text(json.dumps(data))
    assert ScheduledPoint.from_dict(data) != sched.point()
    assert cli.main(["theorem1", str(path)]) == 3
    manifest = json.loads((tmp_path / "out" / "manifest-theorem1.json").read_text())
    assert manifest["failure"]["stage"] == 2
    assert "stage 2" in capsys.readouterr().err
    assert cli.main(["verify", str(path)]) == 3


def test_theorem2_verdicts(tmp_path, capsys):
    path = write_cfg(tmp_path, FULL, extra=COCYCLES, depth=1, P=2)
    assert cli.main(["theorem2", str(path)]) == 0
    rows = {(r["cocycle"], r["check"]): r["verdict"] for r in read_csv(tmp_path / "out" / "verdicts.csv")}
    assert rows[("cocycle-contracting", "nuh_check")] == "pass"
    assert rows[("cocycle-contracting", "cao_check")] == "pass"
    assert rows[("cocycle-mixed", "nuh_check")] == "fail"
    assert rows[("cocycle-mixed", "cao_check")] == "fail"
    out = capsys.readouterr().out
    assert "log C = 0/1" in out and "log lambda = -1/1" in out
    cert = json.loads((tmp_path / "out" / "certificates.json").read_text())
    assert cert["cocycle-contracting"]["uniform"]["log_lambda"] == "-1/1"
    plot = read_csv(tmp_path / "out" / "plot-cocycle-contracting.csv")
    assert all(len(r["avg_phi_E_decimal"].split(".")[1]) == 12 for r in plot)


def test_theorem2_needs_cocycle(tmp_path):
    path = write_cfg(tmp_path, FULL, depth=1, P=2)
    assert cli.main(["theorem2", str(path)]) == 2


def test_theorem2_inconsistent_exit(tmp_path, monkeypatch):
    import universal_orbits.hyperbolicity as h
    real = h.cao_check

    def flipped(sft, c):
        r = real(sft, c)
        return type(r)(not r.passed, r.eta, r.max_mean_u, r.min_mean_v)

    monkeypatch.setattr(h, "cao_check", flipped)
    path = write_cfg(tmp_path, FULL, extra=COCYCLES, depth=1, P=2, eta="1/10", onset=3)
    assert cli.main(["theorem2", str(path)]) == 4


def test_scan_success(tmp_path):
    path = write_cfg(tmp_path)
    assert cli.main(["scan", str(path)]) == 0
    text = (tmp_path / "out" / "scan.csv").read_text()
    assert text.splitlines()[-1].endswith("status=ok")
    assert cli.main(["verify", str(path)]) == 0


def test_scan_tiny_radius(tmp_path, capsys):
    path = write_cfg(tmp_path, radius="1/1000000000000")
    assert cli.main(["scan", str(path)]) == 5
    assert "absent" in capsys.readouterr().out


def test_verify_detects_edited_scan(tmp_path):
    path = write_cfg(tmp_path)
    assert cli.main(["scan", str(path)]) == 0
    scan = tmp_path / "out" / "scan.csv"
    lines = scan.read_text().splitlines()
    cells = lines[1].split(",")
    cells[3] = "1/3"
    lines[1] = ",".join(cells)
    scan.write_text("\n".join(lines) + "\n")
    assert cli.main(["verify", str(path)]) == 5


def test_output_override(tmp_path):
    path = write_cfg(tmp_path)
    other = tmp_path / "elsewhere"
    assert cli.main(["build", str(path), "--output", str(other)]) == 0
    assert (other / "schedule.json").exists()


def test_config_inline_comments():
    cfg = parse_config("[sft]\nfile = a.sft   ; matrix file\n[measures]\nepsilon = 1/8 ; net radius\n")
    assert cfg.sft_file == "a.sft" and cfg.epsilon == Fraction(1, 8)
