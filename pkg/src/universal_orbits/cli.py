"""Batch driver: ``universal-orbits {build,theorem1,theorem2,scan,verify} CONFIG``.

Exit codes: 0 ok, 2 configuration error, 3 a shadowing or convergence bound
failed, 4 inconsistent hyperbolicity verdicts, 5 scan found absent entries.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import platform
import sys
import time
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from . import __version__
from .config import ConfigError, ExperimentConfig, load_config
from .errors import BoundViolated, InadmissibleWord, InconsistentVerdicts, Violation
from .genericity import base_orbit_for, build_ball_system, density_witness, residual_scan
from .glue import (
    GluingSchedule,
    UniversalPoint,
    build_schedule,
    cycle_targets,
    verify_eq5,
    verify_step2,
    vfx_density_report,
)
from .hyperbolicity import DiagonalCocycle, checkpoint_series, theorem2_pipeline
from .measures import CylinderDistribution, LocalFunction, cylinder_marginals, epsilon_net, weak_star_distance
from .sft import PeriodicOrbit, ScheduledPoint, admissible_words, parse_sft, parse_word, word_str

log = logging.getLogger("universal_orbits")

EXIT_OK, EXIT_CONFIG, EXIT_BOUND, EXIT_INCONSISTENT, EXIT_SCAN = 0, 2, 3, 4, 5


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


class Run:
    """Collects output files and writes the run manifest."""

    def __init__(self, cfg: ExperimentConfig, command: str):
        self.cfg = cfg
        self.command = command
        self.out = cfg.output_path()
        self.out.mkdir(parents=True, exist_ok=True)
        self.files: dict[str, str] = {}
        self.t0 = time.perf_counter()

    def write(self, name: str, text: str) -> Path:
        path = self.out / name
        data = text.encode()
        path.write_bytes(data)
        self.files[name] = hashlib.sha256(data).hexdigest()
        return path

    def finish(self, status: int, **extra) -> int:
        manifest = {
            "command": self.command,
            "config": self.cfg.to_text(),
            "versions": {"universal_orbits": __version__, "python": platform.python_version()},
            "outputs": [{"file": k, "sha256": v} for k, v in sorted(self.files.items())],
            "exit_code": status,
            "seconds": round(time.perf_counter() - self.t0, 3),
            **extra,
        }
        (self.out / f"manifest-{self.command}.json").write_text(json.dumps(manifest, indent=2) + "\n")
        return status


def _load_sft(cfg: ExperimentConfig):
    path = cfg.sft_path()
    try:
        return parse_sft(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read SFT file {path}: {exc.strerror}") from None
    except ValueError as exc:
        raise ConfigError(f"invalid SFT file {path}: {exc}") from None


def _net(cfg: ExperimentConfig, sft):
    return epsilon_net(sft, cfg.epsilon, cfg.depth, cfg.period_cap, cfg.samples, cfg.seed)


def _targets(cfg: ExperimentConfig, sft, net):
    base_word = parse_word(cfg.base)
    try:
        base, phase = base_orbit_for(base_word, sft)
    except (InadmissibleWord, ValueError) as exc:
        raise ConfigError(f"[glue] base: {exc}") from None
    targets = cycle_targets(net, cfg.rounds, base, cfg.K0, phase, cfg.epsilon)
    if cfg.stages is not None:
        entries = [targets.entries[i % len(targets.entries)] for i in range(cfg.stages)]
        targets = type(targets)(tuple(entries), base, cfg.K0, phase)
    return targets


def schedule_table(schedule: GluingSchedule) -> str:
    rows = [(s.n, str(s.orbit), s.period, s.M, s.a, s.b, s.pad, s.repetitions)
            for s in schedule.stages]
    return _csv(rows, ["n", "orbit", "p", "M", "a", "b", "pad", "repetitions"])


def cmd_build(cfg: ExperimentConfig) -> int:
    run = Run(cfg, "build")
    sft = _load_sft(cfg)
    net = _net(cfg, sft)
    schedule = build_schedule(_targets(cfg, sft, net), sft)
    point = schedule.point()
    run.write("schedule.json", schedule.to_json())
    run.write("point.json", json.dumps(point.to_dict(), indent=2) + "\n")
    run.write("schedule.csv", schedule_table(schedule))
    run.write("net.csv", _csv([(str(m.orbit), m.orbit.period) for m in net], ["orbit", "period"]))
    for s in schedule.stages:
        print(f"n={s.n} orbit={s.orbit} M={s.M} a={s.a} b={s.b}")
    return run.finish(EXIT_OK)


def _load_built(cfg: ExperimentConfig, sft):
    out = cfg.output_path()
    sched_file, point_file = out / "schedule.json", out / "point.json"
    if sched_file.exists() and point_file.exists():
        schedule = GluingSchedule.from_json(sched_file.read_text())
        point = ScheduledPoint.from_dict(json.loads(point_file.read_text()))
        return schedule, point
    net = _net(cfg, sft)
    schedule = build_schedule(_targets(cfg, sft, net), sft)
    return schedule, schedule.point()


def check_theorem1(up: UniversalPoint, L: int, eq5_samples: int, seed: int):
    """Shadowing check at every stage, then the convergence bound for every cylinder indicator."""
    for n in range(0, up.stages + 1):
        verify_eq5(up, n, eq5_samples, seed)
    up.point.check_admissible(up.sft)
    indicators = [LocalFunction.indicator(w) for l in range(1, L + 1)
                  for w in admissible_words(up.sft, l)]
    rows = []
    for n in range(1, up.stages + 1):
        worst = max((verify_step2(up, n, xi) for xi in indicators), key=lambda r: r.lhs)
        st = up.schedule[n]
        rho = weak_star_distance(up.checkpoint_measure(n, L), cylinder_marginals(st.orbit, L), L)
        rows.append((n, str(st.orbit), st.period, _frac(rho), _frac(worst.lhs), _frac(worst.bound),
                     _frac(Fraction(2, 2 ** n * st.period))))
    return rows


def cmd_theorem1(cfg: ExperimentConfig) -> int:
    run = Run(cfg, "theorem1")
    sft = _load_sft(cfg)
    schedule, point = _load_built(cfg, sft)
    up = UniversalPoint(point, schedule)
    try:
        rows = check_theorem1(up, cfg.depth, cfg.eq5_samples, cfg.seed)
    except (Violation, BoundViolated) as exc:
        print(f"bound failed at stage {exc.stage}: {exc}", file=sys.stderr)
        return run.finish(EXIT_BOUND, failure={"stage": exc.stage, "message": str(exc),
                                               "witness": None if not isinstance(exc, Violation)
                                               else str(exc.witness)})
    except InadmissibleWord as exc:
        print(f"point is not admissible: {exc}", file=sys.stderr)
        return run.finish(EXIT_BOUND, failure={"message": str(exc)})
    run.write("convergence.csv", _csv(rows, ["stage", "orbit", "p", "rho_checkpoint_target",
                                             "max_lhs", "max_bound", "tail_bound"]))
    net = [PeriodicOrbit(parse_word(r["orbit"])) for r in _read_net(cfg, sft)]
    report = vfx_density_report(up, net, cfg.depth)
    run.write("density.csv", _csv(
        [(str(r.orbit), r.best_stage, _frac(r.distance), _frac(r.claimed_bound), r.holds)
         for r in report], ["orbit", "best_stage", "min_rho", "claimed_bound", "holds"]))
    if not all(r.holds for r in report):
        return run.finish(EXIT_BOUND)
    print(f"theorem1: {up.stages} stages, all bounds hold")
    return run.finish(EXIT_OK)


def _read_net(cfg: ExperimentConfig, sft):
    path = cfg.output_path() / "net.csv"
    if path.exists():
        return list(csv.DictReader(io.StringIO(path.read_text())))
    return [{"orbit": str(m.orbit)} for m in _net(cfg, sft)]


def _cocycles(cfg: ExperimentConfig):
    if not cfg.cocycles:
        raise ConfigError("theorem2 needs at least one [cocycle] section")
    return [(c.name, DiagonalCocycle(c.u, c.v, c.L)) for c in cfg.cocycles]


def cmd_theorem2(cfg: ExperimentConfig) -> int:
    run = Run(cfg, "theorem2")
    sft = _load_sft(cfg)
    net = _net(cfg, sft)
    targets = _targets(cfg, sft, net)
    word = parse_word(cfg.cylinder)
    table = []
    certificates = {}
    status = EXIT_OK
    for name, c in _cocycles(cfg):
        try:
            c.check_alphabet(sft)
        except ValueError as exc:
            raise ConfigError(f"[{name}]: {exc}") from None
        try:
            report = theorem2_pipeline(sft, word, c, targets, cfg.eta, cfg.onset)
        except InconsistentVerdicts as exc:
            print(f"{name}: {exc}", file=sys.stderr)
            status = EXIT_INCONSISTENT
            report = exc.report
        certificates[name] = report.to_dict()
        table.extend((name, check, verdict) for check, verdict in report.verdict_rows())
        up = density_witness(word, targets, sft)
        series = checkpoint_series(up, c.phi_E(sft))
        run.write(f"plot-{name}.csv", _csv([(n, _frac(a), f"{float(a):.12f}") for n, a in series],
                                           ["stage", "avg_phi_E", "avg_phi_E_decimal"]))
        print(f"{name}: nuh={'pass' if report.nuh_pass else 'fail'} "
              f"cao={'pass' if report.cao_pass else 'fail'}")
        if report.uniform is not None:
            print(f"  log C = {_frac(report.uniform.log_C)}  log lambda = {_frac(report.uniform.log_lambda)}")
    run.write("certificates.json", json.dumps(certificates, indent=2) + "\n")
    run.write("verdicts.csv", _csv(table, ["cocycle", "check", "verdict"]))
    return run.finish(status)


def _scan(cfg: ExperimentConfig, sft):
    net = _net(cfg, sft)
    system = build_ball_system(list(net), cfg.scan_rounds, cfg.scan_shrink, cfg.ball_base_radius())
    targets = _targets(cfg, sft, net)
    return residual_scan(sft, cfg.scan_depth, system, targets, cfg.depth), system, targets


def cmd_scan(cfg: ExperimentConfig) -> int:
    run = Run(cfg, "scan")
    sft = _load_sft(cfg)
    report, _, _ = _scan(cfg, sft)
    run.write("scan.csv", report.to_csv())
    print(report.summary())
    for e in report.failures:
        print(f"absent: cylinder {word_str(e.cylinder)} ball {e.ball_index}")
    return run.finish(EXIT_OK if report.success else EXIT_SCAN)


def cmd_verify(cfg: ExperimentConfig) -> int:
    """Re-check whatever persisted artifacts exist in the output directory."""
    run = Run(cfg, "verify")
    sft = _load_sft(cfg)
    out = cfg.output_path()
    status = EXIT_OK
    checked = []
    if (out / "schedule.json").exists():
        schedule = GluingSchedule.from_json((out / "schedule.json").read_text())
        rebuilt = schedule.point()
        stored = ScheduledPoint.from_dict(json.loads((out / "point.json").read_text()))
        up = UniversalPoint(stored, schedule)
        try:
            check_theorem1(up, cfg.depth, cfg.eq5_samples, cfg.seed)
            ok = stored == rebuilt and _recurrence_ok(schedule)
        except (Violation, BoundViolated, InadmissibleWord):
            ok = False
        checked.append(("schedule", ok))
        if not ok:
            status = EXIT_BOUND
    if (out / "scan.csv").exists():
        ok = _reverify_scan(cfg, sft, (out / "scan.csv").read_text())
        checked.append(("scan", ok))
        if not ok and status == EXIT_OK:
            status = EXIT_SCAN
    for name, ok in checked:
        print(f"{name}: {'ok' if ok else 'FAILED'}")
    return run.finish(status, checked=[{"artifact": n, "ok": ok} for n, ok in checked])


def _recurrence_ok(schedule: GluingSchedule) -> bool:
    prev = schedule.stages[0]
    for st in schedule.stages[1:]:
        if st.a != prev.b + st.M or st.b != st.a + st.growth * (prev.b + st.M) * st.period:
            return False
        prev = st
    return True


def _reverify_scan(cfg: ExperimentConfig, sft, text: str) -> bool:
    net = _net(cfg, sft)
    system = build_ball_system(list(net), cfg.scan_rounds, cfg.scan_shrink, cfg.ball_base_radius())
    targets = _targets(cfg, sft, net)
    witnesses = {}
    rows = [r for r in csv.DictReader(io.StringIO(text)) if not r["cylinder"].startswith("#")]
    for r in rows:
        w = parse_word(r["cylinder"])
        if w not in witnesses:
            witnesses[w] = density_witness(w, targets, sft)
        if r["horizon"] == "absent":
            continue
        ball = system.inner[int(r["ball"])]
        N = int(r["horizon"])
        counts = witnesses[w].point.window_counts(0, N, cfg.depth)
        emp = CylinderDistribution(cfg.depth, {k: Fraction(c, N) for k, c in counts.items()})
        d = weak_star_distance(emp, ball.center, cfg.depth)
        if d != Fraction(r["rho"]) or d > ball.radius:
            return False
    return True


COMMANDS = {
    "build": cmd_build,
    "theorem1": cmd_theorem1,
    "theorem2": cmd_theorem2,
    "scan": cmd_scan,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="universal-orbits", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("config", help="experiment config file")
    parser.add_argument("--output", help="override [run] output directory")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.output:
            cfg = replace(cfg, output=str(Path(args.output).resolve()))
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
