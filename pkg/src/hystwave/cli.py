"""Command-line entry point: ``hystwave {riemann,cauchy,verify,oracle}``.

Exit codes: 0 pass, 1 verification failure, 2 input error, 3 internal guard.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import analysis, oracle, preisach, riemann, wavefront
from .preisach import Triangle, apply_monotone, curve_from_values, format_number, parse_number, virgin
from .relay import PiecewiseMonotoneSignal

log = logging.getLogger("hystwave")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_GUARD = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


class InconsistentTrajectory(Exception):
    """A saved trajectory whose fronts do not fit together; carries what was loaded."""

    def __init__(self, message, trajectory):
        super().__init__(message)
        self.trajectory = trajectory


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


@dataclass
class RawConfig:
    """Flat ``key = value`` pairs plus repeated ``[section]`` blocks."""

    values: dict = field(default_factory=dict)
    sections: list = field(default_factory=list)  # [(name, dict), ...]

    def get(self, key, default=None):
        return self.values.get(key, default)

    def blocks(self, name):
        return [body for sec, body in self.sections if sec == name]


def parse_config(text: str) -> RawConfig:
    cfg = RawConfig()
    target = cfg.values
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            body = {}
            cfg.sections.append((line[1:-1].strip(), body))
            target = body
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in target:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        target[key] = value
    return cfg


def _number(text, what):
    try:
        v = parse_number(text)
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(f"{what}: cannot parse number {text!r}") from exc
    if isinstance(v, float) and not math.isfinite(v):
        raise ConfigError(f"{what}: value must be finite")
    return v


def _numbers(text, what):
    return [_number(t, what) for t in text.split(",") if t.strip()]


def _curve(body: dict, prefix: str, triangle: Triangle, u, what):
    """Curve from ``<prefix>curve`` (serialized) or ``<prefix>values`` (generating signal)."""
    if prefix + "curve" in body:
        try:
            c = preisach.deserialize(body[prefix + "curve"])
        except ValueError as exc:
            raise ConfigError(f"{what}: {exc}") from exc
        if c.triangle != triangle:
            raise ConfigError(f"{what}: curve triangle {c.triangle.a} differs from a = {triangle.a}")
        return c
    if prefix + "values" in body:
        return curve_from_values(triangle, [0] + _numbers(body[prefix + "values"], what))
    return apply_monotone(virgin(triangle), u)[0]


@dataclass
class Scenario:
    triangle: Triangle
    n: int
    T_end: Fraction
    data: wavefront.InitialData
    checkpoints: list
    probes: list


def load_scenario(cfg: RawConfig, n_override=None, checkpoints_override=None) -> Scenario:
    a = _number(cfg.get("a", "1"), "a")
    triangle = Triangle(a)
    n = int(n_override if n_override is not None else cfg.get("n", "5"))
    T_end = Fraction(_number(cfg.get("T_end", "1"), "T_end"))
    pieces = cfg.blocks("piece")
    if not pieces:
        raise ConfigError("at least one [piece] block is required")
    breaks, cells = [], []
    for i, body in enumerate(pieces):
        try:
            xl, xr, u = (_number(body[k], f"piece {i}") for k in ("x_left", "x_right", "u"))
        except KeyError as exc:
            raise ConfigError(f"piece {i}: missing key {exc}") from exc
        if breaks and breaks[-1] != xl:
            raise ConfigError(f"piece {i}: pieces must be contiguous ({breaks[-1]} != {xl})")
        if not xr > xl:
            raise ConfigError(f"piece {i}: empty interval [{xl}, {xr}]")
        if not breaks:
            breaks.append(xl)
        breaks.append(xr)
        cells.append(wavefront.Cell(u, _curve(body, "", triangle, u, f"piece {i}")))
    tails = []
    for side in ("left", "right"):
        u = _number(cfg.get(f"{side}_u", "0"), f"{side}_u")
        tails.append(wavefront.Cell(u, _curve(cfg.values, f"{side}_", triangle, u, f"{side} tail")))
    data = wavefront.InitialData(tuple(Fraction(b) for b in breaks), (tails[0], *cells, tails[1]))
    if checkpoints_override is not None:
        cps = _numbers(checkpoints_override, "--checkpoints")
    else:
        cps = _numbers(cfg.get("checkpoints", format_number(T_end)), "checkpoints")
    cps = sorted({Fraction(0), *(Fraction(c) for c in cps), T_end})
    if cps[-1] > T_end or cps[0] < 0:
        raise ConfigError("checkpoints must lie in [0, T_end]")
    probes = []
    for i, body in enumerate(cfg.blocks("probe")):
        k = _number(body.get("k", "0"), f"probe {i}")
        kind = body.get("kind", "virgin-shifted")
        if "curve" in body or "values" in body:
            c = _curve(body, "", triangle, k, f"probe {i}")
        elif kind == "saturated-up":
            c = apply_monotone(apply_monotone(virgin(triangle), triangle.a)[0], k)[0]
        elif kind == "saturated-down":
            c = apply_monotone(apply_monotone(virgin(triangle), -triangle.a)[0], k)[0]
        elif kind == "virgin-shifted":
            c = apply_monotone(virgin(triangle), k)[0]
        else:
            raise ConfigError(f"probe {i}: unknown kind {kind!r}")
        probes.append(analysis.EntropyProbe(c.anchor, c))
    return Scenario(triangle, n, T_end, data, cps, probes)


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if v is None:
        return ""
    return "%.17g" % float(v)


def _write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


# --------------------------------------------------------------------------
# riemann
# --------------------------------------------------------------------------


def cmd_riemann(args, cfg: RawConfig) -> int:
    triangle = Triangle(_number(cfg.get("a", "1"), "a"))
    try:
        u_l = _number(cfg.values["u_left"], "u_left")
        u_r = _number(cfg.values["u_right"], "u_right")
    except KeyError as exc:
        raise ConfigError(f"missing key {exc}") from exc
    c_l = _curve(cfg.values, "left_", triangle, u_l, "left state")
    c_r = _curve(cfg.values, "right_", triangle, u_r, "right state")
    fan = riemann.solve_riemann(riemann.RiemannData(u_l, u_r, c_l, c_r))
    out = Path(args.out)
    header = ["slowness_lo", "slowness_hi", "kind", "u", "c0", "c1", "pivot"]
    rows = []
    if fan.stationary_jump:
        rows.append((0, 0, "stationary", u_l, None, None, None))
    if u_l != u_r:
        for p in fan.pieces:
            br = p.branch
            rows.append(
                (p.xi_lo, p.xi_hi, p.kind, p.u, br and br.c0, br and br.c1, br and br.pivot)
            )
    _write_csv(out / "fan.csv", header, rows)
    samples = int(cfg.get("samples", "64"))
    xi_max = Fraction(5, 4)
    xis = [xi_max * j / samples for j in range(1, samples + 1)]
    _write_csv(out / "profile.csv", ["x_over_t", "u", "w"], riemann.sample_fan(fan, xis))
    return EXIT_OK


# --------------------------------------------------------------------------
# cauchy
# --------------------------------------------------------------------------


def _snapshot_rows(state: wavefront.PiecewiseState):
    return [(x0, x1, c.u, c.w) for x0, x1, c in state.intervals()]


def _checkpoint_name(t) -> str:
    return "snapshot_t" + format_number(t).replace("/", "_") + ".csv"


FRONT_HEADER = [
    "id", "kind", "t_birth", "x_birth", "speed", "t_death",
    "u_left", "u_right", "curve_left", "curve_right",
]


def _write_trajectory(out: Path, sc: Scenario, traj: wavefront.Trajectory):
    _write_csv(
        out / "events.csv",
        ["time", "position", "kind", "fronts_in", "fronts_out", "u_shocks_after"],
        [(e.time, e.position, e.kind, str(e.fronts_in), str(e.fronts_out), str(e.u_shocks_after)) for e in traj.events],
    )
    for t in sc.checkpoints:
        _write_csv(out / _checkpoint_name(t), ["x_left", "x_right", "u", "w"], _snapshot_rows(traj.checkpoints[t]))
    exact = format_number
    rows = [
        (
            str(s.id), s.kind, exact(s.t_birth), exact(s.x_birth), exact(s.speed),
            "" if s.t_death is None else exact(s.t_death),
            exact(s.left.u), exact(s.right.u),
            preisach.serialize(s.left.curve), preisach.serialize(s.right.curve),
        )
        for s in traj.segments
    ]
    _write_csv(out / "fronts.csv", FRONT_HEADER, rows)
    c0 = traj.initial.cells[0]
    meta = [
        ("n", str(sc.n)),
        ("a", exact(sc.triangle.a)),
        ("T_end", exact(sc.T_end)),
        ("left_u", exact(c0.u)),
        ("left_curve", preisach.serialize(c0.curve)),
    ]
    _write_csv(out / "meta.csv", ["key", "value"], meta)


def _evolve(sc: Scenario):
    state0 = wavefront.discretize_initial(sc.data, sc.n)
    params = wavefront.GridParams(sc.n, sc.triangle.a, sc.T_end)
    return wavefront.evolve(state0, params, sc.checkpoints)


def cmd_cauchy(args, cfg: RawConfig) -> int:
    sc = load_scenario(cfg, args.n, args.checkpoints)
    traj = _evolve(sc)
    _write_trajectory(Path(args.out), sc, traj)
    log.info("%d fronts, %d interactions", len(traj.segments), len(traj.events))
    return EXIT_OK


# --------------------------------------------------------------------------
# verify
# --------------------------------------------------------------------------


def load_trajectory(directory: Path, checkpoints=None) -> wavefront.Trajectory:
    """Rebuild a trajectory from ``meta.csv``, ``fronts.csv`` and ``events.csv``."""
    try:
        with open(directory / "meta.csv") as fh:
            meta = {r["key"]: r["value"] for r in csv.DictReader(fh)}
        params = wavefront.GridParams(int(meta["n"]), parse_number(meta["a"]), Fraction(parse_number(meta["T_end"])))
        left = wavefront.Cell(parse_number(meta["left_u"]), preisach.deserialize(meta["left_curve"]))
        segments = []
        with open(directory / "fronts.csv") as fh:
            for r in csv.DictReader(fh):
                seg = wavefront.FrontSegment(
                    int(r["id"]), r["kind"], Fraction(parse_number(r["t_birth"])),
                    Fraction(parse_number(r["x_birth"])), Fraction(parse_number(r["speed"])),
                    wavefront.Cell(parse_number(r["u_left"]), preisach.deserialize(r["curve_left"])),
                    wavefront.Cell(parse_number(r["u_right"]), preisach.deserialize(r["curve_right"])),
                    Fraction(parse_number(r["t_death"])) if r["t_death"] else None,
                )
                if seg.kind == wavefront.U_SHOCK:
                    region = apply_monotone(seg.right.curve, seg.left.u)[1]
                    seg.psi = region.psi()
                    seg.reverse_psi = preisach.FlipRegion(region.polygon, -region.direction).psi()
                elif seg.kind != wavefront.Z_STATIONARY:
                    raise ValueError(f"unknown front kind {seg.kind!r}")
                segments.append(seg)
        events = []
        with open(directory / "events.csv") as fh:
            for r in csv.DictReader(fh):
                events.append(
                    wavefront.Event(
                        Fraction(float(r["time"])), Fraction(float(r["position"])), r["kind"],
                        int(r["fronts_in"]), int(r["fronts_out"]), int(r["u_shocks_after"]),
                    )
                )
    except (OSError, KeyError, ValueError, TypeError, ArithmeticError) as exc:
        raise ConfigError(f"cannot load trajectory from {directory}: {exc}") from exc
    born = [s for s in segments if s.t_birth == 0]
    born.sort(key=lambda s: (s.x_birth, s.speed))
    cells = [left] + [s.right for s in born]
    fronts = [
        wavefront.Front(s.x_birth, s.speed, i, i + 1, s.kind, s.id) for i, s in enumerate(born)
    ]
    initial = wavefront.PiecewiseState(tuple(cells), tuple(fronts), Fraction(0))
    traj = wavefront.Trajectory(params, initial, segments, events)
    try:
        for t in checkpoints or (Fraction(0), params.T_end):
            traj.checkpoints[Fraction(t)] = wavefront.snapshot(traj, t)
    except wavefront.InternalInvariantViolation as exc:
        raise InconsistentTrajectory(str(exc), traj) from exc
    return traj


@dataclass
class Check:
    name: str
    value: object
    bound: object
    status: str  # "pass", "fail" or "info"


def front_checks(traj: wavefront.Trajectory) -> list:
    """Checks that need only the list of fronts and events."""
    checks = []
    rh_err = 0.0
    for s in traj.segments:
        if s.kind == wavefront.U_SHOCK:
            expected = riemann.rh_speed(s.left.u, s.left.w, s.right.u, s.right.w)
            rh_err = max(rh_err, abs(float(s.speed - expected)))
    checks.append(Check("rh_speed_error", rh_err, 1e-12, "pass" if rh_err <= 1e-12 else "fail"))

    counts = [sum(1 for f in traj.initial.fronts if f.kind == wavefront.U_SHOCK)]
    counts += [e.u_shocks_after for e in traj.events]
    growth = max((b - a for a, b in zip(counts, counts[1:])), default=0)
    checks.append(Check("u_front_count_growth", growth, 0, "pass" if growth <= 0 else "fail"))
    return checks


def run_checks(traj: wavefront.Trajectory, probes) -> list:
    checks = front_checks(traj)
    params = traj.params
    times = sorted(traj.checkpoints)
    states = [traj.checkpoints[t] for t in times]

    for name, tv in (("tv_u_growth", analysis.total_variation_u), ("tv_z_growth", analysis.total_variation_z)):
        vals = [tv(s) for s in states]
        g = max((b - a for a, b in zip(vals, vals[1:])), default=0)
        checks.append(Check(name, g, 0, "pass" if g <= 0 else "fail"))

    try:
        masses = [analysis.mass(s) for s in states]
        drift = max(abs(m - masses[0]) for m in masses)
        checks.append(Check("mass_drift", drift, 1e-10, "pass" if drift <= 1e-10 else "fail"))
    except analysis.UnboundedSupport as exc:
        checks.append(Check("mass_drift", "n/a", str(exc), "info"))

    var_u = analysis.total_variation_u(traj.initial)
    var_z = analysis.total_variation_z(traj.initial)
    slack_u = slack_z = math.inf
    for (t0, s0), (t1, s1) in zip(zip(times, states), zip(times[1:], states[1:])):
        du, dz = analysis.l1_components(s0, s1)
        slack_u = min(slack_u, var_u * (t1 - t0) - du)
        slack_z = min(slack_z, var_z * (t1 - t0) - dz)
    for name, slack in (("lipschitz_u_slack", slack_u), ("lipschitz_z_slack", slack_z)):
        slack = 0 if slack == math.inf else slack
        checks.append(Check(name, slack, 0, "pass" if slack >= 0 else "fail"))

    lhs = max(analysis.energy_inequality(traj, t).lhs for t in times)
    bound = max(analysis.energy_production_bound(traj, t) for t in times)
    checks.append(Check("energy_lhs_strict", lhs, 1e-9, "info"))
    checks.append(Check("energy_lhs_vs_grid_bound", lhs, bound, "pass" if lhs <= bound else "fail"))

    a = params.a
    c_tilde = 2 * (1 + 4 * a)
    floor = -c_tilde * max(params.n, 1) * params.h
    worst = min((analysis.entropy_aggregate(traj, p) for p in probes), default=0)
    checks.append(Check("entropy_aggregate_min", worst, floor, "pass" if worst >= floor else "fail"))
    return checks


def _default_probes(triangle: Triangle, traj, seed, count=4):
    rng = random.Random(seed)
    a = float(triangle.a)
    ks = [Fraction(rng.uniform(-a, a)).limit_denominator(997) for _ in range(count)]
    curves = [c.curve for c in traj.initial.cells]
    return analysis.probe_family(triangle, ks, curves)


def cmd_verify(args, cfg: RawConfig | None) -> int:
    sc = None
    if cfg is not None:
        sc = load_scenario(cfg, args.n, args.checkpoints)
    checks = None
    if args.trajectory:
        cps = sc.checkpoints if sc is not None else None
        try:
            traj = load_trajectory(Path(args.trajectory), cps)
        except InconsistentTrajectory as exc:
            checks = [Check("snapshot_consistency", str(exc), "", "fail")] + front_checks(exc.trajectory)
    elif sc is not None:
        traj = _evolve(sc)
    else:
        raise ConfigError("verify needs --config or --trajectory")
    if checks is None:
        triangle = Triangle(traj.params.a)
        probes = list(sc.probes) if sc is not None else []
        probes += _default_probes(triangle, traj, args.seed)
        checks = run_checks(traj, probes)
    _write_csv(
        Path(args.out) / "report.csv",
        ["check", "value", "bound", "status"],
        [(c.name, c.value, c.bound, c.status) for c in checks],
    )
    for c in checks:
        log.info("%-26s %-24s %-24s %s", c.name, _fmt(c.value), _fmt(c.bound), c.status)
    return EXIT_FAIL if any(c.status == "fail" for c in checks) else EXIT_OK


# --------------------------------------------------------------------------
# oracle
# --------------------------------------------------------------------------


def random_signal(rng: random.Random, a: float, max_runs: int = 12) -> PiecewiseMonotoneSignal:
    """Alternating piecewise-linear signal from 0 with at most ``max_runs`` monotone runs."""
    runs = rng.randint(1, max_runs)
    vals = [0.0]
    up = rng.random() < 0.5
    for _ in range(runs):
        cur = vals[-1]
        nxt = rng.uniform(cur, a) if up else rng.uniform(-a, cur)
        vals.append(nxt)
        up = not up
    return PiecewiseMonotoneSignal.from_values(vals)


def backend_errors(signals, triangle: Triangle, N: int):
    """Per-signal ``(|dw|, |dpsi|)`` between the relay bank and the exact geometry."""
    base = oracle.bank_init(triangle, N)
    v = virgin(triangle)
    out = []
    for sig in signals:
        bank, blog = oracle.bank_evolve(base, sig)
        curve, clog = preisach.apply_signal(v, sig)
        dw = abs(oracle.bank_w(bank) - float(preisach.output_w(curve)))
        dpsi = abs(oracle.bank_psi(blog) - float(preisach.psi_integral(clog)))
        out.append((dw, dpsi))
    return out


def cmd_oracle(args, cfg: RawConfig) -> int:
    a = _number(cfg.get("a", "1"), "a")
    triangle = Triangle(a)
    Ns = [int(x) for x in cfg.get("N", "250, 500, 1000, 2000").split(",")]
    if any(N < 2 for N in Ns):
        raise ConfigError("N must be >= 2")
    signals = [
        PiecewiseMonotoneSignal.from_values([0] + _numbers(b["values"], "signal")) for b in cfg.blocks("signal")
    ]
    if not signals:
        rng = random.Random(args.seed)
        count = int(cfg.get("signals", "20"))
        runs = int(cfg.get("runs", "12"))
        signals = [random_signal(rng, float(a), runs) for _ in range(count)]
    rows = []
    for N in Ns:
        errs = backend_errors(signals, triangle, N)
        rows.append((str(N), max(e[0] for e in errs), max(e[1] for e in errs), 8 * float(a) ** 2 / N))
    _write_csv(Path(args.out) / "oracle.csv", ["N", "max_abs_dw", "max_abs_dpsi", "w_bound"], rows)
    bad = [r for r in rows if r[1] > r[3]]
    return EXIT_FAIL if bad else EXIT_OK


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


COMMANDS = {"riemann": cmd_riemann, "cauchy": cmd_cauchy, "verify": cmd_verify, "oracle": cmd_oracle}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hystwave", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="scenario file (key = value lines and [section] blocks)")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--n", type=int, help="override the grid level")
    p.add_argument("--checkpoints", help="comma-separated checkpoint times")
    p.add_argument("--seed", type=int, default=0, help="seed for random probes and signals")
    p.add_argument("--trajectory", help="verify: directory written by 'cauchy'")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = None
        if args.config:
            try:
                cfg = parse_config(Path(args.config).read_text())
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
        elif args.command != "verify":
            cfg = RawConfig()
        return COMMANDS[args.command](args, cfg)
    except (
        ConfigError,
        riemann.IncompatibleData,
        preisach.OutOfTriangle,
        preisach.TriangleMismatch,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (wavefront.EventOverflow, wavefront.InternalInvariantViolation) as exc:
        print(f"internal guard: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
