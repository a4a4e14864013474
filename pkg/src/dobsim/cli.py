"""Command-line interface.

Subcommands: sim, table2, sweep, design, robust.  Every report lands in
the output directory as CSV data plus a rendered SVG figure.  Exit codes:
0 success, 1 usage/configuration error, 2 robustness check failed,
3 simulation divergence.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import report as rpt
from .config import ConfigError, load_scenario
from .controllers import PDGains, QFilter, dob_transfers, pd_tf, q_tf
from .dstability import DRegion, feasible_map
from .lti import DivergenceError, feedback, tf_eval
from .robustness import (
    cdob_small_gain,
    default_omega_grid,
    delta_m_envelope,
    dob_small_gain,
)
from .scenarios import compare_vertices, export, run_scenario
from .vehicle import UncertaintyBox, nominal_tf, plant_tf, vertices

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ROBUSTNESS = 2
EXIT_DIVERGENCE = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage by default; this tool reserves 2 for
    # failed robustness checks.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser():
    parser = _Parser(
        prog="dobsim",
        description="Observer-based path-following control: simulation, "
        "design and robustness checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_sim = sub.add_parser("sim", help="run one closed-loop scenario")
    p_sim.add_argument("--config", help="INI scenario file (defaults otherwise)")
    p_sim.add_argument("--arch", help="override loop architecture")
    p_sim.add_argument("--delay", type=float, help="override delay [s]")
    p_sim.add_argument("--out", default="out", help="output directory")

    p_tab = sub.add_parser("table2", help="PD vs PD_DOB across the box vertices")
    p_tab.add_argument("--config", help="INI scenario file for the base scenario")
    p_tab.add_argument("--out", default="out", help="output directory")

    p_swp = sub.add_parser("sweep", help="frequency-response datasets")
    p_swp.add_argument("--points", type=int, default=400)
    p_swp.add_argument("--omega-min", type=float, default=1e-2)
    p_swp.add_argument("--omega-max", type=float, default=1e4)
    p_swp.add_argument("--out", default="out", help="output directory")

    p_des = sub.add_parser("design", help="PD gain-region feasibility map")
    p_des.add_argument("--kp-max", type=float, default=3.0)
    p_des.add_argument("--kd-max", type=float, default=3.0)
    p_des.add_argument("--resolution", type=float, default=0.02)
    p_des.add_argument("--sigma", type=float, default=0.3)
    p_des.add_argument("--theta", type=float, default=135.0)
    p_des.add_argument("--radius", type=float, default=1.3)
    p_des.add_argument("--out", default="out", help="output directory")

    p_rob = sub.add_parser("robust", help="small-gain robustness checks")
    p_rob.add_argument(
        "--check", choices=("dob", "cdob", "both"), default="both"
    )
    p_rob.add_argument("--wc-dob", type=float, default=5.0)
    p_rob.add_argument("--wc-cdob", type=float, default=200.0)
    p_rob.add_argument("--delay", type=float, default=0.08)
    p_rob.add_argument("--kp", type=float, default=1.0596)
    p_rob.add_argument("--kd", type=float, default=0.939)
    p_rob.add_argument(
        "--tau-d",
        type=float,
        default=0.125,
        help="derivative filter used for the realizable controller in the "
        "delay check",
    )
    p_rob.add_argument("--points", type=int, default=400)
    p_rob.add_argument("--omega-min", type=float, default=1e-2)
    p_rob.add_argument("--omega-max", type=float, default=1e4)
    p_rob.add_argument("--out", default="out", help="output directory")
    return parser


def _outdir(args):
    path = Path(args.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_csv(path, header, columns):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _cmd_sim(args):
    scenario = load_scenario(args.config)
    if args.arch is not None or args.delay is not None:
        from dataclasses import replace

        loop = scenario.loop
        if args.arch is not None:
            loop = replace(loop, architecture=args.arch)
        if args.delay is not None:
            loop = replace(loop, delay=args.delay)
        scenario = replace(scenario, loop=loop)
    out = _outdir(args)
    trace, metrics = run_scenario(scenario)
    export(trace, "csv", out / "trace.csv")
    export(trace, "svg", out / "trace.svg")
    print(
        f"architecture={scenario.loop.architecture} delay={scenario.loop.delay:g}s "
        f"duration={scenario.duration:g}s"
    )
    print(
        f"rms_y={metrics.rms_y:.6g} m  peak_y={metrics.peak_y:.6g} m  "
        f"rms_steer={metrics.rms_steer:.6g} rad  ise_y={metrics.ise_y:.6g} m^2 s"
    )
    print(f"wrote {out / 'trace.csv'} and {out / 'trace.svg'}")
    return EXIT_OK


def _cmd_table2(args):
    base = load_scenario(args.config)
    out = _outdir(args)
    table = compare_vertices(base)
    export(table, "csv", out / "table2.csv")
    export(table, "svg", out / "table2.svg")
    print("RMS tracking error by vertex (delay forced to 0):")
    for label, base_rms, obs_rms, red in table.rows():
        print(
            f"  {label:22s} {table.architectures[0]}={base_rms:.4f}  "
            f"{table.architectures[1]}={obs_rms:.4f}  reduction={red:.1f}%"
        )
    print(f"wrote {out / 'table2.csv'} and {out / 'table2.svg'}")
    return EXIT_OK


def _cmd_sweep(args):
    out = _outdir(args)
    omega = default_omega_grid(args.points, args.omega_min, args.omega_max)
    gn = nominal_tf()
    box = UncertaintyBox()
    c = pd_tf(PDGains())

    # Observer-bandwidth check data: |Q|, parametric envelope, design envelope
    env_param = delta_m_envelope(box, omega)
    env_design = delta_m_envelope(box, omega, reference=gn)
    q5 = q_tf(QFilter(5.0))
    qmag = np.abs(tf_eval(q5, 1j * omega))
    _write_csv(
        out / "dob_bound.csv",
        ("omega", "q_mag", "envelope_design_ref", "envelope_parametric_ref"),
        (omega, qmag, env_design.magnitude, env_param.magnitude),
    )
    rep = dob_small_gain(q5, env_design)
    rpt.save_margin_figure(
        rep, out / "dob_bound.svg", test_label="|Q|", title="model-spread bound"
    )

    # Delay-compensation check data (realizable controller)
    c_filt = pd_tf(PDGains(), filtered=True)
    rep_c = cdob_small_gain(c_filt, gn, QFilter(200.0), 0.08, omega)
    _write_csv(
        out / "cdob_bound.csv",
        ("omega", "test_value", "bound"),
        (omega, rep_c.test_values, rep_c.bounds),
    )
    rpt.save_margin_figure(
        rep_c, out / "cdob_bound.svg", test_label="|Ln/(1+Ln)|",
        title="delay-uncertainty bound",
    )

    # Closed-loop |y/r| across the vertices, with and without the observer
    responses_pd = {}
    responses_dob = {}
    sub = omega[omega <= 1e2]
    for name, v in zip(("a", "b", "c", "d"), vertices(box)):
        g = plant_tf(v)
        label = f"vertex {name}"
        responses_pd[label] = tf_eval(feedback(c * g), 1j * sub)
        reg, _ = dob_transfers(g, gn, QFilter(5.0))
        responses_dob[label] = tf_eval(feedback(c * reg), 1j * sub)
    _write_csv(
        out / "vertex_response.csv",
        ("omega",)
        + tuple(f"pd_{k}" for k in "abcd")
        + tuple(f"dob_{k}" for k in "abcd"),
        (sub,)
        + tuple(np.abs(v) for v in responses_pd.values())
        + tuple(np.abs(v) for v in responses_dob.values()),
    )
    rpt.save_vertex_response_figure(
        sub, responses_pd, out / "vertex_response_pd.svg", title="baseline PD"
    )
    rpt.save_vertex_response_figure(
        sub, responses_dob, out / "vertex_response_dob.svg",
        title="with disturbance observer",
    )
    print(f"wrote sweep datasets and figures to {out}")
    return EXIT_OK


def _cmd_design(args):
    out = _outdir(args)
    region = DRegion(sigma=args.sigma, theta_deg=args.theta, radius=args.radius)
    res = args.resolution
    kp = np.arange(0.0, args.kp_max + res / 2, res)
    kd = np.arange(0.0, args.kd_max + res / 2, res)
    grid = feasible_map(nominal_tf(), kp, kd, region)
    with open(out / "design_grid.csv", "w") as fh:
        fh.write("kp,kd,feasible,dominant_re,dominant_im\n")
        for kp_v, kd_v, ok, dre, dim in grid.rows():
            fh.write(f"{kp_v!r},{kd_v!r},{int(ok)},{dre!r},{dim!r}\n")
    selected = (1.0596, 0.939)
    rpt.save_design_figure(grid, out / "design_region.svg", selected=selected)
    n_feas = int(grid.feasible.sum())
    print(
        f"feasible cells: {n_feas}/{grid.feasible.size}  "
        f"selected gains kp={selected[0]}, kd={selected[1]}: "
        f"{'feasible' if grid.is_feasible_at(*selected) else 'INFEASIBLE'}"
    )
    print(f"wrote {out / 'design_grid.csv'} and {out / 'design_region.svg'}")
    return EXIT_OK


def _cmd_robust(args):
    out = _outdir(args)
    omega = default_omega_grid(args.points, args.omega_min, args.omega_max)
    gn = nominal_tf()
    failed = False

    if args.check in ("dob", "both"):
        env = delta_m_envelope(UncertaintyBox(), omega, reference=gn)
        rep = dob_small_gain(QFilter(args.wc_dob), env)
        _write_csv(
            out / "dob_check.csv",
            ("omega", "test_value", "bound", "margin_db"),
            (
                omega,
                rep.test_values,
                rep.bounds,
                20 * np.log10(rep.bounds) - 20 * np.log10(rep.test_values),
            ),
        )
        rpt.save_margin_figure(
            rep, out / "dob_check.svg", test_label="|Q|",
            title=f"observer bandwidth check (wc={args.wc_dob:g})",
        )
        margin = f"{rep.margin_db:.3f} dB" if np.isfinite(rep.margin_db) else "inf"
        print(
            f"dob check (wc={args.wc_dob:g}): "
            f"{'PASS' if rep.passed else 'FAIL'}  margin={margin} "
            f"at omega={rep.critical_omega:g}"
        )
        failed |= not rep.passed

    if args.check in ("cdob", "both"):
        c = pd_tf(PDGains(kp=args.kp, kd=args.kd, tau_d=args.tau_d), filtered=True)
        rep = cdob_small_gain(c, gn, QFilter(args.wc_cdob), args.delay, omega)
        _write_csv(
            out / "cdob_check.csv",
            ("omega", "test_value", "bound", "margin_db"),
            (
                omega,
                rep.test_values,
                rep.bounds,
                20 * np.log10(rep.bounds) - 20 * np.log10(rep.test_values),
            ),
        )
        rpt.save_margin_figure(
            rep, out / "cdob_check.svg", test_label="|Ln/(1+Ln)|",
            title=f"delay compensation check (wc={args.wc_cdob:g}, T={args.delay:g})",
        )
        margin = f"{rep.margin_db:.3f} dB" if np.isfinite(rep.margin_db) else "inf"
        note = f"  [{rep.note}]" if rep.note else ""
        print(
            f"cdob check (wc={args.wc_cdob:g}, T={args.delay:g}): "
            f"{'PASS' if rep.passed else 'FAIL'}  margin={margin}{note}"
        )
        failed |= not rep.passed

    print(f"wrote check data and figures to {out}")
    return EXIT_ROBUSTNESS if failed else EXIT_OK


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "sim": _cmd_sim,
        "table2": _cmd_table2,
        "sweep": _cmd_sweep,
        "design": _cmd_design,
        "robust": _cmd_robust,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"error: simulation diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE


if __name__ == "__main__":
    sys.exit(main())
