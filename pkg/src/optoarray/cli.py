"""Command-line entry point: ``optoarray {run,list,oracle-check,check-appendix}``.

Exit codes: 0 success, 1 a check failed, 2 scenario or validation error,
3 no steady state in ``steady`` mode.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .appendix import compare_with_full_model
from .dynamics import covariance_trajectory, initial_state, stability
from .errors import OptoarrayError, ScenarioError, UnstableError, ValidationError
from .fock import integrate_oracle
from .generator import build_generator
from .scenarios import MODES, catalog, load_scenario
from .sweep import Table, format_value, run_sweep, steady_table, time_grid, time_series

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_UNSTABLE = 0, 1, 2, 3
ORACLE_SCENARIOS = ("oracle_single_full", "oracle_blue_red_reversible", "oracle_blue_red_cascaded")
ORACLE_TOLERANCE = 1e-3


def _write(table: Table, out):
    if out is None:
        table.to_csv(sys.stdout)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        table.to_csv(fh)


def _matrix_table(M):
    cols = tuple(f"c{j}" for j in range(M.shape[1]))
    return Table(cols, [tuple(row) for row in M])


def _dump_generator(gen, scenario, out):
    stem = Path(out).with_suffix("") if out else Path(scenario.name)
    for label, M in (("A", gen.A), ("D", gen.D)):
        _write(_matrix_table(M), f"{stem}_{label}.csv")


def oracle_comparison(scenario):
    """Fock-space oracle result and the Gaussian covariances on the same time grid."""
    spec = scenario.oracle
    t_grid = time_grid(spec.t_max, spec.dt_out)
    result = integrate_oracle(scenario.network, spec.truncation, t_grid)
    gen = build_generator(scenario.network)
    gauss = covariance_trajectory(gen, initial_state(scenario.network), t_grid)
    return result, gauss


def _print_oracle(scenario, result, gauss, stream):
    diff = np.abs(result.covariance - gauss).max(axis=0)
    n = diff.shape[0]
    print(f"# {scenario.name}: cutoffs {result.cutoffs}, RK4 step {result.step:.4g}, "
          f"convergence {result.convergence:.2e}, trace error {result.max_trace_error:.2e}", file=stream)
    print(f"{'moment':>10} {'max |diff|':>12}  result", file=stream)
    for i in range(n):
        for j in range(i, n):
            verdict = "pass" if diff[i, j] <= ORACLE_TOLERANCE else "FAIL"
            print(f"{f'({i},{j})':>10} {diff[i, j]:12.3e}  {verdict}", file=stream)
    return float(diff.max())


def cmd_run(args):
    scenario = load_scenario(args.scenario).with_initial(args.initial)
    mode = args.mode or scenario.run.mode
    run = scenario.run
    gen = build_generator(scenario.network)
    if args.dump_generator:
        _dump_generator(gen, scenario, args.out)
    if mode == "evolve":
        if run.t_max is None or run.dt_out is None:
            raise ScenarioError(f"{scenario.source}: run: mode 'evolve' needs 't_max' and 'dt_out'")
        _write(time_series(scenario.network, run.observables, time_grid(run.t_max, run.dt_out)), args.out)
    elif mode == "steady":
        try:
            _write(steady_table(scenario.network, run.observables), args.out)
        except UnstableError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_UNSTABLE
    elif mode == "sweep":
        if run.sweep is None:
            raise ScenarioError(f"{scenario.source}: run: mode 'sweep' needs a 'sweep' section")
        _write(run_sweep(scenario.network, run.sweep, jobs=args.jobs), args.out)
    elif mode == "stability":
        report = stability(gen)
        print(f"hurwitz={report.hurwitz} max_real_eig={format_value(report.max_real_eig)}", file=sys.stderr)
        _write(Table(("re", "im"), [(e.real, e.imag) for e in report.spectrum]), args.out)
    elif mode == "oracle-check":
        if scenario.oracle is None:
            raise ScenarioError(f"{scenario.source}: mode 'oracle-check' needs an 'oracle' section")
        result, gauss = oracle_comparison(scenario)
        worst = _print_oracle(scenario, result, gauss, sys.stdout)
        return EXIT_OK if worst <= ORACLE_TOLERANCE else EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_list(args):
    for name, _ in catalog().items():
        sc = load_scenario(name)
        kind = sc.network.coupling_kind.value if sc.network.coupling_kind else "uncoupled"
        print(f"{name:28s} {kind:11s} {sc.run.mode:13s} {sc.description}")
    return EXIT_OK


def cmd_oracle_check(args):
    worst_all = 0.0
    for name in args.scenarios or ORACLE_SCENARIOS:
        scenario = load_scenario(name)
        result, gauss = oracle_comparison(scenario)
        worst = _print_oracle(scenario, result, gauss, sys.stdout)
        print(f"{name}: max deviation {worst:.3e} -> {'PASS' if worst <= ORACLE_TOLERANCE else 'FAIL'}\n")
        worst_all = max(worst_all, worst)
    return EXIT_OK if worst_all <= ORACLE_TOLERANCE else EXIT_CHECK_FAILED


def cmd_check_appendix(args):
    print(f"{'kind':>10} {'g1':>6} {'g2':>6} {'analytic':>26} {'full model':>26} {'rel. error':>11}")
    for kind in ("reversible", "cascaded"):
        for g in args.couplings:
            try:
                c = compare_with_full_model(g, g, kind, chi12=args.chi)
            except UnstableError:
                print(f"{kind:>10} {g:6.3f} {g:6.3f} {'-':>26} {'no steady state':>26} {'-':>11}")
                continue
            print(f"{kind:>10} {g:6.3f} {g:6.3f} {c.analytic:26.6g} {c.full:26.6g} {c.relative_error:11.3e}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="optoarray", description="Entanglement in arrays of optomechanical cavities.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a bundled scenario or a scenario file")
    run.add_argument("scenario", help="bundled scenario name (see 'list') or path to a YAML file")
    run.add_argument("--mode", choices=MODES, help="override the scenario's run mode")
    run.add_argument("--out", help="CSV output path (default: stdout)")
    run.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    run.add_argument("--dump-generator", action="store_true",
                     help="also write the drift and diffusion matrices as <out>_A.csv and <out>_D.csv")
    run.add_argument("--initial", choices=("vacuum", "thermal"), help="override the initial mechanical state")
    run.set_defaults(func=cmd_run)

    lst = sub.add_parser("list", help="list bundled scenarios")
    lst.set_defaults(func=cmd_list)

    oc = sub.add_parser("oracle-check", help="compare the Gaussian engine with the Fock-space integrator")
    oc.add_argument("scenarios", nargs="*", help=f"scenarios to check (default: {', '.join(ORACLE_SCENARIOS)})")
    oc.set_defaults(func=cmd_oracle_check)

    ap = sub.add_parser("check-appendix", help="adiabatic-elimination formulas against the full steady state")
    ap.add_argument("--couplings", type=float, nargs="+", default=[0.05, 0.02, 0.01])
    ap.add_argument("--chi", type=float, default=1.0)
    ap.set_defaults(func=cmd_check_appendix)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        for code, msg in exc.errors:
            print(f"error: {code}: {msg}", file=sys.stderr)
        return EXIT_INVALID
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OptoarrayError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
