"""Command-line front end.

Subcommands: classify, shrink, twirl, run, experiment1, experiment2.
Outputs are JSON records on stdout plus CSV/JSON files under --out; given
the same inputs and seed the outputs are byte-identical.  Exit codes:
0 success, 1 usage, 2 runtime/simulation, 3 I/O.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import qcore, twirl
from .experiments import (
    DEFAULT_GRAD_K,
    DEFAULT_TAU,
    run_experiment1,
    run_experiment2,
)
from .nmr import DEFAULT_NG, DEFAULT_PARAMS, TwoSpinSimulator, load_params, spectrum
from .pulseprog import PulseProgramError, parse_pulse_program
from .rotations import parse_rotation_set

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _json_dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _spectrum_csv(spec) -> str:
    lines = ["freq_hz,real,imag"]
    for f, a in zip(spec.freqs_hz, spec.amplitudes):
        lines.append(f"{float(f)!r},{float(a.real)!r},{float(a.imag)!r}")
    return "\n".join(lines) + "\n"


def _load_config(args) -> "DEFAULT_PARAMS.__class__":
    if args.config is None:
        return DEFAULT_PARAMS
    try:
        return load_params(args.config)
    except OSError as exc:
        raise OSError(f"cannot read spin-system config {args.config!r}: {exc}") from exc


def _parse_spec_or_usage(text: str):
    try:
        return parse_rotation_set(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _cmd_classify(args) -> int:
    spec = _parse_spec_or_usage(args.spec)
    report = twirl.classify(spec)
    sys.stdout.write(report.to_json() + "\n")
    if args.out:
        _write_text(Path(args.out) / "classify.json", report.to_json() + "\n")
    return EXIT_OK


def _cmd_shrink(args) -> int:
    spec = _parse_spec_or_usage(args.spec)
    values = twirl.bloch_shrink(spec)
    record = {"spec": str(spec), "bloch_shrink_singular_values": [float(v) for v in values]}
    sys.stdout.write(_json_dumps(record))
    return EXIT_OK


def _initial_state(name: str, seed: int) -> qcore.DensityMatrix:
    if name == "random":
        return qcore.random_density_matrix(4, np.random.default_rng(seed))
    if name.startswith("werner:"):
        return qcore.werner(float(name.split(":", 1)[1]))
    if name.startswith("bell:"):
        psi = qcore.bell_state(name.split(":", 1)[1])
        return qcore.DensityMatrix(np.outer(psi, psi.conj()))
    raise UsageError(f"unknown state {name!r}; expected random, werner:<eps> or bell:<kind>")


def _cmd_twirl(args) -> int:
    spec = _parse_spec_or_usage(args.spec)
    state = _initial_state(args.state, args.seed)
    out = twirl.average(state, spec, "bilateral")
    fid_in = qcore.singlet_fidelity(state)
    fid_out = qcore.singlet_fidelity(out)
    eps = qcore.is_werner(out, tol=1e-6)
    record = {
        "spec": str(spec),
        "state": args.state,
        "singlet_fidelity_in": fid_in,
        "singlet_fidelity_out": fid_out,
        "werner_epsilon": eps,
        "bell_populations_out": list(qcore.bell_diagonal_populations(out).as_array()),
        "residual_to_exact_twirl": float(np.abs(np.asarray(out) - qcore.exact_twirl_matrix(state)).max()),
    }
    sys.stdout.write(_json_dumps(record))
    return EXIT_OK


def _cmd_run(args) -> int:
    try:
        text = Path(args.program).read_text()
    except OSError as exc:
        raise OSError(f"cannot read pulse program {args.program!r}: {exc}") from exc
    seq = parse_pulse_program(text)
    params = _load_config(args)
    sim = TwoSpinSimulator(params, args.ng)
    state, fid = sim.run_program(seq)
    outdir = Path(args.out)
    decomposition = qcore.product_operator_decomposition(state.collapse())
    record = {
        "program": args.program,
        "n_members": state.n_members,
        "final_state_product_operators": decomposition,
    }
    _write_text(outdir / "final_state.json", _json_dumps(record))
    if fid is not None:
        _write_text(outdir / "spectrum.csv", _spectrum_csv(spectrum(fid, args.line_broadening)))
    sys.stdout.write(_json_dumps(record))
    return EXIT_OK


def _cmd_experiment1(args) -> int:
    params = _load_config(args)
    result = run_experiment1(params, tau=args.tau, ng=args.ng, grad_k=args.grad_k,
                             line_broadening_hz=args.line_broadening)
    outdir = Path(args.out)
    for stage in result.stages:
        _write_text(outdir / f"stage{stage.stage}_direct.csv", _spectrum_csv(stage.direct_spectrum))
        _write_text(outdir / f"stage{stage.stage}_detected.csv", _spectrum_csv(stage.detected_spectrum))
    metrics = _json_dumps(result.metrics())
    _write_text(outdir / "experiment1_metrics.json", metrics)
    sys.stdout.write(metrics)
    return EXIT_OK


def _cmd_experiment2(args) -> int:
    params = _load_config(args)
    result = run_experiment2(params, tau0=args.tau0, dtau=args.dtau, n_steps=args.steps,
                             ng=args.ng, grad_k=args.grad_k)
    outdir = Path(args.out)
    lines = ["step,tau_s,doublet_integral,formula_value"]
    for i, (tau, integral, formula) in enumerate(
        zip(result.taus, result.integrals, result.formula_values)
    ):
        lines.append(f"{i},{float(tau)!r},{float(integral)!r},{float(formula)!r}")
    _write_text(outdir / "tau_sweep.csv", "\n".join(lines) + "\n")
    metrics = _json_dumps(result.metrics())
    _write_text(outdir / "experiment2_fit.json", metrics)
    sys.stdout.write(metrics)
    return EXIT_OK


def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="spin-system key=value file (nu_i_hz, nu_s_hz, j_hz)")
    common.add_argument("--out", default="out", help="output directory (default: ./out)")
    common.add_argument("--seed", type=int, default=0, help="seed for anything random (default 0)")
    common.add_argument("--ng", type=int, default=DEFAULT_NG, help="gradient phase count (default 16)")
    common.add_argument("--grad-k", type=float, default=DEFAULT_GRAD_K,
                        help="gradient duration in units of 1/delta (default 2)")
    common.add_argument("--line-broadening", type=float, default=0.0,
                        help="exponential line broadening in Hz for written spectra")

    parser = _Parser(prog="twirlsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="classify a rotation set")
    p.add_argument("spec", help="rotation set, e.g. bennett12, cyclic:3:z, euler:mc:100000:seed=7")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("shrink", parents=[common], help="Bloch shrink singular values of a set")
    p.add_argument("spec")
    p.set_defaults(func=_cmd_shrink)

    p = sub.add_parser("twirl", parents=[common], help="apply a set bilaterally to a state")
    p.add_argument("spec")
    p.add_argument("--state", default="random", help="random, werner:<eps> or bell:<kind>")
    p.set_defaults(func=_cmd_twirl)

    p = sub.add_parser("run", parents=[common], help="run a pulse program")
    p.add_argument("program", help="pulse program file")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("experiment1", parents=[common], help="staged twirl demonstration")
    p.add_argument("--tau", type=float, default=DEFAULT_TAU, help="preparation delay in seconds")
    p.set_defaults(func=_cmd_experiment1)

    p = sub.add_parser("experiment2", parents=[common], help="delay sweep through twirled states")
    p.add_argument("--tau0", type=float, default=DEFAULT_TAU, help="first delay in seconds")
    p.add_argument("--dtau", type=float, default=None,
                   help="delay increment in seconds (default 1/(10 nu_I))")
    p.add_argument("--steps", type=int, default=30, help="number of sweep steps")
    p.set_defaults(func=_cmd_experiment2)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PulseProgramError as exc:
        print(f"pulse program error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
