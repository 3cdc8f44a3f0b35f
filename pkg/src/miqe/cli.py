"""Command line interface: ``miqe build | sweep | optimize | certify | classify``.

Exit codes: 0 success (or certified), 1 inconclusive, 2 input error.
``MIQE_THREADS`` caps the number of worker threads used by ``optimize``.
"""

import argparse
import csv
import io as _io
import json
import math
import os
import sys

import numpy as np

from . import io
from .fock import DensityMatrix, build_state
from .qr import classify, separating_candidates
from .witness import (
    OptimizerConfig,
    certify_miqe,
    effective_lambda,
    g_mi_closed,
    g_mi_numeric,
    parse_partition,
    rotation_sweep,
)

EXIT_OK = 0
EXIT_INCONCLUSIVE = 1
EXIT_INPUT = 2


class InputError(Exception):
    pass


def _fmt(x):
    return f"{x:.9g}"


def _ket(occ):
    return "|" + ",".join(str(n) for n in occ) + ">"


def _emit(text, output):
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _two_photon_gamma(lam):
    if lam == 0:
        raise InputError("lambda must be nonzero")
    return np.array([[1, 0], [1, lam]], dtype=complex)


def _closed_bound(gamma):
    """Exact bound for two photons in two modes, or None."""
    if gamma is None or gamma.shape != (2, 2):
        return None, None
    lam = effective_lambda(gamma)
    if lam == 0 or math.isinf(lam):
        return lam, 1.0
    return lam, g_mi_closed(lam)


def _n_jobs():
    raw = os.environ.get("MIQE_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise InputError(f"MIQE_THREADS must be an integer, got {raw!r}") from exc


# --------------------------------------------------------------------------- commands


def cmd_build(args):
    gamma = io.load(args.gamma, expect="excitation_matrix")
    state = build_state(gamma)
    for occ, amp in state.amplitudes.items():
        print(f"{_ket(occ):>{3 * state.mode_count + 2}}  {amp.real: .9f} {amp.imag:+.9f}j")
    if args.output:
        io.dump(io.state_to_json(state), args.output)
    return EXIT_OK


def cmd_sweep(args):
    if (args.lam is None) == (args.gamma is None):
        raise InputError("give exactly one of --lambda or --gamma")
    if args.steps < 2:
        raise InputError("--steps must be at least 2")
    if not 0.0 <= args.theta_min < args.theta_max <= 180.0:
        raise InputError("angle range must satisfy 0 <= theta-min < theta-max <= 180")
    gamma = _two_photon_gamma(args.lam) if args.lam is not None else io.load(args.gamma, expect="excitation_matrix")
    lam, g_closed = _closed_bound(gamma)
    if args.lam is not None:
        lam = abs(args.lam)
    thetas = np.linspace(args.theta_min, args.theta_max, args.steps)
    rows = rotation_sweep(gamma, thetas)
    columns = ["theta_deg", "Lambda_20", "Lambda_02", "Lambda_11", "g_U"]
    if args.format == "json":
        payload = {
            "lambda": lam,
            "g_mi_closed": g_closed,
            "columns": columns,
            "rows": [[float(v) for v in row] for row in rows],
        }
        text = io.dumps(payload) + "\n"
    else:
        buf = _io.StringIO()
        buf.write(f"# lambda={_fmt(lam)}, g_mi_closed={_fmt(g_closed)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        text = buf.getvalue()
    _emit(text, args.output)
    return EXIT_OK


def _load_target(args):
    """``(state, gamma)``; ``gamma`` is None when a state file is given."""
    given = [x is not None for x in (args.lam, args.gamma, getattr(args, "state", None), getattr(args, "psi", None))]
    if sum(given) != 1:
        raise InputError("give exactly one target (--lambda, --gamma or a state file)")
    if args.lam is not None:
        gamma = _two_photon_gamma(args.lam)
        return build_state(gamma), gamma
    if args.gamma is not None:
        gamma = io.load(args.gamma, expect="excitation_matrix")
        return build_state(gamma), gamma
    path = args.state if getattr(args, "state", None) is not None else args.psi
    return io.load(path, expect="fock_state"), None


def cmd_optimize(args):
    state, gamma = _load_target(args)
    cfg = OptimizerConfig(grid=args.grid, n_samples=args.samples, restarts=args.restarts, tol=args.tol,
                          seed=args.seed, n_jobs=_n_jobs())
    partition = "all" if args.partition is None else parse_partition(args.partition, state.mode_count)
    candidates = separating_candidates(gamma) if gamma is not None else None
    report = g_mi_numeric(state, partition, cfg, candidates=candidates)
    out = {"report": report.to_dict()}
    lam, g_closed = _closed_bound(gamma)
    if g_closed is not None:
        out["lambda"] = lam
        out["g_mi_closed"] = g_closed
        out["discrepancy"] = abs(report.g - g_closed)
    _emit(io.dumps(out) + "\n", args.output)
    return EXIT_OK


def cmd_certify(args):
    state, gamma = _load_target(args)
    if (args.rho is None) == (args.white_noise is None):
        raise InputError("give exactly one of --rho or --white-noise")
    if args.rho is not None:
        rho = io.load(args.rho, expect="density_matrix")
    else:
        rho = DensityMatrix.white_noise(state, args.white_noise)
    g_mi = args.g_mi
    if g_mi is None:
        _, g_mi = _closed_bound(gamma)
        if g_mi is None:
            raise InputError("--g-mi is required unless the target is two photons in two modes")
    result = certify_miqe(rho, state, g_mi)
    if args.format == "json":
        print(io.dumps(result._asdict()))
    else:
        print(f"fidelity:  {result.fidelity:.9f}")
        print(f"threshold: {result.threshold:.9f}")
        print(f"verdict:   {result.verdict}")
    return EXIT_OK if result.certified else EXIT_INCONCLUSIVE


def cmd_classify(args):
    gamma = io.load(args.gamma, expect="excitation_matrix")
    verdict = classify(gamma)
    _emit(io.dumps(verdict.to_dict()) + "\n", args.output)
    return EXIT_OK


# --------------------------------------------------------------------------- parser


def _target_options(parser, state_flag):
    parser.add_argument("--lambda", dest="lam", type=complex, help="two-photon family parameter")
    parser.add_argument("--gamma", help="excitation matrix JSON file")
    parser.add_argument(state_flag, dest=state_flag.lstrip("-"), help="FockState JSON file")


def build_parser():
    parser = argparse.ArgumentParser(prog="miqe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a state from an excitation matrix")
    p.add_argument("gamma", help="excitation matrix JSON file")
    p.add_argument("--output", help="write the FockState JSON here")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("sweep", help="separable bound under real rotations of two modes")
    p.add_argument("--lambda", dest="lam", type=float, help="two-photon family parameter")
    p.add_argument("--gamma", help="2x2 excitation matrix JSON file")
    p.add_argument("--theta-min", type=float, default=0.0, help="degrees")
    p.add_argument("--theta-max", type=float, default=180.0, help="degrees")
    p.add_argument("--steps", type=int, default=721)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optimize", help="maximize the separable bound over mode unitaries")
    _target_options(p, "--state")
    p.add_argument("--partition", help='bipartition such as "0,1|2"; default: all bipartitions')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--samples", type=int, default=4096)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--format", choices=["json"], default="json")
    p.add_argument("--output")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("certify", help="fidelity test of a density matrix against g_MI")
    _target_options(p, "--psi")
    p.add_argument("--rho", help="DensityMatrix JSON file")
    p.add_argument("--white-noise", type=float, help="mix the target with white noise of this weight instead")
    p.add_argument("--g-mi", type=float, help="mode-independent bound to beat")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("classify", help="QR-based separability verdict for an excitation matrix")
    p.add_argument("gamma", help="excitation matrix JSON file")
    p.add_argument("--output")
    p.set_defaults(func=cmd_classify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"miqe {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
