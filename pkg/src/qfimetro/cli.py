"""Command-line front end.

Exit codes: 0 success, 1 selftest failure, 2 bad flags, 3 I/O failure,
4 malformed state file, 5 state validation failure, 6 zero information.
"""
import argparse
import csv
import io
import math
import sys
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import correlations, metrology, qfi, qstate
from .errors import InvalidState, StateFileError, ZeroInformation

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_FLAGS = 2
EXIT_IO = 3
EXIT_PARSE = 4
EXIT_VALIDATION = 5
EXIT_ZERO_INFO = 6

EPILOG = """\
exit codes:
  0  success
  1  selftest check failed
  2  bad flags
  3  I/O failure
  4  malformed state file
  5  state validation failure
  6  zero Fisher information (useless probe)

environment:
  QFI_TOL_OVERRIDE  multiplier for state-validation tolerances (default 1)
"""


class CLIError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(header: Sequence[str], rows, out: Optional[str]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CLIError(f"cannot write {out}: {exc}", EXIT_IO) from exc


# ---------------------------------------------------------------------------
# commands

def werner_sweep_rows(p_min: float, p_max: float, steps: int, bell: str = "psi+") -> List[Tuple[float, ...]]:
    rows = []
    for p in np.linspace(p_min, p_max, steps):
        rho = qstate.make_werner(float(p), bell)
        rows.append((
            p,
            correlations.q_measure(rho).value,
            correlations.hs_discord(rho),
            correlations.hellinger_discord(rho),
            correlations.p_measure(rho).value,
        ))
    return rows


def cmd_werner_sweep(p_min: float, p_max: float, steps: int, bell: str, out: Optional[str]) -> None:
    rows = werner_sweep_rows(p_min, p_max, steps, bell)
    _write_csv(["p", "q2", "d_hs2", "d_h2", "p2"], rows, out)


def surface_rows(p: float, theta_steps: int, phi_steps: int, bell: str = "psi+") -> np.ndarray:
    """Rows ``(θ, φ, gQFI, lQFI, C)`` for ``H_a = H_b = r(θ, φ)·σ`` on a Werner state.

    The state's spectral Gram matrix over the six local Paulis is computed
    once; every grid point is then a 6-vector quadratic form.
    """
    rho = qstate.make_werner(p, bell)
    eye = np.eye(2)
    ops = [np.kron(qstate.pauli(a), eye) for a in "xyz"] + [np.kron(eye, qstate.pauli(a)) for a in "xyz"]
    g = qfi.gram(qfi.spectrum(rho), ops)
    thetas = np.linspace(0.0, math.pi, theta_steps)
    phis = np.linspace(0.0, 2 * math.pi, phi_steps)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    r = np.stack([np.cos(tt), np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp)], axis=-1).reshape(-1, 3)
    lqfi = np.einsum("ki,ij,kj->k", r, g[:3, :3], r)
    inter = np.einsum("ki,ij,kj->k", r, g[:3, 3:], r)
    rr = np.concatenate([r, r], axis=1)
    gqfi = np.clip(np.einsum("ki,ij,kj->k", rr, g, rr), 0.0, None)
    return np.column_stack([tt.ravel(), pp.ravel(), gqfi, lqfi, inter])


def cmd_surface(p: float, theta_steps: int, phi_steps: int, out: Optional[str], bell: str = "psi+") -> None:
    rows = surface_rows(p, theta_steps, phi_steps, bell)
    _write_csv(["theta", "phi", "gqfi", "lqfi", "interference"], rows, out)


def load_state(path: str) -> qstate.DensityMatrix:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc}", EXIT_IO) from exc
    try:
        return qstate.loads_qst(text)
    except StateFileError as exc:
        raise CLIError(f"malformed state file {path}: {exc}", EXIT_PARSE) from exc
    except InvalidState as exc:
        raise CLIError(f"validation failed ({exc.invariant}): {exc}", EXIT_VALIDATION) from exc


def _interval(iv: metrology.PrecisionInterval) -> str:
    return f"[{iv.lower_bound_error:.6g}, {iv.upper_bound_error:.6g}] ({iv.provenance.value})"


def _vec(v) -> str:
    return "(" + ", ".join(f"{x:.6g}" for x in v) + ")"


def analyze_report(rho: qstate.DensityMatrix, label: str = "") -> str:
    lines = []
    if label:
        lines.append(f"state: {label}")
    lines.append("dims: " + " ".join(str(d) for d in rho.dims))
    lines.append(f"renormalized on load: {'yes' if rho.renormalized else 'no'}")
    bip = rho.bipartition() if len(rho.dims) > 1 else None
    if bip is None:
        lines.append("measures: unavailable (single-party state)")
        return "\n".join(lines) + "\n"
    cq = correlations.classicality_check(bip)
    if bip.dims[0] == 2:
        rep = correlations.correlation_report(bip)
        lines += [
            f"Q2 = {rep.q_squared:.12g}",
            f"P2 = {rep.p_squared:.12g}",
            f"D_HS2 = {rep.d_hs_squared:.12g}",
            f"D_H2 = {rep.d_h_squared:.12g}",
            f"minimizing direction = {_vec(rep.minimizing_bloch)}",
            f"maximizing direction = {_vec(rep.maximizing_bloch)}",
        ]
    else:
        lines.append("measures: unavailable (party A is not a qubit)")
    verdict = "classical-quantum" if cq else "quantum-correlated"
    lines.append(f"verdict: {verdict} (tol {correlations.CLASSICALITY_TOL:g})")
    if bip.dims[0] == 2:
        try:
            lines.append("interval " + _interval(metrology.precision_interval_local(bip)))
        except ZeroInformation:
            lines.append("interval local: undefined (zero information)")
    if tuple(rho.dims) == (2, 2):
        try:
            lines.append("interval " + _interval(metrology.precision_interval_global(rho)))
        except ZeroInformation:
            lines.append("interval global: undefined (zero information)")
    return "\n".join(lines) + "\n"


def cmd_analyze(state_path: str) -> str:
    report = analyze_report(load_state(state_path), state_path)
    sys.stdout.write(report)
    return report


def mc_report(rho: qstate.DensityMatrix, theta: float, shots: int, runs: int, seed: int,
              axis: str = "z", site: int = 0) -> str:
    h = qstate.embed_local(qstate.pauli(axis), site, rho.dims)
    run = metrology.mc_estimate(rho, h, theta, shots, runs, seed)
    lines = [
        f"hamiltonian: sigma_{axis} on site {site}",
        f"theta_true = {fmt(run.theta_true)}",
        f"shots_per_run = {run.n_shots}",
        f"runs = {run.runs}",
        f"seed = {seed}",
        f"fisher F2 = {fmt(run.fisher)}",
        f"mean estimate = {fmt(np.mean(run.estimates))}",
        f"empirical_std = {fmt(run.empirical_std)}",
        f"std_error = {fmt(run.std_error)}",
        f"qcr_floor = {fmt(run.qcr_floor)}",
        f"std/floor = {fmt(run.ratio)}",
        f"sld_floor = {fmt(run.sld_floor)}",
        f"degenerate_runs = {run.degenerate_runs}",
    ]
    return "\n".join(lines) + "\n"


def cmd_mc(state_path: str, theta: float, shots: int, runs: int, seed: int,
           axis: str = "z", site: int = 0) -> str:
    rho = load_state(state_path)
    if not 0 <= site < len(rho.dims) or rho.dims[site] != 2:
        raise CLIError(f"site {site} is not a qubit of dims {rho.dims}", EXIT_FLAGS)
    try:
        report = mc_report(rho, theta, shots, runs, seed, axis, site)
    except ZeroInformation as exc:
        raise CLIError(f"zero information: {exc}", EXIT_ZERO_INFO) from exc
    sys.stdout.write(report)
    return report


# ---------------------------------------------------------------------------
# selftest

def golden_checks() -> List[Tuple[str, Callable[[], float], float, float]]:
    """``(name, compute, expected, tolerance)`` for the reference values."""
    w = qstate.make_werner(0.25)
    w_half = qstate.make_werner(0.5)
    singlet = qstate.make_werner(0.25, "phi-")
    sz_a = qstate.embed_local(qstate.pauli("z"), 0, (2, 2))

    def gqfi(rho, theta, phi):
        h = qstate.bloch_hamiltonian(theta, phi)
        return qfi.qfi_spectral(rho, np.kron(h, np.eye(2)) + np.kron(np.eye(2), h))

    def inter(theta, phi):
        h = qstate.bloch_hamiltonian(theta, phi)
        return qfi.interference_term(w, np.kron(h, np.eye(2)), np.kron(np.eye(2), h))

    def ghz_ratio():
        g = qstate.make_ghz(3)
        return qfi.gqfi_collective(g, qstate.pauli("z")) / qfi.local_qfi(g, qstate.pauli("z"))

    def speed_gap():
        s = qfi.speed_consistency(w, sz_a, 1e-4)
        return s.lhs - s.rhs

    return [
        ("Werner p=1/4 Q2", lambda: correlations.q_measure(w).value, 0.1, 1e-9),
        ("Werner p=1/4 P2", lambda: correlations.p_measure(w).value, 0.1, 1e-9),
        ("Werner p=1/4 lQFI sigma_z", lambda: qfi.qfi_spectral(w, sz_a), 0.1, 1e-9),
        ("Werner p=1/4 SLD QFI", lambda: qfi.qfi_via_sld(w, sz_a), 0.1, 1e-9),
        ("gQFI theta=0 phi=0", lambda: gqfi(w, 0.0, 0.0), 0.4, 1e-9),
        ("gQFI theta=pi/2 phi=0", lambda: gqfi(w, math.pi / 2, 0.0), 0.0, 1e-9),
        ("interference theta=0 phi=0", lambda: inter(0.0, 0.0), 0.1, 1e-9),
        ("singlet gQFI", lambda: gqfi(singlet, 0.7, 1.3), 0.0, 1e-9),
        ("Werner p=1/2 Q2 = 2p^2/(1+p)", lambda: correlations.q_measure(w_half).value, 1 / 3, 1e-9),
        ("Werner p=1/2 D_HS2", lambda: correlations.hs_discord(w_half), 0.25, 1e-9),
        ("Werner p=1/2 D_H2", lambda: correlations.hellinger_discord(w_half), (3 - math.sqrt(5)) / 4, 1e-9),
        ("GHZ3 collective/local QFI", ghz_ratio, 9.0, 1e-6),
        ("CQ state Q2", lambda: correlations.q_measure(qstate.random_cq_state(2, 3, 2, 11)).value, 0.0, 1e-9),
        ("CQ classicality verdict", lambda: float(correlations.classicality_check(qstate.random_cq_state(2, 3, 2, 11))), 1.0, 0.0),
        ("qCR bound Werner p=1/4", lambda: metrology.qcr_bound(w, sz_a), 1 / math.sqrt(0.1), 1e-9),
        ("local interval Werner p=1/4", lambda: metrology.precision_interval_local(w).upper_bound_error, 1 / math.sqrt(0.1), 1e-9),
        ("global lower end Werner p=1/4", lambda: metrology.precision_interval_global(w).lower_bound_error, 1 / (2 * math.sqrt(0.1)), 1e-9),
        ("Bures speed vs F", speed_gap, 0.0, 1e-3 * math.sqrt(0.1)),
    ]


def cmd_selftest(stream=None) -> int:
    stream = stream or sys.stdout
    first_failure = None
    for name, compute, expected, tol in golden_checks():
        try:
            value = compute()
            ok = abs(value - expected) <= tol
            detail = f"{value:.12g} (expected {expected:.12g} +/- {tol:g})"
        except Exception as exc:  # a crash is a failed check
            ok = False
            detail = f"raised {type(exc).__name__}: {exc}"
        stream.write(f"{'PASS' if ok else 'FAIL'} {name}: {detail}\n")
        if not ok and first_failure is None:
            first_failure = name
    if first_failure is not None:
        stream.write(f"first failing check: {first_failure}\n")
        return EXIT_SELFTEST
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfimetro",
        description="Quantum Fisher information, QFI-based correlation measures and precision bounds.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("werner-sweep", help="correlation measures along the Werner family (CSV)")
    p.add_argument("--p-min", type=float, default=0.0)
    p.add_argument("--p-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--bell", choices=qstate.BELL_LABELS, default="psi+")
    p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")

    p = sub.add_parser("surface", help="gQFI / lQFI / interference over (theta, phi) (CSV)")
    p.add_argument("--p", type=float, default=0.25)
    p.add_argument("--theta-steps", type=int, default=181)
    p.add_argument("--phi-steps", type=int, default=361)
    p.add_argument("--bell", choices=qstate.BELL_LABELS, default="psi+")
    p.add_argument("--out", default="-")

    p = sub.add_parser("analyze", help="report measures and precision intervals of a .qst state")
    p.add_argument("file")

    p = sub.add_parser("mc", help="Monte Carlo phase estimation on a .qst state")
    p.add_argument("file")
    p.add_argument("--theta", type=float, default=0.3)
    p.add_argument("--shots", type=int, default=10000)
    p.add_argument("--runs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--axis", choices=("x", "y", "z"), default="z")
    p.add_argument("--site", type=int, default=0)

    sub.add_parser("selftest", help="check reference values end to end")
    return parser


def _validate(parser: argparse.ArgumentParser, args) -> None:
    if args.command == "werner-sweep":
        if not 0.0 <= args.p_min <= args.p_max <= 1.0:
            parser.error("need 0 <= --p-min <= --p-max <= 1")
        if args.steps < 2:
            parser.error("--steps must be at least 2")
    elif args.command == "surface":
        if not 0.0 <= args.p <= 1.0:
            parser.error("--p must lie in [0, 1]")
        if args.theta_steps < 2 or args.phi_steps < 2:
            parser.error("--theta-steps and --phi-steps must be at least 2")
    elif args.command == "mc":
        if args.shots < 1 or args.runs < 2:
            parser.error("need --shots >= 1 and --runs >= 2")
        if not -math.pi / 2 < args.theta < math.pi / 2:
            parser.error("--theta must lie in (-pi/2, pi/2)")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    try:
        qstate.tolerance_scale()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FLAGS
    try:
        if args.command == "werner-sweep":
            cmd_werner_sweep(args.p_min, args.p_max, args.steps, args.bell, args.out)
        elif args.command == "surface":
            cmd_surface(args.p, args.theta_steps, args.phi_steps, args.out, args.bell)
        elif args.command == "analyze":
            cmd_analyze(args.file)
        elif args.command == "mc":
            cmd_mc(args.file, args.theta, args.shots, args.runs, args.seed, args.axis, args.site)
        elif args.command == "selftest":
            return cmd_selftest()
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
