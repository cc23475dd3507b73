"""Command-line front end.

Subcommands::

    saddlecert certify      --field F [--config C] [--delta D] [--out CERT]
    saddlecert flyby        --cert CERT --entry r,x_u [--side +1|-1]
    saddlecert sweep        --field TEMPLATE [--config C] --delta-list d1,d2,...
    saddlecert graphic-laps --cert CERT --entry r,x_u0 --laps N --assert-transversal

Exit codes: 0 success, 2 parse/usage, 3 not a saddle, 4 certification
failed, 5 fly-by domain violation.
"""

from __future__ import annotations

import argparse
import sys
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path

from .errors import SaddleCertError
from .fileformats import (
    CertificateFormatError,
    ConfigParseError,
    FieldParseError,
    build_diag_field,
    build_raw_field,
    certificate_from_text,
    certificate_to_text,
    parse_config_file,
    parse_field_file,
)
from .flatness import NoFlatOrder
from .flyby import (
    EntryPoint,
    LeftValidityDomain,
    StraddlesStableManifold,
    flyby,
    graphic_laps,
)
from .interval import AmbiguousInteger, DomainError, Interval, IntervalError, format_interval
from .normal_form import (
    Certificate,
    CertificationFailed,
    HeuristicConfig,
    InverseDomainViolated,
    OrderConstraintViolated,
    certify,
)
from .prep import NotAFixedPoint, NotASaddle, ResidualLinearTerms, SingularTransform, diagonalize

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NOT_A_SADDLE = 3
EXIT_CERTIFICATION = 4
EXIT_FLYBY_DOMAIN = 5

_PARSE_ERRORS = (FieldParseError, ConfigParseError, CertificateFormatError, IntervalError, OSError)
_SADDLE_ERRORS = (NotAFixedPoint, NotASaddle, SingularTransform, ResidualLinearTerms)
_CERT_ERRORS = (CertificationFailed, NoFlatOrder, OrderConstraintViolated, AmbiguousInteger)
_FLYBY_ERRORS = (DomainError, StraddlesStableManifold, LeftValidityDomain, InverseDomainViolated)


def report_lines(cert: Certificate) -> list[str]:
    """Human-readable certificate report, one fact per line."""
    fd = cert.flatness
    fmt = format_interval
    lines = []
    if fd.resonance_order is not None:
        lines.append(f"Resonance of order {fd.resonance_order} detected")
    else:
        lines.append(f"No resonance detected up to order {cert.config.iota - 1}")
    lines.append(f"l = {fd.l}, N_l = {fd.n_l}")
    lines.append(f"Order of Taylor approximations = {cert.n1}")
    lines.append(f"n_0 = {cert.n0}, n_1 = {cert.n1}")
    lines.append(f"C = {fmt(cert.C)}  M = {fmt(cert.M)}")
    lines.append(f"A = {fmt(cert.A)}")
    lines.append(f"Phi is analytic on the disk with radius = {fmt(cert.r_phi)}")
    lines.append(f"K_0 <= {fmt(cert.K0)} on the disk r_0 = {fmt(cert.r0)}")
    lines.append(f"D = {fmt(cert.D)}  K = {fmt(cert.K)}")
    lines.append(f"G is analytic on the disk with radius = {fmt(cert.r1)}")
    lines.append(f"kappa <= {fmt(cert.kappa)} on the disk r_2 = {fmt(cert.r2)}")
    lines.append("We recommend that you change to the normal form")
    lines.append(f"on the disk with radius r_3 = {fmt(cert.r3)}")
    return lines


def _load_field(path: str, delta: str | None):
    ff = parse_field_file(Path(path).read_text())
    frac = Fraction(Decimal(delta)) if delta is not None else None
    if ff.diagonal:
        return build_diag_field(ff, frac)
    return diagonalize(build_raw_field(ff, frac))


def _load_config(path: str | None) -> HeuristicConfig:
    if path is None:
        return HeuristicConfig()
    return parse_config_file(Path(path).read_text())


def _parse_entry(entry: str) -> tuple[Interval, Interval]:
    try:
        r_str, xu_str = entry.split(",")
        return Interval.from_decimal(r_str), Interval.from_decimal(xu_str)
    except (ValueError, InvalidOperation) as exc:
        raise FieldParseError(f"--entry expects 'r,x_u' decimals, got {entry!r}") from exc


def cmd_certify(args: argparse.Namespace) -> int:
    field = _load_field(args.field, args.delta)
    cfg = _load_config(args.config)
    cert = certify(field, cfg)
    for line in report_lines(cert):
        print(line)
    out = Path(args.out) if args.out else Path(args.field).with_suffix(".cert")
    out.write_text(certificate_to_text(cert))
    print(f"certificate written to {out}")
    return EXIT_OK


def cmd_flyby(args: argparse.Namespace) -> int:
    cert = certificate_from_text(Path(args.cert).read_text())
    r, x_u = _parse_entry(args.entry)
    point = EntryPoint.on_face(r, x_u, side=args.side)
    result = flyby(cert, point)
    print(f"exit side: {'+' if result.exit_side > 0 else '-'}u")
    print(f"x_s at exit: {format_interval(result.x_s_exit, sig=8)}")
    print(f"x_u at exit: {format_interval(result.x_u_exit, sig=8)}")
    print(f"passage time: {format_interval(result.time, sig=8)}")
    print(f"effective radius R: {format_interval(result.effective_radius, sig=8)}")
    print("audit:")
    for entry in result.audit:
        print(f"  - {entry}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    ff = parse_field_file(Path(args.field).read_text())
    cfg = _load_config(args.config)
    deltas = [d for d in (args.delta_list or "").split(",") if d.strip()]
    print(f"{'delta':>12}  {'r_phi':>24}  {'r_1':>24}  {'r_3':>24}  {'K_0':>24}  {'kappa':>26}")
    rows = []
    for d in deltas:
        frac = Fraction(Decimal(d))
        if ff.diagonal:
            field = build_diag_field(ff, frac)
        else:
            field = diagonalize(build_raw_field(ff, frac))
        try:
            cert = certify(field, cfg)
        except (SaddleCertError,) as exc:
            print(f"{d:>12}  FAILED: {exc}")
            rows.append((d, None))
            continue
        print(
            f"{d:>12}  {format_interval(cert.r_phi, 5):>24}  {format_interval(cert.r1, 5):>24}"
            f"  {format_interval(cert.r3, 5):>24}  {format_interval(cert.K0, 5):>24}"
            f"  {format_interval(cert.kappa, 5):>26}"
        )
        rows.append((d, cert))
        if args.out:
            stem = Path(args.out)
            stem.mkdir(parents=True, exist_ok=True)
            (stem / f"delta_{d}.cert").write_text(certificate_to_text(cert))
    return EXIT_OK


def cmd_graphic_laps(args: argparse.Namespace) -> int:
    if not args.assert_transversal:
        print(
            "graphic-laps feeds each exit bound into the next entry; that step is only\n"
            "valid for systems whose field is transversal to the relevant level curves\n"
            "(a system-specific argument).  Re-run with --assert-transversal to confirm.",
            file=sys.stderr,
        )
        return EXIT_PARSE
    cert = certificate_from_text(Path(args.cert).read_text())
    r, x_u0 = _parse_entry(args.entry)
    rows = graphic_laps(cert, r, x_u0, args.laps, passes_per_lap=args.passes_per_lap)
    print(f"{'lap':>4}  {'x_u (upper bound)':>20}  {'laptime (lower bound)':>22}")
    for lap, x, t in rows:
        print(f"{lap:>4}  {x:>20.6e}  {t:>22.4f}")
    if len(rows) <= args.laps and len(rows) > 0 and rows[-1][0] < args.laps:
        print(f"stopped after lap {rows[-1][0]}: next passage could not be certified")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saddlecert",
        description="Normal-form certificates and rigorous fly-by enclosures for planar saddles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_cert = sub.add_parser("certify", help="certify a field and write the certificate")
    p_cert.add_argument("--field", required=True, help="field file")
    p_cert.add_argument("--config", help="run configuration file")
    p_cert.add_argument("--delta", help="value for a field template's delta parameter")
    p_cert.add_argument("--out", help="certificate output path (default: field stem + .cert)")
    p_cert.set_defaults(func=cmd_certify)

    p_fly = sub.add_parser("flyby", help="enclose one passage of the saddle box")
    p_fly.add_argument("--cert", required=True, help="certificate file")
    p_fly.add_argument("--entry", required=True, help="entry 'r,x_u' (decimals)")
    p_fly.add_argument("--side", type=int, default=1, choices=(1, -1), help="sign of x_s at entry")
    p_fly.set_defaults(func=cmd_flyby)

    p_sweep = sub.add_parser("sweep", help="certify a field template over a list of delta values")
    p_sweep.add_argument("--field", required=True, help="field template file")
    p_sweep.add_argument("--config", help="run configuration file")
    p_sweep.add_argument("--delta-list", required=True, help="comma-separated decimal deltas")
    p_sweep.add_argument("--out", help="directory for per-delta certificates")
    p_sweep.set_defaults(func=cmd_sweep)

    p_laps = sub.add_parser("graphic-laps", help="iterate fly-bys around a graphic of saddles")
    p_laps.add_argument("--cert", required=True, help="certificate file")
    p_laps.add_argument("--entry", required=True, help="start 'r,x_u0' (decimals)")
    p_laps.add_argument("--laps", type=int, required=True, help="number of laps")
    p_laps.add_argument("--passes-per-lap", type=int, default=4, help="saddles per lap")
    p_laps.add_argument(
        "--assert-transversal",
        action="store_true",
        help="assert the system-specific transversality/symmetry argument",
    )
    p_laps.set_defaults(func=cmd_graphic_laps)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _PARSE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except _SADDLE_ERRORS as exc:
        print(f"not a usable saddle: {exc}", file=sys.stderr)
        return EXIT_NOT_A_SADDLE
    except _CERT_ERRORS as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATION
    except _FLYBY_ERRORS as exc:
        print(f"fly-by domain violation: {exc}", file=sys.stderr)
        return EXIT_FLYBY_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
