"""Plain-text file formats: field files, run configs, certificates.

Field and config files carry decimal strings only (optionally ``A/B``
rationals), so every coefficient enters as an exact enclosure on any
platform.  Field templates may scale a term by an integer power of a sweep
parameter ``delta``; substitution happens in exact rational arithmetic.

Serialized certificates store interval endpoints as shortest round-trip
decimal reprs of the binary endpoints and are reloaded bit-exactly through
``float()`` (they describe computed binary intervals, not decimal data).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Mapping, TextIO

from .errors import SaddleCertError
from .flatness import FlatnessData
from .interval import Interval
from .normal_form import Certificate, GeometricFit, HeuristicConfig
from .prep import DiagField, RawField
from .series import MajorantSeries1, TruncatedSeries2


class FieldParseError(SaddleCertError):
    pass


class ConfigParseError(SaddleCertError):
    pass


class CertificateFormatError(SaddleCertError):
    pass


@dataclass(frozen=True)
class FieldTerm:
    ms: int
    mu: int
    c1: str  # decimal or decimal/decimal literal, component 1
    c2: str
    delta_power1: int = 0
    delta_power2: int = 0


@dataclass(frozen=True)
class FieldFile:
    """Parsed field file: exact decimal data, not yet interval-ified."""

    fixed_point: tuple[str, str]
    terms: tuple[FieldTerm, ...]
    diagonal: bool = False
    lambda_s: str | None = None
    lambda_u: str | None = None

    def needs_delta(self) -> bool:
        return any(t.delta_power1 != 0 or t.delta_power2 != 0 for t in self.terms)


def _clean_lines(text: str) -> list[list[str]]:
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    return rows


def parse_field_file(text: str) -> FieldFile:
    fixed_point = None
    diagonal = False
    lam_s = lam_u = None
    terms: list[FieldTerm] = []
    seen: set[tuple[int, int]] = set()
    for row in _clean_lines(text):
        key = row[0]
        if key == "fixed_point":
            if len(row) != 3:
                raise FieldParseError("fixed_point takes two decimal values")
            fixed_point = (row[1], row[2])
        elif key == "diagonal":
            diagonal = row[1].lower() in ("true", "1", "yes")
        elif key == "lambda_s":
            lam_s = row[1]
        elif key == "lambda_u":
            lam_u = row[1]
        elif key == "term":
            # term ms mu c1 c2 [p] | term ms mu c1 c2 p1 p2
            # The optional trailing integers scale the coefficients by
            # delta^p (one power for both components, or one per component).
            if len(row) not in (5, 6, 7):
                raise FieldParseError(f"bad term line: {' '.join(row)}")
            ms, mu = int(row[1]), int(row[2])
            if (ms, mu) in seen:
                raise FieldParseError(f"duplicate multi-index ({ms},{mu})")
            seen.add((ms, mu))
            p1 = int(row[5]) if len(row) >= 6 else 0
            p2 = int(row[6]) if len(row) == 7 else p1
            terms.append(FieldTerm(ms, mu, row[3], row[4], p1, p2))
        else:
            raise FieldParseError(f"unknown field-file key {key!r}")
    if fixed_point is None:
        if diagonal:
            fixed_point = ("0", "0")
        else:
            raise FieldParseError("missing fixed_point")
    if diagonal and (lam_s is None or lam_u is None):
        raise FieldParseError("diagonal files must give lambda_s and lambda_u")
    return FieldFile(
        fixed_point=fixed_point,
        terms=tuple(terms),
        diagonal=diagonal,
        lambda_s=lam_s,
        lambda_u=lam_u,
    )


def _literal_fraction(s: str) -> Fraction:
    try:
        if "/" in s:
            num, den = s.split("/", 1)
            return Fraction(Decimal(num.strip())) / Fraction(Decimal(den.strip()))
        return Fraction(Decimal(s))
    except (InvalidOperation, ZeroDivisionError, ValueError) as exc:
        raise FieldParseError(f"bad numeric literal {s!r}") from exc


def _coefficient(lit: str, delta: Fraction | None, power: int) -> Interval:
    q = _literal_fraction(lit)
    if power:
        if delta is None:
            raise FieldParseError("field template needs a delta value for substitution")
        q *= delta ** power
    return Interval.from_fraction(q)


def build_raw_field(ff: FieldFile, delta: Fraction | None = None) -> RawField:
    if ff.needs_delta() and delta is None:
        raise FieldParseError("this field is a template; pass --delta")
    t1: dict[tuple[int, int], Interval] = {}
    t2: dict[tuple[int, int], Interval] = {}
    for t in ff.terms:
        c1 = _coefficient(t.c1, delta, t.delta_power1)
        c2 = _coefficient(t.c2, delta, t.delta_power2)
        if not (c1.lo == 0.0 == c1.hi):
            t1[(t.ms, t.mu)] = c1
        if not (c2.lo == 0.0 == c2.hi):
            t2[(t.ms, t.mu)] = c2
    fp = (Interval.from_decimal(ff.fixed_point[0]), Interval.from_decimal(ff.fixed_point[1]))
    return RawField(terms_1=t1, terms_2=t2, fixed_point=fp)


def build_diag_field(ff: FieldFile, delta: Fraction | None = None) -> DiagField:
    """Direct construction for pre-diagonalized files (components are s, u)."""
    if not ff.diagonal:
        raise FieldParseError("field file is not flagged diagonal")
    raw = build_raw_field(ff, delta)
    deg = max(raw.degree(), 2)
    for terms in (raw.terms_1, raw.terms_2):
        for (ms, mu) in terms:
            if ms + mu < 2:
                raise FieldParseError("diagonal files must list only terms of order >= 2")
    f_s = TruncatedSeries2.from_terms(deg, raw.terms_1)
    f_u = TruncatedSeries2.from_terms(deg, raw.terms_2)
    return DiagField(
        lam_s=Interval.from_decimal(ff.lambda_s),  # type: ignore[arg-type]
        lam_u=Interval.from_decimal(ff.lambda_u),  # type: ignore[arg-type]
        f_s=f_s,
        f_u=f_u,
    )


# -- run configuration ---------------------------------------------------------


_CONFIG_KEYS = {
    "iota", "eta", "mu", "rho", "n_g", "n_g_factor", "eps_phi", "eps_g", "eps",
    "kappa_threshold", "retries", "n0", "n1",
}


def parse_config_file(text: str) -> HeuristicConfig:
    values: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected key = value, got {line!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigParseError(f"unknown config key {key!r}")
        values[key] = val
    return config_from_mapping(values)


def config_from_mapping(values: Mapping[str, str]) -> HeuristicConfig:
    cfg = HeuristicConfig()
    kwargs: dict[str, object] = {}
    try:
        if "iota" in values:
            kwargs["iota"] = int(values["iota"])
        if "eta" in values:
            kwargs["eta"] = Fraction(Decimal(values["eta"]))
        if "mu" in values:
            kwargs["mu"] = Fraction(Decimal(values["mu"]))
        if "rho" in values:
            kwargs["rho"] = int(values["rho"])
        if "n_g" in values:
            kwargs["n_g_absolute"] = int(values["n_g"])
        if "n_g_factor" in values:
            kwargs["n_g_factor"] = int(values["n_g_factor"])
        for name, key in (("eps_phi", "eps_phi"), ("eps_g", "eps_g"), ("eps", "eps")):
            if key in values:
                kwargs[name] = Interval.from_decimal(values[key])
        if "kappa_threshold" in values:
            lit = values["kappa_threshold"]
            if lit.startswith("2^"):
                kwargs["kappa_threshold"] = 2.0 ** int(lit[2:])
            else:
                kwargs["kappa_threshold"] = float(Fraction(Decimal(lit)))
        if "retries" in values:
            kwargs["retries"] = int(values["retries"])
        if "n0" in values:
            kwargs["n0_override"] = int(values["n0"])
        if "n1" in values:
            kwargs["n1_override"] = int(values["n1"])
    except (InvalidOperation, ValueError) as exc:
        raise ConfigParseError(str(exc)) from exc
    try:
        return replace(cfg, **kwargs)  # type: ignore[arg-type]
    except ValueError as exc:
        raise ConfigParseError(str(exc)) from exc


# -- certificate serialization ---------------------------------------------------


def _w_interval(out: TextIO, key: str, iv: Interval) -> None:
    out.write(f"{key} = {iv.lo!r} {iv.hi!r}\n")


def _w_series2(out: TextIO, key: str, s: TruncatedSeries2) -> None:
    out.write(f"{key}_degree = {s.degree}\n")
    for m, c in s.iter_nonzero():
        out.write(f"{key}_term = {m.ms} {m.mu} {c.lo!r} {c.hi!r}\n")


def _w_majorant(out: TextIO, key: str, s: MajorantSeries1) -> None:
    out.write(f"{key}_degree = {s.degree}\n")
    for k in range(s.degree + 1):
        c = s.coeff(k)
        if c.hi != 0.0 or c.lo != 0.0:
            out.write(f"{key}_coeff = {k} {c.lo!r} {c.hi!r}\n")


def certificate_to_text(cert: Certificate) -> str:
    out = io.StringIO()
    out.write("format = saddlecert-cert-v1\n")
    cfg = cert.config
    out.write(f"cfg_iota = {cfg.iota}\n")
    out.write(f"cfg_eta = {cfg.eta}\n")
    out.write(f"cfg_mu = {cfg.mu}\n")
    out.write(f"cfg_rho = {cfg.rho}\n")
    out.write(f"cfg_n_g_factor = {cfg.n_g_factor}\n")
    if cfg.n_g_absolute is not None:
        out.write(f"cfg_n_g_absolute = {cfg.n_g_absolute}\n")
    _w_interval(out, "cfg_eps_phi", cfg.eps_phi)
    _w_interval(out, "cfg_eps_g", cfg.eps_g)
    _w_interval(out, "cfg_eps", cfg.eps)
    out.write(f"cfg_kappa_threshold = {cfg.kappa_threshold!r}\n")
    out.write(f"cfg_retries = {cfg.retries}\n")
    if cfg.n0_override is not None:
        out.write(f"cfg_n0_override = {cfg.n0_override}\n")
    if cfg.n1_override is not None:
        out.write(f"cfg_n1_override = {cfg.n1_override}\n")
    fd = cert.flatness
    out.write(f"l = {fd.l}\n")
    out.write(f"n_l = {fd.n_l}\n")
    out.write(f"resonance_order = {fd.resonance_order if fd.resonance_order is not None else 'none'}\n")
    _w_interval(out, "lam_s", fd.lam_s)
    _w_interval(out, "lam_u", fd.lam_u)
    _w_interval(out, "lam_check", fd.lam_check)
    _w_interval(out, "lam_hat", fd.lam_hat)
    out.write(f"n0 = {cert.n0}\n")
    out.write(f"n1 = {cert.n1}\n")
    _w_interval(out, "C", cert.fit_phi.C)
    _w_interval(out, "M", cert.fit_phi.M)
    out.write(f"fit_phi_range = {cert.fit_phi.fit_range[0]} {cert.fit_phi.fit_range[1]}\n")
    out.write(f"fit_phi_all_zero = {int(cert.fit_phi.all_zero)}\n")
    _w_interval(out, "A", cert.A)
    _w_interval(out, "r_phi", cert.r_phi)
    _w_interval(out, "r0", cert.r0)
    _w_interval(out, "K0", cert.K0)
    _w_interval(out, "D", cert.fit_g.C)
    _w_interval(out, "K", cert.fit_g.M)
    out.write(f"fit_g_range = {cert.fit_g.fit_range[0]} {cert.fit_g.fit_range[1]}\n")
    out.write(f"fit_g_all_zero = {int(cert.fit_g.all_zero)}\n")
    _w_interval(out, "r1", cert.r1)
    _w_interval(out, "r2", cert.r2)
    _w_interval(out, "r3", cert.r3)
    _w_interval(out, "kappa", cert.kappa)
    out.write(f"r2_shrink = {cert.r2_shrink}\n")
    out.write(f"r3_shrink = {cert.r3_shrink}\n")
    _w_interval(out, "phi_induction_value", cert.phi_induction_value)
    _w_interval(out, "g_induction_value", cert.g_induction_value)
    _w_series2(out, "f_s", cert.field.f_s)
    _w_series2(out, "f_u", cert.field.f_u)
    _w_series2(out, "phi_s", cert.phi_s)
    _w_series2(out, "phi_u", cert.phi_u)
    _w_majorant(out, "alpha_hat", cert.alpha_hat)
    _w_majorant(out, "g_hat", cert.g_hat)
    return out.getvalue()


def _collect(text: str) -> tuple[dict[str, str], dict[str, list[str]]]:
    single: dict[str, str] = {}
    multi: dict[str, list[str]] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CertificateFormatError(f"bad line {line!r}")
        key, val = (p.strip() for p in line.split("=", 1))
        if key.endswith("_term") or key.endswith("_coeff"):
            multi.setdefault(key, []).append(val)
        else:
            if key in single:
                raise CertificateFormatError(f"duplicate key {key!r}")
            single[key] = val
    return single, multi


def _r_interval(single: Mapping[str, str], key: str) -> Interval:
    lo, hi = single[key].split()
    return Interval(float(lo), float(hi))


def _r_series2(single: Mapping[str, str], multi: Mapping[str, list[str]], key: str) -> TruncatedSeries2:
    degree = int(single[f"{key}_degree"])
    terms: dict[tuple[int, int], Interval] = {}
    for line in multi.get(f"{key}_term", []):
        ms, mu, lo, hi = line.split()
        terms[(int(ms), int(mu))] = Interval(float(lo), float(hi))
    return TruncatedSeries2.from_terms(degree, terms)


def _r_majorant(single: Mapping[str, str], multi: Mapping[str, list[str]], key: str) -> MajorantSeries1:
    degree = int(single[f"{key}_degree"])
    coeffs = [Interval(0.0, 0.0)] * (degree + 1)
    for line in multi.get(f"{key}_coeff", []):
        k, lo, hi = line.split()
        coeffs[int(k)] = Interval(float(lo), float(hi))
    return MajorantSeries1.from_coeffs(coeffs)


def certificate_from_text(text: str) -> Certificate:
    """Reload a serialized certificate and re-verify its invariants."""
    single, multi = _collect(text)
    if single.get("format") != "saddlecert-cert-v1":
        raise CertificateFormatError("not a saddlecert certificate")
    try:
        cfg = HeuristicConfig(
            iota=int(single["cfg_iota"]),
            eta=Fraction(single["cfg_eta"]),
            mu=Fraction(single["cfg_mu"]),
            rho=int(single["cfg_rho"]),
            n_g_factor=int(single["cfg_n_g_factor"]),
            n_g_absolute=int(single["cfg_n_g_absolute"]) if "cfg_n_g_absolute" in single else None,
            eps_phi=_r_interval(single, "cfg_eps_phi"),
            eps_g=_r_interval(single, "cfg_eps_g"),
            eps=_r_interval(single, "cfg_eps"),
            kappa_threshold=float(single["cfg_kappa_threshold"]),
            retries=int(single["cfg_retries"]),
            n0_override=int(single["cfg_n0_override"]) if "cfg_n0_override" in single else None,
            n1_override=int(single["cfg_n1_override"]) if "cfg_n1_override" in single else None,
        )
        res = single["resonance_order"]
        fd = FlatnessData(
            l=int(single["l"]),
            n_l=int(single["n_l"]),
            lam_s=_r_interval(single, "lam_s"),
            lam_u=_r_interval(single, "lam_u"),
            lam_check=_r_interval(single, "lam_check"),
            lam_hat=_r_interval(single, "lam_hat"),
            resonance_order=None if res == "none" else int(res),
        )
        field = DiagField(
            lam_s=fd.lam_s,
            lam_u=fd.lam_u,
            f_s=_r_series2(single, multi, "f_s"),
            f_u=_r_series2(single, multi, "f_u"),
        )
        cert = Certificate(
            field=field,
            config=cfg,
            flatness=fd,
            n0=int(single["n0"]),
            n1=int(single["n1"]),
            phi_s=_r_series2(single, multi, "phi_s"),
            phi_u=_r_series2(single, multi, "phi_u"),
            alpha_hat=_r_majorant(single, multi, "alpha_hat"),
            fit_phi=GeometricFit(
                C=_r_interval(single, "C"),
                M=_r_interval(single, "M"),
                fit_range=tuple(int(v) for v in single["fit_phi_range"].split()),  # type: ignore[arg-type]
                all_zero=bool(int(single["fit_phi_all_zero"])),
            ),
            A=_r_interval(single, "A"),
            r_phi=_r_interval(single, "r_phi"),
            r0=_r_interval(single, "r0"),
            K0=_r_interval(single, "K0"),
            g_hat=_r_majorant(single, multi, "g_hat"),
            fit_g=GeometricFit(
                C=_r_interval(single, "D"),
                M=_r_interval(single, "K"),
                fit_range=tuple(int(v) for v in single["fit_g_range"].split()),  # type: ignore[arg-type]
                all_zero=bool(int(single["fit_g_all_zero"])),
            ),
            r1=_r_interval(single, "r1"),
            r2=_r_interval(single, "r2"),
            r3=_r_interval(single, "r3"),
            kappa=_r_interval(single, "kappa"),
            r2_shrink=int(single["r2_shrink"]),
            r3_shrink=int(single["r3_shrink"]),
            phi_induction_value=_r_interval(single, "phi_induction_value"),
            g_induction_value=_r_interval(single, "g_induction_value"),
        )
    except (KeyError, ValueError) as exc:
        raise CertificateFormatError(f"malformed certificate: {exc}") from exc
    cert.validate()
    return cert
