"""Bring a polynomial planar field with a saddle into diagonal form.

The pipeline recenters the fixed point at the origin, encloses the Jacobian
eigenvalues by the interval quadratic formula (rigorous for a 2x2 matrix),
builds eigenvector enclosures, and pushes the polynomial through x = T.xi
followed by the interval inverse of T.  Every dropped constant/linear
residue is verified to contain zero rather than silently absorbed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import SaddleCertError
from .interval import Interval, ZERO, ONE, DivisionByZeroInterval
from .series import TruncatedSeries2, eval_poly_at

Terms = Mapping[tuple[int, int], Interval]


class NotAFixedPoint(SaddleCertError):
    """Recentred constant term certifiably nonzero."""


class NotASaddle(SaddleCertError):
    """Eigenvalue signs (one negative, one positive) cannot be certified."""


class SingularTransform(SaddleCertError):
    """The eigenvector matrix has an interval determinant containing zero."""


class ResidualLinearTerms(SaddleCertError):
    """Order-0/1 residues after diagonalisation exclude zero (internal bug guard)."""


@dataclass(frozen=True)
class RawField:
    """Polynomial field in original coordinates plus a fixed-point enclosure."""

    terms_1: Terms  # first component, multi-index -> coefficient
    terms_2: Terms
    fixed_point: tuple[Interval, Interval]

    def degree(self) -> int:
        idx = list(self.terms_1) + list(self.terms_2)
        return max((a + b for a, b in idx), default=0)


@dataclass(frozen=True)
class DiagField:
    """diag(lam_s, lam_u) plus a nonlinearity with no terms of order < 2."""

    lam_s: Interval
    lam_u: Interval
    f_s: TruncatedSeries2
    f_u: TruncatedSeries2

    def __post_init__(self) -> None:
        if not self.lam_s.strictly_negative() or not self.lam_u.strictly_positive():
            raise NotASaddle(f"uncertified saddle signs: {self.lam_s}, {self.lam_u}")
        for f in (self.f_s, self.f_u):
            if not f.is_zero() and f.min_order() < 2:
                raise ValueError("nonlinearity carries terms of order < 2")

    def f_terms(self, i: str) -> dict[tuple[int, int], Interval]:
        f = self.f_s if i == "s" else self.f_u
        return {(m.ms, m.mu): c for m, c in f.iter_nonzero()}

    def degree(self) -> int:
        return max(self.f_s.max_order(), self.f_u.max_order(), 2)

    def is_linear(self) -> bool:
        return self.f_s.is_zero() and self.f_u.is_zero()


def translate(raw: RawField) -> RawField:
    """Recentre the polynomial so the fixed point sits at the origin.

    Coefficients are recomputed by interval binomial expansion; the new
    constant term must contain zero (and is kept, enclosing it).
    """
    p_s, p_u = raw.fixed_point
    d = raw.degree()
    # substitute x = p + z exactly: evaluate each component at (p_s + z_s, p_u + z_u)
    sub_s = TruncatedSeries2.from_terms(d, _nonzero({(0, 0): p_s, (1, 0): ONE}))
    sub_u = TruncatedSeries2.from_terms(d, _nonzero({(0, 0): p_u, (0, 1): ONE}))
    out = []
    for terms in (raw.terms_1, raw.terms_2):
        series = eval_poly_at(terms, sub_s, sub_u, d)
        const = series.coeff(0, 0)
        if not const.contains_zero():
            raise NotAFixedPoint(f"recentred constant term {const} excludes zero")
        out.append({(m.ms, m.mu): c for m, c in series.iter_nonzero()})
    return RawField(terms_1=out[0], terms_2=out[1], fixed_point=(ZERO, ZERO))


def _nonzero(terms: dict[tuple[int, int], Interval]) -> dict[tuple[int, int], Interval]:
    return {m: c for m, c in terms.items() if not (c.lo == 0.0 and c.hi == 0.0)}


def jacobian_at_origin(raw: RawField) -> tuple[tuple[Interval, Interval], tuple[Interval, Interval]]:
    j11 = raw.terms_1.get((1, 0), ZERO)
    j12 = raw.terms_1.get((0, 1), ZERO)
    j21 = raw.terms_2.get((1, 0), ZERO)
    j22 = raw.terms_2.get((0, 1), ZERO)
    return (j11, j12), (j21, j22)


def eigen_enclose(
    j: tuple[tuple[Interval, Interval], tuple[Interval, Interval]],
) -> tuple[Interval, Interval, tuple[tuple[Interval, Interval], tuple[Interval, Interval]]]:
    """Eigenvalue enclosures and an eigenvector matrix for a 2x2 saddle.

    Uses the interval quadratic formula on the characteristic polynomial; the
    determinant must be certifiably negative.  Columns of T enclose the
    stable and unstable eigenvectors, normalised so the largest-magnitude
    component is 1.
    """
    (a, b), (c, d) = j
    trace = a + d
    det = a * d - b * c
    if not det.strictly_negative():
        raise NotASaddle(f"Jacobian determinant {det} not certifiably negative")
    disc = trace * trace - det * 4
    root = disc.sqrt()
    lam_s = (trace - root) * Interval.point(0.5)
    lam_u = (trace + root) * Interval.point(0.5)
    if not lam_s.strictly_negative() or not lam_u.strictly_positive():
        raise NotASaddle(f"eigenvalue signs not certified: {lam_s}, {lam_u}")
    v_s = _eigenvector(a, b, c, d, lam_s)
    v_u = _eigenvector(a, b, c, d, lam_u)
    t = ((v_s[0], v_u[0]), (v_s[1], v_u[1]))
    det_t = t[0][0] * t[1][1] - t[0][1] * t[1][0]
    if det_t.contains_zero():
        raise SingularTransform(f"eigenvector matrix determinant {det_t} contains zero")
    return lam_s, lam_u, t


def _eigenvector(a: Interval, b: Interval, c: Interval, d: Interval, lam: Interval) -> tuple[Interval, Interval]:
    """Eigenvector enclosure for lam, largest-magnitude component scaled to 1.

    (b, lam-a) solves the first row exactly and the second by the
    characteristic identity; (lam-d, c) symmetrically.  Pick whichever is
    certifiably nonzero and better conditioned.
    """
    cand = []
    v1 = (b, lam - a)
    if not (v1[0].contains_zero() and v1[1].contains_zero()):
        cand.append(v1)
    v2 = (lam - d, c)
    if not (v2[0].contains_zero() and v2[1].contains_zero()):
        cand.append(v2)
    if not cand:
        raise SingularTransform(f"no certifiable eigenvector for eigenvalue {lam}")
    best = None
    for x, y in cand:
        big, small = (x, y) if x.mig() >= y.mig() else (y, x)
        if big.contains_zero():
            continue
        ratio = small.mag() / big.mig()
        if best is None or ratio < best[0]:
            unit = ONE
            other = small / big
            if x.mig() >= y.mig():
                best = (ratio, (unit, other))
            else:
                best = (ratio, (other, unit))
    if best is None:
        raise SingularTransform(f"eigenvector components for {lam} all straddle zero")
    return best[1]


def invert_2x2(
    t: tuple[tuple[Interval, Interval], tuple[Interval, Interval]],
) -> tuple[tuple[Interval, Interval], tuple[Interval, Interval]]:
    det = t[0][0] * t[1][1] - t[0][1] * t[1][0]
    if det.contains_zero():
        raise SingularTransform(f"determinant {det} contains zero")
    return (
        (t[1][1] / det, -t[0][1] / det),
        (-t[1][0] / det, t[0][0] / det),
    )


def diagonalize(raw: RawField) -> DiagField:
    """Full preparation: translate, enclose eigendata, substitute x = T.xi.

    The output nonlinearity drops all order-0/1 terms after verifying their
    enclosures contain the exact residues (zero for orders 0 and off-diagonal
    order 1, the eigenvalues on the diagonal).
    """
    if not (raw.fixed_point[0].is_point() and raw.fixed_point[0].lo == 0.0
            and raw.fixed_point[1].is_point() and raw.fixed_point[1].lo == 0.0):
        raw = translate(raw)
    lam_s, lam_u, t = eigen_enclose(jacobian_at_origin(raw))
    tinv = invert_2x2(t)
    d = raw.degree()
    sub_s = TruncatedSeries2.from_terms(d, _nonzero({(1, 0): t[0][0], (0, 1): t[0][1]}))
    sub_u = TruncatedSeries2.from_terms(d, _nonzero({(1, 0): t[1][0], (0, 1): t[1][1]}))
    comp1 = eval_poly_at(raw.terms_1, sub_s, sub_u, d)
    comp2 = eval_poly_at(raw.terms_2, sub_s, sub_u, d)
    new_s = comp1.scale(tinv[0][0]) + comp2.scale(tinv[0][1])
    new_u = comp1.scale(tinv[1][0]) + comp2.scale(tinv[1][1])
    _check_residuals(new_s, lam_s, "s")
    _check_residuals(new_u, lam_u, "u")
    return DiagField(lam_s=lam_s, lam_u=lam_u, f_s=new_s.nonlinear_part(), f_u=new_u.nonlinear_part())


def _check_residuals(comp: TruncatedSeries2, lam: Interval, which: str) -> None:
    const = comp.coeff(0, 0)
    if not const.contains_zero():
        raise ResidualLinearTerms(f"constant residue {const} in component {which}")
    diag = comp.coeff(1, 0) if which == "s" else comp.coeff(0, 1)
    off = comp.coeff(0, 1) if which == "s" else comp.coeff(1, 0)
    if not off.contains_zero():
        raise ResidualLinearTerms(f"off-diagonal linear residue {off} in component {which}")
    if not (diag - lam).contains_zero():
        raise ResidualLinearTerms(
            f"diagonal linear residue {diag} does not meet eigenvalue {lam} in component {which}"
        )
