"""Closed-form passage of a certified saddle box.

Given a certificate and a point entering the box on the stable side, the
normal-form coordinates of the entry are enclosed, the exit point and the
passage time follow from the hyperbolic bracket

    y_s0 (|y_u0|/Y)^((|lam_s|+kappa)/(lam_u-kappa))  <=  |y_s(exit)|
    |y_s(exit)|  <=  y_s0 (|y_u0|/Y)^((|lam_s|-kappa)/(lam_u+kappa))

at the exit face |y_u| = Y, and the result is transported back to the
original diagonal coordinates with the transform-norm bounds.

Coordinate-change inflation comes in two flavours.  The default is two-sided
and containment-valid for any certified field: multiplicative factors
1/(1 +- K0 r~) when both components of the nonlinearity vanish on their own
axis (the separatrices coincide with the axes, so the change of variables
preserves each coordinate's sign and relative size), otherwise additive
inverse-norm inflation at the box radius.  The graphic-lap helper instead
reproduces the one-sided recipe of the worked example (upper bound on the
exit coordinate, lower bound on the lap time); it requires the axis
structure and an explicit transversality assertion from the caller.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SaddleCertError
from .interval import Interval, ONE, DomainError
from .normal_form import Certificate, InverseDomainViolated, phi_inverse_bound
from .prep import DiagField


class StraddlesStableManifold(SaddleCertError):
    """The unstable entry coordinate's enclosure contains zero; the
    trajectory may converge to the saddle and never exit."""


class LeftValidityDomain(SaddleCertError):
    """An exit enclosure left the region where the certificate's bounds hold."""


@dataclass(frozen=True)
class EntryPoint:
    """Point on the stable entry face |x_s| = r with |x_u| <= r."""

    x_s: Interval
    x_u: Interval
    r: Interval

    def __post_init__(self) -> None:
        if not self.r.strictly_positive():
            raise ValueError("box radius must be certifiably positive")
        if abs(self.x_s).intersect(self.r) is None:
            raise ValueError(f"|x_s| = {abs(self.x_s)} must meet the face radius {self.r}")
        if self.x_u.mag() > self.r.hi:
            raise ValueError(f"|x_u| = {self.x_u.mag()} exceeds the box radius {self.r}")

    @classmethod
    def on_face(cls, r: Interval, x_u: Interval, side: int = 1) -> "EntryPoint":
        return cls(x_s=r * side, x_u=x_u, r=r)


@dataclass(frozen=True)
class FlybyResult:
    exit_side: int
    x_s_exit: Interval
    x_u_exit: Interval
    time: Interval
    effective_radius: Interval
    audit: tuple[str, ...]


def axis_invariant(field: DiagField) -> bool:
    """True when each component of the nonlinearity is divisible by its own
    variable, so the coordinate axes are invariant curves of the field (and
    of the normal-form transform, order by order)."""
    for m, _ in field.f_s.iter_nonzero():
        if m.ms < 1:
            return False
    for m, _ in field.f_u.iter_nonzero():
        if m.mu < 1:
            return False
    return True


@dataclass(frozen=True)
class _EnterState:
    y_s: Interval  # |y_s| at entry
    y_u: Interval  # signed
    R: Interval
    r: Interval
    axis: bool
    audit: tuple[str, ...]


def _enter(cert: Certificate, p: EntryPoint, one_sided: bool) -> _EnterState:
    audit = []
    if p.r.hi > cert.r3.lo:
        raise DomainError(f"entry radius {p.r} not certified <= r3 = {cert.r3}")
    audit.append(f"entry radius {p.r.hi!r} <= r3 ok")
    k0 = cert.K0
    r = p.r
    big_r = (ONE + k0 * r) * r
    axis = axis_invariant(cert.field)
    if one_sided:
        if not axis:
            raise DomainError("one-sided entry recipe requires the invariant-axes structure")
        # worked-example recipe: per-coordinate quadratic inflation, upper side only
        y_u = (ONE + k0 * abs(p.x_u)) * p.x_u
        y_s = big_r
        audit.append("one-sided entry inflation (1 + K0|x_u|)")
    elif axis:
        r_tilde = r + phi_inverse_bound(r, k0, r0=cert.r0)
        shrink = ONE - k0 * r_tilde
        if not shrink.strictly_positive():
            raise DomainError(f"K0 r~ = {k0 * r_tilde} reaches 1 at the entry radius")
        factor = Interval((ONE / (ONE + k0 * r_tilde)).lo, (ONE / shrink).hi)
        y_u = p.x_u * factor
        y_s = abs(p.x_s) * factor
        audit.append(f"two-sided multiplicative entry factor {factor} (invariant axes)")
    else:
        delta = phi_inverse_bound(r, k0, r0=cert.r0)
        pad = Interval(-delta.hi, delta.hi)
        y_u = p.x_u + pad
        y_s = abs(p.x_s) + pad
        audit.append(f"two-sided additive entry inflation {delta.hi!r}")
    if y_u.contains_zero() and not one_sided:
        raise StraddlesStableManifold(
            f"inflated unstable coordinate {y_u} contains zero; exit time is unbounded"
        )
    y_s = Interval(max(0.0, y_s.lo), max(y_s.hi, 0.0))
    return _EnterState(y_s=y_s, y_u=y_u, R=big_r, r=r, axis=axis, audit=tuple(audit))


def enter_box(cert: Certificate, p: EntryPoint) -> tuple[Interval, Interval]:
    """Normal-form entry data: signed y_u enclosure and the effective box
    radius R = (1 + K0 r) r."""
    st = _enter(cert, p, one_sided=False)
    return st.y_u, st.R


def _exponents(cert: Certificate) -> Interval:
    """Hull of the two bracket exponents (|lam_s| -+ kappa)/(lam_u +- kappa)."""
    kap = Interval(0.0, cert.kappa.hi)
    lam_u = cert.lam_u
    mag_s = abs(cert.lam_s)
    if not kap.strictly_less(lam_u):
        raise DomainError(f"kappa {kap} not below lam_u {lam_u}")
    lo_exp = (mag_s - kap) / (lam_u + kap)
    hi_exp = (mag_s + kap) / (lam_u - kap)
    return lo_exp.hull(hi_exp)


def exit_enclosure(
    cert: Certificate,
    R: Interval,
    y_u: Interval,
    exit_radius: Interval | None = None,
    y_s_entry: Interval | None = None,
) -> tuple[Interval, Interval]:
    """Exit-face y_s enclosure and passage-time enclosure.

    By default the exit face is |y_u| = R and the entry stable coordinate is
    taken at R itself; a fly-by passes the face radius r and the certified
    entry enclosure instead.
    """
    y = exit_radius if exit_radius is not None else R
    ys0 = y_s_entry if y_s_entry is not None else R
    if y_u.contains_zero():
        raise StraddlesStableManifold(f"y_u = {y_u} contains zero")
    au = abs(y_u)
    if not (au.hi < R.lo):
        raise DomainError(f"|y_u| = {au} not certifiably below R = {R}")
    exps = _exponents(cert)
    ratio_lo = Interval.point(au.lo) / y
    ratio_hi = Interval.point(au.hi) / y
    lo = (Interval.point(ys0.lo) * ratio_lo.pow_real(exps)).lo
    hi = (Interval.point(ys0.hi) * ratio_hi.pow_real(exps)).hi
    y_s_exit = Interval(max(0.0, lo), hi)
    kap = Interval(0.0, cert.kappa.hi)
    t_lo = ((y / Interval.point(au.hi)).log() / (cert.lam_u + kap)).lo
    t_hi = ((y / Interval.point(au.lo)).log() / (cert.lam_u - kap)).hi
    time = Interval(max(0.0, t_lo), max(t_hi, 0.0))
    return y_s_exit, time


def exit_to_original(
    cert: Certificate,
    y_s_exit: Interval,
    r_prime: Interval | None = None,
    axis: bool | None = None,
) -> Interval:
    """Back-transform the exit stable coordinate, inflating by the larger of
    the quadratic norm bound and the inverse-transform bound at the exit
    magnitude; asserts the result stays inside the certified validity disk."""
    k0 = cert.K0
    if r_prime is None:
        r_prime = Interval.point(y_s_exit.mag())
    if axis is None:
        axis = axis_invariant(cert.field)
    if axis:
        scale = k0 * r_prime
        x = y_s_exit * Interval((ONE - scale).lo, (ONE + scale).hi)
    else:
        quad = k0 * r_prime.pow_int(2)
        inv = phi_inverse_bound(r_prime, k0, r0=cert.r0)
        infl = quad.hull(inv)
        x = y_s_exit + Interval(-infl.hi, infl.hi)
    limit = cert.min_validity_radius()
    if not x.mag() < limit.lo:
        raise LeftValidityDomain(
            f"exit enclosure {x} leaves the validity disk of radius {limit}"
        )
    return x


def flyby(cert: Certificate, p: EntryPoint) -> FlybyResult:
    """Two-sided containment enclosure of the exit point and passage time."""
    st = _enter(cert, p, one_sided=False)
    audit = list(st.audit)
    y_s_exit, time = exit_enclosure(cert, st.R, st.y_u, exit_radius=st.r, y_s_entry=st.y_s)
    audit.append(f"exit face |y_u| = {st.r}")
    side = 1 if st.y_u.lo > 0.0 else -1
    # magnitude of the exit point in normal-form coordinates
    r_prime = Interval.point(max(y_s_exit.mag(), st.r.hi))
    x_s_exit = exit_to_original(cert, y_s_exit, r_prime=r_prime, axis=st.axis)
    audit.append(f"back-transform inflation at radius {r_prime.hi!r}")
    if st.axis:
        scale = cert.K0 * r_prime
        x_u_exit = (st.r * side) * Interval((ONE - scale).lo, (ONE + scale).hi)
    else:
        inv = phi_inverse_bound(r_prime, cert.K0, r0=cert.r0)
        infl = (cert.K0 * r_prime.pow_int(2)).hull(inv)
        x_u_exit = st.r * side + Interval(-infl.hi, infl.hi)
    audit.append("validity: exit inside min(r0, r2, r0(1-K0 r0))")
    return FlybyResult(
        exit_side=side,
        x_s_exit=x_s_exit,
        x_u_exit=x_u_exit,
        time=time,
        effective_radius=st.R,
        audit=tuple(audit),
    )


# -- the graphic-lap recipe ---------------------------------------------------


def lap_passage(cert: Certificate, r: Interval, x_u: Interval) -> tuple[Interval, Interval]:
    """One saddle passage of the worked example's one-sided recipe.

    Returns (upper enclosure of the next unstable entry coordinate, lower
    enclosure of the passage time).  Only the .hi of the first and the .lo of
    the second are meaningful.  Requires the invariant-axes structure.
    """
    if not x_u.strictly_positive():
        raise StraddlesStableManifold(f"lap entry coordinate {x_u} not certifiably positive")
    st = _enter(cert, EntryPoint.on_face(r, x_u), one_sided=True)
    kap = Interval(0.0, cert.kappa.hi)
    lo_exp = (abs(cert.lam_s) - kap) / (cert.lam_u + kap)
    yu_hi = Interval.point(st.y_u.hi)
    if not yu_hi.strictly_less(r):
        raise DomainError(f"inflated entry coordinate {yu_hi} reaches the face radius {r}")
    y_s = st.R * (yu_hi / r).pow_real(lo_exp)
    ys_pt = Interval.point(y_s.hi)
    x_next = y_s + phi_inverse_bound(ys_pt, cert.K0, r0=cert.r0)
    t = (r / yu_hi).log() / (cert.lam_u + kap)
    return x_next, Interval(max(0.0, t.lo), max(t.hi, 0.0))


def graphic_laps(
    cert: Certificate,
    r: Interval,
    x_u0: Interval,
    n_laps: int,
    passes_per_lap: int = 4,
) -> list[tuple[int, float, float]]:
    """Iterate the lap recipe around a graphic of saddles.

    Each lap strings together `passes_per_lap` saddle passages, feeding every
    exit bound into the next entry (the transversality/symmetry argument for
    doing so is system-specific and asserted by the caller).  Rows are
    (lap, upper bound on x_u, lower bound on the lap time); lap 0 echoes the
    start.  The sequence stops early, keeping the rows so far, if a passage
    can no longer be certified.
    """
    if not axis_invariant(cert.field):
        raise DomainError("graphic laps require the invariant-axes structure")
    rows = [(0, x_u0.hi, 0.0)]
    x = Interval.point(x_u0.hi)
    for lap in range(1, n_laps + 1):
        lap_time = 0.0
        try:
            for _ in range(passes_per_lap):
                x_next, t = lap_passage(cert, r, x)
                lap_time += t.lo
                x = Interval.point(x_next.hi)
        except (StraddlesStableManifold, DomainError, InverseDomainViolated):
            break
        rows.append((lap, x.hi, lap_time))
    return rows
