"""Resonance exclusion: certify the order of flatness and divisor bounds.

A flatness order l is certified by checking, for i = 1..l-1, that both
i*(-lam_s/lam_u) and i*(lam_u/-lam_s) certifiably exclude every integer.
From order N(l) = l + ceil((l-1)|lam_hat/lam_check|) on, the small divisors
m.lam - lam_i admit the sharp lower bound

    Omega(k) = |(k - l)*lam_check + (l - 1)*lam_hat|

with lam_check/lam_hat the *signed* eigenvalues of smallest/largest
magnitude; since a saddle's eigenvalues have opposite signs this equals
(k-l)|lam_check| - (l-1)|lam_hat|, which is nonnegative exactly from N(l) on
and grows like k|lam_check|.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SaddleCertError
from .interval import AmbiguousInteger, Interval
from .series import MultiIndex


class NoFlatOrder(SaddleCertError):
    """Not even flatness order 2 could be certified (resonance too close)."""


class InvalidRegime(SaddleCertError):
    """Omega(k) requested below N(l), where the lower bound does not hold."""


class ResonantDivisor(SaddleCertError):
    """A divisor interval for a removable index contains zero."""


@dataclass(frozen=True)
class FlatnessData:
    """Certified flatness order and the eigenvalue data the bounds need."""

    l: int
    n_l: int
    lam_s: Interval
    lam_u: Interval
    lam_check: Interval  # eigenvalue of smallest magnitude, as a magnitude
    lam_hat: Interval  # eigenvalue of largest magnitude, as a magnitude
    resonance_order: int | None  # first i whose ratio check failed, if any


def flatness_order(lam_s: Interval, lam_u: Interval, iota: int) -> tuple[int, int | None]:
    """Largest certifiable l <= iota, plus the first resonant index if hit.

    Requires certified saddle signs.  Raises NoFlatOrder when even i = 1
    cannot be certified (e.g. |lam_s| = lam_u within interval width).
    """
    if not lam_s.strictly_negative() or not lam_u.strictly_positive():
        raise NoFlatOrder(f"eigenvalue signs not certified: {lam_s}, {lam_u}")
    if iota < 2:
        raise ValueError("iota must be at least 2")
    ratio_a = (-lam_s) / lam_u
    ratio_b = lam_u / (-lam_s)
    for i in range(1, iota):
        if not ((ratio_a * i).excludes_integers() and (ratio_b * i).excludes_integers()):
            if i == 1:
                raise NoFlatOrder(
                    f"resonance at i=1: ratios {ratio_a * i}, {ratio_b * i} meet an integer"
                )
            return i, i
    return iota, None


def eigen_magnitudes(lam_s: Interval, lam_u: Interval) -> tuple[Interval, Interval]:
    """(lam_check, lam_hat) magnitudes with a certified comparison.

    The comparison must be strict; an ambiguous one means a flat-order-1
    resonance (equal moduli) is within the interval widths.
    """
    a = abs(lam_s)
    b = abs(lam_u)
    if a.strictly_less(b):
        return a, b
    if b.strictly_less(a):
        return b, a
    raise NoFlatOrder(f"cannot order eigenvalue magnitudes {a} vs {b}")


def compute_flatness(lam_s: Interval, lam_u: Interval, iota: int) -> FlatnessData:
    l, resonance = flatness_order(lam_s, lam_u, iota)
    lam_check, lam_hat = eigen_magnitudes(lam_s, lam_u)
    n_l = compute_N(l, lam_check, lam_hat)
    return FlatnessData(
        l=l,
        n_l=n_l,
        lam_s=lam_s,
        lam_u=lam_u,
        lam_check=lam_check,
        lam_hat=lam_hat,
        resonance_order=resonance,
    )


def compute_N(l: int, lam_check: Interval, lam_hat: Interval) -> int:
    """N(l) = l + ceil((l-1)|lam_hat/lam_check|), certified integer ceiling.

    Raises AmbiguousInteger when the eigenvalue intervals straddle a ceiling
    boundary; the caller must tighten them.
    """
    q = (lam_hat / lam_check) * (l - 1)
    return l + q.ceil_sup()


def omega(k: int, fd: FlatnessData) -> Interval:
    """Sharp divisor lower bound at order k >= N(l); strictly positive."""
    if k < fd.n_l:
        raise InvalidRegime(f"Omega({k}) requested below N(l) = {fd.n_l}")
    # Opposite signs make |(k-l)lam_check + (l-1)lam_hat| = (k-l)|check| - (l-1)|hat|,
    # nonnegative in this regime.
    val = fd.lam_check * (k - fd.l) - fd.lam_hat * (fd.l - 1)
    return abs(val)


def divisor(m: MultiIndex, i: str, lam_s: Interval, lam_u: Interval) -> Interval:
    """m.lam - lam_i for a removable index; errors if the enclosure hits zero."""
    lam_i = lam_s if i == "s" else lam_u
    d = lam_s * m.ms + lam_u * m.mu - lam_i
    if d.contains_zero():
        raise ResonantDivisor(
            f"divisor for m=({m.ms},{m.mu}), i={i} contains zero: {d}; "
            "eigenvalue enclosures are too wide for the certified flatness order"
        )
    return d
