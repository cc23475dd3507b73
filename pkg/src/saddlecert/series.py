"""Truncated power series with interval coefficients.

Two kinds of series are used throughout: bivariate truncated series in the
stable/unstable variables (coefficient per multi-index ``(ms, mu)``), and
univariate majorant series with nonnegative coefficients that dominate them.
Bivariate coefficients are stored densely in triangular order (see
:mod:`saddlecert._kernels`); degrees stay small (<= ~40) so dense beats
sparse.  All values are immutable; operations are pure.

The truncated product keeps only coefficients up to the result degree, and a
coefficient of order k of ``f(x + phi(x))`` depends only on phi coefficients
of order < k whenever f has no constant or linear part, which is what makes
the order-by-order recursions well-founded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from . import _kernels
from ._kernels import flat_index, ncoeffs, tri
from .interval import Interval, ZERO, _add_down, _add_up, _down, _up


class MultiIndex(NamedTuple):
    """Exponent pair; order() is the total degree."""

    ms: int
    mu: int

    def order(self) -> int:
        return self.ms + self.mu

    def in_v(self, l: int) -> bool:
        """Removable indices: some exponent below the flatness order."""
        return self.ms < l or self.mu < l

    def in_u(self, l: int) -> bool:
        """Kept indices: both exponents at least the flatness order."""
        return self.ms >= l and self.mu >= l


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class TruncatedSeries2:
    """Bivariate series truncated at a total degree, interval coefficients."""

    __slots__ = ("degree", "lo", "hi")

    def __init__(self, degree: int, lo: np.ndarray, hi: np.ndarray):
        n = ncoeffs(degree)
        if lo.shape != (n,) or hi.shape != (n,):
            raise ValueError("coefficient array length does not match degree")
        self.degree = degree
        self.lo = _frozen(lo)
        self.hi = _frozen(hi)

    # -- construction ---------------------------------------------------

    @classmethod
    def zero(cls, degree: int) -> "TruncatedSeries2":
        n = ncoeffs(degree)
        return cls(degree, np.zeros(n), np.zeros(n))

    @classmethod
    def from_terms(cls, degree: int, terms: Mapping[tuple[int, int], Interval]) -> "TruncatedSeries2":
        lo = np.zeros(ncoeffs(degree))
        hi = np.zeros(ncoeffs(degree))
        for (ms, mu), c in terms.items():
            if ms < 0 or mu < 0 or ms + mu > degree:
                raise ValueError(f"index ({ms},{mu}) outside degree {degree}")
            j = flat_index(ms, mu)
            if lo[j] != 0.0 or hi[j] != 0.0:
                raise ValueError(f"duplicate index ({ms},{mu})")
            lo[j] = c.lo
            hi[j] = c.hi
        return cls(degree, lo, hi)

    @classmethod
    def variable(cls, which: str, degree: int) -> "TruncatedSeries2":
        idx = (1, 0) if which == "s" else (0, 1)
        return cls.from_terms(degree, {idx: Interval(1.0, 1.0)})

    # -- access -----------------------------------------------------------

    def coeff(self, ms: int, mu: int) -> Interval:
        if ms + mu > self.degree:
            return ZERO
        j = flat_index(ms, mu)
        return Interval(float(self.lo[j]), float(self.hi[j]))

    def iter_nonzero(self) -> Iterator[tuple[MultiIndex, Interval]]:
        for j in np.flatnonzero((self.lo != 0.0) | (self.hi != 0.0)):
            k = _order_of_flat(int(j))
            mu = int(j) - tri(k)
            yield MultiIndex(k - mu, mu), Interval(float(self.lo[j]), float(self.hi[j]))

    def is_zero(self) -> bool:
        return not (self.lo.any() or self.hi.any())

    def min_order(self) -> int:
        """Order of the lowest nonzero coefficient (degree+1 when zero)."""
        nz = np.flatnonzero((self.lo != 0.0) | (self.hi != 0.0))
        if nz.size == 0:
            return self.degree + 1
        return _order_of_flat(int(nz[0]))

    def max_order(self) -> int:
        nz = np.flatnonzero((self.lo != 0.0) | (self.hi != 0.0))
        if nz.size == 0:
            return 0
        return _order_of_flat(int(nz[-1]))

    # -- arithmetic ---------------------------------------------------------

    def truncated(self, degree: int) -> "TruncatedSeries2":
        if degree >= self.degree:
            n = ncoeffs(degree)
            lo = np.zeros(n)
            hi = np.zeros(n)
            lo[: self.lo.size] = self.lo
            hi[: self.hi.size] = self.hi
            return TruncatedSeries2(degree, lo, hi)
        n = ncoeffs(degree)
        return TruncatedSeries2(degree, self.lo[:n].copy(), self.hi[:n].copy())

    def __add__(self, other: "TruncatedSeries2") -> "TruncatedSeries2":
        d = min(self.degree, other.degree)
        n = ncoeffs(d)
        alo, ahi = self.lo[:n], self.hi[:n]
        blo, bhi = other.lo[:n], other.hi[:n]
        lo = alo + blo
        exact = (lo - alo == blo) & (lo - blo == alo)
        lo = np.where(exact, lo, np.nextafter(lo, -np.inf))
        hi = ahi + bhi
        exact = (hi - ahi == bhi) & (hi - bhi == ahi)
        hi = np.where(exact, hi, np.nextafter(hi, np.inf))
        return TruncatedSeries2(d, lo, hi)

    def __neg__(self) -> "TruncatedSeries2":
        return TruncatedSeries2(self.degree, (-self.hi).copy(), (-self.lo).copy())

    def __sub__(self, other: "TruncatedSeries2") -> "TruncatedSeries2":
        return self + (-other)

    def scale(self, c: Interval) -> "TruncatedSeries2":
        if c.lo == 0.0 and c.hi == 0.0:
            return TruncatedSeries2.zero(self.degree)
        if c.is_point() and c.lo == 1.0:
            return self
        if c.is_point() and c.lo == -1.0:
            return -self
        p1 = c.lo * self.lo
        p2 = c.lo * self.hi
        p3 = c.hi * self.lo
        p4 = c.hi * self.hi
        lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
        hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
        zero = (self.lo == 0.0) & (self.hi == 0.0)
        lo = np.where(zero, 0.0, np.nextafter(lo, -np.inf))
        hi = np.where(zero, 0.0, np.nextafter(hi, np.inf))
        return TruncatedSeries2(self.degree, lo, hi)

    def mul(self, other: "TruncatedSeries2", degree: int | None = None) -> "TruncatedSeries2":
        """Truncated product.

        Default result degree is min(self.degree, other.degree) — the order up
        to which a product of truncations with unknown tails is trustworthy.
        Callers multiplying exact polynomials may pass a larger degree.
        """
        if degree is None:
            degree = min(self.degree, other.degree)
        n = ncoeffs(degree)
        clo = np.zeros(n)
        chi = np.zeros(n)
        _kernels.mul_into(self.lo, self.hi, self.degree, other.lo, other.hi, other.degree, clo, chi, degree)
        return TruncatedSeries2(degree, clo, chi)

    # -- filters ----------------------------------------------------------

    def filter_v(self, l: int) -> "TruncatedSeries2":
        return self._filtered(l, keep_v=True)

    def filter_u(self, l: int) -> "TruncatedSeries2":
        return self._filtered(l, keep_v=False)

    def _filtered(self, l: int, keep_v: bool) -> "TruncatedSeries2":
        mask = _vl_mask(self.degree, l) if keep_v else ~_vl_mask(self.degree, l)
        mask = mask & _order_ge2_mask(self.degree)
        lo = np.where(mask, self.lo, 0.0)
        hi = np.where(mask, self.hi, 0.0)
        return TruncatedSeries2(self.degree, lo, hi)

    def nonlinear_part(self) -> "TruncatedSeries2":
        """Copy with orders 0 and 1 dropped."""
        mask = _order_ge2_mask(self.degree)
        return TruncatedSeries2(self.degree, np.where(mask, self.lo, 0.0), np.where(mask, self.hi, 0.0))


def _order_of_flat(j: int) -> int:
    """Total order of the multi-index stored at flat position j."""
    k = (math.isqrt(8 * j + 1) - 1) // 2
    while tri(k + 1) <= j:
        k += 1
    while tri(k) > j:
        k -= 1
    return k


_MASK_CACHE: dict[tuple[int, int], np.ndarray] = {}
_GE2_CACHE: dict[int, np.ndarray] = {}


def _vl_mask(degree: int, l: int) -> np.ndarray:
    key = (degree, l)
    m = _MASK_CACHE.get(key)
    if m is None:
        n = ncoeffs(degree)
        m = np.zeros(n, dtype=bool)
        for k in range(degree + 1):
            base = tri(k)
            for mu in range(k + 1):
                ms = k - mu
                m[base + mu] = ms < l or mu < l
        _MASK_CACHE[key] = _frozen(m)
    return m


def _order_ge2_mask(degree: int) -> np.ndarray:
    m = _GE2_CACHE.get(degree)
    if m is None:
        m = np.ones(ncoeffs(degree), dtype=bool)
        m[: ncoeffs(min(1, degree))] = False
        _GE2_CACHE[degree] = _frozen(m)
    return m


# -- polynomial evaluation at series arguments ------------------------------


def eval_poly_at(
    terms: Mapping[tuple[int, int], Interval] | "TruncatedSeries2",
    sub_s: TruncatedSeries2,
    sub_u: TruncatedSeries2,
    degree: int,
) -> TruncatedSeries2:
    """Truncation of ``p(sub_s, sub_u)`` for a polynomial p given by its terms."""
    if isinstance(terms, TruncatedSeries2):
        terms = {tuple(m): c for m, c in terms.iter_nonzero()}
    max_ms = max((m[0] for m in terms), default=0)
    max_mu = max((m[1] for m in terms), default=0)
    pow_s = _powers(sub_s, max_ms, degree)
    pow_u = _powers(sub_u, max_mu, degree)
    out = TruncatedSeries2.zero(degree)
    for (ms, mu), c in terms.items():
        if ms > 0 and mu > 0:
            t = pow_s[ms].mul(pow_u[mu], degree).scale(c)
        elif ms > 0:
            t = pow_s[ms].scale(c)
        elif mu > 0:
            t = pow_u[mu].scale(c)
        else:
            t = TruncatedSeries2.from_terms(degree, {(0, 0): c})
        out = out + t
    return out


def _powers(base: TruncatedSeries2, n: int, degree: int) -> list:
    out: list = [None] * (n + 1)
    if n >= 1:
        out[1] = base.truncated(degree) if base.degree > degree else base
    for j in range(2, n + 1):
        out[j] = out[j - 1].mul(out[1], degree)
    return out


def compose_shift(
    f_component: TruncatedSeries2,
    phi_s: TruncatedSeries2,
    phi_u: TruncatedSeries2,
    degree: int,
) -> TruncatedSeries2:
    """Degree-``degree`` truncation of ``f(x + phi(x))``.

    f must have no terms of order < 2 and phi none of order < 2; then the
    order-k output coefficients depend only on phi orders < k.
    """
    if f_component.min_order() < 2:
        raise ValueError("nonlinearity has terms of order < 2")
    for p in (phi_s, phi_u):
        if not p.is_zero() and p.min_order() < 2:
            raise ValueError("shift has terms of order < 2")
    shift_s = TruncatedSeries2.variable("s", degree) + phi_s.truncated(degree)
    shift_u = TruncatedSeries2.variable("u", degree) + phi_u.truncated(degree)
    return eval_poly_at(f_component, shift_s, shift_u, degree)


# -- univariate majorants ----------------------------------------------------


@dataclass(frozen=True, slots=True)
class MajorantSeries1:
    """Univariate series with nonnegative interval coefficients."""

    degree: int
    coeffs: tuple[Interval, ...]  # index = order, length degree+1

    def __post_init__(self) -> None:
        if len(self.coeffs) != self.degree + 1:
            raise ValueError("coefficient count does not match degree")
        # Every majorant coefficient is a nonnegative real, so flooring the
        # lower endpoint at 0 preserves containment; a substantially negative
        # endpoint is a caller bug, not rounding slop.
        fixed = []
        for k, c in enumerate(self.coeffs):
            if c.lo < 0.0:
                if c.lo < -1e-12 * max(1.0, abs(c.hi)):
                    raise ValueError(f"negative majorant coefficient at order {k}: {c}")
                c = Interval(0.0, c.hi)
            fixed.append(c)
        object.__setattr__(self, "coeffs", tuple(fixed))

    @classmethod
    def zero(cls, degree: int) -> "MajorantSeries1":
        return cls(degree, (ZERO,) * (degree + 1))

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[Interval]) -> "MajorantSeries1":
        return cls(len(coeffs) - 1, tuple(coeffs))

    def coeff(self, k: int) -> Interval:
        return self.coeffs[k] if 0 <= k <= self.degree else ZERO

    def with_coeff(self, k: int, c: Interval) -> "MajorantSeries1":
        cs = list(self.coeffs)
        cs[k] = c
        return MajorantSeries1(self.degree, tuple(cs))

    def truncated(self, degree: int) -> "MajorantSeries1":
        cs = [self.coeff(k) for k in range(degree + 1)]
        return MajorantSeries1(degree, tuple(cs))

    def __add__(self, other: "MajorantSeries1") -> "MajorantSeries1":
        d = min(self.degree, other.degree)
        return MajorantSeries1(d, tuple(self.coeffs[k] + other.coeffs[k] for k in range(d + 1)))

    def mul(self, other: "MajorantSeries1", degree: int) -> "MajorantSeries1":
        out = [ZERO] * (degree + 1)
        for i in range(min(self.degree, degree) + 1):
            a = self.coeffs[i]
            if a.hi == 0.0:
                continue
            for j in range(min(other.degree, degree - i) + 1):
                b = other.coeffs[j]
                if b.hi == 0.0:
                    continue
                out[i + j] = out[i + j] + a * b
        return MajorantSeries1(degree, tuple(out))

    def deriv(self) -> "MajorantSeries1":
        """Formal derivative: order k-1 coefficient is k * coeff(k)."""
        if self.degree == 0:
            return MajorantSeries1.zero(0)
        cs = [self.coeffs[k + 1] * (k + 1) for k in range(self.degree)]
        return MajorantSeries1(self.degree - 1, tuple(cs))

    def eval_at(self, r: Interval) -> Interval:
        """Enclosure of the truncated sum at radius r >= 0."""
        total = ZERO
        rk = Interval(1.0, 1.0)
        for k, c in enumerate(self.coeffs):
            if k > 0:
                rk = rk * r
            if c.hi != 0.0:
                total = total + c * rk
        return total

    def is_zero(self) -> bool:
        return all(c.hi == 0.0 for c in self.coeffs)


def majorant_collapse(a_s: TruncatedSeries2, a_u: TruncatedSeries2) -> MajorantSeries1:
    """Order-wise sum of max component magnitudes: a majorant of both inputs.

    Coefficient k encloses sum_{|m|=k} max(|a_s[m]|, |a_u[m]|), taking the
    magnitude of each interval coefficient (an upper bound on any point value
    the coefficient can have).
    """
    if a_s.degree != a_u.degree:
        raise ValueError("majorant collapse requires equal degrees")
    out = []
    for k in range(a_s.degree + 1):
        base = tri(k)
        lo, hi = 0.0, 0.0
        for j in range(base, base + k + 1):
            m = max(abs(a_s.lo[j]), abs(a_s.hi[j]), abs(a_u.lo[j]), abs(a_u.hi[j]))
            if m != 0.0:
                lo = _add_down(lo, m)
                hi = _add_up(hi, m)
        out.append(Interval(max(lo, 0.0), hi))
    return MajorantSeries1.from_coeffs(out)


def magnitude_collapse_terms(
    terms_s: Mapping[tuple[int, int], Interval],
    terms_u: Mapping[tuple[int, int], Interval],
    degree: int,
) -> MajorantSeries1:
    """Same collapse computed from sparse term maps (used for the field itself)."""
    lo = [0.0] * (degree + 1)
    hi = [0.0] * (degree + 1)
    per_index: dict[tuple[int, int], float] = {}
    for terms in (terms_s, terms_u):
        for m, c in terms.items():
            per_index[m] = max(per_index.get(m, 0.0), c.mag())
    for (ms, mu), mg in per_index.items():
        k = ms + mu
        if k <= degree and mg != 0.0:
            lo[k] = _add_down(lo[k], mg)
            hi[k] = _add_up(hi[k], mg)
    return MajorantSeries1.from_coeffs([Interval(max(a, 0.0), b) for a, b in zip(lo, hi)])


def eval_poly_uni(terms: Mapping[int, Interval], w: MajorantSeries1, degree: int) -> MajorantSeries1:
    """Truncation of ``p(w(x))`` for a univariate polynomial given by order->coeff."""
    max_k = max(terms, default=0)
    pow_w: list[MajorantSeries1 | None] = [None] * (max_k + 1)
    if max_k >= 1:
        pow_w[1] = w.truncated(degree)
    for j in range(2, max_k + 1):
        pow_w[j] = pow_w[j - 1].mul(w, degree)  # type: ignore[union-attr]
    out = MajorantSeries1.zero(degree)
    for k, c in terms.items():
        if c.hi == 0.0 and c.lo == 0.0:
            continue
        if k == 0:
            out = out.with_coeff(0, out.coeff(0) + c)
        else:
            pw = pow_w[k]
            scaled = MajorantSeries1(degree, tuple(cc * c for cc in pw.coeffs))  # type: ignore[union-attr]
            out = out + scaled
    return out
