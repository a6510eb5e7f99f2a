"""Trigonometric-polynomial families of expanding circle maps and observables.

A family is described by its lift

    L_tau(x) = d*x + C(tau) + sum_k [A_k(tau) sin(2 pi k x) + B_k(tau) cos(2 pi k x)]

where every coefficient is a polynomial in ``tau`` (ascending powers).  The
circle is the fundamental domain [0, 1).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import isfinite
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .exceptions import DomainError, NotExpandingError

TWO_PI = 2.0 * np.pi


def wrap(x):
    """Reduce ``x`` modulo 1 into [0, 1); values that round up to 1 go to 0."""
    r = np.mod(x, 1.0)
    r = np.where(r >= 1.0, 0.0, r)
    if np.ndim(r) == 0:
        return float(r)
    return r


def circle_distance(x, y):
    d = np.abs(np.mod(np.asarray(x) - np.asarray(y), 1.0))
    return np.minimum(d, 1.0 - d)


def _poly(coeffs) -> tuple[float, ...]:
    c = tuple(float(v) for v in coeffs)
    return c if c else (0.0,)


def _polyval(coeffs: Sequence[float], tau: float) -> float:
    # Horner, ascending coefficients
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * tau + c
    return acc


def _polyder_at0(coeffs: Sequence[float]) -> float:
    return coeffs[1] if len(coeffs) > 1 else 0.0


def _max_abs_on_interval(coeffs: Sequence[float], lo: float, hi: float) -> float:
    p = Polynomial(coeffs)
    candidates = [lo, hi]
    if p.degree() >= 2:
        for r in p.deriv().roots():
            if abs(r.imag) < 1e-12 and lo <= r.real <= hi:
                candidates.append(r.real)
    return max(abs(p(t)) for t in candidates)


def _harmonic_sums(sin_c, cos_c, x, order):
    """Return the ``order``-th x-derivative of sum_k a_k sin(2pi k x) + b_k cos(2pi k x)."""
    x = np.asarray(x, dtype=float)
    frac = x - np.floor(x)
    out = np.zeros_like(frac)
    for k, (a, b) in enumerate(zip(sin_c, cos_c), start=1):
        if a == 0.0 and b == 0.0:
            continue
        w = TWO_PI * k
        s = np.sin(w * frac)
        c = np.cos(w * frac)
        if order == 0:
            out += a * s + b * c
        elif order == 1:
            out += w * (a * c - b * s)
        elif order == 2:
            out -= w * w * (a * s + b * c)
        else:
            raise ValueError("order must be 0, 1 or 2")
    return out


def _pad(seq, size):
    return tuple(seq) + (0.0,) * (size - len(seq))


@dataclass(frozen=True)
class TrigMapFamily:
    """A tau-parameterised family of orientation-preserving expanding circle maps.

    Parameters
    ----------
    degree : int
        Topological degree ``d >= 2``.
    sin_coeffs, cos_coeffs : sequence of sequence of float
        ``sin_coeffs[k-1]`` holds the ascending tau-polynomial coefficients of
        ``A_k``; likewise ``cos_coeffs`` for ``B_k``.  Missing harmonics are zero.
    constant : sequence of float
        Tau-polynomial coefficients of ``C``.
    tau_domain : (float, float)
        Closed interval of admissible parameters.
    """

    degree: int
    sin_coeffs: tuple = ()
    cos_coeffs: tuple = ()
    constant: tuple = (0.0,)
    tau_domain: tuple = (-0.1, 0.1)
    _n_harm: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 2:
            raise ValueError(f"degree must be an integer >= 2, got {self.degree!r}")
        n_harm = max(len(self.sin_coeffs), len(self.cos_coeffs))
        sin_c = tuple(_poly(c) for c in self.sin_coeffs)
        cos_c = tuple(_poly(c) for c in self.cos_coeffs)
        sin_c += ((0.0,),) * (n_harm - len(sin_c))
        cos_c += ((0.0,),) * (n_harm - len(cos_c))
        lo, hi = (float(v) for v in self.tau_domain)
        if not (isfinite(lo) and isfinite(hi) and lo <= hi):
            raise ValueError(f"tau_domain must be a finite interval, got {self.tau_domain!r}")
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "sin_coeffs", sin_c)
        object.__setattr__(self, "cos_coeffs", cos_c)
        object.__setattr__(self, "constant", _poly(self.constant))
        object.__setattr__(self, "tau_domain", (lo, hi))
        object.__setattr__(self, "_n_harm", n_harm)

    # -- constructors for the families used throughout the tests and demos --

    @classmethod
    def linear(cls, degree=2, tau_domain=(-0.1, 0.1)):
        """The map x -> d x mod 1, independent of tau."""
        return cls(degree=degree, tau_domain=tau_domain)

    @classmethod
    def sine_perturbation(cls, degree=2, harmonic=1, tau_domain=(-0.1, 0.1)):
        """``L(x) = d x + tau sin(2 pi k x) / (2 pi k)``, so that dL/dtau has derivative cos."""
        sin_c = [(0.0,)] * (harmonic - 1) + [(0.0, 1.0 / (TWO_PI * harmonic))]
        return cls(degree=degree, sin_coeffs=tuple(sin_c), tau_domain=tau_domain)

    @classmethod
    def constant_shift(cls, degree=2, shift=1.0, tau_domain=(-0.1, 0.1)):
        return cls(degree=degree, constant=(0.0, shift), tau_domain=tau_domain)

    @property
    def n_harmonics(self) -> int:
        return self._n_harm

    def check_tau(self, tau: float) -> None:
        lo, hi = self.tau_domain
        if not (lo <= tau <= hi):
            raise DomainError(f"tau={tau!r} outside tau_domain [{lo}, {hi}]")

    def coefficients(self, tau: float):
        """Values ``(C, A, B)`` of the coefficient polynomials at ``tau``."""
        c = _polyval(self.constant, tau)
        a = tuple(_polyval(p, tau) for p in self.sin_coeffs)
        b = tuple(_polyval(p, tau) for p in self.cos_coeffs)
        return c, a, b

    def tau_derivative_coefficients(self):
        """Coefficients of dL/dtau at tau = 0."""
        c = _polyder_at0(self.constant)
        a = tuple(_polyder_at0(p) for p in self.sin_coeffs)
        b = tuple(_polyder_at0(p) for p in self.cos_coeffs)
        return c, a, b

    def rebase(self, tau0: float) -> "TrigMapFamily":
        """Return the family reparameterised so that its tau = 0 is our tau0.

        Exact for polynomial coefficients (substitution tau <- tau0 + tau).
        """
        self.check_tau(tau0)
        if tau0 == 0.0:
            return self
        shift = Polynomial([tau0, 1.0])

        def sub(coeffs):
            return tuple(Polynomial(coeffs)(shift).coef)

        lo, hi = self.tau_domain
        return TrigMapFamily(
            degree=self.degree,
            sin_coeffs=tuple(sub(p) for p in self.sin_coeffs),
            cos_coeffs=tuple(sub(p) for p in self.cos_coeffs),
            constant=sub(self.constant),
            tau_domain=(lo - tau0, hi - tau0),
        )


@dataclass(frozen=True)
class Observable:
    """Real trigonometric polynomial ``g(x) = c0 + sum_k s_k sin(2pi k x) + c_k cos(2pi k x)``."""

    constant: float = 0.0
    sin_coeffs: tuple = ()
    cos_coeffs: tuple = ()

    def __post_init__(self):
        n = max(len(self.sin_coeffs), len(self.cos_coeffs))
        object.__setattr__(self, "constant", float(self.constant))
        object.__setattr__(self, "sin_coeffs", tuple(float(v) for v in _pad(self.sin_coeffs, n)))
        object.__setattr__(self, "cos_coeffs", tuple(float(v) for v in _pad(self.cos_coeffs, n)))

    @classmethod
    def cosine(cls, k=1, amplitude=1.0):
        return cls(cos_coeffs=(0.0,) * (k - 1) + (amplitude,))

    @classmethod
    def sine(cls, k=1, amplitude=1.0):
        return cls(sin_coeffs=(0.0,) * (k - 1) + (amplitude,))

    @classmethod
    def const(cls, c):
        return cls(constant=c)

    @property
    def is_constant(self) -> bool:
        return not any(self.sin_coeffs) and not any(self.cos_coeffs)

    def __call__(self, x):
        return self.constant + _harmonic_sums(self.sin_coeffs, self.cos_coeffs, x, 0)

    def derivative(self, x):
        return _harmonic_sums(self.sin_coeffs, self.cos_coeffs, x, 1)


def eval_lift(family: TrigMapFamily, tau: float, x):
    """Value of the lift ``L_tau(x)``; ``wrap`` of it is ``T_tau(x)``."""
    family.check_tau(tau)
    c, a, b = family.coefficients(tau)
    x = np.asarray(x, dtype=float)
    out = family.degree * x + c + _harmonic_sums(a, b, x, 0)
    return float(out) if out.ndim == 0 else out


def eval_jet(family: TrigMapFamily, tau: float, x):
    """Return ``(L, L', L'')`` at ``x``, all analytic."""
    family.check_tau(tau)
    c, a, b = family.coefficients(tau)
    x = np.asarray(x, dtype=float)
    t0 = family.degree * x + c + _harmonic_sums(a, b, x, 0)
    t1 = family.degree + _harmonic_sums(a, b, x, 1)
    t2 = _harmonic_sums(a, b, x, 2)
    if t0.ndim == 0:
        return float(t0), float(t1), float(t2)
    return t0, t1, t2


def eval_tau_jet(family: TrigMapFamily, x):
    """Return ``(X, X')`` where ``X = dL_tau/dtau`` at tau = 0."""
    c, a, b = family.tau_derivative_coefficients()
    x = np.asarray(x, dtype=float)
    X = c + _harmonic_sums(a, b, x, 0)
    X1 = _harmonic_sums(a, b, x, 1)
    if X.ndim == 0:
        return float(X), float(X1)
    return X, X1


def expansion_bound(family: TrigMapFamily) -> float:
    """Certified lower bound on ``L_tau'(x)`` over the whole tau_domain.

    Uses ``d - sum_k 2 pi k (max|A_k| + max|B_k|)`` with each maximum taken
    exactly over tau_domain (endpoints and critical points).

    Raises
    ------
    NotExpandingError
        If the bound does not exceed 1.
    """
    lo, hi = family.tau_domain
    loss = 0.0
    for k, (pa, pb) in enumerate(zip(family.sin_coeffs, family.cos_coeffs), start=1):
        loss += TWO_PI * k * (_max_abs_on_interval(pa, lo, hi) + _max_abs_on_interval(pb, lo, hi))
    bound = family.degree - loss
    if not bound > 1.0:
        raise NotExpandingError(
            f"not uniformly expanding: coefficient bound on min L' is {bound:.6g} <= 1"
        )
    return bound


_TWO_PI_LD = np.longdouble("6.28318530717958647692528676655900577")


def eval_lift_extended(family: TrigMapFamily, tau: float, x):
    """``(L, L')`` evaluated in extended (long double) precision.

    Used for fixed-point residuals, where ``(T^n)'`` amplifies double rounding.
    """
    c, a, b = family.coefficients(tau)
    x = np.asarray(x, dtype=np.longdouble)
    frac = x - np.floor(x)
    val = family.degree * x + np.longdouble(c)
    der = np.full_like(x, family.degree)
    for k, (ak, bk) in enumerate(zip(a, b), start=1):
        if ak == 0.0 and bk == 0.0:
            continue
        w = _TWO_PI_LD * k
        s = np.sin(w * frac)
        co = np.cos(w * frac)
        ak = np.longdouble(ak)
        bk = np.longdouble(bk)
        val = val + ak * s + bk * co
        der = der + w * (ak * co - bk * s)
    return val, der
