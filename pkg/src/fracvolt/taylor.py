"""Finite Taylor series and the weight-induced fractional calculus.

A series is a finite complex coefficient vector; index n holds the
coefficient of z^n.  The fractional derivative divides coefficient n by the
odd moment mu_{2n+1} of the driving weight, the fractional integral
multiplies by it, and the two-weight operator scales by the ratio of odd
moments of its numerator and denominator weights.  All operators act
coefficient-wise, so everything here is exact linear algebra on the cached
moment tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .weights import RadialWeight

Complexish = Union[complex, float]


@dataclass(frozen=True)
class TaylorSeries:
    """Immutable finite Taylor coefficient vector."""

    coefficients: tuple

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[Complexish]) -> "TaylorSeries":
        arr = np.asarray(coeffs, dtype=complex)
        if arr.ndim != 1 or len(arr) == 0:
            raise ValueError("coefficients must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite")
        # strip trailing zeros, keep at least the constant term
        n = len(arr)
        while n > 1 and arr[n - 1] == 0:
            n -= 1
        return cls(tuple(arr[:n]))

    @classmethod
    def monomial(cls, n: int, c: Complexish = 1.0) -> "TaylorSeries":
        coeffs = [0.0] * n + [c]
        return cls.from_coeffs(coeffs)

    @classmethod
    def zero(cls) -> "TaylorSeries":
        return cls((0j,))

    @property
    def coeffs(self) -> np.ndarray:
        return np.asarray(self.coefficients, dtype=complex)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for c in self.coefficients[::-1]:
            out = out * z + c
        return out if out.ndim else complex(out)

    def __add__(self, other: "TaylorSeries") -> "TaylorSeries":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = a.copy()
        out[: len(b)] += b
        return TaylorSeries.from_coeffs(out)

    def __sub__(self, other: "TaylorSeries") -> "TaylorSeries":
        return self + other.scale(-1.0)

    def scale(self, c: Complexish) -> "TaylorSeries":
        return TaylorSeries.from_coeffs(self.coeffs * c)

    def derivative(self, order: int = 1) -> "TaylorSeries":
        c = self.coeffs
        for _ in range(order):
            if len(c) == 1:
                c = np.zeros(1, dtype=complex)
                break
            c = c[1:] * np.arange(1, len(c))
        return TaylorSeries.from_coeffs(c)

    def shift(self, n: int) -> "TaylorSeries":
        """Multiply by z^n."""
        return TaylorSeries.from_coeffs(
            np.concatenate([np.zeros(n, dtype=complex), self.coeffs]))

    def truncate(self, n: int) -> "TaylorSeries":
        return TaylorSeries.from_coeffs(self.coeffs[: n + 1])

    def to_json(self) -> str:
        import json
        return json.dumps([[c.real, c.imag] for c in self.coefficients])

    @classmethod
    def from_json(cls, text: str) -> "TaylorSeries":
        import json
        pairs = json.loads(text)
        return cls.from_coeffs([complex(re, im) for re, im in pairs])


def frac_derivative(f: TaylorSeries, w: RadialWeight) -> TaylorSeries:
    """Coefficient n -> f_n / mu_{2n+1}."""
    mus = w.odd_moments(f.degree + 1)
    return TaylorSeries.from_coeffs(f.coeffs / mus)


def frac_integral(f: TaylorSeries, w: RadialWeight) -> TaylorSeries:
    """Coefficient n -> mu_{2n+1} f_n; exact inverse of frac_derivative."""
    mus = w.odd_moments(f.degree + 1)
    return TaylorSeries.from_coeffs(f.coeffs * mus)


def frac_R(f: TaylorSeries, w_num: RadialWeight, w_den: RadialWeight) -> TaylorSeries:
    """Coefficient n -> (num_{2n+1} / den_{2n+1}) f_n."""
    num = w_num.odd_moments(f.degree + 1)
    den = w_den.odd_moments(f.degree + 1)
    return TaylorSeries.from_coeffs(f.coeffs * num / den)


def cauchy_product(f: TaylorSeries, g: TaylorSeries, truncation: int = None) -> TaylorSeries:
    """Coefficient m -> sum_{k<=m} f_k g_{m-k}, truncated at ``truncation``."""
    full = np.convolve(f.coeffs, g.coeffs)
    if truncation is not None:
        if truncation < 0:
            raise ValueError("truncation must be >= 0")
        full = full[: truncation + 1]
    return TaylorSeries.from_coeffs(full)


def monomial_norm_sq(w: RadialWeight, n: int) -> float:
    """||z^n||^2 in the weighted Bergman space: 2 mu_{2n+1} (dA normalised)."""
    return 2.0 * w.moment(2 * n + 1)


def inner_product(f: TaylorSeries, g: TaylorSeries, w: RadialWeight) -> complex:
    """<f, g> in A^2_w via orthogonality of monomials."""
    n = min(f.degree, g.degree) + 1
    mus = w.odd_moments(n)
    return complex(np.sum(f.coeffs[:n] * np.conj(g.coeffs[:n]) * 2.0 * mus))


@dataclass(frozen=True)
class KernelSlice:
    """Reproducing kernel of A^2_w anchored at z, truncated to N terms."""

    weight: RadialWeight
    z: complex
    truncation: int

    def coefficients(self) -> np.ndarray:
        mus = self.weight.odd_moments(self.truncation + 1)
        n = np.arange(self.truncation + 1)
        return np.conj(self.z) ** n / (2.0 * mus)

    def series(self) -> TaylorSeries:
        return TaylorSeries.from_coeffs(self.coefficients())


def kernel_eval(k: KernelSlice, zeta, N: int = None):
    """Partial kernel sum sum_{n<=N} (conj(z) zeta)^n / (2 mu_{2n+1}).

    Returns (value, tail_bound); the bound extrapolates the last term
    geometrically and is infinite when the term ratio has not dropped
    below 1.
    """
    N = k.truncation if N is None else min(N, k.truncation)
    mus = k.weight.odd_moments(N + 1)
    zeta = complex(zeta)
    t = np.conj(k.z) * zeta
    if abs(t) >= 1.0:
        raise ValueError("kernel series needs |conj(z) zeta| < 1")
    terms = t ** np.arange(N + 1) / (2.0 * mus)
    value = complex(np.sum(terms))
    if N >= 1 and abs(terms[N - 1]) > 0:
        q = abs(terms[N]) / abs(terms[N - 1])
        tail = abs(terms[N]) * q / (1.0 - q) if q < 1.0 else np.inf
    else:
        tail = abs(terms[N]) if N >= 0 else np.inf
    return value, float(tail)


_star_cache: dict = {}
_viter_cache: dict = {}


def _star_iterate(n: int) -> RadialWeight:
    if n not in _star_cache:
        from .weights import StandardWeight
        _star_cache[n] = StandardWeight(1.0).iterate_star(n)
    return _star_cache[n]


def _v_iterate_of_mu_plus(w: RadialWeight, n: int) -> RadialWeight:
    key = (id(w), n)
    if key not in _viter_cache:
        _viter_cache[key] = w.mu_plus().iterate_V(n)
    return _viter_cache[key]


def frac_rep_identity_check(f: TaylorSeries, w: RadialWeight, n: int,
                            z_grid=None) -> float:
    """Residual of the n-th order representation of the fractional derivative.

    Left side: D(f) through the coefficient multipliers 1/mu_{2j+1}.
    Right side: the head sum_{j<n} f_j / mu_{2j+1} z^j plus
    4^n z^n R^{W_n, V_n}(f^(n)) built from the star-iterates of the constant
    weight and the V-iterates of mu_plus, whose moments come from nested
    quadrature -- an independent computational path.  A large residual
    signals a normalisation bug in the moment bookkeeping.
    """
    if n not in (1, 2):
        raise ValueError("representation identity implemented for n in {1, 2}")
    lhs = frac_derivative(f, w)

    w_star = _star_iterate(n)
    v_iter = _v_iterate_of_mu_plus(w, n)

    fn = f.derivative(n)
    rn = frac_R(fn, w_star, v_iter)
    head = TaylorSeries.from_coeffs(
        f.coeffs[:n] / w.odd_moments(min(n, f.degree + 1)))
    rhs = head + rn.shift(n).scale(4.0 ** n)

    if z_grid is None:
        radii = np.array([0.0, 0.2, 0.4, 0.6, 0.8])
        angles = np.exp(1j * np.linspace(0.0, 2 * np.pi, 8, endpoint=False))
        z_grid = (radii[:, None] * angles[None, :]).ravel()
    diff = lhs(z_grid) - rhs(z_grid)
    return float(np.max(np.abs(diff)))
