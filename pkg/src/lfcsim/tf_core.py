"""Polynomial transfer-function algebra and state-space realization.

Coefficients are stored in ascending powers of ``s``: ``coeffs[k]``
multiplies ``s**k``, so the constant term is always ``coeffs[0]``.
Every value here is immutable.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import AlgebraicLoopError, PoleAtOriginError

#: relative magnitude below which a coefficient is treated as zero
TRIM_TOL = 1e-12


def _canonical(coeffs) -> tuple:
    c = np.asarray(coeffs, dtype=float).ravel()
    if c.size == 0:
        return (0.0,)
    if not np.all(np.isfinite(c)):
        raise ValueError(f"non-finite polynomial coefficients: {c!r}")
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return (0.0,)
    c = np.where(np.abs(c) < TRIM_TOL * scale, 0.0, c)
    nz = np.flatnonzero(c)
    c = c[: nz[-1] + 1]
    # +0.0 folds any -0.0 left by the sign flips in feedback/parallel
    return tuple(float(v) + 0.0 for v in c)


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial in ``s`` with ascending coefficients, trimmed."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _canonical(self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    @property
    def leading(self) -> float:
        return self.coeffs[-1]

    def __call__(self, s):
        return P.polyval(s, self.coeffs)

    def roots(self) -> np.ndarray:
        if self.degree < 1:
            return np.array([], dtype=complex)
        return P.polyroots(self.coeffs)

    def scale(self, k: float) -> "Polynomial":
        return Polynomial([k * c for c in self.coeffs])

    def __mul__(self, other):
        return poly_mul(self, _as_poly(other))

    def __add__(self, other):
        return poly_add(self, _as_poly(other))

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other):
        return poly_add(self, -_as_poly(other))

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)})"


PolyLike = Union[Polynomial, Sequence[float], float, int]


def _as_poly(p: PolyLike) -> Polynomial:
    if isinstance(p, Polynomial):
        return p
    if np.isscalar(p):
        return Polynomial([p])
    return Polynomial(p)


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    """Product of two polynomials (coefficient convolution)."""
    return Polynomial(np.convolve(a.coeffs, b.coeffs))


def poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    n = max(len(a.coeffs), len(b.coeffs))
    out = np.zeros(n)
    out[: len(a.coeffs)] += a.coeffs
    out[: len(b.coeffs)] += b.coeffs
    return Polynomial(out)


@dataclass(frozen=True)
class TransferFunction:
    """Proper SISO rational function ``num(s) / den(s)``.

    Both arguments take ascending coefficient sequences (or
    :class:`Polynomial`). The denominator is normalized to be monic on
    construction, which makes structural equality meaningful.

    >>> TransferFunction([1], [0.8, 10])
    TransferFunction(num=[0.1], den=[0.08, 1.0])
    """

    num: Polynomial
    den: Polynomial

    def __post_init__(self):
        num, den = _as_poly(self.num), _as_poly(self.den)
        if den.is_zero:
            raise ValueError("denominator is identically zero")
        if num.degree > den.degree and not num.is_zero:
            raise ValueError(
                f"improper transfer function: deg num {num.degree} > deg den {den.degree}"
            )
        lead = den.leading
        if lead != 1.0:
            # divide rather than multiply by 1/lead so the leading term is exactly 1
            num = Polynomial([c / lead for c in num.coeffs])
            den = Polynomial([c / lead for c in den.coeffs])
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def gain(cls, k: float) -> "TransferFunction":
        return cls([k], [1.0])

    @property
    def order(self) -> int:
        return self.den.degree

    @property
    def is_strictly_proper(self) -> bool:
        return self.num.is_zero or self.num.degree < self.den.degree

    def __call__(self, s):
        return self.num(s) / self.den(s)

    def poles(self) -> np.ndarray:
        return self.den.roots()

    def zeros(self) -> np.ndarray:
        return self.num.roots()

    def isclose(self, other: "TransferFunction", rtol: float = 1e-9, atol: float = 0.0) -> bool:
        """Coefficient-wise comparison, scaled by the largest coefficient."""
        for p, q in ((self.num, other.num), (self.den, other.den)):
            n = max(len(p.coeffs), len(q.coeffs))
            a = np.pad(p.coeffs, (0, n - len(p.coeffs)))
            b = np.pad(q.coeffs, (0, n - len(q.coeffs)))
            scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
            if np.max(np.abs(a - b)) > rtol * scale + atol:
                return False
        return True

    def __mul__(self, other):
        return series(self, _as_tf(other))

    __rmul__ = __mul__

    def __add__(self, other):
        return parallel(self, _as_tf(other), +1)

    __radd__ = __add__

    def __sub__(self, other):
        return parallel(self, _as_tf(other), -1)

    def __neg__(self):
        return TransferFunction(-self.num, self.den)

    def __repr__(self):
        return f"TransferFunction(num={list(self.num.coeffs)}, den={list(self.den.coeffs)})"


def _as_tf(g) -> TransferFunction:
    if isinstance(g, TransferFunction):
        return g
    return TransferFunction.gain(float(g))


def series(g1: TransferFunction, g2: TransferFunction) -> TransferFunction:
    """Cascade ``g1`` then ``g2``."""
    return TransferFunction(g1.num * g2.num, g1.den * g2.den)


def parallel(g1: TransferFunction, g2: TransferFunction, sign: int = +1) -> TransferFunction:
    """``g1 + sign * g2`` over a common denominator."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    num = g1.num * g2.den + (g2.num * g1.den).scale(sign)
    return TransferFunction(num, g1.den * g2.den)


def feedback(forward: TransferFunction, back: TransferFunction, sign: int = +1) -> TransferFunction:
    """Closed loop ``forward / (1 + sign * forward * back)``.

    ``sign=+1`` is the usual negative-feedback loop.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    back = _as_tf(back)
    num = forward.num * back.den
    den = forward.den * back.den + (forward.num * back.num).scale(sign)
    if den.is_zero:
        raise AlgebraicLoopError("closed-loop denominator is identically zero")
    if not num.is_zero and num.degree > den.degree:
        raise AlgebraicLoopError("closed loop is improper (1 + G*H vanishes at infinity)")
    return TransferFunction(num, den)


def dc_gain(g: TransferFunction) -> float:
    """Static gain ``G(0)``; raises :class:`PoleAtOriginError` for integrators."""
    d0 = g.den.coeffs[0]
    if d0 == 0.0:
        raise PoleAtOriginError(f"{g!r} has a pole at s = 0")
    return g.num.coeffs[0] / d0


@dataclass(frozen=True, eq=False)
class StateSpace:
    """Continuous-time realization ``x' = A x + B u``, ``y = C x + D u``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = A.shape[0] if A.size else 0
        A = A.reshape(n, n)
        B = np.asarray(self.B, dtype=float)
        C = np.asarray(self.C, dtype=float)
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        m, p = D.shape[1], D.shape[0]
        B = B.reshape(n, m)
        C = C.reshape(p, n)
        for name, arr in zip("ABCD", (A, B, C, D)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.D.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.D.shape[0]


def to_state_space(g: TransferFunction) -> StateSpace:
    """Controllable canonical (companion) realization of ``g``.

    For ``den = s^n + a[n-1] s^(n-1) + ... + a[0]`` and numerator ``b``
    padded to length ``n+1``: the last row of A is ``-a``, ``B = e_n``,
    ``C[i] = b[i] - b[n] a[i]`` and ``D = b[n]``.
    """
    a = np.asarray(g.den.coeffs)
    n = len(a) - 1
    b = np.zeros(n + 1)
    b[: len(g.num.coeffs)] = g.num.coeffs
    A = np.zeros((n, n))
    if n:
        A[:-1, 1:] = np.eye(n - 1)
        A[-1, :] = -a[:n]
    B = np.zeros((n, 1))
    if n:
        B[-1, 0] = 1.0
    C = (b[:n] - b[n] * a[:n]).reshape(1, n)
    return StateSpace(A, B, C, [[b[n]]])
