"""Complex discounts, complex returns and frequency banks.

A discount ``gamma = A * exp(-i * omega)`` weights the k-th future reward by
``A**k * exp(-i * omega * k)``.  With ``A == 1`` the return is one term of the
discrete Fourier transform of the reward sequence; with ``A < 1`` it is the
transform of the exponentially windowed sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * math.pi


def _unit(theta: float) -> complex:
    """exp(-i*theta) for theta in [0, 2pi), exact on the four axis points."""
    if theta == 0.0:
        return complex(1.0, 0.0)
    if theta == math.pi / 2:
        return complex(0.0, -1.0)
    if theta == math.pi:
        return complex(-1.0, 0.0)
    if theta == 3 * math.pi / 2:
        return complex(0.0, 1.0)
    return complex(math.cos(theta), -math.sin(theta))


def _root_of_unity(j: int, m: int) -> complex:
    """exp(-2*pi*i*j/m) with members j and m-j exact conjugates."""
    j %= m
    if 2 * j > m:
        return _root_of_unity(m - j, m).conjugate()
    if j == 0:
        return complex(1.0, 0.0)
    if 2 * j == m:
        return complex(-1.0, 0.0)
    if 4 * j == m:
        return complex(0.0, -1.0)
    theta = TWO_PI * j / m
    return complex(math.cos(theta), -math.sin(theta))


def _check_amplitude(amplitude):
    if not (0.0 <= amplitude <= 1.0):
        raise DomainError("amplitude", f"must lie in [0, 1], got {amplitude!r}")


def _check_omega(omega):
    if not (0.0 <= omega < TWO_PI):
        raise DomainError("omega", f"must lie in [0, 2*pi), got {omega!r}")


@dataclass(frozen=True)
class ComplexDiscount:
    """A discount kept in polar form beside its rectangular value.

    ``omega`` is an input and is never recovered from ``value`` by an
    arctangent, which keeps frequency grids free of branch-cut drift.
    """

    amplitude: float
    omega: float
    value: complex = field(default=None)

    def __post_init__(self):
        _check_amplitude(self.amplitude)
        _check_omega(self.omega)
        polar = self.amplitude * _unit(self.omega)
        if self.value is None:
            object.__setattr__(self, "value", polar)
        elif abs(complex(self.value) - polar) > 1e-12:
            raise DomainError("value", "inconsistent with amplitude and omega")
        else:
            object.__setattr__(self, "value", complex(self.value))

    def __complex__(self):
        return self.value

    def conjugate(self) -> "ComplexDiscount":
        omega = 0.0 if self.omega == 0.0 else TWO_PI - self.omega
        if omega >= TWO_PI:  # tiny omega rounds up to 2pi
            omega = math.nextafter(TWO_PI, 0.0)
        return ComplexDiscount(self.amplitude, omega, self.value.conjugate())


def make_discount(amplitude: float, omega: float) -> ComplexDiscount:
    """Build ``amplitude * exp(-i*omega)``.

    >>> make_discount(0.9, math.pi).value
    (-0.9+0j)
    """
    return ComplexDiscount(float(amplitude), float(omega))


def discount_power(d: ComplexDiscount, n: int) -> complex:
    """``d**n`` evaluated in polar form as ``A**n * exp(-i * (n*omega mod 2pi))``."""
    if n < 0:
        raise DomainError("n", f"must be nonnegative, got {n}")
    theta = math.fmod(n * d.omega, TWO_PI)
    return (d.amplitude ** n) * _unit(theta)


def discount_powers(d: ComplexDiscount, n: int) -> np.ndarray:
    """Vector of ``d**k`` for k = 0..n-1."""
    k = np.arange(n)
    theta = np.fmod(k * d.omega, TWO_PI)
    out = (d.amplitude ** k) * np.exp(-1j * theta)
    if d.omega == 0.0:
        out = out.real + 0j
    return out


@dataclass(frozen=True)
class ComplexReturn:
    value: complex
    horizon: float  # number of rewards summed; math.inf for an unbounded return

    def __complex__(self):
        return self.value

    def conjugate(self) -> "ComplexReturn":
        return ComplexReturn(self.value.conjugate(), self.horizon)


def complex_return(rewards: Sequence[float], d: ComplexDiscount) -> ComplexReturn:
    """Sum of ``d**k * R_{k+1}`` over a finite reward sequence.

    An empty sequence gives a zero return.  For ``amplitude == 1`` the caller
    is responsible for the context being episodic; the finite sum is still
    well defined and equals the transform of ``rewards`` at ``d.omega``.
    """
    r = np.asarray(rewards, dtype=float)
    if r.ndim != 1:
        raise DomainError("rewards", "must be a one-dimensional sequence")
    if r.size == 0:
        return ComplexReturn(0j, 0)
    value = complex(np.dot(discount_powers(d, r.size), r))
    if d.omega == 0.0:
        value = complex(value.real, 0.0)
    return ComplexReturn(value, r.size)


@dataclass
class FrequencyBank:
    """Value functions for equally spaced discounts fed one experience stream.

    ``values`` is a single batched value function whose leading axis runs
    over members; ``member(j)`` hands back a view of the j-th one, so the
    members share no state with each other while a whole-bank update stays a
    single vectorized operation.
    """

    amplitude: float
    discounts: tuple
    values: object

    @property
    def count(self) -> int:
        return len(self.discounts)

    def __len__(self):
        return self.count

    @property
    def omegas(self) -> np.ndarray:
        return np.array([d.omega for d in self.discounts])

    @property
    def gammas(self) -> np.ndarray:
        return np.array([d.value for d in self.discounts], dtype=complex)

    def member(self, j: int):
        return self.values.member(j)

    @property
    def members(self) -> list:
        return [self.member(j) for j in range(self.count)]


def frequency_grid(count: int, amplitude: float) -> tuple:
    """Discounts ``amplitude * exp(-2*pi*i*j/count)`` for j = 0..count-1."""
    if count < 1:
        raise DomainError("count", f"must be at least 1, got {count}")
    _check_amplitude(amplitude)
    return tuple(
        ComplexDiscount(float(amplitude), TWO_PI * j / count, amplitude * _root_of_unity(j, count))
        for j in range(count)
    )


def make_frequency_bank(count: int, amplitude: float, value_factory: Callable) -> FrequencyBank:
    """Bank of ``count`` members with omega_j = 2*pi*j/count.

    ``value_factory`` is called as ``value_factory(batch_shape=(count,))`` and
    must return a batched value function (see :mod:`complextd.agents`).
    """
    discounts = frequency_grid(count, amplitude)
    return FrequencyBank(float(amplitude), discounts, value_factory(batch_shape=(count,)))
