"""Direct-summation DFT, magnitude/phase views and sum-of-cosines reconstruction.

Reconstruction (``reconstruct``) evaluates, for n = 0..N-1,

    x_n = sum_k |X_k| / N * cos(2*pi*k/N * f_s * n + angle(X_k))

over an N-point uniform grid.  For the exact DFT of a real sequence and
``f_s = 1`` this returns the sequence itself.  For other ``f_s`` the formula
is evaluated literally, and the round trip no longer holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import TWO_PI
from .errors import DomainError
from .io import read_columns, write_csv


def uniform_grid(count: int) -> np.ndarray:
    """omega_k = 2*pi*k/count for k = 0..count-1."""
    if count < 1:
        raise DomainError("count", f"must be at least 1, got {count}")
    return TWO_PI * np.arange(count) / count


@dataclass(frozen=True)
class Spectrum:
    omegas: np.ndarray
    values: np.ndarray
    sampling_frequency: float = 1.0

    def __post_init__(self):
        omegas = np.asarray(self.omegas, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=complex).reshape(-1)
        if omegas.shape != values.shape:
            raise DomainError("values", "one value per frequency required")
        if omegas.size and (omegas[0] < 0 or omegas[-1] >= TWO_PI):
            raise DomainError("omegas", "frequencies must lie in [0, 2*pi)")
        if np.any(np.diff(omegas) <= 0):
            raise DomainError("omegas", "frequencies must be strictly increasing")
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def phases(self) -> np.ndarray:
        return np.array([magnitude_phase(v)[1] for v in self.values])

    def is_uniform(self, tol=1e-9) -> bool:
        return np.allclose(self.omegas, uniform_grid(len(self)), atol=tol, rtol=0)

    def subsample(self, n: int) -> "Spectrum":
        """Every (M/n)-th frequency of an M-point uniform grid."""
        m = len(self)
        if not self.is_uniform():
            raise DomainError("omegas", "subsampling needs a uniform grid")
        if n < 1 or m % n:
            raise DomainError("n", f"grid of {m} points cannot be subsampled to {n}")
        step = m // n
        return Spectrum(self.omegas[::step], self.values[::step], self.sampling_frequency)

    def to_csv(self, path, extra=None):
        """Columns omega, real, imaginary, magnitude, phase, then any ``extra`` columns."""
        extra = extra or {}
        header = ["omega", "real", "imaginary", "magnitude", "phase"] + list(extra)
        cols = [np.asarray(c, dtype=float) for c in extra.values()]
        rows = []
        for i, (w, v) in enumerate(zip(self.omegas, self.values)):
            mag, ph = magnitude_phase(v)
            rows.append([float(w), float(v.real), float(v.imag), mag, ph] + [float(c[i]) for c in cols])
        write_csv(path, header, rows)

    @classmethod
    def from_csv(cls, path, sampling_frequency=1.0) -> "Spectrum":
        omega, re, im = read_columns(path, "omega", "real", "imaginary")
        return cls(omega, re + 1j * im, sampling_frequency)


def dft(sequence, omegas) -> Spectrum:
    """``X_omega = sum_n x_n exp(-i*omega*n)`` by direct summation."""
    x = np.asarray(sequence, dtype=float).reshape(-1)
    omegas = np.asarray(omegas, dtype=float).reshape(-1)
    if omegas.size and (omegas.min() < 0 or omegas.max() >= TWO_PI):
        raise DomainError("omegas", "frequencies must lie in [0, 2*pi)")
    n = np.arange(x.size)
    phase = np.fmod(np.multiply.outer(omegas, n), TWO_PI)
    values = (np.exp(-1j * phase) * x).sum(axis=1)
    values[omegas == 0.0] = x.sum() + 0j
    return Spectrum(omegas, values)


def magnitude_phase(value) -> tuple:
    """``(|value|, angle)`` with the angle in (-pi, pi] and 0 for an exact zero."""
    value = complex(value)
    if value == 0:
        return 0.0, 0.0
    phase = math.atan2(value.imag, value.real)
    if phase == -math.pi:
        phase = math.pi
    return abs(value), phase


def reconstruct(spectrum: Spectrum, n: int, sampling_frequency=None) -> np.ndarray:
    """Sum of cosines over ``n`` frequencies of ``spectrum``'s uniform grid.

    A grid of M points with M a multiple of ``n`` is first thinned to every
    (M/n)-th frequency.
    """
    fs = spectrum.sampling_frequency if sampling_frequency is None else float(sampling_frequency)
    if not spectrum.is_uniform():
        raise DomainError("omegas", "reconstruction needs a uniform frequency grid")
    if n != len(spectrum):
        spectrum = spectrum.subsample(n)
    k = np.arange(n)
    mags = np.abs(spectrum.values) / n
    phases = spectrum.phases
    t = np.arange(n)
    arg = TWO_PI * np.multiply.outer(t, k) / n * fs + phases
    return (mags * np.cos(arg)).sum(axis=1)


def reconstruction_sum(reconstructed) -> float:
    """Sum of a reconstruction; equals Re(X_0) for a full uniform grid."""
    return float(np.sum(reconstructed))


def nyquist_frequency(spectrum: Spectrum) -> float:
    return math.pi * spectrum.sampling_frequency


def nyquist_index(spectrum: Spectrum) -> int:
    """Index of the last grid frequency at or below the Nyquist frequency."""
    limit = nyquist_frequency(spectrum) + 1e-12
    return int(np.flatnonzero(spectrum.omegas <= limit)[-1])


def peak_indices(magnitudes, lo=1, hi=None, count=None) -> list:
    """Local maxima of ``magnitudes`` within ``[lo, hi]``, tallest first.

    Neighbours wrap around the grid, so the Nyquist point of a symmetric
    spectrum compares against its mirror images.
    """
    m = np.asarray(magnitudes, dtype=float)
    size = m.size
    hi = size - 1 if hi is None else hi
    peaks = [i for i in range(lo, hi + 1) if m[i] >= m[(i - 1) % size] and m[i] >= m[(i + 1) % size]]
    peaks.sort(key=lambda i: -m[i])
    return peaks if count is None else peaks[:count]


def write_sequence(path, values):
    write_csv(path, ["n", "value"], [[i, float(v)] for i, v in enumerate(values)])


def read_sequence(path) -> np.ndarray:
    return read_columns(path, "value")[0]
