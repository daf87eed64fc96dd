"""Reflection of a probe field from the cavity system.

An isolated transition at ``omega_t`` with loss rate ``kappa`` reflects a
probe at ``omega`` with the all-pass amplitude::

    r = (omega - omega_t - i kappa/2) / (omega - omega_t + i kappa/2)

Spectra over several transitions multiply the factors of the transitions
inside the probed window, which is only meaningful when the transitions are
well separated compared with their widths.
"""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from . import kernels
from .errors import DomainError, IndependentTransitionWarning
from .sec_rates import TransitionRates, check_independent_transitions


def reflection_amplitude(omega, omega_t: float, kappa: float):
    """Single-transition reflection amplitude (scalar or array in ``omega``)."""
    if kappa < 0:
        raise DomainError("kappa must be non-negative")
    d = np.asarray(omega, dtype=float) - omega_t
    r = (d - 0.5j * kappa) / (d + 0.5j * kappa)
    return complex(r) if r.ndim == 0 else r


def reflection_phase(omega, omega_t: float, kappa: float):
    """Continuous phase of :func:`reflection_amplitude`, from -2pi (far below) to 0."""
    d = np.asarray(omega, dtype=float) - omega_t
    return -2.0 * np.arctan2(0.5 * kappa, d)


@dataclass(frozen=True)
class SpectrumPoint:
    omega: float
    amplitude: complex
    phase: float


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Reflection spectrum on a probe grid.

    ``phase`` is the continuous sum of single-transition phases and
    ``group_delay`` its derivative with respect to the probe frequency.
    """

    omega: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray
    group_delay: np.ndarray
    transitions: TransitionRates
    independent: bool = True

    def __len__(self):
        return self.omega.size

    def __iter__(self):
        for w, r, ph in zip(self.omega, self.amplitude, self.phase):
            yield SpectrumPoint(float(w), complex(r), float(ph))

    def to_csv(self, digits: int = 12) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["omega", "re_r", "im_r", "phase", "group_delay"])
        for row in zip(self.omega, self.amplitude.real, self.amplitude.imag, self.phase,
                       self.group_delay):
            w.writerow([f"{float(x):.{digits}g}" for x in row])
        return buf.getvalue()


def _select(rates: TransitionRates, lo: float, hi: float) -> TransitionRates:
    keep = (rates.omega >= lo) & (rates.omega <= hi)
    labels = tuple(l for l, k in zip(rates.labels, keep) if k) if rates.labels else ()
    return TransitionRates(rates.mu[keep], rates.nu[keep], rates.omega[keep],
                           rates.kappa[keep], labels)


def spectrum(es, rates: TransitionRates, omega_grid) -> Spectrum:
    """Product of all-pass factors of transitions inside the grid span.

    ``es`` is accepted for symmetry with the other front ends and may be
    ``None``; only the rate table is used. Each factor uses the rate at its
    own resonance.
    """
    grid = np.asarray(omega_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("omega_grid must be a non-empty 1-D array")
    sel = _select(rates, grid.min(), grid.max())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IndependentTransitionWarning)
        ok = check_independent_transitions(sel, warn=False)
    if not ok:
        warnings.warn("overlapping transitions in the probed window; the product of "
                      "single-transition factors is unreliable", IndependentTransitionWarning,
                      stacklevel=2)
    r, delay = kernels.allpass(grid, sel.omega, sel.kappa)
    phase = np.zeros_like(grid)
    for om, ka in zip(sel.omega, sel.kappa):
        phase += reflection_phase(grid, om, ka)
    return Spectrum(grid, r, phase, delay, sel, ok)


def _phase_model(omega, omega_t, half):
    return -2.0 * np.arctan2(half, omega - omega_t)


def fit_phase_halfwidth(omega, phase, guess_center: float, guess_half: float):
    """Least-squares fit of a single-transition phase profile.

    Returns ``(omega_t, half_width)``; the half width is ``kappa/2``.
    """
    popt, _ = curve_fit(_phase_model, np.asarray(omega, float), np.asarray(phase, float),
                        p0=(guess_center, guess_half))
    return float(popt[0]), float(abs(popt[1]))


def phase_crossing_halfwidth(omega, phase) -> float:
    """Half the distance between the -3pi/2 and -pi/2 phase crossings (linear interpolation)."""
    omega = np.asarray(omega, float)
    phase = np.asarray(phase, float)
    lo = np.interp(-1.5 * np.pi, phase, omega)
    hi = np.interp(-0.5 * np.pi, phase, omega)
    return 0.5 * (hi - lo)
