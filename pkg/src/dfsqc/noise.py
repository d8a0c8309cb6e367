"""Stochastic dephasing, the swap-echo filter function, and transport noise.

The dephasing rate eps(t) is a real stationary Gaussian process with a
two-sided power spectral density S(w) normalized so that

    <eps(t) eps(t + tau)> = int S(w) e^{i w tau} dw,   int S dw = total_power.

Spectral synthesis draws eps(t) = sum_k A_k cos(w_k t + theta_k) on a
midpoint frequency grid with A_k = 2 sqrt(S(w_k) dw) (folding the two
sides), so the sample variance reproduces total_power exactly and segment
integrals of eps have closed forms (no time-discretization error in the
accumulated phases).

Echo sequence [dt, U_x, dt, U_x]: the +/- toggling of the accumulated
phase gives the one-cycle filter |Y(w)|^2 = 16 dt^2 sin^4(w dt/2)/(w dt)^2,
i.e. 16 dt^2 times :func:`filter_function_dfs` (the proportionality
constant is fixed by matching free evolution, where |W(w)|^2 =
4 sin^2(w T/2)/w^2).

Transport noise: moving the atom pair with separation time tau_T filters
the spectrum through sin^2(w tau_T/2) and smears it with a Gaussian kernel
of width 4/tau_T (motion through the spatially correlated field).  The
differential dephasing power is referred symmetrically to the two atoms
(factor 1/2), so a narrow noise line at w0 << 1/tau_T is suppressed by
sin^2(w0 tau_T/2)/2 -> (tau_T w0)^2/8.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad

from .register import QuantumRegister, apply_unitary, as_generator, rz
from .logical import LogicalQubit

TWO_PI = 2.0 * math.pi
LORENTZIAN_BAND_FACTOR = 200.0  # hard synthesis cutoff, keeps 99.7% of power


class NoiseModelError(ValueError):
    pass


@dataclass
class NoiseSpectrum:
    """Two-sided dephasing spectrum S(w) >= 0 with int S dw = total_power.

    Models: "band-limited-white" (flat up to the cutoff), "lorentzian"
    (corner frequency = cutoff, hard-truncated at 200x the corner for
    synthesis) and "table" (two-column (w, S) samples, interpolated, even
    in w).  ``total_power`` is in rad^2/s^2; the coherence-time
    parameterization uses total_power = 1/tau_co^2.
    """

    model: str
    total_power: float
    cutoff: float
    table: tuple | None = None

    def __post_init__(self):
        if self.model not in ("band-limited-white", "lorentzian", "table"):
            raise NoiseModelError(f"unknown spectrum model {self.model!r}")
        if self.total_power < 0:
            raise NoiseModelError("total_power must be >= 0")
        if self.cutoff <= 0:
            raise NoiseModelError("cutoff must be positive")
        # tau_co = 1/sqrt(total_power) only parameterizes the modeled spectra
        if self.model != "table" and self.total_power > 0:
            tau_co = 1.0 / math.sqrt(self.total_power)
            if self.cutoff * tau_co > 1.0:
                warnings.warn(
                    f"cutoff * tau_co = {self.cutoff * tau_co:.2f} > 1: spectrum "
                    "is not slow compared to the coherence time",
                    stacklevel=2,
                )

    @classmethod
    def band_limited_white(cls, total_power=None, tau_co=None, cutoff=TWO_PI * 100.0):
        return cls("band-limited-white", _power_from(total_power, tau_co), cutoff)

    @classmethod
    def lorentzian(cls, total_power=None, tau_co=None, cutoff=TWO_PI * 100.0):
        return cls("lorentzian", _power_from(total_power, tau_co), cutoff)

    @classmethod
    def from_table(cls, omegas, values):
        """Tabulated spectrum; w >= 0 samples of the (even) two-sided S."""
        w = np.asarray(omegas, dtype=float)
        s = np.asarray(values, dtype=float)
        if w.ndim != 1 or w.shape != s.shape or w.size < 2:
            raise NoiseModelError("table needs matching 1-d omega and S columns")
        if np.any(s < 0):
            raise NoiseModelError("spectral density must be non-negative")
        order = np.argsort(w)
        w, s = w[order], s[order]
        power = 2.0 * float(np.trapezoid(s, w)) if w[0] >= 0 else float(np.trapezoid(s, w))
        return cls("table", power, float(np.max(np.abs(w))), table=(w, s))

    @classmethod
    def from_table_file(cls, path):
        data = np.loadtxt(path)
        return cls.from_table(data[:, 0], data[:, 1])

    # -- evaluation ----------------------------------------------------
    def band(self) -> float:
        """Highest frequency carrying appreciable power (synthesis cutoff)."""
        if self.model == "lorentzian":
            return LORENTZIAN_BAND_FACTOR * self.cutoff
        return self.cutoff

    def psd(self, omega) -> np.ndarray:
        w = np.abs(np.asarray(omega, dtype=float))
        if self.total_power == 0.0:
            return np.zeros_like(w)
        if self.model == "band-limited-white":
            s0 = self.total_power / (2.0 * self.cutoff)
            return np.where(w <= self.cutoff, s0, 0.0)
        if self.model == "lorentzian":
            s0 = self.total_power / (math.pi * self.cutoff)
            raw = s0 / (1.0 + (w / self.cutoff) ** 2)
            return np.where(w <= self.band(), raw, 0.0)
        tw, ts = self.table
        return np.interp(w, tw, ts, left=0.0, right=0.0)

    def integrated_power(self, n_grid: int = 200001) -> float:
        """Quadrature of S over the synthesis band (checks the invariant)."""
        w = np.linspace(-self.band(), self.band(), n_grid)
        return float(np.trapezoid(self.psd(w), w))


def _power_from(total_power, tau_co):
    if (total_power is None) == (tau_co is None):
        raise NoiseModelError("give exactly one of total_power or tau_co")
    if tau_co is not None:
        if tau_co <= 0:
            raise NoiseModelError("tau_co must be positive")
        return 1.0 / tau_co**2
    return float(total_power)


def default_spectrum() -> NoiseSpectrum:
    """Band-limited white, tau_co = 1 ms, cutoff 2*pi*100 Hz."""
    return NoiseSpectrum.band_limited_white(tau_co=1e-3)


@dataclass
class TransportNoise:
    """Dephasing accrued while shuttling atoms, separation time tau_T.

    ``d`` is the lattice spacing between the two atoms (d = n*lambda/2);
    the spatial correlation of the field is N(x) = exp(-x^2/d^2).
    """

    d: float
    tau_T: float
    base: NoiseSpectrum

    def __post_init__(self):
        if self.d <= 0 or self.tau_T <= 0:
            raise NoiseModelError("distance and separation time must be positive")

    def spatial_correlation(self, x) -> np.ndarray:
        return np.exp(-np.asarray(x, dtype=float) ** 2 / self.d**2)


@dataclass
class EchoSequence:
    """Swap-echo cycle [dt, U_x, dt, U_x] repeated n_cycles times."""

    dt: float
    n_cycles: int = 1
    pulse: str = "X_L"

    def __post_init__(self):
        if self.dt <= 0:
            raise NoiseModelError("cycle time dt must be positive")
        if self.n_cycles < 1:
            raise NoiseModelError("n_cycles must be >= 1")

    @property
    def total_time(self) -> float:
        return 2.0 * self.dt * self.n_cycles


# ---------------------------------------------------------------------------
# synthesis
# ---------------------------------------------------------------------------

class NoiseRealization(NamedTuple):
    """One draw of eps(t) as a cosine sum; integrals are exact."""

    freqs: np.ndarray
    amps: np.ndarray
    phases: np.ndarray

    def sample(self, times) -> np.ndarray:
        t = np.asarray(times, dtype=float)
        return np.cos(np.outer(t, self.freqs) + self.phases) @ self.amps

    def integral(self, t0: float, t1: float) -> float:
        w = self.freqs
        val = (np.sin(w * t1 + self.phases) - np.sin(w * t0 + self.phases)) / w
        return float(val @ self.amps)


def _component_grid(spectrum: NoiseSpectrum, n_components: int):
    band = spectrum.band()
    dw = band / n_components
    freqs = (np.arange(n_components) + 0.5) * dw
    amps = 2.0 * np.sqrt(spectrum.psd(freqs) * dw)
    return freqs, amps


def draw_realization(spectrum: NoiseSpectrum, rng, n_components: int = 2048):
    freqs, amps = _component_grid(spectrum, n_components)
    phases = as_generator(rng).uniform(0.0, TWO_PI, n_components)
    return NoiseRealization(freqs, amps, phases)


def synthesize_noise(spectrum: NoiseSpectrum, duration: float, dt: float, rng,
                     n_components: int = 2048) -> np.ndarray:
    """Sampled eps(t) on arange steps of dt covering [0, duration)."""
    if dt <= 0 or duration <= 0:
        raise NoiseModelError("duration and dt must be positive")
    if dt >= math.pi / spectrum.band():
        raise NoiseModelError(
            f"dt = {dt:.3g} violates Nyquist for band {spectrum.band():.3g} rad/s"
        )
    n = int(round(duration / dt))
    times = np.arange(n) * dt
    if spectrum.total_power == 0.0:
        return np.zeros(n)
    return draw_realization(spectrum, rng, n_components).sample(times)


def periodogram(trace: np.ndarray, dt: float):
    """Two-sided PSD estimate matching the S(w) normalization."""
    n = len(trace)
    spec = np.fft.rfft(trace) * dt
    w = np.fft.rfftfreq(n, dt) * TWO_PI
    psd = np.abs(spec) ** 2 / (TWO_PI * n * dt)
    return w, psd


# ---------------------------------------------------------------------------
# filter functions
# ---------------------------------------------------------------------------

def filter_function_dfs(omega, dt: float):
    """Echo filter sin^4(dt*w/2)/(dt*w)^2 with unit proportionality constant.

    Returns the w -> 0 limit (zero) at w = 0; small-argument behavior is
    (dt*w)^2/16.
    """
    if dt <= 0:
        raise NoiseModelError("dt must be positive")
    w = np.asarray(omega, dtype=float)
    x = dt * w
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.sin(x / 2.0) ** 4 / x**2
    return np.where(x == 0.0, 0.0, val)


def _echo_filter_sq(omega: np.ndarray, seq: EchoSequence) -> np.ndarray:
    """|Y_n(w)|^2 for the n-cycle echo modulation function."""
    w = np.asarray(omega, dtype=float)
    one = 16.0 * seq.dt**2 * filter_function_dfs(w, seq.dt)
    if seq.n_cycles == 1:
        return one
    x = seq.dt * w
    sin_x = np.sin(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        comb = (np.sin(seq.n_cycles * x) / sin_x) ** 2
    comb = np.where(np.abs(sin_x) < 1e-9, float(seq.n_cycles**2), comb)
    return one * comb


def _free_filter_sq(omega: np.ndarray, total_time: float) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = 4.0 * np.sin(w * total_time / 2.0) ** 2 / w**2
    return np.where(w == 0.0, total_time**2, val)


def _band_integral(spectrum: NoiseSpectrum, weight, n_grid: int = 65536) -> float:
    """int S(w) weight(w) dw over the two-sided band (midpoint rule)."""
    band = spectrum.band()
    dw = band / n_grid
    w = (np.arange(n_grid) + 0.5) * dw
    return 2.0 * float(np.sum(spectrum.psd(w) * weight(w)) * dw)


def echo_variance_analytic(seq: EchoSequence, spectrum: NoiseSpectrum) -> float:
    """Variance of the echo phase: int S(w) |Y_n(w)|^2 dw."""
    return _band_integral(spectrum, lambda w: _echo_filter_sq(w, seq))


def free_variance_analytic(total_time: float, spectrum: NoiseSpectrum) -> float:
    """Variance of the freely accumulated phase over total_time."""
    return _band_integral(spectrum, lambda w: _free_filter_sq(w, total_time))


def echo_suppression_analytic(seq: EchoSequence, spectrum: NoiseSpectrum) -> float:
    ve = echo_variance_analytic(seq, spectrum)
    vf = free_variance_analytic(seq.total_time, spectrum)
    return ve / vf


class DephasingStats(NamedTuple):
    var_echo: float
    var_free: float
    stderr_echo: float
    stderr_free: float
    n_realizations: int


def monte_carlo_dephasing(seq: EchoSequence, spectrum: NoiseSpectrum,
                          n_realizations: int, rng,
                          n_components: int = 512) -> DephasingStats:
    """Sample echo and free phase variances over noise realizations.

    Per realization the echo phase is sum over cycles of (integral of eps
    over the first half) - (second half); the free phase integrates eps
    over the whole record.  Segment integrals are evaluated in closed form
    from the cosine components.
    """
    if n_realizations < 100:
        raise NoiseModelError("need at least 100 realizations")
    gen = as_generator(rng)
    freqs, amps = _component_grid(spectrum, n_components)
    bounds = np.arange(2 * seq.n_cycles + 1) * seq.dt
    signs = np.tile([1.0, -1.0], seq.n_cycles)

    echo = np.empty(n_realizations)
    free = np.empty(n_realizations)
    chunk = max(1, min(n_realizations, 4096))
    done = 0
    while done < n_realizations:
        m = min(chunk, n_realizations - done)
        phases = gen.uniform(0.0, TWO_PI, size=(m, len(freqs)))
        # segment integrals: (sin(w t_{i+1} + th) - sin(w t_i + th)) / w
        sins = np.sin(phases[None, :, :] + np.multiply.outer(bounds, freqs)[:, None, :])
        seg = (sins[1:] - sins[:-1]) / freqs  # (segments, m, components)
        weighted = seg @ amps  # (segments, m)
        echo[done:done + m] = signs @ weighted
        free[done:done + m] = weighted.sum(axis=0)
        done += m

    var_echo = float(np.var(echo, ddof=1))
    var_free = float(np.var(free, ddof=1))
    factor = math.sqrt(2.0 / (n_realizations - 1))
    return DephasingStats(var_echo, var_free, var_echo * factor,
                          var_free * factor, n_realizations)


# ---------------------------------------------------------------------------
# transport noise
# ---------------------------------------------------------------------------

def transport_spectrum(omega, tn: TransportNoise, kernel_width: float | None = None):
    """Differential spectrum after transport with separation time tau_T.

    S_tT(w) = int S(w - v) sin^2((w - v) tau_T / 2) K(v) dv with K a
    normalized Gaussian of standard deviation 4/tau_T (``kernel_width``
    overrides, and the kernel tends to a delta as it shrinks, recovering
    the bare sin^2 free-precession filter).
    """
    sd = 4.0 / tn.tau_T if kernel_width is None else float(kernel_width)
    if sd <= 0:
        raise NoiseModelError("kernel width must be positive")
    band = tn.base.band()
    spectrum = tn.base

    def one(w: float) -> float:
        def integrand(u: float) -> float:
            k = math.exp(-((w - u) ** 2) / (2 * sd**2)) / (sd * math.sqrt(TWO_PI))
            return float(spectrum.psd(u)) * math.sin(u * tn.tau_T / 2.0) ** 2 * k

        # the kernel restricts the support to u within a few sd of w
        lo, hi = max(-band, w - 12 * sd), min(band, w + 12 * sd)
        if lo >= hi:
            return 0.0
        val, err = quad(integrand, lo, hi, limit=400)
        if err > max(1e-12, 1e-6 * abs(val)) and abs(val) > 0:
            raise NoiseModelError(
                f"transport-spectrum quadrature did not converge at w = {w:.4g}"
            )
        return val

    w = np.asarray(omega, dtype=float)
    if w.ndim == 0:
        return one(float(w))
    return np.array([one(float(x)) for x in w])


def transported_power(tn: TransportNoise) -> float:
    """Total power of the transport-filtered spectrum, int S_tT(w) dw.

    Integrating the convolution over all frequencies collapses the
    normalized Gaussian kernel exactly, leaving
    int S(u) sin^2(u tau_T/2) du.
    """
    return _band_integral(tn.base, lambda w: np.sin(w * tn.tau_T / 2.0) ** 2)


def suppression_factor(tn: TransportNoise) -> float:
    """Transported-to-stored dephasing power ratio, referred to one atom.

    The differential-mode power is split symmetrically over the atom pair
    (factor 1/2), so a narrow noise line at w0 << 1/tau_T is suppressed by
    sin^2(w0 tau_T/2)/2 -> (tau_T w0)^2 / 8.
    """
    if tn.base.total_power == 0.0:
        return 0.0
    return 0.5 * transported_power(tn) / tn.base.total_power


def transport_phase_std(tn: TransportNoise, duration: float | None = None) -> float:
    """Std of the differential phase accrued over one transport event."""
    tau = tn.tau_T if duration is None else duration
    return tau * math.sqrt(transported_power(tn))


# ---------------------------------------------------------------------------
# dephasing channel on the register
# ---------------------------------------------------------------------------

def apply_dephasing_channel(reg: QuantumRegister, q: LogicalQubit, phi: float):
    """Differential phase phi between |0_L> and |1_L>.

    Unitary exp(-i (phi/4) (sigma_z^a - sigma_z^b)): |0_L> picks up
    e^{-i phi/2}, |1_L> picks up e^{+i phi/2}, and the leakage states |00>,
    |11> are untouched, so the channel never mixes the subspaces.  phi = pi
    maps |+_L> to |-_L> (up to global phase).  A collective phase (equal z
    rotation of both atoms) leaves every logical state invariant.
    """
    apply_unitary(reg, rz(phi / 4.0), [q.atom_a])
    apply_unitary(reg, rz(-phi / 4.0), [q.atom_b])
    return reg


def apply_collective_phase(reg: QuantumRegister, q: LogicalQubit, phi: float):
    """Same z phase on both atoms; acts trivially on the logical span."""
    apply_unitary(reg, rz(phi), [q.atom_a])
    apply_unitary(reg, rz(phi), [q.atom_b])
    return reg
