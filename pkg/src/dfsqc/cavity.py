"""Pulse-level model of the atom-cavity interface.

A single-sided cavity (decay rate kappa) couples the |0> -> |e> transition
of the atoms inside it (coupling g per atom, excited-state decay gamma).
In the low-saturation regime the intracavity field and the atomic
polarization form a linear system driven by the input pulse, so a
reflected pulse is fully described by the frequency-dependent reflection
coefficient

    r(w) = 1 - kappa / (kappa/2 - i w + G^2 / (gamma/2 - i w)),

with G^2 the summed coupling of the atoms currently in |0> (atoms in |1>
are dark).  With no coupled atom this reduces to the bare-cavity response,
r(0) = -1: a resonant pulse is reflected with a flipped phase.  That
conditional phase is what turns one reflection into a physical CZ gate on
the two atoms addressed by the pulse.

All pulse propagation is done spectrally on a fixed grid (4096 samples
spanning 16 standard deviations of the pulse spectrum) so results are
bit-reproducible.  The CZ fidelity follows the conditional-state
convention: branch amplitudes keep the photon-loss conditioning factors
and the global output state is normalized at the end.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

N_TIME = 4096
N_FREQ = 4096
FREQ_WINDOW_SIGMAS = 16.0
SHAPE_ATOL = 1e-10

COMPONENTS = ((0, 0), (0, 1), (1, 0), (1, 1))


class CavityModelError(ValueError):
    pass


@dataclass
class CavityParams:
    """Atom-cavity rates in rad/s plus the number of coupled atoms.

    ``g2`` optionally gives the second atom its own coupling; by default
    both coupled atoms share ``g`` and act as one bright mode with
    G^2 = g^2 + g2^2.
    """

    g: float
    kappa: float
    gamma: float
    n_coupled: int = 0
    g2: float | None = None

    def __post_init__(self):
        if self.g <= 0 or self.kappa <= 0 or self.gamma < 0:
            raise CavityModelError("rates must be positive (gamma may be zero)")
        if self.n_coupled not in (0, 1, 2):
            raise CavityModelError("n_coupled must be 0, 1 or 2")

    @property
    def cooperativity(self) -> float:
        """Strong-coupling figure of merit C = g^2/(kappa*gamma)."""
        if self.gamma == 0:
            return math.inf
        return self.g**2 / (self.kappa * self.gamma)

    def bright_coupling_sq(self, n_coupled=None) -> float:
        n = self.n_coupled if n_coupled is None else n_coupled
        if n == 0:
            return 0.0
        if n == 1:
            return self.g**2
        g2 = self.g if self.g2 is None else self.g2
        return self.g**2 + g2**2

    def with_coupled(self, n: int) -> "CavityParams":
        return CavityParams(self.g, self.kappa, self.gamma, n, self.g2)

    def scaled_g(self, ratio: float) -> "CavityParams":
        g2 = None if self.g2 is None else self.g2 * ratio
        return CavityParams(self.g * ratio, self.kappa, self.gamma, self.n_coupled, g2)


def reflection_coefficient(omega, p: CavityParams) -> complex | np.ndarray:
    """Amplitude reflection r(omega) for detuning omega from cavity resonance.

    For gamma = 0 and a coupled atom the response is lossless; the w -> 0
    limit is +1 and is returned exactly at omega = 0.
    """
    w = np.asarray(omega, dtype=float)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    G2 = p.bright_coupling_sq()
    if G2 == 0.0:
        r = 1.0 - p.kappa / (p.kappa / 2 - 1j * w)
    else:
        pole = p.gamma / 2 - 1j * w
        with np.errstate(divide="ignore", invalid="ignore"):
            r = 1.0 - p.kappa / (p.kappa / 2 - 1j * w + G2 / pole)
        r = np.where(np.abs(pole) == 0.0, 1.0 + 0j, r)
    return complex(r[0]) if scalar else r


# ---------------------------------------------------------------------------
# pulses
# ---------------------------------------------------------------------------

def _default_gaussian(T: float) -> Callable[[np.ndarray], np.ndarray]:
    def f(t):
        return np.exp(-((t - T / 2) ** 2) / (T / 5) ** 2)

    return f


def _phase_matvec(rows: np.ndarray, cols: np.ndarray, vec: np.ndarray,
                  sign: float, chunk: int = 256) -> np.ndarray:
    """exp(sign * 1j * outer(rows, cols)) @ vec without huge intermediates."""
    out = np.empty(rows.shape[0], dtype=complex)
    for i in range(0, rows.shape[0], chunk):
        block = np.exp(sign * 1j * np.outer(rows[i:i + chunk], cols))
        out[i:i + chunk] = block @ vec
    return out


@dataclass(eq=False)
class PulseSpec:
    """Input pulse: duration T, normalized shape f(t) on [0, T], amplitude.

    ``kind`` selects a plain coherent state or the odd cat
    N_-(|alpha> - |-alpha>) with N_- = 1/sqrt(2(1 - e^{-2|alpha|^2})).
    A user-supplied shape must satisfy int |f|^2 dt = 1 within 1e-10; use
    :meth:`gaussian` for the standard pulse which is normalized exactly on
    the sampling grid.
    """

    T: float
    alpha: complex = 1.0
    kind: str = "coherent"
    shape: Callable[[np.ndarray], np.ndarray] | None = None
    _normalize: bool = field(default=False, repr=False)

    def __post_init__(self):
        if self.T <= 0:
            raise CavityModelError("pulse duration must be positive")
        if self.kind not in ("coherent", "odd_cat"):
            raise CavityModelError("kind must be 'coherent' or 'odd_cat'")
        self._grids = None

    @classmethod
    def gaussian(cls, T: float, alpha: complex = 1.0, kind: str = "coherent"):
        return cls(T, alpha, kind, _default_gaussian(T), _normalize=True)

    @property
    def mean_photon_number(self) -> float:
        return abs(self.alpha) ** 2

    def odd_cat_norm(self) -> float:
        x = self.mean_photon_number
        return 1.0 / math.sqrt(2.0 * (1.0 - math.exp(-2.0 * x)))

    # -- sampled grids, built once ------------------------------------
    def _build(self):
        t = (np.arange(N_TIME) + 0.5) * (self.T / N_TIME)
        dt = self.T / N_TIME
        fn = self.shape if self.shape is not None else _default_gaussian(self.T)
        f = np.asarray(fn(t), dtype=complex)
        norm = float(np.sum(np.abs(f) ** 2) * dt)
        if self._normalize or self.shape is None:
            f = f / math.sqrt(norm)
        elif abs(norm - 1.0) > SHAPE_ATOL:
            raise CavityModelError(
                f"pulse shape is not normalized: int |f|^2 dt = {norm:.6g}"
            )

        # provisional FFT to locate the spectrum, then a dedicated window
        pad = 4
        spec = np.fft.fftshift(np.fft.fft(f, n=pad * N_TIME)) * dt
        wgrid = np.fft.fftshift(np.fft.fftfreq(pad * N_TIME, dt)) * 2 * math.pi
        weight = np.abs(spec) ** 2
        weight /= weight.sum()
        mean = float(np.sum(wgrid * weight))
        sigma = math.sqrt(float(np.sum((wgrid - mean) ** 2 * weight)))

        half = FREQ_WINDOW_SIGMAS / 2.0 * sigma
        w = mean + np.linspace(-half, half, N_FREQ)
        dw = w[1] - w[0]
        ft = _phase_matvec(w, t, f, +1.0) * dt
        norm_w = float(np.sum(np.abs(ft) ** 2) * dw / (2 * math.pi))
        self._grids = {"t": t, "dt": dt, "f": f, "w": w, "dw": dw,
                       "ft": ft, "norm_w": norm_w, "sigma_w": sigma}

    @property
    def grids(self) -> dict:
        if self._grids is None:
            self._build()
        return self._grids


# ---------------------------------------------------------------------------
# propagation
# ---------------------------------------------------------------------------

@dataclass
class ReflectionResult:
    """Reflected-pulse summary.

    amp_ratio is alpha'/alpha: magnitude from the reflected energy, phase
    from the matched filter <f_in, r f_in>.  eta = 1 - |amp_ratio|^2 is the
    photon loss.  mode_overlap is <f_out, f_in> between normalized modes.
    """

    amp_ratio: complex
    eta: float
    mode_overlap: complex
    out_shape: np.ndarray
    out_times: np.ndarray


def _spectral_moments(ps: PulseSpec, p: CavityParams, n_coupled: int):
    """Matched-filter overlap O = <f, r f> and energy ratio E = <rf, rf>."""
    g = ps.grids
    r = reflection_coefficient(g["w"], p.with_coupled(n_coupled))
    rf = r * g["ft"]
    scale = g["dw"] / (2 * math.pi) / g["norm_w"]
    O = complex(np.sum(np.conj(g["ft"]) * rf) * scale)
    E = float(np.real(np.sum(np.abs(rf) ** 2) * scale))
    return O, min(E, 1.0 + 1e-12)


def photon_loss(ps: PulseSpec, p: CavityParams) -> float:
    """eta = 1 - |alpha'/alpha|^2 from the spectral moments alone (fast)."""
    _, E = _spectral_moments(ps, p, p.n_coupled)
    return min(max(1.0 - E, 0.0), 1.0)


def propagate_pulse(ps: PulseSpec, p: CavityParams) -> ReflectionResult:
    """Reflect the pulse off the (possibly atom-loaded) cavity.

    Spectral route: transform the shape, apply r(w), transform back.  The
    output mode is reported on a grid twice the input duration to capture
    the cavity ring-down tail.
    """
    if ps.T * p.kappa < 10:
        warnings.warn(
            f"pulse duration T*kappa = {ps.T * p.kappa:.2f} < 10: outside the "
            "adiabatic regime, reflection is strongly distorted",
            stacklevel=2,
        )
    g = ps.grids
    r = reflection_coefficient(g["w"], p)
    rf = r * g["ft"]

    O, E = _spectral_moments(ps, p, p.n_coupled)
    if ps.alpha == 0:
        amp_ratio, eta = 1.0 + 0j, 0.0  # vacuum in, vacuum out (convention)
    else:
        amp_ratio = math.sqrt(max(E, 0.0)) * cmath.exp(1j * cmath.phase(O))
        eta = min(max(1.0 - E, 0.0), 1.0)

    t_out = (np.arange(2 * N_TIME) + 0.5) * (ps.T / N_TIME)
    out = _phase_matvec(t_out, g["w"], rf, -1.0) * (g["dw"] / (2 * math.pi))
    dt = ps.T / N_TIME
    nrm = math.sqrt(float(np.sum(np.abs(out) ** 2) * dt))
    if nrm > 0:
        out = out / nrm
    mode_overlap = O / math.sqrt(E) if E > 0 else 0.0 + 0j
    return ReflectionResult(amp_ratio, eta, mode_overlap, out, t_out)


# ---------------------------------------------------------------------------
# logical CZ through one reflection
# ---------------------------------------------------------------------------

@dataclass
class CzComponent:
    """Per-logical-component reflection data for the CZ analysis.

    For logical component (m, n) the number of coupled atoms is
    (m == 0) + (n == 0): atom 1 and atom 3 couple through their |0> level,
    and the (1, 1) component sees the bare cavity.  ``theta`` is the
    conditional phase (matched-filter phase of the reflected mode),
    ``ideal_overlap`` is <f_ideal, r f_in> with f_ideal = -f_in for (1,1)
    and +f_in otherwise.
    """

    m: int
    n: int
    n_coupled: int
    amp_ratio: complex
    eta: float
    theta: float
    ideal_overlap: complex
    energy_ratio: float


def _as_weights(eps) -> dict:
    if eps is None:
        return {c: 0.25 for c in COMPONENTS}
    if isinstance(eps, dict):
        amp = {c: complex(eps[c]) for c in COMPONENTS}
    else:
        arr = np.asarray(eps, dtype=complex).reshape(4)
        amp = {c: arr[i] for i, c in enumerate(COMPONENTS)}
    total = sum(abs(v) ** 2 for v in amp.values())
    if abs(total - 1.0) > 1e-10:
        raise CavityModelError(f"sum |eps|^2 = {total:.6g}, expected 1")
    return {c: abs(v) ** 2 for c, v in amp.items()}


def cz_output_state(eps, ps: PulseSpec, p: CavityParams) -> dict:
    """Reflection data for each logical component of the CZ input state.

    ``eps`` are the four atomic amplitudes (uniform 1/2 when None).  The
    odd-cat branches +/-alpha propagate through the same linear response,
    so one spectral pass per component suffices.
    """
    if ps.kind != "odd_cat":
        raise CavityModelError("the CZ probe pulse must be an odd cat")
    _as_weights(eps)  # validates amplitudes
    out = {}
    for (m, n) in COMPONENTS:
        nc = (m == 0) + (n == 0)
        O, E = _spectral_moments(ps, p, nc)
        s = -1.0 if (m, n) == (1, 1) else 1.0
        theta = cmath.phase(O)
        amp_ratio = math.sqrt(max(E, 0.0)) * cmath.exp(1j * theta)
        out[(m, n)] = CzComponent(
            m=m, n=n, n_coupled=nc, amp_ratio=amp_ratio,
            eta=min(max(1.0 - E, 0.0), 1.0), theta=theta,
            ideal_overlap=s * O, energy_ratio=E,
        )
    return out


def _branch_overlap(x: float, otil: complex) -> complex:
    """<ideal cat | reflected cat> including the no-loss conditioning.

    Equals sinh(x*Otilde)/sinh(x) written in overflow-safe form; the
    photon-loss factor e^{-x eta/2} cancels exactly against the coherent
    overlap terms because eta = 1 - E.
    """
    if x < 1e-12:
        return otil
    return -np.exp(x * (otil - 1.0)) * np.expm1(-2.0 * x * otil) / (
        -math.expm1(-2.0 * x)
    )


def _branch_norm_sq(x: float, E: float) -> float:
    """Squared norm of a reflected cat branch conditioned on no loss."""
    if x < 1e-12:
        return E
    return math.exp(x * (E - 1.0)) * math.expm1(-2.0 * x * E) / math.expm1(-2.0 * x)


def cz_gate_fidelity(eps, ps: PulseSpec, p: CavityParams) -> float:
    """Fidelity of one reflection against the ideal CZ output.

    F = |<Psi_ideal|Psi_out>|^2 with the output state conditioned on no
    spontaneous-emission loss and globally renormalized.  The ideal output
    carries the input cat with mode -f_in on the (1,1) component and +f_in
    elsewhere.  Multimode coherent overlaps reduce the four +/- cat cross
    terms to sinh ratios per component.
    """
    weights = _as_weights(eps)
    comps = cz_output_state(eps, ps, p)
    x = ps.mean_photon_number
    num = 0.0 + 0j
    den = 0.0
    for c, w in weights.items():
        num += w * _branch_overlap(x, comps[c].ideal_overlap)
        den += w * _branch_norm_sq(x, comps[c].energy_ratio)
    if den <= 0:
        return 0.0
    fid = float(abs(num) ** 2 / den)
    if fid > 1.0 + 1e-9:
        raise CavityModelError(f"fidelity {fid} exceeds 1: numerical breakdown")
    return min(fid, 1.0)


def cz_gate_fidelity_random_average(ps: PulseSpec, p: CavityParams, n: int, rng) -> float:
    """Average CZ fidelity over Haar-random logical input amplitudes."""
    from .register import as_generator

    gen = as_generator(rng)
    total = 0.0
    for _ in range(n):
        v = gen.normal(size=4) + 1j * gen.normal(size=4)
        v /= np.linalg.norm(v)
        total += cz_gate_fidelity(v, ps, p)
    return total / n


def fidelity_sweep(values, ps: PulseSpec, p: CavityParams, vary: str = "nbar",
                   eps=None) -> np.ndarray:
    """Rows (x, F) over a grid of mean photon number or coupling ratio."""
    values = np.asarray(list(values), dtype=float)
    if values.size == 0:
        raise CavityModelError("sweep grid must not be empty")
    rows = []
    for x in values:
        if vary == "nbar":
            if x < 0:
                raise CavityModelError("mean photon number must be >= 0")
            spec = PulseSpec(ps.T, math.sqrt(x), ps.kind, ps.shape,
                             _normalize=ps._normalize)
            spec._grids = ps.grids  # same shape, reuse the spectral grid
            rows.append((x, cz_gate_fidelity(eps, spec, p)))
        elif vary == "g_ratio":
            rows.append((x, cz_gate_fidelity(eps, ps, p.scaled_g(x))))
        else:
            raise CavityModelError(f"unknown sweep variable {vary!r}")
    return np.array(rows)
