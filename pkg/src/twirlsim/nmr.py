"""Two-spin ensemble simulator: pulses, free evolution, crush gradients,
signal acquisition and spectra.

The spin system is a weakly coupled homonuclear pair I, S with Hamiltonian
H/hbar = 2 pi nu_I Iz + 2 pi nu_S Sz + pi J 2IzSz, diagonal in the
computational basis.  States are deviation density matrices carried as a
weighted ensemble over gradient phases; a crush gradient splits every
member across N_g bilateral z rotations (the two spins share one
gyromagnetic ratio, so the spatial phase is common to both) and then lets
the background Hamiltonian run for the gradient's duration.

Sign conventions: a pulse of angle theta and phase phi conjugates by
exp(-i theta (cos phi sigma_x + sin phi sigma_y)/2) on the targeted
spin(s); free evolution conjugates by exp(-i H t / hbar).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import qcore
from .pulseprog import Acquire, Delay, Gradient, Pulse, PulseSequence

__all__ = [
    "SpinSystemParams",
    "load_params",
    "DEFAULT_PARAMS",
    "GradientRefocusWarning",
    "EnsembleState",
    "Fid",
    "Spectrum",
    "TwoSpinSimulator",
    "spectrum",
    "integrate_peak",
    "collective_z_invariant_part",
]

DEFAULT_NG = 16


@dataclass(frozen=True)
class SpinSystemParams:
    """Resonance offsets and scalar coupling, all in Hz."""

    nu_i_hz: float
    nu_s_hz: float
    j_hz: float

    def __post_init__(self):
        if self.j_hz < 0:
            raise ValueError("coupling constant must be nonnegative")

    @property
    def delta_hz(self) -> float:
        """Frequency separation nu_I - nu_S between the two resonances."""
        return self.nu_i_hz - self.nu_s_hz


DEFAULT_PARAMS = SpinSystemParams(nu_i_hz=457.9, nu_s_hz=-457.9, j_hz=7.2)


def load_params(path) -> SpinSystemParams:
    """Read a key=value spin-system file (nu_i_hz, nu_s_hz, j_hz).

    Lines starting with '#' and blank lines are ignored; delta is derived,
    never read.
    """
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {lineno}: expected key=value, got {raw.strip()!r}")
            key, _, val = line.partition("=")
            key = key.strip().lower()
            try:
                values[key] = float(val.strip())
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: bad number {val.strip()!r}") from None
    missing = {"nu_i_hz", "nu_s_hz", "j_hz"} - values.keys()
    if missing:
        raise ValueError(f"{path}: missing keys: {', '.join(sorted(missing))}")
    return SpinSystemParams(values["nu_i_hz"], values["nu_s_hz"], values["j_hz"])


class GradientRefocusWarning(UserWarning):
    """A gradient duration is not a whole number of 1/delta periods.

    Zero-quantum coherences evolve at the difference frequency delta during
    the gradient; durations k/delta refocus them exactly.
    """


@dataclass(frozen=True)
class EnsembleState:
    """Weighted collection of per-position deviation matrices.

    gradient_phase_count records the N_g used when the ensemble was last
    split by a crush gradient (0 before any gradient).
    """

    weights: np.ndarray  # (M,)
    matrices: np.ndarray  # (M, 4, 4) complex
    gradient_phase_count: int = 0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        m = np.asarray(self.matrices, dtype=complex)
        if m.ndim != 3 or m.shape[1:] != (4, 4) or w.shape != (m.shape[0],):
            raise ValueError("ensemble needs (M,) weights and (M, 4, 4) matrices")
        if abs(w.sum() - 1) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {w.sum()}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "matrices", m)

    @property
    def n_members(self) -> int:
        return self.matrices.shape[0]

    def collapse(self) -> np.ndarray:
        """Ensemble-averaged deviation matrix (all observables are linear)."""
        return np.einsum("m,mjk->jk", self.weights, self.matrices)


@dataclass(frozen=True)
class Fid:
    """Complex time-domain signal with its dwell time in seconds."""

    samples: np.ndarray
    dwell: float

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) * self.dwell

    def power(self) -> float:
        return float((np.abs(self.samples) ** 2).sum())


@dataclass(frozen=True)
class Spectrum:
    """Complex amplitude per frequency bin, axis spanning +-1/(2 dwell)."""

    freqs_hz: np.ndarray
    amplitudes: np.ndarray
    line_broadening_hz: float = 0.0

    def power(self) -> float:
        return float((np.abs(self.amplitudes) ** 2).sum())


def spectrum(fid: Fid, line_broadening_hz: float = 0.0) -> Spectrum:
    """Discrete Fourier transform after optional exponential apodization.

    Uses the orthonormal DFT so that total power matches the (apodized)
    FID power exactly.
    """
    apod = np.exp(-np.pi * line_broadening_hz * fid.times)
    amps = np.fft.fftshift(np.fft.fft(fid.samples * apod, norm="ortho"))
    freqs = np.fft.fftshift(np.fft.fftfreq(len(fid.samples), fid.dwell))
    return Spectrum(freqs, amps, line_broadening_hz)


def integrate_peak(spec: Spectrum, center_hz: float, width_hz: float) -> float:
    """Sum of the real part over bins within width/2 of the center."""
    lo, hi = center_hz - width_hz / 2, center_hz + width_hz / 2
    if lo < spec.freqs_hz.min() or hi > spec.freqs_hz.max():
        raise ValueError(
            f"window [{lo:g}, {hi:g}] Hz falls outside the spectrum axis "
            f"[{spec.freqs_hz.min():g}, {spec.freqs_hz.max():g}]"
        )
    mask = (spec.freqs_hz >= lo) & (spec.freqs_hz <= hi)
    return float(spec.amplitudes.real[mask].sum())


# coherence order of each basis ket under collective z rotation
_M_ORDER = np.array([1.0, 0.0, 0.0, -1.0])
_ZQ_MASK = (_M_ORDER[:, None] == _M_ORDER[None, :]).astype(float)


def collective_z_invariant_part(rho) -> np.ndarray:
    """Projection onto the subspace invariant under bilateral z rotations.

    Keeps matrix elements between kets of equal total z quantum number
    (the zero-quantum part: populations plus the |01><10| coherences); an
    ideal crush gradient implements exactly this projection.
    """
    return np.asarray(rho, dtype=complex) * _ZQ_MASK


class TwoSpinSimulator:
    """Owns one simulation run: spin parameters plus the gradient phase count.

    All operations return new EnsembleState values; members evolve
    independently and reductions run in a fixed order, so results are
    deterministic.
    """

    def __init__(self, params: SpinSystemParams = DEFAULT_PARAMS, ng: int = DEFAULT_NG):
        if ng < 2:
            raise ValueError("gradient phase count must be at least 2")
        self.params = params
        self.ng = ng
        a = np.array([1.0, 1.0, -1.0, -1.0])  # 2 Iz diagonal
        b = np.array([1.0, -1.0, 1.0, -1.0])  # 2 Sz diagonal
        # H/hbar eigenvalues (rad/s) over |00>, |01>, |10>, |11>
        self._energies = np.pi * (params.nu_i_hz * a + params.nu_s_hz * b + params.j_hz / 2 * a * b)
        sp = np.array([[0, 1], [0, 0]], dtype=complex)
        self._detect_op = qcore.tensor(sp, np.eye(2)) + qcore.tensor(np.eye(2), sp)

    def thermal_state(self) -> EnsembleState:
        """Deviation Iz + Sz, the high-temperature equilibrium."""
        rho = qcore.product_operator("Iz") + qcore.product_operator("Sz")
        return EnsembleState(np.ones(1), rho[None, :, :])

    def apply_pulse(self, state: EnsembleState, target: str, angle_deg: float, phase_deg: float) -> EnsembleState:
        """Instantaneous rotation about the in-plane axis at phase_deg."""
        angle = np.deg2rad(angle_deg)
        phase = np.deg2rad(phase_deg)
        axis = np.cos(phase) * qcore.pauli("x") + np.sin(phase) * qcore.pauli("y")
        u = np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * axis
        key = target if target == "both" else target.upper()
        if key == "I":
            big = qcore.tensor(u, np.eye(2))
        elif key == "S":
            big = qcore.tensor(np.eye(2), u)
        elif key == "both":
            big = qcore.tensor(u, u)
        else:
            raise ValueError(f"pulse target must be I, S or both, got {target!r}")
        out = np.einsum("ab,mbc,dc->mad", big, state.matrices, big.conj())
        return EnsembleState(state.weights, out, state.gradient_phase_count)

    def evolve(self, state: EnsembleState, t: float) -> EnsembleState:
        """Free evolution under the weak-coupling Hamiltonian for t seconds."""
        if t < 0:
            raise ValueError("evolution time must be nonnegative")
        ph = np.exp(-1j * self._energies * t)
        frame = np.outer(ph, ph.conj())
        return EnsembleState(state.weights, state.matrices * frame, state.gradient_phase_count)

    def apply_gradient(self, state: EnsembleState, t: float) -> EnsembleState:
        """Crush gradient: split over N_g bilateral z phases, then evolve(t).

        Warns with GradientRefocusWarning when t is not a whole number of
        1/delta periods (within 1e-9 s), since the zero-quantum coherence
        then fails to refocus.
        """
        if t < 0:
            raise ValueError("gradient duration must be nonnegative")
        delta = self.params.delta_hz
        if delta != 0:
            period = 1 / abs(delta)
            if abs(t - round(t / period) * period) > 1e-9:
                warnings.warn(
                    f"gradient duration {t} s is not a multiple of 1/delta = {period:.6e} s; "
                    "zero-quantum coherence will not refocus",
                    GradientRefocusWarning,
                    stacklevel=2,
               )
        phases = 2 * np.pi * np.arange(self.ng) / self.ng
        d = np.exp(-1j * np.outer(phases, _M_ORDER))  # (ng, 4) diagonal factors
        frames = d[:, :, None] * d.conj()[:, None, :]  # (ng, 4, 4)
        split = (state.matrices[:, None, :, :] * frames[None, :, :, :]).reshape(-1, 4, 4)
        weights = np.repeat(state.weights / self.ng, self.ng)
        return self.evolve(EnsembleState(weights, split, self.ng), t)

    def acquire(self, state: EnsembleState, points: int, dwell: float) -> Fid:
        """Sample sum_members w Tr(rho(t) (I+ + S+)) at the dwell spacing.

        The trace is linear in the ensemble, so the collapsed matrix is
        propagated instead of every member.
        """
        if points < 2:
            raise ValueError("acquisition needs at least 2 points")
        if dwell <= 0:
            raise ValueError("dwell time must be positive")
        rho = state.collapse()
        weights = rho * self._detect_op.T  # rho_jk * O_kj
        omega = self._energies[:, None] - self._energies[None, :]
        t = np.arange(points) * dwell
        phases = np.exp(-1j * omega[:, :, None] * t[None, None, :])
        samples = np.einsum("jk,jkt->t", weights, phases)
        return Fid(samples, dwell)

    def run_program(self, seq: PulseSequence, state: EnsembleState | None = None):
        """Execute a parsed pulse program from the thermal state by default.

        Returns (final state, Fid or None); the final state is the one at
        the start of acquisition.
        """
        if state is None:
            state = self.thermal_state()
        fid = None
        for event in seq:
            if isinstance(event, Pulse):
                state = self.apply_pulse(state, event.target, event.angle_deg, event.phase_deg)
            elif isinstance(event, Delay):
                state = self.evolve(state, event.duration)
            elif isinstance(event, Gradient):
                state = self.apply_gradient(state, event.duration)
            elif isinstance(event, Acquire):
                fid = self.acquire(state, event.points, event.dwell)
            else:  # pragma: no cover
                raise TypeError(f"unknown event {event!r}")
        return state, fid
