"""The two staged demonstrations of the crush-gradient twirl.

Experiment 1 prepares one mixed state and walks it through the stages of
the gradient twirl (crush, 90x, crush, magic-x, crush), recording a direct
spectrum and a selectively detected spectrum after each stage.  Experiment
2 sweeps the preparation delay so the singlet content oscillates at nu_I,
twirls every state, and fits the modulation of one doublet component.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qcore
from .nmr import (
    DEFAULT_PARAMS,
    EnsembleState,
    Spectrum,
    SpinSystemParams,
    TwoSpinSimulator,
    integrate_peak,
    spectrum,
)
from .rotations import magic_angle

__all__ = [
    "singlet_fraction_formula",
    "prepare_mixed_singlet",
    "selective_detection",
    "apply_gradient_twirl",
    "doublet_intensity",
    "StageResult",
    "Experiment1Result",
    "run_experiment1",
    "SinusoidFit",
    "fit_sinusoid",
    "Experiment2Result",
    "run_experiment2",
    "DEFAULT_TAU",
    "DEFAULT_GRAD_K",
    "ACQUIRE_POINTS",
    "COMPONENT_WINDOW_FACTOR",
]

DEFAULT_TAU = 0.0693  # s, near 1/(2 J): maximal slow modulation
DEFAULT_GRAD_K = 2  # gradient durations default to 2/delta
ACQUIRE_POINTS = 4096

# Window width, in multiples of J, used to integrate one doublet component.
# The two components sit J apart with opposite signs, so the window must
# stay narrower than 2J to keep them from cancelling.
COMPONENT_WINDOW_FACTOR = 1.0


def singlet_fraction_formula(tau: float, params: SpinSystemParams = DEFAULT_PARAMS) -> float:
    """Singlet coefficient of the prepared deviation state at delay tau.

    (sqrt(3)/8) sin(pi J tau) sin(2 pi nu_I tau): a slow coupling envelope
    times a fast offset oscillation.  The sign is stated under this
    package's rotation conventions and matches the simulator exactly.
    """
    return float(
        np.sqrt(3) / 8 * np.sin(np.pi * params.j_hz * tau) * np.sin(2 * np.pi * params.nu_i_hz * tau)
    )


def prepare_mixed_singlet(sim: TwoSpinSimulator, tau: float) -> EnsembleState:
    """60 deg y pulse on I, delay tau, 30 deg y pulse on S, from thermal."""
    state = sim.thermal_state()
    state = sim.apply_pulse(state, "I", 60.0, 90.0)
    state = sim.evolve(state, tau)
    return sim.apply_pulse(state, "S", 30.0, 90.0)


def selective_detection(sim: TwoSpinSimulator, state: EnsembleState) -> EnsembleState:
    """Jump-and-return readout: 90 at 45 deg, wait 1/(4 delta), 90 at 180 deg.

    Converts a singlet deviation into the observable antiphase pair
    (-2IxSz + 2IzSx)/2; both pulses are hard (applied to both spins).
    """
    state = sim.apply_pulse(state, "both", 90.0, 45.0)
    state = sim.evolve(state, 1 / (4 * sim.params.delta_hz))
    return sim.apply_pulse(state, "both", 90.0, 180.0)


def _grad_duration(sim: TwoSpinSimulator, grad_k: float) -> float:
    return grad_k / sim.params.delta_hz


def apply_gradient_twirl(sim: TwoSpinSimulator, state: EnsembleState, grad_k: float = DEFAULT_GRAD_K,
                         stages: int = 3) -> EnsembleState:
    """Run the first `stages` stages of the crush-gradient twirl.

    Stage 1: crush. Stage 2: 90x then crush. Stage 3: magic-angle x pulse
    then crush.  With integer grad_k all three stages together implement
    the exact bilateral twirl.
    """
    if not 0 <= stages <= 3:
        raise ValueError("stages must be between 0 and 3")
    t = _grad_duration(sim, grad_k)
    if stages >= 1:
        state = sim.apply_gradient(state, t)
    if stages >= 2:
        state = sim.apply_pulse(state, "both", 90.0, 0.0)
        state = sim.apply_gradient(state, t)
    if stages >= 3:
        state = sim.apply_pulse(state, "both", np.degrees(magic_angle()), 0.0)
        state = sim.apply_gradient(state, t)
    return state


def _default_dwell(params: SpinSystemParams) -> float:
    return 1 / (4 * params.delta_hz)


def doublet_intensity(spec: Spectrum, center_hz: float, j_hz: float,
                      width_hz: float | None = None) -> float:
    """Signed amplitude of the antiphase doublet centered at center_hz.

    Half the difference of the component integrals at center +- J/2, which
    is zero for in-phase lines and tracks the antiphase coefficient.
    """
    if width_hz is None:
        width_hz = COMPONENT_WINDOW_FACTOR * j_hz
    hi = integrate_peak(spec, center_hz + j_hz / 2, width_hz)
    lo = integrate_peak(spec, center_hz - j_hz / 2, width_hz)
    return (hi - lo) / 2


@dataclass(frozen=True)
class StageResult:
    """Spectra and state metrics after one stage of the twirl sequence."""

    stage: int
    direct_spectrum: Spectrum
    detected_spectrum: Spectrum
    direct_power: float
    bell_populations: qcore.BellPopulations
    werner_coefficient: float | None
    werner_residual: float
    doublet_intensity_i: float
    doublet_intensity_s: float

    def metrics(self) -> dict:
        return {
            "stage": self.stage,
            "direct_power": self.direct_power,
            "bell_populations": list(self.bell_populations.as_array()),
            "bell_max_off_diagonal": self.bell_populations.max_off_diagonal,
            "werner_coefficient": self.werner_coefficient,
            "werner_residual": self.werner_residual,
            "doublet_intensity_i": self.doublet_intensity_i,
            "doublet_intensity_s": self.doublet_intensity_s,
        }


@dataclass(frozen=True)
class Experiment1Result:
    tau: float
    grad_k: float
    ng: int
    prepared_singlet: float
    stages: tuple

    def metrics(self) -> dict:
        return {
            "tau_s": self.tau,
            "grad_k": self.grad_k,
            "gradient_phase_count": self.ng,
            "prepared_singlet": self.prepared_singlet,
            "stages": [s.metrics() for s in self.stages],
        }


def _stage_result(sim: TwoSpinSimulator, state: EnsembleState, stage: int,
                  points: int, dwell: float, lb: float) -> StageResult:
    params = sim.params
    direct_fid = sim.acquire(state, points, dwell)
    direct = spectrum(direct_fid, lb)
    direct_power = direct_fid.power()
    detected = spectrum(sim.acquire(selective_detection(sim, state), points, dwell), lb)
    rho = state.collapse()
    pops = qcore.bell_diagonal_populations(rho)
    coeff = qcore.is_werner(rho, tol=1e-9)
    residual = float(np.abs(rho - qcore.exact_twirl_matrix(rho)).max())
    return StageResult(
        stage=stage,
        direct_spectrum=direct,
        detected_spectrum=detected,
        direct_power=direct_power,
        bell_populations=pops,
        werner_coefficient=coeff,
        werner_residual=residual,
        doublet_intensity_i=doublet_intensity(detected, params.nu_i_hz, params.j_hz),
        doublet_intensity_s=doublet_intensity(detected, params.nu_s_hz, params.j_hz),
    )


def run_experiment1(params: SpinSystemParams = DEFAULT_PARAMS, tau: float = DEFAULT_TAU,
                    ng: int = 16, grad_k: float = DEFAULT_GRAD_K,
                    points: int = ACQUIRE_POINTS, dwell: float | None = None,
                    line_broadening_hz: float = 0.0) -> Experiment1Result:
    """Stage-by-stage twirl demonstration on one prepared state.

    For stages 0 to 3, produces the direct spectrum, the selectively
    detected spectrum, the direct signal power, the Bell-basis populations
    before detection and the residual against the closest Werner deviation.
    """
    sim = TwoSpinSimulator(params, ng)
    if dwell is None:
        dwell = _default_dwell(params)
    prepared = prepare_mixed_singlet(sim, tau)
    stages = []
    for stage in range(4):
        state = apply_gradient_twirl(sim, prepared, grad_k, stages=stage)
        stages.append(_stage_result(sim, state, stage, points, dwell, line_broadening_hz))
    return Experiment1Result(
        tau=tau,
        grad_k=grad_k,
        ng=ng,
        prepared_singlet=qcore.singlet_fidelity(prepared.collapse()),
        stages=tuple(stages),
    )


@dataclass(frozen=True)
class SinusoidFit:
    """Least-squares fit of A sin(2 pi f x + phase) + offset."""

    amplitude: float
    frequency: float
    phase: float
    offset: float
    rms_residual: float


def fit_sinusoid(x, y, freq_guess: float, rel_span: float = 0.2) -> SinusoidFit:
    """Fit a sinusoid with free frequency by variable projection.

    The amplitude, phase and offset are solved linearly for each trial
    frequency; the frequency is found by a grid scan around freq_guess
    followed by golden-section refinement.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    def residual(freq):
        cols = np.column_stack([np.sin(2 * np.pi * freq * x), np.cos(2 * np.pi * freq * x), np.ones_like(x)])
        coef, *_ = np.linalg.lstsq(cols, y, rcond=None)
        r = y - cols @ coef
        return float(r @ r), coef

    grid = freq_guess * np.linspace(1 - rel_span, 1 + rel_span, 201)
    errs = [residual(f)[0] for f in grid]
    best = int(np.argmin(errs))
    lo = grid[max(0, best - 1)]
    hi = grid[min(len(grid) - 1, best + 1)]
    invphi = (np.sqrt(5) - 1) / 2
    for _ in range(80):
        m1 = hi - invphi * (hi - lo)
        m2 = lo + invphi * (hi - lo)
        if residual(m1)[0] <= residual(m2)[0]:
            hi = m2
        else:
            lo = m1
    freq = (lo + hi) / 2
    err, coef = residual(freq)
    return SinusoidFit(
        amplitude=float(np.hypot(coef[0], coef[1])),
        frequency=float(freq),
        phase=float(np.arctan2(coef[1], coef[0])),
        offset=float(coef[2]),
        rms_residual=float(np.sqrt(err / len(x))),
    )


@dataclass(frozen=True)
class Experiment2Result:
    taus: np.ndarray
    integrals: np.ndarray
    formula_values: np.ndarray
    fit: SinusoidFit
    dtau: float

    @property
    def period_steps(self) -> float:
        """Modulation period of the fitted sinusoid, in sweep steps."""
        return 1 / (self.fit.frequency * self.dtau)

    def proportionality_residual(self) -> float:
        """Worst relative deviation from integral = K * formula."""
        k = float(self.integrals @ self.formula_values) / float(self.formula_values @ self.formula_values)
        return float(np.abs(self.integrals - k * self.formula_values).max() / np.abs(self.integrals).max())

    def metrics(self) -> dict:
        return {
            "tau0_s": float(self.taus[0]),
            "dtau_s": self.dtau,
            "n_steps": int(len(self.taus)),
            "fit_amplitude": self.fit.amplitude,
            "fit_frequency_hz": self.fit.frequency,
            "fit_phase_rad": self.fit.phase,
            "fit_offset": self.fit.offset,
            "fit_rms_residual": self.fit.rms_residual,
            "period_steps": self.period_steps,
            "proportionality_residual": self.proportionality_residual(),
        }


def run_experiment2(params: SpinSystemParams = DEFAULT_PARAMS, tau0: float = DEFAULT_TAU,
                    dtau: float | None = None, n_steps: int = 30, ng: int = 16,
                    grad_k: float = DEFAULT_GRAD_K, points: int = ACQUIRE_POINTS,
                    dwell: float | None = None) -> Experiment2Result:
    """Sweep the preparation delay, twirl, detect, and fit the modulation.

    For each tau the full twirl is applied, the low-frequency component of
    the I doublet is integrated, and the series is fit by a free-frequency
    sinusoid; with dtau = 1/(10 nu_I) the expected period is ten steps.
    """
    sim = TwoSpinSimulator(params, ng)
    if dtau is None:
        dtau = 1 / (10 * params.nu_i_hz)
    if dwell is None:
        dwell = _default_dwell(params)
    taus = tau0 + dtau * np.arange(n_steps)
    integrals = np.empty(n_steps)
    formula = np.empty(n_steps)
    center = params.nu_i_hz - params.j_hz / 2  # lower-frequency I component
    width = COMPONENT_WINDOW_FACTOR * params.j_hz
    for i, tau in enumerate(taus):
        state = prepare_mixed_singlet(sim, tau)
        state = apply_gradient_twirl(sim, state, grad_k)
        state = selective_detection(sim, state)
        spec = spectrum(sim.acquire(state, points, dwell))
        integrals[i] = integrate_peak(spec, center, width)
        formula[i] = singlet_fraction_formula(tau, params)
    fit = fit_sinusoid(taus, integrals, params.nu_i_hz)
    return Experiment2Result(taus=taus, integrals=integrals, formula_values=formula, fit=fit, dtau=dtau)
