"""The averaging engine: channels built from rotation sets.

A rotation set applied in 'local' mode averages a single qubit; in
'bilateral' mode the same rotation acts on both qubits of a pair.  Channels
are represented by their transfer matrix over the orthonormal Pauli basis
(sigma_a/sqrt(2) for one qubit, (sigma_a x sigma_b)/2 for two), which is
real for any mixture of unitary conjugations.

All averages are fixed-order vectorized sums, so results are deterministic
regardless of how callers parallelize over independent specs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from functools import lru_cache

import numpy as np

from . import qcore
from .rotations import RotationSetSpec, RotationEnsemble, bilateral, realize_rotations

__all__ = [
    "average",
    "superoperator",
    "bloch_shrink",
    "exact_twirl",
    "classify",
    "default_tolerance",
    "TwirlReport",
    "channel_from_ensemble",
    "EXACT_TWIRL_SPEC",
]

_CHUNK = 65536

EXACT_TWIRL_SPEC = RotationSetSpec("bennett12")


def _pauli_basis(dim: int) -> np.ndarray:
    if dim == 2:
        return np.array([qcore.pauli(a) / np.sqrt(2) for a in "ixyz"])
    return np.array(
        [qcore.tensor(qcore.pauli(a), qcore.pauli(b)) / 2 for a in "ixyz" for b in "ixyz"]
    )


def channel_from_ensemble(ens: RotationEnsemble, mode: str) -> np.ndarray:
    """Averaged conjugation channel as a (d,d,d,d) tensor.

    T[a,b,d,c] = sum_n w_n U[n,a,b] conj(U)[n,d,c], so the channel acts as
    Phi(X)[a,d] = sum_{b,c} T[a,b,d,c] X[b,c].
    """
    if mode not in ("local", "bilateral"):
        raise ValueError(f"mode must be 'local' or 'bilateral', got {mode!r}")
    us, w = ens.unitaries, ens.weights
    d = 2 if mode == "local" else 4
    t = np.zeros((d * d, d * d), dtype=complex)
    for i in range(0, len(us), _CHUNK):
        u = us[i : i + _CHUNK]
        if mode == "bilateral":
            u = np.einsum("nab,ncd->nacbd", u, u).reshape(len(u), 4, 4)
        a = u.reshape(len(u), d * d)
        t += (w[i : i + _CHUNK, None] * a).T @ a.conj()
    return t.reshape(d, d, d, d)


def _apply_channel(t: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return np.einsum("abdc,bc->ad", t, rho)


@lru_cache(maxsize=64)
def _cached_channel(spec: RotationSetSpec, mode: str) -> np.ndarray:
    return channel_from_ensemble(realize_rotations(spec), mode)


def average(rho, spec: RotationSetSpec, mode: str):
    """Weighted average of U rho U^dagger over the realized set.

    mode='local' expects a single-qubit matrix, mode='bilateral' a two-qubit
    one (each U acting as u (x) u).  Trace, Hermiticity and, bilaterally,
    the singlet coefficient are preserved.  DensityMatrix inputs come back
    as DensityMatrix of the same kind.
    """
    m = np.asarray(rho, dtype=complex)
    expected = 2 if mode == "local" else 4
    if m.shape != (expected, expected):
        raise ValueError(f"mode {mode!r} needs a {expected}x{expected} matrix, got {m.shape}")
    out = _apply_channel(_cached_channel(spec, mode), m)
    out = (out + out.conj().T) / 2
    if isinstance(rho, qcore.DensityMatrix):
        return qcore.DensityMatrix(out, kind=rho.kind)
    return out


def superoperator(spec: RotationSetSpec, mode: str) -> np.ndarray:
    """Real transfer matrix over the orthonormal Pauli basis.

    Column k holds the coefficients of the image of basis operator k; the
    first row of a trace-preserving channel is (1, 0, ..., 0).
    """
    t = _cached_channel(spec, mode)
    basis = _pauli_basis(t.shape[0])
    images = np.einsum("abdc,kbc->kad", t, basis)
    s = np.einsum("jad,kda->jk", basis, images)
    assert np.abs(s.imag).max() < 1e-12
    return s.real


def bloch_shrink(spec: RotationSetSpec) -> np.ndarray:
    """Singular values of the 3x3 Bloch block of the local channel.

    (1, 1, 1) means the set does nothing to Bloch vectors; (0, 0, 0) means
    it averages every single-qubit state to I/2.
    """
    s = superoperator(spec, "local")
    return np.linalg.svd(s[1:, 1:], compute_uv=False)


def exact_twirl(rho):
    """Project a two-qubit matrix onto the span of identity and singlet.

    Agrees with ``average(rho, bennett12, 'bilateral')`` to 1e-12 and
    preserves the singlet coefficient exactly.
    """
    out = qcore.exact_twirl_matrix(rho)
    if isinstance(rho, qcore.DensityMatrix):
        return qcore.DensityMatrix(out, kind=rho.kind)
    return out


def default_tolerance(spec: RotationSetSpec) -> float:
    """Classification tolerance: 1e-12 exact sums, 1e-3 quadrature, 3/sqrt(n) MC."""
    if spec.is_discrete:
        return 1e-12
    if spec.sampling == "quadrature":
        return 1e-3
    return 3 / np.sqrt(spec.n)


@dataclass(frozen=True)
class TwirlReport:
    """Classification of a rotation set's averaging behaviour.

    A set is a single-qubit averager when its local channel sends every
    Bloch vector to zero; a partial twirl when the bilateral channel leaves
    every input Bell diagonal with equal phi+/phi- populations without
    being the full twirl; and a full twirl when the bilateral channel
    matches the twelve-rotation reference channel entrywise.
    """

    spec: str
    is_single_qubit_averager: bool
    bloch_shrink_singular_values: tuple
    is_partial_twirl: bool
    is_full_twirl: bool
    residual_to_exact_twirl: float
    singlet_fidelity_drift: float
    tolerance: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bloch_shrink_singular_values"] = list(self.bloch_shrink_singular_values)
        return d

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def _bell_structure_residuals(spec: RotationSetSpec):
    """Worst Bell-basis off-diagonal and phi population imbalance over a basis."""
    t = _cached_channel(spec, "bilateral")
    basis = _pauli_basis(4)
    bell = qcore.bell_basis()
    max_off = 0.0
    max_phi_diff = 0.0
    for b in basis:
        out = _apply_channel(t, b)
        in_bell = bell.conj() @ out @ bell.T
        off = np.abs(in_bell - np.diag(np.diag(in_bell))).max()
        max_off = max(max_off, float(off))
        max_phi_diff = max(max_phi_diff, float(abs(in_bell[2, 2] - in_bell[3, 3])))
    return max_off, max_phi_diff


def classify(spec: RotationSetSpec, tol: float | None = None) -> TwirlReport:
    """Decide averager / partial twirl / full twirl for a rotation set.

    The tolerance defaults to :func:`default_tolerance` for the spec's
    sampling plan.
    """
    if tol is None:
        tol = default_tolerance(spec)
    shrink = bloch_shrink(spec)
    averager = bool(shrink.max() <= tol)

    s_bil = superoperator(spec, "bilateral")
    s_ref = superoperator(EXACT_TWIRL_SPEC, "bilateral")
    residual = float(np.abs(s_bil - s_ref).max())
    full = residual <= tol

    max_off, max_phi_diff = _bell_structure_residuals(spec)
    partial = (max_off <= tol) and (max_phi_diff <= tol) and not full

    # Drift of the singlet functional over the orthonormal basis: how much
    # the channel changes <psi-|rho|psi-> in the worst direction.
    basis = _pauli_basis(4)
    t = _cached_channel(spec, "bilateral")
    drift = 0.0
    for b in basis:
        out = _apply_channel(t, b)
        drift = max(drift, abs(qcore.singlet_fidelity(out) - qcore.singlet_fidelity(b)))

    return TwirlReport(
        spec=str(spec),
        is_single_qubit_averager=averager,
        bloch_shrink_singular_values=tuple(float(v) for v in shrink),
        is_partial_twirl=partial,
        is_full_twirl=full,
        residual_to_exact_twirl=residual,
        singlet_fidelity_drift=float(drift),
        tolerance=float(tol),
    )
