"""Fixed-size complex linear algebra for one and two qubits.

Canonical states, operator bases and state-level metrics used by the rest of
the package.  Everything is dense complex128.  The two-qubit computational
basis is ordered |00>, |01>, |10>, |11> with the first (I) qubit leftmost.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "DensityMatrix",
    "pauli",
    "tensor",
    "bell_state",
    "bell_basis",
    "singlet_projector",
    "werner",
    "singlet_fidelity",
    "bloch_vector",
    "from_bloch",
    "bell_diagonal_populations",
    "BellPopulations",
    "PRODUCT_OPERATOR_LABELS",
    "product_operator",
    "product_operator_decomposition",
    "trace_distance",
    "fidelity",
    "is_werner",
    "random_density_matrix",
    "random_deviation_matrix",
]

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_TOL = 1e-10

_SIGMA = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

BELL_LABELS = ("psi-", "psi+", "phi-", "phi+")


def pauli(axis: str) -> np.ndarray:
    """Return a Pauli matrix ('x', 'y', 'z') or the identity ('i'/'identity')."""
    key = axis.lower()
    if key == "identity":
        key = "i"
    if key not in _SIGMA:
        raise ValueError(f"unknown Pauli axis {axis!r}; expected x, y, z or identity")
    return _SIGMA[key].copy()


def tensor(a, b) -> np.ndarray:
    """Kronecker product with the first factor indexing the outer blocks."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def bell_state(kind: str) -> np.ndarray:
    """One of the four Bell vectors 'psi-', 'psi+', 'phi-', 'phi+'.

    psi+- = (|01> +- |10>)/sqrt(2), phi+- = (|00> +- |11>)/sqrt(2).
    """
    s = 1 / np.sqrt(2)
    table = {
        "psi-": [0, s, -s, 0],
        "psi+": [0, s, s, 0],
        "phi-": [s, 0, 0, -s],
        "phi+": [s, 0, 0, s],
    }
    if kind not in table:
        raise ValueError(f"unknown Bell state {kind!r}; expected one of {BELL_LABELS}")
    return np.array(table[kind], dtype=complex)


def bell_basis() -> np.ndarray:
    """4x4 array whose rows are the Bell vectors in BELL_LABELS order."""
    return np.array([bell_state(k) for k in BELL_LABELS])


def singlet_projector() -> np.ndarray:
    psi = bell_state("psi-")
    return np.outer(psi, psi.conj())


def _as_matrix(rho) -> np.ndarray:
    m = np.asarray(rho, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class DensityMatrix:
    """A validated 2x2 or 4x4 Hermitian matrix.

    kind='state' requires unit trace and positive semidefiniteness;
    kind='deviation' requires zero trace (the traceless part of a highly
    mixed state, whose coefficients may be negative).  Instances are
    immutable and behave like arrays under ``np.asarray``.
    """

    matrix: np.ndarray
    kind: str = "state"

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        if m.shape[0] not in (2, 4):
            raise ValueError(f"dimension must be 2 or 4, got {m.shape[0]}")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix entries must be finite")
        herm = np.abs(m - m.conj().T).max()
        if herm > HERMITICITY_TOL:
            raise ValueError(f"matrix not Hermitian (residual {herm:.2e})")
        tr = np.trace(m)
        if self.kind == "state":
            if abs(tr - 1) > TRACE_TOL:
                raise ValueError(f"state trace must be 1, got {tr}")
            lo = np.linalg.eigvalsh(m).min()
            if lo < -EIGENVALUE_TOL:
                raise ValueError(f"state has negative eigenvalue {lo:.2e}")
        elif self.kind == "deviation":
            if abs(tr) > TRACE_TOL:
                raise ValueError(f"deviation trace must be 0, got {tr}")
        else:
            raise ValueError(f"kind must be 'state' or 'deviation', got {self.kind!r}")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.matrix, dtype=dtype or complex)


def werner(epsilon: float) -> DensityMatrix:
    """Mixture of epsilon parts singlet and (1 - epsilon) parts I/4.

    epsilon must lie in [-1/3, 1]; outside that range the matrix would not
    be positive semidefinite.
    """
    if not -1 / 3 - 1e-12 <= epsilon <= 1 + 1e-12:
        raise ValueError(f"epsilon must lie in [-1/3, 1], got {epsilon}")
    m = epsilon * singlet_projector() + (1 - epsilon) * np.eye(4) / 4
    return DensityMatrix(m, kind="state")


def singlet_fidelity(rho) -> float:
    """<psi-|rho|psi->.

    For a deviation matrix this is the (possibly negative) singlet
    coefficient rather than a fidelity proper.
    """
    m = _as_matrix(rho)
    if m.shape[0] != 4:
        raise ValueError("singlet fidelity requires a two-qubit matrix")
    psi = bell_state("psi-")
    val = psi.conj() @ m @ psi
    return float(val.real)


def bloch_vector(rho) -> np.ndarray:
    """Expectation values (Tr rho sigma_x, Tr rho sigma_y, Tr rho sigma_z)."""
    m = _as_matrix(rho)
    if m.shape[0] != 2:
        raise ValueError("bloch_vector requires a single-qubit matrix")
    return np.array([np.trace(m @ _SIGMA[a]).real for a in "xyz"])


def from_bloch(vec) -> DensityMatrix:
    """Single-qubit state (I + r . sigma)/2 from a Bloch vector of norm <= 1."""
    v = np.asarray(vec, dtype=float)
    if v.shape != (3,):
        raise ValueError("Bloch vector must have three components")
    if np.linalg.norm(v) > 1 + EIGENVALUE_TOL:
        raise ValueError(f"Bloch vector norm {np.linalg.norm(v)} exceeds 1")
    m = (np.eye(2, dtype=complex) + v[0] * _SIGMA["x"] + v[1] * _SIGMA["y"] + v[2] * _SIGMA["z"]) / 2
    return DensityMatrix(m, kind="state")


@dataclass(frozen=True)
class BellPopulations:
    """Diagonal of a two-qubit matrix in the Bell basis.

    max_off_diagonal is the largest Bell-basis off-diagonal magnitude, so
    'Bell diagonal' is a testable statement.
    """

    psi_minus: float
    psi_plus: float
    phi_minus: float
    phi_plus: float
    max_off_diagonal: float

    def as_array(self) -> np.ndarray:
        return np.array([self.psi_minus, self.psi_plus, self.phi_minus, self.phi_plus])


def bell_diagonal_populations(rho) -> BellPopulations:
    """Populations (psi-, psi+, phi-, phi+) plus the largest off-diagonal."""
    m = _as_matrix(rho)
    if m.shape[0] != 4:
        raise ValueError("Bell populations require a two-qubit matrix")
    basis = bell_basis()
    in_bell = basis.conj() @ m @ basis.T
    pops = np.diag(in_bell).real
    off = np.abs(in_bell - np.diag(np.diag(in_bell))).max()
    return BellPopulations(*pops, max_off_diagonal=float(off))


PRODUCT_OPERATOR_LABELS = (
    "Ix", "Iy", "Iz", "Sx", "Sy", "Sz",
    "2IxSx", "2IxSy", "2IxSz",
    "2IySx", "2IySy", "2IySz",
    "2IzSx", "2IzSy", "2IzSz",
)


def product_operator(label: str) -> np.ndarray:
    """Matrix of a product operator such as 'Iz', 'Sx' or '2IxSz'.

    With I_a = (sigma_a x 1)/2 and 2 I_a S_b = (sigma_a x sigma_b)/2 the
    fifteen operators form an orthonormal traceless basis,
    Tr(B_j B_k) = delta_jk.
    """
    if label.startswith("2"):
        return tensor(_SIGMA[label[2].lower()], _SIGMA[label[4].lower()]) / 2
    if label[0] == "I":
        return tensor(_SIGMA[label[1].lower()], _SIGMA["i"]) / 2
    if label[0] == "S":
        return tensor(_SIGMA["i"], _SIGMA[label[1].lower()]) / 2
    raise ValueError(f"unknown product operator label {label!r}")


def product_operator_decomposition(rho) -> dict:
    """Coefficients of a traceless two-qubit matrix over the product operators.

    Returns {label: coefficient} for all fifteen labels, with
    rho = sum_k c_k B_k exactly (the basis is orthonormal, so c_k = Tr(B_k rho)).
    """
    m = _as_matrix(rho)
    if m.shape[0] != 4:
        raise ValueError("product operator decomposition requires a two-qubit matrix")
    out = {}
    for label in PRODUCT_OPERATOR_LABELS:
        c = np.trace(product_operator(label) @ m)
        out[label] = float(c.real)
    return out


def trace_distance(rho, sigma) -> float:
    """Half the sum of absolute eigenvalues of rho - sigma."""
    a, b = _as_matrix(rho), _as_matrix(sigma)
    if a.shape != b.shape:
        raise ValueError("trace distance requires matrices of equal dimension")
    return float(0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum())


def _sqrtm_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 for states."""
    a, b = _as_matrix(rho), _as_matrix(sigma)
    if a.shape != b.shape:
        raise ValueError("fidelity requires matrices of equal dimension")
    sr = _sqrtm_psd(a)
    w = np.linalg.eigvalsh(sr @ b @ sr)
    return float(np.sqrt(np.clip(w, 0, None)).sum() ** 2)


def exact_twirl_matrix(rho) -> np.ndarray:
    """Image of a two-qubit matrix under the full bilateral twirl.

    The twirl keeps only the identity and singlet components:
    T(X) = a I + b P with a = (Tr X - F)/3 and b = (4 F - Tr X)/3 where
    F = <psi-|X|psi->.  Trace and singlet coefficient are preserved, every
    other component is annihilated.  Works for states and deviations alike.
    """
    m = _as_matrix(rho)
    if m.shape[0] != 4:
        raise ValueError("twirl requires a two-qubit matrix")
    f = singlet_fidelity(m)
    tr = np.trace(m).real
    return (tr - f) / 3 * np.eye(4, dtype=complex) + (4 * f - tr) / 3 * singlet_projector()


def is_werner(rho, tol: float) -> Optional[float]:
    """Coefficient of the Werner family member closest to rho, or None.

    For a state the returned value is epsilon = (4 F - 1)/3; for a
    deviation matrix it is the amplitude of the traceless Werner direction.
    None is returned when the largest entry of rho minus its twirl image
    exceeds tol.
    """
    m = _as_matrix(rho)
    target = exact_twirl_matrix(m)
    if np.abs(m - target).max() > tol:
        return None
    f = singlet_fidelity(m)
    tr = np.trace(m).real
    return (4 * f - tr) / 3


def random_density_matrix(dim: int, rng: np.random.Generator) -> DensityMatrix:
    """Random full-rank state: normalized A A^dagger with Ginibre A."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = a @ a.conj().T
    return DensityMatrix(m / np.trace(m).real, kind="state")


def random_deviation_matrix(dim: int, rng: np.random.Generator) -> DensityMatrix:
    """Random Hermitian traceless matrix with entries of order one."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (a + a.conj().T) / 2
    h -= np.trace(h) / dim * np.eye(dim)
    return DensityMatrix(h, kind="deviation")
