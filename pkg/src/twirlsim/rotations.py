"""Single-qubit rotations and the named averaging sets built from them.

A rotation set is either a discrete list of unitaries with weights or a
continuous distribution together with a sampling plan (tensor-product
quadrature or Monte Carlo).  Both realize to a :class:`RotationEnsemble`,
a weighted batch of 2x2 special unitaries that the averaging engine
consumes.

Composition convention: in a written sequence "A B" the rotation A acts
first in time, so the combined matrix is U_B @ U_A.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

__all__ = [
    "Unitary",
    "axis_angle_unitary",
    "euler_unitary",
    "bilateral",
    "magic_angle",
    "RotationSetSpec",
    "RotationEnsemble",
    "parse_rotation_set",
    "enumerate_rotations",
    "sample_rotation",
    "realize_rotations",
    "CONTINUOUS_VARIANTS",
    "DISCRETE_VARIANTS",
]

UNITARITY_TOL = 1e-12

_AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


def magic_angle() -> float:
    """arccos(1/sqrt(3)) ~= 54.7356 deg, the tilt equalizing x, y and z."""
    return float(np.arccos(1 / np.sqrt(3)))


def _unit_axis(axis) -> np.ndarray:
    v = np.asarray(axis, dtype=float)
    if v.shape != (3,):
        raise ValueError("rotation axis must have three components")
    n = np.linalg.norm(v)
    if abs(n - 1) > 1e-12:
        raise ValueError(f"rotation axis must be a unit vector, |axis| = {n}")
    return v


@dataclass(frozen=True)
class Unitary:
    """A 2x2 special unitary with the parameters it was built from.

    det(U) is normalized to 1; unitaries are compared only through their
    action on density matrices, so the remaining sign ambiguity is
    irrelevant.
    """

    matrix: np.ndarray
    provenance: object = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        if np.abs(m @ m.conj().T - np.eye(2)).max() > UNITARITY_TOL:
            raise ValueError("matrix is not unitary")
        if abs(np.linalg.det(m) - 1) > UNITARITY_TOL:
            raise ValueError("matrix is not det-normalized")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.matrix, dtype=dtype or complex)


def axis_angle_unitary(xi: float, axis) -> Unitary:
    """exp(-i xi (n . sigma)/2) for a unit axis n."""
    n = _unit_axis(axis)
    m = _axis_angle_batch(np.array([xi]), n[0:1], n[1:2], n[2:3])[0]
    return Unitary(m, provenance=("axis-angle", float(xi), tuple(n)))


def euler_unitary(phi: float, theta: float, xi: float) -> Unitary:
    """Rotation z(phi), then y(theta), then z(xi), earliest rightmost."""
    m = _uz(np.array([xi]))[0] @ _uy(np.array([theta]))[0] @ _uz(np.array([phi]))[0]
    return Unitary(m, provenance=("euler", float(phi), float(theta), float(xi)))


def bilateral(u) -> np.ndarray:
    """u applied identically to both qubits: the 4x4 matrix u (x) u."""
    m = np.asarray(u, dtype=complex)
    return np.kron(m, m)


# ---------------------------------------------------------------------------
# vectorized constructors: each takes arrays of angles and returns (N, 2, 2)

def _uz(a: np.ndarray) -> np.ndarray:
    e = np.exp(-1j * a / 2)
    out = np.zeros(a.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = e
    out[..., 1, 1] = e.conj()
    return out


def _uy(a: np.ndarray) -> np.ndarray:
    c, s = np.cos(a / 2), np.sin(a / 2)
    out = np.zeros(a.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = c
    out[..., 1, 1] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    return out


def _axis_angle_batch(xi, nx, ny, nz) -> np.ndarray:
    c, s = np.cos(xi / 2), np.sin(xi / 2)
    out = np.zeros(np.shape(xi) + (2, 2), dtype=complex)
    out[..., 0, 0] = c - 1j * s * nz
    out[..., 1, 1] = c + 1j * s * nz
    out[..., 0, 1] = -1j * s * (nx - 1j * ny)
    out[..., 1, 0] = -1j * s * (nx + 1j * ny)
    return out


# ---------------------------------------------------------------------------

CONTINUOUS_VARIANTS = frozenset(
    ["random-axis-angle", "euler", "two-axis-zy", "axis120", "gradient-sequence"]
)
DISCRETE_VARIANTS = frozenset(
    ["pauli4", "cyclic", "bennett12", "discrete27", "discrete18a", "discrete18b"]
)

_ALIASES = {"gradseq": "gradient-sequence"}

DEFAULT_QUADRATURE_N = 64


@dataclass(frozen=True)
class RotationSetSpec:
    """A named averaging set plus, for continuous sets, its sampling plan.

    Continuous variants:
      random-axis-angle   angle uniform on [0, 2pi), axis uniform on the sphere
      euler               z-y-z angles; first/last uniform, middle axis spherical
      two-axis-zy         z(phi) then y(theta), both uniform on [0, 2pi)
      axis120             fixed 120 deg angle about a spherically uniform axis
      gradient-sequence   random z, 90 deg about x, random z

    Discrete variants:
      pauli4              identity and 180 deg about x, y, z
      cyclic              p-fold hopping 2 pi k/p about a fixed axis
      bennett12           the twelve rotations leaving a tetrahedron invariant
      discrete27          3-fold z-hops alternating with 90 deg and magic-angle
                          x pulses (27 elements)
      discrete18a         as discrete27 with the first hop set 2-fold
      discrete18b         as discrete27 with the middle hop set 2-fold

    sampling is 'exact' for discrete sets, else 'quadrature' (n nodes per
    continuous angle, trapezoid in cos(theta) for spherical axes) or
    'monte-carlo' (n draws from a generator seeded with ``seed``).
    """

    variant: str
    p: Optional[int] = None
    axis: Optional[Union[str, tuple]] = None
    sampling: str = "exact"
    n: int = DEFAULT_QUADRATURE_N
    seed: Optional[int] = None

    def __post_init__(self):
        v = _ALIASES.get(self.variant, self.variant)
        object.__setattr__(self, "variant", v)
        if v not in CONTINUOUS_VARIANTS and v not in DISCRETE_VARIANTS:
            raise ValueError(f"unknown rotation set variant {v!r}")
        if v == "cyclic":
            if self.p is None or self.p < 1:
                raise ValueError("cyclic sets need an order p >= 1")
            if self.axis is None:
                raise ValueError("cyclic sets need an axis")
            if isinstance(self.axis, str):
                if self.axis not in _AXES:
                    raise ValueError(f"unknown axis name {self.axis!r}")
            else:
                object.__setattr__(self, "axis", tuple(float(c) for c in _unit_axis(self.axis)))
        if v in DISCRETE_VARIANTS:
            object.__setattr__(self, "sampling", "exact")
        else:
            if self.sampling == "exact":
                object.__setattr__(self, "sampling", "quadrature")
            if self.sampling not in ("quadrature", "monte-carlo"):
                raise ValueError(f"unknown sampling plan {self.sampling!r}")
            if self.n < 1:
                raise ValueError("sampling needs n >= 1")

    @property
    def is_discrete(self) -> bool:
        return self.variant in DISCRETE_VARIANTS

    def __str__(self) -> str:
        parts = [self.variant]
        if self.variant == "cyclic":
            parts.append(str(self.p))
            parts.append(self.axis if isinstance(self.axis, str) else ",".join(repr(c) for c in self.axis))
        if not self.is_discrete:
            parts.append("mc" if self.sampling == "monte-carlo" else "quad")
            parts.append(str(self.n))
            if self.sampling == "monte-carlo" and self.seed is not None:
                parts.append(f"seed={self.seed}")
        return ":".join(parts)


def parse_rotation_set(text: str) -> RotationSetSpec:
    """Parse the canonical text form of a rotation set.

    Examples: ``bennett12``, ``cyclic:3:z``, ``euler`` (default quadrature),
    ``euler:quad:32``, ``euler:mc:100000:seed=7``.
    """
    tokens = [t.strip() for t in text.strip().split(":")]
    if not tokens or not tokens[0]:
        raise ValueError("empty rotation set specification")
    name = _ALIASES.get(tokens[0], tokens[0])
    rest = tokens[1:]
    p = None
    axis = None
    if name == "cyclic":
        if len(rest) < 2:
            raise ValueError("cyclic spec must look like cyclic:<p>:<axis>")
        try:
            p = int(rest[0])
        except ValueError:
            raise ValueError(f"cyclic order must be an integer, got {rest[0]!r}") from None
        axis = rest[1] if rest[1] in _AXES else tuple(float(c) for c in rest[1].split(","))
        rest = rest[2:]
    sampling = "exact"
    n = DEFAULT_QUADRATURE_N
    seed = None
    if rest:
        kind = rest.pop(0)
        if kind == "quad":
            sampling = "quadrature"
        elif kind == "mc":
            sampling = "monte-carlo"
        else:
            raise ValueError(f"unknown sampling plan {kind!r}; expected quad or mc")
        if rest:
            try:
                n = int(rest.pop(0))
            except ValueError:
                raise ValueError("sampling size must be an integer") from None
        if rest:
            tok = rest.pop(0)
            if not tok.startswith("seed="):
                raise ValueError(f"unexpected token {tok!r} in rotation set spec")
            seed = int(tok[5:])
        if rest:
            raise ValueError(f"trailing tokens in rotation set spec: {rest}")
    if name in DISCRETE_VARIANTS:
        # sampling tokens are ignored for discrete sets
        return RotationSetSpec(name, p=p, axis=axis)
    return RotationSetSpec(name, p=p, axis=axis, sampling=sampling if sampling != "exact" else "quadrature", n=n, seed=seed)


@dataclass(frozen=True)
class RotationEnsemble:
    """A weighted batch of 2x2 unitaries, weights summing to one."""

    unitaries: np.ndarray  # (N, 2, 2) complex
    weights: np.ndarray  # (N,) float

    def __post_init__(self):
        u = np.asarray(self.unitaries, dtype=complex)
        w = np.asarray(self.weights, dtype=float)
        if u.ndim != 3 or u.shape[1:] != (2, 2) or w.shape != (u.shape[0],):
            raise ValueError("ensemble needs (N, 2, 2) unitaries and (N,) weights")
        object.__setattr__(self, "unitaries", u)
        object.__setattr__(self, "weights", w / w.sum())

    def __len__(self) -> int:
        return self.unitaries.shape[0]


# ---------------------------------------------------------------------------
# grids

def _periodic_nodes(n: int):
    """n equispaced nodes on [0, 2pi); exact for harmonics below n."""
    return 2 * np.pi * np.arange(n) / n, np.full(n, 1 / n)


def _cos_theta_nodes(n: int):
    """Trapezoid nodes in cos(theta) on [-1, 1] for spherical axis averages."""
    if n == 1:
        return np.zeros(1), np.ones(1)
    c = np.linspace(-1.0, 1.0, n)
    w = np.full(n, 2 / (n - 1))
    w[0] /= 2
    w[-1] /= 2
    return c, w / 2  # measure dc/2


def _grid(*nodes_weights):
    """Tensor product of (nodes, weights) pairs, flattened."""
    nodes = [nw[0] for nw in nodes_weights]
    weights = [nw[1] for nw in nodes_weights]
    mesh = np.meshgrid(*nodes, indexing="ij")
    wmesh = np.meshgrid(*weights, indexing="ij")
    w = np.ones_like(wmesh[0])
    for wm in wmesh:
        w = w * wm
    return [m.ravel() for m in mesh], w.ravel()


def _spherical_axis(c, phi):
    s = np.sqrt(np.clip(1 - c**2, 0, None))
    return s * np.cos(phi), s * np.sin(phi), c


def _build_continuous(spec: RotationSetSpec) -> RotationEnsemble:
    v, n = spec.variant, spec.n
    if spec.sampling == "monte-carlo":
        rng = np.random.default_rng(spec.seed)
        w = np.full(n, 1 / n)
        if v == "random-axis-angle":
            xi = rng.uniform(0, 2 * np.pi, n)
            c = rng.uniform(-1, 1, n)
            phi = rng.uniform(0, 2 * np.pi, n)
            u = _axis_angle_batch(xi, *_spherical_axis(c, phi))
        elif v == "euler":
            xi = rng.uniform(0, 2 * np.pi, n)
            c = rng.uniform(-1, 1, n)
            phi = rng.uniform(0, 2 * np.pi, n)
            u = _uz(xi) @ _uy(np.arccos(c)) @ _uz(phi)
        elif v == "two-axis-zy":
            th = rng.uniform(0, 2 * np.pi, n)
            phi = rng.uniform(0, 2 * np.pi, n)
            u = _uy(th) @ _uz(phi)
        elif v == "axis120":
            c = rng.uniform(-1, 1, n)
            phi = rng.uniform(0, 2 * np.pi, n)
            u = _axis_angle_batch(np.full(n, 2 * np.pi / 3), *_spherical_axis(c, phi))
        elif v == "gradient-sequence":
            p1 = rng.uniform(0, 2 * np.pi, n)
            p2 = rng.uniform(0, 2 * np.pi, n)
            u = _uz(p2) @ _axis_angle_batch(np.full(n, np.pi / 2), 1.0, 0.0, 0.0) @ _uz(p1)
        else:  # pragma: no cover
            raise AssertionError(v)
        return RotationEnsemble(u, w)

    if v == "random-axis-angle":
        (xi, c, phi), w = _grid(_periodic_nodes(n), _cos_theta_nodes(n), _periodic_nodes(n))
        u = _axis_angle_batch(xi, *_spherical_axis(c, phi))
    elif v == "euler":
        (xi, c, phi), w = _grid(_periodic_nodes(n), _cos_theta_nodes(n), _periodic_nodes(n))
        u = _uz(xi) @ _uy(np.arccos(c)) @ _uz(phi)
    elif v == "two-axis-zy":
        (th, phi), w = _grid(_periodic_nodes(n), _periodic_nodes(n))
        u = _uy(th) @ _uz(phi)
    elif v == "axis120":
        (c, phi), w = _grid(_cos_theta_nodes(n), _periodic_nodes(n))
        u = _axis_angle_batch(np.full(c.shape, 2 * np.pi / 3), *_spherical_axis(c, phi))
    elif v == "gradient-sequence":
        (p1, p2), w = _grid(_periodic_nodes(n), _periodic_nodes(n))
        u = _uz(p2) @ _axis_angle_batch(np.full(p1.shape, np.pi / 2), 1.0, 0.0, 0.0) @ _uz(p1)
    else:  # pragma: no cover
        raise AssertionError(v)
    return RotationEnsemble(u, w)


def _axis_vector(axis) -> np.ndarray:
    if isinstance(axis, str):
        return np.array(_AXES[axis])
    return _unit_axis(axis)


def _hop_sequence(first: int, mid: int) -> np.ndarray:
    """z-hop sets alternating with 90 deg and magic-angle x pulses.

    Elements are z(2 pi m/first), 90x, z(2 pi n/mid), magic-x, z(2 pi p/3)
    composed in time order (earliest factor rightmost as a matrix).
    """
    v90 = _axis_angle_batch(np.array(np.pi / 2), 1.0, 0.0, 0.0)
    vmagic = _axis_angle_batch(np.array(magic_angle()), 1.0, 0.0, 0.0)
    els = []
    for m in range(first):
        for k in range(mid):
            for p in range(3):
                u = (
                    _uz(np.array(2 * np.pi * p / 3))
                    @ vmagic
                    @ _uz(np.array(2 * np.pi * k / mid))
                    @ v90
                    @ _uz(np.array(2 * np.pi * m / first))
                )
                els.append(u)
    return np.array(els)


def _build_discrete(spec: RotationSetSpec) -> RotationEnsemble:
    v = spec.variant
    if v == "pauli4":
        u = np.array(
            [
                _axis_angle_batch(np.array(0.0), 0.0, 0.0, 1.0),
                _axis_angle_batch(np.array(np.pi), 1.0, 0.0, 0.0),
                _axis_angle_batch(np.array(np.pi), 0.0, 1.0, 0.0),
                _axis_angle_batch(np.array(np.pi), 0.0, 0.0, 1.0),
            ]
        )
    elif v == "cyclic":
        ax = _axis_vector(spec.axis)
        angles = 2 * np.pi * np.arange(spec.p) / spec.p
        u = _axis_angle_batch(angles, ax[0], ax[1], ax[2])
    elif v == "bennett12":
        els = [_axis_angle_batch(np.array(0.0), 0.0, 0.0, 1.0)]
        for ax in ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)):
            els.append(_axis_angle_batch(np.array(np.pi), *ax))
        for diag in ((1, 1, 1), (-1, 1, 1), (1, -1, 1), (-1, -1, 1)):
            d = np.array(diag) / np.sqrt(3)
            for sign in (1, -1):
                els.append(_axis_angle_batch(np.array(sign * 2 * np.pi / 3), d[0], d[1], d[2]))
        u = np.array(els)
    elif v == "discrete27":
        u = _hop_sequence(3, 3)
    elif v == "discrete18a":
        u = _hop_sequence(2, 3)
    elif v == "discrete18b":
        u = _hop_sequence(3, 2)
    else:  # pragma: no cover
        raise AssertionError(v)
    return RotationEnsemble(u, np.full(len(u), 1 / len(u)))


def enumerate_rotations(spec: RotationSetSpec) -> RotationEnsemble:
    """All elements of a discrete set with uniform weights.

    Raises ValueError for continuous variants; those are sampled or
    integrated, not enumerated.
    """
    if not spec.is_discrete:
        raise ValueError(f"{spec.variant} is a continuous set and cannot be enumerated")
    return _build_discrete(spec)


def sample_rotation(spec: RotationSetSpec, rng: np.random.Generator) -> Unitary:
    """One draw from a continuous set, using the caller-owned generator."""
    if spec.is_discrete:
        raise ValueError(f"{spec.variant} is a discrete set; use enumerate_rotations")
    v = spec.variant
    if v == "random-axis-angle":
        xi = rng.uniform(0, 2 * np.pi)
        c = rng.uniform(-1, 1)
        phi = rng.uniform(0, 2 * np.pi)
        m = _axis_angle_batch(np.array(xi), *_spherical_axis(np.array(c), np.array(phi)))
        prov = ("axis-angle", xi, (float(np.sqrt(1 - c * c) * np.cos(phi)), float(np.sqrt(1 - c * c) * np.sin(phi)), c))
    elif v == "euler":
        xi = rng.uniform(0, 2 * np.pi)
        c = rng.uniform(-1, 1)
        phi = rng.uniform(0, 2 * np.pi)
        m = _uz(np.array(xi)) @ _uy(np.array(np.arccos(c))) @ _uz(np.array(phi))
        prov = ("euler", phi, float(np.arccos(c)), xi)
    elif v == "two-axis-zy":
        th = rng.uniform(0, 2 * np.pi)
        phi = rng.uniform(0, 2 * np.pi)
        m = _uy(np.array(th)) @ _uz(np.array(phi))
        prov = ("two-axis-zy", phi, th)
    elif v == "axis120":
        c = rng.uniform(-1, 1)
        phi = rng.uniform(0, 2 * np.pi)
        m = _axis_angle_batch(np.array(2 * np.pi / 3), *_spherical_axis(np.array(c), np.array(phi)))
        prov = ("axis120", phi, float(c))
    elif v == "gradient-sequence":
        p1 = rng.uniform(0, 2 * np.pi)
        p2 = rng.uniform(0, 2 * np.pi)
        m = _uz(np.array(p2)) @ _axis_angle_batch(np.array(np.pi / 2), 1.0, 0.0, 0.0) @ _uz(np.array(p1))
        prov = ("gradient-sequence", p1, p2)
    else:  # pragma: no cover
        raise AssertionError(v)
    return Unitary(np.asarray(m), provenance=prov)


def realize_rotations(spec: RotationSetSpec) -> RotationEnsemble:
    """Weighted unitaries for any set: exact elements, quadrature or MC."""
    if spec.is_discrete:
        return _build_discrete(spec)
    return _build_continuous(spec)
