"""Dense operator algebra: spin matrices, tensor products and local frames.

Operators are plain complex ``numpy`` arrays of shape ``(d, d)``.  All
energies and rates are angular frequencies in rad/us; :func:`mhz` converts
linear frequencies on ingest.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

TWO_PI = 2.0 * np.pi
HERMITIAN_RTOL = 1e-12


def mhz(value):
    """Convert a linear frequency in MHz to rad/us."""
    out = TWO_PI * np.asarray(value, dtype=float)
    return float(out) if out.ndim == 0 else out


def to_mhz(value):
    """Convert rad/us back to MHz."""
    out = np.asarray(value, dtype=float) / TWO_PI
    return float(out) if out.ndim == 0 else out


def as_operator(op, dim=None) -> np.ndarray:
    """Validate and return ``op`` as a square complex matrix."""
    arr = np.asarray(op, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValueError(f"operator must be a non-empty square matrix, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"operator dimension {arr.shape[0]} does not match expected {dim}")
    return arr


def is_hermitian(op, rtol=HERMITIAN_RTOL) -> bool:
    arr = np.asarray(op)
    scale = np.max(np.abs(arr)) if arr.size else 0.0
    return bool(np.max(np.abs(arr - arr.conj().T), initial=0.0) <= rtol * max(scale, 1e-300))


def kron(*ops) -> np.ndarray:
    """Tensor product of one or more operators (left factor is the slow index)."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    return reduce(np.kron, (as_operator(o) for o in ops))


def ket(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(dim: int, index: int) -> np.ndarray:
    p = np.zeros((dim, dim), dtype=complex)
    p[index, index] = 1.0
    return p


def transition(dim: int, to: int, frm: int) -> np.ndarray:
    """The operator |to><frm|."""
    t = np.zeros((dim, dim), dtype=complex)
    t[to, frm] = 1.0
    return t


@dataclass(frozen=True)
class SpinSpecies:
    """A nuclear spin species; only spin 1/2 and spin 1 are supported."""

    spin: float
    label: str = ""

    def __post_init__(self):
        if self.spin not in (0.5, 1.0):
            raise ValueError(f"unsupported spin value {self.spin!r}; expected 1/2 or 1")

    @property
    def dim(self) -> int:
        return int(round(2 * self.spin + 1))

    @property
    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers, ordered from +spin down to -spin."""
        return self.spin - np.arange(self.dim)


C13 = SpinSpecies(0.5, "13C")
N14 = SpinSpecies(1.0, "14N")


def spin_ops(species: SpinSpecies):
    """Return ``(I_z, I_plus, I_minus)`` in the basis ``|m=+s>, ..., |m=-s>``."""
    s = species.spin
    m = species.m_values
    iz = np.diag(m).astype(complex)
    ip = np.zeros((species.dim, species.dim), dtype=complex)
    for k in range(1, species.dim):
        # <m+1| I_+ |m> = sqrt(s(s+1) - m(m+1))
        ip[k - 1, k] = np.sqrt(s * (s + 1) - m[k] * (m[k] + 1))
    return iz, ip, ip.conj().T.copy()


def spin_vector(species: SpinSpecies):
    """Cartesian spin operators ``(I_x, I_y, I_z)``."""
    iz, ip, im = spin_ops(species)
    return (ip + im) / 2, (ip - im) / 2j, iz


_FRAME_POLE_TOL = 1e-8


def local_frame(b) -> np.ndarray:
    """Right-handed orthonormal triad with ``e_Z`` along ``b``.

    Returns a 3x3 array whose rows are ``e_X, e_Y, e_Z``.  ``e_X`` is
    ``z_hat x e_Z`` normalised, falling back to ``x_hat`` near the poles.
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (3,):
        raise ValueError("local_frame expects a 3-vector")
    norm = np.linalg.norm(b)
    if norm == 0.0:
        raise ValueError("local_frame is undefined for the zero vector")
    ez = b / norm
    ex = np.cross([0.0, 0.0, 1.0], ez)
    if np.linalg.norm(ex) < _FRAME_POLE_TOL:
        ex = np.array([1.0, 0.0, 0.0])
        # project out any residual e_Z component so the triad stays orthonormal
        ex = ex - ex.dot(ez) * ez
    ex = ex / np.linalg.norm(ex)
    ey = np.cross(ez, ex)
    return np.vstack([ex, ey, ez])


@dataclass(frozen=True)
class HyperfineTensor:
    """Hyperfine tensor ``A`` (rad/us) together with the nuclear local frame.

    ``frame`` rows are ``e_X, e_Y, e_Z``; ``e_Z`` is parallel to the Knight
    field vector the frame was built from.
    """

    a: np.ndarray
    frame: np.ndarray = field(default=None)

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.shape != (3, 3):
            raise ValueError("hyperfine tensor must be 3x3")
        object.__setattr__(self, "a", a)
        frame = self.frame
        if frame is None:
            frame = local_frame(np.array([0.0, 0.0, 1.0]) @ a)
        frame = np.asarray(frame, dtype=float)
        if not np.allclose(frame @ frame.T, np.eye(3), atol=1e-12) or np.linalg.det(frame) < 0:
            raise ValueError("frame must be a right-handed orthonormal triad")
        object.__setattr__(self, "frame", frame)

    @classmethod
    def along(cls, a, b) -> "HyperfineTensor":
        """Tensor whose local frame has ``e_Z`` parallel to the Knight field ``b``."""
        return cls(a, local_frame(b))

    @property
    def e_plus(self) -> np.ndarray:
        return self.frame[0] + 1j * self.frame[1]

    @property
    def e_minus(self) -> np.ndarray:
        return self.frame[0] - 1j * self.frame[1]

    def component(self, alpha, beta) -> complex:
        """``A_{alpha,beta} = e_alpha . A . e_beta`` for labels X, Y, Z, +, -."""
        vecs = {"X": self.frame[0], "Y": self.frame[1], "Z": self.frame[2],
                "+": self.e_plus, "-": self.e_minus}
        return complex(vecs[alpha] @ self.a @ vecs[beta])

    @property
    def longitudinal(self) -> float:
        """Coupling ``a = e_z . A . e_Z`` with ``e_z`` the N-V axis."""
        return float(np.array([0.0, 0.0, 1.0]) @ self.a @ self.frame[2])
