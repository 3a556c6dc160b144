"""Liouvillian construction, steady states, resolvents and propagation.

Density matrices are vectorised by stacking columns, so that
``vec(A X B) = (B^T kron A) vec(X)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .exceptions import DegenerateSteadyState, NoStationaryState, SingularResolvent
from .operators import as_operator, is_hermitian

DEGENERACY_GAP = 1e-8
STATIONARY_RESIDUAL = 1e-8
CONDITION_LIMIT = 1e10
OVERLAP_TOL = 1e-10


def vec(op) -> np.ndarray:
    return np.asarray(op, dtype=complex).reshape(-1, order="F")


def unvec(v, dim: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape((dim, dim), order="F")


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian plus Lindblad channels.

    Parameters
    ----------
    hamiltonian : (d, d) array
        Hermitian Hamiltonian in rad/us.
    jumps : sequence of (i, f, rate)
        Incoherent transitions ``|f><i|`` with rate ``gamma_{f<-i}`` (1/us).
    pure_dephasing : sequence of float or mapping level -> rate, optional
        Per-level pure dephasing, realised as the jump ``|i><i|``.
    operators : sequence of (L, rate), optional
        Extra jump operators given as full matrices, for composite spaces
        where a channel is not a single level-to-level transition.
    """

    hamiltonian: np.ndarray
    jumps: Sequence = ()
    pure_dephasing: object = None
    operators: Sequence = ()
    labels: Optional[Sequence[str]] = field(default=None, compare=False)

    def __post_init__(self):
        h = as_operator(self.hamiltonian)
        if not is_hermitian(h, rtol=1e-10):
            raise ValueError("hamiltonian must be Hermitian")
        object.__setattr__(self, "hamiltonian", h)
        d = h.shape[0]
        jumps = tuple((int(i), int(f), float(r)) for i, f, r in self.jumps)
        for i, f, r in jumps:
            if not (0 <= i < d and 0 <= f < d):
                raise ValueError(f"jump {i}->{f} references a level outside 0..{d - 1}")
            if r < 0:
                raise ValueError(f"negative rate {r} for jump {i}->{f}")
        object.__setattr__(self, "jumps", jumps)
        deph = np.zeros(d)
        if isinstance(self.pure_dephasing, dict):
            for level, rate in self.pure_dephasing.items():
                deph[int(level)] = rate
        elif self.pure_dephasing is not None:
            deph[:] = np.broadcast_to(np.asarray(self.pure_dephasing, dtype=float), (d,))
        if np.any(deph < 0):
            raise ValueError("pure dephasing rates must be non-negative")
        object.__setattr__(self, "pure_dephasing", deph)
        ops = tuple((as_operator(op, d), float(r)) for op, r in self.operators)
        if any(r < 0 for _, r in ops):
            raise ValueError("jump operator rates must be non-negative")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def jump_operators(self):
        """All channels as ``(L, rate)`` pairs, including pure dephasing."""
        d = self.dim
        out = []
        for i, f, r in self.jumps:
            op = np.zeros((d, d), dtype=complex)
            op[f, i] = 1.0
            out.append((op, r))
        for i, r in enumerate(self.pure_dephasing):
            if r > 0:
                op = np.zeros((d, d), dtype=complex)
                op[i, i] = 1.0
                out.append((op, r))
        out.extend(self.operators)
        return out

    def total_decay(self) -> np.ndarray:
        """``Gamma_i = sum_f gamma_{f<-i}``, including the pure-dephasing self rate."""
        gam = self.pure_dephasing.copy()
        for i, _, r in self.jumps:
            gam[i] += r
        return gam

    def self_rates(self) -> np.ndarray:
        """``gamma_{ii}``: the part of ``Gamma_i`` that returns to ``|i>``."""
        gam = self.pure_dephasing.copy()
        for i, f, r in self.jumps:
            if i == f:
                gam[i] += r
        return gam

    def with_hamiltonian(self, hamiltonian) -> "LindbladModel":
        return LindbladModel(hamiltonian, self.jumps, self.pure_dephasing, self.operators, self.labels)


@dataclass(frozen=True)
class Superoperator:
    """Matrix acting on column-stacked operators of dimension ``dim``."""

    matrix: np.ndarray
    dim: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.dim ** 2, self.dim ** 2):
            raise ValueError(f"superoperator shape {m.shape} inconsistent with dim {self.dim}")
        object.__setattr__(self, "matrix", m)

    def __call__(self, op) -> np.ndarray:
        return unvec(self.matrix @ vec(op), self.dim)

    def __add__(self, other: "Superoperator") -> "Superoperator":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return Superoperator(self.matrix + other.matrix, self.dim)

    def __sub__(self, other: "Superoperator") -> "Superoperator":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return Superoperator(self.matrix - other.matrix, self.dim)

    def eigvals(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


def commutator_super(h) -> np.ndarray:
    """Matrix of ``-i[H, .]``."""
    h = np.asarray(h, dtype=complex)
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(eye, h) - np.kron(h.T, eye))


def anticommutator_super(k) -> np.ndarray:
    """Matrix of ``{., K}``."""
    k = np.asarray(k, dtype=complex)
    eye = np.eye(k.shape[0])
    return np.kron(eye, k) + np.kron(k.T, eye)


def dissipator_super(op, rate=1.0) -> np.ndarray:
    """Matrix of ``rate * D[L]``."""
    op = np.asarray(op, dtype=complex)
    eye = np.eye(op.shape[0])
    ldl = op.conj().T @ op
    return rate * (np.kron(op.conj(), op) - 0.5 * np.kron(eye, ldl) - 0.5 * np.kron(ldl.T, eye))


def build_liouvillian(model: LindbladModel, extra_hamiltonian=None) -> Superoperator:
    """Generator ``-i[H + extra, .] + sum_k gamma_k D[L_k]``."""
    h = model.hamiltonian
    if extra_hamiltonian is not None:
        extra = as_operator(extra_hamiltonian)
        if extra.shape != h.shape:
            raise ValueError(f"extra Hamiltonian has dim {extra.shape[0]}, model has {model.dim}")
        h = h + extra
    mat = commutator_super(h)
    for op, rate in model.jump_operators():
        if rate:
            mat = mat + dissipator_super(op, rate)
    return Superoperator(mat, model.dim)


def build_liouvillian_total(model: LindbladModel, delta_k, extra_hamiltonian=None) -> Superoperator:
    """``build_liouvillian`` plus the anticommutator term ``-i{., dK}/2``."""
    dk = as_operator(delta_k)
    if dk.shape[0] != model.dim:
        raise ValueError(f"delta_K has dim {dk.shape[0]}, model has {model.dim}")
    base = build_liouvillian(model, extra_hamiltonian)
    return Superoperator(base.matrix - 0.5j * anticommutator_super(dk), model.dim)


def steady_state(L: Superoperator) -> np.ndarray:
    """Unique normalised kernel vector of ``L`` (``L P = 0``, ``Tr P = 1``).

    Raises
    ------
    DegenerateSteadyState
        If the two smallest singular values are both below
        ``1e-8 * largest``.
    NoStationaryState
        If the best candidate leaves a residual above ``1e-8 * ||L||`` or
        has vanishing trace.
    """
    d = L.dim
    if d == 1:
        return np.ones((1, 1), dtype=complex)
    _, s, vh = np.linalg.svd(L.matrix)
    if s[0] == 0.0 or s[-2] < DEGENERACY_GAP * s[0]:
        raise DegenerateSteadyState(
            f"kernel is not one-dimensional (singular values {s[-2]:.3e}, {s[-1]:.3e}; largest {s[0]:.3e})")
    v = vh[-1].conj()
    residual = np.linalg.norm(L.matrix @ v)
    if residual > STATIONARY_RESIDUAL * s[0]:
        raise NoStationaryState(f"stationarity residual {residual:.3e} exceeds tolerance")
    p = unvec(v, d)
    tr = np.trace(p)
    if abs(tr) < 1e-12:
        raise NoStationaryState("kernel vector is traceless; no normalisable steady state")
    return p / tr


def apply_resolvent(L: Superoperator, omega: float, X) -> np.ndarray:
    """Return ``Y`` solving ``(L + i omega) Y = X``.

    This equals ``-int_0^inf exp((L + i omega) t) X dt`` whenever the
    integral converges.  When ``L + i omega`` is singular (for instance at
    ``omega = 0`` for a trace-preserving ``L``), the inverse is taken on the
    complement of the stationary mode, which is the limit
    ``lim_{nu -> 0} (L + i omega + i nu)^{-1} X`` for operands with no
    stationary component.
    """
    d = L.dim
    x = vec(as_operator(X, d))
    a = L.matrix + 1j * omega * np.eye(d * d)
    u, s, vh = np.linalg.svd(a)
    if s[0] == 0.0:
        if np.linalg.norm(x) == 0.0:
            return np.zeros((d, d), dtype=complex)
        raise SingularResolvent("resolvent of the zero superoperator at omega = 0")
    if s[-1] > s[0] / CONDITION_LIMIT:
        y = (vh.conj().T @ ((u.conj().T @ x) / s))
        return unvec(y, d)
    if s[-2] <= s[0] / CONDITION_LIMIT:
        raise SingularResolvent("L + i omega has a kernel of dimension > 1")
    right = vh[-1].conj()
    left = u[:, -1]
    xnorm = np.linalg.norm(x)
    overlap = abs(left.conj() @ x) / xnorm if xnorm else 0.0
    if overlap > OVERLAP_TOL:
        raise SingularResolvent(
            f"operand overlaps the stationary mode (relative overlap {overlap:.3e}) at omega = {omega}")
    norm = left.conj() @ right
    if abs(norm) < 1e-12:
        raise SingularResolvent("stationary mode is defective; projected inverse undefined")
    proj = np.outer(right, left.conj()) / norm
    y = np.linalg.solve(a - proj * s[0], x - proj @ x)
    return unvec(y, d)


def propagate(L: Superoperator, rho0, t: float) -> np.ndarray:
    """``exp(L t) rho0`` via scaling-and-squaring Pade(13)."""
    if t < 0:
        raise ValueError("propagation time must be non-negative")
    rho0 = as_operator(rho0, L.dim)
    if t == 0:
        return rho0.copy()
    return unvec(scipy.linalg.expm(L.matrix * t) @ vec(rho0), L.dim)


def expectation(op, rho) -> complex:
    return complex(np.trace(np.asarray(op) @ np.asarray(rho)))
