"""Finite-dimensional quantum instantiation of general mechanics.

A Hamiltonian and a fixed evolution time give the dynamics, an antiunitary
(or unitary) operator gives time reversal, inner products give the
pre-overlap, and squared magnitudes give the overlap.  `tabulate` closes a
seed set of state vectors under both maps and emits the resulting finite
system, with phases kept as distinct states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    DEFAULT_EPS,
    Bijection,
    GeneralSystem,
    OverlapTable,
    PreOverlapTable,
    Tolerance,
)


class NonHermitianError(ValueError):
    """Hamiltonian fails the Hermiticity invariant."""


class OrbitNotClosedError(RuntimeError):
    """Seed closure exceeded the configured state cap."""


class NonBijectiveError(RuntimeError):
    """Evolution or time reversal failed to permute the closed state set."""


def hermiticity_residual(hamiltonian: np.ndarray) -> float:
    h = np.asarray(hamiltonian, dtype=complex)
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def _require_hermitian(hamiltonian: np.ndarray, eps: float) -> np.ndarray:
    h = np.asarray(hamiltonian, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NonHermitianError(f"expected a square matrix, got shape {h.shape}")
    resid = hermiticity_residual(h)
    if resid > eps:
        raise NonHermitianError(f"Hermiticity residual {resid:.3e} exceeds {eps:.3e}")
    return h


def inner(psi: np.ndarray, phi: np.ndarray) -> complex:
    """Inner product, conjugate-linear in the first argument."""
    return complex(np.vdot(psi, phi))


def transition_probability(psi: np.ndarray, phi: np.ndarray) -> float:
    return float(abs(inner(psi, phi)) ** 2)


def evolution_operator(hamiltonian: np.ndarray, t: float,
                       eps: float = DEFAULT_EPS) -> np.ndarray:
    """exp(-i t H) via the eigendecomposition of H."""
    h = _require_hermitian(hamiltonian, eps)
    w, u = np.linalg.eigh(h)
    return (u * np.exp(-1j * t * w)) @ u.conj().T


def evolve(hamiltonian: np.ndarray, t: float, psi: np.ndarray,
           eps: float = DEFAULT_EPS) -> np.ndarray:
    """Apply exp(-i t H) to a state vector."""
    h = _require_hermitian(hamiltonian, eps)
    w, u = np.linalg.eigh(h)
    return u @ (np.exp(-1j * t * w) * (u.conj().T @ np.asarray(psi, dtype=complex)))


@dataclass(frozen=True)
class TimeReversalOp:
    """psi -> V conj(psi) when conjugates is set, else psi -> V psi."""

    unitary_part: np.ndarray
    conjugates: bool = True

    def __post_init__(self):
        v = np.array(self.unitary_part, dtype=complex)
        v.setflags(write=False)
        object.__setattr__(self, "unitary_part", v)

    @classmethod
    def conjugation(cls, dim: int) -> "TimeReversalOp":
        return cls(np.eye(dim, dtype=complex), conjugates=True)

    @property
    def dim(self) -> int:
        return self.unitary_part.shape[0]

    def unitarity_residual(self) -> float:
        v = self.unitary_part
        return float(np.max(np.abs(v.conj().T @ v - np.eye(v.shape[0]))))


def time_reverse(top: TimeReversalOp, psi: np.ndarray) -> np.ndarray:
    vec = np.asarray(psi, dtype=complex)
    return top.unitary_part @ (vec.conj() if top.conjugates else vec)


def phase_equivalent(psi: np.ndarray, phi: np.ndarray,
                     tol: float = 1e-8) -> float | None:
    """Phase theta in (-pi, pi] with psi == e^{i theta} phi, if one exists.

    The candidate is read off the largest-magnitude component of phi and
    accepted only when the full residual norm is within tol.
    """
    psi = np.asarray(psi, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    k = int(np.argmax(np.abs(phi)))
    if abs(phi[k]) == 0.0:
        return None
    theta = float(np.angle(psi[k] * np.conj(phi[k])))
    if np.linalg.norm(psi - np.exp(1j * theta) * phi) <= tol:
        return theta
    return None


@dataclass(frozen=True)
class OrbitClosureConfig:
    """Closure controls: evolution time, state cap, dedup threshold."""

    time: float
    max_states: int = 256
    dedup_eps: float = 1e-8

    def __post_init__(self):
        if self.max_states < 1:
            raise ValueError("max_states must be at least 1")
        if self.dedup_eps < 0:
            raise ValueError("dedup_eps must be nonnegative")


@dataclass(frozen=True)
class Tabulation:
    """A tabulated system together with its index -> vector dictionary."""

    system: GeneralSystem
    vectors: tuple[np.ndarray, ...]


def tabulate(hamiltonian: np.ndarray, top: TimeReversalOp,
             cfg: OrbitClosureConfig, seeds: Sequence[np.ndarray],
             eps: float = DEFAULT_EPS) -> Tabulation:
    """Close the seeds under evolution and time reversal and tabulate.

    Vectors are deduplicated by plain Euclidean distance <= dedup_eps;
    phases are never identified, so a seed whose eigenphase is not a root
    of unity will not close and the cap triggers OrbitNotClosedError.
    """
    h = _require_hermitian(hamiltonian, eps)
    d = h.shape[0]
    if not seeds:
        raise ValueError("seeds must be nonempty")
    if top.unitary_part.shape != (d, d):
        raise ValueError("time reversal dimension does not match Hamiltonian")
    if top.unitarity_residual() > eps:
        raise ValueError(f"time reversal unitary part residual {top.unitarity_residual():.3e}")

    u_t = evolution_operator(h, cfg.time, eps)
    states: list[np.ndarray] = []

    def lookup(vec: np.ndarray) -> int | None:
        for idx, known in enumerate(states):
            if np.linalg.norm(known - vec) <= cfg.dedup_eps:
                return idx
        return None

    for seed in seeds:
        vec = np.asarray(seed, dtype=complex)
        if vec.shape != (d,):
            raise ValueError(f"seed shape {vec.shape} does not match dimension {d}")
        if abs(np.linalg.norm(vec) - 1.0) > max(eps, 1e-12):
            raise ValueError("seeds must be unit vectors")
        if lookup(vec) is None:
            states.append(vec)

    cursor = 0
    while cursor < len(states):
        vec = states[cursor]
        for image in (u_t @ vec, time_reverse(top, vec)):
            if lookup(image) is None:
                states.append(image)
                if len(states) > cfg.max_states:
                    raise OrbitNotClosedError(
                        f"closure exceeded max_states = {cfg.max_states}")
        cursor += 1

    n = len(states)
    s_image, t_image = [], []
    for vec in states:
        s_idx = lookup(u_t @ vec)
        t_idx = lookup(time_reverse(top, vec))
        if s_idx is None or t_idx is None:
            raise NonBijectiveError("closed set lost an image; dedup_eps too tight")
        s_image.append(s_idx)
        t_image.append(t_idx)
    if sorted(s_image) != list(range(n)) or sorted(t_image) != list(range(n)):
        raise NonBijectiveError("evolution or time reversal is not a bijection "
                                "on the closed set; dedup_eps merged distinct states")

    stack = np.array(states)
    pre = stack.conj() @ stack.T
    system = GeneralSystem(
        n=n,
        dynamics=Bijection(tuple(s_image)),
        time_reversal=Bijection(tuple(t_image)),
        overlap=OverlapTable(np.abs(pre) ** 2),
        pre_overlap=PreOverlapTable(pre),
        tol=Tolerance(eps),
    )
    frozen = []
    for vec in states:
        vec.setflags(write=False)
        frozen.append(vec)
    return Tabulation(system=system, vectors=tuple(frozen))


@dataclass(frozen=True)
class SpectrumReport:
    """Clustered eigenvalues, their multiplicities, and aliased pairs.

    A pair (j, k) of distinct eigenvalues is aliased under time t when
    (h_j - h_k) t is a multiple of 2 pi, making their eigenphases equal.
    """

    eigenvalues: tuple[float, ...]
    multiplicities: tuple[int, ...]
    aliased_pairs: tuple[tuple[int, int], ...]


def spectrum_degeneracy(hamiltonian: np.ndarray, t: float,
                        eps: float = DEFAULT_EPS) -> SpectrumReport:
    h = _require_hermitian(hamiltonian, eps)
    w = np.linalg.eigvalsh(h)
    clusters: list[list[float]] = []
    for val in w:
        if clusters and val - clusters[-1][-1] <= eps:
            clusters[-1].append(float(val))
        else:
            clusters.append([float(val)])
    eigenvalues = tuple(sum(c) / len(c) for c in clusters)
    multiplicities = tuple(len(c) for c in clusters)

    aliased = []
    for j in range(len(eigenvalues)):
        for k in range(j + 1, len(eigenvalues)):
            phase = (eigenvalues[k] - eigenvalues[j]) * t
            wrapped = math.fmod(phase, 2 * math.pi)
            dist = min(abs(wrapped), 2 * math.pi - abs(wrapped))
            if dist <= eps:
                aliased.append((j, k))
    return SpectrumReport(eigenvalues=eigenvalues,
                          multiplicities=multiplicities,
                          aliased_pairs=tuple(aliased))


def is_t_invariant_quantum(hamiltonian: np.ndarray, top: TimeReversalOp,
                           eps: float = DEFAULT_EPS) -> bool:
    """Independent operator-level invariance test.

    An antiunitary V conj(.) commutes with the evolution iff
    V conj(H) V^dagger == H; a plain unitary iff V H V^dagger == H.
    """
    h = _require_hermitian(hamiltonian, eps)
    v = top.unitary_part
    transformed = v @ (h.conj() if top.conjugates else h) @ v.conj().T
    return bool(np.max(np.abs(transformed - h)) <= eps)


def eigenbasis(hamiltonian: np.ndarray, eps: float = DEFAULT_EPS) -> list[np.ndarray]:
    """Unit eigenvectors of H, ascending by eigenvalue."""
    h = _require_hermitian(hamiltonian, eps)
    _, u = np.linalg.eigh(h)
    return [np.ascontiguousarray(u[:, k]) for k in range(u.shape[1])]
