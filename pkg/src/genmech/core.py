"""Finite general-mechanics systems and their time-reversal detectors.

A system is a finite set of states {0, ..., n-1} carrying a dynamics
bijection S, a time-reversal bijection T, a symmetric real overlap table,
and a complex pre-overlap table compatible with both bijections.  All
detectors (stationarity, degeneracy, invariance, witnesses) are pure
queries over these tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

StateId = int

DEFAULT_EPS = 1e-9


class NotStationaryError(ValueError):
    """Raised when a degeneracy query is made for a non-stationary state."""


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Bijection:
    """A permutation of state indices, stored as its image tuple."""

    image: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "image", tuple(int(i) for i in self.image))

    @classmethod
    def identity(cls, n: int) -> "Bijection":
        return cls(tuple(range(n)))

    def __len__(self) -> int:
        return len(self.image)

    def __call__(self, a: StateId) -> StateId:
        return self.image[a]

    def is_permutation(self) -> bool:
        n = len(self.image)
        return sorted(self.image) == list(range(n))

    def is_identity(self) -> bool:
        return all(v == i for i, v in enumerate(self.image))

    def inverse(self) -> "Bijection":
        if not self.is_permutation():
            raise ValueError("cannot invert a non-permutation image")
        inv = [0] * len(self.image)
        for a, b in enumerate(self.image):
            inv[b] = a
        return Bijection(tuple(inv))

    def compose(self, other: "Bijection") -> "Bijection":
        """Return self after other: (self.compose(other))(x) = self(other(x))."""
        if len(self) != len(other):
            raise ValueError("composition requires equal lengths")
        return Bijection(tuple(self.image[b] for b in other.image))

    def is_involution(self) -> bool:
        return self.is_permutation() and self.compose(self).is_identity()


@dataclass(frozen=True)
class OverlapTable:
    """Symmetric real pairwise table, the transition-probability analogue."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values, float))

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class PreOverlapTable:
    """Complex pairwise table, the inner-product analogue.

    Compatibility with the owning system's bijections means
    values[Sa][Sb] == values[a][b] and values[Ta][Tb] == values[b][a].
    """

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values, complex))

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class Tolerance:
    """Single comparison threshold for all real/complex value equality."""

    eps_eq: float = DEFAULT_EPS

    def __post_init__(self):
        if self.eps_eq < 0:
            raise ValueError("eps_eq must be nonnegative")


class StationarityMode(Enum):
    STRICT = "strict"
    BY_OVERLAP = "overlap"


@dataclass(frozen=True)
class GeneralSystem:
    """A finite tabulated general-mechanics system."""

    n: int
    dynamics: Bijection
    time_reversal: Bijection
    overlap: OverlapTable
    pre_overlap: PreOverlapTable
    tol: Tolerance = field(default_factory=Tolerance)


def make_system(dynamics, time_reversal, overlap, pre_overlap,
                eps_eq: float = DEFAULT_EPS) -> GeneralSystem:
    """Coerce raw sequences/arrays into a GeneralSystem (not validated)."""
    s = dynamics if isinstance(dynamics, Bijection) else Bijection(tuple(dynamics))
    t = time_reversal if isinstance(time_reversal, Bijection) else Bijection(tuple(time_reversal))
    ov = overlap if isinstance(overlap, OverlapTable) else OverlapTable(overlap)
    pv = pre_overlap if isinstance(pre_overlap, PreOverlapTable) else PreOverlapTable(pre_overlap)
    return GeneralSystem(n=len(s), dynamics=s, time_reversal=t,
                         overlap=ov, pre_overlap=pv, tol=Tolerance(eps_eq))


@dataclass(frozen=True)
class Violation:
    """One broken invariant, with the indices that witness it."""

    invariant: str
    indices: tuple[int, ...]
    detail: str = ""


@dataclass
class ValidationReport:
    violations: list[Violation]

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.invariant for v in self.violations}


def validate(system: GeneralSystem) -> ValidationReport:
    """Check every system invariant; dimension mismatches short-circuit.

    Returns an empty report iff the system is valid.  Each violated
    invariant appears at least once with the offending indices.
    """
    n = system.n
    out: list[Violation] = []

    if len(system.dynamics) != n:
        out.append(Violation("dimension", (len(system.dynamics),),
                             f"dynamics has length {len(system.dynamics)}, expected {n}"))
    if len(system.time_reversal) != n:
        out.append(Violation("dimension", (len(system.time_reversal),),
                             f"time_reversal has length {len(system.time_reversal)}, expected {n}"))
    for name, table in (("overlap", system.overlap.values),
                        ("pre_overlap", system.pre_overlap.values)):
        if table.ndim != 2 or table.shape != (n, n):
            out.append(Violation("dimension", tuple(table.shape),
                                 f"{name} has shape {table.shape}, expected ({n}, {n})"))
    if out:
        return ValidationReport(out)

    eps = system.tol.eps_eq
    s_ok = system.dynamics.is_permutation()
    t_ok = system.time_reversal.is_permutation()
    if not s_ok:
        out.append(Violation("bijection", tuple(system.dynamics.image),
                             "dynamics image is not a permutation"))
    if not t_ok:
        out.append(Violation("bijection", tuple(system.time_reversal.image),
                             "time_reversal image is not a permutation"))

    ov = system.overlap.values
    asym = np.abs(ov - ov.T)
    for a, b in zip(*np.nonzero(np.triu(asym > eps, k=1))):
        out.append(Violation("overlap-symmetry", (int(a), int(b)),
                             f"|O[{a}][{b}] - O[{b}][{a}]| = {asym[a, b]:.3e}"))

    pv = system.pre_overlap.values
    if s_ok:
        s = list(system.dynamics.image)
        resid = np.abs(pv[np.ix_(s, s)] - pv)
        for a, b in zip(*np.nonzero(resid > eps)):
            out.append(Violation("s-compatibility", (int(a), int(b)),
                                 f"|p[S{a}][S{b}] - p[{a}][{b}]| = {resid[a, b]:.3e}"))
    if t_ok:
        t = list(system.time_reversal.image)
        resid = np.abs(pv[np.ix_(t, t)] - pv.T)
        for a, b in zip(*np.nonzero(resid > eps)):
            out.append(Violation("t-compatibility", (int(a), int(b)),
                                 f"|p[T{a}][T{b}] - p[{b}][{a}]| = {resid[a, b]:.3e}"))
    return ValidationReport(out)


def equivalent(system: GeneralSystem, a: StateId, b: StateId) -> bool:
    """True iff states a and b have the same overlap against every state."""
    ov = system.overlap.values
    return bool(np.all(np.abs(ov[a] - ov[b]) <= system.tol.eps_eq))


def is_stationary(system: GeneralSystem, a: StateId,
                  mode: StationarityMode = StationarityMode.STRICT) -> bool:
    """Strict: S fixes a.  BY_OVERLAP: the image of a is equivalent to a."""
    image = system.dynamics(a)
    if mode is StationarityMode.STRICT:
        return image == a
    return equivalent(system, image, a)


def stationary_set(system: GeneralSystem,
                   mode: StationarityMode = StationarityMode.STRICT) -> set[StateId]:
    return {a for a in range(system.n) if is_stationary(system, a, mode)}


def stationary_signature(system: GeneralSystem, a: StateId) -> complex:
    """Pre-overlap of a state against its own dynamical image.

    For stationary states this generalizes the eigenphase; equal
    signatures generalize "same energy eigenvalue".  Total on all states;
    callers enforce stationarity where the interpretation needs it.
    """
    return complex(system.pre_overlap.values[a, system.dynamics(a)])


def is_nondegenerate(system: GeneralSystem, a: StateId,
                     mode: StationarityMode = StationarityMode.STRICT) -> bool:
    """True iff no other stationary state shares a's signature without being
    equivalent to it.  Raises NotStationaryError if a is not stationary."""
    if not is_stationary(system, a, mode):
        raise NotStationaryError(f"state {a} is not stationary in mode {mode.value}")
    eps = system.tol.eps_eq
    sig_a = stationary_signature(system, a)
    for rho in range(system.n):
        if rho == a or not is_stationary(system, rho, mode):
            continue
        if abs(stationary_signature(system, rho) - sig_a) <= eps and not equivalent(system, a, rho):
            return False
    return True


def is_time_reversal_invariant(system: GeneralSystem) -> bool:
    """Exact permutation test of T^-1 S == S^-1 T."""
    s, t = system.dynamics, system.time_reversal
    return t.inverse().compose(s) == s.inverse().compose(t)


def tri_equivalent_forms(system: GeneralSystem) -> tuple[bool, bool, bool]:
    """Evaluate the three equivalent invariance conditions.

    Returns (T^-1 S == S^-1 T, T^-1 S T^-1 S == I, T S^-1 == S T^-1).
    The three agree on every system; this is asserted.
    """
    s, t = system.dynamics, system.time_reversal
    left = t.inverse().compose(s)
    f1 = left == s.inverse().compose(t)
    f2 = left.compose(left).is_identity()
    f3 = t.compose(s.inverse()) == s.compose(t.inverse())
    assert f1 == f2 == f3, "equivalent invariance forms disagree"
    return f1, f2, f3


@dataclass(frozen=True)
class Verdict:
    """Detector output: witnesses, the direct invariance test, and whether
    the two are mutually consistent."""

    witnesses: tuple[StateId, ...]
    tri_direct: bool
    consistent: bool


def wigner_witnesses(system: GeneralSystem,
                     mode: StationarityMode = StationarityMode.STRICT) -> list[StateId]:
    """Stationary, non-degenerate states not equivalent to their T-image.

    Any such state certifies T-violation; returned ascending.
    """
    t = system.time_reversal
    out = []
    for a in range(system.n):
        if not is_stationary(system, a, mode):
            continue
        if not is_nondegenerate(system, a, mode):
            continue
        if not equivalent(system, t(a), a):
            out.append(a)
    return out


def wigner_verdict(system: GeneralSystem,
                   mode: StationarityMode = StationarityMode.STRICT) -> Verdict:
    witnesses = tuple(wigner_witnesses(system, mode))
    tri = is_time_reversal_invariant(system)
    return Verdict(witnesses=witnesses, tri_direct=tri,
                   consistent=not (witnesses and tri))


@dataclass(frozen=True)
class ChainTrace:
    """Values along the five-expression witness-transport chain.

    step_values[k] are pre-overlap entries; step_equal[k] records whether
    adjacent entries agree within tolerance.  rho_coincides reports whether
    the two constructions of the transported state (T applied to sigma,
    T^-1 applied to its image) land on the same index.
    """

    sigma: StateId
    rho_f: StateId
    rho_i: StateId
    step_values: tuple[complex, complex, complex, complex, complex]
    step_equal: tuple[bool, bool, bool, bool]
    rho_coincides: bool


def proof_chain(system: GeneralSystem, a: StateId) -> ChainTrace:
    """Evaluate the transport chain at state a.

    On valid systems steps 0, 2, 3 hold by table compatibility; step 1 is
    the invariance-justified step and is the only one that can break.
    """
    s, t = system.dynamics, system.time_reversal
    s_inv, t_inv = s.inverse(), t.inverse()
    eps = system.tol.eps_eq
    pv = system.pre_overlap.values

    sigma_f = s(a)
    rho_f = t(a)
    rho_i = t_inv(s(a))

    values = (
        complex(pv[sigma_f, s(a)]),
        complex(pv[t_inv(s(a)), t_inv(sigma_f)]),
        complex(pv[s_inv(rho_f), rho_i]),
        complex(pv[s(s_inv(rho_f)), s(rho_i)]),
        complex(pv[rho_f, s(rho_i)]),
    )
    equal = tuple(abs(values[k + 1] - values[k]) <= eps for k in range(4))
    return ChainTrace(sigma=a, rho_f=rho_f, rho_i=rho_i,
                      step_values=values, step_equal=equal,
                      rho_coincides=rho_f == rho_i)
