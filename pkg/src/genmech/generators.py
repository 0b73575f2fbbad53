"""Constructors for exhaustive and random general-mechanics systems.

Compatible pre-overlap tables are built by closing the ordered-pair set
under the two constraint moves
    (a, b) ~ (Sa, Sb)        and        (Ta, Tb) ~ (b, a)
with a union-find, then assigning one palette value per resulting class.
By construction the output satisfies both compatibility laws exactly.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .core import (
    DEFAULT_EPS,
    Bijection,
    GeneralSystem,
    OverlapTable,
    PreOverlapTable,
    Tolerance,
)


class ImpossibleOrderError(ValueError):
    """Requested a non-involution where none exists (n < 3)."""


class SizeGuardError(RuntimeError):
    """Projected exhaustive enumeration exceeds the configured cap."""


@dataclass(frozen=True)
class Palette:
    """Distinct complex values used to fill pre-overlap classes."""

    values: tuple[complex, ...]

    def __post_init__(self):
        vals = tuple(complex(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise ValueError("palette must be nonempty")
        for i, j in itertools.combinations(range(len(vals)), 2):
            if abs(vals[i] - vals[j]) <= 3 * DEFAULT_EPS:
                raise ValueError(f"palette values {vals[i]} and {vals[j]} too close")

    def __len__(self) -> int:
        return len(self.values)


DEFAULT_PALETTE = Palette((1 + 0j, 1j))


class _UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))
        self.rank = [0] * size

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        if self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1


@dataclass(frozen=True)
class PairClassPartition:
    """Orbits of ordered index pairs under the two constraint moves.

    class_id[a][b] numbers classes by first appearance in row-major order;
    representatives[k] is the first pair of class k.
    """

    n: int
    class_id: np.ndarray
    representatives: tuple[tuple[int, int], ...]

    @property
    def n_classes(self) -> int:
        return len(self.representatives)


def pair_class_partition(dynamics: Bijection, time_reversal: Bijection) -> PairClassPartition:
    n = len(dynamics)
    if len(time_reversal) != n:
        raise ValueError("bijections must have equal length")
    uf = _UnionFind(n * n)
    s, t = dynamics.image, time_reversal.image
    for a in range(n):
        for b in range(n):
            uf.union(a * n + b, s[a] * n + s[b])
            uf.union(t[a] * n + t[b], b * n + a)

    class_id = np.full((n, n), -1, dtype=int)
    reps: list[tuple[int, int]] = []
    root_to_class: dict[int, int] = {}
    for a in range(n):
        for b in range(n):
            root = uf.find(a * n + b)
            if root not in root_to_class:
                root_to_class[root] = len(reps)
                reps.append((a, b))
            class_id[a, b] = root_to_class[root]
    class_id.setflags(write=False)
    return PairClassPartition(n=n, class_id=class_id, representatives=tuple(reps))


def preoverlap_from_assignment(partition: PairClassPartition, palette: Palette,
                               assignment: Sequence[int]) -> PreOverlapTable:
    """Fill each pair class with its assigned palette value."""
    values = np.asarray(palette.values, dtype=complex)[np.asarray(assignment)]
    return PreOverlapTable(values[partition.class_id])


def compatible_preoverlap(dynamics: Bijection, time_reversal: Bijection,
                          palette: Palette = DEFAULT_PALETTE,
                          seed: int = 0) -> PreOverlapTable:
    """Random compatible pre-overlap table, deterministic in the seed."""
    partition = pair_class_partition(dynamics, time_reversal)
    rng = random.Random(seed)
    assignment = [rng.randrange(len(palette)) for _ in range(partition.n_classes)]
    return preoverlap_from_assignment(partition, palette, assignment)


def induced_overlap(pre_overlap: PreOverlapTable) -> OverlapTable:
    """Overlap induced by pre-overlap magnitudes, symmetrized.

    Where |p[a][b]| is already symmetric (every quantum table, and every
    equal-magnitude palette) this is exactly |p|^2.
    """
    mag2 = np.abs(pre_overlap.values) ** 2
    return OverlapTable((mag2 + mag2.T) / 2.0)


def random_symmetric_overlap(n: int, seed: int = 0) -> OverlapTable:
    rng = np.random.default_rng(seed)
    raw = rng.uniform(0.0, 1.0, size=(n, n))
    return OverlapTable((raw + raw.T) / 2.0)


def _assemble(dynamics: Bijection, time_reversal: Bijection,
              pre_overlap: PreOverlapTable, overlap_mode: str,
              seed: int, eps_eq: float) -> GeneralSystem:
    if overlap_mode == "induced":
        overlap = induced_overlap(pre_overlap)
    elif overlap_mode == "random":
        overlap = random_symmetric_overlap(pre_overlap.n, seed)
    else:
        raise ValueError(f"unknown overlap mode {overlap_mode!r}")
    return GeneralSystem(n=len(dynamics), dynamics=dynamics,
                         time_reversal=time_reversal, overlap=overlap,
                         pre_overlap=pre_overlap, tol=Tolerance(eps_eq))


def _random_permutation(n: int, rng: random.Random) -> Bijection:
    image = list(range(n))
    rng.shuffle(image)
    return Bijection(tuple(image))


def _random_involution(n: int, rng: random.Random) -> Bijection:
    """Disjoint transpositions plus fixed points, all shapes reachable."""
    order = list(range(n))
    rng.shuffle(order)
    image = list(range(n))
    i = 0
    while i + 1 < n:
        if rng.random() < 0.5:
            a, b = order[i], order[i + 1]
            image[a], image[b] = b, a
            i += 2
        else:
            i += 1
    return Bijection(tuple(image))


def tri_pair(n: int, seed: int = 0) -> tuple[Bijection, Bijection]:
    """A (dynamics, time-reversal) pair that is invariant by construction.

    Composes a random time reversal T with a random involution A into
    S = T A; invariance is equivalent to A being self-inverse.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = random.Random(seed)
    a = _random_involution(n, rng)
    t = _random_permutation(n, rng)
    return t.compose(a), t


def violating_pair(n: int, seed: int = 0) -> tuple[Bijection, Bijection]:
    """A pair that always fails invariance; requires n >= 3."""
    if n < 3:
        raise ImpossibleOrderError(
            f"every permutation of {n} < 3 elements is an involution")
    rng = random.Random(seed)
    while True:
        a = _random_permutation(n, rng)
        if not a.is_involution():
            break
    t = _random_permutation(n, rng)
    return t.compose(a), t


def random_system(n: int, seed: int = 0, kind: str = "tri",
                  palette: Palette = DEFAULT_PALETTE,
                  overlap_mode: str = "induced",
                  eps_eq: float = DEFAULT_EPS) -> GeneralSystem:
    """One seeded system of the requested kind with a compatible pre-overlap."""
    if kind == "tri":
        s, t = tri_pair(n, seed)
    elif kind == "violating":
        s, t = violating_pair(n, seed)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    pre = compatible_preoverlap(s, t, palette, seed=seed + 1)
    return _assemble(s, t, pre, overlap_mode, seed + 2, eps_eq)


EXHAUSTIVE_MAX_N = 4
DEFAULT_SYSTEM_CAP = 200_000


def count_exhaustive_systems(n: int, palette: Palette) -> int:
    """Projected size of the exhaustive enumeration: sum over (S, T) pairs
    of palette^classes."""
    total = 0
    perms = [Bijection(p) for p in itertools.permutations(range(n))]
    for s in perms:
        for t in perms:
            total += len(palette) ** pair_class_partition(s, t).n_classes
    return total


def exhaustive_systems(n: int, palette: Palette = DEFAULT_PALETTE, *,
                       overlap_mode: str = "induced", seed: int = 0,
                       cap: int = DEFAULT_SYSTEM_CAP,
                       eps_eq: float = DEFAULT_EPS) -> Iterator[GeneralSystem]:
    """Every (S, T) pair crossed with every palette assignment of the
    compatible pre-overlap classes.

    Guarded to n <= 4; raises SizeGuardError when the projected count
    exceeds the cap (checked before any system is yielded).
    """
    if n > EXHAUSTIVE_MAX_N:
        raise SizeGuardError(f"exhaustive enumeration limited to n <= {EXHAUSTIVE_MAX_N}")
    projected = count_exhaustive_systems(n, palette)
    if projected > cap:
        raise SizeGuardError(f"projected {projected} systems exceeds cap {cap}")
    return _exhaustive_iter(n, palette, overlap_mode, seed, eps_eq)


def _exhaustive_iter(n, palette, overlap_mode, seed, eps_eq):
    perms = [Bijection(p) for p in itertools.permutations(range(n))]
    for s in perms:
        for t in perms:
            partition = pair_class_partition(s, t)
            for assignment in itertools.product(range(len(palette)),
                                                repeat=partition.n_classes):
                pre = preoverlap_from_assignment(partition, palette, assignment)
                yield _assemble(s, t, pre, overlap_mode, seed, eps_eq)


def parse_palette(text: str, eps: float = DEFAULT_EPS) -> Palette:
    """Parse a comma-separated complex palette such as "1,i" or "1,-0.5+2i"."""
    tokens = [tok.strip() for tok in text.split(",") if tok.strip()]
    if not tokens:
        raise ValueError("empty palette specification")
    values = []
    for tok in tokens:
        norm = tok.replace("I", "i").replace("j", "i")
        norm = norm.replace("i", "j")
        if norm in ("j", "+j"):
            norm = "1j"
        elif norm == "-j":
            norm = "-1j"
        elif norm.endswith("j") and len(norm) >= 2 and norm[-2] in "+-":
            norm = norm[:-1] + "1j"
        try:
            values.append(complex(norm))
        except ValueError as exc:
            raise ValueError(f"cannot parse palette entry {tok!r}") from exc
    return Palette(tuple(values))
