"""Closed paths, marked/unmarked instants and their lattice trajectories.

A closed path visits vertices ``i_0, ..., i_L = i_0``. Instant ``j`` is
*marked* when the unordered edge ``(i_{j-1}, i_j)`` has been traversed an odd
number of times up to and including ``j``, and *unmarked* otherwise. Reading
marked instants as +1 steps and unmarked ones as -1 steps yields a
nonnegative walk ending at the number ``l`` of odd-multiplicity edges; the
walks with ``m`` down steps and end level ``l`` form the class counted by
``count_trajectories(m, l)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ClosedPath",
    "Trajectory",
    "PathClass",
    "PathType",
    "VertexStats",
    "EnumerationLimitError",
    "classify_instants",
    "trajectory_of",
    "path_class_of",
    "enumerate_trajectories",
    "count_trajectories",
    "count_trajectories_factorial",
    "last_step_split",
    "path_type",
    "is_simple",
    "has_marked_origin",
    "vertex_stats",
    "random_closed_path",
    "canonical_closed_paths",
    "path_to_string",
    "path_from_string",
    "trajectory_to_string",
    "trajectory_from_string",
]

ENUMERATION_STEP_CAP = 30


class EnumerationLimitError(ValueError):
    """An exhaustive enumeration would exceed its guard."""


@dataclass(frozen=True)
class ClosedPath:
    """A closed vertex walk ``i_0, ..., i_L = i_0`` on ``{1, ..., n}``.

    Loops (``i_{j+1} == i_j``) are allowed. ``vertices`` stores the closed
    sequence including the final repeat of the origin.
    """

    vertices: tuple[int, ...]
    ambient_n: int

    def __post_init__(self) -> None:
        if len(self.vertices) < 2:
            raise ValueError("a closed path needs at least one step")
        if self.vertices[0] != self.vertices[-1]:
            raise ValueError("path is not closed (last vertex != origin)")
        if any(v < 1 or v > self.ambient_n for v in self.vertices):
            raise ValueError("vertex outside {1, ..., ambient_n}")

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    def edges(self) -> list[tuple[int, int]]:
        """Ordered edges (i_{j-1}, i_j) for j = 1..L."""
        v = self.vertices
        return [(v[j - 1], v[j]) for j in range(1, len(v))]


@dataclass(frozen=True)
class Trajectory:
    """Nonnegative +-1 walk; +1 per marked instant, -1 per unmarked."""

    steps: tuple[int, ...]
    end_level: int

    def __post_init__(self) -> None:
        if any(s not in (-1, 1) for s in self.steps):
            raise ValueError("steps must be +-1")
        h = 0
        for s in self.steps:
            h += s
            if h < 0:
                raise ValueError("trajectory dips below zero")
        if h != self.end_level:
            raise ValueError(f"end level mismatch: sum {h} != declared {self.end_level}")

    @classmethod
    def from_steps(cls, steps) -> "Trajectory":
        steps = tuple(steps)
        return cls(steps=steps, end_level=sum(steps))

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def down_steps(self) -> int:
        return sum(1 for s in self.steps if s < 0)

    def levels(self) -> tuple[int, ...]:
        """Heights x(0), ..., x(L)."""
        out = [0]
        for s in self.steps:
            out.append(out[-1] + s)
        return tuple(out)


@dataclass(frozen=True)
class PathClass:
    m: int
    l: int

    @property
    def length(self) -> int:
        return self.l + 2 * self.m


@dataclass(frozen=True)
class PathType:
    """Self-intersection type: counts[k] = number of k-fold marked vertices."""

    counts: tuple[int, ...]
    ambient_n: int

    @property
    def max_type(self) -> int:
        for k in range(len(self.counts) - 1, -1, -1):
            if self.counts[k] > 0:
                return k
        return 0

    @property
    def total_self_intersections(self) -> int:
        # M = sum_{k>=2} (k-1) N_k
        return sum((k - 1) * c for k, c in enumerate(self.counts) if k >= 2)

    @property
    def high_count(self) -> int:
        # M_1 = sum_{k>=11} N_k
        return sum(c for k, c in enumerate(self.counts) if k >= 11)

    @property
    def low_count(self) -> int:
        # M_2 = sum_{2<=k<=10} N_k
        return sum(c for k, c in enumerate(self.counts) if 2 <= k <= 10)


@dataclass(frozen=True)
class VertexStats:
    max_type: int
    max_marked_out_degree: int
    nonclosed: frozenset[int]
    odd_edge_count: int


def _edge_key(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a <= b else (b, a)


def classify_instants(path: ClosedPath) -> list[bool]:
    """True for marked instants j = 1..L, False for unmarked ones."""
    seen: dict[tuple[int, int], int] = {}
    out = []
    for a, b in path.edges():
        key = _edge_key(a, b)
        c = seen.get(key, 0) + 1
        seen[key] = c
        out.append(c % 2 == 1)
    return out


def trajectory_of(path: ClosedPath) -> Trajectory:
    steps = tuple(1 if marked else -1 for marked in classify_instants(path))
    return Trajectory.from_steps(steps)


def path_class_of(path: ClosedPath) -> PathClass:
    traj = trajectory_of(path)
    return PathClass(m=traj.down_steps, l=traj.end_level)


def count_trajectories(m: int, l: int) -> int:
    """Number of nonnegative walks with l + m up and m down steps ending at l."""
    if m < 0 or l < 0:
        raise ValueError("m and l must be nonnegative")
    total = l + 2 * m
    return math.comb(total, l + m) - (math.comb(total, m - 1) if m >= 1 else 0)


def count_trajectories_factorial(m: int, l: int) -> int:
    """Second closed form: L! (l+1) / ((l+m+1)! m!); exact integer."""
    if m < 0 or l < 0:
        raise ValueError("m and l must be nonnegative")
    total = l + 2 * m
    return math.factorial(total) * (l + 1) // (math.factorial(l + m + 1) * math.factorial(m))


def enumerate_trajectories(m: int, l: int) -> list[Trajectory]:
    """All trajectories of the (m, l) class, duplicate-free, ups first."""
    if m < 0 or l < 0:
        raise ValueError("m and l must be nonnegative")
    if l + 2 * m > ENUMERATION_STEP_CAP:
        raise EnumerationLimitError(
            f"enumeration of {l + 2 * m} steps exceeds the cap {ENUMERATION_STEP_CAP}"
        )
    out: list[Trajectory] = []
    steps: list[int] = []

    def rec(ups: int, downs: int, height: int) -> None:
        if ups == 0 and downs == 0:
            out.append(Trajectory(steps=tuple(steps), end_level=l))
            return
        if ups > 0:
            steps.append(1)
            rec(ups - 1, downs, height + 1)
            steps.pop()
        if downs > 0 and height > 0:
            steps.append(-1)
            rec(ups, downs - 1, height - 1)
            steps.pop()

    rec(l + m, m, 0)
    return out


def last_step_split(m: int, l: int) -> tuple[int, int]:
    """(# trajectories ending with an up step, # ending with a down step)."""
    if l + 2 * m < 1:
        raise ValueError("class must contain at least one step")
    up = count_trajectories(m, l - 1) if l >= 1 else 0
    down = count_trajectories(m - 1, l + 1) if m >= 1 else 0
    return up, down


def _marked_occurrences(path: ClosedPath) -> dict[int, int]:
    """Vertex -> number of marked instants landing on it."""
    marked = classify_instants(path)
    counts: dict[int, int] = {}
    for j, is_marked in enumerate(marked, start=1):
        if is_marked:
            v = path.vertices[j]
            counts[v] = counts.get(v, 0) + 1
    return counts


def path_type(path: ClosedPath) -> PathType:
    """Type (N_0, ..., N_{l+m}); vertices never marked (origin included when
    unmarked) land in N_0."""
    occ = _marked_occurrences(path)
    n_marked = sum(occ.values())
    counts = [0] * (n_marked + 1)
    for v in range(1, path.ambient_n + 1):
        counts[occ.get(v, 0)] += 1
    return PathType(counts=tuple(counts), ambient_n=path.ambient_n)


def is_simple(path: ClosedPath) -> bool:
    """True when no marked instant revisits an already-marked vertex."""
    marked_vertices: set[int] = set()
    for j, is_marked in enumerate(classify_instants(path), start=1):
        if not is_marked:
            continue
        v = path.vertices[j]
        if v in marked_vertices:
            return False
        marked_vertices.add(v)
    return True


def has_marked_origin(path: ClosedPath) -> bool:
    """True when some marked instant lands on the origin."""
    origin = path.vertices[0]
    return any(
        is_marked and path.vertices[j] == origin
        for j, is_marked in enumerate(classify_instants(path), start=1)
    )


def vertex_stats(path: ClosedPath) -> VertexStats:
    marked = classify_instants(path)
    verts = path.vertices
    occ = _marked_occurrences(path)
    max_type = max(occ.values(), default=0)

    out_degree: dict[int, int] = {}
    for j, is_marked in enumerate(marked, start=1):
        if is_marked:
            v = verts[j - 1]
            out_degree[v] = out_degree.get(v, 0) + 1
    max_out = max(out_degree.values(), default=0)

    # Non-closed vertices: at some unmarked instant leaving v, more than one
    # odd-multiplicity incident edge was available to return along.
    self_intersections = {v for v, c in occ.items() if c >= 2}
    parity: dict[tuple[int, int], int] = {}
    nonclosed: set[int] = set()
    for j, is_marked in enumerate(marked, start=1):
        a, b = verts[j - 1], verts[j]
        if not is_marked and a in self_intersections:
            open_here = sum(
                1
                for (x, y), c in parity.items()
                if c % 2 == 1 and (x == a or y == a)
            )
            if open_here > 1:
                nonclosed.add(a)
        key = _edge_key(a, b)
        parity[key] = parity.get(key, 0) + 1

    odd_edges = sum(1 for c in parity.values() if c % 2 == 1)
    return VertexStats(
        max_type=max_type,
        max_marked_out_degree=max_out,
        nonclosed=frozenset(nonclosed),
        odd_edge_count=odd_edges,
    )


def random_closed_path(
    n_vertices: int, length: int, rng: np.random.Generator, ambient_n: int | None = None
) -> ClosedPath:
    """Uniform closed path: free vertices i_0..i_{L-1}, rejected until closed."""
    if length < 1 or n_vertices < 1:
        raise ValueError("need length >= 1 and n_vertices >= 1")
    ambient = n_vertices if ambient_n is None else ambient_n
    while True:
        verts = [int(v) + 1 for v in rng.integers(0, n_vertices, length + 1)]
        if verts[-1] == verts[0]:
            return ClosedPath(vertices=tuple(verts), ambient_n=ambient)


def canonical_closed_paths(length: int, max_vertices: int):
    """Yield closed paths of the given length in first-occurrence labeling.

    Every closed path over at most ``max_vertices`` labels is a relabeling of
    exactly one path yielded here (restricted-growth sequences), which makes
    exhaustive checks of label-equivariant properties affordable.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    seq = [1]

    def rec(pos: int, used: int):
        if pos == length:
            yield ClosedPath(vertices=tuple(seq) + (1,), ambient_n=used)
            return
        for v in range(1, min(used + 1, max_vertices) + 1):
            seq.append(v)
            yield from rec(pos + 1, max(used, v))
            seq.pop()

    yield from rec(1, 1)


def path_to_string(path: ClosedPath) -> str:
    return ",".join(str(v) for v in path.vertices)


def path_from_string(text: str, ambient_n: int | None = None) -> ClosedPath:
    verts = tuple(int(tok) for tok in text.strip().split(","))
    return ClosedPath(vertices=verts, ambient_n=max(verts) if ambient_n is None else ambient_n)


def trajectory_to_string(traj: Trajectory) -> str:
    return "".join("U" if s == 1 else "D" for s in traj.steps)


def trajectory_from_string(text: str) -> Trajectory:
    text = text.strip().upper()
    if any(ch not in "UD" for ch in text):
        raise ValueError("trajectory string must contain only U and D")
    return Trajectory.from_steps(1 if ch == "U" else -1 for ch in text)
