"""Pentachora, their faces, and the two sides of the 3-3 move."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Any

from .errors import StructuralError
from .symplectic import SpaceSpec, simplex, simplex_label


def permutation_sign(seq, reference) -> int:
    """Sign of the permutation taking ``reference`` to ``seq``."""
    pos = [list(reference).index(v) for v in seq]
    sign = 1
    for a in range(len(pos)):
        for b in range(a + 1, len(pos)):
            if pos[a] > pos[b]:
                sign = -sign
    return sign


def edges_of(vertices) -> list[tuple[int, int]]:
    return list(combinations(sorted(vertices), 2))


def triangles_of(vertices) -> list[tuple[int, int, int]]:
    return list(combinations(sorted(vertices), 3))


@dataclass(frozen=True)
class Pentachoron:
    """A 4-simplex.  ``orientation=-1`` is the tilded (reversed) pentachoron."""

    vertices: tuple
    orientation: int = 1

    def __post_init__(self):
        verts = simplex(self.vertices)
        if len(verts) != 5:
            raise StructuralError("a pentachoron has five vertices")
        if self.orientation not in (1, -1):
            raise StructuralError("orientation must be +1 or -1")
        object.__setattr__(self, "vertices", verts)

    @property
    def label(self) -> str:
        return ("~" if self.orientation < 0 else "") + simplex_label(self.vertices)

    @property
    def faces(self) -> tuple[tuple[int, ...], ...]:
        """Tetrahedra ordered by their opposite vertex."""
        return tuple(self.opposite(v) for v in self.vertices)

    def opposite(self, v: int) -> tuple[int, ...]:
        if v not in self.vertices:
            raise StructuralError(f"{v} is not a vertex of {self.label}")
        return tuple(w for w in self.vertices if w != v)

    def face_sign(self, tetra: Any) -> int:
        """+1 iff increasing vertex order of the face matches the orientation
        induced from the increasing order of the pentachoron (alternating
        +,-,+,-,+ by opposite vertex)."""
        t = simplex(tetra)
        missing = [v for v in self.vertices if v not in t]
        if len(missing) != 1 or len(t) != 4:
            raise StructuralError(f"{simplex_label(t)} is not a face of {self.label}")
        return (-1) ** self.vertices.index(missing[0])

    def induced_sign(self, tetra: Any) -> int:
        """face_sign including the pentachoron's own orientation."""
        return self.orientation * self.face_sign(tetra)

    def local(self, v: int) -> int:
        return self.vertices.index(v)

    def spec(self, bosons_per_face: int = 1) -> SpaceSpec:
        return SpaceSpec.of_faces(self.faces, bosons_per_face)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return edges_of(self.vertices)

    @property
    def triangles(self) -> list[tuple[int, int, int]]:
        return triangles_of(self.vertices)

    def contains(self, s: Any) -> bool:
        return set(simplex(s)) <= set(self.vertices)


STANDARD = Pentachoron((1, 2, 3, 4, 5))


@dataclass(frozen=True)
class MoveComplex33:
    """One side of the 3-3 move on vertices 1..6.

    L = {12345, ~12346, 12356} glued along 1234, 1235, 1236;
    R = {12456, ~13456, 23456} glued along 1456, 2456, 3456.
    With ``tildes=False`` every pentachoron keeps orientation +1.
    """

    side: str
    tildes: bool = True

    def __post_init__(self):
        if self.side not in ("L", "R"):
            raise StructuralError("side must be 'L' or 'R'")

    @property
    def pentachora(self) -> tuple[Pentachoron, ...]:
        s = -1 if self.tildes else 1
        if self.side == "L":
            return (Pentachoron((1, 2, 3, 4, 5)), Pentachoron((1, 2, 3, 4, 6), s), Pentachoron((1, 2, 3, 5, 6)))
        return (Pentachoron((1, 2, 4, 5, 6)), Pentachoron((1, 3, 4, 5, 6), s), Pentachoron((2, 3, 4, 5, 6)))

    @property
    def inner_tetra(self) -> tuple[tuple[int, ...], ...]:
        if self.side == "L":
            return ((1, 2, 3, 4), (1, 2, 3, 5), (1, 2, 3, 6))
        return ((1, 4, 5, 6), (2, 4, 5, 6), (3, 4, 5, 6))

    @property
    def boundary_tetra(self) -> tuple[tuple[int, ...], ...]:
        counts: dict = {}
        for u in self.pentachora:
            for t in u.faces:
                counts[t] = counts.get(t, 0) + 1
        return tuple(sorted(t for t, c in counts.items() if c == 1))

    @property
    def edges(self) -> list[tuple[int, int]]:
        return edges_of(range(1, 7))

    def owner(self, tetra: Any) -> Pentachoron:
        """The unique pentachoron containing a boundary face."""
        t = simplex(tetra)
        owners = [u for u in self.pentachora if t in u.faces]
        if len(owners) != 1:
            raise StructuralError(f"{simplex_label(t)} is not a boundary face of side {self.side}")
        return owners[0]

    def boundary_spec(self, bosons_per_face: int = 1) -> SpaceSpec:
        return SpaceSpec.of_faces(self.boundary_tetra, bosons_per_face)
