"""Exact SU(2) rotation pairs, binary-word encodings, and freeness scanning.

A pair of rotations by a rational-cosine angle about orthogonal axes
generates a free semigroup; this module constructs such pairs with all
entries in Q(i), maps binary words to products, and stress-tests the
freeness claim by exhaustive collision scanning up to a word-length bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from .exact import ExactMatrix, GaussianRational, rat_to_str
from .util import parallel_map

Axis = Tuple[Fraction, Fraction, Fraction]

# Angles whose rational cosine is known not to yield a free semigroup.
EXCLUDED_COSINES = frozenset(
    {Fraction(0), Fraction(1), Fraction(-1), Fraction(1, 2), Fraction(-1, 2)}
)


class FreenessError(ValueError):
    """The cosine lies in the excluded set, so freeness is not guaranteed."""


class AxisError(ValueError):
    """Rotation axes are not exact unit vectors or not orthogonal."""


class PythagoreanError(ValueError):
    """cos^2 + sin^2 != 1, so the rotation cannot stay inside Q(i)."""


@dataclass(frozen=True, slots=True)
class RotationParams:
    """Angle (as an exact cosine/sine pair) and the two rotation axes."""

    cos_theta: Fraction
    sin_theta: Fraction
    axis_a: Axis
    axis_b: Axis

    def to_json_dict(self) -> dict:
        return {
            "cos": rat_to_str(self.cos_theta),
            "sin": rat_to_str(self.sin_theta),
            "axis_a": [rat_to_str(c) for c in self.axis_a],
            "axis_b": [rat_to_str(c) for c in self.axis_b],
        }


def standard_params() -> RotationParams:
    """The 3-4-5 pair: cos = 3/5 about +z, the partner about +x."""
    return RotationParams(
        cos_theta=Fraction(3, 5),
        sin_theta=Fraction(4, 5),
        axis_a=(Fraction(0), Fraction(0), Fraction(1)),
        axis_b=(Fraction(1), Fraction(0), Fraction(0)),
    )


@dataclass(frozen=True, slots=True)
class FreePair:
    """Two exact SU(2) matrices; letter 0 maps to `a`, letter 1 to `b`."""

    a: ExactMatrix
    b: ExactMatrix
    params: RotationParams


def rotation_matrix(cos_t: Fraction, sin_t: Fraction, axis: Axis) -> ExactMatrix:
    """cos*I + i*sin*(axis . sigma) as a 2x2 matrix over Q(i).

    Performs no freeness or orthogonality checks; use make_free_pair for a
    validated pair.
    """
    nx, ny, nz = axis
    return ExactMatrix.from_rows(
        [
            [
                GaussianRational(cos_t, sin_t * nz),
                GaussianRational(sin_t * ny, sin_t * nx),
            ],
            [
                GaussianRational(-sin_t * ny, sin_t * nx),
                GaussianRational(cos_t, -sin_t * nz),
            ],
        ]
    )


def _dot(u: Axis, v: Axis) -> Fraction:
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def make_free_pair(params: RotationParams) -> FreePair:
    """Validate the freeness conditions and build the exact pair."""
    c, s = params.cos_theta, params.sin_theta
    if c in EXCLUDED_COSINES:
        raise FreenessError(f"cos = {c} is in the excluded set {{0, +-1, +-1/2}}")
    if c * c + s * s != 1:
        raise PythagoreanError(f"cos^2 + sin^2 = {c * c + s * s} != 1")
    for name, axis in (("axis_a", params.axis_a), ("axis_b", params.axis_b)):
        if _dot(axis, axis) != 1:
            raise AxisError(f"{name} is not an exact unit vector")
    if _dot(params.axis_a, params.axis_b) != 0:
        raise AxisError("rotation axes must be exactly orthogonal")
    a = rotation_matrix(c, s, params.axis_a)
    b = rotation_matrix(c, s, params.axis_b)
    return FreePair(a=a, b=b, params=params)


def encode_word(pair: FreePair, bits: str) -> ExactMatrix:
    """Homomorphism from binary words to rotation products.

    The empty word maps to the identity, 0 to `a`, 1 to `b`, and
    concatenation to matrix multiplication.
    """
    result = ExactMatrix.identity(2)
    for ch in bits:
        if ch == "0":
            result = result @ pair.a
        elif ch == "1":
            result = result @ pair.b
        else:
            raise ValueError(f"binary words may only contain 0 and 1, got {ch!r}")
    return result


@dataclass(frozen=True, slots=True)
class CollisionReport:
    """Outcome of an exhaustive word scan up to a length bound."""

    scanned_max_len: int
    word_count: int
    collisions: Tuple[Tuple[str, str], ...]
    scalar_words: Tuple[str, ...]
    truncated: bool

    @property
    def is_empty(self) -> bool:
        return not self.collisions and not self.scalar_words

    def to_json_dict(self) -> dict:
        return {
            "scanned_max_len": self.scanned_max_len,
            "word_count": self.word_count,
            "collisions": [
                {"word_a": a, "word_b": b} for a, b in self.collisions
            ],
            "scalar_words": list(self.scalar_words),
            "truncated": self.truncated,
        }


def freeness_scan(
    pair: FreePair,
    max_len: int,
    node_budget: int = 1_000_000,
    workers: int = 1,
) -> CollisionReport:
    """Evaluate every nonempty binary word of length <= max_len.

    Reports (a) pairs of distinct words with exactly equal matrices and
    (b) words whose matrix is a scalar multiple of the identity.  An empty
    report certifies that no collision exists up to the scanned bound; it
    never claims anything beyond it.
    """
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    gens = (("0", pair.a), ("1", pair.b))

    def expand(item):
        word, matrix = item
        return [(word + bit, matrix @ g) for bit, g in gens]

    seen = {}
    collisions = []
    scalar_words = []
    count = 0
    truncated = False
    level = [("", ExactMatrix.identity(2))]
    for _ in range(max_len):
        if truncated:
            break
        next_level = []
        for children in parallel_map(expand, level, workers):
            for word, matrix in children:
                if count >= node_budget:
                    truncated = True
                    break
                count += 1
                if matrix.is_scalar():
                    scalar_words.append(word)
                prev = seen.get(matrix)
                if prev is None:
                    seen[matrix] = word
                else:
                    collisions.append((prev, word))
                next_level.append((word, matrix))
            if truncated:
                break
        level = next_level
    return CollisionReport(
        scanned_max_len=max_len,
        word_count=count,
        collisions=tuple(collisions),
        scalar_words=tuple(scalar_words),
        truncated=truncated,
    )
