"""Automorphisms of a rank-n free group.

An Automorphism stores the images of the n basis generators *and* the
images under the inverse map, so invertibility is witnessed at
construction time and never needs a search.  Composition is eager: image
words are fully reduced on the spot, giving canonical forms (thousands of
relator verifications depend on equality of reduced images being cheap).

Conventions fixed once and enforced by tests:

- automorphisms act on words on the right; ``compose(s, t)`` is "apply s,
  then t", i.e. ``apply(compose(s, t), w) == apply(t, apply(s, w))``;
- ``induced_matrix(s)`` has column k = coordinates of the abelianized
  image of the k-th generator, so ``induced_matrix(compose(s, t)) ==
  induced_matrix(t) @ induced_matrix(s)``;
- the coefficient modules carry *left* actions: on the abelianization H
  the action of s is by ``induced_matrix(inverse of s)``, on the dual
  H* by ``induced_matrix(s)`` transposed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .words import Word, inverse, multiply, reduce_word

Matrix = list[list[int]]


class Automorphism:
    __slots__ = ("rank", "images", "inv_images")

    def __init__(self, rank: int, images: Sequence[Word], inv_images: Sequence[Word]):
        assert len(images) == rank and len(inv_images) == rank
        self.rank = rank
        self.images = tuple(images)
        self.inv_images = tuple(inv_images)

    # -- word actions ---------------------------------------------------

    def apply(self, w: Word) -> Word:
        """Image of the word w under this automorphism."""
        return _substitute(self.images, w)

    def apply_inverse(self, w: Word) -> Word:
        return _substitute(self.inv_images, w)

    # -- group structure ------------------------------------------------

    def compose(self, other: "Automorphism") -> "Automorphism":
        """self followed by other (left-to-right)."""
        if self.rank != other.rank:
            raise ValueError("rank mismatch")
        images = tuple(other.apply(w) for w in self.images)
        inv_images = tuple(self.apply_inverse(w) for w in other.inv_images)
        return Automorphism(self.rank, images, inv_images)

    def inverse(self) -> "Automorphism":
        return Automorphism(self.rank, self.inv_images, self.images)

    def is_identity(self) -> bool:
        return all(w == (i + 1,) for i, w in enumerate(self.images))

    # -- value semantics ------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Automorphism):
            return NotImplemented
        return self.rank == other.rank and self.images == other.images

    def __hash__(self) -> int:
        return hash((self.rank, self.images))

    def __repr__(self) -> str:
        imgs = ", ".join(f"x{i+1}->{w}" for i, w in enumerate(self.images))
        return f"Automorphism({imgs})"


def _substitute(table: tuple[Word, ...], w: Word) -> Word:
    out: list[int] = []
    for a in w:
        img = table[a - 1] if a > 0 else inverse(table[-a - 1])
        for b in img:
            if out and out[-1] == -b:
                out.pop()
            else:
                out.append(b)
    return tuple(out)


def identity_aut(n: int) -> Automorphism:
    gens = tuple((i,) for i in range(1, n + 1))
    return Automorphism(n, gens, gens)


def from_images(n: int, images: Sequence[Word], inv_images: Sequence[Word]) -> Automorphism:
    """Build from explicit images + inverse images, verifying both composites."""
    a = Automorphism(n, tuple(reduce_word(w) for w in images),
                     tuple(reduce_word(w) for w in inv_images))
    for i in range(1, n + 1):
        if a.apply_inverse(a.apply((i,))) != (i,) or a.apply(a.apply_inverse((i,))) != (i,):
            raise ValueError("supplied inverse images do not invert the map")
    return a


def nielsen_aut(n: int, a: int, b: int) -> Automorphism:
    """The Nielsen map sending the letter a to a*b, fixing letters c != a^-1, a.

    a, b are signed letters; requires b not in {a, -a}.  On generators:
    if a = x_i then x_i -> x_i * b; if a = x_i^-1 then x_i -> b^-1 * x_i.
    The inverse is the same map with b inverted.
    """
    if b == a or b == -a:
        raise ValueError(f"invalid Nielsen pair a={a}, b={b}")
    if not (1 <= abs(a) <= n and 1 <= abs(b) <= n):
        raise ValueError(f"letters {a},{b} outside rank {n}")
    i = abs(a)
    images = []
    inv_images = []
    for k in range(1, n + 1):
        if k != i:
            images.append((k,))
            inv_images.append((k,))
        elif a > 0:
            images.append(reduce_word((i, b)))
            inv_images.append(reduce_word((i, -b)))
        else:
            images.append(reduce_word((-b, i)))
            inv_images.append(reduce_word((b, i)))
    return Automorphism(n, tuple(images), tuple(inv_images))


def compose(*auts: Automorphism) -> Automorphism:
    """Left-to-right composition of any number of automorphisms."""
    assert auts, "compose needs at least one map"
    out = auts[0]
    for a in auts[1:]:
        out = out.compose(a)
    return out


def monomial_aut(n: int, a: int, b: int) -> Automorphism:
    """The order-4 monomial map a -> b^-1, b -> a (other letters fixed)."""
    return compose(nielsen_aut(n, b, a), nielsen_aut(n, -a, b), nielsen_aut(n, -b, -a))


def monomial_letter_perm(a: int, b: int, c: int) -> int:
    """Signed-letter permutation induced by the monomial map a -> b^-1, b -> a.

    Fixed points are all letters with index different from a, b.
    """
    if c == a:
        return -b
    if c == -a:
        return b
    if c == b:
        return a
    if c == -b:
        return -a
    return c


# -- induced action on the abelianization ------------------------------


def induced_matrix(s: Automorphism) -> Matrix:
    """n x n integer matrix; column k = abelianized image of generator k."""
    n = s.rank
    m = [[0] * n for _ in range(n)]
    for k, w in enumerate(s.images):
        col = m  # rows indexed first
        for a in w:
            if a > 0:
                col[a - 1][k] += 1
            else:
                col[-a - 1][k] -= 1
    return m


def det_int(m: Matrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = len(m)
    if n == 0:
        return 1
    a = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def is_special(s: Automorphism) -> bool:
    """True when the induced map on H has determinant +1."""
    return det_int(induced_matrix(s)) == 1


# -- coefficient modules ----------------------------------------------

H = "H"
HDUAL = "Hdual"
COEFF_SPACES = (H, HDUAL)


@dataclass(frozen=True)
class CoeffVector:
    space: str
    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        assert self.space in COEFF_SPACES, self.space


def basis_vector(space: str, p: int, n: int) -> CoeffVector:
    assert 1 <= p <= n
    return CoeffVector(space, tuple(1 if k == p else 0 for k in range(1, n + 1)))


def _mat_vec(m: Matrix, v: Sequence[int]) -> tuple[int, ...]:
    return tuple(sum(m[r][c] * v[c] for c in range(len(v))) for r in range(len(m)))


def _mat_t_vec(m: Matrix, v: Sequence[int]) -> tuple[int, ...]:
    return tuple(sum(m[r][c] * v[r] for r in range(len(v))) for c in range(len(m)))


def act_coeff(s, v: CoeffVector, n: int | None = None) -> CoeffVector:
    """Left module action of s on a coefficient vector.

    s may be an Automorphism, or a letter pair (a, b) naming a Nielsen
    map (closed forms, no matrix work).  The H-action of s is by the
    matrix of s^-1; the dual action is by the transpose of the matrix
    of s itself — the two standard mutually-contragredient conventions.
    """
    if isinstance(s, tuple):
        a, b = s
        return _act_symbol(a, b, v)
    assert isinstance(s, Automorphism)
    if v.space == H:
        return CoeffVector(H, _mat_vec(induced_matrix(s.inverse()), v.coords))
    return CoeffVector(HDUAL, _mat_t_vec(induced_matrix(s), v.coords))


def _act_symbol(a: int, b: int, v: CoeffVector) -> CoeffVector:
    """Closed-form action of the Nielsen map with letter pair (a, b)."""
    i, j = abs(a), abs(b)
    sa = 1 if a > 0 else -1
    sb = 1 if b > 0 else -1
    coords = list(v.coords)
    if v.space == H:
        # e_i -> e_i - (sign a)(sign b) e_j ; others fixed
        coords[j - 1] -= sa * sb * v.coords[i - 1]
    else:
        # e_j* -> e_j* + (sign a)(sign b) e_i* ; others fixed
        coords[i - 1] += sa * sb * v.coords[j - 1]
    return CoeffVector(v.space, tuple(coords))
