"""Weyl groups as permutation groups on root indices.

A group element is stored as a ``bytes`` permutation ``p`` of the root
list, ``p[i]`` being the index of the image of root ``i`` (degree is at
most 240, so one byte per point suffices).  This representation is
faithful, hashable and compact; matrices on the reflection
representation are derived from it on demand.

The stabilizer-chain machinery is a deterministic Schreier-Sims; orders
come out as exact integers.

>>> rs_ = __import__("qiblocks.rootsystem", fromlist=["RootSystem"])
>>> chain = weyl_chain(rs_.RootSystem.build("G2"))
>>> chain.order()
12
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from ._linalg import char_poly, invert as mat_invert, kernel_basis, transpose
from .rootsystem import RootSystem

Perm = bytes

__all__ = [
    "Perm",
    "identity_perm",
    "compose",
    "invert",
    "perm_order",
    "perm_from_simple_word",
    "perm_from_simple_images",
    "root_matrix",
    "coweight_matrix",
    "StabilizerChain",
    "weyl_chain",
    "longest_element",
    "coxeter_element",
    "diagram_automorphism",
    "orbit_on_sets",
    "setwise_stabilizer",
    "fixed_space_basis",
    "molien_degrees",
    "OrbitCapExceeded",
]


class OrbitCapExceeded(RuntimeError):
    """An orbit enumeration outgrew its configured resource cap."""


def identity_perm(degree: int) -> Perm:
    return bytes(range(degree))


def compose(p: Perm, q: Perm) -> Perm:
    """p after q: (p*q)(i) = p(q(i))."""
    return bytes(p[x] for x in q)


def invert(p: Perm) -> Perm:
    out = bytearray(len(p))
    for i, x in enumerate(p):
        out[x] = i
    return bytes(out)


def perm_order(p: Perm) -> int:
    n = len(p)
    seen = [False] * n
    out = 1
    for i in range(n):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        out = _lcm(out, length)
    return out


def _lcm(a: int, b: int) -> int:
    from math import gcd

    return a * b // gcd(a, b)


def perm_from_simple_word(rs: RootSystem, word) -> Perm:
    out = identity_perm(len(rs.roots))
    for i in word:
        out = compose(out, bytes(rs.simple_reflections[i]))
    return out


def perm_from_simple_images(rs: RootSystem, images) -> Perm:
    """Extend a map on simple roots to all roots by linearity.

    ``images[i]`` is the root index of the image of the i-th simple
    root.  Raises ValueError when the linear extension does not
    permute the root set.
    """
    cols = [rs.roots[k] for k in images]
    out = bytearray(len(rs.roots))
    for j, r in enumerate(rs.roots):
        img = tuple(sum(r[i] * cols[i][t] for i in range(rs.rank))
                    for t in range(rs.rank))
        k = rs.index.get(img)
        if k is None:
            raise ValueError("simple-root images do not extend to the root set")
        out[j] = k
    return bytes(out)


def root_matrix(rs: RootSystem, p: Perm) -> tuple[tuple[int, ...], ...]:
    """Matrix (rows) of p on root coordinates: column j = image of alpha_j."""
    cols = [rs.roots[p[k]] for k in rs.simple_indices]
    return tuple(tuple(cols[j][i] for j in range(rs.rank))
                 for i in range(rs.rank))


def coweight_matrix(rs: RootSystem, p: Perm) -> tuple[tuple[int, ...], ...]:
    """Matrix of p acting on fundamental-coweight coordinates.

    Characterized by <alpha, p(v)> = <p^{-1}(alpha), v>; equals the
    transpose of the root-coordinate matrix of p^{-1}.
    """
    return transpose(root_matrix(rs, invert(p)))


class StabilizerChain:
    """Deterministic Schreier-Sims stabilizer chain.

    >>> s3 = StabilizerChain(3, [bytes((1, 0, 2)), bytes((0, 2, 1))])
    >>> s3.order()
    6
    >>> bytes((2, 0, 1)) in s3
    True
    """

    def __init__(self, degree: int, generators=()):
        self.degree = degree
        self.identity = identity_perm(degree)
        self.base: list[int] = []
        self.level_gens: list[list[Perm]] = []
        self.transversal: list[dict[int, Perm]] = []
        for g in generators:
            self.extend(bytes(g))

    def _rebuild_orbit(self, level: int) -> None:
        b = self.base[level]
        orb = {b: self.identity}
        queue = [b]
        while queue:
            point = queue.pop()
            t = orb[point]
            for g in self.level_gens[level]:
                img = g[point]
                if img not in orb:
                    orb[img] = compose(g, t)
                    queue.append(img)
        self.transversal[level] = orb

    def _strip(self, g: Perm, start: int) -> tuple[Perm, int]:
        for j in range(start, len(self.base)):
            point = g[self.base[j]]
            t = self.transversal[j].get(point)
            if t is None:
                return g, j
            g = compose(invert(t), g)
        return g, len(self.base)

    def __contains__(self, g) -> bool:
        residue, _ = self._strip(bytes(g), 0)
        return residue == self.identity

    def extend(self, g: Perm) -> bool:
        """Add a generator; returns True when the group grew."""
        residue, level = self._strip(g, 0)
        if residue == self.identity:
            return False
        self._insert_range(residue, 0, level)
        self._close()
        return True

    def _insert_range(self, h: Perm, lo: int, hi: int) -> None:
        """Record h as a strong generator at levels lo..hi.

        h must fix base[0..hi-1]; sharing it across the whole range
        keeps the generating sets nested, which the order computation
        relies on.
        """
        if hi == len(self.base):
            point = next(i for i, x in enumerate(h) if x != i)
            self.base.append(point)
            self.level_gens.append([])
            self.transversal.append({})
        for l in range(lo, hi + 1):
            self.level_gens[l].append(h)
            self._rebuild_orbit(l)

    def _close(self) -> None:
        """Restore the chain condition by Schreier-generator sifting."""
        i = len(self.base) - 1
        while i >= 0:
            dirty = False
            orb = self.transversal[i]
            for point in list(orb):
                t = orb[point]
                for g in self.level_gens[i]:
                    schreier = compose(invert(orb[g[point]]),
                                       compose(g, t))
                    if schreier == self.identity:
                        continue
                    residue, j = self._strip(schreier, i + 1)
                    if residue != self.identity:
                        self._insert_range(residue, i + 1, j)
                        dirty = True
                        i = j
                        break
                if dirty:
                    break
            if not dirty:
                i -= 1

    def order(self) -> int:
        out = 1
        for orb in self.transversal:
            out *= len(orb)
        return out

    def elements(self):
        """Iterate the whole group (use only for small orders)."""
        def rec(level: int, acc: Perm):
            if level == len(self.base):
                yield acc
                return
            for point in sorted(self.transversal[level]):
                yield from rec(level + 1,
                               compose(acc, self.transversal[level][point]))
        yield from rec(0, self.identity)


# chains for the standard Weyl groups are cached per root-system type
@lru_cache(maxsize=None)
def _weyl_chain_cached(type_text: str) -> StabilizerChain:
    rs = RootSystem.build(type_text)
    gens = [bytes(p) for p in rs.simple_reflections]
    return StabilizerChain(len(rs.roots), gens)


def weyl_chain(rs: RootSystem) -> StabilizerChain:
    return _weyl_chain_cached(rs.cartan_type.format())


def subgroup_chain(rs: RootSystem, root_indices) -> StabilizerChain:
    """Chain for the reflection subgroup of a closed subsystem."""
    basis = rs.subsystem_basis(rs.closure(root_indices))
    gens = [bytes(rs.reflection(k)) for k in basis]
    return StabilizerChain(len(rs.roots), gens)


def longest_element(rs: RootSystem) -> Perm:
    """The element sending every positive root to a negative one."""
    v = [1] * rs.rank  # strictly dominant coweight vector
    word = []
    c = rs.cartan
    while True:
        i = next((i for i in range(rs.rank) if v[i] > 0), None)
        if i is None:
            break
        word.append(i)
        coeff = v[i]
        for j in range(rs.rank):
            v[j] -= coeff * c[i][j]
    return perm_from_simple_word(rs, word)


def coxeter_element(rs: RootSystem) -> Perm:
    return perm_from_simple_word(rs, range(rs.rank))


def diagram_automorphism(rs: RootSystem, kind: str = "default") -> Perm:
    """A graph automorphism as a root permutation.

    ``kind`` is "default" (the standard involution: A_n reversal, D_n
    swap of the fork, E6 flip) or "triality" (D4 only).
    """
    ct = rs.cartan_type
    if not ct.is_simple():
        raise ValueError("diagram automorphism requires an irreducible type")
    series, n = ct.factors[0].series, ct.factors[0].rank
    sigma = list(range(n))
    if kind == "triality":
        if (series, n) != ("D", 4):
            raise ValueError("triality needs type D4")
        sigma = [2, 1, 3, 0]  # 1 -> 3 -> 4 -> 1 around the central node
    elif series == "A":
        sigma = list(reversed(sigma))
    elif series == "D":
        sigma[n - 2], sigma[n - 1] = sigma[n - 1], sigma[n - 2]
    elif (series, n) == ("E", 6):
        sigma = [5, 1, 4, 3, 2, 0]
    else:
        raise ValueError(f"no nontrivial diagram automorphism for {series}{n}")
    images = [rs.simple_indices[s] for s in sigma]
    return perm_from_simple_images(rs, images)


def apply_to_set(p: Perm, s: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(sorted(p[i] for i in s))


def orbit_on_sets(gens, seed, cap: int | None = None):
    """Orbit of a sorted index tuple under set action, with transversal.

    Returns ``{image_set: transporter}`` where transporter maps seed to
    the image.  Raises OrbitCapExceeded past ``cap`` elements.
    """
    seed = tuple(sorted(seed))
    degree = len(gens[0]) if gens else 0
    orbit = {seed: identity_perm(degree)}
    queue = [seed]
    while queue:
        s = queue.pop()
        t = orbit[s]
        for g in gens:
            img = apply_to_set(g, s)
            if img not in orbit:
                if cap is not None and len(orbit) >= cap:
                    raise OrbitCapExceeded(
                        f"set orbit exceeded cap {cap}")
                orbit[img] = compose(g, t)
                queue.append(img)
    return orbit


def setwise_stabilizer(gens, group_order: int, seed,
                       cap: int | None = None) -> tuple[StabilizerChain, dict]:
    """Stabilizer chain of {g : g(seed) = seed} plus the set orbit.

    ``group_order`` must be the exact order of <gens>; the Schreier
    loop stops as soon as the stabilizer reaches full size.
    """
    seed = tuple(sorted(seed))
    orbit = orbit_on_sets(gens, seed, cap=cap)
    if group_order % len(orbit):
        raise AssertionError("orbit size does not divide group order")
    target = group_order // len(orbit)
    degree = len(gens[0]) if gens else 0
    stab = StabilizerChain(degree)
    for s, t in orbit.items():
        for g in gens:
            if stab.order() == target:
                return stab, orbit
            schreier = compose(invert(orbit[apply_to_set(g, s)]),
                               compose(g, t))
            if schreier != stab.identity:
                stab.extend(schreier)
    if stab.order() != target:
        raise AssertionError("setwise stabilizer generation fell short")
    return stab, orbit


def fixed_space_basis(matrices) -> list[tuple[Fraction, ...]]:
    """Basis of the common fixed space of a family of square matrices."""
    if not matrices:
        raise ValueError("need at least one matrix")
    n = len(matrices[0])
    stacked = []
    for m in matrices:
        for i in range(n):
            stacked.append(tuple(Fraction(m[i][j]) - (i == j)
                                 for j in range(n)))
    return kernel_basis(stacked)


def molien_degrees(matrices, order: int, terms: int = 72, product: int | None = None):
    """Invariant degrees of a finite matrix group, if it is reflection-like.

    Computes the Molien series sum 1/det(1-tM) / order and greedily
    factors it as prod 1/(1-t^{d_i}).  Returns the sorted degree list,
    or None when the series does not have that shape (the group is
    then not generated by pseudo-reflections on this space).

    ``product`` overrides the expected product of the degrees (it
    defaults to ``order``); a rational representation of a complex
    reflection group doubles every degree, making the product
    ``order**2``.
    """
    if not matrices:
        return []
    if product is None:
        product = order
    n = len(matrices[0])
    buckets: dict[tuple[int, ...], int] = {}
    for m in matrices:
        cp = tuple(char_poly(m))
        buckets[cp] = buckets.get(cp, 0) + 1
    series = [Fraction(0)] * terms
    for cp, count in buckets.items():
        # det(I - tM) has ascending coefficients cp reversed
        den = [Fraction(c) for c in reversed(cp)]
        inv = _series_inverse(den, terms)
        for i in range(terms):
            series[i] += count * inv[i]
    series = [c / order for c in series]
    degrees = []
    for _ in range(n):
        d = next((i for i in range(1, terms) if series[i] != 0), None)
        if d is None or series[d] < 0:
            return None
        degrees.append(d)
        # divide by 1/(1-t^d): multiply series by (1 - t^d)
        for i in range(terms - 1, d - 1, -1):
            series[i] -= series[i - d]
    if any(series[i] != 0 for i in range(1, terms)) or series[0] != 1:
        return None
    prod = 1
    for d in degrees:
        prod *= d
    if prod != product:
        return None
    return sorted(degrees)


def _series_inverse(coeffs, terms: int):
    if coeffs[0] == 0:
        raise ValueError("series has no inverse")
    inv = [Fraction(0)] * terms
    inv[0] = 1 / Fraction(coeffs[0])
    for k in range(1, terms):
        acc = Fraction(0)
        for j in range(1, min(k, len(coeffs) - 1) + 1):
            acc += Fraction(coeffs[j]) * inv[k - j]
        inv[k] = -acc / Fraction(coeffs[0])
    return inv


if __name__ == "__main__":
    import doctest

    doctest.testmod()
