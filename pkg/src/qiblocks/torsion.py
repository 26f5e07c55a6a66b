"""Finite-order points of a maximal torus, up to Weyl-group action.

A semisimple torsion element of the adjoint group corresponds to a
rational vector v in fundamental-coweight coordinates, taken modulo
the integer lattice.  Conjugacy questions translate into the action
of the extended affine Weyl group; the closed fundamental alcove
``{v_i >= 0, <theta, v> <= 1}`` meets every orbit, with residual
identifications given by the finite group Omega of alcove symmetries
coming from the coweight/coroot lattice quotient.

Main entry point: :func:`classify_quasi_isolated`.

>>> recs = classify_quasi_isolated(RootSystem.build("G2"))
>>> [(r.order, r.centralizer_type.format()) for r in recs if r.order > 1]
[(2, 'A1+~A1'), (3, 'A2')]
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

from ._linalg import invert as mat_invert, matmul, smith_normal_form
from .rootsystem import CartanType, RootSystem
from .weyl import (Perm, StabilizerChain, compose, coweight_matrix,
                   fixed_space_basis, identity_perm, invert,
                   setwise_stabilizer, weyl_chain)

Vec = tuple[Fraction, ...]

__all__ = [
    "AffineMap",
    "TorsionRecord",
    "point_order",
    "pairing",
    "centralizer_indices",
    "descend_to_alcove",
    "omega_group",
    "omega_fixers",
    "stabilizer_maps",
    "is_quasi_isolated",
    "classify_quasi_isolated",
    "automizer",
    "bad_primes",
    "alcove_points_of_order",
]


def _frac_vec(v) -> Vec:
    return tuple(Fraction(x) for x in v)


def point_order(v) -> int:
    """Order of v in (Q^r)/(Z^r)."""
    n = 1
    for x in _frac_vec(v):
        n = n * x.denominator // gcd(n, x.denominator)
    return n


def pairing(rs: RootSystem, k: int, v) -> Fraction:
    """<alpha_k, v> for v in fundamental-coweight coordinates."""
    r = rs.roots[k]
    return sum((Fraction(x) * c for x, c in zip(v, r)), Fraction(0))


def centralizer_indices(rs: RootSystem, v) -> frozenset[int]:
    """Roots alpha with <alpha, v> integral: the centralizer subsystem."""
    return frozenset(k for k in range(len(rs.roots))
                     if pairing(rs, k, v).denominator == 1)


@dataclass(frozen=True)
class AffineMap:
    """v -> M v + t; M is the coweight-coordinate matrix of ``perm``."""

    perm: Perm
    matrix: tuple[tuple[int, ...], ...]
    translation: tuple[int, ...]

    def apply(self, v) -> Vec:
        v = _frac_vec(v)
        n = len(self.translation)
        return tuple(
            sum(self.matrix[i][j] * v[j] for j in range(n))
            + self.translation[i]
            for i in range(n))

    def apply_scaled(self, a, n: int) -> tuple[int, ...]:
        """Image of a/n, returned as the integer numerator vector."""
        r = len(self.translation)
        return tuple(
            sum(self.matrix[i][j] * a[j] for j in range(r))
            + n * self.translation[i]
            for i in range(r))

    def after(self, other: "AffineMap") -> "AffineMap":
        m = tuple(tuple(int(x) for x in row)
                  for row in matmul(self.matrix, other.matrix))
        t = tuple(
            int(sum(self.matrix[i][j] * other.translation[j]
                    for j in range(len(self.translation)))
                + self.translation[i])
            for i in range(len(self.translation)))
        return AffineMap(compose(self.perm, other.perm), m, t)

    def is_identity(self) -> bool:
        n = len(self.translation)
        return (all(not x for x in self.translation)
                and all(self.matrix[i][j] == (i == j)
                        for i in range(n) for j in range(n)))


def _identity_map(rs: RootSystem) -> AffineMap:
    n = rs.rank
    eye = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    return AffineMap(identity_perm(len(rs.roots)), eye, (0,) * n)


def _translation_map(rs: RootSystem, t) -> AffineMap:
    base = _identity_map(rs)
    return AffineMap(base.perm, base.matrix, tuple(int(x) for x in t))


def _simple_map(rs: RootSystem, i: int) -> AffineMap:
    c = rs.cartan
    n = rs.rank
    # on coweight coordinates s_i subtracts v_i times row i of the Cartan matrix
    m = tuple(tuple((1 if j == k else 0) - (c[i][j] if k == i else 0)
                    for k in range(n)) for j in range(n))
    return AffineMap(bytes(rs.simple_reflections[i]), m, (0,) * n)


def coroot_coords(rs: RootSystem, k: int) -> tuple[int, ...]:
    """Coordinates of alpha_k^v in the fundamental-coweight basis.

    Component j is <alpha_j, alpha_k^v>, which is the same data as the
    coroot pairing form on root coordinates.
    """
    return rs.coroot_form(k)


def reflection_map(rs: RootSystem, k: int, level: int = 0) -> AffineMap:
    """Affine reflection in the wall <alpha_k, v> = level."""
    perm = bytes(rs.reflection(k))
    m = tuple(tuple(int(x) for x in row) for row in coweight_matrix(rs, perm))
    t = tuple(level * x for x in coroot_coords(rs, k))
    return AffineMap(perm, m, t)


def descend_to_alcove(rs: RootSystem, v) -> tuple[Vec, AffineMap]:
    """Move v into the closed fundamental alcove, tracking the map used.

    The returned map g satisfies g(v) = result and lies in the affine
    Weyl group: its linear part is in the Weyl group and its
    translation part in the *coroot* lattice.  (Translating by other
    coweight vectors would silently change the Omega-coset of the
    point, so only coroot translations are allowed here.)
    """
    v0 = _frac_vec(v)
    g = _identity_map(rs)
    cur = v0
    # bulk reduction modulo the coroot lattice (rows of the Cartan matrix)
    c_inv = mat_invert(rs.cartan)
    n = rs.rank
    x = [sum(cur[j] * c_inv[j][k] for j in range(n)) for k in range(n)]
    shift_q = [-(t.numerator // t.denominator) for t in x]
    if any(shift_q):
        t_vec = tuple(sum(shift_q[i] * rs.cartan[i][j] for i in range(n))
                      for j in range(n))
        g = _translation_map(rs, t_vec).after(g)
        cur = g.apply(v0)
    marks = rs.marks
    theta = reflection_map(rs, rs.highest_root_index, level=1)
    for _ in range(100000):
        i = next((i for i in range(n) if cur[i] < 0), None)
        if i is not None:
            g = _simple_map(rs, i).after(g)
            cur = g.apply(v0)
            continue
        height = sum(Fraction(m) * x_ for m, x_ in zip(marks, cur))
        if height > 1:
            g = theta.after(g)
            cur = g.apply(v0)
            continue
        return cur, g
    raise RuntimeError("alcove descent failed to terminate")


@lru_cache(maxsize=None)
def _omega_data(type_text: str) -> tuple[AffineMap, ...]:
    rs = RootSystem.build(type_text)
    n = rs.rank
    _, s, _ = smith_normal_form(rs.cartan)
    order = 1
    for i in range(n):
        order *= int(s[i][i])
    order = abs(order)
    c_inv = mat_invert(rs.cartan)

    def coset_key(vec):
        w = [sum(Fraction(vec[j]) * c_inv[j][k] for j in range(n))
             for k in range(n)]
        return tuple(x - (x.numerator // x.denominator) for x in w)

    reps: dict[tuple, tuple[int, ...]] = {coset_key((0,) * n): (0,) * n}
    frontier = [(0,) * n]
    while len(reps) < order and frontier:
        base = frontier.pop(0)
        for i in range(n):
            for d in (1, -1):
                cand = tuple(x + d * (i == j) for j, x in enumerate(base))
                key = coset_key(cand)
                if key not in reps:
                    reps[key] = cand
                    frontier.append(cand)
    if len(reps) != order:
        raise AssertionError("coweight/coroot coset enumeration failed")
    interior = tuple(Fraction(1, rs.coxeter_number) for _ in range(n))
    out = []
    for rep in reps.values():
        shifted = tuple(a + b for a, b in zip(interior, rep))
        _, g = descend_to_alcove(rs, shifted)
        omega = g.after(_translation_map(rs, rep))
        out.append(omega)
    out.sort(key=lambda m: (not m.is_identity(), m.matrix, m.translation))
    return tuple(out)


def omega_group(rs: RootSystem) -> tuple[AffineMap, ...]:
    """The alcove-symmetry group (coweight lattice mod coroot lattice)."""
    return _omega_data(rs.cartan_type.format())


def omega_fixers(rs: RootSystem, v) -> list[AffineMap]:
    v = _frac_vec(v)
    return [m for m in omega_group(rs) if m.apply(v) == v]


def stabilizer_maps(rs: RootSystem, v) -> list[AffineMap]:
    """Affine reflections in the alcove walls passing through v.

    Together with the omega fixers these generate the full stabilizer
    of v in the extended affine Weyl group.
    """
    v = _frac_vec(v)
    out = [_simple_map(rs, i) for i in range(rs.rank) if v[i] == 0]
    height = sum(Fraction(m) * x for m, x in zip(rs.marks, v))
    if height == 1:
        out.append(reflection_map(rs, rs.highest_root_index, level=1))
    return out


def is_quasi_isolated(rs: RootSystem, v):
    """Whether no proper Levi subgroup contains the centralizer of v.

    Returns ``(flag, levi_indices)``; when the flag is False,
    ``levi_indices`` is the root-index set of the smallest Levi
    containing the centralizer (the fixed space's annihilator).
    """
    v = _frac_vec(v)
    mats = [m.matrix for m in stabilizer_maps(rs, v)]
    mats += [m.matrix for m in omega_fixers(rs, v) if not m.is_identity()]
    if not mats:
        mats = [_identity_map(rs).matrix]
    fixed = fixed_space_basis(mats)
    if not fixed:
        return True, None
    levi = frozenset(
        k for k in range(len(rs.roots))
        if all(sum(Fraction(c) * u[j] for j, c in enumerate(rs.roots[k])) == 0
               for u in fixed))
    return False, levi


def bad_primes(rs: RootSystem) -> list[int]:
    """Primes dividing some coefficient of the highest root."""
    out = set()
    for m in rs.marks:
        for p in (2, 3, 5, 7):
            if m % p == 0:
                out.add(p)
    return sorted(out)


def alcove_points_of_order(rs: RootSystem, n: int) -> list[Vec]:
    """All alcove points of exact order n (no Omega-dedup).

    These are vectors a/n with nonnegative integer a and
    sum(marks * a) <= n; exactness of the order means gcd(a) is
    coprime to n.
    """
    marks = rs.marks
    r = rs.rank
    raw: list[tuple[int, ...]] = []

    def rec(i: int, budget: int, acc: list[int]):
        if i == r:
            raw.append(tuple(acc))
            return
        for a_i in range(budget // marks[i] + 1):
            acc.append(a_i)
            rec(i + 1, budget - marks[i] * a_i, acc)
            acc.pop()

    rec(0, n, [])
    points = []
    for a in raw:
        g = 0
        for x in a:
            g = gcd(g, x)
        keep = (n == 1) if g == 0 else (gcd(n, g) == 1)
        if keep:
            points.append(tuple(Fraction(x, n) for x in a))
    return points


@dataclass(frozen=True)
class TorsionRecord:
    """One conjugacy class of quasi-isolated torsion points."""

    order: int
    point: Vec
    centralizer_type: CartanType
    component_order: int           # |A(s)|
    automizer_order: int           # |A(C)|
    automizer_label: str           # e.g. "2", "4", "S3"


def classify_quasi_isolated(rs: RootSystem, max_order: int | None = None,
                            with_automizer: bool = True) -> list[TorsionRecord]:
    """All quasi-isolated classes, one record per class.

    The order of a quasi-isolated point divides lcm(marks) * |Omega|
    (its face of the alcove admits a unique fixed point of the
    residual symmetry group, which is an average of vertex orbits), so
    the sweep below is exhaustive.
    """
    if not rs.cartan_type.is_simple():
        raise ValueError("classification expects an irreducible type")
    omegas = omega_group(rs)
    if max_order is None:
        if len(omegas) == 1:
            # Without alcove symmetries only the alcove vertices qualify.
            max_order = max(rs.marks)
        else:
            lcm_marks = 1
            for m in rs.marks:
                lcm_marks = lcm_marks * m // gcd(lcm_marks, m)
            max_order = lcm_marks * len(omegas)
    marks = rs.marks
    r = rs.rank
    seen: set[tuple[int, ...]] = set()
    records = []
    for n in range(1, max_order + 1):
        for v in alcove_points_of_order(rs, n):
            a = tuple(x.numerator * (n // x.denominator) for x in v)
            wall_count = sum(1 for x in a if x == 0)
            if sum(m * x for m, x in zip(marks, a)) == n:
                wall_count += 1
            if wall_count < r and len(omegas) == 1:
                continue  # cannot be quasi-isolated without alcove symmetry
            if wall_count < r:
                fixers = [o for o in omegas if not o.is_identity()
                          and o.apply_scaled(a, n) == a]
                if not fixers:
                    continue
                qi, _ = is_quasi_isolated(rs, v)
                if not qi:
                    continue
            canon = min(o.apply_scaled(a, n) for o in omegas)
            if canon in seen:
                continue
            seen.add(canon)
            fixers = [o for o in omegas if o.apply_scaled(a, n) == a]
            ctype = rs.subsystem_type(centralizer_indices(rs, v))
            if with_automizer:
                a_c, label = automizer(rs, v)
            else:
                a_c, label = 0, "?"
            records.append(TorsionRecord(
                order=n, point=v, centralizer_type=ctype,
                component_order=len(fixers),
                automizer_order=a_c, automizer_label=label))
    records.sort(key=lambda t: (t.order, t.centralizer_type.format()))
    return records


def _fixes_mod_lattice(rs: RootSystem, p: Perm, v: Vec) -> bool:
    m = coweight_matrix(rs, p)
    img = tuple(sum(m[i][j] * v[j] for j in range(rs.rank))
                for i in range(rs.rank))
    return all((a - b).denominator == 1 for a, b in zip(img, v))


def automizer(rs: RootSystem, v) -> tuple[int, str]:
    """Order and label of N(C(s))/C(s)-degree data for the class of v.

    Counts cosets of the centralizer's reflection group inside the
    subsystem normalizer that conjugate the full stabilizer to itself;
    the label distinguishes the one nonabelian case of order 6.
    """
    v = _frac_vec(v)
    r_indices = centralizer_indices(rs, v)
    basis = rs.subsystem_basis(r_indices)
    degree = len(rs.roots)
    chain = weyl_chain(rs)
    refl_gens = [bytes(rs.reflection(k)) for k in basis]
    wr = StabilizerChain(degree, refl_gens)
    cw_gens = refl_gens + [m.perm for m in omega_fixers(rs, v)
                           if not m.is_identity()]
    ambient_gens = [bytes(p) for p in rs.simple_reflections]
    if not r_indices:
        nset = chain
    else:
        nset, _ = setwise_stabilizer(ambient_gens, chain.order(),
                                     tuple(sorted(r_indices)))
    index = nset.order() // wr.order()
    n_gens = [g for level in nset.level_gens for g in level] or [nset.identity]
    reps = [nset.identity]
    frontier = [nset.identity]
    while frontier:
        x = frontier.pop()
        for g in n_gens:
            y = compose(g, x)
            if not any(compose(invert(r), y) in wr for r in reps):
                reps.append(y)
                frontier.append(y)
    if len(reps) != index:
        raise AssertionError("coset enumeration mismatch in automizer")
    good = []
    for x in reps:
        xi = invert(x)
        if all(_fixes_mod_lattice(rs, compose(x, compose(p, xi)), v)
               for p in cw_gens):
            good.append(x)
    order = len(good)
    abelian = True
    for a in good:
        for b in good:
            comm = compose(compose(a, b), compose(invert(a), invert(b)))
            if comm not in wr:
                abelian = False
                break
        if not abelian:
            break
    label = "S3" if (order == 6 and not abelian) else str(order)
    return order, label


if __name__ == "__main__":
    import doctest

    doctest.testmod()
