"""Twisted Levi subgroups of finite reductive groups.

A Levi subgroup here is a parabolic subsystem of the ambient root
system together with a Weyl-group twist describing the Frobenius
action on it.  The module classifies these up to rational conjugacy,
decides which are e-split (centralizers of Sylow Phi_e-tori), computes
relative Weyl groups N(L)/L with or without a semisimple parameter,
and runs the finite-torus checks that control non-connected centers.

Coordinates follow the torsion module: vectors live in the
fundamental-coweight basis, roots pair with them through their root
coordinates, and the Frobenius of a twisted form acts on the coweight
space as q times the matrix of ``tau = twist . phi``.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from ._linalg import char_poly, kernel_basis, matmul, rref, row_space_echelon, \
    smith_normal_form, transpose
from ._linalg import invert as mat_invert
from ._linalg import rank as mat_rank
from .cyclotomic import CycFactorization, cyclotomic_coeffs, ell_valuation, \
    euler_phi
from .rootsystem import RootSystem, SimpleType
from .torsion import centralizer_indices, coroot_coords, pairing
from .weyl import OrbitCapExceeded, Perm, StabilizerChain, apply_to_set, \
    compose, coweight_matrix, fixed_space_basis, identity_perm, \
    molien_degrees, orbit_on_sets, perm_order, setwise_stabilizer, \
    subgroup_chain, weyl_chain
from .weyl import invert as perm_invert
from .weyl import longest_element as weyl_longest

__all__ = [
    "ORBIT_CAP_ENV",
    "orbit_cap",
    "Frobenius",
    "RationalComponent",
    "RationalType",
    "twisted_type",
    "inflate",
    "TwistedLevi",
    "enumerate_levis",
    "ESplitReport",
    "is_e_split",
    "sylow_twist",
    "enumerate_e_split",
    "WeylDescriptor",
    "relative_weyl",
    "relative_weyl_pair",
    "relative_weyl_pair_elements",
    "TorsionCheck",
    "torsion_centralizer_check",
    "torus_fixed_points",
    "e_ell_adapted",
    "CoverRow",
    "CoverReport",
    "esplit_cover_check",
    "is_parabolic",
]


ORBIT_CAP_ENV = "QIBLOCKS_ORBIT_CAP"
_DEFAULT_CAP = 10 ** 8
# element enumeration (as opposed to orbits) stays far below the orbit cap
_ENUM_LIMIT = 10 ** 6
_MOLIEN_LIMIT = 5000


def orbit_cap() -> int:
    """Resource cap for orbit/coset enumerations, env-overridable."""
    raw = os.environ.get(ORBIT_CAP_ENV)
    if raw is None:
        return _DEFAULT_CAP
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{ORBIT_CAP_ENV} must be an integer, got {raw!r}")
    if value <= 0:
        raise ValueError(f"{ORBIT_CAP_ENV} must be positive, got {value}")
    return value


Vec = tuple[Fraction, ...]


def _frac_vec(v) -> Vec:
    return tuple(Fraction(x) for x in v)


def _mod1(v) -> Vec:
    return tuple(x - (x.numerator // x.denominator) for x in _frac_vec(v))


def _apply(matrix, v) -> Vec:
    n = len(v)
    return tuple(sum(Fraction(matrix[i][j]) * v[j] for j in range(n))
                 for i in range(n))


def _coords_in_basis(basis, targets):
    """Coordinates of each target vector in the given independent basis."""
    if not basis:
        if any(any(x for x in t) for t in targets):
            raise ValueError("vector outside the zero space")
        return [() for _ in targets]
    n = len(basis[0])
    m = len(basis)
    rows = [[Fraction(basis[j][i]) for j in range(m)]
            + [Fraction(t[i]) for t in targets] for i in range(n)]
    red, pivots = rref(rows)
    if pivots[: m] != list(range(m)) or len(pivots) != m:
        raise ValueError("vector outside the spanned space")
    return [tuple(red[i][m + j] for i in range(m))
            for j in range(len(targets))]


def _restrict(matrix, basis):
    """Matrix of a linear map on an invariant subspace, in that basis."""
    images = [_apply(matrix, _frac_vec(b)) for b in basis]
    coords = _coords_in_basis(basis, images)
    # column convention: entry [i][j] is the i-th coordinate of the
    # image of the j-th basis vector
    m = len(basis)
    return tuple(tuple(coords[j][i] for j in range(m)) for i in range(m))


def _poly_at_matrix(coeffs, matrix):
    n = len(matrix)
    out = [[Fraction(0)] * n for _ in range(n)]
    for c in reversed(coeffs):
        out = [list(row) for row in matmul(out, matrix)]
        for i in range(n):
            out[i][i] += c
    return out


def inflate(f: CycFactorization, d: int) -> CycFactorization:
    """Substitute q -> q^d in a cyclotomic product.

    >>> inflate(CycFactorization.q_pow_minus_one(1), 2).format()
    'Φ1Φ2'
    >>> inflate(CycFactorization.make(1, 0, {3: 1}), 2).format()
    'Φ3Φ6'
    """
    if d < 1:
        raise ValueError("inflation degree must be positive")
    phi: dict[int, int] = {}
    for n, e in f.phi:
        nd = n * d
        for m in range(1, nd + 1):
            if nd % m == 0 and m // _gcd(m, d) == n:
                phi[m] = phi.get(m, 0) + e
    return CycFactorization.make(f.scalar, f.q_power * d, phi)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


# ---------------------------------------------------------------------------
# rational types


@dataclass(frozen=True)
class Frobenius:
    """Diagram-automorphism part of a Frobenius, with an optional q."""

    phi: Perm
    q: int | None = None


@dataclass(frozen=True)
class RationalComponent:
    """One Frobenius-orbit of simple factors of a reductive group.

    ``kind`` is the type of a single factor measured inside the
    ambient system, ``dual_kind`` the type of the matching factor on
    the dual side, ``twist`` the order of the induced graph
    automorphism, and ``field_deg`` the length of the factor orbit
    (the component is defined over q^field_deg).
    """

    kind: SimpleType
    dual_kind: SimpleType
    twist: int
    field_deg: int

    def format(self, dual: bool = False) -> str:
        st = self.dual_kind if dual else self.kind
        prefix = {1: "", 2: "2", 3: "3"}[self.twist]
        fld = "q" if self.field_deg == 1 else f"q^{self.field_deg}"
        return f"{prefix}{st.format()}({fld})"

    def generic_order(self) -> CycFactorization:
        base = CycFactorization.generic_order(
            self.kind.series, self.kind.rank, self.twist)
        return inflate(base, self.field_deg)

    @property
    def total_rank(self) -> int:
        return self.kind.rank * self.field_deg

    def sort_key(self):
        return (-self.kind.rank, self.kind.series, self.kind.tilde,
                self.twist, self.field_deg)


@dataclass(frozen=True)
class RationalType:
    """Rational form of a reductive subgroup: components plus torus part.

    The torus part is the generic order of the central torus (the
    characteristic polynomial of q.tau on the coweight space modulo
    the span of the subsystem's coroots, as a cyclotomic product).
    """

    components: tuple[RationalComponent, ...]
    torus: CycFactorization
    pi0: int = 1

    @property
    def semisimple_rank(self) -> int:
        return sum(c.total_rank for c in self.components)

    @property
    def total_rank(self) -> int:
        return self.semisimple_rank + self.torus.degree()

    def order(self) -> CycFactorization:
        out = self.torus
        for c in self.components:
            out = out * c.generic_order()
        return out

    def format(self, dual: bool = False) -> str:
        parts: list[str] = []
        torus_text = self.torus.format()
        if torus_text != "1":
            parts.append(torus_text)
        run: list[str] = []
        for c in self.components:
            run.append(c.format(dual))
        grouped: list[str] = []
        i = 0
        while i < len(run):
            j = i
            while j < len(run) and run[j] == run[i]:
                j += 1
            grouped.append(run[i] if j - i == 1 else f"{run[i]}^{j - i}")
            i = j
        parts.extend(grouped)
        body = ".".join(parts) if parts else "1"
        if self.pi0 > 1:
            body = f"{body}.{self.pi0}"
        return body


def _block_has_short(rs: RootSystem) -> dict[int, bool]:
    flags: dict[int, bool] = {}
    for k in range(len(rs.roots)):
        blk = rs._block_of(rs.roots[k])
        flags[blk] = flags.get(blk, False) or rs.root_lengths[k] == "short"
    return flags


def _component_partition(rs: RootSystem, indices) -> list[list[int]]:
    remaining = set(indices)
    basis = rs.subsystem_basis(indices)
    comps = []
    for b in basis:
        if b in remaining:
            comp = rs._component_roots(indices, b)
            comps.append(sorted(comp))
            remaining -= set(comp)
    return comps


def _component_twist(rs: RootSystem, comp_basis, sigma: Perm) -> int:
    """Order of the graph automorphism induced on one component.

    ``sigma`` must stabilize the component; the inner part is divided
    out by walking the image of a component-regular dominant point
    back into the dominant chamber.
    """
    rows = [[Fraction(x) for x in rs.roots[b]] for b in comp_basis]
    aug = [row + [Fraction(1)] for row in rows]
    red, pivots = rref(aug)
    n = rs.rank
    v0 = [Fraction(0)] * n
    for r, p in enumerate(pivots):
        v0[p] = red[r][n]
    u = _apply(coweight_matrix(rs, sigma), tuple(v0))
    word: list[int] = []
    while True:
        neg = next((b for b in comp_basis if pairing(rs, b, u) < 0), None)
        if neg is None:
            break
        c = pairing(rs, neg, u)
        cr = coroot_coords(rs, neg)
        u = tuple(u[i] - c * cr[i] for i in range(n))
        word.append(neg)
    total = sigma
    for b in word:
        total = compose(bytes(rs.reflection(b)), total)
    images = [total[b] for b in comp_basis]
    if sorted(images) != sorted(comp_basis):
        raise AssertionError("chamber walk did not return to the basis")
    # order of the induced permutation of the component's simple roots
    perm = {b: total[b] for b in comp_basis}
    order = 1
    seen: set[int] = set()
    for b in comp_basis:
        if b in seen:
            continue
        length = 0
        x = b
        while x not in seen:
            seen.add(x)
            x = perm[x]
            length += 1
        order = order * length // _gcd(order, length)
    return order


def twisted_type(rs: RootSystem, indices, tau: Perm,
                 pi0: int = 1) -> RationalType:
    """Rational type of a tau-stable closed subsystem.

    ``tau`` is the full linear part of the Frobenius (twist composed
    with any diagram automorphism); it must permute ``indices``.

    >>> rs = RootSystem.build("A2")
    >>> twisted_type(rs, rs.closure(rs.simple_indices), identity_perm(6)).format()
    'A2(q)'
    """
    indices = frozenset(indices)
    if any(tau[k] not in indices for k in indices):
        raise ValueError("tau does not stabilize the subsystem")
    basis = rs.subsystem_basis(indices)
    comps = _component_partition(rs, indices)
    comp_sets = [frozenset(c) for c in comps]
    short_blocks = _block_has_short(rs)

    components: list[RationalComponent] = []
    used: set[int] = set()
    for start in range(len(comps)):
        if start in used:
            continue
        # tau-orbit of this component
        orbit = [start]
        used.add(start)
        current = start
        while True:
            img = frozenset(tau[k] for k in comp_sets[current])
            nxt = comp_sets.index(img)
            if nxt == start:
                break
            orbit.append(nxt)
            used.add(nxt)
            current = nxt
        d = len(orbit)
        comp = comps[start]
        comp_basis = [b for b in basis if b in comp_sets[start]]
        factors = rs.subsystem_type(comp).factors
        if len(factors) != 1:
            raise AssertionError("component did not identify as irreducible")
        kind = factors[0]
        sigma = tau
        for _ in range(d - 1):
            sigma = compose(tau, sigma)
        twist = _component_twist(rs, comp_basis, sigma)
        all_long = all(rs.root_lengths[k] == "long" for k in comp)
        in_mixed = short_blocks.get(rs._block_of(rs.roots[comp[0]]), False)
        dual_kind = SimpleType(
            {"B": "C", "C": "B"}.get(kind.series, kind.series),
            kind.rank, all_long and in_mixed)
        # rank-2 B and C describe the same system; normalize the label
        if kind.rank == 2 and kind.series == "C":
            kind = SimpleType("B", 2, kind.tilde)
        if dual_kind.rank == 2 and dual_kind.series == "C":
            dual_kind = SimpleType("B", 2, dual_kind.tilde)
        components.append(RationalComponent(kind, dual_kind, twist, d))

    m = coweight_matrix(rs, tau)
    full = CycFactorization.from_char_poly(char_poly(m))
    if basis:
        space = [_frac_vec(coroot_coords(rs, b)) for b in basis]
        sub = CycFactorization.from_char_poly(
            char_poly(_restrict(m, space)))
        torus = full / sub
    else:
        torus = full
    if not torus.is_laurent_free() and torus.phi:
        raise AssertionError("torus part failed to divide out")
    result = RationalType(tuple(sorted(components,
                                       key=RationalComponent.sort_key)),
                          torus, pi0)
    if result.total_rank != rs.rank:
        raise AssertionError("rank bookkeeping failed for rational type")
    return result


# ---------------------------------------------------------------------------
# twisted Levi subgroups


def is_parabolic(rs: RootSystem, indices) -> bool:
    """True when the closed subsystem is an intersection with a subspace."""
    indices = frozenset(indices)
    if not indices:
        return True
    basis = rs.subsystem_basis(indices)
    rows = [[Fraction(x) for x in rs.roots[b]] for b in basis]
    red, pivots = rref(rows)
    in_span = set()
    for k in range(len(rs.roots)):
        target = [Fraction(x) for x in rs.roots[k]]
        vec = list(target)
        for r, p in enumerate(pivots):
            c = vec[p]
            if c:
                vec = [vec[i] - c * red[r][i] for i in range(len(vec))]
        if not any(vec):
            in_span.add(k)
    return in_span == indices


@dataclass(frozen=True)
class TwistedLevi:
    """A parabolic subsystem with a Frobenius twist.

    The rational structure is ``F = q . tau`` with
    ``tau = twist . phi``; ``tau`` must stabilize the subsystem.
    """

    rs: RootSystem
    indices: frozenset[int]
    twist: Perm
    phi: Perm

    def __post_init__(self):
        tau = self.tau
        if any(tau[k] not in self.indices for k in self.indices):
            raise ValueError("twist does not stabilize the subsystem")
        if not is_parabolic(self.rs, self.indices):
            raise ValueError("subsystem is not parabolic (not a Levi)")

    @cached_property
    def tau(self) -> Perm:
        return compose(self.twist, self.phi)

    @cached_property
    def basis(self) -> tuple[int, ...]:
        return self.rs.subsystem_basis(self.indices)

    @cached_property
    def center_basis(self) -> tuple[Vec, ...]:
        rs = self.rs
        if not self.indices:
            eye = [tuple(Fraction(int(i == j)) for j in range(rs.rank))
                   for i in range(rs.rank)]
            return tuple(eye)
        mats = [coweight_matrix(rs, bytes(rs.reflection(b)))
                for b in self.basis]
        return tuple(fixed_space_basis(mats))

    @cached_property
    def center_matrix(self):
        """tau restricted to the fixed space of the Levi's Weyl group."""
        return _restrict(coweight_matrix(self.rs, self.tau),
                         self.center_basis)

    @property
    def corank(self) -> int:
        return len(self.center_basis)

    @cached_property
    def rational_type(self) -> RationalType:
        return twisted_type(self.rs, self.indices, self.tau)

    def order(self) -> CycFactorization:
        return self.rational_type.order()

    def format(self, dual: bool = False) -> str:
        return self.rational_type.format(dual)

    def is_full(self) -> bool:
        return len(self.indices) == len(self.rs.roots)

    def sort_key(self):
        return (len(self.indices), self.format())


def _strong_gens(chain: StabilizerChain) -> list[Perm]:
    seen = []
    for level in chain.level_gens:
        for g in level:
            if g not in seen:
                seen.append(g)
    return seen


def _center_space_of(rs: RootSystem, indices) -> list[Vec]:
    if not indices:
        return [tuple(Fraction(int(i == j)) for j in range(rs.rank))
                for i in range(rs.rank)]
    basis = rs.subsystem_basis(indices)
    mats = [coweight_matrix(rs, bytes(rs.reflection(b))) for b in basis]
    return fixed_space_basis(mats)


def _coset_table(rs: RootSystem, n_chain: StabilizerChain,
                 wk_order: int, center: list[Vec],
                 cap: int) -> dict[tuple, Perm]:
    """Left cosets W_K x of the subsystem Weyl group in its normalizer.

    Keyed by the matrix of x on the center space, which is a faithful
    coset invariant for parabolic subsystems.
    """
    gens = _strong_gens(n_chain)
    expected = n_chain.order() // wk_order

    def key(x: Perm):
        m = _restrict(coweight_matrix(rs, x), center)
        return tuple(tuple(row) for row in m)

    ident = n_chain.identity
    reps = {key(ident): ident}
    queue = [ident]
    while queue:
        x = queue.pop()
        for g in gens:
            y = compose(x, g)
            k = key(y)
            if k not in reps:
                if len(reps) > cap:
                    raise OrbitCapExceeded("coset table exceeded cap")
                reps[k] = y
                queue.append(y)
    if len(reps) != expected:
        raise AssertionError("coset enumeration mismatch")
    return reps


def _twisted_classes(reps: dict[tuple, Perm], gens, twist_of,
                     key_fn) -> list[Perm]:
    """Class representatives of x ~ g x twist_of(g)^{-1} on coset reps."""
    unseen = dict(reps)
    out = []
    while unseen:
        start_key = min(unseen)
        rep = unseen.pop(start_key)
        out.append(rep)
        frontier = [rep]
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = compose(compose(g, x), perm_invert(twist_of(g)))
                k = key_fn(y)
                if k in unseen:
                    frontier.append(unseen.pop(k))
    return out


def enumerate_levis(rs: RootSystem, phi: Perm | None = None,
                    cap: int | None = None,
                    include_tori: bool = True) -> list[TwistedLevi]:
    """All rational classes of twisted Levi subgroups.

    Classes are pairs (parabolic subsystem, Frobenius twist) up to the
    natural Weyl-group equivalence.  With ``include_tori=False`` the
    rank-0 Levis (maximal tori) are skipped; their classification
    enumerates Weyl-group elements and is restricted to groups of
    order at most 10^6.
    """
    if phi is None:
        phi = identity_perm(len(rs.roots))
    if cap is None:
        cap = orbit_cap()
    chain = weyl_chain(rs)
    worder = chain.order()
    wgens = [bytes(p) for p in rs.simple_reflections]

    def frob(g: Perm) -> Perm:
        return compose(compose(phi, g), perm_invert(phi))

    out: list[TwistedLevi] = []

    # -- rank-0 classes: twisted conjugacy classes of W itself
    if include_tori:
        if worder > min(cap, _ENUM_LIMIT):
            raise OrbitCapExceeded(
                f"maximal-torus classification needs enumerating {worder} "
                "elements; pass include_tori=False or raise the cap")
        unseen = {bytes(x): None for x in chain.elements()}
        while unseen:
            rep = next(iter(unseen))
            del unseen[rep]
            out.append(TwistedLevi(rs, frozenset(), rep, phi))
            frontier = [rep]
            while frontier:
                x = frontier.pop()
                for g in wgens:
                    y = compose(compose(g, x), perm_invert(frob(g)))
                    if y in unseen:
                        del unseen[y]
                        frontier.append(y)

    # -- proper standard subsets, deduplicated up to W-conjugacy
    simple = rs.simple_indices
    buckets: dict[tuple, list[tuple[frozenset[int], dict]]] = {}
    classes: list[frozenset[int]] = []
    for mask in range(1, 1 << rs.rank):
        gens_idx = [simple[i] for i in range(rs.rank) if mask >> i & 1]
        closed = rs.closure(gens_idx)
        full = tuple(sorted(closed))
        perp = frozenset(
            k for k in range(len(rs.roots))
            if all(rs.pairing_with_coroot(b, rs.roots[k]) == 0
                   for b in closed if b in rs.subsystem_basis(closed)))
        bucket_key = (rs.subsystem_type(closed).format(),
                      rs.subsystem_type(perp).format() if perp else "0")
        bucket = buckets.setdefault(bucket_key, [])
        known = False
        for _, orbit in bucket:
            if full in orbit:
                known = True
                break
        if not known:
            orbit = orbit_on_sets(wgens, full, cap=cap)
            bucket.append((frozenset(closed), orbit))
            classes.append(frozenset(closed))

    for closed in classes:
        full = tuple(sorted(closed))
        n_chain, orbit = setwise_stabilizer(wgens, worder, full, cap=cap)
        wk_chain = subgroup_chain(rs, closed)
        phi_image = apply_to_set(phi, full)
        if phi_image not in orbit:
            continue  # the class is not Frobenius-stable
        g0 = orbit[phi_image]

        def frob2(g: Perm, g0=g0) -> Perm:
            return compose(compose(perm_invert(g0), frob(g)), g0)

        center = _center_space_of(rs, closed)
        reps = _coset_table(rs, n_chain, wk_chain.order(), center, cap)

        def key_fn(x: Perm, center=center):
            m = _restrict(coweight_matrix(rs, x), center)
            return tuple(tuple(row) for row in m)

        gens = _strong_gens(n_chain)
        for x in _twisted_classes(reps, gens, frob2, key_fn):
            w = compose(x, perm_invert(g0))
            out.append(TwistedLevi(rs, closed, w, phi))

    out.sort(key=TwistedLevi.sort_key)
    return out


# ---------------------------------------------------------------------------
# e-split Levis


@dataclass(frozen=True)
class ESplitReport:
    """Certificate for the e-split test.

    ``sylow_dim`` is the dimension of the Phi_e-kernel of the twist on
    the Levi's center space; ``centralizing`` is the subsystem of
    roots vanishing on that kernel.  The Levi is e-split exactly when
    that subsystem equals its own.
    """

    is_split: bool
    sylow_dim: int
    centralizing: frozenset[int]


def is_e_split(levi: TwistedLevi, e: int) -> ESplitReport:
    """Kernel test: is the Levi the centralizer of its Sylow Phi_e-torus?

    >>> rs = RootSystem.build("A2")
    >>> torus = TwistedLevi(rs, frozenset(), identity_perm(6), identity_perm(6))
    >>> is_e_split(torus, 1).is_split
    True
    """
    rs = levi.rs
    m = levi.center_matrix
    if not m:
        return ESplitReport(True, 0, frozenset(range(len(rs.roots))))
    p = _poly_at_matrix([Fraction(c) for c in cyclotomic_coeffs(e)], m)
    ker = kernel_basis(p)
    lifted = []
    for c in ker:
        vec = [Fraction(0)] * rs.rank
        for cj, b in zip(c, levi.center_basis):
            for i in range(rs.rank):
                vec[i] += cj * b[i]
        lifted.append(tuple(vec))
    vanish = frozenset(
        k for k in range(len(rs.roots))
        if all(pairing(rs, k, u) == 0 for u in lifted))
    return ESplitReport(vanish == levi.indices, len(ker), vanish)


def _phi_e_multiplicity(rs: RootSystem, tau: Perm, e: int) -> int:
    """Phi_e-exponent of the characteristic polynomial of tau, via the
    rank of Phi_e evaluated at its integer coweight matrix."""
    m = coweight_matrix(rs, tau)
    coeffs = [Fraction(c) for c in cyclotomic_coeffs(e)]
    return (rs.rank - mat_rank(_poly_at_matrix(coeffs, m))) \
        // euler_phi(e)


def _perm_power(p: Perm, k: int, degree: int) -> Perm:
    out = identity_perm(degree)
    base = p
    while k:
        if k & 1:
            out = compose(out, base)
        base = compose(base, base)
        k >>= 1
    return out


_SYLOW_CACHE: dict[tuple, Perm] = {}


def sylow_twist(rs: RootSystem, e: int, phi: Perm | None = None) -> Perm:
    """A twist w for which q.(w.phi) has a full Phi_e-eigenspace.

    The target multiplicity is the Phi_e-exponent of the generic group
    order; the search tries distinguished elements first and then a
    deterministic pseudorandom walk through the Weyl group, checking
    both each sampled element and its power of order e (powers of
    regular elements stay regular, which makes the power test land
    quickly for every regular number e).
    """
    if phi is None:
        phi = identity_perm(len(rs.roots))
    key = (rs.cartan_type.format(), e, bytes(phi))
    if key in _SYLOW_CACHE:
        return _SYLOW_CACHE[key]
    full = twisted_type(rs, frozenset(range(len(rs.roots))), phi)
    target = full.order().exponent_of(e)
    degree = len(rs.roots)
    ident = identity_perm(degree)

    def good(w: Perm) -> bool:
        return _phi_e_multiplicity(rs, compose(w, phi), e) == target

    candidates = [ident, weyl_longest(rs)]
    cox = ident
    for i in rs.simple_indices:
        cox = compose(bytes(rs.reflection(i)), cox)
    h = perm_order(cox)
    power = ident
    for _ in range(h):
        power = compose(cox, power)
        candidates.append(power)
        candidates.append(compose(weyl_longest(rs), power))
    for w in candidates:
        if good(w):
            _SYLOW_CACHE[key] = w
            return w
    chain = weyl_chain(rs)
    rng = random.Random(20260823 + 1009 * e)
    levels = [sorted(t) for t in chain.transversal]
    for _ in range(20000):
        w = ident
        for level, points in enumerate(levels):
            pick = chain.transversal[level][rng.choice(points)]
            w = compose(w, pick)
        m = perm_order(w)
        if m % e == 0:
            z = _perm_power(w, m // e, degree)
            if good(z):
                _SYLOW_CACHE[key] = z
                return z
        if good(w):
            _SYLOW_CACHE[key] = w
            return w
    raise RuntimeError(f"no Phi_{e}-regular twist found for {rs.cartan_type.format()}")


def _stable_flats(rs: RootSystem, tau: Perm, e: int,
                  cap: int) -> list[frozenset[int]]:
    """Root subsystems cut out by tau-stable subspaces of the Phi_e-kernel.

    Nodes of the flat lattice are identified with their vanishing
    subsystems and deduplicated up to the centralizer of tau, so the
    search visits roughly one node per Levi class rather than one per
    subspace.
    """
    m = coweight_matrix(rs, tau)
    p = _poly_at_matrix([Fraction(c) for c in cyclotomic_coeffs(e)], m)
    amb = kernel_basis(p)
    nroots = len(rs.roots)
    if not amb:
        return [frozenset(range(nroots))]
    dim = len(amb)
    forms = [tuple(sum(Fraction(rs.roots[k][i]) * amb[j][i]
                       for i in range(rs.rank)) for j in range(dim))
             for k in range(nroots)]
    orbits: list[list[int]] = []
    taken: set[int] = set()
    for k in range(nroots):
        if k in taken:
            continue
        orb = [k]
        taken.add(k)
        x = tau[k]
        while x not in taken:
            orb.append(x)
            taken.add(x)
            x = tau[x]
        orbits.append(orb)

    cent = _perm_centralizer(rs, weyl_chain(rs), tau, cap)
    cgens = _strong_gens(cent)
    canon_cache: dict[frozenset[int], tuple[int, ...]] = {}

    def canon(k_set: frozenset[int]) -> tuple[int, ...]:
        cached = canon_cache.get(k_set)
        if cached is None:
            cached = min(orbit_on_sets(cgens, tuple(sorted(k_set)), cap=cap))
            canon_cache[k_set] = cached
        return cached

    def vanish_of(k_set) -> frozenset[int]:
        rows = [list(forms[k]) for k in sorted(k_set)]
        if rows:
            ker = kernel_basis(rows)
        else:
            ker = [tuple(Fraction(int(i == j)) for j in range(dim))
                   for i in range(dim)]
        if not ker:
            return frozenset(range(nroots))
        return frozenset(
            k for k in range(nroots)
            if all(sum(forms[k][j] * b[j] for j in range(dim)) == 0
                   for b in ker))

    start = vanish_of(frozenset())
    visited = {canon(start)}
    queue = [start]
    found = [start]
    while queue:
        k_cur = queue.pop()
        for orb in orbits:
            if orb[0] in k_cur:
                continue
            child = vanish_of(k_cur | set(orb))
            key = canon(child)
            if key not in visited:
                if len(visited) > cap:
                    raise OrbitCapExceeded("flat enumeration exceeded cap")
                visited.add(key)
                queue.append(child)
                found.append(child)
    full = frozenset(range(nroots))
    if full not in found:
        found.append(full)
    return found


def _subsystem_longest(rs: RootSystem, indices) -> Perm:
    """Longest element of the reflection subgroup of a closed subsystem."""
    basis = rs.subsystem_basis(indices)
    if not basis:
        return identity_perm(len(rs.roots))
    rows = [[Fraction(x) for x in rs.roots[b]] for b in basis]
    aug = [row + [Fraction(1)] for row in rows]
    red, pivots = rref(aug)
    u = [Fraction(0)] * rs.rank
    for r, p in enumerate(pivots):
        u[p] = red[r][rs.rank]
    u = tuple(u)
    w = identity_perm(len(rs.roots))
    while True:
        pos = next((b for b in basis if pairing(rs, b, u) > 0), None)
        if pos is None:
            break
        c = pairing(rs, pos, u)
        cr = coroot_coords(rs, pos)
        u = tuple(u[i] - c * cr[i] for i in range(rs.rank))
        w = compose(bytes(rs.reflection(pos)), w)
    return w


def _levi_conjugate(a: TwistedLevi, b: TwistedLevi, cap: int) -> bool:
    """Rational conjugacy test for two twisted Levis of the same system."""
    rs = a.rs
    if a.indices == b.indices and a.twist == b.twist:
        return True
    wgens = [bytes(p) for p in rs.simple_reflections]
    worder = weyl_chain(rs).order()
    seed = tuple(sorted(a.indices))
    target = tuple(sorted(b.indices))
    if not seed and not target:
        pass
    orbit = orbit_on_sets(wgens, seed, cap=cap)
    if target not in orbit:
        return False
    g = orbit[target]
    if target:
        n_chain, _ = setwise_stabilizer(wgens, worder, target, cap=cap)
        wk_chain = subgroup_chain(rs, b.indices)
        center = _center_space_of(rs, b.indices)
        reps = _coset_table(rs, n_chain, wk_chain.order(), center, cap)
        cands = (compose(x, g) for x in reps.values())
    else:
        chain = weyl_chain(rs)
        if chain.order() > min(cap, _ENUM_LIMIT):
            raise OrbitCapExceeded("torus conjugacy needs full enumeration")
        cands = (bytes(x) for x in chain.elements())
        wk_chain = StabilizerChain(len(rs.roots))
    tau_a, tau_b = a.tau, b.tau
    for x in cands:
        c = compose(compose(compose(perm_invert(tau_b), x), tau_a),
                    perm_invert(x))
        if c in wk_chain:
            return True
    return False


def enumerate_e_split(rs: RootSystem, e: int, phi: Perm | None = None,
                      cap: int | None = None) -> list[TwistedLevi]:
    """All rational classes of e-split Levi subgroups.

    Every returned Levi carries a verified kernel certificate; the
    full group is always a member (it contains its own Sylow
    Phi_e-torus).
    """
    if phi is None:
        phi = identity_perm(len(rs.roots))
    if cap is None:
        cap = orbit_cap()
    ident = identity_perm(len(rs.roots))
    split_phi = phi == ident
    candidates: list[TwistedLevi] = []
    if e == 1 and split_phi:
        for levi in _split_subset_classes(rs, cap):
            candidates.append(levi)
    elif (e == 2 and split_phi
          and coweight_matrix(rs, weyl_longest(rs))
          == tuple(tuple(-(i == j) for j in range(rs.rank))
                   for i in range(rs.rank))):
        w0 = weyl_longest(rs)
        for levi in _split_subset_classes(rs, cap):
            w = compose(w0, _subsystem_longest(rs, levi.indices))
            candidates.append(TwistedLevi(rs, levi.indices, w, phi))
    else:
        w = sylow_twist(rs, e, phi)
        tau = compose(w, phi)
        for k_set in _stable_flats(rs, tau, e, cap):
            candidates.append(TwistedLevi(rs, k_set, w, phi))

    out: list[TwistedLevi] = []
    buckets: dict[str, list[TwistedLevi]] = {}
    for levi in candidates:
        if not is_e_split(levi, e).is_split:
            continue
        text = levi.format()
        bucket = buckets.setdefault(text, [])
        if any(_levi_conjugate(levi, kept, cap) for kept in bucket):
            continue
        bucket.append(levi)
        out.append(levi)
    out.sort(key=TwistedLevi.sort_key)
    return out


def _split_subset_classes(rs: RootSystem, cap: int) -> list[TwistedLevi]:
    """Split Levis: one untwisted form per standard-subset class."""
    ident = identity_perm(len(rs.roots))
    wgens = [bytes(p) for p in rs.simple_reflections]
    simple = rs.simple_indices
    out: list[TwistedLevi] = []
    buckets: dict[tuple, list[dict]] = {}
    out.append(TwistedLevi(rs, frozenset(), ident, ident))
    for mask in range(1, 1 << rs.rank):
        gens_idx = [simple[i] for i in range(rs.rank) if mask >> i & 1]
        closed = rs.closure(gens_idx)
        full = tuple(sorted(closed))
        bucket_key = rs.subsystem_type(closed).format()
        bucket = buckets.setdefault(bucket_key, [])
        if any(full in orbit for orbit in bucket):
            continue
        bucket.append(orbit_on_sets(wgens, full, cap=cap))
        out.append(TwistedLevi(rs, closed, ident, ident))
    return out


# ---------------------------------------------------------------------------
# relative Weyl groups


_REAL_BLOCKS: list[tuple[str, tuple[int, ...]]] = []
for _series, _lo, _hi in (("A", 1, 8), ("B", 2, 8), ("D", 4, 8)):
    for _n in range(_lo, _hi + 1):
        _REAL_BLOCKS.append(
            (f"{_series}{_n}",
             tuple(SimpleType(_series, _n).degrees())))
for _name in ("G2", "F4", "E6", "E7", "E8"):
    _REAL_BLOCKS.append(
        (_name, tuple(SimpleType(_name[0], int(_name[1])).degrees())))

_COMPLEX_BLOCKS: list[tuple[str, tuple[int, ...]]] = [
    ("G31", (8, 12, 20, 24)),
    ("G32", (12, 18, 24, 30)),
    ("G(4,2,4)", (4, 8, 8, 12)),
    ("G(4,1,3)", (4, 8, 12)),
    ("G8", (8, 12)),
    ("G5", (6, 12)),
    ("G(4,1,2)", (4, 8)),
    ("G(4,2,2)", (4, 4)),
    ("Z4", (4,)),
    ("Z6", (6,)),
    ("Z3", (3,)),
]


def _decompose_degrees(degrees, blocks) -> list[str] | None:
    remaining = sorted(d for d in degrees if d > 1)
    if not remaining:
        return []
    for name, block in blocks:
        probe = list(remaining)
        ok = True
        for d in block:
            if d in probe:
                probe.remove(d)
            else:
                ok = False
                break
        if not ok:
            continue
        rest = _decompose_degrees(probe, blocks)
        if rest is not None:
            return [name] + rest
    return None


def _label_from_degrees(degrees, extension: int, complex_form: bool) -> str:
    blocks = _COMPLEX_BLOCKS if complex_form else _REAL_BLOCKS
    ordered = sorted(blocks, key=lambda item: (-len(item[1]),
                                               -max(item[1])))
    names = _decompose_degrees(degrees, ordered)
    if names is None:
        base = "?"
    elif not names:
        base = "1"
    else:
        grouped = []
        for name in sorted(names):
            if grouped and grouped[-1][0] == name:
                grouped[-1][1] += 1
            else:
                grouped.append([name, 1])
        base = "x".join(n if c == 1 else f"{n}^{c}" for n, c in grouped)
    if extension == 1:
        return base
    if base == "1":
        return str(extension)
    if "x" in base or "^" in base:
        return f"({base}).{extension}"
    return f"{base}.{extension}"


@dataclass(frozen=True)
class WeylDescriptor:
    """Order, reflection degrees and extension data of a relative Weyl group."""

    order: int
    degrees: tuple[int, ...] | None
    extension: int | None
    label: str

    def comparison_key(self):
        degs = (tuple(sorted(d for d in self.degrees if d > 1))
                if self.degrees is not None else None)
        return (self.order, degs, self.extension)


def _identity_matrix(n: int):
    return tuple(tuple(Fraction(int(i == j)) for j in range(n))
                 for i in range(n))


def _descriptor_from_matrices(mats) -> WeylDescriptor:
    """Identify a finite rational matrix group as a reflection group."""
    order = len(mats)
    n = len(mats[0]) if mats else 0
    if order == 1:
        return WeylDescriptor(1, (), 1, "1")
    eye = _identity_matrix(n)
    mat_set = {tuple(tuple(row) for row in m) for m in mats}
    refl = [m for m in mat_set
            if mat_rank([[m[i][j] - (i == j) for j in range(n)]
                         for i in range(n)]) == 1]
    # closure of the reflection subgroup
    closure = {eye}
    frontier = [eye]
    while frontier:
        x = frontier.pop()
        for g in refl:
            y = tuple(tuple(row) for row in matmul(g, x))
            if y not in closure:
                closure.add(y)
                frontier.append(y)
    refl_order = len(closure)
    ext = order // refl_order
    degrees = molien_degrees(sorted(closure), refl_order) if refl_order > 1 \
        else []
    if degrees is not None and refl_order > 1:
        label = _label_from_degrees(degrees, ext, complex_form=False)
        return WeylDescriptor(order, tuple(sorted(degrees)), ext, label)
    if refl_order == 1:
        doubled = molien_degrees(sorted(mat_set), order, product=order ** 2)
        if doubled is not None:
            doubled = sorted(doubled)
            paired = doubled[0::2]
            if paired == doubled[1::2]:
                label = _label_from_degrees(paired, 1, complex_form=True)
                return WeylDescriptor(order, tuple(paired), 1, label)
        if ext == order:
            return WeylDescriptor(order, (), order, str(order))
    return WeylDescriptor(order, None, None, f"[order {order}]")


def _full_group_descriptor(rs: RootSystem) -> WeylDescriptor:
    degrees = tuple(sorted(rs.degrees()))
    label = _label_from_degrees(degrees, 1, complex_form=False)
    return WeylDescriptor(rs.weyl_order(), degrees, 1, label)


def _perm_centralizer(rs: RootSystem, group_chain: StabilizerChain,
                      tau: Perm, cap: int) -> StabilizerChain:
    """Centralizer of tau inside the group, by conjugation-orbit Schreier."""
    gens = _strong_gens(group_chain)
    orbit = {tau: group_chain.identity}
    queue = [tau]
    while queue:
        x = queue.pop()
        t = orbit[x]
        for g in gens:
            y = compose(compose(g, x), perm_invert(g))
            if y not in orbit:
                if len(orbit) > cap:
                    raise OrbitCapExceeded("conjugation orbit exceeded cap")
                orbit[y] = compose(g, t)
                queue.append(y)
    target = group_chain.order() // len(orbit)
    cent = StabilizerChain(len(rs.roots))
    for x, t in orbit.items():
        if cent.order() == target:
            break
        for g in gens:
            y = compose(compose(g, x), perm_invert(g))
            schreier = compose(perm_invert(orbit[y]), compose(g, t))
            if schreier != cent.identity:
                cent.extend(schreier)
                if cent.order() == target:
                    break
    if cent.order() != target:
        raise AssertionError("centralizer generation fell short")
    return cent


def relative_weyl(levi: TwistedLevi, cap: int | None = None) -> WeylDescriptor:
    """N(L)/L as an abstract reflection-group descriptor (no parameter).

    >>> rs = RootSystem.build("F4")
    >>> t = TwistedLevi(rs, frozenset(), identity_perm(48), identity_perm(48))
    >>> relative_weyl(t).order
    1152
    """
    if cap is None:
        cap = orbit_cap()
    rs = levi.rs
    if levi.is_full():
        return WeylDescriptor(1, (), 1, "1")
    ident = identity_perm(len(rs.roots))
    if not levi.indices:
        if levi.tau == ident:
            return _full_group_descriptor(rs)
        cent = _perm_centralizer(rs, weyl_chain(rs), levi.tau, cap)
        if cent.order() > _MOLIEN_LIMIT:
            return WeylDescriptor(cent.order(), None, None,
                                  f"[order {cent.order()}]")
        mats = [coweight_matrix(rs, bytes(x)) for x in cent.elements()]
        return _descriptor_from_matrices(
            [tuple(tuple(Fraction(v) for v in row) for row in m)
             for m in mats])
    wgens = [bytes(p) for p in rs.simple_reflections]
    worder = weyl_chain(rs).order()
    full = tuple(sorted(levi.indices))
    n_chain, _ = setwise_stabilizer(wgens, worder, full, cap=cap)
    wk_chain = subgroup_chain(rs, levi.indices)
    center = list(levi.center_basis)
    reps = _coset_table(rs, n_chain, wk_chain.order(), center, cap)
    tau = levi.tau
    tau_inv = perm_invert(tau)
    mats = []
    for key, x in reps.items():
        c = compose(compose(compose(tau_inv, x), tau), perm_invert(x))
        if c in wk_chain:
            mats.append(key)
    return _descriptor_from_matrices(mats)


def _orbit_mod1(rs: RootSystem, gens, v: Vec, cap: int) -> dict[Vec, Perm]:
    start = _mod1(v)
    degree = len(rs.roots)
    orbit = {start: identity_perm(degree)}
    queue = [start]
    while queue:
        x = queue.pop()
        t = orbit[x]
        for g in gens:
            y = _mod1(_apply(coweight_matrix(rs, g), x))
            if y not in orbit:
                if len(orbit) > cap:
                    raise OrbitCapExceeded("point orbit exceeded cap")
                orbit[y] = compose(g, t)
                queue.append(y)
    return orbit


def _point_stabilizer_chain(rs: RootSystem, v: Vec) -> StabilizerChain:
    """Stabilizer of v mod the coweight lattice, from its known structure."""
    from .torsion import omega_fixers  # local import to avoid cycles

    sub = centralizer_indices(rs, v)
    gens = [bytes(rs.reflection(b)) for b in rs.subsystem_basis(sub)]
    gens += [m.perm for m in omega_fixers(rs, v) if not m.is_identity()]
    return StabilizerChain(len(rs.roots), gens)


def relative_weyl_pair(levi: TwistedLevi, v, rho=None, q: int | None = None,
                       cap: int | None = None) -> WeylDescriptor:
    """Relative Weyl group of (L, s[, unipotent label]).

    ``v`` is the torsion point of the dual semisimple element in
    ambient coweight coordinates; it must already be written inside
    the dual torus shared with L.  When ``q`` is passed, the pair is
    first checked to be Frobenius-stable inside L (there must be a
    Levi-Weyl element u with (u.tau)(q v) = v mod the lattice).

    The unipotent label ``rho`` is accepted for interface
    completeness; component-wise labels are stable under the inner
    symmetries that arise here, so it never changes the answer and is
    validated rather than used.
    """
    if cap is None:
        cap = orbit_cap()
    rs = levi.rs
    v = _frac_vec(v)
    tau = levi.tau
    wk_chain = subgroup_chain(rs, levi.indices) if levi.indices \
        else StabilizerChain(len(rs.roots))
    wk_gens = ([bytes(rs.reflection(b)) for b in levi.basis]
               if levi.indices else [])
    if q is not None:
        target = _mod1(_apply(coweight_matrix(rs, tau),
                              tuple(q * x for x in v)))
        orbit = _orbit_mod1(rs, wk_gens, target, cap) if wk_gens \
            else {_mod1(target): identity_perm(len(rs.roots))}
        if _mod1(v) not in orbit:
            raise ValueError(
                "the semisimple parameter is not Frobenius-stable in this Levi")
    if levi.is_full():
        return WeylDescriptor(1, (), 1, "1")
    ident = identity_perm(len(rs.roots))

    if not levi.indices:
        if tau == ident:
            return _structural_descriptor(rs, v, cap)
        n_chain = _point_stabilizer_chain(rs, v)
        cent = _perm_centralizer(rs, n_chain, tau, cap)
        if cent.order() > _MOLIEN_LIMIT:
            return _big_group_descriptor(rs, cent, v, tau)
        mats = [tuple(tuple(Fraction(val) for val in row)
                      for row in coweight_matrix(rs, bytes(x)))
                for x in cent.elements()]
        return _descriptor_from_matrices(mats)

    pairs = _pair_reps(levi, v, cap)
    return _descriptor_from_matrices([key for key, _ in pairs])


def _pair_reps(levi: TwistedLevi, v: Vec, cap: int):
    """(center-matrix key, coset rep) pairs for the relative group of
    (L, s): normalizer cosets commuting with the twist modulo the
    Levi's reflection group and fixing the W_K-orbit of v."""
    rs = levi.rs
    tau = levi.tau
    wk_chain = subgroup_chain(rs, levi.indices)
    wk_gens = [bytes(rs.reflection(b)) for b in levi.basis]
    wgens = [bytes(p) for p in rs.simple_reflections]
    worder = weyl_chain(rs).order()
    full = tuple(sorted(levi.indices))
    n_chain, _ = setwise_stabilizer(wgens, worder, full, cap=cap)
    center = list(levi.center_basis)
    reps = _coset_table(rs, n_chain, wk_chain.order(), center, cap)
    orbit = _orbit_mod1(rs, wk_gens, v, cap)
    tau_inv = perm_invert(tau)
    out = []
    for key, x in reps.items():
        c = compose(compose(compose(tau_inv, x), tau), perm_invert(x))
        if c not in wk_chain:
            continue
        if _mod1(_apply(coweight_matrix(rs, x), v)) not in orbit:
            continue
        out.append((key, x))
    return out


def relative_weyl_pair_elements(levi: TwistedLevi, v,
                                cap: int | None = None) -> list[Perm]:
    """Coset representatives of the relative Weyl group of (L, s).

    One permutation per element of the quotient, for a Levi with a
    nonempty subsystem; the group law is coset multiplication modulo
    the Levi's own reflection group.  Used to act on the components of
    the dual centralizer when splitting unipotent labels into orbits.
    """
    if cap is None:
        cap = orbit_cap()
    if not levi.indices or levi.is_full():
        raise ValueError("coset representatives need a proper, nontrivial "
                         "subsystem Levi")
    return [x for _, x in _pair_reps(levi, _frac_vec(v), cap)]


def _structural_descriptor(rs: RootSystem, v: Vec,
                           cap: int) -> WeylDescriptor:
    """Stabilizer of a torsion point for the split torus case."""
    from .torsion import omega_fixers

    sub = centralizer_indices(rs, v)
    sub_type = rs.subsystem_type(sub)
    fixers = [m for m in omega_fixers(rs, v)]
    order = sub_type.weyl_order() * len(fixers)
    if order <= _MOLIEN_LIMIT:
        chain = _point_stabilizer_chain(rs, v)
        if chain.order() != order:
            raise AssertionError("point stabilizer has unexpected order")
        mats = [tuple(tuple(Fraction(val) for val in row)
                      for row in coweight_matrix(rs, bytes(x)))
                for x in chain.elements()]
        return _descriptor_from_matrices(mats)
    degrees = tuple(sorted(sub_type.degrees()))
    ext = len(fixers)
    names = sorted(f.format().lstrip("~") for f in sub_type.factors)
    grouped: list[list] = []
    for name in names:
        if grouped and grouped[-1][0] == name:
            grouped[-1][1] += 1
        else:
            grouped.append([name, 1])
    base = "x".join(n if c == 1 else f"{n}^{c}" for n, c in grouped)
    label = base if ext == 1 else (f"({base}).{ext}" if "x" in base
                                   else f"{base}.{ext}")
    return WeylDescriptor(order, degrees, ext, label)


def _big_group_descriptor(rs: RootSystem, chain: StabilizerChain, v: Vec,
                          tau: Perm) -> WeylDescriptor:
    return WeylDescriptor(chain.order(), None, None,
                          f"[order {chain.order()}]")


# ---------------------------------------------------------------------------
# finite torus checks


_TORUS_CACHE: dict[tuple, list[Vec]] = {}


def torus_fixed_points(rs: RootSystem, tau: Perm, q: int, ell: int,
                       limit: int = 1 << 20) -> list[Vec]:
    """The ell-part of the fixed points of q.tau on the maximal torus.

    The cocharacter lattice is the coroot lattice (the ambient group
    is taken simply connected); the fixed points are computed from the
    Smith normal form of q.tau - 1 on it and returned as coweight
    coordinates mod 1, as a full enumeration of the ell-torsion part.
    """
    key = (rs.cartan_type.format(), bytes(tau), q, ell)
    if key in _TORUS_CACHE:
        return _TORUS_CACHE[key]
    n = rs.rank
    ct = transpose(rs.cartan)
    ct_inv = mat_invert(ct)
    m = coweight_matrix(rs, tau)
    qm = [[q * m[i][j] for j in range(n)] for i in range(n)]
    a_frac = matmul(matmul(ct_inv, qm), ct)
    a = []
    for row in a_frac:
        out_row = []
        for x in row:
            fx = Fraction(x)
            if fx.denominator != 1:
                raise AssertionError("Frobenius does not preserve the lattice")
            out_row.append(fx.numerator)
        a.append(out_row)
    for i in range(n):
        a[i][i] -= 1
    u_mat, s_mat, v_mat = smith_normal_form(a)
    gens: list[tuple[Vec, int]] = []
    for i in range(n):
        s = abs(s_mat[i][i])
        if s <= 1:
            continue
        a_val = ell_valuation(s, ell)
        if a_val == 0:
            continue
        order = ell ** a_val
        scale = s // order
        x_coords = [Fraction(v_mat[j][i] * scale, s) for j in range(n)]
        vec = _mod1(_apply(ct, tuple(x_coords)))
        gens.append((vec, order))
    total = 1
    for _, order in gens:
        total *= order
    if total > limit:
        raise OrbitCapExceeded(
            f"ell-torsion subgroup of size {total} exceeds limit {limit}")
    points = [tuple(Fraction(0) for _ in range(n))]
    for vec, order in gens:
        new_points = []
        for p in points:
            acc = p
            for _ in range(order):
                new_points.append(acc)
                acc = _mod1(tuple(acc[i] + vec[i] for i in range(n)))
        points = new_points
    _TORUS_CACHE[key] = points
    return points


@dataclass(frozen=True)
class TorsionCheck:
    """Result of comparing L with the centralizer of its central torsion."""

    matches: bool
    grown_type: str
    grown_indices: frozenset[int]
    pi0_bound: tuple[int, ...]
    subgroup_size: int


def torsion_centralizer_check(levi: TwistedLevi, ell: int,
                              q: int) -> TorsionCheck:
    """Does the ell-part of Z(L)^F have connected centralizer exactly L?

    Enumerates the ell-torsion of the fixed-point torus, keeps the
    points centralizing the Levi's subsystem, and compares the roots
    integral on all of them with the subsystem itself.  The reported
    pi0 bound lists the invariant factors of the subsystem's
    fundamental group (the center of the derived group may meet the
    disconnected part, which this check deliberately excludes).
    """
    rs = levi.rs
    points = torus_fixed_points(rs, levi.tau, q, ell)
    basis = levi.basis
    zpts = [p for p in points
            if all(pairing(rs, b, p).denominator == 1 for b in basis)]
    grown = frozenset(
        k for k in range(len(rs.roots))
        if all(pairing(rs, k, p).denominator == 1 for p in zpts))
    matches = grown == levi.indices
    grown_text = twisted_type(rs, grown, levi.tau).format()
    if levi.indices:
        sub_cartan = [
            [rs.pairing_with_coroot(b2, rs.roots[b1]) for b2 in basis]
            for b1 in basis]
        from ._linalg import abelian_invariants
        pi0 = tuple(d for d in abelian_invariants(sub_cartan) if d > 1)
    else:
        pi0 = ()
    return TorsionCheck(matches, grown_text, grown, pi0, len(zpts))


def e_ell_adapted(levi: TwistedLevi, ell: int, e: int, q: int,
                  cap: int = 10 ** 4) -> tuple[str, list[Vec] | None]:
    """Search for a chain of central ell-elements with e-split centralizers.

    Returns ("adapted", witness-chain) when successive centralizers of
    elements of Z(L)^F_ell can walk from the full group down to L with
    every intermediate step a (parabolic) e-split Levi; otherwise
    ("not-adapted", None), or ("undetermined", None) past ``cap``
    explored chain states.
    """
    rs = levi.rs
    if levi.is_full():
        return "adapted", []
    points = torus_fixed_points(rs, levi.tau, q, ell)
    basis = levi.basis
    zpts = [p for p in points
            if all(pairing(rs, b, p).denominator == 1 for b in basis)]
    nroots = len(rs.roots)
    full_mask = (1 << nroots) - 1
    target_mask = 0
    for k in sorted(levi.indices):
        target_mask |= 1 << k
    masks: dict[int, Vec] = {}
    for p in zpts:
        mask = 0
        for k in range(nroots):
            if pairing(rs, k, p).denominator == 1:
                mask |= 1 << k
        if mask != full_mask and mask not in masks:
            masks[mask] = p

    def mask_indices(mask: int) -> frozenset[int]:
        return frozenset(k for k in range(nroots) if mask >> k & 1)

    split_cache: dict[int, bool] = {}

    def step_ok(mask: int) -> bool:
        if mask not in split_cache:
            indices = mask_indices(mask)
            if not is_parabolic(rs, indices):
                split_cache[mask] = False
            else:
                step = TwistedLevi(rs, indices, levi.twist, levi.phi)
                split_cache[mask] = is_e_split(step, e).is_split
        return split_cache[mask]

    visited: set[int] = set()
    counter = 0
    stack: list[tuple[int, tuple[Vec, ...]]] = [(full_mask, ())]
    capped = False
    while stack:
        mask, chain = stack.pop()
        if mask in visited:
            continue
        visited.add(mask)
        counter += 1
        if counter > cap:
            capped = True
            break
        if mask == target_mask:
            return "adapted", list(chain)
        children = []
        for zmask, zp in masks.items():
            child = mask & zmask
            if child == mask or child & target_mask != target_mask:
                continue
            if not step_ok(child):
                continue
            children.append((bin(child).count("1"), child, zp))
        children.sort(reverse=True)
        for _, child, zp in children:
            stack.append((child, chain + (zp,)))
    return ("undetermined" if capped else "not-adapted"), None


# ---------------------------------------------------------------------------
# e-split covering of ell-element centralizers


@dataclass(frozen=True)
class CoverRow:
    """Centralizer of one ell-element class inside the ambient subgroup."""

    centralizer: str
    center_order: str
    covered: bool


@dataclass(frozen=True)
class CoverReport:
    rows: tuple[CoverRow, ...]
    all_covered: bool


def _kernel_points_mod(matrix, ell: int):
    """All nonzero vectors u over F_ell with matrix.u = 0 (mod ell)."""
    n = len(matrix)
    m = [[x % ell for x in row] for row in matrix]
    pivots: list[int] = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, n) if m[i][c] % ell), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = pow(m[r][c], ell - 2, ell)
        m[r] = [(x * inv) % ell for x in m[r]]
        for i in range(n):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(a - f * b) % ell for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for c in free:
        u = [0] * n
        u[c] = 1
        for i, pc in enumerate(pivots):
            u[pc] = (-m[i][c]) % ell
        basis.append(u)
    if ell ** len(basis) > 10 ** 6:
        raise OrbitCapExceeded("order-ell kernel too large to enumerate")
    out = []
    for count in range(1, ell ** len(basis)):
        x = count
        u = [0] * n
        for b in basis:
            d = x % ell
            x //= ell
            if d:
                u = [(a + d * val) % ell for a, val in zip(u, b)]
        out.append(tuple(u))
    return out


def esplit_cover_check(rs: RootSystem, h_indices, tau: Perm, ell: int,
                       q: int, e: int, cap: int | None = None) -> CoverReport:
    """Check that ell-element centralizers in H meet nontrivial Phi_e-tori.

    ``h_indices`` is a closed (full-rank or smaller) subsystem carrying
    the Frobenius twist ``tau``.  Order-ell torus points are gathered
    across every rational form of the maximal tori of the subsystem
    group (twisted classes w of its reflection group, acting as q.w.tau)
    and each centralizer row is marked covered when its central torus
    order has a positive Phi_e-exponent.
    """
    if cap is None:
        cap = orbit_cap()
    h_closed = rs.closure(h_indices) if h_indices else frozenset()
    if h_closed and any(tau[k] not in h_closed for k in h_closed):
        raise ValueError("tau does not stabilize the subsystem")
    n = rs.rank
    if not h_closed:
        return CoverReport((), True)
    chain_h = subgroup_chain(rs, h_closed)
    if chain_h.order() > _ENUM_LIMIT:
        raise OrbitCapExceeded("subsystem reflection group too large")
    gens = [bytes(rs.reflection(b)) for b in rs.subsystem_basis(h_closed)]
    reps = {bytes(p): bytes(p) for p in chain_h.elements()}
    tau_inv = perm_invert(tau)
    forms = _twisted_classes(reps, gens,
                             lambda g: compose(compose(tau, g), tau_inv),
                             bytes)
    rows: dict[tuple[str, str], bool] = {}
    for w in forms:
        wt = compose(w, tau)
        m = coweight_matrix(rs, wt)
        a = [[q * m[i][j] - (1 if i == j else 0) for j in range(n)]
             for i in range(n)]
        for u in _kernel_points_mod(a, ell):
            v = tuple(Fraction(x, ell) for x in u)
            c_ind = frozenset(k for k in h_closed
                              if pairing(rs, k, v).denominator == 1)
            rt = twisted_type(rs, c_ind, wt)
            key = (rt.format(), rt.torus.format())
            if key not in rows:
                rows[key] = rt.torus.exponent_of(e) > 0
    out = tuple(CoverRow(t, z, c)
                for (t, z), c in sorted(rows.items()))
    return CoverReport(out, all(r.covered for r in out))


if __name__ == "__main__":
    import doctest

    doctest.testmod()
