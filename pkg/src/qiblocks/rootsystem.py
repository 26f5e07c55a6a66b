"""Crystallographic root systems of rank at most 8.

Roots are kept as integer coordinate vectors in the simple-root basis,
so every pairing is exact integer arithmetic.  The Cartan matrix
convention is ``C[i][j] = <alpha_j, alpha_i^v>`` (row i is scaled by
the length of ``alpha_i``); the simple reflection ``s_i`` then acts on
a root-coordinate vector ``v`` by ``v - (C v)_i e_i`` and on a
coweight-coordinate vector by ``v - v_i C[i]``.

The full root list is generated as the closure of the simple roots
under simple reflections and is stored in a canonical order (height,
then lexicographic), which every other module relies on for
deterministic output.

>>> rs = RootSystem.build("F4")
>>> len(rs.roots), rs.weyl_order()
(48, 1152)
>>> rs.cartan_type.format()
'F4'
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, cached_property

from ._linalg import abelian_invariants, invert, transpose

_RANK_BOUNDS = {"A": (1, 8), "B": (2, 8), "C": (2, 8), "D": (3, 8),
                "E": (6, 8), "F": (4, 4), "G": (2, 2)}

_DEGREES = {
    "A": lambda n: list(range(2, n + 2)),
    "B": lambda n: list(range(2, 2 * n + 1, 2)),
    "C": lambda n: list(range(2, 2 * n + 1, 2)),
    "D": lambda n: sorted(list(range(2, 2 * n - 1, 2)) + [n]),
    "E": lambda n: {6: [2, 5, 6, 8, 9, 12],
                    7: [2, 6, 8, 10, 12, 14, 18],
                    8: [2, 8, 12, 14, 18, 20, 24, 30]}[n],
    "F": lambda n: [2, 6, 8, 12],
    "G": lambda n: [2, 6],
}


@dataclass(frozen=True, order=True)
class SimpleType:
    """One irreducible factor: series letter, rank, short-root marker.

    ``tilde`` records that every root of the factor is short in the
    ambient system (written with a ``~`` prefix, e.g. ``~A2``).
    """

    series: str
    rank: int
    tilde: bool = False

    def format(self) -> str:
        s = f"{self.series}{self.rank}"
        return "~" + s if self.tilde else s

    def degrees(self) -> list[int]:
        return _DEGREES[self.series](self.rank)

    def weyl_order(self) -> int:
        out = 1
        for d in self.degrees():
            out *= d
        return out

    def dual(self) -> "SimpleType":
        swap = {"B": "C", "C": "B"}
        return SimpleType(swap.get(self.series, self.series), self.rank,
                          self.tilde)


_TYPE_RE = re.compile(r"^(~?)([A-G])(\d+)$")


@dataclass(frozen=True)
class CartanType:
    """A (possibly composite) Cartan type, e.g. ``F4`` or ``A2+~A2``."""

    factors: tuple[SimpleType, ...]

    @staticmethod
    def parse(text: str) -> "CartanType":
        factors = []
        for part in text.split("+"):
            m = _TYPE_RE.match(part.strip())
            if not m:
                raise ValueError(f"cannot parse Cartan type {part!r}")
            tilde, series, rank = bool(m.group(1)), m.group(2), int(m.group(3))
            lo, hi = _RANK_BOUNDS[series]
            if not lo <= rank <= hi:
                raise ValueError(
                    f"rank {rank} out of range [{lo}, {hi}] for series {series}")
            factors.append(SimpleType(series, rank, tilde))
        return CartanType(tuple(sorted(factors)))

    def format(self) -> str:
        return "+".join(f.format() for f in self.factors) if self.factors else "0"

    @property
    def rank(self) -> int:
        return sum(f.rank for f in self.factors)

    def is_simple(self) -> bool:
        return len(self.factors) == 1

    def degrees(self) -> list[int]:
        out: list[int] = []
        for f in self.factors:
            out.extend(f.degrees())
        return sorted(out)

    def weyl_order(self) -> int:
        out = 1
        for f in self.factors:
            out *= f.weyl_order()
        return out

    def dual(self) -> "CartanType":
        return CartanType(tuple(sorted(f.dual() for f in self.factors)))


def _simple_cartan(series: str, rank: int) -> list[list[int]]:
    """Cartan matrix in Bourbaki numbering (0-indexed)."""
    c = [[2 * int(i == j) for j in range(rank)] for i in range(rank)]

    def chain(i, j):  # single edge
        c[i][j] = c[j][i] = -1

    if series == "A":
        for i in range(rank - 1):
            chain(i, i + 1)
    elif series in ("B", "C"):
        for i in range(rank - 2):
            chain(i, i + 1)
        # B: last root short; C: last root long
        if series == "B":
            c[rank - 2][rank - 1] = -1
            c[rank - 1][rank - 2] = -2
        else:
            c[rank - 2][rank - 1] = -2
            c[rank - 1][rank - 2] = -1
    elif series == "D":
        for i in range(rank - 3):
            chain(i, i + 1)
        chain(rank - 3, rank - 2)
        chain(rank - 3, rank - 1)
    elif series == "E":
        # nodes 1..rank, node 2 attached to node 4, chain 1-3-4-5-...
        chain(0, 2)
        chain(1, 3)
        for i in range(2, rank - 1):
            chain(i, i + 1)
    elif series == "F":
        chain(0, 1)
        chain(2, 3)
        c[1][2] = -1  # alpha_2 long row against short alpha_3
        c[2][1] = -2
    elif series == "G":
        # alpha_1 short, alpha_2 long
        c[0][1] = -3
        c[1][0] = -1
    else:  # pragma: no cover
        raise ValueError(f"unknown series {series}")
    return c


def _simple_lengths(series: str, rank: int) -> list[int]:
    """Normalized squared-length halves d_i ((alpha,alpha)/2, short = 1)."""
    if series in ("A", "D", "E"):
        return [1] * rank
    if series == "B":
        return [2] * (rank - 1) + [1]
    if series == "C":
        return [1] * (rank - 1) + [2]
    if series == "F":
        return [2, 2, 1, 1]
    if series == "G":
        return [1, 3]
    raise ValueError(series)


@dataclass(frozen=True)
class RootSystem:
    """An ambient root system with its canonical root ordering."""

    cartan_type: CartanType
    cartan: tuple[tuple[int, ...], ...]
    lengths_d: tuple[int, ...]          # (alpha_i, alpha_i)/2 per simple root
    roots: tuple[tuple[int, ...], ...]  # all roots, canonical order

    @staticmethod
    @lru_cache(maxsize=None)
    def build(type_text: str) -> "RootSystem":
        ct = CartanType.parse(type_text)
        blocks = [_simple_cartan(f.series, f.rank) for f in ct.factors]
        lengths: list[int] = []
        for f in ct.factors:
            lengths.extend(_simple_lengths(f.series, f.rank))
        rank = ct.rank
        cartan = [[0] * rank for _ in range(rank)]
        off = 0
        for b in blocks:
            k = len(b)
            for i in range(k):
                for j in range(k):
                    cartan[off + i][off + j] = b[i][j]
            off += k
        c = tuple(tuple(row) for row in cartan)
        roots = _generate_roots(c)
        return RootSystem(ct, c, tuple(lengths), roots)

    @property
    def rank(self) -> int:
        return self.cartan_type.rank

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        return {r: i for i, r in enumerate(self.roots)}

    @cached_property
    def simple_indices(self) -> tuple[int, ...]:
        out = []
        for i in range(self.rank):
            v = tuple(int(i == j) for j in range(self.rank))
            out.append(self.index[v])
        return tuple(out)

    @cached_property
    def positive_indices(self) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.roots) if sum(r) > 0)

    def height(self, k: int) -> int:
        return sum(self.roots[k])

    @cached_property
    def form(self) -> tuple[tuple[int, ...], ...]:
        """Symmetrized invariant form B[i][j] = (alpha_i, alpha_j)."""
        return tuple(
            tuple(self.lengths_d[i] * self.cartan[i][j] for j in range(self.rank))
            for i in range(self.rank)
        )

    def norm_sq(self, k: int) -> int:
        v = self.roots[k]
        b = self.form
        return sum(v[i] * b[i][j] * v[j]
                   for i in range(self.rank) for j in range(self.rank))

    @cached_property
    def root_lengths(self) -> tuple[str, ...]:
        """'short' or 'long' per root; simply-laced systems are all 'long'."""
        norms = [self.norm_sq(k) for k in range(len(self.roots))]
        blocks = [self._block_of(r) for r in self.roots]
        lo: dict[int, int] = {}
        hi: dict[int, int] = {}
        for k, b in enumerate(blocks):
            lo[b] = min(lo.get(b, norms[k]), norms[k])
            hi[b] = max(hi.get(b, norms[k]), norms[k])
        return tuple(
            "short" if lo[b] < hi[b] and norms[k] == lo[b] else "long"
            for k, b in enumerate(blocks)
        )

    def _block_of(self, v) -> int:
        off = 0
        for bi, f in enumerate(self.cartan_type.factors):
            if any(v[off + i] for i in range(f.rank)):
                return bi
            off += f.rank
        raise ValueError("zero vector has no block")

    def pairing_with_coroot(self, k: int, v: tuple[int, ...]) -> int:
        """<v, alpha_k^v> for a root-coordinate vector v (integer)."""
        u = self.coroot_form(k)
        return sum(v[i] * u[i] for i in range(self.rank))

    def coroot_form(self, k: int) -> tuple[int, ...]:
        """Linear form v -> <v, alpha_k^v> on root coordinates."""
        b = self.form
        beta = self.roots[k]
        d = self.norm_sq(k) // 2
        out = []
        for i in range(self.rank):
            num = sum(b[i][j] * beta[j] for j in range(self.rank))
            if num % d:
                raise ValueError("non-integral coroot pairing")
            out.append(num // d)
        return tuple(out)

    def reflection(self, k: int) -> tuple[int, ...]:
        """Permutation of root indices induced by s_{beta}, beta = roots[k]."""
        beta = self.roots[k]
        u = self.coroot_form(k)
        rank = self.rank
        idx = self.index
        out = []
        for r in self.roots:
            n = sum(r[i] * u[i] for i in range(rank))
            img = tuple(r[i] - n * beta[i] for i in range(rank))
            out.append(idx[img])
        return tuple(out)

    @cached_property
    def simple_reflections(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self.reflection(k) for k in self.simple_indices)

    @cached_property
    def highest_root_index(self) -> int:
        if len(self.cartan_type.factors) != 1:
            raise ValueError("highest root is per irreducible factor")
        return len(self.roots) - 1

    @cached_property
    def marks(self) -> tuple[int, ...]:
        return self.roots[self.highest_root_index]

    @cached_property
    def coxeter_number(self) -> int:
        return len(self.roots) // self.rank

    def degrees(self) -> list[int]:
        return self.cartan_type.degrees()

    def weyl_order(self) -> int:
        return self.cartan_type.weyl_order()

    @cached_property
    def coweight_of_coroot(self) -> tuple[tuple[Fraction, ...], ...]:
        """Matrix expressing fundamental coweights in the coroot basis.

        Column j holds omega_j^v; it is (C^T)^{-1} for the Cartan
        matrix convention used here.
        """
        return invert(transpose(self.cartan))

    def fundamental_group(self) -> list[int]:
        """Invariant factors (> 1) of the weight/root lattice quotient.

        >>> RootSystem.build("E6").fundamental_group()
        [3]
        >>> RootSystem.build("D4").fundamental_group()
        [2, 2]
        """
        return sorted(d for d in abelian_invariants(self.cartan) if d > 1)

    # -- subsystems ---------------------------------------------------

    def closure(self, indices) -> frozenset[int]:
        """Closed symmetric subsystem generated by the given root indices."""
        idx = self.index
        current = set()
        for k in indices:
            current.add(k)
            current.add(idx[tuple(-x for x in self.roots[k])])
        changed = True
        while changed:
            changed = False
            members = [self.roots[k] for k in current]
            for i in range(len(members)):
                for j in range(i + 1, len(members)):
                    s = tuple(a + b for a, b in zip(members[i], members[j]))
                    k = idx.get(s)
                    if k is not None and k not in current:
                        current.add(k)
                        changed = True
        return frozenset(current)

    def subsystem_basis(self, indices) -> tuple[int, ...]:
        """Canonical simple basis of a closed subsystem.

        Positivity is inherited from the ambient system; a positive
        member is simple iff it is not a sum of two positive members.
        """
        pos = sorted(k for k in indices if sum(self.roots[k]) > 0)
        pos_set = {self.roots[k] for k in pos}
        simple = []
        for k in pos:
            r = self.roots[k]
            decomposable = any(
                tuple(a - b for a, b in zip(r, s)) in pos_set
                for s in pos_set
                if s != r
            )
            if not decomposable:
                simple.append(k)
        return tuple(simple)

    def subsystem_type(self, indices) -> CartanType:
        """Identify the Cartan type of a closed subsystem.

        The short-root marker ``~`` is attached to a factor iff all of
        its roots are ambient-short.

        >>> rs = RootSystem.build("G2")
        >>> long_pair = [k for k in rs.positive_indices
        ...              if rs.root_lengths[k] == "long"][:1]
        >>> rs.subsystem_type(rs.closure(long_pair)).format()
        'A1'
        """
        basis = self.subsystem_basis(indices)
        if not basis:
            return CartanType(())
        n = len(basis)
        pair = [[0] * n for _ in range(n)]
        for a in range(n):
            for b in range(n):
                pair[a][b] = self.pairing_with_coroot(basis[b], self.roots[basis[a]])
        # connected components of the basis graph
        seen: set[int] = set()
        comps: list[list[int]] = []
        for a in range(n):
            if a in seen:
                continue
            comp = [a]
            seen.add(a)
            frontier = [a]
            while frontier:
                x = frontier.pop()
                for y in range(n):
                    if y not in seen and pair[x][y] != 0:
                        seen.add(y)
                        comp.append(y)
                        frontier.append(y)
            comps.append(sorted(comp))
        factors = []
        for comp in comps:
            factors.append(self._identify_component(indices, basis, pair, comp))
        return CartanType(tuple(sorted(factors)))

    def _identify_component(self, indices, basis, pair, comp) -> SimpleType:
        n = len(comp)
        edges = []
        for a in comp:
            for b in comp:
                if a < b and pair[a][b] != 0:
                    edges.append((a, b, pair[a][b] * pair[b][a]))
        mults = sorted(e[2] for e in edges)
        degree = {a: sum(1 for e in edges if a in e[:2]) for a in comp}
        series = None
        if n == 1:
            series = "A"
        elif any(m == 3 for m in mults):
            if n != 2:
                raise ValueError("unidentifiable component (triple edge)")
            series = "G"
        elif any(m == 2 for m in mults):
            if sum(1 for m in mults if m == 2) != 1 or max(degree.values()) > 2:
                raise ValueError("unidentifiable component (double edges)")
            n_short = sum(
                1 for a in comp if self.norm_sq(basis[a])
                == min(self.norm_sq(basis[b]) for b in comp))
            if n == 2:
                series = "B"
            elif n == 4 and n_short == 2 and self._is_f4_shape(comp, edges, degree):
                series = "F"
            elif n_short == 1:
                series = "B"
            elif n_short == n - 1:
                series = "C"
            else:
                raise ValueError("unidentifiable component (length pattern)")
        else:
            if max(degree.values()) <= 2:
                series = "A"
            else:
                branch = [a for a in comp if degree[a] == 3]
                if len(branch) != 1:
                    raise ValueError("unidentifiable component (branching)")
                arms = sorted(self._arm_lengths(comp, edges, branch[0]))
                if arms == [1, 1, n - 3]:
                    series = "D"
                elif arms == [1, 2, n - 4]:
                    series = "E"
                else:
                    raise ValueError(f"unidentifiable component (arms {arms})")
        lo, hi = _RANK_BOUNDS[series]
        if not lo <= n <= hi:
            raise ValueError(f"component {series}{n} out of supported range")
        comp_roots = self._component_roots(indices, basis[comp[0]])
        tilde = all(self.root_lengths[k] == "short" for k in comp_roots)
        return SimpleType(series, n, tilde)

    def _is_f4_shape(self, comp, edges, degree) -> bool:
        return (len(comp) == 4 and max(degree.values()) == 2
                and sorted(e[2] for e in edges) == [1, 1, 2])

    def _arm_lengths(self, comp, edges, center) -> list[int]:
        adj: dict[int, list[int]] = {a: [] for a in comp}
        for a, b, _ in edges:
            adj[a].append(b)
            adj[b].append(a)
        arms = []
        for nb in adj[center]:
            length = 1
            prev, cur = center, nb
            while True:
                nxt = [x for x in adj[cur] if x != prev]
                if not nxt:
                    break
                prev, cur = cur, nxt[0]
                length += 1
            arms.append(length)
        return arms

    def _component_roots(self, indices, seed_index) -> list[int]:
        """Roots of the irreducible component of ``seed_index`` in a subsystem."""
        b = self.form
        rank = self.rank

        def inner(u, v):
            return sum(u[i] * b[i][j] * v[j]
                       for i in range(rank) for j in range(rank))

        members = sorted(indices)
        comp = {seed_index}
        frontier = [seed_index]
        while frontier:
            x = frontier.pop()
            rx = self.roots[x]
            for k in members:
                if k not in comp and inner(rx, self.roots[k]) != 0:
                    comp.add(k)
                    frontier.append(k)
        return sorted(comp)

    # -- full-rank subsystem classes ---------------------------------

    def borel_de_siebenthal(self) -> dict[str, frozenset[int]]:
        """Closed full-rank subsystems, keyed by (composite) type string.

        Recursive extended-diagram node deletion.  Deleting a node of
        an A-type cycle reproduces the component, so A factors are
        terminal.

        >>> sorted(RootSystem.build("G2").borel_de_siebenthal())
        ['A1+~A1', 'A2', 'G2']
        """
        found: dict[str, frozenset[int]] = {}
        full = frozenset(range(len(self.roots)))
        work = [full]
        while work:
            system = work.pop()
            ts = self.subsystem_type(system).format()
            if ts in found:
                continue
            found[ts] = system
            basis = self.subsystem_basis(system)
            pair_of = {}
            for comp_rep in self._component_seeds(system, basis):
                comp_roots = self._component_roots(system, comp_rep)
                comp_basis = [k for k in basis if k in comp_roots]
                if len(comp_basis) == 1:
                    continue  # extended A1 deletion returns A1
                theta = max(comp_roots, key=lambda k: (sum(self.roots[k]),
                                                       self.roots[k]))
                low = self.index[tuple(-x for x in self.roots[theta])]
                for drop in comp_basis:
                    new_gens = [k for k in basis if k != drop] + [low]
                    cand = self.closure(new_gens)
                    try:
                        cand_type = self.subsystem_type(cand).format()
                    except ValueError:
                        continue
                    if cand_type not in found:
                        work.append(cand)
        return found

    def _component_seeds(self, system, basis) -> list[int]:
        seeds = []
        seen: set[int] = set()
        for k in basis:
            if k in seen:
                continue
            comp = self._component_roots(system, k)
            seen.update(comp)
            seeds.append(k)
        return seeds


def _generate_roots(cartan) -> tuple[tuple[int, ...], ...]:
    rank = len(cartan)
    simple = [tuple(int(i == j) for j in range(rank)) for i in range(rank)]
    current = set(simple)
    frontier = list(simple)
    while frontier:
        v = frontier.pop()
        cv = [sum(cartan[i][j] * v[j] for j in range(rank)) for i in range(rank)]
        for i in range(rank):
            img = list(v)
            img[i] -= cv[i]
            t = tuple(img)
            if t not in current:
                current.add(t)
                frontier.append(t)
    for v in list(current):
        current.add(tuple(-x for x in v))
    return tuple(sorted(current, key=lambda v: (sum(v), v)))


if __name__ == "__main__":
    import doctest

    doctest.testmod()
