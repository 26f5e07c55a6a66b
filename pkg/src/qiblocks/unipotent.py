"""Unipotent character combinatorics for the block tables.

Type-A unipotent characters are labelled by partitions; their generic
degrees come from the q-analogue of the hook formula, and the twisted
(unitary) forms reuse the same labels with degrees obtained by Ennola
substitution q -> -q.  e-cuspidality of a type-A character is a hook
condition after translating e into the component's own field of
definition.  The handful of cuspidal characters of other types that
the tables need ship as a small embedded, checksummed data file;
every stored degree is revalidated on load against the component's
generic order, and entries without a safe degree carry ``?`` so that
degree-dependent checks can be skipped rather than faked.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from math import gcd

from .cyclotomic import CycFactorization, ell_part
from .levi import inflate

__all__ = [
    "PartitionLabel",
    "partitions",
    "hook_lengths",
    "generic_degree_typeA",
    "ennola_degree",
    "hook_parameter",
    "e_cuspidal_typeA",
    "e_cuspidal_partitions",
    "cuspidal_count",
    "ExceptionalChar",
    "load_exceptional",
    "exceptional_cuspidal_lookup",
    "exceptional_cuspidal_for",
    "jordan_degree",
    "is_central_defect",
    "is_quasi_central_defect",
]


# ---------------------------------------------------------------------------
# partitions and hooks


def partitions(n: int):
    """Partitions of n as weakly decreasing tuples, lexicographically
    decreasing.

    >>> list(partitions(3))
    [(3,), (2, 1), (1, 1, 1)]
    """
    if n == 0:
        yield ()
        return

    def rec(rest: int, biggest: int, prefix: tuple[int, ...]):
        if rest == 0:
            yield prefix
            return
        for part in range(min(rest, biggest), 0, -1):
            yield from rec(rest - part, part, prefix + (part,))

    yield from rec(n, n, ())


def hook_lengths(parts: tuple[int, ...]) -> tuple[int, ...]:
    """All hook lengths of the Young diagram, row by row.

    >>> sorted(hook_lengths((2, 2)))
    [1, 2, 2, 3]
    """
    cols = [0] * (parts[0] if parts else 0)
    for row in parts:
        for j in range(row):
            cols[j] += 1
    out = []
    for i, row in enumerate(parts):
        for j in range(row):
            out.append(row - j + cols[j] - i - 1)
    return tuple(out)


@dataclass(frozen=True, order=True)
class PartitionLabel:
    """A partition labelling a type-A unipotent character."""

    parts: tuple[int, ...]

    def __post_init__(self):
        if any(p <= 0 for p in self.parts):
            raise ValueError("partition parts must be positive")
        if any(a < b for a, b in zip(self.parts, self.parts[1:])):
            raise ValueError("partition parts must be weakly decreasing")

    @property
    def n(self) -> int:
        return sum(self.parts)

    def conjugate(self) -> "PartitionLabel":
        if not self.parts:
            return self
        return PartitionLabel(tuple(
            sum(1 for p in self.parts if p > i) for i in range(self.parts[0])))

    def hooks(self) -> tuple[int, ...]:
        return hook_lengths(self.parts)

    def format(self) -> str:
        """The compact table label, e.g. phi21 for (2, 1).

        >>> PartitionLabel((2, 1, 1, 1)).format()
        'phi2111'
        """
        if any(p >= 10 for p in self.parts):
            return "phi(" + ",".join(str(p) for p in self.parts) + ")"
        return "phi" + "".join(str(p) for p in self.parts)

    @staticmethod
    def from_text(text: str) -> "PartitionLabel":
        body = text[3:] if text.startswith("phi") else text
        if body.startswith("("):
            parts = tuple(int(x) for x in body.strip("()").split(","))
        else:
            parts = tuple(int(c) for c in body)
        return PartitionLabel(parts)


# ---------------------------------------------------------------------------
# generic degrees


def generic_degree_typeA(p: PartitionLabel | tuple[int, ...],
                         field_power: int = 1) -> CycFactorization:
    """Generic degree of the unipotent character of GL_n labelled by p.

    The q-analogue of the hook formula: q^{n(p)} times the product of
    (q^i - 1) over i = 1..n, divided by (q^{h} - 1) over all hooks h.
    With ``field_power`` d, the component is defined over q^d and the
    whole polynomial is inflated accordingly.

    >>> generic_degree_typeA(PartitionLabel((2, 1))).format()
    'q.Φ2'
    >>> generic_degree_typeA(PartitionLabel((1, 1, 1))).format()
    'q^3'
    """
    parts = p.parts if isinstance(p, PartitionLabel) else tuple(p)
    n = sum(parts)
    moment = sum(i * row for i, row in enumerate(parts))
    deg = CycFactorization.make(1, moment)
    for i in range(1, n + 1):
        deg = deg * (CycFactorization.q_pow_minus_one(i))
    for h in hook_lengths(parts):
        deg = deg / (CycFactorization.q_pow_minus_one(h))
    if not deg.is_laurent_free() or deg.q_power < 0:
        raise AssertionError("hook formula produced a non-polynomial")
    return inflate(deg, field_power) if field_power != 1 else deg


def ennola_degree(deg: CycFactorization) -> CycFactorization:
    """Substitute q -> -q and normalize the sign to be positive.

    >>> ennola_degree(CycFactorization.parse("q.P2")).format()
    'q.Φ1'
    """
    out = deg.ennola()
    if out.scalar < 0:
        out = CycFactorization.make(-out.scalar, out.q_power,
                                    dict(out.phi))
    return out


# ---------------------------------------------------------------------------
# e-cuspidality


def hook_parameter(e: int, field_power: int = 1,
                   twisted: bool = False) -> int:
    """Hook length governing Phi_e-cuspidality for a type-A component.

    Over q^d the relevant cyclotomic index becomes f = e/gcd(e, d);
    for a unitary (twisted) component the polynomial dictionary
    q -> -q turns f into 2f for odd f, f/2 for f = 2 mod 4, and
    leaves it unchanged when 4 divides f.

    >>> hook_parameter(1, twisted=True)
    2
    >>> hook_parameter(2, twisted=True)
    1
    >>> hook_parameter(4, field_power=2)
    2
    """
    if e < 1 or field_power < 1:
        raise ValueError("e and field_power must be positive")
    f = e // gcd(e, field_power)
    if not twisted:
        return f
    if f % 2 == 1:
        return 2 * f
    if f % 4 == 2:
        return f // 2
    return f


def e_cuspidal_typeA(p: PartitionLabel | tuple[int, ...], e: int,
                     field_power: int = 1, twisted: bool = False) -> bool:
    """Whether the type-A character labelled by p is Phi_e-cuspidal.

    True exactly when the partition has no hook of the translated
    length (equivalently: it is its own core for that length).

    >>> e_cuspidal_typeA((2, 1), 1)
    False
    >>> e_cuspidal_typeA((2, 1), 1, twisted=True)
    True
    >>> e_cuspidal_typeA((2, 2), 4)
    True
    """
    parts = p.parts if isinstance(p, PartitionLabel) else tuple(p)
    h = hook_parameter(e, field_power, twisted)
    return h not in hook_lengths(parts)


def e_cuspidal_partitions(n: int, e: int, field_power: int = 1,
                          twisted: bool = False) -> list[PartitionLabel]:
    """All Phi_e-cuspidal labels for a type-A component of rank n - 1."""
    return [PartitionLabel(p) for p in partitions(n)
            if e_cuspidal_typeA(p, e, field_power, twisted)]


# ---------------------------------------------------------------------------
# exceptional cuspidal data


@dataclass(frozen=True)
class ExceptionalChar:
    """One stored cuspidal character (or inseparable family) record."""

    label: str
    component: str
    count: int
    degree: CycFactorization | None
    e_cuspidal_for: frozenset[int]
    notes: str


_DATA_FILE = "cuspidal.txt"
_DATA_SHA256 = (
    "4d2d3bc89ce0afbd4b2d7b45ad0efbc3b2475617dc34aef43899010fcb7c3bc5")

_COMPONENT_ORDERS = {
    "B2": "q^4.P1^2P2^2P4",
    "D4": "q^12.P1^4P2^4P3P4^2P6",
    "3D4": "q^12.P1^2P2^2P3^2P6^2P12",
    "E6": "q^36.P1^6P2^4P3^3P4^2P5P6^2P8P9P12",
    "2E6": "q^36.P1^4P2^6P3^2P4^2P6^3P8P10P12P18",
    "E7": "q^63.P1^7P2^7P3^3P4^2P5P6^3P7P8P9P10P12P14P18",
}


def _order_of(component: str) -> CycFactorization:
    return CycFactorization.parse(_COMPONENT_ORDERS[component])


def _validate_entry(entry: ExceptionalChar) -> None:
    if entry.degree is None:
        return
    order = _order_of(entry.component)
    quot = order / (entry.degree)
    if not quot.is_laurent_free() or quot.q_power < 0:
        raise ValueError(
            f"stored degree for {entry.label} does not divide the "
            f"{entry.component} generic order")
    derived = frozenset(
        d for d, exp in order.phi
        if exp > 0 and entry.degree.exponent_of(d) == exp)
    if derived != entry.e_cuspidal_for:
        raise ValueError(
            f"stored e-cuspidality list for {entry.label} disagrees with "
            f"its degree: stored {sorted(entry.e_cuspidal_for)}, "
            f"derived {sorted(derived)}")


@lru_cache(maxsize=1)
def load_exceptional() -> tuple[ExceptionalChar, ...]:
    """Parse, checksum and validate the embedded cuspidal data file."""
    raw = resources.files("qiblocks.data").joinpath(_DATA_FILE).read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    if digest != _DATA_SHA256:
        raise ValueError(
            f"cuspidal data file checksum mismatch: {digest}")
    out = []
    for line in raw.decode("utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split("|")]
        if fields[0] == "CHAR":
            _, label, component, count, degree_text, e_text, notes = fields
            degree = (None if degree_text == "?"
                      else CycFactorization.parse(degree_text))
            entry = ExceptionalChar(
                label, component, int(count), degree,
                frozenset(int(x) for x in e_text.split(",") if x), notes)
            _validate_entry(entry)
            out.append(entry)
        elif fields[0] == "COUNT":
            _, component, e_text, count, notes = fields
            out.append(ExceptionalChar(
                f"#{component}:e{e_text}", component, int(count), None,
                frozenset({int(e_text)}), notes))
        else:
            raise ValueError(f"unknown record kind {fields[0]!r}")
    return tuple(out)


def exceptional_cuspidal_lookup(label: str) -> ExceptionalChar:
    """The stored record for a named cuspidal character.

    >>> exceptional_cuspidal_lookup("B2[1]").degree.format()
    '1/2.q.Φ1^2'
    """
    for entry in load_exceptional():
        if entry.label == label:
            return entry
    raise ValueError(f"unknown exceptional cuspidal label {label!r}")


def exceptional_cuspidal_for(component: str,
                             e: int) -> tuple[ExceptionalChar, ...]:
    """Named e-cuspidal records of one component type (count records
    excluded)."""
    return tuple(entry for entry in load_exceptional()
                 if entry.component == component
                 and not entry.label.startswith("#")
                 and e in entry.e_cuspidal_for)


def cuspidal_count(series: str, rank: int, e: int, field_power: int = 1,
                   twisted: bool = False) -> int | None:
    """Number of Phi_e-cuspidal unipotent characters of one component.

    Computed for type A; looked up (count record, or the named records
    summed) otherwise.  None when the data file has no answer.

    >>> cuspidal_count("A", 2, 4)
    3
    >>> cuspidal_count("E", 7, 4)
    16
    """
    if series == "A":
        return len(e_cuspidal_partitions(rank + 1, e, field_power, twisted))
    name = f"{series}{rank}"
    if twisted:
        name = ("3" if series == "D" and rank == 4 and twisted == 3
                else "2") + name
    entries = [entry for entry in load_exceptional()
               if entry.component == name]
    for entry in entries:
        if entry.label.startswith("#") and e in entry.e_cuspidal_for:
            return entry.count
    total = 0
    found = False
    for entry in entries:
        if not entry.label.startswith("#") and e in entry.e_cuspidal_for:
            total += entry.count
            found = True
    return total if found else None


# ---------------------------------------------------------------------------
# Jordan degrees and defect predicates


def jordan_degree(levi_order: CycFactorization,
                  centralizer_order: CycFactorization,
                  rho_degree: CycFactorization) -> CycFactorization:
    """Degree of the series character with Jordan correspondent rho.

    The index of the dual centralizer in the dual Levi, taken without
    its q-power part, times the degree of rho.
    """
    index = levi_order / (centralizer_order)
    if not index.is_laurent_free():
        raise ValueError("centralizer order does not divide the Levi order")
    prime_part = CycFactorization.make(index.scalar, 0, dict(index.phi))
    return prime_part * (rho_degree)


def is_central_defect(group_order: CycFactorization,
                      degree: CycFactorization,
                      center_ell_order: int, ell: int, q: int) -> bool:
    """|G^F|_l = degree_l . |Z(G)^F|_l, evaluated exactly at q.

    >>> is_central_defect(CycFactorization.parse("q.P1P2"),
    ...                   CycFactorization.parse("q"), 4, 2, 5)
    False
    """
    if q % ell == 0:
        raise ValueError("q must be coprime to ell")
    return group_order.ell_part(q, ell) == \
        degree.ell_part(q, ell) * ell_part(center_ell_order, ell)


def is_quasi_central_defect(derived_order: CycFactorization,
                            degree: CycFactorization,
                            derived_center_ell_order: int,
                            ell: int, q: int) -> bool:
    """The same valuation identity on the derived subgroup."""
    if q % ell == 0:
        raise ValueError("q must be coprime to ell")
    return derived_order.ell_part(q, ell) == \
        degree.ell_part(q, ell) * ell_part(derived_center_ell_order, ell)


if __name__ == "__main__":
    import doctest

    doctest.testmod()
