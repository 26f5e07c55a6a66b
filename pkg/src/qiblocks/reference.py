"""Loader for the curated reference tables bundled with the package.

The block-theory fixtures live as line-oriented text files under
``qiblocks/data/tables`` next to a sha256 ``MANIFEST``.  Every load
re-hashes the requested file and refuses to proceed on a mismatch, so
a stale or hand-edited fixture fails loudly instead of silently
skewing the comparison tests.

File grammar::

    # ...            comment
    table: ID        table id, must match the requested id
    ambient: NAME    ambient group, for tables with a fixed ambient
    columns: a|b|c   column names for the data rows
    meta: key|v...   table metadata; keys may repeat
    anything else    a data row, cells separated by "|"

Blank ``C``/``le``/``e`` cells inherit downward within their frame
(the ruled sections of the table); rows numbered ``Nb`` additionally
fall back to the row they are merged with.  Unnumbered rows belong to
the block of the nearest numbered line above them, and ``block_merge``
metadata folds the b-lines into their parent block.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from math import factorial, prod
from pathlib import Path

from .cyclotomic import CycFactorization
from .rootsystem import CartanType

__all__ = [
    "TABLE_IDS",
    "ReferenceRow",
    "ReferenceTable",
    "load_table",
    "available_tables",
    "ParsedComponent",
    "ParsedType",
    "parse_rational_type",
    "parse_dynkin_cell",
    "ClassicalFactor",
    "parse_classical_cell",
    "LabelCell",
    "parse_label_cell",
    "weyl_label_order",
    "Congruence",
    "parse_congruence",
]

TABLE_IDS = ("T1", "T2", "T3", "T4", "T5", "T6", "T7", "T8", "T9", "T3elts")

_FILENAMES = {tid: f"{tid.lower()}.txt" for tid in TABLE_IDS}
_CANONICAL = {tid.lower(): tid for tid in TABLE_IDS}

_MARKERS = frozenset({"L*F", "G", "C"})
_META_KEYS = frozenset({
    "ell", "e", "s_congruence", "abelian",
    "equality_lines", "central_lines", "block_merge",
})

_NUMBER_RE = re.compile(r"^\d+b?$")
_LE_RE = re.compile(r"^\((\d+),(\d+)\)$")


# --------------------------------------------------------------------------
# cell parsers


@dataclass(frozen=True)
class ParsedComponent:
    """One simple factor of a rational type, e.g. ``2~A2(q^3)^2``."""

    twist: int
    tilde: bool
    series: str
    rank: int
    field_power: int
    power: int

    def format(self) -> str:
        prefix = {1: "", 2: "2", 3: "3"}[self.twist]
        tilde = "~" if self.tilde else ""
        fld = "q" if self.field_power == 1 else f"q^{self.field_power}"
        body = f"{prefix}{tilde}{self.series}{self.rank}({fld})"
        return body if self.power == 1 else f"{body}^{self.power}"


@dataclass(frozen=True)
class ParsedType:
    """A rational-type cell, split into torus part, factors and pi0."""

    torus: str
    components: tuple[ParsedComponent, ...]
    pi0: int

    def format(self) -> str:
        parts = ([self.torus] if self.torus else []) + [
            c.format() for c in self.components]
        body = ".".join(parts)
        return body if self.pi0 == 1 else f"{body}.{self.pi0}"


_COMPONENT_RE = re.compile(
    r"^([23])?(~)?([A-G])(\d+)\(q(?:\^(\d+))?\)(?:\^(\d+))?$")


def _split_top(text: str, sep: str) -> list[str]:
    """Split on ``sep`` outside any brackets."""
    parts: list[str] = []
    depth = 0
    cur: list[str] = []
    for ch in text:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _check_torus(chunk: str) -> str:
    if not chunk.startswith("Φ"):
        raise ValueError(f"not a torus factor: {chunk!r}")
    if CycFactorization.parse(chunk).format() != chunk:
        raise ValueError(f"non-canonical torus factor: {chunk!r}")
    return chunk


def parse_rational_type(text: str) -> ParsedType:
    """Parse a canonical rational-type cell; raises on any deviation.

    >>> parse_rational_type("Φ1Φ2.2A2(q^2)").components[0].twist
    2
    >>> parse_rational_type("A2(q)^3.3").pi0
    3
    """
    if not text or text in _MARKERS:
        raise ValueError(f"not a rational type: {text!r}")
    chunks = _split_top(text, ".")
    pi0 = 1
    if len(chunks) > 1 and chunks[-1].isdigit():
        pi0 = int(chunks[-1])
        chunks = chunks[:-1]
    torus = ""
    if chunks and chunks[0].startswith("Φ"):
        torus = _check_torus(chunks[0])
        chunks = chunks[1:]
    comps = []
    for chunk in chunks:
        m = _COMPONENT_RE.match(chunk)
        if not m:
            raise ValueError(f"bad component {chunk!r} in {text!r}")
        comps.append(ParsedComponent(
            twist=int(m.group(1) or 1),
            tilde=bool(m.group(2)),
            series=m.group(3),
            rank=int(m.group(4)),
            field_power=int(m.group(5) or 1),
            power=int(m.group(6) or 1)))
    if not torus and not comps:
        raise ValueError(f"empty rational type: {text!r}")
    out = ParsedType(torus, tuple(comps), pi0)
    if out.format() != text:
        raise ValueError(f"non-canonical rational type: {text!r}")
    return out


def parse_dynkin_cell(text: str) -> tuple[CartanType, bool]:
    """Parse a Dynkin-shorthand L-cell; returns (type, primed-flag).

    ``0`` is a maximal torus; a primed cell like ``(A1+A1+A1)'`` names
    the class distinguished by its prime.
    """
    primed = False
    body = text
    if body.startswith("(") and body.endswith(")'"):
        primed = True
        body = body[1:-2]
    if body == "0":
        return CartanType(()), primed
    return CartanType.parse(body), primed


@dataclass(frozen=True)
class ClassicalFactor:
    kind: str
    degree: int
    field_power: int
    power: int

    def format(self) -> str:
        fld = "q" if self.field_power == 1 else f"q^{self.field_power}"
        body = f"{self.kind}{self.degree}({fld})"
        return body if self.power == 1 else f"{body}^{self.power}"


_CLASSICAL_RE = re.compile(r"^(GL|GU|SU)(\d+)\(q(?:\^(\d+))?\)(?:\^(\d+))?$")


def parse_classical_cell(text: str) -> tuple[str, tuple[ClassicalFactor, ...]]:
    """Parse a product of classical groups with an optional torus part."""
    chunks = _split_top(text, ".")
    torus = ""
    if chunks and chunks[0].startswith("Φ"):
        torus = _check_torus(chunks[0])
        chunks = chunks[1:]
    factors = []
    for chunk in chunks:
        m = _CLASSICAL_RE.match(chunk)
        if not m:
            raise ValueError(f"bad classical factor {chunk!r} in {text!r}")
        factors.append(ClassicalFactor(
            m.group(1), int(m.group(2)),
            int(m.group(3) or 1), int(m.group(4) or 1)))
    rebuilt = ".".join(([torus] if torus else [])
                       + [f.format() for f in factors])
    if rebuilt != text or not chunks:
        raise ValueError(f"non-canonical classical cell: {text!r}")
    return torus, tuple(factors)


_LABEL_ATOM_RE = re.compile(
    r"^(?:1"
    r"|~?phi\d+"
    r"|phi'{0,2}"
    r"|phi_\{\d+,\d+\}"
    r"|[23]?[A-Z]\d\[[^\[\]]+\])$")
_COUNT_RE = re.compile(r"^(\d+) chrs$")
_MULT_RE = re.compile(r"^(.*)\((\d+)x\)$")


@dataclass(frozen=True)
class LabelCell:
    """A parsed character-label cell.

    ``entries`` lists the explicit labels, each a tuple of tensor
    factors; ``count`` is set instead when the cell only records a
    family size (``"n chrs"``).  ``multiplicity`` > 1 marks a line
    standing for that many distinct orbits with the same label.
    """

    text: str
    entries: tuple[tuple[str, ...], ...]
    count: int | None
    multiplicity: int

    @property
    def n_characters(self) -> int:
        """Characters on the line, expanding sign/family shorthands."""
        if self.count is not None:
            return self.count
        total = sum(
            prod(2 if "+-" in atom else 1 for atom in entry)
            for entry in self.entries)
        return total * self.multiplicity


def parse_label_cell(text: str) -> LabelCell:
    """Parse a ``lam`` cell.

    >>> parse_label_cell("2E6[th^{+-1}],2E6[1]").n_characters
    3
    >>> parse_label_cell("phi21(2x)").multiplicity
    2
    >>> parse_label_cell("32 chrs").n_characters
    32
    """
    m = _COUNT_RE.match(text)
    if m:
        return LabelCell(text, (), int(m.group(1)), 1)
    body = text
    mult = 1
    m = _MULT_RE.match(body)
    if m:
        body, mult = m.group(1), int(m.group(2))
    entries = []
    for part in _split_top(body, ","):
        atoms = tuple(_split_top(part, "*"))
        for atom in atoms:
            if not _LABEL_ATOM_RE.match(atom):
                raise ValueError(f"bad label atom {atom!r} in {text!r}")
        entries.append(atoms)
    return LabelCell(text, tuple(entries), None, mult)


_COMPLEX_GROUP_ORDERS = {
    "G5": 72, "G8": 96, "G31": 46080, "G32": 155520,
}
_EXCEPTIONAL_WEYL_ORDERS = {
    "G2": 12, "F4": 1152, "E6": 51840, "E7": 2903040, "E8": 696729600,
}
_IMPRIMITIVE_RE = re.compile(r"^G\((\d+),(\d+),(\d+)\)$")
_CLASSICAL_WEYL_RE = re.compile(r"^([ABD])(\d+)$")
_POWER_RE = re.compile(r"^(.+)\^(\d+)$")


def _weyl_atom_order(token: str) -> int:
    if token.isdigit():
        return int(token)
    if token.startswith("Z") and token[1:].isdigit():
        return int(token[1:])
    if token in _COMPLEX_GROUP_ORDERS:
        return _COMPLEX_GROUP_ORDERS[token]
    if token in _EXCEPTIONAL_WEYL_ORDERS:
        return _EXCEPTIONAL_WEYL_ORDERS[token]
    m = _IMPRIMITIVE_RE.match(token)
    if m:
        de, e, n = (int(g) for g in m.groups())
        return de ** n * factorial(n) // e
    m = _CLASSICAL_WEYL_RE.match(token)
    if m:
        series, n = m.group(1), int(m.group(2))
        if series == "A":
            return factorial(n + 1)
        if series == "B":
            return 2 ** n * factorial(n)
        return 2 ** (n - 1) * factorial(n)
    raise ValueError(f"unknown reflection-group name {token!r}")


def weyl_label_order(label: str) -> int:
    """Group order named by a W-column label.

    >>> weyl_label_order("(A1xA3^2).2")
    2304
    >>> weyl_label_order("G(4,1,2)xZ4")
    128
    """
    tok = label.strip()
    if not tok:
        raise ValueError("empty reflection-group label")
    parts = _split_top(tok, ".")
    if len(parts) == 2 and parts[1].isdigit():
        base = parts[0]
        if base.startswith("(") and base.endswith(")"):
            base = base[1:-1]
        return weyl_label_order(base) * int(parts[1])
    if len(parts) != 1:
        raise ValueError(f"bad reflection-group label {label!r}")
    factors = _split_top(tok, "x")
    if len(factors) > 1:
        return prod(weyl_label_order(f) for f in factors)
    m = _POWER_RE.match(tok)
    if m and not _IMPRIMITIVE_RE.match(tok):
        return _weyl_atom_order(m.group(1)) ** int(m.group(2))
    return _weyl_atom_order(tok)


@dataclass(frozen=True)
class Congruence:
    """A constraint ``q = r mod m`` with one or more residues r."""

    residues: frozenset[int]
    modulus: int

    def admits(self, q: int) -> bool:
        return q % self.modulus in self.residues

    def format(self) -> str:
        res = ",".join(str(r) for r in sorted(self.residues))
        return f"{res} mod {self.modulus}"


_CONGRUENCE_RE = re.compile(r"^(\d+(?:,\d+)*) mod (\d+)$")


def parse_congruence(text: str) -> Congruence:
    m = _CONGRUENCE_RE.match(text.strip())
    if not m:
        raise ValueError(f"bad congruence {text!r}")
    residues = frozenset(int(r) for r in m.group(1).split(","))
    modulus = int(m.group(2))
    if any(r >= modulus for r in residues):
        raise ValueError(f"residue out of range in {text!r}")
    return Congruence(residues, modulus)


# --------------------------------------------------------------------------
# table model


@dataclass(eq=False)
class ReferenceRow:
    """One data row, with section-inherited cells already resolved."""

    table_id: str
    index: int
    ambient: str | None
    frame: int | None
    number: str | None
    block: str | None
    cells: dict[str, str]
    resolved: dict[str, str]
    ell: int | None
    e: int | None

    @property
    def numbered(self) -> bool:
        return self.number is not None

    def __repr__(self) -> str:  # keep pytest diffs readable
        no = self.number or "+"
        return f"<{self.table_id} row {self.index} [{no}]>"


@dataclass(eq=False)
class ReferenceTable:
    table_id: str
    ambient: str | None
    columns: tuple[str, ...]
    rows: tuple[ReferenceRow, ...]
    meta: dict[str, tuple[tuple[str, ...], ...]]

    # -- basic access ------------------------------------------------------

    @property
    def numbered_rows(self) -> tuple[ReferenceRow, ...]:
        return tuple(r for r in self.rows if r.numbered)

    def row_by_number(self, number: int | str,
                      ambient: str | None = None) -> ReferenceRow:
        no = str(number)
        hits = [r for r in self.rows if r.number == no
                and (ambient is None or r.ambient == ambient)]
        if not hits:
            raise KeyError(f"{self.table_id}: no line {no!r}")
        if len(hits) > 1:
            raise ValueError(
                f"{self.table_id}: line {no!r} needs an ambient qualifier")
        return hits[0]

    @property
    def frames(self) -> dict[int, tuple[ReferenceRow, ...]]:
        out: dict[int, list[ReferenceRow]] = {}
        for r in self.rows:
            if r.frame is not None:
                out.setdefault(r.frame, []).append(r)
        return {k: tuple(v) for k, v in out.items()}

    def blocks(self) -> dict[tuple[str | None, str], tuple[ReferenceRow, ...]]:
        """Rows grouped by block id (keyed with the ambient for T9)."""
        out: dict[tuple[str | None, str], list[ReferenceRow]] = {}
        for r in self.rows:
            if r.block is not None:
                out.setdefault((r.ambient, r.block), []).append(r)
        return {k: tuple(v) for k, v in out.items()}

    def block_merges(self) -> dict[str, str]:
        return {src: dst for src, dst in self.meta.get("block_merge", ())}

    # -- metadata ----------------------------------------------------------

    def meta_values(self, key: str) -> tuple[tuple[str, ...], ...]:
        return self.meta.get(key, ())

    @property
    def ell(self) -> int | None:
        vals = self.meta.get("ell")
        return int(vals[0][0]) if vals else None

    @property
    def e(self) -> int | None:
        vals = self.meta.get("e")
        return int(vals[0][0]) if vals else None

    def s_congruences(self) -> dict[str, Congruence]:
        out = {}
        for name, text in self.meta.get("s_congruence", ()):
            out[name] = parse_congruence(text)
        return out

    def abelian_lines(self, ambient: str | None = None) -> frozenset[str] | str:
        """Printed numbers of the abelian-defect lines.

        Returns the sentinel ``"rule"`` when the table defers to the
        l-not-dividing-|W| rule instead of listing lines.  Tables
        covering several ambients need the ``ambient`` argument.
        """
        entries = [v[0] for v in self.meta.get("abelian", ())]
        if entries == ["rule"]:
            return "rule"
        if entries == ["all_numbered"]:
            return frozenset(r.number for r in self.numbered_rows)
        out: set[str] = set()
        for entry in entries:
            scope, body = (entry.split(":", 1) if ":" in entry
                           else (None, entry))
            if scope is not None and ambient is not None and scope != ambient:
                continue
            out.update(x for x in body.split(",") if x)
        return frozenset(out)

    def _line_spec(self, key: str) -> frozenset[str]:
        vals = self.meta.get(key, ())
        if not vals:
            return frozenset()
        text = vals[0][0]
        if text == "all_numbered":
            return frozenset(r.number for r in self.numbered_rows)
        return frozenset(x for x in text.split(",") if x)

    def equality_lines(self) -> frozenset[str]:
        return self._line_spec("equality_lines")

    def central_lines(self) -> frozenset[str]:
        return self._line_spec("central_lines")

    # -- validation --------------------------------------------------------

    def validate(self) -> None:
        """Parse every cell according to its column; raise on failure."""
        try:
            self._validate()
        except ValueError as exc:
            raise ValueError(f"{self.table_id}: {exc}") from None

    def _validate(self) -> None:
        if self.table_id == "T1":
            for r in self.rows:
                parse_dynkin_cell(r.cells["centralizer"])
                int(r.cells["order"])
                int(r.cells["a_s"])
                if not (r.cells["a_c"].isdigit() or r.cells["a_c"] == "S3"):
                    raise ValueError(f"bad automizer label {r.cells['a_c']!r}")
            return
        if self.table_id == "T3elts":
            for r in self.rows:
                parse_rational_type(r.cells["side"])
                parse_classical_cell(r.cells["C"])
                _check_torus(r.cells["Z"])
            return
        numbers = set()
        for r in self.rows:
            if r.number is not None:
                key = (r.ambient, r.number)
                if key in numbers:
                    raise ValueError(f"duplicate line number {r.number!r}")
                numbers.add(key)
            if r.ell is None or r.e is None:
                raise ValueError(f"row {r.index}: unresolved (l, e)")
            parse_rational_type(r.resolved["C"])
            self._validate_levi_cell(r)
            cl = r.cells.get("CL")
            if cl is not None and cl not in ("L*F", "C"):
                parse_rational_type(cl)
            parse_label_cell(r.cells["lam"])
            weyl_label_order(r.cells["W"])
        printed = {r.number for r in self.numbered_rows}
        for src, dst in self.block_merges().items():
            if src not in printed or dst not in printed:
                raise ValueError(f"block merge {src}->{dst} off the table")
        for key in ("equality_lines", "central_lines"):
            extra = self._line_spec(key) - printed
            if extra:
                raise ValueError(f"{key} lists unknown lines {sorted(extra)}")
        for entry in (v[0] for v in self.meta.get("abelian", ())):
            if entry in ("rule", "all_numbered"):
                continue
            body = entry.split(":", 1)[1] if ":" in entry else entry
            bad = {x for x in body.split(",") if x} - {
                r.number for r in self.numbered_rows}
            if bad:
                raise ValueError(f"abelian lists unknown lines {sorted(bad)}")
        for name in self.s_congruences():
            parse_rational_type(name)

    def _validate_levi_cell(self, row: ReferenceRow) -> None:
        val = row.cells["L"]
        if val == "G":
            return
        shorthand = (self.table_id in ("T4", "T6", "T7")
                     and not (row.number or "").endswith("b"))
        if self.table_id == "T5":
            shorthand = row.e == 1
        if shorthand:
            parse_dynkin_cell(val)
        else:
            parse_rational_type(val)


# --------------------------------------------------------------------------
# loading


def _tables_root(source: str | Path | None):
    if source is not None:
        return Path(source)
    return resources.files("qiblocks.data").joinpath("tables")


def _manifest_map(root) -> dict[str, str]:
    try:
        text = root.joinpath("MANIFEST").read_text(encoding="utf-8")
    except (FileNotFoundError, OSError) as exc:
        raise ValueError(f"missing table manifest under {root}") from exc
    out = {}
    for line in text.splitlines():
        if line.strip():
            digest, name = line.split()
            out[name] = digest
    return out


def _read_checked(root, name: str) -> str:
    manifest = _manifest_map(root)
    if name not in manifest:
        raise ValueError(f"{name} is not listed in the table manifest")
    try:
        raw = root.joinpath(name).read_bytes()
    except (FileNotFoundError, OSError) as exc:
        raise ValueError(f"missing table file {name}") from exc
    digest = hashlib.sha256(raw).hexdigest()
    if digest != manifest[name]:
        raise ValueError(
            f"checksum mismatch for {name}: got {digest}, "
            f"manifest says {manifest[name]}")
    return raw.decode("utf-8")


def _canonical_id(table_id: str) -> str:
    tid = _CANONICAL.get(str(table_id).strip().lower())
    if tid is None:
        raise ValueError(
            f"unknown table id {table_id!r}; available: {', '.join(TABLE_IDS)}")
    return tid


def available_tables() -> tuple[str, ...]:
    return TABLE_IDS


def load_table(table_id: str,
               source: str | Path | None = None) -> ReferenceTable:
    """Load, checksum and parse one reference table.

    ``source`` overrides the packaged fixture directory; it must
    contain the table files and their MANIFEST.  Results for the
    packaged directory are cached.
    """
    tid = _canonical_id(table_id)
    if source is None:
        return _load_packaged(tid)
    return _parse_table(tid, _tables_root(source))


@lru_cache(maxsize=None)
def _load_packaged(tid: str) -> ReferenceTable:
    return _parse_table(tid, _tables_root(None))


def _parse_table(tid: str, root) -> ReferenceTable:
    text = _read_checked(root, _FILENAMES[tid])
    ambient: str | None = None
    columns: tuple[str, ...] | None = None
    meta: dict[str, list[tuple[str, ...]]] = {}
    raw_rows: list[tuple[int, list[str]]] = []
    declared = None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        if line.startswith("table:"):
            declared = line.split(":", 1)[1].strip()
        elif line.startswith("ambient:"):
            ambient = line.split(":", 1)[1].strip()
        elif line.startswith("columns:"):
            columns = tuple(line.split(":", 1)[1].strip().split("|"))
        elif line.startswith("meta:"):
            fields = line.split(":", 1)[1].strip().split("|")
            key = fields[0]
            if key not in _META_KEYS:
                raise ValueError(f"{tid} line {lineno}: unknown meta {key!r}")
            meta.setdefault(key, []).append(tuple(fields[1:]))
        else:
            cells = line.split("|")
            if columns is None:
                raise ValueError(f"{tid} line {lineno}: row before columns")
            if len(cells) != len(columns):
                raise ValueError(
                    f"{tid} line {lineno}: {len(cells)} cells, "
                    f"expected {len(columns)}")
            raw_rows.append((lineno, cells))
    if declared != tid:
        raise ValueError(f"{tid}: file declares table {declared!r}")
    if columns is None:
        raise ValueError(f"{tid}: no columns line")
    frozen_meta = {k: tuple(v) for k, v in meta.items()}
    rows = _build_rows(tid, ambient, columns, raw_rows, frozen_meta)
    table = ReferenceTable(tid, ambient, columns, rows, frozen_meta)
    table.validate()
    return table


def _build_rows(tid, ambient, columns, raw_rows,
                meta) -> tuple[ReferenceRow, ...]:
    merges = {src: dst for src, dst in meta.get("block_merge", ())}
    has_frame = "frame" in columns
    table_ell = int(meta["ell"][0][0]) if "ell" in meta else None
    table_e = int(meta["e"][0][0]) if "e" in meta else None
    inherit = [c for c in ("C", "le", "e") if c in columns]
    rows: list[ReferenceRow] = []
    carried: dict[str, str] = {}
    cur_frame = None
    last_block = None
    for index, (lineno, cells) in enumerate(raw_rows):
        cell = dict(zip(columns, cells))
        row_ambient = cell.get("ambient") or ambient
        if not has_frame:
            rows.append(ReferenceRow(tid, index, row_ambient, None, None,
                                     None, cell, dict(cell), None, None))
            continue
        frame = int(cell["frame"])
        if frame != cur_frame:
            cur_frame = frame
            carried = {}
        number = cell["no"] or None
        if number is not None and not _NUMBER_RE.match(number):
            raise ValueError(f"{tid} line {lineno}: bad number {number!r}")
        resolved = dict(cell)
        for col in inherit:
            if resolved[col]:
                carried[col] = resolved[col]
            elif col in carried:
                resolved[col] = carried[col]
        if number is not None:
            block = merges.get(number, number)
            last_block = block
        else:
            if last_block is None:
                raise ValueError(f"{tid} line {lineno}: row before any number")
            block = last_block
        rows.append(ReferenceRow(tid, index, row_ambient, frame, number,
                                 block, cell, resolved, None, None))
    if not has_frame:
        return tuple(rows)
    # b-lines sit in their own frame: pull still-blank cells from the
    # row they are merged with.
    by_number = {(r.ambient, r.number): r for r in rows if r.number}
    for r in rows:
        if r.number in merges:
            target = by_number[(r.ambient, merges[r.number])]
            for col in inherit:
                if not r.resolved[col]:
                    r.resolved[col] = target.resolved[col]
    for r in rows:
        if "le" in columns:
            m = _LE_RE.match(r.resolved["le"])
            if not m:
                raise ValueError(
                    f"{tid} row {r.index}: bad (l, e) cell "
                    f"{r.resolved['le']!r}")
            r.ell, r.e = int(m.group(1)), int(m.group(2))
        else:
            r.ell = table_ell
            r.e = int(r.resolved["e"]) if "e" in columns else table_e
    return tuple(rows)
