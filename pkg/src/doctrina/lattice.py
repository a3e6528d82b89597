"""Finite inf-semilattices (fibers) and meet-preserving maps (reindexing)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from doctrina.errors import (
    BrokenProductError,
    IntegrityError,
    LookupMissError,
)
from doctrina.report import VerificationReport


@dataclass(frozen=True, eq=False)
class InfSemilattice:
    """Finite poset with a top element and binary meets, stored extensionally.

    ``leq`` holds the full (reflexive) order relation; ``meets`` is total on
    element pairs.  Instances are immutable and safe to share.
    """

    name: str
    elements: tuple[str, ...]
    top: str
    leq_pairs: frozenset[tuple[str, str]]
    meets: Mapping[tuple[str, str], str]

    def __post_init__(self):
        object.__setattr__(self, "_members", frozenset(self.elements))

    # -- queries ---------------------------------------------------------

    def has(self, x: str) -> bool:
        return x in self._members

    def _require(self, x: str) -> None:
        if x not in self._members:
            raise LookupMissError(f"{self.name}: unknown element {x!r}")

    def leq(self, x: str, y: str) -> bool:
        self._require(x)
        self._require(y)
        return (x, y) in self.leq_pairs

    def meet(self, x: str, y: str) -> str:
        self._require(x)
        self._require(y)
        return self.meets[(x, y)]

    def downset(self, x: str) -> "InfSemilattice":
        """Sub-semilattice of everything below ``x``, with top ``x``."""
        self._require(x)
        below = tuple(e for e in self.elements if (e, x) in self.leq_pairs)
        return self.restrict(below, x, name=f"{self.name}|v{x}")

    def restrict(self, elements: Iterable[str], top: str, name: str | None = None) -> "InfSemilattice":
        """Restriction to a meet-closed subset containing ``top``."""
        elts = tuple(elements)
        keep = frozenset(elts)
        if top not in keep:
            raise IntegrityError(f"{self.name}: restriction top {top!r} not among elements")
        for e in elts:
            self._require(e)
            if (e, top) not in self.leq_pairs:
                raise IntegrityError(f"{self.name}: element {e!r} not below restriction top {top!r}")
        meets = {}
        for a in elts:
            for b in elts:
                m = self.meets[(a, b)]
                if m not in keep:
                    raise IntegrityError(
                        f"{self.name}: restriction not meet-closed at ({a!r}, {b!r})"
                    )
                meets[(a, b)] = m
        leq = frozenset(p for p in self.leq_pairs if p[0] in keep and p[1] in keep)
        return InfSemilattice(name or f"{self.name}|sub", elts, top, leq, meets)

    def __eq__(self, other) -> bool:
        if not isinstance(other, InfSemilattice):
            return NotImplemented
        return (
            self.elements == other.elements
            and self.top == other.top
            and self.leq_pairs == other.leq_pairs
        )

    def __hash__(self) -> int:
        return hash((self.elements, self.top))

    def __repr__(self) -> str:
        return f"InfSemilattice({self.name}, {len(self.elements)} elements)"


def build_lattice(
    name: str,
    elements: Iterable[str],
    leq_pairs: Iterable[tuple[str, str]],
    *,
    transitive: bool = False,
) -> InfSemilattice:
    """Build a lattice from raw order pairs.

    Computes the reflexive-transitive closure when ``transitive`` is false,
    verifies antisymmetry, locates the top, and computes all binary meets as
    greatest lower bounds (raising when one is missing or ambiguous).
    """
    elts = tuple(elements)
    members = set(elts)
    if len(members) != len(elts):
        raise IntegrityError(f"{name}: duplicate element ids")
    if not elts:
        raise IntegrityError(f"{name}: a semilattice needs at least a top element")
    rel = {(e, e) for e in elts}
    for x, y in leq_pairs:
        if x not in members or y not in members:
            raise IntegrityError(f"{name}: leq pair ({x!r}, {y!r}) uses unknown element")
        rel.add((x, y))
    if not transitive:
        changed = True
        while changed:
            changed = False
            for x, y in list(rel):
                for z in elts:
                    if (y, z) in rel and (x, z) not in rel:
                        rel.add((x, z))
                        changed = True
    for x, y in rel:
        if x != y and (y, x) in rel:
            raise IntegrityError(f"{name}: order not antisymmetric at ({x!r}, {y!r})")
    tops = [e for e in elts if all((x, e) in rel for x in elts)]
    if len(tops) != 1:
        raise IntegrityError(f"{name}: expected a unique top, found {tops}")
    meets = {}
    for a in elts:
        for b in elts:
            lower = [e for e in elts if (e, a) in rel and (e, b) in rel]
            glbs = [m for m in lower if all((x, m) in rel for x in lower)]
            if len(glbs) != 1:
                raise BrokenProductError(
                    f"{name}: meet of ({a!r}, {b!r}) is not a unique greatest lower bound"
                )
            meets[(a, b)] = glbs[0]
    return InfSemilattice(name, elts, tops[0], frozenset(rel), meets)


def subset_id(points: Iterable[int]) -> str:
    """Canonical id for a subset of a finite carrier: 's' + sorted digits."""
    return "s" + "".join(str(p) for p in sorted(points))


def subset_points(elt: str) -> frozenset[int]:
    return frozenset(int(ch) for ch in elt[1:])


def powerset_lattice(n: int, name: str | None = None) -> InfSemilattice:
    """Powerset of ``{0, ..., n-1}`` ordered by inclusion, meets by intersection."""
    subsets = [frozenset(p for p in range(n) if mask >> p & 1) for mask in range(1 << n)]
    subsets.sort(key=lambda s: (len(s), sorted(s)))
    ids = {s: subset_id(s) for s in subsets}
    elts = tuple(ids[s] for s in subsets)
    leq = frozenset((ids[a], ids[b]) for a in subsets for b in subsets if a <= b)
    meets = {(ids[a], ids[b]): ids[a & b] for a in subsets for b in subsets}
    return InfSemilattice(name or f"P[{n}]", elts, subset_id(range(n)), leq, meets)


def chain_lattice(n: int, name: str | None = None, prefix: str = "c") -> InfSemilattice:
    """The n-element chain c0 < c1 < ... with meet = minimum."""
    elts = tuple(f"{prefix}{i}" for i in range(n))
    leq = frozenset((elts[i], elts[j]) for i in range(n) for j in range(i, n))
    meets = {(elts[i], elts[j]): elts[min(i, j)] for i in range(n) for j in range(n)}
    return InfSemilattice(name or f"chain{n}", elts, elts[-1], leq, meets)


@dataclass(frozen=True, eq=False)
class MeetMap:
    """Monotone, top- and meet-preserving map between fibers."""

    source: InfSemilattice
    target: InfSemilattice
    mapping: Mapping[str, str]

    def apply(self, x: str) -> str:
        try:
            return self.mapping[x]
        except KeyError:
            raise LookupMissError(f"meet map has no value for element {x!r}")

    def then(self, other: "MeetMap") -> "MeetMap":
        """Post-compose: ``other`` after ``self``."""
        return MeetMap(
            self.source,
            other.target,
            {x: other.apply(y) for x, y in self.mapping.items()},
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, MeetMap):
            return NotImplemented
        return (
            self.source.elements == other.source.elements
            and self.target.elements == other.target.elements
            and all(self.mapping[x] == other.mapping[x] for x in self.source.elements)
        )

    def __repr__(self) -> str:
        return f"MeetMap({self.source.name} -> {self.target.name})"


def identity_map(lattice: InfSemilattice) -> MeetMap:
    return MeetMap(lattice, lattice, {e: e for e in lattice.elements})


def compose_maps(g: MeetMap, f: MeetMap) -> MeetMap:
    """g after f."""
    return f.then(g)


def find_inverse(m: MeetMap) -> MeetMap | None:
    """Two-sided inverse of ``m`` as a MeetMap, or None.

    Isomorphisms are witnessed, never assumed: the returned map composes
    with ``m`` to the identity in both directions.
    """
    inverse: dict[str, str] = {}
    for x in m.source.elements:
        y = m.apply(x)
        if y in inverse:
            return None
        inverse[y] = x
    if len(inverse) != len(m.target.elements):
        return None
    inv = MeetMap(m.target, m.source, {y: inverse[y] for y in m.target.elements})
    for rep in verify_meet_map(inv).failures:
        return None
    return inv


def verify_semilattice(lattice: InfSemilattice) -> VerificationReport:
    """Check order axioms, top maximality, and that meets are greatest lower bounds."""
    report = VerificationReport(title=f"semilattice {lattice.name}")
    elts = lattice.elements
    leq = lattice.leq_pairs
    for x in elts:
        if (x, x) not in leq:
            report.fail("order/reflexive", [x])
        else:
            report.add_pass("order/reflexive")
        if (x, lattice.top) not in leq:
            report.fail("order/top-maximal", [x])
        else:
            report.add_pass("order/top-maximal")
    for x, y in leq:
        if x != y and (y, x) in leq:
            report.fail("order/antisymmetric", [x, y])
    report.add_pass("order/antisymmetric", len(leq))
    for x, y in leq:
        for z in elts:
            if (y, z) in leq and (x, z) not in leq:
                report.fail("order/transitive", [x, y, z])
    report.add_pass("order/transitive")
    for a in elts:
        for b in elts:
            m = lattice.meets.get((a, b))
            if m is None or not lattice.has(m):
                report.fail("meet/total", [a, b], "missing meet entry")
                continue
            if (m, a) not in leq or (m, b) not in leq:
                report.fail("meet/lower-bound", [a, b, m])
                continue
            for x in elts:
                if (x, a) in leq and (x, b) in leq and (x, m) not in leq:
                    report.fail("meet/greatest", [a, b, x])
                    break
            else:
                report.add_pass("meet/greatest")
    return report.finalize()


def verify_meet_map(m: MeetMap) -> VerificationReport:
    """Check totality, monotonicity, top and binary-meet preservation."""
    report = VerificationReport(title=f"meet map {m.source.name} -> {m.target.name}")
    src, tgt = m.source, m.target
    for x in src.elements:
        y = m.mapping.get(x)
        if y is None or not tgt.has(y):
            report.fail("map/total", [x], "no value in target")
            return report.finalize()
    report.add_pass("map/total", len(src.elements))
    if m.apply(src.top) != tgt.top:
        report.fail("map/preserves-top", [src.top], f"image {m.apply(src.top)!r}")
    else:
        report.add_pass("map/preserves-top")
    for x, y in src.leq_pairs:
        if not tgt.leq(m.apply(x), m.apply(y)):
            report.fail("map/monotone", [x, y])
    report.add_pass("map/monotone")
    for a in src.elements:
        for b in src.elements:
            if m.apply(src.meet(a, b)) != tgt.meet(m.apply(a), m.apply(b)):
                report.fail("map/preserves-meets", [a, b])
            else:
                report.add_pass("map/preserves-meets")
    return report.finalize()
