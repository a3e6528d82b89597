"""Finite categories with chosen product fragments, functors, natural transformations.

Every universal property is quantified over the fragment: a product or
pairing only exists where the fragment declares the data, and verification
scans range over declared objects and morphisms only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from doctrina.errors import (
    BrokenProductError,
    DomainMismatchError,
    FragmentIncompleteError,
    IntegrityError,
    LookupMissError,
)
from doctrina.report import VerificationReport


@dataclass(frozen=True)
class Product:
    obj: str
    pr1: str
    pr2: str


class FragmentCategory:
    """Shared interface of table-backed and derived (completion) categories."""

    name: str
    objects: tuple[str, ...]
    products: dict[tuple[str, str], Product]
    terminal: str | None

    def __init__(self, name, objects, products, terminal):
        self.name = name
        self.objects = tuple(objects)
        self._object_set = frozenset(self.objects)
        self.products = dict(products)
        self.terminal = terminal
        self._pairing_cache: dict[tuple[str, str], str] = {}
        self._all_morphisms: tuple[str, ...] | None = None

    # -- morphism record interface (implemented by subclasses) ------------

    def has_morphism(self, m: str) -> bool:
        raise NotImplementedError

    def src(self, m: str) -> str:
        raise NotImplementedError

    def dst(self, m: str) -> str:
        raise NotImplementedError

    def identity(self, obj: str) -> str:
        raise NotImplementedError

    def compose(self, g: str, f: str) -> str:
        """Composite ``g after f``; raises DomainMismatchError when not composable."""
        raise NotImplementedError

    def hom(self, a: str, b: str) -> tuple[str, ...]:
        raise NotImplementedError

    # -- shared helpers ----------------------------------------------------

    def require_object(self, obj: str) -> None:
        if obj not in self._object_set:
            raise LookupMissError(f"{self.name}: unknown object {obj!r}")

    def require_morphism(self, m: str) -> None:
        if not self.has_morphism(m):
            raise LookupMissError(f"{self.name}: unknown morphism {m!r}")

    def morphisms(self) -> tuple[str, ...]:
        if self._all_morphisms is None:
            out: list[str] = []
            for a in self.objects:
                for b in self.objects:
                    out.extend(self.hom(a, b))
            self._all_morphisms = tuple(out)
        return self._all_morphisms

    def morphism_count(self, cap: int | None = None) -> int | None:
        """Number of morphisms, or None when it exceeds ``cap``."""
        if self._all_morphisms is not None:
            n = len(self._all_morphisms)
            return None if cap is not None and n > cap else n
        n = 0
        for a in self.objects:
            for b in self.objects:
                n += len(self.hom(a, b))
                if cap is not None and n > cap:
                    return None
        return n

    def is_identity(self, m: str) -> bool:
        return self.src(m) == self.dst(m) and m == self.identity(self.src(m))

    def product(self, a: str, b: str) -> Product | None:
        return self.products.get((a, b))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name}, {len(self.objects)} objects)"


class TableCategory(FragmentCategory):
    """Category given by explicit tables; the form documents are loaded into."""

    def __init__(
        self,
        name: str,
        objects: Iterable[str],
        morphisms: Mapping[str, tuple[str, str]],
        identities: Mapping[str, str],
        composition: Mapping[tuple[str, str], str],
        products: Mapping[tuple[str, str], Product] = (),
        terminal: str | None = None,
    ):
        super().__init__(name, objects, dict(products), terminal)
        self._records = dict(morphisms)
        self._identities = dict(identities)
        self._table = dict(composition)
        self._validate()
        homs: dict[tuple[str, str], list[str]] = {}
        for m, (a, b) in self._records.items():
            homs.setdefault((a, b), []).append(m)
        self._homs = {k: tuple(sorted(v)) for k, v in homs.items()}

    def _validate(self) -> None:
        for m, (a, b) in self._records.items():
            if a not in self._object_set or b not in self._object_set:
                raise IntegrityError(f"{self.name}: morphism {m!r} uses unknown object")
        for obj in self.objects:
            i = self._identities.get(obj)
            if i is None or i not in self._records:
                raise IntegrityError(f"{self.name}: missing identity for object {obj!r}")
            if self._records[i] != (obj, obj):
                raise IntegrityError(f"{self.name}: identity of {obj!r} is not an endomorphism")
        for (g, f), h in self._table.items():
            for m in (g, f, h):
                if m not in self._records:
                    raise IntegrityError(f"{self.name}: composition entry uses unknown morphism {m!r}")
        for (a, b), prod in self.products.items():
            if prod.obj not in self._object_set:
                raise IntegrityError(f"{self.name}: product object {prod.obj!r} undeclared")
            for pr, target in ((prod.pr1, a), (prod.pr2, b)):
                if pr not in self._records or self._records[pr] != (prod.obj, target):
                    raise IntegrityError(
                        f"{self.name}: projection {pr!r} of product ({a!r}, {b!r}) ill-typed"
                    )
        if self.terminal is not None and self.terminal not in self._object_set:
            raise IntegrityError(f"{self.name}: terminal object {self.terminal!r} undeclared")

    def has_morphism(self, m: str) -> bool:
        return m in self._records

    def src(self, m: str) -> str:
        self.require_morphism(m)
        return self._records[m][0]

    def dst(self, m: str) -> str:
        self.require_morphism(m)
        return self._records[m][1]

    def identity(self, obj: str) -> str:
        self.require_object(obj)
        return self._identities[obj]

    def compose(self, g: str, f: str) -> str:
        self.require_morphism(g)
        self.require_morphism(f)
        if self._records[f][1] != self._records[g][0]:
            raise DomainMismatchError(
                f"{self.name}: cannot compose {g!r} after {f!r} (dst(f) != src(g))"
            )
        try:
            return self._table[(g, f)]
        except KeyError:
            raise IntegrityError(f"{self.name}: composition table missing entry ({g!r}, {f!r})")

    def hom(self, a: str, b: str) -> tuple[str, ...]:
        self.require_object(a)
        self.require_object(b)
        return self._homs.get((a, b), ())

    def composition_entries(self):
        return self._table


class DerivedCategory(FragmentCategory):
    """Category whose composition delegates to an underlying base category.

    ``pair`` mode (comprehension / quotient completions): a morphism is an
    underlying base morphism decorated with a source and target object; the
    composite of two decorated morphisms decorates the base composite.

    ``classes`` mode (extensional collapse): a morphism is a class of base
    morphisms; composition composes representatives and locates the class.
    """

    PAIR = "pair"
    CLASSES = "classes"

    def __init__(
        self,
        name: str,
        base: FragmentCategory,
        objects: Iterable[str],
        products: Mapping[tuple[str, str], Product],
        terminal: str | None,
        *,
        mode: str,
        obj_origin: Mapping[str, str] | None = None,
        hom_filter: Callable[[str, str, str], bool] | None = None,
        members: Mapping[str, tuple[str, ...]] | None = None,
        records: Mapping[str, tuple[str, str]] | None = None,
    ):
        super().__init__(name, objects, dict(products), terminal)
        if mode not in (self.PAIR, self.CLASSES):
            raise IntegrityError(f"unknown derived-category mode {mode!r}")
        self.base = base
        self.mode = mode
        self._homs: dict[tuple[str, str], tuple[str, ...]] = {}
        if mode == self.PAIR:
            self.obj_origin = dict(obj_origin or {})
            self._hom_filter = hom_filter
            self._records: dict[str, tuple[str, str]] = {}
            self.under: dict[str, str] = {}
            if records is not None:
                # explicit form (loaded from a document): homs are complete
                for m, (a, b, u) in records.items():
                    self._records[m] = (a, b)
                    self.under[m] = u
                homs: dict[tuple[str, str], list[str]] = {}
                for m, (a, b) in self._records.items():
                    homs.setdefault((a, b), []).append(m)
                self._homs = {k: tuple(sorted(v)) for k, v in homs.items()}
                self._complete = True
            else:
                if hom_filter is None or obj_origin is None:
                    raise IntegrityError("pair mode needs hom_filter/obj_origin or explicit records")
                self._complete = False
        else:
            if members is None or records is None:
                raise IntegrityError("classes mode needs explicit members and records")
            self.members = {m: tuple(v) for m, v in members.items()}
            self._records = {m: (a, b) for m, (a, b) in records.items()}
            self.class_of: dict[str, str] = {}
            for cls, reps in self.members.items():
                for r in reps:
                    if r in self.class_of:
                        raise IntegrityError(f"{name}: base morphism {r!r} in two classes")
                    self.class_of[r] = cls
            homs = {}
            for m, (a, b) in self._records.items():
                homs.setdefault((a, b), []).append(m)
            self._homs = {k: tuple(sorted(v)) for k, v in homs.items()}
            self._complete = True

    # -- id scheme for pair mode ------------------------------------------

    @staticmethod
    def pair_id(under: str, src: str, dst: str) -> str:
        return f"{under}@{src}>{dst}"

    def _register_pair(self, under: str, src: str, dst: str) -> str:
        m = self.pair_id(under, src, dst)
        if m not in self._records:
            self._records[m] = (src, dst)
            self.under[m] = under
        return m

    # -- interface ----------------------------------------------------------

    def has_morphism(self, m: str) -> bool:
        if m in self._records:
            return True
        if self.mode == self.PAIR and not self._complete:
            # resolve through the hom set it would belong to
            try:
                u, rest = m.split("@", 1)
                s, d = rest.split(">", 1)
            except ValueError:
                return False
            if s not in self._object_set or d not in self._object_set:
                return False
            return m in self.hom(s, d)
        return False

    def src(self, m: str) -> str:
        self.require_morphism(m)
        return self._records[m][0]

    def dst(self, m: str) -> str:
        self.require_morphism(m)
        return self._records[m][1]

    def identity(self, obj: str) -> str:
        self.require_object(obj)
        if self.mode == self.PAIR:
            return self._register_pair(self.base.identity(self.origin_of(obj)), obj, obj)
        return self.class_of[self.base.identity(obj)]

    def origin_of(self, obj: str) -> str:
        if self.mode == self.PAIR:
            return self.obj_origin[obj]
        return obj

    def compose(self, g: str, f: str) -> str:
        self.require_morphism(g)
        self.require_morphism(f)
        if self._records[f][1] != self._records[g][0]:
            raise DomainMismatchError(
                f"{self.name}: cannot compose {g!r} after {f!r} (dst(f) != src(g))"
            )
        if self.mode == self.PAIR:
            u = self.base.compose(self.under[g], self.under[f])
            return self._register_pair(u, self._records[f][0], self._records[g][1])
        u = self.base.compose(self.members[g][0], self.members[f][0])
        try:
            return self.class_of[u]
        except KeyError:
            raise IntegrityError(f"{self.name}: composite {u!r} belongs to no class")

    def hom(self, a: str, b: str) -> tuple[str, ...]:
        self.require_object(a)
        self.require_object(b)
        cached = self._homs.get((a, b))
        if cached is not None or self._complete:
            return cached or ()
        out = []
        for u in self.base.hom(self.origin_of(a), self.origin_of(b)):
            if self._hom_filter(a, b, u):
                out.append(self._register_pair(u, a, b))
        result = tuple(out)
        self._homs[(a, b)] = result
        return result


# -- operations -------------------------------------------------------------


def compose(category: FragmentCategory, g: str, f: str) -> str:
    return category.compose(g, f)


def pairing(category: FragmentCategory, f: str, g: str) -> str:
    """Unique h with pr1 . h = f and pr2 . h = g, found by exhaustive search."""
    x = category.src(f)
    if category.src(g) != x:
        raise DomainMismatchError(f"{category.name}: pairing legs have different sources")
    a, b = category.dst(f), category.dst(g)
    key = (f, g)
    cached = category._pairing_cache.get(key)
    if cached is not None:
        return cached
    prod = category.product(a, b)
    if prod is None:
        raise FragmentIncompleteError(
            f"{category.name}: product ({a!r}, {b!r}) not declared in the fragment"
        )
    candidates = [
        h
        for h in category.hom(x, prod.obj)
        if category.compose(prod.pr1, h) == f and category.compose(prod.pr2, h) == g
    ]
    if len(candidates) != 1:
        raise BrokenProductError(
            f"{category.name}: product ({a!r}, {b!r}) yields {len(candidates)} pairings "
            f"for legs ({f!r}, {g!r})"
        )
    category._pairing_cache[key] = candidates[0]
    return candidates[0]


def diagonal(category: FragmentCategory, obj: str) -> str:
    i = category.identity(obj)
    return pairing(category, i, i)


def product_map(category: FragmentCategory, f: str, g: str) -> str:
    """f x g : src(f) x src(g) -> dst(f) x dst(g), via the pairing of composites."""
    sprod = category.product(category.src(f), category.src(g))
    if sprod is None:
        raise FragmentIncompleteError(
            f"{category.name}: product ({category.src(f)!r}, {category.src(g)!r}) not declared"
        )
    return pairing(
        category,
        category.compose(f, sprod.pr1),
        category.compose(g, sprod.pr2),
    )


def verify_category(category: FragmentCategory) -> VerificationReport:
    """Scan unit and associativity laws over all composable pairs/triples."""
    report = VerificationReport(title=f"category {category.name}")
    mors = category.morphisms()
    for m in mors:
        a, b = category.src(m), category.dst(m)
        if category.compose(m, category.identity(a)) != m:
            report.fail("category/unit-right", [m])
        if category.compose(category.identity(b), m) != m:
            report.fail("category/unit-left", [m])
    report.add_pass("category/unit-right", len(mors))
    report.add_pass("category/unit-left", len(mors))
    by_src: dict[str, list[str]] = {}
    for m in mors:
        by_src.setdefault(category.src(m), []).append(m)
    n = 0
    comp = category.compose
    dst = category.dst
    for f in mors:
        gs = by_src.get(dst(f), ())
        for g in gs:
            gf = comp(g, f)
            hs = by_src.get(dst(g), ())
            for h in hs:
                if comp(h, gf) != comp(comp(h, g), f):
                    report.fail("category/associative", [h, g, f])
                n += 1
    report.add_pass("category/associative", n)
    return report.finalize()


def _mediator_table(category, apex, leg1, leg2):
    """For each h: X -> apex, the pair of its leg composites; used for universal
    property checks in one pass instead of a quadratic mediator search."""
    tables = {}
    for x in category.objects:
        t: dict[tuple[str, str], int] = {}
        for h in category.hom(x, apex):
            key = (category.compose(leg1, h), category.compose(leg2, h))
            t[key] = t.get(key, 0) + 1
        tables[x] = t
    return tables


def verify_product_fragment(category: FragmentCategory) -> VerificationReport:
    """Check every declared product's universal property over the whole fragment."""
    report = VerificationReport(title=f"products of {category.name}")
    for (a, b), prod in sorted(category.products.items()):
        tables = _mediator_table(category, prod.obj, prod.pr1, prod.pr2)
        for x in category.objects:
            table = tables[x]
            for f in category.hom(x, a):
                for g in category.hom(x, b):
                    count = table.get((f, g), 0)
                    if count != 1:
                        report.fail(
                            "product/universal",
                            [a, b, x, f, g],
                            f"{count} mediating morphisms",
                        )
                    else:
                        report.add_pass("product/universal")
            extra = sum(table.values()) - sum(
                1 for f in category.hom(x, a) for g in category.hom(x, b)
            )
            if extra > 0:
                report.fail(
                    "product/universal",
                    [a, b, x],
                    "pairing map hits cones outside hom sets",
                )
    if category.terminal is not None:
        t = category.terminal
        for x in category.objects:
            n = len(category.hom(x, t))
            if n != 1:
                report.fail("terminal/unique-arrow", [x, t], f"{n} arrows")
            else:
                report.add_pass("terminal/unique-arrow")
    return report.finalize()


@dataclass(eq=False)
class Functor:
    """Product-fragment-preserving functor between fragment categories."""

    source: FragmentCategory
    target: FragmentCategory
    object_map: Mapping[str, str]
    morphism_map: Mapping[str, str]
    _comparisons: dict = field(default_factory=dict, repr=False)

    def on_object(self, obj: str) -> str:
        return self.object_map[obj]

    def on_morphism(self, m: str) -> str:
        return self.morphism_map[m]

    def comparison(self, a: str, b: str) -> tuple[str, str]:
        """Canonical comparison <F pr1, F pr2> : F(AxB) -> FA x FB and its inverse.

        Both are found by search and cached; missing target product or a
        non-invertible comparison raises.
        """
        key = (a, b)
        cached = self._comparisons.get(key)
        if cached is not None:
            return cached
        sprod = self.source.product(a, b)
        if sprod is None:
            raise FragmentIncompleteError(
                f"{self.source.name}: product ({a!r}, {b!r}) not declared"
            )
        fa, fb = self.object_map[a], self.object_map[b]
        tprod = self.target.product(fa, fb)
        if tprod is None:
            raise FragmentIncompleteError(
                f"{self.target.name}: product ({fa!r}, {fb!r}) not declared in target"
            )
        comp = pairing(
            self.target, self.morphism_map[sprod.pr1], self.morphism_map[sprod.pr2]
        )
        fsrc = self.object_map[sprod.obj]
        inverses = [
            h
            for h in self.target.hom(tprod.obj, fsrc)
            if self.target.compose(comp, h) == self.target.identity(tprod.obj)
            and self.target.compose(h, comp) == self.target.identity(fsrc)
        ]
        if len(inverses) != 1:
            raise BrokenProductError(
                f"functor comparison for ({a!r}, {b!r}) has {len(inverses)} inverses"
            )
        result = (comp, inverses[0])
        self._comparisons[key] = result
        return result


def identity_functor(category: FragmentCategory) -> Functor:
    return Functor(
        category,
        category,
        {o: o for o in category.objects},
        LazyMap(lambda m: m),
    )


def compose_functors(g: Functor, f: Functor) -> Functor:
    return Functor(
        f.source,
        g.target,
        {o: g.object_map[f.object_map[o]] for o in f.source.objects},
        LazyMap(lambda m: g.morphism_map[f.morphism_map[m]]),
    )


class LazyMap(Mapping):
    """Read-only mapping backed by a resolver, with caching.

    Used for morphism maps of functors whose source is large: values are
    computed on demand.  Iteration is only supported when an explicit key
    universe is supplied.
    """

    def __init__(self, resolve: Callable[[str], str], keys: Callable[[], Iterable[str]] | None = None):
        self._resolve = resolve
        self._keys = keys
        self._cache: dict[str, str] = {}

    def __getitem__(self, key: str) -> str:
        try:
            return self._cache[key]
        except KeyError:
            value = self._resolve(key)
            self._cache[key] = value
            return value

    def __iter__(self):
        if self._keys is None:
            raise TypeError("this lazy map has no declared key universe")
        return iter(self._keys())

    def __len__(self) -> int:
        if self._keys is None:
            raise TypeError("this lazy map has no declared key universe")
        return sum(1 for _ in self._keys())


def verify_functor(functor: Functor) -> VerificationReport:
    """Identity/composition preservation plus product preservation up to
    invertible canonical comparison."""
    report = VerificationReport(title="functor")
    src, tgt = functor.source, functor.target
    for obj in src.objects:
        fo = functor.object_map.get(obj)
        if fo is None or fo not in tgt._object_set:
            report.fail("functor/objects-total", [obj])
            return report.finalize()
    report.add_pass("functor/objects-total", len(src.objects))
    mors = src.morphisms()
    for m in mors:
        fm = functor.morphism_map[m]
        if not tgt.has_morphism(fm):
            report.fail("functor/morphisms-total", [m])
            return report.finalize()
        if tgt.src(fm) != functor.object_map[src.src(m)] or tgt.dst(fm) != functor.object_map[src.dst(m)]:
            report.fail("functor/typing", [m, fm])
    report.add_pass("functor/typing", len(mors))
    for obj in src.objects:
        if functor.morphism_map[src.identity(obj)] != tgt.identity(functor.object_map[obj]):
            report.fail("functor/preserves-identity", [obj])
        else:
            report.add_pass("functor/preserves-identity")
    by_src: dict[str, list[str]] = {}
    for m in mors:
        by_src.setdefault(src.src(m), []).append(m)
    n = 0
    for f in mors:
        for g in by_src.get(src.dst(f), ()):
            if functor.morphism_map[src.compose(g, f)] != tgt.compose(
                functor.morphism_map[g], functor.morphism_map[f]
            ):
                report.fail("functor/preserves-composition", [g, f])
            n += 1
    report.add_pass("functor/preserves-composition", n)
    for (a, b) in sorted(functor.source.products):
        fa, fb = functor.object_map[a], functor.object_map[b]
        if tgt.product(fa, fb) is None:
            report.skip(
                "functor/preserves-products",
                f"target product ({fa!r}, {fb!r}) not declared in the fragment",
                [a, b],
            )
            continue
        try:
            functor.comparison(a, b)
        except BrokenProductError as exc:
            report.fail("functor/preserves-products", [a, b], str(exc))
        else:
            report.add_pass("functor/preserves-products")
    return report.finalize()


@dataclass(eq=False)
class NatTransf:
    """Natural transformation: one target morphism per source object."""

    source: Functor
    target: Functor
    components: Mapping[str, str]

    def at(self, obj: str) -> str:
        return self.components[obj]


def verify_nat(nat: NatTransf) -> VerificationReport:
    report = VerificationReport(title="natural transformation")
    cat = nat.source.source
    tgt = nat.source.target
    for obj in cat.objects:
        comp = nat.components.get(obj)
        if comp is None or not tgt.has_morphism(comp):
            report.fail("nat/components-total", [obj])
            return report.finalize()
        if tgt.src(comp) != nat.source.object_map[obj] or tgt.dst(comp) != nat.target.object_map[obj]:
            report.fail("nat/typing", [obj, comp])
    report.add_pass("nat/typing", len(cat.objects))
    mors = cat.morphisms()
    for m in mors:
        a, b = cat.src(m), cat.dst(m)
        lhs = tgt.compose(nat.components[b], nat.source.morphism_map[m])
        rhs = tgt.compose(nat.target.morphism_map[m], nat.components[a])
        if lhs != rhs:
            report.fail("nat/naturality", [m])
    report.add_pass("nat/naturality", len(mors))
    return report.finalize()
