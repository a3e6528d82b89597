"""Doctrines over fragment categories: fibered predicates, equality structure,
comprehensions, equivalence relations, quotients, descent data, and 1-/2-cells."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Mapping

from doctrina import fincat
from doctrina.errors import (
    FragmentIncompleteError,
    IntegrityError,
    InternalConsistencyError,
    LookupMissError,
    PreconditionError,
    StructureMissingError,
)
from doctrina.fincat import (
    FragmentCategory,
    Functor,
    LazyMap,
    NatTransf,
    diagonal,
    pairing,
    product_map,
)
from doctrina.lattice import InfSemilattice, MeetMap, identity_map, find_inverse, verify_meet_map, verify_semilattice
from doctrina.report import VerificationReport


class Doctrine:
    """Contravariant assignment of fibers and meet-preserving reindexing maps.

    ``delta`` (fibered equality), ``comprehensions`` and ``quotients`` are
    partial chosen structure; each entry is verified by the corresponding
    check operation, never assumed.
    """

    def __init__(
        self,
        name: str,
        base: FragmentCategory,
        fibers: Mapping[str, InfSemilattice],
        reindex_provider: Callable[[str], MeetMap],
        delta: Mapping[str, str] | None = None,
        comprehensions: Mapping[tuple[str, str], str] | None = None,
        quotients: Mapping[tuple[str, str], str] | None = None,
        provenance: dict | None = None,
    ):
        self.name = name
        self.base = base
        self.fibers = dict(fibers)
        for obj in base.objects:
            if obj not in self.fibers:
                raise IntegrityError(f"{name}: object {obj!r} has no fiber")
        self._provider = reindex_provider
        self._reindex_cache: dict[str, MeetMap] = {}
        self.delta = dict(delta or {})
        self.comprehensions = dict(comprehensions or {})
        self.quotients = dict(quotients or {})
        self.provenance = provenance

    def fiber(self, obj: str) -> InfSemilattice:
        try:
            return self.fibers[obj]
        except KeyError:
            raise LookupMissError(f"{self.name}: unknown object {obj!r}")

    def reindex(self, m: str) -> MeetMap:
        cached = self._reindex_cache.get(m)
        if cached is None:
            self.base.require_morphism(m)
            cached = self._provider(m)
            self._reindex_cache[m] = cached
        return cached

    def reindex_apply(self, m: str, x: str) -> str:
        return self.reindex(m).apply(x)

    def square(self, obj: str):
        return self.base.product(obj, obj)

    def top(self, obj: str) -> str:
        return self.fiber(obj).top

    def with_structure(
        self,
        *,
        delta: Mapping | None = None,
        comprehensions: Mapping | None = None,
        quotients: Mapping | None = None,
        name: str | None = None,
    ) -> "Doctrine":
        """Copy with replaced chosen structure; fibers and reindexing are shared."""
        out = Doctrine(
            name or self.name,
            self.base,
            self.fibers,
            self._provider,
            self.delta if delta is None else delta,
            self.comprehensions if comprehensions is None else comprehensions,
            self.quotients if quotients is None else quotients,
            self.provenance,
        )
        out._reindex_cache = self._reindex_cache
        return out

    def __repr__(self) -> str:
        return f"Doctrine({self.name})"


def table_reindex_provider(maps: Mapping[str, MeetMap]) -> Callable[[str], MeetMap]:
    table = dict(maps)

    def provider(m: str) -> MeetMap:
        try:
            return table[m]
        except KeyError:
            raise LookupMissError(f"no reindex map declared for morphism {m!r}")

    return provider


def fingerprint(doctrine: Doctrine) -> str:
    """Stable structural digest used for provenance of completion outputs."""
    h = hashlib.sha256()

    def feed(*parts):
        for p in parts:
            h.update(str(p).encode())
            h.update(b"\x00")

    feed("objects", *doctrine.base.objects)
    for m in sorted(doctrine.base.morphisms()):
        feed("mor", m, doctrine.base.src(m), doctrine.base.dst(m))
    for (a, b), prod in sorted(doctrine.base.products.items()):
        feed("prod", a, b, prod.obj, prod.pr1, prod.pr2)
    feed("terminal", doctrine.base.terminal)
    for obj in doctrine.base.objects:
        f = doctrine.fiber(obj)
        feed("fiber", obj, *f.elements)
        feed("leq", *sorted(f.leq_pairs))
    for m in sorted(doctrine.base.morphisms()):
        r = doctrine.reindex(m)
        feed("reindex", m, *(f"{x}:{r.apply(x)}" for x in r.source.elements))
    feed("delta", *sorted(doctrine.delta.items()))
    feed("compr", *sorted(doctrine.comprehensions.items()))
    feed("quot", *sorted(doctrine.quotients.items()))
    return h.hexdigest()


# -- predicate algebra -------------------------------------------------------


def box(doctrine: Doctrine, a: str, b: str, alpha: str, beta: str) -> str:
    """Predicate on AxB pulling ``alpha`` along pr1 and ``beta`` along pr2, met."""
    prod = doctrine.base.product(a, b)
    if prod is None:
        raise FragmentIncompleteError(
            f"{doctrine.name}: product ({a!r}, {b!r}) not declared in the fragment"
        )
    f = doctrine.fiber(prod.obj)
    return f.meet(
        doctrine.reindex_apply(prod.pr1, alpha),
        doctrine.reindex_apply(prod.pr2, beta),
    )


def verify_elementary(doctrine: Doctrine) -> VerificationReport:
    """Both left-adjoint characterisations of fibered equality, instance-wise.

    An instance is checked only where the needed products exist in the
    fragment; every omission is recorded as an explained skip.
    """
    report = VerificationReport(title=f"elementary {doctrine.name}")
    base = doctrine.base
    for a in base.objects:
        sq = doctrine.square(a)
        if sq is None:
            continue
        if a not in doctrine.delta:
            raise StructureMissingError(
                f"{doctrine.name}: object {a!r} has a declared square but no equality predicate"
            )
        d = doctrine.delta[a]
        fa = doctrine.fiber(a)
        faa = doctrine.fiber(sq.obj)
        if not faa.has(d):
            report.fail("elementary/delta-typed", [a, d], "equality not in the square fiber")
            continue
        diag = diagonal(base, a)
        pr1_map = doctrine.reindex(sq.pr1)
        diag_map = doctrine.reindex(diag)
        for alpha in fa.elements:
            e_alpha = faa.meet(pr1_map.apply(alpha), d)
            for beta in faa.elements:
                if faa.leq(e_alpha, beta) != fa.leq(alpha, diag_map.apply(beta)):
                    report.fail(
                        "elementary/adjoint-diagonal",
                        [a, alpha, beta],
                        "left-adjoint characterisation fails at the diagonal",
                    )
                else:
                    report.add_pass("elementary/adjoint-diagonal")
    for x in base.objects:
        for a in base.objects:
            prod_xa = base.product(x, a)
            if prod_xa is None:
                continue
            xa = prod_xa.obj
            prod_xaa = base.product(xa, a)
            sq_a = doctrine.square(a)
            if prod_xaa is None:
                report.skip(
                    "elementary/adjoint-extended",
                    f"product ({xa!r}, {a!r}) not declared in the fragment",
                    [x, a],
                )
                continue
            if sq_a is None or a not in doctrine.delta:
                report.skip(
                    "elementary/adjoint-extended",
                    f"equality predicate for {a!r} unavailable (square not declared)",
                    [x, a],
                )
                continue
            xaa = prod_xaa.obj
            d = doctrine.delta[a]
            # e : XxA -> (XxA)xA duplicating the A component
            e = pairing(base, base.identity(xa), prod_xa.pr2)
            # projection to the middle-and-last components, into AxA
            m23 = pairing(
                base,
                base.compose(prod_xa.pr2, prod_xaa.pr1),
                prod_xaa.pr2,
            )
            f_xa = doctrine.fiber(xa)
            f_xaa = doctrine.fiber(xaa)
            q1_map = doctrine.reindex(prod_xaa.pr1)
            m23_d = doctrine.reindex_apply(m23, d)
            e_map = doctrine.reindex(e)
            for alpha in f_xa.elements:
                e_alpha = f_xaa.meet(q1_map.apply(alpha), m23_d)
                for beta in f_xaa.elements:
                    if f_xaa.leq(e_alpha, beta) != f_xa.leq(alpha, e_map.apply(beta)):
                        report.fail(
                            "elementary/adjoint-extended",
                            [x, a, alpha, beta],
                            "left-adjoint characterisation fails at the extended diagonal",
                        )
                    else:
                        report.add_pass("elementary/adjoint-extended")
    return report.finalize()


# -- comprehensions ----------------------------------------------------------


def _mediators_onto(base: FragmentCategory, u: str) -> dict[str, dict[str, list[str]]]:
    """For each object Z, the map (u . g) -> [g] over g : Z -> src(u)."""
    x = base.src(u)
    out: dict[str, dict[str, list[str]]] = {}
    for z in base.objects:
        t: dict[str, list[str]] = {}
        for g in base.hom(z, x):
            t.setdefault(base.compose(u, g), []).append(g)
        out[z] = t
    return out


def comprehension_violations(doctrine: Doctrine, a: str, alpha: str, u: str) -> list[tuple]:
    """Why ``u`` fails to be a comprehension of ``alpha``; empty when it is one."""
    base = doctrine.base
    x = base.src(u)
    if base.dst(u) != a:
        return [("typing", u)]
    bad: list[tuple] = []
    if doctrine.reindex_apply(u, alpha) != doctrine.fiber(x).top:
        bad.append(("restricts-to-top", u))
    tables = _mediators_onto(base, u)
    for z in base.objects:
        fz_top = doctrine.fiber(z).top
        table = tables[z]
        for f in base.hom(z, a):
            if doctrine.reindex_apply(f, alpha) != fz_top:
                continue
            n = len(table.get(f, ()))
            if n != 1:
                bad.append(("factorisation", f, n))
    return bad


def is_comprehension(doctrine: Doctrine, a: str, alpha: str, u: str) -> bool:
    return not comprehension_violations(doctrine, a, alpha, u)


def find_comprehension(doctrine: Doctrine, a: str, alpha: str) -> str | None:
    """The chosen comprehension when recorded, else the first found in
    deterministic (sorted morphism id) order, else None."""
    doctrine.fiber(a)._require(alpha)
    chosen = doctrine.comprehensions.get((a, alpha))
    if chosen is not None:
        return chosen
    base = doctrine.base
    candidates = sorted(m for x in base.objects for m in base.hom(x, a))
    for u in candidates:
        if is_comprehension(doctrine, a, alpha, u):
            return u
    return None


def factors_through(base: FragmentCategory, f: str, g: str) -> bool:
    """Whether f = g . h for some h."""
    if base.dst(f) != base.dst(g):
        return False
    return any(
        base.compose(g, h) == f for h in base.hom(base.src(f), base.src(g))
    )


def check_full_comprehensions(doctrine: Doctrine) -> VerificationReport:
    """Every chosen comprehension satisfies its universal property, and the
    factorisation preorder of choices agrees with the fiber order."""
    report = VerificationReport(title=f"full comprehensions {doctrine.name}")
    base = doctrine.base
    for a in base.objects:
        fa = doctrine.fiber(a)
        for alpha in fa.elements:
            if (a, alpha) not in doctrine.comprehensions:
                raise StructureMissingError(
                    f"{doctrine.name}: no chosen comprehension for element "
                    f"{alpha!r} of {a!r}"
                )
        for alpha in fa.elements:
            u = doctrine.comprehensions[(a, alpha)]
            for kind, *rest in comprehension_violations(doctrine, a, alpha, u):
                report.fail(
                    f"comprehension/{kind}",
                    [a, alpha, u, *map(str, rest)],
                )
            report.add_pass("comprehension/universal")
        for alpha in fa.elements:
            for beta in fa.elements:
                u, v = doctrine.comprehensions[(a, alpha)], doctrine.comprehensions[(a, beta)]
                fac = factors_through(base, u, v)
                if fac and not fa.leq(alpha, beta):
                    report.fail("comprehension/fullness", [a, alpha, beta])
                elif fa.leq(alpha, beta) and not fac:
                    report.fail("comprehension/order-embedding", [a, alpha, beta])
                else:
                    report.add_pass("comprehension/fullness")
    return report.finalize()


def check_comprehensive_diagonals(doctrine: Doctrine) -> VerificationReport:
    """For each object with a declared square, the diagonal is a comprehension
    of the equality predicate."""
    report = VerificationReport(title=f"comprehensive diagonals {doctrine.name}")
    base = doctrine.base
    for a in base.objects:
        sq = doctrine.square(a)
        if sq is None:
            continue
        if a not in doctrine.delta:
            raise StructureMissingError(
                f"{doctrine.name}: object {a!r} has a declared square but no equality predicate"
            )
        diag = diagonal(base, a)
        bad = comprehension_violations(doctrine, sq.obj, doctrine.delta[a], diag)
        for kind, *rest in bad:
            report.fail(
                "diagonal/comprehension",
                [a, *map(str, rest)],
                f"diagonal fails the {kind} clause",
            )
        if not bad:
            report.add_pass("diagonal/comprehension")
    return report.finalize()


# -- equivalence relations, quotients, descent -------------------------------


def equivalence_relation_checks(
    doctrine: Doctrine, a: str, rho: str, report: VerificationReport
) -> bool:
    """Reflexivity, symmetry and (fragment permitting) transitivity of ``rho``."""
    base = doctrine.base
    sq = doctrine.square(a)
    if sq is None or a not in doctrine.delta:
        raise FragmentIncompleteError(
            f"{doctrine.name}: relations on {a!r} need a declared square and equality"
        )
    faa = doctrine.fiber(sq.obj)
    ok = True
    if not faa.leq(doctrine.delta[a], rho):
        report.fail("relation/reflexive", [a, rho])
        ok = False
    swap = pairing(base, sq.pr2, sq.pr1)
    if not faa.leq(rho, doctrine.reindex_apply(swap, rho)):
        report.fail("relation/symmetric", [a, rho])
        ok = False
    prod_t = base.product(sq.obj, a)
    if prod_t is None:
        report.skip(
            "relation/transitive",
            f"triple product for {a!r} not declared in the fragment",
            [a, rho],
        )
        return ok
    t = prod_t.obj
    ft = doctrine.fiber(t)
    m12 = prod_t.pr1
    m23 = pairing(base, base.compose(sq.pr2, prod_t.pr1), prod_t.pr2)
    m13 = pairing(base, base.compose(sq.pr1, prod_t.pr1), prod_t.pr2)
    lhs = ft.meet(doctrine.reindex_apply(m12, rho), doctrine.reindex_apply(m23, rho))
    if not ft.leq(lhs, doctrine.reindex_apply(m13, rho)):
        report.fail("relation/transitive", [a, rho])
        ok = False
    else:
        report.add_pass("relation/transitive")
    return ok


def is_equivalence_relation(doctrine: Doctrine, a: str, rho: str) -> bool:
    return equivalence_relation_checks(doctrine, a, rho, VerificationReport())


def equivalence_relations(doctrine: Doctrine, a: str) -> list[str]:
    """All equivalence relations on ``a`` present in the fragment, in fiber order."""
    sq = doctrine.square(a)
    if sq is None or a not in doctrine.delta:
        return []
    return [
        rho
        for rho in doctrine.fiber(sq.obj).elements
        if is_equivalence_relation(doctrine, a, rho)
    ]


def kernel(doctrine: Doctrine, f: str) -> str:
    """The kernel relation of ``f``: equality of the codomain pulled back along f x f."""
    base = doctrine.base
    a, b = base.src(f), base.dst(f)
    if doctrine.square(a) is None or doctrine.square(b) is None:
        raise FragmentIncompleteError(
            f"{doctrine.name}: kernel of {f!r} needs both squares declared"
        )
    if b not in doctrine.delta:
        raise StructureMissingError(f"{doctrine.name}: no equality predicate on {b!r}")
    ff = product_map(base, f, f)
    return doctrine.reindex_apply(ff, doctrine.delta[b])


def descent_data(doctrine: Doctrine, a: str, rho: str) -> InfSemilattice:
    """Sub-semilattice of predicates on ``a`` compatible with ``rho``."""
    sq = doctrine.square(a)
    if sq is None:
        raise FragmentIncompleteError(f"{doctrine.name}: no square declared for {a!r}")
    fa = doctrine.fiber(a)
    faa = doctrine.fiber(sq.obj)
    pr1_map = doctrine.reindex(sq.pr1)
    pr2_map = doctrine.reindex(sq.pr2)
    members = [
        alpha
        for alpha in fa.elements
        if faa.leq(faa.meet(pr1_map.apply(alpha), rho), pr2_map.apply(alpha))
    ]
    try:
        return fa.restrict(members, fa.top, name=f"Des({a},{rho})")
    except IntegrityError as exc:
        raise InternalConsistencyError(
            f"{doctrine.name}: descent data of ({a!r}, {rho!r}) is not a sub-semilattice: {exc}"
        )


def quotient_violations(
    doctrine: Doctrine, a: str, rho: str, q: str, report: VerificationReport | None = None
) -> list[tuple]:
    """Why ``q`` fails to be a quotient of ``rho``; empty when it is one.

    Universality is quantified over targets whose kernel data exists in the
    fragment; other targets are recorded as skips on ``report``.
    """
    base = doctrine.base
    if base.src(q) != a:
        return [("typing", q)]
    c = base.dst(q)
    if doctrine.square(c) is None or c not in doctrine.delta:
        return [("kernel-unavailable", c)]
    bad: list[tuple] = []
    faa = doctrine.fiber(doctrine.square(a).obj)
    if not faa.leq(rho, kernel(doctrine, q)):
        bad.append(("coequalises", q))
    for z in base.objects:
        if doctrine.square(z) is None or z not in doctrine.delta:
            if report is not None and base.hom(a, z):
                report.skip(
                    "quotient/universal",
                    f"kernel data for target {z!r} unavailable in the fragment",
                    [a, rho, q, z],
                )
            continue
        table: dict[str, int] = {}
        for g in base.hom(c, z):
            gq = base.compose(g, q)
            table[gq] = table.get(gq, 0) + 1
        for f in base.hom(a, z):
            if not faa.leq(rho, kernel(doctrine, f)):
                continue
            if table.get(f, 0) != 1:
                bad.append(("factorisation", f, table.get(f, 0)))
    return bad


def is_quotient(doctrine: Doctrine, a: str, rho: str, q: str) -> bool:
    return not quotient_violations(doctrine, a, rho, q)


def find_quotient(doctrine: Doctrine, a: str, rho: str) -> str | None:
    """Chosen quotient when recorded, else deterministic search, else None."""
    chosen = doctrine.quotients.get((a, rho))
    if chosen is not None:
        return chosen
    base = doctrine.base
    for q in sorted(m for z in base.objects for m in base.hom(a, z)):
        if is_quotient(doctrine, a, rho, q):
            return q
    return None


def _pullback_squares(base: FragmentCategory, q: str, f: str):
    """All fragment pullbacks of ``q`` along ``f`` (same codomain), by search.

    A candidate cone (A', f', q') must commute and induce, for every probe
    object X, a bijection between hom(X, A') and commuting pairs; the
    counting test prunes before the full mediator check.
    """
    a, c = base.src(q), base.dst(q)
    cprime = base.src(f)
    pairs_by_probe = {}
    for x in base.objects:
        pairs = [
            (u, v)
            for u in base.hom(x, a)
            for v in base.hom(x, cprime)
            if base.compose(q, u) == base.compose(f, v)
        ]
        pairs_by_probe[x] = pairs
    found = []
    for aprime in base.objects:
        if any(len(base.hom(x, aprime)) != len(pairs_by_probe[x]) for x in base.objects):
            continue
        for fprime in base.hom(aprime, a):
            qf = base.compose(q, fprime)
            for qprime in base.hom(aprime, cprime):
                if base.compose(f, qprime) != qf:
                    continue
                ok = True
                for x in base.objects:
                    seen: dict[tuple[str, str], int] = {}
                    for w in base.hom(x, aprime):
                        key = (base.compose(fprime, w), base.compose(qprime, w))
                        seen[key] = seen.get(key, 0) + 1
                    if any(seen.get(p, 0) != 1 for p in pairs_by_probe[x]):
                        ok = False
                    elif sum(seen.values()) != len(pairs_by_probe[x]):
                        ok = False
                    if not ok:
                        break
                if ok:
                    found.append((aprime, fprime, qprime))
    return found


def check_quotient_properties(doctrine: Doctrine) -> VerificationReport:
    """Chosen quotients are quotients, effective, of effective descent, and
    stable along every pullback square present in the fragment."""
    report = VerificationReport(title=f"quotients {doctrine.name}")
    base = doctrine.base
    for a in base.objects:
        if doctrine.square(a) is None or a not in doctrine.delta:
            continue
        for rho in equivalence_relations(doctrine, a):
            q = doctrine.quotients.get((a, rho))
            if q is None:
                raise StructureMissingError(
                    f"{doctrine.name}: no chosen quotient for relation {rho!r} on {a!r}"
                )
            for kind, *rest in quotient_violations(doctrine, a, rho, q, report):
                report.fail(f"quotient/{kind}", [a, rho, q, *map(str, rest)])
            report.add_pass("quotient/universal")
            c = base.dst(q)
            if doctrine.square(c) is not None and c in doctrine.delta:
                if kernel(doctrine, q) != rho:
                    report.fail(
                        "quotient/effective",
                        [a, rho, q],
                        f"kernel is {kernel(doctrine, q)!r}",
                    )
                else:
                    report.add_pass("quotient/effective")
            des = descent_data(doctrine, a, rho)
            fc = doctrine.fiber(c)
            qmap = doctrine.reindex(q)
            images = {x: qmap.apply(x) for x in fc.elements}
            outside = [x for x, y in images.items() if not des.has(y)]
            if outside:
                report.fail(
                    "quotient/descent-image",
                    [a, rho, q, outside[0]],
                    "reindexing along the quotient leaves descent data",
                )
                continue
            restricted = MeetMap(fc, des, images)
            inv = find_inverse(restricted)
            if inv is None:
                report.fail(
                    "quotient/effective-descent",
                    [a, rho, q],
                    "no two-sided inverse onto descent data",
                )
            else:
                report.add_pass("quotient/effective-descent")
            for f in sorted(m for z in base.objects for m in base.hom(z, c)):
                for aprime, fprime, qprime in _pullback_squares(base, q, f):
                    cp = base.dst(qprime)
                    if (
                        doctrine.square(aprime) is None
                        or aprime not in doctrine.delta
                        or doctrine.square(cp) is None
                        or cp not in doctrine.delta
                    ):
                        report.skip(
                            "quotient/stable",
                            "kernel data for the pulled-back morphism unavailable",
                            [a, rho, q, f, qprime],
                        )
                        continue
                    k = kernel(doctrine, qprime)
                    if quotient_violations(doctrine, aprime, k, qprime):
                        report.fail("quotient/stable", [a, rho, q, f, qprime])
                    else:
                        report.add_pass("quotient/stable")
    return report.finalize()


# -- 1-cells and 2-cells -----------------------------------------------------


@dataclass(eq=False)
class DoctrineMap:
    """1-cell of doctrines: product-preserving base functor plus fiber maps."""

    name: str
    source: Doctrine
    target: Doctrine
    functor: Functor
    fiber_maps: Mapping[str, MeetMap]

    def on_object(self, obj: str) -> str:
        return self.functor.object_map[obj]

    def on_morphism(self, m: str) -> str:
        return self.functor.morphism_map[m]

    def on_element(self, obj: str, x: str) -> str:
        return self.fiber_maps[obj].apply(x)

    def __repr__(self) -> str:
        return f"DoctrineMap({self.name})"


def identity_cell(doctrine: Doctrine) -> DoctrineMap:
    return DoctrineMap(
        f"id_{doctrine.name}",
        doctrine,
        doctrine,
        fincat.identity_functor(doctrine.base),
        {o: identity_map(doctrine.fiber(o)) for o in doctrine.base.objects},
    )


def compose_cells(outer: DoctrineMap, inner: DoctrineMap) -> DoctrineMap:
    """outer after inner."""
    functor = fincat.compose_functors(outer.functor, inner.functor)
    fiber_maps = {}
    for obj in inner.source.base.objects:
        mid = inner.on_object(obj)
        fiber_maps[obj] = inner.fiber_maps[obj].then(outer.fiber_maps[mid])
    return DoctrineMap(
        f"{outer.name}.{inner.name}", inner.source, outer.target, functor, fiber_maps
    )


def cells_equal(c1: DoctrineMap, c2: DoctrineMap) -> tuple[bool, str]:
    """Strict componentwise equality; returns (equal, witness-or-empty)."""
    base = c1.source.base
    for obj in base.objects:
        if c1.on_object(obj) != c2.on_object(obj):
            return False, f"object {obj!r}: {c1.on_object(obj)!r} != {c2.on_object(obj)!r}"
    for m in base.morphisms():
        if c1.on_morphism(m) != c2.on_morphism(m):
            return False, f"morphism {m!r}: {c1.on_morphism(m)!r} != {c2.on_morphism(m)!r}"
    for obj in base.objects:
        for x in c1.source.fiber(obj).elements:
            if c1.on_element(obj, x) != c2.on_element(obj, x):
                return False, f"element {x!r} of {obj!r}"
    return True, ""


def is_invertible_cell(cell: DoctrineMap) -> DoctrineMap | None:
    """Two-sided inverse of a 1-cell, or None; inverses are searched, not assumed."""
    src, tgt = cell.source, cell.target
    obj_inv: dict[str, str] = {}
    for obj in src.base.objects:
        fo = cell.on_object(obj)
        if fo in obj_inv:
            return None
        obj_inv[fo] = obj
    if set(obj_inv) != set(tgt.base.objects):
        return None
    mor_inv: dict[str, str] = {}
    for m in src.base.morphisms():
        fm = cell.on_morphism(m)
        if fm in mor_inv and mor_inv[fm] != m:
            return None
        mor_inv[fm] = m
    if set(mor_inv) != set(tgt.base.morphisms()):
        return None
    fiber_inv = {}
    for obj in tgt.base.objects:
        inv = find_inverse(cell.fiber_maps[obj_inv[obj]])
        if inv is None:
            return None
        fiber_inv[obj] = inv
    functor = Functor(
        tgt.base,
        src.base,
        {o: obj_inv[o] for o in tgt.base.objects},
        {m: mor_inv[m] for m in tgt.base.morphisms()},
    )
    return DoctrineMap(f"{cell.name}^-1", tgt, src, functor, fiber_inv)


def verify_cell1(cell: DoctrineMap, *, functor_laws: bool = True) -> VerificationReport:
    """All 1-cell invariants: functor laws, naturality of the fiber maps,
    meet/top preservation, and compatibility with fibered equalities."""
    report = VerificationReport(title=f"1-cell {cell.name}")
    src, tgt = cell.source, cell.target
    if functor_laws:
        report.extend(fincat.verify_functor(cell.functor))
        if report.failures:
            return report.finalize()
    for obj in src.base.objects:
        report.extend(verify_meet_map(cell.fiber_maps[obj]))
    for m in src.base.morphisms():
        a, b = src.base.src(m), src.base.dst(m)
        fm = cell.on_morphism(m)
        lhs = src.reindex(m).then(cell.fiber_maps[a])
        rhs = cell.fiber_maps[b].then(tgt.reindex(fm))
        for x in src.fiber(b).elements:
            if lhs.apply(x) != rhs.apply(x):
                report.fail("cell/naturality", [m, x])
                break
        else:
            report.add_pass("cell/naturality")
    for a in src.base.objects:
        sq = src.square(a)
        if sq is None or a not in src.delta:
            continue
        fa = cell.on_object(a)
        tsq = tgt.square(fa)
        if tsq is None or fa not in tgt.delta:
            report.skip(
                "cell/preserves-equality",
                f"equality data for image object {fa!r} unavailable in the target fragment",
                [a],
            )
            continue
        comp, _ = cell.functor.comparison(a, a)
        lhs = cell.fiber_maps[sq.obj].apply(src.delta[a])
        rhs = tgt.reindex_apply(comp, tgt.delta[fa])
        if lhs != rhs:
            report.fail("cell/preserves-equality", [a], f"{lhs!r} != {rhs!r}")
        else:
            report.add_pass("cell/preserves-equality")
    return report.finalize()


@dataclass(eq=False)
class DoctrineCell:
    """2-cell between parallel 1-cells: a natural family of base morphisms."""

    name: str
    source_map: DoctrineMap
    target_map: DoctrineMap
    components: Mapping[str, str]

    def at(self, obj: str) -> str:
        return self.components[obj]


def identity_2cell(cell: DoctrineMap) -> DoctrineCell:
    tgt = cell.target.base
    return DoctrineCell(
        f"id2_{cell.name}",
        cell,
        cell,
        {o: tgt.identity(cell.on_object(o)) for o in cell.source.base.objects},
    )


def verify_cell2(cell2: DoctrineCell) -> VerificationReport:
    """Naturality of the component family plus the fiber comparison inequality."""
    report = VerificationReport(title=f"2-cell {cell2.name}")
    f_map, g_map = cell2.source_map, cell2.target_map
    nat = NatTransf(f_map.functor, g_map.functor, cell2.components)
    report.extend(fincat.verify_nat(nat))
    if report.failures:
        return report.finalize()
    tgt = f_map.target
    for obj in f_map.source.base.objects:
        theta = cell2.components[obj]
        rmap = tgt.reindex(theta)
        ffa = tgt.fiber(f_map.on_object(obj))
        for x in f_map.source.fiber(obj).elements:
            if not ffa.leq(f_map.on_element(obj, x), rmap.apply(g_map.on_element(obj, x))):
                report.fail("cell2/comparison", [obj, x])
            else:
                report.add_pass("cell2/comparison")
    return report.finalize()


# -- whole-doctrine verification and deterministic choices --------------------


def verify_doctrine(doctrine: Doctrine, *, include_category: bool = True) -> VerificationReport:
    """Structural invariants: base laws, fiber axioms, functoriality of
    reindexing, typing of declared structure."""
    report = VerificationReport(title=f"doctrine {doctrine.name}")
    base = doctrine.base
    if include_category:
        report.extend(fincat.verify_category(base))
        report.extend(fincat.verify_product_fragment(base))
    for obj in base.objects:
        report.extend(verify_semilattice(doctrine.fiber(obj)))
    mors = base.morphisms()
    for m in mors:
        rm = doctrine.reindex(m)
        if rm.source is not doctrine.fiber(base.dst(m)) and rm.source != doctrine.fiber(base.dst(m)):
            report.fail("reindex/typing", [m], "source fiber mismatch")
            continue
        report.extend(verify_meet_map(rm))
    for obj in base.objects:
        rid = doctrine.reindex(base.identity(obj))
        for x in doctrine.fiber(obj).elements:
            if rid.apply(x) != x:
                report.fail("reindex/identity", [obj, x])
                break
        else:
            report.add_pass("reindex/identity")
    by_src: dict[str, list[str]] = {}
    for m in mors:
        by_src.setdefault(base.src(m), []).append(m)
    n = 0
    for f in mors:
        rf = doctrine.reindex(f)
        for g in by_src.get(base.dst(f), ()):
            gf = base.compose(g, f)
            lhs = doctrine.reindex(gf)
            rg = doctrine.reindex(g)
            for x in doctrine.fiber(base.dst(g)).elements:
                if lhs.apply(x) != rf.apply(rg.apply(x)):
                    report.fail("reindex/functorial", [g, f, x])
                    break
            n += 1
    report.add_pass("reindex/functorial", n)
    for a, d in sorted(doctrine.delta.items()):
        sq = doctrine.square(a)
        if sq is None:
            report.fail("delta/typing", [a], "equality declared without a square")
        elif not doctrine.fiber(sq.obj).has(d):
            report.fail("delta/typing", [a, d], "equality not in the square fiber")
        else:
            report.add_pass("delta/typing")
    for (a, alpha), m in sorted(doctrine.comprehensions.items()):
        if not base.has_morphism(m) or base.dst(m) != a or not doctrine.fiber(a).has(alpha):
            report.fail("comprehension/typing", [a, alpha, m])
        else:
            report.add_pass("comprehension/typing")
    for (a, rho), q in sorted(doctrine.quotients.items()):
        sq = doctrine.square(a)
        if (
            sq is None
            or not doctrine.fiber(sq.obj).has(rho)
            or not base.has_morphism(q)
            or base.src(q) != a
        ):
            report.fail("quotient/typing", [a, rho, q])
        else:
            report.add_pass("quotient/typing")
    return report.finalize()


def choose_comprehensions(doctrine: Doctrine) -> Doctrine:
    """Materialise a deterministic comprehension choice by search.

    The engine never silently chooses during other operations; this is the
    one explicit way to obtain a choice when the structure merely exists.
    """
    chosen = dict(doctrine.comprehensions)
    for a in doctrine.base.objects:
        for alpha in doctrine.fiber(a).elements:
            if (a, alpha) in chosen:
                continue
            u = find_comprehension(doctrine, a, alpha)
            if u is None:
                raise StructureMissingError(
                    f"{doctrine.name}: element {alpha!r} of {a!r} has no comprehension "
                    "in the fragment"
                )
            chosen[(a, alpha)] = u
    return doctrine.with_structure(comprehensions=chosen)


def choose_quotients(doctrine: Doctrine) -> Doctrine:
    """Materialise a deterministic quotient choice by search."""
    chosen = dict(doctrine.quotients)
    for a in doctrine.base.objects:
        if doctrine.square(a) is None or a not in doctrine.delta:
            continue
        for rho in equivalence_relations(doctrine, a):
            if (a, rho) in chosen:
                continue
            q = find_quotient(doctrine, a, rho)
            if q is None:
                raise StructureMissingError(
                    f"{doctrine.name}: relation {rho!r} on {a!r} has no quotient in the fragment"
                )
            chosen[(a, rho)] = q
    return doctrine.with_structure(quotients=chosen)
