"""The three free constructions: comprehensions, extensional collapse, quotients.

Each builder returns the completed doctrine together with its unit and an
origin index back to the generators.  Categories of completed doctrines
delegate composition to the input category, so iterated completions stay
cheap to build; morphism universes materialise lazily.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from doctrina.doctrine import (
    Doctrine,
    DoctrineCell,
    DoctrineMap,
    compose_cells,
    descent_data,
    equivalence_relation_checks,
)
from doctrina.errors import (
    InternalConsistencyError,
    PreconditionError,
    StructureMissingError,
)
from doctrina.fincat import (
    DerivedCategory,
    Functor,
    LazyMap,
    Product,
    pairing,
    product_map,
)
from doctrina.lattice import MeetMap, find_inverse
from doctrina.report import VerificationReport


def pair_obj(obj: str, elt: str) -> str:
    return f"({obj}|{elt})"


@dataclass
class CompletionOutput:
    """A completed doctrine, its unit, and the way back to the generators."""

    kind: str
    doctrine: Doctrine
    unit: DoctrineMap | None
    origin_objects: dict[str, str]
    decorations: dict[str, str] = field(default_factory=dict)
    notes: VerificationReport = field(default_factory=VerificationReport)

    def origin_morphism(self, m: str):
        cat = self.doctrine.base
        if cat.mode == DerivedCategory.PAIR:
            return cat.under[m]
        return cat.members[m]


def _require_delta_on_squares(doctrine: Doctrine, context: str) -> None:
    for a in doctrine.base.objects:
        if doctrine.square(a) is not None and a not in doctrine.delta:
            raise PreconditionError(
                f"{context}: input is not elementary on its fragment "
                f"(object {a!r} has a square but no equality predicate)"
            )


# -- comprehension completion -------------------------------------------------


def comp_completion(doctrine: Doctrine, name: str | None = None) -> CompletionOutput:
    """Freely add full comprehensions.

    Objects are predicate-decorated objects, morphisms are base morphisms
    under which the source predicate restricts to the target one, fibers are
    downsets, and the comprehension of a smaller predicate is the identity
    viewed as a decorated morphism.
    """
    _require_delta_on_squares(doctrine, "comprehension completion")
    base = doctrine.base
    out_name = name or f"c({doctrine.name})"
    objects: list[str] = []
    origin: dict[str, str] = {}
    elt_of: dict[str, str] = {}
    for a in base.objects:
        for alpha in doctrine.fiber(a).elements:
            obj = pair_obj(a, alpha)
            objects.append(obj)
            origin[obj] = a
            elt_of[obj] = alpha

    def hom_filter(aobj: str, bobj: str, u: str) -> bool:
        beta = elt_of[bobj]
        return doctrine.fiber(origin[aobj]).leq(
            elt_of[aobj], doctrine.reindex_apply(u, beta)
        )

    cat = DerivedCategory(
        out_name + "-base",
        base,
        objects,
        {},
        None,
        mode=DerivedCategory.PAIR,
        obj_origin=origin,
        hom_filter=hom_filter,
    )

    fibers = {obj: doctrine.fiber(origin[obj]).downset(elt_of[obj]) for obj in objects}

    for aobj in objects:
        for bobj in objects:
            a, b = origin[aobj], origin[bobj]
            prod = base.product(a, b)
            if prod is None:
                continue
            boxed = doctrine.fiber(prod.obj).meet(
                doctrine.reindex_apply(prod.pr1, elt_of[aobj]),
                doctrine.reindex_apply(prod.pr2, elt_of[bobj]),
            )
            pobj = pair_obj(prod.obj, boxed)
            cat.products[(aobj, bobj)] = Product(
                pobj,
                cat._register_pair(prod.pr1, pobj, aobj),
                cat._register_pair(prod.pr2, pobj, bobj),
            )
    if base.terminal is not None:
        cat.terminal = pair_obj(base.terminal, doctrine.top(base.terminal))

    def provider(m: str) -> MeetMap:
        aobj, bobj = cat.src(m), cat.dst(m)
        u = cat.under[m]
        alpha = elt_of[aobj]
        fa = doctrine.fiber(origin[aobj])
        umap = doctrine.reindex(u)
        return MeetMap(
            fibers[bobj],
            fibers[aobj],
            {g: fa.meet(umap.apply(g), alpha) for g in fibers[bobj].elements},
        )

    delta = {}
    for obj in objects:
        sq = cat.products.get((obj, obj))
        if sq is None:
            continue
        a = origin[obj]
        boxed = elt_of[sq.obj]
        delta[obj] = doctrine.fiber(base.product(a, a).obj).meet(
            doctrine.delta[a], boxed
        )
    comprehensions = {}
    for bobj in objects:
        b = origin[bobj]
        ident = base.identity(b)
        for gamma in fibers[bobj].elements:
            comprehensions[(bobj, gamma)] = cat._register_pair(
                ident, pair_obj(b, gamma), bobj
            )

    completed = Doctrine(
        out_name,
        cat,
        fibers,
        provider,
        delta,
        comprehensions,
        {},
        provenance={"completion": "c", "input": doctrine.name},
    )

    unit_obj = {a: pair_obj(a, doctrine.top(a)) for a in base.objects}
    unit_mor = LazyMap(
        lambda m: cat._register_pair(m, unit_obj[base.src(m)], unit_obj[base.dst(m)])
    )
    unit_fibers = {
        a: MeetMap(
            doctrine.fiber(a),
            fibers[unit_obj[a]],
            {x: x for x in doctrine.fiber(a).elements},
        )
        for a in base.objects
    }
    unit = DoctrineMap(
        f"unit_c({doctrine.name})",
        doctrine,
        completed,
        Functor(base, cat, unit_obj, unit_mor),
        unit_fibers,
    )
    return CompletionOutput("c", completed, unit, origin, dict(elt_of))


def counit_c(doctrine: Doctrine, completion: CompletionOutput | None = None) -> DoctrineMap:
    """Evaluation at comprehension domains; needs a total choice of comprehensions."""
    for a in doctrine.base.objects:
        for alpha in doctrine.fiber(a).elements:
            if (a, alpha) not in doctrine.comprehensions:
                raise StructureMissingError(
                    f"{doctrine.name}: no chosen comprehension for {alpha!r} on {a!r}"
                )
    completion = completion or comp_completion(doctrine)
    gp = completion.doctrine
    cat = gp.base
    base = doctrine.base

    def _decorated_elt(obj: str) -> str:
        return completion.decorations[obj]

    def dom_of(obj: str) -> str:
        a = completion.origin_objects[obj]
        return base.src(doctrine.comprehensions[(a, _decorated_elt(obj))])

    obj_map = {obj: dom_of(obj) for obj in cat.objects}

    def resolve(m: str) -> str:
        aobj, bobj = cat.src(m), cat.dst(m)
        u = cat.under[m]
        ma = doctrine.comprehensions[(completion.origin_objects[aobj], _decorated_elt(aobj))]
        mb = doctrine.comprehensions[(completion.origin_objects[bobj], _decorated_elt(bobj))]
        want = base.compose(u, ma)
        found = [
            g
            for g in base.hom(base.src(ma), base.src(mb))
            if base.compose(mb, g) == want
        ]
        if len(found) != 1:
            raise InternalConsistencyError(
                f"{doctrine.name}: comprehension image of {m!r} has "
                f"{len(found)} mediating factorisations"
            )
        return found[0]

    fiber_maps = {}
    for obj in cat.objects:
        a = completion.origin_objects[obj]
        ma = doctrine.comprehensions[(a, _decorated_elt(obj))]
        rmap = doctrine.reindex(ma)
        fiber_maps[obj] = MeetMap(
            gp.fiber(obj),
            doctrine.fiber(base.src(ma)),
            {g: rmap.apply(g) for g in gp.fiber(obj).elements},
        )
    return DoctrineMap(
        f"counit_c({doctrine.name})",
        gp,
        doctrine,
        Functor(cat, base, obj_map, LazyMap(resolve)),
        fiber_maps,
    )


def lift1_c(
    cell: DoctrineMap, src_comp: CompletionOutput, tgt_comp: CompletionOutput
) -> DoctrineMap:
    """Image of a 1-cell under the comprehension completion."""
    src_cat = src_comp.doctrine.base
    tgt_cat = tgt_comp.doctrine.base

    def lifted_obj(obj: str) -> str:
        a = src_comp.origin_objects[obj]
        alpha = src_comp.doctrine.fiber(obj).top
        return pair_obj(cell.on_object(a), cell.on_element(a, alpha))

    obj_map = {obj: lifted_obj(obj) for obj in src_cat.objects}

    def resolve(m: str) -> str:
        return tgt_cat._register_pair(
            cell.on_morphism(src_cat.under[m]),
            obj_map[src_cat.src(m)],
            obj_map[src_cat.dst(m)],
        )

    fiber_maps = {}
    for obj in src_cat.objects:
        a = src_comp.origin_objects[obj]
        fo = obj_map[obj]
        fiber_maps[obj] = MeetMap(
            src_comp.doctrine.fiber(obj),
            tgt_comp.doctrine.fiber(fo),
            {g: cell.on_element(a, g) for g in src_comp.doctrine.fiber(obj).elements},
        )
    return DoctrineMap(
        f"c[{cell.name}]",
        src_comp.doctrine,
        tgt_comp.doctrine,
        Functor(src_cat, tgt_cat, obj_map, LazyMap(resolve)),
        fiber_maps,
    )


def lift2_c(
    theta: DoctrineCell, src_comp: CompletionOutput, tgt_comp: CompletionOutput
) -> DoctrineCell:
    lifted_f = lift1_c(theta.source_map, src_comp, tgt_comp)
    lifted_g = lift1_c(theta.target_map, src_comp, tgt_comp)
    tgt_cat = tgt_comp.doctrine.base
    components = {}
    for obj in src_comp.doctrine.base.objects:
        a = src_comp.origin_objects[obj]
        components[obj] = tgt_cat._register_pair(
            theta.at(a), lifted_f.on_object(obj), lifted_g.on_object(obj)
        )
    return DoctrineCell(f"c[{theta.name}]", lifted_f, lifted_g, components)


# -- extensional collapse -----------------------------------------------------


def ext_collapse(doctrine: Doctrine, name: str | None = None) -> CompletionOutput:
    """Freely add comprehensive diagonals by quotienting hom-sets.

    Parallel morphisms are identified when the source equality restricts to
    the target equality along their pairing.  On a fragment the tested
    identifications need not be composition-compatible, so the quotient is
    taken by the congruence they generate; afterwards every testable pair in
    one class is re-checked, reindexing must be class-invariant, and each
    declared product (and the terminal) keeps its universal property in the
    quotient or is dropped with a note.
    """
    _require_delta_on_squares(doctrine, "extensional collapse")
    base = doctrine.base
    out_name = name or f"d({doctrine.name})"
    notes = VerificationReport(title=f"{out_name} construction")

    mors = base.morphisms()
    parent = {m: m for m in mors}

    def find(m: str) -> str:
        root = m
        while parent[root] != root:
            root = parent[root]
        while parent[m] != root:
            parent[m], m = root, parent[m]
        return root

    def union(a: str, b: str) -> bool:
        ra, rb = find(a), find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        parent[rb] = ra
        return True

    def testable(a: str, b: str) -> bool:
        return (
            doctrine.square(a) is not None
            and doctrine.square(b) is not None
            and a in doctrine.delta
            and b in doctrine.delta
        )

    def identified(f: str, g: str) -> bool:
        a, b = base.src(f), base.dst(f)
        sq = doctrine.square(a)
        fg = pairing(base, base.compose(f, sq.pr1), base.compose(g, sq.pr2))
        return doctrine.fiber(sq.obj).leq(
            doctrine.delta[a], doctrine.reindex_apply(fg, doctrine.delta[b])
        )

    for a in base.objects:
        for b in base.objects:
            fs = base.hom(a, b)
            if not fs:
                continue
            if not testable(a, b):
                if len(fs) > 1:
                    notes.skip(
                        "collapse/identification",
                        "equality data unavailable; only composition-forced "
                        "identifications apply",
                        [a, b],
                    )
                continue
            rel = {(f, g): identified(f, g) for f in fs for g in fs}
            for f in fs:
                if not rel[(f, f)]:
                    raise InternalConsistencyError(
                        f"{out_name}: identification is not reflexive at {f!r}"
                    )
                for g in fs:
                    if rel[(f, g)] != rel[(g, f)]:
                        raise InternalConsistencyError(
                            f"{out_name}: identification not symmetric at ({f!r}, {g!r})"
                        )
                    if rel[(f, g)]:
                        union(f, g)
                        for h in fs:
                            if rel[(g, h)] and not rel[(f, h)]:
                                raise InternalConsistencyError(
                                    f"{out_name}: identification not transitive at "
                                    f"({f!r}, {g!r}, {h!r})"
                                )

    # close under composition
    by_src: dict[str, list[str]] = {}
    for m in mors:
        by_src.setdefault(base.src(m), []).append(m)
    changed = True
    while changed:
        changed = False
        table: dict[tuple[str, str], str] = {}
        for f in mors:
            rf = find(f)
            for g in by_src.get(base.dst(f), ()):
                key = (find(g), rf)
                c = base.compose(g, f)
                prior = table.get(key)
                if prior is None:
                    table[key] = c
                elif union(prior, c):
                    changed = True

    classes_by_root: dict[str, list[str]] = {}
    for m in mors:
        classes_by_root.setdefault(find(m), []).append(m)
    members: dict[str, tuple[str, ...]] = {}
    records: dict[str, tuple[str, str]] = {}
    class_of: dict[str, str] = {}
    for root, ms in classes_by_root.items():
        ms.sort()
        cid = f"[{ms[0]}]"
        members[cid] = tuple(ms)
        records[cid] = (base.src(ms[0]), base.dst(ms[0]))
        for m in ms:
            if base.src(m) != records[cid][0] or base.dst(m) != records[cid][1]:
                raise InternalConsistencyError(
                    f"{out_name}: congruence merged non-parallel morphisms {ms[0]!r}, {m!r}"
                )
            class_of[m] = cid

    # closure must not contradict the tested relation
    for cid, ms in members.items():
        a, b = records[cid]
        if testable(a, b):
            first = ms[0]
            for other in ms[1:]:
                if not identified(first, other):
                    raise InternalConsistencyError(
                        f"{out_name}: composition closure merged {first!r} and {other!r} "
                        "although the fragment separates them"
                    )
    # reindexing must be class-invariant
    for cid, ms in members.items():
        first = doctrine.reindex(ms[0])
        for other in ms[1:]:
            omap = doctrine.reindex(other)
            if any(first.apply(x) != omap.apply(x) for x in first.source.elements):
                raise InternalConsistencyError(
                    f"{out_name}: identified morphisms {ms[0]!r} and {other!r} reindex differently"
                )

    cat = DerivedCategory(
        out_name + "-base",
        base,
        base.objects,
        {},
        None,
        mode=DerivedCategory.CLASSES,
        members=members,
        records=records,
    )

    # keep only products whose universal property survives the quotient
    for (a, b), prod in sorted(base.products.items()):
        ok = True
        p1, p2 = class_of[prod.pr1], class_of[prod.pr2]
        for x in base.objects:
            seen: dict[tuple[str, str], int] = {}
            for h in cat.hom(x, prod.obj):
                key = (cat.compose(p1, h), cat.compose(p2, h))
                seen[key] = seen.get(key, 0) + 1
            cones = {
                (f, g) for f in cat.hom(x, a) for g in cat.hom(x, b)
            }
            if any(seen.get(c, 0) != 1 for c in cones) or sum(seen.values()) != len(cones):
                ok = False
                break
        if ok:
            cat.products[(a, b)] = Product(prod.obj, p1, p2)
        else:
            notes.skip(
                "collapse/products",
                f"product ({a!r}, {b!r}) loses its universal property in the quotient",
                [a, b],
            )
    if base.terminal is not None:
        if all(len(cat.hom(x, base.terminal)) == 1 for x in base.objects):
            cat.terminal = base.terminal
        else:
            notes.skip(
                "collapse/terminal",
                "terminal object loses uniqueness of arrows in the quotient",
                [base.terminal],
            )

    fibers = {a: doctrine.fiber(a) for a in base.objects}

    def provider(m: str) -> MeetMap:
        return doctrine.reindex(cat.members[m][0])

    delta = {a: d for a, d in doctrine.delta.items() if cat.product(a, a) is not None}
    completed = Doctrine(
        out_name,
        cat,
        fibers,
        provider,
        delta,
        provenance={"completion": "d", "input": doctrine.name},
    )
    unit = DoctrineMap(
        f"unit_d({doctrine.name})",
        doctrine,
        completed,
        Functor(base, cat, {a: a for a in base.objects}, LazyMap(lambda m: class_of[m])),
        {a: MeetMap(fibers[a], fibers[a], {x: x for x in fibers[a].elements}) for a in base.objects},
    )
    out = CompletionOutput("d", completed, unit, {a: a for a in base.objects})
    out.notes = notes
    return out


def counit_d(doctrine: Doctrine, collapse: CompletionOutput | None = None) -> DoctrineMap:
    """Pick the unique member of each class; exists exactly when the input
    already has comprehensive diagonals (all testable classes are singletons)."""
    collapse = collapse or ext_collapse(doctrine)
    cat = collapse.doctrine.base
    for m in cat.morphisms():
        if len(cat.members[m]) != 1:
            raise PreconditionError(
                f"{doctrine.name}: morphism class {m!r} is not a singleton; "
                "the input does not have comprehensive diagonals"
            )
    return DoctrineMap(
        f"counit_d({doctrine.name})",
        collapse.doctrine,
        doctrine,
        Functor(
            cat,
            doctrine.base,
            {a: a for a in cat.objects},
            LazyMap(lambda m: cat.members[m][0]),
        ),
        {
            a: MeetMap(
                doctrine.fiber(a), doctrine.fiber(a), {x: x for x in doctrine.fiber(a).elements}
            )
            for a in cat.objects
        },
    )


def lift1_d(
    cell: DoctrineMap, src_comp: CompletionOutput, tgt_comp: CompletionOutput
) -> DoctrineMap:
    src_cat = src_comp.doctrine.base
    tgt_cat = tgt_comp.doctrine.base

    def resolve(m: str) -> str:
        images = {tgt_cat.class_of[cell.on_morphism(u)] for u in src_cat.members[m]}
        if len(images) != 1:
            raise InternalConsistencyError(
                f"{cell.name}: identified morphisms {src_cat.members[m]} map to "
                f"distinct classes {sorted(images)}"
            )
        return next(iter(images))

    return DoctrineMap(
        f"d[{cell.name}]",
        src_comp.doctrine,
        tgt_comp.doctrine,
        Functor(
            src_cat,
            tgt_cat,
            {a: cell.on_object(a) for a in src_cat.objects},
            LazyMap(resolve),
        ),
        {
            a: MeetMap(
                src_comp.doctrine.fiber(a),
                tgt_comp.doctrine.fiber(cell.on_object(a)),
                {x: cell.on_element(a, x) for x in src_comp.doctrine.fiber(a).elements},
            )
            for a in src_cat.objects
        },
    )


def lift2_d(
    theta: DoctrineCell, src_comp: CompletionOutput, tgt_comp: CompletionOutput
) -> DoctrineCell:
    lifted_f = lift1_d(theta.source_map, src_comp, tgt_comp)
    lifted_g = lift1_d(theta.target_map, src_comp, tgt_comp)
    tgt_cat = tgt_comp.doctrine.base
    components = {
        a: tgt_cat.class_of[theta.at(a)] for a in src_comp.doctrine.base.objects
    }
    return DoctrineCell(f"d[{theta.name}]", lifted_f, lifted_g, components)


# -- quotient completion ------------------------------------------------------


def quot_completion(doctrine: Doctrine, name: str | None = None) -> CompletionOutput:
    """Freely add quotients of equivalence relations.

    Objects are relation-decorated objects, fibers are descent data, the
    quotient of a coarser relation is the identity viewed as a decorated
    morphism.  When the input carries chosen comprehensions they lift to
    the completion (restricting the relation along the comprehension), which
    the distributive law relies on.
    """
    _require_delta_on_squares(doctrine, "quotient completion")
    base = doctrine.base
    out_name = name or f"q({doctrine.name})"
    notes = VerificationReport(title=f"{out_name} construction")

    objects: list[str] = []
    origin: dict[str, str] = {}
    rel_of: dict[str, str] = {}
    for a in base.objects:
        sq = doctrine.square(a)
        if sq is None or a not in doctrine.delta:
            notes.skip(
                "quotient-completion/objects",
                f"object {a!r} admits no relations (square or equality missing)",
                [a],
            )
            continue
        for rho in doctrine.fiber(sq.obj).elements:
            if equivalence_relation_checks(doctrine, a, rho, notes):
                obj = pair_obj(a, rho)
                objects.append(obj)
                origin[obj] = a
                rel_of[obj] = rho

    ff_cache: dict[str, str] = {}

    def doubled(u: str) -> str:
        cached = ff_cache.get(u)
        if cached is None:
            cached = product_map(base, u, u)
            ff_cache[u] = cached
        return cached

    def hom_filter(aobj: str, bobj: str, u: str) -> bool:
        a = origin[aobj]
        faa = doctrine.fiber(doctrine.square(a).obj)
        return faa.leq(rel_of[aobj], doctrine.reindex_apply(doubled(u), rel_of[bobj]))

    cat = DerivedCategory(
        out_name + "-base",
        base,
        objects,
        {},
        None,
        mode=DerivedCategory.PAIR,
        obj_origin=origin,
        hom_filter=hom_filter,
    )

    fibers = {obj: descent_data(doctrine, origin[obj], rel_of[obj]) for obj in objects}

    object_set = set(objects)
    for aobj in objects:
        for bobj in objects:
            a, b = origin[aobj], origin[bobj]
            prod = base.product(a, b)
            if prod is None:
                continue
            sq_ab = base.product(prod.obj, prod.obj)
            if sq_ab is None:
                notes.skip(
                    "quotient-completion/products",
                    f"square of {prod.obj!r} not declared; product omitted",
                    [aobj, bobj],
                )
                continue
            m1 = pairing(
                base,
                base.compose(prod.pr1, sq_ab.pr1),
                base.compose(prod.pr1, sq_ab.pr2),
            )
            m2 = pairing(
                base,
                base.compose(prod.pr2, sq_ab.pr1),
                base.compose(prod.pr2, sq_ab.pr2),
            )
            theta = doctrine.fiber(sq_ab.obj).meet(
                doctrine.reindex_apply(m1, rel_of[aobj]),
                doctrine.reindex_apply(m2, rel_of[bobj]),
            )
            pobj = pair_obj(prod.obj, theta)
            if pobj not in object_set:
                notes.skip(
                    "quotient-completion/products",
                    f"componentwise relation {theta!r} is not an equivalence relation",
                    [aobj, bobj],
                )
                continue
            cat.products[(aobj, bobj)] = Product(
                pobj,
                cat._register_pair(prod.pr1, pobj, aobj),
                cat._register_pair(prod.pr2, pobj, bobj),
            )

    if base.terminal is not None:
        t = base.terminal
        tobj = pair_obj(t, doctrine.delta.get(t, "")) if t in doctrine.delta else None
        if tobj in object_set:
            ok = True
            for xobj in objects:
                arrow = base.hom(origin[xobj], t)
                if len(arrow) != 1 or not hom_filter(xobj, tobj, arrow[0]):
                    ok = False
                    break
            if ok:
                cat.terminal = tobj

    def provider(m: str) -> MeetMap:
        aobj, bobj = cat.src(m), cat.dst(m)
        rmap = doctrine.reindex(cat.under[m])
        target = fibers[aobj]
        mapping = {}
        for x in fibers[bobj].elements:
            y = rmap.apply(x)
            if not target.has(y):
                raise InternalConsistencyError(
                    f"{out_name}: reindexing along {m!r} leaves descent data at {x!r}"
                )
            mapping[x] = y
        return MeetMap(fibers[bobj], target, mapping)

    delta = {}
    quotients = {}
    for obj in objects:
        sq = cat.products.get((obj, obj))
        if sq is None:
            continue
        rho = rel_of[obj]
        if not fibers[sq.obj].has(rho):
            raise InternalConsistencyError(
                f"{out_name}: relation {rho!r} is not descent data over its own square"
            )
        delta[obj] = rho
        a = origin[obj]
        faa = doctrine.fiber(doctrine.square(a).obj)
        ident = base.identity(a)
        for t in fibers[sq.obj].elements:
            coarser = pair_obj(a, t)
            if coarser in object_set and faa.leq(rho, t):
                quotients[(obj, t)] = cat._register_pair(ident, obj, coarser)

    comprehensions = {}
    if doctrine.comprehensions:
        for obj in objects:
            a, rho = origin[obj], rel_of[obj]
            for alpha in fibers[obj].elements:
                m = doctrine.comprehensions.get((a, alpha))
                if m is None:
                    notes.skip(
                        "quotient-completion/comprehensions",
                        f"input has no chosen comprehension for {alpha!r} on {a!r}",
                        [obj, alpha],
                    )
                    continue
                x = base.src(m)
                if doctrine.square(x) is None or x not in doctrine.delta:
                    notes.skip(
                        "quotient-completion/comprehensions",
                        f"comprehension domain {x!r} has no equality data",
                        [obj, alpha],
                    )
                    continue
                restricted = doctrine.reindex_apply(doubled(m), rho)
                dom = pair_obj(x, restricted)
                if dom not in object_set:
                    raise InternalConsistencyError(
                        f"{out_name}: restricted relation {restricted!r} not an "
                        f"equivalence relation on {x!r}"
                    )
                comprehensions[(obj, alpha)] = cat._register_pair(m, dom, obj)

    completed = Doctrine(
        out_name,
        cat,
        fibers,
        provider,
        delta,
        comprehensions,
        quotients,
        provenance={"completion": "q", "input": doctrine.name},
    )

    unit = None
    if all(a in doctrine.delta for a in base.objects):
        unit_obj = {a: pair_obj(a, doctrine.delta[a]) for a in base.objects}
        unit = DoctrineMap(
            f"unit_q({doctrine.name})",
            doctrine,
            completed,
            Functor(
                base,
                cat,
                unit_obj,
                LazyMap(
                    lambda m: cat._register_pair(
                        m, unit_obj[base.src(m)], unit_obj[base.dst(m)]
                    )
                ),
            ),
            {
                a: MeetMap(
                    doctrine.fiber(a),
                    fibers[unit_obj[a]],
                    {x: x for x in doctrine.fiber(a).elements},
                )
                for a in base.objects
            },
        )
    else:
        notes.skip(
            "quotient-completion/unit",
            "equality data is not total on the fragment, so the unit is not a total 1-cell",
            [doctrine.name],
        )
    out = CompletionOutput("q", completed, unit, origin, dict(rel_of))
    out.notes = notes
    return out


def counit_q(doctrine: Doctrine, completion: CompletionOutput | None = None) -> DoctrineMap:
    """Evaluation at chosen quotients; needs stable effective chosen quotients
    of effective descent (the fiber maps invert reindexing along the quotient)."""
    completion = completion or quot_completion(doctrine)
    rp = completion.doctrine
    cat = rp.base
    base = doctrine.base

    def chosen(obj: str) -> str:
        a = completion.origin_objects[obj]
        rho = completion.decorations[obj]
        q = doctrine.quotients.get((a, rho))
        if q is None:
            raise StructureMissingError(
                f"{doctrine.name}: no chosen quotient for relation {rho!r} on {a!r}"
            )
        return q

    obj_map = {obj: base.dst(chosen(obj)) for obj in cat.objects}

    def resolve(m: str) -> str:
        aobj, bobj = cat.src(m), cat.dst(m)
        qa, qb = chosen(aobj), chosen(bobj)
        want = base.compose(qb, cat.under[m])
        found = [
            g
            for g in base.hom(base.dst(qa), base.dst(qb))
            if base.compose(g, qa) == want
        ]
        if len(found) != 1:
            raise InternalConsistencyError(
                f"{doctrine.name}: quotient image of {m!r} has {len(found)} factorisations"
            )
        return found[0]

    fiber_maps = {}
    for obj in cat.objects:
        q = chosen(obj)
        c = base.dst(q)
        rmap = doctrine.reindex(q)
        des = rp.fiber(obj)
        restricted = MeetMap(
            doctrine.fiber(c), des, {x: rmap.apply(x) for x in doctrine.fiber(c).elements}
        )
        inv = find_inverse(restricted)
        if inv is None:
            raise PreconditionError(
                f"{doctrine.name}: quotient {q!r} is not of effective descent"
            )
        fiber_maps[obj] = inv
    return DoctrineMap(
        f"counit_q({doctrine.name})",
        rp,
        doctrine,
        Functor(cat, base, obj_map, LazyMap(resolve)),
        fiber_maps,
    )


def lift1_q(
    cell: DoctrineMap, src_comp: CompletionOutput, tgt_comp: CompletionOutput
) -> DoctrineMap:
    """Image of a 1-cell under the quotient completion; relations transport
    along the inverse product comparison of the base functor."""
    src_cat = src_comp.doctrine.base
    tgt_cat = tgt_comp.doctrine.base
    target = cell.target

    def lifted_obj(obj: str) -> str:
        a = src_comp.origin_objects[obj]
        rho = src_comp.decorations[obj]
        sq = cell.source.square(a)
        _, inv = cell.functor.comparison(a, a)
        transported = target.reindex_apply(inv, cell.on_element(sq.obj, rho))
        out = pair_obj(cell.on_object(a), transported)
        if out not in set(tgt_cat.objects):
            raise InternalConsistencyError(
                f"{cell.name}: transported relation {transported!r} is not an "
                f"equivalence relation on {cell.on_object(a)!r}"
            )
        return out

    obj_map = {obj: lifted_obj(obj) for obj in src_cat.objects}

    def resolve(m: str) -> str:
        return tgt_cat._register_pair(
            cell.on_morphism(src_cat.under[m]),
            obj_map[src_cat.src(m)],
            obj_map[src_cat.dst(m)],
        )

    fiber_maps = {}
    for obj in src_cat.objects:
        a = src_comp.origin_objects[obj]
        fo = obj_map[obj]
        des_src = src_comp.doctrine.fiber(obj)
        des_tgt = tgt_comp.doctrine.fiber(fo)
        mapping = {}
        for x in des_src.elements:
            y = cell.on_element(a, x)
            if not des_tgt.has(y):
                raise InternalConsistencyError(
                    f"{cell.name}: image of descent datum {x!r} leaves descent data"
                )
            mapping[x] = y
        fiber_maps[obj] = MeetMap(des_src, des_tgt, mapping)
    return DoctrineMap(
        f"q[{cell.name}]",
        src_comp.doctrine,
        tgt_comp.doctrine,
        Functor(src_cat, tgt_cat, obj_map, LazyMap(resolve)),
        fiber_maps,
    )


def lift2_q(
    theta: DoctrineCell, src_comp: CompletionOutput, tgt_comp: CompletionOutput
) -> DoctrineCell:
    lifted_f = lift1_q(theta.source_map, src_comp, tgt_comp)
    lifted_g = lift1_q(theta.target_map, src_comp, tgt_comp)
    tgt_cat = tgt_comp.doctrine.base
    components = {}
    for obj in src_comp.doctrine.base.objects:
        a = src_comp.origin_objects[obj]
        components[obj] = tgt_cat._register_pair(
            theta.at(a), lifted_f.on_object(obj), lifted_g.on_object(obj)
        )
    return DoctrineCell(f"q[{theta.name}]", lifted_f, lifted_g, components)


# -- mediating 2-cells --------------------------------------------------------


def mediating_tau(
    cell: DoctrineMap,
    src_comp: CompletionOutput | None = None,
    tgt_comp: CompletionOutput | None = None,
) -> DoctrineCell:
    """The unique 2-cell making a 1-cell of comprehension-structured doctrines
    a colax morphism: each component factors the image of a chosen
    comprehension through the chosen comprehension of its image."""
    p, r = cell.source, cell.target
    src_comp = src_comp or comp_completion(p)
    tgt_comp = tgt_comp or comp_completion(r)
    eps_p = counit_c(p, src_comp)
    eps_r = counit_c(r, tgt_comp)
    lifted = lift1_c(cell, src_comp, tgt_comp)
    source_map = compose_cells(cell, eps_p)
    target_map = compose_cells(eps_r, lifted)
    base_r = r.base
    components = {}
    for obj in src_comp.doctrine.base.objects:
        a = src_comp.origin_objects[obj]
        alpha = src_comp.doctrine.fiber(obj).top
        m_alpha = p.comprehensions[(a, alpha)]
        m_b = r.comprehensions[(cell.on_object(a), cell.on_element(a, alpha))]
        want = cell.on_morphism(m_alpha)
        found = [
            x
            for x in base_r.hom(base_r.src(want), base_r.src(m_b))
            if base_r.compose(m_b, x) == want
        ]
        if len(found) != 1:
            raise InternalConsistencyError(
                f"mediating 2-cell component at {obj!r}: {len(found)} factorisations"
            )
        components[obj] = found[0]
    return DoctrineCell(f"tau[{cell.name}]", source_map, target_map, components)


def mediating_omega(
    cell: DoctrineMap,
    src_comp: CompletionOutput | None = None,
    tgt_comp: CompletionOutput | None = None,
) -> DoctrineCell:
    """The unique 2-cell making a 1-cell of quotient-structured doctrines a lax
    morphism: each component factors the image of a chosen quotient through
    the chosen quotient of the transported relation."""
    p, r = cell.source, cell.target
    src_comp = src_comp or quot_completion(p)
    tgt_comp = tgt_comp or quot_completion(r)
    eps_p = counit_q(p, src_comp)
    eps_r = counit_q(r, tgt_comp)
    lifted = lift1_q(cell, src_comp, tgt_comp)
    source_map = compose_cells(eps_r, lifted)
    target_map = compose_cells(cell, eps_p)
    base_r = r.base
    components = {}
    for obj in src_comp.doctrine.base.objects:
        a = src_comp.origin_objects[obj]
        rho = src_comp.decorations[obj]
        q_rho = p.quotients[(a, rho)]
        lifted_obj = lifted.on_object(obj)
        rho_bar = tgt_comp.decorations[lifted_obj]
        q_bar = r.quotients[(cell.on_object(a), rho_bar)]
        want = cell.on_morphism(q_rho)
        found = [
            x
            for x in base_r.hom(base_r.dst(q_bar), base_r.dst(want))
            if base_r.compose(x, q_bar) == want
        ]
        if len(found) != 1:
            raise InternalConsistencyError(
                f"mediating 2-cell component at {obj!r}: {len(found)} factorisations"
            )
        components[obj] = found[0]
    return DoctrineCell(f"omega[{cell.name}]", source_map, target_map, components)



