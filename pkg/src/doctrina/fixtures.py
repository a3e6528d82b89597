"""Deterministic builders for the example doctrines at fragment scale.

The finite-set fragment carries the subobject doctrine: carriers are the
sets [0]..[4], products are declared exactly where the carrier of the
product exists, fibers are powersets, reindexing is preimage, equalities
are diagonals, comprehensions are the canonical sorted inclusions and
quotients the canonical class-index maps.  Thin bases carry the downset
doctrine, and any base carries the one-predicate (trivial) doctrine.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from doctrina.doctrine import Doctrine, DoctrineMap
from doctrina.errors import FragmentIncompleteError, IntegrityError, PreconditionError
from doctrina.fincat import FragmentCategory, Functor, Product, TableCategory, diagonal
from doctrina.lattice import (
    InfSemilattice,
    MeetMap,
    build_lattice,
    chain_lattice,
    identity_map,
    powerset_lattice,
    subset_id,
    subset_points,
)


# -- finite-set fragments -----------------------------------------------------


def finset_morphism_id(a: int, b: int, images: tuple[int, ...]) -> str:
    return f"{a}>{b}:" + "".join(str(i) for i in images)


def parse_finset_morphism(m: str) -> tuple[int, int, tuple[int, ...]]:
    head, imgs = m.split(":", 1)
    a, b = head.split(">")
    return int(a), int(b), tuple(int(ch) for ch in imgs)


def _functions(a: int, b: int):
    return itertools.product(range(b), repeat=a)


@lru_cache(maxsize=None)
def finset_fragment(carriers: tuple[int, ...], name: str | None = None) -> TableCategory:
    """Full subcategory of finite sets on the given carriers, with products
    declared wherever the product carrier is itself present."""
    if any(c > 9 or c < 0 for c in carriers):
        raise PreconditionError("carriers must be single-digit sizes")
    sizes = tuple(sorted(set(carriers)))
    objects = [str(n) for n in sizes]
    morphisms: dict[str, tuple[str, str]] = {}
    images: dict[str, tuple[int, ...]] = {}
    for a in sizes:
        for b in sizes:
            for f in _functions(a, b):
                m = finset_morphism_id(a, b, f)
                morphisms[m] = (str(a), str(b))
                images[m] = f
    identities = {str(n): finset_morphism_id(n, n, tuple(range(n))) for n in sizes}
    composition = {}
    by_pair: dict[tuple[int, int], list[str]] = {}
    for m, (sa, sb) in morphisms.items():
        by_pair.setdefault((int(sa), int(sb)), []).append(m)
    for (a, b), fs in by_pair.items():
        for (b2, c), gs in by_pair.items():
            if b2 != b:
                continue
            for f in fs:
                fi = images[f]
                for g in gs:
                    gi = images[g]
                    composition[(g, f)] = finset_morphism_id(a, c, tuple(gi[x] for x in fi))
    products = {}
    for a in sizes:
        for b in sizes:
            if a * b in sizes:
                pr1 = finset_morphism_id(a * b, a, tuple(k // b for k in range(a * b)))
                pr2 = finset_morphism_id(a * b, b, tuple(k % b for k in range(a * b)))
                products[(str(a), str(b))] = Product(str(a * b), pr1, pr2)
    terminal = "1" if 1 in sizes else None
    return TableCategory(
        name or f"FinSet{sizes}", objects, morphisms, identities, composition, products, terminal
    )


def _canonical_set_quotient(n: int, relation: frozenset[tuple[int, int]]):
    """Class-index map of an equivalence relation on [n]; None when not one."""
    pairs = set(relation)
    if any((x, x) not in pairs for x in range(n)):
        return None
    if any((y, x) not in pairs for x, y in pairs):
        return None
    for x, y in list(pairs):
        for y2, z in list(pairs):
            if y2 == y and (x, z) not in pairs:
                return None
    classes: list[list[int]] = []
    seen: set[int] = set()
    for x in range(n):
        if x in seen:
            continue
        cls = sorted(y for y in range(n) if (x, y) in pairs)
        classes.append(cls)
        seen.update(cls)
    index = {}
    for i, cls in enumerate(classes):
        for x in cls:
            index[x] = i
    return len(classes), tuple(index[x] for x in range(n))


@lru_cache(maxsize=None)
def sub_fragment(carriers: tuple[int, ...], name: str | None = None) -> Doctrine:
    """Subobject doctrine on a finite-set fragment.

    Fibers are powersets ordered by inclusion, reindexing takes preimages,
    equality on a squared carrier is the diagonal subset.  Comprehensions
    (sorted inclusions) and quotients (class-index maps) are chosen where
    their carriers exist in the fragment.
    """
    base = finset_fragment(carriers, name=None if name is None else f"{name}-base")
    sizes = tuple(sorted(set(carriers)))
    fibers = {str(n): powerset_lattice(n, name=f"Sub({n})") for n in sizes}
    reindex = {}
    for m in base.morphisms():
        a, b, imgs = parse_finset_morphism(m)
        mapping = {}
        for t in fibers[str(b)].elements:
            pts = subset_points(t)
            mapping[t] = subset_id(i for i in range(a) if imgs[i] in pts)
        reindex[m] = MeetMap(fibers[str(b)], fibers[str(a)], mapping)
    delta = {}
    for n in sizes:
        if base.product(str(n), str(n)) is not None:
            delta[str(n)] = subset_id(x * n + x for x in range(n))
    comprehensions = {}
    for n in sizes:
        for alpha in fibers[str(n)].elements:
            pts = sorted(subset_points(alpha))
            k = len(pts)
            if k in sizes:
                comprehensions[(str(n), alpha)] = finset_morphism_id(k, n, tuple(pts))
    quotients = {}
    for n in sizes:
        if str(n) not in delta:
            continue
        for rho in fibers[str(n * n)].elements:
            relation = frozenset((k // n, k % n) for k in subset_points(rho))
            q = _canonical_set_quotient(n, relation)
            if q is None:
                continue
            n_classes, index_images = q
            if n_classes in sizes:
                quotients[(str(n), rho)] = finset_morphism_id(n, n_classes, index_images)
    return Doctrine(
        name or f"Sub{sizes}",
        base,
        fibers,
        lambda m, table=reindex: table[m],
        delta,
        comprehensions,
        quotients,
    )


def sub_finset(max_point: int = 2) -> Doctrine:
    """Subobject doctrine on the standard capped fragment.

    The carrier set [0]..[4] is the closure of two-point sets under the
    declared products plus the comprehension domains [0] and [3]; larger
    squares would blow the fiber cap, so both supported sizes use it.
    """
    if max_point not in (2, 4):
        raise PreconditionError(f"unsupported size {max_point}; expected 2 or 4")
    return sub_fragment((0, 1, 2, 3, 4), name=f"Sub[{max_point}]")


# -- thin bases ---------------------------------------------------------------


@lru_cache(maxsize=None)
def thin_category(lattice: InfSemilattice, name: str | None = None) -> TableCategory:
    """A meet-semilattice viewed as a thin category with all products (meets)."""
    objects = list(lattice.elements)
    mor = lambda x, y: f"{x}to{y}"
    morphisms = {
        mor(x, y): (x, y) for x in objects for y in objects if lattice.leq(x, y)
    }
    identities = {x: mor(x, x) for x in objects}
    composition = {}
    for f, (x, y) in morphisms.items():
        for g, (y2, z) in morphisms.items():
            if y2 == y:
                composition[(g, f)] = mor(x, z)
    products = {}
    for x in objects:
        for y in objects:
            m = lattice.meet(x, y)
            products[(x, y)] = Product(m, mor(m, x), mor(m, y))
    return TableCategory(
        name or f"Thin({lattice.name})",
        objects,
        morphisms,
        identities,
        composition,
        products,
        lattice.top,
    )


@lru_cache(maxsize=None)
def thin_base_sub(lattice: InfSemilattice, name: str | None = None) -> Doctrine:
    """Downset doctrine on a thin base: the subobject doctrine of a poset."""
    base = thin_category(lattice)
    fibers = {x: lattice.downset(x) for x in lattice.elements}
    reindex = {}
    for m in base.morphisms():
        x, y = base.src(m), base.dst(m)
        reindex[m] = MeetMap(
            fibers[y], fibers[x], {e: lattice.meet(e, x) for e in fibers[y].elements}
        )
    delta = {x: x for x in lattice.elements}
    comprehensions = {
        (x, e): f"{e}to{x}" for x in lattice.elements for e in fibers[x].elements
    }
    quotients = {(x, x): f"{x}to{x}" for x in lattice.elements}
    return Doctrine(
        name or f"Down({lattice.name})",
        base,
        fibers,
        lambda m, table=reindex: table[m],
        delta,
        comprehensions,
        quotients,
    )


# -- trivial doctrine ---------------------------------------------------------

_POINT = InfSemilattice("point", ("top",), "top", frozenset({("top", "top")}), {("top", "top"): "top"})


def trivial_doctrine(base: FragmentCategory, name: str | None = None) -> Doctrine:
    """All fibers are the one-predicate lattice; every structure is canonical."""
    fibers = {obj: _POINT for obj in base.objects}
    point_id = identity_map(_POINT)
    delta = {}
    comprehensions = {}
    quotients = {}
    for obj in base.objects:
        comprehensions[(obj, "top")] = base.identity(obj)
        if base.product(obj, obj) is not None:
            delta[obj] = "top"
            quotients[(obj, "top")] = base.identity(obj)
    return Doctrine(
        name or f"Triv({base.name})",
        base,
        fibers,
        lambda m: point_id,
        delta,
        comprehensions,
        quotients,
    )


# -- weak subobjects ----------------------------------------------------------


def weak_subobjects(
    base: FragmentCategory,
    weak_pullbacks: dict[tuple[str, str], tuple[str, str, str]],
    name: str | None = None,
) -> Doctrine:
    """Poset reflection of slice categories, reindexed by declared weak pullbacks.

    ``weak_pullbacks`` maps a cospan (f: B->A, g: X->A) to (W, p: W->B, q: W->X)
    with f.p = g.q.  Reindexing along h picks any representative of a slice
    class that has a declared pullback against h.
    """
    into: dict[str, list[str]] = {a: [] for a in base.objects}
    for m in base.morphisms():
        into[base.dst(m)].append(m)
    for a in into:
        into[a].sort()

    def factors(u: str, v: str) -> bool:
        return any(
            base.compose(v, h) == u for h in base.hom(base.src(u), base.src(v))
        )

    fibers: dict[str, InfSemilattice] = {}
    class_of: dict[str, dict[str, str]] = {}
    members: dict[str, dict[str, tuple[str, ...]]] = {}
    for a in base.objects:
        slice_mors = into[a]
        classes: list[list[str]] = []
        assigned: dict[str, int] = {}
        for u in slice_mors:
            placed = False
            for i, cls in enumerate(classes):
                v = cls[0]
                if factors(u, v) and factors(v, u):
                    cls.append(u)
                    assigned[u] = i
                    placed = True
                    break
            if not placed:
                assigned[u] = len(classes)
                classes.append([u])
        ids = ["[" + min(cls) + "]" for cls in classes]
        leq_pairs = [
            (ids[i], ids[j])
            for i in range(len(classes))
            for j in range(len(classes))
            if factors(classes[i][0], classes[j][0])
        ]
        fibers[a] = build_lattice(f"Psi({a})", ids, leq_pairs, transitive=True)
        class_of[a] = {u: ids[assigned[u]] for u in slice_mors}
        members[a] = {ids[i]: tuple(sorted(cls)) for i, cls in enumerate(classes)}

    def provider(h: str) -> MeetMap:
        b, a = base.src(h), base.dst(h)
        mapping = {}
        for cls_id in fibers[a].elements:
            for rep in members[a][cls_id]:
                entry = weak_pullbacks.get((h, rep))
                if entry is not None:
                    _, p, _ = entry
                    mapping[cls_id] = class_of[b][p]
                    break
            else:
                raise FragmentIncompleteError(
                    f"missing weak pullback of {cls_id!r} along {h!r}"
                )
        return MeetMap(fibers[a], fibers[b], mapping)

    delta = {}
    for a in base.objects:
        sq = base.product(a, a)
        if sq is not None:
            delta[a] = class_of[sq.obj][diagonal(base, a)]
    return Doctrine(name or f"Psi({base.name})", base, fibers, provider, delta)


@lru_cache(maxsize=None)
def weak_subobjects_demo() -> Doctrine:
    """Weak subobjects over the 3-object finite-set base {[0], [1], [2]},
    with every weak pullback whose carrier fits the fragment declared."""
    base = finset_fragment((0, 1, 2))
    table = {}
    for f in base.morphisms():
        for g in base.morphisms():
            if base.dst(f) != base.dst(g):
                continue
            _, bsize, fi = parse_finset_morphism(f)
            asize = len(fi)
            _, _, gi = parse_finset_morphism(g)
            xsize = len(gi)
            pairs = [
                (x, y) for x in range(asize) for y in range(xsize) if fi[x] == gi[y]
            ]
            if len(pairs) not in (0, 1, 2):
                continue
            w = len(pairs)
            p = finset_morphism_id(w, asize, tuple(x for x, _ in pairs))
            q = finset_morphism_id(w, xsize, tuple(y for _, y in pairs))
            table[(f, g)] = (str(w), p, q)
    return weak_subobjects(base, table, name="PsiDemo")


# -- shipped fixture registry -------------------------------------------------


@lru_cache(maxsize=None)
def trivial_chain() -> Doctrine:
    return trivial_doctrine(thin_category(chain_lattice(2)), name="TrivChain2")


@lru_cache(maxsize=None)
def trivial_finset() -> Doctrine:
    """Trivial predicates over a finite-set base: the shipped non-extensional
    fixture (distinct parallel maps are equated by the trivial equality)."""
    return trivial_doctrine(finset_fragment((1, 2, 4)), name="TrivFinSet")


@lru_cache(maxsize=None)
def thin_chain3() -> Doctrine:
    return thin_base_sub(chain_lattice(3), name="DownChain3")


@lru_cache(maxsize=None)
def thin_diamond() -> Doctrine:
    return thin_base_sub(powerset_lattice(2, name="diamond"), name="DownDiamond")


FIXTURES = {
    "sub_finset_2": lambda: sub_finset(2),
    "sub_finset_4": lambda: sub_finset(4),
    "sub_finset_01": lambda: sub_fragment((0, 1), name="Sub01"),
    "sub_finset_012": lambda: sub_fragment((0, 1, 2), name="Sub012"),
    "sub_finset_12": lambda: sub_fragment((1, 2), name="Sub12"),
    "trivial_chain": trivial_chain,
    "trivial_finset": trivial_finset,
    "thin_chain3": thin_chain3,
    "thin_diamond": thin_diamond,
    "weak_demo": weak_subobjects_demo,
}


def build_fixture(name: str) -> Doctrine:
    try:
        builder = FIXTURES[name]
    except KeyError:
        raise IntegrityError(
            f"unknown fixture {name!r}; available: {', '.join(sorted(FIXTURES))}"
        )
    return builder()


# -- example 1-cells over the fixtures ---------------------------------------


def conjugation_cell(doctrine: Doctrine, perms: dict[int, tuple[int, ...]], name: str) -> DoctrineMap:
    """Endo-1-cell of a subobject fixture induced by per-carrier permutations.

    Carriers absent from ``perms`` use the identity.  Mixing a nontrivial
    permutation on one carrier with identities elsewhere gives an honest
    1-cell that does not preserve the chosen comprehensions.
    """
    base = doctrine.base
    perm_of: dict[int, tuple[int, ...]] = {}
    inv_of: dict[int, tuple[int, ...]] = {}
    for obj in base.objects:
        n = int(obj)
        p = perms.get(n, tuple(range(n)))
        if sorted(p) != list(range(n)):
            raise PreconditionError(f"{p} is not a permutation of range({n})")
        inv = [0] * n
        for i, v in enumerate(p):
            inv[v] = i
        perm_of[n] = p
        inv_of[n] = tuple(inv)
    morphism_map = {}
    for m in base.morphisms():
        a, b, imgs = parse_finset_morphism(m)
        new = tuple(perm_of[b][imgs[inv_of[a][x]]] for x in range(a))
        morphism_map[m] = finset_morphism_id(a, b, new)
    fiber_maps = {}
    for obj in base.objects:
        n = int(obj)
        f = doctrine.fiber(obj)
        fiber_maps[obj] = MeetMap(
            f,
            f,
            {e: subset_id(perm_of[n][p] for p in subset_points(e)) for e in f.elements},
        )
    functor = Functor(base, base, {o: o for o in base.objects}, morphism_map)
    return DoctrineMap(name, doctrine, doctrine, functor, fiber_maps)


def swap2_cell(doctrine: Doctrine) -> DoctrineMap:
    """Conjugation swapping the two-point carrier only; breaks comprehension
    preservation at subsets of the four-point carrier."""
    return conjugation_cell(doctrine, {2: (1, 0)}, "swap2")


def reversal_cell(doctrine: Doctrine) -> DoctrineMap:
    """Conjugation reversing every carrier; preserves the canonical choices."""
    perms = {int(o): tuple(reversed(range(int(o)))) for o in doctrine.base.objects}
    return conjugation_cell(doctrine, perms, "reversal")


def collapse_cell(doctrine: Doctrine) -> DoctrineMap:
    """Collapse onto the trivial doctrine over the same base."""
    target = trivial_doctrine(doctrine.base)
    fiber_maps = {
        obj: MeetMap(
            doctrine.fiber(obj), _POINT, {e: "top" for e in doctrine.fiber(obj).elements}
        )
        for obj in doctrine.base.objects
    }
    functor = Functor(
        doctrine.base,
        doctrine.base,
        {o: o for o in doctrine.base.objects},
        {m: m for m in doctrine.base.morphisms()},
    )
    return DoctrineMap(f"collapse({doctrine.name})", doctrine, target, functor, fiber_maps)
