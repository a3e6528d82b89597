"""Size guards for constructions that can blow up (iterated completions)."""

from __future__ import annotations

import os
from dataclasses import dataclass

from doctrina.errors import ResourceGuardError


@dataclass(frozen=True)
class SizeGuard:
    """Caps on completed-doctrine sizes.

    ``max_objects`` and ``max_fiber_elements`` bound a single doctrine;
    ``max_morphisms`` bounds morphism materialisation (law checks iterate
    morphism universes); ``max_candidates`` bounds enumeration searches.
    """

    max_objects: int = 10_000
    max_fiber_elements: int = 100_000
    max_morphisms: int = 200_000
    max_candidates: int = 2_000_000

    def check_doctrine(self, doctrine, context: str, count_morphisms: bool = True) -> None:
        n_obj = len(doctrine.base.objects)
        n_elt = sum(len(f.elements) for f in doctrine.fibers.values())
        sizes = {"objects": n_obj, "fiber_elements": n_elt}
        if n_obj > self.max_objects:
            raise ResourceGuardError(
                f"{context}: {n_obj} objects exceed cap {self.max_objects}", sizes
            )
        if n_elt > self.max_fiber_elements:
            raise ResourceGuardError(
                f"{context}: {n_elt} fiber elements exceed cap {self.max_fiber_elements}",
                sizes,
            )
        if not count_morphisms:
            return
        n_mor = doctrine.base.morphism_count(self.max_morphisms)
        if n_mor is None:
            raise ResourceGuardError(
                f"{context}: morphism count exceeds cap {self.max_morphisms}",
                {**sizes, "morphisms": f"> {self.max_morphisms}"},
            )

    def check_candidates(self, n: int, context: str) -> None:
        if n > self.max_candidates:
            raise ResourceGuardError(
                f"{context}: {n} candidates exceed cap {self.max_candidates}",
                {"candidates": n},
            )


def thread_cap() -> int:
    """Worker cap from DOCTRINA_THREADS; the engine never exceeds it.

    Verification scans currently run sequentially (one worker), which
    satisfies any positive cap; the variable is validated here so bad
    values fail loudly.
    """
    raw = os.environ.get("DOCTRINA_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise ResourceGuardError(f"DOCTRINA_THREADS must be an integer, got {raw!r}")
    return max(1, value)
