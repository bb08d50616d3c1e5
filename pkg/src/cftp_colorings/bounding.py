"""Bounding lists, the append-only composition log, and update machinery.

The bounding state tracks, per vertex, a superset of the colors any coupled
trajectory may carry. Every local update appends one composition entry
holding the coupling tag, the full parameter snapshot it was applied with,
and the sub-seed address, which together let the update be decoded later
against any realized configuration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import couplings as cp
from .colorsets import ColorSet, bit, full_mask, iter_colors, mask_from, members, size
from .errors import EngineError
from .graphs import Graph
from .seedstream import SeedStream

KIND_COMPRESS = "compress"
KIND_SEEDING = "seeding"
KIND_DISJOINT = "disjoint"

PHASE_SEEDING = "phase1"
PHASE_CONVERT = "phase2"


@dataclass(frozen=True, slots=True)
class CompositionEntry:
    vertex: int
    kind: str
    params: object
    update_index: int


class BoundingState:
    """Per-vertex bounding lists plus the composition log for one block."""

    __slots__ = ("q", "n", "lists", "composition", "_counter")

    def __init__(self, q: int, n: int):
        self.q = q
        self.n = n
        self.lists: list[ColorSet] = [full_mask(q)] * n
        self.composition: list[CompositionEntry] = []
        self._counter = 0

    def take_index(self) -> int:
        idx = self._counter
        self._counter += 1
        return idx

    def all_singletons(self) -> bool:
        return all(size(m) == 1 for m in self.lists)

    def coalesced_coloring(self) -> tuple[int, ...]:
        return tuple(m.bit_length() - 1 for m in self.lists)

    def dump_jsonl(self, stream: "SeedStream | None" = None, block: int = 0) -> str:
        """Debug dump: one JSON object per composition entry.

        With a stream and block index, each row also carries the bounding
        list the entry produced, recomputed from its address.
        """
        rows = []
        for e in self.composition:
            row = {
                "vertex": e.vertex,
                "coupling": e.kind,
                "update_index": e.update_index,
            }
            if stream is not None:
                row["list"] = members(predicted_set(e, self.q, stream, block))
            rows.append(json.dumps(row))
        rows.append(json.dumps({"lists": [members(m) for m in self.lists]}))
        return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# Neighborhood color sets
# ---------------------------------------------------------------------------


def neighborhood_slack(state: BoundingState, g: Graph, v: int) -> ColorSet:
    m = 0
    for u in g.adjacency[v]:
        m |= state.lists[u]
    return m


def singleton_colors(state: BoundingState, g: Graph, v: int) -> ColorSet:
    m = 0
    for u in g.adjacency[v]:
        lu = state.lists[u]
        if size(lu) == 1:
            m |= lu
    return m


def disjoint_pairs(state: BoundingState, g: Graph, v: int) -> tuple[tuple[int, int], ...]:
    """Neighbor 2-lists that intersect no other neighbor list, as color pairs."""
    nbrs = g.adjacency[v]
    lists = [state.lists[u] for u in nbrs]
    out = []
    for i, m in enumerate(lists):
        if size(m) != 2:
            continue
        if any(j != i and (m & other) for j, other in enumerate(lists)):
            continue
        low = m & -m
        out.append((low.bit_length() - 1, (m ^ low).bit_length() - 1))
    return tuple(sorted(out))


def disjoint_colors(state: BoundingState, g: Graph, v: int) -> ColorSet:
    return mask_from(c for p in disjoint_pairs(state, g, v) for c in p)


# ---------------------------------------------------------------------------
# Greedy reference set
# ---------------------------------------------------------------------------


def _fill_atomic(a: ColorSet, cap: int, lists) -> ColorSet:
    # whole lists first, smallest-sorted-members order
    for m in sorted(lists, key=members):
        merged = a | m
        if size(merged) <= cap:
            a = merged
    return a


def _fill_singles(a: ColorSet, cap: int, pool: ColorSet) -> ColorSet:
    for c in iter_colors(pool & ~a):
        if size(a) >= cap:
            break
        a |= bit(c)
    return a


def greedy_reference_set(
    state: BoundingState,
    g: Graph,
    v: int,
    preserved,
    mode: str,
) -> ColorSet:
    """Reference set of exactly max-degree colors for compress updates.

    Priority comes from the preserved neighbors' lists: the seeding phase
    packs the whole neighborhood slack first; the converting phase packs
    colors outside the disjoint pairs first so surviving pairs stay out of
    every compressed neighbor's list. Whole lists are taken atomically when
    they fit, then single colors ascending, then arbitrary colors ascending.
    """
    delta = g.max_degree
    q = state.q
    if q < delta:
        raise ValueError(f"cannot build a reference set of {delta} colors from {q}")
    kept = [state.lists[u] for u in g.adjacency[v] if u in preserved]
    sp_mask = 0
    for m in kept:
        sp_mask |= m
    a = 0
    if mode == PHASE_SEEDING:
        a = _fill_atomic(a, delta, kept)
        a = _fill_singles(a, delta, sp_mask)
    elif mode == PHASE_CONVERT:
        dp_pairs = []
        for i, m in enumerate(kept):
            if size(m) == 2 and not any(j != i and (m & o) for j, o in enumerate(kept)):
                dp_pairs.append(m)
        dp_mask = 0
        for m in dp_pairs:
            dp_mask |= m
        # pair colors live only in their own list, so non-pair lists are
        # exactly the ones disjoint from dp_mask
        outside = [m for m in kept if not (m & dp_mask)]
        a = _fill_atomic(a, delta, outside)
        a = _fill_singles(a, delta, sp_mask & ~dp_mask)
        a = _fill_atomic(a, delta, dp_pairs)
        a = _fill_singles(a, delta, dp_mask)
    else:
        raise ValueError(f"unknown greedy mode {mode!r}")
    a = _fill_singles(a, delta, full_mask(q))
    return a


# ---------------------------------------------------------------------------
# Updates
# ---------------------------------------------------------------------------


def apply_compress(
    state: BoundingState,
    v: int,
    a_mask: ColorSet,
    stream: SeedStream,
    block: int,
) -> None:
    idx = state.take_index()
    key = stream.subkey(block, idx)
    predicted, _ = cp.compress_predict(a_mask, state.q, key)
    state.lists[v] = predicted
    state.composition.append(CompositionEntry(v, KIND_COMPRESS, a_mask, idx))


def apply_seeding(
    state: BoundingState,
    g: Graph,
    v: int,
    stream: SeedStream,
    block: int,
) -> None:
    """Seeding update at v using the current neighborhood slack.

    Raises CouplingRegimeError when no feasible two-point size law exists
    for the current slack; callers decide whether to fall back.
    """
    s_mask = neighborhood_slack(state, g, v)
    s_sorted = tuple(iter_colors(s_mask))
    law = cp.seeding_size_law(len(s_sorted), g.max_degree, state.q)
    idx = state.take_index()
    key = stream.subkey(block, idx)
    predicted, _ = cp.seeding_predict(s_sorted, s_mask, law, state.q, key)
    state.lists[v] = predicted
    state.composition.append(
        CompositionEntry(v, KIND_SEEDING, (s_sorted, s_mask, law), idx)
    )


def apply_disjoint(
    state: BoundingState,
    g: Graph,
    v: int,
    stream: SeedStream,
    block: int,
) -> None:
    """Disjoint update at v; raises CouplingRegimeError when infeasible."""
    params = cp.disjoint_params_from_lists(
        state.q, g.max_degree, (state.lists[u] for u in g.adjacency[v])
    )
    idx = state.take_index()
    key = stream.subkey(block, idx)
    predicted, _ = cp.disjoint_predict(params, key)
    state.lists[v] = predicted
    state.composition.append(CompositionEntry(v, KIND_DISJOINT, params, idx))


def cleanup(
    state: BoundingState,
    g: Graph,
    v: int,
    preserved,
    mode: str,
    stream: SeedStream,
    block: int,
) -> None:
    """Compress every non-preserved neighbor of v against one reference set."""
    targets = [w for w in g.adjacency[v] if w not in preserved]
    if not targets:
        return
    a_mask = greedy_reference_set(state, g, v, preserved, mode)
    for w in targets:
        apply_compress(state, w, a_mask, stream, block)


def decode_entry(
    entry: CompositionEntry,
    q: int,
    stream: SeedStream,
    block: int,
    blocked: ColorSet,
) -> int:
    """Re-derive the entry's draw from its address and decode against blocked."""
    key = stream.subkey(block, entry.update_index)
    if entry.kind == KIND_COMPRESS:
        draw = cp.compress_draw(entry.params, q, key)
        return cp.compress_decode(entry.params, q, draw, blocked)
    if entry.kind == KIND_SEEDING:
        s_sorted, s_mask, law = entry.params
        if blocked & ~s_mask:
            # sound replay keeps every trajectory inside the recorded lists,
            # so neighbor colors can never leave the slack snapshot
            raise EngineError("replayed blocked set escaped the slack snapshot")
        _, draw = cp.seeding_predict(s_sorted, s_mask, law, q, key)
        return cp.seeding_decode(s_mask, law, q, draw, blocked)
    if entry.kind == KIND_DISJOINT:
        params = entry.params
        _, draw = cp.disjoint_predict(params, key)
        return cp.disjoint_decode(params, draw, blocked)
    raise ValueError(f"unknown composition entry kind {entry.kind!r}")


def predicted_set(entry: CompositionEntry, q: int, stream: SeedStream, block: int) -> ColorSet:
    """Recompute the bounding set an entry produced when it was applied."""
    key = stream.subkey(block, entry.update_index)
    if entry.kind == KIND_COMPRESS:
        predicted, _ = cp.compress_predict(entry.params, q, key)
        return predicted
    if entry.kind == KIND_SEEDING:
        s_sorted, s_mask, law = entry.params
        predicted, _ = cp.seeding_predict(s_sorted, s_mask, law, q, key)
        return predicted
    if entry.kind == KIND_DISJOINT:
        predicted, _ = cp.disjoint_predict(entry.params, key)
        return predicted
    raise ValueError(f"unknown composition entry kind {entry.kind!r}")
