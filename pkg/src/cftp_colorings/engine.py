"""Coupling-from-the-past sampler for uniform proper colorings.

A sample is produced by building independent randomness blocks indexed
t = 1, 2, ... Each block runs a two-phase update schedule over bounding
lists initialized to the full palette; if the lists all collapse to
singletons the block's coalescence value is defined, and the final sample
is that value pushed forward through the recorded update compositions of
all more recent blocks, oldest first.
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field

from . import bounding as bd
from .colorsets import bit, size
from .errors import CouplingRegimeError, EngineError, NoCoalescenceError
from .graphs import Graph
from .seedstream import SeedStream, randint_below, unit_uniform

PARTITION_BLOCK = 0  # block index reserved for the vertex-partition randomness


def eta_for(delta: int) -> float:
    """Imbalance slack in the regime threshold, 2 * sqrt((ln d + 1) / d)."""
    if delta < 1:
        return float("inf")
    return 2.0 * math.sqrt((math.log(delta) + 1.0) / delta)


def regime_threshold(delta: int) -> float:
    """Colors needed to run without --force: (2.5 + eta) * delta."""
    if delta < 1:
        return 0.0
    return (2.5 + eta_for(delta)) * delta


@dataclass(frozen=True)
class SeedVertexSet:
    members: frozenset[int]
    eta: float
    resamples: int

    def __contains__(self, v: int) -> bool:
        return v in self.members

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class SamplerConfig:
    q: int
    master_seed: int
    max_blocks: int = 64
    t1_override: int | None = None
    t2_override: int | None = None
    force: bool = False


@dataclass
class Block:
    index: int
    entries: list
    phi: tuple[int, ...] | None
    n_updates: int
    final_lists: tuple = ()
    phase_sizes: dict = field(default_factory=dict)


@dataclass
class SampleResult:
    coloring: tuple[int, ...]
    q: int
    master_seed: int
    blocks_used: int
    updates: int
    degraded_blocks: int
    phase_stats: dict
    wall_ms: float
    seed_set_size: int


def audit_partition(g: Graph, members, eta: float) -> bool:
    """Exact check of both neighborhood balance bounds."""
    delta = g.max_degree
    second_binding = (0.5 + eta) < 1.0
    for v in range(g.n):
        inside = sum(1 for u in g.adjacency[v] if u in members)
        if 2 * inside > delta:
            return False
        if second_binding and g.degree(v) - inside > (0.5 + eta) * delta:
            return False
    return True


def lll_partition(
    g: Graph, stream: SeedStream, p0_override: float | None = None
) -> SeedVertexSet:
    """Balanced seeding set via independent inclusion plus local resampling.

    Each vertex joins with probability max(0, 1/2 - eta/2); any vertex whose
    neighborhood violates a balance bound triggers a resample of its
    neighbors' bits. The queue-driven repair terminates quickly because the
    bounds hold with overwhelming margin per neighborhood. p0_override
    replaces the inclusion probability (experimentation only; pushing it up
    makes violations common and eventually exhausts the resample budget).
    """
    n, delta = g.n, g.max_degree
    eta = eta_for(delta)
    p0 = 0.5 if delta < 1 else min(1.0, max(0.0, 0.5 - eta / 2.0))
    if p0_override is not None:
        p0 = p0_override
    key0 = stream.subkey(PARTITION_BLOCK, 0)
    in_s = [unit_uniform(key0, v) < p0 for v in range(n)]
    second_binding = (0.5 + eta) < 1.0

    def violated(v: int) -> bool:
        inside = sum(1 for u in g.adjacency[v] if in_s[u])
        if 2 * inside > delta:
            return True
        if second_binding and g.degree(v) - inside > (0.5 + eta) * delta:
            return True
        return False

    budget = max(16, math.ceil(10 * n / max(delta, 1)))
    resamples = 0
    queue = deque(range(n))
    queued = [True] * n
    while queue:
        v = queue.popleft()
        queued[v] = False
        if not violated(v):
            continue
        resamples += 1
        if resamples > budget:
            raise EngineError(
                f"vertex partition exceeded {budget} resamples; bounds may be infeasible"
            )
        key = stream.subkey(PARTITION_BLOCK, resamples)
        for i, u in enumerate(g.adjacency[v]):
            in_s[u] = unit_uniform(key, i) < p0
        affected = set(g.adjacency[v])
        affected.add(v)
        for u in g.adjacency[v]:
            affected.update(g.adjacency[u])
        for w in affected:
            if not queued[w]:
                queue.append(w)
                queued[w] = True
    members = frozenset(v for v in range(n) if in_s[v])
    out = SeedVertexSet(members=members, eta=eta, resamples=resamples)
    if not audit_partition(g, members, eta):
        raise EngineError("vertex partition failed its own audit")
    return out


def default_t1(seed_set_size: int) -> int:
    if seed_set_size <= 1:
        return 0
    return math.ceil(5.0 * seed_set_size * math.log(seed_set_size))


def default_t2(n: int, q: int, delta: int) -> int:
    if n <= 1:
        return 0
    if q <= 2.5 * delta:
        raise ValueError(
            "drift length formula needs q > 2.5 * max_degree; pass t2_override"
        )
    return math.ceil(2.0 * (q - delta) * n * math.log(n) / (q - 2.5 * delta))


def update_budget(n: int, seed_set_size: int, delta: int, t1: int, t2: int) -> int:
    """Upper bound on composition length for one block."""
    per = delta + 1
    return seed_set_size * per + t1 * per + (n - seed_set_size) * per + t2


def construct_block(
    g: Graph,
    seed_set: SeedVertexSet,
    config: SamplerConfig,
    block_index: int,
    stream: SeedStream,
) -> Block:
    """One randomness block: seeding phase, converting phase, drift, check.

    The update schedule always runs to completion. A seeding or disjoint
    update whose parameter regime is infeasible falls back to a compress
    update at the same vertex instead. Swapping the coupling is safe because
    the choice depends only on the bounding lists, never on any trajectory,
    so every composed step still applies an exact single-site kernel;
    cutting the schedule short would not be, since stopping is correlated
    with the very draws being replayed, and replaying such a conditioned
    prefix measurably biases the output.
    """
    q, n, delta = config.q, g.n, g.max_degree
    state = bd.BoundingState(q, n)
    s_list = sorted(seed_set.members)
    others = [v for v in range(n) if v not in seed_set.members]
    t1 = config.t1_override if config.t1_override is not None else default_t1(len(s_list))
    t2 = config.t2_override if config.t2_override is not None else default_t2(n, q, delta)
    phase_sizes: dict = {"seeding_fallbacks": 0, "disjoint_fallbacks": 0}

    def seeding_or_fallback(v: int, preserved) -> None:
        try:
            bd.apply_seeding(state, g, v, stream, block_index)
        except CouplingRegimeError:
            a_mask = bd.greedy_reference_set(state, g, v, preserved, bd.PHASE_SEEDING)
            bd.apply_compress(state, v, a_mask, stream, block_index)
            phase_sizes["seeding_fallbacks"] += 1

    def disjoint_or_fallback(v: int) -> None:
        try:
            bd.apply_disjoint(state, g, v, stream, block_index)
        except CouplingRegimeError:
            nbrs = set(g.adjacency[v])
            a_mask = bd.greedy_reference_set(state, g, v, nbrs, bd.PHASE_CONVERT)
            bd.apply_compress(state, v, a_mask, stream, block_index)
            phase_sizes["disjoint_fallbacks"] += 1

    # Phase I: seed the balanced set with small lists, then drift them down.
    preserved: set[int] = set()
    for v in s_list:
        bd.cleanup(state, g, v, preserved, bd.PHASE_SEEDING, stream, block_index)
        seeding_or_fallback(v, preserved)
        preserved.add(v)
    phase_sizes["after_phase1_init"] = {v: size(state.lists[v]) for v in s_list}
    s_set = set(s_list)
    for _ in range(t1):
        idx = state.take_index()
        v = s_list[randint_below(stream.subkey(block_index, idx), 0, len(s_list))]
        bd.cleanup(state, g, v, s_set, bd.PHASE_SEEDING, stream, block_index)
        seeding_or_fallback(v, s_set)

    # Phase II: convert the rest to lists of size at most two, then drift
    # everything to singletons.
    preserved = set(s_list)
    for v in others:
        bd.cleanup(state, g, v, preserved, bd.PHASE_CONVERT, stream, block_index)
        disjoint_or_fallback(v)
        preserved.add(v)
    phase_sizes["after_phase2_convert"] = {v: size(state.lists[v]) for v in others}
    for _ in range(t2):
        idx = state.take_index()
        v = randint_below(stream.subkey(block_index, idx), 0, n)
        disjoint_or_fallback(v)

    phi = None
    if state.all_singletons():
        phi = state.coalesced_coloring()
        if not is_proper(g, phi):
            raise EngineError("coalesced configuration is not a proper coloring")
    return Block(
        index=block_index,
        entries=state.composition,
        phi=phi,
        n_updates=len(state.composition),
        final_lists=tuple(state.lists),
        phase_sizes=phase_sizes,
    )


def is_proper(g: Graph, coloring) -> bool:
    return all(coloring[u] != coloring[v] for u, v in g.edges)


def replay(block: Block, omega, g: Graph, config: SamplerConfig, stream: SeedStream):
    """Push a proper coloring through every recorded update of a block."""
    if not is_proper(g, omega):
        raise ValueError("replay requires a proper input coloring")
    w = list(omega)
    q = config.q
    for entry in block.entries:
        blocked = 0
        for u in g.adjacency[entry.vertex]:
            blocked |= bit(w[u])
        w[entry.vertex] = bd.decode_entry(entry, q, stream, block.index, blocked)
    return tuple(w)


def sample(g: Graph, config: SamplerConfig) -> SampleResult:
    """Draw one exactly-uniform proper coloring.

    Builds blocks until one coalesces, then replays the newer blocks on top
    of the coalesced configuration, oldest first. Raises NoCoalescenceError
    (with run statistics attached) if max_blocks is exhausted.
    """
    t0 = time.perf_counter()
    delta = g.max_degree
    if config.q < delta + 2:
        raise ValueError(f"need q >= max_degree + 2 = {delta + 2}, got {config.q}")
    if config.q < regime_threshold(delta) and not config.force:
        raise ValueError(
            f"q = {config.q} is below the regime threshold "
            f"{regime_threshold(delta):.2f}; pass force=True to run anyway"
        )
    stream = SeedStream(config.master_seed)
    seed_set = lll_partition(g, stream)
    blocks: list[Block] = []
    coalesced_at = None
    updates = 0
    degraded = 0
    for t in range(1, config.max_blocks + 1):
        block = construct_block(g, seed_set, config, t, stream)
        blocks.append(block)
        updates += block.n_updates
        if (
            block.phase_sizes.get("seeding_fallbacks", 0)
            or block.phase_sizes.get("disjoint_fallbacks", 0)
        ):
            degraded += 1
        if block.phi is not None:
            coalesced_at = t
            break
    if coalesced_at is None:
        stats = {
            "blocks_used": len(blocks),
            "updates": updates,
            "degraded_blocks": degraded,
            "wall_ms": (time.perf_counter() - t0) * 1e3,
        }
        raise NoCoalescenceError(
            f"no coalescence within {config.max_blocks} blocks", stats=stats
        )
    omega = blocks[coalesced_at - 1].phi
    for s in range(coalesced_at - 1, 0, -1):
        omega = replay(blocks[s - 1], omega, g, config, stream)
    if not is_proper(g, omega):
        raise EngineError("sampler produced an improper coloring")
    return SampleResult(
        coloring=omega,
        q=config.q,
        master_seed=config.master_seed,
        blocks_used=coalesced_at,
        updates=updates,
        degraded_blocks=degraded,
        phase_stats={
            "seeding_fallbacks": sum(
                b.phase_sizes.get("seeding_fallbacks", 0) for b in blocks
            ),
            "disjoint_fallbacks": sum(
                b.phase_sizes.get("disjoint_fallbacks", 0) for b in blocks
            ),
        },
        wall_ms=(time.perf_counter() - t0) * 1e3,
        seed_set_size=len(seed_set),
    )
