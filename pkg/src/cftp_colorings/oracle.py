"""Ground-truth machinery: exact enumeration, distribution tests, and the
worst-case configuration that blocks two-to-one list contraction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from . import couplings as cp
from .colorsets import ColorSet, mask_from, members, size
from .errors import CouplingRegimeError, EnumerationBudgetError
from .graphs import Graph, build_graph, gen_complete_bipartite
from .seedstream import SeedStream

ENUMERATION_BUDGET = 10_000_000


def enumerate_colorings(g: Graph, q: int) -> list[tuple[int, ...]]:
    """All proper colorings by backtracking over vertices in index order."""
    if g.n > 8 and q**g.n > ENUMERATION_BUDGET:
        raise EnumerationBudgetError(
            f"about q^n = {q**g.n:.3g} assignments; refusing beyond {ENUMERATION_BUDGET:.3g}"
        )
    earlier = [tuple(u for u in g.adjacency[v] if u < v) for v in range(g.n)]
    out: list[tuple[int, ...]] = []
    coloring = [0] * g.n

    def extend(v: int) -> None:
        if v == g.n:
            out.append(tuple(coloring))
            return
        used = {coloring[u] for u in earlier[v]}
        for c in range(q):
            if c not in used:
                coloring[v] = c
                extend(v + 1)

    extend(0)
    return out


@dataclass(frozen=True)
class GofResult:
    chi2: float
    pvalue: float
    tv: float
    n_samples: int
    n_cells: int


def goodness_of_fit(samples, universe) -> GofResult:
    """Pearson chi-square and plug-in total variation against uniform.

    Any sample outside the universe means the sampler emitted an improper
    coloring and is reported as a hard failure.
    """
    index = {c: i for i, c in enumerate(universe)}
    counts = np.zeros(len(universe), dtype=np.int64)
    for s in samples:
        i = index.get(tuple(s))
        if i is None:
            raise AssertionError(f"sample {s!r} is outside the enumerated universe")
        counts[i] += 1
    n = int(counts.sum())
    m = len(universe)
    expected = n / m
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    pvalue = float(sps.chi2.sf(chi2, m - 1))
    tv = float(np.abs(counts / n - 1.0 / m).sum() / 2.0)
    return GofResult(chi2=chi2, pvalue=pvalue, tv=tv, n_samples=n, n_cells=m)


def expected_null_tv(n_samples: int, n_cells: int) -> float:
    """Plug-in TV a perfectly uniform sampler is expected to show.

    Per-cell counts are near-Poisson with mean n/m, so the mean absolute
    deviation is about sqrt(2 * lambda / pi) per cell.
    """
    lam = n_samples / n_cells
    return n_cells * math.sqrt(2.0 * lam / math.pi) / (2.0 * n_samples)


# ---------------------------------------------------------------------------
# Worst-case two-to-one obstruction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LowerBoundInstance:
    graph: Graph
    lists: tuple[ColorSet, ...]
    delta: int
    q: int
    m: int
    r: int
    bound: float


def lower_bound_value(delta: int, q: int) -> float:
    """Analytic floor on the expected updated-list size at a worst-case vertex.

    With delta = 2m and q = 3m + r, the floor is 2m/(m+r+1) + m/(m+r) + 1;
    it exceeds 2 exactly in the color range where two-to-one contraction is
    impossible.
    """
    if delta < 2 or delta % 2 != 0:
        raise ValueError(f"construction needs an even degree >= 2; try {delta + 1}")
    m = delta // 2
    r = q - 3 * m
    if r < 0:
        raise ValueError(f"need q >= 3 * delta / 2 = {3 * m}, got {q}")
    return 2.0 * m / (m + r + 1) + 1.0 * m / (m + r) + 1.0


def build_worst_case(delta: int, q: int, copies: int = 1) -> LowerBoundInstance:
    """Disjoint copies of the complete bipartite host with triangle lists.

    Vertices 2k, 2k+1 of each side form pair k+1 and receive the 0-indexed
    lists {3k, 3k+1} and {3k+1, 3k+2}, so every vertex's neighborhood splits
    into pairs whose lists overlap in exactly one color.
    """
    bound = lower_bound_value(delta, q)  # validates delta and q
    if copies < 1:
        raise ValueError("need at least one copy")
    m = delta // 2
    base = gen_complete_bipartite(delta)
    edges = []
    for c in range(copies):
        off = 2 * delta * c
        edges.extend((u + off, v + off) for u, v in base.edges)
    graph = build_graph(2 * delta * copies, edges)
    side_lists = []
    for k in range(m):
        side_lists.append(mask_from((3 * k, 3 * k + 1)))
        side_lists.append(mask_from((3 * k + 1, 3 * k + 2)))
    lists = tuple(side_lists[i % delta] for i in range(graph.n))
    inst = LowerBoundInstance(
        graph=graph,
        lists=lists,
        delta=delta,
        q=q,
        m=m,
        r=q - 3 * m,
        bound=bound,
    )
    if not audit_worst_case(inst):
        raise AssertionError("worst-case instance failed its triangle audit")
    return inst


def audit_worst_case(inst: LowerBoundInstance) -> bool:
    """Every vertex's neighborhood must split into triangle pairs."""
    g = inst.graph
    for v in range(g.n):
        lists = [inst.lists[u] for u in g.adjacency[v]]
        if any(size(m_) != 2 for m_ in lists):
            return False
        if not _triangle_matching(lists):
            return False
    return True


def _triangle_matching(lists) -> bool:
    if len(lists) % 2 != 0:
        return False
    if not lists:
        return True
    first = lists[0]
    rest = lists[1:]
    for i, other in enumerate(rest):
        if size(first | other) == 3:
            if _triangle_matching(rest[:i] + rest[i + 1 :]):
                return True
    return False


@dataclass(frozen=True)
class CouplingAudit:
    coupling: str
    trials: int
    mean: float
    ci_lo: float
    ci_hi: float
    compatible: bool
    note: str = ""


def audit_coupling_at_worst_case(
    inst: LowerBoundInstance,
    coupling: str,
    trials: int = 100_000,
    master_seed: int = 0,
) -> CouplingAudit:
    """Monte Carlo estimate of the predicted-set size at a worst-case vertex.

    Couplings whose parameter regime rejects the instance are reported as
    incompatible rather than failing.
    """
    g = inst.graph
    v = 0
    nbr_lists = [inst.lists[u] for u in g.adjacency[v]]
    q, delta = inst.q, inst.delta
    stream = SeedStream(master_seed)

    if coupling == "compress":
        a_mask = mask_from(range(delta))

        def predicted_size(key: int) -> int:
            predicted, _ = cp.compress_predict(a_mask, q, key)
            return size(predicted)

    elif coupling == "seeding":
        s_mask = 0
        for m_ in nbr_lists:
            s_mask |= m_
        s_sorted = tuple(members(s_mask))
        try:
            inst_lp = cp.LPInstance(len(s_sorted), delta, q)
            law = cp.solve_relaxed_lp(inst_lp)
            ok, violations = cp.verify_full_lp(inst_lp, law)
            if not ok:
                raise CouplingRegimeError(f"full feasibility check failed: {violations[:2]}")
        except (CouplingRegimeError, ValueError) as exc:
            return CouplingAudit(coupling, 0, math.nan, math.nan, math.nan, False, str(exc))

        def predicted_size(key: int) -> int:
            predicted, _ = cp.seeding_predict(s_sorted, s_mask, law, q, key)
            return size(predicted)

    elif coupling == "disjoint":
        try:
            params = cp.disjoint_params_from_lists(q, delta, nbr_lists)
        except CouplingRegimeError as exc:
            return CouplingAudit(coupling, 0, math.nan, math.nan, math.nan, False, str(exc))

        def predicted_size(key: int) -> int:
            predicted, _ = cp.disjoint_predict(params, key)
            return size(predicted)

    else:
        raise ValueError(f"unknown coupling {coupling!r}")

    total = 0
    total_sq = 0
    for i in range(trials):
        s = predicted_size(stream.subkey(1, i))
        total += s
        total_sq += s * s
    mean = total / trials
    var = max(0.0, total_sq / trials - mean * mean)
    half = 1.96 * math.sqrt(var / trials)
    return CouplingAudit(coupling, trials, mean, mean - half, mean + half, True)
