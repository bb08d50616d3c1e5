"""Built-in correctness suites.

These drive the couplings and the full sampler against their distributional
contracts: decode marginals uniform over available colors for every blocked
set, decode outputs contained in predicted sets, size laws matching their
closed forms, LP feasibility across the parameter grid, and end-to-end
uniformity against exact enumeration. The CLI's verify command and the
acceptance tests both run these with different sample budgets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from scipy import stats as sps

from . import couplings as cp
from . import engine, oracle
from .colorsets import bit, complement, contains, mask_from, members, size
from .graphs import Graph, gen_cycle
from .seedstream import SeedStream, mix64

P_THRESHOLD = 1e-3


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def chi_square_vs_uniform(counts: dict[int, int], support: list[int]) -> tuple[float, float]:
    n = sum(counts.values())
    if set(counts) - set(support):
        return math.inf, 0.0
    m = len(support)
    expected = n / m
    chi2 = sum((counts.get(c, 0) - expected) ** 2 / expected for c in support)
    return chi2, float(sps.chi2.sf(chi2, m - 1))


def _subsets_up_to(colors: list[int], k: int):
    for r in range(k + 1):
        yield from itertools.combinations(colors, r)


def compress_suite(
    q: int = 6,
    delta: int = 3,
    a_colors: tuple[int, ...] = (1, 2, 3),
    n_draws: int = 20_000,
    master_seed: int = 2024,
) -> list[CheckResult]:
    """Exhaustive marginal and containment check for the compress coupling."""
    a_mask = mask_from(a_colors)
    blocked_sets = [mask_from(s) for s in _subsets_up_to(list(range(q)), delta)]
    counts = [dict() for _ in blocked_sets]
    stream = SeedStream(master_seed)
    containment_ok = True
    for i in range(n_draws):
        key = stream.subkey(1, i)
        draw = cp.compress_draw(a_mask, q, key)
        predicted = a_mask | bit(draw.x_prime)
        for j, blocked in enumerate(blocked_sets):
            c = cp.compress_decode(a_mask, q, draw, blocked)
            if not contains(predicted, c) or contains(blocked, c):
                containment_ok = False
            d = counts[j]
            d[c] = d.get(c, 0) + 1
    out = [CheckResult("compress containment", containment_ok)]
    worst_p = 1.0
    worst = None
    for j, blocked in enumerate(blocked_sets):
        support = members(complement(blocked, q))
        _, p = chi_square_vs_uniform(counts[j], support)
        if p < worst_p:
            worst_p, worst = p, members(blocked)
    out.append(
        CheckResult(
            f"compress marginals ({len(blocked_sets)} blocked sets x {n_draws} decodes)",
            worst_p > P_THRESHOLD,
            f"worst p = {worst_p:.2e} at blocked = {worst}",
        )
    )
    return out


def seeding_suite(
    s_colors: tuple[int, ...] = (1, 2, 3, 4, 5),
    delta: int = 3,
    q: int = 8,
    law: cp.SizeLaw | None = None,
    n_draws: int = 20_000,
    master_seed: int = 77,
    label: str = "",
) -> list[CheckResult]:
    """Marginals over every blocked subset of the slack set, plus containment."""
    s_sorted = tuple(sorted(s_colors))
    s_mask = mask_from(s_sorted)
    if law is None:
        law = cp.SizeLaw((2, 3), (0.4, 0.6))
    tag = f"seeding[{label}]" if label else "seeding"
    ok, violations = cp.verify_full_lp(cp.LPInstance(len(s_sorted), delta, q), law)
    out = [CheckResult(f"{tag} law feasible", ok, f"violations: {violations[:2]}")]
    c_sets = [mask_from(s) for s in _subsets_up_to(list(s_sorted), delta)]
    counts = [dict() for _ in c_sets]
    stream = SeedStream(master_seed)
    containment_ok = True
    size_ok = True
    for i in range(n_draws):
        key = stream.subkey(1, i)
        predicted, draw = cp.seeding_predict(s_sorted, s_mask, law, q, key)
        if size(predicted) != draw.k:
            size_ok = False
        for j, c_mask in enumerate(c_sets):
            c = cp.seeding_decode(s_mask, law, q, draw, c_mask)
            if not contains(predicted, c) or contains(c_mask, c):
                containment_ok = False
            d = counts[j]
            d[c] = d.get(c, 0) + 1
    out.append(CheckResult(f"{tag} containment", containment_ok))
    out.append(CheckResult(f"{tag} predicted size equals drawn size", size_ok))
    worst_p, worst = 1.0, None
    for j, c_mask in enumerate(c_sets):
        support = members(complement(c_mask, q))
        _, p = chi_square_vs_uniform(counts[j], support)
        if p < worst_p:
            worst_p, worst = p, members(c_mask)
    out.append(
        CheckResult(
            f"{tag} marginals ({len(c_sets)} blocked sets x {n_draws} decodes)",
            worst_p > P_THRESHOLD,
            f"worst p = {worst_p:.2e} at blocked = {worst}",
        )
    )
    return out


DISJOINT_FIXTURES = {
    # all lists either singletons or mutually disjoint pairs
    "paired": (10, 4, ({1, 2}, {3, 4}, {5}, {6})),
    # one triangle of entangled lists alongside a surviving pair
    "entangled": (10, 4, ({1, 2}, {2, 3}, {4, 5}, {6})),
}


def realizable_blocked_sets(neighbor_lists) -> list[int]:
    masks = set()
    for combo in itertools.product(*[members(m) for m in neighbor_lists]):
        masks.add(mask_from(combo))
    return sorted(masks)


def disjoint_suite(
    fixture: str = "paired",
    n_draws: int = 20_000,
    master_seed: int = 5,
) -> list[CheckResult]:
    """Marginals over every realizable blocked set of a small fixture."""
    q, delta, raw_lists = DISJOINT_FIXTURES[fixture]
    neighbor_lists = [mask_from(s) for s in raw_lists]
    params = cp.disjoint_params_from_lists(q, delta, neighbor_lists)
    blocked_sets = realizable_blocked_sets(neighbor_lists)
    counts = [dict() for _ in blocked_sets]
    stream = SeedStream(master_seed)
    containment_ok = True
    sizes_ok = True
    singleton = 0
    for i in range(n_draws):
        key = stream.subkey(1, i)
        predicted, draw = cp.disjoint_predict(params, key)
        if size(predicted) not in (1, 2):
            sizes_ok = False
        if size(predicted) == 1:
            singleton += 1
        for j, blocked in enumerate(blocked_sets):
            c = cp.disjoint_decode(params, draw, blocked)
            if not contains(predicted, c) or contains(blocked, c):
                containment_ok = False
            d = counts[j]
            d[c] = d.get(c, 0) + 1
    out = [
        CheckResult(f"disjoint[{fixture}] containment", containment_ok),
        CheckResult(f"disjoint[{fixture}] predicted sizes in {{1,2}}", sizes_ok),
    ]
    frac = singleton / n_draws
    sigma = math.sqrt(max(params.success_bound * (1 - params.success_bound), 1e-12) / n_draws)
    out.append(
        CheckResult(
            f"disjoint[{fixture}] singleton rate >= bound - 3 sigma",
            frac >= params.success_bound - 3 * sigma,
            f"rate = {frac:.4f}, bound = {params.success_bound:.4f}",
        )
    )
    worst_p, worst = 1.0, None
    for j, blocked in enumerate(blocked_sets):
        support = members(complement(blocked, q))
        _, p = chi_square_vs_uniform(counts[j], support)
        if p < worst_p:
            worst_p, worst = p, members(blocked)
    out.append(
        CheckResult(
            f"disjoint[{fixture}] marginals ({len(blocked_sets)} blocked sets x {n_draws})",
            worst_p > P_THRESHOLD,
            f"worst p = {worst_p:.2e} at blocked = {worst}",
        )
    )
    return out


def size_law_suite(
    s_size: int = 24,
    delta: int = 12,
    q: int = 30,
    n_draws: int = 20_000,
    master_seed: int = 31,
) -> list[CheckResult]:
    """Empirical size frequencies of the seeding coupling against its law."""
    law = cp.seeding_size_law(s_size, delta, q)
    s_sorted = tuple(range(s_size))
    s_mask = mask_from(s_sorted)
    stream = SeedStream(master_seed)
    n3 = 0
    clean = True
    for i in range(n_draws):
        predicted, draw = cp.seeding_predict(s_sorted, s_mask, law, q, stream.subkey(1, i))
        k = size(predicted)
        if k not in (2, 3):
            clean = False
        if k == 3:
            n3 += 1
    r3 = law.r(3)
    sigma = math.sqrt(r3 * (1 - r3) / n_draws)
    frac = n3 / n_draws
    return [
        CheckResult(f"seeding sizes in {{2,3}} ({n_draws} draws)", clean),
        CheckResult(
            "seeding size-3 frequency within 3 sigma",
            abs(frac - r3) <= 3 * sigma,
            f"freq = {frac:.5f}, law r3 = {r3:.5f}, sigma = {sigma:.5f}",
        ),
    ]


def lp_grid_suite(
    delta_lo: int = 3,
    delta_hi: int = 16,
    tol: float = 1e-9,
) -> list[CheckResult]:
    """Closed-form law feasibility and optimality across the parameter grid."""
    grid_points = 0
    infeasible = []
    suboptimal = []
    for delta in range(delta_lo, delta_hi + 1):
        for s_size in range(delta + 1, 2 * delta + 1):
            for q in range(math.ceil(7 * delta / 3), 3 * delta + 1):
                if s_size >= q:
                    continue
                grid_points += 1
                inst = cp.LPInstance(s_size, delta, q)
                law = cp.solve_relaxed_lp(inst)
                ok, violations = cp.verify_full_lp(inst, law, tol=tol)
                if not ok:
                    infeasible.append((delta, s_size, q, violations[:1]))
                best = cp.relaxed_lp_vertex_optimum(inst)
                if law.expected_size > best + 1e-12:
                    suboptimal.append((delta, s_size, q, law.expected_size, best))
    return [
        CheckResult(
            f"closed-form law satisfies all rows on {grid_points} grid points",
            not infeasible,
            f"violations: {infeasible[:3]}",
        ),
        CheckResult(
            "closed-form law matches vertex-enumeration optimum",
            not suboptimal,
            f"suboptimal: {suboptimal[:3]}",
        ),
    ]


def sample_many(g: Graph, base_config: engine.SamplerConfig, n: int):
    """Independent samples with per-index derived master seeds."""
    out = []
    for i in range(n):
        cfg = engine.SamplerConfig(
            q=base_config.q,
            master_seed=mix64(base_config.master_seed + (i + 1) * 0x9E3779B97F4A7C15),
            max_blocks=base_config.max_blocks,
            t1_override=base_config.t1_override,
            t2_override=base_config.t2_override,
            force=base_config.force,
        )
        out.append(engine.sample(g, cfg))
    return out


def uniformity_suite(
    n_samples: int = 4000,
    master_seed: int = 99,
) -> list[CheckResult]:
    """End-to-end uniformity of the sampler on a cycle, against enumeration."""
    g = gen_cycle(3)
    q = 6
    universe = oracle.enumerate_colorings(g, q)
    cfg = engine.SamplerConfig(q=q, master_seed=master_seed, force=True)
    results = sample_many(g, cfg, n_samples)
    gof = oracle.goodness_of_fit([r.coloring for r in results], universe)
    return [
        CheckResult(
            f"sampler uniformity on C3, q=6 ({n_samples} samples, {gof.n_cells} cells)",
            gof.pvalue > P_THRESHOLD,
            f"chi2 = {gof.chi2:.1f}, p = {gof.pvalue:.4f}, tv = {gof.tv:.4f}",
        )
    ]


def default_verify(full: bool = False) -> list[CheckResult]:
    n = 100_000 if full else 20_000
    out = []
    out += compress_suite(n_draws=n)
    out += seeding_suite(n_draws=n, label="mixed-law")
    out += seeding_suite(law=cp.seeding_size_law(5, 3, 8), n_draws=n, label="regime-law")
    out += disjoint_suite("paired", n_draws=n)
    out += disjoint_suite("entangled", n_draws=n)
    out += size_law_suite(n_draws=n)
    out += uniformity_suite(n_samples=8000 if full else 3000)
    return out
