"""Local grand couplings for single-site recoloring updates.

Each coupling turns one addressed seed into (a) a predicted bounding set for
the updated vertex, valid for every neighbor configuration consistent with
the current bounding lists, and (b) a decode rule that, given the realized
set of blocked colors, returns a color with marginal Uniform([q] \\ blocked).

Three constructions are provided:

* compress: predicted set is a fixed reference set A (|A| = max degree)
  plus one uniform extra color; always available, never shrinks lists
  below |A| + 1.
* seeding: predicted set is a short random prefix of a permutation of the
  neighborhood slack plus one free color; its size distribution is chosen
  by a small linear program so the expected size is minimal.
* disjoint: predicted set has size 1 or 2; exploits neighbors whose 2-color
  lists are disjoint from everything else, whose realized color always
  blocks exactly one of the two.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .colorsets import (
    ColorSet,
    bit,
    complement,
    contains,
    iter_colors,
    mask_from,
    nth_color,
    size,
)
from .errors import CouplingRegimeError, EngineError
from .seedstream import randint_below, shuffled, shuffled_prefix, unit_uniform

# ---------------------------------------------------------------------------
# Size laws and the feasibility LP
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class SizeLaw:
    """Sparse distribution over bounding-set sizes."""

    sizes: tuple[int, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.sizes) != len(self.probs):
            raise ValueError("sizes and probs must have equal length")
        if any(p < -1e-12 for p in self.probs):
            raise ValueError("size law has a negative probability")
        total = sum(self.probs)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"size law sums to {total}, not 1")

    def r(self, k: int) -> float:
        for s, p in zip(self.sizes, self.probs):
            if s == k:
                return p
        return 0.0

    @property
    def expected_size(self) -> float:
        return sum(k * p for k, p in zip(self.sizes, self.probs))

    @staticmethod
    def two_point(k_lo: int, p_lo: float, k_hi: int) -> "SizeLaw":
        if p_lo >= 1.0:
            return SizeLaw((k_lo,), (1.0,))
        if p_lo <= 0.0:
            return SizeLaw((k_hi,), (1.0,))
        return SizeLaw((k_lo, k_hi), (p_lo, 1.0 - p_lo))


@dataclass(frozen=True, slots=True)
class LPInstance:
    """Parameters of the size-law feasibility program.

    Rows are indexed by the number j of blocked colors drawn from the slack
    set; z_j(k) is the chance that a uniform j-subset of the slack covers a
    fixed (k-1)-subset.
    """

    s_size: int
    delta: int
    q: int

    def __post_init__(self):
        if not (0 < self.delta < self.q):
            raise ValueError("need 0 < delta < q")
        if not (0 <= self.s_size < self.q):
            raise ValueError("need 0 <= |S| < q")

    def z(self, j: int, k: int) -> float:
        den = comb(self.s_size, k - 1)
        if den == 0:
            raise CouplingRegimeError(
                f"size {k} unusable with slack of {self.s_size} colors"
            )
        return comb(j, k - 1) / den

    def z_top(self, k: int) -> float:
        return self.z(self.delta, k)

    @property
    def w(self) -> float:
        return (self.q - self.s_size) / (self.q - self.delta)

    def row_bound(self, j: int) -> float:
        return (self.q - self.s_size) / (self.q - j)


def lp_constraint_lhs(inst: LPInstance, law: SizeLaw, j: int) -> float:
    """Left-hand side of feasibility row j; feasible iff <= row_bound(j)."""
    if not 1 <= j <= inst.delta:
        raise ValueError("row index out of range")
    acc = 0.0
    for k, p in zip(law.sizes, law.probs):
        if p > 0.0:
            acc += p * inst.z(j, k)
    return acc


def verify_full_lp(inst: LPInstance, law: SizeLaw, tol: float = 1e-9):
    """Check every feasibility row; returns (ok, violations).

    Rows j > |S| cannot arise (blocked colors inside the slack set number at
    most |S|) and are skipped. Violations are (j, lhs, bound) triples.
    """
    violations = []
    top = min(inst.delta, inst.s_size)
    for j in range(1, top + 1):
        try:
            lhs = lp_constraint_lhs(inst, law, j)
        except CouplingRegimeError:
            violations.append((j, float("inf"), inst.row_bound(j)))
            continue
        bound = inst.row_bound(j)
        if lhs > bound + tol:
            violations.append((j, lhs, bound))
    return (not violations, violations)


def solve_relaxed_lp(inst: LPInstance) -> SizeLaw:
    """Closed-form optimum of the program relaxed to its top row.

    With z(k) = z_delta(k) decreasing and convex in k, the minimizer of the
    expected size subject to sum r_k z(k) <= w is supported on the two
    consecutive sizes straddling w.
    """
    if inst.s_size <= inst.delta:
        raise CouplingRegimeError(
            "relaxed program is only meaningful for slack larger than delta"
        )
    w = inst.w
    for i in range(2, inst.delta + 1):
        zi = inst.z_top(i)
        if zi <= w:
            zprev = inst.z_top(i - 1)
            r_lo = (w - zi) / (zprev - zi)
            if r_lo <= 0.0:
                return SizeLaw((i,), (1.0,))
            return SizeLaw((i - 1, i), (r_lo, 1.0 - r_lo))
    raise CouplingRegimeError(
        f"no feasible size <= delta for |S|={inst.s_size}, delta={inst.delta}, q={inst.q}"
    )


def relaxed_lp_vertices(inst: LPInstance):
    """All vertices of the relaxed feasible region, as size laws.

    Vertices are point masses on feasible sizes plus two-point mixtures that
    make the single moment constraint tight. Used as an independent check
    that the closed form is optimal.
    """
    w = inst.w
    zs = {k: inst.z_top(k) for k in range(1, inst.delta + 1)}
    out = []
    for k, zk in zs.items():
        if zk <= w + 1e-15:
            out.append(SizeLaw((k,), (1.0,)))
    ks = sorted(zs)
    for a in ks:
        for b in ks:
            if a >= b or abs(zs[a] - zs[b]) < 1e-15:
                continue
            r_a = (w - zs[b]) / (zs[a] - zs[b])
            if 0.0 <= r_a <= 1.0:
                law = SizeLaw((a, b), (r_a, 1.0 - r_a))
                out.append(law)
    return out


def relaxed_lp_vertex_optimum(inst: LPInstance) -> float:
    return min(v.expected_size for v in relaxed_lp_vertices(inst))


# ---------------------------------------------------------------------------
# Compress
# ---------------------------------------------------------------------------
#
# Draw layout at an update key: draw 0 selects the extra color x' from
# [q] \ A, draw 1 is the acceptance variate u', draws 2.. drive the
# Fisher-Yates shuffle of A (ascending order).


@dataclass(frozen=True, slots=True)
class CompressDraw:
    pi: tuple[int, ...]
    x_prime: int
    u_prime: float


def compress_extra_color(a_mask: ColorSet, q: int, key: int) -> int:
    outside = q - size(a_mask)
    if outside <= 0:
        raise CouplingRegimeError("compress needs at least one color outside A")
    return nth_color(complement(a_mask, q), randint_below(key, 0, outside))


def compress_draw(a_mask: ColorSet, q: int, key: int) -> CompressDraw:
    x_prime = compress_extra_color(a_mask, q, key)
    u_prime = unit_uniform(key, 1)
    pi = tuple(shuffled(key, 2, list(iter_colors(a_mask))))
    return CompressDraw(pi=pi, x_prime=x_prime, u_prime=u_prime)


def compress_predict(a_mask: ColorSet, q: int, key: int) -> tuple[ColorSet, int]:
    """Predicted bounding set A + {x'} without materializing the permutation."""
    x_prime = compress_extra_color(a_mask, q, key)
    return a_mask | bit(x_prime), x_prime


def compress_decode(a_mask: ColorSet, q: int, draw: CompressDraw, blocked: ColorSet) -> int:
    """Color for the realized blocked set; uniform on [q] \\ blocked."""
    delta = len(draw.pi)
    n_blocked = size(blocked)
    if n_blocked > delta:
        raise EngineError(f"blocked set of size {n_blocked} exceeds |A| = {delta}")
    if not contains(blocked, draw.x_prime):
        if draw.u_prime <= (q - delta) / (q - n_blocked):
            return draw.x_prime
    for y in draw.pi:
        if not contains(blocked, y):
            return y
    raise EngineError("compress decode found no available color; blocked set impossible")


# ---------------------------------------------------------------------------
# Seeding
# ---------------------------------------------------------------------------
#
# Draw layout: draw 0 samples the target size K from the size law, draw 1
# picks the free color c0 outside the slack set, draw 2 is the acceptance
# variate u', draws 3.. drive the shuffle of the slack set (only the first
# K-1 positions are ever materialized).


@dataclass(frozen=True, slots=True)
class SeedingDraw:
    k: int
    prefix: tuple[int, ...]
    c0: int
    u_prime: float


def seeding_size_law(s_size: int, delta: int, q: int) -> SizeLaw:
    """Two-point size law on {2, 3} for a slack set of s_size colors.

    The three-point mass is clamped to zero when the slack is small enough
    that size 2 alone is feasible; outside the feasible regime the full
    row check fails and the caller is expected to fall back to compress.
    """
    if q <= delta:
        raise CouplingRegimeError("seeding needs q > delta")
    if s_size <= q - delta:
        r3 = 0.0
    else:
        r3 = (s_size + delta - q) * (s_size - 1) / ((q - delta) * delta)
    if r3 > 1.0 + 1e-12:
        raise CouplingRegimeError(
            f"seeding size law infeasible: r3 = {r3:.4f} for |S|={s_size}, "
            f"delta={delta}, q={q}"
        )
    law = SizeLaw.two_point(2, 1.0 - min(r3, 1.0), 3)
    if s_size > 0:
        ok, violations = verify_full_lp(LPInstance(s_size, delta, q), law)
        if not ok:
            raise CouplingRegimeError(
                f"seeding size law violates feasibility rows {violations[:3]} "
                f"for |S|={s_size}, delta={delta}, q={q}"
            )
    return law


def _draw_size(law: SizeLaw, key: int) -> int:
    u = unit_uniform(key, 0)
    acc = 0.0
    for k, p in zip(law.sizes, law.probs):
        acc += p
        if u < acc:
            return k
    return law.sizes[-1]


def seeding_predict(
    s_sorted: tuple[int, ...],
    s_mask: ColorSet,
    law: SizeLaw,
    q: int,
    key: int,
) -> tuple[ColorSet, SeedingDraw]:
    s_size = len(s_sorted)
    t_size = q - s_size
    if t_size <= 0:
        raise CouplingRegimeError("seeding needs a free color outside the slack set")
    if s_size == 0:
        c0 = randint_below(key, 1, q)
        draw = SeedingDraw(k=1, prefix=(), c0=c0, u_prime=unit_uniform(key, 2))
        return bit(c0), draw
    k = _draw_size(law, key)
    if k - 1 > s_size:
        raise EngineError(f"size law asks for {k - 1} slack colors, only {s_size} exist")
    c0 = nth_color(complement(s_mask, q), randint_below(key, 1, t_size))
    u_prime = unit_uniform(key, 2)
    prefix = tuple(shuffled_prefix(key, 3, list(s_sorted), k - 1))
    draw = SeedingDraw(k=k, prefix=prefix, c0=c0, u_prime=u_prime)
    return mask_from(prefix) | bit(c0), draw


def seeding_acceptance(s_size: int, law: SizeLaw, q: int, n_blocked: int) -> float:
    """Acceptance probability for emitting a slack color given |C| blocked."""
    p_c = 0.0
    for k, p in zip(law.sizes, law.probs):
        if p > 0.0:
            p_c += p * comb(n_blocked, k - 1) / comb(s_size, k - 1)
    q_c = (q - s_size) / (q - n_blocked)
    if p_c >= 1.0:
        return 1.0
    return (1.0 - q_c) / (1.0 - p_c)


def seeding_decode(
    s_mask: ColorSet,
    law: SizeLaw,
    q: int,
    draw: SeedingDraw,
    c_mask: ColorSet,
) -> int:
    """Color for blocked colors C inside the slack set; uniform on [q] \\ C."""
    if c_mask & ~s_mask:
        raise EngineError("blocked colors outside the slack set reached seeding decode")
    s_size = size(s_mask)
    if s_size == 0:
        return draw.c0
    first_open = None
    for y in draw.prefix:
        if not contains(c_mask, y):
            first_open = y
            break
    if first_open is not None:
        alpha = seeding_acceptance(s_size, law, q, size(c_mask))
        if draw.u_prime < alpha:
            return first_open
    return draw.c0


# ---------------------------------------------------------------------------
# Disjoint
# ---------------------------------------------------------------------------
#
# The seed selects one slot from a fixed layout: one slot per disjoint
# neighbor pair, one per remaining slack color, and a leftover region.
# A pair slot always emits the pair member the realized configuration
# left available (exactly one, by disjointness). A color slot emits its
# color with a C-dependent acceptance tuned so every available color ends
# with mass exactly 1/(q - |C|); rejections and the leftover region emit a
# reserve color drawn uniformly outside the slack set. Every slot's image
# over realizable configurations has at most two colors, so the predicted
# bounding set always has size 1 or 2.
#
# Draw layout: draw 0 selects the slot, draw 1 is the acceptance variate,
# draw 2 picks the reserve color.

_SLOT_PAIR = 0
_SLOT_COLOR = 1
_SLOT_LEFTOVER = 2


@dataclass(frozen=True)
class DisjointParams:
    q: int
    delta: int
    s_mask: ColorSet
    q_mask: ColorSet
    pairs: tuple[tuple[int, int], ...]
    d_colors: tuple[int, ...]
    e_colors: tuple[int, ...]
    p_pair: float
    s_d: float
    s_e: float
    leftover: float

    @property
    def d_mask(self) -> ColorSet:
        return mask_from(self.d_colors)

    @property
    def success_bound(self) -> float:
        """Exact probability that the predicted set is a singleton."""
        return self.leftover


@dataclass(frozen=True, slots=True)
class DisjointDraw:
    slot_kind: int
    pair: tuple[int, int] | None
    color: int
    slot_prob: float
    in_d: bool
    v: float
    reserve: int


def disjoint_params(
    q: int,
    delta: int,
    s_mask: ColorSet,
    q_mask: ColorSet,
    pairs: tuple[tuple[int, int], ...],
) -> DisjointParams:
    """Build the slot layout; raises when the slot masses exceed 1.

    Feasibility always holds when every neighbor list has at most two
    colors and q >= 2.5 * delta; larger lists are tolerated as long as the
    mass check passes.
    """
    if q <= delta:
        raise CouplingRegimeError("disjoint needs q > delta")
    t_size = q - size(s_mask)
    if t_size <= 0:
        raise CouplingRegimeError("disjoint needs a reserve color outside the slack set")
    b = len(pairs)
    q_size = size(q_mask)
    d_mask = mask_from(c for p in pairs for c in p)
    e_mask = s_mask & ~q_mask & ~d_mask
    p_pair = 1.0 / (q - q_size - b) if b else 0.0
    s_d = max(0.0, 1.0 / (q - delta) - p_pair)
    s_e = 1.0 / (q - delta)
    e_colors = tuple(iter_colors(e_mask))
    d_colors = tuple(iter_colors(d_mask))
    mass = b * p_pair + len(d_colors) * s_d + len(e_colors) * s_e
    leftover = 1.0 - mass
    if leftover < -1e-9:
        raise CouplingRegimeError(
            f"disjoint coupling infeasible: slot mass {mass:.6f} exceeds 1 "
            f"(|S|={size(s_mask)}, |Q|={q_size}, pairs={b}, q={q}, delta={delta})"
        )
    return DisjointParams(
        q=q,
        delta=delta,
        s_mask=s_mask,
        q_mask=q_mask,
        pairs=tuple(sorted(pairs)),
        d_colors=d_colors,
        e_colors=e_colors,
        p_pair=p_pair,
        s_d=s_d,
        s_e=s_e,
        leftover=max(0.0, leftover),
    )


def disjoint_params_from_lists(q: int, delta: int, neighbor_lists) -> DisjointParams:
    """Slot layout for the given neighbor bounding lists.

    A 2-color list qualifies as a disjoint pair when it intersects no other
    neighbor list of any size; its colors then block exactly one of the two
    in every realizable configuration.
    """
    lists = list(neighbor_lists)
    s_mask = 0
    q_mask = 0
    for m in lists:
        s_mask |= m
        if size(m) == 1:
            q_mask |= m
    pairs = []
    for i, m in enumerate(lists):
        if size(m) != 2:
            continue
        if any(j != i and (m & other) for j, other in enumerate(lists)):
            continue
        a = m & -m
        pairs.append((a.bit_length() - 1, (m ^ a).bit_length() - 1))
    return disjoint_params(q, delta, s_mask, q_mask, tuple(pairs))


def disjoint_predict(params: DisjointParams, key: int) -> tuple[ColorSet, DisjointDraw]:
    u = unit_uniform(key, 0)
    v = unit_uniform(key, 1)
    t_mask = complement(params.s_mask, params.q)
    reserve = nth_color(t_mask, randint_below(key, 2, size(t_mask)))
    acc = 0.0
    if params.p_pair > 0.0:
        for pair in params.pairs:
            acc += params.p_pair
            if u < acc:
                draw = DisjointDraw(_SLOT_PAIR, pair, -1, params.p_pair, False, v, reserve)
                return mask_from(pair), draw
    if params.s_d > 0.0:
        for c in params.d_colors:
            acc += params.s_d
            if u < acc:
                draw = DisjointDraw(_SLOT_COLOR, None, c, params.s_d, True, v, reserve)
                return bit(c) | bit(reserve), draw
    for c in params.e_colors:
        acc += params.s_e
        if u < acc:
            draw = DisjointDraw(_SLOT_COLOR, None, c, params.s_e, False, v, reserve)
            return bit(c) | bit(reserve), draw
    draw = DisjointDraw(_SLOT_LEFTOVER, None, -1, params.leftover, False, v, reserve)
    return bit(reserve), draw


def disjoint_decode(params: DisjointParams, draw: DisjointDraw, blocked: ColorSet) -> int:
    n_blocked = size(blocked)
    if n_blocked > params.delta:
        raise EngineError(
            f"blocked set of size {n_blocked} exceeds delta = {params.delta}"
        )
    if draw.slot_kind == _SLOT_PAIR:
        a, b = draw.pair
        a_in = contains(blocked, a)
        b_in = contains(blocked, b)
        if a_in == b_in:
            raise EngineError(
                f"blocked set not realizable: pair ({a}, {b}) has {a_in + b_in} members blocked"
            )
        return b if a_in else a
    if draw.slot_kind == _SLOT_COLOR:
        c = draw.color
        if not contains(blocked, c):
            target = 1.0 / (params.q - n_blocked)
            needed = target - (params.p_pair if draw.in_d else 0.0)
            if needed > 0.0 and draw.v * draw.slot_prob < needed:
                return c
        return draw.reserve
    return draw.reserve
