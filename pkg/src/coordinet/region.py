"""Inner and outer bounds on the relay coordination rate region.

The inner bound is evaluated on couplings factored as
p(u,v,w) * p(y2|u,w) * p(y1|v,w), which carries the long Markov chain
Y2 - UW - VW - Y1 by construction; membership searches only have to
drive the (Y1,Y2)-marginal onto the target.  The outer bound is evaluated
on couplings q(y1,y2) * p(u,v|y1,y2) with the two short chains
Y2 - U - Y1 and Y2 - V - Y1 enforced by penalty.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .information import mutual_information
from .optimize import coordinate_descent, dirichlet_rows
from .pmf import Alphabet, ConditionalPmf, JointPmf

INNER_BOUND_NAMES = ("total", "link1", "link2", "forward")

# Stand-in for infinite rates inside smooth objectives; comparisons and
# reported slacks use true math.inf.
_BIG = 1e6


@dataclass(frozen=True)
class RateTuple:
    """Link rates in bits/symbol; +inf is a first-class value."""

    rf1: float
    rb1: float
    rf2: float
    rb2: float

    def __post_init__(self):
        for name in ("rf1", "rb1", "rf2", "rb2"):
            v = float(getattr(self, name))
            if math.isnan(v) or v < 0:
                raise ValueError(f"rate {name} must be >= 0, got {v}")
            object.__setattr__(self, name, v)

    @property
    def sums(self) -> np.ndarray:
        """Rate sums matched to the four inner-bound rows:
        total, rb1+rf1, rb2+rf2, rf1+rf2."""
        return np.array([self.rb1 + self.rf1 + self.rb2 + self.rf2,
                         self.rb1 + self.rf1,
                         self.rb2 + self.rf2,
                         self.rf1 + self.rf2])

    def dominates(self, other: "RateTuple") -> bool:
        return (self.rf1 >= other.rf1 and self.rb1 >= other.rb1
                and self.rf2 >= other.rf2 and self.rb2 >= other.rb2)


@dataclass(frozen=True)
class InnerCoupling:
    """Auxiliary coupling for the inner bound, in constructive form."""

    p_uvw: JointPmf                 # over (U, V, W)
    chan_y2: ConditionalPmf         # (U, W) -> Y2
    chan_y1: ConditionalPmf         # (V, W) -> Y1

    @property
    def caps(self) -> tuple[int, int, int]:
        return self.p_uvw.sizes

    def joint(self) -> JointPmf:
        """Induced joint over (U, V, W, Y1, Y2)."""
        j = self.p_uvw.attach(self.chan_y2).attach(self.chan_y1)
        return j.reorder(("U", "V", "W", "Y1", "Y2"))

    def marginal_y(self) -> JointPmf:
        return self.joint().marginal(("Y1", "Y2"))

    def tv_to(self, q: JointPmf) -> float:
        return self.marginal_y().tv(q)

    def chain_slacks(self) -> tuple[float, float]:
        """The two conditional informations certifying Y2 - UW - VW - Y1."""
        j = self.joint()
        return (mutual_information(j, ("Y2",), ("V", "Y1"), given=("U", "W")),
                mutual_information(j, ("Y1",), ("Y2", "U"), given=("V", "W")))


@dataclass(frozen=True)
class OuterCoupling:
    """Auxiliary coupling for the outer bound: q composed with p(u,v|y1,y2)."""

    q: JointPmf                     # over (Y1, Y2)
    chan_uv: ConditionalPmf         # (Y1, Y2) -> (U, V)

    @property
    def caps(self) -> tuple[int, int]:
        return tuple(a.size for a in self.chan_uv.target)

    def joint(self) -> JointPmf:
        return self.q.attach(self.chan_uv)

    def markov_slacks(self) -> tuple[float, float]:
        j = self.joint()
        return (mutual_information(j, ("Y1",), ("Y2",), given=("U",)),
                mutual_information(j, ("Y1",), ("Y2",), given=("V",)))


@dataclass
class RegionDecision:
    verdict: str                    # "inside" | "outside-heuristic" | "inconclusive"
    witness: object | None
    best_slack: float
    restarts_used: int


@dataclass
class SearchConfig:
    restarts: int = 10
    max_iters: int = 3000
    stall_limit: int = 60
    tol: float = 1e-9
    seed: int = 0
    penalty: float = 100.0
    tv_tol: float = 1e-4
    slack_tol: float = 1e-6
    outside_margin: float = 1e-3
    markov_tol: float = 1e-4


# ---------------------------------------------------------------------------
# Inner bound.

def inner_rhs_from_joint(j: JointPmf) -> np.ndarray:
    """The four right-hand sides of the inner-bound inequalities, from a
    joint over (U, V, W, Y1, Y2)."""
    y = ("Y1", "Y2")
    b_total = (mutual_information(j, y, ("V", "U", "W"))
               + mutual_information(j, ("U",), ("V",), given=("W",))
               + mutual_information(j, ("W",), y))
    b_link1 = mutual_information(j, y, ("V", "W"))
    b_link2 = mutual_information(j, y, ("U", "W"))
    b_fwd = (mutual_information(j, ("U",), ("V",), given=("W",))
             + mutual_information(j, ("W",), y))
    return np.array([b_total, b_link1, b_link2, b_fwd])


def inner_rhs(c: InnerCoupling) -> np.ndarray:
    return inner_rhs_from_joint(c.joint())


def inner_check(c: InnerCoupling, r: RateTuple) -> np.ndarray:
    """Rate sums minus the inner right-hand sides; all >= 0 (within
    tolerance) means r is achievable through this coupling."""
    return r.sums - inner_rhs(c)


def _canonical_inner_couplings(q: JointPmf, caps: tuple[int, int, int] | None,
                               tight: bool = False) -> dict[str, InnerCoupling]:
    """Structured couplings with exact target marginal, used as search seeds
    and as named builtins.  With ``tight`` the auxiliary alphabets take the
    smallest workable sizes instead of being padded to ``caps``."""
    n1, n2 = q.sizes
    qt = q.table
    q1 = qt.sum(axis=1)
    q2 = qt.sum(axis=0)
    out: dict[str, InnerCoupling] = {}

    def sizes_for(nu, nv, nw):
        if tight:
            return nu, nv, nw
        cu, cv, cw = caps
        if nu > cu or nv > cv or nw > cw:
            return None
        return cu, cv, cw

    def build(name, nu, nv, nw, p_uv_w, y2_map, y1_map):
        s = sizes_for(nu, nv, nw)
        if s is None:
            return
        cu, cv, cw = s
        p = np.zeros((cu, cv, cw))
        p[:nu, :nv, :nw] = p_uv_w
        c2 = np.full((cu, cw, n2), 1.0 / n2)
        c1 = np.full((cv, cw, n1), 1.0 / n1)
        c2[:nu, :nw] = y2_map
        c1[:nv, :nw] = y1_map
        out[name] = InnerCoupling(
            JointPmf((Alphabet("U", cu), Alphabet("V", cv), Alphabet("W", cw)), p),
            ConditionalPmf((Alphabet("U", cu), Alphabet("W", cw)), (Alphabet("Y2", n2),), c2),
            ConditionalPmf((Alphabet("V", cv), Alphabet("W", cw)), (Alphabet("Y1", n1),), c1),
        )

    # constants + independent product channels (exact iff q is a product)
    build("const", 1, 1, 1, np.ones((1, 1, 1)),
          q2.reshape(1, 1, n2), q1.reshape(1, 1, n1))
    # W carries the full pair (y1, y2)
    m = n1 * n2
    pw = np.zeros((1, 1, m))
    pw[0, 0, :] = qt.ravel()
    y2_of_w = np.zeros((1, m, n2))
    y1_of_w = np.zeros((1, m, n1))
    for w in range(m):
        y1_of_w[0, w, w // n2] = 1.0
        y2_of_w[0, w, w % n2] = 1.0
    build("copy-w", 1, 1, m, pw, y2_of_w, y1_of_w)
    # W = Y1, node 2 draws Y2 from the conditional
    pwy1 = np.zeros((1, 1, n1))
    pwy1[0, 0, :] = q1
    y1_id = np.zeros((1, n1, n1))
    y2_cond = np.full((1, n1, n2), 1.0 / n2)
    for w in range(n1):
        y1_id[0, w, w] = 1.0
        if q1[w] > 0:
            y2_cond[0, w] = qt[w] / q1[w]
    build("w-from-y1", 1, 1, n1, pwy1, y2_cond, y1_id)
    # W = Y2, node 1 draws Y1 from the conditional
    pwy2 = np.zeros((1, 1, n2))
    pwy2[0, 0, :] = q2
    y2_id = np.zeros((1, n2, n2))
    y1_cond = np.full((1, n2, n1), 1.0 / n1)
    for w in range(n2):
        y2_id[0, w, w] = 1.0
        if q2[w] > 0:
            y1_cond[0, w] = qt[:, w] / q2[w]
    build("w-from-y2", 1, 1, n2, pwy2, y2_cond, y1_cond)
    # U = Y2 and V = Y1 with constant W
    puv = qt.T.reshape(n2, n1, 1)  # p(u=y2, v=y1)
    y2_u = np.zeros((n2, 1, n2))
    y1_v = np.zeros((n1, 1, n1))
    for u in range(n2):
        y2_u[u, 0, u] = 1.0
    for v in range(n1):
        y1_v[v, 0, v] = 1.0
    build("uv-copy", n2, n1, 1, puv, y2_u, y1_v)
    return out


def canonical_couplings(q: JointPmf, caps: tuple[int, int, int] | None = None):
    """Named reference couplings for a target q (tight alphabet sizes)."""
    return _canonical_inner_couplings(q, caps, tight=caps is None)


def _inner_objective(qt: np.ndarray, sums: np.ndarray, caps, cfg: SearchConfig):
    nu, nv, nw = caps
    n1, n2 = qt.shape
    s = np.minimum(sums, _BIG)

    def objective(batch):
        p = batch[0].reshape(-1, nu, nv, nw)
        c2 = batch[1].reshape(-1, nu, nw, n2)
        c1 = batch[2].reshape(-1, nv, nw, n1)
        j = (p[:, :, :, :, None, None]
             * c1[:, None, :, :, :, None]
             * c2[:, :, None, :, None, :])  # (B, U, V, W, Y1, Y2)

        def h(axes_keep):
            drop = tuple(i for i in range(1, 6) if i not in axes_keep)
            m = j.sum(axis=drop)
            return -(np.where(m > 0, m * np.log2(np.where(m > 0, m, 1.0)), 0.0)
                     ).sum(axis=tuple(range(1, m.ndim)))

        U, V, W, Y1, Y2 = 1, 2, 3, 4, 5
        hw = h({W}); hy = h({Y1, Y2}); hwy = h({W, Y1, Y2})
        huw = h({U, W}); hvw = h({V, W}); huvw = h({U, V, W})
        hall = h({U, V, W, Y1, Y2})
        hvwy = h({V, W, Y1, Y2}); huwy = h({U, W, Y1, Y2})
        i_uv_w = huw + hvw - hw - huvw
        i_w_y = hw + hy - hwy
        b = np.stack([
            hy + huvw - hall + i_uv_w + i_w_y,
            hy + hvw - hvwy,
            hy + huw - huwy,
            i_uv_w + i_w_y,
        ], axis=1)
        min_slack = (s[None, :] - b).min(axis=1)
        marg = j.sum(axis=(U, V, W))
        tv = 0.5 * np.abs(marg - qt[None]).sum(axis=(1, 2))
        return -min_slack + cfg.penalty * np.maximum(0.0, tv - cfg.tv_tol)

    return objective


def _coupling_to_blocks(c: InnerCoupling):
    nu, nv, nw = c.p_uvw.sizes
    n2 = c.chan_y2.target[0].size
    n1 = c.chan_y1.target[0].size
    return [c.p_uvw.table.reshape(1, nu * nv * nw),
            c.chan_y2.table.reshape(nu * nw, n2),
            c.chan_y1.table.reshape(nv * nw, n1)]


def _blocks_to_coupling(blocks, caps, n1, n2) -> InnerCoupling:
    nu, nv, nw = caps
    return InnerCoupling(
        JointPmf((Alphabet("U", nu), Alphabet("V", nv), Alphabet("W", nw)),
                 blocks[0].reshape(nu, nv, nw)),
        ConditionalPmf((Alphabet("U", nu), Alphabet("W", nw)), (Alphabet("Y2", n2),),
                       blocks[1].reshape(nu, nw, n2)),
        ConditionalPmf((Alphabet("V", nv), Alphabet("W", nw)), (Alphabet("Y1", n1),),
                       blocks[2].reshape(nv, nw, n1)),
    )


def _pad_inner(c: InnerCoupling, caps) -> InnerCoupling | None:
    nu, nv, nw = c.p_uvw.sizes
    cu, cv, cw = caps
    if (nu, nv, nw) == (cu, cv, cw):
        return c
    if nu > cu or nv > cv or nw > cw:
        return None
    n1 = c.chan_y1.target[0].size
    n2 = c.chan_y2.target[0].size
    p = np.zeros((cu, cv, cw))
    p[:nu, :nv, :nw] = c.p_uvw.table
    c2 = np.full((cu, cw, n2), 1.0 / n2)
    c2[:nu, :nw] = c.chan_y2.table
    c1 = np.full((cv, cw, n1), 1.0 / n1)
    c1[:nv, :nw] = c.chan_y1.table
    return InnerCoupling(
        JointPmf((Alphabet("U", cu), Alphabet("V", cv), Alphabet("W", cw)), p),
        ConditionalPmf((Alphabet("U", cu), Alphabet("W", cw)), (Alphabet("Y2", n2),), c2),
        ConditionalPmf((Alphabet("V", cv), Alphabet("W", cw)), (Alphabet("Y1", n1),), c1),
    )


def inner_membership(q: JointPmf, r: RateTuple, caps: tuple[int, int, int] = (4, 4, 4),
                     config: SearchConfig | None = None,
                     extra_seeds: Sequence[InnerCoupling] = ()) -> RegionDecision:
    """Search for a coupling witnessing that r is achievable.

    The inner bound is existential, so the only negative verdict is
    "inconclusive"; ``best_slack`` then reports the best minimum slack seen
    among couplings whose marginal matched the target.
    """
    cfg = config or SearchConfig()
    n1, n2 = q.sizes
    sums = r.sums
    objective = _inner_objective(q.table, sums, caps, cfg)
    rng = np.random.default_rng(cfg.seed)

    starts: list[list[np.ndarray]] = []
    for c in extra_seeds:
        padded = _pad_inner(c, caps)
        if padded is not None:
            starts.append(_coupling_to_blocks(padded))
    for c in _canonical_inner_couplings(q, caps).values():
        starts.append(_coupling_to_blocks(c))
    nu, nv, nw = caps
    while len(starts) < cfg.restarts + len(extra_seeds):
        starts.append([dirichlet_rows(rng, 1, nu * nv * nw),
                       dirichlet_rows(rng, nu * nw, n2),
                       dirichlet_rows(rng, nv * nw, n1)])

    best_slack = -math.inf
    best_witness = None
    used = 0

    def consider(cand: InnerCoupling) -> bool:
        nonlocal best_slack, best_witness
        if cand.tv_to(q) > cfg.tv_tol:
            return False
        slack = float(np.min(inner_check(cand, r)))
        if slack > best_slack:
            best_slack, best_witness = slack, cand
        return best_slack >= -cfg.slack_tol

    for start in starts:
        used += 1
        # seeds are exact couplings; accept without a descent when they
        # already witness membership
        if consider(_blocks_to_coupling(start, caps, n1, n2)):
            return RegionDecision("inside", best_witness, best_slack, used)
        blocks, _, _ = coordinate_descent(objective, start, max_iters=cfg.max_iters,
                                          stall_limit=cfg.stall_limit, tol=cfg.tol)
        if consider(_blocks_to_coupling(blocks, caps, n1, n2)):
            return RegionDecision("inside", best_witness, best_slack, used)
    return RegionDecision("inconclusive", best_witness, best_slack, used)


# ---------------------------------------------------------------------------
# Outer bound.

def outer_slack(c: OuterCoupling, r: RateTuple) -> float:
    """min over the three outer-bound inequalities of (rate sum - bound)."""
    j = c.joint()
    y = ("Y1", "Y2")
    b1 = mutual_information(j, y, ("V",))
    b2 = mutual_information(j, y, ("U",))
    b3 = max(mutual_information(j, ("U",), ("Y1",)), mutual_information(j, ("V",), ("Y2",)))
    return min(r.rb1 + r.rf1 - b1, r.rb2 + r.rf2 - b2, r.rf1 + r.rf2 - b3)


def outer_coupling_from_inner(c: InnerCoupling,
                              caps: tuple[int, int] | None = None) -> OuterCoupling | None:
    """The outer coupling induced by an inner one: U' = (U, W), V' = (V, W).

    The long chain Y2 - UW - VW - Y1 gives both short chains Y2 - U' - Y1
    and Y2 - V' - Y1, so every inner witness converts to an outer witness.
    Returns None when the used support does not fit under ``caps``.
    """
    j = c.joint().reorder(("Y1", "Y2", "U", "V", "W"))
    nu, nv, nw = c.p_uvw.sizes
    n1, n2 = j.sizes[0], j.sizes[1]
    q = j.marginal(("Y1", "Y2"))
    if caps is None:
        caps = (n1 * n2 + 1, n1 * n2 + 1)
    cond = j.condition(("Y1", "Y2"))  # rows over (U, V, W)
    rows = cond.table.reshape(n1 * n2, nu, nv, nw)
    full = np.zeros((n1 * n2, nu * nw, nv * nw))
    for w in range(nw):
        full[:, w + nw * np.arange(nu)[:, None], w + nw * np.arange(nv)[None, :]] = rows[..., w]
    used_u = np.flatnonzero(full.sum(axis=(0, 2)) > 0)
    used_v = np.flatnonzero(full.sum(axis=(0, 1)) > 0)
    if len(used_u) > caps[0] or len(used_v) > caps[1]:
        return None
    table = np.full((n1 * n2, caps[0], caps[1]), 0.0)
    table[np.ix_(np.arange(n1 * n2), np.arange(len(used_u)), np.arange(len(used_v)))] = \
        full[np.ix_(np.arange(n1 * n2), used_u, used_v)]
    # rows with zero conditioning mass get an arbitrary valid distribution
    defined = np.asarray(cond.defined).reshape(n1 * n2)
    table[~defined, 0, 0] = 1.0
    chan = ConditionalPmf((Alphabet("Y1", n1), Alphabet("Y2", n2)),
                          (Alphabet("U", caps[0]), Alphabet("V", caps[1])),
                          table.reshape(n1, n2, caps[0], caps[1]))
    return OuterCoupling(q, chan)


def _canonical_outer_channels(q: JointPmf, caps) -> list[np.ndarray]:
    n1, n2 = q.sizes
    cu, cv = caps
    m = n1 * n2
    rows = []

    def det(u_of, v_of):
        t = np.zeros((m, cu * cv))
        for cell in range(m):
            y1, y2 = cell // n2, cell % n2
            t[cell, u_of(y1, y2) * cv + v_of(y1, y2)] = 1.0
        return t

    if cu >= m and cv >= m:
        rows.append(det(lambda y1, y2: y1 * n2 + y2, lambda y1, y2: y1 * n2 + y2))
    if cu >= n2 and cv >= n1:
        rows.append(det(lambda y1, y2: y2, lambda y1, y2: y1))
    if cu >= n1 and cv >= n2:
        rows.append(det(lambda y1, y2: y1, lambda y1, y2: y2))
    rows.append(det(lambda y1, y2: 0, lambda y1, y2: 0))
    return rows


def _outer_objective(qt: np.ndarray, sums3: np.ndarray, caps, cfg: SearchConfig):
    n1, n2 = qt.shape
    cu, cv = caps
    s = np.minimum(sums3, _BIG)

    def objective(batch):
        rows = batch[0].reshape(-1, n1, n2, cu, cv)
        j = qt[None, :, :, None, None] * rows   # (B, Y1, Y2, U, V)

        def h(axes_keep):
            drop = tuple(i for i in range(1, 5) if i not in axes_keep)
            mm = j.sum(axis=drop)
            return -(np.where(mm > 0, mm * np.log2(np.where(mm > 0, mm, 1.0)), 0.0)
                     ).sum(axis=tuple(range(1, mm.ndim)))

        Y1, Y2, U, V = 1, 2, 3, 4
        hy = h({Y1, Y2}); hu = h({U}); hv = h({V})
        hyu = h({Y1, Y2, U}); hyv = h({Y1, Y2, V})
        h1 = h({Y1}); h2 = h({Y2})
        h1u = h({Y1, U}); h2u = h({Y2, U}); h1v = h({Y1, V}); h2v = h({Y2, V})
        b1 = hy + hv - hyv
        b2 = hy + hu - hyu
        b3 = np.maximum(h1 + hu - h1u, h2 + hv - h2v)
        mk_u = np.maximum(0.0, (h1u - hu) + (h2u - hu) - (hyu - hu))
        mk_v = np.maximum(0.0, (h1v - hv) + (h2v - hv) - (hyv - hv))
        min_slack = np.minimum(np.minimum(s[0] - b1, s[1] - b2), s[2] - b3)
        pen = (np.maximum(0.0, mk_u - 1e-6) + np.maximum(0.0, mk_v - 1e-6))
        return -min_slack + cfg.penalty * pen

    return objective


def outer_membership(q: JointPmf, r: RateTuple, config: SearchConfig | None = None,
                     caps: tuple[int, int] | None = None,
                     extra_seeds: Sequence[OuterCoupling] = ()) -> RegionDecision:
    """Heuristic membership in the outer region.

    "inside" requires a witness with both Markov slacks <= markov_tol and
    minimum slack >= -slack_tol; "outside-heuristic" is declared when no
    restart finds a valid coupling within ``outside_margin`` of feasibility.
    Global optimality is not certified.
    """
    cfg = config or SearchConfig()
    n1, n2 = q.sizes
    if caps is None:
        caps = (n1 * n2 + 1, n1 * n2 + 1)
    cu, cv = caps
    sums3 = np.array([r.rb1 + r.rf1, r.rb2 + r.rf2, r.rf1 + r.rf2])
    objective = _outer_objective(q.table, sums3, caps, cfg)
    rng = np.random.default_rng(cfg.seed)

    starts = []
    for c in extra_seeds:
        su, sv = c.caps
        if su > cu or sv > cv:
            continue
        t = np.zeros((n1 * n2, cu, cv))
        t[:, :su, :sv] = c.chan_uv.table.reshape(n1 * n2, su, sv)
        starts.append([t.reshape(n1 * n2, cu * cv)])
    for t in _canonical_outer_channels(q, caps):
        starts.append([t])
    while len(starts) < cfg.restarts + len(extra_seeds):
        starts.append([dirichlet_rows(rng, n1 * n2, cu * cv)])

    best_slack = -math.inf
    best_witness = None
    used = 0

    def consider(table: np.ndarray) -> bool:
        nonlocal best_slack, best_witness
        chan = ConditionalPmf((Alphabet("Y1", n1), Alphabet("Y2", n2)),
                              (Alphabet("U", cu), Alphabet("V", cv)),
                              table.reshape(n1, n2, cu, cv))
        cand = OuterCoupling(q, chan)
        if max(cand.markov_slacks()) > cfg.markov_tol:
            return False
        slack = outer_slack(cand, r)
        if slack > best_slack:
            best_slack, best_witness = slack, cand
        return best_slack >= -cfg.slack_tol

    for start in starts:
        used += 1
        if consider(start[0]):
            return RegionDecision("inside", best_witness, best_slack, used)
        blocks, _, _ = coordinate_descent(objective, start, max_iters=cfg.max_iters,
                                          stall_limit=cfg.stall_limit, tol=cfg.tol)
        if consider(blocks[0]):
            return RegionDecision("inside", best_witness, best_slack, used)
    if best_slack < -cfg.outside_margin:
        return RegionDecision("outside-heuristic", best_witness, best_slack, used)
    return RegionDecision("inconclusive", best_witness, best_slack, used)


# ---------------------------------------------------------------------------
# Frontier tracing.

@dataclass
class FrontierPoint:
    rates: RateTuple
    inner: RegionDecision
    outer: RegionDecision


def frontier(q: JointPmf, fixed: dict[str, float], axes: tuple[str, str],
             grid: tuple[tuple[float, float, int], tuple[float, float, int]],
             caps: tuple[int, int, int] = (4, 4, 4),
             config: SearchConfig | None = None) -> list[FrontierPoint]:
    """Run both membership tests on a rectangular grid over two rate axes.

    Witnesses found at dominated grid points are reused as seeds, which
    also guarantees membership is monotone along the grid.
    """
    cfg = config or SearchConfig()
    names = {"rf1", "rb1", "rf2", "rb2"}
    ax1, ax2 = axes
    if set(fixed) | {ax1, ax2} != names or ax1 == ax2:
        raise ValueError(f"fixed={sorted(fixed)} and axes={axes} must cover {sorted(names)}")
    v1 = np.linspace(*grid[0][:2], grid[0][2])
    v2 = np.linspace(*grid[1][:2], grid[1][2])
    inner_wit: dict[tuple[int, int], InnerCoupling] = {}
    outer_wit: dict[tuple[int, int], OuterCoupling] = {}
    points = []
    for i, a in enumerate(v1):
        for jdx, b in enumerate(v2):
            kw = dict(fixed)
            kw[ax1] = float(a)
            kw[ax2] = float(b)
            r = RateTuple(**kw)
            seeds_i = [inner_wit[k] for k in ((i - 1, jdx), (i, jdx - 1)) if k in inner_wit]
            seeds_o = [outer_wit[k] for k in ((i - 1, jdx), (i, jdx - 1)) if k in outer_wit]
            din = inner_membership(q, r, caps, cfg, extra_seeds=seeds_i)
            if din.verdict == "inside":
                derived = outer_coupling_from_inner(din.witness)
                if derived is not None:
                    seeds_o.append(derived)
            dout = outer_membership(q, r, cfg, extra_seeds=seeds_o)
            if din.verdict == "inside":
                inner_wit[(i, jdx)] = din.witness
            if dout.verdict == "inside":
                outer_wit[(i, jdx)] = dout.witness
            points.append(FrontierPoint(r, din, dout))
    return points


def random_inner_coupling(rng: np.random.Generator,
                          sizes: tuple[int, int, int, int, int] = (2, 2, 2, 2, 2)) -> InnerCoupling:
    """A random coupling (Dirichlet tables); handy for property tests."""
    nu, nv, nw, n1, n2 = sizes
    return InnerCoupling(
        JointPmf((Alphabet("U", nu), Alphabet("V", nv), Alphabet("W", nw)),
                 dirichlet_rows(rng, 1, nu * nv * nw).reshape(nu, nv, nw)),
        ConditionalPmf((Alphabet("U", nu), Alphabet("W", nw)), (Alphabet("Y2", n2),),
                       dirichlet_rows(rng, nu * nw, n2).reshape(nu, nw, n2)),
        ConditionalPmf((Alphabet("V", nv), Alphabet("W", nw)), (Alphabet("Y1", n1),),
                       dirichlet_rows(rng, nv * nw, n1).reshape(nv, nw, n1)),
    )
