"""Entropic quantities on joint pmfs, plus a common-information solver.

All values are in bits (log base 2) and 0*log(0) = 0 throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .optimize import coordinate_descent, dirichlet_rows
from .pmf import Alphabet, ConditionalPmf, JointPmf, UnknownVariable


class OptimizerFailed(Exception):
    """No restart produced a witness with acceptable Markov slack."""


def _xlog2(t: np.ndarray) -> np.ndarray:
    return np.where(t > 0, t * np.log2(np.where(t > 0, t, 1.0)), 0.0)


def _entropy_table(t: np.ndarray) -> float:
    return max(0.0, -float(_xlog2(t).sum()))


def entropy(p: JointPmf, vars: Sequence[str] | None = None) -> float:
    """Shannon entropy of the marginal on ``vars`` (all variables if None)."""
    if vars is None:
        return _entropy_table(p.table)
    if not vars:
        raise UnknownVariable("entropy needs a nonempty variable set")
    return _entropy_table(p.marginal(vars).table)


def conditional_entropy(p: JointPmf, left: Sequence[str], given: Sequence[str] = ()) -> float:
    if not given:
        return entropy(p, left)
    return entropy(p, tuple(left) + tuple(given)) - entropy(p, given)


def mutual_information(p: JointPmf, left: Sequence[str], right: Sequence[str],
                       given: Sequence[str] = ()) -> float:
    """I(left; right | given), clamped at 0 against rounding noise."""
    left, right, given = tuple(left), tuple(right), tuple(given)
    for a, b in ((left, right), (left, given), (right, given)):
        if set(a) & set(b):
            raise UnknownVariable(f"variable sets overlap: {set(a) & set(b)}")
    p.axes(left + right + given)
    val = conditional_entropy(p, left, given) - conditional_entropy(p, left, right + given)
    return max(0.0, val)


@dataclass(frozen=True)
class InfoQuery:
    """A conditional-mutual-information query I(left; right | given)."""

    left: tuple[str, ...]
    right: tuple[str, ...]
    given: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "right", tuple(self.right))
        object.__setattr__(self, "given", tuple(self.given))

    def evaluate(self, p: JointPmf) -> float:
        return mutual_information(p, self.left, self.right, self.given)


def markov_slack(p: JointPmf, a: Sequence[str], b: Sequence[str], c: Sequence[str]) -> float:
    """I(a; c | b): zero exactly when the chain a - b - c holds."""
    return mutual_information(p, a, c, given=b)


# ---------------------------------------------------------------------------
# Common-information solver: minimize I(Y1Y2;W) over p(w|y1,y2) subject to
# Y1 - W - Y2, by penalized multi-start coordinate search on simplex rows.

@dataclass
class WynerConfig:
    restarts: int = 64
    penalty: float = 100.0
    max_iters: int = 5000
    stall_limit: int = 50
    tol: float = 1e-9
    seed: int = 0
    markov_target: float = 1e-6
    accept_markov: float = 1e-4
    polish_penalty: float = 5e4


@dataclass
class WynerSolution:
    value: float
    witness: ConditionalPmf
    w_cardinality: int
    trace: list = field(default_factory=list)
    markov_slack: float = 0.0


def _wyner_terms(q2: np.ndarray, r: np.ndarray):
    """I(Y1Y2;W) and I(Y1;Y2|W) for a batch of conditionals r[(b,)cell,w]."""
    if r.ndim == 2:
        r = r[None]
    B, m, nw = r.shape
    n1, n2 = q2.shape
    j = q2.ravel()[None, :, None] * r           # (B, cell, w)
    pw = j.sum(axis=1)                           # (B, w)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(j > 0, r / np.where(pw[:, None, :] > 0, pw[:, None, :], 1.0), 1.0)
        i_joint = (j * np.log2(np.where(j > 0, ratio, 1.0))).sum(axis=(1, 2))
    jw = j.reshape(B, n1, n2, nw)
    p1w = jw.sum(axis=2)                         # (B, y1, w)
    p2w = jw.sum(axis=1)                         # (B, y2, w)
    h1 = -_xlog2(p1w).sum(axis=1) + _xlog2(pw)   # sum_y1 contributions per w
    h2 = -_xlog2(p2w).sum(axis=1) + _xlog2(pw)
    h12 = -_xlog2(jw).sum(axis=(1, 2)) + _xlog2(pw)
    slack = np.maximum(0.0, (h1 + h2 - h12).sum(axis=1))
    return np.maximum(0.0, i_joint), slack


def _wyner_seeds(m_support: int, nw: int):
    seeds = []
    det = np.zeros((m_support, nw))
    det[np.arange(m_support), np.arange(m_support) % nw] = 1.0
    seeds.append(det)                       # cell-index copy (always feasible)
    const = np.zeros((m_support, nw))
    const[:, 0] = 1.0
    seeds.append(const)                     # constant W
    return seeds


def _greedy_merge_map(q2: np.ndarray, support: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Greedy agglomeration of support cells into W-bins that keeps
    Y1 _|_ Y2 | W exact; each merge strictly lowers I(Y1Y2;W).  Returns the
    final cell -> bin map (good deterministic witnesses for structured
    sources)."""
    ms = len(support)
    assign = np.arange(ms)

    def stats(a):
        nb = a.max() + 1
        rows = np.zeros((ms, nb))
        rows[np.arange(ms), a] = 1.0
        full = np.zeros((q2.size, nb))
        full[support] = rows
        i_val, slack = _wyner_terms(q2, full)
        return float(i_val[0]), float(slack[0])

    while assign.max() > 0:
        bins = np.unique(assign)
        best = None
        for i, x in enumerate(bins):
            for y in bins[i + 1:]:
                trial = np.where(assign == y, x, assign)
                trial = np.unique(trial, return_inverse=True)[1]
                i_val, slack = stats(trial)
                if slack <= tol and (best is None or i_val < best[0]):
                    best = (i_val, trial)
        if best is None:
            break
        assign = best[1]
    return assign


def wyner_common_information(q: JointPmf, w_cap: int | None = None,
                             config: WynerConfig | None = None) -> WynerSolution:
    """Best upper bound found for Wyner's common information of a 2-variable pmf.

    Runs ``config.restarts`` local searches (structured seeds first, then
    Dirichlet restarts) on the penalized objective I(Y1Y2;W) + penalty *
    I(Y1;Y2|W), then polishes the winner under a large penalty until the
    conditional-independence slack is below ``markov_target``.
    """
    cfg = config or WynerConfig()
    if len(q.alphabets) != 2:
        raise UnknownVariable("common information is defined for a pmf over two variables")
    n1, n2 = q.sizes
    if w_cap is None:
        w_cap = n1 * n2
    if w_cap < 1:
        raise ValueError("w_cap must be >= 1")
    q2 = q.table
    flat = q2.ravel()
    support = np.flatnonzero(flat > 0)
    ms = len(support)

    def embed(rows):
        full = np.full((n1 * n2, w_cap), 1.0 / w_cap)
        full[support] = rows
        return full

    def objective(batch):
        rows = batch[0]
        full = np.repeat(np.full((n1 * n2, w_cap), 1.0 / w_cap)[None], rows.shape[0], axis=0)
        full[:, support, :] = rows
        i_joint, slack = _wyner_terms(q2, full)
        return i_joint + lam * slack

    rng = np.random.default_rng(cfg.seed)
    starts = _wyner_seeds(ms, w_cap)
    merged = _greedy_merge_map(q2, support)
    if merged.max() < w_cap:
        det = np.zeros((ms, w_cap))
        det[np.arange(ms), merged] = 1.0
        starts.insert(0, det)
    while len(starts) < cfg.restarts:
        starts.append(dirichlet_rows(rng, ms, w_cap))
    starts = starts[: max(cfg.restarts, len(starts))]

    trace = []
    polished = None   # best witness with slack <= markov_target
    fallback = None   # best witness with slack <= accept_markov only
    for ridx, start in enumerate(starts):
        lam = cfg.penalty
        blocks, _, _ = coordinate_descent(objective, [start], max_iters=cfg.max_iters,
                                          stall_limit=cfg.stall_limit, tol=cfg.tol)
        i_val, slack = _wyner_terms(q2, embed(blocks[0]))
        i_val, slack = float(i_val[0]), float(slack[0])
        if slack > cfg.markov_target:
            lam = cfg.polish_penalty
            blocks, _, _ = coordinate_descent(objective, blocks, max_iters=cfg.max_iters,
                                              stall_limit=cfg.stall_limit, tol=cfg.tol)
            i_val, slack = _wyner_terms(q2, embed(blocks[0]))
            i_val, slack = float(i_val[0]), float(slack[0])
        trace.append((ridx, i_val if slack <= cfg.accept_markov else math.inf))
        entry = (i_val, blocks[0].copy(), slack)
        if slack <= cfg.markov_target:
            if polished is None or i_val < polished[0]:
                polished = entry
        elif slack <= cfg.accept_markov:
            if fallback is None or i_val < fallback[0]:
                fallback = entry
    if fallback is not None and (polished is None or fallback[0] < polished[0] - 1e-9):
        # a looser witness looks better; give it one aggressive polish pass
        lam = 10.0 * cfg.polish_penalty
        blocks, _, _ = coordinate_descent(objective, [fallback[1]], max_iters=cfg.max_iters,
                                          stall_limit=cfg.stall_limit, tol=cfg.tol)
        i_val, slack = _wyner_terms(q2, embed(blocks[0]))
        i_val, slack = float(i_val[0]), float(slack[0])
        if slack <= cfg.markov_target and (polished is None or i_val < polished[0]):
            polished = (i_val, blocks[0].copy(), slack)
    best = polished if polished is not None else fallback
    if best is None:
        raise OptimizerFailed(f"no restart reached Markov slack <= {cfg.accept_markov}")

    i_val, rows, slack = best
    witness = ConditionalPmf(q.alphabets, (Alphabet("W", w_cap),), embed(rows))
    return WynerSolution(value=i_val, witness=witness, w_cardinality=w_cap,
                         trace=trace, markov_slack=slack)
